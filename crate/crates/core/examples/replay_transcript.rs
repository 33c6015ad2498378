//! Writes a run to a JSONL transcript, reads it back and replays it.

use randamp::boxes::{BehaviorRef, DeviceSpec};
use randamp::protocol::{read_transcript, replay, run_seeded, write_transcript, ProtocolParams, Transcript};
use randamp::seed::RunSeeds;
use randamp::sv_source::{SourceSpec, Strategy};

fn main() {
    let p = ProtocolParams { n: 5_000, ..Default::default() };
    let src = SourceSpec { epsilon: 0.0, strategy: Strategy::Unbiased, seed: 0 };
    let dev = DeviceSpec::Iid { behavior: BehaviorRef::Ideal };
    let run = run_seeded(&dev, &src, &p, RunSeeds::from_master(3)).unwrap();

    let t = Transcript::from_run(&run, Some(dev), Some(src), None);
    let mut buf = Vec::new();
    write_transcript(&t, &mut buf).unwrap();
    println!("transcript: {} bytes, {} rounds", buf.len(), t.rounds.len());

    let back = read_transcript(buf.as_slice()).unwrap();
    let out = replay(&back).unwrap();
    println!(
        "replay: summary matches {}, re-simulation matches {:?}, ok {}",
        out.summary_matches,
        out.resimulated,
        out.ok()
    );
}
