//! JSON-lines transcripts: one header line, one line per round, one
//! summary line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{evaluate, run_seeded, Evaluation, ProtocolParams, ProtocolRun, Round, Verdict};
use crate::boxes::DeviceSpec;
use crate::error::{Error, Result};
use crate::extractor::bits_to_hex;
use crate::ks_bell::{OutcomePair, SettingPair};
use crate::seed::RunSeeds;
use crate::sv_source::SourceSpec;

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptHeader {
    pub version: u32,
    pub crate_version: String,
    #[serde(default)]
    pub config_hash: Option<String>,
    pub params: ProtocolParams,
    pub seeds: RunSeeds,
    /// Setting map id, repeated from `params` for readers that skip it.
    pub map: String,
    #[serde(default)]
    pub device: Option<DeviceSpec>,
    #[serde(default)]
    pub source: Option<SourceSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptSummary {
    pub bell_count: usize,
    pub tomography_count: usize,
    pub ln: f64,
    pub sn: f64,
    pub verdict: Verdict,
    /// Extractor output as hex, when the run was accepted.
    #[serde(default)]
    pub output_hex: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub header: TranscriptHeader,
    pub rounds: Vec<Round>,
    pub summary: TranscriptSummary,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Header(TranscriptHeader),
    Round { i: usize, u: SettingPair, x: OutcomePair },
    Summary(TranscriptSummary),
}

impl Transcript {
    pub fn from_run(
        run: &ProtocolRun,
        device: Option<DeviceSpec>,
        source: Option<SourceSpec>,
        config_hash: Option<String>,
    ) -> Self {
        Self {
            header: TranscriptHeader {
                version: TRANSCRIPT_VERSION,
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
                config_hash,
                params: run.params.clone(),
                seeds: run.seeds,
                map: run.params.map.clone(),
                device,
                source,
            },
            rounds: run.rounds.clone(),
            summary: TranscriptSummary {
                bell_count: run.bell_count,
                tomography_count: run.tomography_count,
                ln: run.l_n,
                sn: run.s_n,
                verdict: run.verdict,
                output_hex: run.extraction.as_ref().map(|e| bits_to_hex(&e.bits)),
            },
        }
    }
}

pub fn write_transcript<W: Write>(t: &Transcript, mut out: W) -> Result<()> {
    serde_json::to_writer(&mut out, &Line::Header(t.header.clone()))?;
    out.write_all(b"\n")?;
    for (i, r) in t.rounds.iter().enumerate() {
        serde_json::to_writer(&mut out, &Line::Round { i, u: r.u, x: r.x })?;
        out.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut out, &Line::Summary(t.summary.clone()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        location: format!("line {line}"),
        message: message.into(),
    }
}

pub fn read_transcript<R: BufRead>(input: R) -> Result<Transcript> {
    let mut header = None;
    let mut rounds = Vec::new();
    let mut summary = None;
    for (k, line) in input.lines().enumerate() {
        let no = k + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if summary.is_some() {
            return Err(format_err(no, "content after the summary record"));
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|e| format_err(no, e.to_string()))?;
        match parsed {
            Line::Header(h) => {
                if header.is_some() || !rounds.is_empty() {
                    return Err(format_err(no, "header must be the first record"));
                }
                if h.version != TRANSCRIPT_VERSION {
                    return Err(format_err(no, format!("unsupported transcript version {}", h.version)));
                }
                header = Some(h);
            }
            Line::Round { i, u, x } => {
                if header.is_none() {
                    return Err(format_err(no, "round before header"));
                }
                if i != rounds.len() {
                    return Err(format_err(no, format!("expected round {}, found {i}", rounds.len())));
                }
                rounds.push(Round { u, x });
            }
            Line::Summary(s) => {
                if header.is_none() {
                    return Err(format_err(no, "summary before header"));
                }
                summary = Some(s);
            }
        }
    }
    let header = header.ok_or_else(|| format_err(0, "missing header"))?;
    let summary = summary.ok_or_else(|| format_err(0, "missing summary record"))?;
    if rounds.len() != header.params.n {
        return Err(format_err(0, format!("header says n={} but {} rounds follow", header.params.n, rounds.len())));
    }
    Ok(Transcript { header, rounds, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub recomputed: Evaluation,
    /// Recomputed statistics equal the stored summary.
    pub summary_matches: bool,
    /// Re-simulation from the stored specs and seeds, when both specs are present.
    pub resimulated: Option<bool>,
    /// Extractor output equal to the stored one after re-simulation.
    pub output_matches: Option<bool>,
}

impl ReplayOutcome {
    pub fn ok(&self) -> bool {
        self.summary_matches && self.resimulated != Some(false) && self.output_matches != Some(false)
    }
}

/// Recomputes the statistics of a transcript and, if it names its device
/// and source, re-runs the protocol and compares round by round.
pub fn replay(t: &Transcript) -> Result<ReplayOutcome> {
    let p = &t.header.params;
    let ev = evaluate(&t.rounds, p.delta, p.mu1);
    let s = &t.summary;
    let summary_matches = ev.bell_count == s.bell_count
        && ev.tomography_count == s.tomography_count
        && ev.l_n == s.ln
        && ev.s_n == s.sn
        && ev.verdict == s.verdict;
    let (resimulated, output_matches) = match (&t.header.device, &t.header.source) {
        (Some(d), Some(src)) => {
            let run = run_seeded(d, src, p, t.header.seeds)?;
            let hex = run.extraction.as_ref().map(|e| bits_to_hex(&e.bits));
            (Some(run.rounds == t.rounds), Some(hex == s.output_hex))
        }
        _ => (None, None),
    };
    Ok(ReplayOutcome {
        recomputed: ev,
        summary_matches,
        resimulated,
        output_matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::BehaviorRef;
    use crate::sv_source::Strategy;

    fn sample() -> Transcript {
        let p = ProtocolParams {
            n: 3000,
            ..Default::default()
        };
        let dev = DeviceSpec::Iid {
            behavior: BehaviorRef::Ideal,
        };
        let src = SourceSpec {
            epsilon: 0.0,
            strategy: Strategy::Unbiased,
            seed: 0,
        };
        let run = run_seeded(&dev, &src, &p, RunSeeds::from_master(5)).unwrap();
        Transcript::from_run(&run, Some(dev), Some(src), None)
    }

    #[test]
    fn round_trip_and_replay() {
        let t = sample();
        let mut buf = Vec::new();
        write_transcript(&t, &mut buf).unwrap();
        let back = read_transcript(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        let r = replay(&back).unwrap();
        assert!(r.ok());
        assert_eq!(r.resimulated, Some(true));
    }

    #[test]
    fn tampering_is_detected() {
        let mut t = sample();
        t.summary.bell_count += 1;
        assert!(!replay(&t).unwrap().summary_matches);
        let mut t = sample();
        let i = t.rounds.iter().position(|r| r.u != crate::ks_bell::TARGET_SETTING).unwrap();
        t.rounds[i].u = SettingPair::new(t.rounds[i].u.alice % 9 + 1, t.rounds[i].u.bob);
        assert_eq!(replay(&t).unwrap().resimulated, Some(false));
    }

    #[test]
    fn malformed_lines_report_location() {
        let t = sample();
        let mut buf = Vec::new();
        write_transcript(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[3] = "{\"type\":\"round\",\"i\":2,\"u\":[0,1],\"x\":[1,1]}";
        let err = read_transcript(lines.join("\n").as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }
}
