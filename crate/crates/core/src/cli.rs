//! Command-line front end. The binary only forwards to [`run`].
//!
//! Exit codes: 0 success, 1 a bound or claim failed, 2 usage, input or
//! solver trouble.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{verification_suite, EmpiricalCheck};
use crate::boxes::{BehaviorRef, DeviceSpec};
use crate::error::{invalid, Error, Result};
use crate::extractor::{bits_to_hex, extract_run, hex_to_bits, sequence_bound, verify_sequence_bound, ChainedDevice, ProductDevice};
use crate::ks_bell::{TARGET_OUTCOME, TARGET_SETTING};
use crate::ns_certify::{build_lp, lp_bound_formula, solve_lp, verify_certificate, Sense, SolveMode};
use crate::protocol::{
    monte_carlo, read_transcript, replay, run_seeded, security_report, standard_functional, write_campaign_csv,
    write_transcript, ProtocolParams, ProtocolRun, Transcript, Verdict,
};
use crate::rational::{self, Rational};
use crate::seed::RunSeeds;
use crate::sv_source::{sv_chernoff_oracle, SettingMap, SourceSpec, Strategy};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RANDAMP_OUT";
const DEFAULT_OUT_DIR: &str = "randamp-out";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything a simulation needs. Flags override keys one to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub protocol: ProtocolParams,
    pub device: DeviceSpec,
    pub source: SourceSpec,
    pub trials: usize,
    pub master_seed: u64,
    /// Transcripts written for the first this-many trials.
    pub transcripts: usize,
    /// Not part of the hash.
    pub out_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            protocol: ProtocolParams::default(),
            device: DeviceSpec::Iid {
                behavior: BehaviorRef::Ideal,
            },
            source: SourceSpec {
                epsilon: 0.0,
                strategy: Strategy::Unbiased,
                seed: 0,
            },
            trials: 200,
            master_seed: 1,
            transcripts: 1,
            out_dir: None,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
            message: e.to_string(),
        })
    }

    /// Checks every precondition before any work starts.
    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        if self.source.epsilon != self.protocol.epsilon {
            return Err(invalid("source epsilon differs from protocol epsilon"));
        }
        SettingMap::by_id(&self.protocol.map)
            .and_then(|m| crate::sv_source::SvSource::from_spec(&self.source, &m))?;
        if self.trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        if self.transcripts > self.trials {
            return Err(invalid("cannot write more transcripts than trials"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, output paths excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = None;
        hash_json(&c)
    }
}

fn hash_json<T: Serialize>(v: &T) -> String {
    let bytes = serde_json::to_vec(v).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Parser, Debug)]
#[command(name = "randamp", version, about = "Randomness amplification: certification, simulation and checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the no-signaling program on a grid of Bell caps and write certificates.
    Certify(CertifyArgs),
    /// Run a Monte Carlo campaign and write transcripts and a summary.
    Simulate(SimulateArgs),
    /// Security parameters for a config or a transcript.
    Report(ReportArgs),
    /// Extract output bits from an accepted transcript.
    Extract(ExtractArgs),
    /// Empirical and exact checks of the concentration bounds.
    VerifyBounds(VerifyArgs),
    /// Recompute the statistics of a transcript and re-run it when possible.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// Comma-separated decimal Bell caps.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    delta_grid: Vec<String>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Sets both the protocol and the source epsilon.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    map: Option<String>,
    /// unbiased, avoid_target, or a JSON strategy object.
    #[arg(long)]
    source_strategy: Option<String>,
    /// ideal, uniform, local_witness, attack_min, attack_max,
    /// depolarized:<eta>, or a JSON device spec.
    #[arg(long)]
    device: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    transcripts: Option<usize>,
    #[arg(long)]
    output_bits: Option<usize>,
    #[arg(long)]
    block_length: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    o: Overrides,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Transcript to report on; without it the config parameters are used.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Acceptance probability used in the headline statement.
    #[arg(long, default_value_t = 1.0)]
    q_acc: f64,
    #[command(flatten)]
    o: Overrides,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(long)]
    transcript: PathBuf,
    /// Second-source bits as hex; by default they are regenerated from the
    /// transcript's source spec and seeds.
    #[arg(long)]
    t_hex: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,1000,2000")]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 10_000)]
    fuzz: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    #[arg(long)]
    transcript: PathBuf,
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.cmd {
        Command::Certify(a) => cmd_certify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Report(a) => cmd_report(a),
        Command::Extract(a) => cmd_extract(a),
        Command::VerifyBounds(a) => cmd_verify_bounds(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn out_dir(flag: Option<PathBuf>, config: Option<&PathBuf>) -> PathBuf {
    flag.or_else(|| config.cloned())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    stdout_text(&format!("{text}\n"))
}

/// Writes to stdout, treating a closed pipe as success.
fn stdout_text(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn parse_device(s: &str) -> Result<DeviceSpec> {
    let iid = |behavior| Ok(DeviceSpec::Iid { behavior });
    match s {
        "ideal" => iid(BehaviorRef::Ideal),
        "uniform" => iid(BehaviorRef::Uniform),
        "local_witness" => iid(BehaviorRef::LocalWitness),
        "attack_min" => iid(BehaviorRef::AttackMin),
        "attack_max" => iid(BehaviorRef::AttackMax),
        _ if s.starts_with("depolarized:") => {
            let eta = s["depolarized:".len()..]
                .parse()
                .map_err(|_| invalid(format!("bad noise level in {s:?}")))?;
            iid(BehaviorRef::Depolarized { eta })
        }
        _ if s.trim_start().starts_with('{') => Ok(serde_json::from_str(s)?),
        _ => Err(invalid(format!("unknown device {s:?}"))),
    }
}

fn parse_strategy(s: &str) -> Result<Strategy> {
    match s {
        "unbiased" => Ok(Strategy::Unbiased),
        "avoid_target" => Ok(Strategy::AvoidTarget { target: TARGET_SETTING }),
        _ if s.trim_start().starts_with('{') => Ok(serde_json::from_str(s)?),
        _ => Err(invalid(format!("unknown source strategy {s:?}"))),
    }
}

impl Overrides {
    fn apply(self) -> Result<Config> {
        let mut c = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(v) = self.n {
            c.protocol.n = v;
        }
        if let Some(v) = self.epsilon {
            c.protocol.epsilon = v;
            c.source.epsilon = v;
        }
        if let Some(v) = self.delta {
            c.protocol.delta = v;
        }
        if let Some(v) = self.mu1 {
            c.protocol.mu1 = v;
        }
        if let Some(v) = self.kappa {
            c.protocol.kappa = v;
        }
        if let Some(v) = self.map {
            c.protocol.map = v;
        }
        if let Some(v) = self.source_strategy {
            c.source.strategy = parse_strategy(&v)?;
        }
        if let Some(v) = self.device {
            c.device = parse_device(&v)?;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.seed {
            c.master_seed = v;
        }
        if let Some(v) = self.transcripts {
            c.transcripts = v;
        }
        if let Some(v) = self.output_bits {
            c.protocol.extractor.output_bits = v;
        }
        if let Some(v) = self.block_length {
            c.protocol.extractor.block_length = Some(v);
        }
        if let Some(v) = self.out {
            c.out_dir = Some(v);
        }
        c.validate()?;
        Ok(c)
    }
}

// ---- certify ----

/// One grid point of `certify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyRecord {
    pub version: String,
    pub config_hash: String,
    pub delta_tilde: String,
    pub optimum: String,
    pub optimum_f64: f64,
    /// `min(1, (3 + 2 delta_tilde) / 4)`.
    pub formula_bound: String,
    /// Whether the optimum attains the formula bound.
    pub attains_formula: bool,
    pub within_formula: bool,
    pub verified: bool,
    pub certificate: crate::ns_certify::CertificateJson,
}

/// Solves the maximization of `P(x*|u*)` under `B . P <= delta_tilde` and
/// checks its dual certificate.
pub fn certify_point(delta_tilde: &Rational, mode: SolveMode, config_hash: &str) -> Result<CertifyRecord> {
    let target = (TARGET_OUTCOME, TARGET_SETTING);
    let lp = build_lp(standard_functional(), delta_tilde.clone(), target, Sense::Maximize)?;
    let sol = solve_lp(&lp, mode)?;
    let verified = verify_certificate(&lp, &sol.dual) && sol.dual.bound == sol.optimum;
    let formula = lp_bound_formula(delta_tilde);
    Ok(CertifyRecord {
        version: VERSION.into(),
        config_hash: config_hash.into(),
        delta_tilde: rational::to_string(delta_tilde),
        optimum: rational::to_string(&sol.optimum),
        optimum_f64: sol.optimum_f64,
        attains_formula: sol.optimum == formula,
        within_formula: sol.optimum <= formula,
        formula_bound: rational::to_string(&formula),
        verified,
        certificate: sol.dual.to_json(&lp),
    })
}

fn cmd_certify(a: CertifyArgs) -> Result<i32> {
    let grid = a
        .delta_grid
        .iter()
        .map(|s| {
            let v = rational::parse_decimal(s.trim())?;
            if v.is_negative() {
                return Err(invalid(format!("grid value {s} is negative")));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let mode = match a.mode {
        ModeArg::Exact => SolveMode::Exact,
        ModeArg::Float => SolveMode::Float,
    };
    let hash = hash_json(&(&a.delta_grid, mode));
    let dir = out_dir(a.out, None);
    fs::create_dir_all(&dir)?;
    let mut csv = csv::Writer::from_path(dir.join("certify_summary.csv"))?;
    csv.write_record(["delta_tilde", "optimum", "formula_bound", "verified", "within_formula", "config_hash", "version"])?;
    let mut ok = true;
    for (k, dt) in grid.iter().enumerate() {
        let rec = certify_point(dt, mode, &hash)?;
        write_json(&dir.join(format!("certificate_{k:03}.json")), &rec)?;
        csv.write_record([
            rec.delta_tilde.as_str(),
            &rec.optimum,
            &rec.formula_bound,
            &rec.verified.to_string(),
            &rec.within_formula.to_string(),
            &hash,
            VERSION,
        ])?;
        println!(
            "delta_tilde={} optimum={} bound={} verified={} within={}",
            rec.delta_tilde, rec.optimum, rec.formula_bound, rec.verified, rec.within_formula
        );
        ok &= rec.verified && rec.within_formula;
    }
    csv.flush()?;
    Ok(if ok { 0 } else { 1 })
}

// ---- simulate ----

#[derive(Serialize)]
struct CampaignFile<'a> {
    version: &'a str,
    config_hash: &'a str,
    config: &'a Config,
    campaign: &'a crate::protocol::Campaign,
}

fn cmd_simulate(a: SimulateArgs) -> Result<i32> {
    let c = a.o.apply()?;
    let hash = c.hash();
    let dir = out_dir(None, c.out_dir.as_ref());
    fs::create_dir_all(&dir)?;
    let camp = monte_carlo(&c.device, &c.source, &c.protocol, c.trials, c.master_seed)?;
    let mut f = fs::File::create(dir.join("campaign.csv"))?;
    writeln!(f, "# randamp {VERSION} config_hash={hash}")?;
    write_campaign_csv(&camp, &mut f)?;
    // output paths stay out of the artifacts so reruns elsewhere match byte for byte
    let stored = Config { out_dir: None, ..c.clone() };
    write_json(
        &dir.join("campaign.json"),
        &CampaignFile {
            version: VERSION,
            config_hash: &hash,
            config: &stored,
            campaign: &camp,
        },
    )?;
    for t in 0..c.transcripts {
        let seeds = RunSeeds::for_trial(c.master_seed, t as u64);
        let run = run_seeded(&c.device, &c.source, &c.protocol, seeds)?;
        let tr = Transcript::from_run(&run, Some(c.device.clone()), Some(c.source.clone()), Some(hash.clone()));
        let f = std::io::BufWriter::new(fs::File::create(dir.join(format!("run_{t:04}.jsonl")))?);
        write_transcript(&tr, f)?;
    }
    println!(
        "trials={} accepted={} accept_rate={} ci95=[{:.6}, {:.6}] abort_bell={} abort_tomography={} out={}",
        camp.trials,
        camp.accepted,
        camp.accept_rate,
        camp.accept_ci.0,
        camp.accept_ci.1,
        camp.aborted_bell,
        camp.aborted_tomography,
        dir.display()
    );
    Ok(0)
}

// ---- report ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub version: String,
    pub config_hash: Option<String>,
    pub params: ProtocolParams,
    /// Verdict of the reported transcript, if any.
    pub verdict: Option<Verdict>,
    pub ln: Option<f64>,
    pub sn: Option<f64>,
    /// Entropy claims; absent for aborted runs.
    pub security: Option<crate::protocol::SecurityReport>,
    pub headline: Option<crate::protocol::Headline>,
}

pub fn build_report(params: &ProtocolParams, transcript: Option<&Transcript>, q_acc: f64, hash: Option<String>) -> Result<ReportFile> {
    let verdict = transcript.map(|t| t.summary.verdict);
    let claims = verdict.is_none_or(|v| v == Verdict::Accept);
    let security = if claims { Some(security_report(params)?) } else { None };
    Ok(ReportFile {
        version: VERSION.into(),
        config_hash: hash,
        params: params.clone(),
        verdict,
        ln: transcript.map(|t| t.summary.ln),
        sn: transcript.map(|t| t.summary.sn),
        headline: security.as_ref().map(|s| s.headline(q_acc)),
        security,
    })
}

fn load_transcript(path: &Path) -> Result<Transcript> {
    let f = fs::File::open(path)?;
    read_transcript(BufReader::new(f)).map_err(|e| match e {
        Error::Format { location, message } => Error::Format {
            location: format!("{}: {location}", path.display()),
            message,
        },
        e => e,
    })
}

fn cmd_report(a: ReportArgs) -> Result<i32> {
    if !(a.q_acc > 0.0 && a.q_acc <= 1.0) {
        return Err(invalid("q_acc must lie in (0, 1]"));
    }
    let rep = match &a.transcript {
        Some(p) => {
            let t = load_transcript(p)?;
            build_report(&t.header.params, Some(&t), a.q_acc, t.header.config_hash.clone())?
        }
        None => {
            let c = a.o.apply()?;
            build_report(&c.protocol, None, a.q_acc, Some(c.hash()))?
        }
    };
    print_json(&rep)?;
    Ok(0)
}

// ---- extract ----

#[derive(Serialize)]
struct ExtractFile<'a> {
    version: &'a str,
    config_hash: Option<&'a str>,
    bits_hex: String,
    sidecar: &'a crate::extractor::Sidecar,
}

fn run_from_transcript(t: &Transcript) -> ProtocolRun {
    ProtocolRun {
        params: t.header.params.clone(),
        seeds: t.header.seeds,
        rounds: t.rounds.clone(),
        bell_count: t.summary.bell_count,
        tomography_count: t.summary.tomography_count,
        l_n: t.summary.ln,
        s_n: t.summary.sn,
        verdict: t.summary.verdict,
        t_bits: None,
        extraction: None,
        extraction_skipped: None,
    }
}

fn cmd_extract(a: ExtractArgs) -> Result<i32> {
    let tr = load_transcript(&a.transcript)?;
    let p = &tr.header.params;
    if tr.summary.verdict != Verdict::Accept {
        return Err(Error::Precondition(format!("transcript verdict is {}", tr.summary.verdict)));
    }
    let t_bits = match &a.t_hex {
        Some(h) => hex_to_bits(h, p.n)?,
        None => {
            let (Some(d), Some(s)) = (&tr.header.device, &tr.header.source) else {
                return Err(invalid("transcript lacks device and source specs; pass --t-hex"));
            };
            let run = run_seeded(d, s, p, tr.header.seeds)?;
            if run.rounds != tr.rounds {
                eprintln!("re-simulated rounds differ from the transcript");
                return Ok(1);
            }
            run.t_bits.expect("accepted runs carry t bits")
        }
    };
    let report = security_report(p)?;
    let ex = extract_run(&run_from_transcript(&tr), &t_bits, &p.extractor, p.epsilon, report.min_entropy_bits)?;
    let file = ExtractFile {
        version: VERSION,
        config_hash: tr.header.config_hash.as_deref(),
        bits_hex: bits_to_hex(&ex.bits),
        sidecar: &ex.sidecar,
    };
    match a.out {
        Some(path) => write_json(&path, &file)?,
        None => print_json(&file)?,
    }
    Ok(0)
}

// ---- verify-bounds ----

/// Exact checks run alongside the Monte Carlo suite: the SV setting
/// Chernoff premise and the sequence-probability bound for small trees.
pub fn exact_checks() -> Result<Vec<EmpiricalCheck>> {
    let map = SettingMap::mod9();
    let mut out = Vec::new();
    for eps in ["0", "0.05", "0.1", "0.2", "0.3", "0.45"] {
        let e = rational::parse_decimal(eps)?;
        for k in [1usize, 5, 10] {
            let name = format!("sv_avoid_premise_eps{eps}");
            let row = match sv_chernoff_oracle(&e, &map, k) {
                Ok(o) => EmpiricalCheck {
                    name,
                    n: k,
                    trials: 0,
                    frequency: rational::to_f64(&o.exact_max),
                    bound: rational::to_f64(&o.zeta_bound),
                    sigma: 0.0,
                    passed: o.exact_max <= o.zeta_bound,
                },
                Err(Error::Precondition(_)) => EmpiricalCheck {
                    name,
                    n: k,
                    trials: 0,
                    frequency: f64::NAN,
                    bound: f64::NAN,
                    sigma: 0.0,
                    passed: false,
                },
                Err(e) => return Err(e),
            };
            out.push(row);
        }
    }
    let gamma = rational::frac(3, 4);
    let product = ProductDevice::with_peaks(6, &[0, 2, 4], &gamma, 3)?;
    let chained = ChainedDevice {
        k: vec![1, 3, 5],
        gamma: gamma.clone(),
        alphabet: 3,
    };
    for (name, check) in [
        ("sequence_bound_product", verify_sequence_bound(&product, 6, &[0, 2, 4], &gamma)?),
        ("sequence_bound_chained", verify_sequence_bound(&chained, 6, &[1, 3, 5], &gamma)?),
    ] {
        out.push(EmpiricalCheck {
            name: name.into(),
            n: 6,
            trials: 0,
            frequency: rational::to_f64(&check.max_sequence_probability),
            bound: rational::to_f64(&sequence_bound(3, &gamma)?),
            sigma: 0.0,
            passed: check.holds,
        });
    }
    Ok(out)
}

fn cmd_verify_bounds(a: VerifyArgs) -> Result<i32> {
    let mut rows = verification_suite(&a.ns, a.trials, a.fuzz, a.seed)?;
    rows.extend(exact_checks()?);
    let hash = hash_json(&(&a.ns, a.trials, a.fuzz, a.seed));
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["check", "n", "trials", "frequency", "bound", "sigma", "passed"])?;
        for r in &rows {
            w.write_record([
                r.name.clone(),
                r.n.to_string(),
                r.trials.to_string(),
                format!("{:e}", r.frequency),
                format!("{:e}", r.bound),
                format!("{:e}", r.sigma),
                if r.passed { "pass" } else { "fail" }.to_string(),
            ])?;
        }
        w.flush()?;
    }
    let mut text = format!("# randamp {VERSION} config_hash={hash}\n");
    text.push_str(std::str::from_utf8(&buf).expect("csv is utf-8"));
    match a.out {
        Some(p) => fs::write(p, &text)?,
        None => stdout_text(&text)?,
    }
    Ok(if rows.iter().all(|r| r.passed) { 0 } else { 1 })
}

// ---- replay ----

fn cmd_replay(a: ReplayArgs) -> Result<i32> {
    let t = load_transcript(&a.transcript)?;
    let r = replay(&t)?;
    print_json(&r)?;
    Ok(if r.ok() { 0 } else { 1 })
}
