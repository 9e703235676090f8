//! The `pmcode` command line.
//!
//! Exit codes: 0 success, 1 usage or invalid parameters, 2 I/O or malformed
//! share file, 3 decoding failed (more corruption than the chosen `p`),
//! 4 a check flagged a problem (corruption detected, leakage found, a fuzz
//! failure). Errors are reported on stderr as one JSON object
//! `{"error": kind, "message": text}`.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pmcode_core::audit::{self, ContextDependent, FuzzConfig, Independence, ViewSpec};
use pmcode_core::cluster::{self, SimulationConfig};
use pmcode_core::sharefile::{self, Packing, ShareFile, ShareHeader};
use pmcode_core::{Code, CodeSpec, Detection, Error, Fe, PrimeField, Regime, RegeneratingCode, Share};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_DECODE: i32 = 3;
pub const EXIT_FLAGGED: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "pmcode", version, about = "Product-matrix regenerating codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split a file into n share files.
    Encode(EncodeArgs),
    /// Rebuild a failed node's share file from helper share files.
    Repair(RepairArgs),
    /// Recover the original file from share files.
    Reconstruct(ReconstructArgs),
    /// Check shares, or the data helpers would send for a repair, for corruption.
    Detect(DetectArgs),
    /// Run a security audit described by a JSON config.
    Audit(AuditArgs),
    /// Replay a cluster event script described by a JSON config.
    Simulate(ConfigArg),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RegimeArg {
    Mbr,
    Msr,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(short)]
    n: usize,
    #[arg(short)]
    k: usize,
    #[arg(short)]
    d: usize,
    /// Prime field modulus.
    #[arg(long)]
    field: u64,
    #[arg(long, default_value_t = 1)]
    beta: usize,
    #[arg(long, default_value_t = 0)]
    ell: usize,
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Seed for the secrecy randomness; OS entropy when absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    systematic: bool,
    /// Read IN as whitespace or comma separated field elements instead of bytes.
    #[arg(long)]
    symbols: bool,
    input: PathBuf,
    outdir: PathBuf,
}

#[derive(Args, Debug)]
struct RepairArgs {
    #[arg(long)]
    failed: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    helpers: Vec<usize>,
    #[arg(short, default_value_t = 0)]
    p: usize,
    /// Output path; defaults to the failed node's file in DIR.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory holding share_NNN.pmrc files.
    dir: PathBuf,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(short, default_value_t = 0)]
    p: usize,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(required = true)]
    shares: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[arg(short, default_value_t = 0)]
    p: usize,
    /// Check repair data for this node instead of the shares themselves.
    #[arg(long, requires = "helpers")]
    failed: Option<usize>,
    #[arg(long, value_delimiter = ',', requires = "failed")]
    helpers: Vec<usize>,
    /// Share files, or a single directory when --failed is given.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AuditKind {
    Leakage,
    Rank,
    HelperIndependence,
    Fuzz,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(value_enum)]
    kind: AuditKind,
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args, Debug)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

/// JSON config for `audit`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub code: CodeSpec,
    /// Views to audit; when empty every admissible view of the code's
    /// `(ell, m)` is used.
    #[serde(default)]
    pub views: Vec<ViewSpec>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub seed: u64,
    /// Also run the context-dependent negative control.
    #[serde(default)]
    pub mock: bool,
    #[serde(default)]
    pub fuzz: FuzzConfig,
}

fn default_depth() -> usize {
    2
}

fn default_budget() -> u64 {
    audit::DEFAULT_BUDGET as u64
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Io(PathBuf, io::Error),
    Usage(String),
    Json(PathBuf, serde_json::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io(..) => "Io",
            CliError::Usage(_) => "Usage",
            CliError::Json(..) => "Config",
        }
    }

    fn code(&self) -> i32 {
        match self {
            CliError::Core(Error::DecodeFailure(_) | Error::TooManyErasures { .. }) => EXIT_DECODE,
            CliError::Core(Error::Format(_) | Error::InvalidShare(_)) | CliError::Io(..) => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Json(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Runs the command line and returns the process exit code.
pub fn cli_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            report(&CliError::Usage(e.to_string().trim().to_string()));
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Encode(a) => encode(a),
        Command::Repair(a) => repair(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Detect(a) => detect(a),
        Command::Audit(a) => run_audit(a),
        Command::Simulate(a) => simulate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            report(&e);
            e.code()
        }
    }
}

fn report(e: &CliError) {
    eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Io(path.into(), e))
}

fn write(path: &Path, data: &[u8]) -> CliResult<()> {
    fs::write(path, data).map_err(|e| CliError::Io(path.into(), e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    serde_json::from_slice(&read(path)?).map_err(|e| CliError::Json(path.into(), e))
}

fn print_json<T: Serialize>(value: &T) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    // a closed pipe downstream is not an error worth reporting
    let _ = writeln!(io::stdout().lock(), "{text}");
}

/// File name of a node's share inside an output directory.
pub fn share_name(node: usize) -> String {
    format!("share_{node:03}.pmrc")
}

fn parse_symbols(field: PrimeField, text: &str) -> CliResult<Vec<Fe>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            let v: u64 = t
                .parse()
                .map_err(|_| CliError::Usage(format!("not a field element: {t:?}")))?;
            if v >= field.modulus() as u64 {
                return Err(CliError::Core(Error::InvalidParams(format!(
                    "symbol {v} is not below {}",
                    field.modulus()
                ))));
            }
            Ok(field.elem(v))
        })
        .collect()
}

fn encode(a: EncodeArgs) -> CliResult<i32> {
    let regime = match a.regime {
        RegimeArg::Mbr => Regime::Mbr,
        RegimeArg::Msr => Regime::Msr,
    };
    let mut spec = CodeSpec::new(regime, a.n, a.k, a.d, a.field)
        .with_beta(a.beta)
        .secure(a.ell, a.m);
    spec.systematic = a.systematic;
    let code = spec.build()?;
    let field = code.field();
    let data = read(&a.input)?;
    let (mut symbols, packing, original_len) = if a.symbols {
        let text = String::from_utf8(data).map_err(|_| CliError::Usage("symbol input is not UTF-8".into()))?;
        let s = parse_symbols(field, &text)?;
        let len = s.len();
        (s, Packing::Symbols, len)
    } else {
        let len = data.len();
        (sharefile::pack_bytes(field, &data, code.message_unit())?, Packing::Bytes, len)
    };
    sharefile::pad(field, &mut symbols, code.message_unit());
    let mut rng = match a.seed {
        Some(seed) => ChaCha8Rng::seed_from_u64(seed),
        None => ChaCha8Rng::from_entropy(),
    };
    let shares = code.encode(&symbols, &mut rng)?;
    fs::create_dir_all(&a.outdir).map_err(|e| CliError::Io(a.outdir.clone(), e))?;
    let stripes = symbols.len() / code.message_len();
    for share in shares {
        let header = header_for(&code, spec.systematic, share.node, stripes, original_len, packing);
        let file = ShareFile { header, share };
        write(&a.outdir.join(share_name(file.share.node)), &file.to_bytes())?;
    }
    print_json(&json!({
        "shares": code.n(),
        "stripes": stripes,
        "original_len": original_len,
        "outdir": a.outdir,
    }));
    Ok(EXIT_OK)
}

fn header_for(code: &Code, systematic: bool, node: usize, stripes: usize, original_len: usize, packing: Packing) -> ShareHeader {
    let spec = code.spec();
    ShareHeader {
        regime: spec.regime,
        systematic,
        n: spec.n as u32,
        k: spec.k as u32,
        d: spec.d as u32,
        beta: spec.beta as u32,
        ell: spec.ell as u32,
        m: spec.m as u32,
        modulus: spec.field,
        node: node as u32,
        stripes: stripes as u64,
        original_len: original_len as u64,
        packing,
    }
}

/// Loads share files and checks that they belong to one encoding.
fn load_shares(paths: &[PathBuf]) -> CliResult<(Code, ShareHeader, Vec<Share>)> {
    let mut files = vec![];
    for p in paths {
        files.push(ShareFile::from_bytes(&read(p)?).map_err(|e| match e {
            Error::Format(m) => CliError::Core(Error::Format(format!("{}: {m}", p.display()))),
            other => other.into(),
        })?);
    }
    let first = files
        .first()
        .ok_or_else(|| CliError::Usage("no share files given".into()))?
        .header
        .clone();
    let mut nodes = std::collections::BTreeSet::new();
    for f in &files {
        let mut h = f.header.clone();
        h.node = first.node;
        if h != first {
            return Err(Error::Format(format!("share of node {} comes from a different encoding", f.header.node)).into());
        }
        if !nodes.insert(f.header.node) {
            return Err(CliError::Usage(format!("node {} given twice", f.header.node)));
        }
    }
    let code = first.code_spec().build()?;
    Ok((code, first, files.into_iter().map(|f| f.share).collect()))
}

fn helper_paths(dir: &Path, helpers: &[usize]) -> Vec<PathBuf> {
    helpers.iter().map(|&h| dir.join(share_name(h))).collect()
}

fn repair(a: RepairArgs) -> CliResult<i32> {
    let (code, header, shares) = load_shares(&helper_paths(&a.dir, &a.helpers))?;
    let refs: Vec<&Share> = shares.iter().collect();
    let data = code.helper_data(&refs, a.failed)?;
    let share = code.repair(a.failed, &data, a.p)?;
    let header = ShareHeader {
        node: a.failed as u32,
        ..header
    };
    let out = a.out.unwrap_or_else(|| a.dir.join(share_name(a.failed)));
    write(&out, &ShareFile { header, share }.to_bytes())?;
    print_json(&json!({ "repaired": a.failed, "helpers": a.helpers, "p": a.p, "out": out }));
    Ok(EXIT_OK)
}

fn reconstruct(a: ReconstructArgs) -> CliResult<i32> {
    let (code, header, shares) = load_shares(&a.shares)?;
    let symbols = code.reconstruct(&shares, a.p)?;
    let len = header.original_len as usize;
    let bytes = match header.packing {
        Packing::Bytes => sharefile::unpack_bytes(&symbols, len)?,
        Packing::Symbols => {
            let text: Vec<String> = symbols[..len].iter().map(|x| x.value().to_string()).collect();
            let mut s = text.join(" ");
            s.push('\n');
            s.into_bytes()
        }
    };
    write(&a.output, &bytes)?;
    print_json(&json!({ "shares": shares.len(), "p": a.p, "bytes": bytes.len(), "output": a.output }));
    Ok(EXIT_OK)
}

fn detect(a: DetectArgs) -> CliResult<i32> {
    let verdict = match a.failed {
        Some(failed) => {
            let [dir] = a.inputs.as_slice() else {
                return Err(CliError::Usage("with --failed, give one share directory".into()));
            };
            let (code, _, shares) = load_shares(&helper_paths(dir, &a.helpers))?;
            let refs: Vec<&Share> = shares.iter().collect();
            let data = code.helper_data(&refs, failed)?;
            code.detect_repair(failed, &data, a.p)?
        }
        None => {
            let (code, _, shares) = load_shares(&a.inputs)?;
            code.detect_shares(&shares, a.p)?
        }
    };
    print_json(&json!({ "result": verdict, "p": a.p }));
    Ok(match verdict {
        Detection::Clean => EXIT_OK,
        Detection::Corrupted => EXIT_FLAGGED,
    })
}

fn run_audit(a: AuditArgs) -> CliResult<i32> {
    let config: AuditConfig = read_json(&a.config)?;
    let code = config.code.build()?;
    let budget = config.budget as u128;
    let views = if config.views.is_empty() {
        let (ell, m) = code.secrecy();
        ViewSpec::all_admissible(code.n(), ell, m, config.depth)
    } else {
        config.views.clone()
    };
    let (report, flagged) = match a.kind {
        AuditKind::Leakage => {
            let audits = views
                .iter()
                .map(|v| audit::audit_view(&code, v, budget))
                .collect::<Result<Vec<_>, _>>()?;
            let flagged = audits.iter().any(|x| !x.leakage.is_secure() || !x.implication_holds);
            (json!({ "views": audits }), flagged)
        }
        AuditKind::Rank => {
            let message: Vec<Fe> = (0..code.message_len()).map(|t| code.field().elem(t as u64 + 1)).collect();
            let mut rows = vec![];
            let mut flagged = false;
            for v in &views {
                let rank = audit::entropy_rank_check(&code, v)?;
                let rec = audit::randomness_recoverability(&code, v, &message)?;
                flagged |= !rank.pass || rec != audit::Recoverability::Determined;
                rows.push(json!({ "view": v, "rank": rank, "recoverability": rec }));
            }
            (json!({ "views": rows }), flagged)
        }
        AuditKind::HelperIndependence => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let msg: Vec<Fe> = {
                use rand::Rng;
                let q = code.field().modulus() as u64;
                (0..code.message_unit()).map(|_| code.field().elem(rng.gen_range(0..q))).collect()
            };
            let shares = code.encode(&msg, &mut rng)?;
            let result = audit::helper_independence(&code, &shares)?;
            let flagged = !matches!(result, Independence::Holds { .. });
            let mut out = json!({ "code": result });
            if config.mock {
                out["mock"] = serde_json::to_value(audit::helper_independence(&ContextDependent(code.clone()), &shares)?)
                    .expect("report serializes");
            }
            (out, flagged)
        }
        AuditKind::Fuzz => {
            let report = audit::adversary_fuzz(&code, &config.fuzz)?;
            let flagged = report.failures() > 0;
            (json!({ "fuzz": report, "cases": report.cases(), "failures": report.failures() }), flagged)
        }
    };
    print_json(&report);
    Ok(if flagged { EXIT_FLAGGED } else { EXIT_OK })
}

fn simulate(a: ConfigArg) -> CliResult<i32> {
    let config: SimulationConfig = read_json(&a.config)?;
    let report = cluster::simulate(&config)?;
    print_json(&report);
    Ok(EXIT_OK)
}
