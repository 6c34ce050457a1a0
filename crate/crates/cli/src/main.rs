use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use idos_core::codec::EventRecord;
use idos_core::exponents::{decompose_dominance, find_dominant_permutation, infer_constraints};
use idos_core::simulate::simulate_channel;
use idos_core::verify::{estimate_cases, verify_idos, VerifyError, VerifyMode, VerifyOptions};
use idos_core::{
    CodeParams, ConstructionKind, Decoder, Encoder, ExponentMatrix, FieldCtx, FieldElement, GeneratorSpec,
};

const EXIT_FAIL: u8 = 1;
const EXIT_GUARDRAIL: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;
const DEFAULT_MAX_CASES: u128 = 5_000_000;

#[derive(Parser)]
#[command(name = "idos", version, about = "Streaming codes with information-debt-optimal delay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a generator spec (construction a|b) and print it as JSON.
    Construct(ConstructArgs),
    /// Check every worst-case decoding window of a spec.
    Verify(VerifyArgs),
    /// Dominant permutation of an exponent matrix, optionally by column parts.
    Domperm(DompermArgs),
    /// Encode messages into a JSON-lines trace.
    Encode(EncodeArgs),
    /// Decode a JSON-lines trace into recovery events.
    Decode(DecodeArgs),
    /// Run an i.i.d. symbol-erasure channel through encoder and decoder.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// Positional form: CONSTRUCTION N K M TAU, e.g. `a 4 2 1 2`.
    positional: Vec<String>,
    #[arg(long)]
    construction: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    tau: Option<usize>,
    /// Field degree; defaults to the smallest degree the construction's bound allows.
    #[arg(long)]
    degree: Option<usize>,
    /// JSON file holding the modulus exponents, e.g. [37, 6, 4, 1, 0].
    #[arg(long)]
    modulus: Option<PathBuf>,
    /// Accept a degree below the bound (no guarantee then).
    #[arg(long)]
    allow_below_bound: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value = "both")]
    mode: VerifyMode,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Abort when more decoding matrices would be checked (default: $IDOS_MAX_CASES or 5000000).
    #[arg(long)]
    max_cases: Option<u128>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DompermArgs {
    /// JSON matrix: nested rows with null for -inf, or {"rows","cols","entries"}.
    #[arg(long)]
    matrix: PathBuf,
    /// Column parts, 1-based, e.g. "1,2;3,4".
    #[arg(long)]
    partition: Option<String>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// JSON array with one array of hex field elements per slot.
    #[arg(long)]
    messages: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// JSON lines with "t" and either "received" [{"idx","val"}] or "sent".
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    slots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum CliError {
    Usage(anyhow::Error),
    Io(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Usage(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(anyhow!(e).context(format!("reading {}", path.display()))))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    let res = match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    };
    res.map_err(CliError::Io)
}

fn load_spec(path: &Path) -> CliResult<(GeneratorSpec, FieldCtx)> {
    let spec = GeneratorSpec::from_json(&read(path)?).with_context(|| format!("loading spec {}", path.display()))?;
    let ctx = spec.field().context("building the spec field")?;
    Ok((spec, ctx))
}

fn construct(a: ConstructArgs) -> CliResult<()> {
    let mut pos = a.positional.iter();
    let kind_s = a.construction.clone().or_else(|| pos.next().cloned());
    let mut num = |flag: Option<usize>, name: &str| -> anyhow::Result<usize> {
        match flag {
            Some(v) => Ok(v),
            None => pos
                .next()
                .ok_or_else(|| anyhow!("missing {name}"))?
                .parse()
                .with_context(|| format!("parsing {name}")),
        }
    };
    let n = num(a.n, "n")?;
    let k = num(a.k, "k")?;
    let m = num(a.m, "m")?;
    let tau = num(a.tau, "tau")?;
    if pos.next().is_some() {
        return Err(anyhow!("too many positional arguments").into());
    }
    let kind: ConstructionKind = kind_s
        .ok_or_else(|| anyhow!("missing construction"))?
        .parse()
        .map_err(|e| anyhow!("{e}"))?;
    let modulus = match &a.modulus {
        Some(p) => Some(serde_json::from_str::<Vec<usize>>(&read(p)?).context("parsing modulus")?),
        None => None,
    };
    let params = CodeParams::new(n, k, m, tau).context("parameters")?;
    let spec = GeneratorSpec::construct(kind, params, a.degree, modulus, a.seed, a.allow_below_bound)
        .map_err(|e| anyhow!(e))?;
    emit(a.out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&spec).expect("spec json")))
}

fn max_cases_default() -> anyhow::Result<u128> {
    match std::env::var("IDOS_MAX_CASES") {
        Ok(v) => v.trim().parse().context("IDOS_MAX_CASES must be an integer"),
        Err(_) => Ok(DEFAULT_MAX_CASES),
    }
}

fn verify(a: VerifyArgs) -> CliResult<u8> {
    let (spec, ctx) = load_spec(&a.spec)?;
    let cap = match a.max_cases {
        Some(c) => c,
        None => max_cases_default()?,
    };
    eprintln!("estimated decoding matrices: {}", estimate_cases(&spec.params));
    let opts = VerifyOptions {
        mode: a.mode,
        jobs: a.jobs,
        max_cases: Some(cap),
        seed: a.seed,
        trials: a.trials,
    };
    match verify_idos(&spec, &ctx, &opts) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("report json");
            emit(a.out.as_deref(), &format!("{text}\n"))?;
            Ok(if report.passed() { 0 } else { EXIT_FAIL })
        }
        Err(e @ VerifyError::Guardrail { .. }) => {
            eprintln!("idos: {e}; raise --max-cases or IDOS_MAX_CASES to run anyway");
            Ok(EXIT_GUARDRAIL)
        }
        Err(e) => Err(anyhow!(e).into()),
    }
}

fn parse_matrix(text: &str) -> anyhow::Result<ExponentMatrix> {
    let v: Value = serde_json::from_str(text).context("matrix is not JSON")?;
    if v.is_array() {
        let rows = serde_json::from_value(v).context("matrix rows")?;
        Ok(ExponentMatrix::from_rows(rows)?)
    } else {
        Ok(serde_json::from_value(v).context("matrix object")?)
    }
}

fn parse_partition(s: &str, cols: usize) -> anyhow::Result<Vec<Vec<usize>>> {
    let parts: Vec<Vec<usize>> = s
        .split(';')
        .map(|part| {
            part.split(',')
                .map(|c| {
                    let c: usize = c.trim().parse().with_context(|| format!("bad column {c:?}"))?;
                    if c == 0 || c > cols {
                        bail!("column {c} outside 1..={cols}");
                    }
                    Ok(c - 1)
                })
                .collect()
        })
        .collect::<anyhow::Result<_>>()?;
    let mut all: Vec<usize> = parts.iter().flatten().copied().collect();
    all.sort_unstable();
    if all != (0..cols).collect::<Vec<_>>() {
        bail!("partition must cover every column exactly once");
    }
    Ok(parts)
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

fn domperm(a: DompermArgs) -> CliResult<()> {
    let m = parse_matrix(&read(&a.matrix)?)?;
    if !m.is_square() {
        return Err(anyhow!("matrix must be square, got {}x{}", m.rows(), m.cols()).into());
    }
    let out = match &a.partition {
        None => {
            let r = find_dominant_permutation(&m);
            json!({
                "exists": r.exists,
                "sigma_star": r.sigma_star.as_deref().map(one_based),
                "dominant_sum": r.dominant_sum,
                "runner_up_sum": r.runner_up_sum,
                "max_sum": r.max_sum,
            })
        }
        Some(p) => {
            let parts = parse_partition(p, m.cols())?;
            let constraints = infer_constraints(&m, &parts);
            let pairs: Vec<_> = parts.into_iter().zip(constraints).collect();
            match decompose_dominance(&m, &pairs).map_err(|e| anyhow!(e))? {
                None => json!({ "exists": false, "certificate": null }),
                Some(c) => json!({
                    "exists": true,
                    "dominant_sum": c.total,
                    "sigma_star": one_based(&c.sigma_star),
                    "certificate": c.parts.iter().map(|p| json!({
                        "columns": one_based(&p.columns),
                        "rows": one_based(&p.rows),
                        "dominant_sum": p.dominant_sum,
                    })).collect::<Vec<_>>(),
                }),
            }
        }
    };
    emit(None, &format!("{}\n", serde_json::to_string_pretty(&out).expect("json")))
}

fn encode(a: EncodeArgs) -> CliResult<()> {
    let (spec, ctx) = load_spec(&a.spec)?;
    let msgs: Vec<Vec<String>> = serde_json::from_str(&read(&a.messages)?).context("parsing messages")?;
    let mut enc = Encoder::new(&spec, &ctx).map_err(|e| anyhow!(e))?;
    let mut out = String::new();
    for (i, slot) in msgs.iter().enumerate() {
        let s: Vec<FieldElement> = slot
            .iter()
            .map(|h| ctx.parse_hex(h))
            .collect::<Result<_, _>>()
            .with_context(|| format!("slot {}", i + 1))?;
        let c = enc.encode_step(&s).map_err(|e| anyhow!(e).context(format!("slot {}", i + 1)))?;
        let sent: Vec<String> = c.iter().map(|e| ctx.to_hex(e)).collect();
        out.push_str(&json!({ "t": i + 1, "sent": sent }).to_string());
        out.push('\n');
    }
    emit(a.out.as_deref(), &out)
}

fn decode(a: DecodeArgs) -> CliResult<()> {
    let (spec, ctx) = load_spec(&a.spec)?;
    let text = read(&a.trace)?;
    let mut dec = Decoder::new(&spec, &ctx).map_err(|e| anyhow!(e))?;
    let mut out = String::new();
    for (lineno, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let ctx_msg = || format!("trace line {}", lineno + 1);
        let v: Value = serde_json::from_str(line).with_context(ctx_msg)?;
        let t = v["t"].as_u64().ok_or_else(|| anyhow!("missing slot \"t\"")).with_context(ctx_msg)?;
        let mut rx = Vec::new();
        if let Some(items) = v.get("received").and_then(Value::as_array) {
            for it in items {
                let idx = it["idx"].as_u64().filter(|&i| i >= 1).ok_or_else(|| anyhow!("bad idx")).with_context(ctx_msg)?;
                let val = it["val"].as_str().ok_or_else(|| anyhow!("bad val")).with_context(ctx_msg)?;
                rx.push((idx as usize - 1, ctx.parse_hex(val).with_context(ctx_msg)?));
            }
        } else if let Some(items) = v.get("sent").and_then(Value::as_array) {
            for (j, it) in items.iter().enumerate() {
                let val = it.as_str().ok_or_else(|| anyhow!("bad symbol")).with_context(ctx_msg)?;
                rx.push((j, ctx.parse_hex(val).with_context(ctx_msg)?));
            }
        } else {
            return Err(anyhow!("line needs \"received\" or \"sent\"").context(ctx_msg()).into());
        }
        for ev in dec.ingest(t, &rx).map_err(|e| anyhow!(e)).with_context(ctx_msg)? {
            out.push_str(&serde_json::to_string(&EventRecord::from_event(&ev, &ctx)).expect("event json"));
            out.push('\n');
        }
    }
    emit(a.out.as_deref(), &out)
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let (spec, ctx) = load_spec(&a.spec)?;
    let stats = simulate_channel(&spec, &ctx, a.epsilon, a.slots, a.seed).map_err(|e| anyhow!(e))?;
    let text = match a.format {
        Format::Json => format!("{}\n", stats.to_json()),
        Format::Csv => stats.to_csv(),
    };
    emit(a.out.as_deref(), &text)
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Construct(a) => construct(a).map(|_| 0),
        Command::Verify(a) => verify(a),
        Command::Domperm(a) => domperm(a).map(|_| 0),
        Command::Encode(a) => encode(a).map(|_| 0),
        Command::Decode(a) => decode(a).map(|_| 0),
        Command::Simulate(a) => simulate(a).map(|_| 0),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(e)) => {
            eprintln!("idos: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Io(e)) => {
            eprintln!("idos: {e:#}");
            ExitCode::from(EXIT_IO)
        }
    }
}
