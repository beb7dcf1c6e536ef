use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use ktriv::coef::Coef;
use ktriv::config::RunConfig;
use ktriv::covering::{escape_sequence, parse_dyadics, series_to_open, IntervalSet, ProductOpenSet};
use ktriv::game::{audit, AuditOptions, Trace, Variant, Verdict};
use ktriv::machine::parse_machine;
use ktriv::node::Node;

const EXIT_INPUT: u8 = 3;
const EXIT_TRACE: u8 = 4;
const EXIT_MISMATCH: u8 = 5;

#[derive(Parser)]
#[command(
    name = "ktriv",
    version,
    about = "Run weight-matching games, audit traces and try the covering tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play the games described by one or more config files.
    RunGame(RunArgs),
    /// Recompute the audit of a trace file.
    VerifyTrace(VerifyArgs),
    /// Tail decompositions and iterated measures of an open set.
    Kucera(KuceraArgs),
    /// Build the product open set of a series and read the series back.
    SeriesCover(SeriesArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config files; each one is an independent game.
    #[arg(long, required = true, num_args = 1..)]
    config: Vec<PathBuf>,
    /// Overrides the configured horizon.
    #[arg(long)]
    horizon: Option<u64>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for traces and audits, named after each config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Games played at once.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct VerifyArgs {
    trace: PathBuf,
    /// Config the trace was made with; needed for lowness traces.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the audit here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Audit file the result must match byte for byte.
    #[arg(long)]
    expect: Option<PathBuf>,
}

#[derive(Args)]
struct KuceraArgs {
    /// The set `U`, one prefix per line.
    #[arg(long)]
    u: PathBuf,
    /// A string to split into members of `U`.
    #[arg(long)]
    x: Option<String>,
    /// A second set `V` to escape from.
    #[arg(long)]
    v: Option<PathBuf>,
    /// Rounds of the escape sequence.
    #[arg(long, default_value_t = 8)]
    rounds: usize,
    /// Last power in the measure table.
    #[arg(long, default_value_t = 10)]
    table: u32,
}

#[derive(Args)]
struct SeriesArgs {
    /// Series terms in (0, 1), one per line.
    #[arg(long)]
    a: PathBuf,
    /// Thresholds of a product open set to compare against.
    #[arg(long)]
    v: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Trace(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Trace(_) => EXIT_TRACE,
            Failure::Mismatch(_) => EXIT_MISMATCH,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Trace(m) | Failure::Mismatch(m) => m,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::RunGame(args) => run_games(&args),
        Command::VerifyTrace(args) => verify(&args),
        Command::Kucera(args) => kucera(&args).map(|report| {
            print!("{report}");
            0
        }),
        Command::SeriesCover(args) => series(&args).map(|report| {
            print!("{report}");
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ktriv: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned())
}

type Outcome = Result<(Verdict, String), Failure>;

fn run_one(path: &Path, args: &RunArgs) -> Outcome {
    let mut cfg = RunConfig::load(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    cfg.apply_env();
    if let Some(h) = args.horizon {
        cfg.horizon = h;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let (trace, report) = cfg.play().map_err(input)?;
    let name = stem(path);
    let (trace_path, audit_path) = match &args.out {
        Some(dir) => (
            dir.join(format!("{name}.trace.jsonl")),
            dir.join(format!("{name}.audit.txt")),
        ),
        None => {
            let here = path.parent().unwrap_or(Path::new("."));
            (
                cfg.trace_path()
                    .unwrap_or_else(|| here.join(format!("{name}.trace.jsonl"))),
                cfg.audit_path()
                    .unwrap_or_else(|| here.join(format!("{name}.audit.txt"))),
            )
        }
    };
    write(&trace_path, &trace.to_jsonl())?;
    write(&audit_path, &report.to_text())?;
    let verdict = report.verdict();
    let line = format!(
        "{}: verdict {} after {} steps; trace {}, audit {}",
        path.display(),
        report.get("verdict").unwrap_or("?"),
        trace.end.steps,
        trace_path.display(),
        audit_path.display()
    );
    Ok((verdict, line))
}

fn run_games(args: &RunArgs) -> Result<u8, Failure> {
    let jobs = args.jobs.clamp(1, args.config.len());
    let results: Mutex<Vec<Option<Outcome>>> = Mutex::new((0..args.config.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = args.config.get(i) else { break };
                let r = run_one(path, args);
                results.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    let results = results.into_inner().expect("workers done");
    let mut worst = 0;
    for r in results.into_iter().flatten() {
        match r {
            Ok((verdict, line)) => {
                println!("{line}");
                worst = worst.max(verdict.exit_code() as u8);
            }
            Err(f) => {
                eprintln!("ktriv: {}", f.message());
                worst = worst.max(f.code());
            }
        }
    }
    Ok(worst)
}

/// The variant a trace header names, rebuilt without a config where that
/// is possible.
fn header_variant(trace: &Trace, base: &Path) -> Result<Variant, Failure> {
    let c = trace
        .header
        .c
        .as_deref()
        .map(str::parse::<Coef>)
        .transpose()
        .map_err(|e| Failure::Trace(format!("bad constant in header: {e}")))?;
    match trace.header.variant.as_str() {
        "existence" => Ok(Variant::Existence),
        "incompleteness" => {
            let source = trace
                .header
                .machine
                .as_deref()
                .ok_or_else(|| Failure::Trace("incompleteness trace without machine".into()))?;
            Ok(Variant::Incompleteness {
                c,
                machine: parse_machine(source, base).map_err(input)?,
            })
        }
        "lowness" => Err(Failure::Input("lowness traces need --config for the labels".into())),
        other => Err(Failure::Trace(format!("unknown variant {other:?}"))),
    }
}

fn verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let text = read(&args.trace)?;
    let trace = Trace::from_jsonl(&text).map_err(|e| Failure::Trace(format!("{}: {e}", args.trace.display())))?;
    let (variant, opts) = match &args.config {
        Some(path) => {
            let mut cfg = RunConfig::load(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            cfg.apply_env();
            (cfg.variant().map_err(input)?, cfg.audit_options())
        }
        None => {
            let base = args.trace.parent().unwrap_or(Path::new("."));
            (header_variant(&trace, base)?, AuditOptions::from_env())
        }
    };
    let report = audit(&trace, &variant, &opts).map_err(|e| Failure::Trace(e.to_string()))?;
    let out = report.to_text();
    match &args.out {
        Some(path) => write(path, &out)?,
        None => print!("{out}"),
    }
    if let Some(path) = &args.expect {
        if read(path)? != out {
            return Err(Failure::Mismatch(format!("audit differs from {}", path.display())));
        }
    }
    Ok(report.verdict().exit_code() as u8)
}

fn list(nodes: &[Node]) -> String {
    let items: Vec<String> = nodes.iter().map(Node::to_string).collect();
    format!("[{}]", items.join(", "))
}

fn kucera(args: &KuceraArgs) -> Result<String, Failure> {
    let u = IntervalSet::parse(&read(&args.u)?).map_err(input)?;
    let mut out = String::new();
    let rho = u.measure();
    writeln!(out, "U = {u}").unwrap();
    writeln!(out, "rho = {rho}").unwrap();
    if let Some(x) = &args.x {
        let x: Node = x.parse().map_err(|_| Failure::Input(format!("bad string {x:?}")))?;
        match u.decompose_tail(&x) {
            Ok(pieces) => writeln!(out, "pieces of {x} = {}", list(&pieces)).unwrap(),
            Err(at) => writeln!(out, "{x} has no split: no member of U starts at position {at}").unwrap(),
        }
    }
    for n in 0..=args.table {
        writeln!(out, "rho^{n} = {}", u.iterated_measure(n)).unwrap();
    }
    for t in [1, 4, 8] {
        match u.power_below(t) {
            Some(n) => writeln!(out, "first n with rho^n < 2^-{t}: {n}").unwrap(),
            None => writeln!(out, "rho^n never drops below 2^-{t}").unwrap(),
        }
    }
    if let Some(v) = &args.v {
        let v = IntervalSet::parse(&read(v)?).map_err(input)?;
        writeln!(out, "V = {v}").unwrap();
        writeln!(out, "measure of V = {}", v.measure()).unwrap();
        let e = escape_sequence(&u, &v, args.rounds);
        writeln!(out, "escape pieces = {}", list(&e.pieces)).unwrap();
        writeln!(out, "escape string = {}", e.concatenation()).unwrap();
        match e.obstruction {
            Some(r) => writeln!(out, "blocked at round {r}: V covers every member of U").unwrap(),
            None => writeln!(out, "not blocked in {} rounds", args.rounds).unwrap(),
        }
    }
    Ok(out)
}

fn series(args: &SeriesArgs) -> Result<String, Failure> {
    let a = parse_dyadics(&read(&args.a)?).map_err(input)?;
    let open = series_to_open(&a).map_err(input)?;
    let b = open.extract_series();
    let show = |xs: &[ktriv::dyadic::Dyadic]| {
        let items: Vec<String> = xs.iter().map(ToString::to_string).collect();
        format!("[{}]", items.join(", "))
    };
    let mut out = String::new();
    writeln!(out, "a = {}", show(&a)).unwrap();
    writeln!(out, "measure = {}", open.measure()).unwrap();
    writeln!(out, "complement measure = {}", open.complement_measure()).unwrap();
    writeln!(out, "b = {}", show(&b)).unwrap();
    writeln!(out, "b equals a: {}", b == a).unwrap();
    if let Some(v) = &args.v {
        let v = ProductOpenSet::parse(&read(v)?).map_err(input)?;
        writeln!(out, "V = {}", show(v.thresholds())).unwrap();
        writeln!(out, "V contains the set built from a: {}", v.includes(&open)).unwrap();
    }
    Ok(out)
}
