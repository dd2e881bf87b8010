//! `kgtail`: command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 a stage failed.
//! Criteria verdicts are output, never exit codes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kgtail::criteria::{full_verdict, CriteriaVerdict};
use kgtail::engine::{
    sample_perpetuity, sample_stationary, sample_sup_pi, MapFamily, SampleBatch, SimConfig,
};
use kgtail::experiment::{
    emit_plotdata, read_experiment, render_text, run_experiment, write_report,
};
use kgtail::io::{config_digest, hex, read_measure, read_samples, write_binary, write_text};
use kgtail::tailstats::{tail_report, TailOptions, TailReport, TailSide};
use kgtail::verify::{run_criterion, CRITERIA, DEFAULT_SEED};
use kgtail::{solve_alpha, Error};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "kgtail",
    version,
    about = "Heavy tails of stochastic recursions X = Psi(X)"
)]
struct Cli {
    /// Master seed (overrides config files).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file, or directory for `experiment`.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    JsonLines,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve E A^s = 1 for the Cramér exponent.
    SolveAlpha { measure: PathBuf },
    /// Draw a sample batch.
    Simulate(SimulateArgs),
    /// Tail diagnostics for a sample file (text or binary).
    Tail(TailArgs),
    /// Analytic positivity criteria for a measure.
    Criteria {
        measure: PathBuf,
        #[arg(long, default_value = "affine")]
        family: String,
    },
    /// Run a full experiment from a config file.
    Experiment { config: PathBuf },
    /// Run the built-in acceptance checks.
    Verify {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Stationary,
    Perpetuity,
    SupPi,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    measure: PathBuf,
    #[arg(long, default_value = "affine")]
    family: String,
    #[arg(long, value_enum, default_value_t = Kind::Stationary)]
    kind: Kind,
    /// Steps per chain (default: from E log A).
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 64)]
    chains: usize,
    /// Write the binary format (requires --output).
    #[arg(long)]
    binary: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Right,
    Left,
    Both,
}

#[derive(Args, Debug)]
struct TailArgs {
    samples: PathBuf,
    #[arg(long, value_enum, default_value_t = SideArg::Right)]
    side: SideArg,
    /// Hill order statistics (default floor(sqrt(n))).
    #[arg(long)]
    k: Option<usize>,
    /// Exponent for t^alpha P[X > t] (default: Hill estimate).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, requires = "t_hi")]
    t_lo: Option<f64>,
    #[arg(long, requires = "t_lo")]
    t_hi: Option<f64>,
    #[arg(long, default_value_t = 20)]
    n_grid: usize,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn stage(stage: &str, e: impl std::fmt::Display) -> Self {
        Self {
            code: 2,
            message: format!("{stage}: {e}"),
        }
    }
}

/// Input problems are usage errors; everything else is a stage failure.
fn input_error(what: &Path, e: Error) -> CliError {
    CliError::usage(format!("{}: {e}", what.display()))
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::SolveAlpha { measure } => solve_alpha_cmd(cli, measure),
        Command::Simulate(args) => simulate_cmd(cli, args),
        Command::Tail(args) => tail_cmd(cli, args),
        Command::Criteria { measure, family } => criteria_cmd(cli, measure, family),
        Command::Experiment { config } => experiment_cmd(cli, config),
        Command::Verify { criteria } => verify_cmd(cli, criteria),
    }
}

/// Stdout, or `--output` when given.
fn sink(cli: &Cli) -> Result<Box<dyn Write>, CliError> {
    match &cli.output {
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| CliError::stage("output", format!("{}: {e}", p.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult {
    let line = serde_json::to_string(value).map_err(|e| CliError::stage("output", e))?;
    writeln!(out, "{line}").map_err(|e| CliError::stage("output", e))
}

fn write_out(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::stage("output", e))
}

fn family(name: &str) -> Result<MapFamily, CliError> {
    name.parse()
        .map_err(|e: Error| CliError::usage(e.to_string()))
}

fn solve_alpha_cmd(cli: &Cli, path: &Path) -> CliResult {
    let driver = read_measure(path).map_err(|e| input_error(path, e))?;
    let m = driver.as_atomic().map_err(|e| input_error(path, e))?;
    let root = solve_alpha(m).map_err(|e| CliError::stage("solve-alpha", e))?;
    let mut out = sink(cli)?;
    match cli.format {
        Format::JsonLines => emit_json(&mut out, &root),
        Format::Text => write_out(
            &mut out,
            &format!(
                "alpha    {:.17}\nresidual {:e}\nbracket  [{:.17}, {:.17}]\n",
                root.alpha, root.residual, root.bracket.0, root.bracket.1
            ),
        ),
    }
}

#[derive(Serialize)]
struct BatchRecord<'a> {
    kind: kgtail::engine::BatchKind,
    family: &'a str,
    label: &'a str,
    n: usize,
    seed: u64,
    burn_in: Option<u64>,
    chains: usize,
    config_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    coupling: Option<kgtail::engine::CouplingDiagnostic>,
}

fn simulate_cmd(cli: &Cli, args: &SimulateArgs) -> CliResult {
    let driver = read_measure(&args.measure).map_err(|e| input_error(&args.measure, e))?;
    let fam = family(&args.family)?;
    let config = SimConfig {
        burn_in: args.burn_in,
        n_samples: args.samples,
        chains: args.chains,
        seed: cli.seed.unwrap_or(0),
        ..SimConfig::default()
    };
    config.check().map_err(|e| CliError::usage(e.to_string()))?;
    if args.binary && cli.output.is_none() {
        return Err(CliError::usage("--binary needs --output"));
    }
    let batch: SampleBatch = match args.kind {
        Kind::Stationary => sample_stationary(&fam, &driver, &config),
        Kind::Perpetuity => sample_perpetuity(&driver, &config),
        Kind::SupPi => sample_sup_pi(&driver, &config),
    }
    .map_err(|e| CliError::stage("simulate", e))?;

    let digest = config_digest(&driver, &batch.family, &batch.config);
    let mut out = sink(cli)?;
    let written = if args.binary {
        write_binary(&mut out, batch.config.seed, &digest, &batch.values)
    } else {
        write_text(&mut out, &batch.values)
    };
    written.map_err(|e| CliError::stage("output", e))?;

    let record = BatchRecord {
        kind: batch.kind,
        family: &batch.family,
        label: &batch.label,
        n: batch.values.len(),
        seed: batch.config.seed,
        burn_in: batch.config.burn_in,
        chains: batch.config.chains,
        config_digest: hex(&digest),
        coupling: batch.coupling,
    };
    // The sample stream owns stdout; the summary goes to stderr.
    match cli.format {
        Format::JsonLines => eprintln!("{}", serde_json::to_string(&record).expect("serializable")),
        Format::Text => eprintln!(
            "{} {:?} batch: {} values, seed {}, burn-in {:?}, digest {}",
            record.family, record.kind, record.n, record.seed, record.burn_in, record.config_digest
        ),
    }
    Ok(())
}

fn tail_text(r: &TailReport) -> String {
    let mut s = format!(
        "side {:?}: n = {} ({} positive)\nHill alpha {:.5} (se {:.5}, k = {})\nt range [{:.6e}, {:.6e}] ({:.2} decades)\n",
        r.side, r.n, r.n_positive, r.alpha_hill, r.hill_se, r.k_used, r.t_range.0, r.t_range.1, r.decades
    );
    if let Some(slope) = r.loglog_slope {
        s.push_str(&format!("log-log slope {slope:.5}\n"));
    }
    s.push_str(&format!(
        "t^{:.4} P[X > t]: min {:.6e}, max {:.6e}, flatness {:.4}\n{:>14} {:>14} {:>16}\n",
        r.alpha_used, r.c_min, r.c_max, r.flatness_ratio, "t", "ccdf", "t^alpha*ccdf"
    ));
    for ((t, p), (_, c)) in r.ccdf.iter().zip(&r.c_grid) {
        s.push_str(&format!("{t:>14.6e} {p:>14.6e} {c:>16.6e}\n"));
    }
    for w in &r.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}

fn tail_csv(r: &TailReport) -> String {
    let mut s = String::from("t,ccdf,t_pow_alpha_ccdf\n");
    for ((t, p), (_, c)) in r.ccdf.iter().zip(&r.c_grid) {
        s.push_str(&format!("{t:?},{p:?},{c:?}\n"));
    }
    s
}

fn tail_cmd(cli: &Cli, args: &TailArgs) -> CliResult {
    let values = read_samples(&args.samples).map_err(|e| input_error(&args.samples, e))?;
    let sides: &[TailSide] = match args.side {
        SideArg::Right => &[TailSide::Right],
        SideArg::Left => &[TailSide::Left],
        SideArg::Both => &[TailSide::Right, TailSide::Left],
    };
    let mut reports = Vec::new();
    for &side in sides {
        let opts = TailOptions {
            side,
            k: args.k,
            alpha: args.alpha,
            t_range: args.t_lo.zip(args.t_hi),
            n_grid: args.n_grid,
            ..TailOptions::default()
        };
        match tail_report(&values, &opts) {
            Ok(r) => reports.push(r),
            // With both sides requested, a side without tail data is skipped.
            Err(e @ (Error::TooFewPositive { .. } | Error::ZeroTail { .. }))
                if sides.len() == 2 =>
            {
                eprintln!("warning: {side:?} tail skipped: {e}");
            }
            Err(e) => return Err(CliError::stage("tail", e)),
        }
    }
    // With --output the CSV goes to the file and the summary to stdout.
    if let Some(path) = &cli.output {
        let csv: String = match reports.as_slice() {
            [one] => tail_csv(one),
            many => many
                .iter()
                .map(|r| tail_csv(r).replacen("t,", &format!("# side {:?}\nt,", r.side), 1))
                .collect(),
        };
        std::fs::write(path, csv)
            .map_err(|e| CliError::stage("output", format!("{}: {e}", path.display())))?;
    }
    let mut out = io::stdout().lock();
    for r in &reports {
        match cli.format {
            Format::JsonLines => emit_json(&mut out, r)?,
            Format::Text => write_out(&mut out, &tail_text(r))?,
        }
    }
    Ok(())
}

fn opt<T: std::fmt::Debug>(x: &Option<T>) -> String {
    x.as_ref().map_or("-".into(), |v| format!("{v:?}"))
}

fn verdict_table(v: &CriteriaVerdict) -> String {
    let mut rows: Vec<(&str, String)> = vec![
        ("measure", v.label.clone()),
        ("family", v.family.clone()),
        ("degenerate", v.degenerate.to_string()),
    ];
    if v.degenerate {
        rows.push(("fixed point", opt(&v.fixed_point)));
    } else {
        rows.push(("E log A", format!("{}", v.log_moments.mean_log_a)));
        rows.push((
            "alpha",
            v.alpha.map_or_else(
                || v.alpha_note.clone().unwrap_or("-".into()),
                |r| format!("{}", r.alpha),
            ),
        ));
        rows.push(("support class", opt(&v.support_class)));
        if let Some(c) = &v.letac {
            rows.push((
                "N1, N2, N3, N",
                format!("{}, {}, {}, {}", c.n1, c.n2, c.n3, c.n),
            ));
        }
        rows.push(("C_L > 0", opt(&v.cl_positive)));
        rows.push(("C_M > 0", opt(&v.cm_positive)));
        rows.push((
            "Goldie condition",
            v.goldie.as_ref().map_or("-".into(), |g| g.met.to_string()),
        ));
        rows.push(("CV condition", opt(&v.cv_flag)));
        rows.push(("support upper bound", opt(&v.support_upper_bound)));
        rows.push(("support lower bound", opt(&v.support_lower_bound)));
        if let Some(m) = &v.moment_ratio {
            rows.push((
                "moment ratio limit",
                format!("{} (met: {})", m.limit_value, m.condition_met),
            ));
        }
    }
    rows.push((
        "right tail",
        format!("{:?}: {}", v.right_tail.claim, v.right_tail.reason),
    ));
    rows.push((
        "left tail",
        format!("{:?}: {}", v.left_tail.claim, v.left_tail.reason),
    ));
    rows.push(("consistent", v.consistent.to_string()));
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let mut s: String = rows
        .iter()
        .map(|(k, val)| format!("{k:<width$}  {val}\n"))
        .collect();
    for c in &v.consistency_checks {
        s.push_str(&format!("check: {c}\n"));
    }
    for w in &v.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}

fn criteria_cmd(cli: &Cli, path: &Path, family_name: &str) -> CliResult {
    let driver = read_measure(path).map_err(|e| input_error(path, e))?;
    let m = driver.as_atomic().map_err(|e| input_error(path, e))?;
    let fam = family(family_name)?;
    let v = full_verdict(m, &fam).map_err(|e| CliError::stage("criteria", e))?;
    let mut out = sink(cli)?;
    match cli.format {
        Format::JsonLines => emit_json(&mut out, &v),
        Format::Text => write_out(&mut out, &verdict_table(&v)),
    }
}

fn experiment_cmd(cli: &Cli, path: &Path) -> CliResult {
    let mut cfg = read_experiment(path).map_err(|e| input_error(path, e))?;
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(dir) = &cli.output {
        cfg.output_dir = Some(dir.clone());
    }
    let (report, failure) = match run_experiment(&cfg) {
        Ok(r) => (r, None),
        Err(f) => (*f.partial.clone(), Some(f)),
    };
    if let Some(dir) = &cfg.output_dir {
        write_report(&report, dir).map_err(|e| CliError::stage("report", e))?;
        if failure.is_none() {
            emit_plotdata(&report, dir).map_err(|e| CliError::stage("plotdata", e))?;
        }
    }
    let mut out = io::stdout().lock();
    match cli.format {
        Format::JsonLines => emit_json(&mut out, &report)?,
        Format::Text => write_out(&mut out, &render_text(&report))?,
    }
    match failure {
        Some(f) => Err(CliError::stage(&f.stage.to_string(), f.error)),
        None => Ok(()),
    }
}

fn verify_cmd(cli: &Cli, ids: &[u8]) -> CliResult {
    let ids: Vec<u8> = if ids.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        ids.to_vec()
    };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(CliError::usage(format!(
            "no criterion {bad} (expected 1-{})",
            CRITERIA.len()
        )));
    }
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let mut out = sink(cli)?;
    let mut failed = 0;
    for id in ids {
        let outcome = run_criterion(id, seed);
        failed += usize::from(!outcome.passed);
        match cli.format {
            Format::JsonLines => emit_json(&mut out, &outcome)?,
            Format::Text => write_out(&mut out, &format!("{outcome}\n"))?,
        }
    }
    if failed > 0 {
        return Err(CliError::stage(
            "verify",
            format!("{failed} criteria failed"),
        ));
    }
    Ok(())
}
