use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use calabi_lab::commands::{self, Command, Mode, RunConfig, DEFAULT_MAX_N};
use calabi_lab::harness::{threads_from_env, with_threads};
use calabi_lab::LabError;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Identity sweeps, Calabi spectra, degree thresholds and vanishing
/// certificates for Kähler curvature operators.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on usage
/// or input errors. CALABI_LAB_THREADS sets the worker count (0 = one per core);
/// output does not depend on it.
#[derive(Parser, Debug)]
#[command(name = "calabi-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Run the identity and estimate suite on random samples.
    Verify(Common),
    /// Calabi eigenvalues and the k-positivity ladder of a space.
    Spectrum(Common),
    /// Exact Υ and Γ thresholds for every bidegree with 1 ≤ p+q ≤ n.
    Thresholds(Common),
    /// Per-bidegree vanishing certificate of a space.
    Certify(Common),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Calabi,
    Ke,
}

#[derive(Args, Debug)]
struct Common {
    /// Complex dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Restrict to one bidegree, written `p,q`.
    #[arg(long, value_parser = parse_pq)]
    pq: Option<(usize, usize)>,
    /// Space descriptor, e.g. `chsc:n=3,c=1`, `quadric:n=4`, `flat:k=2`,
    /// `random:n=3,seed=9`, `random-ke:n=3`, `product:[a;b]`, `file:PATH`.
    #[arg(long)]
    space: Option<String>,
    /// Random samples per check (verify).
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Certificate mode: Calabi operator or Kähler–Einstein.
    #[arg(long, value_enum, default_value_t = ModeArg::Calabi)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Strictness margin ε of the spectrum ladder (default 1e-10).
    #[arg(long)]
    tol: Option<f64>,
    /// Largest n accepted by verify.
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    max_n: usize,
    /// Negate every Calabi matrix handed to the spectral routes.
    #[arg(long, hide = true)]
    inject_bug: bool,
}

fn parse_pq(s: &str) -> Result<(usize, usize), String> {
    let (p, q) = s.split_once(',').ok_or_else(|| format!("expected 'p,q', got '{s}'"))?;
    let int = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("'{v}' is not a nonnegative integer"));
    Ok((int(p)?, int(q)?))
}

fn run(cli: Cli) -> Result<bool, LabError> {
    let (command, a) = match cli.command {
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::Thresholds(a) => (Command::Thresholds, a),
        Sub::Certify(a) => (Command::Certify, a),
    };
    let cfg = RunConfig {
        command,
        n: a.n,
        pq: a.pq,
        space: a.space,
        mode: match a.mode {
            ModeArg::Calabi => Mode::Calabi,
            ModeArg::Ke => Mode::Ke,
        },
        trials: a.trials,
        seed: a.seed,
        tol: a.tol,
        max_n: a.max_n,
        inject_bug: a.inject_bug,
    };
    let threads = threads_from_env()?;
    let report = with_threads(threads, || commands::run(&cfg))??;
    let text = match a.format {
        Format::Table => report.to_table(),
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match &a.output {
        Some(path) => std::fs::write(path, text).map_err(|e| LabError::Io { path: path.display().to_string(), source: e })?,
        None => {
            let mut out = std::io::stdout().lock();
            // a closed pipe is not an error worth reporting
            let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
        }
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("calabi-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
