use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csk_lab::analytic::BerMethod;
use csk_lab::chaos::MapKind;
use csk_lab::harness::{
    parse_config, run_fit_study, run_sweep, with_threads, write_curve_csv, write_histogram_csv, write_json,
    write_run_metadata, ExperimentConfig, Mode,
};
use csk_lab::{Error, ErrorKind};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "csk-lab", version, about = "CSK over decode-and-forward relays: simulated and analytic BER")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulated, quadrature and MGF BER over an Eb/N0 grid (CSV).
    Sweep(Common),
    /// Fit the envelope of alpha with four candidate laws (JSON + histogram CSV).
    Fit(Common),
    /// Sweep and fit study with a joint report.
    Compare(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum MapArg {
    Cpf,
    Pwl,
}

#[derive(Args)]
struct Common {
    /// TOML experiment description.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads [env: CSK_LAB_THREADS; default: all cores].
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    map: Option<MapArg>,
    #[arg(long)]
    beta: Option<usize>,
    #[arg(long)]
    relays: Option<usize>,
    #[arg(long)]
    bits: Option<usize>,
    /// Eb/N0 grid in dB as start:step:stop (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Config => EXIT_CONFIG,
            ErrorKind::Numeric => EXIT_NUMERIC,
            ErrorKind::Io => EXIT_IO,
        };
        Failure { code, message: e.to_string() }
    }
}

fn config_failure(path: &str, reason: impl Into<String>) -> Failure {
    Error::Config { path: path.into(), reason: reason.into() }.into()
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = |why: &str| config_failure("--grid", format!("`{spec}`: {why}"));
    let [start, step, stop] = parts[..] else {
        return Err(bad("expected start:step:stop"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(bad("step must be positive and bounds finite"));
    }
    if stop < start {
        return Err(bad("stop is below start"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(bad("too many points"));
    }
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var("CSK_LAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| config_failure("CSK_LAB_THREADS", format!("`{v}` is not a thread count"))),
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn build_config(mode: Mode, args: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| Failure::from(Error::Io { path: path.clone(), source }))?;
            parse_config(&text)?
        }
        None => ExperimentConfig::defaults(),
    };
    cfg.mode = mode;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_path = out.to_string_lossy().into_owned();
    }
    match (args.map, cfg.network.map) {
        (Some(MapArg::Cpf), _) => cfg.network.map = MapKind::Cpf,
        (Some(MapArg::Pwl), MapKind::Cpf) => cfg.network.map = MapKind::pwl_default(),
        _ => {}
    }
    if let Some(beta) = args.beta {
        cfg.network.beta = beta;
    }
    if let Some(n) = args.relays {
        cfg.set_relays(n);
    }
    if let Some(bits) = args.bits {
        cfg.n_bits = bits;
    }
    if let Some(grid) = &args.grid {
        cfg.eb_n0_grid_db = parse_grid(grid)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `path` with `suffix` appended to the file name.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

fn run(mode: Mode, args: &Common) -> Result<(), Failure> {
    let cfg = build_config(mode, args)?;
    let threads = resolve_threads(args.threads)?;
    let out = PathBuf::from(&cfg.output_path);
    let mut numeric_failure = false;

    let sweep = if mode != Mode::Fit {
        Some(with_threads(threads, || run_sweep(&cfg))??)
    } else {
        None
    };
    let fit = if mode != Mode::Sweep {
        Some(with_threads(threads, || run_fit_study(&cfg))??)
    } else {
        None
    };

    if let Some(curve) = &sweep {
        write_curve_csv(curve, &out)?;
        write_run_metadata(curve, fit.as_ref().map(|f| &f.report), &sibling(&out, ".meta.json"))?;
        // The MGF route is expected to refuse some high-SNR points; only a
        // failure of the quadrature reference makes the run fail.
        for f in &curve.failures {
            eprintln!("analytic {} failed at {} dB: {}", f.method.as_str(), f.eb_n0_db, f.error);
            numeric_failure |= f.method != BerMethod::MgfPade;
        }
        eprintln!("wrote {}", out.display());
    }
    if let Some(study) = &fit {
        let (report, hist) = if mode == Mode::Fit {
            (out.with_extension("json"), out.with_extension("hist.csv"))
        } else {
            (out.with_extension("fit.json"), out.with_extension("hist.csv"))
        };
        write_json(&study.report, &report)?;
        write_histogram_csv(&study.histogram, &hist)?;
        eprintln!("wrote {} and {}", report.display(), hist.display());
    }
    if numeric_failure {
        return Err(Failure { code: EXIT_NUMERIC, message: "quadrature BER failed at some grid points".into() });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let (mode, args) = match &cli.command {
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Fit(a) => (Mode::Fit, a),
        Command::Compare(a) => (Mode::Compare, a),
    };
    match run(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("csk-lab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
