use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bdris::config::write_canonical;
use bdris::gradcheck::{run_gradcheck, GRADCHECK_TOL};
use bdris::output::{write_profile_csv, write_run_csv, write_sweep_csv};
use bdris::profile::profile_runs;
use bdris::sweep::run_sweep;
use bdris::{Engine, Scenario, ScenarioConfig, Scheme, SweepParam, SweepSpec};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bdris", version, about = "Optimizes RIS-assisted multi-user OFDM links and writes CSV traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one scenario and write the per-iteration trace.
    Run(RunArgs),
    /// Monte Carlo sweep of one parameter over schemes and seeds.
    Sweep(SweepArgs),
    /// Per-subcarrier amplitude and phase of the optimized surfaces.
    Profile(ProfileArgs),
    /// Compare analytic gradients with central finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scheme, e.g. bd-coop or diag-zp.
    #[arg(long, value_name = "NAME")]
    scheme: Option<Scheme>,
    /// Output CSV; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, value_name = "INT")]
    workers: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Swept parameter: P (dBm), M, N or Q.
    #[arg(long)]
    param: SweepParam,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Number of consecutive seeds starting at the base seed.
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    /// Comma-separated schemes; all six when omitted.
    #[arg(long, value_delimiter = ',')]
    schemes: Vec<Scheme>,
    /// Side of the default deployment square, used when Q is swept.
    #[arg(long, default_value_t = 60.0)]
    width: f64,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    common: Common,
    /// Number of consecutive seeds averaged into the profile.
    #[arg(long, default_value_t = 1)]
    seeds: usize,
}

#[derive(Args)]
struct GradcheckArgs {
    /// First fixture seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of consecutive fixture seeds.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Flips the sign of one gradient family to test the checker itself.
    #[arg(long, hide = true)]
    corrupt: bool,
}

fn load(common: &Common) -> Result<Scenario> {
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))?;
    let mut cfg = ScenarioConfig::parse(&text).with_context(|| format!("parsing {}", common.config.display()))?;
    // applied before defaults resolve so an explicit tau survives a scheme override
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.scheme.is_some() {
        cfg.scheme = common.scheme;
    }
    cfg.into_scenario().with_context(|| format!("invalid config {}", common.config.display()))
}

fn init_pool(workers: Option<usize>) -> Result<()> {
    if let Some(w) = workers {
        if w == 0 {
            bail!("--workers must be >= 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global()?;
    }
    Ok(())
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let s = load(&args.common)?;
    let mut engine = Engine::new(s.clone())?;
    if let Some(w) = args.common.workers {
        engine = engine.with_workers(w)?;
    }
    let trace = engine.run()?;
    write_run_csv(sink(args.common.out.as_deref())?, &trace, s.q)?;
    if let Some(out) = &args.common.out {
        let cfg = write_canonical(&s, out)?;
        eprintln!("wrote {} and {}", out.display(), cfg.display());
    }
    eprintln!(
        "{}: final sum rate {:.6} bit/s/Hz after {} iterations ({})",
        s.scheme,
        trace.final_sum_rate(),
        trace.iterations(),
        if trace.converged { "converged" } else { "iteration cap" }
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    init_pool(args.common.workers)?;
    let base = load(&args.common)?;
    let schemes = if args.schemes.is_empty() { Scheme::ALL.to_vec() } else { args.schemes };
    let spec = SweepSpec { param: args.param, values: args.values, seeds: args.seeds, schemes, width: args.width };
    let result = run_sweep(&base, &spec)?;
    write_sweep_csv(sink(args.common.out.as_deref())?, &result)?;
    for m in &result.means {
        eprintln!("{} {}={} mean {:.6} +/- {:.6}", m.scheme, result.param, m.value, m.mean, m.ci95);
    }
    Ok(())
}

fn cmd_profile(args: ProfileArgs) -> Result<()> {
    init_pool(args.common.workers)?;
    let s = load(&args.common)?;
    let rows = profile_runs(&s, args.seeds)?;
    write_profile_csv(sink(args.common.out.as_deref())?, &rows)?;
    Ok(())
}

fn cmd_gradcheck(args: GradcheckArgs) -> Result<bool> {
    let seeds: Vec<u64> = (args.seed..args.seed + args.seeds.max(1)).collect();
    let report = run_gradcheck(&seeds, args.corrupt)?;
    for f in &report.families {
        println!("{:<24} {:.3e} {}", f.name, f.worst, if f.passed() { "ok" } else { "FAIL" });
    }
    println!("threshold {GRADCHECK_TOL:e} over {} seeds", seeds.len());
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::Profile(a) => cmd_profile(a).map(|_| true),
        Command::Gradcheck(a) => cmd_gradcheck(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
