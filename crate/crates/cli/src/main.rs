//! `conflab`: runs experiment sweeps from a TOML config and writes CSV rows,
//! a summary table and gnuplot data.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use conflab::harness::{self, ExperimentConfig, Kind, ResultRow};

#[derive(Parser, Debug)]
#[command(name = "conflab", version, about = "Numerical audits of conformal-metric gradient estimates")]
struct Cli {
    /// TOML experiment configuration; every key has a default.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// CSV output path; gnuplot data goes next to it with extension `.dat`.
    /// Without it the CSV is written to stdout and the summary to stderr.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Overrides `[run] seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Fill the `ms` column with wall times (makes the CSV non-reproducible).
    #[arg(long, global = true)]
    timings: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Weak form, scale invariance and exponential integrability of `I_μ`.
    Potential,
    /// Quadratic area bound of grid-geodesic balls under random curvature.
    DiskArea,
    /// Area growth of the explicit metric `e^{2x¹}`.
    Blowup,
    /// Normalized ball gradient norms across degenerating flat tori.
    Torus,
    /// Collar closed forms, asymptotics, ratio bound and strip masses.
    Collar,
    /// Dyadic annulus sums and the affine counterexample.
    Annulus,
    /// Every experiment above, in order.
    All,
}

impl Command {
    fn kinds(self) -> Vec<Kind> {
        match self {
            Command::Potential => vec![Kind::Potential],
            Command::DiskArea => vec![Kind::DiskArea],
            Command::Blowup => vec![Kind::Blowup],
            Command::Torus => vec![Kind::Torus],
            Command::Collar => vec![Kind::Collar],
            Command::Annulus => vec![Kind::Annulus],
            Command::All => Kind::ALL.to_vec(),
        }
    }
}

fn configure_threads(jobs: Option<usize>) -> Result<()> {
    let Some(n) = jobs else { return Ok(()) };
    anyhow::ensure!(n > 0, "--jobs must be at least 1");
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")?;
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        eprintln!("warning: built without the `parallel` feature; --jobs {n} ignored");
    }
    Ok(())
}

fn write_outputs(rows: &[ResultRow], out: Option<&Path>, timings: bool) -> Result<bool> {
    let rep = harness::report(rows);
    match out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            harness::write_csv(rows, BufWriter::new(file), timings)?;
            let dat = path.with_extension("dat");
            std::fs::write(&dat, &rep.gnuplot).with_context(|| format!("writing {}", dat.display()))?;
            print!("{}", rep.text);
        }
        None => {
            harness::write_csv(rows, io::stdout().lock(), timings)?;
            eprint!("{}", rep.text);
        }
    }
    io::stdout().flush()?;
    Ok(rep.all_passed())
}

fn execute(cli: &Cli) -> Result<bool> {
    let mut config = match &cli.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    config.validate()?;
    configure_threads(cli.jobs)?;
    let mut rows = Vec::new();
    for kind in cli.command.kinds() {
        rows.extend(harness::run(&config, kind).with_context(|| format!("running {kind}"))?);
    }
    let out = cli.out.clone().or_else(|| config.run.out.as_ref().map(PathBuf::from));
    write_outputs(&rows, out.as_deref(), cli.timings)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
