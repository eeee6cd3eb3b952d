//! Config-driven experiment sweeps.
//!
//! [`run`] executes one experiment kind and returns [`ResultRow`]s in a
//! fixed order; [`write_csv`] serialises them with a stable column layout
//! and [`report`] renders a summary plus gnuplot-ready data blocks.

mod config;
mod experiments;

pub use config::{
    AnnulusSection, BlowupSection, CollarSection, DiskAreaSection, ExperimentConfig, Kind,
    PotentialSection, RunSection, TorusSection,
};
pub use experiments::random_curvature;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// One audited quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    /// Experiment kind, optionally followed by `.check`.
    pub experiment: String,
    /// Inputs in the order the experiment reports them.
    pub params: Vec<(String, f64)>,
    pub value: f64,
    /// Reference value or bound the `value` is judged against.
    pub bound: f64,
    pub pass: bool,
    /// Wall time in milliseconds.
    pub ms: Option<f64>,
}

impl ResultRow {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|p| p.1)
    }
}

/// Random stream for `kind`, independent of the other kinds.
pub fn rng_for(seed: u64, kind: Kind) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(kind.stream());
    rng
}

/// Runs one experiment kind. The rows and their order depend only on the
/// config (including its seed); only `ms` varies between runs.
pub fn run(config: &ExperimentConfig, kind: Kind) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut rng = rng_for(config.run.seed, kind);
    match kind {
        Kind::Potential => experiments::potential(&config.potential, &mut rng),
        Kind::DiskArea => experiments::disk_area(&config.disk_area, &mut rng),
        Kind::Blowup => experiments::blowup(&config.blowup),
        Kind::Torus => experiments::torus(&config.torus),
        Kind::Collar => experiments::collar(&config.collar, &mut rng),
        Kind::Annulus => experiments::annulus(&config.annulus),
    }
}

/// Runs every kind in [`Kind::ALL`] order.
pub fn run_all(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for kind in Kind::ALL {
        rows.extend(run(config, kind)?);
    }
    Ok(rows)
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

/// Writes `experiment, param.*, value, bound, pass, ms`, with the parameter
/// columns the sorted union over all rows. The `ms` column is left empty
/// unless `timings` is set, so the file is reproducible byte for byte.
pub fn write_csv<W: Write>(rows: &[ResultRow], writer: W, timings: bool) -> Result<()> {
    let names: BTreeSet<&str> = rows
        .iter()
        .flat_map(|r| r.params.iter().map(|(k, _)| k.as_str()))
        .collect();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["experiment".to_string()];
    header.extend(names.iter().map(|n| format!("param.{n}")));
    header.extend(["value", "bound", "pass", "ms"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.experiment.clone()];
        rec.extend(names.iter().map(|n| r.param(n).map(num).unwrap_or_default()));
        rec.push(num(r.value));
        rec.push(num(r.bound));
        rec.push(r.pass.to_string());
        rec.push(match (timings, r.ms) {
            (true, Some(ms)) => format!("{ms:.3}"),
            _ => String::new(),
        });
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Rendered outcome of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    /// Table, failing rows and a final `PASS n/n` or `FAIL f/n` line.
    pub text: String,
    /// Gnuplot data: one `index` block per sweep, two columns each.
    pub gnuplot: String,
    pub passed: usize,
    pub total: usize,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

fn describe(params: &[(String, f64)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Sweeps exported to the gnuplot file: experiment prefix, abscissa
/// parameter, and the parameters that separate blocks.
const PLOTS: &[(&str, &str, &[&str])] = &[
    ("torus", "b", &["p", "r"]),
    ("blowup", "R", &[]),
    ("blowup.kappa", "R", &[]),
    ("collar.asymptotic.", "ell", &[]),
    ("collar.strip", "m", &["ell", "k"]),
    ("potential.exp_growth", "R", &["eps"]),
    ("annulus.counterexample", "k", &[]),
];

fn gnuplot_blocks(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    for &(prefix, x, group) in PLOTS {
        let matches = |e: &str| {
            if prefix.ends_with('.') {
                e.starts_with(prefix)
            } else {
                e == prefix
            }
        };
        // blocks in first-appearance order, keyed by the bits of the group values
        let group_of = |r: &ResultRow| -> Vec<u64> {
            group.iter().map(|g| r.param(g).unwrap_or(f64::NAN).to_bits()).collect()
        };
        let mut keys: Vec<(&str, Vec<u64>)> = Vec::new();
        for r in rows.iter().filter(|r| matches(&r.experiment)) {
            let key = (r.experiment.as_str(), group_of(r));
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        for (exp, gv) in keys {
            let label: Vec<String> = group
                .iter()
                .zip(&gv)
                .map(|(g, v)| format!("{g}={}", f64::from_bits(*v)))
                .collect();
            let _ = writeln!(out, "# {exp} {}", label.join(" "));
            let ylabel = if exp == "torus" { "normalized_norm" } else { "value" };
            let _ = writeln!(out, "# {x} {ylabel}");
            for r in rows.iter().filter(|r| r.experiment == exp && group_of(r) == gv) {
                if let Some(xv) = r.param(x) {
                    let _ = writeln!(out, "{} {}", num(xv), num(r.value));
                }
            }
            out.push_str("\n\n");
        }
    }
    out
}

/// Summarises rows: a per-row table, the failing rows again, and a last
/// line `PASS n/n` when everything passed or `FAIL f/n` with `f` failures.
pub fn report(rows: &[ResultRow]) -> Report {
    let total = rows.len();
    let passed = rows.iter().filter(|r| r.pass).count();
    let mut text = String::new();
    let width = rows.iter().map(|r| r.experiment.len()).max().unwrap_or(10).max(10);
    let _ = writeln!(text, "{:<width$}  {:>19}  {:>19}  pass  params", "experiment", "value", "bound");
    for r in rows {
        let _ = writeln!(
            text,
            "{:<width$}  {:>19}  {:>19}  {:<4}  {}",
            r.experiment,
            num(r.value),
            num(r.bound),
            if r.pass { "ok" } else { "FAIL" },
            describe(&r.params)
        );
    }
    let failing: Vec<&ResultRow> = rows.iter().filter(|r| !r.pass).collect();
    if !failing.is_empty() {
        let _ = writeln!(text, "\nfailing rows:");
        for r in &failing {
            let _ = writeln!(
                text,
                "  {} [{}] value {} vs bound {}",
                r.experiment,
                describe(&r.params),
                num(r.value),
                num(r.bound)
            );
        }
    }
    if failing.is_empty() {
        let _ = writeln!(text, "PASS {passed}/{total}");
    } else {
        let _ = writeln!(text, "FAIL {}/{total}", failing.len());
    }
    Report {
        text,
        gnuplot: gnuplot_blocks(rows),
        passed,
        total,
    }
}
