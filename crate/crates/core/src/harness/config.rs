//! Experiment configuration: one TOML table per experiment kind, scalar and
//! flat-array values only. Every field has a default, so an empty file is a
//! complete configuration.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::collar::max_collar_length;
use crate::error::{Error, Result};

/// The experiment families the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Potential,
    DiskArea,
    Blowup,
    Torus,
    Collar,
    Annulus,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Potential,
        Kind::DiskArea,
        Kind::Blowup,
        Kind::Torus,
        Kind::Collar,
        Kind::Annulus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Potential => "potential",
            Kind::DiskArea => "disk-area",
            Kind::Blowup => "blowup",
            Kind::Torus => "torus",
            Kind::Collar => "collar",
            Kind::Annulus => "annulus",
        }
    }

    /// Index used to derive an independent random stream per kind.
    pub(crate) fn stream(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config("kind", format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default, rename = "disk-area")]
    pub disk_area: DiskAreaSection,
    #[serde(default)]
    pub blowup: BlowupSection,
    #[serde(default)]
    pub torus: TorusSection,
    #[serde(default)]
    pub collar: CollarSection,
    #[serde(default)]
    pub annulus: AnnulusSection,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// CSV destination; the command line may override it.
    pub out: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { seed: 1, out: None }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialSection {
    /// Random bumps for the weak-form residual of `δ_0`.
    pub bumps: usize,
    pub weak_grid: usize,
    pub weak_tolerance: f64,
    pub q: Vec<f64>,
    pub scaling_radii: Vec<f64>,
    pub scaling_tolerance: f64,
    pub eps: f64,
    pub exp_radii: Vec<f64>,
    pub exp_growth_slack: f64,
}

impl Default for PotentialSection {
    fn default() -> Self {
        PotentialSection {
            bumps: 5,
            weak_grid: 1024,
            weak_tolerance: 1e-3,
            q: vec![1.0, 1.5],
            scaling_radii: vec![0.1, 1.0, 10.0],
            scaling_tolerance: 1e-6,
            eps: 2.0 * PI,
            exp_radii: vec![1.0, 2.0, 4.0],
            exp_growth_slack: 1.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiskAreaSection {
    pub measures: usize,
    /// Nodes per side on `[−1, 1]²`.
    pub grid: usize,
    pub max_negative_mass: f64,
    /// Largest positive atom weight; below `2π` keeps `e^{2u}` integrable.
    pub max_positive_weight: f64,
    pub max_atoms: usize,
    /// Atoms and ball centres are drawn from the disk of this radius.
    pub support_radius: f64,
    /// Random ball centres per measure; every atom is a centre as well.
    pub centers: usize,
    pub radii: Vec<f64>,
}

impl Default for DiskAreaSection {
    fn default() -> Self {
        DiskAreaSection {
            measures: 20,
            grid: 512,
            max_negative_mass: PI,
            max_positive_weight: PI,
            max_atoms: 3,
            support_radius: 0.4,
            centers: 4,
            radii: vec![0.1, 0.2, 0.4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupSection {
    pub radii: Vec<f64>,
    /// Angular cutoff `a`: the sector is `|θ| < π/2 − a`.
    pub sector_cutoff: f64,
    pub quadrature_tolerance: f64,
    /// Allowed `max κ / min κ`.
    pub kappa_spread: f64,
}

impl Default for BlowupSection {
    fn default() -> Self {
        BlowupSection {
            radii: vec![10.0, 100.0, 1000.0],
            sector_cutoff: 0.1,
            quadrature_tolerance: 5e-3,
            kappa_spread: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorusSection {
    pub b: Vec<f64>,
    pub radii: Vec<f64>,
    pub p: Vec<f64>,
    /// Cells along the unit generator; a power of two.
    pub grid: usize,
    pub anchor_x: f64,
    pub anchor_y: f64,
    /// Allowed `max/min` of the normalized norm per exponent.
    pub spread: f64,
}

impl Default for TorusSection {
    fn default() -> Self {
        TorusSection {
            b: vec![1.0, 4.0, 16.0],
            radii: vec![0.05, 0.1, 0.2, 1.0, 3.0],
            p: vec![1.0, 1.5],
            grid: 512,
            anchor_x: 0.25,
            anchor_y: 0.5,
            spread: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollarSection {
    pub ell: Vec<f64>,
    /// Length at which the residual constant `κ` is fitted.
    pub kappa_fit_ell: f64,
    pub distance_tolerance: f64,
    pub ratio_samples: usize,
    /// Lengths for the strip audit with a unit point source at `t = 0`.
    pub strip_ell: Vec<f64>,
    pub strip_modes: usize,
    /// Strip ranges `[k, m]`, zipped pairwise.
    pub strip_k: Vec<i64>,
    pub strip_m: Vec<i64>,
    pub strip_bound: f64,
}

impl Default for CollarSection {
    fn default() -> Self {
        CollarSection {
            ell: vec![1e-1, 1e-2, 1e-3, 1e-4],
            kappa_fit_ell: 0.1,
            distance_tolerance: 1e-8,
            ratio_samples: 10_000,
            strip_ell: vec![0.1, 0.01],
            strip_modes: 128,
            strip_k: vec![-1, -5, 0, -40],
            strip_m: vec![2, 5, 40, 40],
            strip_bound: 2.0 * PI,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnulusSection {
    pub p: Vec<f64>,
    /// Inner radii: `0` or powers `2^{−m}`.
    pub a: Vec<f64>,
    pub per_disk_bound: f64,
    /// Slopes of the affine family `u_k = k·x¹`.
    pub k: Vec<f64>,
}

impl Default for AnnulusSection {
    fn default() -> Self {
        AnnulusSection {
            p: vec![1.0, 1.25, 1.5, 1.75, 1.9],
            a: vec![0.0, 0.25, 0.0625, 1.0 / 1024.0],
            per_disk_bound: 1.0,
            k: vec![1.0, 10.0, 100.0, 1000.0],
        }
    }
}

fn all_in(key: &str, xs: &[f64], ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    match xs.iter().find(|&&x| !ok(x)) {
        Some(x) => Err(Error::config(key, format!("{what}, got {x}"))),
        None => Ok(()),
    }
}

fn positive(key: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive and finite, got {x}")))
    }
}

fn p_range(x: f64) -> bool {
    (1.0..2.0).contains(&x)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks every parameter against the preconditions of the operation it
    /// feeds, before anything runs.
    pub fn validate(&self) -> Result<()> {
        let s = &self.potential;
        if s.weak_grid < 2 {
            return Err(Error::config("potential.weak_grid", "must be at least 2"));
        }
        positive("potential.weak_tolerance", s.weak_tolerance)?;
        all_in("potential.q", &s.q, p_range, "must lie in [1, 2)")?;
        all_in("potential.scaling_radii", &s.scaling_radii, |r| r > 0.0 && r.is_finite(), "must be positive")?;
        positive("potential.scaling_tolerance", s.scaling_tolerance)?;
        if !(s.eps > 0.0 && s.eps < 4.0 * PI) {
            return Err(Error::config("potential.eps", format!("must lie in (0, 4π), got {}", s.eps)));
        }
        all_in("potential.exp_radii", &s.exp_radii, |r| r > 0.0 && r.is_finite(), "must be positive")?;
        positive("potential.exp_growth_slack", s.exp_growth_slack)?;

        let s = &self.disk_area;
        if s.grid < 3 {
            return Err(Error::config("disk-area.grid", "must be at least 3"));
        }
        if !(s.max_negative_mass >= 0.0 && s.max_negative_mass.is_finite()) {
            return Err(Error::config(
                "disk-area.max_negative_mass",
                format!("must be finite and nonnegative, got {}", s.max_negative_mass),
            ));
        }
        if !(s.max_positive_weight >= 0.0 && s.max_positive_weight < 2.0 * PI) {
            return Err(Error::config(
                "disk-area.max_positive_weight",
                format!("must lie in [0, 2π), got {}", s.max_positive_weight),
            ));
        }
        if !(s.support_radius > 0.0 && s.support_radius < 1.0) {
            return Err(Error::config(
                "disk-area.support_radius",
                format!("must lie in (0, 1), got {}", s.support_radius),
            ));
        }
        if s.measures > 0 && s.centers == 0 {
            return Err(Error::config("disk-area.centers", "must be at least 1"));
        }
        let limit = crate::disk::MIN_CELLS * 2.0 / (s.grid - 1) as f64;
        all_in(
            "disk-area.radii",
            &s.radii,
            |r| r >= limit && r < 1.0,
            &format!("must lie in [{limit:.4}, 1) for this grid"),
        )?;
        if s.measures > 0 && s.radii.is_empty() {
            return Err(Error::config("disk-area.radii", "must not be empty when measures > 0"));
        }

        let s = &self.blowup;
        all_in("blowup.radii", &s.radii, |r| r > 1.0 && r.is_finite(), "must exceed 1")?;
        if !(s.sector_cutoff > 0.0 && s.sector_cutoff < PI / 2.0) {
            return Err(Error::config(
                "blowup.sector_cutoff",
                format!("must lie in (0, π/2), got {}", s.sector_cutoff),
            ));
        }
        positive("blowup.quadrature_tolerance", s.quadrature_tolerance)?;
        positive("blowup.kappa_spread", s.kappa_spread)?;

        let s = &self.torus;
        all_in("torus.b", &s.b, |b| b >= 1.0 && b.is_finite(), "must be at least 1")?;
        all_in("torus.p", &s.p, p_range, "must lie in [1, 2)")?;
        if s.grid < 4 || !s.grid.is_power_of_two() {
            return Err(Error::config("torus.grid", format!("must be a power of two ≥ 4, got {}", s.grid)));
        }
        let limit = crate::torus::MIN_BALL_CELLS / s.grid as f64;
        all_in(
            "torus.radii",
            &s.radii,
            |r| r >= limit && r.is_finite(),
            &format!("must be at least {limit:.4} for this grid"),
        )?;
        if !(s.anchor_x.is_finite() && s.anchor_y.is_finite()) {
            return Err(Error::config("torus.anchor_x", "anchor must be finite"));
        }
        positive("torus.spread", s.spread)?;

        let s = &self.collar;
        let ell_ok = |l: f64| l > 0.0 && l <= max_collar_length();
        let what = format!("must lie in (0, {:.6}]", max_collar_length());
        all_in("collar.ell", &s.ell, ell_ok, &what)?;
        if !ell_ok(s.kappa_fit_ell) {
            return Err(Error::config("collar.kappa_fit_ell", format!("{what}, got {}", s.kappa_fit_ell)));
        }
        positive("collar.distance_tolerance", s.distance_tolerance)?;
        all_in("collar.strip_ell", &s.strip_ell, ell_ok, &what)?;
        if s.strip_modes < 8 || !s.strip_modes.is_power_of_two() {
            return Err(Error::config(
                "collar.strip_modes",
                format!("must be a power of two ≥ 8, got {}", s.strip_modes),
            ));
        }
        if s.strip_k.len() != s.strip_m.len() {
            return Err(Error::config("collar.strip_m", "must have as many entries as collar.strip_k"));
        }
        for &ell in &s.strip_ell {
            let lim = crate::collar::collar_from_length(ell)
                .map_err(|e| Error::config("collar.strip_ell", e.to_string()))?
                .t_max
                - 2.0;
            for (&k, &m) in s.strip_k.iter().zip(&s.strip_m) {
                if !((-lim) < k as f64 && k < m && (m as f64) < lim) {
                    return Err(Error::config(
                        "collar.strip_k",
                        format!("pair ({k}, {m}) needs −T+2 < k < m < T−2 with T−2 = {lim:.3} at ℓ = {ell}"),
                    ));
                }
            }
        }
        positive("collar.strip_bound", s.strip_bound)?;

        let s = &self.annulus;
        all_in("annulus.p", &s.p, p_range, "must lie in [1, 2)")?;
        all_in(
            "annulus.a",
            &s.a,
            |a| a == 0.0 || (a > 0.0 && a <= 0.25 && (a.log2() - a.log2().round()).abs() < 1e-12),
            "must be 0 or a power 2^-m with m ≥ 2",
        )?;
        positive("annulus.per_disk_bound", s.per_disk_bound)?;
        all_in("annulus.k", &s.k, |k| k.is_finite() && k != 0.0, "must be finite and nonzero")?;
        Ok(())
    }
}
