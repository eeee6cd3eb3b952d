//! Signed Radon measures on planar domains: finitely many atoms plus an
//! optional cell-centred density grid.

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// What kind of region the measure lives on. Informational; the geometry
/// modules decide how to interpret positions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DomainTag {
    #[default]
    Plane,
    Disk,
    TorusCell,
    Cylinder,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub pos: Vec2,
    pub weight: f64,
}

/// Density on a uniform grid of square cells. `values` holds density per
/// unit area, row-major with `values[j * nx + i]` the cell whose lower-left
/// corner is `origin + h·(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    origin: Vec2,
    h: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(origin: Vec2, h: f64, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) || !origin.is_finite() {
            return Err(Error::InvalidMeasure(format!("bad grid geometry h={h}")));
        }
        if values.len() != nx * ny {
            return Err(Error::InvalidMeasure(format!(
                "grid has {} values, expected {nx}x{ny}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite density value".into()));
        }
        Ok(DensityGrid {
            origin,
            h,
            nx,
            ny,
            values,
        })
    }

    /// Density `f(x)` sampled at cell centres of an `n×n` grid covering the
    /// square `[lo, hi]²`.
    pub fn sample(lo: f64, hi: f64, n: usize, f: impl Fn(Vec2) -> f64) -> Result<Self> {
        let h = (hi - lo) / n as f64;
        let origin = Vec2::new(lo, lo);
        let mut values = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                values.push(f(origin + Vec2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)));
            }
        }
        DensityGrid::new(origin, h, n, n, values)
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    pub fn center(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    /// Lower-left and upper-right corners of cell `(i, j)`.
    pub fn cell_bounds(&self, i: usize, j: usize) -> (Vec2, Vec2) {
        let lo = self.origin + Vec2::new(i as f64 * self.h, j as f64 * self.h);
        (lo, lo + Vec2::new(self.h, self.h))
    }

    /// Cell containing `x` (half-open on the upper edges), if any.
    pub fn cell_of(&self, x: Vec2) -> Option<(usize, usize)> {
        let fx = (x.x - self.origin.x) / self.h;
        let fy = (x.y - self.origin.y) / self.h;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        (i < self.nx && j < self.ny).then_some((i, j))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Iterator over `(i, j, density)` of nonzero cells.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values.iter().enumerate().filter_map(move |(k, &v)| {
            (v != 0.0).then_some((k % self.nx, k / self.nx, v))
        })
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Option<DensityGrid> {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        values.iter().any(|&v| v != 0.0).then(|| DensityGrid {
            values,
            ..self.clone()
        })
    }
}

/// Planar regions used to restrict measures and select samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegionSpec {
    Disk { center: Vec2, radius: f64 },
    Annulus { center: Vec2, inner: f64, outer: f64 },
    Rect { min: Vec2, max: Vec2 },
}

impl RegionSpec {
    pub fn disk(center: Vec2, radius: f64) -> Self {
        RegionSpec::Disk { center, radius }
    }

    /// Closed membership test.
    pub fn contains(&self, p: Vec2) -> bool {
        match *self {
            RegionSpec::Disk { center, radius } => p.dist(center) <= radius,
            RegionSpec::Annulus {
                center,
                inner,
                outer,
            } => {
                let d = p.dist(center);
                d >= inner && d <= outer
            }
            RegionSpec::Rect { min, max } => {
                p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y
            }
        }
    }

    pub fn area(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            RegionSpec::Disk { radius, .. } => PI * radius * radius,
            RegionSpec::Annulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
            RegionSpec::Rect { min, max } => (max.x - min.x) * (max.y - min.y),
        }
    }
}

/// A signed measure `μ = Σ wᵢ δ_{xᵢ} + f dx`.
///
/// Zero-weight atoms are dropped and an all-zero density is stored as
/// `None`, so structurally equal measures compare equal.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SignedMeasure {
    atoms: Vec<Atom>,
    density: Option<DensityGrid>,
    domain: DomainTag,
}

impl SignedMeasure {
    pub fn zero() -> Self {
        SignedMeasure::default()
    }

    pub fn dirac(pos: Vec2, weight: f64) -> Result<Self> {
        SignedMeasure::atomic([(pos, weight)])
    }

    pub fn atomic<I, P>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (P, f64)>,
        P: Into<Vec2>,
    {
        SignedMeasure::new(
            atoms
                .into_iter()
                .map(|(p, w)| Atom {
                    pos: p.into(),
                    weight: w,
                })
                .collect(),
            None,
        )
    }

    pub fn new(atoms: Vec<Atom>, density: Option<DensityGrid>) -> Result<Self> {
        for a in &atoms {
            if !a.pos.is_finite() || !a.weight.is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "non-finite atom {:?}",
                    a
                )));
            }
        }
        let atoms = atoms.into_iter().filter(|a| a.weight != 0.0).collect();
        let density = density.and_then(|d| d.map(|v| v));
        Ok(SignedMeasure {
            atoms,
            density,
            domain: DomainTag::Plane,
        })
    }

    /// Parses `"x y w; x y w; ..."` into an atomic measure. Commas are
    /// accepted as separators inside an atom.
    pub fn from_literal(s: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let nums: Vec<f64> = part
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad number `{t}` in atom `{part}`")))
                })
                .collect::<Result<_>>()?;
            if nums.len() != 3 {
                return Err(Error::Parse(format!(
                    "atom `{part}` needs 3 numbers (x y weight)"
                )));
            }
            atoms.push((Vec2::new(nums[0], nums[1]), nums[2]));
        }
        SignedMeasure::atomic(atoms)
    }

    pub fn with_domain(mut self, domain: DomainTag) -> Self {
        self.domain = domain;
        self
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&DensityGrid> {
        self.density.as_ref()
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn is_atomic(&self) -> bool {
        self.density.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_none()
    }

    /// `|μ|` of the whole domain: `Σ|wᵢ| + Σ|fₖ|·cell_area`.
    pub fn total_variation(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight.abs()).sum();
        let dens = self.density.as_ref().map_or(0.0, |d| {
            d.values.iter().map(|v| v.abs()).sum::<f64>() * d.cell_area()
        });
        atoms + dens
    }

    /// Signed total mass `μ(domain)`.
    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight).sum();
        let dens = self
            .density
            .as_ref()
            .map_or(0.0, |d| d.values.iter().sum::<f64>() * d.cell_area());
        atoms + dens
    }

    /// Jordan decomposition `μ = μ⁺ − μ⁻`, split atom by atom and cell by
    /// cell.
    pub fn jordan_decompose(&self) -> (SignedMeasure, SignedMeasure) {
        let split = |sign: f64| SignedMeasure {
            atoms: self
                .atoms
                .iter()
                .filter(|a| a.weight * sign > 0.0)
                .map(|a| Atom {
                    pos: a.pos,
                    weight: a.weight.abs(),
                })
                .collect(),
            density: self
                .density
                .as_ref()
                .and_then(|d| d.map(|v| (v * sign).max(0.0))),
            domain: self.domain,
        };
        (split(1.0), split(-1.0))
    }

    /// Restriction to a region: atoms outside are dropped, density cells are
    /// kept or dropped by their centre.
    pub fn restrict(&self, region: &RegionSpec) -> SignedMeasure {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| region.contains(a.pos))
            .copied()
            .collect();
        let density = self.density.as_ref().and_then(|d| {
            let mut out = d.clone();
            for j in 0..d.ny {
                for i in 0..d.nx {
                    if !region.contains(d.center(i, j)) {
                        out.values[j * d.nx + i] = 0.0;
                    }
                }
            }
            out.map(|v| v)
        });
        SignedMeasure {
            atoms,
            density,
            domain: self.domain,
        }
    }

    pub fn translate(&self, t: Vec2) -> SignedMeasure {
        let mut m = self.clone();
        for a in &mut m.atoms {
            a.pos += t;
        }
        if let Some(d) = &mut m.density {
            d.origin += t;
        }
        m
    }

    /// Push-forward under `x ↦ factor·x` (mass preserving).
    pub fn dilate(&self, factor: f64) -> SignedMeasure {
        assert!(factor > 0.0);
        let mut m = self.clone();
        for a in &mut m.atoms {
            a.pos = a.pos * factor;
        }
        if let Some(d) = &mut m.density {
            d.origin = d.origin * factor;
            d.h *= factor;
            let s = 1.0 / (factor * factor);
            d.values.iter_mut().for_each(|v| *v *= s);
        }
        m
    }

    pub fn scale(&self, s: f64) -> SignedMeasure {
        let mut m = self.clone();
        m.atoms.iter_mut().for_each(|a| a.weight *= s);
        m.atoms.retain(|a| a.weight != 0.0);
        m.density = m.density.and_then(|d| d.map(|v| v * s));
        m
    }

    /// Sum of two measures. Densities must share the same grid.
    pub fn add(&self, other: &SignedMeasure) -> Result<SignedMeasure> {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let density = match (&self.density, &other.density) {
            (None, None) => None,
            (Some(d), None) | (None, Some(d)) => Some(d.clone()),
            (Some(a), Some(b)) => {
                if a.origin != b.origin || a.h != b.h || a.nx != b.nx || a.ny != b.ny {
                    return Err(Error::InvalidMeasure(
                        "cannot add densities on different grids".into(),
                    ));
                }
                let mut s = a.clone();
                s.values
                    .iter_mut()
                    .zip(&b.values)
                    .for_each(|(x, y)| *x += y);
                s.map(|v| v)
            }
        };
        Ok(SignedMeasure {
            atoms,
            density,
            domain: self.domain,
        })
    }

    /// Every point where the measure may be singular (atom locations).
    pub fn singular_points(&self) -> Vec<Vec2> {
        self.atoms.iter().map(|a| a.pos).collect()
    }

    /// Integral of a function against the measure (density by midpoint).
    pub fn integrate(&self, f: impl Fn(Vec2) -> f64) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight * f(a.pos)).sum();
        let dens = self.density.as_ref().map_or(0.0, |d| {
            d.nonzero().map(|(i, j, v)| v * f(d.center(i, j))).sum::<f64>() * d.cell_area()
        });
        atoms + dens
    }
}
