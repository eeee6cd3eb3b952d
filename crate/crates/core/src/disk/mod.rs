//! Conformal metrics `e^{2u}|dx|²` on gridded planar domains.
//!
//! Distances are shortest paths on the node graph with the 32-neighbour
//! stencil of all primitive offsets `(i, j)` with `max(|i|, |j|) ≤ 3`. An
//! edge costs its Euclidean length times the mean of `e^u` at its two
//! endpoints. The worst-case overestimate of the Euclidean distance by this
//! stencil is about 1.3%.

mod blowup;

pub use blowup::{blowup_area, blowup_kappa, blowup_main_term, blowup_t, BlowupArea};

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::io::Read;

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::geom::Vec2;
use crate::measure::SignedMeasure;
use crate::par;
use crate::potential::PotentialField;

/// Primitive offsets `(a, b)` with `0 ≤ b ≤ a ≤ 3`; the rest follow by sign
/// flips and swaps.
const BASE_OFFSETS: [(i32, i32); 5] = [(1, 0), (1, 1), (2, 1), (3, 1), (3, 2)];

fn stencil() -> Vec<(i32, i32)> {
    let mut out = Vec::with_capacity(32);
    for &(a, b) in &BASE_OFFSETS {
        let mut cand = vec![(a, b), (b, a)];
        cand.dedup();
        for (p, q) in cand {
            for (sp, sq) in [(1, 1), (-1, 1), (1, -1), (-1, -1)] {
                let o = (sp * p, sq * q);
                if !out.contains(&o) {
                    out.push(o);
                }
            }
        }
    }
    out
}

/// Where the metric lives inside its grid rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// The whole grid rectangle.
    Rect,
    /// Nodes within the closed disk.
    Disk { center: Vec2, radius: f64 },
}

/// A node-sampled conformal exponent `u` on a masked grid.
#[derive(Clone, Debug)]
pub struct ConformalField {
    grid: GridField,
    domain: Domain,
    active: Vec<bool>,
    eu: Vec<f64>,
}

impl ConformalField {
    pub fn new(grid: GridField, domain: Domain) -> Result<Self> {
        let active: Vec<bool> = (0..grid.nx * grid.ny)
            .map(|k| match domain {
                Domain::Rect => true,
                Domain::Disk { center, radius } => {
                    grid.node(k % grid.nx, k / grid.nx).dist(center) <= radius
                }
            })
            .collect();
        let mut eu = Vec::with_capacity(active.len());
        for (k, &u) in grid.values.iter().enumerate() {
            let e = u.exp();
            if active[k] && !(e > 0.0 && (e * e).is_finite()) {
                let p = grid.node(k % grid.nx, k / grid.nx);
                return Err(Error::pre(format!(
                    "e^(2u) must be positive and finite; u = {u} at ({}, {})",
                    p.x, p.y
                )));
            }
            eu.push(e);
        }
        if !active.iter().any(|&a| a) {
            return Err(Error::EmptyRegion);
        }
        Ok(ConformalField {
            grid,
            domain,
            active,
            eu,
        })
    }

    /// `n×n` nodes on `[lo, hi]²`, with `u` sampled exactly at nodes.
    pub fn from_fn(
        lo: f64,
        hi: f64,
        n: usize,
        domain: Domain,
        u: impl Fn(Vec2) -> f64 + Sync + Send,
    ) -> Result<Self> {
        ConformalField::new(GridField::square(lo, hi, n, u)?, domain)
    }

    /// `u = I_μ` sampled at nodes; the curvature of the resulting metric is
    /// `μ`. Atoms must not sit on active nodes.
    pub fn from_potential(
        mu: &SignedMeasure,
        lo: f64,
        hi: f64,
        n: usize,
        domain: Domain,
    ) -> Result<Self> {
        let f = PotentialField::new(mu.clone());
        ConformalField::from_fn(lo, hi, n, domain, |x| f.value_unchecked(x))
    }

    /// Reads `u` from the grid CSV format of [`GridField::read_csv`].
    pub fn read_csv<R: Read>(reader: R, domain: Domain) -> Result<Self> {
        ConformalField::new(GridField::read_csv(reader)?, domain)
    }

    pub fn grid(&self) -> &GridField {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    fn index_of(&self, x: Vec2) -> Result<usize> {
        let (i, j) = self
            .grid
            .nearest_node(x)
            .ok_or(Error::OutsideDomain { x: x.x, y: x.y })?;
        let k = j * self.grid.nx + i;
        if !self.active[k] {
            return Err(Error::OutsideDomain { x: x.x, y: x.y });
        }
        Ok(k)
    }

    fn is_boundary(&self, k: usize) -> bool {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let (i, j) = (k % nx, k / nx);
        if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
            return true;
        }
        !(self.active[k - 1] && self.active[k + 1] && self.active[k - nx] && self.active[k + nx])
    }

    /// Single-source graph distances from node `src`, settled up to
    /// `r_max`; unreached nodes hold `+∞`.
    fn sweep(&self, src: usize, r_max: f64) -> Vec<f64> {
        let (nx, ny) = (self.grid.nx as i64, self.grid.ny as i64);
        let h = self.grid.h;
        let edges: Vec<(i64, i64, f64)> = stencil()
            .into_iter()
            .map(|(a, b)| {
                let (a, b) = (a as i64, b as i64);
                (a, b, h * ((a * a + b * b) as f64).sqrt())
            })
            .collect();
        let mut dist = vec![f64::INFINITY; self.active.len()];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Reverse(Entry(0.0, src)));
        while let Some(Reverse(Entry(d, k))) = heap.pop() {
            if d > dist[k] {
                continue;
            }
            if d > r_max {
                break;
            }
            let (i, j) = ((k as i64) % nx, (k as i64) / nx);
            let ek = self.eu[k];
            for &(a, b, len) in &edges {
                let (p, q) = (i + a, j + b);
                if p < 0 || q < 0 || p >= nx || q >= ny {
                    continue;
                }
                let m = (q * nx + p) as usize;
                if !self.active[m] {
                    continue;
                }
                let nd = d + len * 0.5 * (ek + self.eu[m]);
                if nd < dist[m] {
                    dist[m] = nd;
                    heap.push(Reverse(Entry(nd, m)));
                }
            }
        }
        dist
    }

    /// Area of the node set `{d ≤ r}` for each radius, plus clipping flags.
    fn balls_from_dist(&self, center: Vec2, dist: &[f64], radii: &[f64]) -> Vec<BallReport> {
        let cell = self.grid.h * self.grid.h;
        radii
            .iter()
            .map(|&r| {
                let mut area = 0.0;
                let mut clipped = false;
                let mut nodes = 0;
                for (k, &d) in dist.iter().enumerate() {
                    if d <= r {
                        area += self.eu[k] * self.eu[k] * cell;
                        clipped |= self.is_boundary(k);
                        nodes += 1;
                    }
                }
                BallReport {
                    center,
                    radius: r,
                    area,
                    ratio: (!clipped).then(|| area / (PI * r * r)),
                    clipped,
                    nodes,
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
struct Entry(f64, usize);

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

/// A grid-geodesic ball `{d_g(center, ·) ≤ radius}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallReport {
    pub center: Vec2,
    pub radius: f64,
    /// `Σ e^{2u}h²` over nodes in the ball.
    pub area: f64,
    /// `area/(π r²)`, only for balls that stay off the domain boundary.
    pub ratio: Option<f64>,
    pub clipped: bool,
    /// Grid nodes inside the ball.
    pub nodes: usize,
}

impl BallReport {
    /// Enough nodes for the area sum to mean something; near strong
    /// positive cone points a ball of metric radius `≥ 20h` can still be a
    /// few cells wide.
    pub fn resolved(&self) -> bool {
        self.nodes >= MIN_BALL_NODES
    }
}

/// Grid-geodesic distance between the nodes nearest to `x` and `y`.
pub fn conformal_distance(f: &ConformalField, x: Vec2, y: Vec2) -> Result<f64> {
    let a = f.index_of(x)?;
    let b = f.index_of(y)?;
    let dist = f.sweep(a, f64::INFINITY);
    Ok(dist[b])
}

/// All graph distances from the node nearest `x`, as a grid (`+∞` where
/// unreachable or masked out).
pub fn distance_field(f: &ConformalField, x: Vec2) -> Result<GridField> {
    let src = f.index_of(x)?;
    let g = &f.grid;
    GridField::new(g.origin, g.h, g.nx, g.ny, f.sweep(src, f64::INFINITY))
}

pub fn geodesic_ball(f: &ConformalField, x: Vec2, r: f64) -> Result<BallReport> {
    Ok(geodesic_balls(f, x, &[r])?.remove(0))
}

/// Several radii about one centre from a single sweep.
pub fn geodesic_balls(f: &ConformalField, x: Vec2, radii: &[f64]) -> Result<Vec<BallReport>> {
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::pre("ball radii must be positive"));
    }
    let src = f.index_of(x)?;
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let dist = f.sweep(src, r_max);
    Ok(f.balls_from_dist(f.grid.node(src % f.grid.nx, src / f.grid.nx), &dist, radii))
}

/// Discretisation allowance on top of the curvature bound.
pub const AREA_MARGIN: f64 = 0.05;
/// Radii below `MIN_CELLS·h` are not resolved by node counting.
pub const MIN_CELLS: f64 = 20.0;
/// Node count of a flat ball of radius `MIN_CELLS·h`.
pub const MIN_BALL_NODES: usize = 1257;

/// Outcome of [`area_bound_audit`].
#[derive(Clone, Debug)]
pub struct AreaAudit {
    pub balls: Vec<BallReport>,
    /// `1 + |𝕂⁻|/2π`.
    pub bound: f64,
    /// Largest ratio over unclipped, resolved balls.
    pub worst_ratio: Option<f64>,
    /// Unclipped balls with fewer than [`MIN_BALL_NODES`] nodes, left out
    /// of `worst_ratio`.
    pub unresolved: usize,
    /// No ball was both unclipped and resolved.
    pub inconclusive: bool,
}

impl AreaAudit {
    pub fn passed(&self) -> bool {
        !self.inconclusive && self.worst_ratio.is_some_and(|w| w <= self.bound + AREA_MARGIN)
    }
}

/// Checks `Area(B_r(x))/πr² ≤ 1 + |𝕂⁻|/2π` for unclipped, resolved samples, where
/// `curvature` is the curvature measure of the metric of `f`.
pub fn area_bound_audit(
    f: &ConformalField,
    curvature: &SignedMeasure,
    samples: &[(Vec2, f64)],
) -> Result<AreaAudit> {
    let limit = MIN_CELLS * f.h();
    if let Some(&(_, r)) = samples.iter().find(|s| s.1 < limit) {
        return Err(Error::Unresolved { radius: r, limit });
    }
    // group radii by centre so each centre costs one sweep
    let mut centres: Vec<(Vec2, Vec<f64>)> = Vec::new();
    for &(x, r) in samples {
        match centres.iter_mut().find(|c| c.0 == x) {
            Some(c) => c.1.push(r),
            None => centres.push((x, vec![r])),
        }
    }
    let per_centre = par::map(&centres, |(x, radii)| geodesic_balls(f, *x, radii));
    let mut balls = Vec::with_capacity(samples.len());
    for b in per_centre {
        balls.extend(b?);
    }
    let (_, neg) = curvature.jordan_decompose();
    let bound = 1.0 + neg.total_variation() / (2.0 * PI);
    let unresolved = balls.iter().filter(|b| !b.clipped && !b.resolved()).count();
    let worst_ratio = balls
        .iter()
        .filter(|b| b.resolved())
        .filter_map(|b| b.ratio)
        .fold(None, |w: Option<f64>, r| Some(w.map_or(r, |w| w.max(r))));
    Ok(AreaAudit {
        inconclusive: worst_ratio.is_none(),
        balls,
        bound,
        worst_ratio,
        unresolved,
    })
}
