//! Spectral solution of `−Δu = μ` on a flat torus.

use std::f64::consts::PI;
use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::lattice::Lattice;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::measure::SignedMeasure;
use crate::par;

type C64 = Complex<f64>;

/// Mollifier width in grid cells.
pub const SIGMA_CELLS: f64 = 3.0;

/// Solution of `−Δu = μ_σ` on the grid `x = (i/n_v)·v + (j/n_w)·w`, where
/// `μ_σ` is `μ` convolved with a Gaussian of width `σ` and cut off at the
/// grid Nyquist band. Values are stored row-major, `j·n_v + i`.
#[derive(Clone, Debug)]
pub struct TorusSolution {
    pub lattice: Lattice,
    pub n_v: usize,
    pub n_w: usize,
    pub sigma: f64,
    /// Mode cutoff `|m| < n/2` in each direction.
    pub truncation: (usize, usize),
    pub u: Vec<f64>,
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
    atoms: Vec<(Vec2, f64)>,
}

/// In-place 2-D FFT of a row-major `nx × ny` array.
fn fft2(data: &mut [C64], nx: usize, ny: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let (px, py) = if inverse {
        (planner.plan_fft_inverse(nx), planner.plan_fft_inverse(ny))
    } else {
        (planner.plan_fft_forward(nx), planner.plan_fft_forward(ny))
    };
    par::for_each_chunk_mut(data, nx, |_, row| px.process(row));
    let mut tr = vec![C64::default(); nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            tr[i * ny + j] = data[j * nx + i];
        }
    }
    par::for_each_chunk_mut(&mut tr, ny, |_, col| py.process(col));
    for j in 0..ny {
        for i in 0..nx {
            data[j * nx + i] = tr[i * ny + j];
        }
    }
}

/// Signed FFT frequency of index `i` on `n` points; `None` at Nyquist.
fn freq(i: usize, n: usize) -> Option<f64> {
    if n.is_multiple_of(2) && i == n / 2 {
        None
    } else if i <= n / 2 {
        Some(i as f64)
    } else {
        Some(i as f64 - n as f64)
    }
}

impl TorusSolution {
    /// Cartesian wavevector of mode `(i, j)`.
    fn wavevector(&self, i: usize, j: usize) -> Option<Vec2> {
        let (vs, ws) = self.lattice.dual();
        Some(vs * freq(i, self.n_v)? + ws * freq(j, self.n_w)?)
    }

    /// Fourier coefficients of `μ_σ`, normalised so that
    /// `μ_σ(x) = Σ_k μ̂(k) e^{2πik·x}`.
    fn measure_coefficients(&self) -> Vec<C64> {
        mollified_coefficients(&self.lattice, &self.atoms, self.n_v, self.n_w, self.sigma)
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        self.lattice
            .point(i as f64 / self.n_v as f64, j as f64 / self.n_w as f64)
    }

    pub fn cell_area(&self) -> f64 {
        self.lattice.area() / (self.n_v * self.n_w) as f64
    }

    /// Largest grid step along either generator.
    pub fn grid_step(&self) -> f64 {
        (self.lattice.v.norm() / self.n_v as f64).max(self.lattice.w.norm() / self.n_w as f64)
    }

    pub fn mean(&self) -> f64 {
        par::sum_range(self.u.len(), |k| self.u[k]) / self.u.len() as f64
    }

    fn bilinear(&self, values: &[f64], x: Vec2) -> f64 {
        let (s, t) = self.lattice.coords(x);
        let fs = s.rem_euclid(1.0) * self.n_v as f64;
        let ft = t.rem_euclid(1.0) * self.n_w as f64;
        let (i0, j0) = (fs.floor() as usize % self.n_v, ft.floor() as usize % self.n_w);
        let (a, b) = (fs - fs.floor(), ft - ft.floor());
        let (i1, j1) = ((i0 + 1) % self.n_v, (j0 + 1) % self.n_w);
        let at = |i: usize, j: usize| values[j * self.n_v + i];
        (1.0 - b) * ((1.0 - a) * at(i0, j0) + a * at(i1, j0))
            + b * ((1.0 - a) * at(i0, j1) + a * at(i1, j1))
    }

    /// `u(x)` by periodic bilinear interpolation.
    pub fn value(&self, x: Vec2) -> f64 {
        self.bilinear(&self.u, x)
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        Vec2::new(self.bilinear(&self.grad_x, x), self.bilinear(&self.grad_y, x))
    }

    /// Spectral `−Δ` of the stored grid values against `μ̂_σ`, relative to
    /// `max |μ̂_σ|`, over all modes below Nyquist.
    pub fn laplacian_residual(&self) -> f64 {
        let n = self.n_v * self.n_w;
        let mut uh: Vec<C64> = self.u.iter().map(|&x| C64::new(x, 0.0)).collect();
        fft2(&mut uh, self.n_v, self.n_w, false);
        let mh = self.measure_coefficients();
        let scale = mh.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return self.u.iter().map(|x| x.abs()).fold(0.0, f64::max);
        }
        let mut worst: f64 = 0.0;
        for j in 0..self.n_w {
            for i in 0..self.n_v {
                if let Some(k) = self.wavevector(i, j) {
                    let lap = uh[j * self.n_v + i] * (4.0 * PI * PI * k.norm_sq() / n as f64);
                    worst = worst.max((lap - mh[j * self.n_v + i]).norm());
                }
            }
        }
        worst / scale
    }

    /// Writes `x,y,u,ux,uy` for every node.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "y", "u", "ux", "uy"])?;
        for j in 0..self.n_w {
            for i in 0..self.n_v {
                let p = self.node(i, j);
                let k = j * self.n_v + i;
                w.write_record(
                    [p.x, p.y, self.u[k], self.grad_x[k], self.grad_y[k]].map(|v| format!("{v:e}")),
                )?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn mollified_coefficients(
    l: &Lattice,
    atoms: &[(Vec2, f64)],
    n_v: usize,
    n_w: usize,
    sigma: f64,
) -> Vec<C64> {
    let (vs, ws) = l.dual();
    let area = l.area();
    let mut out = vec![C64::default(); n_v * n_w];
    for &(p, wgt) in atoms {
        let (s, t) = l.coords(p);
        // e^{−2πi(m₁s + m₂t)} as an outer product of 1-D phases
        let phase = |n: usize, c: f64| -> Vec<C64> {
            (0..n)
                .map(|i| match freq(i, n) {
                    Some(m) => C64::from_polar(1.0, -2.0 * PI * m * c),
                    None => C64::default(),
                })
                .collect()
        };
        let (ps, pt) = (phase(n_v, s), phase(n_w, t));
        par::for_each_chunk_mut(&mut out, n_v, |j, row| {
            let c = pt[j] * (wgt / area);
            for (o, &a) in row.iter_mut().zip(&ps) {
                *o += a * c;
            }
        });
    }
    par::for_each_chunk_mut(&mut out, n_v, |j, row| {
        for (i, o) in row.iter_mut().enumerate() {
            match (freq(i, n_v), freq(j, n_w)) {
                (Some(a), Some(b)) => {
                    let k = vs * a + ws * b;
                    *o *= (-2.0 * PI * PI * sigma * sigma * k.norm_sq()).exp();
                }
                _ => *o = C64::default(),
            }
        }
    });
    out[0] = C64::default();
    out
}

/// Grid with `n` cells along the unit generator `w` and about `n·ρ` along
/// `v`, so cells are close to `1/n` on each side.
pub fn grid_shape(l: &Lattice, n: usize) -> (usize, usize) {
    (((n as f64 * l.v.norm()).round() as usize).max(2), n)
}

/// Solves `−Δu = μ` with `u` of mean zero. Densities are lumped onto their
/// cell centres. `n` must be a power of two.
pub fn solve_poisson(l: &Lattice, mu: &SignedMeasure, n: usize) -> Result<TorusSolution> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::pre(format!("grid size must be a power of two ≥ 4, got {n}")));
    }
    let tv = mu.total_variation();
    let mass = mu.total_mass();
    if mass.abs() > 1e-12 * tv.max(1.0) {
        return Err(Error::pre(format!(
            "total mass {mass} is nonzero; −Δu = μ has no periodic solution"
        )));
    }
    let mut atoms: Vec<(Vec2, f64)> = mu.atoms().iter().map(|a| (a.pos, a.weight)).collect();
    if let Some(d) = mu.density() {
        atoms.extend(d.nonzero().map(|(i, j, f)| (d.center(i, j), f * d.cell_area())));
    }
    let (n_v, n_w) = grid_shape(l, n);
    let sigma = SIGMA_CELLS / n as f64;
    let mut sol = TorusSolution {
        lattice: *l,
        n_v,
        n_w,
        sigma,
        truncation: (n_v / 2, n_w / 2),
        u: Vec::new(),
        grad_x: Vec::new(),
        grad_y: Vec::new(),
        atoms,
    };
    let mh = sol.measure_coefficients();
    let (vs, ws) = l.dual();
    let kv = |i: usize, j: usize| -> Option<Vec2> { Some(vs * freq(i, n_v)? + ws * freq(j, n_w)?) };
    let mut uh = vec![C64::default(); n_v * n_w];
    let mut gxh = vec![C64::default(); n_v * n_w];
    let mut gyh = vec![C64::default(); n_v * n_w];
    for j in 0..n_w {
        for i in 0..n_v {
            let idx = j * n_v + i;
            if idx == 0 {
                continue;
            }
            if let Some(k) = kv(i, j) {
                let c = mh[idx] / (4.0 * PI * PI * k.norm_sq());
                uh[idx] = c;
                let ic = C64::new(-c.im, c.re) * (2.0 * PI);
                gxh[idx] = ic * k.x;
                gyh[idx] = ic * k.y;
            }
        }
    }
    drop(mh);
    let to_real = |mut v: Vec<C64>| -> Vec<f64> {
        fft2(&mut v, n_v, n_w, true);
        v.into_iter().map(|c| c.re).collect()
    };
    sol.u = to_real(uh);
    sol.grad_x = to_real(gxh);
    sol.grad_y = to_real(gyh);
    Ok(sol)
}
