//! Scalar fields on the plane and node-sampled grids.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// A real function on (part of) the plane.
pub trait ScalarField: Sync {
    fn value(&self, x: Vec2) -> f64;

    /// Points where the field may be singular; quadrature refines there.
    fn singular_points(&self) -> Vec<Vec2> {
        Vec::new()
    }
}

impl<F: Fn(Vec2) -> f64 + Sync> ScalarField for F {
    fn value(&self, x: Vec2) -> f64 {
        self(x)
    }
}

/// Values at the nodes `origin + h·(i, j)`, `0 ≤ i < nx`, `0 ≤ j < ny`,
/// stored row-major (`values[j * nx + i]`).
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub origin: Vec2,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(origin: Vec2, h: f64, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if nx < 2 || ny < 2 || !(h > 0.0) {
            return Err(Error::pre(format!("grid {nx}x{ny} with h={h} is degenerate")));
        }
        if values.len() != nx * ny {
            return Err(Error::pre(format!(
                "grid {nx}x{ny} needs {} values, got {}",
                nx * ny,
                values.len()
            )));
        }
        Ok(GridField {
            origin,
            h,
            nx,
            ny,
            values,
        })
    }

    pub fn from_fn(
        origin: Vec2,
        h: f64,
        nx: usize,
        ny: usize,
        f: impl Fn(Vec2) -> f64 + Sync + Send,
    ) -> Result<Self> {
        let values = crate::par::map_range(nx * ny, |k| {
            f(origin + Vec2::new((k % nx) as f64 * h, (k / nx) as f64 * h))
        });
        GridField::new(origin, h, nx, ny, values)
    }

    /// Square grid of `n×n` nodes spanning `[lo, hi]²`.
    pub fn square(lo: f64, hi: f64, n: usize, f: impl Fn(Vec2) -> f64 + Sync + Send) -> Result<Self> {
        let h = (hi - lo) / (n - 1) as f64;
        GridField::from_fn(Vec2::new(lo, lo), h, n, n, f)
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.h, j as f64 * self.h)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn max_corner(&self) -> Vec2 {
        self.node(self.nx - 1, self.ny - 1)
    }

    pub fn contains(&self, x: Vec2) -> bool {
        let hi = self.max_corner();
        x.x >= self.origin.x && x.y >= self.origin.y && x.x <= hi.x && x.y <= hi.y
    }

    /// Nearest node to `x`, if `x` lies within the grid rectangle.
    pub fn nearest_node(&self, x: Vec2) -> Option<(usize, usize)> {
        if !self.contains(x) {
            return None;
        }
        let i = ((x.x - self.origin.x) / self.h).round() as usize;
        let j = ((x.y - self.origin.y) / self.h).round() as usize;
        Some((i.min(self.nx - 1), j.min(self.ny - 1)))
    }

    /// Bilinear interpolation; NaN outside the grid.
    pub fn interpolate(&self, x: Vec2) -> f64 {
        if !self.contains(x) {
            return f64::NAN;
        }
        let fx = (x.x - self.origin.x) / self.h;
        let fy = (x.y - self.origin.y) / self.h;
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }

    /// Reads the grid CSV format: a header line `nx,ny,h[,x0,y0]`, one line
    /// with those numbers, then `ny` rows of `nx` values (row-major, `y`
    /// increasing). Without `x0,y0` the grid is centred on the origin.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header.len() < 3 || header[0] != "nx" || header[1] != "ny" || header[2] != "h" {
            return Err(Error::Parse(format!(
                "grid header must start with nx,ny,h; got {header:?}"
            )));
        }
        let mut records = rdr.records();
        let meta = records
            .next()
            .ok_or_else(|| Error::Parse("missing grid size line".into()))??;
        let num = |k: usize| -> Result<f64> {
            meta.get(k)
                .ok_or_else(|| Error::Parse(format!("missing `{}`", header[k])))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("`{}`: {e}", header[k])))
        };
        let nx = num(0)? as usize;
        let ny = num(1)? as usize;
        let h = num(2)?;
        let origin = if header.len() >= 5 {
            Vec2::new(num(3)?, num(4)?)
        } else {
            Vec2::new(-0.5 * (nx - 1) as f64 * h, -0.5 * (ny - 1) as f64 * h)
        };
        let mut values = Vec::with_capacity(nx * ny);
        for rec in records {
            let rec = rec?;
            for field in rec.iter() {
                values.push(
                    field
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("value `{field}`: {e}")))?,
                );
            }
        }
        GridField::new(origin, h, nx, ny, values)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
        w.write_record(["nx", "ny", "h", "x0", "y0"])?;
        w.write_record([
            self.nx.to_string(),
            self.ny.to_string(),
            format!("{:e}", self.h),
            format!("{:e}", self.origin.x),
            format!("{:e}", self.origin.y),
        ])?;
        for row in self.values.chunks(self.nx) {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

impl ScalarField for GridField {
    fn value(&self, x: Vec2) -> f64 {
        self.interpolate(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_reproduces_affine_functions() {
        let g = GridField::square(-1.0, 1.0, 11, |x| 3.0 * x.x - 2.0 * x.y + 0.5).unwrap();
        for &(x, y) in &[(0.13, -0.77), (1.0, 1.0), (-1.0, 0.31)] {
            let p = Vec2::new(x, y);
            assert!((g.interpolate(p) - (3.0 * x - 2.0 * y + 0.5)).abs() < 1e-13);
        }
        assert!(g.interpolate(Vec2::new(1.5, 0.0)).is_nan());
    }

    #[test]
    fn csv_round_trip() {
        let g = GridField::from_fn(Vec2::new(0.25, -1.0), 0.125, 5, 3, |x| x.x * x.y).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = GridField::read_csv(buf.as_slice()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn csv_without_origin_is_centred() {
        let text = "nx,ny,h\n3,2,0.5\n1,2,3\n4,5,6\n";
        let g = GridField::read_csv(text.as_bytes()).unwrap();
        assert_eq!(g.origin, Vec2::new(-0.5, -0.25));
        assert_eq!(g.at(2, 1), 6.0);
    }

    #[test]
    fn csv_wrong_count_rejected() {
        let text = "nx,ny,h\n3,2,0.5\n1,2,3\n4,5\n";
        assert!(GridField::read_csv(text.as_bytes()).is_err());
        assert!(GridField::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
