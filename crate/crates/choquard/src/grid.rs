//! Periodic-box discretization and real scalar fields on it.
//!
//! The box is `[-L, L)^d` sampled at `n` points per axis, `x_i = -L + i·h`
//! with `h = 2L/n`. Fields are immutable after construction; every operation
//! returns a new `Field`.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    n: usize,
    half_length: f64,
    spacing: f64,
    /// Per-axis angular wavenumbers `k_m = π m / L` indexed by FFT bin,
    /// i.e. `m = i` for `i ≤ n/2` and `m = i − n` above.
    wavenumbers: Arc<Vec<f64>>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.n == other.n
            && self.half_length.to_bits() == other.half_length.to_bits()
    }
}

/// Build a grid; `n` must be a power of two ≥ 8 and `dim` in {1,2,3}.
pub fn make_grid(dim: usize, n: usize, half_length: f64) -> Result<Grid> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidGrid(format!("dim must be 1, 2 or 3, got {dim}")));
    }
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "points per axis must be a power of two ≥ 8, got {n}"
        )));
    }
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "half_length must be positive and finite, got {half_length}"
        )));
    }
    let spacing = 2.0 * half_length / n as f64;
    let wavenumbers = (0..n)
        .map(|i| {
            let m = if i <= n / 2 { i as i64 } else { i as i64 - n as i64 };
            PI * m as f64 / half_length
        })
        .collect();
    Ok(Grid {
        dim,
        n,
        half_length,
        spacing,
        wavenumbers: Arc::new(wavenumbers),
    })
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of sites, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.dim]
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Physical coordinate of a 1-d index along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing
    }

    /// Decode a flat row-major site index into per-axis indices.
    pub fn decode(&self, mut flat: usize, out: &mut [usize]) {
        for axis in (0..self.dim).rev() {
            out[axis] = flat % self.n;
            flat /= self.n;
        }
    }

    /// |x|² of a site given its per-axis indices.
    pub fn radius_sq(&self, idx: &[usize]) -> f64 {
        idx.iter()
            .map(|&i| {
                let x = self.coordinate(i);
                x * x
            })
            .sum()
    }

    /// Row-major iteration over sites yielding (flat index, coordinates).
    pub fn iter_coords(&self) -> CoordIter<'_> {
        CoordIter {
            grid: self,
            flat: 0,
            idx: vec![0; self.dim],
        }
    }
}

pub struct CoordIter<'a> {
    grid: &'a Grid,
    flat: usize,
    idx: Vec<usize>,
}

impl Iterator for CoordIter<'_> {
    type Item = (usize, [f64; 3]);

    fn next(&mut self) -> Option<Self::Item> {
        if self.flat >= self.grid.len() {
            return None;
        }
        self.grid.decode(self.flat, &mut self.idx);
        let mut x = [0.0; 3];
        for (a, &i) in self.idx.iter().enumerate() {
            x[a] = self.grid.coordinate(i);
        }
        let item = (self.flat, x);
        self.flat += 1;
        Some(item)
    }
}

/// One real scalar component sampled on a grid. Values are finite by
/// construction and the struct is immutable; operations return new fields.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Field {
        Field {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Field> {
        Field::from_values(grid, vec![c; grid.len()])
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "value buffer has length {} but grid has {} sites",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("field values must be finite".into()));
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    /// Sample a function of the coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<Field> {
        let mut values = vec![0.0; grid.len()];
        let mut idx = vec![0usize; grid.dim()];
        let mut x = vec![0.0f64; grid.dim()];
        for (flat, v) in values.iter_mut().enumerate() {
            grid.decode(flat, &mut idx);
            for (a, &i) in idx.iter().enumerate() {
                x[a] = grid.coordinate(i);
            }
            *v = f(&x);
        }
        Field::from_values(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn from_values_unchecked(grid: &Grid, values: Vec<f64>) -> Field {
        debug_assert_eq!(values.len(), grid.len());
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Field {
        self.map(f64::abs)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// |u|^{e-1}·sign(u) with the value 0 at u = 0, i.e. the pointwise factor
    /// appearing in |u|^{e-1} u-type nonlinearities.
    pub fn signed_pow(&self, e: f64) -> Field {
        self.map(|v| {
            if v == 0.0 {
                0.0
            } else {
                v.signum() * v.abs().powf(e)
            }
        })
    }

    /// Projection onto the subspace even under every coordinate reflection
    /// about the box center, i ↦ (n − i) mod n per axis. Kills the neutral
    /// translation modes of fixed-point iterations for symmetric profiles.
    pub fn symmetrize_even(&self) -> Field {
        let grid = &self.grid;
        let d = grid.dim();
        let n = grid.n();
        let src = self.values();
        let mut out = vec![0.0; src.len()];
        let mut idx = vec![0usize; d];
        let combos = 1usize << d;
        let weight = 1.0 / combos as f64;
        for (flat, slot) in out.iter_mut().enumerate() {
            grid.decode(flat, &mut idx);
            let mut acc = 0.0;
            for mask in 0..combos {
                let mut f = 0usize;
                for (a, &i) in idx.iter().enumerate() {
                    let j = if mask >> a & 1 == 1 { (n - i) % n } else { i };
                    f = f * n + j;
                }
                acc += src[f];
            }
            *slot = acc * weight;
        }
        Field::from_values_unchecked(grid, out)
    }
}

/// Centered Gaussian bump `exp(-|x - x0|² / (2σ²))`.
pub fn gaussian(grid: &Grid, center: &[f64], sigma: f64) -> Result<Field> {
    if center.len() != grid.dim() {
        return Err(Error::InvalidGrid(
            "gaussian center dimension mismatch".into(),
        ));
    }
    let c = center.to_vec();
    Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
        (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_arithmetic() {
        let g = make_grid(3, 8, 8.0).unwrap();
        assert_eq!(g.spacing(), 2.0);
        assert_eq!(g.len(), 512);
        assert_eq!(g.spacing() * g.n() as f64, 2.0 * g.half_length());
    }

    #[test]
    fn unit_wavenumbers_for_pi_box() {
        let g = make_grid(1, 16, PI).unwrap();
        let expected: Vec<f64> = (0..16)
            .map(|i| if i <= 8 { i as f64 } else { i as f64 - 16.0 })
            .collect();
        for (k, e) in g.wavenumbers().iter().zip(&expected) {
            assert!((k - e).abs() < 1e-15);
        }
    }

    #[test]
    fn wavenumber_symmetry_under_mode_negation() {
        let g = make_grid(2, 32, 5.0).unwrap();
        let k = g.wavenumbers();
        for m in 1..16 {
            assert_eq!(k[m], -k[32 - m]);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(make_grid(3, 6, 8.0).is_err());
        assert!(make_grid(0, 16, 8.0).is_err());
        assert!(make_grid(4, 16, 8.0).is_err());
        assert!(make_grid(3, 4, 8.0).is_err());
        assert!(make_grid(3, 16, 0.0).is_err());
    }

    #[test]
    fn field_rejects_nan() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let mut vals = vec![0.0; 8];
        vals[3] = f64::NAN;
        assert!(Field::from_values(&g, vals).is_err());
    }
}
