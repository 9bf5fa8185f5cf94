use std::f64::consts::PI;

use serde::Serialize;

use crate::{Error, Result};

pub const AXIS_X: usize = 0;
pub const AXIS_Y: usize = 1;
pub const AXIS_Z: usize = 2;

/// Uniform periodic grid on `T^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Grid {
    sizes: Vec<usize>,
}

/// Builds a grid, rejecting odd or undersized axes.
pub fn make_grid(dim: usize, sizes: &[usize]) -> Result<Grid> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
    }
    if sizes.len() != dim {
        return Err(Error::InvalidGrid(format!(
            "{} sizes given for dimension {dim}",
            sizes.len()
        )));
    }
    for &n in sizes {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "axis size {n} must be even and at least 8"
            )));
        }
    }
    Ok(Grid {
        sizes: sizes.to_vec(),
    })
}

impl Grid {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        make_grid(sizes.len(), sizes)
    }

    /// Cubic grid with `n` points per axis.
    pub fn cube(dim: usize, n: usize) -> Result<Self> {
        make_grid(dim, &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, axis: usize) -> usize {
        self.sizes[axis]
    }

    /// Total number of points.
    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * PI / self.sizes[axis] as f64
    }

    /// Quadrature weight of one cell, `∏ 2π/N_i`.
    pub fn cell_weight(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Distance in flat index between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.sizes[axis + 1..].iter().product()
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim() {
            Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim(),
            })
        } else {
            Ok(())
        }
    }

    /// Integer index of point `p` along `axis`.
    pub fn axis_index(&self, p: usize, axis: usize) -> usize {
        (p / self.stride(axis)) % self.sizes[axis]
    }

    /// Coordinates of point `p`; unused axes read as zero.
    pub fn coords(&self, p: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (axis, c) in out.iter_mut().enumerate().take(self.dim()) {
            *c = self.axis_index(p, axis) as f64 * self.spacing(axis);
        }
        out
    }

    /// Flat index from per-axis indices (taken modulo the axis sizes).
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&i, &n)| acc * n + i % n)
    }

    /// Signed Fourier wavenumber of DFT slot `j` on an axis of `n` points.
    /// The Nyquist slot maps to `n/2`.
    pub fn wavenumber(j: usize, n: usize) -> i64 {
        if j <= n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Largest frequency strictly resolved on `axis`.
    pub fn max_resolved(&self, axis: usize) -> i64 {
        self.sizes[axis] as i64 / 2 - 1
    }

    /// Points whose index along `axis` is zero: one per grid line.
    pub(crate) fn line_starts(&self, axis: usize) -> Vec<usize> {
        let stride = self.stride(axis);
        (0..self.len())
            .filter(|&p| (p / stride).is_multiple_of(self.sizes[axis]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructs_valid_grids() {
        let g = make_grid(2, &[16, 16]).unwrap();
        assert_eq!(g.len(), 256);
        let g = make_grid(3, &[16, 16, 16]).unwrap();
        assert_eq!(g.len(), 4096);
        assert!((g.cell_weight() - (2.0 * PI / 16.0).powi(3)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(make_grid(1, &[7]).is_err());
        assert!(make_grid(1, &[6]).is_err());
        assert!(make_grid(2, &[16]).is_err());
        assert!(make_grid(4, &[8, 8, 8, 8]).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = make_grid(3, &[8, 10, 12]).unwrap();
        for p in [0, 1, 17, 511, g.len() - 1] {
            let idx: Vec<usize> = (0..3).map(|a| g.axis_index(p, a)).collect();
            assert_eq!(g.flat_index(&idx), p);
        }
        assert_eq!(g.line_starts(1).len(), 8 * 12);
    }

    #[test]
    fn wavenumbers() {
        let n = 8;
        let ks: Vec<i64> = (0..n).map(|j| Grid::wavenumber(j, n)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }
}
