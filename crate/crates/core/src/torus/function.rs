use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;
use crate::{par, Error, Result, C64};

/// Complex field with `channels` components per grid point.
///
/// Values are stored point-major: `values[p * channels + c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    channels: usize,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn zeros(grid: &Grid, channels: usize) -> Self {
        assert!(channels >= 1, "at least one channel");
        Self {
            grid: grid.clone(),
            channels,
            values: vec![C64::new(0.0, 0.0); grid.len() * channels],
        }
    }

    pub fn constant(grid: &Grid, value: C64) -> Self {
        Self {
            grid: grid.clone(),
            channels: 1,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, channels: usize, values: Vec<C64>) -> Result<Self> {
        if channels == 0 || values.len() != grid.len() * channels {
            return Err(Error::Shape(format!(
                "{} values for {} points x {channels} channels",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite grid values".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            channels,
            values,
        })
    }

    /// Samples a scalar function of the node coordinates `[x, y, z]`.
    pub fn from_fn<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> C64 + Sync + Send,
    {
        let values = par::map_range(grid.len(), |p| f(grid.coords(p)));
        Self {
            grid: grid.clone(),
            channels: 1,
            values,
        }
    }

    /// Samples a real scalar function.
    pub fn from_real_fn<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync + Send,
    {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    /// Samples a multi-channel function.
    pub fn from_fn_channels<F>(grid: &Grid, channels: usize, f: F) -> Self
    where
        F: Fn([f64; 3]) -> Vec<C64> + Sync + Send,
    {
        let rows = par::map_range(grid.len(), |p| {
            let v = f(grid.coords(p));
            assert_eq!(v.len(), channels);
            v
        });
        Self {
            grid: grid.clone(),
            channels,
            values: rows.into_iter().flatten().collect(),
        }
    }

    /// Stacks single-channel functions into one multi-channel function.
    pub fn stack(parts: &[GridFunction]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Shape("empty stack".into()))?;
        if parts
            .iter()
            .any(|p| p.grid != first.grid || p.channels != 1)
        {
            return Err(Error::GridMismatch);
        }
        let c = parts.len();
        let mut values = vec![C64::new(0.0, 0.0); first.grid.len() * c];
        for (ch, part) in parts.iter().enumerate() {
            for (p, v) in part.values.iter().enumerate() {
                values[p * c + ch] = *v;
            }
        }
        Ok(Self {
            grid: first.grid.clone(),
            channels: c,
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Channel values at point `p`.
    pub fn at(&self, p: usize) -> &[C64] {
        &self.values[p * self.channels..(p + 1) * self.channels]
    }

    /// Scalar value at point `p` (first channel).
    pub fn value(&self, p: usize) -> C64 {
        self.values[p * self.channels]
    }

    /// Extracts one channel as a scalar function.
    pub fn channel(&self, c: usize) -> GridFunction {
        let values = (0..self.grid.len())
            .map(|p| self.values[p * self.channels + c])
            .collect();
        GridFunction {
            grid: self.grid.clone(),
            channels: 1,
            values,
        }
    }

    pub fn same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid || self.channels != other.channels {
            Err(Error::GridMismatch)
        } else {
            Ok(())
        }
    }

    pub fn map<F: Fn(C64) -> C64>(&self, f: F) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            channels: self.channels,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> GridFunction {
        self.map(|v| v * s)
    }

    pub fn conj(&self) -> GridFunction {
        self.map(|v| v.conj())
    }

    /// Pointwise product with a scalar function, broadcast over channels.
    pub fn mul_scalar_field(&self, phi: &GridFunction) -> Result<GridFunction> {
        if phi.grid != self.grid || phi.channels != 1 {
            return Err(Error::GridMismatch);
        }
        let c = self.channels;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| v * phi.values[i / c])
            .collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            channels: c,
            values,
        })
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: C64, other: &GridFunction) -> Result<GridFunction> {
        self.same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + s * b)
            .collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            channels: self.channels,
            values,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Weighted inner product `Σ conj(a)·b · cell_weight`.
    pub fn inner(&self, other: &GridFunction) -> Result<C64> {
        self.same_shape(other)?;
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.cell_weight())
    }

    /// Weighted `L²` norm.
    pub fn norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.cell_weight()).sqrt()
    }

    /// Trapezoid integral of each channel.
    pub fn integrate(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.channels];
        for (i, v) in self.values.iter().enumerate() {
            out[i % self.channels] += v;
        }
        let w = self.grid.cell_weight();
        out.iter_mut().for_each(|v| *v *= w);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(C64::new(1.0, 0.0), rhs).expect("shape mismatch in +")
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(C64::new(-1.0, 0.0), rhs).expect("shape mismatch in -")
    }
}

impl Neg for &GridFunction {
    type Output = GridFunction;
    fn neg(self) -> GridFunction {
        self.map(|v| -v)
    }
}

impl Mul<C64> for &GridFunction {
    type Output = GridFunction;
    fn mul(self, rhs: C64) -> GridFunction {
        self.scale(rhs)
    }
}

impl Mul<f64> for &GridFunction {
    type Output = GridFunction;
    fn mul(self, rhs: f64) -> GridFunction {
        self.scale(C64::new(rhs, 0.0))
    }
}

/// Plans for one axis length, shared across worker threads.
struct LinePlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl LinePlans {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

/// Applies a diagonal Fourier multiplier along `axis` to every channel.
///
/// `symbol(j)` is the multiplier of DFT slot `j`.
pub(crate) fn fourier_multiplier<S>(f: &GridFunction, axis: usize, symbol: S) -> Result<GridFunction>
where
    S: Fn(usize) -> C64 + Sync + Send,
{
    let grid = f.grid();
    grid.check_axis(axis)?;
    let n = grid.size(axis);
    let stride = grid.stride(axis);
    let c = f.channels();
    let plans = LinePlans::new(n);
    let scale = 1.0 / n as f64;
    let starts = grid.line_starts(axis);
    let lines: Vec<(usize, usize)> = starts
        .iter()
        .flat_map(|&p| (0..c).map(move |ch| (p, ch)))
        .collect();
    let transformed = par::map_slice(&lines, |&(p0, ch)| {
        let mut buf: Vec<C64> = (0..n)
            .map(|j| f.values[(p0 + j * stride) * c + ch])
            .collect();
        plans.forward.process(&mut buf);
        for (j, v) in buf.iter_mut().enumerate() {
            *v *= symbol(j) * scale;
        }
        plans.inverse.process(&mut buf);
        buf
    });
    let mut out = GridFunction::zeros(grid, c);
    for (&(p0, ch), line) in lines.iter().zip(transformed) {
        for (j, v) in line.into_iter().enumerate() {
            out.values[(p0 + j * stride) * c + ch] = v;
        }
    }
    Ok(out)
}

/// Forward DFT coefficients of every line along `axis` (unnormalised).
pub(crate) fn line_spectra(f: &GridFunction, axis: usize) -> Result<Vec<(usize, usize, Vec<C64>)>> {
    let grid = f.grid();
    grid.check_axis(axis)?;
    let n = grid.size(axis);
    let stride = grid.stride(axis);
    let c = f.channels();
    let plans = LinePlans::new(n);
    let lines: Vec<(usize, usize)> = grid
        .line_starts(axis)
        .into_iter()
        .flat_map(|p| (0..c).map(move |ch| (p, ch)))
        .collect();
    Ok(par::map_slice(&lines, |&(p0, ch)| {
        let mut buf: Vec<C64> = (0..n)
            .map(|j| f.values[(p0 + j * stride) * c + ch])
            .collect();
        plans.forward.process(&mut buf);
        (p0, ch, buf)
    }))
}

/// Inverse of [`line_spectra`].
pub(crate) fn from_line_spectra(
    grid: &Grid,
    channels: usize,
    axis: usize,
    spectra: Vec<(usize, usize, Vec<C64>)>,
) -> GridFunction {
    let n = grid.size(axis);
    let stride = grid.stride(axis);
    let plans = LinePlans::new(n);
    let scale = 1.0 / n as f64;
    let lines = par::map_slice(&spectra, |(p0, ch, spec)| {
        let mut buf = spec.clone();
        plans.inverse.process(&mut buf);
        (*p0, *ch, buf)
    });
    let mut out = GridFunction::zeros(grid, channels);
    for (p0, ch, buf) in lines {
        for (j, v) in buf.into_iter().enumerate() {
            out.values[(p0 + j * stride) * channels + ch] = v * scale;
        }
    }
    out
}

/// Spectral derivative along `axis`; the Nyquist coefficient is zeroed.
pub fn spectral_derivative(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    f.grid().check_axis(axis)?;
    let n = f.grid().size(axis);
    fourier_multiplier(f, axis, |j| {
        if 2 * j == n {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.0, Grid::wavenumber(j, n) as f64)
        }
    })
}

/// Random band-limited function: a sum of `modes` Fourier modes with
/// frequencies `|ω_i| ≤ max_freq` and standard complex normal amplitudes.
pub fn random_band_limited<R: Rng + ?Sized>(
    grid: &Grid,
    channels: usize,
    max_freq: i64,
    modes: usize,
    rng: &mut R,
) -> GridFunction {
    let dim = grid.dim();
    let terms: Vec<([i64; 3], Vec<C64>)> = (0..modes)
        .map(|_| {
            let mut freq = [0i64; 3];
            for f in freq.iter_mut().take(dim) {
                *f = rng.random_range(-max_freq..=max_freq);
            }
            let amps = (0..channels)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect();
            (freq, amps)
        })
        .collect();
    GridFunction::from_fn_channels(grid, channels, |x| {
        let mut out = vec![C64::new(0.0, 0.0); channels];
        for (freq, amps) in &terms {
            let phase = freq[0] as f64 * x[0] + freq[1] as f64 * x[1] + freq[2] as f64 * x[2];
            let w = C64::from_polar(1.0, phase);
            for (o, a) in out.iter_mut().zip(amps) {
                *o += a * w;
            }
        }
        out
    })
}
