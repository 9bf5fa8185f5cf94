//! The rank-one idempotent `e(x, y)` on `T²` and its Chern–Weil data.
//!
//! ```text
//!          ⎡ f(x)               g(x) + h(x)e^{iy} ⎤
//! e(x,y) = ⎣ g(x) + h(x)e^{-iy}  1 - f(x)         ⎦
//! ```
//!
//! with `g = χ_[0,π]·√(f − f²)` and `h = χ_[π,2π]·√(f − f²)`. The profile `f`
//! is flat (equal to 1 near `0`, equal to 0 near `π`) so that `g` and `h` are
//! smooth despite the square root.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use serde::Serialize;

use crate::torus::{exterior_derivative, integrate_top, wedge, DiffForm, Grid, GridFunction};
use crate::{par, Error, Result, C64};

pub type Mat2 = Matrix2<C64>;

/// Default start of the transition zone.
pub const DEFAULT_A: f64 = PI / 16.0;
/// Default end of the transition zone.
pub const DEFAULT_B: f64 = 15.0 * PI / 16.0;

/// Smooth step `ψ(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})` and its
/// complement `1 − ψ(t)`, both evaluated without cancellation.
pub fn transition(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 1.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        let s = 1.0 / t - 1.0 / (1.0 - t);
        (1.0 / (1.0 + s.exp()), 1.0 / (1.0 + (-s).exp()))
    }
}

/// `dψ/dt`.
pub fn transition_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let (p, q) = transition(t);
    p * q * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)))
}

/// Pointwise profile values and their analytic `x`-derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileValues {
    pub f: f64,
    /// `1 − f`, computed directly rather than by subtraction.
    pub f_complement: f64,
    pub g: f64,
    pub h: f64,
    pub df: f64,
    pub dg: f64,
    pub dh: f64,
}

/// The profile triple `(f, g, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileTriple {
    pub a: f64,
    pub b: f64,
    /// Replace `f` by `1 − f` (flips the sign of the Chern number).
    pub reversed: bool,
}

/// Flat-zone profile with transition on `[a, b]`, `0 < a < b < π`.
pub fn default_profile(a: f64, b: f64) -> Result<ProfileTriple> {
    if !(a.is_finite() && b.is_finite() && 0.0 < a && a < b && b < PI) {
        return Err(Error::InvalidProfile(format!(
            "need 0 < a < b < π, got a = {a}, b = {b}"
        )));
    }
    Ok(ProfileTriple {
        a,
        b,
        reversed: false,
    })
}

/// Sampled profile on a one-dimensional grid.
#[derive(Clone, Debug)]
pub struct SampledProfile {
    pub f: GridFunction,
    pub g: GridFunction,
    pub h: GridFunction,
}

impl Default for ProfileTriple {
    fn default() -> Self {
        default_profile(DEFAULT_A, DEFAULT_B).expect("default profile is valid")
    }
}

impl ProfileTriple {
    pub fn reversed(self) -> Self {
        Self {
            reversed: !self.reversed,
            ..self
        }
    }

    pub fn eval(&self, x: f64) -> ProfileValues {
        let x = x.rem_euclid(TAU);
        let first_half = x <= PI;
        let (u, du) = if first_half { (x, 1.0) } else { (TAU - x, -1.0) };
        let width = self.b - self.a;
        let t = (u - self.a) / width;
        let (psi, psi_c) = transition(t);
        let dt = du / width;
        // f = 1 − ψ(t)
        let (mut f, mut f_c, mut df) = (psi_c, psi, -transition_derivative(t) * dt);
        if self.reversed {
            std::mem::swap(&mut f, &mut f_c);
            df = -df;
        }
        // r = √(f − f²) = √(ψ(1 − ψ)),  r' = r (1 − 2ψ) (1/t² + 1/(1−t)²) / 2
        let r = (psi * psi_c).sqrt();
        let dr = if r > 0.0 {
            r * (1.0 - 2.0 * psi) * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / 2.0 * dt
        } else {
            0.0
        };
        let (g, dg, h, dh) = if first_half {
            (r, dr, 0.0, 0.0)
        } else {
            (0.0, 0.0, r, dr)
        };
        // the closed interval boundaries carry r = 0, so the split is harmless
        ProfileValues {
            f,
            f_complement: f_c,
            g,
            h,
            df,
            dg,
            dh,
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        self.eval(x).f
    }

    pub fn g(&self, x: f64) -> f64 {
        self.eval(x).g
    }

    pub fn h(&self, x: f64) -> f64 {
        self.eval(x).h
    }

    /// Samples `f`, `g`, `h` on a one-dimensional grid.
    pub fn sample(&self, grid: &Grid) -> Result<SampledProfile> {
        if grid.dim() != 1 {
            return Err(Error::InvalidGrid("profile samples live on a 1-D grid".into()));
        }
        let s = |which: fn(&ProfileValues) -> f64| {
            GridFunction::from_real_fn(grid, move |x| which(&self.eval(x[0])))
        };
        Ok(SampledProfile {
            f: s(|v| v.f),
            g: s(|v| v.g),
            h: s(|v| v.h),
        })
    }

    /// Pointwise matrix `e(x, y)`.
    pub fn matrix(&self, x: f64, y: f64) -> Mat2 {
        let v = self.eval(x);
        let w = C64::from_polar(1.0, y);
        let off = C64::new(v.g, 0.0) + w * v.h;
        let off_c = C64::new(v.g, 0.0) + w.conj() * v.h;
        Mat2::new(C64::new(v.f, 0.0), off, off_c, C64::new(v.f_complement, 0.0))
    }
}

/// Pointwise 2×2 idempotent on a grid of dimension ≥ 2, depending only on
/// the first two coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct IdempotentField {
    grid: Grid,
    values: Vec<Mat2>,
}

/// Samples `e(x, y)` on a two-dimensional grid.
pub fn build_idempotent(profile: &ProfileTriple, grid: &Grid) -> Result<IdempotentField> {
    if grid.dim() != 2 {
        return Err(Error::InvalidGrid(format!(
            "idempotent lives on T², got dimension {}",
            grid.dim()
        )));
    }
    Ok(IdempotentField::sample(grid, |x, y| profile.matrix(x, y)))
}

impl IdempotentField {
    /// Samples an arbitrary matrix function of `(x, y)` on a grid of
    /// dimension ≥ 2.
    pub fn sample<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn(f64, f64) -> Mat2 + Sync + Send,
    {
        assert!(grid.dim() >= 2);
        let values = par::map_range(grid.len(), |p| {
            let c = grid.coords(p);
            f(c[0], c[1])
        });
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Constant field.
    pub fn constant(grid: &Grid, e: Mat2) -> Self {
        Self::sample(grid, move |_, _| e)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Mat2] {
        &self.values
    }

    pub fn at(&self, p: usize) -> &Mat2 {
        &self.values[p]
    }

    /// Entry `(i, j)` as a scalar grid function.
    pub fn entry(&self, i: usize, j: usize) -> GridFunction {
        let vals = self.values.iter().map(|m| m[(i, j)]).collect();
        GridFunction::from_values(&self.grid, 1, vals).expect("shape")
    }

    /// `u e u*` for a constant matrix `u`.
    pub fn conjugate(&self, u: &Mat2) -> Self {
        let ua = u.adjoint();
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|e| u * e * ua).collect(),
        }
    }

    /// Pullback along the projection `T³ → T²` forgetting `z`.
    pub fn pullback_to(&self, grid3: &Grid) -> Result<Self> {
        if self.grid.dim() != 2 || grid3.dim() != 3 || grid3.sizes()[..2] != *self.grid.sizes() {
            return Err(Error::GridMismatch);
        }
        let nz = grid3.size(2);
        let values = (0..grid3.len()).map(|p| self.values[p / nz]).collect();
        Ok(Self {
            grid: grid3.clone(),
            values,
        })
    }

    /// Adds `delta` to entry `(i, j)` at point `p`.
    pub fn perturb(&mut self, p: usize, i: usize, j: usize, delta: C64) {
        self.values[p][(i, j)] += delta;
    }
}

/// Max-norm diagnostics of the idempotent invariants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdempotentReport {
    pub idempotency: f64,
    pub hermiticity: f64,
    pub trace: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn max_entry(m: &Mat2) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

/// Largest `|e² − e|`, `|e* − e|` and `|tr e − 1|` entries over the grid.
pub fn check_idempotent(e: &IdempotentField, tol: f64) -> IdempotentReport {
    let per_point = par::map_slice(&e.values, |m| {
        (
            max_entry(&(m * m - m)),
            max_entry(&(m.adjoint() - m)),
            (m.trace() - C64::new(1.0, 0.0)).norm(),
        )
    });
    let (idem, herm, tr) = per_point
        .into_iter()
        .fold((0.0f64, 0.0f64, 0.0f64), |acc, v| {
            (acc.0.max(v.0), acc.1.max(v.1), acc.2.max(v.2))
        });
    IdempotentReport {
        idempotency: idem,
        hermiticity: herm,
        trace: tr,
        tolerance: tol,
        pass: idem <= tol && herm <= tol && tr <= tol,
    }
}

/// Square matrix of differential forms of a common degree.
#[derive(Clone, Debug)]
pub struct MatrixForm {
    size: usize,
    entries: Vec<DiffForm>,
}

impl MatrixForm {
    pub fn from_idempotent(e: &IdempotentField) -> Result<Self> {
        let entries = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| DiffForm::function(e.entry(i, j)))
            .collect::<Result<_>>()?;
        Ok(Self { size: 2, entries })
    }

    pub fn entry(&self, i: usize, j: usize) -> &DiffForm {
        &self.entries[i * self.size + j]
    }

    /// Entrywise exterior derivative.
    pub fn d(&self) -> Result<Self> {
        Ok(Self {
            size: self.size,
            entries: self.entries.iter().map(exterior_derivative).collect::<Result<_>>()?,
        })
    }

    /// Matrix product with the wedge as multiplication.
    pub fn wedge(&self, other: &MatrixForm) -> Result<Self> {
        let n = self.size;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                let mut acc = wedge(self.entry(i, 0), other.entry(0, k))?;
                for j in 1..n {
                    acc = acc.add(&wedge(self.entry(i, j), other.entry(j, k))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(Self { size: n, entries })
    }

    pub fn trace(&self) -> Result<DiffForm> {
        let mut acc = self.entry(0, 0).clone();
        for i in 1..self.size {
            acc = acc.add(self.entry(i, i))?;
        }
        Ok(acc)
    }
}

/// Curvature form `−1/(2πi) tr(e (de)²)`, computed with matrix-valued
/// exterior calculus.
pub fn chern_form(e: &IdempotentField) -> Result<DiffForm> {
    let em = MatrixForm::from_idempotent(e)?;
    let de = em.d()?;
    let curvature = em.wedge(&de.wedge(&de)?)?;
    let scale = -1.0 / (C64::new(0.0, TAU));
    Ok(curvature.trace()?.scale(scale))
}

/// Reduced formula `(−1/π)(h h' + 2 f' h² − 2 f h h') dx ∧ dy` with analytic
/// derivatives of the profile.
pub fn chern_form_closedform(profile: &ProfileTriple, grid: &Grid) -> Result<DiffForm> {
    if grid.dim() != 2 {
        return Err(Error::InvalidGrid("closed form lives on T²".into()));
    }
    let coeff = GridFunction::from_real_fn(grid, |x| {
        let v = profile.eval(x[0]);
        -(v.h * v.dh + 2.0 * v.df * v.h * v.h - 2.0 * v.f * v.h * v.dh) / PI
    });
    DiffForm::from_coeffs(grid, 2, [(vec![0, 1], coeff)])
}

/// Chern number `∫_{T²} c₁`.
pub fn chern_number(e: &IdempotentField) -> Result<f64> {
    if e.grid().dim() != 2 {
        return Err(Error::InvalidGrid("Chern number is taken over T²".into()));
    }
    let value = integrate_top(&chern_form(e)?)?;
    if value.im.abs() > 1e-8 {
        log::warn!("Chern integral has imaginary part {:.3e}", value.im);
    }
    Ok(value.re)
}

/// Pullback of a form on `T²` along the projection `T³ → T²`.
pub fn pullback_by_projection(form: &DiffForm, grid3: &Grid) -> Result<DiffForm> {
    let g2 = form.grid();
    if g2.dim() != 2 || grid3.dim() != 3 || grid3.sizes()[..2] != *g2.sizes() {
        return Err(Error::GridMismatch);
    }
    let nz = grid3.size(2);
    let terms = form
        .coeffs()
        .map(|(idx, c)| {
            let vals = (0..grid3.len()).map(|p| c.value(p / nz)).collect();
            Ok((idx.clone(), GridFunction::from_values(grid3, 1, vals)?))
        })
        .collect::<Result<Vec<_>>>()?;
    DiffForm::from_coeffs(grid3, form.degree(), terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_unitary, seeded_rng};
    use crate::torus::make_grid;

    fn grid2(n: usize) -> Grid {
        make_grid(2, &[n, n]).unwrap()
    }

    #[test]
    fn profile_endpoint_values() {
        let p = ProfileTriple::default();
        assert_eq!(p.f(0.0), 1.0);
        assert_eq!(p.f(PI), 0.0);
        assert_eq!(p.f(TAU - 1e-3), 1.0);
        let alt = default_profile(PI / 4.0, 3.0 * PI / 4.0).unwrap();
        assert_eq!(alt.f(0.0), 1.0);
        assert_eq!(alt.f(PI), 0.0);
    }

    #[test]
    fn profile_parameter_validation() {
        assert!(default_profile(0.0, 1.0).is_err());
        assert!(default_profile(1.0, 0.5).is_err());
        assert!(default_profile(1.0, PI).is_err());
        assert!(default_profile(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn profile_algebraic_identities() {
        let p = ProfileTriple::default();
        for j in 0..4096 {
            let x = TAU * j as f64 / 4096.0;
            let v = p.eval(x);
            assert_eq!(v.g * v.h, 0.0);
            assert!((v.g * v.g + v.h * v.h - (v.f - v.f * v.f)).abs() <= 1e-14);
            assert!((0.0..=1.0).contains(&v.f));
            if x > PI {
                assert_eq!(v.g, 0.0);
            }
            if x < PI {
                assert_eq!(v.h, 0.0);
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let p = ProfileTriple::default();
        let eps = 1e-6;
        for j in 1..200 {
            let x = TAU * j as f64 / 200.0 + 0.0123;
            let v = p.eval(x);
            let fd = |which: fn(&ProfileValues) -> f64| {
                (which(&p.eval(x + eps)) - which(&p.eval(x - eps))) / (2.0 * eps)
            };
            assert!((v.df - fd(|v| v.f)).abs() < 1e-6, "f' at {x}");
            assert!((v.dg - fd(|v| v.g)).abs() < 1e-6, "g' at {x}");
            assert!((v.dh - fd(|v| v.h)).abs() < 1e-6, "h' at {x}");
        }
    }

    #[test]
    fn idempotent_at_special_points() {
        let p = ProfileTriple::default();
        let g = grid2(16);
        let e = build_idempotent(&p, &g).unwrap();
        let zero = e.at(g.flat_index(&[0, 3]));
        assert_eq!(*zero, Mat2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
        let pi = e.at(g.flat_index(&[8, 5]));
        assert_eq!(*pi, Mat2::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)));
        assert!(build_idempotent(&p, &make_grid(1, &[16]).unwrap()).is_err());
    }

    #[test]
    fn idempotent_diagnostics() {
        let p = ProfileTriple::default();
        let e = build_idempotent(&p, &grid2(64)).unwrap();
        let r = check_idempotent(&e, 1e-12);
        assert!(r.pass, "{r:?}");

        let mut bad = e.clone();
        bad.perturb(100, 1, 1, C64::new(0.1, 0.0));
        assert!(check_idempotent(&bad, 1e-12).idempotency > 0.01);

        let d = Mat2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let c = IdempotentField::constant(&grid2(8), d);
        let r = check_idempotent(&c, 0.0);
        assert_eq!((r.idempotency, r.hermiticity, r.trace), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_idempotent_has_zero_curvature() {
        let d = Mat2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let c = IdempotentField::constant(&grid2(16), d);
        assert!(chern_form(&c).unwrap().max_abs() < 1e-15);
        assert_eq!(chern_number(&c).unwrap(), 0.0);
    }

    #[test]
    fn chern_number_is_minus_one() {
        let p = ProfileTriple::default();
        let e = build_idempotent(&p, &grid2(64)).unwrap();
        let c = chern_number(&e).unwrap();
        assert!((c + 1.0).abs() <= 1e-6, "{c}");
        let form = chern_form(&e).unwrap();
        assert!(form.max_imag() <= 1e-10);
    }

    #[test]
    fn reversed_profile_flips_sign() {
        let p = ProfileTriple::default().reversed();
        let e = build_idempotent(&p, &grid2(64)).unwrap();
        assert!(check_idempotent(&e, 1e-12).pass);
        let c = chern_number(&e).unwrap();
        assert!((c - 1.0).abs() <= 1e-6, "{c}");
    }

    #[test]
    fn closed_form_support_and_integral() {
        let p = ProfileTriple::default();
        let g = grid2(64);
        let cf = chern_form_closedform(&p, &g).unwrap();
        let coeff = cf.top_coeff().unwrap();
        for pt in 0..g.len() {
            let x = g.coords(pt)[0];
            if x < PI {
                assert_eq!(coeff.value(pt).norm(), 0.0);
            }
        }
        let total = integrate_top(&cf).unwrap();
        assert!((total.re + 1.0).abs() <= 1e-6, "{total}");
    }

    #[test]
    fn closed_form_tracks_general_form_under_refinement() {
        // The two routes differ by the spectral interpolation error of the
        // profile derivatives, which decays with N.
        let p = ProfileTriple::default();
        let errs: Vec<f64> = [32usize, 64, 128]
            .iter()
            .map(|&n| {
                let g = grid2(n);
                let e = build_idempotent(&p, &g).unwrap();
                let diff = chern_form(&e).unwrap().sub(&chern_form_closedform(&p, &g).unwrap()).unwrap();
                diff.max_abs()
            })
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn chern_number_gauge_invariant() {
        let p = ProfileTriple::default();
        let e = build_idempotent(&p, &grid2(32)).unwrap();
        let base = chern_number(&e).unwrap();
        let mut rng = seeded_rng(11, 0);
        for _ in 0..3 {
            let u = random_unitary(&mut rng, 2);
            let u = Mat2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
            let conj = e.conjugate(&u);
            assert!(check_idempotent(&conj, 1e-12).pass);
            assert!((chern_number(&conj).unwrap() - base).abs() < 1e-10);
        }
    }

    #[test]
    fn pullback_to_three_torus_is_z_independent() {
        let p = ProfileTriple::default();
        let e = build_idempotent(&p, &grid2(8)).unwrap();
        let g3 = make_grid(3, &[8, 8, 10]).unwrap();
        let e3 = e.pullback_to(&g3).unwrap();
        assert_eq!(e3.at(g3.flat_index(&[3, 5, 7])), e.at(e.grid().flat_index(&[3, 5])));
        assert!(e.pullback_to(&make_grid(3, &[8, 10, 10]).unwrap()).is_err());
    }
}
