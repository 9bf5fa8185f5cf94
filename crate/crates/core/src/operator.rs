//! Matrix-free operators on sections of `F = q*E` over `T³`.
//!
//! Sections are stored as ambient two-channel grid functions `s` with
//! `e·s = s` pointwise; the trivial line bundle uses one channel. The
//! connection is the Grassmann connection `∇_V s = e·(V s)`, the horizontal
//! frame is the global frame `X_k = sin(kz)∂x + cos(kz)∂y`, `Y_k = ∂z`, and
//!
//! ```text
//! P_{k,l} = −∇_X∇_X − ∇_Y∇_Y + i f_l ∇_T,    f_l = e^{ilz} + 1.
//! ```
//!
//! The sub-Laplacian depends on the frame; the index does not.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::bundle::{build_idempotent, IdempotentField, Mat2, ProfileTriple};
use crate::contact::{ContactData, VectorField};
use crate::torus::{make_grid, spectral_derivative, Grid, GridFunction, AXIS_Z};
use crate::{par, CMatrix, Error, Result, C64};

/// Inputs whose projection residual exceeds this are rejected.
pub const RANGE_GUARD: f64 = 1e-6;

/// Largest dense truncation dimension accepted by [`singular_diagnostics`].
pub const DENSE_CAP: usize = 8192;

/// Which line bundle the sections live in.
#[derive(Clone, Debug)]
pub enum BundleChoice {
    Trivial,
    /// `q*E` for the idempotent of the profile, sampled on the `T³` grid.
    PullbackOfE(IdempotentField),
}

impl BundleChoice {
    /// `F = q*E` on a three-dimensional grid.
    pub fn pullback_of_e(profile: &ProfileTriple, grid: &Grid) -> Result<Self> {
        if grid.dim() != 3 {
            return Err(Error::InvalidGrid("sections live on T³".into()));
        }
        let g2 = make_grid(2, &grid.sizes()[..2])?;
        Ok(Self::PullbackOfE(build_idempotent(profile, &g2)?.pullback_to(grid)?))
    }

    pub fn channels(&self) -> usize {
        match self {
            Self::Trivial => 1,
            Self::PullbackOfE(_) => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Trivial => "trivial",
            Self::PullbackOfE(_) => "pullback-of-E",
        }
    }

    /// Conjugates the idempotent by a constant unitary.
    pub fn conjugate(&self, u: &Mat2) -> Self {
        match self {
            Self::Trivial => Self::Trivial,
            Self::PullbackOfE(e) => Self::PullbackOfE(e.conjugate(u)),
        }
    }

    /// Pointwise projection `s ↦ e·s`.
    pub fn project(&self, s: &GridFunction) -> GridFunction {
        match self {
            Self::Trivial => s.clone(),
            Self::PullbackOfE(e) => {
                let mut out = s.clone();
                let v = out.values_mut();
                for (p, m) in e.values().iter().enumerate() {
                    let (a, b) = (v[2 * p], v[2 * p + 1]);
                    v[2 * p] = m[(0, 0)] * a + m[(0, 1)] * b;
                    v[2 * p + 1] = m[(1, 0)] * a + m[(1, 1)] * b;
                }
                out
            }
        }
    }

    /// `‖(1 − e)s‖ / ‖s‖` (zero for the zero section).
    pub fn range_residual(&self, s: &GridFunction) -> f64 {
        let n = s.norm();
        if n == 0.0 {
            return 0.0;
        }
        (s - &self.project(s)).norm() / n
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        match self {
            Self::PullbackOfE(e) if e.grid() != grid => Err(Error::GridMismatch),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
enum OperatorKind {
    Connection {
        field: VectorField,
        div: GridFunction,
    },
    SubLaplacian {
        x: VectorField,
        y: VectorField,
        div_x: GridFunction,
        div_y: GridFunction,
    },
    Heisenberg {
        x: VectorField,
        y: VectorField,
        div_x: GridFunction,
        div_y: GridFunction,
        reeb: VectorField,
        div_reeb: GridFunction,
        coefficient: GridFunction,
    },
}

/// Linear map on bundle sections together with its formal adjoint.
#[derive(Clone, Debug)]
pub struct SectionOperator {
    grid: Grid,
    bundle: BundleChoice,
    kind: OperatorKind,
    k: u32,
    l: i64,
}

/// `Σ_i V_i ∂_i s`, channel by channel.
fn directional(v: &VectorField, s: &GridFunction) -> Result<GridFunction> {
    let mut acc = GridFunction::zeros(s.grid(), s.channels());
    for axis in 0..3 {
        let c = v.component(axis);
        if c.max_abs() == 0.0 {
            continue;
        }
        let ds = spectral_derivative(s, axis)?;
        acc = &acc + &ds.mul_scalar_field(c)?;
    }
    Ok(acc)
}

impl SectionOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bundle(&self) -> &BundleChoice {
        &self.bundle
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn l(&self) -> i64 {
        self.l
    }

    pub fn channels(&self) -> usize {
        self.bundle.channels()
    }

    /// Ambient dimension of a section.
    pub fn dim(&self) -> usize {
        self.grid.len() * self.channels()
    }

    fn check_input(&self, s: &GridFunction) -> Result<()> {
        if s.grid() != &self.grid || s.channels() != self.channels() {
            return Err(Error::GridMismatch);
        }
        let residual = self.bundle.range_residual(s);
        if residual > RANGE_GUARD {
            return Err(Error::OutOfRange { residual });
        }
        Ok(())
    }

    fn nabla(&self, v: &VectorField, s: &GridFunction) -> Result<GridFunction> {
        Ok(self.bundle.project(&directional(v, s)?))
    }

    /// Formal adjoint `∇_V* s = −e·(V s + (div V) s)` on sections.
    fn nabla_adjoint(&self, v: &VectorField, div: &GridFunction, s: &GridFunction) -> Result<GridFunction> {
        let inner = &directional(v, s)? + &s.mul_scalar_field(div)?;
        Ok(-&self.bundle.project(&inner))
    }

    fn sum_of_squares(
        &self,
        x: &VectorField,
        y: &VectorField,
        div_x: &GridFunction,
        div_y: &GridFunction,
        s: &GridFunction,
    ) -> Result<GridFunction> {
        // Δ = ∇_X*∇_X + ∇_Y*∇_Y, which is −∇_X² − ∇_Y² for divergence-free frames
        let xx = self.nabla_adjoint(x, div_x, &self.nabla(x, s)?)?;
        let yy = self.nabla_adjoint(y, div_y, &self.nabla(y, s)?)?;
        Ok(&xx + &yy)
    }

    pub fn apply(&self, s: &GridFunction) -> Result<GridFunction> {
        self.check_input(s)?;
        match &self.kind {
            OperatorKind::Connection { field, .. } => self.nabla(field, s),
            OperatorKind::SubLaplacian { x, y, div_x, div_y } => self.sum_of_squares(x, y, div_x, div_y, s),
            OperatorKind::Heisenberg {
                x,
                y,
                div_x,
                div_y,
                reeb,
                coefficient,
                ..
            } => {
                let lap = self.sum_of_squares(x, y, div_x, div_y, s)?;
                let drift = self.nabla(reeb, s)?.mul_scalar_field(coefficient)?;
                lap.axpy(C64::new(0.0, 1.0), &drift)
            }
        }
    }

    /// Formal adjoint with respect to the weighted grid inner product.
    pub fn adjoint_apply(&self, s: &GridFunction) -> Result<GridFunction> {
        self.check_input(s)?;
        match &self.kind {
            OperatorKind::Connection { field, div } => self.nabla_adjoint(field, div, s),
            OperatorKind::SubLaplacian { x, y, div_x, div_y } => self.sum_of_squares(x, y, div_x, div_y, s),
            OperatorKind::Heisenberg {
                x,
                y,
                div_x,
                div_y,
                reeb,
                div_reeb,
                coefficient,
            } => {
                let lap = self.sum_of_squares(x, y, div_x, div_y, s)?;
                // (i f ∇_T)* = ∇_T* ∘ (−i f̄)
                let weighted = s.mul_scalar_field(&coefficient.conj())?;
                let drift = self.nabla_adjoint(reeb, div_reeb, &weighted)?;
                lap.axpy(C64::new(0.0, -1.0), &drift)
            }
        }
    }

    /// Dense matrix of the compression `P·E + (1 − E)` on the ambient space.
    pub fn assemble_dense(&self, adjoint: bool) -> Result<CMatrix> {
        let dim = self.dim();
        if dim > DENSE_CAP {
            return Err(Error::MemoryGuard { dim, cap: DENSE_CAP });
        }
        let columns = par::map_tasks(dim, |j| {
            let mut basis = GridFunction::zeros(&self.grid, self.channels());
            basis.values_mut()[j] = C64::new(1.0, 0.0);
            let proj = self.bundle.project(&basis);
            let image = if adjoint {
                self.adjoint_apply(&proj)
            } else {
                self.apply(&proj)
            }?;
            Ok(&image + &(&basis - &proj))
        });
        let mut m = CMatrix::zeros(dim, dim);
        for (j, col) in columns.into_iter().enumerate() {
            for (i, v) in col?.values().iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }
}

/// Grassmann connection `∇_V s = e·(V s)`.
pub fn grassmann_connection(bundle: &BundleChoice, field: &VectorField) -> Result<SectionOperator> {
    let grid = field.grid().clone();
    bundle.check(&grid)?;
    Ok(SectionOperator {
        grid,
        bundle: bundle.clone(),
        kind: OperatorKind::Connection {
            div: field.divergence()?,
            field: field.clone(),
        },
        k: 0,
        l: 0,
    })
}

/// Sum of squares `Δ_{H_k} = −∇_X∇_X − ∇_Y∇_Y`.
pub fn sublaplacian(k: u32, bundle: &BundleChoice, grid: &Grid) -> Result<SectionOperator> {
    bundle.check(grid)?;
    let data = ContactData::new(k, grid)?;
    Ok(SectionOperator {
        grid: grid.clone(),
        bundle: bundle.clone(),
        kind: OperatorKind::SubLaplacian {
            div_x: data.frame_x.divergence()?,
            div_y: data.frame_y.divergence()?,
            x: data.frame_x,
            y: data.frame_y,
        },
        k,
        l: 0,
    })
}

/// `f_l(z) = e^{ilz} + 1` on the grid.
pub fn drift_coefficient(l: i64, grid: &Grid) -> GridFunction {
    GridFunction::from_fn(grid, |x| C64::from_polar(1.0, l as f64 * x[2]) + 1.0)
}

/// `P_{k,l} = Δ_{H_k} + i f_l ∇_{T_k}`.
#[allow(non_snake_case)]
pub fn assemble_P(k: u32, l: i64, bundle: &BundleChoice, grid: &Grid) -> Result<SectionOperator> {
    bundle.check(grid)?;
    if grid.dim() != 3 {
        return Err(Error::InvalidGrid("P lives on T³".into()));
    }
    if l.abs() > grid.max_resolved(AXIS_Z) {
        return Err(Error::Unresolved {
            freq: l,
            n: grid.size(AXIS_Z),
        });
    }
    let data = ContactData::new(k, grid)?;
    Ok(SectionOperator {
        grid: grid.clone(),
        bundle: bundle.clone(),
        kind: OperatorKind::Heisenberg {
            div_x: data.frame_x.divergence()?,
            div_y: data.frame_y.divergence()?,
            div_reeb: data.reeb.divergence()?,
            x: data.frame_x,
            y: data.frame_y,
            reeb: data.reeb,
            coefficient: drift_coefficient(l, grid),
        },
        k,
        l,
    })
}

/// `min |f(z) − n|` over `samples` equispaced `z` and odd `n` covering the
/// range of `f`.
pub fn ellipticity_margin_of<F: Fn(f64) -> C64>(f: F, samples: usize) -> f64 {
    let values: Vec<C64> = (0..samples).map(|j| f(TAU * j as f64 / samples as f64)).collect();
    let reach = values.iter().fold(0.0f64, |m, v| m.max(v.norm())).ceil() as i64 + 2;
    let odd: Vec<f64> = (-reach..=reach).filter(|n| n % 2 != 0).map(|n| n as f64).collect();
    values
        .iter()
        .flat_map(|v| odd.iter().map(move |&n| (v - n).norm()))
        .fold(f64::INFINITY, f64::min)
}

/// Distance of `f_l` from the odd integers: positive means `P_{k,l}` is
/// Heisenberg elliptic.
pub fn ellipticity_margin(l: i64, samples: usize) -> Result<f64> {
    if samples < 64 {
        return Err(Error::InvalidParameter(format!("need at least 64 samples, got {samples}")));
    }
    Ok(ellipticity_margin_of(|z| C64::from_polar(1.0, l as f64 * z) + 1.0, samples))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalityReport {
    /// `max |P(φs)|` outside the dilated support of `φ`, over `‖s‖`.
    pub leakage: f64,
    /// `‖P(φs)‖ / (‖χ P s‖ + ‖χ s‖)` with `χ` the dilated-support indicator.
    pub ratio: f64,
}

/// Cells by which the support of the cutoff is dilated.
pub const LOCALITY_DILATION: usize = 2;

fn dilated_support(phi: &GridFunction, radius: usize) -> Vec<bool> {
    let grid = phi.grid();
    let mut mask: Vec<bool> = phi.values().iter().map(|v| v.norm() > 0.0).collect();
    for axis in 0..grid.dim() {
        let n = grid.size(axis);
        let stride = grid.stride(axis);
        let prev = mask.clone();
        for p in 0..grid.len() {
            if prev[p] {
                continue;
            }
            let i = grid.axis_index(p, axis);
            let base = p - i * stride;
            mask[p] = (1..=radius).any(|r| {
                prev[base + ((i + r) % n) * stride] || prev[base + ((i + n - r) % n) * stride]
            });
        }
    }
    mask
}

/// Measures how local `P` is on `φ s` at discretisation fidelity.
pub fn locality_check(op: &SectionOperator, phi: &GridFunction, s: &GridFunction) -> Result<LocalityReport> {
    let cut = s.mul_scalar_field(phi)?;
    let image = op.apply(&cut)?;
    let mask = dilated_support(phi, LOCALITY_DILATION);
    let c = s.channels();
    let outside = image
        .values()
        .chunks(c)
        .zip(&mask)
        .filter(|(_, inside)| !**inside)
        .map(|(v, _)| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let chi = GridFunction::from_values(
        s.grid(),
        1,
        mask.iter().map(|&m| C64::new(if m { 1.0 } else { 0.0 }, 0.0)).collect(),
    )?;
    let chi_ps = op.apply(s)?.mul_scalar_field(&chi)?.norm();
    let chi_s = s.mul_scalar_field(&chi)?.norm();
    let scale = s.norm();
    Ok(LocalityReport {
        leakage: if scale > 0.0 { outside / scale } else { 0.0 },
        ratio: image.norm() / (chi_ps + chi_s),
    })
}

/// Smooth cutoff in `z` supported on `[z0, z0 + width]`, equal to one at the
/// midpoint.
pub fn z_cutoff(grid: &Grid, z0: f64, width: f64) -> GridFunction {
    use crate::bundle::transition;
    let half = width / 2.0;
    GridFunction::from_real_fn(grid, |x| {
        let t = (x[2] - z0).rem_euclid(TAU);
        if t >= width {
            0.0
        } else {
            transition(t / half).0 * transition((width - t) / half).0
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularReport {
    pub dim: usize,
    pub smallest: Vec<f64>,
    pub smallest_adjoint: Vec<f64>,
    /// `(τ, #σ(P) < τ, #σ(P*) < τ)`.
    pub counts: Vec<(f64, usize, usize)>,
}

/// Thresholds reported by [`singular_diagnostics`].
pub const SINGULAR_THRESHOLDS: [f64; 4] = [1e-8, 1e-4, 1e-2, 1e-1];

/// Singular values of the dense truncation, smallest first.
pub fn truncation_singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let dense = faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let mut s = dense
        .singular_values()
        .map_err(|e| Error::InvalidParameter(format!("SVD did not converge: {e:?}")))?;
    s.sort_by(|a, b| a.total_cmp(b));
    Ok(s)
}

/// The `m` smallest singular values of the dense truncation of `P` and of
/// its adjoint. Square truncations always have equal counts below any
/// threshold, so they cannot see a nonzero index.
pub fn singular_diagnostics(op: &SectionOperator, m: usize) -> Result<SingularReport> {
    let sv = truncation_singular_values(&op.assemble_dense(false)?)?;
    let sva = truncation_singular_values(&op.assemble_dense(true)?)?;
    let counts = SINGULAR_THRESHOLDS
        .iter()
        .map(|&t| {
            (
                t,
                sv.iter().filter(|&&s| s < t).count(),
                sva.iter().filter(|&&s| s < t).count(),
            )
        })
        .collect();
    Ok(SingularReport {
        dim: sv.len(),
        smallest: sv.into_iter().take(m).collect(),
        smallest_adjoint: sva.into_iter().take(m).collect(),
        counts,
    })
}

/// Phase at which [`ellipticity_margin`] of the unshifted circle `e^{iz}`
/// touches `−1`.
pub const DEGENERATE_PHASE: f64 = PI;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_unitary, seeded_rng};
    use crate::torus::random_band_limited;

    fn grid3(nxy: usize, nz: usize) -> Grid {
        make_grid(3, &[nxy, nxy, nz]).unwrap()
    }

    fn in_range(bundle: &BundleChoice, grid: &Grid, seed: u64) -> GridFunction {
        let mut rng = seeded_rng(seed, 0);
        bundle.project(&random_band_limited(grid, bundle.channels(), 2, 6, &mut rng))
    }

    #[test]
    fn connection_on_trivial_bundle() {
        let g = grid3(8, 16);
        let dz = VectorField::from_fn(&g, |_| [0.0, 0.0, 1.0]).unwrap();
        let nabla = grassmann_connection(&BundleChoice::Trivial, &dz).unwrap();
        let s = GridFunction::from_fn(&g, |x| C64::from_polar(1.0, x[2]));
        let out = nabla.apply(&s).unwrap();
        assert!((&out - &s.scale(C64::new(0.0, 1.0))).max_abs() < 1e-12);
    }

    #[test]
    fn connection_kills_z_independent_sections() {
        let g = grid3(16, 8);
        let bundle = BundleChoice::pullback_of_e(&ProfileTriple::default(), &g).unwrap();
        let c = GridFunction::from_fn_channels(&g, 2, |_| vec![C64::new(0.3, 0.1), C64::new(-0.7, 0.2)]);
        let s = bundle.project(&c);
        let dz = VectorField::from_fn(&g, |_| [0.0, 0.0, 1.0]).unwrap();
        let nabla = grassmann_connection(&bundle, &dz).unwrap();
        assert!(nabla.apply(&s).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn connection_rejects_out_of_range_input() {
        let g = grid3(16, 8);
        let bundle = BundleChoice::pullback_of_e(&ProfileTriple::default(), &g).unwrap();
        let dz = VectorField::from_fn(&g, |_| [0.0, 0.0, 1.0]).unwrap();
        let nabla = grassmann_connection(&bundle, &dz).unwrap();
        let raw = GridFunction::from_fn_channels(&g, 2, |_| vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(nabla.apply(&raw), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn connection_leibniz_rule() {
        let g = grid3(16, 16);
        let bundle = BundleChoice::pullback_of_e(&ProfileTriple::default(), &g).unwrap();
        let v = VectorField::from_fn(&g, |x| [x[2].sin(), x[2].cos(), 1.0]).unwrap();
        let nabla = grassmann_connection(&bundle, &v).unwrap();
        // e is z-independent, so a z-only φ keeps the product resolved
        let phi = GridFunction::from_fn(&g, |x| C64::new(x[2].cos(), 0.5 * (2.0 * x[2]).sin()) + 0.3);
        let s = in_range(&bundle, &g, 22);
        let lhs = nabla.apply(&s.mul_scalar_field(&phi).unwrap()).unwrap();
        let vphi = directional(&v, &phi).unwrap();
        let rhs = &s.mul_scalar_field(&vphi).unwrap() + &nabla.apply(&s).unwrap().mul_scalar_field(&phi).unwrap();
        assert!((&lhs - &rhs).max_abs() < 1e-10 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn sublaplacian_modes_and_constants() {
        let g = grid3(8, 16);
        let lap = sublaplacian(2, &BundleChoice::Trivial, &g).unwrap();
        let one = GridFunction::constant(&g, C64::new(1.0, 0.0));
        assert!(lap.apply(&one).unwrap().max_abs() < 1e-12);
        for p in -4i64..=4 {
            let s = GridFunction::from_fn(&g, |x| C64::from_polar(1.0, p as f64 * x[2]));
            let out = lap.apply(&s).unwrap();
            assert!((&out - &s.scale(C64::new((p * p) as f64, 0.0))).max_abs() < 1e-10 * (1.0 + (p * p) as f64));
        }
    }

    #[test]
    fn sublaplacian_is_nonnegative_and_symmetric() {
        let g = grid3(16, 16);
        let bundle = BundleChoice::pullback_of_e(&ProfileTriple::default(), &g).unwrap();
        let lap = sublaplacian(1, &bundle, &g).unwrap();
        for t in 0..5 {
            let u = in_range(&bundle, &g, 100 + t);
            let v = in_range(&bundle, &g, 200 + t);
            let quad = lap.apply(&u).unwrap().inner(&u).unwrap();
            assert!(quad.re >= -1e-9 && quad.im.abs() < 1e-9 * quad.re.abs().max(1.0));
            let lhs = lap.apply(&u).unwrap().inner(&v).unwrap();
            let rhs = u.inner(&lap.apply(&v).unwrap()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn p_on_z_modes_is_p_squared() {
        let g = grid3(8, 32);
        for k in 1..=3 {
            for l in [-2i64, 0, 3] {
                let op = assemble_P(k, l, &BundleChoice::Trivial, &g).unwrap();
                for p in -8i64..=8 {
                    let s = GridFunction::from_fn(&g, |x| C64::from_polar(1.0, p as f64 * x[2]));
                    let out = op.apply(&s).unwrap();
                    let expect = s.scale(C64::new((p * p) as f64, 0.0));
                    let rel = (&out - &expect).max_abs() / (p * p).max(1) as f64;
                    assert!(rel <= 1e-10, "k={k} l={l} p={p}: {rel}");
                }
            }
        }
    }

    #[test]
    fn p_at_l_zero_has_constant_drift() {
        let g = grid3(8, 16);
        let p0 = assemble_P(1, 0, &BundleChoice::Trivial, &g).unwrap();
        let lap = sublaplacian(1, &BundleChoice::Trivial, &g).unwrap();
        let data = ContactData::new(1, &g).unwrap();
        let t = grassmann_connection(&BundleChoice::Trivial, &data.reeb).unwrap();
        let mut rng = seeded_rng(9, 0);
        let s = random_band_limited(&g, 1, 2, 5, &mut rng);
        let expect = lap.apply(&s).unwrap().axpy(C64::new(0.0, 2.0), &t.apply(&s).unwrap()).unwrap();
        assert!((&p0.apply(&s).unwrap() - &expect).max_abs() < 1e-10);
    }

    #[test]
    fn p_is_linear() {
        let g = grid3(8, 16);
        let op = assemble_P(2, 1, &BundleChoice::Trivial, &g).unwrap();
        let mut rng = seeded_rng(4, 0);
        let s = random_band_limited(&g, 1, 3, 5, &mut rng);
        let t = random_band_limited(&g, 1, 3, 5, &mut rng);
        let (a, b) = (C64::new(0.3, -1.2), C64::new(2.0, 0.5));
        let lhs = op.apply(&s.scale(a).axpy(b, &t).unwrap()).unwrap();
        let rhs = op.apply(&s).unwrap().scale(a).axpy(b, &op.apply(&t).unwrap()).unwrap();
        assert!((&lhs - &rhs).max_abs() <= 1e-12 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn p_rejects_unresolved_l() {
        let g = grid3(8, 16);
        assert!(matches!(
            assemble_P(1, 8, &BundleChoice::Trivial, &g),
            Err(Error::Unresolved { .. })
        ));
    }

    #[test]
    fn ellipticity_margins() {
        assert!((ellipticity_margin(1, 256).unwrap() - 1.0).abs() < 1e-9);
        assert!((ellipticity_margin(0, 256).unwrap() - 1.0).abs() < 1e-9);
        assert!(ellipticity_margin(1, 16).is_err());
        let degenerate = ellipticity_margin_of(|z| C64::from_polar(1.0, z), 256);
        assert!(degenerate <= 1e-6);
        assert!((C64::from_polar(1.0, DEGENERATE_PHASE) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn locality_with_unit_cutoff_is_exact() {
        let g = grid3(8, 32);
        let op = assemble_P(1, 1, &BundleChoice::Trivial, &g).unwrap();
        let mut rng = seeded_rng(8, 0);
        let s = random_band_limited(&g, 1, 2, 4, &mut rng);
        let one = GridFunction::constant(&g, C64::new(1.0, 0.0));
        let ps = op.apply(&s).unwrap();
        let pphis = op.apply(&s.mul_scalar_field(&one).unwrap()).unwrap();
        assert_eq!(ps, pphis);
    }

    #[test]
    fn dense_truncation_sees_constants_in_kernel() {
        let g = grid3(8, 8);
        let op = assemble_P(1, 0, &BundleChoice::Trivial, &g).unwrap();
        let r = singular_diagnostics(&op, 3).unwrap();
        assert!(r.smallest[0] < 1e-10, "{:?}", r.smallest);
        for (_, a, b) in &r.counts {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn dense_sublaplacian_is_positive_semidefinite() {
        let g = grid3(8, 8);
        let lap = sublaplacian(1, &BundleChoice::Trivial, &g).unwrap();
        let m = lap.assemble_dense(false).unwrap();
        let herm = (&m - m.adjoint()).camax();
        assert!(herm < 1e-9);
        let eig = m.clone().symmetric_eigen();
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-9);
        let mut ev: Vec<f64> = eig.eigenvalues.iter().map(|v| v.abs()).collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        let sv = truncation_singular_values(&m).unwrap();
        let worst = ev.iter().zip(&sv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8);
    }

    #[test]
    fn gauge_covariance_of_spectra() {
        let g = grid3(8, 8);
        let bundle = BundleChoice::pullback_of_e(&ProfileTriple::default(), &g).unwrap();
        let mut rng = seeded_rng(31, 0);
        let u = random_unitary(&mut rng, 2);
        let u = Mat2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
        let a = singular_diagnostics(&assemble_P(1, 1, &bundle, &g).unwrap(), 6).unwrap();
        let b = singular_diagnostics(&assemble_P(1, 1, &bundle.conjugate(&u), &g).unwrap(), 6).unwrap();
        for (x, y) in a.smallest.iter().zip(&b.smallest) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn memory_guard() {
        let g = grid3(16, 64);
        let op = assemble_P(1, 1, &BundleChoice::Trivial, &g).unwrap();
        assert!(matches!(singular_diagnostics(&op, 1), Err(Error::MemoryGuard { .. })));
    }
}
