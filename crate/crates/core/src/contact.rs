//! Contact forms `θ_k = cos(kz) dx − sin(kz) dy` on `T³`, their Reeb fields
//! and horizontal frames, and pullbacks along the covers
//! `p_k(x, y, z) = (x, y, kz)`.

use nalgebra::{Matrix4x3, Vector4};
use serde::Serialize;

use crate::torus::function::{from_line_spectra, line_spectra};
use crate::torus::{exterior_derivative, wedge, DiffForm, Grid, GridFunction, AXIS_Z};
use crate::{par, Error, Result, C64};

/// Tolerance used to certify the contact-data invariants.
pub const CONTACT_TOL: f64 = 1e-10;

/// Vector field `Σ V_i ∂_i` on `T³`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: [GridFunction; 3],
}

impl VectorField {
    pub fn new(components: [GridFunction; 3]) -> Result<Self> {
        let grid = components[0].grid().clone();
        if grid.dim() != 3 || components.iter().any(|c| c.grid() != &grid || c.channels() != 1) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, components })
    }

    pub fn from_fn<F>(grid: &Grid, f: F) -> Result<Self>
    where
        F: Fn([f64; 3]) -> [f64; 3] + Sync + Send,
    {
        let comp = |i: usize| GridFunction::from_real_fn(grid, |x| f(x)[i]);
        Self::new([comp(0), comp(1), comp(2)])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, i: usize) -> &GridFunction {
        &self.components[i]
    }

    pub fn components(&self) -> &[GridFunction; 3] {
        &self.components
    }

    /// Components at point `p`.
    pub fn at(&self, p: usize) -> [C64; 3] {
        [
            self.components[0].value(p),
            self.components[1].value(p),
            self.components[2].value(p),
        ]
    }

    /// Spectral divergence `Σ ∂_i V_i`.
    pub fn divergence(&self) -> Result<GridFunction> {
        let mut acc = GridFunction::zeros(&self.grid, 1);
        for (axis, c) in self.components.iter().enumerate() {
            if c.max_abs() > 0.0 {
                acc = &acc + &crate::torus::spectral_derivative(c, axis)?;
            }
        }
        Ok(acc)
    }

    pub fn max_deviation(&self, other: &VectorField) -> f64 {
        (0..3)
            .map(|i| (&self.components[i] - &other.components[i]).max_abs())
            .fold(0.0, f64::max)
    }
}

/// `ω(V)` for a one-form `ω`.
pub fn evaluate_one_form(omega: &DiffForm, v: &VectorField) -> Result<GridFunction> {
    if omega.degree() != 1 || omega.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let mut acc = GridFunction::zeros(v.grid(), 1);
    for i in 0..3 {
        acc = &acc + &omega.coeff(&[i]).mul_scalar_field(v.component(i))?;
    }
    Ok(acc)
}

/// Components `(ι_V β)(∂_j)` of the interior product of a two-form.
pub fn interior_two_form(beta: &DiffForm, v: &VectorField) -> Result<[GridFunction; 3]> {
    if beta.degree() != 2 || beta.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = v.grid();
    let mut out: [GridFunction; 3] = std::array::from_fn(|_| GridFunction::zeros(grid, 1));
    // β = Σ_{i<j} b_ij dx_i ∧ dx_j;  (ι_V β)_j = Σ_i V_i β_ij
    for (idx, b) in beta.coeffs() {
        let (i, j) = (idx[0], idx[1]);
        out[j] = &out[j] + &b.mul_scalar_field(v.component(i))?;
        out[i] = &out[i] - &b.mul_scalar_field(v.component(j))?;
    }
    Ok(out)
}

fn require_t3(grid: &Grid) -> Result<()> {
    if grid.dim() != 3 {
        return Err(Error::InvalidGrid(format!(
            "contact geometry lives on T³, got dimension {}",
            grid.dim()
        )));
    }
    Ok(())
}

/// `θ_k = cos(kz) dx − sin(kz) dy`.
pub fn contact_form(k: u32, grid: &Grid) -> Result<DiffForm> {
    require_t3(grid)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if k as i64 > grid.max_resolved(AXIS_Z) {
        return Err(Error::Unresolved {
            freq: k as i64,
            n: grid.size(AXIS_Z),
        });
    }
    let kf = k as f64;
    DiffForm::one_form(
        grid,
        vec![
            GridFunction::from_real_fn(grid, |x| (kf * x[2]).cos()),
            GridFunction::from_real_fn(grid, |x| -(kf * x[2]).sin()),
            GridFunction::zeros(grid, 1),
        ],
    )
}

fn one_form_on_t3(theta: &DiffForm) -> Result<()> {
    require_t3(theta.grid())?;
    if theta.degree() != 1 {
        return Err(Error::Degree {
            degree: theta.degree(),
            reason: "expected a one-form".into(),
        });
    }
    Ok(())
}

/// Minimum over the grid of `|θ ∧ dθ|`; positive certifies the contact
/// condition at grid resolution.
pub fn contact_condition(theta: &DiffForm) -> Result<f64> {
    one_form_on_t3(theta)?;
    let vol = wedge(theta, &exterior_derivative(theta)?)?;
    let c = vol.top_coeff()?;
    Ok(c.values().iter().fold(f64::INFINITY, |m, v| m.min(v.norm())))
}

/// Reeb field: pointwise least-squares solution of `θ(T) = 1` and
/// `ι_T dθ = 0` (all three components), which has full rank exactly when
/// `θ ∧ dθ ≠ 0`.
pub fn reeb_field(theta: &DiffForm) -> Result<VectorField> {
    one_form_on_t3(theta)?;
    let grid = theta.grid();
    let dtheta = exterior_derivative(theta)?;
    let w = |i: usize, j: usize, p: usize| -> C64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => dtheta.coeff(&[i, j]).value(p),
            Greater => -dtheta.coeff(&[j, i]).value(p),
            Equal => C64::new(0.0, 0.0),
        }
    };
    let solved = par::map_range(grid.len(), |p| {
        let a = Matrix4x3::from_fn(|r, c| {
            if r == 0 {
                theta.coeff(&[c]).value(p)
            } else {
                // row j: Σ_i T_i W_ij = 0
                w(c, r - 1, p)
            }
        });
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin.is_nan() || smin <= 1e-8 * smax.max(1.0) {
            return Err(Error::NotContact(format!(
                "singular Reeb system at point {p} (σ_min = {smin:.3e})"
            )));
        }
        let b = Vector4::new(
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        );
        let t = svd
            .solve(&b, 0.0)
            .map_err(|e| Error::NotContact(e.to_string()))?;
        Ok([t[0], t[1], t[2]])
    });
    let solved = solved.into_iter().collect::<Result<Vec<_>>>()?;
    let comp = |i: usize| {
        GridFunction::from_values(grid, 1, solved.iter().map(|t| t[i]).collect()).expect("shape")
    };
    VectorField::new([comp(0), comp(1), comp(2)])
}

/// Residuals of the Reeb equations: `max(|θ(T) − 1|, |ι_T dθ|)`.
pub fn reeb_residual(theta: &DiffForm, reeb: &VectorField) -> Result<f64> {
    let one = evaluate_one_form(theta, reeb)?.map(|v| v - 1.0);
    let iota = interior_two_form(&exterior_derivative(theta)?, reeb)?;
    Ok(iota.iter().fold(one.max_abs(), |m, c| m.max(c.max_abs())))
}

/// Global frame `{X, Y}` of `ker θ` for forms `a(z) dx + b(z) dy` with
/// `a² + b² = 1`: `X = −b ∂x + a ∂y`, `Y = ∂z`.
pub fn horizontal_frame(theta: &DiffForm) -> Result<(VectorField, VectorField)> {
    one_form_on_t3(theta)?;
    let grid = theta.grid();
    let (a, b, c) = (theta.coeff(&[0]), theta.coeff(&[1]), theta.coeff(&[2]));
    if c.max_abs() > 1e-12 {
        return Err(Error::UnsupportedForm("dz component must vanish".into()));
    }
    for coeff in [a, b] {
        if coeff.max_imag() > 1e-12 {
            return Err(Error::UnsupportedForm("complex coefficients".into()));
        }
        for axis in 0..2 {
            if crate::torus::spectral_derivative(coeff, axis)?.max_abs() > 1e-10 {
                return Err(Error::UnsupportedForm("coefficients depend on x or y".into()));
            }
        }
    }
    let unit = a
        .values()
        .iter()
        .zip(b.values())
        .fold(0.0f64, |m, (u, v)| m.max((u.norm_sqr() + v.norm_sqr() - 1.0).abs()));
    if unit > 1e-12 {
        return Err(Error::UnsupportedForm(format!(
            "coefficients are not a unit rotation (defect {unit:.3e})"
        )));
    }
    let x = VectorField::new([-b, a.clone(), GridFunction::zeros(grid, 1)])?;
    let y = VectorField::new([
        GridFunction::zeros(grid, 1),
        GridFunction::zeros(grid, 1),
        GridFunction::constant(grid, C64::new(1.0, 0.0)),
    ])?;
    Ok((x, y))
}

/// Pointwise Gram determinant of three vector fields, minimised over the grid.
pub fn min_gram_determinant(a: &VectorField, b: &VectorField, c: &VectorField) -> f64 {
    let grid = a.grid();
    (0..grid.len())
        .map(|p| {
            let m = nalgebra::Matrix3::from_fn(|i, j| [a, b, c][i].at(p)[j]);
            (m.adjoint() * m).determinant().re
        })
        .fold(f64::INFINITY, f64::min)
}

/// Resamples a scalar function `g(x, y, z) ↦ g(x, y, kz)` in Fourier space.
fn pullback_function(k: u32, f: &GridFunction) -> Result<GridFunction> {
    let grid = f.grid();
    let n = grid.size(AXIS_Z);
    let limit = grid.max_resolved(AXIS_Z) / k as i64;
    let spectra = line_spectra(f, AXIS_Z)?;
    let mut residual = 0.0f64;
    let mut scale = 0.0f64;
    let mapped = spectra
        .into_iter()
        .map(|(p0, ch, spec)| {
            let mut out = vec![C64::new(0.0, 0.0); n];
            for (j, v) in spec.iter().enumerate() {
                let m = Grid::wavenumber(j, n);
                let amp = v.norm() / n as f64;
                scale = scale.max(amp);
                if m.abs() <= limit {
                    let slot = (m * k as i64).rem_euclid(n as i64) as usize;
                    out[slot] = *v;
                } else {
                    residual = residual.max(amp);
                }
            }
            (p0, ch, out)
        })
        .collect();
    if residual > 1e-10 * scale.max(1.0) {
        return Err(Error::Aliasing { residual });
    }
    Ok(from_line_spectra(grid, f.channels(), AXIS_Z, mapped))
}

/// Pullback `p_k^* ω` along `p_k(x, y, z) = (x, y, kz)`: coefficients are
/// resampled at `kz` and every `dz` factor contributes `k`.
pub fn pullback_by_cover(k: u32, omega: &DiffForm) -> Result<DiffForm> {
    require_t3(omega.grid())?;
    if k == 0 {
        return Err(Error::InvalidParameter("cover degree must be positive".into()));
    }
    let terms = omega
        .coeffs()
        .map(|(idx, c)| {
            let mut pulled = pullback_function(k, c)?;
            if idx.contains(&AXIS_Z) {
                pulled = pulled.scale(C64::new(k as f64, 0.0));
            }
            Ok((idx.clone(), pulled))
        })
        .collect::<Result<Vec<_>>>()?;
    DiffForm::from_coeffs(omega.grid(), omega.degree(), terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LiftReport {
    pub k: u32,
    pub target: u32,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Tolerance for the lift comparison.
pub const LIFT_TOL: f64 = 1e-12;

/// Checks `p_k^* θ_1 = θ_target`.
pub fn verify_lift_against(k: u32, target: u32, grid: &Grid) -> Result<LiftReport> {
    let pulled = pullback_by_cover(k, &contact_form(1, grid)?)?;
    let deviation = pulled.sub(&contact_form(target, grid)?)?.max_abs();
    Ok(LiftReport {
        k,
        target,
        deviation,
        tolerance: LIFT_TOL,
        pass: deviation <= LIFT_TOL,
    })
}

/// Checks that `H_k = ker θ_k` is the lift of `H_1` along `p_k`.
pub fn verify_lift(k: u32, grid: &Grid) -> Result<LiftReport> {
    verify_lift_against(k, k, grid)
}

/// Contact form together with its Reeb field and horizontal frame.
#[derive(Clone, Debug)]
pub struct ContactData {
    pub k: u32,
    pub theta: DiffForm,
    pub reeb: VectorField,
    pub frame_x: VectorField,
    pub frame_y: VectorField,
}

impl ContactData {
    pub fn new(k: u32, grid: &Grid) -> Result<Self> {
        let theta = contact_form(k, grid)?;
        let reeb = reeb_field(&theta)?;
        let (frame_x, frame_y) = horizontal_frame(&theta)?;
        let data = Self {
            k,
            theta,
            reeb,
            frame_x,
            frame_y,
        };
        let defect = data.invariant_defect()?;
        if defect > CONTACT_TOL {
            return Err(Error::NotContact(format!("invariant defect {defect:.3e}")));
        }
        Ok(data)
    }

    /// Largest violation among `θ(T) = 1`, `ι_T dθ = 0`, `θ(X) = θ(Y) = 0`
    /// and the unit Gram determinant of `{X, Y, T}`.
    pub fn invariant_defect(&self) -> Result<f64> {
        let reeb = reeb_residual(&self.theta, &self.reeb)?;
        let tx = evaluate_one_form(&self.theta, &self.frame_x)?.max_abs();
        let ty = evaluate_one_form(&self.theta, &self.frame_y)?.max_abs();
        let gram = (min_gram_determinant(&self.frame_x, &self.frame_y, &self.reeb) - 1.0).abs();
        Ok(reeb.max(tx).max(ty).max(gram))
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::random::seeded_rng;
    use crate::torus::{integrate_top, make_grid, random_band_limited};

    fn grid3(n: usize) -> Grid {
        make_grid(3, &[n, n, n]).unwrap()
    }

    #[test]
    fn contact_form_values() {
        let g = grid3(16);
        let t1 = contact_form(1, &g).unwrap();
        assert_eq!(t1.coeff(&[0]).value(0), C64::new(1.0, 0.0));
        assert_eq!(t1.coeff(&[1]).value(0), C64::new(-0.0, 0.0));
        let t2 = contact_form(2, &g).unwrap();
        for p in [5, 77, 1000] {
            let z = g.coords(p)[2];
            assert!((t2.coeff(&[0]).value(p).re - (2.0 * z).cos()).abs() < 1e-15);
            assert!((t2.coeff(&[1]).value(p).re + (2.0 * z).sin()).abs() < 1e-15);
        }
        assert!(contact_form(8, &g).is_err());
        assert!(contact_form(0, &g).is_err());
    }

    #[test]
    fn contact_volume() {
        let g = grid3(16);
        for k in 1..=3u32 {
            let t = contact_form(k, &g).unwrap();
            let vol = integrate_top(&t.wedge(&t.d().unwrap()).unwrap()).unwrap();
            assert!((vol.re - k as f64 * TAU.powi(3)).abs() < 1e-8);
            assert!((contact_condition(&t).unwrap() - k as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn foliations_are_not_contact() {
        let g = grid3(16);
        let one = |v: f64| GridFunction::constant(&g, C64::new(v, 0.0));
        let dz = DiffForm::one_form(&g, vec![one(0.0), one(0.0), one(1.0)]).unwrap();
        assert!(contact_condition(&dz).unwrap() < 1e-12);
        let pert = DiffForm::one_form(&g, vec![one(1e-3), one(0.0), one(1.0)]).unwrap();
        assert!(contact_condition(&pert).unwrap() < 1e-10);
        assert!(matches!(reeb_field(&dz), Err(Error::NotContact(_))));
    }

    #[test]
    fn reeb_matches_closed_form() {
        let g = grid3(16);
        for k in 1..=3u32 {
            let t = contact_form(k, &g).unwrap();
            let reeb = reeb_field(&t).unwrap();
            let kf = k as f64;
            let oracle = VectorField::from_fn(&g, |x| [(kf * x[2]).cos(), -(kf * x[2]).sin(), 0.0]).unwrap();
            assert!(reeb.max_deviation(&oracle) < 1e-10);
            assert!(reeb_residual(&t, &reeb).unwrap() < 1e-10);
        }
        let t1 = contact_form(1, &g).unwrap();
        let r = reeb_field(&t1).unwrap();
        let at0 = r.at(0);
        assert!((at0[0] - 1.0).norm() < 1e-12 && at0[1].norm() < 1e-12 && at0[2].norm() < 1e-12);
    }

    #[test]
    fn frame_annihilated_and_orthonormal() {
        let g = grid3(16);
        let t1 = contact_form(1, &g).unwrap();
        let (x, y) = horizontal_frame(&t1).unwrap();
        let x0 = x.at(0);
        assert!(x0[0].norm() < 1e-15 && (x0[1] - 1.0).norm() < 1e-15);
        assert_eq!(y.at(0)[2], C64::new(1.0, 0.0));
        for k in 1..=3 {
            let data = ContactData::new(k, &g).unwrap();
            assert!(evaluate_one_form(&data.theta, &data.frame_x).unwrap().max_abs() < 1e-12);
            assert!(evaluate_one_form(&data.theta, &data.frame_y).unwrap().max_abs() < 1e-12);
            let gram = min_gram_determinant(&data.frame_x, &data.frame_y, &data.reeb);
            assert!((gram - 1.0).abs() < 1e-10);
            assert!(data.frame_x.divergence().unwrap().max_abs() < 1e-12);
        }
        let bad = DiffForm::basis(&g, &[2]).unwrap();
        assert!(horizontal_frame(&bad).is_err());
    }

    #[test]
    fn pullback_basics() {
        let g = grid3(16);
        let dz = DiffForm::basis(&g, &[2]).unwrap();
        let p = pullback_by_cover(3, &dz).unwrap();
        assert!((p.coeff(&[2]).map(|v| v - 3.0)).max_abs() < 1e-14);
        let dxdy = DiffForm::basis(&g, &[0, 1]).unwrap();
        assert!(pullback_by_cover(2, &dxdy).unwrap().sub(&dxdy).unwrap().max_abs() < 1e-14);
        for k in [2, 3] {
            let r = verify_lift(k, &g).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(!verify_lift_against(k, k + 1, &g).unwrap().pass);
        }
    }

    #[test]
    fn pullback_rejects_aliasing() {
        let g = grid3(16);
        let t5 = contact_form(5, &g).unwrap();
        assert!(matches!(pullback_by_cover(2, &t5), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn pullback_functoriality() {
        let g = make_grid(3, &[8, 8, 32]).unwrap();
        let mut rng = seeded_rng(5, 0);
        let comps = (0..3).map(|_| random_band_limited(&g, 1, 2, 4, &mut rng)).collect();
        let w = DiffForm::one_form(&g, comps).unwrap();
        let lhs = pullback_by_cover(2, &pullback_by_cover(3, &w).unwrap()).unwrap();
        let rhs = pullback_by_cover(6, &w).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-10);
    }
}
