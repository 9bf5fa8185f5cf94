//! Topological index of `P_{k,l}` and its consistency across covers.
//!
//! ```text
//! index(P_{k,l}) = ∫_{T³} (−1/2πi) u⁻¹du ∧ q*c₁(E),    u = e^{ilz},
//! ```
//!
//! evaluated both as an honest 3-D quadrature of the wedge product and as the
//! product of a winding integral over `S¹` with the Chern number over `T²`.
//! The orientation of `T³` is the contact orientation `θ_k ∧ dθ_k > 0`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::bundle::{build_idempotent, chern_form, chern_number, pullback_by_projection, ProfileTriple};
use crate::contact::{contact_form, pullback_by_cover};
use crate::torus::{exterior_derivative, integrate_top, make_grid, spectral_derivative, wedge, DiffForm, Grid, GridFunction};
use crate::{par, Error, Result, C64};

/// Agreement required between the wedge and factorized evaluations.
pub const PATH_TOL: f64 = 1e-8;

/// Grid sizes of the convergence study attached to every report.
pub const CONVERGENCE_SIZES: [usize; 3] = [32, 64, 128];

fn check_resolved(freq: i64, n: usize) -> Result<()> {
    if freq.unsigned_abs() as usize >= n / 2 {
        return Err(Error::Unresolved { freq, n });
    }
    Ok(())
}

/// `(−1/2πi) ∫_{S¹} u⁻¹ u' dz` for `u = e^{ilz}`, by spectral
/// differentiation and trapezoid quadrature; equals `−l`.
pub fn winding_integral(l: i64, n: usize) -> Result<f64> {
    let grid = make_grid(1, &[n])?;
    check_resolved(l, n)?;
    let u = GridFunction::from_fn(&grid, |x| C64::from_polar(1.0, l as f64 * x[0]));
    let du = spectral_derivative(&u, 0)?;
    let density = du.mul_scalar_field(&u.map(|v| v.inv()))?;
    Ok((density.integrate()[0] * (-1.0 / C64::new(0.0, TAU))).re)
}

/// `(−1/2πi) u⁻¹du` for `u = e^{ilz}` on a `T³` grid.
pub fn winding_form(l: i64, grid: &Grid) -> Result<DiffForm> {
    check_resolved(l, grid.size(2))?;
    let u = GridFunction::from_fn(grid, |x| C64::from_polar(1.0, l as f64 * x[2]));
    let du = exterior_derivative(&DiffForm::function(u.clone())?)?;
    Ok(du.mul_function(&u.map(|v| v.inv()))?.scale(-1.0 / C64::new(0.0, TAU)))
}

/// Sign of `θ_k ∧ dθ_k` relative to `dx ∧ dy ∧ dz`.
fn contact_orientation(k: u32, grid: &Grid) -> Result<f64> {
    let theta = contact_form(k, grid)?;
    let vol = wedge(&theta, &exterior_derivative(&theta)?)?;
    let mean = integrate_top(&vol)?.re;
    Ok(if mean >= 0.0 { 1.0 } else { -1.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TopologicalIndex {
    pub wedge: f64,
    pub winding: f64,
    pub chern: f64,
    pub factorized: f64,
}

impl TopologicalIndex {
    pub fn path_discrepancy(&self) -> f64 {
        (self.wedge - self.factorized).abs()
    }
}

/// The 3-D integrand `(−1/2πi) u⁻¹du ∧ q*c₁` on the `n³` grid.
fn index_density(l: i64, profile: &ProfileTriple, grid: &Grid) -> Result<DiffForm> {
    let g2 = make_grid(2, &grid.sizes()[..2])?;
    let c1 = chern_form(&build_idempotent(profile, &g2)?)?;
    wedge(&winding_form(l, grid)?, &pullback_by_projection(&c1, grid)?)
}

/// Evaluates the index on an `n³` grid along both paths.
pub fn topological_index(k: u32, l: i64, profile: &ProfileTriple, n: usize) -> Result<TopologicalIndex> {
    let grid = Grid::cube(3, n)?;
    check_resolved(k as i64, n)?;
    check_resolved(l, n)?;
    let sign = contact_orientation(k, &grid)?;
    let wedge_value = sign * integrate_top(&index_density(l, profile, &grid)?)?.re;
    let winding = winding_integral(l, n)?;
    let chern = chern_number(&build_idempotent(profile, &make_grid(2, &[n, n])?)?)?;
    let out = TopologicalIndex {
        wedge: wedge_value,
        winding,
        chern,
        factorized: winding * chern,
    };
    if out.path_discrepancy() > PATH_TOL {
        log::warn!(
            "index paths disagree for (k, l) = ({k}, {l}): wedge {} vs factorized {}",
            out.wedge,
            out.factorized
        );
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub index_value: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaCheck {
    pub k: u32,
    /// `I(1, l)` on the base.
    pub base: f64,
    /// `(1/k) I(k, kl)` evaluated on the cover.
    pub cover: f64,
    /// `(1/k) ∫ p_k^*(integrand of I(1, l))`.
    pub pullback: f64,
    pub discrepancy: f64,
    pub pullback_discrepancy: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexReport {
    pub k: u32,
    pub l: i64,
    pub n: usize,
    pub chern: f64,
    pub winding_integral: f64,
    pub index_value: f64,
    pub wedge_value: f64,
    pub path_discrepancy: f64,
    pub gamma_checks: Vec<GammaCheck>,
    pub convergence: Vec<ConvergencePoint>,
}

/// Compares the base index with the normalized index on the `k`-fold cover,
/// both directly and through the pullback of the base integrand.
pub fn gamma_index_check(k: u32, l: i64, profile: &ProfileTriple, n: usize) -> Result<GammaCheck> {
    if k == 0 {
        return Err(Error::InvalidParameter("cover degree must be positive".into()));
    }
    let kl = l.checked_mul(k as i64).ok_or_else(|| Error::InvalidParameter("k·l overflows".into()))?;
    let base = topological_index(1, l, profile, n)?.wedge;
    let cover = topological_index(k, kl, profile, n)?.wedge / k as f64;
    let grid = Grid::cube(3, n)?;
    let pulled = pullback_by_cover(k, &index_density(l, profile, &grid)?)?;
    let pullback = contact_orientation(k, &grid)? * integrate_top(&pulled)?.re / k as f64;
    Ok(GammaCheck {
        k,
        base,
        cover,
        pullback,
        discrepancy: (cover - base).abs(),
        pullback_discrepancy: (pullback - base).abs(),
        tolerance: PATH_TOL,
    })
}

/// Factorized index at each size of [`CONVERGENCE_SIZES`].
pub fn convergence_study(l: i64, profile: &ProfileTriple) -> Result<Vec<ConvergencePoint>> {
    par::map_slice(&CONVERGENCE_SIZES, |&n| {
        let chern = chern_number(&build_idempotent(profile, &make_grid(2, &[n, n])?)?)?;
        let value = winding_integral(l, n)? * chern;
        Ok(ConvergencePoint {
            n,
            index_value: value,
            error: (value - l as f64).abs(),
        })
    })
    .into_iter()
    .collect()
}

/// Full report: index at `(k, l)`, cover checks for each entry of `covers`
/// and the convergence study.
pub fn index_report(k: u32, l: i64, profile: &ProfileTriple, n: usize, covers: &[u32]) -> Result<IndexReport> {
    let t = topological_index(k, l, profile, n)?;
    let gamma_checks = covers
        .iter()
        .map(|&c| gamma_index_check(c, l, profile, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexReport {
        k,
        l,
        n,
        chern: t.chern,
        winding_integral: t.winding,
        index_value: t.factorized,
        wedge_value: t.wedge,
        path_discrepancy: t.path_discrepancy(),
        gamma_checks,
        convergence: convergence_study(l, profile)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winding_examples() {
        assert_eq!(winding_integral(0, 32).unwrap(), 0.0);
        assert!((winding_integral(1, 32).unwrap() + 1.0).abs() < 1e-13);
        assert!((winding_integral(-3, 32).unwrap() - 3.0).abs() < 1e-13);
        assert!(matches!(winding_integral(16, 32), Err(Error::Unresolved { .. })));
    }

    #[test]
    fn index_examples() {
        let p = ProfileTriple::default();
        for (k, l) in [(1, 1), (2, 3), (1, 0)] {
            let t = topological_index(k, l, &p, 32).unwrap();
            assert!((t.wedge - l as f64).abs() < 1e-5, "{t:?}");
            assert!(t.path_discrepancy() < 1e-8, "{t:?}");
        }
        assert!(topological_index(1, 0, &p, 32).unwrap().wedge.abs() < 1e-10);
    }

    #[test]
    fn gamma_checks() {
        let p = ProfileTriple::default();
        let c = gamma_index_check(2, 1, &p, 32).unwrap();
        assert!(c.discrepancy < 1e-8 && c.pullback_discrepancy < 1e-8, "{c:?}");
        let c = gamma_index_check(1, -2, &p, 32).unwrap();
        assert_eq!(c.discrepancy, 0.0);
    }

    #[test]
    fn convergence_is_small() {
        let pts = convergence_study(2, &ProfileTriple::default()).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts[2].error < 1e-8);
    }
}
