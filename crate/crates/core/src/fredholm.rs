//! Finite-dimensional model of parametrices and the Connes–Skandalis
//! idempotent.
//!
//! `D` is an `m × n` matrix mapping `Cⁿ → Cᵐ`. A parametrix `Q` is any
//! `n × m` matrix; the remainders are `S₀ = 1 − QD` and `S₁ = 1 − DQ`, and
//!
//! ```text
//!       ⎡ S₀²    S₀(1 + S₀)Q ⎤          ⎡ 0  0 ⎤
//! e_D = ⎣ S₁D    1 − S₁²     ⎦ ,   e₁ = ⎣ 0  1 ⎦ .
//! ```
//!
//! Square matrices always have index zero, so rectangular `D` is how a
//! nonzero index shows up in finite dimensions: `tr S₀² − tr S₁² = n − m`
//! for every choice of `Q`.

use log::warn;
use serde::Serialize;

use crate::{CMatrix, Error, Result, C64};

/// Relative singular-value threshold used when none is given.
pub const DEFAULT_RELATIVE_TAU: f64 = 1e-8;

/// A threshold with singular values on both sides within this ratio is
/// reported as splitting a cluster.
pub const CLUSTER_RATIO: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct ParametrixData {
    pub q: CMatrix,
    pub s0: CMatrix,
    pub s1: CMatrix,
}

/// A pseudoinverse parametrix together with the rank decision behind it.
#[derive(Clone, Debug)]
pub struct PseudoParametrix {
    pub data: ParametrixData,
    pub tau: f64,
    pub rank: usize,
    pub cluster_split: bool,
}

#[derive(Clone, Debug)]
pub struct IdempotentPair {
    pub n: usize,
    pub m: usize,
    pub ed: CMatrix,
    pub e1: CMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    /// `‖(1 − S₀²) − (2Q − QDQ)D‖_max`
    pub domain: f64,
    /// `‖(1 − S₁²) − D(2Q − QDQ)‖_max`
    pub codomain: f64,
    /// `‖QS₁ − S₀Q‖_max`
    pub intertwine_q: f64,
    /// `‖S₁D − DS₀‖_max`
    pub intertwine_d: f64,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.domain.max(self.codomain).max(self.intertwine_q).max(self.intertwine_d)
    }
}

fn check_finite(d: &CMatrix) -> Result<()> {
    if d.nrows() == 0 || d.ncols() == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    if d.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("non-finite matrix entry".into()));
    }
    Ok(())
}

fn check_shapes(d: &CMatrix, q: &CMatrix) -> Result<()> {
    check_finite(d)?;
    if q.nrows() != d.ncols() || q.ncols() != d.nrows() {
        return Err(Error::Shape(format!(
            "D is {}×{} but Q is {}×{}",
            d.nrows(),
            d.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    Ok(())
}

/// Largest-first singular values.
pub fn singular_values(d: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = d.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn resolve_tau(sigma: &[f64], tau: Option<f64>) -> Result<f64> {
    match tau {
        Some(t) if t > 0.0 && t.is_finite() => Ok(t),
        Some(t) => Err(Error::InvalidParameter(format!("threshold must be positive, got {t}"))),
        None => Ok(DEFAULT_RELATIVE_TAU * sigma.first().copied().unwrap_or(0.0).max(1.0)),
    }
}

/// Remainders for an arbitrary `Q`.
pub fn parametrix_from(d: &CMatrix, q: &CMatrix) -> Result<ParametrixData> {
    check_shapes(d, q)?;
    let (m, n) = d.shape();
    Ok(ParametrixData {
        s0: CMatrix::identity(n, n) - q * d,
        s1: CMatrix::identity(m, m) - d * q,
        q: q.clone(),
    })
}

/// Moore–Penrose pseudoinverse with singular values below `τ` treated as
/// zero; `S₀` and `S₁` are then the projections onto `ker D` and `ker D*`.
pub fn pseudo_parametrix(d: &CMatrix, tau: Option<f64>) -> Result<PseudoParametrix> {
    check_finite(d)?;
    let svd = d.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵗ");
    let mut sorted: Vec<f64> = svd.singular_values.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let tau = resolve_tau(&sorted, tau)?;

    let mut q = CMatrix::zeros(d.ncols(), d.nrows());
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s >= tau {
            rank += 1;
            q += v_t.row(i).adjoint() * u.column(i).adjoint() * C64::new(1.0 / s, 0.0);
        }
    }
    let kept = sorted.iter().copied().rfind(|&s| s >= tau);
    let dropped = sorted.iter().copied().find(|&s| s < tau);
    let cluster_split = match (kept, dropped) {
        (Some(lo), Some(hi)) => hi > 0.0 && lo / hi < CLUSTER_RATIO,
        _ => false,
    };
    if cluster_split {
        warn!("threshold {tau:e} separates singular values within a factor {CLUSTER_RATIO}; rank decision {rank} is fragile");
    }
    Ok(PseudoParametrix {
        data: parametrix_from(d, &q)?,
        tau,
        rank,
        cluster_split,
    })
}

/// `(dim ker D, dim ker D*)` from the singular values at threshold `τ`.
pub fn svd_index(d: &CMatrix, tau: Option<f64>) -> Result<(usize, usize)> {
    check_finite(d)?;
    let sigma = singular_values(d);
    let tau = resolve_tau(&sigma, tau)?;
    let rank = sigma.iter().filter(|&&s| s >= tau).count();
    Ok((d.ncols() - rank, d.nrows() - rank))
}

pub fn cs_idempotent(d: &CMatrix, q: &CMatrix) -> Result<IdempotentPair> {
    let ParametrixData { q, s0, s1 } = parametrix_from(d, q)?;
    let (m, n) = d.shape();
    let mut ed = CMatrix::zeros(n + m, n + m);
    let plus = CMatrix::identity(n, n) + &s0;
    ed.view_mut((0, 0), (n, n)).copy_from(&(&s0 * &s0));
    ed.view_mut((0, n), (n, m)).copy_from(&(&s0 * plus * &q));
    ed.view_mut((n, 0), (m, n)).copy_from(&(&s1 * d));
    ed.view_mut((n, n), (m, m)).copy_from(&(CMatrix::identity(m, m) - &s1 * &s1));
    let mut e1 = CMatrix::zeros(n + m, n + m);
    e1.view_mut((n, n), (m, m)).fill_with_identity();
    Ok(IdempotentPair { n, m, ed, e1 })
}

impl IdempotentPair {
    /// `‖e_D² − e_D‖_max`
    pub fn idempotency_defect(&self) -> f64 {
        (&self.ed * &self.ed - &self.ed).camax()
    }

    /// Defect scaled by `max(1, ‖e_D‖²_max)`. For a `Q` far from a
    /// parametrix the entries of `e_D` grow like `‖QD‖²` and the absolute
    /// defect only measures rounding in those products.
    pub fn relative_idempotency_defect(&self) -> f64 {
        self.idempotency_defect() / self.ed.camax().powi(2).max(1.0)
    }

    pub fn difference(&self) -> CMatrix {
        &self.ed - &self.e1
    }
}

pub fn verify_identities(d: &CMatrix, q: &CMatrix) -> Result<IdentityReport> {
    let ParametrixData { q, s0, s1 } = parametrix_from(d, q)?;
    let (m, n) = d.shape();
    let w = &q * C64::new(2.0, 0.0) - &q * d * &q;
    Ok(IdentityReport {
        domain: (CMatrix::identity(n, n) - &s0 * &s0 - &w * d).camax(),
        codomain: (CMatrix::identity(m, m) - &s1 * &s1 - d * &w).camax(),
        intertwine_q: (&q * &s1 - &s0 * &q).camax(),
        intertwine_d: (&s1 * d - d * &s0).camax(),
    })
}

/// `tr S₀² − tr S₁²`
pub fn index_trace(d: &CMatrix, q: &CMatrix) -> Result<f64> {
    let p = parametrix_from(d, q)?;
    Ok((&p.s0 * &p.s0).trace().re - (&p.s1 * &p.s1).trace().re)
}

/// A linear functional on the block algebra of `(n + m) × (n + m)` matrices.
pub trait TraceFunctional {
    fn apply(&self, a: &CMatrix) -> Result<C64>;
}

pub struct StandardTrace;

impl TraceFunctional for StandardTrace {
    fn apply(&self, a: &CMatrix) -> Result<C64> {
        if !a.is_square() {
            return Err(Error::Shape("trace of a non-square matrix".into()));
        }
        Ok(a.trace())
    }
}

pub struct ZeroTrace;

impl TraceFunctional for ZeroTrace {
    fn apply(&self, _: &CMatrix) -> Result<C64> {
        Ok(C64::new(0.0, 0.0))
    }
}

/// Pairing of `[e_D] − [e₁]` with a trace.
pub fn k_pairing(pair: &IdempotentPair, trace: &dyn TraceFunctional) -> Result<f64> {
    Ok(trace.apply(&pair.difference())?.re)
}
