//! Finite model of Γ-traces for `Γ = Z/k` acting on a `k`-fold cover.
//!
//! The cover space of a base `Cⁿ` is `Cⁿᵏ = ⊕_{γ ∈ Z/k} Cⁿ`, and the deck
//! transformation `ρ` shifts block `γ` to block `γ + 1`. An operator is
//! equivariant when it commutes with `ρ`, which makes it block circulant.
//! The cutoffs localising the trace are the indicator of one block.

use rand::Rng;

use crate::fredholm::{parametrix_from, IdempotentPair, TraceFunctional};
use crate::random::{complex_normal_matrix, random_unitary};
use crate::{CMatrix, Error, Result, C64};

/// Rejection threshold for `‖ρT − Tρ‖_max / max(1, ‖T‖_max)`.
pub const EQUIVARIANCE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverModel {
    pub base_dim: usize,
    pub k: usize,
}

impl CoverModel {
    pub fn new(base_dim: usize, k: usize) -> Result<Self> {
        if base_dim == 0 || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "cover needs positive dimensions, got base {base_dim}, k {k}"
            )));
        }
        Ok(Self { base_dim, k })
    }

    pub fn dim(&self) -> usize {
        self.base_dim * self.k
    }

    /// The deck transformation as a permutation matrix.
    pub fn shift(&self) -> CMatrix {
        self.shift_power(1)
    }

    /// `ρʲ`
    pub fn shift_power(&self, j: usize) -> CMatrix {
        let n = self.base_dim;
        let mut p = CMatrix::zeros(self.dim(), self.dim());
        for b in 0..self.k {
            let to = (b + j) % self.k;
            for i in 0..n {
                p[(to * n + i, b * n + i)] = C64::new(1.0, 0.0);
            }
        }
        p
    }
}

/// A `Z/k`-equivariant map `C^{nk} → C^{mk}`.
#[derive(Clone, Debug)]
pub struct EquivariantMap {
    domain: CoverModel,
    codomain: CoverModel,
    matrix: CMatrix,
}

fn block_shift(a: &CMatrix, rows: usize, cols: usize, k: usize, shift_rows: bool) -> CMatrix {
    // ρT moves block rows down by one; Tρ moves block columns left by one
    let mut out = CMatrix::zeros(a.nrows(), a.ncols());
    for bi in 0..k {
        for bj in 0..k {
            let (si, sj) = if shift_rows { ((bi + k - 1) % k, bj) } else { (bi, (bj + 1) % k) };
            out.view_mut((bi * rows, bj * cols), (rows, cols))
                .copy_from(&a.view((si * rows, sj * cols), (rows, cols)));
        }
    }
    out
}

/// `‖ρT − Tρ‖_max / max(1, ‖T‖_max)` for a `(mk) × (nk)` matrix.
pub fn equivariance_defect(t: &CMatrix, n: usize, m: usize, k: usize) -> Result<f64> {
    if t.shape() != (m * k, n * k) {
        return Err(Error::Shape(format!(
            "expected {}×{}, got {}×{}",
            m * k,
            n * k,
            t.nrows(),
            t.ncols()
        )));
    }
    let diff = block_shift(t, m, n, k, true) - block_shift(t, m, n, k, false);
    Ok(diff.camax() / t.camax().max(1.0))
}

impl EquivariantMap {
    /// Wraps `t: C^{nk} → C^{mk}`, rejecting it if it does not commute with
    /// the deck transformations.
    pub fn new(t: CMatrix, n: usize, m: usize, k: usize) -> Result<Self> {
        let domain = CoverModel::new(n, k)?;
        let codomain = CoverModel::new(m, k)?;
        let defect = equivariance_defect(&t, n, m, k)?;
        if defect > EQUIVARIANCE_TOL {
            return Err(Error::NotEquivariant { defect });
        }
        Ok(Self {
            domain,
            codomain,
            matrix: t,
        })
    }

    /// Block-circulant map with `T_{ij} = B_{(i − j) mod k}`.
    pub fn block_circulant(blocks: &[CMatrix]) -> Result<Self> {
        let k = blocks.len();
        let (m, n) = blocks.first().ok_or_else(|| Error::Shape("no blocks".into()))?.shape();
        if blocks.iter().any(|b| b.shape() != (m, n)) {
            return Err(Error::Shape("blocks of differing shapes".into()));
        }
        let mut t = CMatrix::zeros(m * k, n * k);
        for i in 0..k {
            for j in 0..k {
                t.view_mut((i * m, j * n), (m, n)).copy_from(&blocks[(i + k - j) % k]);
            }
        }
        Self::new(t, n, m, k)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn k(&self) -> usize {
        self.domain.k
    }

    pub fn domain(&self) -> CoverModel {
        self.domain
    }

    pub fn codomain(&self) -> CoverModel {
        self.codomain
    }

    pub fn compose(&self, rhs: &EquivariantMap) -> Result<EquivariantMap> {
        if self.domain != rhs.codomain {
            return Err(Error::Shape("incompatible equivariant maps".into()));
        }
        Self::new(
            &self.matrix * &rhs.matrix,
            rhs.domain.base_dim,
            self.codomain.base_dim,
            self.k(),
        )
    }

    pub fn adjoint(&self) -> EquivariantMap {
        EquivariantMap {
            domain: self.codomain,
            codomain: self.domain,
            matrix: self.matrix.adjoint(),
        }
    }
}

/// Block-diagonal lift `diag(S, …, S)`.
pub fn lift_operator(s: &CMatrix, k: usize) -> Result<EquivariantMap> {
    let (m, n) = s.shape();
    let mut t = CMatrix::zeros(m * k, n * k);
    for b in 0..k {
        t.view_mut((b * m, b * n), (m, n)).copy_from(s);
    }
    EquivariantMap::new(t, n, m, k)
}

/// One block of the cover; its translates under `ρ` partition the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FundamentalDomain {
    pub cover: CoverModel,
    pub block: usize,
}

impl FundamentalDomain {
    pub fn new(cover: CoverModel, block: usize) -> Result<Self> {
        if block >= cover.k {
            return Err(Error::InvalidParameter(format!("block {block} outside Z/{}", cover.k)));
        }
        Ok(Self { cover, block })
    }

    /// `ρ 1_F ρ⁻¹`
    pub fn translate(&self) -> Self {
        Self {
            block: (self.block + 1) % self.cover.k,
            ..*self
        }
    }

    pub fn indicator(&self) -> CMatrix {
        let n = self.cover.base_dim;
        let mut p = CMatrix::zeros(self.cover.dim(), self.cover.dim());
        p.view_mut((self.block * n, self.block * n), (n, n)).fill_with_identity();
        p
    }

    /// `‖Σ_γ ρ^γ 1_F ρ^{−γ} − 1‖_max`
    pub fn partition_defect(&self) -> f64 {
        let one = self.indicator();
        let mut sum = CMatrix::zeros(one.nrows(), one.ncols());
        for g in 0..self.cover.k {
            let r = self.cover.shift_power(g);
            sum += &r * &one * r.adjoint();
        }
        (sum - CMatrix::identity(one.nrows(), one.ncols())).camax()
    }

    fn range(&self) -> std::ops::Range<usize> {
        let n = self.cover.base_dim;
        self.block * n..(self.block + 1) * n
    }
}

/// `tr_Γ(T) = Tr(1_F T 1_F)` for square equivariant `T`.
pub fn gamma_trace(t: &EquivariantMap, f: &FundamentalDomain) -> Result<C64> {
    if t.domain != t.codomain || t.domain != f.cover {
        return Err(Error::Shape("Γ-trace needs an endomorphism of the cover of F".into()));
    }
    Ok(f.range().map(|i| t.matrix[(i, i)]).sum())
}

/// `tr_Γ(S̃₀²) − tr_Γ(S̃₁²)` with the remainders of `(D̃, Q̃)` on the cover.
pub fn gamma_index(d: &EquivariantMap, q: &EquivariantMap) -> Result<f64> {
    if d.domain != q.codomain || d.codomain != q.domain {
        return Err(Error::Shape("D̃ and Q̃ shapes are incompatible".into()));
    }
    let p = parametrix_from(d.matrix(), q.matrix())?;
    let k = d.k();
    let s0 = EquivariantMap::new(&p.s0 * &p.s0, d.domain.base_dim, d.domain.base_dim, k)?;
    let s1 = EquivariantMap::new(&p.s1 * &p.s1, d.codomain.base_dim, d.codomain.base_dim, k)?;
    let f0 = FundamentalDomain::new(d.domain, 0)?;
    let f1 = FundamentalDomain::new(d.codomain, 0)?;
    Ok(gamma_trace(&s0, &f0)?.re - gamma_trace(&s1, &f1)?.re)
}

/// `tr_Γ` on block matrices over `C^{nk} ⊕ C^{mk}`, localised at one block
/// of each summand.
pub struct GammaTrace {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub block: usize,
}

impl GammaTrace {
    pub fn new(n: usize, m: usize, k: usize) -> Self {
        Self { n, m, k, block: 0 }
    }

    fn check(&self, a: &CMatrix) -> Result<()> {
        let (n, m, k) = (self.n * self.k, self.m * self.k, self.k);
        if a.shape() != (n + m, n + m) {
            return Err(Error::Shape(format!("expected {0}×{0}, got {1:?}", n + m, a.shape())));
        }
        let scale = a.camax().max(1.0);
        let blocks = [
            (a.view((0, 0), (n, n)).into_owned(), self.n, self.n),
            (a.view((0, n), (n, m)).into_owned(), self.m, self.n),
            (a.view((n, 0), (m, n)).into_owned(), self.n, self.m),
            (a.view((n, n), (m, m)).into_owned(), self.m, self.m),
        ];
        let mut defect: f64 = 0.0;
        for (b, cols, rows) in blocks {
            defect = defect.max(equivariance_defect(&b, cols, rows, k)? * b.camax().max(1.0) / scale);
        }
        if defect > EQUIVARIANCE_TOL {
            return Err(Error::NotEquivariant { defect });
        }
        Ok(())
    }
}

impl TraceFunctional for GammaTrace {
    fn apply(&self, a: &CMatrix) -> Result<C64> {
        self.check(a)?;
        let top = (self.block * self.n..(self.block + 1) * self.n).map(|i| a[(i, i)]);
        let off = self.n * self.k;
        let bottom = (self.block * self.m..(self.block + 1) * self.m).map(|i| a[(off + i, off + i)]);
        Ok(top.chain(bottom).sum())
    }
}

/// `tr_Γ(e_D − e₁)` for a pair built on the cover.
pub fn induced_trace_on_k(pair: &IdempotentPair, k: usize) -> Result<f64> {
    if k == 0 || !pair.n.is_multiple_of(k) || !pair.m.is_multiple_of(k) {
        return Err(Error::Shape(format!("pair of size {}+{} is not a {k}-fold cover", pair.n, pair.m)));
    }
    crate::fredholm::k_pairing(pair, &GammaTrace::new(pair.n / k, pair.m / k, k))
}

/// Random block-circulant map with complex normal blocks.
pub fn random_equivariant<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize, k: usize) -> Result<EquivariantMap> {
    let blocks: Vec<CMatrix> = (0..k).map(|_| complex_normal_matrix(rng, m, n)).collect();
    EquivariantMap::block_circulant(&blocks)
}

/// Equivariant unitary `diag(lift(U_n)ρ_n, lift(U_m)ρ_m²)` on
/// `C^{nk} ⊕ C^{mk}`.
pub fn random_equivariant_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize, k: usize) -> Result<CMatrix> {
    let un = lift_operator(&random_unitary(rng, n), k)?;
    let um = lift_operator(&random_unitary(rng, m), k)?;
    let cn = CoverModel::new(n, k)?;
    let cm = CoverModel::new(m, k)?;
    let a = un.matrix() * cn.shift();
    let b = um.matrix() * cm.shift_power(2);
    let mut u = CMatrix::zeros(cn.dim() + cm.dim(), cn.dim() + cm.dim());
    u.view_mut((0, 0), (cn.dim(), cn.dim())).copy_from(&a);
    u.view_mut((cn.dim(), cn.dim()), (cm.dim(), cm.dim())).copy_from(&b);
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fredholm::{cs_idempotent, index_trace, pseudo_parametrix, StandardTrace};
    use crate::random::seeded_rng;

    #[test]
    fn shift_is_a_unitary_of_order_k() {
        let c = CoverModel::new(2, 3).unwrap();
        let r = c.shift();
        assert_eq!(&r * r.adjoint(), CMatrix::identity(6, 6));
        assert_eq!(c.shift_power(3), CMatrix::identity(6, 6));
        assert_eq!(&r * &r * &r, CMatrix::identity(6, 6));
    }

    #[test]
    fn equivariance_matches_shift_matrices() {
        let mut rng = seeded_rng(1, 0);
        let t = random_equivariant(&mut rng, 2, 3, 4).unwrap();
        let rn = CoverModel::new(2, 4).unwrap().shift();
        let rm = CoverModel::new(3, 4).unwrap().shift();
        assert!((rm * t.matrix() - t.matrix() * rn).camax() < 1e-15);
        let bad = complex_normal_matrix(&mut rng, 12, 8);
        assert!(matches!(EquivariantMap::new(bad, 2, 3, 4), Err(Error::NotEquivariant { .. })));
    }

    #[test]
    fn lifts() {
        let id = lift_operator(&CMatrix::identity(2, 2), 3).unwrap();
        assert_eq!(id.matrix(), &CMatrix::identity(6, 6));
        let mut rng = seeded_rng(2, 0);
        let a = complex_normal_matrix(&mut rng, 3, 4);
        let b = complex_normal_matrix(&mut rng, 4, 2);
        let lab = lift_operator(&(&a * &b), 3).unwrap();
        let la_lb = lift_operator(&a, 3).unwrap().compose(&lift_operator(&b, 3).unwrap()).unwrap();
        assert!((lab.matrix() - la_lb.matrix()).camax() < 1e-14);
    }

    #[test]
    fn gamma_trace_normalisation_and_translation() {
        let mut rng = seeded_rng(3, 0);
        let s = complex_normal_matrix(&mut rng, 4, 4);
        let l = lift_operator(&s, 3).unwrap();
        let f = FundamentalDomain::new(l.domain(), 0).unwrap();
        assert!(f.partition_defect() == 0.0);
        let g = gamma_trace(&l, &f).unwrap();
        assert!((g - s.trace()).norm() < 1e-12);
        assert!((g - l.matrix().trace() / 3.0).norm() < 1e-12);
        let t = random_equivariant(&mut rng, 4, 4, 3).unwrap();
        let a = gamma_trace(&t, &f).unwrap();
        let b = gamma_trace(&t, &f.translate()).unwrap();
        assert!((a - b).norm() < 1e-13);
        let id = lift_operator(&CMatrix::identity(4, 4), 3).unwrap();
        assert_eq!(gamma_trace(&id, &f).unwrap(), C64::new(4.0, 0.0));
    }

    #[test]
    fn index_chain_on_lifts() {
        let mut rng = seeded_rng(4, 0);
        for k in [1, 2, 3] {
            let d = complex_normal_matrix(&mut rng, 3, 5);
            let q = pseudo_parametrix(&d, None).unwrap().data.q;
            let dt = lift_operator(&d, k).unwrap();
            let qt = lift_operator(&q, k).unwrap();
            let base = index_trace(&d, &q).unwrap();
            let gi = gamma_index(&dt, &qt).unwrap();
            let pair = cs_idempotent(dt.matrix(), qt.matrix()).unwrap();
            let kt = induced_trace_on_k(&pair, k).unwrap();
            assert!((gi - base).abs() < 1e-10 && (kt - base).abs() < 1e-10);
            if k == 1 {
                let plain = crate::fredholm::k_pairing(&pair, &StandardTrace).unwrap();
                assert!((kt - plain).abs() < 1e-12);
            }
            let u = random_equivariant_unitary(&mut rng, 5, 3, k).unwrap();
            let conj = IdempotentPair {
                ed: &u * &pair.ed * u.adjoint(),
                e1: &u * &pair.e1 * u.adjoint(),
                ..pair.clone()
            };
            assert!((induced_trace_on_k(&conj, k).unwrap() - base).abs() < 1e-10);
        }
    }

    #[test]
    fn e1_only_pair_has_zero_trace() {
        let mut e1 = CMatrix::zeros(10, 10);
        e1.view_mut((4, 4), (6, 6)).fill_with_identity();
        let pair = IdempotentPair {
            n: 4,
            m: 6,
            ed: e1.clone(),
            e1,
        };
        assert_eq!(induced_trace_on_k(&pair, 2).unwrap(), 0.0);
    }

    #[test]
    fn invertible_lift_has_zero_gamma_index() {
        let mut rng = seeded_rng(5, 0);
        let d = complex_normal_matrix(&mut rng, 4, 4);
        let q = d.clone().try_inverse().unwrap();
        let gi = gamma_index(&lift_operator(&d, 2).unwrap(), &lift_operator(&q, 2).unwrap()).unwrap();
        assert!(gi.abs() < 1e-10);
    }
}
