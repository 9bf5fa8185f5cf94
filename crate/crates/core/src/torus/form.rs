use std::collections::BTreeMap;

use super::function::{spectral_derivative, GridFunction};
use super::grid::Grid;
use crate::{Error, Result, C64};

/// Strictly increasing multi-indices of length `degree` drawn from `0..dim`,
/// in lexicographic order.
pub fn multi_indices(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(i + 1, dim, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if degree <= dim {
        rec(0, dim, degree, &mut Vec::new(), &mut out);
    }
    out
}

/// Sign of the shuffle that sorts `a ++ b`, or `None` when they overlap.
fn shuffle_sign(a: &[usize], b: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mut inversions = 0usize;
    for &i in a {
        for &j in b {
            if i == j {
                return None;
            }
            if i > j {
                inversions += 1;
            }
        }
    }
    let mut merged: Vec<usize> = a.iter().chain(b).copied().collect();
    merged.sort_unstable();
    let sign = if inversions.is_multiple_of(2) { 1.0 } else { -1.0 };
    Some((sign, merged))
}

/// Differential form of fixed degree with one scalar coefficient per sorted
/// basis multi-index (`dx_I = dx_{i1} ∧ … ∧ dx_{ip}`).
#[derive(Clone, Debug, PartialEq)]
pub struct DiffForm {
    grid: Grid,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, GridFunction>,
}

impl DiffForm {
    pub fn zero(grid: &Grid, degree: usize) -> Result<Self> {
        if degree > grid.dim() {
            return Err(Error::Degree {
                degree,
                reason: format!("exceeds dimension {}", grid.dim()),
            });
        }
        let coeffs = multi_indices(grid.dim(), degree)
            .into_iter()
            .map(|i| (i, GridFunction::zeros(grid, 1)))
            .collect();
        Ok(Self {
            grid: grid.clone(),
            degree,
            coeffs,
        })
    }

    /// Builds a form from `(multi-index, coefficient)` pairs; missing basis
    /// elements are zero.
    pub fn from_coeffs(
        grid: &Grid,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, GridFunction)>,
    ) -> Result<Self> {
        let mut form = Self::zero(grid, degree)?;
        for (idx, f) in terms {
            form.set(&idx, f)?;
        }
        Ok(form)
    }

    pub fn function(f: GridFunction) -> Result<Self> {
        let grid = f.grid().clone();
        Self::from_coeffs(&grid, 0, [(vec![], f)])
    }

    /// `Σ_i a_i dx_i`.
    pub fn one_form(grid: &Grid, components: Vec<GridFunction>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::Shape(format!(
                "{} components for dimension {}",
                components.len(),
                grid.dim()
            )));
        }
        Self::from_coeffs(
            grid,
            1,
            components.into_iter().enumerate().map(|(i, f)| (vec![i], f)),
        )
    }

    /// Constant-coefficient basis form `dx_I`.
    pub fn basis(grid: &Grid, idx: &[usize]) -> Result<Self> {
        Self::from_coeffs(
            grid,
            idx.len(),
            [(idx.to_vec(), GridFunction::constant(grid, C64::new(1.0, 0.0)))],
        )
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Vec<usize>, &GridFunction)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, idx: &[usize]) -> &GridFunction {
        self.coeffs
            .get(idx)
            .unwrap_or_else(|| panic!("{idx:?} is not a basis index of this form"))
    }

    pub fn set(&mut self, idx: &[usize], f: GridFunction) -> Result<()> {
        if f.grid() != &self.grid || f.channels() != 1 {
            return Err(Error::GridMismatch);
        }
        match self.coeffs.get_mut(idx) {
            Some(slot) => {
                *slot = f;
                Ok(())
            }
            None => Err(Error::Degree {
                degree: self.degree,
                reason: format!("{idx:?} is not a sorted basis index"),
            }),
        }
    }

    /// Coefficient of the top form `dx_0 ∧ … ∧ dx_{d-1}`.
    pub fn top_coeff(&self) -> Result<&GridFunction> {
        if self.degree != self.grid.dim() {
            return Err(Error::Degree {
                degree: self.degree,
                reason: "not a top-degree form".into(),
            });
        }
        Ok(self.coeffs.values().next().expect("top form has one coefficient"))
    }

    fn zip_with(&self, other: &DiffForm, f: impl Fn(&GridFunction, &GridFunction) -> GridFunction) -> Result<DiffForm> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::Degree {
                degree: other.degree,
                reason: format!("cannot combine with degree {}", self.degree),
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(i, a)| (i.clone(), f(a, &other.coeffs[i])))
            .collect();
        Ok(DiffForm {
            grid: self.grid.clone(),
            degree: self.degree,
            coeffs,
        })
    }

    pub fn add(&self, other: &DiffForm) -> Result<DiffForm> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DiffForm) -> Result<DiffForm> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> DiffForm {
        self.map_coeffs(|c| c.scale(s))
    }

    /// Multiplies every coefficient by the scalar function `phi`.
    pub fn mul_function(&self, phi: &GridFunction) -> Result<DiffForm> {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.mul_scalar_field(phi)?;
        }
        Ok(out)
    }

    pub fn map_coeffs(&self, f: impl Fn(&GridFunction) -> GridFunction) -> DiffForm {
        DiffForm {
            grid: self.grid.clone(),
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(i, c)| (i.clone(), f(c))).collect(),
        }
    }

    /// Largest coefficient magnitude over all basis elements and points.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn max_imag(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.max_imag()))
    }

    pub fn d(&self) -> Result<DiffForm> {
        exterior_derivative(self)
    }

    pub fn wedge(&self, other: &DiffForm) -> Result<DiffForm> {
        wedge(self, other)
    }
}

/// Exterior derivative `d(f dx_I) = Σ_j ∂_j f dx_j ∧ dx_I`.
pub fn exterior_derivative(form: &DiffForm) -> Result<DiffForm> {
    let dim = form.grid.dim();
    if form.degree >= dim {
        return Err(Error::Degree {
            degree: form.degree,
            reason: "exterior derivative of a top form".into(),
        });
    }
    let mut out = DiffForm::zero(&form.grid, form.degree + 1)?;
    for axis in 0..dim {
        for (idx, f) in &form.coeffs {
            let Some((sign, merged)) = shuffle_sign(&[axis], idx) else {
                continue;
            };
            if f.max_abs() == 0.0 {
                continue;
            }
            let df = spectral_derivative(f, axis)?;
            let slot = out.coeffs.get_mut(&merged).expect("basis index");
            *slot = slot.axpy(C64::new(sign, 0.0), &df)?;
        }
    }
    Ok(out)
}

/// Pointwise wedge product with shuffle signs.
pub fn wedge(a: &DiffForm, b: &DiffForm) -> Result<DiffForm> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let degree = a.degree + b.degree;
    if degree > a.grid.dim() {
        return Err(Error::Degree {
            degree,
            reason: format!("wedge overflows dimension {}", a.grid.dim()),
        });
    }
    let mut out = DiffForm::zero(&a.grid, degree)?;
    for (ia, fa) in &a.coeffs {
        for (ib, fb) in &b.coeffs {
            let Some((sign, merged)) = shuffle_sign(ia, ib) else {
                continue;
            };
            let prod = fa.mul_scalar_field(fb)?;
            let slot = out.coeffs.get_mut(&merged).expect("basis index");
            *slot = slot.axpy(C64::new(sign, 0.0), &prod)?;
        }
    }
    Ok(out)
}

/// Trapezoid integral of a top-degree form over the torus.
pub fn integrate_top(form: &DiffForm) -> Result<C64> {
    Ok(form.top_coeff()?.integrate()[0])
}
