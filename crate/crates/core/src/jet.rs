//! Second-order jets of differential forms at a base point.
//!
//! A jet carries a form together with its first (and optionally second)
//! coordinate derivatives along the base directions. Forms may live on a
//! larger ambient space (total space, fibre product) whose first `base_dim`
//! coordinates are the base coordinates; derivatives along the remaining
//! fibre coordinates vanish by invariance.

use crate::error::{GeomError, Result};
use crate::tensor_point::{index_combinations, wedge, Form};

#[derive(Debug, Clone, PartialEq)]
pub struct FormJet {
    pub value: Form,
    /// `grad[k] = ∂_k value`.
    pub grad: Vec<Form>,
    /// `hess[k][l] = ∂_k ∂_l value`, symmetric in `(k, l)`.
    pub hess: Option<Vec<Vec<Form>>>,
}

/// Scalars are rank-0 jets.
pub type ScalarJet = FormJet;

impl FormJet {
    pub fn new(value: Form, grad: Vec<Form>, hess: Option<Vec<Vec<Form>>>) -> Result<Self> {
        let shape = (value.dim(), value.rank());
        let bad = grad.iter().any(|g| (g.dim(), g.rank()) != shape)
            || hess.as_ref().is_some_and(|h| {
                h.len() != grad.len()
                    || h.iter().any(|row| row.len() != grad.len() || row.iter().any(|f| (f.dim(), f.rank()) != shape))
            });
        if bad || grad.len() > value.dim() {
            return Err(GeomError::DimensionMismatch("inconsistent jet shapes".into()));
        }
        if let Some(h) = &hess {
            for k in 0..grad.len() {
                for l in 0..k {
                    let defect = h[k][l].max_abs_diff(&h[l][k]);
                    if defect > 1e-12 * (1.0 + h[k][l].max_abs()) {
                        return Err(GeomError::SymmetryViolation(format!(
                            "second derivatives not symmetric, defect {defect:e}"
                        )));
                    }
                }
            }
        }
        Ok(Self { value, grad, hess })
    }

    /// Jet of a form that does not vary along the base.
    pub fn constant(value: Form, base_dim: usize) -> Self {
        let zero = Form::zero(value.dim(), value.rank());
        Self { grad: vec![zero.clone(); base_dim], hess: Some(vec![vec![zero; base_dim]; base_dim]), value }
    }

    pub fn zero(dim: usize, rank: usize, base_dim: usize) -> Self {
        Self::constant(Form::zero(dim, rank), base_dim)
    }

    /// Scalar jet from value, gradient and Hessian arrays.
    pub fn scalar(value: f64, grad: &[f64], hess: &[Vec<f64>]) -> Self {
        let m = grad.len();
        Self {
            value: Form::scalar(m, value),
            grad: grad.iter().map(|&g| Form::scalar(m, g)).collect(),
            hess: Some(hess.iter().map(|row| row.iter().map(|&x| Form::scalar(m, x)).collect()).collect()),
        }
    }

    pub fn base_dim(&self) -> usize {
        self.grad.len()
    }

    pub fn dim(&self) -> usize {
        self.value.dim()
    }

    pub fn rank(&self) -> usize {
        self.value.rank()
    }

    pub fn order(&self) -> usize {
        if self.hess.is_some() {
            2
        } else {
            1
        }
    }

    /// Drops the second-derivative layer.
    pub fn truncated(&self) -> Self {
        Self { value: self.value.clone(), grad: self.grad.clone(), hess: None }
    }

    pub fn scalar_value(&self) -> f64 {
        self.value.value()
    }

    /// `∂_k` of a scalar jet.
    pub fn d1(&self, k: usize) -> f64 {
        self.grad[k].value()
    }

    /// `∂_k ∂_l` of a scalar jet.
    pub fn d2(&self, k: usize, l: usize) -> f64 {
        self.hess.as_ref().expect("second-order jet required")[k][l].value()
    }

    pub fn grad_vector(&self) -> Vec<f64> {
        (0..self.base_dim()).map(|k| self.d1(k)).collect()
    }

    fn hess_or_err(&self) -> Result<&Vec<Vec<Form>>> {
        self.hess.as_ref().ok_or_else(|| GeomError::InvalidState("second-order jet required".into()))
    }

    fn map(&self, f: impl Fn(&Form) -> Form) -> Self {
        Self {
            value: f(&self.value),
            grad: self.grad.iter().map(&f).collect(),
            hess: self.hess.as_ref().map(|h| h.iter().map(|row| row.iter().map(&f).collect()).collect()),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&Form, &Form) -> Form) -> Self {
        assert_eq!(self.base_dim(), other.base_dim(), "jet base dimensions differ");
        let hess = match (&self.hess, &other.hess) {
            (Some(a), Some(b)) => {
                Some(a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| f(x, y)).collect()).collect())
            }
            _ => None,
        };
        Self {
            value: f(&self.value, &other.value),
            grad: self.grad.iter().zip(&other.grad).map(|(a, b)| f(a, b)).collect(),
            hess,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| a * s)
    }

    /// Embeds the jet into a larger ambient space (base coordinates first).
    pub fn lift(&self, dim: usize) -> Self {
        self.map(|a| a.lift(dim))
    }

    /// Restricts the jet to its first `dim` ambient coordinates.
    pub fn restrict(&self, dim: usize) -> Self {
        self.map(|a| a.restrict(dim))
    }

    /// Leibniz rule for the wedge product; the order is the smaller of the two.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let m = self.base_dim();
        if other.base_dim() != m {
            return Err(GeomError::DimensionMismatch("jet base dimensions differ".into()));
        }
        let value = wedge(&self.value, &other.value)?;
        let mut grad = Vec::with_capacity(m);
        for k in 0..m {
            grad.push(&wedge(&self.grad[k], &other.value)? + &wedge(&self.value, &other.grad[k])?);
        }
        let hess = match (&self.hess, &other.hess) {
            (Some(ha), Some(hb)) => {
                let mut rows = Vec::with_capacity(m);
                for k in 0..m {
                    let mut row = Vec::with_capacity(m);
                    for l in 0..m {
                        let mut acc = wedge(&ha[k][l], &other.value)?;
                        acc += &wedge(&self.grad[k], &other.grad[l])?;
                        acc += &wedge(&self.grad[l], &other.grad[k])?;
                        acc += &wedge(&self.value, &hb[k][l])?;
                        row.push(acc);
                    }
                    rows.push(row);
                }
                Some(rows)
            }
            _ => None,
        };
        Ok(Self { value, grad, hess })
    }

    /// Exterior derivative; the result has one order less.
    pub fn exterior_derivative(&self) -> Result<Self> {
        let value = exterior_from_partials(&self.grad, self.dim(), self.rank());
        let hess = self.hess_or_err()?;
        let grad = hess.iter().map(|row| exterior_from_partials(row, self.dim(), self.rank())).collect();
        Ok(Self { value, grad, hess: None })
    }

    /// Value of the exterior derivative (needs first derivatives only).
    pub fn exterior_derivative_value(&self) -> Form {
        exterior_from_partials(&self.grad, self.dim(), self.rank())
    }

    /// `1/u` for a positive or negative scalar jet.
    pub fn recip(&self) -> Result<Self> {
        self.scalar_chain(|u| (1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u)))
    }

    /// `ln u` for a positive scalar jet.
    pub fn ln(&self) -> Result<Self> {
        if self.scalar_value() <= 0.0 {
            return Err(GeomError::InvalidState("logarithm of a non-positive scalar".into()));
        }
        self.scalar_chain(|u| (u.ln(), 1.0 / u, -1.0 / (u * u)))
    }

    /// Composition with a scalar function given its value and first two derivatives.
    fn scalar_chain(&self, f: impl Fn(f64) -> (f64, f64, f64)) -> Result<Self> {
        if self.rank() != 0 {
            return Err(GeomError::RankMismatch { expected: 0, found: self.rank() });
        }
        let m = self.base_dim();
        let dim = self.dim();
        let u = self.scalar_value();
        let (f0, f1, f2) = f(u);
        let grad: Vec<f64> = (0..m).map(|k| f1 * self.d1(k)).collect();
        let hess = self.hess.as_ref().map(|_| {
            (0..m)
                .map(|k| (0..m).map(|l| Form::scalar(dim, f1 * self.d2(k, l) + f2 * self.d1(k) * self.d1(l))).collect())
                .collect()
        });
        Ok(Self { value: Form::scalar(dim, f0), grad: grad.into_iter().map(|g| Form::scalar(dim, g)).collect(), hess })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m = self.value.max_abs_diff(&other.value);
        for (a, b) in self.grad.iter().zip(&other.grad) {
            m = m.max(a.max_abs_diff(b));
        }
        if let (Some(ha), Some(hb)) = (&self.hess, &other.hess) {
            for (ra, rb) in ha.iter().zip(hb) {
                for (a, b) in ra.iter().zip(rb) {
                    m = m.max(a.max_abs_diff(b));
                }
            }
        }
        m
    }
}

/// `(dω)_{i_0…i_p} = Σ_a (-1)^a ∂_{i_a} ω_{i_0…î_a…i_p}`, with `partials[k] = ∂_k ω`
/// for base directions and zero derivative along the remaining coordinates.
fn exterior_from_partials(partials: &[Form], dim: usize, rank: usize) -> Form {
    let m = partials.len();
    let mut rest = Vec::with_capacity(rank);
    let combos = index_combinations(dim, rank + 1);
    let comps = combos
        .iter()
        .map(|idx| {
            let mut acc = 0.0;
            for a in 0..=rank {
                let i = idx[a];
                if i >= m {
                    continue;
                }
                rest.clear();
                rest.extend(idx.iter().enumerate().filter(|(b, _)| *b != a).map(|(_, &x)| x));
                let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * partials[i].get(&rest);
            }
            acc
        })
        .collect();
    Form::from_canonical(dim, rank + 1, comps).expect("exterior derivative shape")
}
