//! Pointwise multilinear algebra on a tangent space of small dimension.
//!
//! Differential forms are stored canonically: one component per strictly
//! increasing index tuple, in lexicographic order. Reads at arbitrary index
//! tuples are expanded on the fly with the permutation sign. Wedge products
//! use the determinant convention, so `dx^0 ∧ dx^1` has component `+1` at
//! `(0, 1)`, and inner products contract every index with no `1/p!` factor.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

/// Largest ambient dimension a [`Form`] is used with (a 4-dimensional base
/// plus two fibre directions on the fibre product).
pub const MAX_DIM: usize = 8;

/// Relative symmetry tolerance accepted by [`BaseMetric::new`] and [`SymTwoTensor::new`].
pub const SYMMETRY_TOL: f64 = 1e-14;

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All strictly increasing `rank`-tuples drawn from `0..dim`, lexicographically.
pub fn index_combinations(dim: usize, rank: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(dim, rank));
    let mut current = Vec::with_capacity(rank);
    fn rec(start: usize, dim: usize, rank: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == rank {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(i + 1, dim, rank, cur, out);
            cur.pop();
        }
    }
    rec(0, dim, rank, &mut current, &mut out);
    out
}

/// Lexicographic position of a strictly increasing tuple.
fn canonical_position(dim: usize, sorted: &[usize]) -> usize {
    let p = sorted.len();
    let mut pos = 0;
    let mut prev: isize = -1;
    for (i, &c) in sorted.iter().enumerate() {
        for j in (prev + 1) as usize..c {
            pos += binomial(dim - 1 - j, p - 1 - i);
        }
        prev = c as isize;
    }
    pos
}

/// Sorts `idx` into `buf`, returning the permutation sign, or `None` on a repeated index.
fn sort_with_sign(idx: &[usize], buf: &mut [usize; MAX_DIM]) -> Option<f64> {
    let n = idx.len();
    buf[..n].copy_from_slice(idx);
    let mut sign = 1.0;
    for i in 1..n {
        let mut j = i;
        while j > 0 && buf[j - 1] > buf[j] {
            buf.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for i in 1..n {
        if buf[i - 1] == buf[i] {
            return None;
        }
    }
    Some(sign)
}

/// A totally antisymmetric covariant tensor (a `p`-form) at a point.
#[derive(Clone, PartialEq)]
pub struct Form {
    dim: usize,
    rank: usize,
    comps: Vec<f64>,
}

/// One-forms, two-forms and three-forms share the [`Form`] representation;
/// the rank is checked at run time.
pub type OneForm = Form;
pub type TwoForm = Form;
pub type ThreeForm = Form;

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form(dim={}, rank={}, {:?})", self.dim, self.rank, self.comps)
    }
}

impl Form {
    pub fn zero(dim: usize, rank: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds MAX_DIM");
        Self { dim, rank, comps: vec![0.0; binomial(dim, rank)] }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        Self { dim, rank: 0, comps: vec![value] }
    }

    /// Builds a form from its values on strictly increasing index tuples.
    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds MAX_DIM");
        let comps = index_combinations(dim, rank).iter().map(|c| f(c)).collect();
        Self { dim, rank, comps }
    }

    pub fn from_canonical(dim: usize, rank: usize, comps: Vec<f64>) -> Result<Self> {
        if comps.len() != binomial(dim, rank) {
            return Err(GeomError::DimensionMismatch(format!(
                "{} canonical components for a rank-{rank} form in dimension {dim}",
                comps.len()
            )));
        }
        Ok(Self { dim, rank, comps })
    }

    pub fn one_form(comps: &[f64]) -> Self {
        Self { dim: comps.len(), rank: 1, comps: comps.to_vec() }
    }

    /// Basis covector `dx^i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut f = Self::zero(dim, 1);
        f.comps[i] = 1.0;
        f
    }

    /// Reads a two-form off an antisymmetric matrix, rejecting asymmetric input.
    pub fn from_antisymmetric(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(GeomError::DimensionMismatch("two-form matrix not square".into()));
        }
        let defect = (m + m.transpose()).amax();
        if defect > SYMMETRY_TOL * m.amax().max(1.0) {
            return Err(GeomError::SymmetryViolation(format!("two-form matrix, defect {defect:e}")));
        }
        Ok(Self::from_fn(n, 2, |ij| m[(ij[0], ij[1])]))
    }

    /// Canonical projection of a dense array: keeps the entries at increasing tuples.
    pub fn from_dense(dim: usize, rank: usize, dense: &[f64]) -> Self {
        Self::from_fn(dim, rank, |idx| dense[dense_offset(dim, idx)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    /// Value at the scalar slot of a 0-form.
    pub fn value(&self) -> f64 {
        debug_assert_eq!(self.rank, 0);
        self.comps[0]
    }

    /// Component at an arbitrary index tuple.
    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.rank);
        let mut buf = [0usize; MAX_DIM];
        match sort_with_sign(idx, &mut buf) {
            Some(sign) => sign * self.comps[canonical_position(self.dim, &buf[..idx.len()])],
            None => 0.0,
        }
    }

    /// Sets the component at an increasing tuple (and, implicitly, all its permutations).
    pub fn set(&mut self, idx: &[usize], value: f64) {
        let mut buf = [0usize; MAX_DIM];
        let sign = sort_with_sign(idx, &mut buf).expect("repeated index in Form::set");
        let pos = canonical_position(self.dim, &buf[..idx.len()]);
        self.comps[pos] = sign * value;
    }

    /// Full antisymmetric array, row-major over `rank` indices.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim.pow(self.rank as u32);
        let mut out = vec![0.0; n];
        let mut idx = vec![0usize; self.rank];
        for (flat, slot) in out.iter_mut().enumerate() {
            unflatten(flat, self.dim, &mut idx);
            *slot = self.get(&idx);
        }
        out
    }

    /// Dense antisymmetric matrix of a two-form.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank, 2, "to_matrix needs a two-form");
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(&[i, j]))
    }

    pub fn to_vector(&self) -> DVector<f64> {
        assert_eq!(self.rank, 1, "to_vector needs a one-form");
        DVector::from_column_slice(&self.comps)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn max_abs_diff(&self, other: &Form) -> f64 {
        assert_eq!((self.dim, self.rank), (other.dim, other.rank), "form shape mismatch");
        self.comps.iter().zip(&other.comps).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Same components viewed in a larger ambient space whose first
    /// `self.dim()` coordinates are the original ones.
    pub fn lift(&self, dim: usize) -> Form {
        assert!(dim >= self.dim);
        Form::from_fn(dim, self.rank, |idx| if idx.iter().all(|&i| i < self.dim) { self.get(idx) } else { 0.0 })
    }

    /// Components restricted to the first `dim` coordinates.
    pub fn restrict(&self, dim: usize) -> Form {
        assert!(dim <= self.dim);
        Form::from_fn(dim, self.rank, |idx| self.get(idx))
    }

    fn check_shape(&self, other: &Form) {
        assert_eq!((self.dim, self.rank), (other.dim, other.rank), "form shape mismatch in arithmetic");
    }
}

pub(crate) fn unflatten(mut flat: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

pub(crate) fn dense_offset(dim: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

impl Add for &Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        self.check_shape(rhs);
        let comps = self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect();
        Form { dim: self.dim, rank: self.rank, comps }
    }
}

impl Sub for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        self.check_shape(rhs);
        let comps = self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect();
        Form { dim: self.dim, rank: self.rank, comps }
    }
}

impl Add for Form {
    type Output = Form;
    fn add(self, rhs: Form) -> Form {
        &self + &rhs
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, rhs: Form) -> Form {
        &self - &rhs
    }
}

impl AddAssign<&Form> for Form {
    fn add_assign(&mut self, rhs: &Form) {
        self.check_shape(rhs);
        for (a, b) in self.comps.iter_mut().zip(&rhs.comps) {
            *a += b;
        }
    }
}

impl SubAssign<&Form> for Form {
    fn sub_assign(&mut self, rhs: &Form) {
        self.check_shape(rhs);
        for (a, b) in self.comps.iter_mut().zip(&rhs.comps) {
            *a -= b;
        }
    }
}

impl Mul<f64> for &Form {
    type Output = Form;
    fn mul(self, s: f64) -> Form {
        Form { dim: self.dim, rank: self.rank, comps: self.comps.iter().map(|c| c * s).collect() }
    }
}

impl Mul<f64> for Form {
    type Output = Form;
    fn mul(self, s: f64) -> Form {
        &self * s
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self * -1.0
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        &self * -1.0
    }
}

/// Riemannian metric on the base tangent space, with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMetric {
    g: DMatrix<f64>,
    inv: DMatrix<f64>,
}

impl BaseMetric {
    /// Accepts symmetric positive-definite matrices only.
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        let n = g.nrows();
        if g.ncols() != n || n == 0 {
            return Err(GeomError::DimensionMismatch("metric must be square and non-empty".into()));
        }
        let scale = g.amax().max(f64::MIN_POSITIVE);
        let defect = (&g - g.transpose()).amax();
        if defect > SYMMETRY_TOL * scale {
            return Err(GeomError::SymmetryViolation(format!("metric, defect {defect:e}")));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::DegenerateMetric);
        }
        let chol = g.clone().cholesky().ok_or(GeomError::DegenerateMetric)?;
        let inv = g.clone().try_inverse().unwrap_or_else(|| chol.inverse());
        let inv = (&inv + inv.transpose()) * 0.5;
        Ok(Self { g, inv })
    }

    pub fn identity(n: usize) -> Self {
        Self { g: DMatrix::identity(n, n), inv: DMatrix::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inv
    }

    /// `v^i = h^{ij} α_j`.
    pub fn raise(&self, alpha: &Form) -> Result<DVector<f64>> {
        expect_rank(alpha, 1)?;
        self.expect_dim(alpha.dim())?;
        Ok(&self.inv * alpha.to_vector())
    }

    /// `α_i = h_{ij} v^j`.
    pub fn lower(&self, v: &DVector<f64>) -> Result<Form> {
        self.expect_dim(v.len())?;
        Ok(Form::one_form((&self.g * v).as_slice()))
    }

    /// Dense array of a form with every index raised.
    pub fn raise_all(&self, form: &Form) -> Result<Vec<f64>> {
        self.expect_dim(form.dim())?;
        let mut dense = form.to_dense();
        for slot in 0..form.rank() {
            dense = contract_slot(&dense, form.dim(), form.rank(), slot, &self.inv);
        }
        Ok(dense)
    }

    /// Dense array of a form with every index but the first raised.
    pub fn raise_tail(&self, form: &Form) -> Result<Vec<f64>> {
        self.expect_dim(form.dim())?;
        let mut dense = form.to_dense();
        for slot in 1..form.rank() {
            dense = contract_slot(&dense, form.dim(), form.rank(), slot, &self.inv);
        }
        Ok(dense)
    }

    /// Lowers every index of a dense contravariant array.
    pub fn lower_all(&self, dense: &[f64], rank: usize) -> Result<Vec<f64>> {
        let n = self.dim();
        if dense.len() != n.pow(rank as u32) {
            return Err(GeomError::DimensionMismatch("dense tensor size".into()));
        }
        let mut out = dense.to_vec();
        for slot in 0..rank {
            out = contract_slot(&out, n, rank, slot, &self.g);
        }
        Ok(out)
    }

    fn expect_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(GeomError::DimensionMismatch(format!(
                "metric dimension {} vs tensor dimension {d}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Applies `m` to one slot of a dense rank-`rank` array: `out_{..a..} = m_{ab} t_{..b..}`.
fn contract_slot(t: &[f64], dim: usize, rank: usize, slot: usize, m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = vec![0.0; t.len()];
    let mut idx = vec![0usize; rank];
    for (flat, o) in out.iter_mut().enumerate() {
        unflatten(flat, dim, &mut idx);
        let a = idx[slot];
        let mut acc = 0.0;
        for b in 0..dim {
            idx[slot] = b;
            acc += m[(a, b)] * t[dense_offset(dim, &idx)];
        }
        *o = acc;
    }
    out
}

/// Symmetric covariant two-tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTwoTensor(DMatrix<f64>);

impl SymTwoTensor {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(GeomError::DimensionMismatch("symmetric tensor must be square".into()));
        }
        let defect = (&m - m.transpose()).amax();
        if defect > SYMMETRY_TOL * m.amax().max(1.0) {
            return Err(GeomError::SymmetryViolation(format!("symmetric tensor, defect {defect:e}")));
        }
        Ok(Self(m))
    }

    /// Symmetric part of an arbitrary square matrix.
    pub fn symmetrized(m: DMatrix<f64>) -> Self {
        Self((&m + m.transpose()) * 0.5)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// `h^{ij} T_{ij}`.
    pub fn trace(&self, h: &BaseMetric) -> f64 {
        h.inverse().component_mul(&self.0).sum()
    }
}

pub(crate) fn expect_rank(form: &Form, rank: usize) -> Result<()> {
    if form.rank() != rank {
        return Err(GeomError::RankMismatch { expected: rank, found: form.rank() });
    }
    Ok(())
}

/// Full contraction `a_{i…} b_{j…} h^{ij}⋯` of two forms of equal rank.
pub fn inner(a: &Form, b: &Form, h: &BaseMetric) -> Result<f64> {
    expect_rank(b, a.rank())?;
    if a.dim() != b.dim() {
        return Err(GeomError::DimensionMismatch("inner product operands".into()));
    }
    let raised = h.raise_all(b)?;
    Ok(a.to_dense().iter().zip(&raised).map(|(x, y)| x * y).sum())
}

/// `(v ⌟ ω)_{j…} = v^i ω_{i j…}`.
pub fn interior(v: &[f64], omega: &Form) -> Result<Form> {
    if omega.rank() == 0 {
        return Err(GeomError::RankMismatch { expected: 1, found: 0 });
    }
    if v.len() != omega.dim() {
        return Err(GeomError::DimensionMismatch("interior product vector".into()));
    }
    let mut idx = vec![0usize; omega.rank()];
    Ok(Form::from_fn(omega.dim(), omega.rank() - 1, |rest| {
        idx[1..].copy_from_slice(rest);
        v.iter()
            .enumerate()
            .filter(|(_, vi)| **vi != 0.0)
            .map(|(i, vi)| {
                idx[0] = i;
                vi * omega.get(&idx)
            })
            .sum()
    }))
}

/// Interior product with the metric dual `α^♯` of a one-form.
pub fn interior_raised(alpha: &Form, h: &BaseMetric, omega: &Form) -> Result<Form> {
    let v = h.raise(alpha)?;
    interior(v.as_slice(), omega)
}

/// Largest total rank accepted by [`wedge`].
pub const MAX_WEDGE_RANK: usize = 3;

/// Antisymmetrized product in the determinant convention.
pub fn wedge(alpha: &Form, beta: &Form) -> Result<Form> {
    let (p, q) = (alpha.rank(), beta.rank());
    if p + q > MAX_WEDGE_RANK {
        return Err(GeomError::UnsupportedRank(p + q));
    }
    if alpha.dim() != beta.dim() {
        return Err(GeomError::DimensionMismatch("wedge operands".into()));
    }
    Ok(wedge_unchecked(alpha, beta))
}

/// Shuffle-sum wedge without the rank cap.
pub(crate) fn wedge_unchecked(alpha: &Form, beta: &Form) -> Form {
    let (p, q) = (alpha.rank(), beta.rank());
    let shuffles: Vec<(Vec<usize>, Vec<usize>, f64)> = index_combinations(p + q, p)
        .into_iter()
        .map(|left| {
            let right: Vec<usize> = (0..p + q).filter(|i| !left.contains(i)).collect();
            // Sign of the permutation (left, right) of 0..p+q.
            let inversions: usize = left.iter().map(|&l| right.iter().filter(|&&r| r < l).count()).sum();
            let sign = if inversions.is_multiple_of(2) { 1.0 } else { -1.0 };
            (left, right, sign)
        })
        .collect();
    let mut ia = vec![0usize; p];
    let mut ib = vec![0usize; q];
    Form::from_fn(alpha.dim(), p + q, |idx| {
        shuffles
            .iter()
            .map(|(l, r, s)| {
                for (k, &pos) in l.iter().enumerate() {
                    ia[k] = idx[pos];
                }
                for (k, &pos) in r.iter().enumerate() {
                    ib[k] = idx[pos];
                }
                s * alpha.get(&ia) * beta.get(&ib)
            })
            .sum()
    })
}
