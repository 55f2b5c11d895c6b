//! Generalized metrics on `T ⊕ T*` with the neutral pairing
//! `J = [[0, I], [I, 0]]`, their Lie algebra variations, and Bismut data.

use nalgebra::DMatrix;

use crate::base_geometry::Christoffel;
use crate::error::{GeomError, Result};
use crate::tensor_point::Form;

const STRUCTURE_TOL: f64 = 1e-12;

/// Neutral pairing on `T ⊕ T*`.
pub fn pairing(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

fn block(m: &DMatrix<f64>, r: usize, c: usize, n: usize) -> DMatrix<f64> {
    m.view((r * n, c * n), (n, n)).into_owned()
}

fn from_blocks(tl: &DMatrix<f64>, tr: &DMatrix<f64>, bl: &DMatrix<f64>, br: &DMatrix<f64>) -> DMatrix<f64> {
    let n = tl.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(tl);
    out.view_mut((0, n), (n, n)).copy_from(tr);
    out.view_mut((n, 0), (n, n)).copy_from(bl);
    out.view_mut((n, n), (n, n)).copy_from(br);
    out
}

fn check_square(m: &DMatrix<f64>, n: usize, what: &str) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(GeomError::DimensionMismatch(format!("{what} must be {n}×{n}")));
    }
    Ok(())
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let d = (m - m.transpose()).amax();
    if d > STRUCTURE_TOL * m.amax().max(1.0) {
        return Err(GeomError::SymmetryViolation(format!("{what} not symmetric, defect {d:e}")));
    }
    Ok(())
}

fn check_antisymmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let d = (m + m.transpose()).amax();
    if d > STRUCTURE_TOL * m.amax().max(1.0) {
        return Err(GeomError::SymmetryViolation(format!("{what} not antisymmetric, defect {d:e}")));
    }
    Ok(())
}

/// The b-field transform `e^b = [[I, 0], [b, I]]`.
fn b_transform(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    from_blocks(&DMatrix::identity(n, n), &DMatrix::zeros(n, n), b, &DMatrix::identity(n, n))
}

/// `G = [[−g⁻¹b, g⁻¹], [g − bg⁻¹b, bg⁻¹]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedMetric {
    g: DMatrix<f64>,
    b: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    matrix: DMatrix<f64>,
}

/// Residuals of the defining properties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedMetricChecks {
    /// `|G² − I|`.
    pub involution: f64,
    /// `|JG − GᵀJ|`.
    pub self_adjoint: f64,
    /// Smallest eigenvalue of the symmetric form `⟨G·,·⟩`.
    pub min_eigenvalue: f64,
}

impl GeneralizedMetric {
    pub fn build(g: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Self> {
        let n = g.nrows();
        check_square(g, n, "metric")?;
        check_square(b, n, "two-form")?;
        check_symmetric(g, "metric")?;
        check_antisymmetric(b, "two-form")?;
        if g.clone().cholesky().is_none() {
            return Err(GeomError::DegenerateMetric);
        }
        let g_inv = g.clone().try_inverse().ok_or(GeomError::DegenerateMetric)?;
        let matrix = from_blocks(&-(&g_inv * b), &g_inv, &(g - b * &g_inv * b), &(b * &g_inv));
        Ok(Self { g: g.clone(), b: b.clone(), g_inv, matrix })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn two_form(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn checks(&self) -> GeneralizedMetricChecks {
        let n = self.dim();
        let j = pairing(n);
        let g = &self.matrix;
        let jg = &j * g;
        let sym = (&jg + jg.transpose()) * 0.5;
        GeneralizedMetricChecks {
            involution: (g * g - DMatrix::identity(2 * n, 2 * n)).amax(),
            self_adjoint: (&jg - g.transpose() * &j).amax(),
            min_eigenvalue: sym.symmetric_eigenvalues().min(),
        }
    }
}

/// Reads `(g, b)` off a generalized metric matrix: `g⁻¹ = πGπ*`, `s = Gπ*g`.
pub fn extract(gm: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n2 = gm.nrows();
    if gm.ncols() != n2 || !n2.is_multiple_of(2) {
        return Err(GeomError::DimensionMismatch("generalized metric must be 2n×2n".into()));
    }
    let n = n2 / 2;
    let g_inv = block(gm, 0, 1, n);
    let g = g_inv.try_inverse().ok_or(GeomError::DegenerateMetric)?;
    let g = (&g + g.transpose()) * 0.5;
    let b = block(gm, 1, 1, n) * &g;
    let b = (&b - b.transpose()) * 0.5;
    Ok((g, b))
}

/// `P± = ½(I ± G)`.
pub fn projections(gm: &GeneralizedMetric) -> (DMatrix<f64>, DMatrix<f64>) {
    let id = DMatrix::identity(2 * gm.dim(), 2 * gm.dim());
    ((&id + &gm.matrix) * 0.5, (&id - &gm.matrix) * 0.5)
}

/// Element of `so(T ⊕ T*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieElement(pub DMatrix<f64>);

impl LieElement {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `|VᵀJ + JV|`.
    pub fn so_defect(&self) -> f64 {
        let j = pairing(self.0.nrows() / 2);
        (self.0.transpose() * &j + &j * &self.0).amax()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }
}

/// `R_{h,k} = P₋ η P₊ − P₊ η* P₋` with `η = h + k`, `η* = h − k` as maps `T → T*`.
pub fn lie_element(h: &DMatrix<f64>, k: &DMatrix<f64>, gm: &GeneralizedMetric) -> Result<LieElement> {
    let n = gm.dim();
    check_square(h, n, "symmetric variation")?;
    check_square(k, n, "antisymmetric variation")?;
    check_symmetric(h, "h")?;
    check_antisymmetric(k, "k")?;
    let z = DMatrix::zeros(n, n);
    let eta = from_blocks(&z, &z, &(h + k), &z);
    let eta_star = from_blocks(&z, &z, &(h - k), &z);
    let (pp, pm) = projections(gm);
    Ok(LieElement(&pm * eta * &pp - &pp * eta_star * &pm))
}

/// `e^b · ½[[−g⁻¹h, −g⁻¹kg⁻¹], [k, hg⁻¹]] · e^{−b}`.
pub fn lie_element_matrix(h: &DMatrix<f64>, k: &DMatrix<f64>, gm: &GeneralizedMetric) -> Result<LieElement> {
    let n = gm.dim();
    check_square(h, n, "symmetric variation")?;
    check_square(k, n, "antisymmetric variation")?;
    let gi = &gm.g_inv;
    let v = from_blocks(&-(gi * h), &-(gi * k * gi), k, &(h * gi)) * 0.5;
    Ok(LieElement(b_transform(&gm.b) * v * b_transform(&-&gm.b)))
}

/// Derivative of `G_{g,b}` along `(ġ, ḃ) = (h, k)`.
pub fn metric_derivative(gm: &GeneralizedMetric, h: &DMatrix<f64>, k: &DMatrix<f64>) -> DMatrix<f64> {
    let gi = &gm.g_inv;
    let b = &gm.b;
    let dgi = -(gi * h * gi);
    from_blocks(&(-(&dgi * b) - gi * k), &dgi, &(h - k * gi * b - b * &dgi * b - b * gi * k), &(k * gi + b * &dgi))
}

/// Reads `(ġ, ḃ)` from `∂G/∂t = [V, G]`.
pub fn induced_variation(gm: &GeneralizedMetric, v: &LieElement) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = gm.dim();
    if v.0.shape() != (2 * n, 2 * n) {
        return Err(GeomError::DimensionMismatch(format!("variation must be {0}×{0}", 2 * n)));
    }
    let so = v.so_defect();
    if so > 1e-9 * (1.0 + v.0.amax()) {
        return Err(GeomError::NotLieElement(so));
    }
    let c = &v.0 * &gm.matrix - &gm.matrix * &v.0;
    let gdot = -(&gm.g * block(&c, 0, 1, n) * &gm.g);
    let gdot = (&gdot + gdot.transpose()) * 0.5;
    // b is the bottom block of Gπ*g.
    let bdot = block(&c, 1, 1, n) * &gm.g + block(&gm.matrix, 1, 1, n) * &gdot;
    let bdot = (&bdot - bdot.transpose()) * 0.5;
    let defect = (metric_derivative(gm, &gdot, &bdot) - &c).amax();
    if defect > 1e-9 * (1.0 + c.amax()) {
        return Err(GeomError::NotLieElement(defect));
    }
    Ok((gdot, bdot))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `Ric(∇±) = Rc − ¼H² ∓ ½d*H`.
pub fn bismut_ricci(rc: &DMatrix<f64>, hsq: &DMatrix<f64>, dstar_h: &DMatrix<f64>, sign: Sign) -> Result<DMatrix<f64>> {
    let n = rc.nrows();
    check_square(rc, n, "Ricci")?;
    check_square(hsq, n, "H²")?;
    check_square(dstar_h, n, "d*H")?;
    Ok(rc - hsq * 0.25 - dstar_h * (0.5 * sign.value()))
}

/// Lie algebra element of `Ric(∇⁻)`.
pub fn generalized_ricci(
    gm: &GeneralizedMetric,
    rc: &DMatrix<f64>,
    hsq: &DMatrix<f64>,
    dstar_h: &DMatrix<f64>,
) -> Result<LieElement> {
    let r = bismut_ricci(rc, hsq, dstar_h, Sign::Minus)?;
    let sym = (&r + r.transpose()) * 0.5;
    let anti = (&r - r.transpose()) * 0.5;
    lie_element(&sym, &anti, gm)
}

/// Max-norm gap between `[−2 Rc(∇⁻), G]` read back as `(ġ, ḃ)` and the
/// flow `(−2Rc + ½H², −d*H)`.
pub fn verify_grf_equivalence(
    g: &DMatrix<f64>,
    b: &DMatrix<f64>,
    rc: &DMatrix<f64>,
    hsq: &DMatrix<f64>,
    dstar_h: &DMatrix<f64>,
) -> Result<f64> {
    let gm = GeneralizedMetric::build(g, b)?;
    let v = generalized_ricci(&gm, rc, hsq, dstar_h)?.scale(-2.0);
    let (gdot, bdot) = induced_variation(&gm, &v)?;
    let expect_g = rc * -2.0 + hsq * 0.5;
    let expect_b = -dstar_h;
    Ok((gdot - expect_g).amax().max((bdot - expect_b).amax()))
}

/// `Γ±^c_{ab} = Γ^c_{ab} ± ½ g^{cl} H_{abl}`.
pub fn bismut_connection(gamma: &Christoffel, h: &Form, g: &DMatrix<f64>, sign: Sign) -> Result<Christoffel> {
    let n = gamma.dim();
    if h.rank() != 3 {
        return Err(GeomError::RankMismatch { expected: 3, found: h.rank() });
    }
    if h.dim() != n || g.shape() != (n, n) {
        return Err(GeomError::DimensionMismatch("connection, flux and metric dimensions".into()));
    }
    let gi = g.clone().try_inverse().ok_or(GeomError::DegenerateMetric)?;
    let mut out = gamma.clone();
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                let t: f64 = (0..n).map(|l| gi[(c, l)] * h.get(&[a, b, l])).sum();
                out.set(c, a, b, gamma.get(c, a, b) + 0.5 * sign.value() * t);
            }
        }
    }
    Ok(out)
}

/// Max-norm of `g(T(e_a, e_b), e_c) ∓ H_{abc}` for the torsion of `conn`.
pub fn torsion_residual(conn: &Christoffel, h: &Form, g: &DMatrix<f64>, sign: Sign) -> f64 {
    let n = conn.dim();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let t: f64 = (0..n).map(|d| g[(c, d)] * (conn.get(d, a, b) - conn.get(d, b, a))).sum();
                worst = worst.max((t - sign.value() * h.get(&[a, b, c])).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_metric() -> GeneralizedMetric {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, -0.3, 0.0]);
        GeneralizedMetric::build(&g, &b).unwrap()
    }

    #[test]
    fn untwisted_metric_is_antidiagonal() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let gm = GeneralizedMetric::build(&g, &DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(block(gm.matrix(), 1, 0, 2), g);
        assert_eq!(block(gm.matrix(), 0, 1, 2), DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25]));
        assert_eq!(block(gm.matrix(), 0, 0, 2).amax(), 0.0);
    }

    #[test]
    fn pure_two_form_slice() {
        let gm = GeneralizedMetric::build(&DMatrix::identity(2, 2), &DMatrix::zeros(2, 2)).unwrap();
        let k = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let v = lie_element(&DMatrix::zeros(2, 2), &k, &gm).unwrap();
        let expect = from_blocks(&DMatrix::zeros(2, 2), &(-&k * 0.5), &(&k * 0.5), &DMatrix::zeros(2, 2));
        assert!((v.matrix() - expect).amax() < 1e-15);
        let (gdot, bdot) = induced_variation(&gm, &v).unwrap();
        assert!(gdot.amax() < 1e-15);
        assert!((bdot - k).amax() < 1e-15);
    }

    #[test]
    fn asymmetric_inputs_are_rejected() {
        let gm = sample_metric();
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(lie_element(&bad, &DMatrix::zeros(2, 2), &gm).is_err());
        assert!(lie_element(&DMatrix::zeros(2, 2), &bad, &gm).is_err());
    }

    #[test]
    fn non_lie_matrix_is_rejected() {
        let gm = sample_metric();
        let v = LieElement(DMatrix::identity(4, 4) + DMatrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64 * 0.1));
        assert!(matches!(induced_variation(&gm, &v), Err(GeomError::NotLieElement(_))));
    }
}
