//! Circle-invariant geometry in Kaluza–Klein variables.
//!
//! Total-space coordinates put the base first and the fibre coordinate `y`
//! last. The adapted frame is `e_i = ∂_i − A_i ∂_y`, `e_θ = ∂_y` with dual
//! coframe `dx^i`, `θ = dy + A_i dx^i`.

use nalgebra::DMatrix;

use crate::base_geometry::{
    christoffel, codiff, hessian_base, laplacian_base, ricci_base, BaseChartSample, Christoffel,
};
use crate::error::{GeomError, Result};
use crate::jet::{FormJet, ScalarJet};
use crate::tensor_point::{inner, interior_raised, wedge, BaseMetric, Form, OneForm, SymTwoTensor, ThreeForm, TwoForm};

pub use crate::oracle::oracle_full;

/// Point sample of circle-invariant data, all forms basic and living on the base.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSample {
    /// Fibre length squared.
    pub phi: ScalarJet,
    /// Connection potential, `θ = dy + A`.
    pub connection: FormJet,
    pub base: BaseChartSample,
    pub eta: FormJet,
    pub mu: FormJet,
    /// Background flux `H₀ = θ∧Y0 + Z0`.
    pub y0: FormJet,
    pub z0: FormJet,
    /// Gauge function.
    pub f: ScalarJet,
}

impl InvariantSample {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        phi: ScalarJet,
        connection: FormJet,
        base: BaseChartSample,
        eta: FormJet,
        mu: FormJet,
        y0: FormJet,
        z0: FormJet,
        f: ScalarJet,
    ) -> Result<Self> {
        let m = base.dim();
        let checks: [(&FormJet, usize, bool); 7] = [
            (&phi, 0, true),
            (&connection, 1, true),
            (&eta, 1, true),
            (&mu, 2, true),
            (&y0, 2, false),
            (&z0, 3, false),
            (&f, 0, true),
        ];
        for (jet, rank, second) in checks {
            if jet.rank() != rank {
                return Err(GeomError::RankMismatch { expected: rank, found: jet.rank() });
            }
            if jet.dim() != m || jet.base_dim() != m {
                return Err(GeomError::DimensionMismatch("sample jets must live on the base".into()));
            }
            if second && jet.hess.is_none() {
                return Err(GeomError::InvalidState("second-order jet required".into()));
            }
        }
        if !(phi.scalar_value() > 0.0) {
            return Err(GeomError::DegenerateFiber(phi.scalar_value()));
        }
        Ok(Self { phi, connection, base, eta, mu, y0, z0, f })
    }

    /// Product geometry `dy² + h` with no flux and zero gauge.
    pub fn trivial(base: BaseChartSample) -> Self {
        let m = base.dim();
        Self {
            phi: FormJet::constant(Form::scalar(m, 1.0), m),
            connection: FormJet::zero(m, 1, m),
            eta: FormJet::zero(m, 1, m),
            mu: FormJet::zero(m, 2, m),
            y0: FormJet::zero(m, 2, m),
            z0: FormJet::zero(m, 3, m),
            f: FormJet::zero(m, 0, m),
            base,
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn h(&self) -> &BaseMetric {
        self.base.metric()
    }

    pub fn phi_value(&self) -> f64 {
        self.phi.scalar_value()
    }

    pub fn with_gauge(mut self, f: ScalarJet) -> Self {
        self.f = f;
        self
    }

    /// `F = dA` with first derivatives.
    pub fn curvature(&self) -> FormJet {
        self.connection.exterior_derivative().expect("second-order connection")
    }

    /// Full metric in chart coordinates `(x, y)`.
    pub fn full_metric(&self) -> DMatrix<f64> {
        assemble_metric(&DecomposedMetric {
            phi: self.phi_value(),
            a: self.connection.value.clone(),
            h: self.h().clone(),
        })
    }
}

/// `g = φ θ⊗θ + h` with `θ = dy + a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedMetric {
    pub phi: f64,
    pub a: OneForm,
    pub h: BaseMetric,
}

/// `b = θ∧η + μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedTwoForm {
    pub eta: OneForm,
    pub mu: TwoForm,
}

/// `H = θ∧Y + Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedFlux {
    pub y: TwoForm,
    pub z: ThreeForm,
}

/// Splits a full metric (fibre coordinate last) into `(φ, a, h)`.
pub fn decompose_metric(g: &DMatrix<f64>) -> Result<DecomposedMetric> {
    let n = g.nrows();
    if n < 2 || g.ncols() != n {
        return Err(GeomError::DimensionMismatch("full metric must be square, size ≥ 2".into()));
    }
    let m = n - 1;
    let phi = g[(m, m)];
    if !(phi > 0.0) {
        return Err(GeomError::DegenerateFiber(phi));
    }
    let a: Vec<f64> = (0..m).map(|i| g[(i, m)] / phi).collect();
    let h = DMatrix::from_fn(m, m, |i, j| g[(i, j)] - phi * a[i] * a[j]);
    Ok(DecomposedMetric { phi, a: Form::one_form(&a), h: BaseMetric::new(h)? })
}

pub fn assemble_metric(d: &DecomposedMetric) -> DMatrix<f64> {
    let m = d.h.dim();
    let a = d.a.components();
    let h = d.h.matrix();
    DMatrix::from_fn(m + 1, m + 1, |i, j| match (i == m, j == m) {
        (true, true) => d.phi,
        (true, false) => d.phi * a[j],
        (false, true) => d.phi * a[i],
        (false, false) => h[(i, j)] + d.phi * a[i] * a[j],
    })
}

/// `θ = dy + A` on the total space.
pub fn connection_form(a: &OneForm) -> OneForm {
    let m = a.dim();
    &a.lift(m + 1) + &Form::basis(m + 1, m)
}

fn split(form: &Form, a: &OneForm) -> Result<(Form, Form)> {
    let n = form.dim();
    if n != a.dim() + 1 {
        return Err(GeomError::DimensionMismatch("form must live on the total space".into()));
    }
    let m = n - 1;
    let mut fibre = vec![0.0; n];
    fibre[m] = 1.0;
    let vertical = crate::tensor_point::interior(&fibre, form)?;
    let horizontal = form - &wedge(&connection_form(a), &vertical)?;
    Ok((vertical.restrict(m), horizontal.restrict(m)))
}

/// `η = e_θ⌟b`, `μ = b − θ∧η`.
pub fn decompose_two_form(b: &TwoForm, a: &OneForm) -> Result<DecomposedTwoForm> {
    let (eta, mu) = split(b, a)?;
    Ok(DecomposedTwoForm { eta, mu })
}

/// `Y = e_θ⌟H`, `Z = H − θ∧Y`.
pub fn decompose_three_form(h: &ThreeForm, a: &OneForm) -> Result<DecomposedFlux> {
    let (y, z) = split(h, a)?;
    Ok(DecomposedFlux { y, z })
}

pub fn assemble_two_form(d: &DecomposedTwoForm, a: &OneForm) -> Result<TwoForm> {
    let n = a.dim() + 1;
    Ok(&wedge(&connection_form(a), &d.eta.lift(n))? + &d.mu.lift(n))
}

pub fn assemble_three_form(d: &DecomposedFlux, a: &OneForm) -> Result<ThreeForm> {
    let n = a.dim() + 1;
    Ok(&wedge(&connection_form(a), &d.y.lift(n))? + &d.z.lift(n))
}

/// Flux jets: `Y = Y0 − dη`, `Z = Z0 + F∧η + dμ`.
pub fn flux(s: &InvariantSample) -> Result<(FormJet, FormJet)> {
    let y = s.y0.truncated().sub(&s.eta.exterior_derivative()?);
    let f = s.curvature();
    let z = s.z0.truncated().add(&f.wedge(&s.eta)?).add(&s.mu.exterior_derivative()?);
    Ok((y, z))
}

/// Frame Christoffel symbols `D_{e_a} e_b = Γ^c_{ab} e_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct KKChristoffels {
    /// `Γ^k_{ij}` of the base metric.
    pub base: Christoffel,
    /// `Γ^θ_{ij} = −½F_{ij}`.
    pub theta_ij: TwoForm,
    /// `Γ^k_{iθ} = Γ^k_{θi} = (φ/2) h^{kl} F_{il}`, indexed `(k, i)`.
    pub k_itheta: DMatrix<f64>,
    /// `Γ^k_{θθ} = −½∇^kφ`.
    pub k_thetatheta: Vec<f64>,
    /// `Γ^θ_{iθ} = Γ^θ_{θi} = ∇_iφ / 2φ`.
    pub theta_itheta: Vec<f64>,
}

impl KKChristoffels {
    /// All symbols in one array on the frame, `θ` at index `m`.
    pub fn frame_array(&self) -> Christoffel {
        let m = self.base.dim();
        let t = m;
        let mut out = Christoffel::zeros(m + 1);
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    out.set(k, i, j, self.base.get(k, i, j));
                }
                out.set(k, i, t, self.k_itheta[(k, i)]);
                out.set(k, t, i, self.k_itheta[(k, i)]);
                out.set(t, k, i, self.theta_ij.get(&[k, i]));
            }
            out.set(k, t, t, self.k_thetatheta[k]);
            out.set(t, k, t, self.theta_itheta[k]);
            out.set(t, t, k, self.theta_itheta[k]);
        }
        out
    }
}

fn positive_phi(s: &InvariantSample) -> Result<f64> {
    let phi = s.phi_value();
    if !(phi > 0.0) {
        return Err(GeomError::DegenerateFiber(phi));
    }
    Ok(phi)
}

fn grad_form(j: &ScalarJet) -> OneForm {
    Form::one_form(&j.grad_vector())
}

pub fn kk_christoffels(s: &InvariantSample) -> Result<KKChristoffels> {
    let phi = positive_phi(s)?;
    let m = s.dim();
    let hinv = s.h().inverse();
    let f = s.curvature().value;
    let fm = f.to_matrix();
    let dphi = s.phi.grad_vector();
    let up = hinv * nalgebra::DVector::from_column_slice(&dphi);
    Ok(KKChristoffels {
        base: christoffel(&s.base),
        theta_ij: &f * -0.5,
        k_itheta: DMatrix::from_fn(m, m, |k, i| 0.5 * phi * (0..m).map(|l| hinv[(k, l)] * fm[(i, l)]).sum::<f64>()),
        k_thetatheta: up.iter().map(|v| -0.5 * v).collect(),
        theta_itheta: dphi.iter().map(|d| d / (2.0 * phi)).collect(),
    })
}

/// Ricci tensor in the adapted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct KKRicci {
    pub rij: SymTwoTensor,
    pub ritheta: OneForm,
    pub rthetatheta: f64,
}

/// `M_{ij} = a_{i…} b_j^{…}`: all but the first slot contracted with `h`.
fn tail_contract(a: &Form, b: &Form, h: &BaseMetric) -> Result<DMatrix<f64>> {
    let m = h.dim();
    let a = a.to_dense();
    let b = h.raise_tail(b)?;
    let s = a.len() / m.max(1);
    Ok(DMatrix::from_fn(m, m, |i, j| (0..s).map(|r| a[i * s + r] * b[j * s + r]).sum()))
}

/// `out_i = a_{i…} b^{…}` for a form `a` of rank one higher than `b`.
fn first_slot_contract(a: &Form, b: &Form, h: &BaseMetric) -> Result<OneForm> {
    let m = h.dim();
    let a = a.to_dense();
    let b = h.raise_all(b)?;
    let s = b.len();
    Ok(Form::one_form(&(0..m).map(|i| (0..s).map(|r| a[i * s + r] * b[r]).sum()).collect::<Vec<_>>()))
}

pub fn kk_ricci(s: &InvariantSample) -> Result<KKRicci> {
    let phi = positive_phi(s)?;
    let h = s.h();
    let fj = s.curvature();
    let f = &fj.value;
    let dphi = grad_form(&s.phi);
    let hess_phi = hessian_base(&s.phi, &s.base)?;
    let lap_phi = laplacian_base(&s.phi, &s.base)?;
    let grad2 = inner(&dphi, &dphi, h)?;
    let ff = tail_contract(f, f, h)?;
    let dd = DMatrix::from_fn(s.dim(), s.dim(), |i, j| dphi.get(&[i]) * dphi.get(&[j]));
    let rij =
        ricci_base(&s.base).matrix() - ff * (0.5 * phi) - hess_phi.matrix() / (2.0 * phi) + dd / (4.0 * phi * phi);
    let ritheta = &(codiff(&fj, &s.base)? * (0.5 * phi)) - &(interior_raised(&dphi, h, f)? * 0.75);
    let rthetatheta = -0.5 * lap_phi + grad2 / (4.0 * phi) + phi * phi / 4.0 * inner(f, f, h)?;
    Ok(KKRicci { rij: SymTwoTensor::symmetrized(rij), ritheta, rthetatheta })
}

/// `H²` in the adapted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct HSquared {
    pub hij: SymTwoTensor,
    pub hitheta: OneForm,
    pub hthetatheta: f64,
}

fn h_squared_from(y: &Form, z: &Form, phi: f64, h: &BaseMetric) -> Result<HSquared> {
    let yy = tail_contract(y, y, h)?;
    let zz = tail_contract(z, z, h)?;
    Ok(HSquared {
        hij: SymTwoTensor::symmetrized(yy * (2.0 / phi) + zz),
        hitheta: first_slot_contract(z, y, h)?,
        hthetatheta: inner(y, y, h)?,
    })
}

pub fn h_squared(s: &InvariantSample) -> Result<HSquared> {
    let phi = positive_phi(s)?;
    let (y, z) = flux(s)?;
    h_squared_from(&y.value, &z.value, phi, s.h())
}

/// Codifferential of `H` in the adapted frame: components `(iθ)` and `(ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodiffH {
    pub itheta: OneForm,
    pub ij: TwoForm,
}

pub fn codiff_h(s: &InvariantSample) -> Result<CodiffH> {
    let phi = positive_phi(s)?;
    let h = s.h();
    let (y, z) = flux(s)?;
    let f = s.curvature().value;
    let dphi = grad_form(&s.phi);
    let mut itheta = codiff(&y, &s.base)?;
    itheta -= &(first_slot_contract(&z.value, &f, h)? * (0.5 * phi));
    itheta += &(interior_raised(&dphi, h, &y.value)? * (0.5 / phi));
    let ij = &codiff(&z, &s.base)? - &(interior_raised(&dphi, h, &z.value)? * (0.5 / phi));
    Ok(CodiffH { itheta, ij })
}

/// Hessian of the gauge function in the adapted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FullHessian {
    pub ij: SymTwoTensor,
    pub itheta: OneForm,
    pub thetatheta: f64,
}

pub fn hessian_full(s: &InvariantSample, f: &ScalarJet) -> Result<FullHessian> {
    let phi = positive_phi(s)?;
    let h = s.h();
    let df = grad_form(f);
    let curv = s.curvature().value;
    Ok(FullHessian {
        ij: hessian_base(f, &s.base)?,
        itheta: interior_raised(&df, h, &curv)? * (0.5 * phi),
        thetatheta: 0.5 * inner(&grad_form(&s.phi), &df, h)?,
    })
}

/// `(∇f⌟Y, ∇f⌟Z)`, the basic parts of `∇f⌟H`.
pub fn grad_contract_h(s: &InvariantSample, f: &ScalarJet) -> Result<(OneForm, TwoForm)> {
    let (y, z) = flux(s)?;
    let df = grad_form(f);
    Ok((interior_raised(&df, s.h(), &y.value)?, interior_raised(&df, s.h(), &z.value)?))
}

/// Symmetric variation of the metric in the adapted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricVariation {
    pub ij: SymTwoTensor,
    pub itheta: OneForm,
    pub thetatheta: f64,
}

/// Variation of the two-form in the adapted frame, `c = c_{iθ} e^i∧θ + c_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormVariation {
    pub itheta: OneForm,
    pub ij: TwoForm,
}

/// Time derivatives of the decomposed data `(φ, a, h, η, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRate {
    pub dphi: f64,
    pub da: OneForm,
    pub dh: SymTwoTensor,
    pub deta: OneForm,
    pub dmu: TwoForm,
}

impl FlowRate {
    pub fn zero(m: usize) -> Self {
        Self {
            dphi: 0.0,
            da: Form::zero(m, 1),
            dh: SymTwoTensor::zeros(m),
            deta: Form::zero(m, 1),
            dmu: Form::zero(m, 2),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.dphi
            .abs()
            .max(self.da.max_abs())
            .max(self.dh.matrix().amax())
            .max(self.deta.max_abs())
            .max(self.dmu.max_abs())
    }

    /// Componentwise max-norm differences `(φ, a, h, η, μ)`.
    pub fn differences(&self, other: &Self) -> [f64; 5] {
        [
            (self.dphi - other.dphi).abs(),
            self.da.max_abs_diff(&other.da),
            (self.dh.matrix() - other.dh.matrix()).amax(),
            self.deta.max_abs_diff(&other.deta),
            self.dmu.max_abs_diff(&other.dmu),
        ]
    }
}

/// `k = −2Rc + ½H² + L_{∇f}g` and `c = −d*H + ∇f⌟H` in the adapted frame.
pub fn flow_variations(s: &InvariantSample) -> Result<(MetricVariation, FormVariation)> {
    let rc = kk_ricci(s)?;
    let hsq = h_squared(s)?;
    let dh = codiff_h(s)?;
    let hess = hessian_full(s, &s.f)?;
    let (fy, fz) = grad_contract_h(s, &s.f)?;
    let k = MetricVariation {
        ij: SymTwoTensor::symmetrized(rc.rij.matrix() * -2.0 + hsq.hij.matrix() * 0.5 + hess.ij.matrix() * 2.0),
        itheta: &(&(rc.ritheta * -2.0) + &(hsq.hitheta * 0.5)) + &(hess.itheta * 2.0),
        thetatheta: -2.0 * rc.rthetatheta + 0.5 * hsq.hthetatheta + 2.0 * hess.thetatheta,
    };
    let c = FormVariation { itheta: &fy - &dh.itheta, ij: &fz - &dh.ij };
    Ok((k, c))
}

/// Maps frame variations `(k, c)` to rates of `(φ, a, h, η, μ)`.
pub fn variation_rates(k: &MetricVariation, c: &FormVariation, s: &InvariantSample) -> Result<FlowRate> {
    let phi = positive_phi(s)?;
    let da = &k.itheta * (1.0 / phi);
    let dmu = &c.ij - &wedge(&da, &s.eta.value)?;
    Ok(FlowRate { dphi: k.thetatheta, da, dh: k.ij.clone(), deta: -&c.itheta, dmu })
}

pub fn flow_rhs(s: &InvariantSample) -> Result<FlowRate> {
    let (k, c) = flow_variations(s)?;
    variation_rates(&k, &c, s)
}

/// Closed-form rates of `φ` and `a`, evaluated without the frame variations.
pub fn explicit_fibre_rates(s: &InvariantSample) -> Result<(f64, OneForm)> {
    let phi = positive_phi(s)?;
    let h = s.h();
    let fj = s.curvature();
    let f = &fj.value;
    let (y, z) = flux(s)?;
    let dphi = grad_form(&s.phi);
    let df = grad_form(&s.f);
    let rate_phi =
        laplacian_base(&s.phi, &s.base)? - inner(&dphi, &dphi, h)? / (2.0 * phi) - phi * phi / 2.0 * inner(f, f, h)?
            + 0.5 * inner(&y.value, &y.value, h)?
            + inner(&dphi, &df, h)?;
    let mut rate_a = -codiff(&fj, &s.base)?;
    rate_a += &(interior_raised(&dphi, h, f)? * (1.5 / phi));
    rate_a += &(first_slot_contract(&z.value, &y.value, h)? * (0.5 / phi));
    rate_a += &interior_raised(&df, h, f)?;
    Ok((rate_phi, rate_a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompose_example_in_fibre_last_layout() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]);
        let d = decompose_metric(&g).unwrap();
        assert_eq!(d.phi, 2.0);
        assert_eq!(d.a.get(&[0]), 0.5);
        assert_eq!(d.h.matrix()[(0, 0)], 0.5);
        assert_eq!(assemble_metric(&d), g);
    }

    #[test]
    fn non_positive_fibre_is_rejected() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(decompose_metric(&g), Err(GeomError::DegenerateFiber(_))));
    }

    #[test]
    fn basic_two_form_has_no_eta() {
        let a = Form::one_form(&[0.3, -0.1]);
        let mut b = Form::zero(3, 2);
        b.set(&[0, 1], 2.0);
        let d = decompose_two_form(&b, &a).unwrap();
        assert_eq!(d.eta.max_abs(), 0.0);
        assert_eq!(d.mu.get(&[0, 1]), 2.0);
    }

    #[test]
    fn trivial_bundle_is_a_fixed_point() {
        let s = InvariantSample::trivial(BaseChartSample::flat(3));
        assert_eq!(flow_rhs(&s).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn linear_fibre_length_christoffel() {
        let mut s = InvariantSample::trivial(BaseChartSample::flat(1));
        s.phi = ScalarJet::scalar(0.7, &[1.0], &[vec![0.0]]);
        let g = kk_christoffels(&s).unwrap();
        assert_eq!(g.k_thetatheta[0], -0.5);
    }
}
