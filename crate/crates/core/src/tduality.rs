//! T-duality in decomposed variables `(φ, a, h, η, μ)`.

use nalgebra::DMatrix;

use crate::base_geometry::BaseChartSample;
use crate::charts;
use crate::circle_bundle::{
    assemble_metric, assemble_two_form, decompose_metric, decompose_two_form, flow_rhs, flow_variations, flux,
    DecomposedMetric, DecomposedTwoForm, FlowRate, FormVariation, InvariantSample, MetricVariation,
};
use crate::error::{GeomError, Result};
use crate::jet::{FormJet, ScalarJet};
use crate::tensor_point::{wedge, BaseMetric, Form, OneForm, SymTwoTensor, TwoForm};

/// Pointwise invariant data: `g = φ(dy + a)² + h`, `b = (dy + a)∧η + μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedConfig {
    pub phi: f64,
    pub a: OneForm,
    pub h: BaseMetric,
    pub eta: OneForm,
    pub mu: TwoForm,
}

impl DecomposedConfig {
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.phi - other.phi)
            .abs()
            .max(self.a.max_abs_diff(&other.a))
            .max((self.h.matrix() - other.h.matrix()).amax())
            .max(self.eta.max_abs_diff(&other.eta))
            .max(self.mu.max_abs_diff(&other.mu))
    }
}

/// `φ̄ = 1/φ`, `ā = η`, `h̄ = h`, `η̄ = a`, `μ̄ = μ − η∧a`.
pub fn dualize(d: &DecomposedConfig) -> Result<DecomposedConfig> {
    if !(d.phi > 0.0) {
        return Err(GeomError::DegenerateFiber(d.phi));
    }
    Ok(DecomposedConfig {
        phi: 1.0 / d.phi,
        a: d.eta.clone(),
        h: d.h.clone(),
        eta: d.a.clone(),
        mu: &d.mu - &wedge(&d.eta, &d.a)?,
    })
}

/// Components of `g = g0 dy² + 2 g1·dy + g2`, `b = b1∧dy + b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BuscherData {
    pub g0: f64,
    pub g1: OneForm,
    pub g2: DMatrix<f64>,
    pub b1: OneForm,
    pub b2: TwoForm,
}

impl BuscherData {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.g0 - other.g0)
            .abs()
            .max(self.g1.max_abs_diff(&other.g1))
            .max((&self.g2 - &other.g2).amax())
            .max(self.b1.max_abs_diff(&other.b1))
            .max(self.b2.max_abs_diff(&other.b2))
    }

    fn full(&self) -> (DMatrix<f64>, TwoForm) {
        let m = self.g2.nrows();
        let g = DMatrix::from_fn(m + 1, m + 1, |i, j| match (i == m, j == m) {
            (true, true) => self.g0,
            (true, false) => self.g1.get(&[j]),
            (false, true) => self.g1.get(&[i]),
            (false, false) => self.g2[(i, j)],
        });
        let b = Form::from_fn(m + 1, 2, |ij| if ij[1] == m { self.b1.get(&[ij[0]]) } else { self.b2.get(ij) });
        (g, b)
    }

    fn from_full(g: &DMatrix<f64>, b: &TwoForm) -> Self {
        let m = g.nrows() - 1;
        Self {
            g0: g[(m, m)],
            g1: Form::from_fn(m, 1, |i| g[(i[0], m)]),
            g2: g.view((0, 0), (m, m)).into_owned(),
            b1: Form::from_fn(m, 1, |i| b.get(&[i[0], m])),
            b2: b.restrict(m),
        }
    }
}

pub fn decompose_config(data: &BuscherData) -> Result<DecomposedConfig> {
    if !(data.g0 > 0.0) {
        return Err(GeomError::DegenerateFiber(data.g0));
    }
    let (g, b) = data.full();
    let metric = decompose_metric(&g)?;
    let two = decompose_two_form(&b, &metric.a)?;
    Ok(DecomposedConfig { phi: metric.phi, a: metric.a, h: metric.h, eta: two.eta, mu: two.mu })
}

pub fn assemble_config(d: &DecomposedConfig) -> Result<BuscherData> {
    let g = assemble_metric(&DecomposedMetric { phi: d.phi, a: d.a.clone(), h: d.h.clone() });
    let b = assemble_two_form(&DecomposedTwoForm { eta: d.eta.clone(), mu: d.mu.clone() }, &d.a)?;
    Ok(BuscherData::from_full(&g, &b))
}

/// Dual components, computed as decompose → dualize → assemble.
pub fn buscher(data: &BuscherData) -> Result<BuscherData> {
    assemble_config(&dualize(&decompose_config(data)?)?)
}

/// The classical component form of the dual:
/// `ḡ0 = 1/g0`, `ḡ1 = −b1/g0`, `ḡ2 = g2 + (b1b1 − g1g1)/g0`,
/// `b̄1 = −g1/g0`, `b̄2 = b2 + g1∧b1/g0`.
pub fn buscher_explicit(data: &BuscherData) -> Result<BuscherData> {
    let g0 = data.g0;
    if !(g0 > 0.0) {
        return Err(GeomError::DegenerateFiber(g0));
    }
    let g1 = data.g1.to_vector();
    let b1 = data.b1.to_vector();
    Ok(BuscherData {
        g0: 1.0 / g0,
        g1: &data.b1 * (-1.0 / g0),
        g2: &data.g2 + (&b1 * b1.transpose() - &g1 * g1.transpose()) / g0,
        b1: &data.g1 * (-1.0 / g0),
        b2: &data.b2 + &(wedge(&data.g1, &data.b1)? * (1.0 / g0)),
    })
}

/// Jet-level data of a T-dual pair over a common base chart.
///
/// The primal connection is `A_ref + a`, the primal background flux is
/// `H₀ = θ∧(−dĀ_ref) + Z0 + a∧dĀ_ref`, and the dual swaps the roles of the
/// two reference potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPairConfig {
    pub phi: ScalarJet,
    pub offset: FormJet,
    pub base: BaseChartSample,
    pub eta: FormJet,
    pub mu: FormJet,
    pub reference: FormJet,
    pub dual_reference: FormJet,
    pub z0: FormJet,
    pub f: ScalarJet,
}

impl DualPairConfig {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Decomposed values at the sample point.
    pub fn point(&self) -> Result<DecomposedConfig> {
        Ok(DecomposedConfig {
            phi: self.phi.scalar_value(),
            a: self.offset.value.clone(),
            h: self.base.metric().clone(),
            eta: self.eta.value.clone(),
            mu: self.mu.value.clone(),
        })
    }

    pub fn primal_sample(&self) -> Result<InvariantSample> {
        let dual_curv = self.dual_reference.exterior_derivative()?;
        InvariantSample::new(
            self.phi.clone(),
            self.reference.add(&self.offset),
            self.base.clone(),
            self.eta.clone(),
            self.mu.clone(),
            dual_curv.scale(-1.0),
            self.z0.truncated().add(&self.offset.wedge(&dual_curv)?),
            self.f.clone(),
        )
    }

    /// Dual data with the shifted gauge `f̄ = f + ln φ`.
    pub fn dualize(&self) -> Result<Self> {
        let mut d = self.dualize_without_dilaton()?;
        d.f = self.f.add(&self.phi.ln()?);
        Ok(d)
    }

    /// Dual data keeping `f̄ = f`; the negative control for the dilaton shift.
    pub fn dualize_without_dilaton(&self) -> Result<Self> {
        if !(self.phi.scalar_value() > 0.0) {
            return Err(GeomError::DegenerateFiber(self.phi.scalar_value()));
        }
        Ok(Self {
            phi: self.phi.recip()?,
            offset: self.eta.clone(),
            base: self.base.clone(),
            eta: self.offset.clone(),
            mu: self.mu.sub(&self.eta.wedge(&self.offset)?),
            reference: self.dual_reference.clone(),
            dual_reference: self.reference.clone(),
            z0: self.z0.clone(),
            f: self.f.clone(),
        })
    }

    pub fn dual_sample(&self) -> Result<InvariantSample> {
        self.dualize()?.primal_sample()
    }

    /// Hopf fibration `S³ → S²` with fibre length² `a` over `S²` scaled by `b`,
    /// sampled at `x` in a stereographic chart; the dual bundle is trivial.
    pub fn hopf(a: f64, b: f64, x: &[f64]) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(GeomError::InvalidState(format!("Hopf coefficients must be positive, got ({a}, {b})")));
        }
        let m = 2;
        Ok(Self {
            phi: FormJet::constant(Form::scalar(m, a), m),
            offset: FormJet::zero(m, 1, m),
            base: charts::round_sphere(x, b),
            eta: FormJet::zero(m, 1, m),
            mu: FormJet::zero(m, 2, m),
            reference: charts::sphere_potential(x, 1.0),
            dual_reference: FormJet::zero(m, 1, m),
            z0: FormJet::zero(m, 3, m),
            f: FormJet::zero(m, 0, m),
        })
    }
}

/// Residuals of `Z = Z̄`, `Y = −F̄`, `Ȳ = −F`.
pub fn flux_relation(primal: &InvariantSample, dual: &InvariantSample) -> Result<[f64; 3]> {
    let (y, z) = flux(primal)?;
    let (ybar, zbar) = flux(dual)?;
    let f = primal.curvature().value;
    let fbar = dual.curvature().value;
    Ok([z.value.max_abs_diff(&zbar.value), (&y.value + &fbar).max_abs(), (&ybar.value + &f).max_abs()])
}

/// `θ = dy + A` on the fibre product, with the fibre coordinate at `slot`.
fn fibre_product_connection(a: &FormJet, slot: usize, dim: usize) -> FormJet {
    let mut theta = a.lift(dim);
    theta.value += &Form::basis(dim, slot);
    theta
}

/// Max-norm of `p*H − p̄*H̄ − d(θ∧θ̄)` on the fibre product (coordinates `x, y, ȳ`).
pub fn consistency_check(primal: &InvariantSample, dual: &InvariantSample) -> Result<f64> {
    let m = primal.dim();
    let n = m + 2;
    let theta = fibre_product_connection(&primal.connection, m, n);
    let theta_bar = fibre_product_connection(&dual.connection, m + 1, n);
    let (y, z) = flux(primal)?;
    let (ybar, zbar) = flux(dual)?;
    let h = &wedge(&theta.value, &y.value.lift(n))? + &z.value.lift(n);
    let hbar = &wedge(&theta_bar.value, &ybar.value.lift(n))? + &zbar.value.lift(n);
    let d_tt = theta.wedge(&theta_bar)?.exterior_derivative_value();
    Ok((&(&h - &hbar) - &d_tt).max_abs())
}

/// Rates of the dual data `(φ̄, ā, h̄, η̄, μ̄)` induced by a primal variation.
pub fn dual_variation(k: &MetricVariation, c: &FormVariation, phi: f64, offset: &OneForm) -> Result<FlowRate> {
    if !(phi > 0.0) {
        return Err(GeomError::DegenerateFiber(phi));
    }
    let deta = -&c.itheta;
    Ok(FlowRate {
        dphi: -k.thetatheta / (phi * phi),
        da: deta.clone(),
        dh: SymTwoTensor::symmetrized(k.ij.matrix().clone()),
        deta: &k.itheta * (1.0 / phi),
        dmu: &c.ij + &wedge(offset, &deta)?,
    })
}

/// Five max-norm residuals between the pushed-forward primal rates and the
/// dual flow, in the order `(φ̄, θ̄, h̄, η̄, μ̄)`.
pub fn commutation_check(pair: &DualPairConfig, omit_dilaton: bool) -> Result<[f64; 5]> {
    let primal = pair.primal_sample()?;
    let (k, c) = flow_variations(&primal)?;
    let pushed = dual_variation(&k, &c, primal.phi_value(), &pair.offset.value)?;
    let dual = if omit_dilaton { pair.dualize_without_dilaton()? } else { pair.dualize()? };
    let intrinsic = flow_rhs(&dual.primal_sample()?)?;
    Ok(pushed.differences(&intrinsic))
}
