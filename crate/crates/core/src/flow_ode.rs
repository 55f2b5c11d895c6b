//! Reduced flows of homogeneous circle bundles `g = A θ⊗θ + B ĝ` over a
//! Kähler–Einstein base `(ĝ, ω)` with `dθ = ω`, and their T-duals.

use crate::base_geometry::BaseChartSample;
use crate::charts;
use crate::circle_bundle::{flow_rhs, InvariantSample};
use crate::error::{GeomError, Result};
use crate::jet::FormJet;
use crate::tensor_point::Form;

pub const EXTINCTION: f64 = 1e-6;
pub const BLOWUP: f64 = 1e9;

/// Point of the stereographic chart used for the two-sphere base.
const SPHERE_POINT: [f64; 2] = [0.3, -0.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Hopf,
    HopfDual,
    Cpn,
    CpnDual,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Hopf => "hopf",
            ScenarioKind::HopfDual => "hopf_dual",
            ScenarioKind::Cpn => "cpn",
            ScenarioKind::CpnDual => "cpn_dual",
        }
    }

    pub fn is_dual(self) -> bool {
        matches!(self, ScenarioKind::HopfDual | ScenarioKind::CpnDual)
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hopf" => Ok(ScenarioKind::Hopf),
            "hopf_dual" => Ok(ScenarioKind::HopfDual),
            "cpn" => Ok(ScenarioKind::Cpn),
            "cpn_dual" => Ok(ScenarioKind::CpnDual),
            other => Err(GeomError::InvalidState(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Scenario tag with base parameters: complex dimension `n` and Einstein constant `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub n: usize,
    pub lambda: f64,
}

impl Scenario {
    pub fn hopf() -> Self {
        Self { kind: ScenarioKind::Hopf, n: 1, lambda: 1.0 }
    }

    pub fn hopf_dual() -> Self {
        Self { kind: ScenarioKind::HopfDual, n: 1, lambda: 1.0 }
    }

    pub fn cpn(n: usize, lambda: f64) -> Self {
        Self { kind: ScenarioKind::Cpn, n, lambda }
    }

    pub fn cpn_dual(n: usize, lambda: f64) -> Self {
        Self { kind: ScenarioKind::CpnDual, n, lambda }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 2 {
            return Err(GeomError::InvalidState(format!("complex dimension {} outside 1..=2", self.n)));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(GeomError::InvalidState(format!("Einstein constant must be positive, got {}", self.lambda)));
        }
        if matches!(self.kind, ScenarioKind::Hopf | ScenarioKind::HopfDual) && (self.n != 1 || self.lambda != 1.0) {
            return Err(GeomError::InvalidState("Hopf scenarios have n = 1, λ = 1".into()));
        }
        Ok(())
    }

    /// The T-dual scenario.
    pub fn dual(&self) -> Self {
        let kind = match self.kind {
            ScenarioKind::Hopf => ScenarioKind::HopfDual,
            ScenarioKind::HopfDual => ScenarioKind::Hopf,
            ScenarioKind::Cpn => ScenarioKind::CpnDual,
            ScenarioKind::CpnDual => ScenarioKind::Cpn,
        };
        Self { kind, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub scenario: Scenario,
    /// Fibre coefficient.
    pub a: f64,
    /// Base coefficient.
    pub b: f64,
    pub t: f64,
}

impl ReducedState {
    pub fn new(scenario: Scenario, a: f64, b: f64) -> Result<Self> {
        scenario.validate()?;
        let s = Self { scenario, a, b, t: 0.0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(GeomError::InvalidState(format!(
                "coefficients must be positive and finite, got A = {}, B = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// Fibre length inverted, base untouched.
    pub fn dualize(&self) -> Result<Self> {
        self.validate()?;
        Ok(Self { scenario: self.scenario.dual(), a: 1.0 / self.a, b: self.b, t: self.t })
    }
}

fn closed_form(s: &Scenario, a: f64, b: f64) -> (f64, f64) {
    let n = s.n as f64;
    if s.kind.is_dual() {
        (n / (b * b), -2.0 * s.lambda + 1.0 / (a * b))
    } else {
        (-n * a * a / (b * b), -2.0 * s.lambda + a / b)
    }
}

/// Closed-form `(Ȧ, Ḃ)`.
pub fn reduced_rhs(s: &ReducedState) -> Result<(f64, f64)> {
    s.validate()?;
    Ok(closed_form(&s.scenario, s.a, s.b))
}

/// `(Ȧ, Ḃ)` recovered from the full flow, with the largest deviation of the
/// rates from the ansatz (off-diagonal metric drift, connection and b-field rates).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenericRate {
    pub a_dot: f64,
    pub b_dot: f64,
    pub closure: f64,
}

/// Unit-scale base `ĝ` and a potential with `dθ = ω`.
fn unit_base(s: &Scenario) -> (BaseChartSample, FormJet) {
    match s.kind {
        ScenarioKind::Hopf | ScenarioKind::HopfDual => {
            (charts::round_sphere(&SPHERE_POINT, 1.0), charts::sphere_potential(&SPHERE_POINT, 1.0))
        }
        ScenarioKind::Cpn | ScenarioKind::CpnDual => charts::fubini_study(s.n, 2.0 * (s.n as f64 + 1.0) / s.lambda),
    }
}

/// The ansatz as a circle-invariant sample.
pub fn ansatz_sample(s: &ReducedState) -> Result<InvariantSample> {
    s.validate()?;
    let (unit, potential) = unit_base(&s.scenario);
    let m = unit.dim();
    let mut sample = InvariantSample::trivial(unit.scaled(s.b)?);
    sample.phi = FormJet::constant(Form::scalar(m, s.a), m);
    if s.scenario.kind.is_dual() {
        sample.y0 = potential.exterior_derivative()?.scale(-1.0);
    } else {
        sample.connection = potential;
    }
    Ok(sample)
}

pub fn generic_rhs(s: &ReducedState) -> Result<GenericRate> {
    let sample = ansatz_sample(s)?;
    let (unit, _) = unit_base(&s.scenario);
    let rate = flow_rhs(&sample)?;
    let ghat = unit.metric().matrix();
    let b_dot = rate.dh.get(0, 0) / ghat[(0, 0)];
    let drift = (rate.dh.matrix() - ghat * b_dot).amax();
    let closure = drift.max(rate.da.max_abs()).max(rate.deta.max_abs()).max(rate.dmu.max_abs());
    Ok(GenericRate { a_dot: rate.dphi, b_dot, closure })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Horizon,
    Extinction,
    Blowup,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Horizon => "horizon",
            Termination::Extinction => "extinction",
            Termination::Blowup => "blowup",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scenario: Scenario,
    pub dt: f64,
    /// Accepted states on the grid `t_k = k·dt`.
    pub states: Vec<ReducedState>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> &ReducedState {
        self.states.last().expect("trajectories hold the initial state")
    }
}

fn rk4_step(s: &Scenario, a: f64, b: f64, dt: f64) -> (f64, f64) {
    let (k1a, k1b) = closed_form(s, a, b);
    let (k2a, k2b) = closed_form(s, a + 0.5 * dt * k1a, b + 0.5 * dt * k1b);
    let (k3a, k3b) = closed_form(s, a + 0.5 * dt * k2a, b + 0.5 * dt * k2b);
    let (k4a, k4b) = closed_form(s, a + dt * k3a, b + dt * k3b);
    (a + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a), b + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b))
}

/// Classical fixed-step RK4 on the grid `t_k = k·dt` up to `t_max`.
pub fn integrate(s0: &ReducedState, dt: f64, t_max: f64) -> Result<Trajectory> {
    s0.validate()?;
    s0.scenario.validate()?;
    if !(dt > 0.0 && dt.is_finite()) || !(t_max > 0.0 && t_max.is_finite()) {
        return Err(GeomError::InvalidState(format!("need dt > 0 and t_max > 0, got {dt}, {t_max}")));
    }
    let steps = (t_max / dt).round().max(1.0) as usize;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(ReducedState { t: 0.0, ..*s0 });
    let (mut a, mut b) = (s0.a, s0.b);
    let mut termination = Termination::Horizon;
    for k in 1..=steps {
        let (na, nb) = rk4_step(&s0.scenario, a, b, dt);
        if !(na.is_finite() && nb.is_finite()) {
            termination = if a.min(b) < 1e-2 { Termination::Extinction } else { Termination::Blowup };
            break;
        }
        if na < EXTINCTION || nb < EXTINCTION {
            termination = Termination::Extinction;
            break;
        }
        if na > BLOWUP || nb > BLOWUP {
            termination = Termination::Blowup;
            break;
        }
        a = na;
        b = nb;
        states.push(ReducedState { scenario: s0.scenario, a, b, t: k as f64 * dt });
    }
    Ok(Trajectory { scenario: s0.scenario, dt, states, termination })
}

/// Largest gap between the closed-form and generic right-hand sides (and the
/// generic closure defect) over the accepted states.
pub fn generic_gap(traj: &Trajectory) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in &traj.states {
        let (a, b) = reduced_rhs(s)?;
        let g = generic_rhs(s)?;
        worst = worst.max((a - g.a_dot).abs()).max((b - g.b_dot).abs()).max(g.closure);
    }
    Ok(worst)
}

/// Trajectory-level comparison of the dualized primal flow with the dual flow.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutationReport {
    pub dual: Trajectory,
    /// `max_t max(|1/A − Ā|, |B − B̄|)`.
    pub residual: f64,
    /// `max_t |A·Ā − 1|`.
    pub product_defect: f64,
    /// Pointwise residual at each compared grid point.
    pub pointwise: Vec<f64>,
}

pub fn trajectory_commutation(primal: &Trajectory) -> Result<CommutationReport> {
    let s0 = primal.states.first().ok_or_else(|| GeomError::MismatchedGrids("empty trajectory".into()))?;
    let t_max = primal.last().t.max(primal.dt);
    let dual = integrate(&s0.dualize()?, primal.dt, t_max)?;
    let mut residual = 0.0f64;
    let mut product_defect = 0.0f64;
    let mut pointwise = Vec::new();
    for (p, d) in primal.states.iter().zip(&dual.states) {
        if (p.t - d.t).abs() > 1e-12 * (1.0 + p.t.abs()) {
            return Err(GeomError::MismatchedGrids(format!("t = {} vs {}", p.t, d.t)));
        }
        let r = (1.0 / p.a - d.a).abs().max((p.b - d.b).abs());
        pointwise.push(r);
        residual = residual.max(r);
        product_defect = product_defect.max((p.a * d.a - 1.0).abs());
    }
    Ok(CommutationReport { dual, residual, product_defect, pointwise })
}

/// States of `traj` on the coarser grid `t_k = k·dt`.
fn on_grid(traj: &Trajectory, dt: f64) -> Result<Vec<&ReducedState>> {
    let ratio = (dt / traj.dt).round() as usize;
    if ratio == 0 || ((ratio as f64) * traj.dt - dt).abs() > 1e-12 * dt {
        return Err(GeomError::MismatchedGrids(format!("dt {dt} is not a multiple of {}", traj.dt)));
    }
    Ok(traj.states.iter().step_by(ratio).collect())
}

/// Max-norm distance of two trajectories on the grid of step `dt`, over
/// their common time span.
pub fn grid_distance(a: &Trajectory, b: &Trajectory, dt: f64) -> Result<f64> {
    let xa = on_grid(a, dt)?;
    let xb = on_grid(b, dt)?;
    Ok(xa.iter().zip(&xb).fold(0.0f64, |w, (p, q)| w.max((p.a - q.a).abs()).max((p.b - q.b).abs())))
}

/// Step-halving diagnostic: errors at `dt` and `dt/2` against a `dt/8` reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepHalving {
    pub error_dt: f64,
    pub error_half: f64,
    pub ratio: f64,
    /// `log₂(ratio)`, close to 4 for RK4.
    pub order: f64,
}

pub fn step_halving(s0: &ReducedState, dt: f64, t_max: f64) -> Result<StepHalving> {
    let coarse = integrate(s0, dt, t_max)?;
    let half = integrate(s0, dt / 2.0, t_max)?;
    let reference = integrate(s0, dt / 8.0, t_max)?;
    let error_dt = grid_distance(&coarse, &reference, dt)?;
    let error_half = grid_distance(&half, &reference, dt)?;
    let ratio = error_dt / error_half;
    Ok(StepHalving { error_dt, error_half, ratio, order: ratio.log2() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_hopf_rates() {
        let s = ReducedState::new(Scenario::hopf(), 1.0, 1.0).unwrap();
        assert_eq!(reduced_rhs(&s).unwrap(), (-1.0, -1.0));
        let d = s.dualize().unwrap();
        assert_eq!(reduced_rhs(&d).unwrap(), (1.0, -1.0));
    }

    #[test]
    fn invalid_states_are_rejected() {
        assert!(ReducedState::new(Scenario::hopf(), 0.0, 1.0).is_err());
        assert!(ReducedState::new(Scenario::hopf(), 1.0, -1.0).is_err());
        let s = ReducedState::new(Scenario::hopf(), 1.0, 1.0).unwrap();
        assert!(integrate(&s, 0.0, 1.0).is_err());
    }

    #[test]
    fn generic_path_closes_on_the_ansatz() {
        for sc in [Scenario::hopf(), Scenario::hopf_dual(), Scenario::cpn(2, 3.0), Scenario::cpn_dual(2, 3.0)] {
            let s = ReducedState::new(sc, 0.7, 1.3).unwrap();
            let (a, b) = reduced_rhs(&s).unwrap();
            let g = generic_rhs(&s).unwrap();
            assert!((a - g.a_dot).abs() < 1e-10 && (b - g.b_dot).abs() < 1e-10, "{sc:?}");
            assert!(g.closure < 1e-10, "{sc:?}");
        }
    }
}
