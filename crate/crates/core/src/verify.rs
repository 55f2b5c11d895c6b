//! Seeded identity suites reporting the largest residual per identity.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::base_geometry::Christoffel;
use crate::circle_bundle::{
    codiff_h, explicit_fibre_rates, flow_rhs, flow_variations, h_squared, hessian_full, kk_christoffels, kk_ricci,
    variation_rates, FlowRate, InvariantSample,
};
use crate::courant::{
    bismut_connection, extract, induced_variation, lie_element, lie_element_matrix, metric_derivative, projections,
    torsion_residual, verify_grf_equivalence, GeneralizedMetric, Sign,
};
use crate::error::{GeomError, Result};
use crate::fixtures::{
    random_antisymmetric, random_form, random_pair, random_point, random_spd, random_symmetric, HopfFields,
    RandomFields,
};
use crate::flow_ode::{generic_rhs, reduced_rhs, ReducedState, Scenario};
use crate::oracle::{oracle_full, FullOracle};
use crate::tduality::{
    buscher, buscher_explicit, commutation_check, consistency_check, dual_variation, dualize, flux_relation,
    BuscherData, DecomposedConfig, DualPairConfig,
};
use crate::tensor_point::{BaseMetric, Form};

/// Oracle agreement: `|a − b| ≤ ORACLE_ABS + ORACLE_REL·|b|`.
pub const ORACLE_REL: f64 = 1e-6;
pub const ORACLE_ABS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Curvature,
    Courant,
    Tduality,
    Commutation,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Curvature => "curvature",
            Suite::Courant => "courant",
            Suite::Tduality => "tduality",
            Suite::Commutation => "commutation",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "curvature" => Ok(Suite::Curvature),
            "courant" => Ok(Suite::Courant),
            "tduality" => Ok(Suite::Tduality),
            "commutation" => Ok(Suite::Commutation),
            "all" => Ok(Suite::All),
            other => Err(GeomError::InvalidState(format!("unknown suite '{other}'"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub suite: Suite,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Row {
    fn new(suite: Suite, name: &str, residual: f64, tolerance: f64) -> Self {
        Self { suite, name: name.to_string(), residual, tolerance, passed: residual <= tolerance }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub seed: u64,
    pub samples: usize,
    pub omit_dilaton: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self { seed: 0, samples: 100, omit_dilaton: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: Suite,
    pub options: Options,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn row(&self, name: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(0).max(8);
        writeln!(
            f,
            "suite {} seed {} samples {}{}",
            self.suite,
            self.options.seed,
            self.options.samples,
            if self.options.omit_dilaton { " (dilaton shift omitted)" } else { "" }
        )?;
        writeln!(f, "{:<12} {:<width$} {:>12} {:>10}  status", "suite", "identity", "residual", "tolerance")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<12} {:<width$} {:>12.3e} {:>10.0e}  {}",
                r.suite.name(),
                r.name,
                r.residual,
                r.tolerance,
                if r.passed { "PASS" } else { "FAIL" }
            )?;
        }
        write!(f, "{}", if self.all_passed() { "all identities hold" } else { "verification FAILED" })
    }
}

pub fn run(suite: Suite, options: &Options) -> Result<Report> {
    let rows = match suite {
        Suite::Curvature => curvature(options)?,
        Suite::Courant => courant(options)?,
        Suite::Tduality => tduality(options)?,
        Suite::Commutation => commutation(options)?,
        Suite::All => {
            let mut rows = curvature(options)?;
            rows.extend(courant(options)?);
            rows.extend(tduality(options)?);
            rows.extend(commutation(options)?);
            rows
        }
    };
    Ok(Report { suite, options: *options, rows })
}

fn rng(options: &Options) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(options.seed)
}

fn scaled(actual: f64, reference: f64) -> f64 {
    (actual - reference).abs() / (ORACLE_ABS + ORACLE_REL * reference.abs())
}

/// Closed-form curvature quantities against the oracle, as the largest
/// tolerance-scaled deviation (≤ 1 means agreement) for Ricci, `H²`, `d*H`,
/// the Hessian of the gauge function and the frame Christoffels.
pub fn oracle_deviation(s: &InvariantSample, o: &FullOracle) -> Result<[f64; 5]> {
    let m = s.dim();
    let t = m;
    let rc = kk_ricci(s)?;
    let hs = h_squared(s)?;
    let dh = codiff_h(s)?;
    let he = hessian_full(s, &s.f)?;
    let ch = kk_christoffels(s)?.frame_array();
    let mut w = [0.0f64; 5];
    let mut up = |k: usize, a: f64, b: f64| w[k] = w[k].max(scaled(a, b));
    for i in 0..m {
        for j in 0..m {
            up(0, rc.rij.get(i, j), o.ricci[(i, j)]);
            up(1, hs.hij.get(i, j), o.h_squared[(i, j)]);
            up(2, dh.ij.get(&[i, j]), o.codiff_h[(i, j)]);
            up(3, he.ij.get(i, j), o.hessian[(i, j)]);
        }
        for (a, b) in [(i, t), (t, i)] {
            up(0, rc.ritheta.get(&[i]), o.ricci[(a, b)]);
            up(1, hs.hitheta.get(&[i]), o.h_squared[(a, b)]);
            up(3, he.itheta.get(&[i]), o.hessian[(a, b)]);
        }
        up(2, dh.itheta.get(&[i]), o.codiff_h[(i, t)]);
        up(2, -dh.itheta.get(&[i]), o.codiff_h[(t, i)]);
    }
    up(0, rc.rthetatheta, o.ricci[(t, t)]);
    up(1, hs.hthetatheta, o.h_squared[(t, t)]);
    up(2, 0.0, o.codiff_h[(t, t)]);
    up(3, he.thetatheta, o.hessian[(t, t)]);
    for c in 0..=m {
        for a in 0..=m {
            for b in 0..=m {
                up(4, ch.get(c, a, b), o.christoffel.get(c, a, b));
            }
        }
    }
    Ok(w)
}

/// Metric in the adapted frame, `diag(h, φ)`.
pub fn frame_metric(s: &InvariantSample) -> DMatrix<f64> {
    let m = s.dim();
    let mut g = DMatrix::zeros(m + 1, m + 1);
    g.view_mut((0, 0), (m, m)).copy_from(s.h().matrix());
    g[(m, m)] = s.phi_value();
    g
}

fn curvature(options: &Options) -> Result<Vec<Row>> {
    let suite = Suite::Curvature;
    let mut rng = rng(options);
    let mut oracle = [0.0f64; 5];
    let mut explicit = 0.0f64;
    for _ in 0..options.samples {
        let fields = RandomFields::random(&mut rng, 2);
        let x = random_point(&mut rng, 2);
        let s = fields.sample(&x);
        let o = oracle_full(&fields, &x, 1e-3)?;
        for (w, v) in oracle.iter_mut().zip(oracle_deviation(&s, &o)?) {
            *w = w.max(v);
        }
        let (dphi, da) = explicit_fibre_rates(&s)?;
        let rate = flow_rhs(&s)?;
        explicit = explicit.max((dphi - rate.dphi).abs()).max(da.max_abs_diff(&rate.da));
    }

    let hopf = HopfFields { a: 0.25, b: 0.25 };
    let x = [0.3, -0.2];
    let o = oracle_full(&hopf, &x, 1e-3)?;
    let s = DualPairConfig::hopf(0.25, 0.25, &x)?.primal_sample()?;
    let g = frame_metric(&s);
    let einstein_fd = (&o.ricci - &g * 2.0).amax();
    let rc = kk_ricci(&s)?;
    let mut ric = DMatrix::zeros(3, 3);
    ric.view_mut((0, 0), (2, 2)).copy_from(rc.rij.matrix());
    for i in 0..2 {
        ric[(i, 2)] = rc.ritheta.get(&[i]);
        ric[(2, i)] = rc.ritheta.get(&[i]);
    }
    ric[(2, 2)] = rc.rthetatheta;
    let einstein = (ric - &g * 2.0).amax();

    let mut ansatz = 0.0f64;
    for scenario in [Scenario::hopf(), Scenario::hopf_dual(), Scenario::cpn(2, 1.0), Scenario::cpn_dual(2, 1.0)] {
        for i in 0..10 {
            for j in 0..10 {
                let a = 0.2 + 4.8 * i as f64 / 9.0;
                let b = 0.2 + 4.8 * j as f64 / 9.0;
                let st = ReducedState::new(scenario, a, b)?;
                let (ad, bd) = reduced_rhs(&st)?;
                let gen = generic_rhs(&st)?;
                ansatz = ansatz.max((gen.a_dot - ad).abs()).max((gen.b_dot - bd).abs()).max(gen.closure);
            }
        }
    }

    Ok(vec![
        Row::new(suite, "ricci vs oracle (scaled)", oracle[0], 1.0),
        Row::new(suite, "H² vs oracle (scaled)", oracle[1], 1.0),
        Row::new(suite, "d*H vs oracle (scaled)", oracle[2], 1.0),
        Row::new(suite, "hessian vs oracle (scaled)", oracle[3], 1.0),
        Row::new(suite, "christoffel vs oracle (scaled)", oracle[4], 1.0),
        Row::new(suite, "explicit fibre rates", explicit, 1e-10),
        Row::new(suite, "unit S³ Einstein (oracle)", einstein_fd, 1e-5),
        Row::new(suite, "unit S³ Einstein (closed form)", einstein, 1e-12),
        Row::new(suite, "reduced ODE vs full flow", ansatz, 1e-10),
    ])
}

/// Symmetric random coordinate Christoffel symbols.
fn random_christoffel<R: Rng>(rng: &mut R, n: usize) -> Christoffel {
    let mut c = Christoffel::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-1.0..1.0);
                c.set(k, i, j, v);
                c.set(k, j, i, v);
            }
        }
    }
    c
}

/// Frame `(g, b, Rc, H², d*H)` of a circle-invariant sample.
pub fn bundle_flow_data(s: &InvariantSample) -> Result<[DMatrix<f64>; 5]> {
    let m = s.dim();
    let n = m + 1;
    let g = frame_metric(s);
    let mut b = DMatrix::zeros(n, n);
    let mut rc = DMatrix::zeros(n, n);
    let mut hsq = DMatrix::zeros(n, n);
    let mut dstar = DMatrix::zeros(n, n);
    let ric = kk_ricci(s)?;
    let hs = h_squared(s)?;
    let dh = codiff_h(s)?;
    for i in 0..m {
        for j in 0..m {
            b[(i, j)] = s.mu.value.get(&[i, j]);
            rc[(i, j)] = ric.rij.get(i, j);
            hsq[(i, j)] = hs.hij.get(i, j);
            dstar[(i, j)] = dh.ij.get(&[i, j]);
        }
        b[(i, m)] = -s.eta.value.get(&[i]);
        b[(m, i)] = s.eta.value.get(&[i]);
        rc[(i, m)] = ric.ritheta.get(&[i]);
        rc[(m, i)] = ric.ritheta.get(&[i]);
        hsq[(i, m)] = hs.hitheta.get(&[i]);
        hsq[(m, i)] = hs.hitheta.get(&[i]);
        dstar[(i, m)] = dh.itheta.get(&[i]);
        dstar[(m, i)] = -dh.itheta.get(&[i]);
    }
    rc[(m, m)] = ric.rthetatheta;
    hsq[(m, m)] = hs.hthetatheta;
    Ok([g, b, rc, hsq, dstar])
}

fn courant(options: &Options) -> Result<Vec<Row>> {
    let suite = Suite::Courant;
    let mut rng = rng(options);
    let mut w = [0.0f64; 12];
    for i in 0..options.samples {
        let n = 2 + i % 3;
        let g = random_spd(&mut rng, n, 0.3);
        let b = random_antisymmetric(&mut rng, n, 1.0);
        let gm = GeneralizedMetric::build(&g, &b)?;
        let c = gm.checks();
        w[0] = w[0].max(c.involution);
        w[1] = w[1].max(c.self_adjoint);
        w[2] = w[2].max(-c.min_eigenvalue);
        let (pp, pm) = projections(&gm);
        let idem = (&pp * &pp - &pp).amax().max((&pm * &pm - &pm).amax()).max((&pp * &pm).amax());
        w[3] = w[3].max(idem);
        let (g2, b2) = extract(gm.matrix())?;
        w[4] = w[4].max((g2 - &g).amax()).max((b2 - &b).amax());

        let h = random_symmetric(&mut rng, n, 1.0);
        let k = random_antisymmetric(&mut rng, n, 1.0);
        let v = lie_element(&h, &k, &gm)?;
        w[5] = w[5].max(v.so_defect());
        w[6] = w[6].max((v.matrix() - lie_element_matrix(&h, &k, &gm)?.matrix()).amax());
        let (gd, bd) = induced_variation(&gm, &v)?;
        w[7] = w[7].max((gd - &h).amax()).max((bd - &k).amax());
        let comm = v.matrix() * gm.matrix() - gm.matrix() * v.matrix();
        w[8] = w[8].max((metric_derivative(&gm, &h, &k) - comm).amax());

        let rc = random_symmetric(&mut rng, n, 1.0);
        let hs = random_symmetric(&mut rng, n, 1.0);
        let ds = random_antisymmetric(&mut rng, n, 1.0);
        w[9] = w[9].max(verify_grf_equivalence(&g, &b, &rc, &hs, &ds)?);

        let m = 1 + i % 3;
        let fields = RandomFields::random(&mut rng, m);
        let x = random_point(&mut rng, m);
        let [fg, fb, frc, fhs, fds] = bundle_flow_data(&fields.sample(&x))?;
        w[10] = w[10].max(verify_grf_equivalence(&fg, &fb, &frc, &fhs, &fds)?);

        let gamma = random_christoffel(&mut rng, n);
        let flux = random_form(&mut rng, n, 3, 1.0);
        for sign in [Sign::Plus, Sign::Minus] {
            let conn = bismut_connection(&gamma, &flux, &g, sign)?;
            w[11] = w[11].max(torsion_residual(&conn, &flux, &g, sign));
        }
    }
    Ok(vec![
        Row::new(suite, "G² = I", w[0], 1e-12),
        Row::new(suite, "G self-adjoint", w[1], 1e-12),
        Row::new(suite, "G positive (−λmin)", w[2].max(0.0), 0.0),
        Row::new(suite, "projector idempotency", w[3], 1e-12),
        Row::new(suite, "extract round trip", w[4], 1e-12),
        Row::new(suite, "so(E) membership", w[5], 1e-12),
        Row::new(suite, "projector vs matrix path", w[6], 1e-12),
        Row::new(suite, "induced variation round trip", w[7], 1e-12),
        Row::new(suite, "metric derivative = [V, G]", w[8], 1e-12),
        Row::new(suite, "GRF equivalence (random)", w[9], 1e-10),
        Row::new(suite, "GRF equivalence (bundle)", w[10], 1e-10),
        Row::new(suite, "Bismut torsion", w[11], 1e-12),
    ])
}

/// Random Buscher components with `g0 > 0` and `g` positive definite.
pub fn random_buscher<R: Rng>(rng: &mut R, m: usize) -> Result<BuscherData> {
    let g = random_spd(rng, m + 1, 0.3);
    let b = random_antisymmetric(rng, m + 1, 1.0);
    Ok(BuscherData {
        g0: g[(m, m)],
        g1: Form::one_form(&(0..m).map(|i| g[(i, m)]).collect::<Vec<_>>()),
        g2: g.view((0, 0), (m, m)).into_owned(),
        b1: Form::one_form(&(0..m).map(|i| b[(i, m)]).collect::<Vec<_>>()),
        b2: Form::from_antisymmetric(&b.view((0, 0), (m, m)).into_owned())?,
    })
}

/// `d + ε·r` for decomposed data and a rate.
pub fn advance(d: &DecomposedConfig, r: &FlowRate, eps: f64) -> Result<DecomposedConfig> {
    Ok(DecomposedConfig {
        phi: d.phi + eps * r.dphi,
        a: &d.a + &(&r.da * eps),
        h: BaseMetric::new(d.h.matrix() + r.dh.matrix() * eps)?,
        eta: &d.eta + &(&r.deta * eps),
        mu: &d.mu + &(&r.dmu * eps),
    })
}

/// Central difference of `dualize` along the primal flow of `pair`, against
/// [`dual_variation`].
pub fn chain_rule_gap(pair: &DualPairConfig) -> Result<f64> {
    let s = pair.primal_sample()?;
    let (k, c) = flow_variations(&s)?;
    let rate = variation_rates(&k, &c, &s)?;
    let pushed = dual_variation(&k, &c, s.phi_value(), &pair.offset.value)?;
    let d = pair.point()?;
    let flat = |eps: f64| -> Result<Vec<f64>> { Ok(flatten(&dualize(&advance(&d, &rate, eps)?)?)) };
    let quotient = |eps: f64| -> Result<Vec<f64>> {
        Ok(flat(eps)?.iter().zip(flat(-eps)?).map(|(p, q)| (p - q) / (2.0 * eps)).collect())
    };
    let step = 1e-3 / rate.max_abs().max(1.0);
    let (coarse, fine) = (quotient(step)?, quotient(0.5 * step)?);
    let expect = flatten(&DecomposedConfig {
        phi: pushed.dphi,
        a: pushed.da.clone(),
        h: BaseMetric::identity(d.dim()),
        eta: pushed.deta.clone(),
        mu: pushed.dmu.clone(),
    });
    let m = d.dim();
    let dh = pushed.dh.matrix();
    let gap = coarse
        .iter()
        .zip(&fine)
        .zip(&expect)
        .enumerate()
        .map(|(idx, ((c, f), e))| {
            let e = if (1 + m..1 + m + m * m).contains(&idx) { dh.as_slice()[idx - 1 - m] } else { *e };
            ((4.0 * f - c) / 3.0 - e).abs()
        })
        .fold(0.0, f64::max);
    Ok(gap)
}

fn flatten(d: &DecomposedConfig) -> Vec<f64> {
    let mut v = vec![d.phi];
    v.extend_from_slice(d.a.components());
    v.extend(d.h.matrix().iter());
    v.extend_from_slice(d.eta.components());
    v.extend_from_slice(d.mu.components());
    v
}

fn tduality(options: &Options) -> Result<Vec<Row>> {
    let suite = Suite::Tduality;
    let mut rng = rng(options);
    let mut w = [0.0f64; 6];
    let mut pairs = vec![DualPairConfig::hopf(1.0, 1.0, &[0.3, -0.2])?];
    for i in 0..options.samples {
        let m = 1 + i % 3;
        let pair = random_pair(&mut rng, m);
        let d = pair.point()?;
        w[0] = w[0].max(dualize(&dualize(&d)?)?.max_abs_diff(&d));
        let data = random_buscher(&mut rng, m)?;
        let dual = buscher(&data)?;
        w[1] = w[1].max(dual.max_abs_diff(&buscher_explicit(&data)?));
        w[2] = w[2].max(buscher(&dual)?.max_abs_diff(&data));
        w[5] = w[5].max(chain_rule_gap(&pair)?);
        pairs.push(pair);
    }
    for pair in &pairs {
        let primal = pair.primal_sample()?;
        let dual = pair.dual_sample()?;
        w[3] = w[3].max(flux_relation(&primal, &dual)?.into_iter().fold(0.0, f64::max));
        w[4] = w[4].max(consistency_check(&primal, &dual)?);
    }
    Ok(vec![
        Row::new(suite, "dualize involution", w[0], 1e-15),
        Row::new(suite, "buscher vs explicit formulas", w[1], 1e-12),
        Row::new(suite, "buscher involution", w[2], 1e-12),
        Row::new(suite, "flux relation", w[3], 1e-10),
        Row::new(suite, "fibre product consistency", w[4], 1e-10),
        Row::new(suite, "dual variation chain rule", w[5], 1e-8),
    ])
}

pub const COMMUTATION_ROWS: [&str; 5] = ["φ̄ rate", "ā rate", "h̄ rate", "η̄ rate", "μ̄ rate"];

fn commutation(options: &Options) -> Result<Vec<Row>> {
    let suite = Suite::Commutation;
    let mut rng = rng(options);
    let mut w = [0.0f64; 5];
    for i in 0..options.samples {
        let pair = random_pair(&mut rng, 1 + i % 3);
        for (w, r) in w.iter_mut().zip(commutation_check(&pair, options.omit_dilaton)?) {
            *w = w.max(r);
        }
    }
    Ok(COMMUTATION_ROWS.iter().zip(w).map(|(name, r)| Row::new(suite, name, r, 1e-8)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Curvature, Suite::Courant, Suite::Tduality, Suite::Commutation, Suite::All] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn small_runs_pass() {
        let options = Options { seed: 3, samples: 4, omit_dilaton: false };
        for s in [Suite::Courant, Suite::Tduality, Suite::Commutation] {
            let report = run(s, &options).unwrap();
            assert!(report.all_passed(), "{report}");
        }
    }
}
