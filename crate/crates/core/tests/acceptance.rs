//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gflow_core::circle_bundle::InvariantSample;
use gflow_core::courant::{lie_element, projections, verify_grf_equivalence, GeneralizedMetric};
use gflow_core::fixtures::{
    random_antisymmetric, random_pair, random_point, random_spd, random_symmetric, RandomFields,
};
use gflow_core::flow_ode::*;
use gflow_core::oracle::oracle_full;
use gflow_core::tduality::*;
use gflow_core::verify::{oracle_deviation, random_buscher};
use gflow_core::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Check {
    what: String,
    value: f64,
    tol: f64,
    ok: bool,
}

impl Check {
    fn le(what: &str, value: f64, tol: f64) -> Self {
        Self { what: what.into(), value, tol, ok: value <= tol }
    }

    fn gt(what: &str, value: f64, tol: f64) -> Self {
        Self { what: what.into(), value, tol, ok: value > tol }
    }

    fn within(what: &str, took: Duration, limit: f64) -> Self {
        Self::le(what, took.as_secs_f64(), limit)
    }
}

fn report(n: usize, title: &str, result: Result<Vec<Check>>) -> bool {
    let checks = match result {
        Ok(c) => c,
        Err(e) => {
            println!("criterion {n} FAIL  {title}: error {e}");
            return false;
        }
    };
    let ok = checks.iter().all(|c| c.ok);
    let detail: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {:.3e}/{:.1e}{}", c.what, c.value, c.tol, if c.ok { "" } else { " !" }))
        .collect();
    println!("criterion {n} {}  {title}: {}", if ok { "PASS" } else { "FAIL" }, detail.join(", "));
    ok
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn curvature() -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let fields = RandomFields::random(&mut rng, 2);
        let x = random_point(&mut rng, 2);
        let o = oracle_full(&fields, &x, 1e-3)?;
        let s: InvariantSample = fields.sample(&x);
        worst = oracle_deviation(&s, &o)?[..4].iter().fold(worst, |w, v| w.max(*v));
    }
    Ok(vec![Check::le("scaled deviation", worst, 1.0), Check::within("seconds", start.elapsed(), 10.0)])
}

fn grf_equivalence() -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut rng = rng(2);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let n = 2 + i % 3;
        let g = random_spd(&mut rng, n, 0.3);
        let b = random_antisymmetric(&mut rng, n, 1.0);
        let rc = random_symmetric(&mut rng, n, 1.0);
        let hs = random_symmetric(&mut rng, n, 1.0);
        let ds = random_antisymmetric(&mut rng, n, 1.0);
        worst = worst.max(verify_grf_equivalence(&g, &b, &rc, &hs, &ds)?);
    }
    Ok(vec![Check::le("residual", worst, 1e-10), Check::within("seconds", start.elapsed(), 1.0)])
}

fn commutation() -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut rng = rng(3);
    let mut worst = 0.0f64;
    let mut control = 0.0f64;
    for i in 0..100 {
        let pair = random_pair(&mut rng, 1 + i % 3);
        worst = commutation_check(&pair, false)?.into_iter().fold(worst, f64::max);
        control = commutation_check(&pair, true)?.into_iter().fold(control, f64::max);
    }
    Ok(vec![
        Check::le("residual", worst, 1e-8),
        Check::gt("omit-dilaton residual", control, 1e-3),
        Check::within("seconds", start.elapsed(), 30.0),
    ])
}

fn hopf_odes() -> Result<Vec<Check>> {
    let (a, b) = reduced_rhs(&ReducedState::new(Scenario::hopf(), 1.0, 1.0)?)?;
    let primal = (a + 1.0).abs().max((b + 1.0).abs());
    let (a, b) = reduced_rhs(&ReducedState::new(Scenario::hopf_dual(), 1.0, 1.0)?)?;
    let dual = (a - 1.0).abs().max((b + 1.0).abs());
    let mut grid = 0.0f64;
    for scenario in [Scenario::hopf(), Scenario::hopf_dual()] {
        for i in 0..10 {
            for j in 0..10 {
                let s = ReducedState::new(scenario, 0.2 + 4.8 * i as f64 / 9.0, 0.2 + 4.8 * j as f64 / 9.0)?;
                let (ad, bd) = reduced_rhs(&s)?;
                let g = generic_rhs(&s)?;
                grid = grid.max((g.a_dot - ad).abs()).max((g.b_dot - bd).abs()).max(g.closure);
            }
        }
    }
    Ok(vec![
        Check::le("hopf (1,1) vs (-1,-1)", primal, 0.0),
        Check::le("hopf_dual (1,1) vs (1,-1)", dual, 0.0),
        Check::le("generic vs closed form on grid", grid, 1e-10),
    ])
}

fn trajectory() -> Result<Vec<Check>> {
    let start = Instant::now();
    let s0 = ReducedState::new(Scenario::hopf(), 1.0, 1.0)?;
    let fine = trajectory_commutation(&integrate(&s0, 1e-4, 0.2)?)?.residual;
    let took = start.elapsed();
    let coarse = [0.02, 0.01, 0.005]
        .iter()
        .map(|dt| Ok(trajectory_commutation(&integrate(&s0, *dt, 0.2)?)?.residual))
        .collect::<Result<Vec<f64>>>()?;
    let order = coarse.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::le("max mismatch", fine, 1e-6),
        Check::gt("order under halving", order, 3.7),
        Check::within("seconds", took, 5.0),
    ])
}

fn qualitative() -> Result<Vec<Check>> {
    let round = integrate(&ReducedState::new(Scenario::hopf(), 1.0, 1.0)?, 1e-3, 2.0)?;
    let gap = round.states.iter().map(|s| (s.a - s.b).abs()).fold(0.0, f64::max);
    let extinct = if round.termination == Termination::Extinction { 0.0 } else { 1.0 };
    let dual = integrate(&ReducedState::new(Scenario::hopf_dual(), 1.0, 1.0)?, 1e-3, 2.0)?;
    let monotone = dual.states.windows(2).filter(|w| !(w[1].a > w[0].a && w[1].b < w[0].b)).count();
    Ok(vec![
        Check::le("|A-B|", gap, 1e-8),
        Check::le("not extinct", extinct, 0.0),
        Check::le("non-monotone dual steps", monotone as f64, 0.0),
    ])
}

fn structural() -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut rng = rng(7);
    let mut w = [0.0f64; 5];
    for i in 0..1000 {
        let m = 1 + i % 3;
        let data = random_buscher(&mut rng, m)?;
        let d = decompose_config(&data)?;
        w[0] = w[0].max(dualize(&dualize(&d)?)?.max_abs_diff(&d));
        w[1] = w[1].max(buscher(&data)?.max_abs_diff(&buscher_explicit(&data)?));

        let n = 2 + i % 3;
        let g = random_spd(&mut rng, n, 0.3);
        let b = random_antisymmetric(&mut rng, n, 1.0);
        let gm = GeneralizedMetric::build(&g, &b)?;
        w[2] = w[2].max(gm.checks().involution);
        let h = random_symmetric(&mut rng, n, 1.0);
        let k = random_antisymmetric(&mut rng, n, 1.0);
        w[3] = w[3].max(lie_element(&h, &k, &gm)?.so_defect());
        let (pp, pm) = projections(&gm);
        w[4] = w[4].max((&pp * &pp - &pp).amax()).max((&pm * &pm - &pm).amax());
    }
    let took = start.elapsed();
    Ok(vec![
        Check::le("involution", w[0], 1e-15),
        Check::le("buscher paths", w[1], 1e-12),
        Check::le("G²-I", w[2], 1e-12),
        Check::le("so(E)", w[3], 1e-12),
        Check::le("idempotency", w[4], 1e-12),
        Check::within("seconds", took, 1.0),
    ])
}

fn consistency() -> Result<Vec<Check>> {
    let mut rng = rng(8);
    let mut pairs = vec![DualPairConfig::hopf(1.0, 1.0, &[0.3, -0.2])?];
    pairs.extend((0..99).map(|i| random_pair(&mut rng, 1 + i % 3)));
    let (mut flux, mut cons) = (0.0f64, 0.0f64);
    for pair in &pairs {
        let primal = pair.primal_sample()?;
        let dual = pair.dual_sample()?;
        flux = flux_relation(&primal, &dual)?.into_iter().fold(flux, f64::max);
        cons = cons.max(consistency_check(&primal, &dual)?);
    }
    Ok(vec![Check::le("flux relation", flux, 1e-10), Check::le("consistency", cons, 1e-10)])
}

fn main() -> ExitCode {
    let results = [
        report(1, "curvature vs full-space oracle, 50 samples", curvature()),
        report(2, "generalized Ricci flow equivalence, 200 instances", grf_equivalence()),
        report(3, "flow/duality commutation, 100 samples", commutation()),
        report(4, "reduced Hopf ODEs", hopf_odes()),
        report(5, "trajectory commutation", trajectory()),
        report(6, "round Hopf collapse and dual behaviour", qualitative()),
        report(7, "structural invariants, 1000 instances", structural()),
        report(8, "dual pair consistency, 100 pairs", consistency()),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
