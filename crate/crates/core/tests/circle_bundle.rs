use gflow_core::base_geometry::{codiff, BaseChartSample};
use gflow_core::circle_bundle::*;
use gflow_core::fixtures::{random_antisymmetric, random_form, random_point, random_spd, AnalyticForm, RandomFields};
use gflow_core::jet::FormJet;
use gflow_core::tduality::DualPairConfig;
use gflow_core::tensor_point::{wedge, Form};
use gflow_core::verify::oracle_deviation;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn flat_sample(m: usize) -> InvariantSample {
    InvariantSample::trivial(BaseChartSample::flat(m))
}

#[test]
fn product_metric_decomposes_trivially() {
    let mut g = DMatrix::identity(3, 3);
    g[(0, 0)] = 2.0;
    g[(1, 1)] = 3.0;
    let d = decompose_metric(&g).unwrap();
    assert_eq!(d.phi, 1.0);
    assert_eq!(d.a.max_abs(), 0.0);
    assert_eq!(d.h.matrix(), &g.view((0, 0), (2, 2)).into_owned());
}

#[test]
fn fibre_last_example() {
    // (x, y) ordering of g = 2dy² + 2dx dy + dx².
    let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]);
    let d = decompose_metric(&g).unwrap();
    assert_eq!(d.phi, 2.0);
    assert_eq!(d.a.get(&[0]), 0.5);
    assert_eq!(d.h.matrix()[(0, 0)], 0.5);
    assert_eq!(assemble_metric(&d), g);
}

#[test]
fn two_form_special_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_form(&mut rng, 3, 1, 1.0);
    let mu = random_form(&mut rng, 3, 2, 1.0);
    let basic = mu.lift(4);
    let d = decompose_two_form(&basic, &a).unwrap();
    assert_eq!(d.eta.max_abs(), 0.0);
    assert!(d.mu.max_abs_diff(&mu) < 1e-15);

    let eta = random_form(&mut rng, 3, 1, 1.0);
    let b = assemble_two_form(&DecomposedTwoForm { eta: eta.clone(), mu: Form::zero(3, 2) }, &a).unwrap();
    let theta = connection_form(&a);
    assert!(b.max_abs_diff(&wedge(&theta, &eta.lift(4)).unwrap()) < 1e-15);
    let d = decompose_two_form(&b, &a).unwrap();
    assert!(d.eta.max_abs_diff(&eta) < 1e-15);
    assert!(d.mu.max_abs() < 1e-15);
}

#[test]
fn flux_without_b_field_is_the_background() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fields = RandomFields::random(&mut rng, 3);
    let x = random_point(&mut rng, 3);
    let mut s = fields.sample(&x);
    s.eta = FormJet::zero(3, 1, 3);
    s.mu = FormJet::zero(3, 2, 3);
    let (y, z) = flux(&s).unwrap();
    assert!(y.value.max_abs_diff(&s.y0.value) < 1e-15);
    assert!(z.value.max_abs_diff(&s.z0.value) < 1e-15);
}

#[test]
fn closed_eta_gives_curvature_wedge() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let fields = RandomFields::random(&mut rng, 3);
    let x = random_point(&mut rng, 3);
    let mut s = fields.sample(&x);
    let eta0 = random_form(&mut rng, 3, 1, 1.0);
    s.eta = FormJet::constant(eta0.clone(), 3);
    s.mu = FormJet::zero(3, 2, 3);
    s.y0 = FormJet::zero(3, 2, 3);
    s.z0 = FormJet::zero(3, 3, 3);
    let (y, z) = flux(&s).unwrap();
    assert!(y.value.max_abs() < 1e-15);
    let expect = wedge(&s.curvature().value, &eta0).unwrap();
    assert!(z.value.max_abs_diff(&expect) < 1e-14);
}

#[test]
fn exact_flux_is_closed() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let m = 4;
    for _ in 0..3 {
        let fields = RandomFields::random(&mut rng, m);
        let x = random_point(&mut rng, m);
        let mut s = fields.sample(&x);
        s.y0 = FormJet::zero(m, 2, m);
        s.z0 = FormJet::zero(m, 3, m);
        let (y, z) = flux(&s).unwrap();
        // d(θ∧Y + Z) = F∧Y + dZ − θ∧dY.
        assert!(y.exterior_derivative_value().max_abs() < 1e-12);
        let f = s.curvature().value;
        let y = &y.value;
        let fy = f.get(&[0, 1]) * y.get(&[2, 3]) - f.get(&[0, 2]) * y.get(&[1, 3])
            + f.get(&[0, 3]) * y.get(&[1, 2])
            + f.get(&[1, 2]) * y.get(&[0, 3])
            - f.get(&[1, 3]) * y.get(&[0, 2])
            + f.get(&[2, 3]) * y.get(&[0, 1]);
        let dz = z.exterior_derivative_value().get(&[0, 1, 2, 3]);
        assert!((fy + dz).abs() < 1e-12, "{fy} {dz}");
    }
}

#[test]
fn linear_fibre_length_christoffel() {
    let mut s = flat_sample(1);
    s.phi = FormJet::scalar(0.7, &[1.0], &[vec![0.0]]);
    let c = kk_christoffels(&s).unwrap().frame_array();
    assert!((c.get(0, 1, 1) + 0.5).abs() < 1e-15);
}

#[test]
fn product_bundle_has_only_base_christoffels() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let fields = RandomFields::random(&mut rng, 2);
    let x = random_point(&mut rng, 2);
    let s = InvariantSample::trivial(fields.metric.sample(&x));
    let c = kk_christoffels(&s).unwrap().frame_array();
    let base = gflow_core::base_geometry::christoffel(&s.base);
    for a in 0..3 {
        for b in 0..3 {
            for d in 0..3 {
                let expect = if a < 2 && b < 2 && d < 2 { base.get(a, b, d) } else { 0.0 };
                assert!((c.get(a, b, d) - expect).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn flat_bundle_is_flat_and_fixed() {
    let s = flat_sample(3);
    let r = kk_ricci(&s).unwrap();
    assert_eq!(r.rij.matrix().amax(), 0.0);
    assert_eq!(r.ritheta.max_abs(), 0.0);
    assert_eq!(r.rthetatheta, 0.0);
    let h = h_squared(&s).unwrap();
    assert_eq!(h.hij.matrix().amax().max(h.hitheta.max_abs()).max(h.hthetatheta.abs()), 0.0);
    let c = codiff_h(&s).unwrap();
    assert_eq!(c.ij.max_abs().max(c.itheta.max_abs()), 0.0);
    assert_eq!(flow_rhs(&s).unwrap().max_abs(), 0.0);
}

#[test]
fn berger_sphere_coefficients() {
    for (a, b) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.7)] {
        let s = DualPairConfig::hopf(a, b, &[0.3, -0.2]).unwrap().primal_sample().unwrap();
        let r = kk_ricci(&s).unwrap();
        assert!((-2.0 * r.rthetatheta + a * a / (b * b)).abs() < 1e-12);
        let rate = flow_rhs(&s).unwrap();
        assert!((rate.dphi + a * a / (b * b)).abs() < 1e-12);
        let unit = s.h().matrix() / b;
        assert!((rate.dh.matrix() - &unit * (-2.0 + a / b)).amax() < 1e-12);
    }
}

#[test]
fn h_squared_without_fibre_flux() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let fields = RandomFields::random(&mut rng, 3);
    let x = random_point(&mut rng, 3);
    let mut s = fields.sample(&x);
    s.eta = FormJet::constant(random_form(&mut rng, 3, 1, 1.0), 3);
    s.y0 = FormJet::zero(3, 2, 3);
    let h = h_squared(&s).unwrap();
    assert_eq!(h.hthetatheta, 0.0);
    assert_eq!(h.hitheta.max_abs(), 0.0);
    let (_, z) = flux(&s).unwrap();
    let hi = s.h().inverse();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        for d in 0..3 {
                            acc += hi[(a, b)] * hi[(c, d)] * z.value.get(&[i, a, c]) * z.value.get(&[j, b, d]);
                        }
                    }
                }
            }
            assert!((h.hij.get(i, j) - acc).abs() < 1e-12);
        }
    }
}

#[test]
fn codiff_with_constant_fibre_and_no_base_flux() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let fields = RandomFields::random(&mut rng, 3);
    let x = random_point(&mut rng, 3);
    let mut s = fields.sample(&x);
    s.phi = FormJet::constant(Form::scalar(3, 1.3), 3);
    s.eta = FormJet::zero(3, 1, 3);
    s.mu = FormJet::zero(3, 2, 3);
    s.z0 = FormJet::zero(3, 3, 3);
    let (y, _) = flux(&s).unwrap();
    let c = codiff_h(&s).unwrap();
    assert!(c.itheta.max_abs_diff(&codiff(&y, &s.base).unwrap()) < 1e-14);
}

#[test]
fn hessian_special_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let fields = RandomFields::random(&mut rng, 2);
    let x = random_point(&mut rng, 2);
    let s = fields.sample(&x);
    let c = FormJet::constant(Form::scalar(2, 4.0), 2);
    let h = hessian_full(&s, &c).unwrap();
    assert_eq!(h.ij.matrix().amax().max(h.itheta.max_abs()).max(h.thetatheta.abs()), 0.0);

    let mut flat = InvariantSample::trivial(fields.metric.sample(&x));
    flat.phi = FormJet::constant(Form::scalar(2, 2.0), 2);
    let h = hessian_full(&flat, &s.f).unwrap();
    assert_eq!(h.itheta.max_abs(), 0.0);
    assert_eq!(h.thetatheta, 0.0);
}

#[test]
fn explicit_rates_agree_with_generic_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for m in 1..=4 {
        for _ in 0..5 {
            let fields = RandomFields::random(&mut rng, m);
            let x = random_point(&mut rng, m);
            let s = fields.sample(&x);
            let (dphi, da) = explicit_fibre_rates(&s).unwrap();
            let r = flow_rhs(&s).unwrap();
            assert!((dphi - r.dphi).abs() < 1e-10);
            assert!(da.max_abs_diff(&r.da) < 1e-10);
        }
    }
}

#[test]
fn curvature_matches_oracle_across_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for m in 1..=3 {
        for _ in 0..3 {
            let fields = RandomFields::random(&mut rng, m);
            let x = random_point(&mut rng, m);
            let o = oracle_full(&fields, &x, 1e-3).unwrap();
            let dev = oracle_deviation(&fields.sample(&x), &o).unwrap();
            assert!(dev.iter().all(|d| *d <= 1.0), "m = {m}: {dev:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_round_trip(seed in any::<u64>(), m in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_spd(&mut rng, m + 1, 0.3);
        let d = decompose_metric(&g).unwrap();
        prop_assert!((assemble_metric(&d) - &g).amax() < 1e-12);
        prop_assert!(d.phi > 0.0);
        prop_assert!(d.h.matrix().clone().cholesky().is_some());
    }

    #[test]
    fn forms_round_trip(seed in any::<u64>(), m in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_form(&mut rng, m, 1, 1.0);
        let b = Form::from_antisymmetric(&random_antisymmetric(&mut rng, m + 1, 1.0)).unwrap();
        let back = assemble_two_form(&decompose_two_form(&b, &a).unwrap(), &a).unwrap();
        prop_assert!(back.max_abs_diff(&b) < 1e-14);
        let h = random_form(&mut rng, m + 1, 3, 1.0);
        let back = assemble_three_form(&decompose_three_form(&h, &a).unwrap(), &a).unwrap();
        prop_assert!(back.max_abs_diff(&h) < 1e-14);
    }

    #[test]
    fn gauge_shift_only_moves_the_hessian_terms(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields = RandomFields::random(&mut rng, 2);
        let x = random_point(&mut rng, 2);
        let s = fields.sample(&x);
        let shifted = s.clone().with_gauge(AnalyticForm::zero(2, 0).jet(&x));
        let (k0, c0) = flow_variations(&shifted).unwrap();
        let r = kk_ricci(&s).unwrap();
        let hs = h_squared(&s).unwrap();
        let expect = r.rij.matrix() * -2.0 + hs.hij.matrix() * 0.5;
        prop_assert!((k0.ij.matrix() - expect).amax() < 1e-12);
        let dh = codiff_h(&s).unwrap();
        prop_assert!(c0.ij.max_abs_diff(&(-&dh.ij)) < 1e-12);
    }
}
