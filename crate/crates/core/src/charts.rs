//! Closed-form chart samples: round sphere, hyperbolic half-space,
//! Fubini–Study at the origin of an affine chart.

use nalgebra::DMatrix;

use crate::base_geometry::BaseChartSample;
use crate::jet::{FormJet, ScalarJet};
use crate::tensor_point::Form;

fn coordinate(x: &[f64], i: usize) -> ScalarJet {
    let m = x.len();
    let mut grad = vec![0.0; m];
    grad[i] = 1.0;
    ScalarJet::scalar(x[i], &grad, &vec![vec![0.0; m]; m])
}

fn constant(m: usize, v: f64) -> ScalarJet {
    ScalarJet::scalar(v, &vec![0.0; m], &vec![vec![0.0; m]; m])
}

fn mul(a: &ScalarJet, b: &ScalarJet) -> ScalarJet {
    a.wedge(b).expect("scalar product")
}

/// Metric `w·δ` from a scalar conformal factor jet.
fn conformal(w: &ScalarJet) -> BaseChartSample {
    let m = w.base_dim();
    let id = DMatrix::<f64>::identity(m, m);
    BaseChartSample::new(
        &id * w.scalar_value(),
        (0..m).map(|k| &id * w.d1(k)).collect(),
        (0..m).map(|k| (0..m).map(|l| &id * w.d2(k, l)).collect()).collect(),
    )
    .expect("conformal chart sample")
}

/// `q = 1/(1 + |x|²)`.
fn stereographic_q(x: &[f64]) -> ScalarJet {
    let m = x.len();
    let mut s = constant(m, 1.0);
    for i in 0..m {
        let xi = coordinate(x, i);
        s = s.add(&mul(&xi, &xi));
    }
    s.recip().expect("positive")
}

/// Round two-sphere of area `4πc` in stereographic coordinates: `h = 4c/(1+r²)² δ`.
pub fn round_sphere(x: &[f64], c: f64) -> BaseChartSample {
    assert_eq!(x.len(), 2);
    let q = stereographic_q(x);
    conformal(&mul(&q, &q).scale(4.0 * c))
}

/// Potential `c·2(x dy − y dx)/(1+r²)` whose curvature is the area form of [`round_sphere`].
pub fn sphere_potential(x: &[f64], c: f64) -> FormJet {
    assert_eq!(x.len(), 2);
    let q = stereographic_q(x);
    let ax = mul(&coordinate(x, 1), &q).scale(-2.0 * c);
    let ay = mul(&coordinate(x, 0), &q).scale(2.0 * c);
    let one_form = |v: &[f64]| Form::one_form(v);
    let hess = (0..2).map(|k| (0..2).map(|l| one_form(&[ax.d2(k, l), ay.d2(k, l)])).collect()).collect();
    FormJet {
        value: one_form(&[ax.scalar_value(), ay.scalar_value()]),
        grad: (0..2).map(|k| one_form(&[ax.d1(k), ay.d1(k)])).collect(),
        hess: Some(hess),
    }
}

/// Hyperbolic half-space `h = δ / (x_m)²` (sectional curvature −1).
pub fn hyperbolic(x: &[f64]) -> BaseChartSample {
    let m = x.len();
    let t = x[m - 1];
    assert!(t > 0.0);
    let mut grad = vec![0.0; m];
    let mut hess = vec![vec![0.0; m]; m];
    grad[m - 1] = -2.0 / t.powi(3);
    hess[m - 1][m - 1] = 6.0 / t.powi(4);
    conformal(&ScalarJet::scalar(1.0 / (t * t), &grad, &hess))
}

/// Complex structure in real coordinates `(x_1, y_1, …, x_n, y_n)`: the linear
/// map with `(Mu)` equal to the coefficients of `Σ x_j dy_j − y_j dx_j`.
fn rotation(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k, 2 * k + 1)] = -1.0;
        j[(2 * k + 1, 2 * k)] = 1.0;
    }
    j
}

/// Fubini–Study metric on ℂPⁿ (holomorphic sectional curvature 4) scaled by `c`,
/// sampled at the origin of an affine chart, with a potential whose curvature
/// is the scaled Kähler form. `Ric = 2(n+1)/c · h`.
pub fn fubini_study(n: usize, c: f64) -> (BaseChartSample, FormJet) {
    let m = 2 * n;
    let jm = rotation(n);
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let d2h = (0..m)
        .map(|p| {
            (0..m)
                .map(|q| {
                    DMatrix::from_fn(m, m, |a, b| {
                        c * (-2.0 * d(a, b) * d(p, q)
                            - (d(a, p) * d(b, q) + d(a, q) * d(b, p))
                            - (jm[(a, p)] * jm[(b, q)] + jm[(a, q)] * jm[(b, p)]))
                    })
                })
                .collect()
        })
        .collect();
    let base = BaseChartSample::new(DMatrix::identity(m, m) * c, vec![DMatrix::zeros(m, m); m], d2h)
        .expect("Fubini–Study sample");
    let potential = FormJet {
        value: Form::zero(m, 1),
        grad: (0..m).map(|p| Form::from_fn(m, 1, |a| 0.5 * c * jm[(a[0], p)])).collect(),
        hess: Some(vec![vec![Form::zero(m, 1); m]; m]),
    };
    (base, potential)
}
