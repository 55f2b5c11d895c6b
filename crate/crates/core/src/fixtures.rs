//! Seeded random inputs: analytic fields with exact jets, SPD matrices, forms.

use nalgebra::DMatrix;
use rand::Rng;

use crate::base_geometry::BaseChartSample;
use crate::charts;
use crate::circle_bundle::InvariantSample;
use crate::jet::FormJet;
use crate::oracle::InvariantFields;
use crate::tduality::DualPairConfig;
use crate::tensor_point::{index_combinations, Form};

/// `c + l·x + ½xᵀQx + s·sin(k·x + p)`, with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticScalar {
    pub constant: f64,
    pub linear: Vec<f64>,
    pub quadratic: DMatrix<f64>,
    pub amplitude: f64,
    pub wave: Vec<f64>,
    pub phase: f64,
}

impl AnalyticScalar {
    pub fn constant(m: usize, c: f64) -> Self {
        Self {
            constant: c,
            linear: vec![0.0; m],
            quadratic: DMatrix::zeros(m, m),
            amplitude: 0.0,
            wave: vec![0.0; m],
            phase: 0.0,
        }
    }

    pub fn random<R: Rng>(rng: &mut R, m: usize, constant: f64, scale: f64) -> Self {
        let mut u = |s: f64| rng.gen_range(-s..=s);
        let linear = (0..m).map(|_| u(scale)).collect();
        let mut q = DMatrix::from_fn(m, m, |_, _| u(scale));
        q = (&q + q.transpose()) * 0.5;
        let wave = (0..m).map(|_| u(1.5)).collect();
        Self { constant, linear, quadratic: q, amplitude: u(scale), wave, phase: u(std::f64::consts::PI) }
    }

    fn arg(&self, x: &[f64]) -> f64 {
        self.wave.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + self.phase
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let m = x.len();
        let mut v = self.constant + self.linear.iter().zip(x).map(|(l, x)| l * x).sum::<f64>();
        for i in 0..m {
            for j in 0..m {
                v += 0.5 * self.quadratic[(i, j)] * x[i] * x[j];
            }
        }
        v + self.amplitude * self.arg(x).sin()
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let m = x.len();
        let c = self.amplitude * self.arg(x).cos();
        (0..m)
            .map(|i| self.linear[i] + (0..m).map(|j| self.quadratic[(i, j)] * x[j]).sum::<f64>() + c * self.wave[i])
            .collect()
    }

    pub fn hess(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let m = x.len();
        let s = self.amplitude * self.arg(x).sin();
        (0..m).map(|i| (0..m).map(|j| self.quadratic[(i, j)] - s * self.wave[i] * self.wave[j]).collect()).collect()
    }

    pub fn jet(&self, x: &[f64]) -> FormJet {
        FormJet::scalar(self.eval(x), &self.grad(x), &self.hess(x))
    }
}

/// A form field with one analytic scalar per canonical component.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticForm {
    pub dim: usize,
    pub rank: usize,
    pub comps: Vec<AnalyticScalar>,
}

impl AnalyticForm {
    pub fn zero(dim: usize, rank: usize) -> Self {
        let n = index_combinations(dim, rank).len();
        Self { dim, rank, comps: vec![AnalyticScalar::constant(dim, 0.0); n] }
    }

    pub fn random<R: Rng>(rng: &mut R, dim: usize, rank: usize, scale: f64) -> Self {
        let n = index_combinations(dim, rank).len();
        let comps = (0..n)
            .map(|_| {
                let c = rng.gen_range(-scale..=scale);
                AnalyticScalar::random(rng, dim, c, scale)
            })
            .collect();
        Self { dim, rank, comps }
    }

    pub fn eval(&self, x: &[f64]) -> Form {
        Form::from_canonical(self.dim, self.rank, self.comps.iter().map(|c| c.eval(x)).collect())
            .expect("component count")
    }

    pub fn jet(&self, x: &[f64]) -> FormJet {
        let m = self.dim;
        let grads: Vec<Vec<f64>> = self.comps.iter().map(|c| c.grad(x)).collect();
        let hess: Vec<Vec<Vec<f64>>> = self.comps.iter().map(|c| c.hess(x)).collect();
        let form = |v: Vec<f64>| Form::from_canonical(m, self.rank, v).expect("component count");
        FormJet {
            value: self.eval(x),
            grad: (0..m).map(|k| form(grads.iter().map(|g| g[k]).collect())).collect(),
            hess: Some(
                (0..m).map(|k| (0..m).map(|l| form(hess.iter().map(|h| h[k][l]).collect())).collect()).collect(),
            ),
        }
    }
}

/// Random symmetric positive-definite matrix with smallest eigenvalue at least `floor`.
pub fn random_spd<R: Rng>(rng: &mut R, n: usize, floor: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * floor
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-scale..=scale));
    (&a + a.transpose()) * 0.5
}

pub fn random_antisymmetric<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-scale..=scale));
    (&a - a.transpose()) * 0.5
}

pub fn random_form<R: Rng>(rng: &mut R, dim: usize, rank: usize, scale: f64) -> Form {
    Form::from_fn(dim, rank, |_| rng.gen_range(-scale..=scale))
}

pub fn random_point<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(-0.5..=0.5)).collect()
}

/// Analytic base metric `h₀ + δh(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMetric {
    pub background: DMatrix<f64>,
    /// Perturbations of the entries `i ≤ j`, row by row.
    pub perturbation: Vec<AnalyticScalar>,
}

impl AnalyticMetric {
    pub fn random<R: Rng>(rng: &mut R, m: usize, scale: f64) -> Self {
        let background = random_spd(rng, m, 0.7) * 0.5;
        let perturbation = (0..m * (m + 1) / 2).map(|_| AnalyticScalar::random(rng, m, 0.0, scale)).collect();
        Self { background, perturbation }
    }

    fn entry(&self, i: usize, j: usize) -> &AnalyticScalar {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let m = self.background.nrows();
        &self.perturbation[i * m - i * (i + 1) / 2 + j]
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.background.nrows();
        DMatrix::from_fn(m, m, |i, j| self.background[(i, j)] + self.entry(i, j).eval(x))
    }

    pub fn sample(&self, x: &[f64]) -> BaseChartSample {
        let m = self.background.nrows();
        let dh = (0..m).map(|k| DMatrix::from_fn(m, m, |i, j| self.entry(i, j).grad(x)[k])).collect();
        let d2h = (0..m)
            .map(|k| (0..m).map(|l| DMatrix::from_fn(m, m, |i, j| self.entry(i, j).hess(x)[k][l])).collect())
            .collect();
        BaseChartSample::new(self.eval(x), dh, d2h).expect("analytic metric sample")
    }
}

/// Random analytic circle-invariant fields.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFields {
    pub phi: AnalyticScalar,
    pub connection: AnalyticForm,
    pub metric: AnalyticMetric,
    pub eta: AnalyticForm,
    pub mu: AnalyticForm,
    pub y0: AnalyticForm,
    pub z0: AnalyticForm,
    pub gauge: AnalyticScalar,
}

impl RandomFields {
    pub fn random<R: Rng>(rng: &mut R, m: usize) -> Self {
        let c = rng.gen_range(0.8..=2.0);
        Self {
            phi: AnalyticScalar::random(rng, m, c, 0.2),
            connection: AnalyticForm::random(rng, m, 1, 0.5),
            metric: AnalyticMetric::random(rng, m, 0.1),
            eta: AnalyticForm::random(rng, m, 1, 0.5),
            mu: AnalyticForm::random(rng, m, 2, 0.5),
            y0: AnalyticForm::random(rng, m, 2, 0.5),
            z0: AnalyticForm::random(rng, m, 3, 0.5),
            gauge: AnalyticScalar::random(rng, m, 0.0, 0.5),
        }
    }

    pub fn dim(&self) -> usize {
        self.metric.background.nrows()
    }

    /// Exact jets at `x`.
    pub fn sample(&self, x: &[f64]) -> InvariantSample {
        InvariantSample::new(
            self.phi.jet(x),
            self.connection.jet(x),
            self.metric.sample(x),
            self.eta.jet(x),
            self.mu.jet(x),
            self.y0.jet(x),
            self.z0.jet(x),
            self.gauge.jet(x),
        )
        .expect("random fields give a valid sample")
    }
}

impl InvariantFields for RandomFields {
    fn base_dim(&self) -> usize {
        self.dim()
    }
    fn phi(&self, x: &[f64]) -> f64 {
        self.phi.eval(x)
    }
    fn connection(&self, x: &[f64]) -> Vec<f64> {
        self.connection.eval(x).components().to_vec()
    }
    fn base_metric(&self, x: &[f64]) -> DMatrix<f64> {
        self.metric.eval(x)
    }
    fn eta(&self, x: &[f64]) -> Vec<f64> {
        self.eta.eval(x).components().to_vec()
    }
    fn mu(&self, x: &[f64]) -> Form {
        self.mu.eval(x)
    }
    fn y0(&self, x: &[f64]) -> Form {
        self.y0.eval(x)
    }
    fn z0(&self, x: &[f64]) -> Form {
        self.z0.eval(x)
    }
    fn gauge(&self, x: &[f64]) -> f64 {
        self.gauge.eval(x)
    }
}

/// Hopf data `φ = a`, base `b·(unit S²)`, curvature the unit area form, in a
/// stereographic chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfFields {
    pub a: f64,
    pub b: f64,
}

impl InvariantFields for HopfFields {
    fn base_dim(&self) -> usize {
        2
    }
    fn phi(&self, _x: &[f64]) -> f64 {
        self.a
    }
    fn connection(&self, x: &[f64]) -> Vec<f64> {
        charts::sphere_potential(x, 1.0).value.components().to_vec()
    }
    fn base_metric(&self, x: &[f64]) -> DMatrix<f64> {
        charts::round_sphere(x, self.b).metric().matrix().clone()
    }
    fn eta(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; 2]
    }
    fn mu(&self, _x: &[f64]) -> Form {
        Form::zero(2, 2)
    }
    fn y0(&self, _x: &[f64]) -> Form {
        Form::zero(2, 2)
    }
    fn z0(&self, _x: &[f64]) -> Form {
        Form::zero(2, 3)
    }
    fn gauge(&self, _x: &[f64]) -> f64 {
        0.0
    }
}

/// Random dual pair with nonzero gauge, fibre-length gradient and flux.
pub fn random_pair<R: Rng>(rng: &mut R, m: usize) -> DualPairConfig {
    let x = random_point(rng, m);
    let c = rng.gen_range(0.8..=2.0);
    DualPairConfig {
        phi: AnalyticScalar::random(rng, m, c, 0.2).jet(&x),
        offset: AnalyticForm::random(rng, m, 1, 0.5).jet(&x),
        base: AnalyticMetric::random(rng, m, 0.1).sample(&x),
        eta: AnalyticForm::random(rng, m, 1, 0.5).jet(&x),
        mu: AnalyticForm::random(rng, m, 2, 0.5).jet(&x),
        reference: AnalyticForm::random(rng, m, 1, 0.5).jet(&x),
        dual_reference: AnalyticForm::random(rng, m, 1, 0.5).jet(&x),
        z0: AnalyticForm::random(rng, m, 3, 0.5).jet(&x),
        f: AnalyticScalar::random(rng, m, 0.0, 0.5).jet(&x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn analytic_scalar_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = AnalyticScalar::random(&mut rng, 2, 1.0, 0.5);
        let x = [0.2, -0.1];
        let e = 1e-6;
        let g = f.grad(&x);
        let fd = (f.eval(&[x[0] + e, x[1]]) - f.eval(&[x[0] - e, x[1]])) / (2.0 * e);
        assert!((g[0] - fd).abs() < 1e-8);
    }

    #[test]
    fn metric_entry_indexing_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = AnalyticMetric::random(&mut rng, 3, 0.1);
        let v = h.eval(&[0.1, 0.2, 0.3]);
        assert_eq!(v, v.transpose());
    }
}
