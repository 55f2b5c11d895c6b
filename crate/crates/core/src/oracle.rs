//! Brute-force reference computations: Richardson-extrapolated central
//! differences and naive dense index loops on full coordinate charts.
//!
//! Nothing in here reuses the closed-form code paths.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::jet::FormJet;
use crate::tensor_point::Form;

/// Smooth field on a chart, sampled by central differences.
pub struct ChartField<F: Fn(&[f64]) -> Vec<f64>> {
    pub eval: F,
    /// Nominal step.
    pub h0: f64,
    /// Number of step halvings combined by Richardson extrapolation.
    pub depth: usize,
    /// Largest acceptable error estimate (absolute, per unit of scale).
    pub threshold: f64,
}

impl<F: Fn(&[f64]) -> Vec<f64>> ChartField<F> {
    pub fn new(eval: F) -> Self {
        Self { eval, h0: 1e-3, depth: 1, threshold: 1e-5 }
    }

    pub fn with_step(mut self, h0: f64) -> Self {
        self.h0 = h0;
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }
}

/// Value, first and second derivatives of every component of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub value: Vec<f64>,
    /// `grad[k][c]`.
    pub grad: Vec<Vec<f64>>,
    /// `hess[k][l][c]`, symmetric in `k, l`.
    pub hess: Vec<Vec<Vec<f64>>>,
    /// Largest difference between the two finest extrapolation levels.
    pub error: f64,
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(k, d) in moves {
        y[k] += d;
    }
    y
}

/// Plain central differences at step `h`, flattened as `[grad…, hess…]`.
fn central<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64], f0: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let nc = f0.len();
    let mut out = vec![0.0; nc * (n + n * n)];
    for k in 0..n {
        let p = f(&shifted(x, &[(k, h)]));
        let q = f(&shifted(x, &[(k, -h)]));
        for c in 0..nc {
            out[k * nc + c] = (p[c] - q[c]) / (2.0 * h);
            out[(n + k * n + k) * nc + c] = (p[c] - 2.0 * f0[c] + q[c]) / (h * h);
        }
        for l in 0..k {
            let pp = f(&shifted(x, &[(k, h), (l, h)]));
            let pm = f(&shifted(x, &[(k, h), (l, -h)]));
            let mp = f(&shifted(x, &[(k, -h), (l, h)]));
            let mm = f(&shifted(x, &[(k, -h), (l, -h)]));
            for c in 0..nc {
                let v = (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * h * h);
                out[(n + k * n + l) * nc + c] = v;
                out[(n + l * n + k) * nc + c] = v;
            }
        }
    }
    out
}

/// Central differences at `h₀, h₀/2, …` combined by Richardson extrapolation.
pub fn fd_derivatives<F: Fn(&[f64]) -> Vec<f64>>(field: &ChartField<F>, x: &[f64]) -> Result<Derivatives> {
    let n = x.len();
    let f0 = (field.eval)(x);
    let nc = f0.len();
    let mut table: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut h = field.h0;
    for j in 0..=field.depth {
        let mut row = vec![central(&field.eval, x, &f0, h)];
        for k in 1..=j {
            let factor = 4f64.powi(k as i32);
            let fine = &row[k - 1];
            let coarse = &table[j - 1][k - 1];
            row.push(fine.iter().zip(coarse).map(|(a, b)| a + (a - b) / (factor - 1.0)).collect());
        }
        table.push(row);
        h *= 0.5;
    }
    let last = table.last().expect("at least one level");
    let best = last.last().expect("non-empty row");
    let error = if field.depth == 0 {
        0.0
    } else {
        best.iter().zip(&last[last.len() - 2]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let scale = 1.0 + f0.iter().chain(best.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    if !(error <= field.threshold * scale) {
        return Err(GeomError::OracleUnreliable(error));
    }
    let grad = (0..n).map(|k| best[k * nc..(k + 1) * nc].to_vec()).collect();
    let hess = (0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    let a = (n + k * n + l) * nc;
                    let b = (n + l * n + k) * nc;
                    (0..nc).map(|c| 0.5 * (best[a + c] + best[b + c])).collect()
                })
                .collect()
        })
        .collect();
    Ok(Derivatives { value: f0, grad, hess, error })
}

/// Dense rank-3 array `t[a][b][c]` on an `n`-dimensional chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense3 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Dense3 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n] }
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    fn add(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.n + b) * self.n + c] += v;
    }
}

/// Coordinate-frame Christoffels `Γ^c_{ab}` (stored `[c][a][b]`) and their
/// derivatives `∂_e Γ^c_{ab}` from `g`, `∂g`, `∂²g`.
fn coordinate_christoffel(
    g: &DMatrix<f64>,
    dg: &[DMatrix<f64>],
    d2g: &[Vec<DMatrix<f64>>],
) -> Result<(Dense3, Vec<Dense3>)> {
    let n = g.nrows();
    let gi = g.clone().try_inverse().ok_or(GeomError::DegenerateMetric)?;
    let mut gamma = Dense3::zeros(n);
    let mut dgamma = vec![Dense3::zeros(n); n];
    for e in 0..n {
        let dgi = -(&gi * &dg[e] * &gi);
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for d in 0..n {
                        let low = 0.5 * (dg[a][(b, d)] + dg[b][(a, d)] - dg[d][(a, b)]);
                        let dlow = 0.5 * (d2g[e][a][(b, d)] + d2g[e][b][(a, d)] - d2g[e][d][(a, b)]);
                        if e == 0 {
                            gamma.add(c, a, b, gi[(c, d)] * low);
                        }
                        dgamma[e].add(c, a, b, dgi[(c, d)] * low + gi[(c, d)] * dlow);
                    }
                }
            }
        }
    }
    Ok((gamma, dgamma))
}

fn coordinate_ricci(gamma: &Dense3, dgamma: &[Dense3]) -> DMatrix<f64> {
    let n = gamma.n;
    DMatrix::from_fn(n, n, |b, c| {
        let mut acc = 0.0;
        for a in 0..n {
            acc += dgamma[a].get(a, b, c) - dgamma[b].get(a, a, c);
            for e in 0..n {
                acc += -gamma.get(e, a, c) * gamma.get(a, b, e) + gamma.get(e, b, c) * gamma.get(a, a, e);
            }
        }
        acc
    })
}

fn unpack_matrix(v: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

/// `(g, ∂g, ∂²g, error estimate)`.
type MetricJet = (DMatrix<f64>, Vec<DMatrix<f64>>, Vec<Vec<DMatrix<f64>>>, f64);

/// Metric and its derivatives from a field returning row-major `n×n` components.
fn metric_jet<F: Fn(&[f64]) -> Vec<f64>>(field: &ChartField<F>, x: &[f64]) -> Result<MetricJet> {
    let n = x.len();
    let d = fd_derivatives(field, x)?;
    let g = unpack_matrix(&d.value, n);
    if g.clone().cholesky().is_none() {
        return Err(GeomError::DegenerateMetric);
    }
    let dg = d.grad.iter().map(|v| unpack_matrix(v, n)).collect();
    let d2g = d.hess.iter().map(|r| r.iter().map(|v| unpack_matrix(v, n)).collect()).collect();
    Ok((g, dg, d2g, d.error))
}

/// Coordinate-frame Ricci tensor of a metric field by finite differences.
pub fn full_ricci_fd<F: Fn(&[f64]) -> Vec<f64>>(field: &ChartField<F>, x: &[f64]) -> Result<DMatrix<f64>> {
    let (g, dg, d2g, _) = metric_jet(field, x)?;
    let (gamma, dgamma) = coordinate_christoffel(&g, &dg, &d2g)?;
    Ok(coordinate_ricci(&gamma, &dgamma))
}

/// `ℋ_{ab} = g^{cd} g^{ef} H_{ace} H_{bdf}`.
pub fn dense_h_squared(h: &Dense3, gi: &DMatrix<f64>) -> DMatrix<f64> {
    let n = h.n;
    DMatrix::from_fn(n, n, |a, b| {
        let mut acc = 0.0;
        for c in 0..n {
            for d in 0..n {
                for e in 0..n {
                    for f in 0..n {
                        acc += gi[(c, d)] * gi[(e, f)] * h.get(a, c, e) * h.get(b, d, f);
                    }
                }
            }
        }
        acc
    })
}

/// `(d*H)_{ab} = −g^{cd} (∇_c H)_{dab}`.
pub fn dense_codiff(h: &Dense3, dh: &[Dense3], gamma: &Dense3, gi: &DMatrix<f64>) -> DMatrix<f64> {
    let n = h.n;
    DMatrix::from_fn(n, n, |a, b| {
        let mut acc = 0.0;
        for c in 0..n {
            for d in 0..n {
                let mut nabla = dh[c].get(d, a, b);
                for e in 0..n {
                    nabla -= gamma.get(e, c, d) * h.get(e, a, b)
                        + gamma.get(e, c, a) * h.get(d, e, b)
                        + gamma.get(e, c, b) * h.get(d, a, e);
                }
                acc -= gi[(c, d)] * nabla;
            }
        }
        acc
    })
}

/// `D_aD_b f = ∂_a∂_b f − Γ^c_{ab} ∂_c f`.
pub fn dense_hessian(df: &[f64], d2f: &DMatrix<f64>, gamma: &Dense3) -> DMatrix<f64> {
    let n = df.len();
    DMatrix::from_fn(n, n, |a, b| d2f[(a, b)] - (0..n).map(|c| gamma.get(c, a, b) * df[c]).sum::<f64>())
}

/// Circle-invariant data given as plain functions of the base point.
pub trait InvariantFields {
    fn base_dim(&self) -> usize;
    fn phi(&self, x: &[f64]) -> f64;
    /// Connection potential `A_i`.
    fn connection(&self, x: &[f64]) -> Vec<f64>;
    fn base_metric(&self, x: &[f64]) -> DMatrix<f64>;
    fn eta(&self, x: &[f64]) -> Vec<f64>;
    fn mu(&self, x: &[f64]) -> Form;
    fn y0(&self, x: &[f64]) -> Form;
    fn z0(&self, x: &[f64]) -> Form;
    fn gauge(&self, x: &[f64]) -> f64;
}

/// Oracle output, every tensor expressed in the adapted frame
/// `{e_i = ∂_i − A_i∂_y, e_θ = ∂_y}` with `θ` last.
#[derive(Debug, Clone, PartialEq)]
pub struct FullOracle {
    /// Frame Christoffels `Γ^c_{ab}` stored `[c][a][b]`.
    pub christoffel: Dense3,
    pub ricci: DMatrix<f64>,
    pub h_squared: DMatrix<f64>,
    pub codiff_h: DMatrix<f64>,
    pub hessian: DMatrix<f64>,
    pub error: f64,
}

fn total_metric<T: InvariantFields + ?Sized>(fields: &T, p: &[f64]) -> Vec<f64> {
    let m = fields.base_dim();
    let x = &p[..m];
    let n = m + 1;
    let phi = fields.phi(x);
    let a = fields.connection(x);
    let h = fields.base_metric(x);
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let ai = if i == m { 1.0 } else { a[i] };
            let aj = if j == m { 1.0 } else { a[j] };
            let base = if i < m && j < m { h[(i, j)] } else { 0.0 };
            g[i * n + j] = base + phi * ai * aj;
        }
    }
    g
}

/// Dense `b = θ∧η + μ`, row-major `n×n`.
fn total_b<T: InvariantFields + ?Sized>(fields: &T, p: &[f64]) -> Vec<f64> {
    let m = fields.base_dim();
    let x = &p[..m];
    let n = m + 1;
    let mut theta = fields.connection(x);
    theta.push(1.0);
    let mut eta = fields.eta(x);
    eta.push(0.0);
    let mu = fields.mu(x);
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let base = if i < m && j < m { mu.get(&[i, j]) } else { 0.0 };
            b[i * n + j] = theta[i] * eta[j] - theta[j] * eta[i] + base;
        }
    }
    b
}

/// Dense `H₀ = θ∧Y0 + Z0`, row-major `n×n×n`.
fn total_h0<T: InvariantFields + ?Sized>(fields: &T, p: &[f64]) -> Vec<f64> {
    let m = fields.base_dim();
    let x = &p[..m];
    let n = m + 1;
    let mut theta = fields.connection(x);
    theta.push(1.0);
    let y = fields.y0(x);
    let z = fields.z0(x);
    let yy = |i: usize, j: usize| if i < m && j < m { y.get(&[i, j]) } else { 0.0 };
    let mut h = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let base = if i < m && j < m && k < m { z.get(&[i, j, k]) } else { 0.0 };
                h[(i * n + j) * n + k] = theta[i] * yy(j, k) - theta[j] * yy(i, k) + theta[k] * yy(i, j) + base;
            }
        }
    }
    h
}

/// Full-space reference computation of the curvature, flux and Hessian
/// quantities at `x`, transformed to the adapted frame.
pub fn oracle_full<T: InvariantFields + ?Sized>(fields: &T, x: &[f64], step: f64) -> Result<FullOracle> {
    let m = fields.base_dim();
    let n = m + 1;
    let mut p = x.to_vec();
    p.push(0.0);

    let gfield = ChartField::new(|q: &[f64]| total_metric(fields, q)).with_step(step);
    let (g, dg, d2g, err_g) = metric_jet(&gfield, &p)?;
    let gi = g.clone().try_inverse().ok_or(GeomError::DegenerateMetric)?;
    let (gamma, dgamma) = coordinate_christoffel(&g, &dg, &d2g)?;
    let ricci = coordinate_ricci(&gamma, &dgamma);

    let bfield = ChartField::new(|q: &[f64]| total_b(fields, q)).with_step(step);
    let db = fd_derivatives(&bfield, &p)?;
    let h0field = ChartField::new(|q: &[f64]| total_h0(fields, q)).with_step(step);
    let dh0 = fd_derivatives(&h0field, &p)?;
    // H = H₀ + db with (db)_{abc} = ∂_a b_{bc} − ∂_b b_{ac} + ∂_c b_{ab}.
    let bidx = |a: usize, b: usize| a * n + b;
    let mut h = Dense3::zeros(n);
    let mut dh = vec![Dense3::zeros(n); n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let i3 = (a * n + b) * n + c;
                h.data[i3] = dh0.value[i3] + db.grad[a][bidx(b, c)] - db.grad[b][bidx(a, c)] + db.grad[c][bidx(a, b)];
                for e in 0..n {
                    dh[e].data[i3] = dh0.grad[e][i3] + db.hess[e][a][bidx(b, c)] - db.hess[e][b][bidx(a, c)]
                        + db.hess[e][c][bidx(a, b)];
                }
            }
        }
    }
    let hsq = dense_h_squared(&h, &gi);
    let dstar = dense_codiff(&h, &dh, &gamma, &gi);

    let ffield = ChartField::new(|q: &[f64]| vec![fields.gauge(&q[..m])]).with_step(step);
    let df = fd_derivatives(&ffield, &p)?;
    let grad_f: Vec<f64> = df.grad.iter().map(|v| v[0]).collect();
    let d2f = DMatrix::from_fn(n, n, |a, b| df.hess[a][b][0]);
    let hess = dense_hessian(&grad_f, &d2f, &gamma);

    // Frame e_a = E[a][μ] ∂_μ with A_i = g_{iy}/g_{yy}.
    let conn: Vec<f64> = (0..m).map(|i| g[(i, m)] / g[(m, m)]).collect();
    let dconn: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            (0..m).map(|i| (dg[k][(i, m)] * g[(m, m)] - g[(i, m)] * dg[k][(m, m)]) / (g[(m, m)] * g[(m, m)])).collect()
        })
        .collect();
    let e = DMatrix::from_fn(n, n, |a, mu| {
        if a == m {
            if mu == m {
                1.0
            } else {
                0.0
            }
        } else if mu == a {
            1.0
        } else if mu == m {
            -conn[a]
        } else {
            0.0
        }
    });
    // ∂_μ e_b^ν, nonzero only for ν = y, b < m.
    let de = |mu: usize, b: usize, nu: usize| if nu == m && b < m { -dconn[mu][b] } else { 0.0 };
    let coframe = e.transpose().try_inverse().ok_or(GeomError::DegenerateMetric)?;
    let mut frame_gamma = Dense3::zeros(n);
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut acc = 0.0;
                for nu in 0..n {
                    let mut v = 0.0;
                    for mu in 0..n {
                        v += e[(a, mu)] * de(mu, b, nu);
                        for la in 0..n {
                            v += e[(a, mu)] * e[(b, la)] * gamma.get(nu, mu, la);
                        }
                    }
                    acc += coframe[(c, nu)] * v;
                }
                frame_gamma.add(c, a, b, acc);
            }
        }
    }
    let to_frame = |t: &DMatrix<f64>| &e * t * e.transpose();
    Ok(FullOracle {
        christoffel: frame_gamma,
        ricci: to_frame(&ricci),
        h_squared: to_frame(&hsq),
        codiff_h: to_frame(&dstar),
        hessian: to_frame(&hess),
        error: err_g.max(db.error).max(dh0.error).max(df.error),
    })
}

fn scalar_jet(d: &Derivatives, c: usize, m: usize) -> FormJet {
    FormJet::scalar(
        d.value[c],
        &(0..m).map(|k| d.grad[k][c]).collect::<Vec<_>>(),
        &(0..m).map(|k| (0..m).map(|l| d.hess[k][l][c]).collect()).collect::<Vec<_>>(),
    )
}

fn form_jet(d: &Derivatives, m: usize, rank: usize) -> FormJet {
    let build = |comps: &dyn Fn(usize) -> f64| {
        let v: Vec<f64> = (0..d.value.len()).map(comps).collect();
        Form::from_canonical(m, rank, v).expect("form components")
    };
    FormJet {
        value: build(&|c| d.value[c]),
        grad: (0..m).map(|k| build(&|c| d.grad[k][c])).collect(),
        hess: Some((0..m).map(|k| (0..m).map(|l| build(&|c| d.hess[k][l][c])).collect()).collect()),
    }
}

/// Builds an [`InvariantSample`](crate::circle_bundle::InvariantSample) from
/// field closures by Richardson-extrapolated central differences.
pub fn sample_from_fields<T: InvariantFields + ?Sized>(
    fields: &T,
    x: &[f64],
    step: f64,
) -> Result<crate::circle_bundle::InvariantSample> {
    let m = fields.base_dim();
    let d = |eval: &dyn Fn(&[f64]) -> Vec<f64>| fd_derivatives(&ChartField::new(eval).with_step(step), x);
    let phi = scalar_jet(&d(&|q| vec![fields.phi(q)])?, 0, m);
    let f = scalar_jet(&d(&|q| vec![fields.gauge(q)])?, 0, m);
    let conn = form_jet(&d(&|q| fields.connection(q))?, m, 1);
    let eta = form_jet(&d(&|q| fields.eta(q))?, m, 1);
    let mu = form_jet(&d(&|q| fields.mu(q).components().to_vec())?, m, 2);
    let y0 = form_jet(&d(&|q| fields.y0(q).components().to_vec())?, m, 2);
    let z0 = form_jet(&d(&|q| fields.z0(q).components().to_vec())?, m, 3);
    let hd = d(&|q| {
        let h = fields.base_metric(q);
        h.iter().copied().collect()
    })?;
    let col = |v: &[f64]| DMatrix::from_column_slice(m, m, v);
    let sym = |a: DMatrix<f64>| (&a + a.transpose()) * 0.5;
    let base = crate::base_geometry::BaseChartSample::new(
        sym(col(&hd.value)),
        hd.grad.iter().map(|v| sym(col(v))).collect(),
        hd.hess.iter().map(|r| r.iter().map(|v| sym(col(v))).collect()).collect(),
    )?;
    crate::circle_bundle::InvariantSample::new(phi, conn, base, eta, mu, y0, z0, f)
}

/// Relative-plus-absolute agreement test used against the oracle.
pub fn within(actual: f64, reference: f64, rel: f64, abs: f64) -> bool {
    (actual - reference).abs() <= abs + rel * reference.abs()
}

/// Euclidean norm helper for dense vectors.
pub fn norm(v: &[f64]) -> f64 {
    DVector::from_column_slice(v).norm()
}
