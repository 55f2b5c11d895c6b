//! Levi-Civita geometry of the base from point-sampled metric derivatives.

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::jet::{FormJet, ScalarJet};
use crate::tensor_point::{dense_offset, unflatten, BaseMetric, Form, SymTwoTensor, SYMMETRY_TOL};

/// Base metric with first and second coordinate derivatives at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseChartSample {
    h: BaseMetric,
    /// `dh[k] = ∂_k h`.
    dh: Vec<DMatrix<f64>>,
    /// `d2h[k][l] = ∂_k ∂_l h`.
    d2h: Vec<Vec<DMatrix<f64>>>,
}

fn sym_defect(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

impl BaseChartSample {
    pub fn new(h: DMatrix<f64>, dh: Vec<DMatrix<f64>>, d2h: Vec<Vec<DMatrix<f64>>>) -> Result<Self> {
        let h = BaseMetric::new(h)?;
        let m = h.dim();
        if dh.len() != m || d2h.len() != m || d2h.iter().any(|r| r.len() != m) {
            return Err(GeomError::DimensionMismatch("metric derivative stacks".into()));
        }
        let shape_ok = dh.iter().chain(d2h.iter().flatten()).all(|x| x.shape() == (m, m));
        if !shape_ok {
            return Err(GeomError::DimensionMismatch("metric derivative blocks".into()));
        }
        let scale = dh.iter().chain(d2h.iter().flatten()).fold(1.0f64, |s, x| s.max(x.amax()));
        for x in dh.iter().chain(d2h.iter().flatten()) {
            if sym_defect(x) > SYMMETRY_TOL * scale {
                return Err(GeomError::SymmetryViolation("metric derivative not symmetric in ij".into()));
            }
        }
        for k in 0..m {
            for l in 0..k {
                if (&d2h[k][l] - &d2h[l][k]).amax() > SYMMETRY_TOL * scale {
                    return Err(GeomError::SymmetryViolation("second derivative not symmetric in kl".into()));
                }
            }
        }
        Ok(Self { h, dh, d2h })
    }

    /// Constant metric (all derivatives zero).
    pub fn constant(h: DMatrix<f64>) -> Result<Self> {
        let m = h.nrows();
        let z = DMatrix::zeros(m, m);
        Self::new(h, vec![z.clone(); m], vec![vec![z; m]; m])
    }

    pub fn flat(m: usize) -> Self {
        Self::constant(DMatrix::identity(m, m)).expect("identity metric")
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn metric(&self) -> &BaseMetric {
        &self.h
    }

    pub fn dh(&self) -> &[DMatrix<f64>] {
        &self.dh
    }

    pub fn d2h(&self) -> &[Vec<DMatrix<f64>>] {
        &self.d2h
    }

    /// Same sample with the metric multiplied by a constant.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.h.matrix() * c,
            self.dh.iter().map(|x| x * c).collect(),
            self.d2h.iter().map(|r| r.iter().map(|x| x * c).collect()).collect(),
        )
    }

    /// `∂_l h^{ij} = -h^{ia} ∂_l h_{ab} h^{bj}`.
    fn d_inverse(&self, l: usize) -> DMatrix<f64> {
        let inv = self.h.inverse();
        -(inv * &self.dh[l] * inv)
    }
}

/// Christoffel symbols `Γ^k_{ij}` (dense, indexed `[k][i][j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = v;
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `Γ^k_{ij} = ½ h^{kl}(∂_i h_{jl} + ∂_j h_{il} − ∂_l h_{ij})`.
pub fn christoffel(s: &BaseChartSample) -> Christoffel {
    let m = s.dim();
    let inv = s.h.inverse();
    let mut out = Christoffel::zeros(m);
    for i in 0..m {
        for j in 0..m {
            let lowered: Vec<f64> =
                (0..m).map(|l| 0.5 * (s.dh[i][(j, l)] + s.dh[j][(i, l)] - s.dh[l][(i, j)])).collect();
            for k in 0..m {
                out.set(k, i, j, (0..m).map(|l| inv[(k, l)] * lowered[l]).sum());
            }
        }
    }
    out
}

/// First derivatives `∂_p Γ^k_{ij}`, one Christoffel array per direction `p`.
pub fn christoffel_derivative(s: &BaseChartSample) -> Vec<Christoffel> {
    let m = s.dim();
    let inv = s.h.inverse();
    (0..m)
        .map(|p| {
            let dinv = s.d_inverse(p);
            let mut out = Christoffel::zeros(m);
            for i in 0..m {
                for j in 0..m {
                    let low: Vec<f64> =
                        (0..m).map(|l| 0.5 * (s.dh[i][(j, l)] + s.dh[j][(i, l)] - s.dh[l][(i, j)])).collect();
                    let dlow: Vec<f64> = (0..m)
                        .map(|l| 0.5 * (s.d2h[p][i][(j, l)] + s.d2h[p][j][(i, l)] - s.d2h[p][l][(i, j)]))
                        .collect();
                    for k in 0..m {
                        let v: f64 = (0..m).map(|l| dinv[(k, l)] * low[l] + inv[(k, l)] * dlow[l]).sum();
                        out.set(k, i, j, v);
                    }
                }
            }
            out
        })
        .collect()
}

/// `R_{bc} = ∂_a Γ^a_{bc} − ∂_b Γ^a_{ac} − Γ^e_{ac} Γ^a_{be} + Γ^e_{bc} Γ^a_{ae}`.
pub fn ricci_base(s: &BaseChartSample) -> SymTwoTensor {
    let m = s.dim();
    let g = christoffel(s);
    let dg = christoffel_derivative(s);
    let r = DMatrix::from_fn(m, m, |b, c| {
        let mut acc = 0.0;
        for a in 0..m {
            acc += dg[a].get(a, b, c) - dg[b].get(a, a, c);
            for e in 0..m {
                acc += -g.get(e, a, c) * g.get(a, b, e) + g.get(e, b, c) * g.get(a, a, e);
            }
        }
        acc
    });
    SymTwoTensor::symmetrized(r)
}

/// Dense covariant derivative `(∇_k ω)_{i_1…i_p}`, indexed `[k][dense offset]`.
pub fn covariant_derivative(omega: &FormJet, gamma: &Christoffel) -> Result<Vec<Vec<f64>>> {
    let m = gamma.dim();
    if omega.dim() != m || omega.base_dim() != m {
        return Err(GeomError::DimensionMismatch("form jet must live on the base".into()));
    }
    let p = omega.rank();
    let value = omega.value.to_dense();
    let size = m.pow(p as u32);
    let mut idx = vec![0usize; p];
    let out = (0..m)
        .map(|k| {
            let partial = omega.grad[k].to_dense();
            (0..size)
                .map(|flat| {
                    unflatten(flat, m, &mut idx);
                    let mut acc = partial[flat];
                    for slot in 0..p {
                        let orig = idx[slot];
                        for q in 0..m {
                            idx[slot] = q;
                            acc -= gamma.get(q, k, orig) * value[dense_offset(m, &idx)];
                        }
                        idx[slot] = orig;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(out)
}

/// `(d*ω)_{j…} = −h^{kl} (∇_k ω)_{l j…}`.
pub fn codiff(omega: &FormJet, s: &BaseChartSample) -> Result<Form> {
    let p = omega.rank();
    if p == 0 {
        return Err(GeomError::RankMismatch { expected: 1, found: 0 });
    }
    let m = s.dim();
    let nabla = covariant_derivative(omega, &christoffel(s))?;
    let inv = s.h.inverse();
    let mut rest = vec![0usize; p];
    Ok(Form::from_fn(m, p - 1, |tail| {
        rest[1..].copy_from_slice(tail);
        let mut acc = 0.0;
        for k in 0..m {
            for l in 0..m {
                rest[0] = l;
                acc -= inv[(k, l)] * nabla[k][dense_offset(m, &rest)];
            }
        }
        acc
    }))
}

/// `∇_i∇_j f = ∂_i∂_j f − Γ^k_{ij} ∂_k f`.
pub fn hessian_base(f: &ScalarJet, s: &BaseChartSample) -> Result<SymTwoTensor> {
    let m = s.dim();
    if f.rank() != 0 || f.base_dim() != m {
        return Err(GeomError::DimensionMismatch("scalar jet on the base expected".into()));
    }
    if f.hess.is_none() {
        return Err(GeomError::InvalidState("second-order jet required".into()));
    }
    let g = christoffel(s);
    Ok(SymTwoTensor::symmetrized(DMatrix::from_fn(m, m, |i, j| {
        f.d2(i, j) - (0..m).map(|k| g.get(k, i, j) * f.d1(k)).sum::<f64>()
    })))
}

/// `Δf = h^{ij} ∇_i∇_j f`.
pub fn laplacian_base(f: &ScalarJet, s: &BaseChartSample) -> Result<f64> {
    Ok(hessian_base(f, s)?.trace(&s.h))
}

/// Max-norm of `∇_k h_{ij}`, which vanishes for the Levi-Civita connection.
pub fn metric_compatibility_residual(s: &BaseChartSample) -> f64 {
    let m = s.dim();
    let g = christoffel(s);
    let h = s.h.matrix();
    let mut worst = 0.0f64;
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut v = s.dh[k][(i, j)];
                for q in 0..m {
                    v -= g.get(q, k, i) * h[(q, j)] + g.get(q, k, j) * h[(i, q)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}
