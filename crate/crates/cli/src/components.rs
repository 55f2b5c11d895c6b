//! JSON form of pointwise decomposed data.

use anyhow::{bail, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use gflow_core::tduality::DecomposedConfig;
use gflow_core::tensor_point::{BaseMetric, Form};

/// Stereographic chart point used for `--hopf`.
pub const HOPF_POINT: [f64; 2] = [0.3, -0.2];

/// `g = φ(dy + a)² + h`, `b = (dy + a)∧η + μ`. Two-tensors are full row-major
/// matrices; missing entries default to zero (and `h` to the identity).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Components {
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default)]
    pub a: Option<Vec<f64>>,
    #[serde(default)]
    pub h: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    #[serde(default)]
    pub mu: Option<Vec<Vec<f64>>>,
}

impl Default for Components {
    fn default() -> Self {
        Self { phi: 1.0, dim: None, a: None, h: None, eta: None, mu: None }
    }
}

fn matrix(rows: &[Vec<f64>], m: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        bail!("`{what}` must be a {m}x{m} matrix");
    }
    Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl Components {
    fn base_dim(&self) -> Result<usize> {
        let mut dims = Vec::new();
        dims.extend(self.dim);
        dims.extend(self.a.as_ref().map(Vec::len));
        dims.extend(self.eta.as_ref().map(Vec::len));
        dims.extend(self.h.as_ref().map(Vec::len));
        dims.extend(self.mu.as_ref().map(Vec::len));
        match dims.first() {
            None => Ok(1),
            Some(&m) if dims.iter().all(|d| *d == m) && m > 0 => Ok(m),
            _ => bail!("inconsistent base dimensions {dims:?}"),
        }
    }

    pub fn to_config(&self) -> Result<DecomposedConfig> {
        let m = self.base_dim()?;
        let one = |v: &Option<Vec<f64>>| v.as_deref().map(Form::one_form).unwrap_or_else(|| Form::zero(m, 1));
        let h = match &self.h {
            Some(r) => BaseMetric::new(matrix(r, m, "h")?)?,
            None => BaseMetric::identity(m),
        };
        let mu = match &self.mu {
            Some(r) => Form::from_antisymmetric(&matrix(r, m, "mu")?)?,
            None => Form::zero(m, 2),
        };
        Ok(DecomposedConfig { phi: self.phi, a: one(&self.a), h, eta: one(&self.eta), mu })
    }

    pub fn from_config(d: &DecomposedConfig) -> Self {
        Self {
            phi: d.phi,
            dim: None,
            a: Some(d.a.components().to_vec()),
            h: Some(rows(d.h.matrix())),
            eta: Some(d.eta.components().to_vec()),
            mu: Some(rows(&d.mu.to_matrix())),
        }
    }
}
