//! JSON run configuration. Unknown keys are rejected everywhere; parse
//! errors carry the field path and the line/column of the offending token.

use std::path::Path;

use liebundle::algebra::{DeformationParams, SymElement};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSpec>,
    /// Bracket matrix; the identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<MatrixSpec>,
    /// Second structure of the pencil.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<MatrixSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    /// Redundant with `a.len() + 1`; checked when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub a: Vec<f64>,
}

/// `"identity"`, `{"diag": [...]}`, `{"lower": [...]}` (lower triangle with
/// diagonal, row-major) or `{"matrix": [[...], ...]}` (row-major, taken as
/// given so that corrupted inputs can be diagnosed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSpec {
    Identity,
    Diag(Vec<f64>),
    Lower(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub jacobi: Option<f64>,
    pub closure: Option<f64>,
    pub linearity: Option<f64>,
    pub duality: Option<f64>,
    pub pencil: Option<f64>,
    pub casimir: Option<f64>,
    pub gradient: Option<f64>,
    pub involution: Option<f64>,
    pub drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_orders")]
    pub casimir_orders: Vec<usize>,
    #[serde(default = "default_pencil_order")]
    pub pencil_order: usize,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            casimir_orders: default_orders(),
            pencil_order: default_pencil_order(),
        }
    }
}

fn default_trials() -> usize {
    20
}

fn default_orders() -> Vec<usize> {
    vec![1, 2]
}

fn default_pencil_order() -> usize {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    RigidBodyN4,
    ClebschN4,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub system: SystemKind,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepSpec>,
    /// Initial dual coordinates `ρ12, ρ13, ρ23, ρ14, …`; random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<Vec<f64>>,
    /// Custom systems only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    /// Casimir orders monitored by custom systems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub casimir_orders: Option<Vec<usize>>,
}

fn default_t_end() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StepSpec {
    Fixed { h: f64 },
    Adaptive { rtol: f64, atol: f64 },
}

/// `½ cᵀQc + bᵀc` in dual coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub q: QuadSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadSpec {
    Diag(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config(format!("at `{path}` (line {}, column {}): {inner}", inner.line(), inner.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(p) = &self.params {
            if let Some(n) = p.n {
                if n != p.a.len() + 1 {
                    return Err(CliError::Config(format!(
                        "at `params.n`: n = {n} but `params.a` has {} entries (expected {})",
                        p.a.len(),
                        n.saturating_sub(1)
                    )));
                }
            }
        }
        if let Some(sim) = &self.simulate {
            if !(sim.t_end.is_finite() && sim.t_end >= 0.0) {
                return Err(CliError::Config(format!("at `simulate.t_end`: must be finite and >= 0, got {}", sim.t_end)));
            }
            if sim.hamiltonian.is_some() && sim.system != SystemKind::Custom {
                return Err(CliError::Config("at `simulate.hamiltonian`: only custom systems take a Hamiltonian".into()));
            }
        }
        Ok(())
    }

    pub fn deformation(&self) -> Result<DeformationParams, CliError> {
        let p = self
            .params
            .as_ref()
            .ok_or_else(|| CliError::Config("at `params`: missing".into()))?;
        DeformationParams::new(p.a.clone()).map_err(|e| CliError::Config(format!("at `params.a`: {e}")))
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }
}

impl MatrixSpec {
    /// The dense matrix described, without any membership check.
    pub fn dense(&self, field: &str, params: &DeformationParams) -> Result<DMatrix<f64>, CliError> {
        let n = params.n();
        let bad = |msg: String| CliError::Config(format!("at `{field}`: {msg}"));
        match self {
            MatrixSpec::Identity => Ok(DMatrix::identity(n, n)),
            MatrixSpec::Diag(d) => {
                if d.len() != n {
                    return Err(bad(format!("expected {n} diagonal entries, got {}", d.len())));
                }
                Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
            }
            MatrixSpec::Lower(c) => SymElement::from_coords(params, c)
                .map(SymElement::into_matrix)
                .map_err(|e| bad(e.to_string())),
            MatrixSpec::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(bad(format!("expected a {n}×{n} matrix")));
                }
                Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            }
        }
    }

    /// A member of the symmetric space; `matrix` inputs must pass the
    /// entrywise test at `1e-12`.
    pub fn element(&self, field: &str, params: &DeformationParams) -> Result<SymElement, CliError> {
        let m = self.dense(field, params)?;
        SymElement::from_matrix(params, m, 1e-12).map_err(|e| CliError::Config(format!("at `{field}`: {e}")))
    }

    pub fn diagonal(&self) -> Option<Vec<f64>> {
        match self {
            MatrixSpec::Diag(d) => Some(d.clone()),
            _ => None,
        }
    }
}
