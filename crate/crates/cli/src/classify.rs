//! Signature of the generic algebra, or the semidirect shape when some
//! parameters vanish.

use liebundle::algebra::{DeformationParams, SymElement};
use liebundle::iso::{classify_signature, nested_decomposition, SplitLevel};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Simple {
        label: String,
        p: usize,
        q: usize,
        eigenvalues: Vec<f64>,
    },
    Semidirect {
        shape: String,
        factors: Vec<Factor>,
        levels: Vec<Level>,
    },
}

/// A zero-free diagonal block `A_{(a_lo+1, …)}` of the decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Factor {
    pub name: String,
    /// 0-based rows `lo..hi`.
    pub rows: [usize; 2],
    pub dim: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Level {
    pub k: usize,
    pub left_dim: usize,
    pub right_dim: usize,
    pub abelian_dim: usize,
}

impl From<&SplitLevel> for Level {
    fn from(l: &SplitLevel) -> Self {
        Self {
            k: l.k,
            left_dim: l.left_dim,
            right_dim: l.right_dim,
            abelian_dim: l.abelian_dim,
        }
    }
}

impl Classification {
    pub fn render(&self) -> String {
        match self {
            Classification::Simple { label, p, q, .. } => format!("{label}\nsignature ({p},{q})\n"),
            Classification::Semidirect { shape, factors, levels } => {
                let mut out = format!("{shape}\n");
                for f in factors {
                    out += &format!("  {} ≅ {} (dim {})\n", f.name, f.label, f.dim);
                }
                for l in levels {
                    out += &format!(
                        "  split at a_{}: {}×{} blocks, abelian ideal of dim {}\n",
                        l.k, l.left_dim, l.right_dim, l.abelian_dim
                    );
                }
                out
            }
        }
    }
}

fn block_name(a: &[f64]) -> String {
    let inner: Vec<String> = a.iter().map(|v| format!("{v}")).collect();
    format!("A_{{({})}}", inner.join(","))
}

fn block_label(params: &DeformationParams, s: &DMatrix<f64>, lo: usize, hi: usize) -> String {
    if hi - lo < 2 {
        return "0".into();
    }
    let Ok(sub) = params.sub_params(lo, hi) else {
        return "?".into();
    };
    let m = s.view((lo, lo), (hi - lo, hi - lo)).into_owned();
    match SymElement::from_matrix_unchecked(&sub, m).and_then(|e| classify_signature(&sub, &e)) {
        Ok(sig) => sig.label(),
        Err(_) => "degenerate".into(),
    }
}

/// `A_left × (shape of the right block) ⋉ Mat_{(hi−k)×(k−lo)}`, cutting at the
/// first zero of rows `lo..hi`.
fn shape(params: &DeformationParams, s: &DMatrix<f64>, lo: usize, hi: usize, factors: &mut Vec<Factor>) -> String {
    let a = params.a();
    let first_zero = (lo + 1..hi).find(|&k| a[k - 1] == 0.0);
    let Some(k) = first_zero else {
        let name = block_name(&a[lo..hi - 1]);
        factors.push(Factor {
            name: name.clone(),
            rows: [lo, hi],
            dim: (hi - lo) * (hi - lo - 1) / 2,
            label: block_label(params, s, lo, hi),
        });
        return name;
    };
    let left = shape(params, s, lo, k, factors);
    let right = shape(params, s, k, hi, factors);
    let right = if (k + 1..hi).any(|j| a[j - 1] == 0.0) { format!("({right})") } else { right };
    format!("{left} × {right} ⋉ Mat_{{{}×{}}}", hi - k, k - lo)
}

pub fn classify(params: &DeformationParams, s: &SymElement) -> Result<Classification, CliError> {
    if params.all_nonzero() {
        let sig = classify_signature(params, s).map_err(|e| CliError::Degenerate(e.to_string()))?;
        return Ok(Classification::Simple {
            label: sig.label(),
            p: sig.p,
            q: sig.q,
            eigenvalues: sig.eigenvalues,
        });
    }
    let mut factors = Vec::new();
    let shape = shape(params, s.matrix(), 0, params.n(), &mut factors);
    Ok(Classification::Semidirect {
        shape,
        factors,
        levels: nested_decomposition(params).iter().map(Level::from).collect(),
    })
}

pub fn run(cfg: &RunConfig) -> Result<Classification, CliError> {
    let params = cfg.deformation()?;
    let s = match &cfg.s {
        Some(spec) => spec.element("s", &params)?,
        None => SymElement::identity(&params),
    };
    classify(&params, &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify_a(a: &[f64]) -> Result<Classification, CliError> {
        let p = DeformationParams::new(a.to_vec()).unwrap();
        classify(&p, &SymElement::identity(&p))
    }

    #[test]
    fn generic_rows() {
        for (a, want) in [([1.0, 1.0, 1.0], "so(4)"), ([-1.0, 1.0, 1.0], "so(3,1)"), ([-1.0, 1.0, -1.0], "so(2,2)")] {
            match classify_a(&a).unwrap() {
                Classification::Simple { label, .. } => assert_eq!(label, want),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn euclidean_shape() {
        let Classification::Semidirect { shape, factors, levels } = classify_a(&[0.0, 1.0, 1.0]).unwrap() else {
            panic!()
        };
        assert_eq!(shape, "A_{()} × A_{(1,1)} ⋉ Mat_{3×1}");
        assert_eq!(factors[1].label, "so(3)");
        assert_eq!(levels.len(), 1);
    }

    #[test]
    fn galilean_shape_is_nested() {
        let Classification::Semidirect { shape, levels, .. } = classify_a(&[0.0, 0.0, 1.0]).unwrap() else {
            panic!()
        };
        assert_eq!(shape, "A_{()} × (A_{()} × A_{(1)} ⋉ Mat_{2×1}) ⋉ Mat_{3×1}");
        assert_eq!(levels.len(), 2);
    }

    #[test]
    fn middle_zero() {
        let Classification::Semidirect { shape, factors, .. } = classify_a(&[1.0, 0.0, 1.0]).unwrap() else {
            panic!()
        };
        assert_eq!(shape, "A_{(1)} × A_{(1)} ⋉ Mat_{2×2}");
        assert!(factors.iter().all(|f| f.label == "so(2)"));
    }

    #[test]
    fn singular_s_is_degenerate() {
        let p = DeformationParams::new(vec![1.0, 1.0]).unwrap();
        let s = SymElement::diagonal(&p, &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(classify(&p, &s).unwrap_err().exit_code(), 3);
    }
}
