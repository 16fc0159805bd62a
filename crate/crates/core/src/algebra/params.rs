use std::sync::Arc;

use crate::error::{Error, Result};

/// The deformation sequence `a_1, ..., a_{n-1}` that fixes both matrix spaces.
///
/// Indices in the public surface follow the usual 1-based convention for the
/// parameters (`a(1)` is the first entry) while matrix rows and columns are
/// 0-based. A parameter counts as zero only when it is exactly `0.0`.
#[derive(Debug, Clone)]
pub struct DeformationParams {
    inner: Arc<Inner>,
}

#[derive(Debug)]
struct Inner {
    n: usize,
    a: Vec<f64>,
    zero_set: Vec<usize>,
    // prod[r * n + c] = a_{r+1} * ... * a_c for r <= c (empty product is 1)
    prod: Vec<f64>,
}

impl DeformationParams {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        let n = a.len() + 1;
        if n < 2 {
            return Err(Error::InvalidParams("dimension must be at least 2".into()));
        }
        if let Some(i) = a.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("a_{} is not finite", i + 1)));
        }
        let zero_set = a
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == 0.0)
            .map(|(i, _)| i + 1)
            .collect();
        let mut prod = vec![0.0; n * n];
        for r in 0..n {
            let mut acc = 1.0;
            prod[r * n + r] = 1.0;
            for c in r + 1..n {
                acc *= a[c - 1];
                prod[r * n + c] = acc;
            }
        }
        Ok(Self {
            inner: Arc::new(Inner {
                n,
                a,
                zero_set,
                prod,
            }),
        })
    }

    /// All-ones parameters: the plain skew-symmetric / symmetric spaces.
    pub fn standard(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams("dimension must be at least 2".into()));
        }
        Self::new(vec![1.0; n - 1])
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn a(&self) -> &[f64] {
        &self.inner.a
    }

    /// The 1-based parameter `a_i`.
    pub fn param(&self, i: usize) -> f64 {
        self.inner.a[i - 1]
    }

    /// Strictly increasing 1-based indices `k` with `a_k = 0`.
    pub fn zero_set(&self) -> &[usize] {
        &self.inner.zero_set
    }

    /// `k_0 = 0, k_1, ..., k_N, k_{N+1} = n`.
    pub fn zero_set_with_sentinels(&self) -> Vec<usize> {
        let mut ks = Vec::with_capacity(self.inner.zero_set.len() + 2);
        ks.push(0);
        ks.extend_from_slice(&self.inner.zero_set);
        ks.push(self.inner.n);
        ks
    }

    pub fn all_nonzero(&self) -> bool {
        self.inner.zero_set.is_empty()
    }

    /// The first zero parameter index, if any, as an error suitable for
    /// operations that need the generic case.
    pub fn require_nonzero(&self) -> Result<()> {
        match self.inner.zero_set.first() {
            Some(&index) => Err(Error::ZeroParameter { index }),
            None => Ok(()),
        }
    }

    /// `a_{r+1} ... a_c` for 0-based matrix positions `r <= c`; this is the
    /// factor linking entry `(r, c)` to entry `(c, r)`.
    pub fn prod(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r <= c);
        self.inner.prod[r * self.inner.n + c]
    }

    pub fn same_as(&self, other: &DeformationParams) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.a == other.inner.a
    }

    pub fn check_same(&self, other: &DeformationParams) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::ParamsMismatch)
        }
    }

    /// Parameters of the diagonal block spanning 0-based rows `lo..hi`.
    pub fn sub_params(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo >= hi || hi > self.inner.n {
            return Err(Error::InvalidParams(format!("bad block range {lo}..{hi}")));
        }
        if hi - lo < 2 {
            return Err(Error::InvalidParams("a block of size 1 has no parameters".into()));
        }
        Self::new(self.inner.a[lo..hi - 1].to_vec())
    }

    pub fn skew_dim(&self) -> usize {
        skew_dim(self.inner.n)
    }

    pub fn sym_dim(&self) -> usize {
        sym_dim(self.inner.n)
    }
}

impl PartialEq for DeformationParams {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

pub fn skew_dim(n: usize) -> usize {
    n * (n - 1) / 2
}

pub fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Strictly-lower positions `(i, j)`, `i > j`, in row-major order. This is
/// the coordinate order for skew elements and (transposed) for dual points.
pub fn lower_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..n).flat_map(|i| (0..i).map(move |j| (i, j)))
}

/// Lower-plus-diagonal positions `(i, j)`, `i >= j`, in row-major order.
pub fn lower_diag_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(|i| (0..=i).map(move |j| (i, j)))
}

/// Position of the strictly-lower pair `(i, j)` in [`lower_pairs`] order.
pub fn lower_index(i: usize, j: usize) -> usize {
    debug_assert!(i > j);
    i * (i - 1) / 2 + j
}
