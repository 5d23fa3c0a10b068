//! Dense symmetric matrices and Cholesky factorization with a jitter ladder.

use crate::error::{Error, Result};

/// Square matrix stored row-major; symmetric by construction through [`SymMatrix::set_sym`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    /// `v^T K v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular factor `L` with `L L^T = K + jitter·I`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    jitter: f64,
}

/// Pivots (conditional variances) below this multiple of the mean diagonal
/// reject the unjittered factorization.
pub const NO_JITTER_MIN_PIVOT: f64 = 1e-14;
/// First and last jitter rungs, relative to `trace(K)/t`.
pub const JITTER_START: f64 = 1e-14;
pub const JITTER_STOP: f64 = 1e-6;

impl Cholesky {
    /// Plain factorization of `K + jitter·I`; fails when a pivot drops to
    /// `min_pivot` or below.
    pub fn factor(k: &SymMatrix, jitter: f64, min_pivot: f64) -> Option<Self> {
        let n = k.size();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = k.get(j, j) + jitter;
            for p in 0..j {
                d -= l[j * n + p] * l[j * n + p];
            }
            if !(d > min_pivot) || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = k.get(i, j);
                for p in 0..j {
                    s -= l[i * n + p] * l[j * n + p];
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Cholesky { n, l, jitter })
    }

    /// Factor with the jitter ladder: no jitter (with a pivot floor), then
    /// `1e-12, 1e-11, ..., 1e-6` times `trace(K)/t`.
    pub fn factor_with_ladder(k: &SymMatrix) -> Result<Self> {
        let n = k.size();
        if n == 0 {
            return Ok(Cholesky {
                n,
                l: Vec::new(),
                jitter: 0.0,
            });
        }
        let mut scale = k.trace() / n as f64;
        if !(scale > 0.0) {
            scale = 1.0;
        }
        if let Some(c) = Self::factor(k, 0.0, NO_JITTER_MIN_PIVOT * scale) {
            return Ok(c);
        }
        let mut rel = JITTER_START;
        while rel <= JITTER_STOP * (1.0 + 1e-9) {
            if let Some(c) = Self::factor(k, rel * scale, 0.0) {
                return Ok(c);
            }
            rel *= 10.0;
        }
        Err(Error::IllConditioned(format!(
            "Cholesky failed for a {n}x{n} Gram matrix at every jitter rung up to {:.1e}",
            JITTER_STOP * scale
        )))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Row `i` of `L` up to and including the diagonal.
    pub fn lower_row(&self, i: usize) -> &[f64] {
        &self.l[i * self.n..i * self.n + i + 1]
    }

    /// Solve `L v = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut v = b.to_vec();
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s = dot(row, &v[..i]);
            v[i] = (v[i] - s) / self.l[i * n + i];
        }
        v
    }

    /// Solve `L^T x = v`.
    pub fn backward(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = v.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in i + 1..n {
                s -= self.l[p * n + i] * x[p];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }

    /// Solve `(K + jitter·I) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }
}
