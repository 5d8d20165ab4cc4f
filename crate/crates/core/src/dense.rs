//! Dense complex operators with their space descriptors.

use crate::prelude::*;
use crate::space::{Density, SpaceDesc};

/// Which one-sided trace a boundary operator represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Trace from the bounded domain, the side the normal points away from.
    Interior,
    Exterior,
}

impl Side {
    /// `+1` inside, `−1` outside: the sign in front of the jump halves.
    pub fn sign(self) -> f64 {
        match self {
            Side::Interior => 1.0,
            Side::Exterior => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Interior => "interior",
            Side::Exterior => "exterior",
        }
    }
}

/// Bookkeeping attached to every assembled matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Convention {
    /// Short operator name, e.g. `"single_layer"`.
    pub operator: String,
    /// Kernel and sign, e.g. `"-dG/dn_y"`.
    pub kernel: String,
    /// `None` for two-sided (jump-free) operators.
    pub side: Option<Side>,
}

impl Convention {
    pub fn new(operator: &str, kernel: &str, side: Option<Side>) -> Self {
        Convention {
            operator: operator.into(),
            kernel: kernel.into(),
            side,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DenseError {
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    Shape(usize, usize, usize, usize),
    #[error("vector length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),
}

/// Row-major complex matrix. Rows follow the test space, columns the trial
/// space; vector-valued spaces are laid out component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
    pub trial: SpaceDesc,
    pub test: SpaceDesc,
    pub convention: Convention,
}

impl DenseOperator {
    pub fn zeros(rows: usize, cols: usize, trial: SpaceDesc, test: SpaceDesc, convention: Convention) -> Self {
        DenseOperator {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
            trial,
            test,
            convention,
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn same_shape(&self, o: &DenseOperator) -> Result<(), DenseError> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(DenseError::Shape(self.rows, self.cols, o.rows, o.cols));
        }
        Ok(())
    }

    /// `self + s · o`, keeping the metadata of `self`.
    pub fn axpy(&self, s: C64, o: &DenseOperator) -> Result<DenseOperator, DenseError> {
        self.same_shape(o)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&o.data) {
            *a += s * b;
        }
        Ok(out)
    }

    pub fn scaled(&self, s: C64) -> DenseOperator {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    /// Plain (non-conjugating) transpose; spaces are swapped.
    pub fn transpose(&self) -> DenseOperator {
        let mut out = DenseOperator::zeros(self.cols, self.rows, self.test, self.trial, self.convention.clone());
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |A − Aᵀ| / max |A|` for a square matrix.
    pub fn symmetry_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r + 1..self.cols {
                worst = worst.max((self.get(r, c) - self.get(c, r)).norm());
            }
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>, DenseError> {
        if x.len() != self.cols {
            return Err(DenseError::Length {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `yᵀ A x` without conjugation.
    pub fn bilinear(&self, y: &[C64], x: &[C64]) -> Result<C64, DenseError> {
        let ax = self.matvec(x)?;
        if y.len() != self.rows {
            return Err(DenseError::Length {
                expected: self.rows,
                got: y.len(),
            });
        }
        Ok(y.iter().zip(&ax).map(|(a, b)| a * b).sum())
    }

    /// Applies the operator to a density of the trial space.
    pub fn apply(&self, d: &Density) -> Result<Vec<C64>, DenseError> {
        self.matvec(&d.coeffs)
    }

    /// Real part as a row-major matrix.
    pub fn real_part(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.re).collect()
    }
}

/// In-place Cholesky factor (lower, row-major) of a symmetric real matrix.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>, DenseError> {
    if a.len() != n * n {
        return Err(DenseError::Length {
            expected: n * n,
            got: a.len(),
        });
    }
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return Err(DenseError::NotPositiveDefinite(j));
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(l)
}

/// Whether the symmetric part of the real part is positive definite.
pub fn real_part_positive_definite(op: &DenseOperator) -> bool {
    if op.rows != op.cols {
        return false;
    }
    let n = op.rows;
    let mut a = op.real_part();
    for r in 0..n {
        for c in r + 1..n {
            let s = 0.5 * (a[r * n + c] + a[c * n + r]);
            a[r * n + c] = s;
            a[c * n + r] = s;
        }
    }
    cholesky(&a, n).is_ok()
}
