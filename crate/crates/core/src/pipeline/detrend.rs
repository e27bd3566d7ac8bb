//! Smoothness-priors detrending.
//!
//! The stationary part of `z` is `z - (I + λ² D₂ᵀD₂)⁻¹ z`, with `D₂` the
//! `(N-2) x N` second-difference operator. The system matrix is symmetric
//! positive definite with bandwidth 2, so it is factored with a banded
//! Cholesky decomposition in O(N).

use crate::domain::Bvp;
use crate::error::{Error, Result};

/// Lower-triangular banded Cholesky factor of a pentadiagonal SPD matrix.
struct PentaCholesky {
    /// `L[i][i]`
    d0: Vec<f64>,
    /// `L[i][i-1]`, zero at i = 0
    d1: Vec<f64>,
    /// `L[i][i-2]`, zero at i < 2
    d2: Vec<f64>,
}

impl PentaCholesky {
    /// `main[i] = A[i][i]`, `off1[i] = A[i+1][i]`, `off2[i] = A[i+2][i]`.
    fn factor(main: &[f64], off1: &[f64], off2: &[f64]) -> Result<Self> {
        let n = main.len();
        let mut d0 = vec![0.0; n];
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n {
            if i >= 2 {
                d2[i] = off2[i - 2] / d0[i - 2];
            }
            if i >= 1 {
                let mut v = off1[i - 1];
                if i >= 2 {
                    v -= d2[i] * d1[i - 1];
                }
                d1[i] = v / d0[i - 1];
            }
            let pivot = main[i] - d1[i] * d1[i] - d2[i] * d2[i];
            if !(pivot > 0.0) {
                return Err(Error::Invalid(
                    "detrend system is not positive definite".into(),
                ));
            }
            d0[i] = pivot.sqrt();
        }
        Ok(PentaCholesky { d0, d1, d2 })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = rhs[i];
            if i >= 1 {
                v -= self.d1[i] * y[i - 1];
            }
            if i >= 2 {
                v -= self.d2[i] * y[i - 2];
            }
            y[i] = v / self.d0[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = y[i];
            if i + 1 < n {
                v -= self.d1[i + 1] * x[i + 1];
            }
            if i + 2 < n {
                v -= self.d2[i + 2] * x[i + 2];
            }
            x[i] = v / self.d0[i];
        }
        x
    }
}

/// Bands of `I + λ² D₂ᵀD₂` for a signal of length `n`.
fn system_bands(n: usize, lambda: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let l2 = lambda * lambda;
    let mut main = vec![1.0; n];
    let mut off1 = vec![0.0; n.saturating_sub(1)];
    let mut off2 = vec![0.0; n.saturating_sub(2)];
    // Each row of D₂ is [1, -2, 1] at columns r, r+1, r+2; accumulate its outer product.
    let coef = [1.0, -2.0, 1.0];
    for r in 0..n.saturating_sub(2) {
        for a in 0..3 {
            main[r + a] += l2 * coef[a] * coef[a];
        }
        for a in 0..2 {
            off1[r + a] += l2 * coef[a] * coef[a + 1];
        }
        off2[r] += l2 * coef[0] * coef[2];
    }
    (main, off1, off2)
}

/// Trend estimate `(I + λ² D₂ᵀD₂)⁻¹ z`.
pub fn trend_samples(z: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if z.len() < 3 {
        return Err(Error::SignalTooShort {
            got: z.len(),
            need: 3,
        });
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Invalid(format!(
            "detrend lambda must be > 0, got {lambda}"
        )));
    }
    let (main, off1, off2) = system_bands(z.len(), lambda);
    Ok(PentaCholesky::factor(&main, &off1, &off2)?.solve(z))
}

/// Removes the smoothness-priors trend from `z`.
pub fn detrend_samples(z: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let trend = trend_samples(z, lambda)?;
    Ok(z.iter().zip(trend).map(|(v, t)| v - t).collect())
}

pub fn detrend(signal: &Bvp, lambda: f64) -> Result<Bvp> {
    signal.with_samples(detrend_samples(signal.samples(), lambda)?)
}
