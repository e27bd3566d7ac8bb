//! Three-channel independent component analysis.
//!
//! Symmetric FastICA with the log-cosh contrast (`g = tanh`), run on the
//! whitened channels. The component returned is the one most correlated with
//! a reference channel, with its sign flipped so that correlation is
//! non-negative.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::domain::Bvp;
use crate::error::{Error, Result};
use crate::pipeline::normalize::normalize_samples;

pub const MAX_ITER: usize = 500;
pub const TOLERANCE: f64 = 1e-6;

/// Eigenvalue ratio below which the channel covariance counts as singular.
const RANK_EPS: f64 = 1e-9;

/// Result of [`ica_extract`].
#[derive(Debug, Clone, PartialEq)]
pub struct IcaOutcome {
    pub bvp: Bvp,
    /// Set when the channels were linearly dependent and the normalized
    /// green channel was returned instead of a separated component.
    pub fallback: bool,
    pub iterations: usize,
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// `(W Wᵀ)^(-1/2) W`
fn sym_decorrelate(w: &Matrix3<f64>) -> Matrix3<f64> {
    let eig = SymmetricEigen::new(w * w.transpose());
    let inv_sqrt = Matrix3::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.max(1e-300).sqrt()));
    eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose() * w
}

/// Unmixing of whitened data `z` (columns are samples). Returns rows of W.
fn fastica(z: &[Vector3<f64>], seed: u64) -> Result<(Matrix3<f64>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = Matrix3::from_fn(|_, _| StandardNormal.sample(&mut rng));
    let mut w = sym_decorrelate(&init);
    let n = z.len() as f64;
    for iter in 1..=MAX_ITER {
        let mut next = Matrix3::zeros();
        for c in 0..3 {
            let row = w.row(c).transpose();
            let mut acc = Vector3::zeros();
            let mut deriv = 0.0;
            for zt in z {
                let g = row.dot(zt).tanh();
                acc += zt * g;
                deriv += 1.0 - g * g;
            }
            let updated = acc / n - row * (deriv / n);
            next.set_row(c, &updated.transpose());
        }
        let next = sym_decorrelate(&next);
        let change = (0..3)
            .map(|c| (1.0 - next.row(c).dot(&w.row(c)).abs()).abs())
            .fold(0.0, f64::max);
        w = next;
        if change < TOLERANCE {
            return Ok((w, iter));
        }
    }
    Err(Error::IcaNonConvergence(MAX_ITER))
}

/// Separates three channels and returns the component best matching `reference`.
///
/// `channels` are R, G, B, each normalized already. Linearly dependent
/// channels cannot be separated; the normalized green channel is then
/// returned with `fallback` set.
pub fn ica_extract(
    channels: [&[f64]; 3],
    reference: &[f64],
    fps: f64,
    seed: u64,
) -> Result<IcaOutcome> {
    let n = reference.len();
    if n < 32 {
        return Err(Error::SignalTooShort { got: n, need: 32 });
    }
    if channels.iter().any(|c| c.len() != n) {
        return Err(Error::LengthMismatch(
            "ica channels and reference differ in length".into(),
        ));
    }
    let fallback = || -> Result<IcaOutcome> {
        Ok(IcaOutcome {
            bvp: Bvp::new(normalize_samples(channels[1])?, fps)?,
            fallback: true,
            iterations: 0,
        })
    };

    let means: Vec<f64> = channels
        .iter()
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    let x: Vec<Vector3<f64>> = (0..n)
        .map(|t| {
            Vector3::new(
                channels[0][t] - means[0],
                channels[1][t] - means[1],
                channels[2][t] - means[2],
            )
        })
        .collect();
    let cov = x
        .iter()
        .fold(Matrix3::zeros(), |acc, v| acc + v * v.transpose())
        / n as f64;
    let eig = SymmetricEigen::new(cov);
    let max_ev = eig.eigenvalues.max();
    if !(max_ev > 0.0) || eig.eigenvalues.min() <= RANK_EPS * max_ev {
        return fallback();
    }
    let whitening = Matrix3::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()))
        * eig.eigenvectors.transpose();
    let z: Vec<Vector3<f64>> = x.iter().map(|v| whitening * v).collect();

    let (w, iterations) = fastica(&z, seed)?;
    let sources: Vec<Vec<f64>> = (0..3)
        .map(|c| {
            let row = w.row(c).transpose();
            z.iter().map(|zt| row.dot(zt)).collect()
        })
        .collect();
    let (best, corr) = sources
        .iter()
        .enumerate()
        .map(|(i, s)| (i, pearson(s, reference)))
        .fold(
            (0, 0.0f64),
            |b, c| if c.1.abs() > b.1.abs() { c } else { b },
        );
    let sign = if corr < 0.0 { -1.0 } else { 1.0 };
    let out: Vec<f64> = sources[best].iter().map(|v| sign * v).collect();
    Ok(IcaOutcome {
        bvp: Bvp::new(out, fps)?,
        fallback: false,
        iterations,
    })
}
