use crate::domain::Bvp;
use crate::error::{Error, Result};

/// Causal moving average over the last `len` samples.
///
/// The first `len - 1` outputs average only the samples available so far, so
/// the output keeps the input's length and frame alignment.
pub fn moving_average_samples(x: &[f64], len: usize) -> Result<Vec<f64>> {
    if len == 0 {
        return Err(Error::Invalid("moving average length must be >= 1".into()));
    }
    Ok((0..x.len())
        .map(|n| {
            let start = (n + 1).saturating_sub(len);
            let window = &x[start..=n];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect())
}

pub fn moving_average(signal: &Bvp, len: usize) -> Result<Bvp> {
    signal.with_samples(moving_average_samples(signal.samples(), len)?)
}
