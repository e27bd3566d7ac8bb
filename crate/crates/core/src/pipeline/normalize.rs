use crate::domain::Bvp;
use crate::error::{Error, Result};

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population (1/N) standard deviation.
pub(crate) fn pop_std(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Z-scores `x` with its mean and population standard deviation.
///
/// A constant input has no usable pulse and yields [`Error::FlatSignal`].
pub fn normalize_samples(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::SignalTooShort { got: 0, need: 1 });
    }
    let m = mean(x);
    let sd = pop_std(x);
    if !(sd > 1e-12 * (1.0 + m.abs())) {
        return Err(Error::FlatSignal);
    }
    Ok(x.iter().map(|v| (v - m) / sd).collect())
}

pub fn normalize(signal: &Bvp) -> Result<Bvp> {
    signal.with_samples(normalize_samples(signal.samples())?)
}
