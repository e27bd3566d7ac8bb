//! Step-removal filter.
//!
//! Walks the signal once. Whenever two consecutive samples differ by more
//! than the threshold, the jump is subtracted from the whole remaining suffix
//! and the same position is tested again, so the step disappears and the
//! signal continues from the level it had before the jump.

use crate::domain::Bvp;
use crate::error::{Error, Result};

/// Removes steps larger than `threshold` from `samples`.
///
/// The output has the input's length and every consecutive difference is at
/// most `threshold` in magnitude.
pub fn denoise_samples(samples: &[f64], threshold: f64) -> Result<Vec<f64>> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::Invalid(format!(
            "denoise threshold must be > 0, got {threshold}"
        )));
    }
    let mut s = samples.to_vec();
    let Some(&first) = s.first() else {
        return Err(Error::SignalTooShort { got: 0, need: 1 });
    };
    let mut out = Vec::with_capacity(s.len());
    out.push(first);
    let mut i = 0;
    while i + 1 < s.len() {
        let step = s[i + 1] - s[i];
        if step.abs() > threshold {
            for v in &mut s[i + 1..] {
                *v -= step;
            }
        } else {
            out.push(s[i + 1]);
            i += 1;
        }
    }
    Ok(out)
}

pub fn denoise(signal: &Bvp, threshold: f64) -> Result<Bvp> {
    signal.with_samples(denoise_samples(signal.samples(), threshold)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_is_unchanged() {
        let s = vec![3.5; 20];
        assert_eq!(denoise_samples(&s, 1.0).unwrap(), s);
        assert_eq!(denoise_samples(&s, 1e-6).unwrap(), s);
    }

    #[test]
    fn hand_traced_example() {
        let out = denoise_samples(&[0.0, 0.1, 2.1, 2.2], 1.0).unwrap();
        let want = [0.0, 0.1, 0.1, 0.2];
        for (o, w) in out.iter().zip(want) {
            assert!((o - w).abs() < 1e-12, "{out:?}");
        }
    }

    #[test]
    fn small_ramp_is_unchanged() {
        let s: Vec<f64> = (0..50).map(|i| 0.5 * i as f64).collect();
        assert_eq!(denoise_samples(&s, 1.0).unwrap(), s);
    }

    #[test]
    fn rejects_bad_threshold() {
        assert!(denoise_samples(&[1.0, 2.0], 0.0).is_err());
        assert!(denoise_samples(&[1.0, 2.0], -1.0).is_err());
        assert!(denoise_samples(&[], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn bounded_differences_and_idempotent(
            s in prop::collection::vec(-50.0f64..50.0, 1..120),
            nu in 0.05f64..5.0,
        ) {
            let once = denoise_samples(&s, nu).unwrap();
            prop_assert_eq!(once.len(), s.len());
            for w in once.windows(2) {
                prop_assert!((w[1] - w[0]).abs() <= nu);
            }
            let twice = denoise_samples(&once, nu).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
