//! Kolmogorov-Smirnov distances and quantiles.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn sorted<T: Scalar>(samples: &[T]) -> Result<Vec<T>> {
    if samples.is_empty() {
        return Err(Error::Domain("no samples".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN sample".into()));
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    Ok(v)
}

/// `sup |F_N − F|` for the empirical CDF of `samples` against a continuous `cdf`.
pub fn ks_distance<T: Scalar>(samples: &[T], cdf: impl Fn(T) -> T) -> Result<T> {
    let xs = sorted(samples)?;
    let n = T::from_usize_lossy(xs.len());
    let mut worst = T::zero();
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let above = T::from_usize_lossy(i + 1) / n - f;
        let below = f - T::from_usize_lossy(i) / n;
        worst = worst.max(above.abs()).max(below.abs());
    }
    Ok(worst.min(T::one()))
}

/// `sup |F_a − F_b|` between two empirical CDFs.
pub fn ks_two_sample<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    let (xa, xb) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (T::from_usize_lossy(xa.len()), T::from_usize_lossy(xb.len()));
    let (mut i, mut j) = (0, 0);
    let mut worst = T::zero();
    while i < xa.len() && j < xb.len() {
        let x = if xa[i] <= xb[j] { xa[i] } else { xb[j] };
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        let gap = (T::from_usize_lossy(i) / na - T::from_usize_lossy(j) / nb).abs();
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Linearly interpolated quantile (Hyndman-Fan type 7) of sorted data.
pub fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of empty data");
    let pos = q.clamp(0.0, 1.0) * (xs.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < xs.len() {
        xs[i] + frac * (xs[i + 1] - xs[i])
    } else {
        xs[i]
    }
}

pub fn median(samples: &[f64]) -> Result<f64> {
    Ok(quantile_sorted(&sorted(samples)?, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_at_median() {
        let d = ks_distance(&[0.0f64], |x| 0.5 + 0.5 * x.tanh()).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_samples_at_lower_end() {
        let xs = vec![0.0f64; 1000];
        let d = ks_distance(&xs, |x: f64| if x < 0.0 { 0.0 } else { x.min(1.0) }).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn single_precision() {
        let d = ks_distance(&[0.25f32, 0.75], |x| x).unwrap();
        assert!((d - 0.25).abs() < 1e-6);
    }

    #[test]
    fn two_sample_cases() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert!((ks_two_sample(&[1.0f64, 3.0], &[2.0, 4.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantiles() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
        assert_eq!(quantile_sorted(&xs, 0.5), 2.5);
        assert_eq!(median(&[5.0, 1.0, 3.0]).unwrap(), 3.0);
        assert!(median(&[]).is_err());
    }
}
