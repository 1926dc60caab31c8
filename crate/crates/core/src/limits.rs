//! Limiting constants, centring transforms, limit distribution functions and
//! strong-law limits for coverage thresholds.
//!
//! Everything here is generic over [`Scalar`] (`f32` or `f64`). Gamma values
//! are only ever needed at half-integers, so they are evaluated as exact
//! log-sums rather than through a general log-gamma approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `ln Γ(n/2)` for integer `n ≥ 1`.
pub fn ln_gamma_half<T: Scalar>(n: u32) -> T {
    assert!(n >= 1, "ln_gamma_half needs n >= 1");
    if n.is_multiple_of(2) {
        // Γ(m) = (m-1)!
        let m = n / 2;
        (1..m).fold(T::zero(), |acc, j| acc + T::from_u32(j).unwrap().ln())
    } else {
        // Γ(m + 1/2) = √π ∏_{j<m} (j + 1/2)
        let m = (n - 1) / 2;
        let half = T::lit(0.5);
        (0..m).fold(half * T::PI().ln(), |acc, j| {
            acc + (T::from_u32(j).unwrap() + half).ln()
        })
    }
}

fn ln_factorial<T: Scalar>(n: u32) -> T {
    (2..=n).fold(T::zero(), |acc, j| acc + T::from_u32(j).unwrap().ln())
}

/// `ln θ_d`, the log-volume of the unit ball in `ℝ^d`.
pub fn ln_theta<T: Scalar>(d: u32) -> T {
    if d == 0 {
        return T::zero();
    }
    T::from_u32(d).unwrap() * T::lit(0.5) * T::PI().ln() - ln_gamma_half::<T>(d + 2)
}

/// Volume of the unit ball in `ℝ^d`, with `θ_0 = 1`.
pub fn theta<T: Scalar>(d: u32) -> T {
    ln_theta::<T>(d).exp()
}

/// `c_d = (1/d!) (√π Γ(1+d/2) / Γ((d+1)/2))^{d-1}` for `d ≥ 1`.
pub fn c_d<T: Scalar>(d: u32) -> T {
    assert!(d >= 1, "c_d needs d >= 1");
    let base = T::lit(0.5) * T::PI().ln() + ln_gamma_half::<T>(d + 2) - ln_gamma_half::<T>(d + 1);
    (T::from_u32(d - 1).unwrap() * base - ln_factorial::<T>(d)).exp()
}

/// Boundary constant `c_{d,k}` for `d ≥ 2`, `k ≥ 1`.
pub fn c_dk<T: Scalar>(d: u32, k: u32) -> T {
    assert!(d >= 2 && k >= 1, "c_dk needs d >= 2 and k >= 1");
    let df = T::from_u32(d).unwrap();
    let kf = T::from_u32(k).unwrap();
    let one = T::one();
    let two = T::lit(2.0);
    let inv_d = one / df;
    let ln = c_d::<T>(d - 1).ln() - ln_factorial::<T>(k - 1)
        + (two - df - inv_d) * ln_theta::<T>(d)
        + (two * df - T::lit(3.0)) * ln_theta::<T>(d - 1)
        + (one - df) * ln_theta::<T>(d - 2)
        + (df + kf - T::lit(3.0) + inv_d) * (one - inv_d).ln()
        + (inv_d - one) * two.ln();
    ln.exp()
}

/// `H(t) = 1 - t + t ln t`, `H(0) = 1`.
pub fn h_fn<T: Scalar>(t: T) -> Result<T> {
    if t < T::zero() || t.is_nan() {
        return Err(Error::Domain(format!("H(t) needs t >= 0, got {t}")));
    }
    if t == T::zero() {
        return Ok(T::one());
    }
    Ok(T::one() - t + t * t.ln())
}

/// Absolute tolerance of [`hat_h`] in double precision.
pub const HAT_H_TOL: f64 = 1e-12;
const HAT_H_MAX_ITER: usize = 200;

/// The unique `y ≥ a` with `y H(a/y) = x`.
pub fn hat_h<T: Scalar>(a: T, x: T) -> Result<T> {
    if a < T::zero() || x < T::zero() || a.is_nan() || x.is_nan() {
        return Err(Error::Domain(format!("hat_h needs a, x >= 0, got a={a}, x={x}")));
    }
    if a == T::zero() {
        return Ok(x);
    }
    if x == T::zero() {
        return Ok(a);
    }
    if x.is_infinite() {
        return Ok(x);
    }
    // g(y) = y H(a/y) = y - a - a ln(y/a), increasing on [a, ∞).
    let g = |y: T| y - a - a * (y / a).ln();
    let mut lo = a;
    let mut hi = a + x;
    let mut iter = 0;
    while g(hi) < x {
        lo = hi;
        hi = hi + hi;
        iter += 1;
        if iter > HAT_H_MAX_ITER || hi.is_infinite() {
            return Err(Error::NoConvergence(format!("hat_h({a}, {x}): bracket expansion")));
        }
    }
    let tol = T::lit(HAT_H_TOL);
    for _ in 0..HAT_H_MAX_ITER {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if g(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(format!("hat_h({a}, {x}) after {HAT_H_MAX_ITER} bisections")))
}

fn check_size<T: Scalar>(n: T) -> Result<()> {
    if !(n > T::E()) {
        return Err(Error::Domain(format!("sample size or intensity must exceed e, got {n}")));
    }
    Ok(())
}

/// Boundary-regime centring of a threshold:
/// `n θ_d f0 R^d / 2 - ((d-1)/d) ln(n f0) - (d+k-3+1/d) ln ln n`.
pub fn weak_transform<T: Scalar>(r: T, n: T, d: u32, k: u32, f0: T) -> Result<T> {
    check_size(n)?;
    let df = T::from_u32(d).unwrap();
    let kf = T::from_u32(k).unwrap();
    let one = T::one();
    Ok(n * theta::<T>(d) * f0 * r.powi(d as i32) / T::lit(2.0)
        - (df - one) / df * (n * f0).ln()
        - (df + kf - T::lit(3.0) + one / df) * n.ln().ln())
}

/// Interior-regime centring of a threshold:
/// `n θ_d f0 R^d - ln(n f0) - (d+k-2) ln ln n`.
pub fn interior_transform<T: Scalar>(r: T, n: T, d: u32, k: u32, f0: T) -> Result<T> {
    check_size(n)?;
    let shift = T::from_i64(d as i64 + k as i64 - 2).unwrap();
    Ok(n * theta::<T>(d) * f0 * r.powi(d as i32) - (n * f0).ln() - shift * n.ln().ln())
}

/// Growth regime of `k(n)` relative to `ln n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Beta<T> {
    /// `k(n) / ln n → β < ∞`.
    Finite(T),
    /// `k(n) / ln n → ∞` with `k(n) / n → 0`.
    Infinite,
}

/// Which limit law a [`LimitLaw`] instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "beta", rename_all = "snake_case")]
pub enum Regime<T> {
    WeakBoundary,
    WeakInterior,
    Slln(Beta<T>),
}

/// Parameters sufficient to evaluate a limit distribution or strong-law limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw<T> {
    pub d: u32,
    pub k: u32,
    /// Infimum of the density over `B`.
    pub f0: T,
    /// Infimum of the density over `B ∩ ∂A`; `None` when that set is empty.
    pub f1: Option<T>,
    /// `v(B)`.
    pub v_b: T,
    /// `ṽ(B ∩ ∂A)`.
    pub sv_b: T,
    pub regime: Regime<T>,
}

impl<T: Scalar> LimitLaw<T> {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 || self.k < 1 {
            return Err(Error::Domain(format!("limit law needs d >= 2, k >= 1, got d={}, k={}", self.d, self.k)));
        }
        if !(self.f0 > T::zero()) || !(self.v_b > T::zero()) || self.sv_b < T::zero() {
            return Err(Error::Domain(format!(
                "limit law needs f0 > 0, v(B) > 0, sv(B) >= 0; got f0={}, v(B)={}, sv(B)={}",
                self.f0, self.v_b, self.sv_b
            )));
        }
        if let Some(f1) = self.f1 {
            if !(f1 > T::zero()) {
                return Err(Error::Domain(format!("f1 must be > 0, got {f1}")));
            }
        }
        if let Regime::Slln(Beta::Finite(b)) = self.regime {
            if !(b >= T::zero()) {
                return Err(Error::Domain(format!("beta must be >= 0, got {b}")));
            }
        }
        Ok(())
    }
}

/// `c·e^{-s}` with `0·∞ = 0`.
fn weighted_tail<T: Scalar>(c: T, s: T) -> T {
    if c == T::zero() {
        T::zero()
    } else {
        c * (-s).exp()
    }
}

/// Limiting CDF of the boundary-regime statistic at `zeta`.
///
/// Refuses laws where `B` touches `∂A` in a set of zero surface measure:
/// no centring with a non-degenerate limit is known there.
pub fn weak_limit_cdf<T: Scalar>(law: &LimitLaw<T>, zeta: T) -> Result<T> {
    law.validate()?;
    if law.regime != Regime::WeakBoundary {
        return Err(Error::Domain(format!("weak_limit_cdf needs the weak-boundary regime, got {:?}", law.regime)));
    }
    if law.f1.is_some() && law.sv_b == T::zero() {
        return Err(Error::Refused(
            "B meets the boundary in a null set; the boundary-regime limit is unknown".into(),
        ));
    }
    let exponent = if law.d == 2 && law.k == 1 {
        weighted_tail(law.v_b, zeta + zeta) + weighted_tail(c_dk::<T>(2, 1) * law.sv_b, zeta)
    } else {
        weighted_tail(c_dk::<T>(law.d, law.k) * law.sv_b, zeta)
    };
    Ok((-exponent).exp())
}

/// Limiting CDF of the interior-regime statistic at `beta`:
/// `exp(-(c_d/(k-1)!) v(B) e^{-β})`.
pub fn interior_limit_cdf<T: Scalar>(law: &LimitLaw<T>, beta: T) -> Result<T> {
    law.validate()?;
    if law.regime != Regime::WeakInterior {
        return Err(Error::Domain(format!(
            "interior_limit_cdf needs the weak-interior regime, got {:?}",
            law.regime
        )));
    }
    let coef = (c_d::<T>(law.d).ln() - ln_factorial::<T>(law.k - 1)).exp() * law.v_b;
    Ok((-weighted_tail(coef, beta)).exp())
}

/// Which threshold a strong law refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SllnMode {
    /// Full coverage of `B`, boundary included.
    Boundary,
    /// Coverage of `B` away from the boundary.
    Interior,
}

/// Almost-sure limit of `n θ_d R^d / k(n)` (`β = ∞`) or `n θ_d R^d / ln n`
/// (`β < ∞`). `f1 = None` stands for `1/f1 = 0`.
pub fn slln_limit<T: Scalar>(d: u32, beta: Beta<T>, f0: T, f1: Option<T>, mode: SllnMode) -> Result<T> {
    if d < 2 {
        return Err(Error::Domain(format!("slln_limit needs d >= 2, got {d}")));
    }
    if !(f0 > T::zero()) {
        return Err(Error::Domain(format!("slln_limit needs f0 > 0, got {f0}")));
    }
    let inv_f1 = match (mode, f1) {
        (SllnMode::Interior, _) | (_, None) => T::zero(),
        (SllnMode::Boundary, Some(f1)) => {
            if !(f1 > T::zero()) {
                return Err(Error::Domain(format!("f1 must be > 0, got {f1}")));
            }
            T::one() / f1
        }
    };
    let two = T::lit(2.0);
    match beta {
        Beta::Infinite => Ok((T::one() / f0).max(two * inv_f1)),
        Beta::Finite(b) => {
            let interior = hat_h(b, T::one())? / f0;
            if inv_f1 == T::zero() {
                return Ok(interior);
            }
            let df = T::from_u32(d).unwrap();
            let boundary = two * hat_h(b, T::one() - T::one() / df)? * inv_f1;
            Ok(interior.max(boundary))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn theta_values() {
        assert!(rel(theta::<f64>(2), PI) < 1e-15);
        assert!(rel(theta::<f64>(3), 4.0 * PI / 3.0) < 1e-15);
        assert_eq!(theta::<f64>(0), 1.0);
        assert!(rel(theta::<f64>(1), 2.0) < 1e-15);
        assert!(theta::<f64>(50).is_finite() && theta::<f64>(50) > 0.0);
    }

    #[test]
    fn c_d_values() {
        assert!((c_d::<f64>(1) - 1.0).abs() < 1e-15);
        assert!((c_d::<f64>(2) - 1.0).abs() < 1e-15);
        assert!(rel(c_d::<f64>(3), 3.0 * PI * PI / 32.0) < 1e-14);
        // Γ(7/2) = 15√π/8, Γ(3) = 2, so c_5 = (15π/16)^4 / 120.
        assert!(rel(c_d::<f64>(5), (15.0 * PI / 16.0).powi(4) / 120.0) < 1e-12);
    }

    #[test]
    fn c_dk_closed_forms() {
        let mut fact = 1.0;
        for k in 1..=8u32 {
            if k > 1 {
                fact *= (k - 1) as f64;
            }
            let two = 2f64.powi(1 - k as i32) / PI.sqrt() / fact;
            let three = 2f64.powi(k as i32 - 5) * 3f64.powi(1 - k as i32) * PI.powf(5.0 / 3.0) / fact;
            assert!(rel(c_dk::<f64>(2, k), two) < 1e-12, "d=2 k={k}");
            assert!(rel(c_dk::<f64>(3, k), three) < 1e-12, "d=3 k={k}");
        }
        assert!(rel(c_dk::<f64>(3, 1), PI.powf(5.0 / 3.0) / 16.0) < 1e-12);
    }

    #[test]
    fn single_precision_agrees() {
        assert!((c_dk::<f32>(3, 2) as f64 - c_dk::<f64>(3, 2)).abs() < 1e-5);
        assert!((hat_h::<f32>(1.0, 1.0).unwrap() as f64 - hat_h::<f64>(1.0, 1.0).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn h_values() {
        assert_eq!(h_fn(1.0f64).unwrap(), 0.0);
        assert_eq!(h_fn(0.0f64).unwrap(), 1.0);
        assert!((h_fn(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert!(h_fn(-0.1f64).is_err());
    }

    #[test]
    fn hat_h_values() {
        assert_eq!(hat_h(0.0f64, 3.7).unwrap(), 3.7);
        assert_eq!(hat_h(2.5f64, 0.0).unwrap(), 2.5);
        // Independent oracle: bisection on y - ln y = 2 over [1, 10].
        let (mut lo, mut hi) = (1.0f64, 10.0f64);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if mid - mid.ln() < 2.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let y = hat_h(1.0f64, 1.0).unwrap();
        assert!((y - lo).abs() < 1e-10);
        assert!((y - 3.1462).abs() < 1e-4);
        assert!(hat_h(-1.0f64, 1.0).is_err());
    }

    #[test]
    fn transforms_at_zero_radius() {
        let (n, d, k, f0) = (1e4f64, 3u32, 2u32, 0.5f64);
        let z = weak_transform(0.0, n, d, k, f0).unwrap();
        let expect = -(2.0 / 3.0) * (n * f0).ln() - (3.0 + 2.0 - 3.0 + 1.0 / 3.0) * n.ln().ln();
        assert!((z - expect).abs() < 1e-12);
        assert!(weak_transform(0.1, 2.5f64, 2, 1, 1.0).is_err());
        assert!(interior_transform(0.1, 2.0f64, 2, 1, 1.0).is_err());
    }

    #[test]
    fn abstract_statistics() {
        let (n, r) = (5000.0f64, 0.03f64);
        let z3 = weak_transform(r, n, 3, 1, 1.0).unwrap();
        let x3 = n * PI * r.powi(3) - n.ln() - 2.0 * n.ln().ln();
        assert!((1.5 * z3 - x3).abs() < 1e-12);
        let z2 = weak_transform(r, n, 2, 1, 1.0).unwrap();
        let x2 = n * PI * r * r - n.ln() - n.ln().ln();
        assert!((2.0 * z2 - x2).abs() < 1e-12);
    }

    fn boundary_law(d: u32, k: u32, v_b: f64, sv_b: f64, f1: Option<f64>) -> LimitLaw<f64> {
        LimitLaw { d, k, f0: 1.0, f1, v_b, sv_b, regime: Regime::WeakBoundary }
    }

    #[test]
    fn weak_cdf_cases() {
        let law = boundary_law(3, 1, 1.0, 0.0, None);
        for z in [-20.0, 0.0, 5.0] {
            assert_eq!(weak_limit_cdf(&law, z).unwrap(), 1.0);
        }
        let law = boundary_law(2, 1, 1.0, 3.0, Some(1.0));
        for x in [-2.0f64, 0.0, 1.3] {
            let got = weak_limit_cdf(&law, x / 2.0).unwrap();
            let want = (-(-x).exp() - 3.0 / PI.sqrt() * (-x / 2.0).exp()).exp();
            assert!((got - want).abs() < 1e-12);
        }
        assert!((weak_limit_cdf(&law, 60.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(weak_limit_cdf(&law, -1e3).unwrap(), 0.0);
        let touching = boundary_law(3, 1, 1.0, 0.0, Some(1.0));
        assert!(matches!(weak_limit_cdf(&touching, 0.0), Err(Error::Refused(_))));
    }

    #[test]
    fn interior_cdf_cases() {
        let mut law = LimitLaw { d: 2, k: 1, f0: 1.0, f1: None, v_b: 1.0, sv_b: 0.0, regime: Regime::WeakInterior };
        assert!((interior_limit_cdf(&law, 0.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((interior_limit_cdf(&law, 50.0).unwrap() - 1.0).abs() < 1e-12);
        law.d = 3;
        law.k = 2;
        law.v_b = 2.0;
        let want = (-(3.0 * PI * PI / 32.0) * 2.0 * (-1.0f64).exp()).exp();
        assert!((interior_limit_cdf(&law, 1.0).unwrap() - want).abs() < 1e-14);
        law.regime = Regime::WeakBoundary;
        assert!(interior_limit_cdf(&law, 1.0).is_err());
    }

    #[test]
    fn slln_examples() {
        let v = slln_limit(3, Beta::Finite(0.0f64), 1.0, Some(1.0), SllnMode::Boundary).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-15);
        // n π R³ / ln n = (3/4) n θ_3 R³ / ln n → 1.
        assert!((0.75 * v - 1.0).abs() < 1e-15);
        assert_eq!(slln_limit(2, Beta::Finite(0.0), 1.0, None, SllnMode::Interior).unwrap(), 1.0);
        assert_eq!(slln_limit(2, Beta::Infinite, 1.0, Some(4.0), SllnMode::Boundary).unwrap(), 1.0);
        assert_eq!(slln_limit(2, Beta::Finite(0.0), 1.0, Some(1.0), SllnMode::Boundary).unwrap(), 1.0);
        let v = slln_limit(2, Beta::Finite(1.0f64), 1.0, Some(1.0), SllnMode::Boundary).unwrap();
        let want = hat_h(1.0f64, 1.0).unwrap().max(2.0 * hat_h(1.0, 0.5).unwrap());
        assert_eq!(v, want);
    }
}
