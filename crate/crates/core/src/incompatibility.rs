//! Degree of incompatibility of Bob's and Charlie's measurement pairs.
//!
//! For dichotomic qubit observables with Bloch vectors `n0`, `n1` the degree
//! of incompatibility is `D = |n0 + n1| + |n0 - n1| - 2`, reset to zero when
//! negative. It never exceeds `2(√2 - 1)`, the value of two orthogonal
//! Pauli observables.

use serde::{Deserialize, Serialize};

use crate::certification::{SharpnessInterval, WitnessPair};
use crate::error::{check_range, Error, Result};
use crate::optimize::grid_golden_min;
use crate::qubit::BlochVector;
use crate::scalar::Real;

/// Grid size of the scan over the certified interval.
pub const GRID_POINTS: usize = 10_000;
/// Bracket width at which golden-section refinement stops.
pub const REFINE_TOL: f64 = 1e-10;

/// Assumptions under which the Charlie bound holds.
pub const ASSUMPTIONS: [&str; 2] = ["unbiased_bob", "eta0_eq_eta1"];

/// Largest possible degree of incompatibility, `2(√2 - 1)`.
pub fn max_degree<T: Real>() -> T {
    T::two() * (T::SQRT_2() - T::one())
}

pub fn degree_of_incompatibility<T: Real>(n0: BlochVector<T>, n1: BlochVector<T>) -> Result<T> {
    let n0 = n0.clamp_to_ball()?;
    let n1 = n1.clamp_to_ball()?;
    let raw = (n0 + n1).norm() + (n0 - n1).norm() - T::two();
    Ok(raw.max(T::zero()))
}

/// Lower bound `max(0, 8W - 6)` from a single random-access-code witness.
pub fn bound_b1<T: Real>(w: T) -> Result<T> {
    check_range("w", w.as_f64(), 0.0, 1.0)?;
    Ok((T::lit(8.0) * w - T::lit(6.0)).max(T::zero()))
}

/// Largest Bloch length of Charlie's averaged input when Bob's unbiased
/// observables of sharpness `eta` have direction overlap `overlap`:
/// `½(1 + g + (1 - g)·overlap)` with `g = sqrt(1 - η²)`.
pub fn max_post_measurement_bloch_norm<T: Real>(eta: T, overlap: T) -> T {
    let g = (T::one() - eta * eta).sqrt_clamped();
    T::half() * (T::one() + g + (T::one() - g) * overlap).abs()
}

/// Upper bound on `|n̂0 · n̂1|` given `η_min` and a candidate `η`:
/// `2r·sqrt(1 - r²)` with `r = η_min/η` clamped to 1.
pub fn overlap_bound<T: Real>(eta_lower: T, eta: T) -> T {
    if eta <= T::zero() {
        return T::zero();
    }
    let r = (eta_lower / eta).max(T::zero()).min(T::one());
    T::two() * r * (T::one() - r * r).sqrt_clamped()
}

/// Charlie's bound at a fixed `η`, before minimization and reset:
/// `(16W_AC - 8)/(1 + g + f(1 - g)) - 2`.
pub fn charlie_bound_at<T: Real>(w_ac: T, eta_lower: T, eta: T) -> T {
    let g = (T::one() - eta * eta).sqrt_clamped();
    let f = overlap_bound(eta_lower, eta);
    (T::lit(16.0) * w_ac - T::lit(8.0)) / (T::one() + g + f * (T::one() - g)) - T::two()
}

/// Incompatibility lower bounds for both receivers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncompatibilityResult<T> {
    pub d_bob: T,
    pub d_charlie: T,
    /// Sharpness in the certified interval at which Charlie's bound is smallest.
    pub eta_argmin: T,
    pub assumptions: Vec<String>,
}

/// Bob's bound `8W_AB - 6` and Charlie's bound minimized over the certified
/// sharpness interval (dense grid plus golden-section refinement).
///
/// An inconsistent interval is used with its endpoints sorted.
pub fn bound_b2<T: Real>(
    w: &WitnessPair<T>,
    interval: &SharpnessInterval<T>,
) -> Result<IncompatibilityResult<T>> {
    let (lo, hi) = interval.bounds();
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::EmptyInterval);
    }
    let lo = lo.max(T::zero());
    let hi = hi.min(T::one());
    if hi < lo {
        return Err(Error::EmptyInterval);
    }
    let eta_lower = interval.eta_min;
    let (eta_argmin, raw) = grid_golden_min(
        |eta| charlie_bound_at(w.w_ac, eta_lower, eta),
        lo,
        hi,
        GRID_POINTS,
        T::tol(REFINE_TOL),
    );
    Ok(IncompatibilityResult {
        d_bob: bound_b1(w.w_ab)?,
        d_charlie: raw.max(T::zero()),
        eta_argmin,
        assumptions: ASSUMPTIONS.iter().map(|s| s.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certification::{certify_sharpness, ideal_witness_pair, max_quantum_witness};

    const D_MAX: f64 = 0.828_427_124_746_190_1;

    #[test]
    fn degree_examples() {
        let z = BlochVector::<f64>::unit_z();
        let x = BlochVector::<f64>::unit_x();
        assert_eq!(degree_of_incompatibility(z, z).unwrap(), 0.0);
        assert!((degree_of_incompatibility(x, z).unwrap() - D_MAX).abs() < 1e-15);
        // raw value 1.2√2 - 2 ≈ -0.3029 resets to zero
        assert_eq!(degree_of_incompatibility(z.scale(0.6), x.scale(0.6)).unwrap(), 0.0);
        assert!(degree_of_incompatibility(z.scale(1.1), x).is_err());
    }

    #[test]
    fn b1_examples() {
        assert_eq!(bound_b1(0.75_f64).unwrap(), 0.0);
        assert!((bound_b1(max_quantum_witness::<f64>()).unwrap() - D_MAX).abs() < 1e-12);
        assert!((bound_b1(0.853_f64).unwrap() - 0.824).abs() < 1e-12);
    }

    #[test]
    fn b2_on_sharp_ideal_data_is_maximal() {
        let (ab, ac) = ideal_witness_pair(1.0_f64).unwrap();
        let w = WitnessPair::exact(ab, ac);
        let r = bound_b2(&w, &certify_sharpness(&w).unwrap()).unwrap();
        assert!((r.d_charlie - D_MAX).abs() < 1e-9, "{r:?}");
        assert_eq!(r.eta_argmin, 1.0);
        assert!((r.d_bob - D_MAX).abs() < 1e-12);
        assert_eq!(r.assumptions, vec!["unbiased_bob", "eta0_eq_eta1"]);
    }

    #[test]
    fn b2_reduces_to_b1_at_zero_sharpness() {
        for w_ac in [0.76_f64, 0.8, 0.85] {
            assert!((charlie_bound_at(w_ac, 0.0, 0.0) - (8.0 * w_ac - 6.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn b2_never_loses_to_b1() {
        let w = WitnessPair::exact(0.799_f64, 0.765);
        let i = certify_sharpness(&w).unwrap();
        let r = bound_b2(&w, &i).unwrap();
        assert!(r.d_charlie >= bound_b1(0.765).unwrap() - 1e-9);
        assert!(r.d_charlie <= max_degree::<f64>() + 1e-9);
        let (lo, hi) = i.bounds();
        assert!(r.eta_argmin >= lo && r.eta_argmin <= hi);
    }

    #[test]
    fn overlap_bound_is_safe_at_ratio_one() {
        assert_eq!(overlap_bound(0.5_f64, 0.5 - 1e-16), 0.0);
        assert_eq!(overlap_bound(0.3_f64, 0.0), 0.0);
        // r = 1/√2 maximizes 2r·sqrt(1 - r²) at 1
        assert!((overlap_bound(1.0_f64, 2f64.sqrt()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inconsistent_interval_is_sorted() {
        let w = WitnessPair::exact(0.853_f64, 0.688);
        let i = certify_sharpness(&w).unwrap();
        assert!(!i.consistent);
        let r = bound_b2(&w, &i).unwrap();
        assert!(r.d_charlie > 0.7);
    }

    #[test]
    fn post_measurement_norm_examples() {
        assert!((max_post_measurement_bloch_norm(1.0_f64, 0.0) - 0.5).abs() < 1e-15);
        assert!((max_post_measurement_bloch_norm(0.6_f64, 0.0) - 0.9).abs() < 1e-15);
        assert_eq!(max_post_measurement_bloch_norm(0.0_f64, 0.3), 1.0);
    }

    #[test]
    fn single_precision_bounds() {
        let (ab, ac) = ideal_witness_pair(1.0_f32).unwrap();
        let w = WitnessPair::exact(ab, ac);
        let r = bound_b2(&w, &certify_sharpness(&w).unwrap()).unwrap();
        assert!((r.d_charlie - D_MAX as f32).abs() < 1e-4);
    }
}
