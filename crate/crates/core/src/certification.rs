//! Witnesses, the optimal quantum trade-off, and sharpness certification.
//!
//! The two witnesses are the average success rates of Bob and Charlie in
//! guessing the requested bit of Alice:
//!
//! ```text
//! W_AB = 1/8 Σ_{x,y} P(b = x_y | x, y)
//! W_AC = 1/8 Σ_{x,z} P(c = x_z | x, z)
//! ```
//!
//! A witness pair confines Bob's sharpness to
//! `[√2(2W_AB - 1), 2·sqrt((2 + √2 - 4W_AC)(2W_AC - 1))]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::protocol::{Event, JointDistribution};
use crate::sampling::CountTable;
use crate::scalar::{tolerance, Real};

/// Largest quantum value of a single witness, `(2 + √2)/4`.
pub fn max_quantum_witness<T: Real>() -> T {
    (T::two() + T::SQRT_2()) / T::lit(4.0)
}

/// Classical bound on each witness.
pub fn classical_witness<T: Real>() -> T {
    T::lit(0.75)
}

/// Observed witness pair with one-sigma uncertainties.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPair<T> {
    pub w_ab: T,
    pub w_ac: T,
    pub sigma_ab: T,
    pub sigma_ac: T,
}

impl<T: Real> WitnessPair<T> {
    pub fn new(w_ab: T, w_ac: T, sigma_ab: T, sigma_ac: T) -> Self {
        Self {
            w_ab,
            w_ac,
            sigma_ab,
            sigma_ac,
        }
    }

    /// Exact pair without uncertainties.
    pub fn exact(w_ab: T, w_ac: T) -> Self {
        Self::new(w_ab, w_ac, T::zero(), T::zero())
    }
}

/// Anything witnesses can be estimated from.
pub trait WitnessSource<T> {
    fn witnesses(&self) -> Result<WitnessPair<T>>;
}

impl<T: Real> WitnessSource<T> for JointDistribution<T> {
    fn witnesses(&self) -> Result<WitnessPair<T>> {
        let mut ab = T::zero();
        let mut ac = T::zero();
        // Each (x, y) success probability appears once per z; average z out.
        for e in Event::all() {
            let p = self.get(e);
            if e.b == e.bob_target() {
                ab = ab + p;
            }
            if e.c == e.charlie_target() {
                ac = ac + p;
            }
        }
        let norm = T::lit(16.0);
        Ok(WitnessPair::exact(ab / norm, ac / norm))
    }
}

impl WitnessSource<f64> for CountTable {
    /// Frequencies pooled over the unused input; binomial standard errors.
    fn witnesses(&self) -> Result<WitnessPair<f64>> {
        let mut hits_ab = [[0u64; 2]; 4];
        let mut total_ab = [[0u64; 2]; 4];
        let mut hits_ac = [[0u64; 2]; 4];
        let mut total_ac = [[0u64; 2]; 4];
        for e in Event::all() {
            let k = self.get(e);
            let x = 2 * e.x0 + e.x1;
            total_ab[x][e.y] += k;
            total_ac[x][e.z] += k;
            if e.b == e.bob_target() {
                hits_ab[x][e.y] += k;
            }
            if e.c == e.charlie_target() {
                hits_ac[x][e.z] += k;
            }
        }
        let estimate = |hits: &[[u64; 2]; 4], total: &[[u64; 2]; 4], input: &str| -> Result<(f64, f64)> {
            let mut mean = 0.0;
            let mut var = 0.0;
            for x in 0..4 {
                for s in 0..2 {
                    let n = total[x][s];
                    if n == 0 {
                        return Err(Error::EmptySetting(format!(
                            "x=({},{}) {input}={s}",
                            x / 2,
                            x % 2
                        )));
                    }
                    let p = hits[x][s] as f64 / n as f64;
                    mean += p;
                    var += p * (1.0 - p) / n as f64;
                }
            }
            Ok((mean / 8.0, var.sqrt() / 8.0))
        };
        let (w_ab, sigma_ab) = estimate(&hits_ab, &total_ab, "y")?;
        let (w_ac, sigma_ac) = estimate(&hits_ac, &total_ac, "z")?;
        Ok(WitnessPair::new(w_ab, w_ac, sigma_ab, sigma_ac))
    }
}

/// Witness pair from a distribution or a count table.
pub fn compute_witnesses<T, S: WitnessSource<T> + ?Sized>(source: &S) -> Result<WitnessPair<T>> {
    source.witnesses()
}

/// Witnesses of the ideal strategy at sharpness `eta`:
/// `((2 + √2η)/4, (4 + √2 + sqrt(2 - 2η²))/8)`.
pub fn ideal_witness_pair<T: Real>(eta: T) -> Result<(T, T)> {
    check_range("eta", eta.as_f64(), 0.0, 1.0)?;
    let sqrt2 = T::SQRT_2();
    let w_ab = (T::two() + sqrt2 * eta) / T::lit(4.0);
    let w_ac = (T::lit(4.0) + sqrt2 + (T::two() - T::two() * eta * eta).sqrt_clamped()) / T::lit(8.0);
    Ok((w_ab, w_ac))
}

/// Largest `W_AC` quantum theory allows alongside `w_ab`:
/// `(4 + √2 + sqrt(16W - 16W² - 2))/8`.
pub fn optimal_tradeoff<T: Real>(w_ab: T) -> Result<T> {
    let radicand = T::lit(16.0) * w_ab - T::lit(16.0) * w_ab * w_ab - T::two();
    if w_ab.is_nan() || w_ab < T::half() || radicand < -T::tol(tolerance::RADICAND) {
        return Err(Error::OutOfRange {
            name: "w_ab",
            value: w_ab.as_f64(),
            min: 0.5,
            max: max_quantum_witness::<f64>(),
        });
    }
    Ok((T::lit(4.0) + T::SQRT_2() + snap_zero(radicand).sqrt_clamped()) / T::lit(8.0))
}

fn snap_zero<T: Real>(radicand: T) -> T {
    if radicand.abs() <= T::tol(tolerance::ROUNDING) {
        T::zero()
    } else {
        radicand
    }
}

/// Certified sharpness interval `[eta_min, eta_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessInterval<T> {
    pub eta_min: T,
    pub eta_max: T,
    pub sigma_min: T,
    pub sigma_max: T,
    /// `eta_min <= eta_max` (up to rounding).
    pub consistent: bool,
    /// The upper-bound radicand was negative and clamped to zero.
    pub radicand_clamped: bool,
}

impl<T: Real> SharpnessInterval<T> {
    /// Endpoints in ascending order; an inconsistent interval is swapped.
    pub fn bounds(&self) -> (T, T) {
        (self.eta_min.min(self.eta_max), self.eta_min.max(self.eta_max))
    }

    /// `eta_max - eta_min`; negative for inconsistent data.
    pub fn width(&self) -> T {
        self.eta_max - self.eta_min
    }

    pub fn contains(&self, eta: T, tol: T) -> bool {
        let (lo, hi) = self.bounds();
        eta >= lo - tol && eta <= hi + tol
    }
}

fn upper_radicand<T: Real>(w_ac: T) -> T {
    (T::two() + T::SQRT_2() - T::lit(4.0) * w_ac) * (T::two() * w_ac - T::one())
}

fn eta_upper<T: Real>(w_ac: T) -> T {
    snap_unit(T::two() * snap_zero(upper_radicand(w_ac)).sqrt_clamped())
}

// Clamp to [0, 1], and treat values within rounding of an endpoint as that
// endpoint: near η = 1 the downstream sqrt(1 - η²) turns a 1e-16 error into 1e-8.
fn snap_unit<T: Real>(eta: T) -> T {
    let tol = T::tol(tolerance::INTERVAL);
    if eta >= T::one() - tol {
        T::one()
    } else if eta <= tol {
        T::zero()
    } else {
        eta
    }
}

/// Sharpness interval implied by a witness pair, with first-order
/// uncertainties `σ_min = 2√2·σ_AB` and `σ_max = |∂η_max/∂W_AC|·σ_AC`.
///
/// Where the upper-bound radicand vanishes the derivative diverges; the
/// uncertainty there is the larger one-sided change of `eta_max` over
/// `W_AC ± σ_AC`.
pub fn certify_sharpness<T: Real>(w: &WitnessPair<T>) -> Result<SharpnessInterval<T>> {
    check_range("w_ab", w.w_ab.as_f64(), 0.0, 1.0)?;
    check_range("w_ac", w.w_ac.as_f64(), 0.0, 1.0)?;
    let sqrt2 = T::SQRT_2();
    let eta_min = snap_unit(sqrt2 * (T::two() * w.w_ab - T::one()));
    let radicand = upper_radicand(w.w_ac);
    let eta_max = eta_upper(w.w_ac);
    let sigma_min = T::two() * sqrt2 * w.sigma_ab;
    let sigma_max = if radicand > T::tol(tolerance::RADICAND) {
        let slope = (T::lit(8.0) + T::two() * sqrt2 - T::lit(16.0) * w.w_ac) / radicand.sqrt();
        slope.abs() * w.sigma_ac
    } else {
        let down = (eta_upper(w.w_ac - w.sigma_ac) - eta_max).abs();
        let up = (eta_upper(w.w_ac + w.sigma_ac) - eta_max).abs();
        down.max(up)
    };
    Ok(SharpnessInterval {
        eta_min,
        eta_max,
        sigma_min,
        sigma_max,
        consistent: eta_min <= eta_max + T::tol(tolerance::INTERVAL),
        radicand_clamped: radicand < T::zero(),
    })
}

/// Serialized certification summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationResult<T> {
    pub w_ab: T,
    pub w_ac: T,
    pub sigma_ab: T,
    pub sigma_ac: T,
    pub eta_min: T,
    pub eta_max: T,
    pub consistent: bool,
}

impl<T: Real> CertificationResult<T> {
    pub fn new(w: &WitnessPair<T>, interval: &SharpnessInterval<T>) -> Self {
        Self {
            w_ab: w.w_ab,
            w_ac: w.w_ac,
            sigma_ab: w.sigma_ab,
            sigma_ac: w.sigma_ac,
            eta_min: interval.eta_min,
            eta_max: interval.eta_max,
            consistent: interval.consistent,
        }
    }
}

/// Spread of the resampled estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub resamples: usize,
    pub sigma_ab: f64,
    pub sigma_ac: f64,
    pub sigma_eta_min: f64,
    pub sigma_eta_max: f64,
}

/// Parametric bootstrap: every cell is redrawn as `Poisson(k)` and the
/// witnesses and interval recomputed. A cross-check of the analytic errors.
pub fn bootstrap(counts: &CountTable, resamples: usize, seed: u64) -> Result<BootstrapSummary> {
    if resamples < 2 {
        return Err(Error::Config("bootstrap needs at least two resamples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: Vec<[f64; 4]> = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut cells = [0u64; Event::COUNT];
        for (cell, &k) in cells.iter_mut().zip(counts.counts()) {
            *cell = if k == 0 {
                0
            } else {
                Poisson::new(k as f64).expect("positive rate").sample(&mut rng) as u64
            };
        }
        let table = CountTable::new(cells, counts.events_per_setting());
        let w = table.witnesses()?;
        let i = certify_sharpness(&w)?;
        samples.push([w.w_ab, w.w_ac, i.eta_min, i.eta_max]);
    }
    let std = |k: usize| {
        let n = samples.len() as f64;
        let mean = samples.iter().map(|s| s[k]).sum::<f64>() / n;
        (samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok(BootstrapSummary {
        resamples,
        sigma_ab: std(0),
        sigma_ac: std(1),
        sigma_eta_min: std(2),
        sigma_eta_max: std(3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{exact_distribution, ProtocolSpec};
    use crate::sampling::sample_counts;

    #[test]
    fn uniform_outputs_give_half() {
        let w = compute_witnesses(&JointDistribution::<f64>::uniform()).unwrap();
        assert!((w.w_ab - 0.5).abs() < 1e-15 && (w.w_ac - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exact_optimal_distribution_reproduces_ideal_pair() {
        let d = exact_distribution(&ProtocolSpec::<f64>::optimal(0.848, 1.0).unwrap());
        let w = compute_witnesses(&d).unwrap();
        // (2 + √2·0.848)/4 and (4 + √2 + sqrt(2 - 2·0.848²))/8
        assert!((w.w_ab - 0.799_813_275_223_096_2).abs() < 1e-12);
        assert!((w.w_ac - 0.770_467_676_719_610_6).abs() < 1e-12);
    }

    #[test]
    fn classical_strategy_hits_three_quarters() {
        let d = exact_distribution(&ProtocolSpec::<f64>::classical());
        let w = compute_witnesses(&d).unwrap();
        assert!((w.w_ab - 0.75).abs() < 1e-15 && (w.w_ac - 0.75).abs() < 1e-15);
    }

    #[test]
    fn ideal_pair_examples() {
        let (ab, ac) = ideal_witness_pair(1.0_f64).unwrap();
        assert!((ab - 0.853_553_390_593_273_7).abs() < 1e-15);
        assert!((ac - 0.676_776_695_296_636_9).abs() < 1e-15);
        let (ab, ac) = ideal_witness_pair(0.0_f64).unwrap();
        assert_eq!(ab, 0.5);
        assert!((ac - 0.853_553_390_593_273_7).abs() < 1e-15);
        let (ab, ac) = ideal_witness_pair(0.766_f64).unwrap();
        assert!((ab - 0.770_821_897_194_447_7).abs() < 1e-15);
        assert!((ac - 0.790_415_927_078_623_2).abs() < 1e-15);
        assert!(ideal_witness_pair(1.01_f64).is_err());
    }

    #[test]
    fn tradeoff_endpoints_and_domain() {
        let top = max_quantum_witness::<f64>();
        assert!((optimal_tradeoff(top).unwrap() - 0.676_776_695_296_636_9).abs() < 1e-7);
        assert!((optimal_tradeoff(0.5_f64).unwrap() - 0.853_553_390_593_273_7).abs() < 1e-15);
        assert!(matches!(optimal_tradeoff(0.9_f64), Err(Error::OutOfRange { .. })));
        assert!(optimal_tradeoff(0.4_f64).is_err());
    }

    #[test]
    fn ideal_pairs_saturate_tradeoff() {
        for i in 0..=100 {
            let eta = i as f64 / 100.0;
            let (ab, ac) = ideal_witness_pair(eta).unwrap();
            assert!((optimal_tradeoff(ab).unwrap() - ac).abs() < 1e-12, "eta {eta}");
        }
    }

    #[test]
    fn measured_row_bounds() {
        let row = |ab, ac| certify_sharpness(&WitnessPair::exact(ab, ac)).unwrap();
        let i = row(0.853_f64, 0.688);
        assert!((i.eta_min - 0.998_434_775).abs() < 1e-9 && (i.eta_max - 0.997_982_564).abs() < 1e-9);
        assert!(!i.consistent);
        let i = row(0.799, 0.765);
        assert!((i.eta_min - 0.845_699_710).abs() < 1e-9 && (i.eta_max - 0.866_563_761).abs() < 1e-9);
        assert!(i.consistent);
        let i = row(0.503, 0.850);
        assert!((i.eta_min - 0.008_485_281).abs() < 1e-9 && (i.eta_max - 0.199_494_297).abs() < 1e-9);
    }

    #[test]
    fn radicand_clamp_is_flagged() {
        let i = certify_sharpness(&WitnessPair::new(0.5_f64, 0.86, 0.002, 0.003)).unwrap();
        assert!(i.radicand_clamped);
        assert_eq!(i.eta_max, 0.0);
        assert!(i.sigma_max.is_finite());
        assert!(certify_sharpness(&WitnessPair::exact(1.2_f64, 0.7)).is_err());
    }

    #[test]
    fn first_order_sigma_matches_finite_difference() {
        let w = WitnessPair::new(0.799_f64, 0.765, 0.002, 0.002);
        let i = certify_sharpness(&w).unwrap();
        assert!((i.sigma_min - 2.0 * 2f64.sqrt() * 0.002).abs() < 1e-15);
        let h: f64 = 1e-6;
        let up = certify_sharpness(&WitnessPair::exact(0.799, 0.765 + h)).unwrap().eta_max;
        let dn = certify_sharpness(&WitnessPair::exact(0.799, 0.765 - h)).unwrap().eta_max;
        let slope = (up - dn) / (2.0 * h);
        assert!((i.sigma_max - slope.abs() * 0.002).abs() < 1e-8);
    }

    #[test]
    fn count_witnesses_are_close_to_exact() {
        let spec = ProtocolSpec::<f64>::optimal(0.848, 0.98).unwrap();
        let exact = compute_witnesses(&exact_distribution(&spec)).unwrap();
        let counts = sample_counts(&spec, 100_000, 21).unwrap();
        let w = compute_witnesses(&counts).unwrap();
        assert!(w.sigma_ab > 0.0 && w.sigma_ac > 0.0);
        assert!((w.w_ab - exact.w_ab).abs() < 5.0 * w.sigma_ab);
        assert!((w.w_ac - exact.w_ac).abs() < 5.0 * w.sigma_ac);
    }

    #[test]
    fn bootstrap_agrees_with_analytic_errors() {
        let spec = ProtocolSpec::<f64>::optimal(0.6, 0.98).unwrap();
        let counts = sample_counts(&spec, 20_000, 4).unwrap();
        let w = compute_witnesses(&counts).unwrap();
        let boot = bootstrap(&counts, 400, 9).unwrap();
        // 400 resamples pin a standard deviation to roughly ±7%
        assert!((boot.sigma_ab / w.sigma_ab - 1.0).abs() < 0.25, "{boot:?} vs {w:?}");
        assert!((boot.sigma_ac / w.sigma_ac - 1.0).abs() < 0.25, "{boot:?} vs {w:?}");
    }

    #[test]
    fn single_precision_certification() {
        let (ab, ac) = ideal_witness_pair(0.5_f32).unwrap();
        let i = certify_sharpness(&WitnessPair::exact(ab, ac)).unwrap();
        assert!(i.contains(0.5, 1e-4));
    }

    #[test]
    fn endpoints_of_the_ideal_curve_are_tight() {
        // W_AC a ulp off its maximum would otherwise give eta_max ~ 1e-7.
        for eta in [0.0, 1.0] {
            let w: WitnessPair<f64> =
                compute_witnesses(&exact_distribution(&ProtocolSpec::optimal(eta, 1.0).unwrap())).unwrap();
            let i = certify_sharpness(&w).unwrap();
            assert_eq!((i.eta_min, i.eta_max), (eta, eta));
            assert!((optimal_tradeoff(w.w_ab).unwrap() - w.w_ac).abs() < 1e-12);
        }
    }
}
