//! Preparations, instruments and measurements of the three parties.
//!
//! Inputs are bits indexed with `usize` values in `{0, 1}`. Alice's input
//! pair `(x0, x1)` is stored at index `2·x0 + x1`.

use crate::error::{check_range, Result};
use crate::qubit::{bloch_to_state, psd_sqrt, BlochVector, Observable, Operator2, QubitState};
use crate::scalar::Real;

#[inline]
pub(crate) fn alice_index(x0: usize, x1: usize) -> usize {
    debug_assert!(x0 < 2 && x1 < 2);
    2 * x0 + x1
}

/// Alice's four preparations `ρ_{x0 x1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparationSet<T> {
    states: [QubitState<T>; 4],
}

impl<T: Real> PreparationSet<T> {
    /// States ordered as `(0,0), (0,1), (1,0), (1,1)`.
    pub fn new(states: [QubitState<T>; 4]) -> Self {
        Self { states }
    }

    pub fn from_bloch(vectors: [BlochVector<T>; 4]) -> Result<Self> {
        Ok(Self::new([
            bloch_to_state(vectors[0])?,
            bloch_to_state(vectors[1])?,
            bloch_to_state(vectors[2])?,
            bloch_to_state(vectors[3])?,
        ]))
    }

    pub fn state(&self, x0: usize, x1: usize) -> &QubitState<T> {
        &self.states[alice_index(x0, x1)]
    }

    pub fn states(&self) -> &[QubitState<T>; 4] {
        &self.states
    }

    pub fn depolarize(&self, visibility: T) -> Self {
        Self::new(self.states.map(|s| s.depolarize(visibility)))
    }
}

/// Bob's Lüders instruments, one per input `y`, with Kraus operators
/// `K_{b|y} = sqrt((𝟙 + (-1)^b B_y)/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument<T> {
    observables: [Observable<T>; 2],
    kraus: [[Operator2<T>; 2]; 2],
}

impl<T: Real> Instrument<T> {
    pub fn luders(observables: [Observable<T>; 2]) -> Result<Self> {
        let kraus_for = |obs: &Observable<T>| -> Result<[Operator2<T>; 2]> {
            Ok([psd_sqrt(&obs.effect(0))?, psd_sqrt(&obs.effect(1))?])
        };
        Ok(Self {
            kraus: [kraus_for(&observables[0])?, kraus_for(&observables[1])?],
            observables,
        })
    }

    pub fn kraus(&self, y: usize, b: usize) -> &Operator2<T> {
        &self.kraus[y][b]
    }

    pub fn observable(&self, y: usize) -> &Observable<T> {
        &self.observables[y]
    }

    pub fn observables(&self) -> &[Observable<T>; 2] {
        &self.observables
    }

    pub fn is_unbiased(&self) -> bool {
        self.observables.iter().all(|o| o.bias == T::zero())
    }

    /// Outcome probability `Tr(K ρ K†)` and the normalized post-measurement
    /// state (`None` when the outcome has zero probability).
    pub fn apply(&self, y: usize, b: usize, rho: &QubitState<T>) -> (T, Option<QubitState<T>>) {
        let out = self.kraus[y][b].conjugate(rho.operator());
        (out.trace().re, QubitState::from_unnormalized(out))
    }
}

/// Charlie's two dichotomic measurements, `effects[z][c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet<T> {
    effects: [[Operator2<T>; 2]; 2],
}

impl<T: Real> MeasurementSet<T> {
    pub fn from_observables(observables: [Observable<T>; 2]) -> Self {
        Self {
            effects: observables.map(|o| [o.effect(0), o.effect(1)]),
        }
    }

    pub fn effect(&self, z: usize, c: usize) -> &Operator2<T> {
        &self.effects[z][c]
    }
}

/// Optimal preparations: four pure states on the xz great circle with Bloch
/// vectors `(±1, 0, ±1)/√2`, the x sign encoding `x0` and the z sign `x1`.
///
/// As `|ψ⟩ = cos α|0⟩ + sin α|1⟩` the angles are `α ∈ {π/8, 3π/8, -π/8, 5π/8}`.
pub fn optimal_preparations<T: Real>() -> PreparationSet<T> {
    let angles = [
        T::PI() / T::lit(8.0),
        T::lit(3.0) * T::PI() / T::lit(8.0),
        -T::PI() / T::lit(8.0),
        T::lit(5.0) * T::PI() / T::lit(8.0),
    ];
    let vectors = angles.map(|a| {
        let twice = a + a;
        BlochVector::new(twice.sin(), T::zero(), twice.cos())
    });
    PreparationSet::from_bloch(vectors).expect("unit vectors are valid states")
}

/// Bob's optimal instrument with `B_y ∈ {α₀𝟙 + ησx, α₁𝟙 + ησz}`.
///
/// The optimal strategy is unbiased (`bias = None`); biased variants are
/// accepted when `|α_y| <= 1 - η`.
pub fn bob_instrument<T: Real>(eta: T, bias: Option<[T; 2]>) -> Result<Instrument<T>> {
    check_range("eta", eta.as_f64(), 0.0, 1.0)?;
    let [a0, a1] = bias.unwrap_or([T::zero(); 2]);
    Instrument::luders([
        Observable::new(a0, BlochVector::unit_x().scale(eta))?,
        Observable::new(a1, BlochVector::unit_z().scale(eta))?,
    ])
}

/// Charlie's projective `σx` (z = 0) and `σz` (z = 1) measurements.
pub fn charlie_measurements<T: Real>() -> MeasurementSet<T> {
    MeasurementSet::from_observables([
        Observable::new(T::zero(), BlochVector::unit_x()).expect("sharp observable"),
        Observable::new(T::zero(), BlochVector::unit_z()).expect("sharp observable"),
    ])
}

/// Sharpness `η = cos(4θ)` set by the half-wave-plate angle `θ` in degrees.
pub fn eta_from_waveplate<T: Real>(theta_degrees: T) -> Result<T> {
    check_range("theta", theta_degrees.as_f64(), 0.0, 22.5)?;
    let eta = (T::lit(4.0) * theta_degrees.to_radians()).cos();
    // cos(π/2) evaluates to ~6e-17
    if eta < T::lit(4.0) * T::epsilon() {
        return Ok(T::zero());
    }
    Ok(eta.min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    const SQRT1_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn optimal_preparations_form_a_square() {
        let prep = optimal_preparations::<f64>();
        let v00 = prep.state(0, 0).bloch();
        assert!(close(v00.x, SQRT1_2, 1e-15) && close(v00.y, 0.0, 0.0) && close(v00.z, SQRT1_2, 1e-15));
        let v11 = prep.state(1, 1).bloch();
        assert!(close(v11.x, -SQRT1_2, 1e-15) && close(v11.z, -SQRT1_2, 1e-15));
        let v01 = prep.state(0, 1).bloch();
        let v10 = prep.state(1, 0).bloch();
        // adjacent corners orthogonal, opposite corners antipodal
        assert!(v00.dot(v01).abs() < 1e-10 && v00.dot(v10).abs() < 1e-10);
        assert!(v11.dot(v01).abs() < 1e-10 && v11.dot(v10).abs() < 1e-10);
        assert!(close(v00.dot(v11), -1.0, 1e-10) && close(v01.dot(v10), -1.0, 1e-10));
        for s in prep.states() {
            assert!(close(s.purity(), 1.0, 1e-12));
        }
    }

    #[test]
    fn preparation_bits_follow_bob_axes() {
        let prep = optimal_preparations::<f64>();
        for x0 in 0..2 {
            for x1 in 0..2 {
                let v = prep.state(x0, x1).bloch();
                assert_eq!(v.x > 0.0, x0 == 0);
                assert_eq!(v.z > 0.0, x1 == 0);
            }
        }
    }

    #[test]
    fn sharp_instrument_is_projective() {
        let inst = bob_instrument(1.0_f64, None).unwrap();
        let k = inst.kraus(1, 0);
        let expected = Operator2::from_real([[1.0, 0.0], [0.0, 0.0]]);
        assert!(k.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn non_interactive_instrument_leaves_states_untouched() {
        let inst = bob_instrument(0.0_f64, None).unwrap();
        let rho = bloch_to_state(BlochVector::new(0.3, -0.4, 0.5)).unwrap();
        for y in 0..2 {
            for b in 0..2 {
                let (p, post) = inst.apply(y, b, &rho);
                assert!(close(p, 0.5, 1e-15));
                assert!(post.unwrap().operator().max_abs_diff(rho.operator()) < 1e-15);
            }
        }
    }

    #[test]
    fn unsharp_kraus_matches_closed_form() {
        let inst = bob_instrument(0.6_f64, None).unwrap();
        let p_plus = Operator2::from_real([[1.0, 0.0], [0.0, 0.0]]);
        let p_minus = Operator2::from_real([[0.0, 0.0], [0.0, 1.0]]);
        let expected = p_plus.scale(0.8_f64.sqrt()) + p_minus.scale(0.2_f64.sqrt());
        assert!(inst.kraus(1, 0).max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn instruments_are_complete_and_effect_consistent() {
        for i in 0..=10 {
            let eta = i as f64 / 10.0;
            let biases = [None, Some([0.5 * (1.0 - eta), -(1.0 - eta)])];
            for bias in biases {
                let inst = bob_instrument(eta, bias).unwrap();
                for y in 0..2 {
                    let mut sum = Operator2::zero();
                    for b in 0..2 {
                        let k = inst.kraus(y, b);
                        let kk = k.adjoint() * *k;
                        assert!(kk.max_abs_diff(&inst.observable(y).effect(b)) < 1e-10);
                        sum = sum + kk;
                    }
                    assert!(sum.max_abs_diff(&Operator2::identity()) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn sharp_instrument_is_repeatable() {
        let inst = bob_instrument(1.0_f64, None).unwrap();
        let rho = bloch_to_state(BlochVector::new(0.2, 0.5, -0.3)).unwrap();
        for y in 0..2 {
            for b in 0..2 {
                let k = inst.kraus(y, b);
                let once = k.conjugate(rho.operator());
                let twice = k.conjugate(&once);
                assert!(once.max_abs_diff(&twice) < 1e-15);
            }
        }
    }

    #[test]
    fn bob_instrument_validates_inputs() {
        assert!(matches!(
            bob_instrument(1.2_f64, None),
            Err(Error::OutOfRange { name: "eta", .. })
        ));
        assert!(matches!(
            bob_instrument(0.8_f64, Some([0.3, 0.0])),
            Err(Error::InvalidObservable { .. })
        ));
    }

    #[test]
    fn charlie_effects() {
        let m = charlie_measurements::<f64>();
        let ket0 = Operator2::from_real([[1.0, 0.0], [0.0, 0.0]]);
        let plus = Operator2::from_real([[0.5, 0.5], [0.5, 0.5]]);
        assert!(m.effect(1, 0).max_abs_diff(&ket0) < 1e-15);
        assert!(m.effect(0, 0).max_abs_diff(&plus) < 1e-15);
        for z in 0..2 {
            let sum = *m.effect(z, 0) + *m.effect(z, 1);
            assert!(sum.max_abs_diff(&Operator2::identity()) < 1e-15);
        }
    }

    #[test]
    fn waveplate_angles() {
        assert!(close(eta_from_waveplate(0.0_f64).unwrap(), 1.0, 1e-15));
        assert!(close(eta_from_waveplate(8.0_f64).unwrap(), 0.848, 5e-4));
        assert!(close(eta_from_waveplate(22.5_f64).unwrap(), 0.0, 1e-15));
        assert!(eta_from_waveplate(23.0_f64).is_err());
        assert!(eta_from_waveplate(-1.0_f64).is_err());
    }
}
