//! Exact statistics of the three-party sequential protocol.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{check_range, Error, Result};
use crate::qubit::{BlochVector, Observable, Operator2, QubitState};
use crate::scalar::Real;
use crate::strategies::{
    bob_instrument, charlie_measurements, optimal_preparations, Instrument, MeasurementSet,
    PreparationSet,
};

/// One cell `(x0, x1, y, z, b, c)` of the conditional distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub x0: usize,
    pub x1: usize,
    pub y: usize,
    pub z: usize,
    pub b: usize,
    pub c: usize,
}

impl Event {
    pub const COUNT: usize = 64;

    pub fn new(x0: usize, x1: usize, y: usize, z: usize, b: usize, c: usize) -> Self {
        Self { x0, x1, y, z, b, c }
    }

    /// Bit-packed index `x0 x1 y z b c`, most significant first.
    pub fn index(&self) -> usize {
        (((((self.x0 * 2 + self.x1) * 2 + self.y) * 2 + self.z) * 2 + self.b) * 2) + self.c
    }

    pub fn from_index(i: usize) -> Self {
        assert!(i < Self::COUNT, "event index out of range");
        let bit = |k: usize| (i >> k) & 1;
        Self::new(bit(5), bit(4), bit(3), bit(2), bit(1), bit(0))
    }

    pub fn all() -> impl Iterator<Item = Event> {
        (0..Self::COUNT).map(Self::from_index)
    }

    /// The bit Bob is asked for, `x_y`.
    pub fn bob_target(&self) -> usize {
        if self.y == 0 {
            self.x0
        } else {
            self.x1
        }
    }

    /// The bit Charlie is asked for, `x_z`.
    pub fn charlie_target(&self) -> usize {
        if self.z == 0 {
            self.x0
        } else {
            self.x1
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.x0, self.x1, self.y, self.z, self.b, self.c
        )
    }
}

impl FromStr for Event {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<usize> = s
            .split(',')
            .map(|t| match t.trim() {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(Error::Parse(format!("bad bit {other:?} in key {s:?}"))),
            })
            .collect::<Result<_>>()?;
        match bits[..] {
            [x0, x1, y, z, b, c] => Ok(Self::new(x0, x1, y, z, b, c)),
            _ => Err(Error::Parse(format!("expected six bits in key {s:?}"))),
        }
    }
}

/// Full protocol: Alice's preparations, Bob's instrument, Charlie's
/// measurements and a preparation visibility `v ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct ProtocolSpec<T> {
    pub preparations: PreparationSet<T>,
    pub instrument: Instrument<T>,
    pub measurements: MeasurementSet<T>,
    visibility: T,
}

impl<T: Real> ProtocolSpec<T> {
    pub fn new(
        preparations: PreparationSet<T>,
        instrument: Instrument<T>,
        measurements: MeasurementSet<T>,
        visibility: T,
    ) -> Result<Self> {
        check_range("visibility", visibility.as_f64(), 0.0, 1.0)?;
        Ok(Self {
            preparations,
            instrument,
            measurements,
            visibility,
        })
    }

    /// The optimal strategy at sharpness `eta`.
    pub fn optimal(eta: T, visibility: T) -> Result<Self> {
        Self::new(
            optimal_preparations(),
            bob_instrument(eta, None)?,
            charlie_measurements(),
            visibility,
        )
    }

    /// Classical strategy: Alice sends `|x0⟩`; Bob and Charlie both measure `σz`.
    pub fn classical() -> Self {
        let z = BlochVector::unit_z();
        let prep = PreparationSet::from_bloch([z, z, -z, -z]).expect("basis states");
        let sharp_z = Observable::new(T::zero(), z).expect("sharp observable");
        Self {
            preparations: prep,
            instrument: Instrument::luders([sharp_z, sharp_z]).expect("projective instrument"),
            measurements: MeasurementSet::from_observables([sharp_z, sharp_z]),
            visibility: T::one(),
        }
    }

    pub fn visibility(&self) -> T {
        self.visibility
    }

    /// Preparation after depolarizing noise `vρ + (1-v)𝟙/2`.
    pub fn degraded_state(&self, x0: usize, x1: usize) -> QubitState<T> {
        self.preparations.state(x0, x1).depolarize(self.visibility)
    }
}

/// Conditional distribution `p(b, c | x0 x1, y, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution<T> {
    p: [T; Event::COUNT],
}

impl<T: Real> JointDistribution<T> {
    pub fn from_fn(mut f: impl FnMut(Event) -> T) -> Self {
        let mut p = [T::zero(); Event::COUNT];
        for e in Event::all() {
            p[e.index()] = f(e);
        }
        Self { p }
    }

    /// Uniformly random outputs for every setting.
    pub fn uniform() -> Self {
        Self::from_fn(|_| T::lit(0.25))
    }

    pub fn get(&self, e: Event) -> T {
        self.p[e.index()]
    }

    pub fn probabilities(&self) -> &[T; Event::COUNT] {
        &self.p
    }

    /// `Σ_c p(b, c | x, y, z)`.
    pub fn bob_marginal(&self, x0: usize, x1: usize, y: usize, z: usize, b: usize) -> T {
        (0..2).fold(T::zero(), |acc, c| acc + self.get(Event::new(x0, x1, y, z, b, c)))
    }

    /// `Σ_b p(b, c | x, y, z)`.
    pub fn charlie_marginal(&self, x0: usize, x1: usize, y: usize, z: usize, c: usize) -> T {
        (0..2).fold(T::zero(), |acc, b| acc + self.get(Event::new(x0, x1, y, z, b, c)))
    }

    /// Largest deviation of any setting's total probability from one.
    pub fn normalization_error(&self) -> T {
        let mut worst = T::zero();
        for setting in 0..16 {
            let total = (0..4).fold(T::zero(), |acc, k| acc + self.p[setting * 4 + k]);
            worst = worst.max((total - T::one()).abs());
        }
        worst
    }
}

impl JointDistribution<f64> {
    /// JSON object keyed by `"x0,x1,y,z,b,c"`.
    pub fn to_json(&self) -> serde_json::Value {
        let map: BTreeMap<String, f64> = Event::all().map(|e| (e.to_string(), self.get(e))).collect();
        serde_json::to_value(map).expect("string-keyed map serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let map: BTreeMap<String, f64> = serde_json::from_value(value.clone())?;
        let mut p = [f64::NAN; Event::COUNT];
        for (key, prob) in map {
            p[key.parse::<Event>()?.index()] = prob;
        }
        if let Some(i) = p.iter().position(|x| x.is_nan()) {
            return Err(Error::Parse(format!("missing key {}", Event::from_index(i))));
        }
        Ok(Self { p })
    }
}

/// `p(b, c | x, y, z) = Tr(C_{c|z} K_{b|y} ρ̃_x K_{b|y}†)` with `ρ̃_x` the
/// visibility-degraded preparation.
pub fn exact_distribution<T: Real>(spec: &ProtocolSpec<T>) -> JointDistribution<T> {
    let mut post = [[[Operator2::zero(); 2]; 2]; 4];
    for x0 in 0..2 {
        for x1 in 0..2 {
            let rho = spec.degraded_state(x0, x1);
            for y in 0..2 {
                for b in 0..2 {
                    post[2 * x0 + x1][y][b] = spec.instrument.kraus(y, b).conjugate(rho.operator());
                }
            }
        }
    }
    JointDistribution::from_fn(|e| {
        let out = &post[2 * e.x0 + e.x1][e.y][e.b];
        spec.measurements.effect(e.z, e.c).trace_product(out).re
    })
}

/// Charlie's input averaged over Bob's inputs and outcomes,
/// `ρ̄_x = ½ Σ_{y,b} K_{b|y} ρ̃_x K_{b|y}†`.
pub fn average_post_measurement_state<T: Real>(
    spec: &ProtocolSpec<T>,
    x0: usize,
    x1: usize,
) -> QubitState<T> {
    let rho = spec.degraded_state(x0, x1);
    let mut sum = Operator2::zero();
    for y in 0..2 {
        for b in 0..2 {
            sum = sum + spec.instrument.kraus(y, b).conjugate(rho.operator());
        }
    }
    QubitState::from_operator(sum.scale(T::half()))
        .expect("average of channel outputs is a state")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_index_round_trip() {
        for i in 0..Event::COUNT {
            assert_eq!(Event::from_index(i).index(), i);
        }
        let e: Event = "1,0,1,1,0,1".parse().unwrap();
        assert_eq!(e, Event::new(1, 0, 1, 1, 0, 1));
        assert!("1,0,1".parse::<Event>().is_err());
        assert!("1,0,1,1,0,2".parse::<Event>().is_err());
    }

    #[test]
    fn non_interactive_bob_halves_charlie_statistics() {
        let spec = ProtocolSpec::<f64>::optimal(0.0, 1.0).unwrap();
        let d = exact_distribution(&spec);
        for e in Event::all() {
            let rho = spec.preparations.state(e.x0, e.x1);
            let expected = 0.5 * spec.measurements.effect(e.z, e.c).trace_product(rho.operator()).re;
            assert!((d.get(e) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn bob_marginal_matches_effect_statistics() {
        let spec = ProtocolSpec::<f64>::optimal(0.7, 0.93).unwrap();
        let d = exact_distribution(&spec);
        for e in Event::all().filter(|e| e.c == 0) {
            let rho = spec.degraded_state(e.x0, e.x1);
            let effect = spec.instrument.observable(e.y).effect(e.b);
            let expected = effect.trace_product(rho.operator()).re;
            assert!((d.bob_marginal(e.x0, e.x1, e.y, e.z, e.b) - expected).abs() < 1e-12);
        }
        assert!(d.normalization_error() < 1e-12);
    }

    #[test]
    fn average_state_shrinks_as_closed_form_predicts() {
        // a = (1,0,1)/√2 with orthogonal Bob axes: |m| = (1 + sqrt(1-η²))/2
        for (eta, expected) in [(1.0, 0.5), (0.6, 0.9), (0.0, 1.0)] {
            let spec = ProtocolSpec::<f64>::optimal(eta, 1.0).unwrap();
            let m = average_post_measurement_state(&spec, 0, 0).bloch();
            assert!((m.norm() - expected).abs() < 1e-12, "eta {eta}");
        }
    }

    #[test]
    fn average_state_is_identity_channel_without_interaction() {
        let spec = ProtocolSpec::<f64>::optimal(0.0, 1.0).unwrap();
        for x in 0..4 {
            let (x0, x1) = (x / 2, x % 2);
            let avg = average_post_measurement_state(&spec, x0, x1);
            let rho = spec.preparations.state(x0, x1);
            assert!(avg.operator().max_abs_diff(rho.operator()) < 1e-15);
        }
    }

    #[test]
    fn distribution_json_round_trip() {
        let d = exact_distribution(&ProtocolSpec::<f64>::optimal(0.5, 0.98).unwrap());
        let back = JointDistribution::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn rejects_visibility_out_of_range() {
        assert!(ProtocolSpec::<f64>::optimal(0.5, 1.5).is_err());
    }

    #[test]
    fn single_precision_distribution_normalizes() {
        let spec = ProtocolSpec::<f32>::optimal(0.8, 0.98).unwrap();
        let d = exact_distribution(&spec);
        assert!(d.normalization_error() < 1e-5);
    }
}
