//! Exact 2×2 complex linear algebra and the Bloch-sphere correspondence.
//!
//! Every Hermitian operator on a qubit decomposes as `a·𝟙 + v·σ`. The
//! spectral data used throughout the crate (eigenvalues, square roots,
//! fidelities) is computed in closed form from that decomposition.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{tolerance, Real};

/// 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Operator2<T> {
    m: [[Complex<T>; 2]; 2],
}

impl<T: Real> Operator2<T> {
    pub fn new(entries: [[Complex<T>; 2]; 2]) -> Self {
        Self { m: entries }
    }

    pub fn from_real(entries: [[T; 2]; 2]) -> Self {
        let c = |x: T| Complex::new(x, T::zero());
        Self::new([
            [c(entries[0][0]), c(entries[0][1])],
            [c(entries[1][0]), c(entries[1][1])],
        ])
    }

    pub fn zero() -> Self {
        Self::from_real([[T::zero(); 2]; 2])
    }

    pub fn identity() -> Self {
        Self::from_real([[T::one(), T::zero()], [T::zero(), T::one()]])
    }

    pub fn pauli_x() -> Self {
        Self::from_real([[T::zero(), T::one()], [T::one(), T::zero()]])
    }

    pub fn pauli_y() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        Self::new([[z, -i], [i, z]])
    }

    pub fn pauli_z() -> Self {
        Self::from_real([[T::one(), T::zero()], [T::zero(), -T::one()]])
    }

    /// `scalar·𝟙 + v·σ`.
    pub fn from_pauli(scalar: T, v: BlochVector<T>) -> Self {
        let re = |x: T| Complex::new(x, T::zero());
        Self::new([
            [re(scalar + v.z), Complex::new(v.x, -v.y)],
            [Complex::new(v.x, v.y), re(scalar - v.z)],
        ])
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.m[row][col]
    }

    pub fn entries(&self) -> [[Complex<T>; 2]; 2] {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        let m = &self.m;
        Self::new([[f(m[0][0]), f(m[0][1])], [f(m[1][0]), f(m[1][1])]])
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_deviation(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Real Pauli coefficients `(a, v)` of the Hermitian part, so that
    /// `self ≈ a·𝟙 + v·σ`.
    pub fn pauli_components(&self) -> (T, BlochVector<T>) {
        let m = &self.m;
        let half = T::half();
        let a = (m[0][0].re + m[1][1].re) * half;
        let x = (m[0][1].re + m[1][0].re) * half;
        let y = (m[1][0].im - m[0][1].im) * half;
        let z = (m[0][0].re - m[1][1].re) * half;
        (a, BlochVector::new(x, y, z))
    }

    /// Eigenvalues of the Hermitian part in ascending order.
    ///
    /// Closed form `tr/2 ± sqrt((tr/2)^2 - det)`, with the discriminant
    /// evaluated as `((m00 - m11)/2)^2 + |m01|^2` so it is never negative.
    pub fn eigenvalues(&self) -> [T; 2] {
        let (a, v) = self.pauli_components();
        let r = v.norm();
        [a - r, a + r]
    }

    /// Spectral decomposition of the Hermitian part: ascending eigenvalues
    /// with their rank-1 projectors. Degenerate spectra return `𝟙/2` twice.
    pub fn spectral(&self) -> ([T; 2], [Self; 2]) {
        let (a, v) = self.pauli_components();
        let r = v.norm();
        let half = T::half();
        let dir = if r > T::epsilon() {
            v.scale(T::one() / r)
        } else {
            BlochVector::zero()
        };
        let lower = Self::from_pauli(half, dir.scale(-half));
        let upper = Self::from_pauli(half, dir.scale(half));
        ([a - r, a + r], [lower, upper])
    }

    pub fn is_psd(&self, tol: T) -> bool {
        self.eigenvalues()[0] >= -tol
    }

    /// Validates Hermiticity and positivity at the crate tolerances.
    pub fn check_positive(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > T::tol(tolerance::HERMITIAN) {
            return Err(Error::NotHermitian {
                deviation: dev.as_f64(),
            });
        }
        let min = self.eigenvalues()[0];
        if min < -T::tol(tolerance::PSD) {
            return Err(Error::NotPositive {
                min_eigenvalue: min.as_f64(),
            });
        }
        Ok(())
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        let (a, b) = (&self.m, &other.m);
        a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1]
    }

    /// `self · rho · self†`.
    pub fn conjugate(&self, rho: &Self) -> Self {
        *self * *rho * self.adjoint()
    }
}

impl<T: Real> Add for Operator2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (self.m, rhs.m);
        Self::new([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl<T: Real> Sub for Operator2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Real> Neg for Operator2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|z| -z)
    }
}

impl<T: Real> Mul for Operator2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.m, rhs.m);
        let cell = |r: usize, c: usize| a[r][0] * b[0][c] + a[r][1] * b[1][c];
        Self::new([[cell(0, 0), cell(0, 1)], [cell(1, 0), cell(1, 1)]])
    }
}

/// Principal square root of a Hermitian positive semidefinite operator.
///
/// Eigenvalues in `[-1e-9, 0)` are treated as zero.
pub fn psd_sqrt<T: Real>(op: &Operator2<T>) -> Result<Operator2<T>> {
    op.check_positive()?;
    let (a, v) = op.pauli_components();
    let r = v.norm();
    let lo = (a - r).sqrt_clamped();
    let hi = (a + r).sqrt_clamped();
    let half = T::half();
    if r <= T::epsilon() {
        return Ok(Operator2::identity().scale(a.sqrt_clamped()));
    }
    // sqrt = hi·P₊ + lo·P₋ with P± = (𝟙 ± v̂·σ)/2
    Ok(Operator2::from_pauli(
        (hi + lo) * half,
        v.scale((hi - lo) * half / r),
    ))
}

/// Real 3-vector on or inside the Bloch sphere.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlochVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> BlochVector<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit_x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn unit_y() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sqr(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero()).then(|| self.scale(T::one() / n))
    }

    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    /// Validates `|v| <= 1`, clamping norms in `(1, 1 + 1e-9]` onto the sphere.
    pub fn clamp_to_ball(self) -> Result<Self> {
        let n = self.norm();
        if n.is_nan() || n > T::one() + T::tol(tolerance::BLOCH_NORM) {
            return Err(Error::BlochOutOfBall(n.as_f64()));
        }
        Ok(if n > T::one() {
            self.scale(T::one() / n)
        } else {
            self
        })
    }

    /// `v·σ`.
    pub fn to_operator(self) -> Operator2<T> {
        Operator2::from_pauli(T::zero(), self)
    }
}

impl<T: Real> Add for BlochVector<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for BlochVector<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for BlochVector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

/// Qubit density operator: unit trace, Hermitian, positive semidefinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState<T> {
    op: Operator2<T>,
}

impl<T: Real> QubitState<T> {
    /// Validates and wraps a density operator.
    pub fn from_operator(op: Operator2<T>) -> Result<Self> {
        let tr = op.trace();
        let tol = T::tol(tolerance::TRACE);
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidTrace(tr.re.as_f64()));
        }
        op.check_positive()?;
        Ok(Self { op })
    }

    /// Renormalizes an unnormalized positive operator (e.g. `K ρ K†`).
    /// Returns `None` when its trace vanishes.
    pub fn from_unnormalized(op: Operator2<T>) -> Option<Self> {
        let tr = op.trace().re;
        if tr <= T::epsilon() {
            return None;
        }
        Self::from_operator(op.scale(T::one() / tr)).ok()
    }

    pub fn maximally_mixed() -> Self {
        Self {
            op: Operator2::identity().scale(T::half()),
        }
    }

    pub fn operator(&self) -> &Operator2<T> {
        &self.op
    }

    /// Bloch vector `v` with `ρ = (𝟙 + v·σ)/2`.
    pub fn bloch(&self) -> BlochVector<T> {
        self.op.pauli_components().1.scale(T::two())
    }

    /// `Tr(ρ²) = (1 + |v|²)/2`.
    pub fn purity(&self) -> T {
        self.op.trace_product(&self.op).re
    }

    /// Depolarized copy `vρ + (1 - v)𝟙/2`.
    pub fn depolarize(&self, visibility: T) -> Self {
        let mixed = Operator2::identity().scale(T::half() * (T::one() - visibility));
        Self {
            op: self.op.scale(visibility) + mixed,
        }
    }
}

/// `ρ = (𝟙 + v·σ)/2`.
pub fn bloch_to_state<T: Real>(v: BlochVector<T>) -> Result<QubitState<T>> {
    let v = v.clamp_to_ball()?;
    Ok(QubitState {
        op: Operator2::from_pauli(T::half(), v.scale(T::half())),
    })
}

/// Fidelity `Tr(ab) + 2·sqrt(det a · det b)` (squared-Uhlmann convention).
pub fn fidelity<T: Real>(a: &QubitState<T>, b: &QubitState<T>) -> T {
    let overlap = a.op.trace_product(&b.op).re;
    let dets = a.op.det().re.max(T::zero()) * b.op.det().re.max(T::zero());
    (overlap + T::two() * dets.sqrt()).max(T::zero()).min(T::one())
}

/// Dichotomic observable `B = α𝟙 + n·σ` with `|α| <= 1 - |n|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable<T> {
    pub bias: T,
    pub bloch: BlochVector<T>,
}

impl<T: Real> Observable<T> {
    pub fn new(bias: T, bloch: BlochVector<T>) -> Result<Self> {
        let bloch = bloch.clamp_to_ball()?;
        let limit = T::one() - bloch.norm();
        if bias.is_nan() || bias.abs() > limit + T::tol(tolerance::POVM) {
            return Err(Error::InvalidObservable {
                bias: bias.as_f64(),
                limit: limit.as_f64(),
            });
        }
        Ok(Self { bias, bloch })
    }

    /// Unbiased observable `η·n̂·σ`.
    pub fn unbiased(eta: T, direction: BlochVector<T>) -> Result<Self> {
        let dir = direction
            .normalized()
            .ok_or_else(|| Error::Config("observable direction must be non-zero".into()))?;
        Self::new(T::zero(), dir.scale(eta))
    }

    pub fn sharpness(&self) -> T {
        self.bloch.norm()
    }

    pub fn operator(&self) -> Operator2<T> {
        Operator2::from_pauli(self.bias, self.bloch)
    }

    /// POVM element `(𝟙 + (-1)^outcome B)/2`.
    pub fn effect(&self, outcome: usize) -> Operator2<T> {
        let sign = if outcome == 0 { T::one() } else { -T::one() };
        Operator2::from_pauli(
            T::half() * (T::one() + sign * self.bias),
            self.bloch.scale(sign * T::half()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op_close(a: &Operator2<f64>, b: &Operator2<f64>, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn bloch_origin_is_maximally_mixed() {
        let s = bloch_to_state(BlochVector::<f64>::zero()).unwrap();
        assert!(op_close(s.operator(), &Operator2::identity().scale(0.5), 0.0));
    }

    #[test]
    fn bloch_north_pole_is_ket_zero() {
        let s = bloch_to_state(BlochVector::<f64>::unit_z()).unwrap();
        let expected = Operator2::from_real([[1.0, 0.0], [0.0, 0.0]]);
        assert!(op_close(s.operator(), &expected, 0.0));
    }

    #[test]
    fn diagonal_unit_bloch_vector_gives_rank_one_projector() {
        let c = 1.0 / 3.0_f64.sqrt();
        let s = bloch_to_state(BlochVector::new(c, c, c)).unwrap();
        // eigenvalues from the characteristic polynomial λ² - tr·λ + det
        let tr = s.operator().trace().re;
        let det = s.operator().det().re;
        let disc = (tr * tr - 4.0 * det).sqrt();
        assert!(((tr + disc) / 2.0 - 1.0).abs() < 1e-12);
        assert!(((tr - disc) / 2.0).abs() < 1e-12);
        assert!((s.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bloch_norm_slightly_above_one_is_clamped() {
        let v = BlochVector::<f64>::new(0.0, 0.0, 1.0 + 5e-10);
        let s = bloch_to_state(v).unwrap();
        assert!((s.bloch().norm() - 1.0).abs() < 1e-15);
        assert!(matches!(
            bloch_to_state(BlochVector::new(0.0, 0.0, 1.0 + 1e-6)),
            Err(Error::BlochOutOfBall(_))
        ));
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let id = Operator2::<f64>::identity();
        assert!(op_close(&psd_sqrt(&id).unwrap(), &id, 1e-15));
        let d = Operator2::from_real([[4.0, 0.0], [0.0, 1.0]]);
        let expected = Operator2::from_real([[2.0, 0.0], [0.0, 1.0]]);
        assert!(op_close(&psd_sqrt(&d).unwrap(), &expected, 1e-14));
    }

    #[test]
    fn sqrt_of_unsharp_effect_matches_kraus_closed_form() {
        let eta = 0.6;
        let effect = (Operator2::identity() + Operator2::pauli_z().scale(eta)).scale(0.5);
        let root = psd_sqrt(&effect).unwrap();
        let p_plus = Operator2::from_real([[1.0, 0.0], [0.0, 0.0]]);
        let p_minus = Operator2::from_real([[0.0, 0.0], [0.0, 1.0]]);
        let expected = p_plus.scale(0.8_f64.sqrt()) + p_minus.scale(0.2_f64.sqrt());
        assert!(op_close(&root, &expected, 1e-14));
    }

    #[test]
    fn sqrt_rejects_negative_operator() {
        let op = Operator2::from_real([[1.0, 0.0], [0.0, -1e-3]]);
        assert!(matches!(psd_sqrt(&op), Err(Error::NotPositive { .. })));
        let tiny = Operator2::from_real([[1.0, 0.0], [0.0, -1e-10]]);
        assert!(psd_sqrt(&tiny).is_ok());
    }

    #[test]
    fn sqrt_rejects_non_hermitian() {
        let op = Operator2::from_real([[1.0, 0.5], [0.0, 1.0]]);
        assert!(matches!(psd_sqrt(&op), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn fidelity_examples() {
        let zero = bloch_to_state(BlochVector::<f64>::unit_z()).unwrap();
        let one = bloch_to_state(-BlochVector::<f64>::unit_z()).unwrap();
        let mixed = QubitState::maximally_mixed();
        assert!((fidelity(&zero, &zero) - 1.0).abs() < 1e-15);
        assert!(fidelity(&zero, &one).abs() < 1e-15);
        // Tr = 1/2, det(|0><0|) = 0
        assert!((fidelity(&zero, &mixed) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spectral_projectors_reconstruct_operator() {
        let op = Operator2::from_pauli(0.3, BlochVector::new(0.1, -0.2, 0.05));
        let (vals, projs) = op.spectral();
        let rebuilt = projs[0].scale(vals[0]) + projs[1].scale(vals[1]);
        assert!(op_close(&rebuilt, &op, 1e-15));
    }

    #[test]
    fn observable_rejects_excess_bias() {
        let n = BlochVector::new(0.0, 0.0, 0.7);
        assert!(Observable::new(0.3, n).is_ok());
        assert!(matches!(
            Observable::new(0.31, n),
            Err(Error::InvalidObservable { .. })
        ));
    }

    #[test]
    fn observable_effects_sum_to_identity() {
        let obs = Observable::new(0.1, BlochVector::new(0.3, 0.2, -0.4)).unwrap();
        let sum = obs.effect(0) + obs.effect(1);
        assert!(op_close(&sum, &Operator2::identity(), 1e-15));
        assert!(obs.effect(0).is_psd(1e-12) && obs.effect(1).is_psd(1e-12));
        let diff = obs.effect(0) - obs.effect(1);
        assert!(op_close(&diff, &obs.operator(), 1e-15));
    }

    #[test]
    fn single_precision_instantiation() {
        let s = bloch_to_state(BlochVector::<f32>::new(0.6, 0.0, 0.8)).unwrap();
        assert!((s.purity() - 1.0).abs() < 1e-5);
        let root = psd_sqrt(s.operator()).unwrap();
        assert!((root * root).max_abs_diff(s.operator()) < 1e-5);
    }
}
