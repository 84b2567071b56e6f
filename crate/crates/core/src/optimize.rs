//! One-dimensional minimization: dense grid scan followed by golden-section
//! refinement of the best grid cell.

use crate::scalar::Real;

/// Minimum of `f` on `[a, b]` by golden-section search, stopping once the
/// bracket is narrower than `tol`. Returns `(x_min, f_min)`.
pub fn golden_section<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::half();
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // bracket shrinks by 0.618 per step; 200 steps covers any f64 interval
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Evaluates `f` on `points` equally spaced nodes of `[lo, hi]` (endpoints
/// included), then refines around the best node with golden-section search.
/// Returns the better of the grid and refined minima.
pub fn grid_golden_min<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, points: usize, tol: T) -> (T, T) {
    if hi <= lo || points < 2 {
        return (lo, f(lo));
    }
    let step = (hi - lo) / T::from_usize(points - 1).expect("grid size fits");
    let node = |i: usize| {
        if i == points - 1 {
            hi
        } else {
            lo + step * T::from_usize(i).expect("grid index fits")
        }
    };
    let mut best = (0usize, f(lo));
    for i in 1..points {
        let v = f(node(i));
        if v < best.1 {
            best = (i, v);
        }
    }
    let left = node(best.0.saturating_sub(1));
    let right = node((best.0 + 1).min(points - 1));
    let refined = golden_section(&f, left, right, tol);
    if refined.1 < best.1 {
        refined
    } else {
        (node(best.0), best.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_section(|x: f64| (x - 0.3).powi(2) - 1.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((fx + 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_handles_boundary_minimum() {
        let (x, fx) = grid_golden_min(|x: f64| x, 0.25, 0.75, 101, 1e-12);
        assert_eq!(x, 0.25);
        assert_eq!(fx, 0.25);
    }

    #[test]
    fn grid_escapes_local_minimum() {
        // local minimum near 0.1, global near 0.8
        let f = |x: f64| -(-(x - 0.1).powi(2) / 0.001).exp() - 2.0 * (-(x - 0.8).powi(2) / 0.001).exp();
        let (x, _) = grid_golden_min(f, 0.0, 1.0, 1000, 1e-12);
        assert!((x - 0.8).abs() < 1e-6);
    }

    #[test]
    fn degenerate_interval_evaluates_once() {
        let (x, fx) = grid_golden_min(|x: f64| 2.0 * x, 0.5, 0.5, 10_000, 1e-10);
        assert_eq!((x, fx), (0.5, 1.0));
    }
}
