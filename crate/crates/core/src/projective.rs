//! Numerical bound on `W_AC` when Bob only mixes projective measurements
//! with doing nothing.
//!
//! For input `y` Bob measures sharply along `n̂_y` with probability `q_y` and
//! otherwise passes the qubit on untouched with a random outcome. His
//! effective observables are `B_y = q_y n̂_y·σ`; the averaged channel acts on
//! Bloch vectors as
//!
//! ```text
//! M = (1 - (q0 + q1)/2)·I + (q0/2) n̂0 n̂0ᵀ + (q1/2) n̂1 n̂1ᵀ
//! ```
//!
//! Alice sends `±r0`, `±r1` along `B0 ± B1`, which maximizes `W_AB`, and
//! Charlie measures along `M r0 ± M r1`:
//!
//! ```text
//! W_AB = 1/2 + (|B0 + B1| + |B0 - B1|)/8
//! W_AC = 1/2 + (|M r0 + M r1| + |M r0 - M r1|)/8
//! ```
//!
//! Everything lives in the plane of `n̂0, n̂1`. Writing `q0 = t·s`, `q1 = t`
//! with `s ∈ [0, 1]` and the overlap `c = n̂0·n̂1 ∈ [0, 1]` (other signs and
//! orderings are symmetric), the directions `r0, r1` do not depend on `t`
//! and `W_AC` is convex in `t`. Its maximum over the feasible range
//! `t ∈ [t_w, 1]` is therefore at one of the two ends, with `t_w` fixed by
//! `W_AB = w`. The remaining search over `(s, c)` is a grid followed by a
//! compass search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certification::{max_quantum_witness, optimal_tradeoff};
use crate::error::{Error, Result};
use crate::scalar::tolerance;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectiveOptions {
    /// Grid spacing in `s` and `c`.
    pub resolution: f64,
    /// Compass search stops below this step.
    pub refine_tol: f64,
}

impl Default for ProjectiveOptions {
    fn default() -> Self {
        Self {
            resolution: 1e-3,
            refine_tol: 1e-12,
        }
    }
}

/// Maximizing strategy found by the search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveOptimum {
    pub w_ab: f64,
    pub w_ac: f64,
    pub q0: f64,
    pub q1: f64,
    /// `n̂0·n̂1`
    pub overlap: f64,
}

type V2 = [f64; 2];

fn norm(v: V2) -> f64 {
    v[0].hypot(v[1])
}

fn add(a: V2, b: V2) -> V2 {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: V2, b: V2) -> V2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn scale(a: V2, k: f64) -> V2 {
    [a[0] * k, a[1] * k]
}

fn unit_or(v: V2, fallback: V2) -> V2 {
    let n = norm(v);
    if n > 1e-300 {
        scale(v, 1.0 / n)
    } else {
        fallback
    }
}

fn perp(v: V2) -> V2 {
    [-v[1], v[0]]
}

/// Bloch directions `n̂0 = x̂`, `n̂1` at overlap `c`.
fn directions(c: f64) -> (V2, V2) {
    ([1.0, 0.0], [c, (1.0 - c * c).max(0.0).sqrt()])
}

/// `h = |s n̂0 + n̂1| + |s n̂0 - n̂1|`, so that `W_AB = 1/2 + t·h/8`.
fn effect_sum(s: f64, c: f64) -> f64 {
    ((s * s + 1.0 + 2.0 * s * c).max(0.0)).sqrt() + ((s * s + 1.0 - 2.0 * s * c).max(0.0)).sqrt()
}

/// `W_AC` for the strategy `(q0, q1) = (t·s, t)` at overlap `c`.
fn charlie_witness(s: f64, c: f64, t: f64) -> f64 {
    let (n0, n1) = directions(c);
    let plus = add(scale(n0, s), n1);
    let minus = sub(scale(n0, s), n1);
    let r0 = unit_or(plus, unit_or(minus, [1.0, 0.0]));
    let r1 = unit_or(minus, perp(r0));
    let (q0, q1) = (t * s, t);
    let keep = 1.0 - 0.5 * (q0 + q1);
    let m = |r: V2| {
        add(
            scale(r, keep),
            add(scale(n0, 0.5 * q0 * (n0[0] * r[0] + n0[1] * r[1])), scale(n1, 0.5 * q1 * (n1[0] * r[0] + n1[1] * r[1]))),
        )
    };
    let (m0, m1) = (m(r0), m(r1));
    0.5 + (norm(add(m0, m1)) + norm(sub(m0, m1))) / 8.0
}

/// Best `(W_AC, t)` at fixed `(s, c)` subject to `W_AB ≥ w`; `None` when infeasible.
fn best_at(w: f64, s: f64, c: f64) -> Option<(f64, f64)> {
    let h = effect_sum(s, c);
    let need = 8.0 * (w - 0.5);
    if need <= 0.0 {
        let lo = charlie_witness(s, c, 0.0);
        let hi = charlie_witness(s, c, 1.0);
        return Some(if lo >= hi { (lo, 0.0) } else { (hi, 1.0) });
    }
    if h <= 0.0 {
        return None;
    }
    let t_w = need / h;
    if t_w > 1.0 + tolerance::RADICAND {
        return None;
    }
    let t_w = t_w.min(1.0);
    let at_w = charlie_witness(s, c, t_w);
    let at_one = charlie_witness(s, c, 1.0);
    Some(if at_w >= at_one { (at_w, t_w) } else { (at_one, 1.0) })
}

fn optimum(w: f64, s: f64, c: f64, value: f64, t: f64) -> ProjectiveOptimum {
    ProjectiveOptimum {
        w_ab: w,
        w_ac: value,
        q0: t * s,
        q1: t,
        overlap: c,
    }
}

/// Largest `W_AC` reachable by projective-or-nothing strategies with `W_AB ≥ w_ab`.
pub fn projective_bound(w_ab: f64) -> Result<f64> {
    Ok(projective_optimum(w_ab, &ProjectiveOptions::default())?.w_ac)
}

pub fn projective_optimum(w_ab: f64, opts: &ProjectiveOptions) -> Result<ProjectiveOptimum> {
    let top = max_quantum_witness::<f64>();
    if !(w_ab >= 0.5 - tolerance::RADICAND && w_ab <= top + tolerance::RADICAND) {
        return Err(Error::OutOfRange {
            name: "w_ab",
            value: w_ab,
            min: 0.5,
            max: top,
        });
    }
    if !(opts.resolution > 0.0 && opts.resolution <= 0.5) {
        return Err(Error::Config(format!("grid resolution {} not in (0, 0.5]", opts.resolution)));
    }
    let w = w_ab.clamp(0.5, top);
    let n = (1.0 / opts.resolution).ceil() as usize;
    let node = |i: usize| if i == n { 1.0 } else { i as f64 / n as f64 };

    // rows are reduced in order, so ties resolve to the lowest index
    let grid_best = (0..=n)
        .into_par_iter()
        .map(|i| {
            let s = node(i);
            let mut best: Option<(f64, usize, usize)> = None;
            for j in 0..=n {
                if let Some((v, _)) = best_at(w, s, node(j)) {
                    if best.is_none_or(|b| v > b.0) {
                        best = Some((v, i, j));
                    }
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<(f64, usize, usize)>, |acc, b| match acc {
            Some(a) if a.0 >= b.0 => Some(a),
            _ => Some(b),
        });

    // s = 1, c = 0 is feasible for every w in the domain
    let (_, i, j) = grid_best.expect("orthogonal sharp strategy is always feasible");
    let (mut s, mut c) = (node(i), node(j));
    let (mut value, mut t) = best_at(w, s, c).expect("grid point is feasible");

    let mut step = opts.resolution;
    while step >= opts.refine_tol {
        let mut moved = false;
        for (ds, dc) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (s2, c2) = ((s + ds).clamp(0.0, 1.0), (c + dc).clamp(0.0, 1.0));
            if let Some((v, t2)) = best_at(w, s2, c2) {
                if v > value {
                    (s, c, value, t) = (s2, c2, v, t2);
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok(optimum(w, s, c, value, t))
}

/// Points `(w_ab, optimal_tradeoff, projective_bound)` on an even grid of the domain.
pub fn boundary_curves(points: usize, opts: &ProjectiveOptions) -> Result<Vec<[f64; 3]>> {
    if points < 2 {
        return Err(Error::Config("boundary curve needs at least 2 points".into()));
    }
    let top = max_quantum_witness::<f64>();
    (0..points)
        .map(|k| {
            let w = if k == points - 1 {
                top
            } else {
                0.5 + (top - 0.5) * k as f64 / (points - 1) as f64
            };
            Ok([w, optimal_tradeoff(w)?, projective_optimum(w, opts)?.w_ac])
        })
        .collect()
}
