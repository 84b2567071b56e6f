//! Detector tomography with four tetrahedron states, and how badly it can
//! fail when the states are only prepared up to an average infidelity `ε`.
//!
//! An unbiased observable `E = n·σ` gives `p_x = a_x·n` on the ideal states,
//! so `n = (3/4)Aᵀp`. With lab states `b_x` instead of `a_x` the same
//! inversion returns a wrong `n_est`. The worst case over all lab states
//! with `(1/4)Σ (1 + a_x·b_x)/2 ≥ 1 - ε` is found by multi-start projected
//! gradient descent. Feasible sets are convex (balls cut by a half-space)
//! and projected onto exactly; the objective is not convex, so the result is
//! an upper bound on the true minimum.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitBall};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::qubit::{bloch_to_state, BlochVector, Observable, QubitState};

type Bloch = BlochVector<f64>;
type Lab = [Bloch; 4];

/// Fewest random starts accepted by [`worst_case_fidelity`].
pub const MIN_STARTS: usize = 64;

/// Four preparation Bloch vectors `a_x` with `AᵀA = (4/3)𝟙`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TetrahedronDesign {
    rows: Lab,
}

impl Default for TetrahedronDesign {
    fn default() -> Self {
        let k = 1.0 / 3f64.sqrt();
        let row = |x: f64, y: f64, z: f64| Bloch::new(x * k, y * k, z * k);
        Self {
            rows: [
                row(1.0, 1.0, 1.0),
                row(1.0, -1.0, -1.0),
                row(-1.0, 1.0, -1.0),
                row(-1.0, -1.0, 1.0),
            ],
        }
    }
}

impl TetrahedronDesign {
    pub fn rows(&self) -> &Lab {
        &self.rows
    }

    /// `AᵀA`.
    pub fn gram(&self) -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        for a in &self.rows {
            let a = a.to_array();
            for (i, gi) in g.iter_mut().enumerate() {
                for (j, gij) in gi.iter_mut().enumerate() {
                    *gij += a[i] * a[j];
                }
            }
        }
        g
    }

    /// `p_x = b_x·n`: expectation of `n·σ` on states with Bloch vectors `b_x`.
    pub fn probabilities(states: &Lab, n: Bloch) -> [f64; 4] {
        states.map(|b| b.dot(n))
    }

    fn raw_estimate(&self, p: [f64; 4]) -> Bloch {
        self.rows
            .iter()
            .zip(p)
            .fold(Bloch::zero(), |acc, (a, px)| acc + a.scale(0.75 * px))
    }
}

/// Linear inversion `n = (3/4)Aᵀp`, rescaled onto the sphere when `|n| > 1`.
pub fn invert(design: &TetrahedronDesign, p: [f64; 4]) -> Bloch {
    let n = design.raw_estimate(p);
    let norm = n.norm();
    if norm > 1.0 {
        n.scale(1.0 / norm)
    } else {
        n
    }
}

/// Fidelity of the outcome-zero effects `(𝟙 + n·σ)/2` of two observables.
pub fn effect_fidelity(n_lab: Bloch, n_est: Bloch) -> f64 {
    let mixed = ((1.0 - n_lab.norm_sqr()).max(0.0) * (1.0 - n_est.norm_sqr()).max(0.0)).sqrt();
    (0.5 * (1.0 + n_lab.dot(n_est) + mixed)).clamp(0.0, 1.0)
}

/// Observable under test and the allowed average preparation infidelity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyScenario {
    pub e_lab: Observable<f64>,
    pub epsilon: f64,
}

impl TomographyScenario {
    pub fn new(e_lab: Observable<f64>, epsilon: f64) -> Result<Self> {
        check_range("epsilon", epsilon, 0.0, 1.0)?;
        if e_lab.bias.abs() > crate::scalar::tolerance::POVM {
            return Err(Error::InvalidObservable {
                bias: e_lab.bias,
                limit: 0.0,
            });
        }
        Ok(Self { e_lab, epsilon })
    }

    /// `E_lab = η σz`.
    pub fn along_z(eta_lab: f64, epsilon: f64) -> Result<Self> {
        check_range("eta_lab", eta_lab, 0.0, 1.0)?;
        Self::new(Observable::unbiased(eta_lab, Bloch::unit_z())?, epsilon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TomographyOptions {
    pub starts: usize,
    pub seed: u64,
    /// Stop once a step moves the states by less than this (max norm).
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for TomographyOptions {
    fn default() -> Self {
        Self {
            starts: MIN_STARTS,
            seed: 2020,
            tolerance: 1e-8,
            max_iterations: 20_000,
        }
    }
}

/// Worst tomography outcome found, with the lab states that produce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseResult {
    pub eta_lab: f64,
    pub epsilon: f64,
    pub f_min: f64,
    pub eta_est: f64,
    pub eta_error: f64,
    pub n_lab: Bloch,
    pub n_est: Bloch,
    /// Bloch vectors of the lab preparations.
    pub lab_bloch: Lab,
    pub average_fidelity: f64,
}

impl WorstCaseResult {
    pub fn lab_states(&self) -> Result<[QubitState<f64>; 4]> {
        let [a, b, c, d] = self.lab_bloch;
        Ok([bloch_to_state(a)?, bloch_to_state(b)?, bloch_to_state(c)?, bloch_to_state(d)?])
    }

    pub fn curve_point(&self) -> CurvePoint {
        CurvePoint {
            eta_lab: self.eta_lab,
            epsilon: self.epsilon,
            f_min: self.f_min,
            eta_est: self.eta_est,
            eta_error: self.eta_error,
        }
    }
}

/// One row of a sharpness-error curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub eta_lab: f64,
    pub epsilon: f64,
    pub f_min: f64,
    pub eta_est: f64,
    pub eta_error: f64,
}

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(reader: R) -> Result<Vec<CurvePoint>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Average of `(1 + a_x·b_x)/2`.
pub fn average_fidelity(design: &TetrahedronDesign, lab: &Lab) -> f64 {
    design
        .rows
        .iter()
        .zip(lab)
        .map(|(a, b)| 0.5 * (1.0 + a.dot(*b)))
        .sum::<f64>()
        / 4.0
}

struct Problem {
    design: TetrahedronDesign,
    n_lab: Bloch,
    /// `Σ a_x·b_x` must be at least this.
    threshold: f64,
}

fn ball(v: Bloch) -> Bloch {
    let n = v.norm();
    if n > 1.0 {
        v.scale(1.0 / n)
    } else {
        v
    }
}

impl Problem {
    fn new(design: TetrahedronDesign, s: &TomographyScenario) -> Self {
        Self {
            design,
            n_lab: s.e_lab.bloch,
            threshold: 4.0 - 8.0 * s.epsilon,
        }
    }

    fn estimate(&self, lab: &Lab) -> Bloch {
        invert(&self.design, TetrahedronDesign::probabilities(lab, self.n_lab))
    }

    fn objective(&self, lab: &Lab) -> f64 {
        effect_fidelity(self.n_lab, self.estimate(lab))
    }

    fn gradient(&self, lab: &Lab) -> Lab {
        let n = self.n_lab;
        let raw = self.design.raw_estimate(TetrahedronDesign::probabilities(lab, n));
        let r = raw.norm();
        let g_raw = if r <= 1.0 {
            let s_lab = (1.0 - n.norm_sqr()).max(0.0).sqrt();
            let s_est = (1.0 - r * r).max(1e-24).sqrt();
            (n - raw.scale(s_lab / s_est)).scale(0.5)
        } else {
            let u = raw.scale(1.0 / r);
            (n - u.scale(n.dot(u))).scale(0.5 / r)
        };
        self.design.rows.map(|a| n.scale(0.75 * a.dot(g_raw)))
    }

    fn constraint(&self, lab: &Lab) -> f64 {
        self.design.rows.iter().zip(lab).map(|(a, b)| a.dot(*b)).sum()
    }

    /// Euclidean projection onto `{|b_x| ≤ 1, Σ a_x·b_x ≥ threshold}`:
    /// `b_x = ball(y_x + λ a_x)` with the smallest feasible `λ ≥ 0`.
    fn project(&self, y: &Lab) -> Lab {
        let at = |lambda: f64| -> Lab {
            let mut out = *y;
            for (o, a) in out.iter_mut().zip(&self.design.rows) {
                *o = ball(*o + a.scale(lambda));
            }
            out
        };
        let base = at(0.0);
        if self.constraint(&base) >= self.threshold {
            return base;
        }
        let mut hi = 1.0;
        while self.constraint(&at(hi)) < self.threshold && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.constraint(&at(mid)) >= self.threshold {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        at(hi)
    }

    /// Projected gradient descent with Armijo backtracking from a feasible point.
    fn descend(&self, start: Lab, opts: &TomographyOptions) -> (f64, Lab) {
        let mut lab = self.project(&start);
        let mut f = self.objective(&lab);
        let mut step = 1.0;
        for _ in 0..opts.max_iterations {
            let g = self.gradient(&lab);
            let mut accepted = None;
            while step > 1e-16 {
                let mut trial = lab;
                for (t, gx) in trial.iter_mut().zip(&g) {
                    *t = *t - gx.scale(step);
                }
                let trial = self.project(&trial);
                let slope: f64 = g.iter().zip(trial.iter().zip(&lab)).map(|(gx, (t, b))| gx.dot(*t - *b)).sum();
                let f_trial = self.objective(&trial);
                if f_trial <= f + 1e-4 * slope {
                    accepted = Some((trial, f_trial));
                    break;
                }
                step *= 0.5;
            }
            let Some((next, f_next)) = accepted else { break };
            let moved = next
                .iter()
                .zip(&lab)
                .map(|(a, b)| (*a - *b).to_array().iter().fold(0.0f64, |m, v| m.max(v.abs())))
                .fold(0.0, f64::max);
            lab = next;
            f = f_next;
            if moved < opts.tolerance {
                break;
            }
            step = (step * 2.0).min(1e3);
        }
        (f, lab)
    }
}

fn random_start(rng: &mut ChaCha8Rng, design: &TetrahedronDesign) -> Lab {
    // half the starts are uniform in the ball, half are small kicks off the ideal states
    let near = rng.random_bool(0.5);
    let mut out = design.rows;
    for o in out.iter_mut() {
        let v: [f64; 3] = UnitBall.sample(rng);
        let v = Bloch::from_array(v);
        *o = if near { *o + v.scale(0.3) } else { v };
    }
    out
}

fn finish(problem: &Problem, s: &TomographyScenario, f: f64, lab: Lab) -> WorstCaseResult {
    let n_est = problem.estimate(&lab);
    let eta_lab = s.e_lab.sharpness();
    let eta_est = n_est.norm();
    WorstCaseResult {
        eta_lab,
        epsilon: s.epsilon,
        f_min: f,
        eta_est,
        eta_error: (eta_est - eta_lab).abs(),
        n_lab: s.e_lab.bloch,
        n_est,
        lab_bloch: lab,
        average_fidelity: average_fidelity(&problem.design, &lab),
    }
}

/// Smallest effect fidelity between lab and estimated observable over all
/// lab states within average infidelity `ε` of the tetrahedron.
pub fn worst_case_fidelity(s: &TomographyScenario, opts: &TomographyOptions) -> Result<WorstCaseResult> {
    worst_case_fidelity_from(s, opts, &[])
}

/// As [`worst_case_fidelity`], also descending from each of `warm` (for
/// example minimizers at nearby parameters) after projecting it.
pub fn worst_case_fidelity_from(
    s: &TomographyScenario,
    opts: &TomographyOptions,
    warm: &[Lab],
) -> Result<WorstCaseResult> {
    check_range("epsilon", s.epsilon, 0.0, 1.0)?;
    if opts.starts < MIN_STARTS {
        return Err(Error::Config(format!("need at least {MIN_STARTS} starts, got {}", opts.starts)));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let design = TetrahedronDesign::default();
    let problem = Problem::new(design, s);
    if s.epsilon == 0.0 {
        // only the ideal states are feasible, and they reproduce n exactly
        let mut r = finish(&problem, s, 1.0, design.rows);
        r.n_est = s.e_lab.bloch;
        r.eta_est = s.e_lab.sharpness();
        r.eta_error = 0.0;
        return Ok(r);
    }

    let random = (0..opts.starts).into_par_iter().map(|k| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k as u64);
        problem.descend(random_start(&mut rng, &design), opts)
    });
    let seeded = warm.par_iter().map(|w| problem.descend(*w, opts));
    let runs: Vec<(f64, Lab)> = random.chain(seeded).collect();
    // first minimum in start order, whatever order the runs finished in
    let (f, lab) = runs
        .into_iter()
        .fold(None::<(f64, Lab)>, |best, run| match best {
            Some(b) if b.0 <= run.0 => Some(b),
            _ => Some(run),
        })
        .expect("at least one start");
    Ok(finish(&problem, s, f, lab))
}

/// Worst cases for `E_lab = η σz` over a grid of sharpness values. Each
/// point also restarts from the minimizers of the points before it.
pub fn sharpness_error_curve(epsilon: f64, grid: &[f64], opts: &TomographyOptions) -> Result<Vec<WorstCaseResult>> {
    let mut warm: Vec<Lab> = Vec::new();
    let mut out = Vec::with_capacity(grid.len());
    for &eta in grid {
        let r = worst_case_fidelity_from(&TomographyScenario::along_z(eta, epsilon)?, opts, &warm)?;
        warm.push(r.lab_bloch);
        out.push(r);
    }
    Ok(out)
}

/// Worst cases at fixed sharpness over increasing `ε`; minimizers carry
/// forward since every state set allowed at one `ε` is allowed at a larger one.
pub fn epsilon_curve(eta_lab: f64, epsilons: &[f64], opts: &TomographyOptions) -> Result<Vec<WorstCaseResult>> {
    let mut order: Vec<usize> = (0..epsilons.len()).collect();
    order.sort_by(|&i, &j| epsilons[i].total_cmp(&epsilons[j]));
    let mut warm: Vec<Lab> = Vec::new();
    let mut out: Vec<Option<WorstCaseResult>> = vec![None; epsilons.len()];
    for i in order {
        let r = worst_case_fidelity_from(&TomographyScenario::along_z(eta_lab, epsilons[i])?, opts, &warm)?;
        warm.push(r.lab_bloch);
        out[i] = Some(r);
    }
    Ok(out.into_iter().map(|r| r.expect("every index visited")).collect())
}
