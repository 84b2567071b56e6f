//! Run configuration and the machine-readable reports behind the command line.
//!
//! Every number in a report is rounded to 9 significant digits when the
//! report is built, so parsing an emitted CSV or JSON file gives back the
//! same values bit for bit.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::certification::{
    certify_sharpness, compute_witnesses, optimal_tradeoff, CertificationResult, WitnessPair,
};
use crate::error::{check_range, Error, Result};
use crate::fixtures::{self, MEASURED};
use crate::incompatibility::{bound_b2, IncompatibilityResult};
use crate::projective::{projective_optimum, ProjectiveOptions};
use crate::protocol::{exact_distribution, ProtocolSpec};
use crate::sampling::sample_counts;
use crate::strategies::eta_from_waveplate;

/// Environment variable read for the default seed.
pub const SEED_ENV: &str = "SEQRAC_SEED";
pub const DEFAULT_SEED: u64 = 20_200_101;
pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_CURVE_POINTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sweep,
    Simulate,
    Certify,
    Incompat,
    Tomo,
    ProjectiveBound,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// Settings read from a JSON file and/or command-line flags. Unset fields
/// fall back to the documented defaults at use.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub eta: Option<f64>,
    pub theta_degrees: Option<f64>,
    /// Half-wave-plate grid for `sweep`.
    pub thetas: Option<Vec<f64>>,
    /// Sharpness grid for `tomo`.
    pub etas: Option<Vec<f64>>,
    pub visibility: Option<f64>,
    /// Sampled mode when set; exact statistics otherwise.
    pub events_per_setting: Option<u64>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub starts: Option<usize>,
    pub points: Option<usize>,
    pub w_ab: Option<f64>,
    pub w_ac: Option<f64>,
    pub sigma_ab: Option<f64>,
    pub sigma_ac: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `flags` win over fields set in `self`.
    pub fn overlay(self, flags: RunConfig) -> Self {
        Self {
            mode: flags.mode.or(self.mode),
            eta: flags.eta.or(self.eta),
            theta_degrees: flags.theta_degrees.or(self.theta_degrees),
            thetas: flags.thetas.or(self.thetas),
            etas: flags.etas.or(self.etas),
            visibility: flags.visibility.or(self.visibility),
            events_per_setting: flags.events_per_setting.or(self.events_per_setting),
            seed: flags.seed.or(self.seed),
            epsilon: flags.epsilon.or(self.epsilon),
            starts: flags.starts.or(self.starts),
            points: flags.points.or(self.points),
            w_ab: flags.w_ab.or(self.w_ab),
            w_ac: flags.w_ac.or(self.w_ac),
            sigma_ab: flags.sigma_ab.or(self.sigma_ab),
            sigma_ac: flags.sigma_ac.or(self.sigma_ac),
            output_path: flags.output_path.or(self.output_path),
            format: flags.format.or(self.format),
        }
    }

    pub fn visibility(&self) -> Result<f64> {
        let v = self.visibility.unwrap_or(1.0);
        check_range("visibility", v, 0.0, 1.0)?;
        Ok(v)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn epsilon(&self) -> Result<f64> {
        let e = self.epsilon.unwrap_or(DEFAULT_EPSILON);
        check_range("epsilon", e, 0.0, 1.0)?;
        Ok(e)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    /// Sharpness from `eta` or `theta_degrees`, which are mutually exclusive.
    pub fn sharpness(&self) -> Result<Option<f64>> {
        match (self.eta, self.theta_degrees) {
            (Some(_), Some(_)) => Err(Error::Config("give either eta or theta_degrees, not both".into())),
            (Some(eta), None) => {
                check_range("eta", eta, 0.0, 1.0)?;
                Ok(Some(eta))
            }
            (None, Some(theta)) => Ok(Some(eta_from_waveplate(theta)?)),
            (None, None) => Ok(None),
        }
    }

    pub fn require_sharpness(&self) -> Result<f64> {
        self.sharpness()?
            .ok_or_else(|| Error::Config("one of eta or theta_degrees is required".into()))
    }

    pub fn events(&self) -> Result<Option<u64>> {
        match self.events_per_setting {
            Some(0) => Err(Error::OutOfRange {
                name: "events_per_setting",
                value: 0.0,
                min: 1.0,
                max: f64::INFINITY,
            }),
            other => Ok(other),
        }
    }

    /// Witness pair given as `w_ab`, `w_ac` and optional errors (default 0).
    pub fn witness_pair(&self) -> Result<WitnessPair<f64>> {
        let (Some(w_ab), Some(w_ac)) = (self.w_ab, self.w_ac) else {
            return Err(Error::Config("w_ab and w_ac are required".into()));
        };
        let sigma_ab = self.sigma_ab.unwrap_or(0.0);
        let sigma_ac = self.sigma_ac.unwrap_or(0.0);
        for (name, v) in [("sigma_ab", sigma_ab), ("sigma_ac", sigma_ac)] {
            check_range(name, v, 0.0, f64::INFINITY)?;
        }
        Ok(WitnessPair::new(w_ab, w_ac, sigma_ab, sigma_ac))
    }

    pub fn thetas(&self) -> Result<Vec<f64>> {
        let grid = self.thetas.clone().unwrap_or_else(fixtures::default_thetas);
        if grid.is_empty() {
            return Err(Error::Config("empty theta grid".into()));
        }
        for &t in &grid {
            check_range("theta", t, 0.0, 22.5)?;
        }
        Ok(grid)
    }
}

/// `x` rounded to 9 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// One sharpness setting of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub theta: f64,
    pub eta_target: f64,
    pub w_ab: f64,
    pub w_ac: f64,
    pub sigma_ab: f64,
    pub sigma_ac: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub interval_width: f64,
    pub d_bob: f64,
    pub d_charlie: f64,
}

impl ReportRow {
    fn rounded(self) -> Self {
        Self {
            theta: round_sig(self.theta),
            eta_target: round_sig(self.eta_target),
            w_ab: round_sig(self.w_ab),
            w_ac: round_sig(self.w_ac),
            sigma_ab: round_sig(self.sigma_ab),
            sigma_ac: round_sig(self.sigma_ac),
            eta_min: round_sig(self.eta_min),
            eta_max: round_sig(self.eta_max),
            interval_width: round_sig(self.interval_width),
            d_bob: round_sig(self.d_bob),
            d_charlie: round_sig(self.d_charlie),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<ReportRow>,
    pub warnings: Vec<String>,
}

fn interval_warnings(label: &str, interval: &crate::certification::SharpnessInterval<f64>) -> Vec<String> {
    let mut out = Vec::new();
    if !interval.consistent {
        out.push(format!(
            "{label}: eta_min {:.6} exceeds eta_max {:.6}; bounds use the swapped interval",
            interval.eta_min, interval.eta_max
        ));
    }
    if interval.radicand_clamped {
        out.push(format!("{label}: w_ac above the quantum maximum; eta_max radicand clamped to 0"));
    }
    out
}

/// Witnesses, certified interval and incompatibility bounds for each θ of
/// the grid. Exact statistics unless `events_per_setting` is set; the
/// sampled table for grid entry `k` uses seed `seed + k`.
pub fn run_sweep(config: &RunConfig) -> Result<SweepReport> {
    let visibility = config.visibility()?;
    let events = config.events()?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (k, theta) in config.thetas()?.into_iter().enumerate() {
        let eta = eta_from_waveplate(theta)?;
        let spec = ProtocolSpec::optimal(eta, visibility)?;
        let w = match events {
            None => compute_witnesses(&exact_distribution(&spec))?,
            Some(n) => compute_witnesses(&sample_counts(&spec, n, config.seed().wrapping_add(k as u64))?)?,
        };
        let interval = certify_sharpness(&w)?;
        let bounds = bound_b2(&w, &interval)?;
        warnings.extend(interval_warnings(&format!("theta {theta}"), &interval));
        rows.push(
            ReportRow {
                theta,
                eta_target: eta,
                w_ab: w.w_ab,
                w_ac: w.w_ac,
                sigma_ab: w.sigma_ab,
                sigma_ac: w.sigma_ac,
                eta_min: interval.eta_min,
                eta_max: interval.eta_max,
                interval_width: interval.width(),
                d_bob: bounds.d_bob,
                d_charlie: bounds.d_charlie,
            }
            .rounded(),
        );
    }
    Ok(SweepReport { rows, warnings })
}

pub fn write_rows_csv<W: Write>(rows: &[ReportRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows_csv<R: Read>(reader: R) -> Result<Vec<ReportRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Certified interval and incompatibility bounds for one witness pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub certification: CertificationResult<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub interval_width: f64,
    pub incompatibility: IncompatibilityResult<f64>,
    pub warnings: Vec<String>,
}

pub fn run_certify(w: &WitnessPair<f64>) -> Result<CertifyReport> {
    let interval = certify_sharpness(w)?;
    let bounds = bound_b2(w, &interval)?;
    let mut warnings = interval_warnings("input", &interval);
    if w.w_ab < 0.5 || w.w_ac < 0.5 {
        warnings.push("a witness is below 1/2; relabelling outcomes would do better".into());
    }
    let c = CertificationResult::new(w, &interval);
    Ok(CertifyReport {
        certification: CertificationResult {
            w_ab: round_sig(c.w_ab),
            w_ac: round_sig(c.w_ac),
            sigma_ab: round_sig(c.sigma_ab),
            sigma_ac: round_sig(c.sigma_ac),
            eta_min: round_sig(c.eta_min),
            eta_max: round_sig(c.eta_max),
            consistent: c.consistent,
        },
        sigma_min: round_sig(interval.sigma_min),
        sigma_max: round_sig(interval.sigma_max),
        interval_width: round_sig(interval.width()),
        incompatibility: IncompatibilityResult {
            d_bob: round_sig(bounds.d_bob),
            d_charlie: round_sig(bounds.d_charlie),
            eta_argmin: round_sig(bounds.eta_argmin),
            assumptions: bounds.assumptions,
        },
        warnings,
    })
}

/// A point of the witness-plane plot: a boundary curve or a measured pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneRow {
    /// `optimal`, `projective`, `classical` or `measured`.
    pub kind: String,
    pub w_ab: f64,
    pub w_ac: f64,
    pub sigma_ab: f64,
    pub sigma_ac: f64,
}

fn plane(kind: &str, w_ab: f64, w_ac: f64, sigma_ab: f64, sigma_ac: f64) -> PlaneRow {
    PlaneRow {
        kind: kind.into(),
        w_ab: round_sig(w_ab),
        w_ac: round_sig(w_ac),
        sigma_ab: round_sig(sigma_ab),
        sigma_ac: round_sig(sigma_ac),
    }
}

/// Optimal and projective boundaries on `points` values of `W_AB`, the
/// classical point and the measured pairs.
pub fn witness_plane(points: usize, opts: &ProjectiveOptions) -> Result<Vec<PlaneRow>> {
    if points < 2 {
        return Err(Error::Config("need at least 2 curve points".into()));
    }
    let top = crate::certification::max_quantum_witness::<f64>();
    let mut out = Vec::with_capacity(2 * points + 13);
    for k in 0..points {
        let w = if k == points - 1 {
            top
        } else {
            0.5 + (top - 0.5) * k as f64 / (points - 1) as f64
        };
        out.push(plane("optimal", w, optimal_tradeoff(w)?, 0.0, 0.0));
        out.push(plane("projective", w, projective_optimum(w, opts)?.w_ac, 0.0, 0.0));
    }
    out.push(plane("classical", 0.75, 0.75, 0.0, 0.0));
    for r in &MEASURED {
        out.push(plane("measured", r.w_ab, r.w_ac, r.sigma_ab, r.sigma_ac));
    }
    Ok(out)
}

pub fn write_plane_csv<W: Write>(rows: &[PlaneRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
