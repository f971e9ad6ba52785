// SPDX-License-Identifier: MIT OR Apache-2.0

//! Streaming run-length recursion with the argmax-delta decision rule.
//!
//! A [`Detector`] consumes one observation at a time. For every run-length
//! hypothesis `r` it keeps one [`NigParams`]; the posterior over run lengths is
//! held in natural-log space and renormalized after each step.
//!
//! With [`Algorithm::Bocpd`] the decision never touches inference. With
//! [`Algorithm::BocpdBls`] a detected change point arms a reset: the next
//! observation becomes the partition baseline, every hypothesis is dropped,
//! and the posterior restarts from the point mass at `r = 0`.

use std::fmt;
use std::str::FromStr;

use crate::error::{CpdError, Result};
use crate::math::{argmax, log_sum_exp};
use crate::nig::{init_nig, log_pdf_student_t, predictive_spec, update_unchecked, NigParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Bocpd,
    BocpdBls,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Bocpd, Algorithm::BocpdBls];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Bocpd => "bocpd",
            Algorithm::BocpdBls => "bocpd-bls",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = CpdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bocpd" => Ok(Algorithm::Bocpd),
            "bocpd-bls" | "bocpd_bls" | "bls" => Ok(Algorithm::BocpdBls),
            other => Err(CpdError::invalid(format!(
                "unknown algorithm {other:?} (expected bocpd or bocpd-bls)"
            ))),
        }
    }
}

/// Constant hazard `h = 1/lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HazardSpec {
    lambda: f64,
    log_hazard: f64,
    log_survival: f64,
}

impl HazardSpec {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 1.0) {
            return Err(CpdError::InvalidLambda(lambda));
        }
        let h = 1.0 / lambda;
        Ok(Self {
            lambda,
            log_hazard: h.ln(),
            log_survival: (-h).ln_1p(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn probability(&self) -> f64 {
        1.0 / self.lambda
    }

    pub fn log_hazard(&self) -> f64 {
        self.log_hazard
    }

    pub fn log_survival(&self) -> f64 {
        self.log_survival
    }
}

/// Normalized run-length distribution; `log_probs[r] = ln P(r_t = r | data)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunLengthPosterior {
    pub log_probs: Vec<f64>,
    /// Number of observations consumed when this snapshot was taken.
    pub time_index: usize,
}

impl RunLengthPosterior {
    fn point_mass(time_index: usize) -> Self {
        Self {
            log_probs: vec![0.0],
            time_index,
        }
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    /// Most probable run length (smallest index on ties).
    pub fn argmax(&self) -> usize {
        argmax(&self.log_probs).unwrap_or(0)
    }

    /// `ln sum P(r)`; zero for a normalized posterior.
    pub fn log_mass(&self) -> f64 {
        log_sum_exp(&self.log_probs)
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|l| l.exp()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorConfig {
    pub algorithm: Algorithm,
    pub lambda: f64,
    /// Prior for a fresh run. For BOCPD-BLS `mu` is relative to the
    /// partition baseline.
    pub prior: NigParams,
    /// When set, trailing run lengths whose normalized log-probability falls
    /// below this value are truncated after every step.
    pub prune_log_threshold: Option<f64>,
}

impl DetectorConfig {
    pub fn new(algorithm: Algorithm, lambda: f64) -> Self {
        Self {
            algorithm,
            lambda,
            prior: NigParams {
                mu: 0.0,
                nu: 1.0,
                alpha: 1.0,
                beta: 1.0,
            },
            prune_log_threshold: None,
        }
    }

    pub fn with_prior(mut self, prior: NigParams) -> Self {
        self.prior = prior;
        self
    }

    /// Enables tail pruning below probability `threshold` (e.g. `1e-12`).
    pub fn with_pruning(mut self, threshold: f64) -> Self {
        self.prune_log_threshold = Some(threshold.ln());
        self
    }
}

/// Output of one [`Detector::observe`] call.
#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    /// 1-based time index.
    pub t: usize,
    pub x: f64,
    /// Observation after baseline subtraction (equals `x` for BOCPD).
    pub x_prime: f64,
    pub delta: i64,
    pub change_point: bool,
    pub argmax_run_length: usize,
    /// Partition label after this step (always 1 for BOCPD).
    pub partition: usize,
    /// Number of run-length hypotheses whose predictive was evaluated.
    pub hypotheses_evaluated: usize,
    pub posterior_snapshot: RunLengthPosterior,
}

/// Argmax-delta decision: `delta = cur - prev` (1 when `prev` is undefined);
/// a change point is declared when `delta <= 0`.
pub fn decide(prev_argmax: Option<usize>, cur_argmax: usize) -> (i64, bool) {
    let delta = match prev_argmax {
        Some(prev) => cur_argmax as i64 - prev as i64,
        None => 1,
    };
    (delta, delta <= 0)
}

/// Full streaming state of one detector.
#[derive(Clone, Debug)]
pub struct Detector {
    config: DetectorConfig,
    hazard: HazardSpec,
    hypotheses: Vec<NigParams>,
    posterior: RunLengthPosterior,
    prev_argmax: Option<usize>,
    baseline: f64,
    partition: usize,
    pending_reset: bool,
    t: usize,
    partition_data_count: usize,
    scratch: Vec<f64>,
}

impl Detector {
    /// Detector with the default prior `(prior_loc, 1, 1, 1)`.
    pub fn new(algorithm: Algorithm, lambda: f64, prior_loc: f64) -> Result<Self> {
        let prior = init_nig(prior_loc)?;
        Self::with_config(DetectorConfig::new(algorithm, lambda).with_prior(prior))
    }

    pub fn with_config(config: DetectorConfig) -> Result<Self> {
        let hazard = HazardSpec::new(config.lambda)?;
        let p = config.prior;
        let prior = NigParams::new(p.mu, p.nu, p.alpha, p.beta)?;
        if let Some(th) = config.prune_log_threshold {
            if th.is_nan() || th >= 0.0 {
                return Err(CpdError::invalid(format!(
                    "prune threshold must lie in (0, 1); got exp({th})"
                )));
            }
        }
        Ok(Self {
            config,
            hazard,
            hypotheses: vec![prior],
            posterior: RunLengthPosterior::point_mass(0),
            prev_argmax: None,
            baseline: 0.0,
            partition: 1,
            pending_reset: config.algorithm == Algorithm::BocpdBls,
            t: 0,
            partition_data_count: 0,
            scratch: Vec::new(),
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.config.algorithm
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn hazard(&self) -> &HazardSpec {
        &self.hazard
    }

    pub fn hypotheses(&self) -> &[NigParams] {
        &self.hypotheses
    }

    pub fn posterior(&self) -> &RunLengthPosterior {
        &self.posterior
    }

    pub fn prev_argmax(&self) -> Option<usize> {
        self.prev_argmax
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    pub fn partition(&self) -> usize {
        self.partition
    }

    pub fn pending_reset(&self) -> bool {
        self.pending_reset
    }

    /// Observations consumed so far.
    pub fn time(&self) -> usize {
        self.t
    }

    /// Observations retained in the current partition.
    pub fn partition_data_count(&self) -> usize {
        self.partition_data_count
    }

    /// Consumes one observation. A non-finite `x` is rejected before any
    /// state is touched.
    pub fn observe(&mut self, x: f64) -> Result<StepResult> {
        if !x.is_finite() {
            return Err(CpdError::NonFinite {
                t: self.t + 1,
                value: x,
            });
        }

        if self.pending_reset {
            self.reset_partition(x);
        }
        self.t += 1;
        self.partition_data_count += 1;
        let x_prime = x - self.baseline;

        // joint over r_t, indexed 0..=R+1
        let n = self.hypotheses.len();
        let log_h = self.hazard.log_hazard();
        let log_s = self.hazard.log_survival();
        self.scratch.clear();
        self.scratch.reserve(n);
        for (p, lp) in self.hypotheses.iter().zip(&self.posterior.log_probs) {
            let pi = log_pdf_student_t(x_prime, &predictive_spec(p));
            self.scratch.push(pi + lp);
        }
        let mut joint = Vec::with_capacity(n + 1);
        joint.push(log_h + log_sum_exp(&self.scratch));
        joint.extend(self.scratch.iter().map(|v| v + log_s));
        let norm = log_sum_exp(&joint);
        for v in &mut joint {
            *v -= norm;
        }

        let mut next = Vec::with_capacity(n + 1);
        next.push(self.config.prior);
        next.extend(self.hypotheses.iter().map(|p| update_unchecked(p, x_prime)));

        if let Some(th) = self.config.prune_log_threshold {
            let keep = joint.iter().rposition(|&v| v >= th).map_or(1, |i| i + 1);
            if keep < joint.len() {
                joint.truncate(keep);
                next.truncate(keep);
                let z = log_sum_exp(&joint);
                for v in &mut joint {
                    *v -= z;
                }
            }
        }

        self.hypotheses = next;
        self.posterior = RunLengthPosterior {
            log_probs: joint,
            time_index: self.t,
        };

        let cur = self.posterior.argmax();
        let (delta, change_point) = decide(self.prev_argmax, cur);
        self.prev_argmax = Some(cur);
        if change_point && self.config.algorithm == Algorithm::BocpdBls {
            self.pending_reset = true;
        }

        Ok(StepResult {
            t: self.t,
            x,
            x_prime,
            delta,
            change_point,
            argmax_run_length: cur,
            partition: self.partition,
            hypotheses_evaluated: n,
            posterior_snapshot: self.posterior.clone(),
        })
    }

    fn reset_partition(&mut self, x: f64) {
        self.baseline = x;
        self.hypotheses.clear();
        self.hypotheses.push(self.config.prior);
        self.posterior = RunLengthPosterior::point_mass(self.t);
        self.prev_argmax = None;
        if self.t > 0 {
            self.partition += 1;
        }
        self.partition_data_count = 0;
        self.pending_reset = false;
    }
}

/// Ragged table of run-length log-probabilities, one row per time step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunLengthMatrix {
    pub rows: Vec<Vec<f64>>,
}

impl RunLengthMatrix {
    /// Widest row, i.e. the number of run-length columns needed.
    pub fn width(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `ln P(r_t = r)` for 1-based `t`, `None` where the cell is undefined.
    pub fn cell(&self, t: usize, r: usize) -> Option<f64> {
        self.rows.get(t.checked_sub(1)?)?.get(r).copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub events: Vec<StepResult>,
    /// 1-based time indices with `c_t = 1`.
    pub change_points: Vec<usize>,
}

impl Detection {
    pub fn matrix(&self) -> RunLengthMatrix {
        RunLengthMatrix {
            rows: self
                .events
                .iter()
                .map(|e| e.posterior_snapshot.log_probs.clone())
                .collect(),
        }
    }
}

/// Runs a fresh detector with the default prior over `series`.
pub fn detect_series(algorithm: Algorithm, lambda: f64, series: &[f64]) -> Result<Detection> {
    detect_series_with(DetectorConfig::new(algorithm, lambda), series)
}

pub fn detect_series_with(config: DetectorConfig, series: &[f64]) -> Result<Detection> {
    if series.is_empty() {
        return Err(CpdError::invalid("series must be non-empty"));
    }
    let mut det = Detector::with_config(config)?;
    let mut events = Vec::with_capacity(series.len());
    let mut change_points = Vec::new();
    for &x in series {
        let step = det.observe(x)?;
        if step.change_point {
            change_points.push(step.t);
        }
        events.push(step);
    }
    Ok(Detection {
        events,
        change_points,
    })
}
