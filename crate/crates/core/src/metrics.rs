// SPDX-License-Identifier: MIT OR Apache-2.0

//! Validation protocol: detection-to-truth matching and the four benchmark
//! metrics (F-score, Miss, Delay, Duplication), aggregated over seeds and
//! hazard scales.
//!
//! Two horizons are used. The F-score counts a truth `g` as a true positive
//! only when a detection falls in the strict window `[g, g + allowed_delay]`.
//! Miss, Delay and Duplication look at the whole partition that starts at
//! `g` (up to the next truth or `partition_len` points, whichever is shorter).

use rayon::prelude::*;

use crate::datagen::{generate, LabeledSeries, PARTITION_LEN};
use crate::detector::{detect_series, Algorithm};
use crate::error::{CpdError, Result};

/// Eight log-spaced hazard scales spanning `[10, 1000]`.
pub const DEFAULT_LAMBDA_GRID: [f64; 8] = [10.0, 19.0, 37.0, 72.0, 139.0, 268.0, 518.0, 1000.0];

/// Grid used for the real-data sweeps.
pub const SWEEP_LAMBDA_GRID: [f64; 5] = [10.0, 30.0, 100.0, 300.0, 1000.0];

/// Environment variable capping worker threads for [`evaluate`].
pub const THREADS_ENV: &str = "CPD_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchRule {
    pub allowed_delay: usize,
    pub partition_len: usize,
}

impl MatchRule {
    pub fn new(allowed_delay: usize, partition_len: usize) -> Result<Self> {
        if allowed_delay >= partition_len {
            return Err(CpdError::invalid(format!(
                "allowed delay {allowed_delay} must be < partition length {partition_len}"
            )));
        }
        Ok(Self {
            allowed_delay,
            partition_len,
        })
    }

    /// Rule for one of the synthetic datasets: zero delay for 1..=4, five
    /// steps for the slope datasets.
    pub fn for_dataset(dataset_id: u32) -> Result<Self> {
        let spec = crate::datagen::SyntheticSpec::for_dataset(dataset_id)?;
        Self::new(spec.allowed_delay(), PARTITION_LEN)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchOutcome {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// Per truth point: delay of the first in-partition detection, `None`
    /// when the truth point was missed.
    pub delays: Vec<Option<usize>>,
    /// Per truth partition: detections beyond the first.
    pub duplication: Vec<usize>,
}

fn check_sorted(xs: &[usize], what: &'static str, series_len: usize) -> Result<()> {
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CpdError::Unsorted(what));
    }
    if let Some(&bad) = xs.iter().find(|&&x| x == 0 || x > series_len) {
        return Err(CpdError::invalid(format!(
            "{what} index {bad} outside [1, {series_len}]"
        )));
    }
    Ok(())
}

pub fn match_detections(
    truth: &[usize],
    detections: &[usize],
    rule: &MatchRule,
    series_len: usize,
) -> Result<MatchOutcome> {
    check_sorted(truth, "truth", series_len)?;
    check_sorted(detections, "detections", series_len)?;

    let in_range = |lo: usize, hi: usize| {
        let start = detections.partition_point(|&d| d < lo);
        let end = detections.partition_point(|&d| d <= hi);
        &detections[start..end]
    };

    let mut tp = 0;
    for &g in truth {
        if !in_range(g, g + rule.allowed_delay).is_empty() {
            tp += 1;
        }
    }
    let fp = detections
        .iter()
        .filter(|&&d| !truth.iter().any(|&g| d >= g && d <= g + rule.allowed_delay))
        .count();

    let mut delays = Vec::with_capacity(truth.len());
    let mut duplication = Vec::with_capacity(truth.len());
    for (i, &g) in truth.iter().enumerate() {
        let mut hi = (g + rule.partition_len - 1).min(series_len);
        if let Some(&next) = truth.get(i + 1) {
            hi = hi.min(next - 1);
        }
        let hits = in_range(g, hi);
        delays.push(hits.first().map(|&d| d - g));
        duplication.push(hits.len().saturating_sub(1));
    }

    Ok(MatchOutcome {
        tp,
        fp,
        fn_: truth.len() - tp,
        delays,
        duplication,
    })
}

/// Harmonic mean of precision and recall; 0 when there are no true positives.
pub fn f_score(tp: usize, fp: usize, fn_: usize) -> f64 {
    if tp == 0 {
        return 0.0;
    }
    let tp = tp as f64;
    let precision = tp / (tp + fp as f64);
    let recall = tp / (tp + fn_ as f64);
    2.0 * precision * recall / (precision + recall)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub f_score: f64,
    pub miss: usize,
    /// Mean delay over non-missed truth points; 0 when `delay_defined` is false.
    pub mean_delay: f64,
    pub delay_defined: bool,
    pub duplication: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl RunMetrics {
    pub fn from_outcome(m: &MatchOutcome) -> Self {
        let found: Vec<usize> = m.delays.iter().flatten().copied().collect();
        let delay_defined = !found.is_empty();
        let mean_delay = if delay_defined {
            found.iter().sum::<usize>() as f64 / found.len() as f64
        } else {
            0.0
        };
        let duplication = if m.duplication.is_empty() {
            0.0
        } else {
            m.duplication.iter().sum::<usize>() as f64 / m.duplication.len() as f64
        };
        Self {
            f_score: f_score(m.tp, m.fp, m.fn_),
            miss: m.delays.len() - found.len(),
            mean_delay,
            delay_defined,
            duplication,
            tp: m.tp,
            fp: m.fp,
            fn_: m.fn_,
        }
    }

    pub fn score(
        truth: &[usize],
        detections: &[usize],
        rule: &MatchRule,
        series_len: usize,
    ) -> Result<Self> {
        Ok(Self::from_outcome(&match_detections(truth, detections, rule, series_len)?))
    }
}

/// Mean and standard error of the mean of one metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// `sample_stddev / sqrt(n)`; 0 when `n < 2`.
    pub sem: f64,
    pub n: usize,
}

impl Summary {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: 0.0, sem: 0.0, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sem = if n < 2 {
            0.0
        } else {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        Self { mean, sem, n }
    }

    pub fn sem_defined(&self) -> bool {
        self.n >= 2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSummaries {
    pub f_score: Summary,
    pub miss: Summary,
    /// Only runs with at least one non-missed truth contribute.
    pub delay: Summary,
    pub duplication: Summary,
}

impl MetricSummaries {
    pub fn from_runs<'a>(runs: impl IntoIterator<Item = &'a RunMetrics>) -> Self {
        let runs: Vec<&RunMetrics> = runs.into_iter().collect();
        let col = |f: &dyn Fn(&RunMetrics) -> f64| runs.iter().map(|r| f(r)).collect::<Vec<_>>();
        let delays: Vec<f64> = runs
            .iter()
            .filter(|r| r.delay_defined)
            .map(|r| r.mean_delay)
            .collect();
        Self {
            f_score: Summary::from_samples(&col(&|r| r.f_score)),
            miss: Summary::from_samples(&col(&|r| r.miss as f64)),
            delay: Summary::from_samples(&delays),
            duplication: Summary::from_samples(&col(&|r| r.duplication)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaReport {
    pub lambda: f64,
    pub summary: MetricSummaries,
    /// Per-seed metrics in seed order.
    pub runs: Vec<RunMetrics>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub dataset_id: u32,
    pub algorithm: String,
    pub seeds: usize,
    pub seed0: u64,
    pub per_lambda: Vec<LambdaReport>,
    /// Pooled over every (lambda, seed) cell.
    pub pooled: MetricSummaries,
}

impl MetricsReport {
    pub fn lambda(&self, lambda: f64) -> Option<&LambdaReport> {
        self.per_lambda.iter().find(|l| l.lambda == lambda)
    }
}

fn run_cells<F>(cells: &[(usize, u64)], f: F) -> Vec<Result<RunMetrics>>
where
    F: Fn(usize, u64) -> Result<RunMetrics> + Sync,
{
    let work = || cells.par_iter().map(|&(li, seed)| f(li, seed)).collect();
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        _ => work(),
    }
}

/// Runs `detector` on every (lambda, seed) cell of one dataset and scores it.
/// Seed `k` is `seed0 + k`.
pub fn evaluate_with<F>(
    dataset_id: u32,
    label: &str,
    lambdas: &[f64],
    seeds: usize,
    seed0: u64,
    detector: F,
) -> Result<MetricsReport>
where
    F: Fn(&LabeledSeries, f64) -> Result<Vec<usize>> + Sync,
{
    if lambdas.is_empty() {
        return Err(CpdError::invalid("lambda grid is empty"));
    }
    if let Some(&bad) = lambdas.iter().find(|l| !(l.is_finite() && **l > 1.0)) {
        return Err(CpdError::InvalidLambda(bad));
    }
    if seeds == 0 {
        return Err(CpdError::invalid("at least one seed is required"));
    }
    let rule = MatchRule::for_dataset(dataset_id)?;

    let cells: Vec<(usize, u64)> = (0..lambdas.len())
        .flat_map(|li| (0..seeds as u64).map(move |k| (li, seed0.wrapping_add(k))))
        .collect();
    let results = run_cells(&cells, |li, seed| {
        let series = generate(dataset_id, seed)?;
        let detections = detector(&series, lambdas[li])?;
        RunMetrics::score(&series.truth, &detections, &rule, series.values.len())
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;

    let per_lambda: Vec<LambdaReport> = runs
        .chunks(seeds)
        .zip(lambdas)
        .map(|(chunk, &lambda)| LambdaReport {
            lambda,
            summary: MetricSummaries::from_runs(chunk),
            runs: chunk.to_vec(),
        })
        .collect();

    Ok(MetricsReport {
        dataset_id,
        algorithm: label.to_string(),
        seeds,
        seed0,
        pooled: MetricSummaries::from_runs(&runs),
        per_lambda,
    })
}

/// Validation sweep for one dataset and detector over a lambda grid.
pub fn evaluate(
    dataset_id: u32,
    algorithm: Algorithm,
    lambdas: &[f64],
    seeds: usize,
    seed0: u64,
) -> Result<MetricsReport> {
    evaluate_with(dataset_id, algorithm.as_str(), lambdas, seeds, seed0, |s, lambda| {
        Ok(detect_series(algorithm, lambda, &s.values)?.change_points)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn truth() -> Vec<usize> {
        crate::datagen::truth_indices()
    }

    #[test]
    fn perfect_detection() {
        let rule = MatchRule::new(0, 10).unwrap();
        let m = RunMetrics::score(&truth(), &truth(), &rule, 100).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_, m.miss), (9, 0, 0, 0));
        assert_eq!((m.f_score, m.mean_delay, m.duplication), (1.0, 0.0, 0.0));
        assert!(m.delay_defined);
    }

    #[test]
    fn no_detections() {
        let rule = MatchRule::new(0, 10).unwrap();
        let m = RunMetrics::score(&truth(), &[], &rule, 100).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_, m.miss), (0, 0, 9, 9));
        assert_eq!((m.f_score, m.mean_delay, m.duplication), (0.0, 0.0, 0.0));
        assert!(!m.delay_defined);
    }

    #[test]
    fn window_versus_partition() {
        let rule = MatchRule::new(0, 10).unwrap();
        let m = RunMetrics::score(&[11], &[12], &rule, 100).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_, m.miss), (0, 1, 1, 0));
        assert_eq!(m.mean_delay, 1.0);
    }

    #[test]
    fn multiple_hits_count_once() {
        let rule = MatchRule::new(5, 10).unwrap();
        let m = RunMetrics::score(&[11], &[11, 12, 13], &rule, 100).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_), (1, 0, 0));
        assert_eq!(m.duplication, 2.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let rule = MatchRule::new(0, 10).unwrap();
        assert!(matches!(
            match_detections(&[11], &[13, 12], &rule, 100),
            Err(CpdError::Unsorted("detections"))
        ));
        assert!(match_detections(&[21, 11], &[], &rule, 100).is_err());
        assert!(match_detections(&[11], &[101], &rule, 100).is_err());
        assert!(MatchRule::new(10, 10).is_err());
    }

    #[test]
    fn f_score_examples() {
        assert_eq!(f_score(9, 0, 0), 1.0);
        assert_eq!(f_score(0, 4, 2), 0.0);
        assert!((f_score(5, 5, 4) - 10.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn summary_sem() {
        let s = Summary::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.sem - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        let one = Summary::from_samples(&[0.7]);
        assert_eq!((one.mean, one.sem, one.sem_defined()), (0.7, 0.0, false));
    }

    #[test]
    fn stub_detector_returning_truth() {
        let r = evaluate_with(2, "oracle", &[30.0], 1, 0, |s, _| Ok(s.truth.clone())).unwrap();
        let p = &r.pooled;
        assert_eq!((p.f_score.mean, p.miss.mean, p.delay.mean, p.duplication.mean), (1.0, 0.0, 0.0, 0.0));
        assert_eq!(r.per_lambda.len(), 1);
        assert!(evaluate_with(2, "x", &[1.0], 1, 0, |s, _| Ok(s.truth.clone())).is_err());
        assert!(evaluate_with(2, "x", &[30.0], 0, 0, |s, _| Ok(s.truth.clone())).is_err());
        assert!(evaluate_with(9, "x", &[30.0], 1, 0, |s, _| Ok(s.truth.clone())).is_err());
    }

    #[test]
    fn aggregation_is_order_independent() {
        let a = evaluate(1, Algorithm::BocpdBls, &[10.0, 100.0], 6, 3).unwrap();
        let b = evaluate(1, Algorithm::BocpdBls, &[100.0, 10.0], 6, 3).unwrap();
        assert!((a.pooled.f_score.mean - b.pooled.f_score.mean).abs() < 1e-12);
        assert!((a.pooled.miss.sem - b.pooled.miss.sem).abs() < 1e-12);
        assert_eq!(a.per_lambda[0].runs, b.per_lambda[1].runs);
    }

    proptest! {
        #[test]
        fn classification_is_complete(
            dets in proptest::collection::btree_set(1usize..=100, 0..40),
            delay in 0usize..10,
        ) {
            let dets: Vec<usize> = dets.into_iter().collect();
            let rule = MatchRule::new(delay, 10).unwrap();
            let t = truth();
            let m = match_detections(&t, &dets, &rule, 100).unwrap();
            prop_assert_eq!(m.tp + m.fn_, t.len());
            let in_window = dets.iter().filter(|&&d| t.iter().any(|&g| d >= g && d <= g + delay)).count();
            prop_assert_eq!(in_window + m.fp, dets.len());
            let r = RunMetrics::from_outcome(&m);
            prop_assert!((0.0..=1.0).contains(&r.f_score));
            prop_assert!(r.miss <= 9);
            prop_assert!((0.0..=9.0).contains(&r.mean_delay));
            prop_assert!((0.0..=9.0).contains(&r.duplication));

            // trailing data with no detections leaves every metric unchanged
            let longer = RunMetrics::score(&t, &dets, &rule, 150).unwrap();
            prop_assert_eq!(longer, r);
        }
    }
}
