// SPDX-License-Identifier: MIT OR Apache-2.0

//! Streaming Bayesian online change point detection.
//!
//! Two detectors share one run-length recursion over a Normal-Inverse-Gamma
//! conjugate model:
//!
//! * [`Algorithm::Bocpd`] keeps the full run-length posterior from the first
//!   observation onward and treats the argmax-delta decision as pure output.
//! * [`Algorithm::BocpdBls`] feeds every detected change point back into the
//!   model: the next observation becomes a new local baseline, all run-length
//!   hypotheses are discarded and the recursion restarts from a point mass.
//!
//! Around the detectors the crate ships seeded synthetic benchmarks
//! ([`datagen`]), the validation metrics ([`metrics`]), CSV ingestion for
//! real-world series ([`ingest`]) and the writers behind the `cpd` binary
//! ([`output`]).

#![forbid(unsafe_code)]

pub mod cli;
pub mod datagen;
pub mod detector;
pub mod error;
pub mod ingest;
pub mod math;
pub mod metrics;
pub mod nig;
pub mod output;

pub use datagen::{first_difference, generate, mean_path, LabeledSeries, SeriesKind, SyntheticSpec};
pub use detector::{
    decide, detect_series, detect_series_with, Algorithm, Detection, Detector, DetectorConfig,
    HazardSpec, RunLengthMatrix, RunLengthPosterior, StepResult,
};
pub use error::{CpdError, Result};
pub use metrics::{evaluate, f_score, match_detections, MatchOutcome, MatchRule, MetricsReport, RunMetrics};
pub use nig::{init_nig, log_pdf_student_t, predictive_spec, update_nig, NigParams, StudentTSpec};
