// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded synthetic benchmarks with nine known change points.
//!
//! Every dataset has ten partitions of ten points and the true change points
//! sit at `t = 11, 21, ..., 91` (1-based). Noise is drawn from `ChaCha8Rng`
//! seeded with `seed_from_u64(seed)`, mapped through `rand_distr`'s ziggurat
//! `StandardNormal`. Both are platform independent, so a `(dataset, seed)`
//! pair always yields the same bits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CpdError, Result};

pub const PARTITIONS: usize = 10;
pub const PARTITION_LEN: usize = 10;
pub const SERIES_LEN: usize = PARTITIONS * PARTITION_LEN;

const MEANS_1: [f64; PARTITIONS] = [0.0, 10.0, 0.0, -20.0, 0.0, 20.0, 0.0, -30.0, 0.0, 30.0];
const MEANS_2: [f64; PARTITIONS] = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 70.0];
const SLOPES_5: [f64; PARTITIONS] = [0.0, 1.0, 0.0, -1.0, 0.0, 2.0, 0.0, -2.0, 0.0, 3.0];
const SLOPES_6: [f64; PARTITIONS] = [-0.1, 2.0, -0.1, 2.0, -0.1, 2.0, -0.1, 2.0, -0.1, 2.0];

/// True change points shared by all six datasets.
pub fn truth_indices() -> Vec<usize> {
    (1..PARTITIONS).map(|p| p * PARTITION_LEN + 1).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// Piecewise-constant means plus Gaussian noise.
    MeanShift,
    /// First differences of a mean-shift draw.
    FirstDifference,
    /// Piecewise-linear ramp plus Gaussian noise; `levels` are slopes.
    Slope,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub dataset_id: u32,
    /// Per-partition means, or slopes for [`SeriesKind::Slope`]. For
    /// [`SeriesKind::FirstDifference`] these are the means of the
    /// underlying series before differencing.
    pub levels: [f64; PARTITIONS],
    pub sigma: f64,
    pub kind: SeriesKind,
    pub baseline_shifts: bool,
}

impl SyntheticSpec {
    pub fn for_dataset(dataset_id: u32) -> Result<Self> {
        let (levels, sigma, kind, baseline_shifts) = match dataset_id {
            1 => (MEANS_1, 1.0, SeriesKind::MeanShift, false),
            2 => (MEANS_2, 1.0, SeriesKind::MeanShift, true),
            3 => (MEANS_1, 1.0, SeriesKind::FirstDifference, false),
            4 => (MEANS_2, 1.0, SeriesKind::FirstDifference, false),
            5 => (SLOPES_5, 0.1, SeriesKind::Slope, false),
            6 => (SLOPES_6, 0.1, SeriesKind::Slope, true),
            other => return Err(CpdError::UnknownDataset(other)),
        };
        Ok(Self {
            dataset_id,
            levels,
            sigma,
            kind,
            baseline_shifts,
        })
    }

    /// Allowed detection delay used by the validation protocol.
    pub fn allowed_delay(&self) -> usize {
        match self.kind {
            SeriesKind::Slope => 5,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSeries {
    pub values: Vec<f64>,
    pub truth: Vec<usize>,
    pub spec: SyntheticSpec,
    pub seed: u64,
}

fn partition_of(i: usize) -> usize {
    i / PARTITION_LEN
}

fn undifferenced_path(spec: &SyntheticSpec) -> Vec<f64> {
    match spec.kind {
        SeriesKind::Slope => {
            let mut level = 0.0;
            (0..SERIES_LEN)
                .map(|i| {
                    level += spec.levels[partition_of(i)];
                    level
                })
                .collect()
        }
        SeriesKind::MeanShift | SeriesKind::FirstDifference => {
            (0..SERIES_LEN).map(|i| spec.levels[partition_of(i)]).collect()
        }
    }
}

/// Noiseless generative mean at each time step.
pub fn mean_path(spec: &SyntheticSpec) -> Vec<f64> {
    let path = undifferenced_path(spec);
    match spec.kind {
        SeriesKind::FirstDifference => difference(&path),
        _ => path,
    }
}

/// `y_1 = 0`, `y_t = x_t - x_{t-1}`; output length equals input length.
pub fn first_difference(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(CpdError::invalid(format!(
            "first difference needs at least 2 points; got {}",
            series.len()
        )));
    }
    Ok(difference(series))
}

fn difference(series: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    out.push(0.0);
    out.extend(series.windows(2).map(|w| w[1] - w[0]));
    out
}

/// Draws one instance of dataset `dataset_id` (1..=6).
pub fn generate(dataset_id: u32, seed: u64) -> Result<LabeledSeries> {
    let spec = SyntheticSpec::for_dataset(dataset_id)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = undifferenced_path(&spec);
    for v in &mut values {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v += spec.sigma * z;
    }
    if spec.kind == SeriesKind::FirstDifference {
        values = difference(&values);
    }
    Ok(LabeledSeries {
        values,
        truth: truth_indices(),
        spec,
        seed,
    })
}
