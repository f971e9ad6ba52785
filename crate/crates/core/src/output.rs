// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV and text writers for every artifact the CLI produces. All numbers use
//! Rust's shortest round-trip formatting, so identical inputs give
//! byte-identical files.

use std::io::Write;

use crate::datagen::LabeledSeries;
use crate::detector::{Algorithm, Detection, RunLengthMatrix};
use crate::error::Result;
use crate::ingest::TimeSeriesFrame;
use crate::metrics::{MetricSummaries, MetricsReport, Summary};

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().flexible(true).from_writer(w)
}

/// `t,delta,argmax_run_length`, one row per detected change point.
pub fn write_events<W: Write>(w: W, detection: &Detection) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["t", "delta", "argmax_run_length"])?;
    for e in detection.events.iter().filter(|e| e.change_point) {
        out.write_record([e.t.to_string(), e.delta.to_string(), e.argmax_run_length.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Run-length matrix: header `t,r0,r1,...`; cells are natural-log
/// probabilities, empty where the run length is not in the support.
pub fn write_matrix<W: Write>(w: W, matrix: &RunLengthMatrix) -> Result<()> {
    let width = matrix.width();
    let mut out = writer(w);
    let mut header = vec!["t".to_string()];
    header.extend((0..width).map(|r| format!("r{r}")));
    out.write_record(&header)?;
    for (i, row) in matrix.rows.iter().enumerate() {
        let mut rec = Vec::with_capacity(width + 1);
        rec.push((i + 1).to_string());
        rec.extend((0..width).map(|r| row.get(r).map_or_else(String::new, |v| v.to_string())));
        out.write_record(&rec)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `t,value` with 1-based `t`.
pub fn write_series<W: Write>(w: W, series: &LabeledSeries) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["t", "value"])?;
    for (i, v) in series.values.iter().enumerate() {
        out.write_record([(i + 1).to_string(), v.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Truth sidecar: a single `t` column.
pub fn write_truth<W: Write>(w: W, truth: &[usize]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["t"])?;
    for t in truth {
        out.write_record([t.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `timestamp,value`.
pub fn write_frame<W: Write>(w: W, frame: &TimeSeriesFrame) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["timestamp", "value"])?;
    for (t, v) in frame.timestamps.iter().zip(&frame.values) {
        out.write_record([t.to_string(), v.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Ragged rows `algorithm,lambda,t1,t2,...`.
pub fn write_sweep<W: Write>(w: W, rows: &[(Algorithm, f64, Vec<usize>)]) -> Result<()> {
    let mut out = writer(w);
    for (alg, lambda, cps) in rows {
        let mut rec = vec![alg.to_string(), lambda.to_string()];
        rec.extend(cps.iter().map(usize::to_string));
        out.write_record(&rec)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

const METRIC_NAMES: [&str; 4] = ["f_score", "miss", "delay", "duplication"];

fn metric_columns(s: &MetricSummaries) -> [&Summary; 4] {
    [&s.f_score, &s.miss, &s.delay, &s.duplication]
}

/// One row per (dataset, algorithm, lambda) plus a `pooled` row per report.
/// Each metric has `mean`, `sem3` (3 x SEM) and `n` columns; `sem_defined` is
/// false when fewer than two seeds were run.
pub fn write_metrics_csv<W: Write>(w: W, reports: &[MetricsReport]) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec!["dataset".to_string(), "algorithm".into(), "lambda".into(), "sem_defined".into()];
    for m in METRIC_NAMES {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_sem3"));
        header.push(format!("{m}_n"));
    }
    out.write_record(&header)?;
    for r in reports {
        let rows = r
            .per_lambda
            .iter()
            .map(|l| (l.lambda.to_string(), &l.summary))
            .chain(std::iter::once(("pooled".to_string(), &r.pooled)));
        for (lambda, s) in rows {
            let mut rec = vec![
                r.dataset_id.to_string(),
                r.algorithm.clone(),
                lambda,
                (r.seeds >= 2).to_string(),
            ];
            for m in metric_columns(s) {
                rec.push(m.mean.to_string());
                rec.push((3.0 * m.sem).to_string());
                rec.push(m.n.to_string());
            }
            out.write_record(&rec)?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn write_summaries<W: Write>(w: &mut W, s: &MetricSummaries) -> std::io::Result<()> {
    for (name, m) in METRIC_NAMES.iter().zip(metric_columns(s)) {
        writeln!(w, "{name} = {{ mean = {}, sem3 = {}, n = {} }}", m.mean, 3.0 * m.sem, m.n)?;
    }
    Ok(())
}

/// Key/value report with one section per report, a pooled sub-table and one
/// sub-table per lambda.
pub fn write_metrics_text<W: Write>(mut w: W, reports: &[MetricsReport]) -> Result<()> {
    let io = |e: std::io::Error| crate::error::CpdError::io("<report>", e);
    for r in reports {
        let key = format!("dataset{}.{}", r.dataset_id, r.algorithm);
        (|| -> std::io::Result<()> {
            writeln!(w, "[{key}]")?;
            writeln!(w, "dataset = {}", r.dataset_id)?;
            writeln!(w, "algorithm = \"{}\"", r.algorithm)?;
            writeln!(w, "seeds = {}", r.seeds)?;
            writeln!(w, "seed0 = {}", r.seed0)?;
            writeln!(w, "sem_defined = {}", r.seeds >= 2)?;
            let grid: Vec<String> = r.per_lambda.iter().map(|l| l.lambda.to_string()).collect();
            writeln!(w, "lambdas = [{}]", grid.join(", "))?;
            writeln!(w)?;
            writeln!(w, "[{key}.pooled]")?;
            write_summaries(&mut w, &r.pooled)?;
            writeln!(w)?;
            for l in &r.per_lambda {
                writeln!(w, "[{key}.lambda.\"{}\"]", l.lambda)?;
                write_summaries(&mut w, &l.summary)?;
                writeln!(w)?;
            }
            Ok(())
        })()
        .map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}
