// SPDX-License-Identifier: MIT OR Apache-2.0

//! Test-only oracles, independent of the crate's sequential code paths.

#![allow(dead_code)]

use std::f64::consts::PI;

/// ln Gamma via Stirling's series after shifting the argument above 20.
pub fn ln_gamma_stirling(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 20.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

#[derive(Clone, Copy, Debug)]
pub struct Prior {
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
}

pub const DEFAULT_PRIOR: Prior = Prior { mu: 0.0, nu: 1.0, alpha: 1.0, beta: 1.0 };

/// Closed-form log marginal likelihood of `xs` under a Normal-Inverse-Gamma
/// prior (batch formulas, no sequential updates).
pub fn log_marginal(prior: &Prior, xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    let nu_n = prior.nu + n;
    let alpha_n = prior.alpha + n / 2.0;
    let beta_n = prior.beta + 0.5 * ss + prior.nu * n * (mean - prior.mu).powi(2) / (2.0 * nu_n);
    ln_gamma_stirling(alpha_n) - ln_gamma_stirling(prior.alpha) + prior.alpha * prior.beta.ln()
        - alpha_n * beta_n.ln()
        + 0.5 * (prior.nu / nu_n).ln()
        - 0.5 * n * (2.0 * PI).ln()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Run-length posterior after observing `xs` (len t), by enumerating every
/// placement of breaks in the t-1 internal gaps and the trailing gap. A
/// break has prior weight `1/lambda`, a continuation `1 - 1/lambda`; each
/// segment contributes its NIG marginal likelihood. Returns `ln P(r_t = r)`
/// for `r = 0..=t`.
pub fn enumerate_run_length_posterior(xs: &[f64], lambda: f64, prior: &Prior) -> Vec<f64> {
    let t = xs.len();
    assert!((1..=16).contains(&t));
    let lh = (1.0 / lambda).ln();
    let ls = (1.0 - 1.0 / lambda).ln();
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); t + 1];
    for mask in 0u32..(1 << (t - 1)) {
        // bit i set: break between xs[i] and xs[i+1]
        let mut log_w = 0.0;
        let mut start = 0;
        for i in 0..t - 1 {
            if mask & (1 << i) != 0 {
                log_w += lh + log_marginal(prior, &xs[start..=i]);
                start = i + 1;
            } else {
                log_w += ls;
            }
        }
        log_w += log_marginal(prior, &xs[start..]);
        let last_len = t - start;
        buckets[0].push(log_w + lh);
        buckets[last_len].push(log_w + ls);
    }
    let joint: Vec<f64> = buckets
        .iter()
        .map(|b| if b.is_empty() { f64::NEG_INFINITY } else { log_sum_exp(b) })
        .collect();
    let z = log_sum_exp(&joint);
    joint.iter().map(|v| v - z).collect()
}

/// Integral of `exp(log_pdf)` over the whole real line via `x = loc +
/// scale * tan(theta)` and composite Simpson on `(-pi/2, pi/2)`.
pub fn integrate_real_line(log_pdf: impl Fn(f64) -> f64, loc: f64, scale: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let a = -PI / 2.0;
    let h = PI / n as f64;
    let f = |theta: f64| {
        let c = theta.cos();
        if c <= 0.0 {
            return 0.0;
        }
        let x = loc + scale * theta.tan();
        log_pdf(x).exp() * scale / (c * c)
    };
    let mut acc = f(a) + f(a + PI);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Composite Simpson over `[lo, hi]`.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
