//! Closed-form compute-optimal allocation and local scaling exponents.
//!
//! In total coordinates the optimum is an exact power law,
//! `N*_T = (αN_c/βD_c)^{1/(α+β)} (C_T/6)^{β/(α+β)}`. In non-embedding
//! coordinates it is not: `C_∖E` is an explicit function of `N*_∖E`, and the
//! local exponents `g = d ln N*/d ln C` and `k = d ln L*/d ln C` vary with
//! scale. All functions here assume the cube-root embedding map.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::frontier::fmt_f64;
use crate::lossmodel::{loss_ne_ce, LossSpec};
use crate::params::EmbedMap;

/// Default sampling range and density for exponent curves.
pub const CURVE_MIN: f64 = 1e2;
pub const CURVE_MAX: f64 = 1e13;
pub const CURVE_POINTS: usize = 400;

/// One point on the non-embedding compute-optimal frontier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSample {
    pub n_nonembed: f64,
    pub c_nonembed: f64,
    pub g: f64,
    pub k: f64,
    pub loss_opt: f64,
}

/// Compute-optimal total parameter count for a total-compute budget.
pub fn optimal_nt(c_total: f64, spec: &LossSpec) -> Result<f64> {
    require_positive("c_total", c_total)?;
    let (a, b) = (spec.alpha, spec.beta);
    let ln_n =
        ((a * spec.n_c) / (b * spec.d_c)).ln() / (a + b) + (b / (a + b)) * (c_total / 6.0).ln();
    Ok(ln_n.exp())
}

/// Non-embedding compute at which `n_nonembed_opt` is the optimal size.
pub fn ce_of_optimal_ne(n_nonembed_opt: f64, spec: &LossSpec, map: &EmbedMap) -> Result<f64> {
    map.require_cube_root()?;
    require_positive("n_nonembed_opt", n_nonembed_opt)?;
    Ok(ln_ce_of_optimal_ne(n_nonembed_opt, spec, map).exp())
}

fn ln_ce_of_optimal_ne(n: f64, spec: &LossSpec, map: &EmbedMap) -> f64 {
    let (a, b, w) = (spec.alpha, spec.beta, map.omega);
    let n13 = n.cbrt();
    6f64.ln() + n.ln() - (n + w / 3.0 * n13).ln() / b
        + (1.0 + a) / b * (n + w * n13).ln()
        + ((b * spec.d_c) / (a * spec.n_c)).ln() / b
}

/// Optimal non-embedding size for a non-embedding budget; inverts
/// [`ce_of_optimal_ne`] by bisection on `ln N`.
pub fn optimal_ne(c_nonembed: f64, spec: &LossSpec, map: &EmbedMap) -> Result<f64> {
    map.require_cube_root()?;
    require_positive("c_nonembed", c_nonembed)?;
    let target = c_nonembed.ln();
    let (mut lo, mut hi) = (-50.0f64, 50.0f64);
    while ln_ce_of_optimal_ne(lo.exp(), spec, map) > target {
        lo -= 50.0;
        if lo < -700.0 {
            return Err(Error::NoConvergence(format!(
                "no optimum below budget {c_nonembed}"
            )));
        }
    }
    while ln_ce_of_optimal_ne(hi.exp(), spec, map) < target {
        hi += 50.0;
        if hi > 700.0 {
            return Err(Error::NoConvergence(format!(
                "no optimum for budget {c_nonembed}"
            )));
        }
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if ln_ce_of_optimal_ne(mid.exp(), spec, map) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Local parameter exponent `g` at the optimum `N*_∖E`.
pub fn local_param_exponent(n_nonembed_opt: f64, spec: &LossSpec, map: &EmbedMap) -> Result<f64> {
    map.require_cube_root()?;
    require_positive("n_nonembed_opt", n_nonembed_opt)?;
    Ok(1.0 / inverse_g(n_nonembed_opt, spec, map))
}

fn inverse_g(n: f64, spec: &LossSpec, map: &EmbedMap) -> f64 {
    let (a, b, w) = (spec.alpha, spec.beta, map.omega);
    let p = n.powf(2.0 / 3.0);
    1.0 - (p + w / 9.0) / (p + w / 3.0) / b + (a + 1.0) / b * (p + w / 3.0) / (p + w)
}

/// Local loss exponent `k = d ln L*_∖E / d ln C_∖E` at the optimum `N*_∖E`.
pub fn local_loss_exponent(n_nonembed_opt: f64, spec: &LossSpec, map: &EmbedMap) -> Result<f64> {
    Ok(exponent_sample(n_nonembed_opt, spec, map)?.k)
}

/// Evaluate `C_∖E`, `g`, `k` and `L*` at one optimum.
pub fn exponent_sample(
    n_nonembed_opt: f64,
    spec: &LossSpec,
    map: &EmbedMap,
) -> Result<ExponentSample> {
    map.require_cube_root()?;
    require_positive("n_nonembed_opt", n_nonembed_opt)?;
    let n = n_nonembed_opt;
    let c = ce_of_optimal_ne(n, spec, map)?;
    let loss = loss_ne_ce(n, c, spec, map)?;
    let g = 1.0 / inverse_g(n, spec, map);

    let n13 = n.cbrt();
    let n_total = n + map.omega * n13;
    let d = c / (6.0 * n);
    // αN_c (N + ω/3 N^{1/3}) / N_T^{α+1} written via the parameter term
    let param = -spec.alpha * spec.param_term(n_total) * (n + map.omega / 3.0 * n13) / n_total;
    let data = spec.beta * spec.data_term(d) * (1.0 - 1.0 / g);
    let k = g / loss * (param + data);

    Ok(ExponentSample {
        n_nonembed: n,
        c_nonembed: c,
        g,
        k,
        loss_opt: loss,
    })
}

/// `γ = αβ/(α+β)`, the exponent of `L*_T − E` in total compute.
pub fn loss_compute_exponent_total(spec: &LossSpec) -> f64 {
    spec.alpha * spec.beta / (spec.alpha + spec.beta)
}

/// `ω^{3/2}`: where embedding and non-embedding counts are equal.
pub fn transition_point(map: &EmbedMap) -> Result<f64> {
    map.require_cube_root()?;
    Ok(map.omega.powf(1.5))
}

/// Log-spaced exponent samples over `[lo, hi]`, in input order.
pub fn exponent_curve(
    spec: &LossSpec,
    map: &EmbedMap,
    lo: f64,
    hi: f64,
    count: usize,
) -> Result<Vec<ExponentSample>> {
    require_positive("lo", lo)?;
    require_positive("hi", hi)?;
    if count < 2 || hi <= lo {
        return Err(Error::InvalidArgument(format!(
            "need count ≥ 2 and hi > lo, got count={count} range=[{lo}, {hi}]"
        )));
    }
    log_space(lo, hi, count)
        .into_iter()
        .map(|n| exponent_sample(n, spec, map))
        .collect()
}

pub const CURVE_HEADER: [&str; 5] = ["n_nonembed", "c_nonembed", "g", "k", "loss_opt"];

pub fn write_exponent_curve_csv<W: std::io::Write>(
    samples: &[ExponentSample],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_HEADER)?;
    for s in samples {
        w.write_record([s.n_nonembed, s.c_nonembed, s.g, s.k, s.loss_opt].map(fmt_f64))?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == count - 1 {
                hi
            } else {
                (a + step * i as f64).exp()
            }
        })
        .collect()
}
