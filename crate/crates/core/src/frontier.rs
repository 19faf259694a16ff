//! Synthetic training curves and compute-efficient frontier extraction.
//!
//! Curves are sampled from the loss surface for a grid of model sizes; the
//! frontier keeps the lowest-loss sample in each log-spaced compute bin and
//! can be fitted for parameter and loss scaling.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::log_space;
use crate::error::{require_positive, Error, Result};
use crate::fitting::{
    fit_kaplan_form, fit_power_law, fit_power_law_with_offset, FitForm, PowerLawFit,
};
use crate::lossmodel::{loss_nd, LossSpec};
use crate::params::{total_from_nonembed, EmbedMap};

/// Smallest and largest non-embedding sizes of the default grid.
pub const KAPLAN_MIN: f64 = 7.9e2;
pub const KAPLAN_MAX: f64 = 1.58e9;
pub const KAPLAN_COUNT: usize = 20;
pub const DEFAULT_BINS: usize = 200;

/// Which parameter and compute counts the frontier is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Total,
    Nonembed,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Total => "total",
            Basis::Nonembed => "nonembed",
        })
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(Basis::Total),
            "nonembed" => Ok(Basis::Nonembed),
            other => Err(Error::InvalidArgument(format!("unknown basis `{other}`"))),
        }
    }
}

/// Strictly increasing list of non-embedding model sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeGrid {
    sizes: Vec<f64>,
}

impl SizeGrid {
    pub fn new(sizes: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidArgument("size grid is empty".into()));
        }
        for &s in &sizes {
            require_positive("model size", s)?;
        }
        if sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "size grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { sizes })
    }

    /// `count` geometrically spaced sizes from `min` to `max` inclusive.
    pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Self> {
        require_positive("sizes-min", min)?;
        require_positive("sizes-max", max)?;
        if count < 2 || max <= min {
            return Err(Error::InvalidArgument(format!(
                "need sizes-count ≥ 2 and sizes-max > sizes-min, got {count} sizes over [{min}, {max}]"
            )));
        }
        Self::new(log_space(min, max, count))
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }
}

/// 20 sizes from 790 to 1.58e9 non-embedding parameters.
pub fn kaplan_size_grid() -> SizeGrid {
    SizeGrid::log_spaced(KAPLAN_MIN, KAPLAN_MAX, KAPLAN_COUNT).expect("constant grid is valid")
}

/// Per-model token counts: `count` log-spaced values over
/// `[ratio_min·N_∖E, ratio_max·N_∖E]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenSchedule {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub count: usize,
}

impl Default for TokenSchedule {
    fn default() -> Self {
        Self {
            ratio_min: 0.1,
            ratio_max: 1e7,
            count: 1024,
        }
    }
}

impl TokenSchedule {
    pub fn validate(&self) -> Result<()> {
        require_positive("token ratio_min", self.ratio_min)?;
        require_positive("token ratio_max", self.ratio_max)?;
        if self.count < 2 || self.ratio_max <= self.ratio_min {
            return Err(Error::InvalidArgument(format!(
                "token schedule needs count ≥ 2 and ratio_max > ratio_min, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn tokens_for(&self, n_nonembed: f64) -> Vec<f64> {
        log_space(
            self.ratio_min * n_nonembed,
            self.ratio_max * n_nonembed,
            self.count,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub tokens: f64,
    pub c_total: f64,
    pub c_nonembed: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingCurve {
    pub model_index: usize,
    pub n_nonembed: f64,
    pub n_total: f64,
    pub samples: Vec<CurveSample>,
}

/// One winner of a compute bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    /// Geometric centre of the bin.
    pub c: f64,
    pub loss_min: f64,
    /// Parameter count of the winning model in the frontier's basis.
    pub n_opt: f64,
    pub d_opt: f64,
    pub model_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierOptions {
    pub n_bins: usize,
    pub basis: Basis,
    /// Drop bins won by the smallest or largest model of the grid.
    pub exclude_boundary: bool,
}

impl Default for FrontierOptions {
    fn default() -> Self {
        Self {
            n_bins: DEFAULT_BINS,
            basis: Basis::Nonembed,
            exclude_boundary: true,
        }
    }
}

impl FrontierOptions {
    pub fn with_basis(basis: Basis) -> Self {
        Self {
            basis,
            ..Self::default()
        }
    }
}

/// Sample the loss surface along each model's token schedule.
///
/// Results are in grid order. Loss is evaluated as `L(N_T, D)` with `N_T`
/// from the embedding map, which equals the non-embedding-coordinate form.
pub fn simulate_curves(
    grid: &SizeGrid,
    spec: &LossSpec,
    map: &EmbedMap,
    schedule: &TokenSchedule,
) -> Result<Vec<TrainingCurve>> {
    spec.validate()?;
    schedule.validate()?;
    grid.sizes()
        .iter()
        .enumerate()
        .map(|(model_index, &n_nonembed)| {
            let n_total = total_from_nonembed(n_nonembed, map)?;
            let samples = schedule
                .tokens_for(n_nonembed)
                .into_iter()
                .map(|tokens| {
                    Ok(CurveSample {
                        tokens,
                        c_total: 6.0 * n_total * tokens,
                        c_nonembed: 6.0 * n_nonembed * tokens,
                        loss: loss_nd(n_total, tokens, spec)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrainingCurve {
                model_index,
                n_nonembed,
                n_total,
                samples,
            })
        })
        .collect()
}

/// Lowest-loss sample per log-spaced compute bin (Chinchilla's Method 1).
pub fn extract_frontier(
    curves: &[TrainingCurve],
    opts: &FrontierOptions,
) -> Result<Vec<FrontierPoint>> {
    if curves.len() < 2 {
        return Err(Error::NotEnoughPoints {
            need: 2,
            got: curves.len(),
            what: "curves",
        });
    }
    if opts.n_bins < 10 {
        return Err(Error::InvalidArgument(format!(
            "need ≥10 bins, got {}",
            opts.n_bins
        )));
    }

    let compute = |s: &CurveSample| match opts.basis {
        Basis::Total => s.c_total,
        Basis::Nonembed => s.c_nonembed,
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in curves.iter().flat_map(|c| &c.samples) {
        let c = compute(s);
        lo = lo.min(c);
        hi = hi.max(c);
    }
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Degenerate("pooled compute range is empty".into()));
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let width = (ln_hi - ln_lo) / opts.n_bins as f64;

    // (curve position, sample position) of each bin's winner
    let mut winners: Vec<Option<(usize, usize)>> = vec![None; opts.n_bins];
    for (ci, curve) in curves.iter().enumerate() {
        for (si, s) in curve.samples.iter().enumerate() {
            let bin = (((compute(s).ln() - ln_lo) / width) as usize).min(opts.n_bins - 1);
            match winners[bin] {
                Some((wc, ws)) if curves[wc].samples[ws].loss <= s.loss => {}
                _ => winners[bin] = Some((ci, si)),
            }
        }
    }

    let empty = winners.iter().filter(|w| w.is_none()).count();
    if 2 * empty > opts.n_bins {
        return Err(Error::Degenerate(format!(
            "{empty} of {} compute bins are empty; token schedules are too sparse",
            opts.n_bins
        )));
    }

    let smallest = curves
        .iter()
        .map(|c| c.n_nonembed)
        .fold(f64::INFINITY, f64::min);
    let largest = curves
        .iter()
        .map(|c| c.n_nonembed)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut frontier = Vec::new();
    for (bin, winner) in winners.into_iter().enumerate() {
        let Some((ci, si)) = winner else { continue };
        let curve = &curves[ci];
        if opts.exclude_boundary && (curve.n_nonembed == smallest || curve.n_nonembed == largest) {
            continue;
        }
        let s = &curve.samples[si];
        frontier.push(FrontierPoint {
            c: (ln_lo + width * (bin as f64 + 0.5)).exp(),
            loss_min: s.loss,
            n_opt: match opts.basis {
                Basis::Total => curve.n_total,
                Basis::Nonembed => curve.n_nonembed,
            },
            d_opt: s.tokens,
            model_index: curve.model_index,
        });
    }
    Ok(frontier)
}

/// `loss_min` non-increasing and `n_opt` non-decreasing along the frontier.
pub fn frontier_is_monotone(frontier: &[FrontierPoint]) -> bool {
    frontier
        .windows(2)
        .all(|w| w[1].c > w[0].c && w[1].loss_min <= w[0].loss_min && w[1].n_opt >= w[0].n_opt)
}

fn require_frontier(frontier: &[FrontierPoint]) -> Result<()> {
    if frontier.len() < 3 {
        return Err(Error::NotEnoughPoints {
            need: 3,
            got: frontier.len(),
            what: "points",
        });
    }
    Ok(())
}

/// Power law of `n_opt` against bin compute.
pub fn fit_param_scaling(frontier: &[FrontierPoint]) -> Result<PowerLawFit> {
    require_frontier(frontier)?;
    let pts: Vec<_> = frontier.iter().map(|p| (p.c, p.n_opt)).collect();
    fit_power_law(&pts)
}

/// Compute-loss fit of `loss_min` against bin compute.
pub fn fit_loss_scaling(frontier: &[FrontierPoint], form: FitForm) -> Result<PowerLawFit> {
    require_frontier(frontier)?;
    let pts: Vec<_> = frontier.iter().map(|p| (p.c, p.loss_min)).collect();
    match form {
        FitForm::Plain | FitForm::Kaplan => fit_kaplan_form(&pts),
        FitForm::Chinchilla => fit_power_law_with_offset(&pts),
    }
}

/// Full-precision float formatting (17 significant digits).
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub const CURVES_HEADER: [&str; 7] = [
    "model_index",
    "n_nonembed",
    "n_total",
    "tokens",
    "c_total",
    "c_nonembed",
    "loss",
];

pub const FRONTIER_HEADER: [&str; 6] = ["basis", "c", "loss_min", "n_opt", "d_opt", "model_index"];

pub fn write_curves_csv<W: Write>(curves: &[TrainingCurve], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVES_HEADER)?;
    for curve in curves {
        for s in &curve.samples {
            w.write_record([
                curve.model_index.to_string(),
                fmt_f64(curve.n_nonembed),
                fmt_f64(curve.n_total),
                fmt_f64(s.tokens),
                fmt_f64(s.c_total),
                fmt_f64(s.c_nonembed),
                fmt_f64(s.loss),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_frontier_csv<W: Write>(
    frontier: &[FrontierPoint],
    basis: Basis,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FRONTIER_HEADER)?;
    for p in frontier {
        w.write_record([
            basis.to_string(),
            fmt_f64(p.c),
            fmt_f64(p.loss_min),
            fmt_f64(p.n_opt),
            fmt_f64(p.d_opt),
            p.model_index.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct CurveRow {
    model_index: usize,
    n_nonembed: f64,
    n_total: f64,
    tokens: f64,
    c_total: f64,
    c_nonembed: f64,
    loss: f64,
}

/// Read a curves CSV back into per-model curves. Rows of one model must be
/// contiguous.
pub fn read_curves_csv<R: Read>(input: R) -> Result<Vec<TrainingCurve>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != CURVES_HEADER {
        return Err(Error::InvalidArgument(format!(
            "curves CSV header must be `{}`",
            CURVES_HEADER.join(",")
        )));
    }
    let mut curves: Vec<TrainingCurve> = Vec::new();
    for row in rdr.deserialize() {
        let row: CurveRow = row?;
        let sample = CurveSample {
            tokens: row.tokens,
            c_total: row.c_total,
            c_nonembed: row.c_nonembed,
            loss: row.loss,
        };
        match curves.last_mut() {
            Some(c) if c.model_index == row.model_index => c.samples.push(sample),
            _ => {
                if curves.iter().any(|c| c.model_index == row.model_index) {
                    return Err(Error::InvalidArgument(format!(
                        "rows of model {} are not contiguous",
                        row.model_index
                    )));
                }
                curves.push(TrainingCurve {
                    model_index: row.model_index,
                    n_nonembed: row.n_nonembed,
                    n_total: row.n_total,
                    samples: vec![sample],
                });
            }
        }
    }
    Ok(curves)
}

#[derive(Debug, Deserialize)]
struct FrontierRow {
    basis: Basis,
    c: f64,
    loss_min: f64,
    n_opt: f64,
    d_opt: f64,
    model_index: usize,
}

/// Read a frontier CSV. Returns the basis shared by all rows, or `None`
/// when the file has no rows.
pub fn read_frontier_csv<R: Read>(input: R) -> Result<(Option<Basis>, Vec<FrontierPoint>)> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != FRONTIER_HEADER {
        return Err(Error::InvalidArgument(format!(
            "frontier CSV header must be `{}`",
            FRONTIER_HEADER.join(",")
        )));
    }
    let mut basis = None;
    let mut points = Vec::new();
    for row in rdr.deserialize() {
        let row: FrontierRow = row?;
        match basis {
            None => basis = Some(row.basis),
            Some(b) if b != row.basis => {
                return Err(Error::InvalidArgument("frontier CSV mixes bases".into()))
            }
            _ => {}
        }
        points.push(FrontierPoint {
            c: row.c,
            loss_min: row.loss_min,
            n_opt: row.n_opt,
            d_opt: row.d_opt,
            model_index: row.model_index,
        });
    }
    Ok((basis, points))
}
