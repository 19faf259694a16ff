//! Parameter accounting for decoder-only transformers.
//!
//! Non-embedding parameters follow the `12·l·d²` rule, embeddings are
//! `(v + h)·d` where `h` is only counted for learned positional embeddings.
//! The map `N_T = N_∖E + ω·N_∖E^δ` links the two counts.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// ω fitted on the Chinchilla model configurations.
pub const CHINCHILLA_OMEGA: f64 = 47491.0;

const BUNDLED_CHINCHILLA: &str = include_str!("../data/chinchilla_configs.csv");

/// Transformer sizing used for parameter counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelShape {
    /// Residual stream width.
    pub d: u64,
    /// Layer count.
    pub l: u64,
    /// Vocabulary size.
    pub v: u64,
    /// Context length, 0 unless positional embeddings are learned.
    pub h: u64,
}

impl ModelShape {
    pub fn new(d: u64, l: u64, v: u64, h: u64) -> Result<Self> {
        let shape = Self { d, l, v, h };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.l == 0 {
            return Err(Error::InvalidArgument(format!(
                "degenerate shape: d={} l={} (both must be ≥1)",
                self.d, self.l
            )));
        }
        Ok(())
    }

    /// Width-to-depth ratio `d / l`.
    pub fn aspect_ratio(&self) -> f64 {
        self.d as f64 / self.l as f64
    }
}

/// Embedding / non-embedding decomposition of a parameter count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSplit {
    pub n_total: f64,
    pub n_embed: f64,
    pub n_nonembed: f64,
}

impl ParamSplit {
    pub fn new(n_embed: f64, n_nonembed: f64) -> Result<Self> {
        if !(n_embed.is_finite() && n_embed >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "n_embed must be ≥ 0, got {n_embed}"
            )));
        }
        if !(n_nonembed.is_finite() && n_nonembed >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "n_nonembed must be ≥ 0, got {n_nonembed}"
            )));
        }
        Ok(Self {
            n_total: n_embed + n_nonembed,
            n_embed,
            n_nonembed,
        })
    }
}

/// The map `n_∖E ↦ n_∖E + ω·n_∖E^δ`.
///
/// `omega == 0` is accepted and means "no embedding correction" (identity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbedMap {
    pub omega: f64,
    pub delta: f64,
}

impl EmbedMap {
    pub fn new(omega: f64, delta: f64) -> Result<Self> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "omega must be ≥ 0, got {omega}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(Self { omega, delta })
    }

    /// Map with the cube-root exponent used by all closed-form analysis.
    pub fn cube_root(omega: f64) -> Result<Self> {
        Self::new(omega, 1.0 / 3.0)
    }

    pub fn identity() -> Self {
        Self {
            omega: 0.0,
            delta: 1.0 / 3.0,
        }
    }

    pub fn is_cube_root(&self) -> bool {
        (self.delta - 1.0 / 3.0).abs() < 1e-12
    }

    pub(crate) fn require_cube_root(&self) -> Result<()> {
        if self.is_cube_root() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "closed-form analysis requires delta = 1/3, got {}",
                self.delta
            )))
        }
    }

    /// `ω·n^δ` without validation; callers guarantee `n > 0`.
    pub(crate) fn embed_of(&self, n_nonembed: f64) -> f64 {
        if self.omega == 0.0 {
            0.0
        } else {
            self.omega * n_nonembed.powf(self.delta)
        }
    }
}

impl Default for EmbedMap {
    fn default() -> Self {
        Self {
            omega: CHINCHILLA_OMEGA,
            delta: 1.0 / 3.0,
        }
    }
}

/// Count parameters with the `12·l·d²` rule plus `(h + v)·d` embeddings.
pub fn count_params(shape: &ModelShape) -> Result<ParamSplit> {
    shape.validate()?;
    let n_nonembed = 12 * shape.l * shape.d * shape.d;
    let n_embed = (shape.h + shape.v) * shape.d;
    ParamSplit::new(n_embed as f64, n_nonembed as f64)
}

pub fn total_from_nonembed(n_nonembed: f64, map: &EmbedMap) -> Result<f64> {
    require_positive("n_nonembed", n_nonembed)?;
    Ok(n_nonembed + map.embed_of(n_nonembed))
}

/// Invert [`total_from_nonembed`] by bisection on `ln n_∖E`.
pub fn nonembed_from_total(n_total: f64, map: &EmbedMap) -> Result<f64> {
    require_positive("n_total", n_total)?;
    if map.omega == 0.0 {
        return Ok(n_total);
    }
    let f = |x: f64| x + map.embed_of(x) - n_total;

    let mut hi = n_total;
    let mut lo = (n_total / 2.0).min(1.0);
    // the root can sit far below 1 when ω ≫ n_total
    while f(lo) > 0.0 {
        lo *= 1e-3;
        if lo < f64::MIN_POSITIVE * 1e3 {
            return Err(Error::NoConvergence(format!(
                "could not bracket inverse of n_total={n_total}"
            )));
        }
    }

    let (mut log_lo, mut log_hi) = (lo.ln(), hi.ln());
    for _ in 0..400 {
        let log_mid = 0.5 * (log_lo + log_hi);
        let mid = log_mid.exp();
        if f(mid) > 0.0 {
            log_hi = log_mid;
            hi = mid;
        } else {
            log_lo = log_mid;
        }
        if log_hi - log_lo < 1e-13 {
            return Ok(0.5 * (log_lo.exp() + hi));
        }
    }
    Err(Error::NoConvergence(format!(
        "bisection for n_total={n_total} did not reach tolerance"
    )))
}

/// `ω = (v + h)·(A/12)^{1/3}`, the map coefficient implied by a fixed aspect ratio.
pub fn omega_from_shape(v: u64, h: u64, aspect_ratio: f64) -> Result<f64> {
    require_positive("aspect ratio", aspect_ratio)?;
    if v + h == 0 {
        return Err(Error::InvalidArgument("v + h must be > 0".into()));
    }
    Ok((v + h) as f64 * (aspect_ratio / 12.0).cbrt())
}

/// Result of [`fit_embed_map`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbedMapFit {
    pub map: EmbedMap,
    /// R² of `ln n_E ≈ ln ω + δ ln n_∖E`.
    pub r_squared: f64,
    /// Root-mean-square residual of `ln n_T`.
    pub rms_log_residual: f64,
    pub n_points: usize,
    pub iterations: usize,
}

/// Fit `(ω, δ)` by least squares on `ln n_T` against `ln(n_∖E + ω n_∖E^δ)`.
///
/// Starts from the log-log OLS of `n_E` on `n_∖E` (exact for noiseless
/// data) and refines with damped Gauss-Newton.
pub fn fit_embed_map(splits: &[ParamSplit]) -> Result<EmbedMapFit> {
    if splits.len() < 2 {
        return Err(Error::NotEnoughPoints {
            need: 2,
            got: splits.len(),
            what: "configurations",
        });
    }
    for s in splits {
        if !(s.n_embed > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "every configuration needs n_embed > 0, got {}",
                s.n_embed
            )));
        }
        require_positive("n_nonembed", s.n_nonembed)?;
    }
    let first = splits[0].n_nonembed;
    if splits.iter().all(|s| s.n_nonembed == first) {
        return Err(Error::Degenerate(
            "all configurations share the same n_nonembed".into(),
        ));
    }

    let lx: Vec<f64> = splits.iter().map(|s| s.n_nonembed.ln()).collect();
    let le: Vec<f64> = splits.iter().map(|s| s.n_embed.ln()).collect();
    let lt: Vec<f64> = splits.iter().map(|s| s.n_total.ln()).collect();

    let (slope, intercept) = ols(&lx, &le);
    let mut params = [intercept, slope.clamp(1e-3, 1.0 - 1e-3)];

    let residuals = |p: &[f64; 2]| -> Vec<f64> {
        lx.iter()
            .zip(&lt)
            .map(|(&x, &t)| ln_add_exp(x, p[0] + p[1] * x) - t)
            .collect()
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let mut r = residuals(&params);
    let mut current = cost(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < 500 && current > 1e-30 {
        iterations += 1;
        // J columns: ∂r/∂lnω = w, ∂r/∂δ = w·ln x with w = embed/total share
        let (mut h00, mut h01, mut h11, mut g0, mut g1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, &x) in lx.iter().enumerate() {
            let w = share(x, params[0] + params[1] * x);
            let j0 = w;
            let j1 = w * x;
            h00 += j0 * j0;
            h01 += j0 * j1;
            h11 += j1 * j1;
            g0 += j0 * r[i];
            g1 += j1 * r[i];
        }
        let mut accepted = false;
        while lambda < 1e12 {
            let a00 = h00 * (1.0 + lambda);
            let a11 = h11 * (1.0 + lambda);
            let det = a00 * a11 - h01 * h01;
            if det <= 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let s0 = -(a11 * g0 - h01 * g1) / det;
            let s1 = -(a00 * g1 - h01 * g0) / det;
            let trial = [params[0] + s0, params[1] + s1];
            if trial[1] <= 0.0 || trial[1] >= 1.0 {
                lambda *= 10.0;
                continue;
            }
            let tr = residuals(&trial);
            let tc = cost(&tr);
            if tc <= current {
                let small = s0.abs() <= 1e-15 * (1.0 + params[0].abs())
                    && s1.abs() <= 1e-15 * (1.0 + params[1].abs());
                params = trial;
                r = tr;
                let improvement = current - tc;
                current = tc;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = !small && improvement > 1e-32 * (1.0 + current);
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }

    let map = EmbedMap::new(params[0].exp(), params[1])?;
    let mean = le.iter().sum::<f64>() / le.len() as f64;
    let sst: f64 = le.iter().map(|v| (v - mean).powi(2)).sum();
    let ssr: f64 = lx
        .iter()
        .zip(&le)
        .map(|(&x, &e)| (e - params[0] - params[1] * x).powi(2))
        .sum();
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else if ssr == 0.0 {
        1.0
    } else {
        0.0
    };

    Ok(EmbedMapFit {
        map,
        r_squared,
        rms_log_residual: (current / splits.len() as f64).sqrt(),
        n_points: splits.len(),
        iterations,
    })
}

/// `ln(e^a + e^b)`.
fn ln_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `e^b / (e^a + e^b)`.
fn share(a: f64, b: f64) -> f64 {
    1.0 / (1.0 + (a - b).exp())
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// One row of a model-configuration CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    pub d_model: u64,
    pub n_layers: u64,
    pub vocab: u64,
    pub context_learned: u64,
    /// Overrides the `12·l·d²` count when present.
    #[serde(default)]
    pub n_nonembed: Option<f64>,
}

impl ModelConfig {
    pub fn shape(&self) -> Result<ModelShape> {
        ModelShape::new(
            self.d_model,
            self.n_layers,
            self.vocab,
            self.context_learned,
        )
    }

    pub fn split(&self) -> Result<ParamSplit> {
        let counted = count_params(&self.shape()?)?;
        match self.n_nonembed {
            Some(n) => ParamSplit::new(counted.n_embed, n),
            None => Ok(counted),
        }
    }
}

/// Read configurations with header `name,d_model,n_layers,vocab,context_learned[,n_nonembed]`.
pub fn read_configs<R: Read>(reader: R) -> Result<Vec<ModelConfig>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let cfg: ModelConfig = row?;
        cfg.shape()?;
        out.push(cfg);
    }
    Ok(out)
}

pub fn read_configs_path(path: impl AsRef<Path>) -> Result<Vec<ModelConfig>> {
    read_configs(std::fs::File::open(path)?)
}

/// Chinchilla model configurations (50 models, 44M to 16B total parameters).
///
/// `n_nonembed` is the reported total minus `32000·d`; context length is
/// excluded since those models use fixed positional encodings.
pub fn bundled_chinchilla_configs() -> Vec<ModelConfig> {
    read_configs(BUNDLED_CHINCHILLA.as_bytes()).expect("bundled dataset is well-formed")
}

pub fn bundled_chinchilla_csv() -> &'static str {
    BUNDLED_CHINCHILLA
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn count_zero_vocab() {
        let s = count_params(&ModelShape::new(100, 2, 0, 0).unwrap()).unwrap();
        assert_eq!(s.n_nonembed, 240000.0);
        assert_eq!(s.n_embed, 0.0);
        assert_eq!(s.n_total, 240000.0);
    }

    #[test]
    fn count_with_vocab() {
        let s = count_params(&ModelShape::new(512, 8, 32000, 0).unwrap()).unwrap();
        assert_eq!(s.n_embed, 16384000.0);
        assert_eq!(s.n_nonembed, 25165824.0);
        assert_eq!(s.n_total, s.n_embed + s.n_nonembed);
    }

    #[test]
    fn count_learned_positions() {
        let s = count_params(&ModelShape::new(640, 16, 32000, 2048).unwrap()).unwrap();
        assert_eq!(s.n_embed, 21790720.0);
    }

    #[test]
    fn degenerate_shapes_rejected() {
        assert!(ModelShape::new(0, 2, 10, 0).is_err());
        assert!(ModelShape::new(4, 0, 10, 0).is_err());
        let raw = ModelShape {
            d: 0,
            l: 1,
            v: 1,
            h: 0,
        };
        assert!(count_params(&raw).is_err());
    }

    #[test]
    fn aspect_ratio() {
        let s = ModelShape::new(512, 8, 0, 0).unwrap();
        assert_eq!(s.aspect_ratio(), 64.0);
    }

    #[test]
    fn identity_map() {
        assert_eq!(
            total_from_nonembed(1e6, &EmbedMap::identity()).unwrap(),
            1e6
        );
        assert_eq!(
            nonembed_from_total(1e6, &EmbedMap::identity()).unwrap(),
            1e6
        );
    }

    #[test]
    fn even_split_at_omega_three_halves() {
        let m = EmbedMap::default();
        let x = m.omega.powf(1.5);
        let t = total_from_nonembed(x, &m).unwrap();
        assert!(rel(t, 2.0 * x) < 1e-14);
    }

    #[test]
    fn direct_evaluation() {
        // 1e7 + 47491·(1e7)^{1/3}, (1e7)^{1/3} = 215.44346900318837
        let t = total_from_nonembed(1e7, &EmbedMap::default()).unwrap();
        let expected = 1e7 + 47491.0 * 215.443_469_003_188_37;
        assert!(rel(t, expected) < 1e-14);
        assert!(rel(t, 20_231_625.786_430_42) < 1e-14);
        assert!(rel(t, 2.023e7) < 1e-3);
    }

    #[test]
    fn rejects_non_positive() {
        let m = EmbedMap::default();
        assert!(total_from_nonembed(0.0, &m).is_err());
        assert!(total_from_nonembed(-1.0, &m).is_err());
        assert!(nonembed_from_total(0.0, &m).is_err());
        assert!(nonembed_from_total(f64::NAN, &m).is_err());
    }

    #[test]
    fn map_validation() {
        assert!(EmbedMap::new(-1.0, 0.3).is_err());
        assert!(EmbedMap::new(1.0, 0.0).is_err());
        assert!(EmbedMap::new(1.0, 1.0).is_err());
        assert!(EmbedMap::new(0.0, 0.5).is_ok());
        assert!(EmbedMap::default().is_cube_root());
        assert!(!EmbedMap::new(1.0, 0.34).unwrap().is_cube_root());
    }

    #[test]
    fn inverse_round_trip() {
        let m = EmbedMap::default();
        for x in [1e3, 1e6, 1e9] {
            let back = nonembed_from_total(total_from_nonembed(x, &m).unwrap(), &m).unwrap();
            assert!(rel(back, x) < 1e-8, "{x} -> {back}");
        }
    }

    #[test]
    fn inverse_at_transition() {
        let m = EmbedMap::default();
        let x = m.omega.powf(1.5);
        let n = nonembed_from_total(2.0 * x, &m).unwrap();
        assert!(rel(n, x) < 1e-10);
        assert!(rel(n, 1.035e7) < 1e-3);
    }

    #[test]
    fn inverse_matches_reference_bisection() {
        // reference: plain bisection on [0, n_total] to 1e-14 relative
        let m = EmbedMap::default();
        let target = 1.58e9;
        let (mut lo, mut hi) = (0.0f64, target);
        while (hi - lo) / hi > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if mid + 47491.0 * mid.cbrt() > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let n = nonembed_from_total(target, &m).unwrap();
        assert!(rel(n, hi) < 1e-10);
        assert!(rel(n, 1.525e9) < 2e-3);
    }

    #[test]
    fn inverse_far_below_one() {
        // root near (100/47491)^3 ≈ 9.3e-9
        let m = EmbedMap::default();
        let n = nonembed_from_total(100.0, &m).unwrap();
        let t = total_from_nonembed(n, &m).unwrap();
        assert!(rel(t, 100.0) < 1e-10);
        assert!(n < 1e-8);
    }

    #[test]
    fn omega_from_shape_values() {
        assert!(rel(omega_from_shape(12, 0, 12.0).unwrap(), 12.0) < 1e-15);
        let w = omega_from_shape(32000, 0, 39.2).unwrap();
        assert!(rel(w, 4.748e4) < 1e-3);
        let wh = omega_from_shape(32000, 2048, 39.2).unwrap();
        assert!(rel(wh, w * 34048.0 / 32000.0) < 1e-14);
        assert!(rel(wh, 5.05e4) < 2e-3);
        assert!(omega_from_shape(32000, 0, 0.0).is_err());
        assert!(omega_from_shape(32000, 0, -3.0).is_err());
        assert!(omega_from_shape(0, 0, 3.0).is_err());
    }

    fn synthetic(omega: f64, delta: f64) -> Vec<ParamSplit> {
        (0..12)
            .map(|i| {
                let x = 1e5 * 3f64.powi(i);
                ParamSplit::new(omega * x.powf(delta), x).unwrap()
            })
            .collect()
    }

    #[test]
    fn fit_recovers_exact_map() {
        let fit = fit_embed_map(&synthetic(1000.0, 1.0 / 3.0)).unwrap();
        assert!(rel(fit.map.omega, 1000.0) < 1e-10);
        assert!((fit.map.delta - 1.0 / 3.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let one = synthetic(1000.0, 0.3)[..1].to_vec();
        let err = fit_embed_map(&one).unwrap_err();
        assert_eq!(err.to_string(), "need ≥2 configurations, got 1");
        let zero = vec![
            ParamSplit::new(0.0, 10.0).unwrap(),
            ParamSplit::new(1.0, 20.0).unwrap(),
        ];
        assert!(fit_embed_map(&zero).is_err());
        let same = vec![
            ParamSplit::new(5.0, 10.0).unwrap(),
            ParamSplit::new(6.0, 10.0).unwrap(),
        ];
        assert!(matches!(fit_embed_map(&same), Err(Error::Degenerate(_))));
    }

    #[test]
    fn bundled_dataset_fit() {
        let splits: Vec<_> = bundled_chinchilla_configs()
            .iter()
            .map(|c| c.split().unwrap())
            .collect();
        assert_eq!(splits.len(), 50);
        let fit = fit_embed_map(&splits).unwrap();
        assert!(rel(fit.map.omega, 47491.0) < 0.02, "{:?}", fit);
        assert!((fit.map.delta - 0.34).abs() < 0.01, "{:?}", fit);
        let closed = omega_from_shape(32000, 0, 39.2).unwrap();
        assert!(rel(closed, fit.map.omega) < 0.005);
    }

    #[test]
    fn csv_without_nonembed_column_uses_shape() {
        let csv = "name,d_model,n_layers,vocab,context_learned\na,512,8,32000,0\n";
        let cfgs = read_configs(csv.as_bytes()).unwrap();
        assert_eq!(cfgs[0].n_nonembed, None);
        assert_eq!(cfgs[0].split().unwrap().n_nonembed, 25165824.0);
    }

    #[test]
    fn csv_with_empty_nonembed_cell() {
        let csv = "name,d_model,n_layers,vocab,context_learned,n_nonembed\na,512,8,32000,0,\nb,512,8,32000,0,123\n";
        let cfgs = read_configs(csv.as_bytes()).unwrap();
        assert_eq!(cfgs[0].split().unwrap().n_nonembed, 25165824.0);
        assert_eq!(cfgs[1].split().unwrap().n_nonembed, 123.0);
    }

    #[test]
    fn csv_rejects_degenerate_row() {
        let csv = "name,d_model,n_layers,vocab,context_learned\na,0,8,32000,0\n";
        assert!(read_configs(csv.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn map_strictly_increasing(a in 2.0f64..12.0, b in 2.0f64..12.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let (x, y) = (10f64.powf(a.min(b)), 10f64.powf(a.max(b)));
            let m = EmbedMap::default();
            prop_assert!(total_from_nonembed(x, &m).unwrap() < total_from_nonembed(y, &m).unwrap());
        }

        #[test]
        fn inverse_is_identity(e in 0.0f64..13.0, omega in 1.0f64..1e6) {
            let m = EmbedMap::cube_root(omega).unwrap();
            let x = 10f64.powf(e);
            let back = nonembed_from_total(total_from_nonembed(x, &m).unwrap(), &m).unwrap();
            prop_assert!(rel(back, x) < 1e-8);
        }

        #[test]
        fn fit_round_trip(omega in 10.0f64..1e5, delta in 0.1f64..0.9) {
            let fit = fit_embed_map(&synthetic(omega, delta)).unwrap();
            prop_assert!(rel(fit.map.omega, omega) < 1e-9);
            prop_assert!((fit.map.delta - delta).abs() < 1e-10);
        }
    }

    #[test]
    fn ratio_limit() {
        let m = EmbedMap::default();
        let x = 1e13;
        assert!(total_from_nonembed(x, &m).unwrap() / x < 1.001);
    }
}
