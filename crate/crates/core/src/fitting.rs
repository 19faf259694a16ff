//! Power-law regression: plain log-log least squares, the offset-free
//! compute-loss form `L = (C/C_0)^{-γ}`, and the offset form
//! `L = (C/C_0)^{-γ} + E` fitted by profiling out `E`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::Basis;

const GOLDEN_MAX_ITER: usize = 200;
const GOLDEN_REL_TOL: f64 = 1e-10;

/// `y = prefactor · x^exponent (+ offset)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub prefactor: f64,
    pub exponent: f64,
    pub offset: Option<f64>,
    /// R² of the log-log regression (on `y − offset` when an offset is present).
    pub r_squared: f64,
    pub n_points: usize,
    /// Residual sum of squares in the original `y` units.
    pub rss: f64,
}

impl PowerLawFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.prefactor * x.powf(self.exponent) + self.offset.unwrap_or(0.0)
    }

    /// `C_0` in the `(x / C_0)^{exponent}` parameterisation.
    pub fn scale(&self) -> f64 {
        self.prefactor.powf(-1.0 / self.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitForm {
    Plain,
    Kaplan,
    Chinchilla,
}

impl std::str::FromStr for FitForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(FitForm::Plain),
            "kaplan" => Ok(FitForm::Kaplan),
            "chinchilla" => Ok(FitForm::Chinchilla),
            other => Err(Error::InvalidArgument(format!(
                "unknown fit form `{other}`"
            ))),
        }
    }
}

/// Serialised fit report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub form: FitForm,
    pub basis: Basis,
    pub prefactor: f64,
    pub exponent: f64,
    pub offset: Option<f64>,
    pub r_squared: f64,
    pub n_points: usize,
}

impl FitReport {
    pub fn new(form: FitForm, basis: Basis, fit: &PowerLawFit) -> Self {
        Self {
            form,
            basis,
            prefactor: fit.prefactor,
            exponent: fit.exponent,
            offset: fit.offset,
            r_squared: fit.r_squared,
            n_points: fit.n_points,
        }
    }
}

/// Ordinary least squares on `(ln x, ln y)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    check_points(points, 2)?;
    for &(x, y) in points {
        if !(x > 0.0 && x.is_finite() && y > 0.0 && y.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "power-law fit needs positive coordinates, got ({x}, {y})"
            )));
        }
    }
    log_linear(points, 0.0)
}

/// Offset-free compute-loss form; the reported exponent is `−γ`.
pub fn fit_kaplan_form(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    fit_power_law(points)
}

/// Power law on `(x, y − offset)` with the offset held fixed.
pub fn fit_power_law_with_fixed_offset(points: &[(f64, f64)], offset: f64) -> Result<PowerLawFit> {
    check_points(points, 2)?;
    if !(offset.is_finite() && offset >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "offset must be ≥ 0, got {offset}"
        )));
    }
    for &(x, y) in points {
        if !(x > 0.0 && x.is_finite() && y.is_finite() && y > offset) {
            return Err(Error::InvalidArgument(format!(
                "need x > 0 and y > offset={offset}, got ({x}, {y})"
            )));
        }
    }
    let mut fit = log_linear(points, offset)?;
    fit.offset = Some(offset);
    Ok(fit)
}

/// Fit `y = a·x^b + E` minimising squared residuals in `y`.
///
/// `E` is searched on `[0, min y)` by golden section over the profiled
/// residual; the inner problem is the closed-form log-log fit on `y − E`.
pub fn fit_power_law_with_offset(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    check_points(points, 3)?;
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in sorted.windows(2) {
        if !(w[1].1 < w[0].1) {
            return Err(Error::InvalidArgument(
                "offset fit needs y strictly decreasing in x".into(),
            ));
        }
    }
    let y_min = sorted.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if !(y_min > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "offset fit needs min(y) > 0, got {y_min}"
        )));
    }

    let profile = |e: f64| {
        fit_power_law_with_fixed_offset(points, e)
            .map(|f| f.rss)
            .unwrap_or(f64::INFINITY)
    };

    let tol = GOLDEN_REL_TOL * y_min;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, y_min);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (profile(c), profile(d));
    let mut iter = 0;
    while b - a > tol && iter < GOLDEN_MAX_ITER {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = profile(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = profile(d);
        }
        iter += 1;
    }
    let candidate = if fc <= fd { c } else { d };
    if y_min - candidate <= 2.0 * tol {
        return Err(Error::NoBracket(format!(
            "profiled residual decreases toward min(y)={y_min}; data do not follow a power law plus offset"
        )));
    }

    let at_zero = fit_power_law_with_fixed_offset(points, 0.0)?;
    let best = fit_power_law_with_fixed_offset(points, candidate)?;
    Ok(if at_zero.rss <= best.rss {
        at_zero
    } else {
        best
    })
}

fn check_points(points: &[(f64, f64)], need: usize) -> Result<()> {
    if points.len() < need {
        return Err(Error::NotEnoughPoints {
            need,
            got: points.len(),
            what: "points",
        });
    }
    let x0 = points[0].0;
    if points.iter().all(|p| p.0 == x0) {
        return Err(Error::Degenerate("all x values are equal".into()));
    }
    Ok(())
}

fn log_linear(points: &[(f64, f64)], offset: f64) -> Result<PowerLawFit> {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| (p.1 - offset).ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let prefactor = intercept.exp();
    let rss = points
        .iter()
        .map(|&(x, y)| (y - offset - prefactor * x.powf(slope)).powi(2))
        .sum();
    Ok(PowerLawFit {
        prefactor,
        exponent: slope,
        offset: None,
        r_squared,
        n_points: points.len(),
        rss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn exact_sqrt_law() {
        let pts: Vec<_> = (1..20)
            .map(|i| (i as f64, 3.0 * (i as f64).sqrt()))
            .collect();
        let f = fit_power_law(&pts).unwrap();
        assert!(rel(f.prefactor, 3.0) < 1e-13);
        assert!((f.exponent - 0.5).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert_eq!(f.offset, None);
    }

    #[test]
    fn two_point_line() {
        let f = fit_power_law(&[(1.0, 1.0), (10.0, 100.0)]).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            fit_power_law(&[(2.0, 1.0), (2.0, 3.0)]),
            Err(Error::Degenerate(_))
        ));
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, -3.0)]).is_err());
        assert!(fit_power_law(&[(0.0, 1.0), (2.0, 3.0)]).is_err());
        let err = fit_power_law(&[(1.0, 1.0)]).unwrap_err();
        assert_eq!(err.to_string(), "need ≥2 points, got 1");
        let err = fit_power_law_with_offset(&[]).unwrap_err();
        assert_eq!(err.to_string(), "need ≥3 points, got 0");
    }

    fn offset_data(c0: f64, gamma: f64, e: f64) -> Vec<(f64, f64)> {
        (0..60)
            .map(|i| {
                let c = 1e12 * 10f64.powf(i as f64 * 0.2);
                (c, (c / c0).powf(-gamma) + e)
            })
            .collect()
    }

    #[test]
    fn offset_fit_recovers_exact_model() {
        let f = fit_power_law_with_offset(&offset_data(1e9, 0.178, 1.817)).unwrap();
        assert!(rel(-f.exponent, 0.178) < 1e-6, "{f:?}");
        assert!(rel(f.offset.unwrap(), 1.817) < 1e-6);
        assert!(rel(f.scale(), 1e9) < 1e-6);
    }

    #[test]
    fn zero_offset_reproduces_plain_fit() {
        let pts = offset_data(1e9, 0.1, 0.5);
        let plain = fit_power_law(&pts).unwrap();
        let fixed = fit_power_law_with_fixed_offset(&pts, 0.0).unwrap();
        assert_eq!(plain.exponent, fixed.exponent);
        assert_eq!(plain.prefactor, fixed.prefactor);
        assert_eq!(plain.r_squared, fixed.r_squared);
        assert_eq!(fixed.offset, Some(0.0));
    }

    #[test]
    fn kaplan_form_recovers_offset_free_exponent() {
        let pts: Vec<_> = (0..30)
            .map(|i| {
                let c = 1e10 * 3f64.powi(i);
                (c, (c / 2.3e8).powf(-0.057))
            })
            .collect();
        let f = fit_kaplan_form(&pts).unwrap();
        assert!((f.exponent + 0.057).abs() < 1e-14);
        assert!(rel(f.scale(), 2.3e8) < 1e-9);
    }

    #[test]
    fn offset_fit_preconditions() {
        let up = [(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)];
        assert!(fit_power_law_with_offset(&up).is_err());
        let neg = [(1.0, 1.0), (2.0, 0.0), (3.0, -1.0)];
        assert!(fit_power_law_with_offset(&neg).is_err());
    }

    #[test]
    fn offset_fit_on_non_power_law_falls_back_or_flags() {
        let cases = [
            (0..20)
                .map(|i| (1.0 + i as f64, 1.0 + 1e-3 * (20 - i) as f64))
                .collect::<Vec<_>>(),
            (1..=20)
                .map(|i| (i as f64, 1.0 + (-(i as f64) / 3.0).exp()))
                .collect(),
            vec![
                (1.0, 10.0),
                (2.0, 1.0 + 3e-9),
                (3.0, 1.0 + 2e-9),
                (4.0, 1.0 + 1e-9),
            ],
        ];
        for pts in &cases {
            let zero = fit_power_law_with_fixed_offset(pts, 0.0).unwrap();
            match fit_power_law_with_offset(pts) {
                Ok(f) => assert!(f.rss <= zero.rss, "{f:?} vs {zero:?}"),
                Err(e) => assert!(matches!(e, Error::NoBracket(_)), "{e:?}"),
            }
        }
    }

    #[test]
    fn deterministic() {
        let pts = offset_data(3e10, 0.2, 1.0);
        let a = fit_power_law_with_offset(&pts).unwrap();
        let b = fit_power_law_with_offset(&pts).unwrap();
        assert_eq!(a.exponent.to_bits(), b.exponent.to_bits());
        assert_eq!(a.offset.unwrap().to_bits(), b.offset.unwrap().to_bits());
    }

    #[test]
    fn report_json_shape() {
        let f = fit_power_law(&[(1.0, 1.0), (10.0, 100.0)]).unwrap();
        let r = FitReport::new(FitForm::Plain, Basis::Nonembed, &f);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["form"], "plain");
        assert_eq!(v["basis"], "nonembed");
        assert!(v["offset"].is_null());
        assert_eq!(v["n_points"], 2);
    }

    proptest! {
        #[test]
        fn scale_equivariance(s in -5.0f64..5.0, b in -1.0f64..1.0, noise in 0.0f64..0.1) {
            let pts: Vec<_> = (1..15)
                .map(|i| {
                    let x = i as f64 * 7.0;
                    (x, 2.0 * x.powf(b) * (1.0 + noise * ((i * 37 % 11) as f64 / 11.0 - 0.5)))
                })
                .collect();
            let scale = 10f64.powf(s);
            let scaled: Vec<_> = pts.iter().map(|&(x, y)| (x * scale, y)).collect();
            let f = fit_power_law(&pts).unwrap();
            let g = fit_power_law(&scaled).unwrap();
            prop_assert!((f.exponent - g.exponent).abs() < 1e-10);
            prop_assert!(rel(g.prefactor, f.prefactor * scale.powf(-f.exponent)) < 1e-10);
        }

        #[test]
        fn offset_dominates_offset_free(gamma in 0.05f64..0.4, e in 0.0f64..3.0, wiggle in 0.0f64..0.02) {
            let pts: Vec<_> = (0..40)
                .map(|i| {
                    let c = 1e10 * 10f64.powf(i as f64 * 0.25);
                    let w = 1.0 + wiggle * ((i % 3) as f64 - 1.0) * 0.1;
                    (c, (c / 1e8).powf(-gamma) * w + e)
                })
                .collect();
            prop_assume!(pts.windows(2).all(|w| w[1].1 < w[0].1));
            let off = fit_power_law_with_offset(&pts).unwrap();
            let free = fit_kaplan_form(&pts).unwrap();
            prop_assert!(off.rss <= free.rss);
        }
    }
}
