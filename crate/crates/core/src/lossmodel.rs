//! Parametric loss surface `L(N, D) = N_c/N^α + D_c/D^β + E` and its
//! compute-coordinate variants.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::params::EmbedMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub n_c: f64,
    pub d_c: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Irreducible loss in nats.
    pub e_irr: f64,
}

impl LossSpec {
    /// Constants as originally published with the Chinchilla study.
    pub const CHINCHILLA: LossSpec = LossSpec {
        n_c: 406.4,
        d_c: 410.7,
        alpha: 0.3392,
        beta: 0.2849,
        e_irr: 1.693,
    };

    /// Epoch AI re-fit of the same functional form.
    pub const EPOCH: LossSpec = LossSpec {
        n_c: 482.0,
        d_c: 2085.43,
        alpha: 0.3478,
        beta: 0.3658,
        e_irr: 1.817,
    };

    pub fn new(n_c: f64, d_c: f64, alpha: f64, beta: f64, e_irr: f64) -> Result<Self> {
        let spec = Self {
            n_c,
            d_c,
            alpha,
            beta,
            e_irr,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("n_c", self.n_c)?;
        require_positive("d_c", self.d_c)?;
        require_positive("alpha", self.alpha)?;
        require_positive("beta", self.beta)?;
        if !(self.e_irr.is_finite() && self.e_irr >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "e_irr must be ≥ 0, got {}",
                self.e_irr
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: LossSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Parameter term `N_c / N^α`.
    pub(crate) fn param_term(&self, n: f64) -> f64 {
        self.n_c / n.powf(self.alpha)
    }

    /// Data term `D_c / D^β`.
    pub(crate) fn data_term(&self, d: f64) -> f64 {
        self.d_c / d.powf(self.beta)
    }
}

/// `6·n·d` training FLOPs.
pub fn compute_flops(n: f64, d: f64) -> f64 {
    6.0 * n * d
}

pub fn loss_nd(n_total: f64, d: f64, spec: &LossSpec) -> Result<f64> {
    require_positive("n_total", n_total)?;
    require_positive("d", d)?;
    Ok(spec.param_term(n_total) + spec.data_term(d) + spec.e_irr)
}

/// Loss at fixed total compute, with `D = C_T / (6 N_T)`.
pub fn loss_nt_ct(n_total: f64, c_total: f64, spec: &LossSpec) -> Result<f64> {
    require_positive("n_total", n_total)?;
    require_positive("c_total", c_total)?;
    loss_nd(n_total, c_total / (6.0 * n_total), spec)
}

/// Loss in non-embedding coordinates. The data term uses
/// `D = C_∖E / (6 N_∖E)`; the parameter term goes through the embedding map.
pub fn loss_ne_ce(
    n_nonembed: f64,
    c_nonembed: f64,
    spec: &LossSpec,
    map: &EmbedMap,
) -> Result<f64> {
    map.require_cube_root()?;
    require_positive("n_nonembed", n_nonembed)?;
    require_positive("c_nonembed", c_nonembed)?;
    let n_total = n_nonembed + map.embed_of(n_nonembed);
    let d = c_nonembed / (6.0 * n_nonembed);
    Ok(spec.param_term(n_total) + spec.data_term(d) + spec.e_irr)
}
