//! Scaling-law analysis toolkit.
//!
//! Counts transformer parameters and relates total to non-embedding counts,
//! evaluates the parametric loss surface `L(N, D) = N_c/N^α + D_c/D^β + E`
//! in total and non-embedding coordinates, derives compute-optimal
//! allocations and local scaling exponents in closed form, and simulates
//! training curves whose compute-efficient frontier can be fitted with
//! plain, offset-free and offset power laws.
//!
//! Every public type the CLI and benches need is re-exported at the crate
//! root.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod fitting;
pub mod frontier;
pub mod lossmodel;
pub mod params;
pub mod reproduce;

pub use analytic::{
    ce_of_optimal_ne, exponent_curve, exponent_sample, local_loss_exponent, local_param_exponent,
    loss_compute_exponent_total, optimal_ne, optimal_nt, transition_point,
    write_exponent_curve_csv, ExponentSample,
};
pub use error::{Error, Result};
pub use fitting::{
    fit_kaplan_form, fit_power_law, fit_power_law_with_fixed_offset, fit_power_law_with_offset,
    FitForm, FitReport, PowerLawFit,
};
pub use frontier::{
    extract_frontier, fit_loss_scaling, fit_param_scaling, frontier_is_monotone, kaplan_size_grid,
    read_curves_csv, read_frontier_csv, simulate_curves, write_curves_csv, write_frontier_csv,
    Basis, CurveSample, FrontierOptions, FrontierPoint, SizeGrid, TokenSchedule, TrainingCurve,
};
pub use lossmodel::{compute_flops, loss_nd, loss_ne_ce, loss_nt_ct, LossSpec};
pub use params::{
    bundled_chinchilla_configs, bundled_chinchilla_csv, count_params, fit_embed_map,
    nonembed_from_total, omega_from_shape, read_configs, read_configs_path, total_from_nonembed,
    EmbedMap, EmbedMapFit, ModelConfig, ModelShape, ParamSplit, CHINCHILLA_OMEGA,
};
pub use reproduce::{reproduce, HeadlineCheck, NamedSpec, ReproduceOptions, SpecName};
