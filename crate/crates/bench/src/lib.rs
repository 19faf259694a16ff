//! Shared fixtures for the benchmarks in `benches/`.

use scalelab_core::{
    extract_frontier, kaplan_size_grid, simulate_curves, Basis, EmbedMap, FrontierOptions,
    FrontierPoint, LossSpec, TokenSchedule, TrainingCurve,
};

/// Default-schedule curves on the Kaplan grid.
pub fn default_curves(spec: &LossSpec) -> Vec<TrainingCurve> {
    simulate_curves(
        &kaplan_size_grid(),
        spec,
        &EmbedMap::default(),
        &TokenSchedule::default(),
    )
    .expect("default configuration is valid")
}

pub fn default_frontier(spec: &LossSpec, basis: Basis) -> Vec<FrontierPoint> {
    extract_frontier(&default_curves(spec), &FrontierOptions::with_basis(basis))
        .expect("default configuration is valid")
}

/// `(c, loss_min)` pairs of a frontier.
pub fn loss_points(frontier: &[FrontierPoint]) -> Vec<(f64, f64)> {
    frontier.iter().map(|p| (p.c, p.loss_min)).collect()
}
