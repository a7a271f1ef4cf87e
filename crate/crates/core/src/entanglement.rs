//! Entanglement metrics for single-walker states.
//!
//! The walker is a single excitation spread over `N = |G|²` modes, i.e. a
//! (biased) W-state. Two metrics are provided: the Shannon entropy of the
//! basis distribution and the Meyer-Wallach measure over mode subsystems.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::evolution::WalkerState;
use crate::par::Execution;

/// Norm deviation above which a metric refuses its input.
pub const METRIC_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Shannon,
    MeyerWallach,
}

impl Metric {
    pub fn evaluate(self, s: &WalkerState) -> Result<f64> {
        match self {
            Metric::Shannon => shannon_entropy(s),
            Metric::MeyerWallach => meyer_wallach_single(s),
        }
    }

    /// Value of the metric on a balanced W-state over `n_modes` modes.
    pub fn balanced_ceiling(self, n_modes: usize) -> f64 {
        let n = n_modes as f64;
        match self {
            Metric::Shannon => n.log2(),
            Metric::MeyerWallach => 2.0 * (n - 1.0) / (n * n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Shannon => "shannon",
            Metric::MeyerWallach => "meyer_wallach",
        }
    }
}

/// `−Σ p log₂ p` over all `|G|²` basis probabilities, in bits.
///
/// Rounding can push a lone probability just above 1; the resulting
/// `−1e-16`-sized values are reported as 0.
pub fn shannon_entropy(s: &WalkerState) -> Result<f64> {
    s.require_normalized(METRIC_NORM_TOL)?;
    let e: f64 = s
        .amplitudes()
        .iter()
        .map(|a| a.norm_sqr())
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    Ok(if e > 0.0 { e } else { 0.0 })
}

/// Meyer-Wallach measure of a single excitation over `N` modes.
///
/// Each mode's reduced state is `diag(1 − p_i, p_i)`, so the purity sum
/// collapses to `E = (2/N) Σ p_i (1 − p_i)`.
pub fn meyer_wallach_single(s: &WalkerState) -> Result<f64> {
    s.require_normalized(METRIC_NORM_TOL)?;
    let n = s.dim() as f64;
    let sum: f64 = s
        .amplitudes()
        .iter()
        .map(|a| a.norm_sqr())
        .map(|p| p * (1.0 - p))
        .sum();
    Ok(2.0 * sum / n)
}

/// Per-position probability `Σ_c |α_{xc}|²`, indexed by `x − 1`.
pub fn position_marginal(s: &WalkerState) -> Result<Vec<f64>> {
    let d = s.size()?;
    Ok(s.amplitudes()
        .chunks(d)
        .map(|bundle| bundle.iter().map(|a| a.norm_sqr()).sum())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementSeries {
    pub metric: Metric,
    pub values: Vec<f64>,
    /// Metric value of the balanced W-state over the full basis.
    pub max_reference: f64,
}

/// Evaluates `metric` at every state of a trajectory.
pub fn series(metric: Metric, states: &[WalkerState]) -> Result<EntanglementSeries> {
    series_with(Execution::default(), metric, states)
}

pub fn series_with(
    exec: Execution,
    metric: Metric,
    states: &[WalkerState],
) -> Result<EntanglementSeries> {
    let first = states
        .first()
        .ok_or_else(|| WalkError::InvalidArgument("empty state list".into()))?;
    let values = exec
        .map(states, |s| metric.evaluate(s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(EntanglementSeries {
        metric,
        values,
        max_reference: metric.balanced_ceiling(first.dim()),
    })
}
