//! Batch evaluation over `(|G|, δ)` grids of biased-Hadamard line walks.
//!
//! Grid points are independent, so every sweep takes an [`Execution`] and
//! runs either on the calling thread or across the rayon pool.

use crate::coin::{CoinAssignment, CoinMatrix};
use crate::entanglement::{EntanglementSeries, Metric};
use crate::error::Result;
use crate::evolution::{trajectory, GlobalUnitary, InitialState};
use crate::graph::Graph;
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub size: usize,
    pub delta: f64,
}

/// Cartesian product, sizes outermost.
pub fn grid(sizes: &[usize], deltas: &[f64]) -> Vec<SweepPoint> {
    sizes
        .iter()
        .flat_map(|&size| deltas.iter().map(move |&delta| SweepPoint { size, delta }))
        .collect()
}

/// Line graph and global unitary for one grid point.
pub fn line_walk(size: usize, delta: f64) -> Result<(Graph, GlobalUnitary)> {
    let g = Graph::line(size)?;
    let coins = CoinAssignment::uniform(&g, CoinMatrix::hadamard_biased(delta)?)?;
    let u = GlobalUnitary::build(&g, &coins)?;
    Ok((g, u))
}

/// `‖U†U − I‖_max` at every grid point.
pub fn unitarity_sweep(exec: Execution, points: &[SweepPoint]) -> Result<Vec<f64>> {
    exec.map(points, |p| {
        line_walk(p.size, p.delta).map(|(_, u)| u.unitarity_deviation())
    })
    .into_iter()
    .collect()
}

/// Entanglement series for `t = 0..=t_max` at every grid point. States are
/// streamed, so memory stays at one state per point.
pub fn entanglement_sweep(
    exec: Execution,
    points: &[SweepPoint],
    initial: InitialState,
    metric: Metric,
    t_max: usize,
) -> Result<Vec<EntanglementSeries>> {
    exec.map(points, |p| {
        let (g, u) = line_walk(p.size, p.delta)?;
        let s0 = initial.prepare(&g)?;
        let values = trajectory(&u, &s0)?
            .take(t_max + 1)
            .map(|s| metric.evaluate(&s))
            .collect::<Result<Vec<_>>>()?;
        Ok(EntanglementSeries {
            metric,
            values,
            max_reference: metric.balanced_ceiling(g.dim()),
        })
    })
    .into_iter()
    .collect()
}

/// Single-point convenience wrapper around [`entanglement_sweep`].
pub fn line_series(
    size: usize,
    delta: f64,
    initial: InitialState,
    metric: Metric,
    t_max: usize,
) -> Result<EntanglementSeries> {
    let mut out = entanglement_sweep(
        Execution::Sequential,
        &[SweepPoint { size, delta }],
        initial,
        metric,
        t_max,
    )?;
    Ok(out.remove(0))
}
