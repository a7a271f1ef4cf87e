//! Global one-step unitary and single-walker evolution.
//!
//! One step sends the basis state `(x, c)` to `Σ_{j ∈ n_x} A^(x)_{c,j} (j, x)`
//! when `(x, c)` is physical. Unphysical pairs are completed with a
//! unit-amplitude permutation so the step is unitary on all `|G|²` pairs: on
//! undirected graphs `(x, c)` goes to `(c, x)`. On balanced directed graphs
//! the k-th unphysical coin slot of `x` goes to the k-th vertex outside `n_x`,
//! which reduces to the swap when the graph is undirected.
//!
//! The matrix has at most `max_x |n_x|` nonzeros per column and is stored in
//! compressed-row form, so long trajectories on large lines stay cheap.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coin::CoinAssignment;
use crate::error::{Result, WalkError};
use crate::graph::{BasisIndex, Graph};
use crate::linalg::{ensure_square, unitarity_deviation};
use crate::par::Execution;
use crate::{C64, NORM_TOL, UNITARY_TOL};

/// Nonzero count above which [`GlobalUnitary::apply`] goes data-parallel.
pub const PARALLEL_NNZ_THRESHOLD: usize = 1 << 16;

/// Sparse unitary acting on flat basis offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalUnitary {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl GlobalUnitary {
    /// Builds the one-step walk unitary `E = SC` for `g` and `coins`.
    pub fn build(g: &Graph, coins: &CoinAssignment) -> Result<Self> {
        coins.validate_for(g)?;
        let n = g.n_vertices();
        let off = |x: usize, c: usize| BasisIndex::new(x, c).offset(n);
        let mut triplets = Vec::with_capacity(g.physical_count() * 2 + g.dim());

        for x in 1..=n {
            let ins = g.in_coins(x);
            let outs = g.neighborhood(x);
            let coin = coins.coin(x);
            let spare_outs: Vec<usize> =
                (1..=n).filter(|j| outs.binary_search(j).is_err()).collect();
            let mut spare_rank = 0;
            for c in 1..=n {
                let col = off(x, c);
                match ins.binary_search(&c) {
                    Ok(r) => {
                        for (k, &j) in outs.iter().enumerate() {
                            let v = coin.get(r, k);
                            if v != C64::new(0.0, 0.0) {
                                triplets.push((off(j, x), col, v));
                            }
                        }
                    }
                    Err(_) => {
                        let j = spare_outs[spare_rank];
                        spare_rank += 1;
                        triplets.push((off(j, x), col, C64::new(1.0, 0.0)));
                    }
                }
            }
        }
        Ok(Self::from_triplets(g.dim(), triplets))
    }

    /// Wraps an arbitrary dense unitary, e.g. a beamsplitter or a product of
    /// walk steps.
    pub fn from_dense(m: &DMatrix<C64>) -> Result<Self> {
        ensure_square(m)?;
        let deviation = unitarity_deviation(m);
        if deviation.is_nan() || deviation >= UNITARY_TOL {
            return Err(WalkError::NonUnitary { deviation });
        }
        Ok(Self::from_dense_unchecked(m))
    }

    pub(crate) fn from_dense_unchecked(m: &DMatrix<C64>) -> Self {
        let zero = C64::new(0.0, 0.0);
        let triplets = (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .filter_map(|(r, c)| (m[(r, c)] != zero).then_some((r, c, m[(r, c)])))
            .collect();
        Self::from_triplets(m.nrows(), triplets)
    }

    pub(crate) fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        GlobalUnitary {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entry at 0-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.row(row)
            .find(|&(c, _)| c == col)
            .map_or(C64::new(0.0, 0.0), |(_, v)| v)
    }

    /// Nonzeros of one row as `(col, value)`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// `‖U†U − I‖_max`, computed from the sparse structure.
    pub fn unitarity_deviation(&self) -> f64 {
        let mut gram = std::collections::HashMap::new();
        for r in 0..self.dim {
            let entries: Vec<_> = self.row(r).collect();
            for &(a, va) in &entries {
                for &(b, vb) in &entries {
                    *gram.entry((a, b)).or_insert(C64::new(0.0, 0.0)) += va.conj() * vb;
                }
            }
        }
        let mut worst = 0.0f64;
        for (&(a, b), v) in &gram {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((v - target).norm());
        }
        let missing_diag = (0..self.dim).any(|i| !gram.contains_key(&(i, i)));
        if missing_diag {
            worst = worst.max(1.0);
        }
        worst
    }

    /// Sparse product `self · rhs`.
    pub fn compose(&self, rhs: &GlobalUnitary) -> Result<GlobalUnitary> {
        if self.dim != rhs.dim {
            return Err(WalkError::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    triplets.push((r, c, a * b));
                }
            }
        }
        Ok(Self::from_triplets(self.dim, triplets))
    }

    /// `out = U · input` on the calling thread.
    pub fn apply_seq(&self, input: &[C64], out: &mut [C64]) {
        self.apply_with(Execution::Sequential, input, out);
    }

    /// `out = U · input`, rows spread over the thread pool.
    #[cfg(feature = "parallel")]
    pub fn apply_par(&self, input: &[C64], out: &mut [C64]) {
        self.apply_with(Execution::Parallel, input, out);
    }

    /// `out = U · input`, parallel only for large matrices.
    pub fn apply(&self, input: &[C64], out: &mut [C64]) {
        let exec = if self.nnz() >= PARALLEL_NNZ_THRESHOLD {
            Execution::default()
        } else {
            Execution::Sequential
        };
        self.apply_with(exec, input, out);
    }

    pub fn apply_with(&self, exec: Execution, input: &[C64], out: &mut [C64]) {
        assert_eq!(input.len(), self.dim, "input dimension");
        assert_eq!(out.len(), self.dim, "output dimension");
        exec.fill(out, |r| self.row(r).map(|(c, v)| v * input[c]).sum());
    }
}

/// Single-walker amplitude vector over the flat `(position, coin)` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    amps: Vec<C64>,
}

impl WalkerState {
    /// Wraps amplitudes, rejecting vectors whose norm is off by more than
    /// [`NORM_TOL`].
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let s = WalkerState { amps };
        let norm = s.norm();
        if norm.is_nan() || (norm - 1.0).abs() > NORM_TOL {
            return Err(WalkError::NotNormalized { norm });
        }
        Ok(s)
    }

    pub(crate) fn from_raw(amps: Vec<C64>) -> Self {
        WalkerState { amps }
    }

    /// `e_offset` in a `dim`-dimensional space.
    pub fn basis(dim: usize, offset: usize) -> Result<Self> {
        if offset >= dim {
            return Err(WalkError::ModeOutOfRange {
                mode: offset + 1,
                n_modes: dim,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[offset] = C64::new(1.0, 0.0);
        Ok(WalkerState { amps })
    }

    /// Walker localized at `(x, c)`. Unphysical pairs are allowed but
    /// logged, since they never occur in a physical trajectory.
    pub fn localized(g: &Graph, x: usize, c: usize) -> Result<Self> {
        for v in [x, c] {
            if !g.contains(v) {
                return Err(WalkError::VertexOutOfRange {
                    index: v,
                    n_vertices: g.n_vertices(),
                });
            }
        }
        if !g.is_physical(x, c) {
            log::warn!("initial state ({x},{c}) is unphysical: {x} is not a neighbor of {c}");
        }
        Self::basis(g.dim(), g.flat_index(x, c) - 1)
    }

    /// Walker at the middle vertex with the default coin.
    pub fn middle(g: &Graph) -> Result<Self> {
        let x = g.middle();
        Self::localized(g, x, g.default_coin(x))
    }

    /// `(|x,c₁⟩ + i|x,c₂⟩)/√2` over the first two in-coins of `x`: the
    /// symmetric start of the Hadamard walk.
    pub fn symmetric(g: &Graph, x: usize) -> Result<Self> {
        if !g.contains(x) {
            return Err(WalkError::VertexOutOfRange {
                index: x,
                n_vertices: g.n_vertices(),
            });
        }
        let ins = g.in_coins(x);
        if ins.len() < 2 {
            return Err(WalkError::InvalidArgument(format!(
                "vertex {x} has fewer than two coin values"
            )));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(0.0, 0.0); g.dim()];
        amps[g.flat_index(x, ins[0]) - 1] = C64::new(s, 0.0);
        amps[g.flat_index(x, ins[1]) - 1] = C64::new(0.0, s);
        Ok(WalkerState { amps })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// `|G|` such that `dim = |G|²`.
    pub fn size(&self) -> Result<usize> {
        let d = (self.dim() as f64).sqrt().round() as usize;
        if d * d != self.dim() {
            return Err(WalkError::NotSquareDimension(self.dim()));
        }
        Ok(d)
    }

    pub fn amplitude(&self, x: usize, c: usize) -> Result<C64> {
        let d = self.size()?;
        Ok(self.amps[BasisIndex::new(x, c).offset(d)])
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &WalkerState) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|`, insensitive to global phase.
    pub fn fidelity(&self, other: &WalkerState) -> f64 {
        self.inner(other).norm()
    }

    pub(crate) fn require_normalized(&self, tol: f64) -> Result<()> {
        let norm = self.norm();
        if norm.is_nan() || (norm - 1.0).abs() > tol {
            return Err(WalkError::NotNormalized { norm });
        }
        Ok(())
    }
}

/// How to prepare the walker at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Preset(Preset),
    /// `(position, coin)`; a missing coin means [`Graph::default_coin`].
    Localized {
        position: usize,
        coin: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Localized at the middle vertex with the default coin.
    Middle,
    /// Symmetric coin superposition at the middle vertex.
    MiddleSymmetric,
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Preset(Preset::Middle)
    }
}

impl InitialState {
    pub fn prepare(&self, g: &Graph) -> Result<WalkerState> {
        match *self {
            InitialState::Preset(Preset::Middle) => WalkerState::middle(g),
            InitialState::Preset(Preset::MiddleSymmetric) => WalkerState::symmetric(g, g.middle()),
            InitialState::Localized { position, coin } => WalkerState::localized(
                g,
                position,
                coin.unwrap_or_else(|| g.default_coin(position)),
            ),
        }
    }

    /// Resolved `(position, coin)` for localized starts.
    pub fn basis_label(&self, g: &Graph) -> Option<BasisIndex> {
        match *self {
            InitialState::Preset(Preset::Middle) => {
                Some(BasisIndex::new(g.middle(), g.default_coin(g.middle())))
            }
            InitialState::Preset(Preset::MiddleSymmetric) => None,
            InitialState::Localized { position, coin } => Some(BasisIndex::new(
                position,
                coin.unwrap_or_else(|| g.default_coin(position)),
            )),
        }
    }
}

fn check_dims(u: &GlobalUnitary, s: &WalkerState) -> Result<()> {
    if u.dim() != s.dim() {
        return Err(WalkError::DimensionMismatch {
            expected: u.dim(),
            found: s.dim(),
        });
    }
    Ok(())
}

/// One time step, `α(t+1) = U α(t)`.
pub fn step(u: &GlobalUnitary, s: &WalkerState) -> Result<WalkerState> {
    check_dims(u, s)?;
    let mut out = vec![C64::new(0.0, 0.0); u.dim()];
    u.apply(&s.amps, &mut out);
    Ok(WalkerState { amps: out })
}

/// States at `t = 0..=t_max` by repeated application of `U`.
pub fn evolve_series(
    u: &GlobalUnitary,
    s0: &WalkerState,
    t_max: usize,
) -> Result<Vec<WalkerState>> {
    Ok(trajectory(u, s0)?.take(t_max + 1).collect())
}

/// Unbounded lazy trajectory starting with `s0` itself. Only one state is
/// alive at a time, so this is the way to run very long walks.
pub fn trajectory<'a>(u: &'a GlobalUnitary, s0: &WalkerState) -> Result<Trajectory<'a>> {
    check_dims(u, s0)?;
    Ok(Trajectory {
        u,
        next: s0.amps.clone(),
        scratch: vec![C64::new(0.0, 0.0); u.dim()],
    })
}

pub struct Trajectory<'a> {
    u: &'a GlobalUnitary,
    next: Vec<C64>,
    scratch: Vec<C64>,
}

impl Iterator for Trajectory<'_> {
    type Item = WalkerState;

    fn next(&mut self) -> Option<WalkerState> {
        let current = self.next.clone();
        self.u.apply(&current, &mut self.scratch);
        std::mem::swap(&mut self.next, &mut self.scratch);
        Some(WalkerState::from_raw(current))
    }
}
