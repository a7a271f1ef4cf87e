//! Local coin operators.
//!
//! The coin at vertex `x` is a `|n_x| × |n_x|` unitary `A^(x)`. Row index is
//! the position of the incoming coin value `c` in the ascending in-coin list
//! of `x`; column index is the position of the next vertex `j` in the
//! ascending neighborhood `n_x`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::graph::Graph;
use crate::linalg::{self, ensure_square, unitarity_deviation};
use crate::{C64, UNITARY_TOL};

/// A square unitary matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoinJson", into = "CoinJson")]
pub struct CoinMatrix {
    entries: DMatrix<C64>,
}

#[derive(Serialize, Deserialize)]
struct CoinJson(#[serde(with = "linalg::rows_serde")] DMatrix<C64>);

impl TryFrom<CoinJson> for CoinMatrix {
    type Error = WalkError;
    fn try_from(value: CoinJson) -> Result<Self> {
        CoinMatrix::new(value.0)
    }
}

impl From<CoinMatrix> for CoinJson {
    fn from(c: CoinMatrix) -> Self {
        CoinJson(c.entries)
    }
}

impl CoinMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        ensure_square(&entries)?;
        let deviation = unitarity_deviation(&entries);
        if deviation.is_nan() || deviation >= UNITARY_TOL {
            return Err(WalkError::NonUnitary { deviation });
        }
        Ok(CoinMatrix { entries })
    }

    /// Biased Hadamard coin `[[√δ, √(1−δ)], [√(1−δ), −√δ]]`.
    ///
    /// `δ = 1/2` is the balanced Hadamard coin, `δ = 1` is Pauli Z and
    /// `δ = 0` is Pauli X.
    pub fn hadamard_biased(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(WalkError::DeltaOutOfRange(delta));
        }
        let a = C64::new(delta.sqrt(), 0.0);
        let b = C64::new((1.0 - delta).sqrt(), 0.0);
        Ok(CoinMatrix {
            entries: DMatrix::from_row_slice(2, 2, &[a, b, b, -a]),
        })
    }

    pub fn identity(dim: usize) -> Self {
        CoinMatrix {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// `A[row, col]`, 0-based.
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }
}

/// One coin per vertex, validated against a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinAssignment {
    coins: Vec<CoinMatrix>,
}

impl CoinAssignment {
    /// The same coin at every vertex.
    pub fn uniform(g: &Graph, coin: CoinMatrix) -> Result<Self> {
        for x in 1..=g.n_vertices() {
            check_degree(g, x, coin.dim())?;
        }
        Ok(CoinAssignment {
            coins: vec![coin; g.n_vertices()],
        })
    }

    /// Explicit coin for every vertex (keys are 1-based vertices).
    pub fn per_vertex(g: &Graph, mut coins: BTreeMap<usize, CoinMatrix>) -> Result<Self> {
        if let Some(&index) = coins.keys().find(|&&x| !g.contains(x)) {
            return Err(WalkError::VertexOutOfRange {
                index,
                n_vertices: g.n_vertices(),
            });
        }
        let coins = (1..=g.n_vertices())
            .map(|x| {
                let coin = coins
                    .remove(&x)
                    .ok_or(WalkError::MissingCoin { vertex: x })?;
                check_degree(g, x, coin.dim())?;
                Ok(coin)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CoinAssignment { coins })
    }

    /// Like [`CoinAssignment::per_vertex`] but from raw matrices, so that a
    /// non-unitary entry is reported together with its vertex.
    pub fn from_matrices(g: &Graph, matrices: BTreeMap<usize, DMatrix<C64>>) -> Result<Self> {
        let coins = matrices
            .into_iter()
            .map(|(vertex, m)| {
                let coin = CoinMatrix::new(m).map_err(|e| match e {
                    WalkError::NonUnitary { deviation } => {
                        WalkError::NonUnitaryCoin { vertex, deviation }
                    }
                    WalkError::NonSquare { rows, .. } => WalkError::CoinDimension {
                        vertex,
                        expected: if g.contains(vertex) {
                            g.degree(vertex)
                        } else {
                            0
                        },
                        found: rows,
                    },
                    other => other,
                })?;
                Ok((vertex, coin))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Self::per_vertex(g, coins)
    }

    /// Biased Hadamard coin with a per-vertex bias `δ_x`.
    pub fn hadamard_per_vertex(g: &Graph, deltas: &[f64]) -> Result<Self> {
        if deltas.len() != g.n_vertices() {
            return Err(WalkError::DimensionMismatch {
                expected: g.n_vertices(),
                found: deltas.len(),
            });
        }
        let coins = deltas
            .iter()
            .enumerate()
            .map(|(i, &d)| Ok((i + 1, CoinMatrix::hadamard_biased(d)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Self::per_vertex(g, coins)
    }

    pub fn coin(&self, x: usize) -> &CoinMatrix {
        &self.coins[x - 1]
    }

    pub fn len(&self) -> usize {
        self.coins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coins.is_empty()
    }

    /// Checks that this assignment fits `g`.
    pub fn validate_for(&self, g: &Graph) -> Result<()> {
        if self.coins.len() != g.n_vertices() {
            return Err(WalkError::DimensionMismatch {
                expected: g.n_vertices(),
                found: self.coins.len(),
            });
        }
        for x in 1..=g.n_vertices() {
            check_degree(g, x, self.coin(x).dim())?;
        }
        Ok(())
    }
}

fn check_degree(g: &Graph, x: usize, dim: usize) -> Result<()> {
    if g.degree(x) != dim {
        return Err(WalkError::CoinDimension {
            vertex: x,
            expected: g.degree(x),
            found: dim,
        });
    }
    Ok(())
}
