//! Walk topologies and the `(position, coin)` basis.
//!
//! A [`Graph`] stores, for every vertex `x`, its ordered out-neighborhood
//! `n_x` and the derived in-coin list `{c : x ∈ n_c}`. A walker may sit at
//! `(x, c)` after a step exactly when `x ∈ n_c`; such pairs are called
//! physical. The state space is the dense completion over all `|G|²` pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};

/// Bounded walk topology. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    neighborhoods: Vec<Vec<usize>>,
    in_coins: Vec<Vec<usize>>,
}

/// Wire form `{"n_vertices": int, "neighborhoods": [[int, ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub n_vertices: usize,
    pub neighborhoods: Vec<Vec<usize>>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = WalkError;

    fn try_from(value: GraphJson) -> Result<Self> {
        if value.n_vertices != value.neighborhoods.len() {
            return Err(WalkError::VertexCountMismatch {
                declared: value.n_vertices,
                found: value.neighborhoods.len(),
            });
        }
        Graph::from_neighborhoods(value.neighborhoods)
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson {
            n_vertices: g.n_vertices(),
            neighborhoods: g.neighborhoods,
        }
    }
}

/// A `(position, coin)` basis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisIndex {
    pub position: usize,
    pub coin: usize,
}

impl BasisIndex {
    pub fn new(position: usize, coin: usize) -> Self {
        BasisIndex { position, coin }
    }

    /// 1-based flat index `(x-1)·d + c`.
    pub fn flat(self, d: usize) -> usize {
        (self.position - 1) * d + self.coin
    }

    /// 0-based vector offset, `flat − 1`.
    pub fn offset(self, d: usize) -> usize {
        self.flat(d) - 1
    }

    /// Inverse of [`BasisIndex::flat`].
    pub fn from_flat(flat: usize, d: usize) -> Self {
        debug_assert!(flat >= 1 && d >= 1);
        BasisIndex {
            position: (flat - 1) / d + 1,
            coin: (flat - 1) % d + 1,
        }
    }

    pub fn from_offset(offset: usize, d: usize) -> Self {
        Self::from_flat(offset + 1, d)
    }
}

impl Graph {
    /// Path `1–2–…–n` with a self-loop at each end (reflecting boundaries).
    ///
    /// Every vertex has out-degree 2: `n_1 = {1,2}`, `n_n = {n−1,n}` and
    /// `n_x = {x−1,x+1}` in the interior.
    pub fn line(n: usize) -> Result<Graph> {
        if n < 2 {
            return Err(WalkError::InvalidSize(n));
        }
        let neighborhoods = (1..=n)
            .map(|x| match x {
                1 => vec![1, 2],
                _ if x == n => vec![n - 1, n],
                _ => vec![x - 1, x + 1],
            })
            .collect();
        Graph::from_neighborhoods(neighborhoods)
    }

    /// Builds a graph from explicit out-neighborhoods (1-based, vertex `x` at
    /// position `x−1`). Lists are sorted into canonical ascending order.
    ///
    /// Directed graphs are accepted only when balanced: every vertex must be
    /// reached from exactly as many vertices as it has out-neighbors.
    pub fn from_neighborhoods(mut neighborhoods: Vec<Vec<usize>>) -> Result<Graph> {
        let n = neighborhoods.len();
        if n == 0 {
            return Err(WalkError::EmptyGraph);
        }
        for (i, nb) in neighborhoods.iter_mut().enumerate() {
            let vertex = i + 1;
            if nb.is_empty() {
                return Err(WalkError::EmptyNeighborhood { vertex });
            }
            if let Some(&index) = nb.iter().find(|&&j| j == 0 || j > n) {
                return Err(WalkError::VertexOutOfRange {
                    index,
                    n_vertices: n,
                });
            }
            nb.sort_unstable();
            if let Some(w) = nb.windows(2).find(|w| w[0] == w[1]) {
                return Err(WalkError::DuplicateNeighbor {
                    vertex,
                    neighbor: w[0],
                });
            }
        }

        let mut in_coins = vec![Vec::new(); n];
        for (i, nb) in neighborhoods.iter().enumerate() {
            for &x in nb {
                in_coins[x - 1].push(i + 1);
            }
        }
        // in_coins are pushed in ascending c, so already canonical.
        for (i, (ins, outs)) in in_coins.iter().zip(&neighborhoods).enumerate() {
            if ins.len() != outs.len() {
                return Err(WalkError::UnbalancedGraph {
                    vertex: i + 1,
                    in_count: ins.len(),
                    out_degree: outs.len(),
                });
            }
        }

        Ok(Graph {
            neighborhoods,
            in_coins,
        })
    }

    /// `|G|`.
    pub fn n_vertices(&self) -> usize {
        self.neighborhoods.len()
    }

    /// Dimension of the walker state space, `|G|²`.
    pub fn dim(&self) -> usize {
        self.n_vertices() * self.n_vertices()
    }

    /// Ordered out-neighborhood `n_x`.
    pub fn neighborhood(&self, x: usize) -> &[usize] {
        &self.neighborhoods[x - 1]
    }

    pub fn neighborhoods(&self) -> &[Vec<usize>] {
        &self.neighborhoods
    }

    /// Ascending `{c : x ∈ n_c}`: the coin values a walker at `x` can carry.
    pub fn in_coins(&self, x: usize) -> &[usize] {
        &self.in_coins[x - 1]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.neighborhoods[x - 1].len()
    }

    pub fn contains(&self, x: usize) -> bool {
        (1..=self.n_vertices()).contains(&x)
    }

    /// True iff the walker can arrive at `x` from `c`, i.e. `x ∈ n_c`.
    /// Out-of-range labels are never physical.
    pub fn is_physical(&self, x: usize, c: usize) -> bool {
        self.contains(x) && self.contains(c) && self.neighborhood(c).binary_search(&x).is_ok()
    }

    /// Number of physical `(x, c)` pairs, `Σ_x |n_x|`.
    pub fn physical_count(&self) -> usize {
        self.neighborhoods.iter().map(Vec::len).sum()
    }

    /// 1-based flat index of `(x, c)`.
    pub fn flat_index(&self, x: usize, c: usize) -> usize {
        BasisIndex::new(x, c).flat(self.n_vertices())
    }

    pub fn basis(&self, flat: usize) -> BasisIndex {
        BasisIndex::from_flat(flat, self.n_vertices())
    }

    /// The conventional middle vertex `⌈|G|/2⌉`.
    pub fn middle(&self) -> usize {
        self.n_vertices().div_ceil(2)
    }

    /// Default coin for a walker started at `x`: its left neighbor `x−1`,
    /// or `1` at the left end.
    pub fn default_coin(&self, x: usize) -> usize {
        if x > 1 {
            x - 1
        } else {
            1
        }
    }
}
