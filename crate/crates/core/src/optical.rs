//! Linear-optical realization of a walk step.
//!
//! Each basis state `(x, c)` becomes spatial mode `n = (x−1)·d + c` with
//! `d = |G|`. Modes `(x−1)d+1 ..= xd` form the bundle of position `x`. One
//! step is a coin layer, one unitary block per bundle, followed by a fixed
//! mode permutation `(x, j) -> (j, x)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coin::CoinAssignment;
use crate::error::{Result, WalkError};
use crate::evolution::GlobalUnitary;
use crate::graph::{BasisIndex, Graph};
use crate::linalg::{self, unitarity_deviation};
use crate::{C64, UNITARY_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    /// 1-based modes, in block row/column order.
    pub modes: Vec<usize>,
    #[serde(with = "linalg::rows_serde")]
    pub matrix: DMatrix<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Layer {
    Coin {
        bundles: Vec<Bundle>,
    },
    /// `map[k−1]` is the output mode of input mode `k`.
    Permutation {
        map: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitJson", into = "CircuitJson")]
pub struct OpticalCircuit {
    n_modes: usize,
    layers: Vec<Layer>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    n_modes: usize,
    layers: Vec<Layer>,
}

impl TryFrom<CircuitJson> for OpticalCircuit {
    type Error = WalkError;
    fn try_from(v: CircuitJson) -> Result<Self> {
        OpticalCircuit::new(v.n_modes, v.layers)
    }
}

impl From<OpticalCircuit> for CircuitJson {
    fn from(c: OpticalCircuit) -> Self {
        CircuitJson {
            n_modes: c.n_modes,
            layers: c.layers,
        }
    }
}

impl OpticalCircuit {
    /// Validates every layer: coin blocks unitary on disjoint in-range modes,
    /// permutations bijective.
    pub fn new(n_modes: usize, layers: Vec<Layer>) -> Result<Self> {
        for (li, layer) in layers.iter().enumerate() {
            match layer {
                Layer::Coin { bundles } => {
                    let mut used = vec![false; n_modes];
                    for b in bundles {
                        let k = b.modes.len();
                        if b.matrix.shape() != (k, k) {
                            return Err(WalkError::InvalidCircuit(format!(
                                "layer {li}: block of shape {:?} on {k} modes",
                                b.matrix.shape()
                            )));
                        }
                        for &m in &b.modes {
                            if m == 0 || m > n_modes || std::mem::replace(&mut used[m - 1], true) {
                                return Err(WalkError::InvalidCircuit(format!(
                                    "layer {li}: mode {m} out of range or reused"
                                )));
                            }
                        }
                        let deviation = unitarity_deviation(&b.matrix);
                        if deviation.is_nan() || deviation >= UNITARY_TOL {
                            return Err(WalkError::InvalidCircuit(format!(
                                "layer {li}: block on modes {:?} is not unitary (deviation {deviation:e})",
                                b.modes
                            )));
                        }
                    }
                }
                Layer::Permutation { map } => {
                    let mut hit = vec![false; n_modes];
                    let ok = map.len() == n_modes
                        && map.iter().all(|&m| {
                            m >= 1 && m <= n_modes && !std::mem::replace(&mut hit[m - 1], true)
                        });
                    if !ok {
                        return Err(WalkError::InvalidCircuit(format!(
                            "layer {li}: map is not a permutation of 1..={n_modes}"
                        )));
                    }
                }
            }
        }
        Ok(OpticalCircuit { n_modes, layers })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }
}

/// Coin layer plus step permutation for `g` and `coins`.
///
/// Bundle `x` applies `A^(x)` from the in-coin slots to the neighbor slots
/// and passes the remaining slots through, the k-th unused input slot to the
/// k-th unused output slot (identity on undirected graphs).
pub fn to_circuit(g: &Graph, coins: &CoinAssignment) -> Result<OpticalCircuit> {
    coins.validate_for(g)?;
    let d = g.n_vertices();
    let mut bundles = Vec::with_capacity(d);
    for x in 1..=d {
        let coin = coins.coin(x);
        let ins = g.in_coins(x);
        let outs = g.neighborhood(x);
        let mut block = DMatrix::<C64>::zeros(d, d);
        for (r, &c) in ins.iter().enumerate() {
            for (k, &j) in outs.iter().enumerate() {
                block[(j - 1, c - 1)] = coin.get(r, k);
            }
        }
        let idle_in = (1..=d).filter(|c| ins.binary_search(c).is_err());
        let idle_out = (1..=d).filter(|j| outs.binary_search(j).is_err());
        for (c, j) in idle_in.zip(idle_out) {
            block[(j - 1, c - 1)] = C64::new(1.0, 0.0);
        }
        bundles.push(Bundle {
            modes: ((x - 1) * d + 1..=x * d).collect(),
            matrix: block,
        });
    }
    let map = (1..=d * d)
        .map(|n| {
            let b = BasisIndex::from_flat(n, d);
            BasisIndex::new(b.coin, b.position).flat(d)
        })
        .collect();
    OpticalCircuit::new(
        d * d,
        vec![Layer::Coin { bundles }, Layer::Permutation { map }],
    )
}

fn layer_unitary(n: usize, layer: &Layer) -> GlobalUnitary {
    let mut triplets = Vec::new();
    match layer {
        Layer::Coin { bundles } => {
            let mut covered = vec![false; n];
            for b in bundles {
                for (a, &row) in b.modes.iter().enumerate() {
                    covered[row - 1] = true;
                    for (bcol, &col) in b.modes.iter().enumerate() {
                        let v = b.matrix[(a, bcol)];
                        if v != C64::new(0.0, 0.0) {
                            triplets.push((row - 1, col - 1, v));
                        }
                    }
                }
            }
            for (m, _) in covered.iter().enumerate().filter(|(_, &c)| !c) {
                triplets.push((m, m, C64::new(1.0, 0.0)));
            }
        }
        Layer::Permutation { map } => {
            for (k, &to) in map.iter().enumerate() {
                triplets.push((to - 1, k, C64::new(1.0, 0.0)));
            }
        }
    }
    GlobalUnitary::from_triplets(n, triplets)
}

/// Ordered product of the layers (first layer acts first).
pub fn circuit_unitary(c: &OpticalCircuit) -> GlobalUnitary {
    c.layers
        .iter()
        .fold(GlobalUnitary::identity(c.n_modes), |acc, layer| {
            layer_unitary(c.n_modes, layer)
                .compose(&acc)
                .expect("layers share the circuit dimension")
        })
}

/// JSON document with deterministic field order.
pub fn export_circuit(c: &OpticalCircuit) -> String {
    serde_json::to_string_pretty(c).expect("circuit serialization cannot fail")
}

pub fn import_circuit(json: &str) -> Result<OpticalCircuit> {
    Ok(serde_json::from_str(json)?)
}
