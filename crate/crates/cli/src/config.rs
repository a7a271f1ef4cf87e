//! Run configuration: one JSON document, optionally overridden by flags.

use std::collections::BTreeMap;

use qwalk::coin::{CoinAssignment, CoinMatrix};
use qwalk::evolution::{InitialState, Preset};
use qwalk::graph::GraphJson;
use qwalk::linalg::from_rows;
use qwalk::spectral::{DEFAULT_EPS, DEFAULT_Q_MAX};
use qwalk::{GlobalUnitary, Graph, Metric, WalkerState};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSpec,
    pub coin: CoinSpec,
    pub initial: InitialState,
    pub t_max: usize,
    pub metric: Metric,
    pub spectral: SpectralSpec,
    /// Second bias for `sensitivity`.
    pub delta_b: Option<f64>,
    /// Two-photon input as 1-based flat modes; defaults to the middle vertex.
    pub two_walker: Option<TwoWalkerSpec>,
    /// Also write every amplitude at every step in `simulate`.
    pub dump_amplitudes: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            graph: GraphSpec::Line { line: 5 },
            coin: CoinSpec::Hadamard { delta: 0.5 },
            initial: InitialState::Preset(Preset::Middle),
            t_max: 100,
            metric: Metric::Shannon,
            spectral: SpectralSpec::default(),
            delta_b: None,
            two_walker: None,
            dump_amplitudes: false,
        }
    }
}

/// `{"line": n}` or the custom graph form
/// `{"n_vertices": n, "neighborhoods": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum GraphSpec {
    Line { line: usize },
    Custom(GraphJson),
}

impl<'de> Deserialize<'de> for GraphSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Line {
            line: usize,
        }
        let value = serde_json::Value::deserialize(d)?;
        if value.get("line").is_some() {
            let l = Line::deserialize(value).map_err(D::Error::custom)?;
            Ok(GraphSpec::Line { line: l.line })
        } else {
            GraphJson::deserialize(value)
                .map(GraphSpec::Custom)
                .map_err(D::Error::custom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoinSpec {
    /// Biased Hadamard `H_δ` at every vertex (degree-2 graphs only).
    Hadamard { delta: f64 },
    /// One bias per vertex, in vertex order.
    HadamardPerVertex { deltas: Vec<f64> },
    /// Identity coin at every vertex.
    Identity,
    /// Explicit matrices keyed by 1-based vertex (as a string, since JSON
    /// keys are strings), rows of `[re, im]`.
    Explicit {
        matrices: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSpec {
    pub q_max: u64,
    pub eps: f64,
    /// Optional revival search from the initial state.
    pub revival: Option<RevivalSpec>,
}

impl Default for SpectralSpec {
    fn default() -> Self {
        SpectralSpec {
            q_max: DEFAULT_Q_MAX,
            eps: DEFAULT_EPS,
            revival: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevivalSpec {
    pub threshold: f64,
    pub t_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoWalkerSpec {
    pub modes: [usize; 2],
}

/// Flag values that replace config fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub steps: Option<usize>,
    pub size: Option<usize>,
    pub delta: Option<f64>,
    pub delta_b: Option<f64>,
    pub q_max: Option<u64>,
    pub eps: Option<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(steps) = o.steps {
            self.t_max = steps;
        }
        if let Some(size) = o.size {
            match self.graph {
                GraphSpec::Line { .. } => self.graph = GraphSpec::Line { line: size },
                GraphSpec::Custom(_) => {
                    return Err(CliError::Validation(
                        "--size only applies to line graphs".into(),
                    ))
                }
            }
        }
        if let Some(delta) = o.delta {
            match self.coin {
                CoinSpec::Hadamard { .. } => self.coin = CoinSpec::Hadamard { delta },
                _ => {
                    return Err(CliError::Validation(
                        "--delta only applies to the hadamard coin".into(),
                    ))
                }
            }
        }
        if let Some(d) = o.delta_b {
            self.delta_b = Some(d);
        }
        if let Some(q) = o.q_max {
            self.spectral.q_max = q;
        }
        if let Some(eps) = o.eps {
            self.spectral.eps = eps;
        }
        Ok(())
    }

    /// Builds every object the commands need, reporting the first invalid
    /// field.
    pub fn prepare(&self) -> Result<Setup, CliError> {
        let field = |name: &'static str| {
            move |e: qwalk::WalkError| CliError::Validation(format!("{name}: {e}"))
        };
        let graph = match &self.graph {
            GraphSpec::Line { line } => Graph::line(*line).map_err(field("graph.line"))?,
            GraphSpec::Custom(json) => Graph::try_from(json.clone()).map_err(field("graph"))?,
        };
        let coins = build_coins(&graph, &self.coin)?;
        let unitary = GlobalUnitary::build(&graph, &coins).map_err(field("coin"))?;
        let initial = self.initial.prepare(&graph).map_err(field("initial"))?;
        if self.spectral.q_max == 0 {
            return Err(CliError::Validation(
                "spectral.q_max: must be at least 1".into(),
            ));
        }
        if !(self.spectral.eps.is_finite() && self.spectral.eps > 0.0) {
            return Err(CliError::Validation(format!(
                "spectral.eps: must be a positive number, got {}",
                self.spectral.eps
            )));
        }
        if let Some(r) = &self.spectral.revival {
            if !(r.threshold > 0.0 && r.threshold <= 1.0) {
                return Err(CliError::Validation(format!(
                    "spectral.revival.threshold: must lie in (0, 1], got {}",
                    r.threshold
                )));
            }
            if r.t_max == 0 {
                return Err(CliError::Validation(
                    "spectral.revival.t_max: must be at least 1".into(),
                ));
            }
        }
        Ok(Setup {
            graph,
            coins,
            unitary,
            initial,
        })
    }
}

pub fn build_coins(g: &Graph, spec: &CoinSpec) -> Result<CoinAssignment, CliError> {
    let field = |name: &'static str| {
        move |e: qwalk::WalkError| CliError::Validation(format!("{name}: {e}"))
    };
    match spec {
        CoinSpec::Hadamard { delta } => {
            let h = CoinMatrix::hadamard_biased(*delta).map_err(field("coin.delta"))?;
            CoinAssignment::uniform(g, h).map_err(field("coin"))
        }
        CoinSpec::HadamardPerVertex { deltas } => {
            CoinAssignment::hadamard_per_vertex(g, deltas).map_err(field("coin.deltas"))
        }
        CoinSpec::Identity => {
            let coins = (1..=g.n_vertices())
                .map(|x| (x, CoinMatrix::identity(g.degree(x))))
                .collect();
            CoinAssignment::per_vertex(g, coins).map_err(field("coin"))
        }
        CoinSpec::Explicit { matrices } => {
            let mut parsed = BTreeMap::new();
            for (key, rows) in matrices {
                let x: usize = key.parse().map_err(|_| {
                    CliError::Validation(format!(
                        "coin.matrices: key {key:?} is not a vertex index"
                    ))
                })?;
                let m = from_rows(rows)
                    .map_err(|e| CliError::Validation(format!("coin.matrices.{x}: {e}")))?;
                parsed.insert(x, m);
            }
            CoinAssignment::from_matrices(g, parsed).map_err(field("coin.matrices"))
        }
    }
}

/// Validated objects built from a [`RunConfig`].
pub struct Setup {
    pub graph: Graph,
    pub coins: CoinAssignment,
    pub unitary: GlobalUnitary,
    pub initial: WalkerState,
}
