//! Scenario files (JSON) and trace output (CSV).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beliefs::BeliefParams;
use crate::engine::{GameMode, SimConfig, TraceRecord, WorldState};
use crate::error::{GameError, Result};
use crate::graph::{Edge, Graph, StateVector, WeightMatrix};
use crate::resources::{PlayerSpec, Role};
use crate::stage::{DEFAULT_ENUMERATION_CAP, MAX_ENUMERATION_CAP};

pub const DEFAULT_ALPHA: f64 = 0.25;
pub const DEFAULT_EPSILON: f64 = 1e-6;

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_cap() -> usize {
    DEFAULT_ENUMERATION_CAP
}

/// A complete run description. Agents are numbered from 1 in files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    /// Undirected edges as `[i, j]` with `i < j`.
    pub edges: Vec<[usize; 2]>,
    pub x0: Vec<f64>,
    /// `[i, j, a_ij]` entries; edges not listed get `1/n`. Always complete
    /// after loading.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<(usize, usize, f64)>>,
    pub mode: GameMode,
    pub horizon: usize,
    pub attacker: PlayerSpec,
    pub defender: PlayerSpec,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon_consensus: f64,
    #[serde(default = "default_cap")]
    pub enumeration_cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn invalid(msg: impl Into<String>) -> GameError {
    GameError::InvalidScenario(msg.into())
}

fn edge_from_labels(i: usize, j: usize, n: usize) -> Result<Edge> {
    if i >= j {
        return Err(invalid(format!("edge [{i}, {j}] must list the smaller agent first")));
    }
    let e = Edge::from_labels(i, j).ok_or_else(|| invalid(format!("edge [{i}, {j}]: agents are numbered from 1")))?;
    if j > n {
        return Err(GameError::AgentOutOfRange { edge: e, n });
    }
    Ok(e)
}

impl ScenarioConfig {
    /// Parses, fills defaults and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| GameError::Parse(e.to_string()))?;
        cfg.finish()
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_value(value).map_err(|e| GameError::Parse(e.to_string()))?;
        cfg.finish()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    fn finish(mut self) -> Result<Self> {
        let graph = self.graph()?;
        self.weights = Some(
            self.weight_matrix_for(&graph)?
                .iter()
                .map(|(e, &a)| {
                    let (i, j) = e.labels();
                    (i, j, a)
                })
                .collect(),
        );
        self.validate()?;
        Ok(self)
    }

    /// Checks every constraint and reports the first one violated.
    pub fn validate(&self) -> Result<()> {
        let graph = self.graph()?;
        if self.x0.len() != self.n {
            return Err(GameError::ShapeMismatch {
                expected: self.n,
                got: self.x0.len(),
            });
        }
        StateVector::new(self.x0.clone())?;
        self.weight_matrix_for(&graph)?;
        self.attacker.validate(Role::Attacker)?;
        self.defender.validate(Role::Defender)?;
        BeliefParams::new(self.alpha)?;
        if !(self.epsilon_consensus > 0.0 && self.epsilon_consensus.is_finite()) {
            return Err(invalid("epsilon_consensus must be positive"));
        }
        if self.enumeration_cap == 0 || self.enumeration_cap > MAX_ENUMERATION_CAP {
            return Err(invalid(format!(
                "enumeration_cap must lie in 1..={MAX_ENUMERATION_CAP}"
            )));
        }
        if graph.edge_count() > self.enumeration_cap {
            return Err(GameError::EnumerationCap {
                pool: graph.edge_count(),
                cap: self.enumeration_cap,
            });
        }
        Ok(())
    }

    /// The base graph; must be connected.
    pub fn graph(&self) -> Result<Graph> {
        let edges = self
            .edges
            .iter()
            .map(|&[i, j]| edge_from_labels(i, j, self.n))
            .collect::<Result<Vec<_>>>()?;
        Graph::new_connected(self.n, edges)
    }

    fn weight_matrix_for(&self, graph: &Graph) -> Result<WeightMatrix> {
        let default = 1.0 / self.n as f64;
        let mut map: BTreeMap<Edge, f64> = graph.edges().iter().map(|&e| (e, default)).collect();
        for &(i, j, a) in self.weights.iter().flatten() {
            let e = edge_from_labels(i, j, self.n)?;
            if !graph.contains(&e) {
                return Err(GameError::EdgeNotInBase(e));
            }
            map.insert(e, a);
        }
        WeightMatrix::from_map(graph, map)
    }

    pub fn weight_matrix(&self) -> Result<WeightMatrix> {
        self.weight_matrix_for(&self.graph()?)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let graph = self.graph()?;
        Ok(SimConfig {
            weights: self.weight_matrix_for(&graph)?,
            graph,
            mode: self.mode,
            belief_params: BeliefParams::new(self.alpha)?,
            enumeration_cap: self.enumeration_cap,
        })
    }

    pub fn initial_world(&self) -> Result<WorldState> {
        Ok(WorldState::new(
            StateVector::new(self.x0.clone())?,
            self.attacker,
            self.defender,
        ))
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| GameError::Io(format!("{}: {e}", path.as_ref().display())))?;
    ScenarioConfig::from_json(&text)
}

pub fn save_scenario(cfg: &ScenarioConfig, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path.as_ref(), cfg.to_json() + "\n")
        .map_err(|e| GameError::Io(format!("{}: {e}", path.as_ref().display())))
}

/// Column names for a network of `n` agents.
pub fn trace_header(n: usize) -> Vec<String> {
    let mut cols = vec!["k".to_string()];
    cols.extend((1..=n).map(|i| format!("x_{i}")));
    cols.extend(
        [
            "z",
            "attack_edges",
            "defend_edges",
            "mu_att_low",
            "mu_def_low",
            "posterior_def_low",
            "budget_att",
            "budget_def",
            "eq_class",
            "fallback",
        ]
        .map(String::from),
    );
    cols
}

fn record_row(r: &TraceRecord) -> Vec<String> {
    let mut row = vec![r.k.to_string()];
    row.extend(r.x.iter().map(f64::to_string));
    row.extend([
        r.z.to_string(),
        r.attack.to_string(),
        r.defend.to_string(),
        r.mu_att_low.to_string(),
        r.mu_def_low.to_string(),
        r.posterior_def_low.map(|p| p.to_string()).unwrap_or_default(),
        r.budget_att.to_string(),
        r.budget_def.to_string(),
        r.eq_class.to_string(),
        r.fallback.to_string(),
    ]);
    row
}

/// Writes the trace of an `n`-agent run as CSV.
pub fn write_trace_to<W: Write>(out: W, n: usize, trace: &[TraceRecord]) -> Result<()> {
    let io = |e: csv::Error| GameError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_header(n)).map_err(io)?;
    for r in trace {
        w.write_record(record_row(r)).map_err(io)?;
    }
    w.flush().map_err(|e| GameError::Io(e.to_string()))
}

pub fn write_trace(trace: &[TraceRecord], n: usize, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())
        .map_err(|e| GameError::Io(format!("{}: {e}", path.as_ref().display())))?;
    write_trace_to(BufWriter::new(file), n, trace)
}
