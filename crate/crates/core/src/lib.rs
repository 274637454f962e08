//! Repeated attacker/defender game over a multi-agent consensus network.
//!
//! An attacker jams communication edges, a defender protects edges with
//! strong signals, and the agents run one averaging step per time step over
//! the surviving edges. Both players have private unit costs drawn from
//! two-element type sets, learn about each other from spending history, and
//! play exact pure-strategy equilibria of the resulting one-step games.

pub mod analysis;
pub mod beliefs;
pub mod bne;
pub mod engine;
pub mod error;
pub mod graph;
pub mod payoffs;
pub mod pbe;
pub mod resources;
pub mod scenario;
mod stage;
pub mod verify;

pub use beliefs::{bayes_posterior, predicted_cost, update_belief, Belief, BeliefParams};
pub use bne::{feasible_actions, solve_bne, BneResult, Feasibility, StageBeliefs, TypeStrategy};
pub use engine::{consensus_reached, run, step, GameMode, SimConfig, TraceRecord, WorldState};
pub use error::{GameError, Result};
pub use graph::{
    consensus_step, disagreement, effective_graph, next_disagreement, Edge, EdgeSet, Graph,
    StateVector, WeightMatrix,
};
pub use payoffs::{ActionProfile, StageContext};
pub use pbe::{
    defender_best_response, defender_response_under_belief, solve_screening, solve_signaling,
    EqClass, ScreeningResult, SignalingResult,
};
pub use resources::{ByType, Ledger, PlayerSpec, Role, TypeIndex};
pub use scenario::{load_scenario, write_trace, ScenarioConfig};
pub use stage::{StageGame, DEFAULT_ENUMERATION_CAP, MAX_ENUMERATION_CAP};
