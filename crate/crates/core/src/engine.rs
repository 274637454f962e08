//! The repeated game: one equilibrium per time step, played by the true
//! types, followed by a consensus step over the edges that survived.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::beliefs::{predicted_cost, update_belief, Belief, BeliefParams};
use crate::bne::{solve_bne, Feasibility, StageBeliefs};
use crate::error::Result;
use crate::graph::{
    consensus_step, disagreement, effective_graph, EdgeSet, Graph, StateVector, WeightMatrix,
};
use crate::pbe::{solve_screening, solve_signaling, EqClass};
use crate::resources::{ByType, Ledger, PlayerSpec};
use crate::scenario::ScenarioConfig;
use crate::stage::StageGame;

pub use crate::analysis::{condition_report, ConditionReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameMode {
    /// Simultaneous moves, both types private.
    Bne,
    /// Attacker moves first without knowing the defender's type.
    Screening,
    /// Attacker moves first; the defender knows its own type and learns
    /// about the attacker's from the attack.
    Signaling,
}

impl fmt::Display for GameMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameMode::Bne => "bne",
            GameMode::Screening => "screening",
            GameMode::Signaling => "signaling",
        })
    }
}

/// Fixed inputs of a run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub graph: Graph,
    pub weights: WeightMatrix,
    pub mode: GameMode,
    pub belief_params: BeliefParams,
    pub enumeration_cap: usize,
}

/// One player's private cost, spending history and belief about the opponent.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerState {
    pub spec: PlayerSpec,
    pub ledger: Ledger,
    pub belief: Belief,
}

impl PlayerState {
    pub fn new(spec: PlayerSpec) -> Self {
        PlayerState {
            spec,
            ledger: Ledger::new(),
            belief: Belief::uniform(),
        }
    }

    fn caps(&self, k: usize, pool: usize) -> ByType<usize> {
        let s = &self.spec;
        ByType::new(
            self.ledger
                .max_affordable_edges(s.type_low, s.kappa, s.rho, k, pool),
            self.ledger
                .max_affordable_edges(s.type_high, s.kappa, s.rho, k, pool),
        )
    }

    /// Belief about this player held by its opponent, from this player's history.
    fn observed_by(&self, prev: Belief, k: usize, params: BeliefParams) -> Belief {
        let s = &self.spec;
        let pred = predicted_cost(s.kappa, s.rho, k, &self.ledger);
        update_belief(prev, pred, s.type_low, s.type_high, params)
    }

    /// True-cost resource left at step `k` after the spending recorded so far.
    fn remaining(&self, k: usize) -> f64 {
        let s = &self.spec;
        self.ledger.remaining_budget(s.beta_true, s.kappa, s.rho, k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub k: usize,
    pub x: StateVector,
    pub attacker: PlayerState,
    pub defender: PlayerState,
}

impl WorldState {
    pub fn new(x: StateVector, attacker: PlayerSpec, defender: PlayerSpec) -> Self {
        WorldState {
            k: 0,
            x,
            attacker: PlayerState::new(attacker),
            defender: PlayerState::new(defender),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    /// States after the step.
    pub x: Vec<f64>,
    /// Disagreement of `x`.
    pub z: f64,
    pub attack: EdgeSet,
    pub defend: EdgeSet,
    /// Attacker's belief that the defender is the low-cost type, before acting.
    pub mu_att_low: f64,
    /// Defender's belief that the attacker is the low-cost type, before
    /// observing the attack.
    pub mu_def_low: f64,
    /// Defender's belief after observing the attack (signaling only).
    pub posterior_def_low: Option<f64>,
    pub budget_att: f64,
    pub budget_def: f64,
    pub eq_class: EqClass,
    pub fallback: bool,
}

struct Played {
    attack: EdgeSet,
    defend: EdgeSet,
    eq_class: EqClass,
    fallback: bool,
    posterior: Option<Belief>,
}

/// Advances the game by one time step.
pub fn step(world: &WorldState, cfg: &SimConfig) -> Result<(WorldState, TraceRecord)> {
    let k = world.k;
    let params = cfg.belief_params;
    let att_belief = world.defender.observed_by(world.attacker.belief, k, params);
    let def_belief = world.attacker.observed_by(world.defender.belief, k, params);

    let pool = cfg.graph.edge_count();
    let feasibility = Feasibility {
        attacker: world.attacker.caps(k, pool),
        defender: world.defender.caps(k, pool),
    };
    let game = StageGame {
        x: &world.x,
        base: &cfg.graph,
        w: &cfg.weights,
        attacker_types: world.attacker.spec.types(),
        defender_types: world.defender.spec.types(),
    };
    let att_type = world.attacker.spec.true_type();
    let def_type = world.defender.spec.true_type();
    let cap = cfg.enumeration_cap;

    let played = match cfg.mode {
        GameMode::Bne => {
            let beliefs = StageBeliefs {
                attacker: att_belief,
                defender: def_belief,
            };
            let r = solve_bne(&game, &beliefs, &feasibility, cap)?;
            Played {
                attack: r.attacker.get(att_type).clone(),
                defend: r.defender.get(def_type).clone(),
                eq_class: EqClass::NotClassified,
                fallback: r.fallback_used,
                posterior: None,
            }
        }
        GameMode::Screening => {
            let r = solve_screening(&game, att_type, &att_belief, &feasibility, cap)?;
            Played {
                defend: r.response.get(def_type).clone(),
                attack: r.attack,
                eq_class: r.classification,
                fallback: false,
                posterior: None,
            }
        }
        GameMode::Signaling => {
            let r = solve_signaling(&game, def_type, &def_belief, &feasibility, cap)?;
            Played {
                attack: r.attack.get(att_type).clone(),
                defend: r.response.get(att_type).clone(),
                eq_class: r.classification,
                fallback: r.fallback_used,
                posterior: Some(*r.posterior.get(att_type)),
            }
        }
    };

    let attacker = PlayerState {
        ledger: world
            .attacker
            .ledger
            .record_action(played.attack.len(), &world.attacker.spec)?,
        belief: att_belief,
        ..world.attacker.clone()
    };
    let defender = PlayerState {
        ledger: world
            .defender
            .ledger
            .record_action(played.defend.len(), &world.defender.spec)?,
        belief: played.posterior.unwrap_or(def_belief),
        ..world.defender.clone()
    };
    let g_eff = effective_graph(&cfg.graph, &played.attack, &played.defend)?;
    let x = consensus_step(&world.x, &g_eff, &cfg.weights)?;
    let record = TraceRecord {
        k,
        z: disagreement(x.as_slice()),
        x: x.as_slice().to_vec(),
        mu_att_low: att_belief.mu_low(),
        mu_def_low: def_belief.mu_low(),
        posterior_def_low: played.posterior.map(|b| b.mu_low()),
        budget_att: attacker.remaining(k),
        budget_def: defender.remaining(k),
        eq_class: played.eq_class,
        fallback: played.fallback,
        attack: played.attack,
        defend: played.defend,
    };
    let next = WorldState {
        k: k + 1,
        x,
        attacker,
        defender,
    };
    Ok((next, record))
}

/// Plays `horizon` steps from the scenario's initial state.
pub fn run(scenario: &ScenarioConfig) -> Result<Vec<TraceRecord>> {
    let cfg = scenario.sim_config()?;
    let mut world = scenario.initial_world()?;
    let mut trace = Vec::with_capacity(scenario.horizon);
    for _ in 0..scenario.horizon {
        let (next, record) = step(&world, &cfg)?;
        trace.push(record);
        world = next;
    }
    Ok(trace)
}

/// First step whose post-step disagreement is below `epsilon`.
pub fn consensus_reached(trace: &[TraceRecord], epsilon: f64) -> Option<usize> {
    trace.iter().find(|r| r.z < epsilon).map(|r| r.k)
}
