//! Sequential-move equilibria. The attacker commits first and the defender
//! responds after observing the attack, so the defender only ever protects
//! edges that are actually attacked.
//!
//! In the screening game the attacker knows its own cost but not the
//! defender's, and anticipates each defender type's response. In the
//! signaling game the defender knows its own cost, updates its belief about
//! the attacker from the observed attack, and each attacker type anticipates
//! the defender's response function.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::beliefs::{bayes_posterior, Belief};
use crate::bne::Feasibility;
use crate::error::Result;
use crate::graph::EdgeSet;
use crate::resources::{ByType, TypeIndex};
use crate::stage::{argmax, card, subsets_lex, StageGame, ZSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EqClass {
    Separating,
    Pooling,
    NotClassified,
}

impl fmt::Display for EqClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EqClass::Separating => "separating",
            EqClass::Pooling => "pooling",
            EqClass::NotClassified => "not-classified",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningResult {
    pub attack: EdgeSet,
    /// Each defender type's response to `attack`.
    pub response: ByType<EdgeSet>,
    /// Separating when the two defender types respond differently.
    pub classification: EqClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalingResult {
    pub attack: ByType<EdgeSet>,
    /// The defender's response to each attacker type's action.
    pub response: ByType<EdgeSet>,
    /// The defender's belief after observing each attacker type's action.
    pub posterior: ByType<Belief>,
    pub classification: EqClass,
    /// The belief-free response is not optimal under the posterior it
    /// induces; the belief-free response is kept.
    pub fallback_used: bool,
}

fn observed_mask(game: &StageGame<'_>, observed: &EdgeSet) -> Result<u64> {
    game.base.mask_of(observed)
}

fn best_defense(
    z: &impl ZSource,
    attack: u64,
    max_edges: usize,
    value: impl Fn(f64, u64) -> f64,
) -> u64 {
    argmax(&subsets_lex(attack, max_edges), |d| value(z.z(attack, d), d)).0
}

fn plain_defense(z: &impl ZSource, attack: u64, cost: f64, max_edges: usize) -> u64 {
    best_defense(z, attack, max_edges, |zv, d| -zv - cost * card(d))
}

fn weighted_defense(
    z: &impl ZSource,
    attack: u64,
    cost: f64,
    max_edges: usize,
    attacker_types: [f64; 2],
    belief: &Belief,
) -> u64 {
    let mu = belief.probs();
    best_defense(z, attack, max_edges, |zv, d| {
        (0..2)
            .map(|t| mu[t] * (-zv - cost * card(d) + attacker_types[t] * card(attack)))
            .sum()
    })
}

/// Best defense against an observed attack: maximizes
/// `−z − cost·|D|` over `D ⊆ observed` with at most `max_edges` edges.
pub fn defender_best_response(
    game: &StageGame<'_>,
    observed: &EdgeSet,
    defender_cost: f64,
    max_edges: usize,
) -> Result<EdgeSet> {
    let attack = observed_mask(game, observed)?;
    let z = game.on_demand()?;
    Ok(game
        .base
        .edges_of(plain_defense(&z, attack, defender_cost, max_edges)))
}

/// Same search as [`defender_best_response`] but maximizing the full
/// belief-weighted utility, attack-cost terms included.
pub fn defender_response_under_belief(
    game: &StageGame<'_>,
    observed: &EdgeSet,
    defender_cost: f64,
    max_edges: usize,
    belief: &Belief,
) -> Result<EdgeSet> {
    let attack = observed_mask(game, observed)?;
    let z = game.on_demand()?;
    Ok(game.base.edges_of(weighted_defense(
        &z,
        attack,
        defender_cost,
        max_edges,
        game.attacker_types,
        belief,
    )))
}

/// Attacker of known type `attacker_type` moves first against a defender
/// of unknown type.
pub fn solve_screening(
    game: &StageGame<'_>,
    attacker_type: TypeIndex,
    attacker_belief: &Belief,
    feasibility: &Feasibility,
    cap: usize,
) -> Result<ScreeningResult> {
    game.check_cap(cap)?;
    let z = game.table()?;
    let beta_a = game.attacker_types[attacker_type.idx()];
    let mu = attacker_belief.probs();
    let caps = [feasibility.defender.low, feasibility.defender.high];
    let theta_d = game.defender_types;
    let responses = |a: u64| [0, 1].map(|s| plain_defense(&z, a, theta_d[s], caps[s]));
    let candidates = subsets_lex(game.base.full_mask(), *feasibility.attacker.get(attacker_type));
    let (attack, _) = argmax(&candidates, |a| {
        let br = responses(a);
        (0..2)
            .map(|s| mu[s] * (z.z(a, br[s]) + theta_d[s] * card(br[s]) - beta_a * card(a)))
            .sum()
    });
    let [low, high] = responses(attack);
    Ok(ScreeningResult {
        attack: game.base.edges_of(attack),
        response: ByType::new(game.base.edges_of(low), game.base.edges_of(high)),
        classification: if low == high {
            EqClass::Pooling
        } else {
            EqClass::Separating
        },
    })
}

/// Attacker of unknown type moves first against a defender of known type
/// `defender_type` holding belief `defender_prior`.
pub fn solve_signaling(
    game: &StageGame<'_>,
    defender_type: TypeIndex,
    defender_prior: &Belief,
    feasibility: &Feasibility,
    cap: usize,
) -> Result<SignalingResult> {
    game.check_cap(cap)?;
    let z = game.table()?;
    let beta_d = game.defender_types[defender_type.idx()];
    let d_cap = *feasibility.defender.get(defender_type);
    let full = game.base.full_mask();
    let respond = |a: u64, belief: &Belief| {
        weighted_defense(&z, a, beta_d, d_cap, game.attacker_types, belief)
    };

    let mut response_fn: HashMap<u64, u64> = HashMap::new();
    let attack = [TypeIndex::Low, TypeIndex::High].map(|t| {
        let theta = game.attacker_types[t.idx()];
        let candidates = subsets_lex(full, *feasibility.attacker.get(t));
        argmax(&candidates, |a| {
            let d = *response_fn
                .entry(a)
                .or_insert_with(|| plain_defense(&z, a, beta_d, d_cap));
            z.z(a, d) + beta_d * card(d) - theta * card(a)
        })
        .0
    });

    let low_set = game.base.edges_of(attack[0]);
    let high_set = game.base.edges_of(attack[1]);
    let posterior = ByType::new(
        bayes_posterior(*defender_prior, &low_set, &high_set, &low_set),
        bayes_posterior(*defender_prior, &low_set, &high_set, &high_set),
    );
    let response = attack.map(|a| response_fn[&a]);
    let consistent = respond(attack[0], &posterior.low) == response[0]
        && respond(attack[1], &posterior.high) == response[1];
    let classification = match (consistent, attack[0] == attack[1]) {
        (false, _) => EqClass::NotClassified,
        (true, true) => EqClass::Pooling,
        (true, false) => EqClass::Separating,
    };
    Ok(SignalingResult {
        attack: ByType::new(low_set, high_set),
        response: ByType::new(
            game.base.edges_of(response[0]),
            game.base.edges_of(response[1]),
        ),
        posterior,
        classification,
        fallback_used: !consistent,
    })
}

impl ScreeningResult {
    /// Defender response for the given true defender type.
    pub fn response_for(&self, t: TypeIndex) -> &EdgeSet {
        self.response.get(t)
    }
}

impl SignalingResult {
    pub fn attack_for(&self, t: TypeIndex) -> &EdgeSet {
        self.attack.get(t)
    }
}
