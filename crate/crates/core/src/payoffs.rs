//! Stage utilities for one attack/defense profile, per hypothesized opponent
//! type, and their belief-weighted expectations.
//!
//! The disagreement term is always the post-step value `z_k` computed from
//! `x[k+1]`. The attacker maximizes
//! `z_k + θ^D·|defend| − β^A·|attack|` and the defender maximizes
//! `−z_k − β^D·|defend| + θ^A·|attack|`.

use crate::beliefs::Belief;
use crate::error::Result;
use crate::graph::{next_disagreement, EdgeSet, Graph, StateVector, WeightMatrix};
use crate::resources::ByType;

/// Attack and defense edge sets played in one step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionProfile {
    pub attack: EdgeSet,
    pub defend: EdgeSet,
}

impl ActionProfile {
    pub fn new(attack: EdgeSet, defend: EdgeSet) -> Self {
        ActionProfile { attack, defend }
    }
}

/// Everything a stage utility needs besides the actions.
///
/// `attacker_cost` and `defender_cost` are the acting player's own unit
/// costs; a hypothesized type is evaluated by swapping the field.
#[derive(Debug, Clone, Copy)]
pub struct StageContext<'a> {
    pub x: &'a StateVector,
    pub base: &'a Graph,
    pub w: &'a WeightMatrix,
    pub attacker_cost: f64,
    pub defender_cost: f64,
}

impl<'a> StageContext<'a> {
    pub fn with_attacker_cost(self, cost: f64) -> Self {
        StageContext {
            attacker_cost: cost,
            ..self
        }
    }

    pub fn with_defender_cost(self, cost: f64) -> Self {
        StageContext {
            defender_cost: cost,
            ..self
        }
    }

    fn z(&self, a: &ActionProfile) -> Result<f64> {
        next_disagreement(self.x, self.base, &a.attack, &a.defend, self.w)
    }
}

pub fn utility_attacker(ctx: &StageContext<'_>, theta_d: f64, a: &ActionProfile) -> Result<f64> {
    Ok(ctx.z(a)? + theta_d * a.defend.len() as f64 - ctx.attacker_cost * a.attack.len() as f64)
}

pub fn utility_defender(ctx: &StageContext<'_>, theta_a: f64, a: &ActionProfile) -> Result<f64> {
    Ok(-ctx.z(a)? - ctx.defender_cost * a.defend.len() as f64 + theta_a * a.attack.len() as f64)
}

/// Attacker's expected utility when each defender type plays its own defense.
pub fn expected_utility_attacker(
    ctx: &StageContext<'_>,
    belief: &Belief,
    defender_types: [f64; 2],
    defend_by_type: &ByType<EdgeSet>,
    attack: &EdgeSet,
) -> Result<f64> {
    let [p_low, p_high] = belief.probs();
    let low = utility_attacker(
        ctx,
        defender_types[0],
        &ActionProfile::new(attack.clone(), defend_by_type.low.clone()),
    )?;
    let high = utility_attacker(
        ctx,
        defender_types[1],
        &ActionProfile::new(attack.clone(), defend_by_type.high.clone()),
    )?;
    Ok(p_low * low + p_high * high)
}

/// Defender's expected utility when each attacker type plays its own attack.
pub fn expected_utility_defender(
    ctx: &StageContext<'_>,
    belief: &Belief,
    attacker_types: [f64; 2],
    attack_by_type: &ByType<EdgeSet>,
    defend: &EdgeSet,
) -> Result<f64> {
    let [p_low, p_high] = belief.probs();
    let low = utility_defender(
        ctx,
        attacker_types[0],
        &ActionProfile::new(attack_by_type.low.clone(), defend.clone()),
    )?;
    let high = utility_defender(
        ctx,
        attacker_types[1],
        &ActionProfile::new(attack_by_type.high.clone(), defend.clone()),
    )?;
    Ok(p_low * low + p_high * high)
}
