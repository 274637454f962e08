//! Closed-form predictions: two-agent case analysis for every game mode and
//! the sufficient conditions under which consensus is or is not reached.

use crate::engine::TraceRecord;
use crate::error::Result;
use crate::graph::{disagreement, next_disagreement, EdgeSet, Graph, StateVector, WeightMatrix};
use crate::pbe::EqClass;
use crate::resources::ByType;
use crate::scenario::ScenarioConfig;

/// Disagreement reduction achieved by one intact step: the most an attack
/// can gain this step, and the defender can save by protecting everything.
pub fn disagreement_gap(x: &StateVector, g: &Graph, w: &WeightMatrix) -> Result<f64> {
    let intact = next_disagreement(x, g, &EdgeSet::new(), &EdgeSet::new(), w)?;
    Ok(disagreement(x.as_slice()) - intact)
}

/// Two agents joined by one edge of weight `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAgentView {
    /// Disagreement kept when the edge is cut.
    pub z0: f64,
    /// Disagreement after one intact step.
    pub z1: f64,
    /// `z0 − z1 = 4a(1−a)(x₁−x₂)²`.
    pub zt: f64,
}

impl TwoAgentView {
    pub fn new(x1: f64, x2: f64, a: f64) -> Self {
        let z0 = disagreement(&[x1, x2]);
        let flow = a * (x2 - x1);
        let z1 = disagreement(&[x1 + flow, x2 - flow]);
        TwoAgentView { z0, z1, zt: z0 - z1 }
    }
}

/// Conditions under which one player stays idle whatever the other does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdleConditions {
    /// Even the cheap defender type loses by protecting the edge.
    pub defender_idle: bool,
    /// Even the cheap attacker type loses by cutting the edge.
    pub attacker_idle: bool,
}

pub fn idle_conditions(view: &TwoAgentView, defender_low: f64, attacker_low: f64) -> IdleConditions {
    IdleConditions {
        defender_idle: defender_low > view.zt,
        attacker_idle: attacker_low > view.zt,
    }
}

/// Which defender types protect an attacked edge in the screening game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScreeningRegime {
    BothDefend,
    NeitherDefends,
    OnlyLowDefends,
}

pub fn screening_regime(view: &TwoAgentView, defender_types: [f64; 2]) -> ScreeningRegime {
    if view.zt > defender_types[1] {
        ScreeningRegime::BothDefend
    } else if view.zt > defender_types[0] {
        ScreeningRegime::OnlyLowDefends
    } else {
        ScreeningRegime::NeitherDefends
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScreeningDecision {
    pub attack: bool,
    /// Whether each defender type protects the edge when it is attacked.
    pub defend: ByType<bool>,
}

/// Candidate closed forms for the attack decision when only the cheap
/// defender type protects the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedRegimeRule {
    /// Attack iff `μ > (z̃ − β^A)/(z̃ + β^D_1)`.
    Headline,
    /// Attack iff `μ > (z¹ − z⁰ − β^A)/(z¹ − z⁰ + β^D_1)`.
    Rearranged,
    /// Attack iff `μ·(z̃ − β^D_1) < z̃ − β^A`, from comparing
    /// `μ(z¹ − β^A + β^D_1) + (1 − μ)(z⁰ − β^A)` with `z¹`.
    ExpectedUtility,
}

impl MixedRegimeRule {
    pub const ALL: [MixedRegimeRule; 3] = [
        MixedRegimeRule::Headline,
        MixedRegimeRule::Rearranged,
        MixedRegimeRule::ExpectedUtility,
    ];

    pub fn attacks(self, view: &TwoAgentView, attacker_cost: f64, defender_low: f64, mu_low: f64) -> bool {
        let (zt, b) = (view.zt, defender_low);
        match self {
            MixedRegimeRule::Headline => mu_low > (zt - attacker_cost) / (zt + b),
            MixedRegimeRule::Rearranged => {
                let d = view.z1 - view.z0;
                mu_low > (d - attacker_cost) / (d + b)
            }
            MixedRegimeRule::ExpectedUtility => mu_low * (zt - b) < zt - attacker_cost,
        }
    }
}

/// Screening game with a known attacker cost and belief `mu_low` that the
/// defender is the cheap type. Indifference resolves to not acting.
pub fn screening_closed_form(
    view: &TwoAgentView,
    attacker_cost: f64,
    defender_types: [f64; 2],
    mu_low: f64,
) -> ScreeningDecision {
    let [b1, b2] = defender_types;
    let regime = screening_regime(view, defender_types);
    let attack = match regime {
        ScreeningRegime::BothDefend => mu_low * (b2 - b1) < b2 - attacker_cost,
        ScreeningRegime::NeitherDefends => view.zt > attacker_cost,
        ScreeningRegime::OnlyLowDefends => {
            MixedRegimeRule::ExpectedUtility.attacks(view, attacker_cost, b1, mu_low)
        }
    };
    let defend = match regime {
        ScreeningRegime::BothDefend => ByType::new(true, true),
        ScreeningRegime::NeitherDefends => ByType::new(false, false),
        ScreeningRegime::OnlyLowDefends => ByType::new(true, false),
    };
    ScreeningDecision { attack, defend }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignalingDecision {
    pub attack: ByType<bool>,
    /// Whether the defender protects the edge when it observes an attack.
    pub defend_if_attacked: bool,
    pub classification: EqClass,
}

/// Signaling game with a known defender cost. Attacker type `t` attacks iff
/// its cost is below `min(z̃, β^D)`: the gain is `z̃` when the defender lets
/// the cut stand and the defender's spending `β^D` when it does not.
pub fn signaling_closed_form(view: &TwoAgentView, attacker_types: [f64; 2], defender_cost: f64) -> SignalingDecision {
    let defend_if_attacked = view.zt > defender_cost;
    let gain = if defend_if_attacked { defender_cost } else { view.zt };
    let attack = ByType::new(attacker_types[0] < gain, attacker_types[1] < gain);
    SignalingDecision {
        attack,
        defend_if_attacked,
        classification: if attack.low == attack.high {
            EqClass::Pooling
        } else {
            EqClass::Separating
        },
    }
}

/// Pooling prediction with the threshold of each branch taken at face value:
/// for `z̃ ≤ β^D` both types attack iff `β^A_2 < β^D` and neither iff
/// `β^A_1 > β^D`; for `z̃ > β^D` both attack iff `β^A_1 > z̃` and neither iff
/// `β^A_2 < z̃`. `None` when no branch applies.
pub fn pooling_face_value(view: &TwoAgentView, attacker_types: [f64; 2], defender_cost: f64) -> Option<bool> {
    let [t1, t2] = attacker_types;
    let (zt, bd) = (view.zt, defender_cost);
    if zt <= bd {
        if t2 < bd {
            return Some(true);
        }
        if t1 > bd {
            return Some(false);
        }
    } else {
        if t1 > zt {
            return Some(true);
        }
        if t2 < zt {
            return Some(false);
        }
    }
    None
}

/// Sufficient conditions evaluated on a scenario's initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    /// One-step disagreement reduction at `x0`.
    pub gap0: f64,
    /// Screening prevention with the supply condition `β^A_true ≤ ρ^A`:
    /// `β^A_true < gap0 < β^D_1`.
    pub screening_prevention_true_cost: bool,
    /// Same with the supply condition `ρ^A ≥ β^A_2`.
    pub screening_prevention_high_type: bool,
    /// Signaling prevention: `β^A_true ≤ ρ^A`, `β^A_true < β^D_true`,
    /// `gap0 ≤ β^D_true`.
    pub signaling_prevention: bool,
    /// `z(x0) < β^A_1`, after which no attack is profitable.
    pub attacks_cease_at_start: bool,
}

pub fn condition_report(scenario: &ScenarioConfig) -> Result<ConditionReport> {
    let g = scenario.graph()?;
    let w = scenario.weight_matrix()?;
    let x = StateVector::new(scenario.x0.clone())?;
    let gap0 = disagreement_gap(&x, &g, &w)?;
    let a = &scenario.attacker;
    let d = &scenario.defender;
    let window = a.beta_true < gap0 && gap0 < d.type_low;
    Ok(ConditionReport {
        gap0,
        screening_prevention_true_cost: a.beta_true <= a.rho && window,
        screening_prevention_high_type: a.rho >= a.type_high && window,
        signaling_prevention: a.beta_true <= a.rho && a.beta_true < d.beta_true && gap0 <= d.beta_true,
        attacks_cease_at_start: disagreement(&scenario.x0) < a.type_low,
    })
}

/// First step whose post-step disagreement falls below the cheap attacker
/// cost; no attack can pay off at any later step.
pub fn attacks_cease_after(trace: &[TraceRecord], attacker_low: f64) -> Option<usize> {
    trace.iter().find(|r| r.z < attacker_low).map(|r| r.k)
}
