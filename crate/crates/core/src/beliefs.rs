//! Beliefs about the opponent's type: cost prediction from public history,
//! the between-step update rule and the within-step Bayes update used when
//! the defender observes the attack before responding.

use crate::error::{GameError, Result};
use crate::graph::EdgeSet;
use crate::resources::Ledger;

/// Relative tolerance for treating a predicted cost as equal to the high type.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Two-point distribution over the opponent's low/high cost type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Belief {
    mu_low: f64,
    mu_high: f64,
    locked: bool,
}

impl Belief {
    pub fn uniform() -> Self {
        Belief::with_low(0.5)
    }

    /// Unlocked belief with `mu_low = p`, clamped into `[0, 1]`.
    pub fn with_low(p: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        Belief {
            mu_low: p,
            mu_high: 1.0 - p,
            locked: false,
        }
    }

    /// Belief fixed on one type; later between-step updates keep it.
    pub fn certain(low: bool) -> Self {
        let p = if low { 1.0 } else { 0.0 };
        Belief {
            locked: true,
            ..Belief::with_low(p)
        }
    }

    pub fn mu_low(&self) -> f64 {
        self.mu_low
    }

    pub fn mu_high(&self) -> f64 {
        self.mu_high
    }

    /// Probabilities in type order `[low, high]`.
    pub fn probs(&self) -> [f64; 2] {
        [self.mu_low, self.mu_high]
    }

    pub fn is_locked(&self) -> bool {
        self.locked
    }
}

impl Default for Belief {
    fn default() -> Self {
        Belief::uniform()
    }
}

/// The tie value `α` used when the predicted cost hits the high type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefParams {
    alpha: f64,
}

impl BeliefParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(GameError::InvalidAlpha(alpha));
        }
        Ok(BeliefParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for BeliefParams {
    fn default() -> Self {
        BeliefParams { alpha: 0.25 }
    }
}

/// Cost per edge implied by the opponent having spent its whole budget up to
/// step `k−1`: `(κ + ρ(k−1)) / Σ_{m<k} counts[m]`. `None` when nothing was
/// acted on yet (or `k = 0`).
pub fn predicted_cost(kappa: f64, rho: f64, k: usize, history: &Ledger) -> Option<f64> {
    if k == 0 {
        return None;
    }
    let acted: usize = history.counts().iter().take(k).sum();
    if acted == 0 {
        return None;
    }
    Some((kappa + rho * (k - 1) as f64) / acted as f64)
}

/// Between-step belief update from a predicted cost.
pub fn update_belief(
    prev: Belief,
    pred: Option<f64>,
    _type_low: f64,
    type_high: f64,
    params: BeliefParams,
) -> Belief {
    if prev.locked {
        return prev;
    }
    let Some(pred) = pred else {
        return Belief::uniform();
    };
    if (pred - type_high).abs() <= TIE_TOLERANCE * type_high.abs() {
        Belief::with_low(params.alpha)
    } else if pred < type_high {
        // the high type could not have afforded that much activity
        Belief::certain(true)
    } else {
        Belief::with_low(0.5 * (pred - type_high) / pred)
    }
}

/// Within-step posterior after observing `observed`, given each type's
/// equilibrium action. Pooling and off-path observations keep the prior.
pub fn bayes_posterior(
    prior: Belief,
    strategy_low: &EdgeSet,
    strategy_high: &EdgeSet,
    observed: &EdgeSet,
) -> Belief {
    if strategy_low == strategy_high {
        return prior;
    }
    if observed == strategy_low {
        Belief::certain(true)
    } else if observed == strategy_high {
        Belief::certain(false)
    } else {
        prior
    }
}
