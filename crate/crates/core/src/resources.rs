//! Resource accounting: cumulative spending against linearly accruing budgets.

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};

/// Relative slack allowed when comparing spending against available resource.
/// Budgets are accumulated in floating point (e.g. `1.6 + 0.1·k`), so an
/// action that exactly exhausts the budget must not be rejected by rounding.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Attacker,
    Defender,
}

/// Index into a player's two-element type set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeIndex {
    Low,
    High,
}

impl TypeIndex {
    pub const BOTH: [TypeIndex; 2] = [TypeIndex::Low, TypeIndex::High];

    pub fn idx(self) -> usize {
        match self {
            TypeIndex::Low => 0,
            TypeIndex::High => 1,
        }
    }
}

/// One value per type of a player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ByType<T> {
    pub low: T,
    pub high: T,
}

impl<T> ByType<T> {
    pub fn new(low: T, high: T) -> Self {
        ByType { low, high }
    }

    pub fn get(&self, t: TypeIndex) -> &T {
        match t {
            TypeIndex::Low => &self.low,
            TypeIndex::High => &self.high,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(TypeIndex, &T) -> U) -> ByType<U> {
        ByType {
            low: f(TypeIndex::Low, &self.low),
            high: f(TypeIndex::High, &self.high),
        }
    }

    pub fn from_fn(mut f: impl FnMut(TypeIndex) -> T) -> Self {
        ByType {
            low: f(TypeIndex::Low),
            high: f(TypeIndex::High),
        }
    }
}

/// A player's true unit cost, its public type set and its resource supply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub beta_true: f64,
    pub type_low: f64,
    pub type_high: f64,
    pub kappa: f64,
    pub rho: f64,
}

impl PlayerSpec {
    pub fn validate(&self, role: Role) -> Result<()> {
        let fail = |msg: &str| Err(GameError::InvalidPlayer(format!("{role:?}: {msg}")));
        let all = [
            self.beta_true,
            self.type_low,
            self.type_high,
            self.kappa,
            self.rho,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return fail("parameters must be finite");
        }
        if self.type_low <= 0.0 {
            return fail("type_low must be positive");
        }
        if self.type_low >= self.type_high {
            return fail("type_low must be below type_high");
        }
        if self.beta_true != self.type_low && self.beta_true != self.type_high {
            return fail("beta_true must equal type_low or type_high");
        }
        if self.rho <= 0.0 {
            return fail("rho must be positive");
        }
        if self.kappa < 0.0 {
            return fail("kappa must be nonnegative");
        }
        if role == Role::Attacker && self.kappa < self.rho {
            return fail("kappa must be at least rho");
        }
        Ok(())
    }

    pub fn type_cost(&self, t: TypeIndex) -> f64 {
        match t {
            TypeIndex::Low => self.type_low,
            TypeIndex::High => self.type_high,
        }
    }

    pub fn types(&self) -> [f64; 2] {
        [self.type_low, self.type_high]
    }

    /// Which type the true cost corresponds to.
    pub fn true_type(&self) -> TypeIndex {
        if self.beta_true == self.type_low {
            TypeIndex::Low
        } else {
            TypeIndex::High
        }
    }
}

/// Per-step edge counts acted on so far.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ledger {
    counts: Vec<usize>,
}

impl Ledger {
    pub fn new() -> Self {
        Ledger::default()
    }

    pub fn from_counts(counts: Vec<usize>) -> Self {
        Ledger { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// `κ + ρ·k − β·Σ counts`. Negative only for a hypothesized cost the
    /// history could not have been paid with.
    pub fn remaining_budget(&self, beta: f64, kappa: f64, rho: f64, k: usize) -> f64 {
        kappa + rho * k as f64 - beta * self.total() as f64
    }

    /// Largest action size affordable at step `k` with unit cost `beta`,
    /// capped at the pool size.
    pub fn max_affordable_edges(
        &self,
        beta: f64,
        kappa: f64,
        rho: f64,
        k: usize,
        pool: usize,
    ) -> usize {
        let remaining = self.remaining_budget(beta, kappa, rho, k);
        if remaining < 0.0 {
            return 0;
        }
        let affordable = (remaining / beta + BUDGET_TOLERANCE).floor();
        if affordable >= pool as f64 {
            pool
        } else {
            affordable as usize
        }
    }

    /// Appends this step's count after checking the true-cost constraint
    /// `β·Σ_{m≤k} counts[m] ≤ κ + ρ·k`.
    pub fn record_action(&self, count: usize, spec: &PlayerSpec) -> Result<Ledger> {
        let k = self.counts.len();
        let spent = spec.beta_true * (self.total() + count) as f64;
        let available = spec.kappa + spec.rho * k as f64;
        if !within_budget(spent, available) {
            return Err(GameError::BudgetViolation { spent, available });
        }
        let mut counts = self.counts.clone();
        counts.push(count);
        Ok(Ledger { counts })
    }

    /// Re-checks the cumulative constraint at every recorded step.
    pub fn satisfies_budget(&self, spec: &PlayerSpec) -> bool {
        let mut total = 0usize;
        self.counts.iter().enumerate().all(|(k, &c)| {
            total += c;
            within_budget(
                spec.beta_true * total as f64,
                spec.kappa + spec.rho * k as f64,
            )
        })
    }
}

pub(crate) fn within_budget(spent: f64, available: f64) -> bool {
    spent <= available + BUDGET_TOLERANCE * available.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn attacker() -> PlayerSpec {
        PlayerSpec {
            beta_true: 0.1,
            type_low: 0.1,
            type_high: 1.0,
            kappa: 2.0,
            rho: 0.2,
        }
    }

    #[test]
    fn remaining_budget_examples() {
        assert_eq!(Ledger::new().remaining_budget(0.1, 2.0, 0.2, 0), 2.0);
        let l = Ledger::from_counts(vec![5]);
        assert_abs_diff_eq!(l.remaining_budget(0.1, 2.0, 0.2, 1), 1.7, epsilon = 1e-12);
        assert_abs_diff_eq!(l.remaining_budget(1.0, 1.6, 0.1, 1), -3.3, epsilon = 1e-12);
    }

    #[test]
    fn max_affordable_examples() {
        assert_eq!(Ledger::new().max_affordable_edges(0.1, 2.0, 0.2, 0, 5), 5);
        // remaining 0.09 with unit cost 0.1
        assert_eq!(Ledger::new().max_affordable_edges(0.1, 0.09, 0.01, 0, 5), 0);
        // remaining 1.0 with unit cost 0.5
        assert_eq!(Ledger::new().max_affordable_edges(0.5, 1.0, 0.1, 0, 10), 2);
        // hypothesized type that could not have paid for the history
        let l = Ledger::from_counts(vec![5]);
        assert_eq!(l.max_affordable_edges(1.0, 1.6, 0.1, 1, 5), 0);
    }

    #[test]
    fn exact_exhaustion_is_affordable() {
        // 1.6 + 0.1·4 accumulates to 2.0 up to rounding
        let l = Ledger::from_counts(vec![0, 0, 0, 0]);
        assert_eq!(l.max_affordable_edges(1.0, 1.6, 0.1, 4, 5), 2);
        let spec = PlayerSpec {
            beta_true: 1.0,
            type_low: 0.5,
            type_high: 1.0,
            kappa: 1.6,
            rho: 0.1,
        };
        assert!(l.record_action(2, &spec).is_ok());
        assert!(l.record_action(3, &spec).is_err());
    }

    #[test]
    fn record_action_examples() {
        let spec = attacker();
        let l = Ledger::new().record_action(5, &spec).unwrap();
        assert_eq!(l.counts(), &[5]);
        let l = l.record_action(0, &spec).unwrap();
        assert_eq!(l.counts(), &[5, 0]);

        let costly = PlayerSpec {
            beta_true: 1.0,
            type_high: 1.0,
            type_low: 0.5,
            ..spec
        };
        assert!(matches!(
            Ledger::new().record_action(3, &costly),
            Err(GameError::BudgetViolation { .. })
        ));
    }

    #[test]
    fn player_validation() {
        assert!(attacker().validate(Role::Attacker).is_ok());
        let bad = PlayerSpec {
            kappa: 0.1,
            ..attacker()
        };
        assert!(bad.validate(Role::Attacker).is_err());
        assert!(bad.validate(Role::Defender).is_ok());
        let off_type = PlayerSpec {
            beta_true: 0.3,
            ..attacker()
        };
        assert!(off_type.validate(Role::Defender).is_err());
        let flipped = PlayerSpec {
            type_low: 1.0,
            type_high: 0.1,
            ..attacker()
        };
        assert!(flipped.validate(Role::Defender).is_err());
    }

    proptest! {
        #[test]
        fn affordable_edges_grow_with_time(
            counts in proptest::collection::vec(0usize..4, 0..6),
            beta in 0.05f64..2.0,
            kappa in 0.0f64..5.0,
            rho in 0.01f64..1.0,
            extra in 0usize..10,
        ) {
            let l = Ledger::from_counts(counts.clone());
            let k = counts.len();
            let now = l.max_affordable_edges(beta, kappa, rho, k, 8);
            let later = l.max_affordable_edges(beta, kappa, rho, k + extra, 8);
            prop_assert!(later >= now);
        }

        #[test]
        fn cheaper_type_affords_at_least_as_much(
            counts in proptest::collection::vec(0usize..4, 0..6),
            low in 0.05f64..1.0,
            gap in 0.01f64..2.0,
            kappa in 0.0f64..5.0,
            rho in 0.01f64..1.0,
        ) {
            let l = Ledger::from_counts(counts.clone());
            let k = counts.len();
            let high = low + gap;
            prop_assert!(
                l.max_affordable_edges(low, kappa, rho, k, 8)
                    >= l.max_affordable_edges(high, kappa, rho, k, 8)
            );
        }
    }
}
