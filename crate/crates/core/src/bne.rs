//! Pure-strategy Bayesian Nash equilibria of the simultaneous-move stage
//! game, found by exhaustive search over type-contingent edge-subset
//! strategies.
//!
//! A profile `(A_low, A_high, D_low, D_high)` is an equilibrium when every
//! attacker type's action maximizes its expected utility over the defender's
//! types (weighted by the attacker's belief) against `(D_low, D_high)`, and
//! symmetrically for each defender type against `(A_low, A_high)`.
//!
//! The search enumerates attacker strategy pairs, computes each defender
//! type's full best-response set against the pair, and keeps the pairs that
//! are themselves best responses to some selection from those sets. Among
//! all equilibria the canonically smallest profile is returned (attacker
//! components first, fewer edges first, then lexicographic).

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::beliefs::Belief;
use crate::error::{GameError, Result};
use crate::graph::EdgeSet;
use crate::resources::{ByType, Ledger, PlayerSpec, TypeIndex};
use crate::stage::{action_cmp, argmax, argmax_set, card, near, subsets_lex, StageGame, ZSource, ZTable};

/// Upper bound on profile checks one search may perform.
pub const BNE_SEARCH_LIMIT: u128 = 1 << 32;

/// A player's action for each of its possible types.
pub type TypeStrategy = ByType<EdgeSet>;

/// Largest action size each hypothesized type can afford this step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Feasibility {
    pub attacker: ByType<usize>,
    pub defender: ByType<usize>,
}

/// Stage beliefs: the attacker's over defender types and the defender's over
/// attacker types.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageBeliefs {
    pub attacker: Belief,
    pub defender: Belief,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BneResult {
    pub attacker: TypeStrategy,
    pub defender: TypeStrategy,
    /// Number of pure equilibria found.
    pub multiplicity: usize,
    /// No pure equilibrium exists; both players best-responded to a uniform
    /// mix over the opponent's feasible actions instead.
    pub fallback_used: bool,
}

/// All subsets of `pool` with at most `max_edges` edges, in lexicographic
/// order of sorted edge lists.
pub fn feasible_actions(pool: &EdgeSet, max_edges: usize, cap: usize) -> Result<Vec<EdgeSet>> {
    if pool.len() > cap {
        return Err(GameError::EnumerationCap {
            pool: pool.len(),
            cap,
        });
    }
    let edges: Vec<_> = pool.iter().copied().collect();
    let full = if edges.is_empty() {
        0
    } else {
        u64::MAX >> (64 - edges.len())
    };
    Ok(subsets_lex(full, max_edges)
        .into_iter()
        .map(|m| {
            edges
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, e)| *e)
                .collect()
        })
        .collect())
}

/// Resource-exhaustion conditions under which one side of the search is trivial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShortcutPredicates {
    /// Even the cheap defender type cannot afford one strong-signal edge, so
    /// not attacking is never optimal.
    pub defender_exhausted: bool,
    /// Even the cheap attacker type cannot afford one attack, so not
    /// defending is optimal.
    pub attacker_exhausted: bool,
}

pub fn shortcut_predicates(
    attacker_ledger: &Ledger,
    defender_ledger: &Ledger,
    attacker: &PlayerSpec,
    defender: &PlayerSpec,
    k: usize,
) -> ShortcutPredicates {
    let d_spent = defender.type_low * defender_ledger.total() as f64;
    let a_left = attacker.kappa + attacker.rho * (k as f64)
        - attacker.type_low * attacker_ledger.total() as f64;
    ShortcutPredicates {
        defender_exhausted: defender.kappa + defender.rho * (k as f64) < d_spent + defender.type_low,
        attacker_exhausted: a_left < attacker.type_low,
    }
}

struct Search<'t> {
    table: &'t ZTable,
    theta_a: [f64; 2],
    theta_d: [f64; 2],
    mu_a: [f64; 2],
    mu_d: [f64; 2],
    fa: [Vec<u64>; 2],
    fd: [Vec<u64>; 2],
}

impl Search<'_> {
    /// Expected utility of attacker type `t` playing `a` against `(d_low, d_high)`.
    fn attacker_value(&self, t: usize, a: u64, d: [u64; 2]) -> f64 {
        let cost = self.theta_a[t] * card(a);
        (0..2)
            .map(|s| self.mu_a[s] * (self.table.z(a, d[s]) + self.theta_d[s] * card(d[s]) - cost))
            .sum()
    }

    /// Expected utility of defender type `s` playing `d` against `(a_low, a_high)`.
    fn defender_value(&self, s: usize, d: u64, a: [u64; 2]) -> f64 {
        let cost = self.theta_d[s] * card(d);
        (0..2)
            .map(|t| {
                self.mu_d[t] * (-self.table.z(a[t], d) - cost + self.theta_a[t] * card(a[t]))
            })
            .sum()
    }

    fn equilibria(&self) -> Vec<[u64; 4]> {
        self.fa[0]
            .par_iter()
            .flat_map_iter(|&a_low| {
                let mut attacker_best: HashMap<[u64; 2], [f64; 2]> = HashMap::new();
                let mut found = Vec::new();
                for &a_high in &self.fa[1] {
                    let a = [a_low, a_high];
                    let br_low = argmax_set(&self.fd[0], |d| self.defender_value(0, d, a));
                    let br_high = argmax_set(&self.fd[1], |d| self.defender_value(1, d, a));
                    for &d_low in &br_low {
                        for &d_high in &br_high {
                            let d = [d_low, d_high];
                            let best = *attacker_best.entry(d).or_insert_with(|| {
                                [0, 1].map(|t| {
                                    self.fa[t]
                                        .iter()
                                        .map(|&c| self.attacker_value(t, c, d))
                                        .fold(f64::NEG_INFINITY, f64::max)
                                })
                            });
                            if near(self.attacker_value(0, a_low, d), best[0])
                                && near(self.attacker_value(1, a_high, d), best[1])
                            {
                                found.push([a_low, a_high, d_low, d_high]);
                            }
                        }
                    }
                }
                found
            })
            .collect()
    }

    /// Per-type best response to a uniform mix over each opponent type's
    /// feasible actions, weighted by belief.
    fn uniform_fallback(&self) -> [u64; 4] {
        let mean = |xs: &[u64], f: &dyn Fn(u64) -> f64| {
            xs.iter().map(|&v| f(v)).sum::<f64>() / xs.len() as f64
        };
        let attack = [0, 1].map(|t| {
            argmax(&self.fa[t], |a| {
                (0..2)
                    .map(|s| {
                        self.mu_a[s]
                            * mean(&self.fd[s], &|d| {
                                self.table.z(a, d) + self.theta_d[s] * card(d)
                                    - self.theta_a[t] * card(a)
                            })
                    })
                    .sum()
            })
            .0
        });
        let defend = [0, 1].map(|s| {
            argmax(&self.fd[s], |d| {
                (0..2)
                    .map(|t| {
                        self.mu_d[t]
                            * mean(&self.fa[t], &|a| {
                                -self.table.z(a, d) - self.theta_d[s] * card(d)
                                    + self.theta_a[t] * card(a)
                            })
                    })
                    .sum()
            })
            .0
        });
        [attack[0], attack[1], defend[0], defend[1]]
    }
}

fn profile_cmp(a: &[u64; 4], b: &[u64; 4]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| action_cmp(*x, *y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Solves the simultaneous-move stage game exactly.
pub fn solve_bne(
    game: &StageGame<'_>,
    beliefs: &StageBeliefs,
    feasibility: &Feasibility,
    cap: usize,
) -> Result<BneResult> {
    game.check_cap(cap)?;
    let full = game.base.full_mask();
    let fa = [
        subsets_lex(full, feasibility.attacker.low),
        subsets_lex(full, feasibility.attacker.high),
    ];
    let fd = [
        subsets_lex(full, feasibility.defender.low),
        subsets_lex(full, feasibility.defender.high),
    ];
    let work = fa[0].len() as u128 * fa[1].len() as u128 * (fd[0].len() + fd[1].len()) as u128;
    if work > BNE_SEARCH_LIMIT {
        return Err(GameError::SearchTooLarge {
            profiles: work,
            limit: BNE_SEARCH_LIMIT,
        });
    }
    let table = game.table()?;
    let search = Search {
        table: &table,
        theta_a: game.attacker_types,
        theta_d: game.defender_types,
        mu_a: beliefs.attacker.probs(),
        mu_d: beliefs.defender.probs(),
        fa,
        fd,
    };
    let found = search.equilibria();
    let (profile, fallback_used) = match found.iter().min_by(|a, b| profile_cmp(a, b)) {
        Some(p) => (*p, false),
        None => (search.uniform_fallback(), true),
    };
    let edges = |m: u64| game.base.edges_of(m);
    Ok(BneResult {
        attacker: ByType::new(edges(profile[0]), edges(profile[1])),
        defender: ByType::new(edges(profile[2]), edges(profile[3])),
        multiplicity: found.len(),
        fallback_used,
    })
}

impl BneResult {
    pub fn attack_for(&self, t: TypeIndex) -> &EdgeSet {
        self.attacker.get(t)
    }

    pub fn defense_for(&self, t: TypeIndex) -> &EdgeSet {
        self.defender.get(t)
    }
}
