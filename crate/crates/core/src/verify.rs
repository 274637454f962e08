//! Self-check suites run by the `verify` command: solvers against the
//! two-agent closed forms, trace invariants on random scenarios, and the
//! consensus-prevention scenarios.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    condition_report, idle_conditions, screening_closed_form, signaling_closed_form, TwoAgentView,
};
use crate::beliefs::Belief;
use crate::bne::{solve_bne, Feasibility, StageBeliefs};
use crate::engine::{consensus_reached, run, GameMode, TraceRecord};
use crate::error::{GameError, Result};
use crate::graph::{disagreement, EdgeSet, Graph, StateVector, WeightMatrix};
use crate::pbe::{solve_screening, solve_signaling, EqClass};
use crate::resources::{within_budget, ByType, PlayerSpec, TypeIndex};
use crate::scenario::ScenarioConfig;
use crate::stage::StageGame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    TwoAgentOracle,
    Invariants,
    Theorems,
}

impl FromStr for Suite {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-agent-oracle" => Ok(Suite::TwoAgentOracle),
            "invariants" => Ok(Suite::Invariants),
            "theorems" => Ok(Suite::Theorems),
            other => Err(GameError::Parse(format!("unknown suite {other:?}"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::TwoAgentOracle => "two-agent-oracle",
            Suite::Invariants => "invariants",
            Suite::Theorems => "theorems",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match suite {
        Suite::TwoAgentOracle => two_agent_oracle(&mut rng, trials),
        Suite::Invariants => invariants(&mut rng, trials),
        Suite::Theorems => theorems(),
    }
}

struct TwoAgent {
    x: StateVector,
    g: Graph,
    w: WeightMatrix,
}

impl TwoAgent {
    fn sample(rng: &mut impl Rng) -> Self {
        let d = rng.gen_range(0.1..=3.0);
        let a = rng.gen_range(0.001..0.499);
        let g = Graph::path(2).expect("two agents");
        TwoAgent {
            w: WeightMatrix::uniform(&g, a).expect("weight below one half"),
            x: StateVector::new(vec![d, 0.0]).expect("finite"),
            g,
        }
    }

    fn view(&self) -> TwoAgentView {
        let x = self.x.as_slice();
        TwoAgentView::new(x[0], x[1], self.w.get(&self.g.edges()[0]).unwrap_or(0.0))
    }

    fn game(&self, att: [f64; 2], def: [f64; 2]) -> StageGame<'_> {
        StageGame {
            x: &self.x,
            base: &self.g,
            w: &self.w,
            attacker_types: att,
            defender_types: def,
        }
    }
}

fn one_each() -> Feasibility {
    Feasibility {
        attacker: ByType::new(1, 1),
        defender: ByType::new(1, 1),
    }
}

fn pair_around(rng: &mut impl Rng, zt: f64, regime: usize) -> [f64; 2] {
    let below = |rng: &mut dyn rand::RngCore| rng.gen_range(0.01 * zt..0.99 * zt);
    let above = |rng: &mut dyn rand::RngCore| zt * rng.gen_range(1.01..3.0);
    let mut p = match regime {
        0 => [below(rng), below(rng)],
        1 => [above(rng), above(rng)],
        _ => [below(rng), above(rng)],
    };
    p.sort_by(f64::total_cmp);
    if p[0] == p[1] {
        p[1] *= 1.5;
    }
    p
}

fn edge_flag(set: &EdgeSet) -> bool {
    !set.is_empty()
}

fn two_agent_oracle(rng: &mut ChaCha8Rng, trials: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::default();
    for trial in 0..trials {
        let s = TwoAgent::sample(rng);
        let view = s.view();

        let defender_types = pair_around(rng, view.zt, trial % 3);
        let attacker_cost = rng.gen_range(0.01..2.0);
        let mu = rng.gen_range(0.0..=1.0);
        let game = s.game([attacker_cost, attacker_cost + 1.0], defender_types);
        let r = solve_screening(&game, TypeIndex::Low, &Belief::with_low(mu), &one_each(), 16)?;
        let expect = screening_closed_form(&view, attacker_cost, defender_types, mu);
        let got_defend = if r.attack.is_empty() {
            None
        } else {
            Some(ByType::new(edge_flag(&r.response.low), edge_flag(&r.response.high)))
        };
        report.check(
            edge_flag(&r.attack) == expect.attack
                && got_defend.is_none_or(|d| d == expect.defend),
            || format!("screening trial {trial}: {view:?} beta_a={attacker_cost} theta_d={defender_types:?} mu={mu}: solver {r:?}, closed form {expect:?}"),
        );

        let attacker_types = pair_around(rng, view.zt, trial % 3);
        let defender_cost = rng.gen_range(0.01..3.0);
        let prior = Belief::with_low(rng.gen_range(0.0..=1.0));
        let game = s.game(attacker_types, [defender_cost, defender_cost + 1.0]);
        let r = solve_signaling(&game, TypeIndex::Low, &prior, &one_each(), 16)?;
        let expect = signaling_closed_form(&view, attacker_types, defender_cost);
        let attack = ByType::new(edge_flag(&r.attack.low), edge_flag(&r.attack.high));
        let responses_ok = [TypeIndex::Low, TypeIndex::High].iter().all(|&t| {
            !*attack.get(t) || edge_flag(r.response.get(t)) == expect.defend_if_attacked
        });
        let posterior_ok = match r.classification {
            EqClass::Separating => {
                r.posterior.low == Belief::certain(true) && r.posterior.high == Belief::certain(false)
            }
            _ => r.posterior.low == prior && r.posterior.high == prior,
        };
        report.check(
            attack == expect.attack
                && r.classification == expect.classification
                && responses_ok
                && posterior_ok,
            || format!("signaling trial {trial}: {view:?} theta_a={attacker_types:?} beta_d={defender_cost}: solver {r:?}, closed form {expect:?}"),
        );

        let floor = view.zt * rng.gen_range(1.01..3.0);
        let att = [floor + rng.gen_range(0.0..1.0), floor + rng.gen_range(1.0..2.0)];
        let def = [floor + rng.gen_range(0.0..1.0), floor + rng.gen_range(1.0..2.0)];
        let idle = idle_conditions(&view, def[0], att[0]);
        let beliefs = StageBeliefs {
            attacker: Belief::with_low(rng.gen_range(0.0..=1.0)),
            defender: Belief::with_low(rng.gen_range(0.0..=1.0)),
        };
        let r = solve_bne(&s.game(att, def), &beliefs, &one_each(), 16)?;
        let all_empty = [&r.attacker.low, &r.attacker.high, &r.defender.low, &r.defender.high]
            .iter()
            .all(|s| s.is_empty());
        report.check(idle.attacker_idle && idle.defender_idle && all_empty, || {
            format!("idle trial {trial}: {view:?} att={att:?} def={def:?}: {r:?}")
        });
    }
    Ok(report)
}

fn random_spec(rng: &mut impl Rng, attacker: bool) -> PlayerSpec {
    let type_low = rng.gen_range(0.05..1.0);
    let type_high = type_low + rng.gen_range(0.05..1.5);
    let rho = rng.gen_range(0.05..0.5);
    let kappa = if attacker {
        rho + rng.gen_range(0.0..3.0)
    } else {
        rng.gen_range(0.0..3.0)
    };
    PlayerSpec {
        beta_true: if rng.gen_bool(0.5) { type_low } else { type_high },
        type_low,
        type_high,
        kappa,
        rho,
    }
}

/// A random connected scenario with at most five agents and six edges.
pub fn random_scenario(rng: &mut impl Rng, mode: GameMode) -> ScenarioConfig {
    let n = rng.gen_range(2..=5);
    let mut edges: Vec<[usize; 2]> = (2..=n).map(|j| [rng.gen_range(1..j), j]).collect();
    let mut extra: Vec<[usize; 2]> = (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| [i, j]))
        .filter(|e| !edges.contains(e))
        .collect();
    extra.shuffle(rng);
    let room = 6 - edges.len();
    edges.extend(extra.into_iter().take(rng.gen_range(0..=room)));
    edges.sort();
    let mut degree = vec![0usize; n + 1];
    for &[i, j] in &edges {
        degree[i] += 1;
        degree[j] += 1;
    }
    let weights = edges
        .iter()
        .map(|&[i, j]| {
            let limit = 0.95 / degree[i].max(degree[j]) as f64;
            (i, j, limit * rng.gen_range(0.05..1.0))
        })
        .collect();
    ScenarioConfig {
        n,
        edges,
        x0: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        weights: Some(weights),
        mode,
        horizon: rng.gen_range(1..=30),
        attacker: random_spec(rng, true),
        defender: random_spec(rng, false),
        alpha: rng.gen_range(0.05..0.45),
        epsilon_consensus: 1e-6,
        enumeration_cap: 16,
        seed: None,
    }
}

/// Violations of the budget, belief, response-subset and monotonicity
/// invariants in one trace.
pub fn trace_violations(cfg: &ScenarioConfig, trace: &[TraceRecord]) -> Vec<String> {
    let mut out = Vec::new();
    let mut spent = [0usize; 2];
    let mut prev_z = disagreement(&cfg.x0);
    for r in trace {
        spent[0] += r.attack.len();
        spent[1] += r.defend.len();
        for (who, spec, count) in [("attacker", &cfg.attacker, spent[0]), ("defender", &cfg.defender, spent[1])] {
            let available = spec.kappa + spec.rho * r.k as f64;
            if !within_budget(spec.beta_true * count as f64, available) {
                out.push(format!("k={}: {who} overspent", r.k));
            }
        }
        for (name, p) in [("mu_att_low", r.mu_att_low), ("mu_def_low", r.mu_def_low)]
            .into_iter()
            .chain(r.posterior_def_low.map(|p| ("posterior_def_low", p)))
        {
            if !(0.0..=1.0).contains(&p) {
                out.push(format!("k={}: {name}={p} outside [0, 1]", r.k));
            }
        }
        if cfg.mode != GameMode::Bne && !r.defend.is_subset(&r.attack) {
            out.push(format!("k={}: defended {} outside attack {}", r.k, r.defend, r.attack));
        }
        if r.attack.is_empty() && r.z > prev_z + 1e-12 * prev_z.max(1.0) {
            out.push(format!("k={}: z rose from {prev_z} to {} without attack", r.k, r.z));
        }
        prev_z = r.z;
    }
    out
}

fn invariants(rng: &mut ChaCha8Rng, trials: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::default();
    let modes = [GameMode::Bne, GameMode::Screening, GameMode::Signaling];
    for trial in 0..trials {
        let cfg = random_scenario(rng, modes[trial % 3]);
        cfg.validate()?;
        let trace = run(&cfg)?;
        let bad = trace_violations(&cfg, &trace);
        report.check(bad.is_empty(), || format!("scenario {trial} ({}): {}", cfg.mode, bad.join("; ")));
    }
    Ok(report)
}

fn two_agent_scenario(mode: GameMode, horizon: usize, attacker: PlayerSpec, defender: PlayerSpec) -> ScenarioConfig {
    ScenarioConfig {
        n: 2,
        edges: vec![[1, 2]],
        x0: vec![1.0, 0.0],
        weights: Some(vec![(1, 2, 0.25)]),
        mode,
        horizon,
        attacker,
        defender,
        alpha: 0.25,
        epsilon_consensus: 1e-6,
        enumeration_cap: 16,
        seed: None,
    }
}

/// Cheap attacker whose supply covers one cut per step.
pub fn persistent_attacker() -> PlayerSpec {
    PlayerSpec {
        beta_true: 0.1,
        type_low: 0.1,
        type_high: 1.0,
        kappa: 0.2,
        rho: 0.2,
    }
}

fn theorems() -> Result<SuiteReport> {
    let mut report = SuiteReport::default();
    let defender = PlayerSpec {
        beta_true: 1.0,
        type_low: 0.5,
        type_high: 1.0,
        kappa: 1.6,
        rho: 0.1,
    };
    let cfg = two_agent_scenario(GameMode::Signaling, 100, persistent_attacker(), defender);
    let cond = condition_report(&cfg)?;
    report.check(cond.signaling_prevention, || format!("signaling prevention conditions do not hold: {cond:?}"));
    let trace = run(&cfg)?;
    let z0 = disagreement(&cfg.x0);
    report.check(
        trace.len() == 100
            && trace.iter().all(|r| !r.attack.is_empty() && r.defend.is_empty() && r.z == z0),
        || "signaling prevention run: state moved, an attack was skipped or the edge was defended".into(),
    );

    // gap 0.75 sits strictly between the attacker cost and the cheap defender cost
    let defender = PlayerSpec {
        beta_true: 1.0,
        type_low: 0.8,
        type_high: 1.0,
        kappa: 1.6,
        rho: 0.1,
    };
    let cfg = two_agent_scenario(GameMode::Screening, 100, persistent_attacker(), defender);
    let cond = condition_report(&cfg)?;
    report.check(cond.screening_prevention_true_cost, || format!("screening prevention conditions do not hold: {cond:?}"));
    let trace = run(&cfg)?;
    report.check(consensus_reached(&trace, cfg.epsilon_consensus).is_none(), || {
        "screening prevention run reached consensus".into()
    });

    let quiet = PlayerSpec {
        beta_true: 1.0,
        type_low: 0.5,
        type_high: 1.0,
        kappa: 1.6,
        rho: 0.1,
    };
    let mut cfg = two_agent_scenario(GameMode::Bne, 200, persistent_attacker(), quiet);
    cfg.x0 = vec![0.2, 0.0];
    let cond = condition_report(&cfg)?;
    report.check(cond.attacks_cease_at_start, || format!("disagreement not below the attacker cost: {cond:?}"));
    let trace = run(&cfg)?;
    report.check(
        trace.iter().all(|r| r.attack.is_empty())
            && consensus_reached(&trace, cfg.epsilon_consensus).is_some(),
        || "low-disagreement run was attacked or did not converge".into(),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::TwoAgentOracle, Suite::Invariants, Suite::Theorems] {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("all".parse::<Suite>().is_err());
    }

    #[test]
    fn random_scenarios_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let cfg = random_scenario(&mut rng, GameMode::Bne);
            assert!(cfg.edges.len() <= 6 && cfg.n <= 5);
            cfg.validate().unwrap();
        }
    }
}
