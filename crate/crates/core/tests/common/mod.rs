//! Reference implementations for tests: a from-scratch consensus step,
//! pairwise disagreement and exhaustive equilibrium enumeration over every
//! type-contingent profile of tiny instances.

#![allow(dead_code)]

use jamming_game::{Belief, EdgeSet, Graph, StateVector, WeightMatrix};

pub const TOL: f64 = 1e-9;

/// A tiny game instance in plain data.
pub struct Instance {
    pub x: Vec<f64>,
    /// `(lo, hi, weight)` with 0-based agents.
    pub edges: Vec<(usize, usize, f64)>,
    pub attacker_types: [f64; 2],
    pub defender_types: [f64; 2],
}

impl Instance {
    pub fn from_lib(x: &StateVector, g: &Graph, w: &WeightMatrix, att: [f64; 2], def: [f64; 2]) -> Self {
        Instance {
            x: x.as_slice().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|e| (e.lo(), e.hi(), w.get(e).unwrap()))
                .collect(),
            attacker_types: att,
            defender_types: def,
        }
    }

    pub fn two_agent(d: f64, a: f64, att: [f64; 2], def: [f64; 2]) -> Self {
        Instance {
            x: vec![d, 0.0],
            edges: vec![(0, 1, a)],
            attacker_types: att,
            defender_types: def,
        }
    }

    /// Pairwise disagreement after one step with edges `attack \ defend` cut.
    pub fn z(&self, attack: &[bool], defend: &[bool]) -> f64 {
        let mut next = self.x.clone();
        for (idx, &(i, j, a)) in self.edges.iter().enumerate() {
            if attack[idx] && !defend[idx] {
                continue;
            }
            next[i] += a * (self.x[j] - self.x[i]);
            next[j] += a * (self.x[i] - self.x[j]);
        }
        let mut z = 0.0;
        for i in 0..next.len() {
            for j in i + 1..next.len() {
                z += (next[i] - next[j]).powi(2);
            }
        }
        z
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }
}

/// Every edge subset (as membership vectors) of size at most `max`.
pub fn actions(m: usize, max: usize) -> Vec<Vec<bool>> {
    (0..1usize << m)
        .map(|bits| (0..m).map(|i| bits >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|v| v.iter().filter(|&&b| b).count() <= max)
        .collect()
}

pub fn size(a: &[bool]) -> f64 {
    a.iter().filter(|&&b| b).count() as f64
}

pub fn to_set(g: &Graph, a: &[bool]) -> EdgeSet {
    g.edges()
        .iter()
        .zip(a)
        .filter(|(_, &on)| on)
        .map(|(e, _)| *e)
        .collect()
}

fn is_best(value: f64, all: impl IntoIterator<Item = f64>) -> bool {
    all.into_iter().all(|v| v <= value + TOL)
}

/// A type-contingent pure profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub attack: [Vec<bool>; 2],
    pub defend: [Vec<bool>; 2],
}

/// All pure Bayesian equilibria of the simultaneous-move game.
pub fn brute_bne(
    inst: &Instance,
    mu_att: [f64; 2],
    mu_def: [f64; 2],
    att_caps: [usize; 2],
    def_caps: [usize; 2],
) -> Vec<Profile> {
    assert!(inst.m() <= 4, "brute force is for tiny instances");
    let fa = [actions(inst.m(), att_caps[0]), actions(inst.m(), att_caps[1])];
    let fd = [actions(inst.m(), def_caps[0]), actions(inst.m(), def_caps[1])];
    let ua = |t: usize, a: &[bool], d: &[Vec<bool>; 2]| -> f64 {
        (0..2)
            .map(|s| {
                mu_att[s]
                    * (inst.z(a, &d[s]) + inst.defender_types[s] * size(&d[s])
                        - inst.attacker_types[t] * size(a))
            })
            .sum()
    };
    let ud = |s: usize, d: &[bool], a: &[Vec<bool>; 2]| -> f64 {
        (0..2)
            .map(|t| {
                mu_def[t]
                    * (-inst.z(&a[t], d) - inst.defender_types[s] * size(d)
                        + inst.attacker_types[t] * size(&a[t]))
            })
            .sum()
    };
    let mut out = Vec::new();
    for al in &fa[0] {
        for ah in &fa[1] {
            let a = [al.clone(), ah.clone()];
            for dl in &fd[0] {
                for dh in &fd[1] {
                    let d = [dl.clone(), dh.clone()];
                    let ok = (0..2).all(|t| is_best(ua(t, &a[t], &d), fa[t].iter().map(|c| ua(t, c, &d))))
                        && (0..2).all(|s| is_best(ud(s, &d[s], &a), fd[s].iter().map(|c| ud(s, c, &a))));
                    if ok {
                        out.push(Profile {
                            attack: a.clone(),
                            defend: d,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Equilibrium-path outcome of a sequential game.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub attack: [Vec<bool>; 2],
    /// Response on the path: per defender type (screening) or per attacker
    /// type's action (signaling).
    pub response: [Vec<bool>; 2],
}

/// Indices of the best replies among `values`.
fn best_indices(values: &[f64]) -> Vec<usize> {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len()).filter(|&i| values[i] >= top - TOL).collect()
}

/// All equilibrium outcomes of the screening game: the attacker's cost is
/// `attacker_types[attacker_type]`, each defender type replies optimally to
/// every possible attack, and the attack is optimal in expectation over the
/// defender types. Replies to different attacks are chosen independently, so
/// an attack is an equilibrium outcome iff it beats every alternative under
/// the least favourable optimal replies to that alternative.
pub fn brute_screening(
    inst: &Instance,
    attacker_type: usize,
    mu_att: [f64; 2],
    att_cap: usize,
    def_caps: [usize; 2],
) -> Vec<Outcome> {
    let fa = actions(inst.m(), att_cap);
    let fd = [actions(inst.m(), def_caps[0]), actions(inst.m(), def_caps[1])];
    let beta = inst.attacker_types[attacker_type];
    let ud = |s: usize, a: &[bool], d: &[bool]| -inst.z(a, d) - inst.defender_types[s] * size(d) + beta * size(a);
    let replies: Vec<[Vec<usize>; 2]> = fa
        .iter()
        .map(|a| [0, 1].map(|s| best_indices(&fd[s].iter().map(|d| ud(s, a, d)).collect::<Vec<_>>())))
        .collect();
    let ua = |ai: usize, dl: usize, dh: usize| -> f64 {
        let a = &fa[ai];
        let d = [&fd[0][dl], &fd[1][dh]];
        (0..2)
            .map(|s| mu_att[s] * (inst.z(a, d[s]) + inst.defender_types[s] * size(d[s]) - beta * size(a)))
            .sum()
    };
    let worst: Vec<f64> = (0..fa.len())
        .map(|ai| {
            let mut v = f64::INFINITY;
            for &dl in &replies[ai][0] {
                for &dh in &replies[ai][1] {
                    v = v.min(ua(ai, dl, dh));
                }
            }
            v
        })
        .collect();
    let mut out = Vec::new();
    for ai in 0..fa.len() {
        for &dl in &replies[ai][0] {
            for &dh in &replies[ai][1] {
                let v = ua(ai, dl, dh);
                if (0..fa.len()).all(|bi| bi == ai || worst[bi] <= v + TOL) {
                    out.push(Outcome {
                        attack: [fa[ai].clone(), fa[ai].clone()],
                        response: [fd[0][dl].clone(), fd[1][dh].clone()],
                    });
                }
            }
        }
    }
    out
}

/// All pure equilibrium outcomes of the signaling game with the defender's
/// cost `defender_types[defender_type]`. Beliefs follow Bayes' rule on the
/// path and stay at the prior off the path and under pooling. Every
/// off-path attack needs one optimal reply that deters both attacker types.
pub fn brute_signaling(
    inst: &Instance,
    defender_type: usize,
    prior_low: f64,
    att_caps: [usize; 2],
    def_cap: usize,
) -> Vec<(Outcome, [f64; 2])> {
    let fa = [actions(inst.m(), att_caps[0]), actions(inst.m(), att_caps[1])];
    let all_attacks = actions(inst.m(), att_caps[0].max(att_caps[1]));
    let fd = actions(inst.m(), def_cap);
    let beta_d = inst.defender_types[defender_type];
    let ua = |t: usize, a: &[bool], d: &[bool]| inst.z(a, d) + beta_d * size(d) - inst.attacker_types[t] * size(a);
    let replies = |a: &[bool], mu: f64| -> Vec<usize> {
        let values: Vec<f64> = fd
            .iter()
            .map(|d| {
                let base = -inst.z(a, d) - beta_d * size(d);
                mu * (base + inst.attacker_types[0] * size(a)) + (1.0 - mu) * (base + inst.attacker_types[1] * size(a))
            })
            .collect();
        best_indices(&values)
    };
    let off_path: Vec<Vec<usize>> = all_attacks.iter().map(|a| replies(a, prior_low)).collect();
    let mut out = Vec::new();
    for al in &fa[0] {
        for ah in &fa[1] {
            let separating = al != ah;
            let post = if separating { [1.0, 0.0] } else { [prior_low, prior_low] };
            let rl = replies(al, post[0]);
            let rh = if separating { replies(ah, post[1]) } else { rl.clone() };
            for &dl in &rl {
                for &dh in &rh {
                    if !separating && dl != dh {
                        continue;
                    }
                    let value = [ua(0, al, &fd[dl]), ua(1, ah, &fd[dh])];
                    let reply_on_path = |a: &Vec<bool>| {
                        if a == al {
                            Some(dl)
                        } else if a == ah {
                            Some(dh)
                        } else {
                            None
                        }
                    };
                    let deterred = all_attacks.iter().enumerate().all(|(bi, b)| {
                        let can = [fa[0].contains(b), fa[1].contains(b)];
                        let holds = |d: usize| (0..2).all(|t| !can[t] || ua(t, b, &fd[d]) <= value[t] + TOL);
                        match reply_on_path(b) {
                            Some(d) => holds(d),
                            None => off_path[bi].iter().any(|&d| holds(d)),
                        }
                    });
                    if deterred {
                        out.push((
                            Outcome {
                                attack: [al.clone(), ah.clone()],
                                response: [fd[dl].clone(), fd[dh].clone()],
                            },
                            post,
                        ));
                    }
                }
            }
        }
    }
    out
}

pub fn belief_pair(b: &Belief) -> [f64; 2] {
    b.probs()
}

pub fn flags(g: &Graph, set: &EdgeSet) -> Vec<bool> {
    g.edges().iter().map(|e| set.contains(e)).collect()
}
