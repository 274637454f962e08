//! Shared machinery for the exact solvers: the one-step game description,
//! bitmask actions over base-edge indices, their canonical order and a
//! disagreement lookup over every effective edge set.

use std::cmp::Ordering;

use crate::error::{GameError, Result};
use crate::graph::{disagreement, Graph, StateVector, WeightMatrix};

pub const DEFAULT_ENUMERATION_CAP: usize = 16;
/// Hard ceiling on the cap; the dense disagreement table has `2^|E|` entries.
pub const MAX_ENUMERATION_CAP: usize = 24;

/// One stage of the game: current states, topology, weights and both
/// players' public type sets `[low, high]`.
#[derive(Debug, Clone, Copy)]
pub struct StageGame<'a> {
    pub x: &'a StateVector,
    pub base: &'a Graph,
    pub w: &'a WeightMatrix,
    pub attacker_types: [f64; 2],
    pub defender_types: [f64; 2],
}

impl<'a> StageGame<'a> {
    pub(crate) fn check_cap(&self, cap: usize) -> Result<()> {
        let pool = self.base.edge_count();
        if pool > cap.min(MAX_ENUMERATION_CAP) {
            return Err(GameError::EnumerationCap { pool, cap });
        }
        Ok(())
    }

    pub(crate) fn table(&self) -> Result<ZTable> {
        ZTable::new(self.x, self.base, self.w)
    }

    pub(crate) fn on_demand(&self) -> Result<OnDemand<'a>> {
        OnDemand::new(self.x, self.base, self.w)
    }
}

/// Post-step disagreement for an (attack, defense) pair of masks.
pub(crate) trait ZSource {
    fn z(&self, attack: u64, defend: u64) -> f64;
}

fn step_masked(x: &[f64], edges: &[(usize, usize, f64)], effective: u64, out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(x);
    for (idx, &(lo, hi, a)) in edges.iter().enumerate() {
        if effective >> idx & 1 == 1 {
            let flow = a * (x[hi] - x[lo]);
            out[lo] += flow;
            out[hi] -= flow;
        }
    }
}

fn weighted_edges(g: &Graph, w: &WeightMatrix) -> Result<Vec<(usize, usize, f64)>> {
    let weights = w.by_index(g)?;
    Ok(g.edges()
        .iter()
        .zip(weights)
        .map(|(e, a)| (e.lo(), e.hi(), a))
        .collect())
}

/// Dense table of `z` over all `2^|E|` effective edge sets.
pub(crate) struct ZTable {
    full: u64,
    z: Vec<f64>,
}

impl ZTable {
    fn new(x: &StateVector, g: &Graph, w: &WeightMatrix) -> Result<Self> {
        let m = g.edge_count();
        if m > MAX_ENUMERATION_CAP {
            return Err(GameError::EnumerationCap {
                pool: m,
                cap: MAX_ENUMERATION_CAP,
            });
        }
        let edges = weighted_edges(g, w)?;
        let mut buf = Vec::with_capacity(g.n());
        let z = (0..1u64 << m)
            .map(|eff| {
                step_masked(x.as_slice(), &edges, eff, &mut buf);
                disagreement(&buf)
            })
            .collect();
        Ok(ZTable {
            full: g.full_mask(),
            z,
        })
    }
}

impl ZSource for ZTable {
    fn z(&self, attack: u64, defend: u64) -> f64 {
        self.z[((self.full & !attack) | defend) as usize]
    }
}

/// Evaluates `z` per query; used by the single-call public helpers.
pub(crate) struct OnDemand<'a> {
    x: &'a StateVector,
    full: u64,
    edges: Vec<(usize, usize, f64)>,
}

impl<'a> OnDemand<'a> {
    fn new(x: &'a StateVector, g: &Graph, w: &WeightMatrix) -> Result<Self> {
        if x.len() != g.n() {
            return Err(GameError::ShapeMismatch {
                expected: g.n(),
                got: x.len(),
            });
        }
        Ok(OnDemand {
            x,
            full: g.full_mask(),
            edges: weighted_edges(g, w)?,
        })
    }
}

impl ZSource for OnDemand<'_> {
    fn z(&self, attack: u64, defend: u64) -> f64 {
        let mut buf = Vec::with_capacity(self.x.len());
        step_masked(
            self.x.as_slice(),
            &self.edges,
            (self.full & !attack) | defend,
            &mut buf,
        );
        disagreement(&buf)
    }
}

pub(crate) fn card(mask: u64) -> f64 {
    mask.count_ones() as f64
}

/// Canonical action order: fewer edges first, then lexicographic on the
/// sorted edge-index lists.
pub(crate) fn action_cmp(a: u64, b: u64) -> Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| lex_cmp(a, b))
}

/// Lexicographic order of sorted edge-index lists (a prefix sorts first).
pub(crate) fn lex_cmp(mut a: u64, mut b: u64) -> Ordering {
    loop {
        match (a, b) {
            (0, 0) => return Ordering::Equal,
            (0, _) => return Ordering::Less,
            (_, 0) => return Ordering::Greater,
            _ => {
                let (la, lb) = (a.trailing_zeros(), b.trailing_zeros());
                if la != lb {
                    return la.cmp(&lb);
                }
                a &= a - 1;
                b &= b - 1;
            }
        }
    }
}

/// All subsets of `pool` with at most `max_edges` members, in lexicographic
/// order of their sorted index lists, starting with the empty set.
pub(crate) fn subsets_lex(pool: u64, max_edges: usize) -> Vec<u64> {
    let bits: Vec<u32> = (0..64).filter(|b| pool >> b & 1 == 1).collect();
    let mut out = Vec::new();
    fn walk(bits: &[u32], from: usize, cur: u64, left: usize, out: &mut Vec<u64>) {
        out.push(cur);
        if left == 0 {
            return;
        }
        for i in from..bits.len() {
            walk(bits, i + 1, cur | 1u64 << bits[i], left - 1, out);
        }
    }
    walk(&bits, 0, 0, max_edges, &mut out);
    out
}

/// Relative gap below which two utilities count as tied. Mathematically
/// equal utilities (mirror-image actions, belief weights summing to one)
/// differ by a few ulps once evaluated.
pub const VALUE_TOLERANCE: f64 = 1e-12;

pub(crate) fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= VALUE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Highest-valued candidate; ties (within [`VALUE_TOLERANCE`]) resolve to
/// the canonically smallest action.
pub(crate) fn argmax(candidates: &[u64], value: impl FnMut(u64) -> f64) -> (u64, f64) {
    let values: Vec<f64> = candidates.iter().copied().map(value).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    candidates
        .iter()
        .zip(&values)
        .filter(|(_, &v)| near(v, best))
        .min_by(|a, b| action_cmp(*a.0, *b.0))
        .map(|(&c, &v)| (c, v))
        .expect("candidate list always contains the empty action")
}

/// Every candidate tied with the best value.
pub(crate) fn argmax_set(candidates: &[u64], value: impl FnMut(u64) -> f64) -> Vec<u64> {
    let values: Vec<f64> = candidates.iter().copied().map(value).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    candidates
        .iter()
        .zip(&values)
        .filter(|(_, &v)| near(v, best))
        .map(|(&c, _)| c)
        .collect()
}
