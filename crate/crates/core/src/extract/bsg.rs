//! Dense low-doubling subsets of a function graph.
//!
//! Points of the graph are ranked by how many additive quadruples they sit
//! in; candidate subsets come from degree thresholds and from
//! dependent-random-choice neighbourhoods (points whose difference with a
//! sampled anchor is popular). The candidate maximising `|Γ′|² / |Γ′ − Γ′|`
//! wins.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::additive::group::{add_keys, neg_key, pack, unpack};
use crate::additive::{GroupElem, GroupSet};
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::seeds;
use crate::vectors::{mask, BitVec, QuatVec};
use crate::z4::CrossFn;

const DEGREE_THRESHOLDS: [f64; 4] = [0.9, 0.75, 0.5, 0.25];

/// `{(x, F(x))}` for every x.
pub fn graph_of(f: &CrossFn) -> GroupSet {
    let n = f.dim();
    GroupSet::from_keys(
        n,
        f.table().iter().enumerate().map(|(x, w)| pack(n, x as u32, w.lo(), w.hi())),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BsgConfig {
    pub rounds: usize,
}

impl Default for BsgConfig {
    fn default() -> Self {
        Self { rounds: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct BsgOutcome {
    pub gamma_prime: GroupSet,
    pub diff_size: usize,
    pub ratio: Exact,
    pub candidates: usize,
    pub seed: u64,
}

/// Quadruple degree of each point: the number of `(γ₂, γ₃, γ₄)` in the
/// graph with `γ + γ₂ = γ₃ + γ₄`. Points are `(x, w)` sorted by `x`.
pub fn quadruple_degrees(n: usize, points: &[(u32, QuatVec)]) -> Vec<u64> {
    let index: HashMap<u32, usize> = points.iter().enumerate().map(|(i, p)| (p.0, i)).collect();
    let mut deg = vec![0u64; points.len()];
    let mut hist: HashMap<QuatVec, u64> = HashMap::new();
    let mut sums: Vec<(usize, QuatVec)> = Vec::with_capacity(points.len());
    for s in 0..=mask(n) {
        hist.clear();
        sums.clear();
        for (i, &(x, w)) in points.iter().enumerate() {
            if let Some(&j) = index.get(&(x ^ s)) {
                let v = w.add(points[j].1);
                *hist.entry(v).or_default() += 1;
                sums.push((i, v));
            }
        }
        for &(i, v) in &sums {
            deg[i] += hist[&v];
        }
    }
    deg
}

fn diff_size(n: usize, keys: &[u64]) -> usize {
    let negs: Vec<u64> = keys.iter().map(|&k| neg_key(n, k)).collect();
    let mut out = std::collections::HashSet::with_capacity(keys.len() * 2);
    for &a in keys {
        for &b in &negs {
            out.insert(add_keys(n, a, b));
        }
    }
    out.len()
}

pub fn bsg_extract(gamma: &GroupSet, xi: &Exact, seed: u64, config: &BsgConfig) -> Result<BsgOutcome> {
    if xi.is_negative() || *xi == Exact::zero() || *xi > Exact::one() {
        return Err(Error::invalid(format!("quadruple density {xi} not in (0, 1]")));
    }
    if gamma.is_empty() {
        return Err(Error::Empty("graph"));
    }
    if !gamma.is_function_graph() {
        return Err(Error::invalid("BSG extraction needs the graph of a function"));
    }
    let n = gamma.dim();
    let points: Vec<(u32, QuatVec)> = gamma.elems().into_iter().map(|e| (e.u.bits(), e.w)).collect();
    let keys: Vec<u64> = gamma.keys();
    let deg = quadruple_degrees(n, &points);
    let max_deg = *deg.iter().max().expect("nonempty");

    let mut candidates: Vec<BTreeSet<usize>> = vec![(0..points.len()).collect()];
    for theta in DEGREE_THRESHOLDS {
        let cut = theta * max_deg as f64;
        candidates.push((0..points.len()).filter(|&i| deg[i] as f64 >= cut).collect());
    }

    // difference popularity over ordered pairs
    let mut pop: HashMap<u64, u32> = HashMap::new();
    for &a in &keys {
        for &b in &keys {
            *pop.entry(add_keys(n, a, neg_key(n, b))).or_default() += 1;
        }
    }
    let tau = ((xi.to_f64() * points.len() as f64) / 2.0).ceil().max(2.0) as u32;
    let total_deg: u64 = deg.iter().sum();
    let mut rng = seeds::rng(seed);
    for _ in 0..config.rounds {
        // anchor drawn with probability proportional to its degree
        let mut r = rng.random_range(0..total_deg);
        let anchor = deg
            .iter()
            .position(|&d| {
                if r < d {
                    true
                } else {
                    r -= d;
                    false
                }
            })
            .expect("degrees sum to total");
        let a = keys[anchor];
        let hood: BTreeSet<usize> = (0..keys.len())
            .filter(|&i| i == anchor || pop[&add_keys(n, keys[i], neg_key(n, a))] >= tau)
            .collect();
        candidates.push(hood);
    }
    candidates.sort();
    candidates.dedup();
    candidates.retain(|c| !c.is_empty());

    let mut best: Option<(BTreeSet<usize>, usize)> = None;
    for cand in &candidates {
        let ck: Vec<u64> = cand.iter().map(|&i| keys[i]).collect();
        let d = diff_size(n, &ck);
        let better = match &best {
            None => true,
            Some((b, bd)) => {
                // |C|²/|C−C| compared by cross-multiplication, then size
                let lhs = (cand.len() as u128).pow(2) * *bd as u128;
                let rhs = (b.len() as u128).pow(2) * d as u128;
                lhs > rhs || (lhs == rhs && cand.len() > b.len())
            }
        };
        if better {
            best = Some((cand.clone(), d));
        }
    }
    let (chosen, d) = best.expect("at least the full graph is a candidate");
    let gamma_prime = GroupSet::from_keys(n, chosen.iter().map(|&i| keys[i]));
    Ok(BsgOutcome {
        ratio: Exact::new(d as u64, chosen.len() as u64),
        diff_size: d,
        gamma_prime,
        candidates: candidates.len(),
        seed,
    })
}

/// Elements of a graph subset as `(x, w)` pairs sorted by `x`.
pub(crate) fn graph_points(set: &GroupSet) -> Vec<(u32, QuatVec)> {
    let n = set.dim();
    set.keys()
        .into_iter()
        .map(|k| {
            let (u, lo, hi) = unpack(n, k);
            (u, QuatVec::from_planes(n, lo, hi))
        })
        .collect()
}

pub(crate) fn elem(n: usize, x: u32, w: QuatVec) -> GroupElem {
    GroupElem { u: BitVec::from_raw(n, x), w }
}
