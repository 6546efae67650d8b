//! Freiman homomorphism checks for partial maps Z₂ⁿ ⊇ 𝒜 → Z₄ⁿ.
//!
//! φ is a Freiman homomorphism of order k when equal Z₂ sums of k-tuples
//! from 𝒜 always carry equal φ-sums. Equivalently, the k-fold sumset of
//! the graph of φ holds a single Z₄ value over each Z₂ sum, which is what
//! the exact check builds level by level.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;
use crate::vectors::QuatVec;
use crate::z4::CrossFn;

/// A map from a subset of Z₂ⁿ into Z₄ⁿ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialMap {
    n: usize,
    entries: BTreeMap<u32, QuatVec>,
}

impl PartialMap {
    pub fn new(n: usize, entries: impl IntoIterator<Item = (u32, QuatVec)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (x, v) in entries {
            if v.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.dim() });
            }
            if x >> n != 0 {
                return Err(Error::invalid(format!("input {x} outside Z2^{n}")));
            }
            map.insert(x, v);
        }
        Ok(Self { n, entries: map })
    }

    /// `f` restricted to `domain`.
    pub fn restrict(f: &CrossFn, domain: impl IntoIterator<Item = u32>) -> Self {
        Self {
            n: f.dim(),
            entries: domain.into_iter().map(|x| (x, f.at(x))).collect(),
        }
    }

    pub fn full(f: &CrossFn) -> Self {
        Self::restrict(f, 0..f.domain_size() as u32)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, x: u32) -> Option<QuatVec> {
        self.entries.get(&x).copied()
    }

    /// Domain in increasing order.
    pub fn domain(&self) -> Vec<u32> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, QuatVec)> + '_ {
        self.entries.iter().map(|(&x, &v)| (x, v))
    }

    pub(crate) fn insert(&mut self, x: u32, v: QuatVec) {
        self.entries.insert(x, v);
    }

    pub(crate) fn remove(&mut self, x: u32) {
        self.entries.remove(&x);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum FreimanMode {
    Exact,
    Randomized { seed: u64, trials: u64 },
}

/// Two k-tuples with equal Z₂ sums and different φ-sums.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreimanWitness {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
}

impl FreimanWitness {
    /// Re-checks the witness against φ from scratch.
    pub fn is_violation(&self, phi: &PartialMap, k: usize) -> bool {
        if self.a.len() != k || self.b.len() != k {
            return false;
        }
        let sum = |t: &[u32]| -> Option<(u32, QuatVec)> {
            t.iter().try_fold((0u32, QuatVec::zero(phi.n)), |(s, w), &x| {
                phi.get(x).map(|v| (s ^ x, w.add(v)))
            })
        };
        match (sum(&self.a), sum(&self.b)) {
            (Some((sa, wa)), Some((sb, wb))) => sa == sb && wa != wb,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreimanOutcome {
    pub ok: bool,
    pub order: usize,
    pub mode: FreimanMode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<FreimanWitness>,
    /// Randomized mode: tuples drawn and tuples whose solved last entry
    /// landed in the domain.
    pub trials: u64,
    pub accepted: u64,
}

pub fn freiman_check(phi: &PartialMap, k: usize, mode: FreimanMode) -> Result<FreimanOutcome> {
    if k < 1 {
        return Err(Error::invalid("Freiman order must be at least 1"));
    }
    if phi.is_empty() {
        return Err(Error::Empty("Freiman domain"));
    }
    match mode {
        FreimanMode::Exact => {
            let witness = exact_violation(phi, k);
            Ok(FreimanOutcome {
                ok: witness.is_none(),
                order: k,
                mode,
                witness,
                trials: 0,
                accepted: 0,
            })
        }
        FreimanMode::Randomized { seed, trials } => {
            if trials == 0 {
                return Err(Error::invalid("randomized Freiman check needs trials >= 1"));
            }
            Ok(randomized(phi, k, seed, trials))
        }
    }
}

#[derive(Clone, Copy)]
struct Node {
    w: QuatVec,
    prev: u32,
    added: u32,
}

fn path(levels: &[BTreeMap<u32, Node>], level: usize, mut sigma: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(level);
    for j in (1..=level).rev() {
        let node = levels[j][&sigma];
        out.push(node.added);
        sigma = node.prev;
    }
    out.reverse();
    out
}

fn exact_violation(phi: &PartialMap, k: usize) -> Option<FreimanWitness> {
    let domain: Vec<(u32, QuatVec)> = phi.iter().collect();
    let mut levels: Vec<BTreeMap<u32, Node>> = Vec::with_capacity(k + 1);
    levels.push(BTreeMap::from([(
        0,
        Node { w: QuatVec::zero(phi.n), prev: 0, added: u32::MAX },
    )]));
    for j in 1..=k {
        let mut next: BTreeMap<u32, Node> = BTreeMap::new();
        for (&sigma, node) in &levels[j - 1] {
            for &(a, v) in &domain {
                let key = sigma ^ a;
                let w = node.w.add(v);
                match next.get(&key) {
                    None => {
                        next.insert(key, Node { w, prev: sigma, added: a });
                    }
                    Some(existing) if existing.w != w => {
                        let mut first = path(&levels, j - 1, sigma);
                        first.push(a);
                        let mut second = path(&levels, j - 1, existing.prev);
                        second.push(existing.added);
                        // a violation at order j lifts to order k by padding
                        let pad = domain[0].0;
                        first.resize(k, pad);
                        second.resize(k, pad);
                        return Some(FreimanWitness { a: first, b: second });
                    }
                    Some(_) => {}
                }
            }
        }
        levels.push(next);
    }
    None
}

fn randomized(phi: &PartialMap, k: usize, seed: u64, trials: u64) -> FreimanOutcome {
    let n = phi.n;
    let domain: Vec<u32> = phi.domain();
    let lookup: HashMap<u32, QuatVec> = phi.iter().collect();
    let batches: Vec<_> = seeds::batches(trials).collect();
    let results: Vec<(u64, Option<FreimanWitness>)> = batches
        .par_iter()
        .map(|&(batch, len)| {
            let mut rng = seeds::stream_rng(seed, batch);
            let mut accepted = 0u64;
            let mut a = vec![0u32; k];
            let mut b = vec![0u32; k];
            for _ in 0..len {
                let mut sigma = 0u32;
                let mut wa = QuatVec::zero(n);
                for slot in a.iter_mut() {
                    let x = domain[rng.random_range(0..domain.len())];
                    sigma ^= x;
                    wa = wa.add(lookup[&x]);
                    *slot = x;
                }
                let mut wb = QuatVec::zero(n);
                for slot in b.iter_mut().take(k - 1) {
                    let x = domain[rng.random_range(0..domain.len())];
                    sigma ^= x;
                    wb = wb.add(lookup[&x]);
                    *slot = x;
                }
                let Some(&last) = lookup.get(&sigma) else {
                    continue;
                };
                b[k - 1] = sigma;
                accepted += 1;
                if wa != wb.add(last) {
                    return (accepted, Some(FreimanWitness { a: a.clone(), b: b.clone() }));
                }
            }
            (accepted, None)
        })
        .collect();
    let accepted = results.iter().map(|(c, _)| c).sum();
    let witness = results.into_iter().find_map(|(_, w)| w);
    FreimanOutcome {
        ok: witness.is_none(),
        order: k,
        mode: FreimanMode::Randomized { seed, trials },
        witness,
        trials,
        accepted,
    }
}
