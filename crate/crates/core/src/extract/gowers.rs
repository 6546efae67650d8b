//! The Y / W / Γ′ₐ construction that turns a low-doubling graph piece into
//! a domain on which the function is a Freiman homomorphism.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::additive::group::pack;
use crate::additive::{difference_set, sumset, GroupSet, MAX_DENSE_DIM};
use crate::error::{check_dim, Error, Result};
use crate::extract::bsg::{elem, graph_points};
use crate::seeds;
use crate::vectors::{mask, QuatVec};

/// `kΓ′ − kΓ′` for k = 4, 8, 16, built by doubling `Γ′ − Γ′`.
#[derive(Clone, Debug)]
pub struct SumsetLadder {
    pub d4: GroupSet,
    pub d8: GroupSet,
    pub d16: GroupSet,
}

impl SumsetLadder {
    pub fn new(gamma_prime: &GroupSet) -> Result<Self> {
        check_dim("sumset ladder", gamma_prime.dim(), MAX_DENSE_DIM)?;
        if gamma_prime.is_empty() {
            return Err(Error::Empty("Γ′"));
        }
        // k(A − A) = kA − kA
        let d1 = difference_set(gamma_prime, gamma_prime)?;
        let d2 = sumset(&d1, &d1)?;
        let d4 = sumset(&d2, &d2)?;
        let d8 = sumset(&d4, &d4)?;
        let d16 = sumset(&d8, &d8)?;
        Ok(Self { d4, d8, d16 })
    }
}

/// `C = ⌈|16Γ′ − 16Γ′| / |Γ′|⌉`.
pub fn measured_c(ladder: &SumsetLadder, gamma_prime_size: usize) -> u64 {
    let d = ladder.d16.len() as u64;
    let s = gamma_prime_size as u64;
    d.div_ceil(s)
}

/// `t = ⌈log₂ C⌉ + 1`.
pub fn constraint_count(c: u64) -> usize {
    let c = c.max(1);
    (u64::BITS - (c - 1).leading_zeros()) as usize + 1
}

/// `Y = {y : (0, y) ∈ 8Γ′ − 8Γ′}`, sorted.
pub fn build_y(gamma_prime: &GroupSet) -> Result<Vec<QuatVec>> {
    let ladder = SumsetLadder::new(gamma_prime)?;
    Ok(y_from_ladder(&ladder))
}

pub fn y_from_ladder(ladder: &SumsetLadder) -> Vec<QuatVec> {
    ladder.d8.fiber(0)
}

/// Checks `Yₓ − Yₓ ⊆ Y` for every x, where `Yₓ = {y : (x, y) ∈ 4Γ′ − 4Γ′}`.
pub fn yx_law_holds(ladder: &SumsetLadder, y: &[QuatVec]) -> bool {
    let n = ladder.d4.dim();
    let full = 1usize << (2 * n);
    if y.len() == full {
        return true;
    }
    let mut in_y = vec![false; full];
    for v in y {
        in_y[v.index() as usize] = true;
    }
    let mut fibers: BTreeMap<u32, Vec<QuatVec>> = BTreeMap::new();
    for e in ladder.d4.elems() {
        fibers.entry(e.u.bits()).or_default().push(e.w);
    }
    fibers
        .values()
        .all(|ys| ys.iter().all(|a| ys.iter().all(|b| in_y[a.sub(*b).index() as usize])))
}

/// `W = {y ∈ Z₄ⁿ : Σ_{j∈I_i} y_j ≡ 0 (mod 4) for every i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityConstraintSystem {
    pub n: usize,
    pub t: usize,
    /// Coordinate sets as bit masks (bit j set when j ∈ I_i).
    #[serde(with = "index_sets")]
    pub index_sets: Vec<u32>,
}

mod index_sets {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(sets: &[u32], s: S) -> Result<S::Ok, S::Error> {
        let lists: Vec<Vec<usize>> = sets
            .iter()
            .map(|&m| (0..32).filter(|j| (m >> j) & 1 == 1).collect())
            .collect();
        lists.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u32>, D::Error> {
        let lists: Vec<Vec<usize>> = Vec::deserialize(d)?;
        lists
            .into_iter()
            .map(|l| {
                l.into_iter().try_fold(0u32, |m, j| {
                    if j < 32 {
                        Ok(m | (1 << j))
                    } else {
                        Err(serde::de::Error::custom(format!("index {j} out of range")))
                    }
                })
            })
            .collect()
    }
}

impl ParityConstraintSystem {
    pub fn new(n: usize, index_sets: Vec<u32>) -> Result<Self> {
        check_dim("constraint system", n, crate::vectors::MAX_DIM)?;
        if let Some(bad) = index_sets.iter().find(|&&m| m & !mask(n) != 0) {
            return Err(Error::invalid(format!("index set {bad:#x} exceeds n = {n}")));
        }
        Ok(Self { n, t: index_sets.len(), index_sets })
    }

    #[inline]
    fn constraint(set: u32, y: QuatVec) -> u32 {
        ((y.lo() & set).count_ones() + 2 * (y.hi() & set).count_ones()) & 3
    }

    pub fn contains(&self, y: QuatVec) -> bool {
        self.index_sets.iter().all(|&s| Self::constraint(s, y) == 0)
    }

    /// Constraint values packed two bits each; equal exactly on cosets of W.
    pub fn syndrome(&self, y: QuatVec) -> u64 {
        self.index_sets
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &s)| acc | (u64::from(Self::constraint(s, y)) << (2 * i)))
    }

    /// All of W, for small n.
    pub fn members(&self) -> Result<GroupSet> {
        check_dim("constraint system members", self.n, MAX_DENSE_DIM)?;
        let n = self.n;
        Ok(GroupSet::from_keys(
            n,
            (0..1u64 << (2 * n))
                .map(|i| QuatVec::from_index(n, i))
                .filter(|&y| self.contains(y))
                .map(|y| pack(n, 0, y.lo(), y.hi())),
        ))
    }
}

/// Draw `t` index sets, each coordinate included with probability 1/2.
pub fn sample_w(n: usize, t: usize, seed: u64) -> Result<ParityConstraintSystem> {
    let mut rng = seeds::rng(seed);
    let m = mask(n);
    ParityConstraintSystem::new(n, (0..t).map(|_| rng.random::<u32>() & m).collect())
}

#[derive(Clone, Debug)]
pub struct WChoice {
    pub w: ParityConstraintSystem,
    pub attempts: usize,
}

/// Resample W until it meets Y only in 0.
pub fn choose_w(y: &[QuatVec], n: usize, t: usize, seed: u64, retry_cap: usize) -> Result<WChoice> {
    if t < 1 {
        return Err(Error::invalid("W needs t >= 1 constraints"));
    }
    for attempt in 0..retry_cap {
        let w = sample_w(n, t, seeds::derive_seed(seed, attempt as u64))?;
        if y.iter().all(|&v| v.is_zero() || !w.contains(v)) {
            return Ok(WChoice { w, attempts: attempt + 1 });
        }
    }
    Err(Error::RetryCapExhausted { attempts: retry_cap, t, y_size: y.len() })
}

#[derive(Clone, Debug)]
pub struct CosetChoice {
    pub a: QuatVec,
    pub gamma_a: GroupSet,
    /// Number of distinct cosets of W met by Γ′.
    pub coset_count: usize,
    /// `|Γ′ₐ| ≥ |Γ′| / coset_count` and `|Γ′ₐ| ≥ 4^{−t}|Γ′|`.
    pub pigeonhole_holds: bool,
}

/// Restrict Γ′ to the most populated coset `a + W`. `a` is the smallest
/// value of Γ′ in that coset; ties between cosets go to the smaller `a`.
pub fn choose_a(gamma_prime: &GroupSet, w: &ParityConstraintSystem) -> Result<CosetChoice> {
    if gamma_prime.is_empty() {
        return Err(Error::Empty("Γ′"));
    }
    let n = gamma_prime.dim();
    let mut classes: BTreeMap<u64, Vec<(u32, QuatVec)>> = BTreeMap::new();
    for (x, y) in graph_points(gamma_prime) {
        classes.entry(w.syndrome(y)).or_default().push((x, y));
    }
    let (_, members) = classes
        .iter()
        .map(|(s, m)| (s, m, m.iter().map(|p| p.1).min().expect("nonempty")))
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.2.cmp(&a.2)))
        .map(|(s, m, _)| (s, m))
        .expect("nonempty");
    let a = members.iter().map(|p| p.1).min().expect("nonempty");
    let gamma_a = GroupSet::from_elems(n, members.iter().map(|&(x, y)| elem(n, x, y)))?;
    let size = gamma_a.len() as u128;
    let total = gamma_prime.len() as u128;
    let four_t = 1u128.checked_shl(2 * w.t as u32).unwrap_or(u128::MAX);
    let pigeonhole_holds =
        size * classes.len() as u128 >= total && size.saturating_mul(four_t) >= total;
    Ok(CosetChoice { a, gamma_a, coset_count: classes.len(), pigeonhole_holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::additive::{iterated_sumset, mixed_sumset};
    use crate::extract::bsg::graph_of;
    use crate::z4::{planted_cross, CrossFn, PlantedSpec};

    #[test]
    fn constraint_count_is_ceil_log2_plus_one() {
        assert_eq!(constraint_count(1), 1);
        assert_eq!(constraint_count(2), 2);
        assert_eq!(constraint_count(3), 3);
        assert_eq!(constraint_count(4), 3);
        assert_eq!(constraint_count(5), 4);
        assert_eq!(constraint_count(1024), 11);
    }

    #[test]
    fn ladder_matches_direct_iterated_sumsets() {
        let f = CrossFn::random(2, 3).unwrap();
        let g = GroupSet::from_keys(2, graph_of(&f).keys().into_iter().take(3));
        let ladder = SumsetLadder::new(&g).unwrap();
        assert_eq!(ladder.d4, mixed_sumset(&g, 4, 4).unwrap());
        let eight = iterated_sumset(&g, 8).unwrap();
        assert_eq!(ladder.d8, difference_set(&eight, &eight).unwrap());
    }

    #[test]
    fn constant_graph_has_trivial_y() {
        let c = QuatVec::from_digits(&[3, 1, 2]).unwrap();
        let f = CrossFn::constant(3, c).unwrap();
        assert_eq!(build_y(&graph_of(&f)).unwrap(), vec![QuatVec::zero(3)]);
    }

    #[test]
    fn planted_graph_has_trivial_y_and_obeys_bounds() {
        for n in 2..=5 {
            let p = planted_cross(&PlantedSpec::random(n, 0.0, 40 + n as u64).unwrap()).unwrap();
            let g = graph_of(&p.triple.f);
            let ladder = SumsetLadder::new(&g).unwrap();
            let y = y_from_ladder(&ladder);
            assert_eq!(y, vec![QuatVec::zero(n)]);
            assert!(y.len() as u64 <= measured_c(&ladder, g.len()));
            assert!(yx_law_holds(&ladder, &y));
        }
    }

    #[test]
    fn y_is_bounded_by_measured_c_and_yx_law_holds_on_random_pieces() {
        for seed in 0..25u64 {
            let n = 2 + (seed as usize % 3);
            let f = CrossFn::random(n, seed).unwrap();
            let size = 2 + (seed as usize % 5);
            let g = GroupSet::from_keys(n, graph_of(&f).keys().into_iter().step_by(3).take(size));
            let ladder = SumsetLadder::new(&g).unwrap();
            let y = y_from_ladder(&ladder);
            assert!(y.len() as u64 <= measured_c(&ladder, g.len()), "seed {seed}");
            assert!(yx_law_holds(&ladder, &y), "seed {seed}");
        }
    }

    #[test]
    fn w_is_a_subgroup_fixed_by_sums_and_differences() {
        for seed in 0..12u64 {
            let n = 1 + (seed as usize % 4);
            let w = sample_w(n, 1 + (seed as usize % 3), seed).unwrap();
            assert!(w.contains(QuatVec::zero(n)));
            let members = w.members().unwrap();
            for k in 1..=4 {
                for r in 1..=4 {
                    assert_eq!(mixed_sumset(&members, k, r).unwrap(), members);
                }
            }
        }
    }

    #[test]
    fn two_torsion_membership_frequency_is_two_to_minus_t() {
        let n = 6;
        let t = 2;
        let y = QuatVec::from_digits(&[2, 0, 2, 2, 0, 0]).unwrap();
        let trials = 10_000u64;
        let hits = (0..trials).filter(|&s| sample_w(n, t, s).unwrap().contains(y)).count();
        let p = hits as f64 / trials as f64;
        // 0.25 ± 5σ with σ ≈ 0.0043
        assert!((p - 0.25).abs() < 0.022, "p = {p}");
    }

    #[test]
    fn trivial_y_accepts_first_sample() {
        let c = choose_w(&[QuatVec::zero(4)], 4, 3, 9, 8).unwrap();
        assert_eq!(c.attempts, 1);
    }

    #[test]
    fn exhausted_retries_are_reported() {
        let y: Vec<QuatVec> = (0..4).map(|i| QuatVec::from_index(1, i)).collect();
        assert!(matches!(choose_w(&y, 1, 1, 0, 0), Err(Error::RetryCapExhausted { .. })));
    }

    #[test]
    fn coset_restriction_partitions_and_obeys_pigeonhole() {
        for seed in 0..10u64 {
            let n = 4;
            let f = CrossFn::random(n, seed).unwrap();
            let g = graph_of(&f);
            let w = sample_w(n, 2, seed).unwrap();
            let choice = choose_a(&g, &w).unwrap();
            assert!(choice.pigeonhole_holds);
            assert!(choice.gamma_a.is_subset(&g));
            for e in choice.gamma_a.elems() {
                assert!(w.contains(e.w.sub(choice.a)));
            }
            // cosets partition Γ′
            let mut total = 0;
            let mut seen = std::collections::BTreeSet::new();
            for e in g.elems() {
                if seen.insert(w.syndrome(e.w)) {
                    total += g.elems().iter().filter(|o| w.syndrome(o.w) == w.syndrome(e.w)).count();
                }
            }
            assert_eq!(total, g.len());
        }
    }

    #[test]
    fn empty_constraint_system_keeps_everything() {
        let g = graph_of(&CrossFn::random(3, 1).unwrap());
        let w = ParityConstraintSystem::new(3, vec![]).unwrap();
        let c = choose_a(&g, &w).unwrap();
        assert_eq!(c.gamma_a, g);
        assert_eq!(c.coset_count, 1);
    }

    #[test]
    fn constraint_system_json_lists_indices() {
        let w = ParityConstraintSystem::new(4, vec![0b1010, 0b0001]).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"n":4,"t":2,"index_sets":[[1,3],[0]]}"#);
        assert_eq!(serde_json::from_str::<ParityConstraintSystem>(&s).unwrap(), w);
    }
}
