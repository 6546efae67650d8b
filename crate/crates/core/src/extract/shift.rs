use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::additive::{freiman_check, FreimanMode, PartialMap};
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::seeds;
use crate::vectors::QuatVec;
use crate::z4::CrossFn;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftOutcome {
    pub s: QuatVec,
    /// The domain point whose value was taken as `s`.
    pub anchor: u32,
    /// Every value lies in `s + {0,2}ⁿ`.
    pub ok: bool,
}

/// `s = φ(a)` for the smallest `a` in the domain, and whether every value
/// of φ lies in `s + {0,2}ⁿ`.
pub fn shift_extract(phi: &PartialMap) -> Result<ShiftOutcome> {
    let (anchor, s) = phi.iter().next().ok_or(Error::Empty("shift domain"))?;
    let ok = phi.iter().all(|(_, v)| v.sub(s).is_even());
    Ok(ShiftOutcome { s, anchor, ok })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftFraction {
    /// Canonical representative with digits in {0, 1}.
    pub s_best: QuatVecRepr,
    pub count: u64,
    pub fraction: Exact,
}

/// Base-4 string form used in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuatVecRepr(pub String);

impl From<QuatVec> for QuatVecRepr {
    fn from(v: QuatVec) -> Self {
        QuatVecRepr(v.to_base4())
    }
}

/// Largest mass of F in one coset `s + {0,2}ⁿ`. Membership only depends on
/// `F(x) mod 2`, so this is the largest bucket of the mod-2 histogram.
pub fn mod2_shift_fraction(f: &CrossFn) -> (QuatVec, u64, Exact) {
    let n = f.dim();
    let mut hist = vec![0u64; f.domain_size()];
    for v in f.table() {
        hist[v.lo() as usize] += 1;
    }
    // first maximum = smallest encoding
    let (best, count) = hist
        .iter()
        .enumerate()
        .fold((0usize, 0u64), |acc, (r, &c)| if c > acc.1 { (r, c) } else { acc });
    let s = QuatVec::from_planes(n, best as u32, 0);
    (s, count, Exact::new(count, f.domain_size() as u64))
}

pub fn shift_fraction_report(f: &CrossFn) -> ShiftFraction {
    let (s, count, fraction) = mod2_shift_fraction(f);
    ShiftFraction { s_best: s.into(), count, fraction }
}

/// Sets at most this large are checked exactly when growing a domain.
const EXACT_GROW_LIMIT: usize = 32;
const TARGETED_ATTEMPTS: usize = 512;
const TARGETED_MIN_ACCEPTED: u64 = 48;

/// Tests whether adding `x` keeps φ an order-k Freiman homomorphism. Small
/// domains are checked exactly; larger ones by tuples that contain `x`,
/// falling back to the exact check when too few tuples close up.
fn extension_ok(phi: &PartialMap, x: u32, k: usize, rng: &mut impl Rng) -> bool {
    if phi.len() <= EXACT_GROW_LIMIT {
        return freiman_check(phi, k, FreimanMode::Exact).map(|o| o.ok).unwrap_or(false);
    }
    let domain = phi.domain();
    let n = phi.dim();
    let fx = phi.get(x).expect("x inserted");
    let mut accepted = 0u64;
    for _ in 0..TARGETED_ATTEMPTS {
        let mut sigma = x;
        let mut wa = fx;
        for _ in 1..k {
            let a = domain[rng.random_range(0..domain.len())];
            sigma ^= a;
            wa = wa.add(phi.get(a).expect("in domain"));
        }
        let mut wb = QuatVec::zero(n);
        for _ in 0..k - 1 {
            let b = domain[rng.random_range(0..domain.len())];
            sigma ^= b;
            wb = wb.add(phi.get(b).expect("in domain"));
        }
        let Some(last) = phi.get(sigma) else { continue };
        accepted += 1;
        if wa != wb.add(last) {
            return false;
        }
        if accepted >= TARGETED_MIN_ACCEPTED {
            return true;
        }
    }
    freiman_check(phi, k, FreimanMode::Exact).map(|o| o.ok).unwrap_or(false)
}

/// Greedily builds a domain on which `f` is an order-k Freiman
/// homomorphism, visiting `candidates` in order (duplicates skipped).
pub fn grow_freiman_domain(
    f: &CrossFn,
    candidates: impl IntoIterator<Item = u32>,
    k: usize,
    seed: u64,
) -> PartialMap {
    let mut phi = PartialMap::new(f.dim(), []).expect("empty map");
    let mut rng = seeds::rng(seed);
    for x in candidates {
        if phi.get(x).is_some() {
            continue;
        }
        phi.insert(x, f.at(x));
        if !extension_ok(&phi, x, k, &mut rng) {
            phi.remove(x);
        }
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_strategy, StrategyFamily};
    use crate::z4::{planted_cross, to_cross, PlantedSpec, Role};

    #[test]
    fn plant_shift_recovered_up_to_two_torsion() {
        let spec = PlantedSpec::random(5, 0.0, 7).unwrap();
        let p = planted_cross(&spec).unwrap();
        let out = shift_extract(&PartialMap::full(&p.triple.f)).unwrap();
        assert!(out.ok);
        assert!(out.s.sub(spec.shift).is_even());
    }

    #[test]
    fn constant_map_shift_is_its_value() {
        let c = QuatVec::from_digits(&[3, 2, 1]).unwrap();
        let out = shift_extract(&PartialMap::full(&CrossFn::constant(3, c).unwrap())).unwrap();
        assert_eq!((out.s, out.ok), (c, true));
    }

    #[test]
    fn identity_embedding_has_no_shift() {
        let phi = PartialMap::new(2, (0..4u32).map(|x| (x, QuatVec::from_planes(2, x, 0)))).unwrap();
        assert!(!shift_extract(&phi).unwrap().ok);
        assert!(!freiman_check(&phi, 4, FreimanMode::Exact).unwrap().ok);
        assert!(shift_extract(&PartialMap::new(2, []).unwrap()).is_err());
    }

    #[test]
    fn transforms_have_a_single_point_per_coset() {
        for n in 1..=10 {
            let st = make_strategy(&StrategyFamily::Random(n as u64), n).unwrap();
            let (_, count, fraction) = mod2_shift_fraction(&to_cross(&st.f, Role::Alice));
            assert_eq!(count, 1);
            assert_eq!(fraction, Exact::new(1, 1u64 << n));
        }
    }

    #[test]
    fn constant_function_fraction_is_one() {
        let c = QuatVec::from_digits(&[3, 2]).unwrap();
        let (s, _, fr) = mod2_shift_fraction(&CrossFn::constant(2, c).unwrap());
        assert_eq!(fr, Exact::one());
        assert_eq!(s.digits(), vec![1, 0]);
    }

    #[test]
    fn three_quarters_in_one_residue_class() {
        let d = |v: &[u8]| QuatVec::from_digits(v).unwrap();
        // residues 01, 01, 01, 10 (digit order: coordinate 0 first)
        let f = CrossFn::new(2, vec![d(&[1, 0]), d(&[3, 2]), d(&[1, 2]), d(&[0, 1])]).unwrap();
        let (s, count, fr) = mod2_shift_fraction(&f);
        assert_eq!((count, fr), (3, Exact::new(3, 4)));
        assert_eq!(s.digits(), vec![1, 0]);
        // independent histogram oracle
        let mut buckets = std::collections::BTreeMap::new();
        for v in f.table() {
            *buckets.entry(v.digits().iter().map(|x| x % 2).collect::<Vec<_>>()).or_insert(0) += 1;
        }
        assert_eq!(buckets.values().max(), Some(&3));
    }

    #[test]
    fn growing_a_plant_reaches_full_domain_and_skips_corruption() {
        let spec = PlantedSpec::random(6, 0.1, 2).unwrap();
        let p = planted_cross(&spec).unwrap();
        let phi = grow_freiman_domain(&p.triple.f, 0..64u32, 8, 1);
        let clean: Vec<u32> = (0..64u32).filter(|x| !p.corrupted.contains(x)).collect();
        // the greedy pass may seed with a corrupted point only if it comes first
        if !p.corrupted.contains(&0) {
            assert_eq!(phi.domain(), clean);
        }
        let clean_plant = planted_cross(&PlantedSpec { corruption: 0.0, ..spec }).unwrap();
        let full = grow_freiman_domain(&clean_plant.triple.f, 0..64u32, 8, 1);
        assert_eq!(full.len(), 64);
    }

    #[test]
    fn growing_a_transform_stops_at_one_point() {
        let st = make_strategy(&StrategyFamily::Random(4), 5).unwrap();
        let phi = grow_freiman_domain(&to_cross(&st.f, Role::Alice), 0..32u32, 8, 0);
        assert_eq!(phi.len(), 1);
    }
}
