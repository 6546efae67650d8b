//! Recoding of GHZ strategies as cross-functions Z₂ⁿ → Z₄ⁿ.
//!
//! Each player's table `f` becomes `F(v) = 2 f(v) − v (mod 4)`. The triple
//! `(f, g, h)` wins on `(x, y, z)` exactly when `F(x) + G(y) + H(z) = 0`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::game::{
    QuestionTriple, StrategyTable, StrategyTriple, ValueMethod, ValueReport, MAX_ENUM_DIM,
};
use crate::seeds;
use crate::vectors::{mask, BitVec, QuatVec, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Alice,
    Bob,
    Charlie,
}

/// Dense table of a map Z₂ⁿ → Z₄ⁿ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossFn {
    n: usize,
    table: Vec<QuatVec>,
}

impl CrossFn {
    pub fn new(n: usize, table: Vec<QuatVec>) -> Result<Self> {
        check_dim("cross function", n, MAX_DIM)?;
        if table.len() != 1usize << n {
            return Err(Error::invalid(format!(
                "cross function for n={n} needs {} entries, got {}",
                1usize << n,
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|v| v.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: v.dim() });
        }
        Ok(Self { n, table })
    }

    pub fn constant(n: usize, value: QuatVec) -> Result<Self> {
        check_dim("cross function", n, MAX_DIM)?;
        Self::new(n, vec![value; 1 << n])
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(u32) -> QuatVec) -> Result<Self> {
        check_dim("cross function", n, MAX_DIM)?;
        Self::new(n, (0..1u32 << n).map(&mut f).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn domain_size(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn at(&self, x: u32) -> QuatVec {
        self.table[x as usize]
    }

    pub fn table(&self) -> &[QuatVec] {
        &self.table
    }

    /// Seeded uniformly random cross function.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        let mut rng = seeds::rng(seed);
        let m = mask(n);
        Self::from_fn(n, |_| {
            QuatVec::from_planes(n, rng.random::<u32>() & m, rng.random::<u32>() & m)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossTriple {
    pub f: CrossFn,
    pub g: CrossFn,
    pub h: CrossFn,
}

impl CrossTriple {
    pub fn new(f: CrossFn, g: CrossFn, h: CrossFn) -> Result<Self> {
        for d in [g.dim(), h.dim()] {
            if d != f.dim() {
                return Err(Error::DimensionMismatch { expected: f.dim(), found: d });
            }
        }
        Ok(Self { f, g, h })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    #[inline]
    fn vanishes(&self, x: u32, y: u32) -> bool {
        self.f.at(x).add(self.g.at(y)).add(self.h.at(x ^ y)).is_zero()
    }
}

/// `F(v)_i = 2 f(v)_i − v_i (mod 4)`. The same formula serves every role.
pub fn to_cross(f: &StrategyTable, _role: Role) -> CrossFn {
    let n = f.dim();
    // 2f has planes (0, f); −v has planes (v, v); no carries between them.
    let table = f
        .raw()
        .iter()
        .enumerate()
        .map(|(v, &a)| QuatVec::from_planes(n, v as u32, a ^ v as u32))
        .collect();
    CrossFn { n, table }
}

pub fn to_cross_triple(st: &StrategyTriple) -> CrossTriple {
    CrossTriple {
        f: to_cross(&st.f, Role::Alice),
        g: to_cross(&st.g, Role::Bob),
        h: to_cross(&st.h, Role::Charlie),
    }
}

/// Inverse of [`to_cross`]: `f(v)_i = ((F(v)_i + v_i) / 2) mod 2`.
/// Fails when `F(v) ≢ v (mod 2)` for some `v`.
pub fn from_cross(cf: &CrossFn) -> Result<StrategyTable> {
    let table = cf
        .table
        .iter()
        .enumerate()
        .map(|(v, q)| {
            if q.lo() != v as u32 {
                Err(Error::invalid(format!(
                    "F({v}) = {q} is not congruent to its input mod 2"
                )))
            } else {
                Ok(q.hi() ^ q.lo())
            }
        })
        .collect::<Result<_>>()?;
    StrategyTable::new(cf.n, table)
}

/// Exact probability over `(x, y)` uniform, `z = x ⊕ y`, that
/// `F(x) + G(y) + H(z) = 0`.
pub fn cross_success(ct: &CrossTriple) -> Result<ValueReport> {
    let n = ct.dim();
    check_dim("exact cross success", n, MAX_ENUM_DIM)?;
    let size = 1u32 << n;
    let wins = (0..size)
        .into_par_iter()
        .map(|x| (0..size).filter(|&y| ct.vanishes(x, y)).count() as u64)
        .sum();
    Ok(ValueReport::exact(n, ValueMethod::Exact, wins))
}

pub fn cross_success_mc(ct: &CrossTriple, samples: u64, seed: u64) -> Result<ValueReport> {
    if samples == 0 {
        return Err(Error::invalid("samples must be at least 1"));
    }
    let n = ct.dim();
    let m = mask(n);
    let batches: Vec<_> = seeds::batches(samples).collect();
    let wins = batches
        .par_iter()
        .map(|&(batch, len)| {
            let mut rng = seeds::stream_rng(seed, batch);
            (0..len)
                .filter(|_| {
                    let x = rng.random::<u32>() & m;
                    let y = rng.random::<u32>() & m;
                    ct.vanishes(x, y)
                })
                .count() as u64
        })
        .sum();
    Ok(ValueReport::monte_carlo(n, wins, samples, seed))
}

/// Checks the win/vanishing biconditional on one instance: true when the
/// GHZ predicate and `F(x) + G(y) + H(z) = 0` agree.
pub fn equivalence_check(st: &StrategyTriple, q: &QuestionTriple) -> Result<bool> {
    q.validate()?;
    if q.dim() != st.dim() {
        return Err(Error::DimensionMismatch { expected: st.dim(), found: q.dim() });
    }
    let win = st.wins(q)?;
    let ct = to_cross_triple(st);
    let vanishes = ct.vanishes(q.x.bits(), q.y.bits());
    Ok(win == vanishes)
}

/// Count questions where the strategy's win predicate disagrees with the
/// vanishing of a supplied cross triple. Exhaustive when n is within the
/// enumeration bound, otherwise `samples` seeded questions.
pub fn count_mismatches(
    st: &StrategyTriple,
    ct: &CrossTriple,
    samples: u64,
    seed: u64,
) -> Result<Mismatches> {
    let n = st.dim();
    if ct.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: ct.dim() });
    }
    let check = |x: u32, y: u32| -> bool {
        let q = QuestionTriple::from_xy(n, x, y);
        let win = st.wins(&q).expect("dimensions checked");
        win != ct.vanishes(x, y)
    };
    if n <= 6 {
        let size = 1u32 << n;
        let bad = (0..size)
            .flat_map(|x| (0..size).map(move |y| (x, y)))
            .filter(|&(x, y)| check(x, y))
            .count() as u64;
        return Ok(Mismatches { checked: 1u64 << (2 * n), mismatches: bad, exhaustive: true });
    }
    let m = mask(n);
    let mut rng = seeds::rng(seed);
    let bad = (0..samples)
        .filter(|_| {
            let x = rng.random::<u32>() & m;
            let y = rng.random::<u32>() & m;
            check(x, y)
        })
        .count() as u64;
    Ok(Mismatches { checked: samples, mismatches: bad, exhaustive: false })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Mismatches {
    pub checked: u64,
    pub mismatches: u64,
    pub exhaustive: bool,
}

/// A hidden shift structure `F(x) = s + 2ℓ(x)` with `ℓ` linear over Z₂.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedSpec {
    pub n: usize,
    pub shift: QuatVec,
    /// `ℓ(e_i)` for each coordinate `i`.
    pub columns: Vec<u32>,
    /// Fraction of inputs whose `F` value is replaced by a random one.
    pub corruption: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct Planted {
    pub spec: PlantedSpec,
    pub triple: CrossTriple,
    /// Inputs where `F` was overwritten, sorted.
    pub corrupted: Vec<u32>,
}

impl PlantedSpec {
    /// Shift and linear map drawn from `seed`.
    pub fn random(n: usize, corruption: f64, seed: u64) -> Result<Self> {
        check_dim("planted instance", n, MAX_DIM)?;
        let mut rng = seeds::rng(seeds::derive_seed(seed, 0x91a));
        let m = mask(n);
        let shift = QuatVec::from_planes(n, rng.random::<u32>() & m, rng.random::<u32>() & m);
        let columns = (0..n).map(|_| rng.random::<u32>() & m).collect();
        Ok(PlantedSpec { n, shift, columns, corruption, seed })
    }

    pub fn linear(&self, x: u32) -> u32 {
        self.columns
            .iter()
            .enumerate()
            .filter(|(i, _)| (x >> i) & 1 == 1)
            .fold(0, |acc, (_, c)| acc ^ c)
    }

    /// The uncorrupted plant value at `x`.
    pub fn value(&self, x: u32) -> QuatVec {
        self.shift.add(QuatVec::twice_bits(BitVec::from_raw(self.n, self.linear(x))))
    }
}

/// Build `F = s + 2ℓ`, `G = s' + 2ℓ`, `H = −s − s' + 2ℓ`, which vanish on every
/// question, then overwrite `F` on `⌊ρN⌉` random inputs with random values
/// that differ from the plant.
pub fn planted_cross(spec: &PlantedSpec) -> Result<Planted> {
    let n = spec.n;
    check_dim("planted instance", n, MAX_DIM)?;
    if spec.columns.len() != n || spec.shift.dim() != n {
        return Err(Error::invalid("planted spec dimensions disagree"));
    }
    if !(0.0..1.0).contains(&spec.corruption) {
        return Err(Error::invalid(format!(
            "corruption fraction {} not in [0, 1)",
            spec.corruption
        )));
    }
    let m = mask(n);
    let mut rng = seeds::rng(seeds::derive_seed(spec.seed, 0xc0c));
    let other = QuatVec::from_planes(n, rng.random::<u32>() & m, rng.random::<u32>() & m);
    let lin = |x: u32| QuatVec::twice_bits(BitVec::from_raw(n, spec.linear(x)));
    let mut f: Vec<QuatVec> = (0..1u32 << n).map(|x| spec.value(x)).collect();
    let g = CrossFn::from_fn(n, |y| other.add(lin(y)))?;
    let h_shift = spec.shift.add(other).neg();
    let h = CrossFn::from_fn(n, |z| h_shift.add(lin(z)))?;

    let size = 1usize << n;
    let k = (spec.corruption * size as f64).round() as usize;
    let mut order: Vec<u32> = (0..size as u32).collect();
    // partial Fisher-Yates for the first k positions
    for i in 0..k {
        let j = rng.random_range(i..size);
        order.swap(i, j);
    }
    let mut corrupted: Vec<u32> = order[..k].to_vec();
    corrupted.sort_unstable();
    for &x in &corrupted {
        let clean = f[x as usize];
        let mut v = clean;
        while v == clean {
            v = QuatVec::from_planes(n, rng.random::<u32>() & m, rng.random::<u32>() & m);
        }
        f[x as usize] = v;
    }
    Ok(Planted {
        spec: spec.clone(),
        triple: CrossTriple::new(CrossFn::new(n, f)?, g, h)?,
        corrupted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Exact;
    use crate::game::{enumerate_questions, evaluate_value_exact, make_strategy, StrategyFamily};

    fn table(n: usize, v: &[u32]) -> StrategyTable {
        StrategyTable::new(n, v.to_vec()).unwrap()
    }

    #[test]
    fn transform_of_constants() {
        let one = to_cross(&table(1, &[1, 1]), Role::Alice);
        assert_eq!(one.at(0).digits(), vec![2]);
        assert_eq!(one.at(1).digits(), vec![1]);
        let zero = to_cross(&table(1, &[0, 0]), Role::Bob);
        assert_eq!(zero.at(0).digits(), vec![0]);
        assert_eq!(zero.at(1).digits(), vec![3]);
    }

    #[test]
    fn transform_matches_digitwise_formula_and_inverts() {
        for seed in 0..10 {
            let st = make_strategy(&StrategyFamily::Random(seed), 4).unwrap();
            let cf = to_cross(&st.f, Role::Alice);
            for v in 0..16u32 {
                let fv = st.f.raw()[v as usize];
                for i in 0..4 {
                    let expect = (2 * ((fv >> i) & 1) as i32 - ((v >> i) & 1) as i32).rem_euclid(4);
                    assert_eq!(i32::from(cf.at(v).digit(i)), expect);
                }
                assert_eq!(cf.at(v).mod2().bits(), v);
            }
            assert_eq!(from_cross(&cf).unwrap(), st.f);
        }
    }

    #[test]
    fn cross_success_of_constants() {
        let ones = make_strategy(&StrategyFamily::Constant(true), 1).unwrap();
        let zeros = make_strategy(&StrategyFamily::Constant(false), 1).unwrap();
        let v = |st| cross_success(&to_cross_triple(st)).unwrap().exact_value().unwrap().clone();
        assert_eq!(v(&ones), Exact::new(3, 4));
        assert_eq!(v(&zeros), Exact::new(1, 4));
    }

    #[test]
    fn biconditional_on_every_single_round_instance() {
        // 4 questions x 8 answer triples, realised as constant strategies
        let mut cases = 0;
        for q in enumerate_questions(1).unwrap() {
            for answers in 0..8u32 {
                let t = |bit: u32| table(1, &[(answers >> bit) & 1; 2]);
                let st = StrategyTriple::new(t(0), t(1), t(2)).unwrap();
                assert!(equivalence_check(&st, &q).unwrap());
                cases += 1;
            }
        }
        assert_eq!(cases, 32);
    }

    #[test]
    fn worked_instance_both_sides_true() {
        let st = StrategyTriple::new(table(1, &[1, 1]), table(1, &[0, 0]), table(1, &[0, 0])).unwrap();
        let q = QuestionTriple::from_xy(1, 1, 1);
        assert!(st.wins(&q).unwrap());
        let ct = to_cross_triple(&st);
        assert!(ct.vanishes(1, 1));
        assert!(equivalence_check(&st, &q).unwrap());
    }

    #[test]
    fn equivalence_rejects_bad_question() {
        let st = make_strategy(&StrategyFamily::Constant(true), 1).unwrap();
        let bad = QuestionTriple {
            x: BitVec::from_raw(1, 1),
            y: BitVec::from_raw(1, 0),
            z: BitVec::from_raw(1, 0),
        };
        assert!(matches!(equivalence_check(&st, &bad), Err(Error::InvalidQuestion)));
    }

    #[test]
    fn cross_success_equals_game_value() {
        for n in 1..=5 {
            for seed in 0..5 {
                let st = make_strategy(&StrategyFamily::Random(seed), n).unwrap();
                let a = evaluate_value_exact(&st).unwrap();
                let b = cross_success(&to_cross_triple(&st)).unwrap();
                assert_eq!(a.exact_value(), b.exact_value());
            }
        }
    }

    #[test]
    fn planted_triple_vanishes_everywhere_and_corrupts_requested_fraction() {
        let spec = PlantedSpec::random(5, 0.0, 3).unwrap();
        let p = planted_cross(&spec).unwrap();
        assert_eq!(cross_success(&p.triple).unwrap().exact_value().unwrap(), &Exact::one());
        for x in 0..32u32 {
            assert!(p.triple.f.at(x).sub(spec.shift).is_even());
        }
        let spec = PlantedSpec::random(5, 0.1, 3).unwrap();
        let p = planted_cross(&spec).unwrap();
        assert_eq!(p.corrupted.len(), 3);
        for x in 0..32u32 {
            assert_eq!(p.corrupted.contains(&x), p.triple.f.at(x) != spec.value(x));
        }
    }

    #[test]
    fn mismatch_counter_flags_tampered_function() {
        // constant 1 wins exactly when x | y is all ones: four y's for x = 011
        let st = make_strategy(&StrategyFamily::Constant(true), 3).unwrap();
        let mut ct = to_cross_triple(&st);
        assert_eq!(count_mismatches(&st, &ct, 0, 0).unwrap().mismatches, 0);
        let mut table = ct.f.table().to_vec();
        table[3] = table[3].add(QuatVec::from_digits(&[1, 0, 0]).unwrap());
        ct.f = CrossFn::new(3, table).unwrap();
        assert_eq!(count_mismatches(&st, &ct, 0, 0).unwrap().mismatches, 4);
    }
}
