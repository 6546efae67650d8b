//! The GHZ game, its n-fold parallel repetition, and strategy evaluation.
//!
//! Questions `(x, y, z)` with `x ⊕ y ⊕ z = 0` are generated as `(x, y)`
//! uniform and `z = x ⊕ y`. The players win when `a ⊕ b ⊕ c = x ∨ y ∨ z`
//! in every coordinate; since `z = x ⊕ y`, the right side is just `x | y`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exact::Exact;
use crate::seeds;
use crate::vectors::{mask, BitVec, MAX_DIM};

/// Largest n for which all 4ⁿ questions are enumerated.
pub const MAX_ENUM_DIM: usize = 13;
/// Largest n for the full strategy search.
pub const MAX_GAME_VALUE_DIM: usize = 2;

/// Two-sided 99% normal quantile.
const Z_99: f64 = 2.575_829_303_548_900_4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuestionTriple {
    pub x: BitVec,
    pub y: BitVec,
    pub z: BitVec,
}

impl QuestionTriple {
    pub fn new(x: BitVec, y: BitVec, z: BitVec) -> Result<Self> {
        let q = QuestionTriple { x, y, z };
        q.validate()?;
        Ok(q)
    }

    pub(crate) fn from_xy(n: usize, x: u32, y: u32) -> Self {
        QuestionTriple {
            x: BitVec::from_raw(n, x),
            y: BitVec::from_raw(n, y),
            z: BitVec::from_raw(n, x ^ y),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.dim();
        for d in [self.y.dim(), self.z.dim()] {
            if d != n {
                return Err(Error::DimensionMismatch { expected: n, found: d });
            }
        }
        if self.x.bits() ^ self.y.bits() ^ self.z.bits() != 0 {
            return Err(Error::InvalidQuestion);
        }
        Ok(())
    }
}

/// All 4ⁿ questions of the repeated game, lexicographic in `(x, y)`.
pub fn enumerate_questions(n: usize) -> Result<impl Iterator<Item = QuestionTriple>> {
    check_dim("question enumeration", n, MAX_ENUM_DIM)?;
    let size = 1u32 << n;
    Ok((0..size).flat_map(move |x| (0..size).map(move |y| QuestionTriple::from_xy(n, x, y))))
}

pub fn win_predicate(answers: (BitVec, BitVec, BitVec), q: &QuestionTriple) -> Result<bool> {
    let n = q.dim();
    for d in [answers.0.dim(), answers.1.dim(), answers.2.dim(), q.y.dim(), q.z.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, found: d });
        }
    }
    let lhs = answers.0.bits() ^ answers.1.bits() ^ answers.2.bits();
    let rhs = q.x.bits() | q.y.bits() | q.z.bits();
    Ok(lhs == rhs)
}

/// Truth table of a player's map {0,1}ⁿ → {0,1}ⁿ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StrategyTable {
    n: usize,
    table: Vec<u32>,
}

impl StrategyTable {
    pub fn new(n: usize, table: Vec<u32>) -> Result<Self> {
        check_dim("strategy table", n, MAX_DIM)?;
        if table.len() != 1usize << n {
            return Err(Error::invalid(format!(
                "strategy table for n={n} needs {} entries, got {}",
                1usize << n,
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&v| v & !mask(n) != 0) {
            return Err(Error::invalid(format!("entry {bad:#x} does not fit in {n} bits")));
        }
        Ok(Self { n, table })
    }

    pub fn constant(n: usize, value: u32) -> Result<Self> {
        check_dim("strategy table", n, MAX_DIM)?;
        Self::new(n, vec![value; 1 << n])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn raw(&self) -> &[u32] {
        &self.table
    }

    pub fn answer(&self, input: BitVec) -> BitVec {
        BitVec::from_raw(self.n, self.table[input.bits() as usize])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyTriple {
    pub f: StrategyTable,
    pub g: StrategyTable,
    pub h: StrategyTable,
}

impl StrategyTriple {
    pub fn new(f: StrategyTable, g: StrategyTable, h: StrategyTable) -> Result<Self> {
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

    pub fn wins(&self, q: &QuestionTriple) -> Result<bool> {
        win_predicate((self.f.answer(q.x), self.g.answer(q.y), self.h.answer(q.z)), q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueMethod {
    Exact,
    BestResponse,
    GameValue,
    Naive,
    Mc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Eta {
    Exact {
        value: Exact,
        wins: u64,
        questions: u64,
    },
    MonteCarlo {
        estimate: f64,
        ci_halfwidth: f64,
        samples: u64,
        wins: u64,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueReport {
    pub n: usize,
    pub method: ValueMethod,
    pub eta: Eta,
}

impl ValueReport {
    pub(crate) fn exact(n: usize, method: ValueMethod, wins: u64) -> Self {
        let questions = 1u64 << (2 * n);
        ValueReport {
            n,
            method,
            eta: Eta::Exact {
                value: Exact::new(wins, questions),
                wins,
                questions,
            },
        }
    }

    pub(crate) fn monte_carlo(n: usize, wins: u64, samples: u64, seed: u64) -> Self {
        let m = samples as f64;
        let mut p = wins as f64 / m;
        let estimate = p;
        if wins == 0 || wins == samples {
            p = (wins as f64 + 0.5) / (m + 1.0);
        }
        ValueReport {
            n,
            method: ValueMethod::Mc,
            eta: Eta::MonteCarlo {
                estimate,
                ci_halfwidth: Z_99 * (p * (1.0 - p) / m).sqrt(),
                samples,
                wins,
                seed,
            },
        }
    }

    /// Exact value, when the report came from an exact method.
    pub fn exact_value(&self) -> Option<&Exact> {
        match &self.eta {
            Eta::Exact { value, .. } => Some(value),
            Eta::MonteCarlo { .. } => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match &self.eta {
            Eta::Exact { value, .. } => value.to_f64(),
            Eta::MonteCarlo { estimate, .. } => *estimate,
        }
    }

    pub fn ci_halfwidth(&self) -> Option<f64> {
        match &self.eta {
            Eta::Exact { .. } => None,
            Eta::MonteCarlo { ci_halfwidth, .. } => Some(*ci_halfwidth),
        }
    }
}

#[inline]
fn winning_answers(x: u32, y: u32) -> u32 {
    x | y
}

fn count_wins(f: &[u32], g: &[u32], h: &[u32]) -> u64 {
    let size = f.len() as u32;
    (0..size)
        .into_par_iter()
        .map(|x| {
            let a = f[x as usize];
            (0..size)
                .filter(|&y| a ^ g[y as usize] ^ h[(x ^ y) as usize] == winning_answers(x, y))
                .count() as u64
        })
        .sum()
}

pub fn evaluate_value_exact(st: &StrategyTriple) -> Result<ValueReport> {
    let n = st.dim();
    check_dim("exact evaluation", n, MAX_ENUM_DIM)?;
    let wins = count_wins(st.f.raw(), st.g.raw(), st.h.raw());
    Ok(ValueReport::exact(n, ValueMethod::Exact, wins))
}

/// Estimate the value from `samples` uniform questions.
pub fn evaluate_value_mc(st: &StrategyTriple, samples: u64, seed: u64) -> Result<ValueReport> {
    if samples == 0 {
        return Err(Error::invalid("samples must be at least 1"));
    }
    let n = st.dim();
    let m = mask(n);
    let (f, g, h) = (st.f.raw(), st.g.raw(), st.h.raw());
    let batches: Vec<_> = seeds::batches(samples).collect();
    let wins: u64 = batches
        .par_iter()
        .map(|&(batch, len)| {
            let mut rng = seeds::stream_rng(seed, batch);
            let mut wins = 0u64;
            for _ in 0..len {
                let x = rng.random::<u32>() & m;
                let y = rng.random::<u32>() & m;
                if f[x as usize] ^ g[y as usize] ^ h[(x ^ y) as usize] == winning_answers(x, y) {
                    wins += 1;
                }
            }
            wins
        })
        .sum();
    Ok(ValueReport::monte_carlo(n, wins, samples, seed))
}

/// For a fixed `z`, the answer `c` that wins for the most `(x, y = x ⊕ z)`
/// pairs, with its count. Ties go to the smallest `c`.
fn best_answer(f: &[u32], g: &[u32], z: u32, counts: &mut [u32]) -> (u32, u32) {
    counts.iter_mut().for_each(|c| *c = 0);
    for x in 0..f.len() as u32 {
        let y = x ^ z;
        let c = f[x as usize] ^ g[y as usize] ^ winning_answers(x, y);
        counts[c as usize] += 1;
    }
    let mut best = (0u32, counts[0]);
    for (c, &k) in counts.iter().enumerate().skip(1) {
        if k > best.1 {
            best = (c as u32, k);
        }
    }
    best
}

/// Charlie's optimal reply to `(f, g)` and the resulting exact value.
pub fn best_response(f: &StrategyTable, g: &StrategyTable) -> Result<(StrategyTable, ValueReport)> {
    let n = f.dim();
    if g.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.dim() });
    }
    check_dim("best response", n, MAX_ENUM_DIM)?;
    let size = 1u32 << n;
    let replies: Vec<(u32, u32)> = (0..size)
        .into_par_iter()
        .map_init(
            || vec![0u32; size as usize],
            |counts, z| best_answer(f.raw(), g.raw(), z, counts),
        )
        .collect();
    let wins = replies.iter().map(|&(_, k)| u64::from(k)).sum();
    let h = StrategyTable::new(n, replies.into_iter().map(|(c, _)| c).collect())?;
    Ok((h, ValueReport::exact(n, ValueMethod::BestResponse, wins)))
}

fn decode_table(n: usize, code: u64) -> Vec<u32> {
    let m = mask(n);
    (0..1usize << n)
        .map(|j| ((code >> (n * j)) as u32) & m)
        .collect()
}

/// Exhaustive search over all `(f, g)` with Charlie's best response.
/// Returns the value and the first optimal triple in `(f, g)` code order.
pub fn exact_game_value_witness(n: usize) -> Result<(ValueReport, StrategyTriple)> {
    check_dim("exact game value", n, MAX_GAME_VALUE_DIM)?;
    let codes = 1u64 << (n << n);
    let size = 1usize << n;
    let tables: Vec<Vec<u32>> = (0..codes).map(|c| decode_table(n, c)).collect();
    let (wins, fi, gi) = (0..codes as usize)
        .into_par_iter()
        .map_init(
            || vec![0u32; size],
            |counts, fi| {
                let f = &tables[fi];
                let mut best = (0u64, fi, 0usize);
                for (gi, g) in tables.iter().enumerate() {
                    let wins: u64 = (0..size as u32)
                        .map(|z| u64::from(best_answer(f, g, z, counts).1))
                        .sum();
                    if wins > best.0 {
                        best = (wins, fi, gi);
                    }
                }
                best
            },
        )
        .reduce(
            || (0, usize::MAX, usize::MAX),
            |a, b| {
                // max wins, then smallest (f, g)
                if a.0 > b.0 || (a.0 == b.0 && (a.1, a.2) <= (b.1, b.2)) {
                    a
                } else {
                    b
                }
            },
        );
    let f = StrategyTable::new(n, tables[fi].clone())?;
    let g = StrategyTable::new(n, tables[gi].clone())?;
    let (h, _) = best_response(&f, &g)?;
    Ok((
        ValueReport::exact(n, ValueMethod::GameValue, wins),
        StrategyTriple::new(f, g, h)?,
    ))
}

pub fn exact_game_value(n: usize) -> Result<ValueReport> {
    exact_game_value_witness(n).map(|(r, _)| r)
}

/// Game value by enumerating every strategy triple, without the
/// best-response collapse. Only n = 1 (64 triples) is supported.
pub fn naive_game_value(n: usize) -> Result<ValueReport> {
    check_dim("naive game value", n, 1)?;
    let tables: Vec<StrategyTable> = (0..4u64)
        .map(|c| StrategyTable::new(1, decode_table(1, c)))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for f in &tables {
        for g in &tables {
            for h in &tables {
                best = best.max(count_wins(f.raw(), g.raw(), h.raw()));
            }
        }
    }
    Ok(ValueReport::exact(n, ValueMethod::Naive, best))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategyFamily {
    /// Every player always answers all-`bit`.
    Constant(bool),
    /// A one-coordinate triple applied independently per coordinate.
    Product(StrategyTriple),
    /// Uniformly random tables from a seed.
    Random(u64),
}

fn product_table(base: &StrategyTable, n: usize) -> Vec<u32> {
    let b = base.raw();
    (0..1u32 << n)
        .map(|x| {
            (0..n).fold(0u32, |acc, i| acc | ((b[((x >> i) & 1) as usize] & 1) << i))
        })
        .collect()
}

pub fn make_strategy(family: &StrategyFamily, n: usize) -> Result<StrategyTriple> {
    check_dim("strategy family", n, MAX_DIM)?;
    match family {
        StrategyFamily::Constant(bit) => {
            let t = StrategyTable::constant(n, if *bit { mask(n) } else { 0 })?;
            StrategyTriple::new(t.clone(), t.clone(), t)
        }
        StrategyFamily::Product(base) => {
            if base.dim() != 1 {
                return Err(Error::invalid(format!(
                    "product base must be a 1-coordinate strategy, got n={}",
                    base.dim()
                )));
            }
            StrategyTriple::new(
                StrategyTable::new(n, product_table(&base.f, n))?,
                StrategyTable::new(n, product_table(&base.g, n))?,
                StrategyTable::new(n, product_table(&base.h, n))?,
            )
        }
        StrategyFamily::Random(seed) => {
            let mut rng = seeds::rng(*seed);
            let m = mask(n);
            let mut table = || -> Result<StrategyTable> {
                StrategyTable::new(n, (0..1usize << n).map(|_| rng.random::<u32>() & m).collect())
            };
            let (f, g, h) = (table()?, table()?, table()?);
            StrategyTriple::new(f, g, h)
        }
    }
}

/// The single-coordinate triple where every player answers 1.
pub fn constant_one_base() -> StrategyTriple {
    make_strategy(&StrategyFamily::Constant(true), 1).expect("n = 1 is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(n: usize, f: &[u32], g: &[u32], h: &[u32]) -> StrategyTriple {
        StrategyTriple::new(
            StrategyTable::new(n, f.to_vec()).unwrap(),
            StrategyTable::new(n, g.to_vec()).unwrap(),
            StrategyTable::new(n, h.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn exact(st: &StrategyTriple) -> Exact {
        evaluate_value_exact(st).unwrap().exact_value().unwrap().clone()
    }

    #[test]
    fn single_round_questions() {
        let qs: Vec<_> = enumerate_questions(1)
            .unwrap()
            .map(|q| (q.x.bits(), q.y.bits(), q.z.bits()))
            .collect();
        assert_eq!(qs, vec![(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]);
    }

    #[test]
    fn question_enumeration_matches_filtered_cube() {
        // every triple of {0..8}^3, kept when it xors to zero
        let brute: Vec<_> = (0..8u32)
            .flat_map(|x| (0..8u32).flat_map(move |y| (0..8u32).map(move |z| (x, y, z))))
            .filter(|(x, y, z)| x ^ y ^ z == 0)
            .collect();
        let qs: Vec<_> = enumerate_questions(3)
            .unwrap()
            .map(|q| (q.x.bits(), q.y.bits(), q.z.bits()))
            .collect();
        assert_eq!(qs.len(), 64);
        assert_eq!(qs, brute);
    }

    #[test]
    fn enumeration_bound_is_enforced() {
        assert!(matches!(
            enumerate_questions(14).err(),
            Some(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn win_predicate_cases() {
        let b = |v| BitVec::new(1, v).unwrap();
        let q = |x, y, z| QuestionTriple::new(b(x), b(y), b(z)).unwrap();
        assert!(win_predicate((b(1), b(0), b(0)), &q(1, 1, 0)).unwrap());
        assert!(win_predicate((b(0), b(0), b(0)), &q(0, 0, 0)).unwrap());
        assert!(!win_predicate((b(1), b(1), b(1)), &q(0, 0, 0)).unwrap());
        let wide = BitVec::new(2, 0).unwrap();
        assert!(matches!(
            win_predicate((wide, b(0), b(0)), &q(0, 0, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            QuestionTriple::new(b(1), b(0), b(0)),
            Err(Error::InvalidQuestion)
        ));
    }

    #[test]
    fn constant_strategies() {
        assert_eq!(exact(&triple(1, &[1, 1], &[1, 1], &[1, 1])), Exact::new(3, 4));
        assert_eq!(exact(&triple(1, &[0, 0], &[0, 0], &[0, 0])), Exact::new(1, 4));
    }

    #[test]
    fn product_of_constant_one_at_two_coordinates() {
        let st = make_strategy(&StrategyFamily::Product(constant_one_base()), 2).unwrap();
        assert_eq!(exact(&st), Exact::new(9, 16));
        let by_hand = enumerate_questions(2)
            .unwrap()
            .filter(|q| st.wins(q).unwrap())
            .count();
        assert_eq!(by_hand, 9);
    }

    #[test]
    fn best_response_single_round() {
        let one = StrategyTable::new(1, vec![1, 1]).unwrap();
        let (h, report) = best_response(&one, &one).unwrap();
        assert_eq!(h.raw(), &[0, 1]);
        assert_eq!(report.exact_value().unwrap(), &Exact::new(3, 4));
    }

    #[test]
    fn best_response_beats_every_reply_at_one_coordinate() {
        for fc in 0..4u64 {
            for gc in 0..4u64 {
                let f = StrategyTable::new(1, decode_table(1, fc)).unwrap();
                let g = StrategyTable::new(1, decode_table(1, gc)).unwrap();
                let (h_best, report) = best_response(&f, &g).unwrap();
                let best = report.exact_value().unwrap().clone();
                let st = StrategyTriple::new(f.clone(), g.clone(), h_best).unwrap();
                assert_eq!(exact(&st), best);
                for hc in 0..4u64 {
                    let h = StrategyTable::new(1, decode_table(1, hc)).unwrap();
                    let st = StrategyTriple::new(f.clone(), g.clone(), h).unwrap();
                    assert!(exact(&st) <= best);
                }
            }
        }
    }

    #[test]
    fn best_response_matches_exhaustive_replies_at_two_coordinates() {
        for seed in 0..20 {
            let st = make_strategy(&StrategyFamily::Random(seed), 2).unwrap();
            let (_, report) = best_response(&st.f, &st.g).unwrap();
            let oracle = (0..256u64)
                .map(|hc| {
                    let h = StrategyTable::new(2, decode_table(2, hc)).unwrap();
                    exact(&StrategyTriple::new(st.f.clone(), st.g.clone(), h).unwrap())
                })
                .max()
                .unwrap();
            assert_eq!(report.exact_value().unwrap(), &oracle);
        }
    }

    #[test]
    fn single_game_value_both_routes() {
        assert_eq!(exact_game_value(1).unwrap().exact_value().unwrap(), &Exact::new(3, 4));
        assert_eq!(naive_game_value(1).unwrap().exact_value().unwrap(), &Exact::new(3, 4));
        assert!(exact_game_value(3).is_err());
        assert!(naive_game_value(2).is_err());
    }

    #[test]
    fn random_family_is_reproducible() {
        let a = make_strategy(&StrategyFamily::Random(7), 3).unwrap();
        let b = make_strategy(&StrategyFamily::Random(7), 3).unwrap();
        let c = make_strategy(&StrategyFamily::Random(8), 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_consistent() {
        let st = make_strategy(&StrategyFamily::Random(3), 1).unwrap();
        let a = evaluate_value_mc(&st, 1_000_000, 11).unwrap();
        let b = evaluate_value_mc(&st, 1_000_000, 11).unwrap();
        assert_eq!(a, b);
        let truth = exact(&st).to_f64();
        let sigma = (truth * (1.0 - truth) / 1e6).sqrt().max(1e-12);
        assert!((a.as_f64() - truth).abs() <= 3.0 * sigma);
        assert!(evaluate_value_mc(&st, 0, 1).is_err());
    }

    #[test]
    fn degenerate_monte_carlo_still_has_positive_interval() {
        let st = make_strategy(&StrategyFamily::Constant(false), 3).unwrap();
        // constant-0 wins only on x = y = 0
        let r = evaluate_value_mc(&st, 10, 1).unwrap();
        assert!(r.ci_halfwidth().unwrap() > 0.0);
    }
}
