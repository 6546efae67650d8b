use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exact::Exact;
use crate::z4::{cross_success, CrossFn, CrossTriple};

pub const MAX_HISTOGRAM_DIM: usize = 16;
pub const MAX_NAIVE_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadrupleMethod {
    Histogram,
    Naive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrupleReport {
    pub method: QuadrupleMethod,
    pub n: usize,
    #[serde(rename = "N")]
    pub domain: u64,
    pub count: u64,
    /// `η⁴N³` when a success probability was supplied.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<Exact>,
}

/// Number of `(x, y, u, v)` with `x ⊕ y = u ⊕ v` and `F(x) + F(y) = F(u) + F(v)`.
pub fn count_quadruples(f: &CrossFn, method: QuadrupleMethod) -> Result<QuadrupleReport> {
    let n = f.dim();
    let count = match method {
        QuadrupleMethod::Histogram => {
            check_dim("histogram quadruple count", n, MAX_HISTOGRAM_DIM)?;
            count_histogram(f)
        }
        QuadrupleMethod::Naive => {
            check_dim("naive quadruple count", n, MAX_NAIVE_DIM)?;
            count_naive(f)
        }
    };
    Ok(QuadrupleReport { method, n, domain: 1 << n, count, bound: None })
}

fn sum_key(f: &CrossFn, x: u32, y: u32) -> u64 {
    let s = f.at(x).add(f.at(y));
    u64::from(s.lo()) | (u64::from(s.hi()) << 32)
}

/// For each difference class `s`, the multiset `{F(x) + F(x ⊕ s)}`
/// contributes the sum of its squared multiplicities.
fn count_histogram(f: &CrossFn) -> u64 {
    let size = f.domain_size() as u32;
    (0..size)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(size as usize),
            |buf: &mut Vec<u64>, s| {
                buf.clear();
                buf.extend((0..size).map(|x| sum_key(f, x, x ^ s)));
                buf.sort_unstable();
                let mut total = 0u64;
                let mut i = 0;
                while i < buf.len() {
                    let j = i + buf[i..].iter().take_while(|&&v| v == buf[i]).count();
                    let m = (j - i) as u64;
                    total += m * m;
                    i = j;
                }
                total
            },
        )
        .sum()
}

fn count_naive(f: &CrossFn) -> u64 {
    let size = f.domain_size() as u32;
    (0..size)
        .into_par_iter()
        .map(|x| {
            let mut c = 0u64;
            for y in 0..size {
                let lhs = f.at(x).add(f.at(y));
                for u in 0..size {
                    let v = x ^ y ^ u;
                    if lhs == f.at(u).add(f.at(v)) {
                        c += 1;
                    }
                }
            }
            c
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub eta: Exact,
    pub count: u64,
    pub bound: Exact,
    pub holds: bool,
}

/// `η⁴N³` for success probability `η` at dimension `n`.
pub fn quadruple_bound(eta: &Exact, n: usize) -> Exact {
    let cube = Exact::from_int(BigInt::from(1u8) << (3 * n));
    &eta.pow(4) * &cube
}

/// Compares the quadruple count of `F` with `η⁴N³`, `η` the exact success
/// probability of the triple.
pub fn quadruple_bound_check(ct: &CrossTriple) -> Result<BoundCheck> {
    let report = cross_success(ct)?;
    let eta = report
        .exact_value()
        .cloned()
        .ok_or_else(|| Error::invalid("exact success probability unavailable"))?;
    let count = count_quadruples(&ct.f, QuadrupleMethod::Histogram)?.count;
    let bound = quadruple_bound(&eta, ct.dim());
    let holds = Exact::from_int(count) >= bound;
    Ok(BoundCheck { eta, count, bound, holds })
}

/// `Pr_{x,u,u'}[F(x) − F(x ⊕ u ⊕ u') = H(u') − H(u)]`, the midpoint of the
/// two Cauchy–Schwarz steps; it is at least `η²`.
pub fn cauchy_schwarz_midpoint(ct: &CrossTriple) -> Result<Exact> {
    let n = ct.dim();
    check_dim("Cauchy-Schwarz midpoint", n, MAX_NAIVE_DIM)?;
    let size = 1u32 << n;
    let (f, h) = (&ct.f, &ct.h);
    let hits: u64 = (0..size)
        .into_par_iter()
        .map(|u| {
            let mut c = 0u64;
            for up in 0..size {
                let rhs = h.at(up).sub(h.at(u));
                let d = u ^ up;
                c += (0..size).filter(|&x| f.at(x).sub(f.at(x ^ d)) == rhs).count() as u64;
            }
            c
        })
        .sum();
    Ok(Exact::new(hits, 1u64 << (3 * n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_strategy, StrategyFamily};
    use crate::vectors::QuatVec;
    use crate::z4::to_cross_triple;

    fn f1(a: u8, b: u8) -> CrossFn {
        CrossFn::new(
            1,
            vec![QuatVec::from_digits(&[a]).unwrap(), QuatVec::from_digits(&[b]).unwrap()],
        )
        .unwrap()
    }

    /// Literal enumeration of all 4-tuples, kept apart from both counters.
    fn brute(f: &CrossFn) -> u64 {
        let size = f.domain_size() as u32;
        let mut c = 0;
        for x in 0..size {
            for y in 0..size {
                for u in 0..size {
                    for v in 0..size {
                        if x ^ y == u ^ v && f.at(x).add(f.at(y)) == f.at(u).add(f.at(v)) {
                            c += 1;
                        }
                    }
                }
            }
        }
        c
    }

    #[test]
    fn single_coordinate_hand_cases() {
        for f in [f1(0, 1), f1(2, 1)] {
            assert_eq!(brute(&f), 6);
            for m in [QuadrupleMethod::Histogram, QuadrupleMethod::Naive] {
                assert_eq!(count_quadruples(&f, m).unwrap().count, 6);
            }
        }
    }

    #[test]
    fn constant_function_saturates() {
        for n in 1..=5 {
            let f = CrossFn::constant(n, QuatVec::from_index(n, 7 % (1 << (2 * n)))).unwrap();
            let cube = 1u64 << (3 * n);
            assert_eq!(count_quadruples(&f, QuadrupleMethod::Histogram).unwrap().count, cube);
            assert_eq!(count_quadruples(&f, QuadrupleMethod::Naive).unwrap().count, cube);
        }
    }

    #[test]
    fn counters_agree_with_brute_force() {
        for seed in 0..12 {
            let f = CrossFn::random(1 + seed as usize % 3, seed).unwrap();
            let b = brute(&f);
            assert_eq!(count_quadruples(&f, QuadrupleMethod::Histogram).unwrap().count, b);
            assert_eq!(count_quadruples(&f, QuadrupleMethod::Naive).unwrap().count, b);
        }
    }

    #[test]
    fn bound_for_constant_one_strategies() {
        let st = make_strategy(&StrategyFamily::Constant(true), 1).unwrap();
        let check = quadruple_bound_check(&to_cross_triple(&st)).unwrap();
        assert_eq!(check.eta, Exact::new(3, 4));
        assert_eq!(check.count, 6);
        assert_eq!(check.bound, Exact::new(81, 32));
        assert!(check.holds);
    }

    #[test]
    fn zero_success_gives_zero_bound() {
        assert_eq!(quadruple_bound(&Exact::zero(), 4), Exact::zero());
    }

    #[test]
    fn midpoint_dominates_eta_squared() {
        for seed in 0..10 {
            let st = make_strategy(&StrategyFamily::Random(seed), 3).unwrap();
            let ct = to_cross_triple(&st);
            let eta = cross_success(&ct).unwrap().exact_value().unwrap().clone();
            assert!(cauchy_schwarz_midpoint(&ct).unwrap() >= eta.pow(2));
        }
    }

    #[test]
    fn method_bounds() {
        let f = CrossFn::constant(9, QuatVec::zero(9)).unwrap();
        assert!(count_quadruples(&f, QuadrupleMethod::Naive).is_err());
    }
}
