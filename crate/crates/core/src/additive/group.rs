//! Subsets of the ambient group Z₂ⁿ × Z₄ⁿ and their sumsets.
//!
//! Elements are packed into a `3n`-bit key: bits `0..n` hold the Z₂ part,
//! bits `n..2n` the low plane of the Z₄ part and `2n..3n` its high plane.
//! The same key indexes the dense bitset.

use std::collections::HashSet;
use std::fmt;

use crate::additive::ntt;
use crate::error::{check_dim, Error, Result};
use crate::vectors::{mask, BitVec, QuatVec, MAX_DIM};

/// Largest n with a dense representation (8ⁿ ≤ 2²⁴).
pub const MAX_DENSE_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElem {
    pub u: BitVec,
    pub w: QuatVec,
}

impl GroupElem {
    pub fn new(u: BitVec, w: QuatVec) -> Result<Self> {
        if u.dim() != w.dim() {
            return Err(Error::DimensionMismatch { expected: u.dim(), found: w.dim() });
        }
        Ok(Self { u, w })
    }

    pub fn zero(n: usize) -> Self {
        Self { u: BitVec::zero(n), w: QuatVec::zero(n) }
    }

    pub fn add(self, o: Self) -> Self {
        Self { u: self.u.xor(o.u), w: self.w.add(o.w) }
    }

    pub fn neg(self) -> Self {
        Self { u: self.u, w: self.w.neg() }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn key(self) -> u64 {
        pack(self.u.dim(), self.u.bits(), self.w.lo(), self.w.hi())
    }

    pub fn from_key(n: usize, key: u64) -> Self {
        let (u, lo, hi) = unpack(n, key);
        Self { u: BitVec::from_raw(n, u), w: QuatVec::from_planes(n, lo, hi) }
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.w)
    }
}

#[inline]
pub(crate) fn pack(n: usize, u: u32, lo: u32, hi: u32) -> u64 {
    u64::from(u) | (u64::from(lo) << n) | (u64::from(hi) << (2 * n))
}

#[inline]
pub(crate) fn unpack(n: usize, key: u64) -> (u32, u32, u32) {
    let m = u64::from(mask(n));
    (
        (key & m) as u32,
        ((key >> n) & m) as u32,
        ((key >> (2 * n)) & m) as u32,
    )
}

#[inline]
pub(crate) fn add_keys(n: usize, a: u64, b: u64) -> u64 {
    let (ua, la, ha) = unpack(n, a);
    let (ub, lb, hb) = unpack(n, b);
    pack(n, ua ^ ub, la ^ lb, ha ^ hb ^ (la & lb))
}

#[inline]
pub(crate) fn neg_key(n: usize, a: u64) -> u64 {
    let (u, lo, hi) = unpack(n, a);
    pack(n, u, lo, hi ^ lo)
}

#[derive(Clone, Debug)]
enum Repr {
    Sparse(HashSet<u64>),
    Dense(Vec<u64>),
}

/// Which algorithm computes a sumset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SumsetMode {
    /// Dense convolution when pairwise hashing would cost more.
    #[default]
    Auto,
    Dense,
    Sparse,
}

/// A subset of Z₂ⁿ × Z₄ⁿ.
#[derive(Clone, Debug)]
pub struct GroupSet {
    n: usize,
    repr: Repr,
}

impl PartialEq for GroupSet {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.len() == other.len() && self.keys() == other.keys()
    }
}

impl Eq for GroupSet {}

impl GroupSet {
    pub fn empty(n: usize) -> Self {
        Self { n, repr: Repr::Sparse(HashSet::new()) }
    }

    pub fn from_elems(n: usize, elems: impl IntoIterator<Item = GroupElem>) -> Result<Self> {
        check_dim("group set", n, MAX_DIM)?;
        let mut set = HashSet::new();
        for e in elems {
            if e.u.dim() != n || e.w.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: e.u.dim() });
            }
            set.insert(e.key());
        }
        Ok(Self { n, repr: Repr::Sparse(set) })
    }

    pub(crate) fn from_keys(n: usize, keys: impl IntoIterator<Item = u64>) -> Self {
        Self { n, repr: Repr::Sparse(keys.into_iter().collect()) }
    }

    /// `{0} × Z₄ⁿ`-style sets: Z₂ part zero, Z₄ part from `ws`.
    pub fn from_quats(n: usize, ws: impl IntoIterator<Item = QuatVec>) -> Self {
        Self::from_keys(n, ws.into_iter().map(|w| pack(n, 0, w.lo(), w.hi())))
    }

    pub fn singleton(e: GroupElem) -> Self {
        Self::from_keys(e.u.dim(), [e.key()])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Sparse(s) => s.len(),
            Repr::Dense(bits) => bits.iter().map(|w| w.count_ones() as usize).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense(_))
    }

    pub fn contains(&self, e: &GroupElem) -> bool {
        self.contains_key(e.key())
    }

    pub(crate) fn contains_key(&self, key: u64) -> bool {
        match &self.repr {
            Repr::Sparse(s) => s.contains(&key),
            Repr::Dense(bits) => (bits[(key >> 6) as usize] >> (key & 63)) & 1 == 1,
        }
    }

    /// Packed keys in increasing order.
    pub(crate) fn keys(&self) -> Vec<u64> {
        match &self.repr {
            Repr::Sparse(s) => {
                let mut v: Vec<u64> = s.iter().copied().collect();
                v.sort_unstable();
                v
            }
            Repr::Dense(bits) => dense_keys(bits),
        }
    }

    /// Elements in increasing key order.
    pub fn elems(&self) -> Vec<GroupElem> {
        self.keys().into_iter().map(|k| GroupElem::from_key(self.n, k)).collect()
    }

    pub fn to_dense(&self) -> Result<Self> {
        check_dim("dense group set", self.n, MAX_DENSE_DIM)?;
        Ok(match &self.repr {
            Repr::Dense(_) => self.clone(),
            Repr::Sparse(s) => {
                let mut bits = vec![0u64; dense_words(self.n)];
                for &k in s {
                    bits[(k >> 6) as usize] |= 1 << (k & 63);
                }
                Self { n: self.n, repr: Repr::Dense(bits) }
            }
        })
    }

    pub fn to_sparse(&self) -> Self {
        match &self.repr {
            Repr::Sparse(_) => self.clone(),
            Repr::Dense(bits) => Self::from_keys(self.n, dense_keys(bits)),
        }
    }

    pub fn negate(&self) -> Self {
        Self::from_keys(self.n, self.keys().into_iter().map(|k| neg_key(self.n, k)))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self::from_keys(self.n, self.keys().into_iter().chain(other.keys())))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.n == other.n && self.keys().into_iter().all(|k| other.contains_key(k))
    }

    /// Z₄ parts of the elements whose Z₂ part equals `u`, in index order.
    pub fn fiber(&self, u: u32) -> Vec<QuatVec> {
        let mut out: Vec<QuatVec> = self
            .keys()
            .into_iter()
            .filter_map(|k| {
                let (x, lo, hi) = unpack(self.n, k);
                (x == u).then(|| QuatVec::from_planes(self.n, lo, hi))
            })
            .collect();
        out.sort();
        out
    }

    /// True when no two elements share a Z₂ part.
    pub fn is_function_graph(&self) -> bool {
        let m = u64::from(mask(self.n));
        let mut seen = HashSet::new();
        self.keys().into_iter().all(|k| seen.insert(k & m))
    }
}

fn same_dim(a: &GroupSet, b: &GroupSet) -> Result<()> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { expected: a.n, found: b.n });
    }
    Ok(())
}

fn dense_words(n: usize) -> usize {
    (1usize << (3 * n)).div_ceil(64)
}

fn dense_keys(bits: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    for (i, &w) in bits.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let b = w.trailing_zeros() as u64;
            out.push(((i as u64) << 6) | b);
            w &= w - 1;
        }
    }
    out
}

fn prefer_dense(n: usize, a: usize, b: usize) -> bool {
    if n > MAX_DENSE_DIM {
        return false;
    }
    let ambient = 1u128 << (3 * n);
    (a as u128) * (b as u128) > (n as u128) * ambient
}

fn sumset_sparse(a: &GroupSet, b: &GroupSet) -> GroupSet {
    let n = a.n;
    let (ka, kb) = (a.keys(), b.keys());
    let mut out = HashSet::with_capacity(ka.len().max(kb.len()));
    for &x in &ka {
        for &y in &kb {
            out.insert(add_keys(n, x, y));
        }
    }
    GroupSet::from_keys(n, out)
}

fn sumset_dense(a: &GroupSet, b: &GroupSet) -> Result<GroupSet> {
    let n = a.n;
    check_dim("dense sumset", n, MAX_DENSE_DIM)?;
    let indicator = |s: &GroupSet| {
        let mut v = vec![0u64; 1usize << (3 * n)];
        for k in s.keys() {
            v[k as usize] = 1;
        }
        v
    };
    let mut fa = indicator(a);
    ntt::forward(&mut fa, n);
    if std::ptr::eq(a, b) {
        ntt::square_in_place(&mut fa);
    } else {
        let mut fb = indicator(b);
        ntt::forward(&mut fb, n);
        ntt::mul_in_place(&mut fa, &fb);
    }
    ntt::inverse_unscaled(&mut fa, n);
    let mut bits = vec![0u64; dense_words(n)];
    for (k, &c) in fa.iter().enumerate() {
        if c != 0 {
            bits[k >> 6] |= 1 << (k & 63);
        }
    }
    Ok(GroupSet { n, repr: Repr::Dense(bits) })
}

pub fn sumset_with(a: &GroupSet, b: &GroupSet, mode: SumsetMode) -> Result<GroupSet> {
    same_dim(a, b)?;
    if a.is_empty() || b.is_empty() {
        return Ok(GroupSet::empty(a.n));
    }
    match mode {
        SumsetMode::Sparse => Ok(sumset_sparse(a, b)),
        SumsetMode::Dense => sumset_dense(a, b),
        SumsetMode::Auto if prefer_dense(a.n, a.len(), b.len()) => sumset_dense(a, b),
        SumsetMode::Auto => Ok(sumset_sparse(a, b)),
    }
}

/// `A + B`.
pub fn sumset(a: &GroupSet, b: &GroupSet) -> Result<GroupSet> {
    sumset_with(a, b, SumsetMode::Auto)
}

/// `A − B`.
pub fn difference_set(a: &GroupSet, b: &GroupSet) -> Result<GroupSet> {
    sumset(a, &b.negate())
}

pub fn iterated_sumset_with(a: &GroupSet, k: usize, mode: SumsetMode) -> Result<GroupSet> {
    if k == 0 {
        return Err(Error::invalid("iterated sumset needs k >= 1"));
    }
    // binary expansion: doublings A, 2A, 4A, ... folded into the result
    let mut result: Option<GroupSet> = None;
    let mut power = a.clone();
    let mut k = k;
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => power.clone(),
                Some(r) => sumset_with(&r, &power, mode)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        power = sumset_with(&power, &power, mode)?;
    }
    Ok(result.expect("k >= 1"))
}

/// `kA`.
pub fn iterated_sumset(a: &GroupSet, k: usize) -> Result<GroupSet> {
    iterated_sumset_with(a, k, SumsetMode::Auto)
}

/// `mA − rA`.
pub fn mixed_sumset(a: &GroupSet, m: usize, r: usize) -> Result<GroupSet> {
    let plus = iterated_sumset(a, m)?;
    let minus = iterated_sumset(a, r)?;
    difference_set(&plus, &minus)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoublingReport {
    pub diff_size: usize,
    pub size: usize,
    pub ratio: crate::exact::Exact,
}

/// `|A − A|` and `|A − A| / |A|`.
pub fn doubling_report(a: &GroupSet) -> Result<DoublingReport> {
    if a.is_empty() {
        return Err(Error::Empty("doubling report set"));
    }
    let diff = difference_set(a, a)?;
    Ok(DoublingReport {
        diff_size: diff.len(),
        size: a.len(),
        ratio: crate::exact::Exact::new(diff.len() as u64, a.len() as u64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use rand::Rng;

    fn elem(n: usize, u: u32, w: &[u8]) -> GroupElem {
        GroupElem::new(BitVec::new(n, u).unwrap(), QuatVec::from_digits(w).unwrap()).unwrap()
    }

    fn random_set(n: usize, size: usize, seed: u64) -> GroupSet {
        let mut rng = seeds::rng(seed);
        let ambient = 1u64 << (3 * n);
        GroupSet::from_keys(n, (0..size).map(|_| rng.random_range(0..ambient)))
    }

    #[test]
    fn key_packing_round_trips() {
        let e = elem(3, 5, &[1, 2, 3]);
        assert_eq!(GroupElem::from_key(3, e.key()), e);
        let f = elem(3, 6, &[3, 3, 1]);
        assert_eq!(GroupElem::from_key(3, add_keys(3, e.key(), f.key())), e.add(f));
        assert_eq!(e.add(e.neg()), GroupElem::zero(3));
    }

    #[test]
    fn zero_set_is_fixed() {
        let z = GroupSet::singleton(GroupElem::zero(2));
        assert_eq!(sumset(&z, &z).unwrap(), z);
        assert_eq!(iterated_sumset(&z, 5).unwrap(), z);
    }

    #[test]
    fn hand_sumset_in_z2_times_z4() {
        let a = GroupSet::from_elems(1, [elem(1, 0, &[0]), elem(1, 1, &[1])]).unwrap();
        let expect =
            GroupSet::from_elems(1, [elem(1, 0, &[0]), elem(1, 1, &[1]), elem(1, 0, &[2])]).unwrap();
        for mode in [SumsetMode::Sparse, SumsetMode::Dense] {
            assert_eq!(sumset_with(&a, &a, mode).unwrap(), expect);
        }
    }

    #[test]
    fn dense_matches_sparse_on_random_sets() {
        for seed in 0..30 {
            let n = 1 + (seed as usize % 4);
            let a = random_set(n, 1 + seed as usize * 3 % 40, seed);
            let b = random_set(n, 1 + seed as usize * 7 % 50, seed + 1000);
            let d = sumset_with(&a, &b, SumsetMode::Dense).unwrap();
            let s = sumset_with(&a, &b, SumsetMode::Sparse).unwrap();
            assert!(d.is_dense());
            assert_eq!(d, s);
        }
    }

    #[test]
    fn iterated_matches_repeated_addition() {
        let a = random_set(2, 5, 9);
        let mut acc = a.clone();
        for k in 1..=7 {
            assert_eq!(iterated_sumset(&a, k).unwrap(), acc, "k = {k}");
            acc = sumset_with(&acc, &a, SumsetMode::Sparse).unwrap();
        }
    }

    #[test]
    fn singleton_doubling() {
        let r = doubling_report(&GroupSet::singleton(elem(2, 3, &[1, 2]))).unwrap();
        assert_eq!((r.diff_size, r.ratio.clone()), (1, crate::exact::Exact::one()));
        assert!(doubling_report(&GroupSet::empty(2)).is_err());
    }

    #[test]
    fn dense_refused_above_bound() {
        let a = GroupSet::singleton(GroupElem::zero(9));
        assert!(matches!(
            sumset_with(&a, &a, SumsetMode::Dense),
            Err(Error::DimensionTooLarge { .. })
        ));
        assert!(a.to_dense().is_err());
    }

    #[test]
    fn dense_and_sparse_representations_agree() {
        let a = random_set(3, 40, 4);
        let d = a.to_dense().unwrap();
        assert_eq!(d, a);
        assert_eq!(d.to_sparse(), a);
        for e in a.elems() {
            assert!(d.contains(&e));
        }
    }
}
