//! Bit-packed vectors over Z₂ⁿ and Z₄ⁿ.
//!
//! A [`QuatVec`] stores its digits as two bit planes: `lo` holds the digit
//! parities and `hi` the twos bits, so digit `i` is `lo_i + 2 hi_i`. Mod-4
//! addition then reduces to a half adder on whole words.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported dimension for vectors.
pub const MAX_DIM: usize = 24;

#[inline]
pub(crate) fn mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Element of Z₂ⁿ. Coordinate `i` is bit `i` of the integer encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    bits: u32,
    n: u8,
}

impl BitVec {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        crate::error::check_dim("BitVec", n, MAX_DIM)?;
        if bits & !mask(n) != 0 {
            return Err(Error::invalid(format!(
                "value {bits:#x} does not fit in {n} bits"
            )));
        }
        Ok(Self { bits, n: n as u8 })
    }

    #[inline]
    pub(crate) fn from_raw(n: usize, bits: u32) -> Self {
        debug_assert!(bits & !mask(n) == 0);
        Self { bits, n: n as u8 }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_raw(n, 0)
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn dim(self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn get(self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn xor(self, other: Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self::from_raw(self.dim(), self.bits ^ other.bits)
    }

    pub fn or(self, other: Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self::from_raw(self.dim(), self.bits | other.bits)
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.dim()).rev() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Element of Z₄ⁿ, packed as two bit planes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuatVec {
    lo: u32,
    hi: u32,
    n: u8,
}

impl QuatVec {
    pub fn zero(n: usize) -> Self {
        Self { lo: 0, hi: 0, n: n as u8 }
    }

    #[inline]
    pub(crate) fn from_planes(n: usize, lo: u32, hi: u32) -> Self {
        debug_assert!((lo | hi) & !mask(n) == 0);
        Self { lo, hi, n: n as u8 }
    }

    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        let n = digits.len();
        crate::error::check_dim("QuatVec", n, MAX_DIM)?;
        let (mut lo, mut hi) = (0u32, 0u32);
        for (i, &d) in digits.iter().enumerate() {
            if d > 3 {
                return Err(Error::invalid(format!("digit {d} is not in Z4")));
            }
            lo |= u32::from(d & 1) << i;
            hi |= u32::from(d >> 1) << i;
        }
        Ok(Self::from_planes(n, lo, hi))
    }

    /// Digit `i` of the integer `sum d_i 4^i`.
    pub fn from_index(n: usize, index: u64) -> Self {
        let (mut lo, mut hi) = (0u32, 0u32);
        for i in 0..n {
            let d = (index >> (2 * i)) & 3;
            lo |= ((d & 1) as u32) << i;
            hi |= ((d >> 1) as u32) << i;
        }
        Self::from_planes(n, lo, hi)
    }

    /// Integer encoding `sum d_i 4^i`; orders vectors for tie-breaking.
    pub fn index(self) -> u64 {
        let mut out = 0u64;
        for i in 0..self.dim() {
            out |= u64::from(self.digit(i)) << (2 * i);
        }
        out
    }

    #[inline]
    pub fn dim(self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn lo(self) -> u32 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> u32 {
        self.hi
    }

    #[inline]
    pub fn digit(self, i: usize) -> u8 {
        (((self.lo >> i) & 1) | (((self.hi >> i) & 1) << 1)) as u8
    }

    pub fn digits(self) -> Vec<u8> {
        (0..self.dim()).map(|i| self.digit(i)).collect()
    }

    #[inline]
    pub fn add(self, other: Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let carry = self.lo & other.lo;
        Self {
            lo: self.lo ^ other.lo,
            hi: self.hi ^ other.hi ^ carry,
            n: self.n,
        }
    }

    #[inline]
    pub fn neg(self) -> Self {
        // 1 <-> 3, 0 and 2 fixed
        Self {
            lo: self.lo,
            hi: self.hi ^ self.lo,
            n: self.n,
        }
    }

    #[inline]
    pub fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    /// `2·v`, which only depends on `v mod 2`.
    #[inline]
    pub fn double(self) -> Self {
        Self {
            lo: 0,
            hi: self.lo,
            n: self.n,
        }
    }

    /// `2·b` for a Z₂ vector `b`, embedded in Z₄ⁿ.
    #[inline]
    pub fn twice_bits(b: BitVec) -> Self {
        Self {
            lo: 0,
            hi: b.bits(),
            n: b.dim() as u8,
        }
    }

    /// Coordinatewise reduction mod 2.
    #[inline]
    pub fn mod2(self) -> BitVec {
        BitVec::from_raw(self.dim(), self.lo)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        (self.lo | self.hi) == 0
    }

    /// True when every digit is 0 or 2.
    #[inline]
    pub fn is_even(self) -> bool {
        self.lo == 0
    }

    /// Base-4 string, most significant coordinate first.
    pub fn to_base4(self) -> String {
        (0..self.dim())
            .rev()
            .map(|i| char::from(b'0' + self.digit(i)))
            .collect()
    }

    pub fn from_base4(s: &str) -> Result<Self> {
        let mut digits = Vec::with_capacity(s.len());
        for c in s.chars().rev() {
            match c.to_digit(4) {
                Some(d) => digits.push(d as u8),
                None => return Err(Error::invalid(format!("bad base-4 digit {c:?} in {s:?}"))),
            }
        }
        Self::from_digits(&digits)
    }
}

impl fmt::Display for QuatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_base4())
    }
}

impl PartialOrd for QuatVec {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuatVec {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n, self.index()).cmp(&(other.n, other.index()))
    }
}
