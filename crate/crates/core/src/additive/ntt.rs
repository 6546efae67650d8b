//! Exact Fourier transform over Z₂ⁿ × Z₄ⁿ with values in Z/pZ.
//!
//! `p ≡ 1 (mod 4)` so Z/pZ holds a primitive fourth root of unity `ω`.
//! Convolution counts never exceed 2⁴⁸ < p, so a count is zero exactly
//! when its residue is. The inverse transform is left unscaled: only the
//! support of a convolution is ever needed.

use rayon::prelude::*;

pub const P: u64 = 4_611_686_018_427_387_817;
/// `OMEGA² ≡ −1 (mod P)`.
pub const OMEGA: u64 = 4_490_822_397_581_186_023;

#[inline]
fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P - b
    }
}

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(P)) as u64
}

const PAR_MIN: usize = 1 << 14;

fn z2_axis(data: &mut [u64], stride: usize) {
    let body = |chunk: &mut [u64]| {
        let (l, r) = chunk.split_at_mut(stride);
        for (a, b) in l.iter_mut().zip(r.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = add(x, y);
            *b = sub(x, y);
        }
    };
    if data.len() >= PAR_MIN {
        data.par_chunks_exact_mut(2 * stride).for_each(body);
    } else {
        data.chunks_exact_mut(2 * stride).for_each(body);
    }
}

fn z4_axis(data: &mut [u64], lo_stride: usize, hi_stride: usize, root: u64) {
    let body = |chunk: &mut [u64]| {
        let (h0, h1) = chunk.split_at_mut(hi_stride);
        for (s0, s1) in h0
            .chunks_exact_mut(2 * lo_stride)
            .zip(h1.chunks_exact_mut(2 * lo_stride))
        {
            let (d0, d1) = s0.split_at_mut(lo_stride);
            let (d2, d3) = s1.split_at_mut(lo_stride);
            for i in 0..lo_stride {
                let (a0, a1, a2, a3) = (d0[i], d1[i], d2[i], d3[i]);
                let e = add(a0, a2);
                let o = add(a1, a3);
                let de = sub(a0, a2);
                let dot = mul(root, sub(a1, a3));
                d0[i] = add(e, o);
                d2[i] = sub(e, o);
                d1[i] = add(de, dot);
                d3[i] = sub(de, dot);
            }
        }
    };
    if data.len() >= PAR_MIN && data.len() / (2 * hi_stride) > 1 {
        data.par_chunks_exact_mut(2 * hi_stride).for_each(body);
    } else {
        data.chunks_exact_mut(2 * hi_stride).for_each(body);
    }
}

fn transform(data: &mut [u64], n: usize, root: u64) {
    assert_eq!(data.len(), 1usize << (3 * n));
    for i in 0..n {
        z2_axis(data, 1 << i);
    }
    for i in 0..n {
        z4_axis(data, 1 << (n + i), 1 << (2 * n + i), root);
    }
}

pub fn forward(data: &mut [u64], n: usize) {
    transform(data, n, OMEGA);
}

/// Inverse transform times 8ⁿ.
pub fn inverse_unscaled(data: &mut [u64], n: usize) {
    transform(data, n, P - OMEGA);
}

pub fn mul_in_place(a: &mut [u64], b: &[u64]) {
    a.par_iter_mut().zip(b.par_iter()).for_each(|(x, &y)| *x = mul(*x, y));
}

pub fn square_in_place(a: &mut [u64]) {
    a.par_iter_mut().for_each(|x| *x = mul(*x, *x));
}
