//! Table of nonnegative integers `P(0..=n)` stored as fixed-width little-endian
//! `u64` limbs, supporting the in-place updates `P(m) += P(m-j)` and
//! `P(m) -= P(m-j)`.

use std::cmp::Ordering;

use num_bigint::BigUint;

#[derive(Clone, Debug)]
pub(crate) struct LimbTable {
    width: usize,
    rows: usize,
    data: Vec<u64>,
}

const TOP_BIT: u64 = 1 << 63;

impl LimbTable {
    /// `P = [1, 0, 0, ...]` on rows `0..=n`.
    pub fn unit(n: usize) -> Self {
        let mut data = vec![0; n + 1];
        data[0] = 1;
        Self { width: 1, rows: n + 1, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, m: usize) -> &[u64] {
        &self.data[m * self.width..(m + 1) * self.width]
    }

    pub fn to_big(&self, m: usize) -> BigUint {
        limbs_to_big(self.row(m))
    }

    fn widen(&mut self) {
        let w = self.width;
        let mut data = vec![0; self.rows * (w + 1)];
        for m in 0..self.rows {
            data[m * (w + 1)..m * (w + 1) + w].copy_from_slice(&self.data[m * w..(m + 1) * w]);
        }
        self.data = data;
        self.width = w + 1;
    }

    /// Multiplies by `1/(1 - z^j)`: `P(m) += P(m-j)` for ascending `m`.
    pub fn push_factor(&mut self, j: usize) {
        for m in j..self.rows {
            let w = self.width;
            let (lo, hi) = self.data.split_at_mut(m * w);
            let src = &lo[(m - j) * w..(m - j + 1) * w];
            let dst = &mut hi[..w];
            let mut carry = false;
            for (d, &s) in dst.iter_mut().zip(src) {
                let (x, c1) = d.overflowing_add(s);
                let (x, c2) = x.overflowing_add(carry as u64);
                *d = x;
                carry = c1 || c2;
            }
            debug_assert!(!carry, "operands below 2^(64w-1) cannot overflow");
            if dst[w - 1] & TOP_BIT != 0 {
                self.widen();
            }
        }
    }

    /// Divides by `1/(1 - z^j)` on rows `j..=top`: `P(m) -= P(m-j)` for
    /// descending `m`.
    pub fn pop_factor(&mut self, j: usize, top: usize) {
        let w = self.width;
        for m in (j..=top.min(self.rows - 1)).rev() {
            let (lo, hi) = self.data.split_at_mut(m * w);
            let src = &lo[(m - j) * w..(m - j + 1) * w];
            let mut borrow = false;
            for (d, &s) in hi[..w].iter_mut().zip(src) {
                let (x, b1) = d.overflowing_sub(s);
                let (x, b2) = x.overflowing_sub(borrow as u64);
                *d = x;
                borrow = b1 || b2;
            }
            assert!(!borrow, "factor removal went negative at row {m}");
        }
    }
}

pub(crate) fn limbs_to_big(limbs: &[u64]) -> BigUint {
    let mut digits = Vec::with_capacity(limbs.len() * 2);
    for &l in limbs {
        digits.push(l as u32);
        digits.push((l >> 32) as u32);
    }
    BigUint::new(digits)
}

pub(crate) fn big_to_limbs(x: &BigUint, width: usize) -> Vec<u64> {
    let mut out = x.to_u64_digits();
    assert!(out.len() <= width, "value wider than the table");
    out.resize(width, 0);
    out
}

pub(crate) fn cmp_limbs(a: &[u64], b: &[u64]) -> Ordering {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// `a -= b`; requires `a >= b`.
pub(crate) fn sub_limbs(a: &mut [u64], b: &[u64]) {
    let mut borrow = false;
    for (d, &s) in a.iter_mut().zip(b) {
        let (x, b1) = d.overflowing_sub(s);
        let (x, b2) = x.overflowing_sub(borrow as u64);
        *d = x;
        borrow = b1 || b2;
    }
    debug_assert!(!borrow);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{euler_transform_per_type, min_part_gamma};

    #[test]
    fn factors_build_and_undo_partition_numbers() {
        let n = 1000;
        let mut t = LimbTable::unit(n);
        for j in 1..=n {
            t.push_factor(j);
        }
        assert!(t.width() >= 2, "p(1000) needs more than one limb");
        let want = euler_transform_per_type(&min_part_gamma(1, n as u64), n as u64);
        for m in 0..=n {
            assert_eq!(t.to_big(m), want.b[m]);
        }
        for j in (1..=n).rev() {
            t.pop_factor(j, n);
        }
        assert_eq!(t.to_big(0), BigUint::from(1u32));
        assert!((1..=n).all(|m| t.row(m).iter().all(|&x| x == 0)));
    }

    #[test]
    fn limb_helpers() {
        let x = BigUint::from(3u32).pow(100);
        let l = big_to_limbs(&x, 4);
        assert_eq!(limbs_to_big(&l), x);
        let y = big_to_limbs(&BigUint::from(5u32), 4);
        assert_eq!(cmp_limbs(&l, &y), Ordering::Greater);
        let mut z = l.clone();
        sub_limbs(&mut z, &y);
        assert_eq!(limbs_to_big(&z), x - 5u32);
    }
}
