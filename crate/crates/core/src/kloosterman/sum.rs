use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub(crate) const EPS: f64 = f64::EPSILON;

/// Error allowance for one root of unity `e_q(r)`: phase rounding plus `sin_cos`.
pub(crate) const ROOT_ERR: f64 = 8.0 * EPS;

const BLOCK: usize = 64;

/// A complex value with an absolute bound on its accumulated rounding error.
///
/// Two values whose distance is within the sum of their `err` fields cannot be
/// told apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumValue {
    pub re: f64,
    pub im: f64,
    pub err: f64,
}

impl SumValue {
    pub const ZERO: SumValue = SumValue {
        re: 0.0,
        im: 0.0,
        err: 0.0,
    };
    pub const ONE: SumValue = SumValue {
        re: 1.0,
        im: 0.0,
        err: 0.0,
    };

    pub fn new(re: f64, im: f64, err: f64) -> Self {
        debug_assert!(err >= 0.0);
        Self { re, im, err }
    }

    /// An exactly known real value.
    pub fn exact(re: f64) -> Self {
        Self {
            re,
            im: 0.0,
            err: 0.0,
        }
    }

    /// `e^{2 pi i r / q}`.
    pub fn root_of_unity(r: u64, q: u64) -> Self {
        let (re, im) = unit_root(r, q);
        Self {
            re,
            im,
            err: if r.is_multiple_of(q) { 0.0 } else { ROOT_ERR },
        }
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn conj(self) -> Self {
        Self {
            im: -self.im,
            ..self
        }
    }

    pub fn scale(self, s: f64) -> Self {
        let re = self.re * s;
        let im = self.im * s;
        Self {
            re,
            im,
            err: self.err * s.abs() + EPS * re.hypot(im),
        }
    }

    /// `|self - other|`.
    pub fn distance(&self, other: &SumValue) -> f64 {
        (self.re - other.re).hypot(self.im - other.im)
    }

    /// True when the two values are indistinguishable given their error bounds.
    pub fn agrees_with(&self, other: &SumValue) -> bool {
        self.distance(other) <= self.err + other.err
    }

    /// True when the imaginary part is zero up to the error bound.
    pub fn is_real(&self) -> bool {
        self.im.abs() <= self.err
    }
}

impl Add for SumValue {
    type Output = SumValue;
    fn add(self, rhs: SumValue) -> SumValue {
        let re = self.re + rhs.re;
        let im = self.im + rhs.im;
        SumValue {
            re,
            im,
            err: self.err + rhs.err + EPS * re.hypot(im),
        }
    }
}

impl Sub for SumValue {
    type Output = SumValue;
    fn sub(self, rhs: SumValue) -> SumValue {
        self + (-rhs)
    }
}

impl Neg for SumValue {
    type Output = SumValue;
    fn neg(self) -> SumValue {
        SumValue {
            re: -self.re,
            im: -self.im,
            err: self.err,
        }
    }
}

impl Mul for SumValue {
    type Output = SumValue;
    fn mul(self, rhs: SumValue) -> SumValue {
        let re = self.re * rhs.re - self.im * rhs.im;
        let im = self.re * rhs.im + self.im * rhs.re;
        let (a, b) = (self.abs(), rhs.abs());
        SumValue {
            re,
            im,
            err: a * rhs.err + b * self.err + self.err * rhs.err + 4.0 * EPS * a * b,
        }
    }
}

impl std::iter::Sum for SumValue {
    fn sum<I: Iterator<Item = SumValue>>(iter: I) -> SumValue {
        let mut acc = Accumulator::new();
        for t in iter {
            acc.push(t);
        }
        acc.finish()
    }
}

impl std::iter::Product for SumValue {
    fn product<I: Iterator<Item = SumValue>>(iter: I) -> SumValue {
        iter.fold(SumValue::ONE, |acc, t| acc * t)
    }
}

/// `(cos, sin)` of `2 pi r / q`, with the phase reduced to `(-pi, pi]` first.
#[inline]
pub(crate) fn unit_root(r: u64, q: u64) -> (f64, f64) {
    let r = r % q;
    if r == 0 {
        return (1.0, 0.0);
    }
    let signed = if r > q / 2 {
        r as f64 - q as f64
    } else {
        r as f64
    };
    let (s, c) = (std::f64::consts::TAU * (signed / q as f64)).sin_cos();
    (c, s)
}

/// Blocked pairwise summation of complex terms.
///
/// Terms are summed naively in blocks of 64, and block sums are merged as a
/// binary cascade, so rounding grows with `64 + log2(n)` rather than `n`.
#[derive(Debug, Clone, Default)]
pub struct Accumulator {
    cascade: Vec<(f64, f64, u32)>,
    block: (f64, f64),
    block_len: usize,
    terms: u64,
    abs_total: f64,
    carried_err: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: SumValue) {
        self.carried_err += t.err;
        self.push_raw(t.re, t.im, t.re.hypot(t.im));
    }

    /// Add a root of unity `e_q(r)` without building a `SumValue`.
    #[inline]
    pub fn push_root(&mut self, r: u64, q: u64) {
        let (c, s) = unit_root(r, q);
        if !r.is_multiple_of(q) {
            self.carried_err += ROOT_ERR;
        }
        self.push_raw(c, s, 1.0);
    }

    #[inline]
    fn push_raw(&mut self, re: f64, im: f64, magnitude: f64) {
        self.block.0 += re;
        self.block.1 += im;
        self.block_len += 1;
        self.terms += 1;
        self.abs_total += magnitude;
        if self.block_len == BLOCK {
            self.flush_block();
        }
    }

    fn flush_block(&mut self) {
        let (mut re, mut im) = self.block;
        let mut level = 0;
        while let Some(&(r2, i2, l2)) = self.cascade.last() {
            if l2 != level {
                break;
            }
            self.cascade.pop();
            re += r2;
            im += i2;
            level += 1;
        }
        self.cascade.push((re, im, level));
        self.block = (0.0, 0.0);
        self.block_len = 0;
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    pub fn finish(mut self) -> SumValue {
        if self.block_len > 0 {
            self.flush_block();
        }
        let (mut re, mut im) = (0.0, 0.0);
        for &(r, i, _) in self.cascade.iter().rev() {
            re += r;
            im += i;
        }
        let blocks = self.terms.div_ceil(BLOCK as u64).max(1);
        let depth = 64 - blocks.leading_zeros() as u64 + self.cascade.len() as u64;
        let rounding = 2.0 * EPS * (BLOCK as f64 + depth as f64) * self.abs_total;
        SumValue {
            re,
            im,
            err: self.carried_err + rounding,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_are_accurate() {
        for q in [1u64, 2, 3, 7, 100, 65537] {
            for r in 0..q.min(500) {
                let (c, s) = unit_root(r, q);
                let theta = std::f64::consts::TAU * r as f64 / q as f64;
                assert!((c - theta.cos()).abs() < 1e-12);
                assert!((s - theta.sin()).abs() < 1e-12);
            }
        }
        assert_eq!(unit_root(0, 5), (1.0, 0.0));
    }

    #[test]
    fn full_period_sums_vanish() {
        for q in [2u64, 3, 10, 999, 4096, 100_003] {
            let mut acc = Accumulator::new();
            for r in 0..q {
                acc.push_root(r, q);
            }
            let v = acc.finish();
            assert!(v.abs() <= v.err, "q = {q}: |{:?}|", v);
            assert!(v.err < 1e-8);
        }
    }

    #[test]
    fn product_error_is_propagated() {
        let a = SumValue::new(2.0, 0.0, 0.1);
        let b = SumValue::new(0.0, 3.0, 0.2);
        let p = a * b;
        assert_eq!((p.re, p.im), (0.0, 6.0));
        assert!(p.err >= 2.0 * 0.2 + 3.0 * 0.1);
        assert!(a.agrees_with(&SumValue::new(2.05, 0.0, 0.0)));
        assert!(!a.agrees_with(&SumValue::new(2.2, 0.0, 0.0)));
    }
}
