//! Complete and incomplete Kloosterman sums.
//!
//! `S(a, b; q)` is the sum of `e_q(a n̄ + b n)` over units `n mod q`. Composite
//! moduli are split into coprime prime-power parts with the twisted
//! multiplicativity
//!
//! ```text
//! S(a, b; mn) = S(a n̄, b n̄; m) * S(a m̄, b m̄; n),   gcd(m, n) = 1,
//! ```
//!
//! and each part is summed directly. The direct full-modulus route is kept
//! as [`Evaluation::Direct`] for cross-checking.

mod sum;
mod table;

pub use sum::{Accumulator, SumValue};
pub use table::{KloostermanCache, KloostermanTable};

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd, inv_unit, is_prime, mul_mod, reduce};
use crate::error::{Error, Result};
use crate::vdc_lab::ModulusSplit;

/// The half-open integer interval `[offset, offset + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerInterval {
    pub offset: i64,
    pub len: u64,
}

impl IntegerInterval {
    pub fn new(offset: i64, len: u64) -> Self {
        Self { offset, len }
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// One past the last element.
    pub fn end(&self) -> i64 {
        self.offset + self.len as i64
    }

    pub fn contains(&self, k: i64) -> bool {
        k >= self.offset && k < self.end()
    }

    pub fn iter(&self) -> std::ops::Range<i64> {
        self.offset..self.end()
    }

    pub fn shifted(&self, by: i64) -> Self {
        Self {
            offset: self.offset + by,
            len: self.len,
        }
    }

    pub fn intersect(&self, other: &IntegerInterval) -> Self {
        let lo = self.offset.max(other.offset);
        let hi = self.end().min(other.end());
        Self {
            offset: lo,
            len: (hi - lo).max(0) as u64,
        }
    }
}

/// How composite moduli are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluation {
    /// Split into prime-power parts, sum each part directly.
    #[default]
    Crt,
    /// One pass over all units of the full modulus.
    Direct,
}

/// `S(a, b; q)` with the default CRT evaluation.
pub fn complete_kloosterman(a: i64, b: i64, q: u64) -> Result<SumValue> {
    complete_kloosterman_with(a, b, q, Evaluation::Crt)
}

pub fn complete_kloosterman_with(a: i64, b: i64, q: u64, mode: Evaluation) -> Result<SumValue> {
    if q == 0 {
        return Err(Error::domain("Kloosterman modulus must be positive"));
    }
    let (a, b) = (reduce(a, q), reduce(b, q));
    match mode {
        Evaluation::Direct => Ok(direct_sum(a, b, q)),
        Evaluation::Crt => {
            let f = factorize(q)?;
            let mut value = SumValue::ONE;
            for &(p, e) in f.factors() {
                let part = p.pow(e);
                let cofactor_inv = inv_unit((q / part) % part, part);
                let ap = mul_mod(a % part, cofactor_inv, part);
                let bp = mul_mod(b % part, cofactor_inv, part);
                value = value * direct_sum(ap, bp, part);
            }
            Ok(value)
        }
    }
}

/// Sum over units of `e_q(a n̄ + b n)` for reduced `a, b`.
pub(crate) fn direct_sum(a: u64, b: u64, q: u64) -> SumValue {
    if q == 1 {
        return SumValue::ONE;
    }
    let mut acc = Accumulator::new();
    if is_prime(q) && q <= 1 << 26 {
        let inverses = inverse_table(q);
        for n in 1..q {
            let phase = (mul_mod(a, inverses[n as usize], q) + mul_mod(b, n, q)) % q;
            acc.push_root(phase, q);
        }
    } else {
        for n in 1..q {
            if gcd(n, q) != 1 {
                continue;
            }
            let phase = (mul_mod(a, inv_unit(n, q), q) + mul_mod(b, n, q)) % q;
            acc.push_root(phase, q);
        }
    }
    acc.finish()
}

/// `inv[n] = n̄ mod p` for `1 <= n < p`, by `inv[n] = -(p / n) inv[p mod n]`.
pub(crate) fn inverse_table(p: u64) -> Vec<u64> {
    let mut inv = vec![0u64; p as usize];
    if p > 1 {
        inv[1] = 1;
    }
    for n in 2..p {
        let r = inv[(p % n) as usize];
        inv[n as usize] = (p - mul_mod(p / n, r, p)) % p;
    }
    inv
}

/// `S(a q̄1, b q̄1; q0) * S(a q̄0, b q̄0; q1)` for a two-part split `q = q0 q1`.
///
/// Each factor is summed directly, so comparing against
/// `complete_kloosterman_with(a, b, q0 q1, Direct)` exercises the twisted
/// multiplicativity.
pub fn kloosterman_crt(a: i64, b: i64, split: &ModulusSplit) -> Result<SumValue> {
    let parts = split.parts();
    if parts.len() != 2 {
        return Err(Error::domain(format!(
            "expected a two-part split, got {} parts",
            parts.len()
        )));
    }
    let (q0, q1) = (parts[0], parts[1]);
    if gcd(q0, q1) != 1 {
        return Err(Error::not_coprime(format!("gcd({q0}, {q1}) > 1")));
    }
    let inv1 = inv_unit(q1 % q0, q0);
    let inv0 = inv_unit(q0 % q1, q1);
    let first = direct_sum(
        mul_mod(reduce(a, q0), inv1, q0),
        mul_mod(reduce(b, q0), inv1, q0),
        q0,
    );
    let second = direct_sum(
        mul_mod(reduce(a, q1), inv0, q1),
        mul_mod(reduce(b, q1), inv0, q1),
        q1,
    );
    Ok(first * second)
}

/// The incomplete sum of `e_q(a n̄)` over `n` in `interval` coprime to `q`.
pub fn incomplete_kloosterman(a: i64, q: u64, interval: IntegerInterval) -> Result<SumValue> {
    if q == 0 {
        return Err(Error::domain("modulus must be positive"));
    }
    if interval.len > q {
        return Err(Error::domain(format!(
            "interval length {} exceeds modulus {q}",
            interval.len
        )));
    }
    let ar = reduce(a, q);
    if gcd(ar, q) != 1 {
        return Err(Error::not_coprime(format!("gcd({a}, {q}) > 1")));
    }
    let mut acc = Accumulator::new();
    for n in interval.iter() {
        let nr = reduce(n, q);
        if gcd(nr, q) != 1 {
            continue;
        }
        acc.push_root(mul_mod(ar, inv_unit(nr, q), q), q);
    }
    Ok(acc.finish())
}

/// `S(a, 1; p) / sqrt(p)`, which lies in `[-2, 2]`.
pub fn normalized_kl(a: i64, p: u64) -> Result<f64> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if reduce(a, p) == 0 {
        return Err(Error::domain(format!("{p} divides {a}")));
    }
    let s = complete_kloosterman(a, 1, p)?;
    Ok(s.re / (p as f64).sqrt())
}
