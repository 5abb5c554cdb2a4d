//! Exact integer and multiplicative-function primitives.
//!
//! Residues are carried as `u64` in `[0, q)`; signed inputs are reduced with
//! [`reduce`]. Every modular product goes through a 128-bit intermediate, so
//! moduli up to `2^62` are safe.

mod factor;
mod smooth;

pub use factor::{factorize, is_prime, primes_up_to, FactoredInteger, MAX_FACTORABLE};
pub use smooth::{smooth_squarefree_moduli, SmoothnessSpec, MAX_SMOOTH_HI, MAX_SMOOTH_SPAN};

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `a mod q` as a representative in `[0, q)`.
#[inline]
pub fn reduce(a: i64, q: u64) -> u64 {
    debug_assert!(q > 0);
    (a as i128).rem_euclid(q as i128) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// The inverse of `a` modulo `q`, in `[1, q)`.
pub fn inv_mod(a: i64, q: u64) -> Result<u64> {
    if q < 2 {
        return Err(Error::domain(format!("inverse modulo {q} needs q >= 2")));
    }
    let r = reduce(a, q);
    // extended Euclid on (r, q)
    let (mut old_r, mut cur_r) = (r as i128, q as i128);
    let (mut old_s, mut cur_s) = (1i128, 0i128);
    while cur_r != 0 {
        let quot = old_r / cur_r;
        (old_r, cur_r) = (cur_r, old_r - quot * cur_r);
        (old_s, cur_s) = (cur_s, old_s - quot * cur_s);
    }
    if old_r != 1 {
        return Err(Error::NotInvertible { a, q });
    }
    Ok(old_s.rem_euclid(q as i128) as u64)
}

/// Inverse of an already reduced unit; `q == 1` maps everything to 0.
pub(crate) fn inv_unit(r: u64, q: u64) -> u64 {
    if q == 1 {
        0
    } else {
        inv_mod(r as i64, q).expect("caller guarantees a unit")
    }
}

/// The unique residue in `[0, q1*q2)` congruent to `r1` mod `q1` and `r2` mod `q2`.
pub fn crt_pair(r1: i64, q1: u64, r2: i64, q2: u64) -> Result<u64> {
    if q1 == 0 || q2 == 0 {
        return Err(Error::domain("CRT moduli must be positive"));
    }
    let g = gcd(q1, q2);
    if g != 1 {
        return Err(Error::not_coprime(format!("gcd({q1}, {q2}) = {g}")));
    }
    let m = q1
        .checked_mul(q2)
        .filter(|&m| m <= MAX_FACTORABLE)
        .ok_or_else(|| Error::domain(format!("{q1} * {q2} exceeds 2^62")))?;
    let a1 = reduce(r1, q1);
    if q2 == 1 {
        return Ok(a1);
    }
    let a2 = reduce(r2, q2);
    let diff = (a2 as i128 - a1 as i128).rem_euclid(q2 as i128) as u64;
    let t = mul_mod(diff, inv_unit(q1 % q2, q2), q2);
    Ok((a1 as u128 + q1 as u128 * t as u128) as u64 % m)
}

/// Möbius, Euler totient and the `l`-fold divisor function of one integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiplicativeProfile {
    pub mu: i8,
    pub phi: u64,
    pub tau_l: u64,
}

pub fn multiplicative_profile(n: &FactoredInteger, l: u32) -> Result<MultiplicativeProfile> {
    if l < 2 {
        return Err(Error::domain(format!("tau_l needs l >= 2, got {l}")));
    }
    let mut mu = 1i8;
    let mut phi = 1u64;
    let mut tau: u128 = 1;
    for &(p, e) in n.factors() {
        mu = if e == 1 { -mu } else { 0 };
        phi *= (p - 1) * p.pow(e - 1);
        // tau_l(p^e) = C(e + l - 1, l - 1)
        tau = tau
            .checked_mul(binomial(e as u64 + l as u64 - 1, e as u64)?)
            .filter(|&t| t <= u64::MAX as u128)
            .ok_or_else(|| Error::domain("tau_l overflows u64"))?;
    }
    Ok(MultiplicativeProfile {
        mu,
        phi,
        tau_l: tau as u64,
    })
}

fn binomial(n: u64, k: u64) -> Result<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::domain("binomial overflow"))?
            / (i as u128 + 1);
    }
    Ok(acc)
}

/// `‖x‖`, the distance from `x` to the nearest integer.
pub fn nearest_int_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}
