//! The divisor function in arithmetic progressions.
//!
//! `D(x, q, a)` counts pairs `(u, v)` with `uv <= x`, `uv ≡ a (mod q)`; the
//! expected value `D(x, q)` averages the coprime total over `φ(q)` residue
//! classes, and `E(x, q, a) = D(x, q, a) - D(x, q)`. Two independent routes
//! are provided: a hyperbola lattice count in `O(sqrt x)` and a `τ` sieve.

use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::arith::{factorize, gcd, inv_unit, multiplicative_profile, reduce};
use crate::error::{Error, Result};

/// Exact rational with 128-bit numerator and denominator.
pub type Rational = Ratio<i128>;

pub const MAX_HYPERBOLA_X: u64 = 1_000_000_000;
pub const MAX_SIEVE_X: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApQuery {
    pub x: u64,
    pub q: u64,
    pub a: i64,
}

impl ApQuery {
    pub fn new(x: u64, q: u64, a: i64) -> Result<Self> {
        if x == 0 || q == 0 {
            return Err(Error::domain(format!(
                "need x >= 1 and q >= 1, got x={x}, q={q}"
            )));
        }
        Ok(Self { x, q, a })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivisorMethod {
    #[default]
    Hyperbola,
    Sieve,
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `"num/den"` with the sign on the numerator.
pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::domain(format!("malformed rational {s:?}"));
    let (n, d) = s.split_once('/').ok_or_else(bad)?;
    let n: i128 = n.trim().parse().map_err(|_| bad())?;
    let d: i128 = d.trim().parse().map_err(|_| bad())?;
    if d == 0 {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `#{v in [1, limit] : u v ≡ a (mod q)}` for reduced `a`.
fn progression_partners(u: u64, limit: u64, a: u64, q: u64) -> u64 {
    let g = gcd(u, q);
    if !a.is_multiple_of(g) {
        return 0;
    }
    let m = q / g;
    let r = ((a / g) as u128 * inv_unit((u / g) % m, m) as u128 % m as u128) as u64;
    if r == 0 {
        limit / m
    } else if r > limit {
        0
    } else {
        (limit - r) / m + 1
    }
}

fn hyperbola_sum(x: u64, q: u64, a: i64) -> u64 {
    let a = reduce(a, q);
    let s = isqrt(x);
    let mut both_small = 0u64;
    let mut one_small = 0u64;
    for u in 1..=s {
        one_small += progression_partners(u, x / u, a, q);
        both_small += progression_partners(u, s, a, q);
    }
    2 * one_small - both_small
}

/// `D(x, q, a)`, the sum of `τ(n)` over `n <= x` with `n ≡ a (mod q)`.
pub fn divisor_sum_ap(query: &ApQuery, method: DivisorMethod) -> Result<u64> {
    let ApQuery { x, q, a } = *query;
    if x == 0 || q == 0 {
        return Err(Error::domain(format!(
            "need x >= 1 and q >= 1, got x={x}, q={q}"
        )));
    }
    match method {
        DivisorMethod::Hyperbola => {
            if x > MAX_HYPERBOLA_X {
                return Err(Error::domain(format!("x = {x} above the hyperbola cap")));
            }
            Ok(hyperbola_sum(x, q, a))
        }
        DivisorMethod::Sieve => Ok(TauTable::new(x)?.progression_sum(q, a)),
    }
}

/// Squarefree divisors of `q` paired with their Möbius value.
fn mobius_divisors(q: u64) -> Result<Vec<(u64, i64)>> {
    let f = factorize(q)?;
    let mut out = vec![(1u64, 1i64)];
    for p in f.primes() {
        let len = out.len();
        for i in 0..len {
            let (d, m) = out[i];
            out.push((d * p, -m));
        }
    }
    Ok(out)
}

/// `#{n <= x : gcd(n, q) = 1}` weighted by `τ(n)`, by the hyperbola method.
fn coprime_divisor_total(x: u64, q: u64) -> Result<u64> {
    if x == 0 {
        return Ok(0);
    }
    let mob = mobius_divisors(q)?;
    let coprime_count = |limit: u64| -> u64 {
        mob.iter()
            .map(|&(d, m)| m * (limit / d) as i64)
            .sum::<i64>() as u64
    };
    let s = isqrt(x);
    let mut one_small = 0u64;
    for u in 1..=s {
        if gcd(u, q) == 1 {
            one_small += coprime_count(x / u);
        }
    }
    let c = coprime_count(s);
    Ok(2 * one_small - c * c)
}

fn totient(q: u64) -> Result<u64> {
    Ok(multiplicative_profile(&factorize(q)?, 2)?.phi)
}

/// `D(x, q) = (1 / φ(q)) Σ_{n <= x, (n, q) = 1} τ(n)`, exactly.
pub fn divisor_main_term(x: u64, q: u64) -> Result<Rational> {
    divisor_main_term_with(x, q, DivisorMethod::Hyperbola)
}

pub fn divisor_main_term_with(x: u64, q: u64, method: DivisorMethod) -> Result<Rational> {
    if q == 0 {
        return Err(Error::domain("modulus must be positive"));
    }
    let total = match method {
        DivisorMethod::Hyperbola => {
            if x > MAX_HYPERBOLA_X {
                return Err(Error::domain(format!("x = {x} above the hyperbola cap")));
            }
            coprime_divisor_total(x, q)?
        }
        DivisorMethod::Sieve if x == 0 => 0,
        DivisorMethod::Sieve => TauTable::new(x)?.coprime_sum(q),
    };
    Ok(Rational::new(total as i128, totient(q)? as i128))
}

/// `E(x, q, a) = D(x, q, a) - D(x, q)` for `gcd(a, q) = 1`.
pub fn error_term(query: &ApQuery) -> Result<Rational> {
    error_term_with(query, DivisorMethod::Hyperbola)
}

pub fn error_term_with(query: &ApQuery, method: DivisorMethod) -> Result<Rational> {
    let ApQuery { x, q, a } = *query;
    if q == 0 {
        return Err(Error::domain("modulus must be positive"));
    }
    if gcd(reduce(a, q), q) != 1 {
        return Err(Error::not_coprime(format!("gcd({a}, {q}) > 1")));
    }
    match method {
        DivisorMethod::Hyperbola => {
            let d = divisor_sum_ap(query, method)?;
            Ok(Rational::from_integer(d as i128) - divisor_main_term(x, q)?)
        }
        DivisorMethod::Sieve => {
            let table = TauTable::new(x)?;
            table.error_term(q, a)
        }
    }
}

/// `τ(n)` for all `n <= x`, built once by a linear sieve and shared read-only.
#[derive(Debug, Clone)]
pub struct TauTable {
    tau: Vec<u16>,
}

impl TauTable {
    pub fn new(x: u64) -> Result<Self> {
        if x == 0 {
            return Err(Error::domain("x must be >= 1"));
        }
        if x > MAX_SIEVE_X {
            return Err(Error::domain(format!("x = {x} above the sieve cap")));
        }
        let n = x as usize;
        let mut tau = vec![0u16; n + 1];
        // exponent of the least prime factor
        let mut lpf_exp = vec![0u8; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        tau[1] = 1;
        for i in 2..=n {
            if lpf_exp[i] == 0 {
                primes.push(i as u32);
                tau[i] = 2;
                lpf_exp[i] = 1;
            }
            for &p in &primes {
                let m = i * p as usize;
                if m > n {
                    break;
                }
                if i % p as usize == 0 {
                    let e = lpf_exp[i] as u16;
                    lpf_exp[m] = lpf_exp[i] + 1;
                    tau[m] = tau[i] / (e + 1) * (e + 2);
                    break;
                }
                lpf_exp[m] = 1;
                tau[m] = tau[i] * 2;
            }
        }
        Ok(Self { tau })
    }

    pub fn x(&self) -> u64 {
        (self.tau.len() - 1) as u64
    }

    pub fn tau(&self, n: u64) -> u32 {
        self.tau[n as usize] as u32
    }

    /// `D(x, q, a)` read off the table.
    pub fn progression_sum(&self, q: u64, a: i64) -> u64 {
        let x = self.x();
        let r = reduce(a, q);
        let mut n = if r == 0 { q } else { r };
        let mut total = 0u64;
        while n <= x {
            total += self.tau[n as usize] as u64;
            n += q;
        }
        total
    }

    /// `D(x, q, a)` for every residue `a mod q` in one pass.
    pub fn all_progression_sums(&self, q: u64) -> Vec<u64> {
        let mut sums = vec![0u64; q as usize];
        let mut r = 1 % q as usize;
        for &t in &self.tau[1..] {
            sums[r] += t as u64;
            r += 1;
            if r == q as usize {
                r = 0;
            }
        }
        sums
    }

    pub fn coprime_sum(&self, q: u64) -> u64 {
        let coprime: Vec<bool> = (0..q).map(|r| gcd(r, q) == 1).collect();
        self.all_progression_sums(q)
            .iter()
            .zip(&coprime)
            .filter(|(_, &c)| c)
            .map(|(s, _)| s)
            .sum()
    }

    pub fn main_term(&self, q: u64) -> Result<Rational> {
        Ok(Rational::new(
            self.coprime_sum(q) as i128,
            totient(q)? as i128,
        ))
    }

    pub fn error_term(&self, q: u64, a: i64) -> Result<Rational> {
        if q == 0 {
            return Err(Error::domain("modulus must be positive"));
        }
        if gcd(reduce(a, q), q) != 1 {
            return Err(Error::not_coprime(format!("gcd({a}, {q}) > 1")));
        }
        Ok(Rational::from_integer(self.progression_sum(q, a) as i128) - self.main_term(q)?)
    }
}
