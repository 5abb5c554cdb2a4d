//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the library's arithmetic; every value is recomputed from definitions.
#![allow(dead_code)]

use std::f64::consts::TAU;

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn modp(a: i64, q: u64) -> u64 {
    a.rem_euclid(q as i64) as u64
}

/// Inverse by linear search; fine for the moduli used in tests.
pub fn inverse(n: u64, q: u64) -> u64 {
    if q == 1 {
        return 0;
    }
    (1..q)
        .find(|&m| (n as u128 * m as u128 % q as u128) == 1)
        .expect("unit")
}

pub fn e(r: u64, q: u64) -> (f64, f64) {
    let t = TAU * (r % q) as f64 / q as f64;
    (t.cos(), t.sin())
}

/// `S(a, b; q)` straight from the definition.
pub fn kloosterman(a: i64, b: i64, q: u64) -> (f64, f64) {
    let (a, b) = (modp(a, q) as u128, modp(b, q) as u128);
    let mut s = (0.0, 0.0);
    for n in 0..q {
        if gcd(n, q) != 1 {
            continue;
        }
        let ni = inverse(n, q) as u128;
        let r = ((a * ni + b * n as u128) % q as u128) as u64;
        let (c, si) = e(r, q);
        s.0 += c;
        s.1 += si;
    }
    s
}

/// Table of `S(a, m; q)` for all `m`, using `S(a, m) = Σ_n e(a n̄ + m n)`.
pub fn kloosterman_row(a: i64, q: u64) -> Vec<(f64, f64)> {
    (0..q as i64).map(|m| kloosterman(a, m, q)).collect()
}

pub fn incomplete(a: i64, q: u64, m: i64, n: u64) -> (f64, f64) {
    let ar = modp(a, q) as u128;
    let mut s = (0.0, 0.0);
    for k in m..m + n as i64 {
        let kr = modp(k, q);
        if gcd(kr, q) != 1 {
            continue;
        }
        let r = (ar * inverse(kr, q) as u128 % q as u128) as u64;
        let (c, si) = e(r, q);
        s.0 += c;
        s.1 += si;
    }
    s
}

pub fn tau(n: u64) -> u64 {
    (1..=n).filter(|d| n.is_multiple_of(*d)).count() as u64
}

pub fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn mobius(n: u64) -> i64 {
    let f = prime_factors(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && prime_factors(n) == vec![(n, 1)]
}

pub fn squarefree(n: u64) -> bool {
    prime_factors(n).iter().all(|&(_, e)| e == 1)
}

pub fn phi(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
}

/// Optimal window assignment by enumerating all `4^k` prime placements.
pub fn window_oracle(q: u64, windows: &[(f64, f64); 4]) -> Option<[u64; 4]> {
    let primes: Vec<u64> = prime_factors(q).into_iter().map(|(p, _)| p).collect();
    let mut best: Option<(f64, [u64; 4])> = None;
    for mask in 0..4u64.pow(primes.len() as u32) {
        let mut parts = [1u64; 4];
        let mut m = mask;
        for &p in &primes {
            parts[(m % 4) as usize] *= p;
            m /= 4;
        }
        let inside = parts
            .iter()
            .zip(windows)
            .all(|(&v, &(lo, hi))| lo <= v as f64 && v as f64 <= hi);
        if !inside {
            continue;
        }
        let obj: f64 = parts
            .iter()
            .zip(windows)
            .map(|(&v, &(lo, hi))| ((v as f64).ln() - ((lo * hi).sqrt()).ln()).abs())
            .sum();
        let better = match best {
            None => true,
            Some((b, bp)) => {
                let tol = 1e-12 * b.abs().max(1.0);
                obj < b - tol || ((obj - b).abs() <= tol && parts < bp)
            }
        };
        if better {
            best = Some((obj, parts));
        }
    }
    best.map(|b| b.1)
}

pub fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}
