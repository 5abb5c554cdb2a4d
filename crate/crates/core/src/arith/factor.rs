use std::sync::OnceLock;

use super::{gcd, mul_mod, pow_mod};
use crate::error::{Error, Result};

/// Largest integer accepted by [`factorize`].
pub const MAX_FACTORABLE: u64 = 1 << 62;

const TRIAL_LIMIT: u64 = 1_000_000;

/// A positive integer together with its prime factorization.
///
/// Factors are `(prime, exponent)` pairs in strictly increasing prime order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredInteger {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    /// Assemble from prime powers, checking the invariants.
    pub fn from_factors(mut factors: Vec<(u64, u32)>) -> Result<Self> {
        factors.sort_unstable();
        let mut value: u64 = 1;
        for (i, &(p, e)) in factors.iter().enumerate() {
            if e == 0 || !is_prime(p) {
                return Err(Error::domain(format!(
                    "({p}, {e}) is not a prime power factor"
                )));
            }
            if i > 0 && factors[i - 1].0 == p {
                return Err(Error::domain(format!("prime {p} listed twice")));
            }
            value = p
                .checked_pow(e)
                .and_then(|pe| value.checked_mul(pe))
                .filter(|&v| v <= MAX_FACTORABLE)
                .ok_or_else(|| Error::domain("product exceeds 2^62"))?;
        }
        Ok(Self { value, factors })
    }

    /// Product of distinct primes, e.g. a squarefree modulus assembled from its primes.
    pub fn from_primes(primes: &[u64]) -> Result<Self> {
        Self::from_factors(primes.iter().map(|&p| (p, 1)).collect())
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// True when every prime factor is at most `bound`.
    pub fn is_smooth(&self, bound: u64) -> bool {
        self.factors.last().is_none_or(|&(p, _)| p <= bound)
    }

    pub fn largest_prime(&self) -> Option<u64> {
        self.factors.last().map(|&(p, _)| p)
    }

    /// All positive divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

/// Primes `<= n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut m = i * i;
        while m <= n {
            composite[m] = true;
            m += i;
        }
    }
    primes
}

fn trial_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(TRIAL_LIMIT))
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Brent's variant of Pollard rho; `n` must be odd and composite.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g, mut r, mut q) = (2u64, 2u64, 1u64, 1u64, 1u64);
        let mut ys = 2u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..(128.min(r - k)) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// Full prime factorization of `1 <= n <= 2^62`.
pub fn factorize(n: u64) -> Result<FactoredInteger> {
    if n == 0 || n > MAX_FACTORABLE {
        return Err(Error::domain(format!(
            "cannot factorize {n}: need 1 <= n <= 2^62"
        )));
    }
    let mut rest = n;
    let mut factors = Vec::new();
    for &p in trial_primes() {
        if p * p > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rest > 1 {
        let mut big = Vec::new();
        split_into(rest, &mut big);
        big.sort_unstable();
        for p in big {
            match factors.last_mut() {
                Some((last, e)) if *last == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
    }
    Ok(FactoredInteger { value: n, factors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().factors().is_empty());
        assert_eq!(factorize(12).unwrap().factors(), &[(2, 2), (3, 1)]);
        let f = factorize(105).unwrap();
        assert_eq!(f.factors(), &[(3, 1), (5, 1), (7, 1)]);
        assert!(f.is_squarefree());
        assert!(!factorize(12).unwrap().is_squarefree());
        assert!(matches!(factorize(0), Err(Error::Domain(_))));
        assert!(matches!(
            factorize(MAX_FACTORABLE + 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn factorize_needs_rho() {
        // two primes above the trial-division table
        let p = 1_000_003u64;
        let q = 2_147_483_647u64;
        assert_eq!(factorize(p * q).unwrap().factors(), &[(p, 1), (q, 1)]);
        let p2 = factorize(p * p * 7).unwrap();
        assert_eq!(p2.factors(), &[(7, 1), (p, 2)]);
        let big = (1u64 << 61) - 1;
        assert_eq!(factorize(big).unwrap().factors(), &[(big, 1)]);
        assert_eq!(factorize(MAX_FACTORABLE).unwrap().factors(), &[(2, 62)]);
    }

    #[test]
    fn reassembly_up_to_1e6() {
        for n in 1..=1_000_000u64 {
            let f = factorize(n).unwrap();
            let back: u64 = f.factors().iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, n);
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
            assert!(f.factors().iter().all(|&(p, e)| e >= 1 && is_prime(p)));
        }
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let primes = primes_up_to(100_000);
        let mut it = primes.iter().peekable();
        for n in 0..=100_000u64 {
            let expect = it.peek().is_some_and(|&&p| p == n);
            if expect {
                it.next();
            }
            assert_eq!(is_prime(n), expect, "n = {n}");
        }
        // strong pseudoprime to several small bases
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn divisors_and_from_factors() {
        assert_eq!(factorize(12).unwrap().divisors(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(
            FactoredInteger::from_primes(&[7, 3, 5]).unwrap().value(),
            105
        );
        assert!(FactoredInteger::from_factors(vec![(4, 1)]).is_err());
        assert!(FactoredInteger::from_factors(vec![(3, 1), (3, 2)]).is_err());
    }
}
