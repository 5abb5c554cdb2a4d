use super::{factorize, primes_up_to, FactoredInteger};
use crate::error::{Error, Result};

pub const MAX_SMOOTH_HI: u64 = 1 << 40;
pub const MAX_SMOOTH_SPAN: u64 = 100_000_000;

const SEGMENT: u64 = 1 << 16;

/// Smoothness bound: only primes `<= bound` are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoothnessSpec {
    bound: u64,
}

impl SmoothnessSpec {
    pub fn new(bound: u64) -> Result<Self> {
        if bound == 0 {
            return Err(Error::domain("smoothness bound must be >= 1"));
        }
        Ok(Self { bound })
    }

    /// Bound `floor(x^eta)` for an `x^eta`-smoothness condition.
    pub fn from_exponent(x: u64, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::domain(format!(
                "smoothness exponent {eta} must be >= 0"
            )));
        }
        let raw = (x as f64).powf(eta);
        let mut bound = raw.floor() as u64;
        // guard against powf landing just below an exact integer power
        if ((bound + 1) as f64) <= raw * (1.0 + 1e-12) {
            bound += 1;
        }
        Self::new(bound.max(1))
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }
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

/// Squarefree `n` in `[lo, hi]` whose prime factors are all `<= spec.bound()`, ascending.
pub fn smooth_squarefree_moduli(
    lo: u64,
    hi: u64,
    spec: SmoothnessSpec,
) -> Result<Vec<FactoredInteger>> {
    if lo == 0 || lo > hi {
        return Err(Error::domain(format!("invalid range [{lo}, {hi}]")));
    }
    if hi > MAX_SMOOTH_HI || hi - lo >= MAX_SMOOTH_SPAN {
        return Err(Error::domain(format!(
            "range [{lo}, {hi}] exceeds the sieve caps"
        )));
    }
    let root = isqrt(hi);
    let sieve_limit = spec.bound.min(root);
    let primes = primes_up_to(sieve_limit);

    let mut out = Vec::new();
    let mut rest = Vec::with_capacity(SEGMENT as usize);
    let mut squarefree = Vec::with_capacity(SEGMENT as usize);
    let mut start = lo;
    while start <= hi {
        let end = hi.min(start + SEGMENT - 1);
        rest.clear();
        rest.extend(start..=end);
        squarefree.clear();
        squarefree.resize(rest.len(), true);
        for &p in &primes {
            let mut m = start.div_ceil(p) * p;
            while m <= end {
                rest[(m - start) as usize] /= p;
                m += p;
            }
            let p2 = p * p;
            if p2 <= end {
                let mut m = start.div_ceil(p2) * p2;
                while m <= end {
                    squarefree[(m - start) as usize] = false;
                    m += p2;
                }
            }
        }
        for (i, &r) in rest.iter().enumerate() {
            if !squarefree[i] {
                continue;
            }
            // r is 1 or a single prime above the sieve limit
            let accept = r == 1 || (spec.bound > root && r <= spec.bound);
            if accept {
                out.push(factorize(start + i as u64)?);
            }
        }
        start = end + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(lo: u64, hi: u64, bound: u64) -> Vec<u64> {
        (lo..=hi)
            .filter(|&n| {
                let f = factorize(n).unwrap();
                f.is_squarefree() && f.is_smooth(bound)
            })
            .collect()
    }

    fn values(v: &[FactoredInteger]) -> Vec<u64> {
        v.iter().map(|f| f.value()).collect()
    }

    #[test]
    fn examples() {
        let spec1 = SmoothnessSpec::new(1).unwrap();
        assert!(smooth_squarefree_moduli(2, 100, spec1).unwrap().is_empty());
        // 1 is the empty product
        assert_eq!(
            values(&smooth_squarefree_moduli(1, 100, spec1).unwrap()),
            vec![1]
        );

        let got =
            values(&smooth_squarefree_moduli(10, 40, SmoothnessSpec::new(7).unwrap()).unwrap());
        for n in [10, 14, 15, 21, 30, 35] {
            assert!(got.contains(&n));
        }
        for n in [12, 18, 20, 11, 13] {
            assert!(!got.contains(&n));
        }
        assert_eq!(
            values(&smooth_squarefree_moduli(105, 105, SmoothnessSpec::new(7).unwrap()).unwrap()),
            vec![105]
        );
        assert!(smooth_squarefree_moduli(5, 4, spec1).is_err());
        assert!(SmoothnessSpec::new(0).is_err());
    }

    #[test]
    fn matches_brute_force() {
        for &(lo, hi) in &[(1u64, 3000u64), (70_000, 140_000)] {
            for bound in [1, 2, 3, 10, 31, 50, 200, 400, 1000, 200_000] {
                let spec = SmoothnessSpec::new(bound).unwrap();
                assert_eq!(
                    values(&smooth_squarefree_moduli(lo, hi, spec).unwrap()),
                    brute(lo, hi, bound),
                    "[{lo},{hi}] bound {bound}"
                );
            }
        }
    }

    #[test]
    fn exponent_bound() {
        assert_eq!(
            SmoothnessSpec::from_exponent(1_000_000, 0.5)
                .unwrap()
                .bound(),
            1000
        );
        assert_eq!(
            SmoothnessSpec::from_exponent(1_000_000, 0.25)
                .unwrap()
                .bound(),
            31
        );
        assert_eq!(SmoothnessSpec::from_exponent(10, 0.0).unwrap().bound(), 1);
    }
}
