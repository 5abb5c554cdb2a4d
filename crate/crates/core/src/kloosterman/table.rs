use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use super::sum::{unit_root, EPS, ROOT_ERR};
use super::{inverse_table, SumValue};
use crate::arith::{factorize, gcd, inv_unit, is_prime, mul_mod, reduce};
use crate::error::{Error, Result};

const UNIT_BLOCK: usize = 64;

/// `S(a, m; q)` for every residue `m mod q`, with `a` fixed.
#[derive(Debug, Clone)]
pub struct KloostermanTable {
    a: u64,
    q: u64,
    values: Vec<SumValue>,
}

impl KloostermanTable {
    pub fn new(a: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::domain("modulus must be positive"));
        }
        let a = reduce(a, q);
        if q == 1 {
            return Ok(Self {
                a,
                q,
                values: vec![SumValue::ONE],
            });
        }
        let f = factorize(q)?;
        let mut values = vec![SumValue::ONE; q as usize];
        for &(p, e) in f.factors() {
            let part = p.pow(e);
            let c_inv = inv_unit((q / part) % part, part);
            let row = row_direct(mul_mod(a % part, c_inv, part), part);
            for (m, v) in values.iter_mut().enumerate() {
                let idx = mul_mod(m as u64 % part, c_inv, part);
                *v = *v * row[idx as usize];
            }
        }
        Ok(Self { a, q, values })
    }

    /// Same table summed over the units of `q` itself, without splitting `q`.
    pub fn direct(a: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::domain("modulus must be positive"));
        }
        let a = reduce(a, q);
        Ok(Self {
            a,
            q,
            values: row_direct(a, q),
        })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `S(a, m; q)` for any integer `m`.
    #[inline]
    pub fn get(&self, m: i64) -> SumValue {
        self.values[reduce(m, self.q) as usize]
    }

    pub fn values(&self) -> &[SumValue] {
        &self.values
    }
}

/// `S(a, b; r)` for all `b mod r`, summed directly over the units of `r`.
///
/// Units are processed in blocks; within a block each unit contributes a
/// walk `a n̄ + b n` through a shared table of roots of unity.
pub(crate) fn row_direct(a: u64, r: u64) -> Vec<SumValue> {
    if r == 1 {
        return vec![SumValue::ONE];
    }
    let n_r = r as usize;
    let (root_re, root_im): (Vec<f64>, Vec<f64>) = (0..r).map(|m| unit_root(m, r)).unzip();
    let prime = is_prime(r);
    let inverses = if prime { inverse_table(r) } else { Vec::new() };
    let units: Vec<u64> = (1..r).filter(|&n| prime || gcd(n, r) == 1).collect();

    let mut total_re = vec![0.0f64; n_r];
    let mut total_im = vec![0.0f64; n_r];
    let mut block_re = vec![0.0f64; n_r];
    let mut block_im = vec![0.0f64; n_r];
    for chunk in units.chunks(UNIT_BLOCK) {
        block_re.iter_mut().for_each(|x| *x = 0.0);
        block_im.iter_mut().for_each(|x| *x = 0.0);
        for &n in chunk {
            let n_inv = if prime {
                inverses[n as usize]
            } else {
                inv_unit(n, r)
            };
            let mut idx = mul_mod(a, n_inv, r) as usize;
            let step = n as usize;
            for b in 0..n_r {
                block_re[b] += root_re[idx];
                block_im[b] += root_im[idx];
                idx += step;
                if idx >= n_r {
                    idx -= n_r;
                }
            }
        }
        for b in 0..n_r {
            total_re[b] += block_re[b];
            total_im[b] += block_im[b];
        }
    }
    let terms = units.len() as f64;
    let blocks = units.len().div_ceil(UNIT_BLOCK) as f64;
    let err = terms * (ROOT_ERR + 2.0 * EPS * (UNIT_BLOCK as f64 + blocks));
    total_re
        .into_iter()
        .zip(total_im)
        .map(|(re, im)| SumValue::new(re, im, err))
        .collect()
}

/// Shared, read-mostly cache of Kloosterman tables keyed by `(a mod q, q)`.
#[derive(Debug, Default)]
pub struct KloostermanCache {
    tables: RwLock<HashMap<(u64, u64), Arc<KloostermanTable>>>,
}

impl KloostermanCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, a: i64, q: u64) -> Result<Arc<KloostermanTable>> {
        if q == 0 {
            return Err(Error::domain("modulus must be positive"));
        }
        let key = (reduce(a, q), q);
        if let Some(t) = self.tables.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(KloostermanTable::new(key.0 as i64, q)?);
        let mut w = self.tables.write().expect("cache lock");
        Ok(Arc::clone(w.entry(key).or_insert(table)))
    }

    pub fn len(&self) -> usize {
        self.tables.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kloosterman::{complete_kloosterman_with, Evaluation};

    #[test]
    fn table_matches_direct_evaluation() {
        for q in [1u64, 2, 5, 12, 30, 49, 77, 210] {
            for a in [1i64, 2, 13, -1] {
                let t = KloostermanTable::new(a, q).unwrap();
                for m in 0..q as i64 {
                    let d = complete_kloosterman_with(a, m, q, Evaluation::Direct).unwrap();
                    let v = t.get(m);
                    assert!(v.distance(&d) <= v.err + d.err, "a={a} q={q} m={m}");
                }
                assert!(t.get(-1).distance(&t.get(q as i64 - 1)) == 0.0);
            }
        }
    }

    #[test]
    fn cache_shares_tables() {
        let cache = KloostermanCache::new();
        let t1 = cache.get(3, 11).unwrap();
        let t2 = cache.get(14, 11).unwrap();
        assert!(Arc::ptr_eq(&t1, &t2));
        assert_eq!(cache.len(), 1);
        std::thread::scope(|s| {
            for a in 1..5 {
                let c = &cache;
                s.spawn(move || c.get(a, 13).unwrap());
            }
        });
        assert_eq!(cache.len(), 5);
    }
}
