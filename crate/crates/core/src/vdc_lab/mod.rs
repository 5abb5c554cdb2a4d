//! Completion and differencing machinery for short Kloosterman sums.
//!
//! The pipeline is: complete an incomplete sum against the Fourier transform
//! of its interval, cut the completed sum into blocks of length `K = [q/N]`,
//! difference each block along multiples of the factors `q_1, ..., q_l`, and
//! finally evaluate the resulting sums of `2^l`-fold Kloosterman products.
//! Every piece is evaluated exactly (up to the tracked rounding error) so the
//! identities can be checked numerically and the inequalities reported as
//! ratios.

pub mod grids;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, inv_unit, is_prime, mul_mod, reduce, FactoredInteger, MAX_FACTORABLE};
use crate::error::{Error, Result};
use crate::kloosterman::{
    complete_kloosterman, incomplete_kloosterman, Accumulator, IntegerInterval, KloostermanTable,
    SumValue,
};

/// An ordered factorization `q = q_0 q_1 ... q_l` of a squarefree modulus.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModulusSplit {
    parts: Vec<u64>,
}

impl ModulusSplit {
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::domain("a split needs at least the leading part"));
        }
        if let Some(&z) = parts.iter().find(|&&p| p == 0) {
            return Err(Error::domain(format!("split part {z} must be positive")));
        }
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                if gcd(parts[i], parts[j]) != 1 {
                    return Err(Error::not_coprime(format!(
                        "split parts {} and {} share a factor",
                        parts[i], parts[j]
                    )));
                }
            }
        }
        let mut product: u64 = 1;
        for &p in &parts {
            product = product
                .checked_mul(p)
                .filter(|&v| v <= MAX_FACTORABLE)
                .ok_or_else(|| Error::domain("split product exceeds 2^62"))?;
            if !crate::arith::factorize(p)?.is_squarefree() {
                return Err(Error::NotSquarefree(p));
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// Number of non-leading parts.
    pub fn l(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn leading(&self) -> u64 {
        self.parts[0]
    }

    pub fn modulus(&self) -> u64 {
        self.parts.iter().product()
    }
}

/// Shifts `h_1, ..., h_l`, one per non-leading part of a split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftVector {
    pub h: Vec<i64>,
}

impl ShiftVector {
    pub fn new(h: Vec<i64>) -> Self {
        Self { h }
    }

    /// The `2^l` offsets `Σ_{i in I} q_i h_i`, indexed by the bitmask of `I`.
    pub fn subset_offsets(&self, split: &ModulusSplit) -> Result<Vec<i64>> {
        if self.h.len() != split.l() {
            return Err(Error::domain(format!(
                "{} shifts for a split with l = {}",
                self.h.len(),
                split.l()
            )));
        }
        let steps: Vec<i64> = split.parts()[1..]
            .iter()
            .zip(&self.h)
            .map(|(&q, &h)| q as i64 * h)
            .collect();
        Ok(subset_sums(&steps))
    }
}

fn subset_sums(steps: &[i64]) -> Vec<i64> {
    let mut sums = vec![0i64];
    for &s in steps {
        let len = sums.len();
        for i in 0..len {
            sums.push(sums[i] + s);
        }
    }
    sums
}

/// `f(k) = Σ_{n in I} e_q(-n k)`; exactly `N` when `k ≡ 0`.
pub fn interval_fourier(interval: IntegerInterval, q: u64, k: i64) -> Result<SumValue> {
    if q == 0 {
        return Err(Error::domain("modulus must be positive"));
    }
    Ok(fourier_term(interval, q, reduce(k, q)))
}

fn fourier_term(interval: IntegerInterval, q: u64, k: u64) -> SumValue {
    if k == 0 {
        return SumValue::exact(interval.len as f64);
    }
    let minus_k = q - k;
    let mut acc = Accumulator::new();
    for n in interval.iter() {
        acc.push_root(mul_mod(reduce(n, q), minus_k, q), q);
    }
    acc.finish()
}

/// `f(k)` for every `k mod q`.
#[derive(Debug, Clone)]
pub struct IntervalTransform {
    pub interval: IntegerInterval,
    values: Vec<SumValue>,
}

impl IntervalTransform {
    pub fn new(interval: IntegerInterval, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::domain("modulus must be positive"));
        }
        let values = (0..q).map(|k| fourier_term(interval, q, k)).collect();
        Ok(Self { interval, values })
    }

    pub fn values(&self) -> &[SumValue] {
        &self.values
    }
}

/// Result of comparing an incomplete sum with its completed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletionCheck {
    pub incomplete: SumValue,
    pub completed: SumValue,
    pub deviation: f64,
    /// Combined error bound of the two sides.
    pub err: f64,
}

impl CompletionCheck {
    pub fn within_err(&self) -> bool {
        self.deviation <= self.err
    }
}

/// Checks `S = (1/q) Σ_k f(k) S(a, k; q)` for many `(a, I)` at one modulus.
///
/// Uses `S(a, k; q) = S(1, a k; q)` for units `a`, so one table serves every `a`.
#[derive(Debug, Clone)]
pub struct CompletionChecker {
    q: u64,
    base: KloostermanTable,
}

impl CompletionChecker {
    pub fn new(q: u64) -> Result<Self> {
        Ok(Self {
            q,
            base: KloostermanTable::new(1, q)?,
        })
    }

    pub fn check(&self, a: i64, transform: &IntervalTransform) -> Result<CompletionCheck> {
        let q = self.q;
        let incomplete = incomplete_kloosterman(a, q, transform.interval)?;
        let ar = reduce(a, q);
        let completed = transform
            .values()
            .iter()
            .enumerate()
            .map(|(k, &f)| f * self.base.get(mul_mod(ar, k as u64, q) as i64))
            .sum::<SumValue>()
            .scale(1.0 / q as f64);
        Ok(CompletionCheck {
            incomplete,
            completed,
            deviation: incomplete.distance(&completed),
            err: incomplete.err + completed.err,
        })
    }
}

/// Compares the incomplete sum over `I` with its completion.
pub fn completion_check(a: i64, q: u64, interval: IntegerInterval) -> Result<CompletionCheck> {
    // validates the same preconditions as the incomplete sum
    incomplete_kloosterman(a, q, interval)?;
    let checker = CompletionChecker::new(q)?;
    checker.check(a, &IntervalTransform::new(interval, q)?)
}

/// `S(r) = max_{0 <= L <= K} |Σ_{(r-1)K < k <= (r-1)K + L} e_q(-M k) S(a, k; q)|`.
pub fn partial_sum_max(a: i64, q: u64, m: i64, block: u64, r: u64) -> Result<f64> {
    if q == 0 {
        return Err(Error::domain("modulus must be positive"));
    }
    if block == 0 {
        return Err(Error::domain("block length K must be positive"));
    }
    if r == 0 {
        return Err(Error::domain("block index r starts at 1"));
    }
    if gcd(reduce(a, q), q) != 1 {
        return Err(Error::not_coprime(format!("gcd({a}, {q}) > 1")));
    }
    let start = (r - 1) as i64 * block as i64;
    let mr = reduce(m, q);
    let mut running = SumValue::ZERO;
    let mut best = 0.0f64;
    for k in start + 1..=start + block as i64 {
        let kr = reduce(k, q);
        let twist = SumValue::root_of_unity((q - mul_mod(mr, kr, q)) % q, q);
        running = running + twist * complete_kloosterman(a, k, q)?;
        best = best.max(running.abs());
    }
    Ok(best)
}

/// `Σ_{k mod q} e_q(-k b) Π_i T[k + s_i]` for a table `T` of `S(a, ·; q)`.
pub fn shifted_product_sum_with_table(
    table: &KloostermanTable,
    shifts: &[i64],
    b: i64,
) -> SumValue {
    let q = table.modulus();
    let br = reduce(b, q);
    let mut acc = Accumulator::new();
    for k in 0..q {
        let twist = SumValue::root_of_unity((q - mul_mod(k, br, q)) % q, q);
        let product: SumValue = shifts.iter().map(|&s| table.get(k as i64 + s)).product();
        acc.push(twist * product);
    }
    acc.finish()
}

/// `Σ_{k mod p} e_p(-k b) Π_i S(a, k + s_i; p)` for prime `p ∤ a`.
pub fn shifted_product_complete_sum(a: i64, shifts: &[i64], b: i64, p: u64) -> Result<SumValue> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if reduce(a, p) == 0 {
        return Err(Error::domain(format!("{p} divides {a}")));
    }
    Ok(shifted_product_sum_with_table(
        &KloostermanTable::new(a, p)?,
        shifts,
        b,
    ))
}

/// The same sum modulo a squarefree `q`, as a product of prime-modulus sums.
///
/// For `q = p c` the factor at `p` is the prime sum with `a ↦ a c̄²`,
/// `b ↦ b c̄` and the shifts unchanged.
pub fn shifted_product_sum_squarefree(
    a: i64,
    shifts: &[i64],
    b: i64,
    q: &FactoredInteger,
) -> Result<SumValue> {
    if !q.is_squarefree() {
        return Err(Error::NotSquarefree(q.value()));
    }
    let qv = q.value();
    if gcd(reduce(a, qv), qv) != 1 {
        return Err(Error::not_coprime(format!("gcd({a}, {qv}) > 1")));
    }
    let mut value = SumValue::ONE;
    for p in q.primes() {
        let c_inv = inv_unit((qv / p) % p, p);
        let ap = mul_mod(mul_mod(reduce(a, p), c_inv, p), c_inv, p);
        let bp = mul_mod(reduce(b, p), c_inv, p);
        value = value * shifted_product_complete_sum(ap as i64, shifts, bp as i64, p)?;
    }
    Ok(value)
}

/// Direct summation over `k mod q` with Kloosterman values summed over the full modulus.
pub fn shifted_product_sum_direct(a: i64, shifts: &[i64], b: i64, q: u64) -> Result<SumValue> {
    if q == 0 {
        return Err(Error::domain("modulus must be positive"));
    }
    let table = KloostermanTable::direct(a, q)?;
    Ok(shifted_product_sum_with_table(&table, shifts, b))
}

/// `T(h_1, ..., h_l) = Σ_{k in J} Π_{I ⊆ {1..l}} S(a', k + Σ_{i in I} q_i h_i; q_0)`.
pub fn t_eval(
    a_prime: i64,
    split: &ModulusSplit,
    shifts: &ShiftVector,
    interval: IntegerInterval,
) -> Result<SumValue> {
    let q0 = split.leading();
    if gcd(reduce(a_prime, q0), q0) != 1 {
        return Err(Error::not_coprime(format!("gcd({a_prime}, {q0}) > 1")));
    }
    let offsets = shifts.subset_offsets(split)?;
    let table = KloostermanTable::new(a_prime, q0)?;
    Ok(product_block_sum(&table, &offsets, interval))
}

fn product_block_sum(
    table: &KloostermanTable,
    offsets: &[i64],
    interval: IntegerInterval,
) -> SumValue {
    interval
        .iter()
        .map(|k| {
            offsets
                .iter()
                .map(|&o| table.get(k + o))
                .product::<SumValue>()
        })
        .sum()
}

/// True when every residue mod `p` occurs an even number of times among the
/// `2^l` subset sums of `h`.
pub fn subset_sums_all_even(h: &[i64], p: u64) -> bool {
    let mut counts = vec![0u32; p as usize];
    let steps: Vec<i64> = h.iter().map(|&x| reduce(x, p) as i64).collect();
    for s in subset_sums(&steps) {
        counts[reduce(s, p) as usize] += 1;
    }
    counts.iter().all(|c| c % 2 == 0)
}

/// All `h in (F_p^*)^l` whose subset sums have only even multiplicities.
pub fn vanishing_lemma_check(p: u64, l: u32) -> Result<Vec<Vec<u64>>> {
    if p == 2 || !is_prime(p) {
        return Err(Error::domain(format!("need an odd prime, got {p}")));
    }
    if l == 0 {
        return Err(Error::domain("l must be positive"));
    }
    if (p as f64).powi(l as i32) > 1e7 {
        return Err(Error::domain(format!(
            "p^l = {p}^{l} is too large to enumerate"
        )));
    }
    let l = l as usize;
    let mut found = Vec::new();
    let mut h = vec![1u64; l];
    let mut counts = vec![0u32; p as usize];
    let mut sums = Vec::with_capacity(1 << l);
    loop {
        sums.clear();
        sums.push(0u64);
        for &x in &h {
            let len = sums.len();
            for i in 0..len {
                sums.push((sums[i] + x) % p);
            }
        }
        counts.iter_mut().for_each(|c| *c = 0);
        for &s in &sums {
            counts[s as usize] += 1;
        }
        if counts.iter().all(|c| c % 2 == 0) {
            found.push(h.clone());
        }
        // odometer over 1..p-1
        let mut i = 0;
        loop {
            if i == l {
                return Ok(found);
            }
            h[i] += 1;
            if h[i] < p {
                break;
            }
            h[i] = 1;
            i += 1;
        }
    }
}

/// Both sides of the single differencing step, without constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneDiffReport {
    /// `|T|^2`.
    pub lhs: f64,
    /// `q_1^{j+1} (K q_0^j + Σ_{0 < |h| <= K/q_1} |inner(h)|)`.
    pub rhs_core: f64,
    pub ratio: f64,
    pub a_prime: u64,
    /// `(h, Σ_{k in J(h)} Π_i S(a', k + s_i; q_0) S(a', k + q_1 h + s_i; q_0))`.
    pub inner: Vec<(i64, SumValue)>,
}

/// `|T|^2` against the core of the one-step differencing bound.
///
/// `J(h)` is taken as `{k in J : k + q_1 h in J}`, the range produced by the
/// differencing itself.
pub fn onediff_ratio(
    a: i64,
    q0: u64,
    q1: u64,
    m: i64,
    interval: IntegerInterval,
    shifts: &[i64],
) -> Result<OneDiffReport> {
    if q0 == 0 || q1 == 0 {
        return Err(Error::domain("moduli must be positive"));
    }
    if gcd(q0, q1) != 1 {
        return Err(Error::not_coprime(format!("gcd({q0}, {q1}) > 1")));
    }
    let q = q0
        .checked_mul(q1)
        .filter(|&q| q <= MAX_FACTORABLE)
        .ok_or_else(|| Error::domain("q0 q1 exceeds 2^62"))?;
    if gcd(reduce(a, q), q) != 1 {
        return Err(Error::not_coprime(format!("gcd({a}, {q}) > 1")));
    }
    if shifts.is_empty() {
        return Err(Error::domain("need at least one shift s_1"));
    }
    let c1 = inv_unit(q1 % q0, q0);
    let a_prime = mul_mod(mul_mod(reduce(a, q0), c1, q0), c1, q0);
    let k_len = interval.len;
    if k_len == 0 {
        return Ok(OneDiffReport {
            lhs: 0.0,
            rhs_core: 0.0,
            ratio: 0.0,
            a_prime,
            inner: Vec::new(),
        });
    }
    if q1 > k_len {
        return Err(Error::domain(format!(
            "need q1 <= K, got q1 = {q1}, K = {k_len}"
        )));
    }
    let full = KloostermanTable::new(a, q)?;
    let leading = KloostermanTable::new(a_prime as i64, q0)?;
    Ok(onediff_with_tables(
        &full, &leading, q1, m, interval, shifts,
    ))
}

/// `onediff_ratio` with the tables of `S(a, ·; q)` and `S(a', ·; q_0)` supplied.
pub(crate) fn onediff_with_tables(
    full: &KloostermanTable,
    leading: &KloostermanTable,
    q1: u64,
    m: i64,
    interval: IntegerInterval,
    shifts: &[i64],
) -> OneDiffReport {
    let q = full.modulus();
    let q0 = leading.modulus();
    let a_prime = leading.a();
    let k_len = interval.len;
    let mr = reduce(m, q);
    let t: SumValue = interval
        .iter()
        .map(|k| {
            let twist = SumValue::root_of_unity((q - mul_mod(mr, reduce(k, q), q)) % q, q);
            twist
                * shifts
                    .iter()
                    .map(|&s| full.get(k + s))
                    .product::<SumValue>()
        })
        .sum();
    let lhs = t.abs().powi(2);

    let j = shifts.len() as i32;
    let h_max = (k_len / q1) as i64;
    let mut inner = Vec::with_capacity(2 * h_max as usize);
    let mut inner_total = 0.0;
    for h in (-h_max..=h_max).filter(|&h| h != 0) {
        let step = q1 as i64 * h;
        let range = interval.intersect(&interval.shifted(-step));
        let mut offsets: Vec<i64> = shifts.to_vec();
        offsets.extend(shifts.iter().map(|&s| s + step));
        let v = product_block_sum(leading, &offsets, range);
        inner_total += v.abs();
        inner.push((h, v));
    }
    let rhs_core = (q1 as f64).powi(j + 1) * (k_len as f64 * (q0 as f64).powi(j) + inner_total);
    OneDiffReport {
        lhs,
        rhs_core,
        ratio: lhs / rhs_core,
        a_prime,
        inner,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factorize;
    use crate::kloosterman::{complete_kloosterman_with, Evaluation};

    #[test]
    fn split_validation() {
        let s = ModulusSplit::new(vec![15, 7, 2]).unwrap();
        assert_eq!((s.l(), s.modulus(), s.leading()), (2, 210, 15));
        assert!(matches!(
            ModulusSplit::new(vec![6, 4]),
            Err(Error::NotCoprime(_))
        ));
        assert!(matches!(
            ModulusSplit::new(vec![12, 5]),
            Err(Error::NotSquarefree(12))
        ));
        assert!(ModulusSplit::new(vec![]).is_err());
        assert!(ModulusSplit::new(vec![0, 3]).is_err());
        assert!(ModulusSplit::new(vec![5, 1, 1]).is_ok());
    }

    #[test]
    fn subset_offsets_order() {
        let s = ModulusSplit::new(vec![5, 3, 7]).unwrap();
        let offs = ShiftVector::new(vec![1, 2]).subset_offsets(&s).unwrap();
        assert_eq!(offs, vec![0, 3, 14, 17]);
        assert!(ShiftVector::new(vec![1]).subset_offsets(&s).is_err());
    }

    #[test]
    fn fourier_examples() {
        let i = IntegerInterval::new(3, 17);
        assert_eq!(interval_fourier(i, 40, 0).unwrap(), SumValue::exact(17.0));
        assert_eq!(interval_fourier(i, 40, 80).unwrap(), SumValue::exact(17.0));
        for q in 2..60u64 {
            let full = IntegerInterval::new(-4, q);
            for k in 1..q as i64 {
                let f = interval_fourier(full, q, k).unwrap();
                assert!(f.abs() <= f.err, "q={q} k={k}");
            }
        }
        assert!(interval_fourier(i, 0, 1).is_err());
    }

    #[test]
    fn completion_examples() {
        let c = completion_check(1, 6, IntegerInterval::new(4, 4)).unwrap();
        assert!(c.deviation <= 1e-9 && c.within_err());
        let e = completion_check(3, 11, IntegerInterval::new(2, 0)).unwrap();
        assert_eq!(e.incomplete.abs(), 0.0);
        assert!(e.completed.abs() <= e.completed.err);
        assert!(matches!(
            completion_check(2, 6, IntegerInterval::new(0, 3)),
            Err(Error::NotCoprime(_))
        ));
    }

    #[test]
    fn partial_sum_examples() {
        for r in 1..5u64 {
            let v = partial_sum_max(2, 15, 4, 1, r).unwrap();
            let s = complete_kloosterman(2, r as i64, 15).unwrap();
            assert!((v - s.abs()).abs() < 1e-12);
        }
        // q = 15 has S(1, k; 15) = 0 at some k; the maximum stays non-negative
        assert!(partial_sum_max(1, 15, 0, 3, 1).unwrap() >= 0.0);
        assert!(matches!(
            partial_sum_max(1, 15, 0, 0, 1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            partial_sum_max(3, 15, 0, 2, 1),
            Err(Error::NotCoprime(_))
        ));
    }

    #[test]
    fn prime_product_sum_examples() {
        for p in [3u64, 5, 7, 31] {
            for a in [1i64, 2] {
                let empty = shifted_product_complete_sum(a, &[], 1, p).unwrap();
                assert!(empty.abs() <= empty.err);
                let empty0 = shifted_product_complete_sum(a, &[], p as i64, p).unwrap();
                assert!((empty0.re - p as f64).abs() <= empty0.err);
                let one = shifted_product_complete_sum(a, &[0], 0, p).unwrap();
                assert!(one.abs() <= one.err);
                let two = shifted_product_complete_sum(a, &[0, 0], 0, p).unwrap();
                assert!((two.re - (p * p - p) as f64).abs() <= two.err);
            }
        }
        assert!(shifted_product_complete_sum(1, &[0], 0, 9).is_err());
        assert!(shifted_product_complete_sum(7, &[0], 0, 7).is_err());
    }

    #[test]
    fn squarefree_product_sum_examples() {
        let p = factorize(13).unwrap();
        let a = shifted_product_sum_squarefree(3, &[0, 2], 5, &p).unwrap();
        let b = shifted_product_complete_sum(3, &[0, 2], 5, 13).unwrap();
        assert!(a.distance(&b) <= a.err + b.err);

        let q = factorize(15).unwrap();
        let crt = shifted_product_sum_squarefree(1, &[0], 0, &q).unwrap();
        let direct = shifted_product_sum_direct(1, &[0], 0, 15).unwrap();
        assert!(crt.distance(&direct) <= crt.err + direct.err);

        let one = factorize(1).unwrap();
        assert_eq!(
            shifted_product_sum_squarefree(1, &[0, 5], 3, &one).unwrap(),
            SumValue::ONE
        );
        assert!(matches!(
            shifted_product_sum_squarefree(1, &[0], 0, &factorize(12).unwrap()),
            Err(Error::NotSquarefree(12))
        ));
        assert!(matches!(
            shifted_product_sum_squarefree(3, &[0], 0, &q),
            Err(Error::NotCoprime(_))
        ));
    }

    #[test]
    fn t_eval_examples() {
        let split0 = ModulusSplit::new(vec![7]).unwrap();
        let j = IntegerInterval::new(2, 9);
        let v = t_eval(3, &split0, &ShiftVector::new(vec![]), j).unwrap();
        let expect: SumValue = j
            .iter()
            .map(|k| complete_kloosterman(3, k, 7).unwrap())
            .sum();
        assert!(v.distance(&expect) <= v.err + expect.err);

        let split = ModulusSplit::new(vec![5, 3]).unwrap();
        let h = ShiftVector::new(vec![1]);
        assert_eq!(
            t_eval(1, &split, &h, IntegerInterval::new(0, 0)).unwrap(),
            SumValue::ZERO
        );

        // brute-force double summation with directly evaluated Kloosterman sums
        let v = t_eval(1, &split, &h, IntegerInterval::new(0, 5)).unwrap();
        let mut brute = SumValue::ZERO;
        for k in 0..5i64 {
            let s0 = complete_kloosterman_with(1, k, 5, Evaluation::Direct).unwrap();
            let s1 = complete_kloosterman_with(1, k + 3, 5, Evaluation::Direct).unwrap();
            brute = brute + s0 * s1;
        }
        assert!(v.distance(&brute) <= v.err + brute.err);

        assert!(matches!(
            t_eval(5, &split, &h, j),
            Err(Error::NotCoprime(_))
        ));
        assert!(matches!(
            t_eval(1, &split, &ShiftVector::new(vec![]), j),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn vanishing_examples() {
        assert!(subset_sums_all_even(&[0, 4], 7));
        assert!(!subset_sums_all_even(&[1, 4], 7));
        assert!(vanishing_lemma_check(5, 2).unwrap().is_empty());
        assert!(vanishing_lemma_check(13, 3).unwrap().is_empty());
        assert!(matches!(vanishing_lemma_check(2, 2), Err(Error::Domain(_))));
        assert!(matches!(vanishing_lemma_check(9, 2), Err(Error::Domain(_))));
        assert!(matches!(
            vanishing_lemma_check(101, 4),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn onediff_empty_and_errors() {
        let r = onediff_ratio(1, 7, 3, 0, IntegerInterval::new(0, 0), &[0]).unwrap();
        assert_eq!((r.lhs, r.ratio), (0.0, 0.0));
        assert!(matches!(
            onediff_ratio(1, 6, 3, 0, IntegerInterval::new(0, 9), &[0]),
            Err(Error::NotCoprime(_))
        ));
        assert!(matches!(
            onediff_ratio(1, 7, 5, 0, IntegerInterval::new(0, 4), &[0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            onediff_ratio(7, 7, 3, 0, IntegerInterval::new(0, 9), &[0]),
            Err(Error::NotCoprime(_))
        ));
    }

    #[test]
    fn onediff_inner_matches_t_eval() {
        let (q0, q1) = (7u64, 3u64);
        let j = IntegerInterval::new(0, 9);
        let r = onediff_ratio(1, q0, q1, 0, j, &[0]).unwrap();
        let split = ModulusSplit::new(vec![q0, q1]).unwrap();
        assert_eq!(r.inner.len(), 6);
        for &(h, v) in &r.inner {
            let range = j.intersect(&j.shifted(-(q1 as i64) * h));
            let t = t_eval(r.a_prime as i64, &split, &ShiftVector::new(vec![h]), range).unwrap();
            assert!(t.distance(&v) <= t.err + v.err, "h = {h}");
        }
    }
}
