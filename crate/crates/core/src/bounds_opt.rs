//! Bound expressions, target sizes, and window factorizations of smooth moduli.

use serde::{Deserialize, Serialize};

use crate::arith::FactoredInteger;
use crate::error::{Error, Result};
use crate::vdc_lab::ModulusSplit;

/// Closed windows `[lo_j, hi_j]` for the four parts `q_0, ..., q_3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    windows: [(f64, f64); 4],
}

impl WindowSpec {
    pub fn new(windows: [(f64, f64); 4]) -> Result<Self> {
        for (j, &(lo, hi)) in windows.iter().enumerate() {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::domain(format!(
                    "window {j} = [{lo}, {hi}] is not a positive interval"
                )));
            }
        }
        Ok(Self { windows })
    }

    pub fn windows(&self) -> &[(f64, f64); 4] {
        &self.windows
    }

    pub fn contains(&self, parts: &[u64]) -> bool {
        parts.len() == 4
            && parts
                .iter()
                .zip(&self.windows)
                .all(|(&q, &(lo, hi))| lo <= q as f64 && q as f64 <= hi)
    }

    /// `Σ_j |ln(q_j / sqrt(lo_j hi_j))|`, the centering objective.
    pub fn objective(&self, parts: &[u64]) -> f64 {
        parts
            .iter()
            .zip(&self.windows)
            .map(|(&q, &(lo, hi))| ((q as f64).ln() - 0.5 * (lo.ln() + hi.ln())).abs())
            .sum()
    }
}

/// One named right-hand-side term: `value = prefactor * base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTerm {
    pub name: String,
    pub base: f64,
    pub prefactor: f64,
    pub value: f64,
}

impl NamedTerm {
    fn new(name: impl Into<String>, base: f64, prefactor: f64) -> Self {
        Self {
            name: name.into(),
            base,
            prefactor,
            value: base * prefactor,
        }
    }
}

/// All terms of a bound at one value of `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTerms {
    pub eps: f64,
    pub terms: Vec<NamedTerm>,
    pub total: f64,
}

impl BoundTerms {
    fn new(eps: f64, terms: Vec<NamedTerm>) -> Self {
        let total = terms.iter().map(|t| t.value).sum();
        Self { eps, terms, total }
    }

    pub fn term(&self, name: &str) -> Option<&NamedTerm> {
        self.terms.iter().find(|t| t.name == name)
    }
}

/// Parameters a bound was evaluated at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParameters {
    pub x: Option<u64>,
    pub n: Option<u64>,
    pub q: u64,
    pub split: Vec<u64>,
    pub delta: Option<f64>,
    pub eps: f64,
}

/// A bound evaluated at `ε = 0` and at the requested `ε`, optionally paired
/// with the measured quantity it bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub parameters: BoundParameters,
    pub at_zero: BoundTerms,
    pub at_eps: BoundTerms,
    pub computed: Option<f64>,
    /// `computed / at_zero.total`.
    pub ratio: Option<f64>,
}

impl BoundReport {
    pub fn bound_total(&self) -> f64 {
        self.at_zero.total
    }

    pub fn with_computed(mut self, computed: f64) -> Self {
        self.computed = Some(computed);
        self.ratio = (self.at_zero.total > 0.0).then(|| computed / self.at_zero.total);
        self
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "eps = {eps} must be a non-negative real"
        )))
    }
}

fn short_terms(n: f64, parts: &[u64], eps: f64) -> BoundTerms {
    let q: f64 = parts.iter().map(|&p| p as f64).product();
    let l = parts.len() - 1;
    let pre = q.powf(eps);
    let mut terms = Vec::with_capacity(l + 2);
    for j in 1..=l {
        let w = 0.5f64.powi(j as i32);
        let base = n.powf(w) * q.powf(0.5 - w) * (parts[l - j + 1] as f64).powf(w);
        terms.push(NamedTerm::new(format!("sum_j{j}"), base, pre));
    }
    let w = 0.5f64.powi(l as i32);
    let q0 = parts[0] as f64;
    let tail_exp = 0.5f64.powi(l as i32 + 1);
    terms.push(NamedTerm::new(
        "q0_term",
        n.powf(w) * q.powf(0.5 - w) * q0.powf(tail_exp),
        pre,
    ));
    terms.push(NamedTerm::new("tail", q.sqrt() * q0.powf(-tail_exp), pre));
    BoundTerms::new(eps, terms)
}

/// Right-hand side of the short Kloosterman bound for `q = q_0 q_1 ... q_l`.
pub fn shortkloost_rhs(n: u64, split: &ModulusSplit, eps: f64) -> Result<BoundReport> {
    check_eps(eps)?;
    if split.l() == 0 {
        return Err(Error::domain("the bound needs l >= 1"));
    }
    let q = split.modulus();
    if n == 0 || n > q {
        return Err(Error::domain(format!(
            "need 1 <= N <= q, got N = {n}, q = {q}"
        )));
    }
    let parts = split.parts();
    Ok(BoundReport {
        parameters: BoundParameters {
            x: None,
            n: Some(n),
            q,
            split: parts.to_vec(),
            delta: None,
            eps,
        },
        at_zero: short_terms(n as f64, parts, 0.0),
        at_eps: short_terms(n as f64, parts, eps),
        computed: None,
        ratio: None,
    })
}

fn divisor_terms(x: f64, parts: &[u64], delta: f64, eps: f64) -> BoundTerms {
    let q: f64 = parts.iter().map(|&p| p as f64).product();
    let mut terms = vec![NamedTerm::new(
        "leading",
        x.powf(1.0 - delta) / q,
        x.powf(eps),
    )];
    let pre = x.powf(2.0 * delta + eps);
    for j in 1..=3 {
        let w = 0.5f64.powi(j);
        let base = x.powf(w / 2.0) * q.powf(0.5 - w) * (parts[4 - j as usize] as f64).powf(w);
        terms.push(NamedTerm::new(format!("sum_j{j}"), base, pre));
    }
    let q0 = parts[0] as f64;
    terms.push(NamedTerm::new(
        "q0_term",
        x.powf(1.0 / 16.0) * q.powf(3.0 / 8.0) * q0.powf(1.0 / 16.0),
        pre,
    ));
    terms.push(NamedTerm::new("tail", q.sqrt() * q0.powf(-1.0 / 16.0), pre));
    BoundTerms::new(eps, terms)
}

/// Right-hand side of the divisor-function bound for `q = q_0 q_1 q_2 q_3`.
pub fn divisorthm_rhs(x: u64, split: &ModulusSplit, delta: f64, eps: f64) -> Result<BoundReport> {
    check_eps(eps)?;
    if !(delta > 0.0 && delta < 1.0 / 12.0) {
        return Err(Error::domain(format!(
            "delta = {delta} must lie in (0, 1/12)"
        )));
    }
    if split.parts().len() != 4 {
        return Err(Error::domain(format!(
            "need four parts q0..q3, got {}",
            split.parts().len()
        )));
    }
    let q = split.modulus();
    if x < q {
        return Err(Error::domain(format!("need x >= q, got x = {x}, q = {q}")));
    }
    let parts = split.parts();
    Ok(BoundReport {
        parameters: BoundParameters {
            x: Some(x),
            n: None,
            q,
            split: parts.to_vec(),
            delta: Some(delta),
            eps,
        },
        at_zero: divisor_terms(x as f64, parts, delta, 0.0),
        at_eps: divisor_terms(x as f64, parts, delta, eps),
        computed: None,
        ratio: None,
    })
}

/// `(Q_0, Q_1, Q_2, Q_3)`, whose product is `q`.
pub fn target_sizes(x: u64, q: u64) -> Result<[f64; 4]> {
    if x == 0 || q == 0 {
        return Err(Error::domain("x and q must be positive"));
    }
    let (x, q) = (x as f64, q as f64);
    Ok([
        q.powf(-2.0 / 15.0) * x.powf(1.0 / 3.0),
        q.powf(-1.0 / 15.0) * x.powf(1.0 / 6.0),
        q.powf(7.0 / 15.0) * x.powf(-1.0 / 6.0),
        q.powf(11.0 / 15.0) * x.powf(-1.0 / 3.0),
    ])
}

/// `246 ϖ + 18 η < 1`, evaluated in double precision.
pub fn admissible(varpi: f64, eta: f64) -> bool {
    246.0 * varpi + 18.0 * eta < 1.0
}

/// Windows around the target sizes, widened by powers of `x^η`.
pub fn standard_windows(x: u64, q: u64, eta: f64) -> Result<WindowSpec> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain(format!("eta = {eta} must be positive")));
    }
    let [q0, q1, q2, q3] = target_sizes(x, q)?;
    let xe = |k: f64| (x as f64).powf(k * eta / 5.0);
    WindowSpec::new([
        (q0 * xe(-7.0), q0 * xe(8.0)),
        (q1 * xe(-1.0), q1 * xe(4.0)),
        (q2 * xe(-3.0), q2 * xe(2.0)),
        (q3 * xe(-4.0), q3 * xe(1.0)),
    ])
}

/// Outcome of a window factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowFit {
    Split(ModulusSplit),
    Infeasible,
}

impl WindowFit {
    pub fn split(&self) -> Option<&ModulusSplit> {
        match self {
            WindowFit::Split(s) => Some(s),
            WindowFit::Infeasible => None,
        }
    }
}

/// Relative tolerance under which two objective values count as tied.
pub const OBJECTIVE_TIE_TOL: f64 = 1e-12;

/// True when `(obj, parts)` beats the incumbent under the centering
/// objective with lexicographic tie-breaking.
pub fn improves(obj: f64, parts: &[u64; 4], best: Option<(f64, [u64; 4])>) -> bool {
    match best {
        None => true,
        Some((b, bp)) => {
            let tol = OBJECTIVE_TIE_TOL * b.abs().max(1.0);
            obj < b - tol || (obj <= b + tol && parts < &bp)
        }
    }
}

/// Above this many primes the search prunes on window bounds.
pub const EXHAUSTIVE_PRIME_LIMIT: usize = 12;

struct Search<'a> {
    primes: Vec<u64>,
    /// `suffix[i]` = product of `primes[i..]`.
    suffix: Vec<f64>,
    windows: &'a WindowSpec,
    centers: [f64; 4],
    prune: bool,
    best: Option<(f64, [u64; 4])>,
}

impl Search<'_> {
    fn lower_bound(&self, parts: &[u64; 4], idx: usize) -> f64 {
        let rest = self.suffix[idx].ln();
        parts
            .iter()
            .zip(&self.centers)
            .map(|(&p, &c)| {
                let lo = (p as f64).ln();
                let hi = lo + rest;
                if c < lo {
                    lo - c
                } else if c > hi {
                    c - hi
                } else {
                    0.0
                }
            })
            .sum()
    }

    fn visit(&mut self, parts: &mut [u64; 4], idx: usize) {
        if self.prune {
            for (j, &(lo, hi)) in self.windows.windows().iter().enumerate() {
                let p = parts[j] as f64;
                if p > hi || p * self.suffix[idx] < lo {
                    return;
                }
            }
            if let Some((b, _)) = self.best {
                if self.lower_bound(parts, idx) > b + OBJECTIVE_TIE_TOL * b.abs().max(1.0) {
                    return;
                }
            }
        }
        if idx == self.primes.len() {
            if self.windows.contains(parts) {
                let obj = self.windows.objective(parts);
                if improves(obj, parts, self.best) {
                    self.best = Some((obj, *parts));
                }
            }
            return;
        }
        let p = self.primes[idx];
        for j in 0..4 {
            parts[j] *= p;
            self.visit(parts, idx + 1);
            parts[j] /= p;
        }
    }
}

/// Assigns the primes of a squarefree `q` to four parts lying in `windows`,
/// minimizing the centering objective; ties go to the lexicographically
/// smallest `(q_0, q_1, q_2, q_3)`.
pub fn factorize_to_windows(q: &FactoredInteger, windows: &WindowSpec) -> Result<WindowFit> {
    if !q.is_squarefree() {
        return Err(Error::NotSquarefree(q.value()));
    }
    let mut primes: Vec<u64> = q.primes().collect();
    primes.sort_unstable_by(|a, b| b.cmp(a));
    let mut suffix = vec![1.0f64; primes.len() + 1];
    for i in (0..primes.len()).rev() {
        suffix[i] = suffix[i + 1] * primes[i] as f64;
    }
    let centers = windows.windows().map(|(lo, hi)| 0.5 * (lo.ln() + hi.ln()));
    let mut search = Search {
        prune: primes.len() > EXHAUSTIVE_PRIME_LIMIT,
        primes,
        suffix,
        windows,
        centers,
        best: None,
    };
    search.visit(&mut [1; 4], 0);
    Ok(match search.best {
        Some((_, parts)) => WindowFit::Split(ModulusSplit::new(parts.to_vec())?),
        None => WindowFit::Infeasible,
    })
}

/// Least-squares line through `(ln scale, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of the log residuals.
    pub residual: f64,
}

pub fn exponent_fit(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 2 {
        return Err(Error::domain("need at least two points"));
    }
    if let Some(&(s, v)) = points
        .iter()
        .find(|&&(s, v)| !(s > 0.0 && v > 0.0 && s.is_finite() && v.is_finite()))
    {
        return Err(Error::domain(format!("point ({s}, {v}) is not positive")));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(s, v)| (s.ln(), v.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("scales must not all coincide"));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = logs
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    Ok(ExponentFit {
        slope,
        intercept,
        residual: (rss / n).sqrt(),
    })
}
