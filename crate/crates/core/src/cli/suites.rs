//! Lemma-check suites over the `vdc_lab` grids.

use std::time::Instant;

use crate::vdc_lab::grids::{self, sizes, GridSize, COMPLETEEXP_PINNED, ONEDIFF_PINNED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Weil,
    /// Twisted multiplicativity: CRT product against direct summation.
    Crt,
    Completion,
    Vanishing,
    ProductSums,
    Onediff,
    All,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub lines: Vec<String>,
    pub passed: bool,
}

impl SuiteReport {
    fn merge(mut self, other: SuiteReport) -> Self {
        self.lines.extend(other.lines);
        self.passed &= other.passed;
        self
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn weil(size: GridSize) -> SuiteReport {
    let s = grids::weil_grid(sizes::weil_p_max(size));
    SuiteReport {
        lines: vec![format!(
            "weil: {} max |S|/(2√p) = {:.12} over p ≤ {} ({} pairs), max |im| = {:.3e}, {} violations",
            verdict(s.passed()),
            s.max_ratio,
            s.p_max,
            s.pairs,
            s.max_abs_im,
            s.violations
        )],
        passed: s.passed(),
    }
}

fn crt(size: GridSize) -> SuiteReport {
    let q_max = sizes::crt_q_max(size);
    let s = grids::crt_grid(q_max);
    SuiteReport {
        lines: vec![format!(
            "crt: {} max deviation {:.3e} (max err {:.3e}) over {} split evaluations, squarefree q ≤ {q_max}, {} violations",
            verdict(s.passed()),
            s.max_deviation,
            s.max_err,
            s.checks,
            s.violations
        )],
        passed: s.passed(),
    }
}

fn completion(size: GridSize) -> SuiteReport {
    let q_max = sizes::completion_q_max(size);
    let s = grids::completion_grid(q_max, sizes::COMPLETION_INTERVALS);
    SuiteReport {
        lines: vec![format!(
            "completion: {} max deviation {:.3e} (max err {:.3e}) over {} checks, q ≤ {q_max}, {} intervals per q, {} violations",
            verdict(s.passed()),
            s.max_deviation,
            s.max_err,
            s.checks,
            sizes::COMPLETION_INTERVALS,
            s.violations
        )],
        passed: s.passed(),
    }
}

fn vanishing(size: GridSize) -> SuiteReport {
    let (primes, l_max) = sizes::vanishing_primes(size);
    let s = grids::vanishing_grid(&primes, l_max);
    let list: Vec<String> = primes.iter().map(u64::to_string).collect();
    let mut lines = vec![format!(
        "vanishing: {} {} counterexamples, p ∈ {{{}}}, l ≤ {l_max} ({} vectors)",
        verdict(s.passed()),
        s.counterexamples.len(),
        list.join(","),
        s.vectors
    )];
    lines.extend(
        s.counterexamples
            .iter()
            .take(10)
            .map(|(p, h)| format!("  counterexample p={p} h={h:?}")),
    );
    SuiteReport {
        lines,
        passed: s.passed(),
    }
}

fn product_sums(size: GridSize) -> SuiteReport {
    let (p_max, q_max) = sizes::orthogonality(size);
    let o = grids::orthogonality_grid(p_max, q_max);
    let m = grids::product_magnitude_grid(sizes::product_p_max(size), &COMPLETEEXP_PINNED);
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|r| format!("{r:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut lines = vec![
        format!(
            "product-sums: {} orthogonality over p ≤ {p_max} ({} rows): max |Σ S| = {:.3e}, max rel. dev. of Σ S² = {:.3e}",
            verdict(o.violations == 0),
            o.rows,
            o.max_linear,
            o.max_quadratic_rel
        ),
        format!(
            "product-sums: {} CRT route vs direct, squarefree q ≤ {q_max}: max deviation {:.3e} over {} checks",
            verdict(o.squarefree.passed()),
            o.squarefree.max_deviation,
            o.squarefree.checks
        ),
        format!(
            "product-sums: {} magnitude grid p ≤ {} ({} cells): generic max by j = [{}], pinned [{}]",
            verdict(m.pin_violations.is_empty()),
            m.p_max,
            m.cells,
            fmt(&m.generic_max),
            fmt(&COMPLETEEXP_PINNED)
        ),
        format!("product-sums: b ≢ 0 generic max by j = [{}] (measured, not certified)", fmt(&m.generic_b_nonzero_max)),
        format!(
            "product-sums: {} even case max by j = [{}], cap 2^j, {} cap violations",
            verdict(m.cap_violations == 0),
            fmt(&m.even_max),
            m.cap_violations
        ),
    ];
    if !m.pin_violations.is_empty() {
        lines.push(format!(
            "product-sums: pinned constant exceeded at j ∈ {:?}",
            m.pin_violations
        ));
    }
    SuiteReport {
        lines,
        passed: o.passed() && m.passed(),
    }
}

fn onediff(size: GridSize) -> SuiteReport {
    let (q_max, k_max) = sizes::onediff(size);
    let s = grids::onediff_grid(q_max, k_max, ONEDIFF_PINNED);
    SuiteReport {
        lines: vec![format!(
            "onediff: {} max |T|²/rhs_core = {:.6} (pinned {ONEDIFF_PINNED}) over {} cells, q0 q1 ≤ {q_max}, K ≤ {k_max}, at (a, q0, q1, M, K, s) = {:?}",
            verdict(s.passed()),
            s.max_ratio,
            s.cells,
            s.argmax
        )],
        passed: s.passed(),
    }
}

pub fn run_suite(suite: Suite, size: GridSize) -> SuiteReport {
    let start = Instant::now();
    let report = match suite {
        Suite::Weil => weil(size),
        Suite::Crt => crt(size),
        Suite::Completion => completion(size),
        Suite::Vanishing => vanishing(size),
        Suite::ProductSums => product_sums(size),
        Suite::Onediff => onediff(size),
        Suite::All => [
            Suite::Weil,
            Suite::Crt,
            Suite::Completion,
            Suite::Vanishing,
            Suite::ProductSums,
            Suite::Onediff,
        ]
        .into_iter()
        .map(|s| run_suite(s, size))
        .reduce(SuiteReport::merge)
        .expect("non-empty"),
    };
    let mut report = report;
    if suite != Suite::All {
        report
            .lines
            .push(format!("  ({:.1} s)", start.elapsed().as_secs_f64()));
    }
    report
}
