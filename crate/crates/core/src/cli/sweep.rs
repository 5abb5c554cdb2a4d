//! Grid sweeps of `E(x, q, a)` against the divisor bound.

use std::time::Instant;

use num_traits::{CheckedAdd, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{QSource, Residues, SweepConfig};
use crate::arith::{factorize, gcd, smooth_squarefree_moduli, SmoothnessSpec};
use crate::bounds_opt::{
    divisorthm_rhs, exponent_fit, factorize_to_windows, standard_windows, target_sizes,
    ExponentFit, WindowFit,
};
use crate::divisor_ap::{
    error_term, rational_to_f64, rational_to_string, ApQuery, Rational, TauTable, MAX_SIEVE_X,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: u64,
    pub q: u64,
    pub a: i64,
    /// `E(x, q, a)` as `"num/den"`.
    pub e_exact: Option<String>,
    pub abs_e: Option<f64>,
    /// `q |E| / x`.
    pub scaled_e: Option<f64>,
    /// Divisor bound at `ε = 0`; absent without a window split.
    pub bound_total: Option<f64>,
    pub ratio: Option<f64>,
    pub split: Option<[u64; 4]>,
    pub targets: [f64; 4],
    pub runtime_ms: Option<u64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub cells: usize,
    pub infeasible_cells: usize,
    pub error_rows: usize,
    pub max_ratio: Option<f64>,
    /// `(x, q, a)` attaining `max_ratio`.
    pub max_ratio_at: Option<(u64, u64, i64)>,
    /// `max_{q, a} q |E| / x` for each `x`.
    pub max_scaled_by_x: Vec<(u64, f64)>,
    /// Fit of `max q |E| / x` against `x`; needs two distinct `x` with non-zero maxima.
    pub exponent_fit: Option<ExponentFit>,
    /// `Σ E` over all rows, when it fits in 128-bit rationals.
    pub sum_e: Option<String>,
}

impl SweepSummary {
    pub fn line(&self) -> String {
        let fit = match &self.exponent_fit {
            Some(f) => format!("slope={:.6} residual={:.3e}", f.slope, f.residual),
            None => "n/a".to_string(),
        };
        format!(
            "rows={} cells={} infeasible={} errors={} max_ratio={} sum_E={} fit[max q|E|/x ~ x^s]: {}",
            self.rows,
            self.cells,
            self.infeasible_cells,
            self.error_rows,
            self.max_ratio.map(|r| format!("{r:.6e}")).unwrap_or_else(|| "n/a".into()),
            self.sum_e.as_deref().unwrap_or("overflow"),
            fit,
        )
    }
}

/// Moduli visited for a given `x`, ascending.
pub fn moduli_for(config: &SweepConfig, x: u64) -> Result<Vec<u64>> {
    match &config.q_source {
        QSource::Explicit(qs) => {
            let mut qs = qs.clone();
            qs.sort_unstable();
            qs.dedup();
            Ok(qs)
        }
        QSource::Smooth { lo_exp, hi_exp } => {
            let lo = ((x as f64).powf(*lo_exp).ceil() as u64).max(1);
            let hi = (x as f64).powf(*hi_exp).floor() as u64;
            if lo > hi {
                return Ok(Vec::new());
            }
            let spec = SmoothnessSpec::from_exponent(x, config.eta)?;
            Ok(smooth_squarefree_moduli(lo, hi, spec)?
                .iter()
                .map(|f| f.value())
                .collect())
        }
    }
}

fn residues_for(config: &SweepConfig, q: u64, cell: usize) -> Vec<i64> {
    let units: Vec<i64> = if q == 1 {
        vec![0]
    } else {
        (1..q)
            .filter(|&a| gcd(a, q) == 1)
            .map(|a| a as i64)
            .collect()
    };
    match config.residues {
        Residues::All => units,
        Residues::Sample { count } if count >= units.len() => units,
        Residues::Sample { count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ cell as u64);
            let mut picked: Vec<i64> = units.choose_multiple(&mut rng, count).copied().collect();
            picked.sort_unstable();
            picked
        }
    }
}

struct CellSetup {
    split: Option<[u64; 4]>,
    bound_total: Option<f64>,
    targets: [f64; 4],
    note: Option<String>,
    infeasible: bool,
}

fn setup_cell(config: &SweepConfig, x: u64, q: u64) -> Result<CellSetup> {
    let targets = target_sizes(x, q)?;
    let f = factorize(q)?;
    if !f.is_squarefree() {
        return Ok(CellSetup {
            split: None,
            bound_total: None,
            targets,
            note: Some(format!("{q} is not squarefree; no window split")),
            infeasible: false,
        });
    }
    let windows = standard_windows(x, q, config.eta)?;
    let fit = factorize_to_windows(&f, &windows)?;
    let (split, infeasible) = match &fit {
        WindowFit::Split(s) => {
            let p = s.parts();
            (Some([p[0], p[1], p[2], p[3]]), false)
        }
        WindowFit::Infeasible => (None, true),
    };
    let bound_total = match (&fit, x >= q) {
        (WindowFit::Split(s), true) => Some(divisorthm_rhs(x, s, config.delta, 0.0)?.bound_total()),
        _ => None,
    };
    Ok(CellSetup {
        split,
        bound_total,
        targets,
        note: None,
        infeasible,
    })
}

fn run_cell(
    config: &SweepConfig,
    table: Option<&TauTable>,
    x: u64,
    q: u64,
    cell: usize,
) -> (Vec<SweepRow>, bool) {
    let start = Instant::now();
    let residues = residues_for(config, q, cell);
    let setup = setup_cell(config, x, q);
    let (setup, cell_error) = match setup {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let targets = setup.as_ref().map(|s| s.targets).unwrap_or([f64::NAN; 4]);
    let sums = table.map(|t| (t.all_progression_sums(q), t.main_term(q)));
    let mut rows = Vec::with_capacity(residues.len());
    for &a in &residues {
        let e = match &sums {
            Some((d, Ok(main))) => Ok(Rational::from_integer(d[a as usize] as i128) - main),
            Some((_, Err(err))) => Err(err.clone()),
            None => ApQuery::new(x, q, a).and_then(|query| error_term(&query)),
        };
        let mut row = SweepRow {
            x,
            q,
            a,
            e_exact: None,
            abs_e: None,
            scaled_e: None,
            bound_total: setup.as_ref().and_then(|s| s.bound_total),
            ratio: None,
            split: setup.as_ref().and_then(|s| s.split),
            targets,
            runtime_ms: None,
            error: cell_error
                .clone()
                .or_else(|| setup.as_ref().and_then(|s| s.note.clone())),
        };
        match e {
            Ok(e) => {
                let abs = rational_to_f64(&e).abs();
                row.e_exact = Some(rational_to_string(&e));
                row.abs_e = Some(abs);
                row.scaled_e = Some(q as f64 * abs / x as f64);
                row.ratio = row.bound_total.filter(|&b| b > 0.0).map(|b| abs / b);
            }
            Err(err) => row.error = Some(err.to_string()),
        }
        rows.push(row);
    }
    if config.record_timings {
        let ms = start.elapsed().as_millis() as u64;
        rows.iter_mut().for_each(|r| r.runtime_ms = Some(ms));
    }
    (rows, setup.map(|s| s.infeasible).unwrap_or(false))
}

fn summarize(cells: usize, infeasible: usize, rows: &[SweepRow]) -> SweepSummary {
    let mut max_ratio: Option<(f64, (u64, u64, i64))> = None;
    let mut by_x: Vec<(u64, f64)> = Vec::new();
    let mut sum = Some(Rational::zero());
    for r in rows {
        if let Some(ratio) = r.ratio {
            if max_ratio.is_none_or(|(m, _)| ratio > m) {
                max_ratio = Some((ratio, (r.x, r.q, r.a)));
            }
        }
        if let Some(s) = r.scaled_e {
            match by_x.last_mut() {
                Some((x, m)) if *x == r.x => *m = m.max(s),
                _ => by_x.push((r.x, s)),
            }
        }
        if let Some(e) = &r.e_exact {
            sum = sum.and_then(|acc| {
                crate::divisor_ap::parse_rational(e)
                    .ok()
                    .and_then(|e| acc.checked_add(&e))
            });
        }
    }
    let points: Vec<(f64, f64)> = by_x
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(x, m)| (x as f64, m))
        .collect();
    SweepSummary {
        rows: rows.len(),
        cells,
        infeasible_cells: infeasible,
        error_rows: rows.iter().filter(|r| r.error.is_some()).count(),
        max_ratio: max_ratio.map(|m| m.0),
        max_ratio_at: max_ratio.map(|m| m.1),
        max_scaled_by_x: by_x,
        exponent_fit: exponent_fit(&points).ok(),
        sum_e: sum.map(|s| rational_to_string(&s)),
    }
}

/// Runs a sweep on a dedicated pool of `config.parallelism` workers.
///
/// Rows come back sorted by `(x, q, a)` regardless of the number of workers.
pub fn run_sweep(config: &SweepConfig) -> Result<(Vec<SweepRow>, SweepSummary)> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| Error::domain(format!("cannot start workers: {e}")))?;
    let mut xs = config.x_values.clone();
    xs.sort_unstable();
    xs.dedup();
    let mut cells = Vec::new();
    for &x in &xs {
        for q in moduli_for(config, x)? {
            cells.push((x, q));
        }
    }
    let mut rows = Vec::new();
    let mut infeasible = 0;
    pool.install(|| {
        let mut first = 0;
        for &x in &xs {
            let count = cells[first..].iter().take_while(|c| c.0 == x).count();
            let table = if x <= MAX_SIEVE_X {
                TauTable::new(x).ok()
            } else {
                None
            };
            let out: Vec<(Vec<SweepRow>, bool)> = (first..first + count)
                .into_par_iter()
                .map(|i| run_cell(config, table.as_ref(), x, cells[i].1, i))
                .collect();
            for (r, inf) in out {
                rows.extend(r);
                infeasible += usize::from(inf);
            }
            first += count;
        }
    });
    let summary = summarize(cells.len(), infeasible, &rows);
    Ok((rows, summary))
}
