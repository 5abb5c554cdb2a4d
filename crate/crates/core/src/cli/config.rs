use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where the moduli of a sweep come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QSource {
    Explicit(Vec<u64>),
    /// Squarefree `x^eta`-smooth `q` in `[x^lo_exp, x^hi_exp]`, per `x`.
    Smooth {
        lo_exp: f64,
        hi_exp: f64,
    },
}

/// Which residues `a` are visited for each `(x, q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Residues {
    All,
    /// Up to `count` distinct units, drawn from the seeded stream of the cell.
    Sample {
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub x_values: Vec<u64>,
    pub q_source: QSource,
    #[serde(default = "default_residues")]
    pub residues: Residues,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub eps: f64,
    /// Smoothness exponent for `Smooth` sources and the window exponent for every row.
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Run-environment fields (`output`, `parallelism`) are read but never
    /// echoed into reports, so they cannot change report bytes.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: Format,
    #[serde(default = "default_parallelism", skip_serializing)]
    pub parallelism: usize,
    /// Fill the `runtime_ms` column. Off by default so that reports are reproducible.
    #[serde(default)]
    pub record_timings: bool,
}

fn default_residues() -> Residues {
    Residues::All
}

fn default_delta() -> f64 {
    0.05
}

fn default_eta() -> f64 {
    0.25
}

fn default_format() -> Format {
    Format::Csv
}

pub fn default_parallelism() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

impl SweepConfig {
    pub fn new(x_values: Vec<u64>, q_source: QSource) -> Self {
        Self {
            x_values,
            q_source,
            residues: default_residues(),
            seed: 0,
            delta: default_delta(),
            eps: 0.0,
            eta: default_eta(),
            output: None,
            format: default_format(),
            parallelism: default_parallelism(),
            record_timings: false,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::domain(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::domain(format!("bad config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_values.is_empty() || self.x_values.contains(&0) {
            return Err(Error::domain(
                "x_values must be a non-empty list of positive integers",
            ));
        }
        match &self.q_source {
            QSource::Explicit(qs) if qs.is_empty() || qs.contains(&0) => {
                return Err(Error::domain(
                    "explicit q list must be non-empty and positive",
                ));
            }
            QSource::Smooth { lo_exp, hi_exp } if !(0.0 <= *lo_exp && lo_exp <= hi_exp) => {
                return Err(Error::domain("smooth source needs 0 <= lo_exp <= hi_exp"));
            }
            _ => {}
        }
        if let Residues::Sample { count: 0 } = self.residues {
            return Err(Error::domain("residue sample size must be positive"));
        }
        if !(self.eta.is_finite() && self.eta > 0.0 && self.eps.is_finite() && self.eps >= 0.0) {
            return Err(Error::domain("need eta > 0 and eps >= 0"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0 / 12.0) {
            return Err(Error::domain("delta must lie in (0, 1/12)"));
        }
        if self.parallelism == 0 {
            return Err(Error::domain("parallelism must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_defaults() {
        let text = r#"{"x_values":[10000],"q_source":{"explicit":[101]},"residues":"all"}"#;
        let c: SweepConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.q_source, QSource::Explicit(vec![101]));
        assert_eq!((c.delta, c.eta, c.format), (0.05, 0.25, Format::Csv));
        c.validate().unwrap();

        let smooth = r#"{"x_values":[1000000],"q_source":{"smooth":{"lo_exp":0.6,"hi_exp":0.64}},
            "residues":{"sample":{"count":20}},"seed":7,"format":"json"}"#;
        let c: SweepConfig = serde_json::from_str(smooth).unwrap();
        assert_eq!(c.residues, Residues::Sample { count: 20 });
        let mut back: SweepConfig =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        back.parallelism = c.parallelism;
        assert_eq!(back, c);
        assert!(!serde_json::to_string(&c).unwrap().contains("parallelism"));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = SweepConfig::new(vec![], QSource::Explicit(vec![3]));
        assert!(c.validate().is_err());
        c.x_values = vec![100];
        c.delta = 0.2;
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<SweepConfig>(
            r#"{"x_values":[1],"q_source":"all","bogus":1}"#
        )
        .is_err());
    }
}
