//! Divisor sums in arithmetic progressions and short Kloosterman sums,
//! computed exactly at desk scale.
//!
//! - [`arith`]: modular arithmetic, factorization, smooth squarefree moduli.
//! - [`kloosterman`]: complete and incomplete Kloosterman sums with error bounds.
//! - [`divisor_ap`]: `D(x, q, a)`, `D(x, q)` and `E(x, q, a)` by two algorithms.
//! - [`vdc_lab`]: completion, differencing and product-sum machinery plus lemma grids.
//! - [`bounds_opt`]: bound expressions, target sizes and window factorizations.
//! - [`cli`]: the `apdiv` command-line front end.

pub mod arith;
pub mod bounds_opt;
pub mod cli;
pub mod divisor_ap;
pub mod error;
pub mod kloosterman;
pub mod vdc_lab;

pub use error::{Error, Result};
