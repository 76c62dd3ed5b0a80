//! Command-line front end for the decoherence kernels: configuration parsing,
//! run dispatch, data-file output and the oracle self-test.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod selftest;

pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};
pub use run::{compare_regimes, run, Check, RunReport, Verification};
