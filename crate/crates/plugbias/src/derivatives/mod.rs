//! Functional derivatives: central moments, integrated brackets, the chain
//! rule for functions of statistics, and a numeric Gateaux check.

mod brackets;
mod central;
mod chain;
mod gateaux;
mod poly;
mod table;

pub use brackets::{moment_pair_brackets, Bracket};
pub use central::{appendix_d_value, mu_r_bracket, mu_r_derivative};
pub use chain::{chain_bundle, chain_core_bundle};
pub use gateaux::gateaux_numeric;
pub use poly::{CenteredPoly, SMoments, Stat, StatMoments, MAX_LETTERS};
pub use table::{PartialDerivativeTable, MAX_PARTIAL_ORDER};
