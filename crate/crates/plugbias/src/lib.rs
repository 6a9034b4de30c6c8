//! Analytic bias reduction for plug-in estimators of smooth functionals.
//!
//! A functional `T(F)` estimated by `T(F_hat)` has bias expanding in powers
//! of `1/n`. Given a handful of integrated derivative moments (a
//! [`corrections::DerivativeBundle`]) this crate builds correction terms
//! whose sum removes the bias through order `n^{-3}`, at `O(n)` cost.
//!
//! * [`empirical`]: samples and plug-in moments.
//! * [`corrections`]: bias coefficients and estimate assembly.
//! * [`derivatives`]: derivative formulas for moments and the chain rule.
//! * [`functionals`]: the catalog of concrete functionals.
//! * [`covariance`]: covariance of plug-in and corrected estimates.
//! * [`montecarlo`]: simulation harness and sample-size planner.
//! * [`oracle`]: exact expectations over small discrete laws.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corrections;
pub mod covariance;
pub mod derivatives;
pub mod empirical;
mod error;
pub mod functionals;
pub mod montecarlo;
pub mod numeric;
pub mod oracle;

pub use error::{Error, Result};
