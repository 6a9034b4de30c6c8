//! Return periods, conditional means and exceedance laws.

use crate::empirical::Sample;
use crate::error::{invalid, Result};
use crate::numeric::falling;

/// Correction terms `S_1..S_3` of `1/p` for a Bernoulli frequency.
pub fn return_period_terms(p: f64) -> [f64; 3] {
    let r = 1.0 / p;
    [r - r * r, -r + r.powi(3), 2.0 * r + r * r - 2.0 * r.powi(3) - r.powi(4)]
}

/// Estimate of `1/p` from the empirical frequency `p_hat` of `n` trials.
///
/// Returns `1/l` when `p_hat <= l`.
pub fn return_period(p_hat: f64, n: usize, l: f64) -> Result<f64> {
    if !(l > 0.0 && l < 1.0) {
        return invalid(format!("lower bound l = {l} must lie in (0, 1)"));
    }
    if !(0.0..=1.0).contains(&p_hat) {
        return invalid(format!("p_hat = {p_hat} is not a probability"));
    }
    if n < 4 {
        return invalid("return period estimate needs n >= 4");
    }
    if p_hat <= l {
        return Ok(1.0 / l);
    }
    let nm1 = n as f64 - 1.0;
    let s = return_period_terms(p_hat);
    Ok(1.0 / p_hat + (1..=3).map(|i| s[i - 1] / falling(nm1, i as u32)).sum::<f64>())
}

/// Plug-in and corrected estimates of `E[r(X) | X in A]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalEstimate {
    pub p_hat: f64,
    pub plug_in: f64,
    pub corrected: f64,
}

/// `mu_1/p` with `mu_1 = E r(X) I(X in A)` and `p = P(X in A)`, from the
/// sample statistics alone. `empty` is returned when `p_hat = 0`.
pub fn conditional_mean_from(mu1: f64, p_hat: f64, n: usize, empty: f64) -> Result<ConditionalEstimate> {
    if n < 4 {
        return invalid("conditional mean estimate needs n >= 4");
    }
    if p_hat == 0.0 {
        return Ok(ConditionalEstimate {
            p_hat,
            plug_in: empty,
            corrected: empty,
        });
    }
    let p = p_hat;
    let q = 1.0 - p;
    let nm1 = n as f64 - 1.0;
    let factor = 1.0 - q * q / p / nm1
        + q.powi(3) / (p * p) / falling(nm1, 2)
        + q.powi(3) * (2.0 * p - 1.0) / p.powi(3) / falling(nm1, 3);
    Ok(ConditionalEstimate {
        p_hat,
        plug_in: mu1 / p,
        corrected: mu1 / p * factor,
    })
}

pub fn conditional_mean(
    sample: &Sample,
    region: impl Fn(&[f64]) -> bool,
    payoff: impl Fn(&[f64]) -> f64,
    empty: f64,
) -> Result<ConditionalEstimate> {
    let n = sample.n();
    let mut hits = 0usize;
    let mut total = 0.0;
    for row in sample.rows() {
        if region(row) {
            hits += 1;
            total += payoff(row);
        }
    }
    conditional_mean_from(total / n as f64, hits as f64 / n as f64, n, empty)
}

/// `F_u(x) = P(X - u < x | X > u)` for a univariate sample.
pub fn exceedance_cdf(sample: &Sample, u: f64, x: f64, empty: f64) -> Result<ConditionalEstimate> {
    sample.values()?;
    conditional_mean(sample, |y| y[0] > u, |y| if y[0] < x + u { 1.0 } else { 0.0 }, empty)
}

/// Mean of the exceedance law, `E[X - u | X > u]`.
pub fn mean_exceedance(sample: &Sample, u: f64, empty: f64) -> Result<ConditionalEstimate> {
    sample.values()?;
    conditional_mean(sample, |y| y[0] > u, |y| (y[0] - u).max(0.0), empty)
}

/// First derivative of `T(F) = S(F_u)` at `x > u`, given the first
/// derivative `s_derivative` of `S` at `F_u` and the tail mass `1 - F(u)`.
pub fn exceedance_derivative(s_derivative: impl Fn(f64) -> f64, x: f64, u: f64, tail: f64) -> Result<f64> {
    if !(tail > 0.0) {
        return invalid("tail probability must be positive");
    }
    Ok(s_derivative(x - u) / tail)
}
