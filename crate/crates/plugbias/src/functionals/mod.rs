//! Concrete functionals and a catalog addressable by string id.
//!
//! Each catalog entry knows how to compute its plug-in value, its
//! correction series in either family, and the variance `T(a, a)` of its
//! first derivative, from the moments of a law or of a sample.

mod events;
mod means;
mod moments;
mod multivariate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use events::{
    conditional_mean, conditional_mean_from, exceedance_cdf, exceedance_derivative, mean_exceedance, return_period,
    return_period_terms, ConditionalEstimate,
};
pub(crate) use means::for_each_tuple;
pub use means::{
    linear_ratio, mean_function, means_of_k_samples, power_of_mean, ratio_of_means, two_sample_ratio, PowerOfMean,
    RatioOfMeans, TwoSampleRatio,
};
pub use moments::{
    central_moment, central_moment_bundle, function_of_variance, function_of_variance_bundle, mean_over_sd,
    mean_over_sd_chain, moment_power_brackets, moment_product, moment_product_chain, sd_bias_ratios,
    standard_deviation, variance_power, CentralMoment, FunctionOfVariance, MeanOverSd, MomentFactor, VariancePower,
};
pub use multivariate::{
    correlation, correlation_first_derivative, multivariate_moment_ue, squared_correlation, CorrelationEstimate,
};

use crate::corrections::{
    assemble_estimate, corrections_one_sample, simpler_one_sample, CorrectionSeries, DerivativeBundle,
};
use crate::covariance::{mean_function_cov_bundle, BiasCovTerms, CovDerivativeBundle, StatFunctional};
use crate::derivatives::{PartialDerivativeTable, SMoments, Stat, StatMoments};
use crate::empirical::{central_moments_of, joint_central_moments, JointMomentSet, MomentSet, Sample};
use crate::error::{invalid, unavailable, Error, Result};

/// Which correction family to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `T_i` with `N_i(n) = n^{-i}`.
    T,
    /// `S_i` with `N_i(n) = 1/(n-1)_i`.
    S,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t" => Ok(Family::T),
            "s" => Ok(Family::S),
            _ => invalid(format!("unknown correction family {s:?} (expected t or s)")),
        }
    }
}

/// Catalog identifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionalId {
    /// `mu^p`.
    MeanPow(f64),
    /// `mu_r`.
    CentralMoment(usize),
    /// `sigma`.
    Sd,
    /// `mu / sigma`, second order only.
    MeanOverSd,
    /// `mu_3 mu_2`.
    Mu3Mu2,
    /// `mu_r^p`.
    MomentPow { r: usize, p: f64 },
    /// Ratio of the two coordinate means of a bivariate sample.
    RatioMeans,
    /// Correlation of a bivariate sample.
    Corr,
    /// Squared correlation.
    Corr2,
    /// `1/P(X <= a)`, coordinatewise for vector samples, gated at `l`
    /// (default `1/n`).
    ReturnPeriod { a: f64, l: Option<f64> },
}

fn parse_num<T: FromStr>(id: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad parameter {s:?} in functional id {id:?}")))
}

impl FromStr for FunctionalId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let id = match parts.as_slice() {
            ["mean_pow", p] => FunctionalId::MeanPow(parse_num(s, p)?),
            ["central_moment", r] => FunctionalId::CentralMoment(parse_num(s, r)?),
            ["sd"] => FunctionalId::Sd,
            ["mean_over_sd"] => FunctionalId::MeanOverSd,
            ["mu3_mu2"] => FunctionalId::Mu3Mu2,
            ["moment_pow", r, p] => FunctionalId::MomentPow {
                r: parse_num(s, r)?,
                p: parse_num(s, p)?,
            },
            ["ratio_means"] => FunctionalId::RatioMeans,
            ["corr"] => FunctionalId::Corr,
            ["corr2"] => FunctionalId::Corr2,
            ["return_period", a] => FunctionalId::ReturnPeriod {
                a: parse_num(s, a)?,
                l: None,
            },
            ["return_period", a, l] => FunctionalId::ReturnPeriod {
                a: parse_num(s, a)?,
                l: Some(parse_num(s, l)?),
            },
            _ => return invalid(format!("unknown functional id {s:?}")),
        };
        id.validate()?;
        Ok(id)
    }
}

impl fmt::Display for FunctionalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalId::MeanPow(p) => write!(f, "mean_pow:{p}"),
            FunctionalId::CentralMoment(r) => write!(f, "central_moment:{r}"),
            FunctionalId::Sd => write!(f, "sd"),
            FunctionalId::MeanOverSd => write!(f, "mean_over_sd"),
            FunctionalId::Mu3Mu2 => write!(f, "mu3_mu2"),
            FunctionalId::MomentPow { r, p } => write!(f, "moment_pow:{r}:{p}"),
            FunctionalId::RatioMeans => write!(f, "ratio_means"),
            FunctionalId::Corr => write!(f, "corr"),
            FunctionalId::Corr2 => write!(f, "corr2"),
            FunctionalId::ReturnPeriod { a, l: None } => write!(f, "return_period:{a}"),
            FunctionalId::ReturnPeriod { a, l: Some(l) } => write!(f, "return_period:{a}:{l}"),
        }
    }
}

/// Moments of a law (or of an empirical law) in the shape a functional needs.
#[derive(Debug, Clone)]
pub enum LawMoments {
    Univariate(MomentSet),
    Joint(JointMomentSet),
}

impl LawMoments {
    pub fn univariate(&self) -> Result<&MomentSet> {
        match self {
            LawMoments::Univariate(m) => Ok(m),
            LawMoments::Joint(_) => invalid("functional needs univariate moments"),
        }
    }

    pub fn joint(&self) -> Result<&JointMomentSet> {
        match self {
            LawMoments::Joint(m) => Ok(m),
            LawMoments::Univariate(_) => invalid("functional needs joint moments"),
        }
    }
}

/// Plug-in and corrected values from one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub plug_in: f64,
    pub corrected: f64,
}

impl FunctionalId {
    fn validate(&self) -> Result<()> {
        match *self {
            FunctionalId::MeanPow(p) if !p.is_finite() => invalid("exponent must be finite"),
            FunctionalId::CentralMoment(r) if !(2..=8).contains(&r) => {
                invalid(format!("central moment order {r} outside 2..=8"))
            }
            FunctionalId::MomentPow { r, p } if !(2..=8).contains(&r) || !p.is_finite() => {
                invalid("moment_pow needs 2 <= r <= 8 and a finite exponent")
            }
            FunctionalId::ReturnPeriod { a, l } => {
                if !a.is_finite() {
                    return invalid("threshold must be finite");
                }
                match l {
                    Some(l) if !(l > 0.0 && l < 1.0) => invalid("lower bound l must lie in (0, 1)"),
                    _ => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// Required number of coordinates per observation (`None`: any).
    pub fn sample_dim(&self) -> Option<usize> {
        match self {
            FunctionalId::RatioMeans | FunctionalId::Corr | FunctionalId::Corr2 => Some(2),
            FunctionalId::ReturnPeriod { .. } => None,
            _ => Some(1),
        }
    }

    /// Highest central (or joint) moment order used.
    pub fn moment_order(&self) -> usize {
        match *self {
            FunctionalId::MeanPow(_) => 4,
            FunctionalId::CentralMoment(r) => (2 * r).max(8),
            FunctionalId::Sd | FunctionalId::MeanOverSd => 8,
            FunctionalId::Mu3Mu2 => 12,
            FunctionalId::MomentPow { r, .. } => 4 * r,
            FunctionalId::RatioMeans | FunctionalId::Corr | FunctionalId::Corr2 => 4,
            FunctionalId::ReturnPeriod { .. } => 4,
        }
    }

    /// Indicator transform used by event functionals.
    fn event_indicator(&self, sample: &Sample) -> Option<Vec<f64>> {
        match *self {
            FunctionalId::ReturnPeriod { a, .. } => Some(
                sample
                    .rows()
                    .map(|x| if x.iter().all(|&v| v <= a) { 1.0 } else { 0.0 })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Plug-in moments of `sample`.
    pub fn moments_of(&self, sample: &Sample) -> Result<LawMoments> {
        if let Some(d) = self.sample_dim() {
            if sample.dim() != d {
                return invalid(format!(
                    "{self} needs {d}-dimensional observations, got {}",
                    sample.dim()
                ));
            }
        }
        if let Some(ind) = self.event_indicator(sample) {
            return Ok(LawMoments::Univariate(central_moments_of(&ind, self.moment_order())?));
        }
        match self.sample_dim() {
            Some(2) => Ok(LawMoments::Joint(joint_central_moments(sample, self.moment_order())?)),
            _ => Ok(LawMoments::Univariate(central_moments_of(
                sample.values()?,
                self.moment_order(),
            )?)),
        }
    }

    fn stats(&self) -> Option<(Vec<Stat>, Vec<f64>)> {
        match *self {
            FunctionalId::MeanPow(p) => Some((vec![Stat::Mean], vec![p])),
            FunctionalId::CentralMoment(r) => Some((vec![Stat::Central(r)], vec![1.0])),
            FunctionalId::Sd => Some((vec![Stat::Central(2)], vec![0.5])),
            FunctionalId::MeanOverSd => Some((vec![Stat::Mean, Stat::Central(2)], vec![1.0, -0.5])),
            FunctionalId::Mu3Mu2 => Some((vec![Stat::Central(3), Stat::Central(2)], vec![1.0, 1.0])),
            FunctionalId::MomentPow { r, p } => Some((vec![Stat::Central(r)], vec![p])),
            _ => None,
        }
    }

    fn power_table(&self, m: &MomentSet, order: usize) -> Result<(PartialDerivativeTable, StatMoments)> {
        let (stats, exps) = self
            .stats()
            .ok_or_else(|| Error::Unavailable(format!("{self} has no power form")))?;
        let s = StatMoments::new(stats, m.clone())?;
        let values = s.values()?;
        for (v, e) in values.iter().zip(&exps) {
            if (*v == 0.0 && (*e < 0.0 || e.fract() != 0.0)) || (*v < 0.0 && e.fract() != 0.0) {
                return Err(Error::Degenerate(format!("{self}: statistic value {v} raised to {e}")));
            }
        }
        Ok((PartialDerivativeTable::power_product(1.0, &exps, &values, order)?, s))
    }

    /// Functional value `T(F)`.
    pub fn value(&self, m: &LawMoments) -> Result<f64> {
        match self {
            FunctionalId::RatioMeans => {
                let jm = m.joint()?;
                let d = jm.mean()[1];
                if d == 0.0 {
                    return Err(Error::Degenerate("denominator mean is zero".into()));
                }
                Ok(jm.mean()[0] / d)
            }
            FunctionalId::Corr => Ok(correlation(m.joint()?)?.value),
            FunctionalId::Corr2 => Ok(squared_correlation(m.joint()?)?.value),
            FunctionalId::ReturnPeriod { .. } => {
                let p = m.univariate()?.mean();
                if p <= 0.0 {
                    return Err(Error::Degenerate("event has zero probability".into()));
                }
                Ok(1.0 / p)
            }
            _ => Ok(self.power_table(m.univariate()?, 1)?.0.value()),
        }
    }

    /// Derivative bundle through the generic route, where one exists.
    pub fn bundle(&self, m: &LawMoments) -> Result<DerivativeBundle> {
        match self {
            FunctionalId::CentralMoment(r) => central_moment_bundle(*r, m.univariate()?),
            FunctionalId::RatioMeans => linear_ratio(&[1.0, 0.0], &[0.0, 1.0], m.joint()?),
            FunctionalId::Mu3Mu2 => {
                moment_product(&[MomentFactor::new(3, 1.0), MomentFactor::new(2, 1.0)], m.univariate()?)
            }
            FunctionalId::MomentPow { r, p } => moment_product(&[MomentFactor::new(*r, *p)], m.univariate()?),
            FunctionalId::MeanPow(_) | FunctionalId::Sd | FunctionalId::MeanOverSd => {
                let (g, s) = self.power_table(m.univariate()?, 6)?;
                crate::derivatives::chain_core_bundle(&g, &s)
            }
            _ => unavailable(format!("{self} has no derivative bundle")),
        }
    }

    /// Correction series in the requested family.
    pub fn series(&self, m: &LawMoments, family: Family) -> Result<CorrectionSeries> {
        let pick = |t: CorrectionSeries, s: CorrectionSeries| match family {
            Family::T => t,
            Family::S => s,
        };
        Ok(match *self {
            FunctionalId::MeanPow(p) => {
                let r = power_of_mean(p, m.univariate()?)?;
                pick(r.t, r.s)
            }
            FunctionalId::CentralMoment(r) => {
                let c = central_moment(r, m.univariate()?)?;
                pick(c.t, c.s)
            }
            FunctionalId::Sd => {
                let v = standard_deviation(m.univariate()?)?;
                pick(v.t, v.s)
            }
            FunctionalId::MeanOverSd => {
                let s = mean_over_sd(m.univariate()?)?.s;
                pick(s.to_t_family(), s)
            }
            FunctionalId::RatioMeans => {
                let r = ratio_of_means(m.joint()?)?;
                pick(r.t, r.s)
            }
            FunctionalId::Corr | FunctionalId::Corr2 => {
                let c = if matches!(self, FunctionalId::Corr) {
                    correlation(m.joint()?)?
                } else {
                    squared_correlation(m.joint()?)?
                };
                let terms = vec![-c.t2 / 2.0];
                match family {
                    Family::T => CorrectionSeries::t_family(c.value, terms)?,
                    Family::S => CorrectionSeries::s_family(c.value, terms)?,
                }
            }
            FunctionalId::ReturnPeriod { .. } => {
                let p = m.univariate()?.mean();
                if p <= 0.0 {
                    return Err(Error::Degenerate("event has zero probability".into()));
                }
                let s = CorrectionSeries::s_family(1.0 / p, return_period_terms(p).to_vec())?;
                pick(s.to_t_family(), s)
            }
            FunctionalId::Mu3Mu2 | FunctionalId::MomentPow { .. } => {
                let b = self.bundle(m)?;
                pick(corrections_one_sample(&b)?, simpler_one_sample(&b)?)
            }
        })
    }

    /// `T(a, a) = int T_F(x)^2 dF(x)`, the asymptotic variance of `n^{1/2} T(F_hat)`.
    pub fn influence_variance(&self, m: &LawMoments) -> Result<f64> {
        match self {
            FunctionalId::RatioMeans => {
                let jm = m.joint()?;
                let g = PartialDerivativeTable::linear_ratio(&[1.0, 0.0], &[0.0, 1.0], jm.mean(), 1)?;
                let mut v = 0.0;
                for_each_tuple(2, 2, |idx| {
                    v += g.get(&idx[..1])? * g.get(&idx[1..])? * jm.get(idx)?;
                    Ok(())
                })?;
                Ok(v)
            }
            FunctionalId::Corr | FunctionalId::Corr2 => {
                let jm = m.joint()?;
                let rho = correlation(jm)?.value;
                let nu = |idx: &[usize]| -> Result<f64> {
                    let ones = idx.iter().filter(|&&i| i == 0).count() as i32;
                    let s1 = jm.get(&[0, 0])?.sqrt();
                    let s2 = jm.get(&[1, 1])?.sqrt();
                    Ok(jm.get(idx)? / (s1.powi(ones) * s2.powi(idx.len() as i32 - ones)))
                };
                let v = nu(&[0, 0, 1, 1])? - rho * (nu(&[0, 0, 0, 1])? + nu(&[0, 1, 1, 1])?)
                    + rho * rho / 4.0 * (nu(&[0, 0, 0, 0])? + 2.0 * nu(&[0, 0, 1, 1])? + nu(&[1, 1, 1, 1])?);
                Ok(if matches!(self, FunctionalId::Corr) {
                    v
                } else {
                    4.0 * rho * rho * v
                })
            }
            FunctionalId::ReturnPeriod { .. } => {
                let p = m.univariate()?.mean();
                if p <= 0.0 {
                    return Err(Error::Degenerate("event has zero probability".into()));
                }
                Ok((1.0 - p) / p.powi(3))
            }
            _ => {
                let (g, s) = self.power_table(m.univariate()?, 1)?;
                let mut v = 0.0;
                for i in 0..s.q() {
                    for j in 0..s.q() {
                        v += g.get(&[i])? * g.get(&[j])? * s.integral(&[i, j], &[&[0], &[0]])?;
                    }
                }
                Ok(v)
            }
        }
    }

    /// `T = g(S)` with polynomial statistic derivatives, for the covariance formulas.
    pub fn stat_functional(&self, m: &LawMoments) -> Result<StatFunctional> {
        if let FunctionalId::ReturnPeriod { .. } = self {
            return FunctionalId::MeanPow(-1.0).stat_functional(m);
        }
        let (g, s) = self.power_table(m.univariate()?, 3)?;
        StatFunctional::new(vec![g], s)
    }

    /// Integrated derivative products for the covariance of the estimate.
    pub fn cov_bundle(&self, m: &LawMoments) -> Result<CovDerivativeBundle> {
        match self {
            FunctionalId::RatioMeans => {
                let jm = m.joint()?;
                let g = PartialDerivativeTable::linear_ratio(&[1.0, 0.0], &[0.0, 1.0], jm.mean(), 3)?;
                mean_function_cov_bundle(&[g], jm)
            }
            FunctionalId::Corr | FunctionalId::Corr2 => unavailable(format!("{self} has no covariance bundle")),
            _ => self.stat_functional(m)?.cov_bundle(),
        }
    }

    /// Integrals for the covariance of the bias estimate.
    pub fn bias_cov_terms(&self, m: &LawMoments) -> Result<BiasCovTerms> {
        match self {
            FunctionalId::RatioMeans => {
                let jm = m.joint()?;
                let g = PartialDerivativeTable::linear_ratio(&[1.0, 0.0], &[0.0, 1.0], jm.mean(), 3)?;
                BiasCovTerms::mean_function(&[g], jm)
            }
            FunctionalId::Corr | FunctionalId::Corr2 => unavailable(format!("{self} has no bias covariance terms")),
            _ => self.stat_functional(m)?.bias_cov_terms(),
        }
    }

    /// Plug-in and order-`p` corrected estimates from a sample.
    pub fn estimate(&self, sample: &Sample, family: Family, p: usize) -> Result<Estimate> {
        let m = self.moments_of(sample)?;
        let n = sample.n();
        if let FunctionalId::ReturnPeriod { l, .. } = *self {
            let p_hat = m.univariate()?.mean();
            let l = l.unwrap_or(1.0 / n as f64);
            let gated = p_hat <= l;
            let plug_in = if p_hat > 0.0 { 1.0 / p_hat } else { 1.0 / l };
            let corrected = if gated {
                1.0 / l
            } else {
                assemble_estimate(&self.series(&m, family)?, n, p)?
            };
            return Ok(Estimate { plug_in, corrected });
        }
        let series = self.series(&m, family)?;
        Ok(Estimate {
            plug_in: series.base(),
            corrected: assemble_estimate(&series, n, p)?,
        })
    }
}
