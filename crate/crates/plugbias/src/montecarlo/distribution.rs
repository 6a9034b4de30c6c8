//! Sampling laws with closed-form central moments.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Bernoulli, Distribution as _, Exp, Gamma, Normal, StandardUniform};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma as GammaCdf, Normal as NormalCdf};

use crate::empirical::MomentSet;
use crate::error::{invalid, Error, Result};
use crate::numeric::binomial;

/// Univariate law used by the simulation harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    /// Normal with the given mean and variance.
    Normal {
        mean: f64,
        var: f64,
    },
    Exponential {
        rate: f64,
    },
    /// Gamma with unit scale.
    Gamma {
        shape: f64,
    },
    /// Uniform on `(0, 1)`.
    Uniform,
    Bernoulli {
        p: f64,
    },
    Discrete {
        atoms: Vec<f64>,
        probs: Vec<f64>,
    },
}

/// Central moments `mu_0..=mu_order` from cumulants `kappa_2..`, by
/// `mu_r = sum_k C(r-1, k-1) kappa_k mu_{r-k}`.
fn central_from_cumulants(order: usize, kappa: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut mu = vec![0.0; order + 1];
    mu[0] = 1.0;
    for r in 2..=order {
        mu[r] = (2..=r).map(|k| binomial(r - 1, k - 1) * kappa(k) * mu[r - k]).sum();
    }
    mu
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl Distribution {
    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Distribution::Normal { mean, var } => mean.is_finite() && var.is_finite() && *var > 0.0,
            Distribution::Exponential { rate } => rate.is_finite() && *rate > 0.0,
            Distribution::Gamma { shape } => shape.is_finite() && *shape > 0.0,
            Distribution::Uniform => true,
            Distribution::Bernoulli { p } => *p > 0.0 && *p < 1.0,
            Distribution::Discrete { atoms, probs } => {
                let total: f64 = probs.iter().sum();
                !atoms.is_empty()
                    && atoms.len() == probs.len()
                    && atoms.iter().all(|a| a.is_finite())
                    && probs.iter().all(|p| *p > 0.0)
                    && (total - 1.0).abs() <= 1e-12
            }
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("bad parameters for distribution {self}"))
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Normal { mean, .. } => *mean,
            Distribution::Exponential { rate } => 1.0 / rate,
            Distribution::Gamma { shape } => *shape,
            Distribution::Uniform => 0.5,
            Distribution::Bernoulli { p } => *p,
            Distribution::Discrete { atoms, probs } => atoms.iter().zip(probs).map(|(a, p)| a * p).sum(),
        }
    }

    /// Mean and central moments through `order`.
    pub fn moments(&self, order: usize) -> Result<MomentSet> {
        self.validate()?;
        if order < 2 {
            return invalid("moment order must be at least 2");
        }
        let mu = match self {
            Distribution::Normal { var, .. } => central_from_cumulants(order, |k| if k == 2 { *var } else { 0.0 }),
            Distribution::Exponential { rate } => {
                central_from_cumulants(order, |k| factorial(k - 1) / rate.powi(k as i32))
            }
            Distribution::Gamma { shape } => central_from_cumulants(order, |k| shape * factorial(k - 1)),
            Distribution::Uniform => (0..=order)
                .map(|r| {
                    if r % 2 == 0 {
                        0.5f64.powi(r as i32) / (r as f64 + 1.0)
                    } else {
                        0.0
                    }
                })
                .collect(),
            Distribution::Bernoulli { p } => {
                return MomentSet::from_weighted(&[0.0, 1.0], &[1.0 - p, *p], order);
            }
            Distribution::Discrete { atoms, probs } => return MomentSet::from_weighted(atoms, probs, order),
        };
        MomentSet::new(self.mean(), &mu[2..])
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        let stat_err = |e: statrs::distribution::NormalError| Error::InvalidArgument(e.to_string());
        Ok(match self {
            Distribution::Normal { mean, var } => NormalCdf::new(*mean, var.sqrt()).map_err(stat_err)?.cdf(x),
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Distribution::Gamma { shape } => GammaCdf::new(*shape, 1.0)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .cdf(x),
            Distribution::Uniform => x.clamp(0.0, 1.0),
            Distribution::Bernoulli { p } => {
                if x < 0.0 {
                    0.0
                } else if x < 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            Distribution::Discrete { atoms, probs } => {
                atoms.iter().zip(probs).filter(|(a, _)| **a <= x).map(|(_, p)| p).sum()
            }
        })
    }

    /// Draws `n` independent values.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let bad = |e: &dyn fmt::Display| Error::InvalidArgument(format!("{self}: {e}"));
        Ok(match self {
            Distribution::Normal { mean, var } => {
                let d = Normal::new(*mean, var.sqrt()).map_err(|e| bad(&e))?;
                d.sample_iter(rng).take(n).collect()
            }
            Distribution::Exponential { rate } => {
                let d = Exp::new(*rate).map_err(|e| bad(&e))?;
                d.sample_iter(rng).take(n).collect()
            }
            Distribution::Gamma { shape } => {
                let d = Gamma::new(*shape, 1.0).map_err(|e| bad(&e))?;
                d.sample_iter(rng).take(n).collect()
            }
            Distribution::Uniform => StandardUniform.sample_iter(rng).take(n).collect(),
            Distribution::Bernoulli { p } => {
                let d = Bernoulli::new(*p).map_err(|e| bad(&e))?;
                d.sample_iter(rng).take(n).map(|b| if b { 1.0 } else { 0.0 }).collect()
            }
            Distribution::Discrete { atoms, probs } => {
                let d = WeightedIndex::new(probs).map_err(|e| bad(&e))?;
                d.sample_iter(rng).take(n).map(|i| atoms[i]).collect()
            }
        })
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Normal { mean, var } => write!(f, "normal:{mean}:{var}"),
            Distribution::Exponential { rate } => write!(f, "exp:{rate}"),
            Distribution::Gamma { shape } => write!(f, "gamma:{shape}"),
            Distribution::Uniform => write!(f, "uniform"),
            Distribution::Bernoulli { p } => write!(f, "bernoulli:{p}"),
            Distribution::Discrete { atoms, probs } => write!(f, "discrete:{}:{}", join(atoms), join(probs)),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    /// Parses `normal:MEAN:VAR`, `exp:RATE`, `gamma:SHAPE`, `uniform`,
    /// `bernoulli:P` or `discrete:A1,A2,..:P1,P2,..`.
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad number {t:?} in distribution {s:?}")))
        };
        let list = |t: &str| -> Result<Vec<f64>> { t.split(',').map(num).collect() };
        let parts: Vec<&str> = s.trim().split(':').collect();
        let d = match parts.as_slice() {
            ["normal", m, v] => Distribution::Normal {
                mean: num(m)?,
                var: num(v)?,
            },
            ["exp", r] => Distribution::Exponential { rate: num(r)? },
            ["gamma", a] => Distribution::Gamma { shape: num(a)? },
            ["uniform"] => Distribution::Uniform,
            ["bernoulli", p] => Distribution::Bernoulli { p: num(p)? },
            ["discrete", a, p] => Distribution::Discrete {
                atoms: list(a)?,
                probs: list(p)?,
            },
            _ => return invalid(format!("unknown distribution {s:?}")),
        };
        d.validate()?;
        Ok(d)
    }
}
