//! Samples and plug-in moments of the empirical distribution.
//!
//! Every moment here uses divisor `n`. The correction machinery expands
//! the expectation of a functional evaluated at the empirical distribution,
//! so an `n - 1` divisor would shift every coefficient.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{binomial, CompensatedSum};

/// Observations of a `d`-dimensional random vector, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    data: Vec<f64>,
    dim: usize,
}

impl Sample {
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::from_flat(values, 1)
    }

    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("sample dimension must be at least 1");
        }
        if data.is_empty() {
            return Err(Error::InvalidSample("sample is empty".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidSample(format!(
                "{} values do not split into rows of dimension {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "non-finite value in observation {}",
                pos / dim + 1
            )));
        }
        Ok(Self { data, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidSample("rows have differing dimensions".into()));
        }
        Self::from_flat(rows.concat(), dim.max(1))
    }

    /// Parses whitespace- or comma-delimited numeric text, one observation
    /// per line. Blank lines and lines starting with `#` are skipped, and a
    /// non-numeric first line is taken as a header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut seen_content = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if !seen_content => {}
                Err(_) => {
                    return Err(Error::InvalidSample(format!(
                        "line {}: cannot parse {line:?}",
                        lineno + 1
                    )))
                }
            }
            seen_content = true;
        }
        if rows.is_empty() {
            return Err(Error::InvalidSample("no observations found".into()));
        }
        Self::from_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// The raw values of a univariate sample.
    pub fn values(&self) -> Result<&[f64]> {
        if self.dim != 1 {
            return invalid(format!("expected a univariate sample, got dimension {}", self.dim));
        }
        Ok(&self.data)
    }

    pub fn column(&self, j: usize) -> Result<Vec<f64>> {
        if j >= self.dim {
            return invalid(format!("column {j} out of range for dimension {}", self.dim));
        }
        Ok(self.rows().map(|r| r[j]).collect())
    }
}

/// Several independent samples with their size weights `lambda_a = n / n_a`,
/// where `n` is the smallest sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSample {
    samples: Vec<Sample>,
    lambdas: Vec<f64>,
}

impl MultiSample {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if samples.is_empty() {
            return invalid("a multisample needs at least one sample");
        }
        let n = samples.iter().map(Sample::n).min().unwrap_or(1);
        let lambdas = samples.iter().map(|s| n as f64 / s.n() as f64).collect();
        Ok(Self { samples, lambdas })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// The smallest sample size.
    pub fn n(&self) -> usize {
        self.samples.iter().map(Sample::n).min().unwrap_or(0)
    }
}

/// Mean and central moments `mu_0..=mu_R` of a univariate distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    mean: f64,
    mu: Vec<f64>,
}

pub const MAX_MOMENT_ORDER: usize = 64;

impl MomentSet {
    /// Builds a moment set from the mean and `[mu_2, mu_3, ..., mu_R]`.
    pub fn new(mean: f64, central_from_two: &[f64]) -> Result<Self> {
        if central_from_two.is_empty() {
            return invalid("at least mu_2 is required");
        }
        let mut mu = vec![1.0, 0.0];
        mu.extend_from_slice(central_from_two);
        let set = Self::from_vec(mean, mu)?;
        for (r, &m) in set.mu.iter().enumerate().skip(2) {
            if r % 2 == 0 && m < 0.0 {
                return invalid(format!("even central moment mu_{r} = {m} is negative"));
            }
        }
        Ok(set)
    }

    fn from_vec(mean: f64, mu: Vec<f64>) -> Result<Self> {
        if mu.len() - 1 > MAX_MOMENT_ORDER {
            return invalid(format!("moment order above {MAX_MOMENT_ORDER}"));
        }
        if !mean.is_finite() || mu.iter().any(|m| !m.is_finite()) {
            return invalid("moments must be finite");
        }
        Ok(Self { mean, mu })
    }

    /// Plug-in moments of a discrete law with non-negative weights summing to one.
    pub fn from_weighted(values: &[f64], weights: &[f64], order: usize) -> Result<Self> {
        if order < 2 {
            return invalid("moment order must be at least 2");
        }
        if values.is_empty() || values.len() != weights.len() {
            return invalid("values and weights must be non-empty and of equal length");
        }
        let mean = values
            .iter()
            .zip(weights)
            .map(|(x, w)| x * w)
            .collect::<CompensatedSum>()
            .value();
        let mut acc = vec![CompensatedSum::new(); order + 1];
        for (x, w) in values.iter().zip(weights) {
            let h = x - mean;
            let mut p = *w;
            for a in acc.iter_mut().take(order + 1).skip(1) {
                p *= h;
                a.add(p);
            }
        }
        let mut mu: Vec<f64> = acc.iter().map(CompensatedSum::value).collect();
        mu[0] = 1.0;
        mu[1] = 0.0;
        Self::from_vec(mean, mu)
    }

    /// Moments from the mean and raw moments `E X^k`, `k = 0..=R`.
    pub fn from_raw(raw: &[f64]) -> Result<Self> {
        if raw.len() < 3 {
            return invalid("raw moments through order 2 are required");
        }
        let m = raw[1] / raw[0];
        let mut mu = vec![0.0; raw.len()];
        for (r, slot) in mu.iter_mut().enumerate() {
            *slot = (0..=r)
                .map(|k| binomial(r, k) * raw[k] * (-m).powi((r - k) as i32))
                .sum();
        }
        mu[0] = 1.0;
        mu[1] = 0.0;
        Self::from_vec(m, mu)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn max_order(&self) -> usize {
        self.mu.len() - 1
    }

    pub fn require(&self, order: usize) -> Result<()> {
        if order > self.max_order() {
            return invalid(format!(
                "moments through order {order} required, only {} available",
                self.max_order()
            ));
        }
        Ok(())
    }

    pub fn mu(&self, r: usize) -> Result<f64> {
        self.require(r)?;
        Ok(self.mu[r])
    }

    /// `mu_r` for an order already checked with [`MomentSet::require`];
    /// negative orders read as zero so closed forms can index freely.
    pub(crate) fn at(&self, r: i64) -> f64 {
        if r < 0 {
            0.0
        } else {
            self.mu[r as usize]
        }
    }

    pub fn central(&self) -> &[f64] {
        &self.mu
    }

    /// Standardized moment `beta_r = mu_r / mu_2^{r/2}`.
    pub fn beta(&self, r: usize) -> Result<f64> {
        let m2 = self.mu(2)?;
        if m2 <= 0.0 {
            return Err(Error::Degenerate("beta_r needs mu_2 > 0".into()));
        }
        Ok(self.mu(r)? / m2.powf(r as f64 / 2.0))
    }

    /// Raw moments `E X^k` for `k = 0..=R`.
    pub fn raw(&self) -> Vec<f64> {
        (0..self.mu.len())
            .map(|r| {
                (0..=r)
                    .map(|k| binomial(r, k) * self.mu[k] * self.mean.powi((r - k) as i32))
                    .sum()
            })
            .collect()
    }

    /// Moments of `c X + b`.
    pub fn affine(&self, c: f64, b: f64) -> Self {
        let mu = self.mu.iter().enumerate().map(|(r, m)| m * c.powi(r as i32)).collect();
        Self {
            mean: c * self.mean + b,
            mu,
        }
    }
}

/// Joint central moments of a `d`-variate distribution, keyed by the sorted
/// multi-index (0-based coordinates).
#[derive(Debug, Clone, PartialEq)]
pub struct JointMomentSet {
    mean: Vec<f64>,
    max_order: usize,
    values: BTreeMap<Vec<usize>, f64>,
}

/// All non-decreasing index tuples of length `len` over `0..dim`.
pub fn sorted_indices(dim: usize, len: usize) -> Vec<Vec<usize>> {
    fn go(dim: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for j in start..dim {
            cur.push(j);
            go(dim, len, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(dim, len, 0, &mut Vec::with_capacity(len), &mut out);
    out
}

impl JointMomentSet {
    /// Builds from a generator for every sorted multi-index of order `2..=max_order`.
    pub fn from_fn(mean: Vec<f64>, max_order: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        if max_order < 2 {
            return invalid("max order must be at least 2");
        }
        if mean.is_empty() {
            return invalid("dimension must be at least 1");
        }
        let dim = mean.len();
        let mut values = BTreeMap::new();
        for len in 2..=max_order {
            for idx in sorted_indices(dim, len) {
                let v = f(&idx);
                values.insert(idx, v);
            }
        }
        Ok(Self {
            mean,
            max_order,
            values,
        })
    }

    /// Plug-in joint moments of a weighted set of points (row-major, `dim` columns).
    pub fn from_weighted(points: &[f64], dim: usize, weights: &[f64], max_order: usize) -> Result<Self> {
        if dim == 0 || points.len() != dim * weights.len() || weights.is_empty() {
            return invalid("points and weights disagree in shape");
        }
        let mean: Vec<f64> = (0..dim)
            .map(|j| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * points[i * dim + j])
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect();
        let centered: Vec<f64> = points.iter().enumerate().map(|(k, x)| x - mean[k % dim]).collect();
        Self::from_fn(mean.clone(), max_order, |idx| {
            weights
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let row = &centered[i * dim..(i + 1) * dim];
                    w * idx.iter().map(|&j| row[j]).product::<f64>()
                })
                .collect::<CompensatedSum>()
                .value()
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `mu[j_1 ... j_a]` with 0-based coordinates in any order.
    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        if let Some(&j) = idx.iter().find(|&&j| j >= self.dim()) {
            return invalid(format!("coordinate {j} out of range for dimension {}", self.dim()));
        }
        match idx.len() {
            0 => Ok(1.0),
            1 => Ok(0.0),
            len if len > self.max_order => invalid(format!(
                "joint moment of order {len} requested, max order is {}",
                self.max_order
            )),
            _ => {
                let mut key = idx.to_vec();
                key.sort_unstable();
                Ok(self.values[&key])
            }
        }
    }
}

/// Plug-in mean and central moments `mu_2..=mu_R` of a univariate sample.
pub fn central_moments(sample: &Sample, order: usize) -> Result<MomentSet> {
    let xs = sample.values()?;
    central_moments_of(xs, order)
}

/// [`central_moments`] on a bare slice.
pub fn central_moments_of(xs: &[f64], order: usize) -> Result<MomentSet> {
    if order < 2 {
        return invalid("moment order must be at least 2");
    }
    if xs.is_empty() {
        return Err(Error::InvalidSample("sample is empty".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n;
    let mut acc = vec![CompensatedSum::new(); order + 1];
    for &x in xs {
        let h = x - mean;
        let mut p = h;
        for a in acc.iter_mut().skip(2) {
            p *= h;
            a.add(p);
        }
    }
    let mut mu: Vec<f64> = acc.iter().map(|a| a.value() / n).collect();
    mu[0] = 1.0;
    mu[1] = 0.0;
    MomentSet::from_vec(mean, mu)
}

/// Plug-in joint central moments of a `d`-variate sample.
pub fn joint_central_moments(sample: &Sample, max_order: usize) -> Result<JointMomentSet> {
    let n = sample.n();
    let w = vec![1.0 / n as f64; n];
    JointMomentSet::from_weighted(&sample.data, sample.dim, &w, max_order)
}

/// Fraction of observations for which `event` holds.
pub fn empirical_probability(sample: &Sample, event: impl Fn(&[f64]) -> bool) -> f64 {
    let hits = sample.rows().filter(|r| event(r)).count();
    hits as f64 / sample.n() as f64
}
