use std::collections::BTreeMap;

use crate::empirical::sorted_indices;
use crate::error::{invalid, unavailable, Result};
use crate::numeric::falling;

/// Partial derivatives `g_{i_1 ... i_k}` of an outer function `g(s)`
/// evaluated at `s = S(F)`, for `k` up to a maximum order.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialDerivativeTable {
    q: usize,
    order: usize,
    value: f64,
    entries: BTreeMap<Vec<usize>, f64>,
}

pub const MAX_PARTIAL_ORDER: usize = 6;

impl PartialDerivativeTable {
    /// Fills every sorted index tuple of length `1..=order` from `f`.
    pub fn from_fn(q: usize, order: usize, value: f64, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        if q == 0 {
            return invalid("at least one statistic is required");
        }
        if order > MAX_PARTIAL_ORDER {
            return invalid(format!("partial derivative order above {MAX_PARTIAL_ORDER}"));
        }
        let mut entries = BTreeMap::new();
        for k in 1..=order {
            for idx in sorted_indices(q, k) {
                let v = f(&idx);
                entries.insert(idx, v);
            }
        }
        Ok(Self {
            q,
            order,
            value,
            entries,
        })
    }

    /// `g(s) = sum_i c_i s_i + c_0`.
    pub fn linear(coeffs: &[f64], s: &[f64], constant: f64) -> Result<Self> {
        if coeffs.len() != s.len() {
            return invalid("coefficients and statistics differ in length");
        }
        let value = constant + coeffs.iter().zip(s).map(|(c, x)| c * x).sum::<f64>();
        Self::from_fn(coeffs.len(), MAX_PARTIAL_ORDER, value, |idx| {
            if idx.len() == 1 {
                coeffs[idx[0]]
            } else {
                0.0
            }
        })
    }

    /// `g(s) = c prod_j s_j^{p_j}`.
    pub fn power_product(c: f64, exponents: &[f64], s: &[f64], order: usize) -> Result<Self> {
        if exponents.len() != s.len() {
            return invalid("exponents and statistics differ in length");
        }
        let value = c * s.iter().zip(exponents).map(|(x, p)| x.powf(*p)).product::<f64>();
        let q = s.len();
        Self::from_fn(q, order, value, |idx| {
            let mut counts = vec![0u32; q];
            for &i in idx {
                counts[i] += 1;
            }
            c * (0..q)
                .map(|j| {
                    let m = counts[j];
                    if m == 0 {
                        s[j].powf(exponents[j])
                    } else {
                        let f = falling(exponents[j], m);
                        if f == 0.0 {
                            0.0
                        } else {
                            f * s[j].powf(exponents[j] - m as f64)
                        }
                    }
                })
                .product::<f64>()
        })
    }

    /// `g(s) = alpha's / beta's`, with
    /// `g_{j_1..j_i} = (-1)^{i-1} (i-1)! D^{-i} sum_slot delta_{j_slot} prod_{other} beta`,
    /// `D = beta's`, `delta = alpha - g beta`.
    pub fn linear_ratio(alpha: &[f64], beta: &[f64], s: &[f64], order: usize) -> Result<Self> {
        if alpha.len() != s.len() || beta.len() != s.len() {
            return invalid("alpha, beta and statistics differ in length");
        }
        let d: f64 = beta.iter().zip(s).map(|(b, x)| b * x).sum();
        let num: f64 = alpha.iter().zip(s).map(|(a, x)| a * x).sum();
        let scale = alpha.iter().chain(beta).map(|v| v.abs()).fold(0.0, f64::max)
            * s.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if d.abs() <= 1e-300_f64.max(1e-14 * scale) {
            return crate::error::degenerate("ratio denominator beta's vanishes");
        }
        let t = num / d;
        let delta: Vec<f64> = alpha.iter().zip(beta).map(|(a, b)| a - t * b).collect();
        Self::from_fn(s.len(), order, t, |idx| {
            let i = idx.len();
            let fact: f64 = (1..i).map(|k| k as f64).product();
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            let sum: f64 = (0..i)
                .map(|slot| {
                    idx.iter()
                        .enumerate()
                        .map(|(k, &j)| if k == slot { delta[j] } else { beta[j] })
                        .product::<f64>()
                })
                .sum();
            sign * fact * d.powi(-(i as i32)) * sum
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `g(S(F))`.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// `g_{idx}` with indices in any order; the empty index gives `g` itself.
    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        if idx.is_empty() {
            return Ok(self.value);
        }
        if let Some(&i) = idx.iter().find(|&&i| i >= self.q) {
            return invalid(format!("statistic index {i} out of range for q = {}", self.q));
        }
        if idx.len() > self.order {
            return unavailable(format!(
                "partial derivative of order {} not supplied (table order {})",
                idx.len(),
                self.order
            ));
        }
        let mut key = idx.to_vec();
        key.sort_unstable();
        Ok(self.entries[&key])
    }
}
