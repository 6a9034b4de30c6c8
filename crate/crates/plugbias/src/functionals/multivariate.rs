//! Joint central moments and the correlation coefficient.

use crate::empirical::JointMomentSet;
use crate::error::{degenerate, invalid, Result};

/// Unbiased estimate of a product moment `mu_{12}` or `mu_{123}` from its
/// plug-in value. `coords` lists distinct 0-based coordinates.
pub fn multivariate_moment_ue(coords: &[usize], jm: &JointMomentSet, n: usize) -> Result<f64> {
    let nf = n as f64;
    let divisor = match coords.len() {
        2 if n >= 2 => 1.0 - 1.0 / nf,
        3 if n >= 3 => (1.0 - 1.0 / nf) * (1.0 - 2.0 / nf),
        2 | 3 => return invalid(format!("n = {n} too small")),
        k => return invalid(format!("no unbiased form for a product moment of order {k}")),
    };
    Ok(jm.get(coords)? / divisor)
}

/// Second-order estimates of the correlation `rho` or of `rho^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEstimate {
    pub value: f64,
    /// `T(1^2)`.
    pub t2: f64,
}

impl CorrelationEstimate {
    /// `T - T(1^2)/(2n)`.
    pub fn corrected(&self, n: usize) -> f64 {
        self.value - self.t2 / (2.0 * n as f64)
    }

    /// `T - T(1^2)/(2n - 2)`.
    pub fn corrected_alt(&self, n: usize) -> f64 {
        self.value - self.t2 / (2.0 * n as f64 - 2.0)
    }
}

struct Nu {
    n12: f64,
    n1111: f64,
    n2222: f64,
    n1122: f64,
    n1112: f64,
    n1222: f64,
}

fn normalized(jm: &JointMomentSet) -> Result<Nu> {
    if jm.dim() != 2 {
        return invalid("correlation needs a bivariate moment set");
    }
    let v1 = jm.get(&[0, 0])?;
    let v2 = jm.get(&[1, 1])?;
    if !(v1 > 0.0 && v2 > 0.0) {
        return degenerate("a marginal variance is zero");
    }
    let (s1, s2) = (v1.sqrt(), v2.sqrt());
    let nu = |idx: &[usize]| -> Result<f64> {
        let ones = idx.iter().filter(|&&i| i == 0).count() as i32;
        let twos = idx.len() as i32 - ones;
        Ok(jm.get(idx)? / (s1.powi(ones) * s2.powi(twos)))
    };
    Ok(Nu {
        n12: nu(&[0, 1])?,
        n1111: nu(&[0, 0, 0, 0])?,
        n2222: nu(&[1, 1, 1, 1])?,
        n1122: nu(&[0, 0, 1, 1])?,
        n1112: nu(&[0, 0, 0, 1])?,
        n1222: nu(&[0, 1, 1, 1])?,
    })
}

pub fn correlation(jm: &JointMomentSet) -> Result<CorrelationEstimate> {
    let v = normalized(jm)?;
    Ok(CorrelationEstimate {
        value: v.n12,
        t2: v.n12 * (3.0 * v.n1111 + 3.0 * v.n2222 + 2.0 * v.n1122) / 4.0 - v.n1112 - v.n1222,
    })
}

pub fn squared_correlation(jm: &JointMomentSet) -> Result<CorrelationEstimate> {
    let v = normalized(jm)?;
    let r = v.n12;
    Ok(CorrelationEstimate {
        value: r * r,
        t2: 2.0 * v.n1122 + 2.0 * r * r * (v.n1111 + v.n2222 + v.n1122) - 4.0 * r * (v.n1112 + v.n1222),
    })
}

/// Influence function of the correlation at the point `x`.
pub fn correlation_first_derivative(x: &[f64], jm: &JointMomentSet) -> Result<f64> {
    let v = normalized(jm)?;
    if x.len() != 2 {
        return invalid("correlation derivative needs a bivariate point");
    }
    let h1 = x[0] - jm.mean()[0];
    let h2 = x[1] - jm.mean()[1];
    let m11 = jm.get(&[0, 0])?;
    let m22 = jm.get(&[1, 1])?;
    let m12 = jm.get(&[0, 1])?;
    Ok((h1 * h2 - m12) / (m11 * m22).sqrt() - v.n12 / 2.0 * ((h1 * h1 - m11) / m11 + (h2 * h2 - m22) / m22))
}
