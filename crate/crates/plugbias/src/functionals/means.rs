//! Smooth functions of means: one multivariate sample, or the means of
//! several univariate samples.

use crate::corrections::{CorrectionSeries, DerivativeBundle, MultiBundle, Pattern, TaggedPattern};
use crate::derivatives::PartialDerivativeTable;
use crate::empirical::{JointMomentSet, MomentSet};
use crate::error::{degenerate, invalid, Result};
use crate::numeric::falling;

/// Visits every index tuple of length `len` over `0..dim`.
pub(crate) fn for_each_tuple(dim: usize, len: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut idx = vec![0usize; len];
    loop {
        f(&idx)?;
        let mut pos = 0;
        while pos < len {
            idx[pos] += 1;
            if idx[pos] < dim {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == len {
            return Ok(());
        }
    }
}

/// `g_{idx} prod_parts mu[idx_part]` summed over all coordinates.
fn contraction(g: &PartialDerivativeTable, jm: &JointMomentSet, parts: &[usize]) -> Result<f64> {
    let order: usize = parts.iter().sum();
    let mut total = 0.0;
    for_each_tuple(jm.dim(), order, |idx| {
        let gv = g.get(idx)?;
        if gv == 0.0 {
            return Ok(());
        }
        let mut prod = gv;
        let mut start = 0;
        for &len in parts {
            prod *= jm.get(&idx[start..start + len])?;
            start += len;
        }
        total += prod;
        Ok(())
    })?;
    Ok(total)
}

/// Bundle of `T = g(mu)` for the mean vector `mu` of one `s`-variate law.
///
/// Keys whose total order exceeds the table order (or the moment order)
/// are left out, which makes them unavailable downstream.
pub fn mean_function(g: &PartialDerivativeTable, jm: &JointMomentSet) -> Result<DerivativeBundle> {
    if g.q() != jm.dim() {
        return invalid(format!(
            "g has {} arguments, moments have dimension {}",
            g.q(),
            jm.dim()
        ));
    }
    let mut b = DerivativeBundle::new(g.value());
    for p in Pattern::ALL {
        if p.order() > g.order() || p.parts().iter().any(|&k| k > jm.max_order()) {
            continue;
        }
        b.set(p, contraction(g, jm, p.parts())?);
    }
    Ok(b)
}

/// Ratio `alpha'mu / beta'mu` of linear combinations of the mean vector.
pub fn linear_ratio(alpha: &[f64], beta: &[f64], jm: &JointMomentSet) -> Result<DerivativeBundle> {
    let g = PartialDerivativeTable::linear_ratio(alpha, beta, jm.mean(), 6)?;
    mean_function(&g, jm)
}

/// Closed-form corrections for the bivariate ratio `mu_1 / mu_2` of means.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioOfMeans {
    pub t: CorrectionSeries,
    pub s: CorrectionSeries,
}

/// `mu_1/mu_2` with `S_1..S_3`, `T_1..T_3` written in the joint moments of
/// the two coordinates (coordinates 0 and 1 of `jm`).
pub fn ratio_of_means(jm: &JointMomentSet) -> Result<RatioOfMeans> {
    if jm.dim() != 2 {
        return invalid("ratio of means needs a bivariate moment set");
    }
    let (m1, m2) = (jm.mean()[0], jm.mean()[1]);
    if m2 == 0.0 || !m2.is_finite() {
        return degenerate("mean of the denominator coordinate is zero");
    }
    let t = m1 / m2;
    let mu = |idx: &[usize]| jm.get(idx);
    let u = mu(&[1, 1])? / (m2 * m2);
    let v = mu(&[1, 1, 1])? / m2.powi(3);
    let x = (mu(&[0, 1])? - t * mu(&[1, 1])?) / (m2 * m2);
    let y = (mu(&[0, 1, 1])? - t * mu(&[1, 1, 1])?) / m2.powi(3);
    let z = (mu(&[0, 1, 1, 1])? - t * mu(&[1, 1, 1, 1])?) / m2.powi(4);

    let t1 = x;
    let t2 = 2.0 * y + x * (1.0 - 3.0 * u);
    let t3 = x * (1.0 - 18.0 * u - 8.0 * v + 15.0 * u * u) + 6.0 * y * (1.0 - 2.0 * u) + 6.0 * z;
    let s2 = 2.0 * y - 3.0 * u * x;
    let s3 = x * (-9.0 * u - 8.0 * v + 15.0 * u * u) - 12.0 * u * y + 6.0 * z;
    Ok(RatioOfMeans {
        t: CorrectionSeries::t_family(t, vec![t1, t2, t3])?,
        s: CorrectionSeries::s_family(t, vec![t1, s2, s3])?,
    })
}

/// `mu^p` for the mean of a univariate law, both correction families.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerOfMean {
    pub p: f64,
    pub t: CorrectionSeries,
    pub s: CorrectionSeries,
}

impl PowerOfMean {
    /// `s_i = S_i / T`; for `p = -1` these are `-gamma_2`,
    /// `-2 gamma_3 + 3 gamma_2^2`, and so on with `gamma_r = mu_r mu^{-r}`.
    pub fn normalized(&self) -> Result<Vec<f64>> {
        let base = self.s.base();
        if base == 0.0 {
            return degenerate("normalizing by a zero functional value");
        }
        Ok(self.s.terms().iter().map(|s| s / base).collect())
    }
}

/// `(p)_i mu^{p-i}`, exactly zero when the falling factorial vanishes.
fn scaled_power(p: f64, i: u32, mu: f64) -> f64 {
    let f = falling(p, i);
    if f == 0.0 {
        0.0
    } else {
        f * mu.powf(p - i as f64)
    }
}

pub fn power_of_mean(p: f64, m: &MomentSet) -> Result<PowerOfMean> {
    m.require(4)?;
    let mu = m.mean();
    let integral = p.fract() == 0.0 && p >= 0.0;
    if mu == 0.0 && !integral {
        return degenerate("mean is zero with a negative or fractional exponent");
    }
    if mu < 0.0 && p.fract() != 0.0 {
        return degenerate("negative mean with a fractional exponent");
    }
    let (m2, m3, m4) = (m.mu(2)?, m.mu(3)?, m.mu(4)?);
    let c = |i: u32| scaled_power(p, i, mu);
    let value = if p == 0.0 { 1.0 } else { mu.powf(p) };
    let s1 = -c(2) * m2 / 2.0;
    let s2 = c(3) * m3 / 3.0 + c(4) * m2 * m2 / 8.0;
    let t3 = -c(2) * m2 / 2.0 + c(3) * m3
        - c(4) * (m4 - 3.0 * m2 * m2) / 4.0
        - c(5) * m3 * m2 / 6.0
        - c(6) * m2.powi(3) / 48.0;
    let s3 = -c(4) * (2.0 * m4 - 3.0 * m2 * m2) / 8.0 - c(5) * m3 * m2 / 6.0 - c(6) * m2.powi(3) / 48.0;
    Ok(PowerOfMean {
        p,
        t: CorrectionSeries::t_family(value, vec![s1, s1 + s2, t3])?,
        s: CorrectionSeries::s_family(value, vec![s1, s2, s3])?,
    })
}

/// Multisample bundle of `g` applied to the means of `k` univariate samples.
pub fn means_of_k_samples(g: &PartialDerivativeTable, moments: &[MomentSet], lambdas: &[f64]) -> Result<MultiBundle> {
    let k = moments.len();
    if g.q() != k || lambdas.len() != k {
        return invalid("g, moments and lambdas must agree on the number of samples");
    }
    let mu = |a: usize, r: usize| moments[a].mu(r);
    let mut b = MultiBundle::new(g.value(), lambdas.to_vec())?;
    let mut put = |p: TaggedPattern, v: Result<f64>| -> Result<()> {
        match v {
            Ok(v) => b.set(p, v),
            Err(crate::Error::Unavailable(_)) => Ok(()),
            Err(e) => Err(e),
        }
    };
    for a in 0..k {
        put(TaggedPattern::A2(a), Ok(g.get(&[a, a])? * mu(a, 2)?))?;
        put(TaggedPattern::A3(a), g.get(&[a; 3]).and_then(|v| Ok(v * mu(a, 3)?)))?;
        put(TaggedPattern::A4(a), g.get(&[a; 4]).and_then(|v| Ok(v * mu(a, 4)?)))?;
        for c in 0..k {
            put(
                TaggedPattern::A2B2(a, c),
                g.get(&[a, a, c, c]).and_then(|v| Ok(v * mu(a, 2)? * mu(c, 2)?)),
            )?;
            put(
                TaggedPattern::A2B3(a, c),
                g.get(&[a, a, c, c, c]).and_then(|v| Ok(v * mu(a, 2)? * mu(c, 3)?)),
            )?;
            for d in 0..k {
                put(
                    TaggedPattern::A2B2C2(a, c, d),
                    g.get(&[a, a, c, c, d, d])
                        .and_then(|v| Ok(v * mu(a, 2)? * mu(c, 2)? * mu(d, 2)?)),
                )?;
            }
        }
    }
    Ok(b)
}

/// Closed forms for the ratio `mu(F_1)/mu(F_2)` of two sample means.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSampleRatio {
    pub c: [f64; 3],
    pub t: CorrectionSeries,
}

/// `nu_k = mu_2^{-k} mu_k[2]`, with `lambda_2` the size weight of the
/// denominator sample.
pub fn two_sample_ratio(num: &MomentSet, den: &MomentSet, lambda2: f64) -> Result<TwoSampleRatio> {
    den.require(4)?;
    let m2 = den.mean();
    if m2 == 0.0 {
        return degenerate("denominator sample mean is zero");
    }
    let t = num.mean() / m2;
    let nu = |k: usize| -> Result<f64> { Ok(den.mu(k)? / m2.powi(k as i32)) };
    let (n2, n3, n4) = (nu(2)?, nu(3)?, nu(4)?);
    let l = lambda2;
    let c = [
        l * n2 * t,
        l * l * (-n3 + 3.0 * n2 * n2) * t,
        l.powi(3) * (n4 - 3.0 * n2 * n2 - 10.0 * n2 * n3 + 15.0 * n2.powi(3)) * t,
    ];
    let terms = vec![
        -l * n2 * t,
        l * l * (-2.0 * n3 - n2 + 3.0 * n2 * n2) * t,
        l.powi(3) * (-6.0 * n4 - 6.0 * n3 - n2 - 15.0 * n2.powi(3) + 20.0 * n3 * n2 + 18.0 * n2 * n2) * t,
    ];
    Ok(TwoSampleRatio {
        c,
        t: CorrectionSeries::t_family(t, terms)?,
    })
}
