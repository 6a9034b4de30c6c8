//! Central moments, products of powers of central moments, and smooth
//! functions of the variance.

use crate::corrections::{
    corrections_one_sample, james_coefficients, james_estimate, simpler_one_sample, BiasCoefficients, CorrectionSeries,
    DerivativeBundle, Pattern,
};
use crate::derivatives::{
    chain_bundle, moment_pair_brackets, mu_r_bracket, Bracket, PartialDerivativeTable, Stat, StatMoments,
};
use crate::empirical::MomentSet;
use crate::error::{degenerate, invalid, unavailable, Result};
use crate::numeric::falling;

/// Bias coefficients, both correction families and the James-form
/// coefficients of the `r`th central moment.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralMoment {
    pub r: usize,
    pub coefficients: BiasCoefficients,
    pub t: CorrectionSeries,
    pub s: CorrectionSeries,
    /// `a_{ir}`, `i = 0..=r/2`; present for `r <= 7`.
    pub james: Option<Vec<f64>>,
}

impl CentralMoment {
    /// The James-form estimate `sum_i a_i n^{-i} / prod_{i<r}(1 - i/n)`.
    ///
    /// Exactly unbiased for `r <= 5`. For `r = 6, 7` the bias is `O(n^{-4})`:
    /// the exact estimate of `mu_6` also needs an `n^{-4}` numerator term.
    pub fn unbiased(&self, n: usize) -> Result<f64> {
        match &self.james {
            Some(a) => james_estimate(a, self.r, n),
            None => unavailable(format!("no unbiased form for mu_{}", self.r)),
        }
    }
}

/// Bundle of `mu_r` from the general bracket formula (all eleven keys).
pub fn central_moment_bundle(r: usize, m: &MomentSet) -> Result<DerivativeBundle> {
    DerivativeBundle::from_fn(m.mu(r)?, &Pattern::ALL, |p| mu_r_bracket(r, p.parts(), m))
}

pub fn central_moment(r: usize, m: &MomentSet) -> Result<CentralMoment> {
    if !(2..=8).contains(&r) {
        return invalid(format!("central moment order r = {r} outside 2..=8"));
    }
    m.require(r.max(4))?;
    let rf = r as f64;
    let ri = r as i64;
    let f = |i: u32| falling(rf, i);
    let mu = |k: i64| m.at(k);
    let (m2, m3, m4) = (mu(2), mu(3), mu(4));
    let mr = mu(ri);
    let lo = |k: i64| mu(ri - k);

    let c1 = -rf * mr + f(2) * lo(2) * m2 / 2.0;
    let c2 =
        f(2) * mr / 2.0 - f(2) * (rf - 1.0) * lo(2) * m2 / 2.0 - f(3) * lo(3) * m3 / 6.0 + f(4) * lo(4) * m2 * m2 / 8.0;
    let c3 = -f(3) * mr / 6.0
        + lo(2) * m2 * f(3) * (rf - 1.0) / 4.0
        + f(3) * (rf - 2.0) * lo(3) * m3 / 6.0
        + f(4) * lo(4) * (m4 - 3.0 * (rf - 1.0) * m2 * m2) / 24.0
        - f(5) * lo(5) * m3 * m2 / 12.0
        + f(6) * lo(6) * m2.powi(3) / 48.0;
    let c4 = if m.max_order() >= r.max(5) {
        let m5 = mu(5);
        Some(
            f(4) * mr / 24.0 - f(4) * (rf - 1.0) * lo(2) * m2 / 12.0 - f(4) * (rf - 2.0) * lo(3) * m3 / 12.0
                + lo(4) * (-f(4) * (rf - 3.0) * m4 / 24.0 + f(4) * rf * (rf - 3.0) * m2 * m2 / 16.0)
                + lo(5) * (-f(5) * m5 / 120.0 + f(5) * (rf - 2.0) * m3 * m2 / 12.0)
                + f(6) * lo(6) * (m4 * m2 / 48.0 + m3 * m3 / 72.0 - rf * m2.powi(3) / 48.0)
                - f(7) * lo(7) * m3 * m2 * m2 / 48.0
                + f(8) * lo(8) * m2.powi(4) / 384.0,
        )
    } else {
        None
    };

    let t1 = -c1;
    let t2 =
        rf * rf * mr - (rf.powi(3) - rf) * lo(2) * m2 / 2.0 - f(3) * lo(3) * m3 / 3.0 + f(4) * lo(4) * m2 * m2 / 8.0;
    let t3 = rf.powi(3) * mr - (rf.powi(4) - rf) * lo(2) * m2 / 2.0 - f(3) * (rf + 3.0) * lo(3) * m3 / 3.0
        + f(4) * lo(4) * (-2.0 * m4 + (rf + 6.0) * m2 * m2) / 8.0
        + f(5) * lo(5) * m3 * m2 / 6.0
        - f(6) * lo(6) * m2.powi(3) / 48.0;
    let s2 =
        f(2) * mr - rf * rf * (rf - 1.0) * lo(2) * m2 / 2.0 - f(3) * lo(3) * m3 / 3.0 + f(4) * lo(4) * m2 * m2 / 8.0;
    let s3 = f(3) * mr - rf * f(3) * lo(2) * m2 / 2.0 - rf * f(3) * lo(3) * m3 / 3.0 - f(4) * lo(4) * m4 / 4.0
        + (rf + 3.0) * f(4) * lo(4) * m2 * m2 / 8.0
        + f(5) * lo(5) * m3 * m2 / 6.0
        - f(6) * lo(6) * m2.powi(3) / 48.0;

    let t = CorrectionSeries::t_family(mr, vec![t1, t2, t3])?;
    let james = if r <= 7 { Some(james_coefficients(&t, r)?) } else { None };
    Ok(CentralMoment {
        r,
        coefficients: BiasCoefficients { c1, c2, c3, c4 },
        t,
        s: CorrectionSeries::s_family(mr, vec![t1, s2, s3])?,
        james,
    })
}

/// One factor `mu_j^{p_j}` of a moment product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentFactor {
    pub order: usize,
    pub power: f64,
}

impl MomentFactor {
    pub fn new(order: usize, power: f64) -> Self {
        Self { order, power }
    }
}

fn product_table(factors: &[MomentFactor], m: &MomentSet, order: usize) -> Result<PartialDerivativeTable> {
    if factors.is_empty() {
        return invalid("a moment product needs at least one factor");
    }
    let mut values = Vec::with_capacity(factors.len());
    for fct in factors {
        if fct.order < 2 {
            return invalid("moment product factors need order >= 2");
        }
        let v = m.mu(fct.order)?;
        if v == 0.0 && (fct.power < 0.0 || fct.power.fract() != 0.0) {
            return degenerate(format!("mu_{} = 0 raised to {}", fct.order, fct.power));
        }
        if v < 0.0 && fct.power.fract() != 0.0 {
            return degenerate(format!("mu_{} < 0 raised to a fractional power", fct.order));
        }
        values.push(v);
    }
    let exps: Vec<f64> = factors.iter().map(|f| f.power).collect();
    PartialDerivativeTable::power_product(1.0, &exps, &values, order)
}

fn product_stats(factors: &[MomentFactor], m: &MomentSet) -> Result<StatMoments> {
    StatMoments::new(factors.iter().map(|f| Stat::Central(f.order)).collect(), m.clone())
}

/// Bundle of `prod_j mu_j^{p_j}`.
///
/// `T(1^2)`, `T(1^3)` and `T(1^2 1^2)` come from the bracket sums over
/// factor pairs and triples; `T(1^4)`, `T(1^2 1^3)` and `T(1^2 1^2 1^2)`
/// from the general chain rule.
pub fn moment_product(factors: &[MomentFactor], m: &MomentSet) -> Result<DerivativeBundle> {
    let g = product_table(factors, m, 6)?;
    let ord: Vec<usize> = factors.iter().map(|f| f.order).collect();
    let q = factors.len();
    let br = |b: Bracket| moment_pair_brackets(b, m);
    let one = |i: usize, parts: &[usize]| mu_r_bracket(ord[i], parts, m);

    let mut t2 = 0.0;
    let mut t3 = 0.0;
    let mut t22 = 0.0;
    for i in 0..q {
        t2 += g.get(&[i])? * one(i, &[2])?;
        t3 += g.get(&[i])? * one(i, &[3])?;
        t22 += g.get(&[i])? * one(i, &[2, 2])?;
        for j in 0..q {
            let gij = g.get(&[i, j])?;
            t2 += gij * br(Bracket::B11(ord[i], ord[j]))?;
            t3 += 3.0 * gij * br(Bracket::B21(ord[i], ord[j]))?;
            t22 += gij * br(Bracket::H(ord[i], ord[j]))?;
            for k in 0..q {
                let gijk = g.get(&[i, j, k])?;
                t3 += gijk * br(Bracket::B111(ord[i], ord[j], ord[k]))?;
                t22 += gijk * br(Bracket::G(ord[i], ord[j], ord[k]))?;
                for l in 0..q {
                    t22 +=
                        g.get(&[i, j, k, l])? * br(Bracket::B11(ord[i], ord[j]))? * br(Bracket::B11(ord[k], ord[l]))?;
                }
            }
        }
    }
    let s = product_stats(factors, m)?;
    Ok(DerivativeBundle::new(g.value())
        .with(Pattern::A2, t2)
        .with(Pattern::A3, t3)
        .with(Pattern::A22, t22)
        .with(Pattern::A4, chain_bundle(&g, &s, Pattern::A4)?)
        .with(Pattern::A23, chain_bundle(&g, &s, Pattern::A23)?)
        .with(Pattern::A222, chain_bundle(&g, &s, Pattern::A222)?))
}

/// The same bundle entirely from the chain rule.
pub fn moment_product_chain(factors: &[MomentFactor], m: &MomentSet) -> Result<DerivativeBundle> {
    let g = product_table(factors, m, 6)?;
    let s = product_stats(factors, m)?;
    crate::derivatives::chain_core_bundle(&g, &s)
}

/// `T(1^2)`, `T(1^3)`, `T(1^2 1^2)` of `mu_r^p` in bracket form.
pub fn moment_power_brackets(r: usize, p: f64, m: &MomentSet) -> Result<[f64; 3]> {
    let mr = m.mu(r)?;
    if mr == 0.0 {
        return degenerate(format!("mu_{r} = 0"));
    }
    let t = mr.powf(p);
    let f = |i: u32| falling(p, i) * mr.powi(-(i as i32));
    let br = |b: Bracket| moment_pair_brackets(b, m);
    let b11 = br(Bracket::B11(r, r))?;
    Ok([
        t * (f(1) * mu_r_bracket(r, &[2], m)? + f(2) * b11),
        t * (f(1) * mu_r_bracket(r, &[3], m)?
            + 3.0 * f(2) * br(Bracket::B21(r, r))?
            + f(3) * br(Bracket::B111(r, r, r))?),
        t * (f(1) * mu_r_bracket(r, &[2, 2], m)?
            + f(2) * br(Bracket::H(r, r))?
            + f(3) * br(Bracket::G(r, r, r))?
            + f(4) * b11 * b11),
    ])
}

/// `mu_2^q` with the bundle written in standardized moments.
#[derive(Debug, Clone, PartialEq)]
pub struct VariancePower {
    pub q: f64,
    pub bundle: DerivativeBundle,
    pub t: CorrectionSeries,
    pub s: CorrectionSeries,
}

impl VariancePower {
    /// `(t_i, s_i) = (T_i/T, S_i/T)`.
    pub fn normalized(&self) -> (Vec<f64>, Vec<f64>) {
        let v = self.t.base();
        (
            self.t.terms().iter().map(|x| x / v).collect(),
            self.s.terms().iter().map(|x| x / v).collect(),
        )
    }
}

pub fn variance_power(q: f64, m: &MomentSet) -> Result<VariancePower> {
    m.require(8)?;
    let m2 = m.mu(2)?;
    if !(m2 > 0.0) {
        return degenerate("variance is not positive");
    }
    let b = |r: usize| m.beta(r);
    let (b3, b4, b5, b6, b8) = (b(3)?, b(4)?, b(5)?, b(6)?, b(8)?);
    let f = |i: u32| falling(q, i);
    let v = m2.powf(q);
    let e = b4 - 1.0;
    let k6 = b6 - 3.0 * b4 + 2.0;
    let t2 = f(2) * e - 2.0 * q;
    let t3 = f(3) * k6 - 6.0 * f(2) * e;
    let t4 = f(4) * (b8 - 4.0 * b6 + 6.0 * b4 - 3.0) - 12.0 * f(3) * (b6 - 2.0 * b4 + 1.0) + 12.0 * f(2) * b4;
    let t22 = f(4) * e * e - 4.0 * f(3) * (e + 2.0 * b3 * b3) + 12.0 * f(2);
    let t23 = 12.0 * f(3) * (2.0 * b3 * b3 + 3.0 * b4 - 3.0)
        - 2.0 * f(4) * (k6 + 6.0 * b3 * (b5 - 2.0 * b3) + 3.0 * e * e)
        + f(5) * e * k6;
    let t222 =
        -120.0 * f(3) + 36.0 * f(4) * (e + 4.0 * b3 * b3) - 6.0 * f(5) * (e + 4.0 * b3 * b3) * e + f(6) * e.powi(3);
    let bundle = DerivativeBundle::new(v)
        .with(Pattern::A2, v * t2)
        .with(Pattern::A3, v * t3)
        .with(Pattern::A4, v * t4)
        .with(Pattern::A22, v * t22)
        .with(Pattern::A23, v * t23)
        .with(Pattern::A222, v * t222);
    Ok(VariancePower {
        q,
        t: corrections_one_sample(&bundle)?,
        s: simpler_one_sample(&bundle)?,
        bundle,
    })
}

/// `sigma = mu_2^{1/2}`.
pub fn standard_deviation(m: &MomentSet) -> Result<VariancePower> {
    variance_power(0.5, m)
}

/// Bias ratios of the usual s.d. against `sigma(F_hat)` (`lambda_1`) and of
/// the second-order estimate against the s.d. (`lambda_2`, per `1/n`).
pub fn sd_bias_ratios(m: &MomentSet) -> Result<(f64, f64)> {
    let sd = standard_deviation(m)?;
    let (t, s) = sd.normalized();
    let b4 = m.beta(4)?;
    let t1_star = t[0] - 0.5;
    if t1_star == 0.0 {
        return degenerate("beta_4 = 1");
    }
    Ok(((b4 - 1.0) / (b4 + 3.0), s[1] / t1_star))
}

/// `T = g(mu_2)` from derivatives `g^{(0)} .. g^{(6)}` at `mu_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionOfVariance {
    pub coefficients: [f64; 3],
    pub t: CorrectionSeries,
    pub s: CorrectionSeries,
}

/// Bundle of `g(mu_2)` via the chain rule.
pub fn function_of_variance_bundle(g: &[f64; 7], m: &MomentSet) -> Result<DerivativeBundle> {
    let table = PartialDerivativeTable::from_fn(1, 6, g[0], |idx| g[idx.len()])?;
    let s = StatMoments::new(vec![Stat::Central(2)], m.clone())?;
    crate::derivatives::chain_core_bundle(&table, &s)
}

/// Closed forms of `C_1..C_3`, `T_1..T_3`, `S_1..S_3` for `g(mu_2)`.
pub fn function_of_variance(g: &[f64; 7], m: &MomentSet) -> Result<FunctionOfVariance> {
    m.require(8)?;
    let mu = |k: usize| m.central()[k];
    let (m2, m3, m4, m5, m6, m8) = (mu(2), mu(3), mu(4), mu(5), mu(6), mu(8));
    let d4 = m4 - m2 * m2;
    let b6 = d4.powi(3);
    let c1 = -g[1] * m2 + g[2] * d4 / 2.0;
    let c2 = g[2] * (2.5 * m2 * m2 - m4)
        + g[3] * (m6 / 6.0 - m3 * m3 - m4 * m2 + 5.0 * m2.powi(3) / 6.0)
        + g[4] * d4 * d4 / 8.0;
    let c3 = g[2] * (m4 / 2.0 - 1.5 * m2 * m2)
        + g[3] * (-m6 / 2.0 + 4.5 * m4 * m2 + 3.0 * m3 * m3 - 6.5 * m2.powi(3))
        + g[4]
            * (m8 / 24.0 - m6 * m2 / 3.0 - m5 * m3 - 5.0 * m4 * m4 / 8.0 + 2.75 * m4 * m2 * m2 + 5.0 * m3 * m3 * m2
                - 11.0 * m2.powi(4) / 6.0)
        + g[5] * d4 * (2.0 * m6 - 9.0 * m4 * m2 - 12.0 * m3 * m3 + 7.0 * m2.powi(3)) / 24.0
        + g[6] * b6 / 48.0;
    let t1 = -g[2] * d4 / 2.0 + g[1] * m2;
    let common3 = m6 / 3.0 - m3 * m3 - 1.5 * m4 * m2 + 7.0 * m2.powi(3) / 6.0;
    let t2 = g[4] * d4 * d4 / 8.0 + g[3] * common3 + g[2] * (-2.5 * m4 + 4.0 * m2 * m2) + g[1] * m2;
    let s2 = g[4] * d4 * d4 / 8.0 + g[3] * common3 + g[2] * (-2.0 * m4 + 3.5 * m2 * m2);
    let fifth = d4 * (-4.0 * m6 + 15.0 * m4 * m2 + 12.0 * m3 * m3 - 11.0 * m2.powi(3)) / 24.0;
    let t3 = g[1] * m2
        + g[2] * (-9.5 * m4 + 15.5 * m2 * m2)
        + g[3] * (4.0 * m6 - 18.0 * m4 * m2 + 16.5 * m2.powi(3) - 10.0 * m3 * m3)
        + g[4]
            * (-m8 / 4.0 + 4.0 * m6 * m2 / 3.0 + 2.0 * m5 * m3 + 1.75 * m4 * m4
                - 6.75 * m4 * m2 * m2
                - 7.0 * m3 * m3 * m2
                + 47.0 * m2.powi(4) / 12.0)
        + g[5] * fifth
        - g[6] * b6 / 48.0;
    let s3 = g[2] * (-3.0 * m4 + 4.5 * m2 * m2)
        + g[3] * (3.0 * m6 - 13.5 * m4 * m2 - 7.0 * m3 * m3 + 13.0 * m2.powi(3))
        + g[4]
            * (-m8 / 4.0 + 4.0 * m6 * m2 / 3.0 + 2.0 * m5 * m3 + 11.0 * m4 * m4 / 8.0
                - 6.0 * m4 * m2 * m2
                - 7.0 * m3 * m3 * m2
                + 85.0 * m2.powi(4) / 24.0)
        + g[5] * fifth
        - g[6] * b6 / 48.0;
    Ok(FunctionOfVariance {
        coefficients: [c1, c2, c3],
        t: CorrectionSeries::t_family(g[0], vec![t1, t2, t3])?,
        s: CorrectionSeries::s_family(g[0], vec![t1, s2, s3])?,
    })
}

/// `mu / sigma`, second-order corrections only.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanOverSd {
    /// `T(1^2)`, `T(1^3)`, `T(1^4)`, `T(1^2 1^2)` in standardized moments.
    pub bundle: DerivativeBundle,
    pub s: CorrectionSeries,
}

pub fn mean_over_sd(m: &MomentSet) -> Result<MeanOverSd> {
    m.require(8)?;
    let m2 = m.mu(2)?;
    if !(m2 > 0.0) {
        return degenerate("variance is not positive");
    }
    let beta = m.mean() / m2.sqrt();
    let b = |r: usize| m.beta(r);
    let (b3, b4, b5, b6, b7, b8) = (b(3)?, b(4)?, b(5)?, b(6)?, b(7)?, b(8)?);
    let t2 = -b3 + beta * (3.0 * b4 + 1.0) / 4.0;
    let t3 = (9.0 * b5 - 6.0 * b3) / 4.0 + 3.0 * beta * (2.0 + 3.0 * b4 - 5.0 * b6) / 8.0;
    let t4 =
        3.0 * (-5.0 * b7 + 3.0 * b5 - 3.0 * b3) / 2.0 + 3.0 * beta * (35.0 * b8 - 20.0 * b6 + 18.0 * b4 + 15.0) / 16.0;
    let t22 =
        -3.0 * (5.0 * b4 + 7.0) * b3 / 2.0 + 3.0 * beta * (35.0 * b4 * b4 - 30.0 * b4 + 80.0 * b3 * b3 + 43.0) / 16.0;
    let s1 = -t2 / 2.0;
    let s2 = (48.0 * b5 - 60.0 * b4 * b3 - 116.0 * b3) / 64.0
        + beta * (-80.0 * b6 + 105.0 * b4 * b4 - 42.0 * b4 + 240.0 * b3 * b3 + 161.0) / 128.0;
    Ok(MeanOverSd {
        bundle: DerivativeBundle::new(beta)
            .with(Pattern::A2, t2)
            .with(Pattern::A3, t3)
            .with(Pattern::A4, t4)
            .with(Pattern::A22, t22),
        s: CorrectionSeries::s_family(beta, vec![s1, s2])?,
    })
}

/// Bundle of `mu / sigma` via the chain rule over `(mu, mu_2)`.
pub fn mean_over_sd_chain(m: &MomentSet) -> Result<DerivativeBundle> {
    let m2 = m.mu(2)?;
    if !(m2 > 0.0) {
        return degenerate("variance is not positive");
    }
    let g = PartialDerivativeTable::power_product(1.0, &[1.0, -0.5], &[m.mean(), m2], 6)?;
    let s = StatMoments::new(vec![Stat::Mean, Stat::Central(2)], m.clone())?;
    crate::derivatives::chain_core_bundle(&g, &s)
}
