use serde::{Deserialize, Serialize};

use crate::error::{invalid, unavailable, Result};
use crate::numeric::falling;

/// Denominator scheme `N_i(n)` attached to a correction series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    /// `N_i(n) = n^{-i}`, paired with the `T_i` family.
    PowerOfN,
    /// `N_i(n) = 1 / (n-1)_i`, paired with the `S_i` family.
    FallingFactorial,
    /// Caller-supplied weights; `table[i - 1]` holds `N_i(n)` for `i >= 1`.
    Custom(Vec<f64>),
}

impl Scheme {
    pub fn weight(&self, i: usize, n: usize) -> Result<f64> {
        if i == 0 {
            return Ok(1.0);
        }
        match self {
            Scheme::PowerOfN => Ok((n as f64).powi(-(i as i32))),
            Scheme::FallingFactorial => {
                let d = falling(n as f64 - 1.0, i as u32);
                if d == 0.0 {
                    return invalid(format!("(n-1)_{i} vanishes at n = {n}"));
                }
                Ok(1.0 / d)
            }
            Scheme::Custom(table) => match table.get(i - 1) {
                Some(w) => Ok(*w),
                None => invalid(format!("custom scheme has no weight for i = {i}")),
            },
        }
    }
}

/// A functional value followed by correction terms `1..=depth` (depth at most 3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionSeries {
    base: f64,
    terms: Vec<f64>,
    scheme: Scheme,
}

impl CorrectionSeries {
    pub fn new(base: f64, terms: Vec<f64>, scheme: Scheme) -> Result<Self> {
        if terms.len() > 3 {
            return invalid("at most three correction terms are supported");
        }
        Ok(Self { base, terms, scheme })
    }

    /// `T`-family series with `N_i = n^{-i}`.
    pub fn t_family(base: f64, terms: Vec<f64>) -> Result<Self> {
        Self::new(base, terms, Scheme::PowerOfN)
    }

    /// `S`-family series with `N_i = 1/(n-1)_i`.
    pub fn s_family(base: f64, terms: Vec<f64>) -> Result<Self> {
        Self::new(base, terms, Scheme::FallingFactorial)
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    /// Number of correction terms available.
    pub fn depth(&self) -> usize {
        self.terms.len()
    }

    /// Term `i`, where term 0 is the base value.
    pub fn term(&self, i: usize) -> Result<f64> {
        if i == 0 {
            return Ok(self.base);
        }
        match self.terms.get(i - 1) {
            Some(t) => Ok(*t),
            None => unavailable(format!("correction term {i} not available (depth {})", self.depth())),
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn truncated(&self, depth: usize) -> Self {
        let mut s = self.clone();
        s.terms.truncate(depth);
        s
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            base: self.base * c,
            terms: self.terms.iter().map(|t| t * c).collect(),
            scheme: self.scheme.clone(),
        }
    }

    /// Converts `T_1..T_3` into `S_1..S_3` (falling-factorial scheme).
    pub fn to_s_family(&self) -> Self {
        let t = &self.terms;
        let mut s = Vec::with_capacity(t.len());
        if let Some(&t1) = t.first() {
            s.push(t1);
        }
        if t.len() >= 2 {
            s.push(t[1] - t[0]);
        }
        if t.len() >= 3 {
            s.push(t[2] - 3.0 * t[1] + 2.0 * t[0]);
        }
        Self {
            base: self.base,
            terms: s,
            scheme: Scheme::FallingFactorial,
        }
    }

    /// Converts `S_1..S_3` into `T_1..T_3` (power-of-n scheme).
    pub fn to_t_family(&self) -> Self {
        let s = &self.terms;
        let mut t = Vec::with_capacity(s.len());
        if let Some(&s1) = s.first() {
            t.push(s1);
        }
        if s.len() >= 2 {
            t.push(s[1] + s[0]);
        }
        if s.len() >= 3 {
            t.push(s[2] + 3.0 * s[1] + s[0]);
        }
        Self {
            base: self.base,
            terms: t,
            scheme: Scheme::PowerOfN,
        }
    }
}

fn check_order(p: usize) -> Result<()> {
    if !(1..=4).contains(&p) {
        return invalid(format!("order p = {p} outside 1..=4"));
    }
    Ok(())
}

/// `sum_{i<p} N_i(n) term_i`, the `p`th-order estimate.
pub fn assemble_estimate(series: &CorrectionSeries, n: usize, p: usize) -> Result<f64> {
    check_order(p)?;
    if n == 0 {
        return invalid("n must be positive");
    }
    if series.depth() + 1 < p {
        return unavailable(format!(
            "order {p} needs {} correction terms, series has {}",
            p - 1,
            series.depth()
        ));
    }
    let mut acc = series.base;
    for i in 1..p {
        acc += series.scheme.weight(i, n)? * series.terms[i - 1];
    }
    Ok(acc)
}

/// Returns `corrected` when `|plug_in| < u`, otherwise the fallback `c`.
pub fn truncated_estimate(corrected: f64, plug_in: f64, u: f64, c: f64) -> Result<f64> {
    if !(u > 0.0) {
        return invalid("truncation bound u must be positive");
    }
    if plug_in.abs() < u && corrected.is_finite() {
        Ok(corrected)
    } else {
        Ok(c)
    }
}

/// Estimate of order `q <= p`, where `q` is the largest order for which the
/// magnitudes `|N_i(n) term_i|`, `i < q`, are strictly decreasing.
pub fn plus_estimate(series: &CorrectionSeries, n: usize, p: usize) -> Result<(f64, usize)> {
    check_order(p)?;
    if series.depth() + 1 < p {
        return unavailable(format!("order {p} exceeds series depth {}", series.depth()));
    }
    let mut magnitudes = Vec::with_capacity(p);
    for i in 0..p {
        magnitudes.push((series.scheme.weight(i, n)? * series.term(i)?).abs());
    }
    let mut q = 1;
    while q < p && magnitudes[q] < magnitudes[q - 1] {
        q += 1;
    }
    Ok((assemble_estimate(series, n, q)?, q))
}

/// `sum_i n^{-i} assemble(U_i, n, p - i)` over the supplied expansion terms.
pub fn nested_estimate(us: &[CorrectionSeries], n: usize, p: usize) -> Result<f64> {
    check_order(p)?;
    if n == 0 {
        return invalid("n must be positive");
    }
    let mut acc = 0.0;
    for (i, u) in us.iter().enumerate().take(p) {
        let order = p - i;
        if u.depth() + 1 < order {
            return invalid(format!(
                "expansion term {i} needs {} corrections, has {}",
                order - 1,
                u.depth()
            ));
        }
        acc += (n as f64).powi(-(i as i32)) * assemble_estimate(u, n, order)?;
    }
    Ok(acc)
}
