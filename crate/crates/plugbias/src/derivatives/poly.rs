//! Exact integration of products of moment derivatives.
//!
//! A derivative of the mean or of a central moment at points
//! `x_a, x_b, ...` is a polynomial in the deviations `h_a = x_a - mu`.
//! Products of such polynomials integrate term by term, each `h_a^k`
//! becoming `mu_k` because distinct letters are independent draws from `F`.

use std::collections::BTreeMap;

use crate::empirical::MomentSet;
use crate::error::{invalid, Result};
use crate::numeric::falling;

/// Maximum number of distinct integration letters.
pub const MAX_LETTERS: usize = 4;

type Monomial = [u8; MAX_LETTERS];

/// Polynomial in the deviations of up to [`MAX_LETTERS`] letters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CenteredPoly {
    terms: BTreeMap<Monomial, f64>,
}

impl CenteredPoly {
    pub fn constant(c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert([0; MAX_LETTERS], c);
        }
        Self { terms }
    }

    fn add_term(&mut self, mono: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        *self.terms.entry(mono).or_insert(0.0) += c;
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &CenteredPoly, c: f64) {
        for (mono, v) in &other.terms {
            self.add_term(*mono, c * v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| *c == 0.0)
    }

    pub fn mul(&self, other: &CenteredPoly) -> CenteredPoly {
        let mut out = CenteredPoly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = [0u8; MAX_LETTERS];
                for k in 0..MAX_LETTERS {
                    m[k] = ma[k] + mb[k];
                }
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    /// Highest power of any single letter.
    pub fn max_power(&self) -> usize {
        self.terms.keys().flat_map(|m| m.iter()).copied().max().unwrap_or(0) as usize
    }

    /// Integral with every letter an independent draw from the law with moments `m`.
    pub fn integrate(&self, m: &MomentSet) -> Result<f64> {
        m.require(self.max_power().max(2))?;
        Ok(self
            .terms
            .iter()
            .map(|(mono, c)| c * mono.iter().map(|&k| m.central()[k as usize]).product::<f64>())
            .sum())
    }

    /// `mu_{rF}` at points labelled by `letters`, as a polynomial.
    pub fn central_moment_derivative(r: usize, letters: &[usize], m: &MomentSet) -> Result<Self> {
        let p = letters.len();
        if r < 2 || p == 0 {
            return invalid("central moment derivative needs r >= 2 and p >= 1");
        }
        if letters.iter().any(|&l| l >= MAX_LETTERS) {
            return invalid("too many integration letters");
        }
        m.require(r)?;
        let mut out = CenteredPoly::default();
        if p > r {
            return Ok(out);
        }
        let (ri, pi) = (r as i64, p as i64);
        let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut prod = [0u8; MAX_LETTERS];
        for &l in letters {
            prod[l] += 1;
        }
        out.add_term(prod, sign * falling(r as f64, p as u32) * m.at(ri - pi));
        let c = -sign * falling(r as f64, p as u32 - 1);
        for (i, &li) in letters.iter().enumerate() {
            let mut others = [0u8; MAX_LETTERS];
            for (j, &lj) in letters.iter().enumerate() {
                if j != i {
                    others[lj] += 1;
                }
            }
            let mut lead = others;
            lead[li] += (r - p + 1) as u8;
            out.add_term(lead, c);
            out.add_term(others, -c * m.at(ri - pi + 1));
        }
        Ok(out)
    }

    /// Derivative of the mean: `h_a` at a single point, zero beyond.
    pub fn mean_derivative(letters: &[usize]) -> Result<Self> {
        if letters.iter().any(|&l| l >= MAX_LETTERS) {
            return invalid("too many integration letters");
        }
        let mut out = CenteredPoly::default();
        if letters.len() == 1 {
            let mut mono = [0u8; MAX_LETTERS];
            mono[letters[0]] = 1;
            out.add_term(mono, 1.0);
        }
        Ok(out)
    }
}

/// A univariate statistic whose derivatives are polynomial in the deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stat {
    Mean,
    Central(usize),
}

impl Stat {
    pub fn value(self, m: &MomentSet) -> Result<f64> {
        match self {
            Stat::Mean => Ok(m.mean()),
            Stat::Central(r) => m.mu(r),
        }
    }

    pub fn derivative(self, letters: &[usize], m: &MomentSet) -> Result<CenteredPoly> {
        match self {
            Stat::Mean => CenteredPoly::mean_derivative(letters),
            Stat::Central(r) => CenteredPoly::central_moment_derivative(r, letters, m),
        }
    }
}

/// Integrals `S_{ij...}(args)` of products of statistic derivatives.
pub trait SMoments {
    /// Number of statistics `q`.
    fn q(&self) -> usize;

    /// `int S_{i_1}(args_1) S_{i_2}(args_2) ... dF`, with letters in the
    /// argument lists denoting independent integration variables.
    fn integral(&self, stats: &[usize], args: &[&[usize]]) -> Result<f64>;
}

/// Derivative moments of a vector of means and central moments of one law.
#[derive(Debug, Clone)]
pub struct StatMoments {
    stats: Vec<Stat>,
    moments: MomentSet,
}

impl StatMoments {
    pub fn new(stats: Vec<Stat>, moments: MomentSet) -> Result<Self> {
        if stats.is_empty() {
            return invalid("at least one statistic is required");
        }
        for s in &stats {
            if let Stat::Central(r) = s {
                if *r < 2 {
                    return invalid("central moment statistics need r >= 2");
                }
                moments.require(*r)?;
            }
        }
        Ok(Self { stats, moments })
    }

    pub fn stats(&self) -> &[Stat] {
        &self.stats
    }

    pub fn moments(&self) -> &MomentSet {
        &self.moments
    }

    /// Values `s_j = S_j(F)`.
    pub fn values(&self) -> Result<Vec<f64>> {
        self.stats.iter().map(|s| s.value(&self.moments)).collect()
    }
}

impl SMoments for StatMoments {
    fn q(&self) -> usize {
        self.stats.len()
    }

    fn integral(&self, stats: &[usize], args: &[&[usize]]) -> Result<f64> {
        if stats.len() != args.len() {
            return invalid("one argument list per statistic is required");
        }
        let mut acc = CenteredPoly::constant(1.0);
        for (&i, a) in stats.iter().zip(args) {
            let stat = match self.stats.get(i) {
                Some(s) => *s,
                None => return invalid(format!("statistic index {i} out of range")),
            };
            let d = stat.derivative(a, &self.moments)?;
            if d.is_zero() {
                return Ok(0.0);
            }
            acc = acc.mul(&d);
        }
        acc.integrate(&self.moments)
    }
}
