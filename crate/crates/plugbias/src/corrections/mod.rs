//! Bias coefficients, correction terms and the assembly of higher-order
//! estimates from a [`DerivativeBundle`].

mod bundle;
mod matrix;
mod series;

pub use bundle::{DerivativeBundle, MultiBundle, Pattern, TaggedPattern};
pub use matrix::{james_coefficients, james_estimate, ue_matrix, UeMatrixProblem, UeMatrixSolution};
pub use series::{assemble_estimate, nested_estimate, plus_estimate, truncated_estimate, CorrectionSeries, Scheme};

use serde::{Deserialize, Serialize};

use crate::error::{unavailable, Result};

/// Coefficients of `n^{-r}` in the expansion of the plug-in expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Present only when the extended bundle keys were supplied.
    pub c4: Option<f64>,
}

impl BiasCoefficients {
    pub fn c4(&self) -> Result<f64> {
        match self.c4 {
            Some(v) => Ok(v),
            None => unavailable("C_4 needs the extended bundle keys"),
        }
    }

    /// `C_r` for `r = 1..=4`.
    pub fn get(&self, r: usize) -> Result<f64> {
        match r {
            1 => Ok(self.c1),
            2 => Ok(self.c2),
            3 => Ok(self.c3),
            4 => self.c4(),
            _ => crate::error::invalid(format!("C_{r} is not available")),
        }
    }
}

/// `C_1..C_3`, and `C_4` when every extended key is present.
pub fn bias_coeffs_one_sample(b: &DerivativeBundle) -> Result<BiasCoefficients> {
    use Pattern::*;
    let t2 = b.get(A2)?;
    let t3 = b.get(A3)?;
    let t4 = b.get(A4)?;
    let t22 = b.get(A22)?;
    let t23 = b.get(A23)?;
    let t222 = b.get(A222)?;
    let c4 = if Pattern::EXTENDED.iter().all(|&p| b.has(p)) {
        let t5 = b.get(A5)?;
        let t24 = b.get(A24)?;
        let t33 = b.get(A33)?;
        let t223 = b.get(A223)?;
        let t2222 = b.get(A2222)?;
        Some((t5 - 10.0 * t23) / 120.0 + (t24 - 3.0 * t222) / 48.0 + t33 / 72.0 + t223 / 48.0 + t2222 / 384.0)
    } else {
        None
    };
    Ok(BiasCoefficients {
        c1: t2 / 2.0,
        c2: t3 / 6.0 + t22 / 8.0,
        c3: (t4 - 3.0 * t22) / 24.0 + t23 / 12.0 + t222 / 48.0,
        c4,
    })
}

/// `T_1..T_3` (power-of-n scheme). The series stops at the deepest term
/// whose bundle entries are all present; a missing `T(1^2)` is an error.
pub fn corrections_one_sample(b: &DerivativeBundle) -> Result<CorrectionSeries> {
    use Pattern::*;
    let t2 = b.get(A2)?;
    let mut terms = vec![-t2 / 2.0];
    if let (Ok(t3), Ok(t22)) = (b.get(A3), b.get(A22)) {
        terms.push(t3 / 3.0 + t22 / 8.0 - t2 / 2.0);
        if let (Ok(t4), Ok(t23), Ok(t222)) = (b.get(A4), b.get(A23), b.get(A222)) {
            terms.push(-t2 / 2.0 + t3 - t4 / 4.0 + 0.75 * t22 - t23 / 6.0 - t222 / 48.0);
        }
    }
    CorrectionSeries::t_family(b.value(), terms)
}

/// `S_1..S_3` (falling-factorial scheme), computed directly from the bundle.
pub fn simpler_one_sample(b: &DerivativeBundle) -> Result<CorrectionSeries> {
    use Pattern::*;
    let t2 = b.get(A2)?;
    let mut terms = vec![-t2 / 2.0];
    if let (Ok(t3), Ok(t22)) = (b.get(A3), b.get(A22)) {
        terms.push(t3 / 3.0 + t22 / 8.0);
        if let (Ok(t4), Ok(t23), Ok(t222)) = (b.get(A4), b.get(A23), b.get(A222)) {
            terms.push(-t4 / 4.0 + 0.375 * t22 - t23 / 6.0 - t222 / 48.0);
        }
    }
    let s = CorrectionSeries::s_family(b.value(), terms)?;
    debug_assert!(
        corrections_one_sample(b)
            .map(|t| {
                t.to_s_family()
                    .terms()
                    .iter()
                    .zip(s.terms())
                    .all(|(a, c)| (a - c).abs() <= 1e-12 * (1.0 + a.abs().max(c.abs())))
            })
            .unwrap_or(true),
        "S-family disagrees with the converted T-family"
    );
    Ok(s)
}

struct MultiSums<'a> {
    b: &'a MultiBundle,
}

impl MultiSums<'_> {
    fn lam(&self, a: usize) -> f64 {
        self.b.lambdas()[a]
    }

    fn k(&self) -> usize {
        self.b.k()
    }

    /// `sum_a lambda_a^e f(a)`
    fn single(&self, e: i32, f: impl Fn(usize) -> Result<f64>) -> Result<f64> {
        (0..self.k()).map(|a| Ok(self.lam(a).powi(e) * f(a)?)).sum()
    }

    /// `sum_{a,b} lambda_a^ea lambda_b^eb f(a, b)`
    fn double(&self, ea: i32, eb: i32, f: impl Fn(usize, usize) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for a in 0..self.k() {
            for b in 0..self.k() {
                acc += self.lam(a).powi(ea) * self.lam(b).powi(eb) * f(a, b)?;
            }
        }
        Ok(acc)
    }

    fn triple(&self, f: impl Fn(usize, usize, usize) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for a in 0..self.k() {
            for b in 0..self.k() {
                for c in 0..self.k() {
                    acc += self.lam(a) * self.lam(b) * self.lam(c) * f(a, b, c)?;
                }
            }
        }
        Ok(acc)
    }
}

/// Multisample `C_1..C_3` (no `C_4`).
pub fn bias_coeffs_multisample(b: &MultiBundle) -> Result<BiasCoefficients> {
    use TaggedPattern as P;
    let s = MultiSums { b };
    let two = s.single(1, |a| b.get(P::A2(a)))?;
    let three = s.single(2, |a| b.get(P::A3(a)))?;
    let two_two = s.double(1, 1, |a, c| b.get(P::A2B2(a, c)))?;
    let four = s.single(3, |a| Ok(b.get(P::A4(a))? - 3.0 * b.get(P::A2B2(a, a))?))?;
    let two_three = s.double(1, 2, |a, c| b.get(P::A2B3(a, c)))?;
    let two_cubed = s.triple(|a, c, d| b.get(P::A2B2C2(a, c, d)))?;
    Ok(BiasCoefficients {
        c1: two / 2.0,
        c2: three / 6.0 + two_two / 8.0,
        c3: four / 24.0 + two_three / 12.0 + two_cubed / 48.0,
        c4: None,
    })
}

/// Multisample `T_1..T_3`, as deep as the supplied entries allow.
pub fn corrections_multisample(b: &MultiBundle) -> Result<CorrectionSeries> {
    use TaggedPattern as P;
    let s = MultiSums { b };
    let t1 = -s.single(1, |a| b.get(P::A2(a)))? / 2.0;
    let mut terms = vec![t1];
    let second = (|| -> Result<f64> {
        let three = s.single(2, |a| b.get(P::A3(a)))?;
        let two_two = s.double(1, 1, |a, c| b.get(P::A2B2(a, c)))?;
        let sq = s.single(2, |a| b.get(P::A2(a)))?;
        Ok(three / 3.0 + two_two / 8.0 - sq / 2.0)
    })();
    if let Ok(t2) = second {
        terms.push(t2);
        let third = (|| -> Result<f64> {
            let v = -s.single(3, |a| b.get(P::A2(a)))? / 2.0 + s.single(3, |a| b.get(P::A3(a)))?
                - s.single(3, |a| b.get(P::A4(a)))? / 4.0
                + s.single(3, |a| b.get(P::A2B2(a, a)))? / 2.0
                + s.double(1, 2, |a, c| b.get(P::A2B2(a, c)))? / 4.0
                - s.double(1, 2, |a, c| b.get(P::A2B3(a, c)))? / 6.0
                - s.triple(|a, c, d| b.get(P::A2B2C2(a, c, d)))? / 48.0;
            Ok(v)
        })();
        if let Ok(t3) = third {
            terms.push(t3);
        }
    } else if let Err(e @ crate::Error::InvalidArgument(_)) = second {
        return Err(e);
    }
    CorrectionSeries::t_family(b.value(), terms)
}
