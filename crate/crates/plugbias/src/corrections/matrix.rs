use nalgebra::DMatrix;

use crate::error::{invalid, unavailable, Result};
use crate::numeric::elementary_symmetric_of_range;

use super::CorrectionSeries;

/// Bias relations `C_i = A_i T(F)` for a vector of moment products of
/// common degree `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct UeMatrixProblem {
    pub degree: usize,
    /// `A_1, A_2, ...`; `A_0` is the identity.
    pub a: Vec<DMatrix<f64>>,
}

impl UeMatrixProblem {
    pub fn new(degree: usize, a: Vec<DMatrix<f64>>) -> Result<Self> {
        if degree < 2 {
            return invalid("degree must be at least 2");
        }
        let d = match a.first() {
            Some(m) => m.nrows(),
            None => return invalid("at least A_1 is required"),
        };
        if a.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return invalid("all A_i must be square of the same size");
        }
        Ok(Self { degree, a })
    }

    pub fn dim(&self) -> usize {
        self.a[0].nrows()
    }
}

/// Matrices `B_0..B_s`, `s = floor(p/2)`, of the exact unbiased estimate
/// `{sum_i B_i n^{-i}} T(F_hat) / prod_{i<p} (1 - i/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UeMatrixSolution {
    degree: usize,
    b: Vec<DMatrix<f64>>,
}

impl UeMatrixSolution {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn b(&self, i: usize) -> &DMatrix<f64> {
        &self.b[i]
    }

    pub fn count(&self) -> usize {
        self.b.len()
    }

    /// Applies the estimator to the plug-in values `T(F_hat)`.
    pub fn evaluate(&self, plug_in: &[f64], n: usize) -> Result<Vec<f64>> {
        let d = self.b[0].nrows();
        if plug_in.len() != d {
            return invalid(format!("expected {d} plug-in values, got {}", plug_in.len()));
        }
        if n < self.degree {
            return invalid(format!("n = {n} must exceed p - 1 = {}", self.degree - 1));
        }
        let nf = n as f64;
        let mut m = DMatrix::zeros(d, d);
        for (i, bi) in self.b.iter().enumerate() {
            m += bi * nf.powi(-(i as i32));
        }
        let denom: f64 = (1..self.degree).map(|i| 1.0 - i as f64 / nf).product();
        let t = nalgebra::DVector::from_column_slice(plug_in);
        Ok((m * t / denom).iter().copied().collect())
    }
}

/// Solves for the `B_i`. With `alpha(e) = sum A_i e^i` and `D_j` the
/// elementary symmetric polynomials of `1..p-1`,
/// `sum B_i e^i = prod_{i<p}(1 - i e) alpha(e)^{-1}` truncated at `floor(p/2)`.
pub fn ue_matrix(problem: &UeMatrixProblem) -> Result<UeMatrixSolution> {
    let p = problem.degree;
    let s = p / 2;
    if problem.a.len() < s {
        return invalid(format!("degree {p} needs A_1..A_{s}, got {}", problem.a.len()));
    }
    let d = problem.dim();
    let eye = DMatrix::<f64>::identity(d, d);
    let a_at = |j: usize| -> DMatrix<f64> { problem.a.get(j - 1).cloned().unwrap_or_else(|| DMatrix::zeros(d, d)) };
    let mut inv: Vec<DMatrix<f64>> = vec![eye.clone()];
    for k in 1..=s {
        let mut acc = DMatrix::zeros(d, d);
        for j in 1..=k {
            acc -= a_at(j) * &inv[k - j];
        }
        inv.push(acc);
    }
    let e = elementary_symmetric_of_range(p - 1);
    let b = (0..=s)
        .map(|i| {
            let mut acc = DMatrix::zeros(d, d);
            for j in 0..=i.min(p - 1) {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += &inv[i - j] * (sign * e[j]);
            }
            acc
        })
        .collect();
    Ok(UeMatrixSolution { degree: p, b })
}

/// Scalar coefficients `a_i = sum_j (-1)^{i-j} e_{i-j}(1..p-1) T_j`,
/// `i = 0..=floor(p/2)`, from a `T`-family series.
pub fn james_coefficients(t: &CorrectionSeries, degree: usize) -> Result<Vec<f64>> {
    if degree < 1 {
        return invalid("degree must be positive");
    }
    let s = degree / 2;
    if t.depth() < s {
        return unavailable(format!("degree {degree} needs T_1..T_{s}"));
    }
    let e = elementary_symmetric_of_range(degree - 1);
    (0..=s)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..=i {
                let k = i - j;
                if k >= e.len() {
                    continue;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * e[k] * t.term(j)?;
            }
            Ok(acc)
        })
        .collect()
}

/// `sum_i a_i n^{-i} / prod_{i<p}(1 - i/n)`.
pub fn james_estimate(a: &[f64], degree: usize, n: usize) -> Result<f64> {
    if n < degree {
        return invalid(format!("n = {n} must exceed p - 1 = {}", degree.saturating_sub(1)));
    }
    let nf = n as f64;
    let num: f64 = a.iter().enumerate().map(|(i, ai)| ai * nf.powi(-(i as i32))).sum();
    let den: f64 = (1..degree).map(|i| 1.0 - i as f64 / nf).product();
    Ok(num / den)
}
