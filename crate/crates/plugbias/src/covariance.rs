//! Covariance of plug-in and bias-corrected estimates of a vector
//! functional, and covariance of the first-order bias estimate.
//!
//! Everything is driven by a handful of integrated products of the
//! derivatives of the components `T^alpha`, collected per sample (and per
//! sample pair) in a [`CovDerivativeBundle`].

use nalgebra::DMatrix;

use crate::derivatives::{CenteredPoly, PartialDerivativeTable, SMoments, StatMoments};
use crate::empirical::JointMomentSet;
use crate::error::{invalid, Result};
use crate::functionals::for_each_tuple;

/// `T^{alpha beta}(a, a)`, `(a^2, a)`, `(ab, ab)` and `(a^2 b, b)` for every
/// component pair, with the sample weights `lambda_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovDerivativeBundle {
    lambdas: Vec<f64>,
    aa: Vec<DMatrix<f64>>,
    a2a: Vec<DMatrix<f64>>,
    abab: Vec<DMatrix<f64>>,
    a2bb: Vec<DMatrix<f64>>,
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    m + m.transpose()
}

impl CovDerivativeBundle {
    /// One sample: each argument is the `q x q` matrix over `(alpha, beta)`.
    pub fn one_sample(aa: DMatrix<f64>, a2a: DMatrix<f64>, abab: DMatrix<f64>, a2bb: DMatrix<f64>) -> Result<Self> {
        Self::multisample(vec![1.0], vec![aa], vec![a2a], vec![abab], vec![a2bb])
    }

    /// `k` samples. `aa` and `a2a` are indexed by sample, `abab` and `a2bb`
    /// by the pair `(a, b)` at position `a * k + b`; for `a2bb` the repeated
    /// tag is `a`.
    pub fn multisample(
        lambdas: Vec<f64>,
        aa: Vec<DMatrix<f64>>,
        a2a: Vec<DMatrix<f64>>,
        abab: Vec<DMatrix<f64>>,
        a2bb: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let k = lambdas.len();
        if k == 0 || lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return invalid("sample weights must be positive and finite");
        }
        if aa.len() != k || a2a.len() != k || abab.len() != k * k || a2bb.len() != k * k {
            return invalid("bundle entries do not match the number of samples");
        }
        let q = aa[0].nrows();
        if aa
            .iter()
            .chain(&a2a)
            .chain(&abab)
            .chain(&a2bb)
            .any(|m| m.nrows() != q || m.ncols() != q)
        {
            return invalid("bundle matrices must all be q x q");
        }
        Ok(Self {
            lambdas,
            aa,
            a2a,
            abab,
            a2bb,
        })
    }

    pub fn q(&self) -> usize {
        self.aa[0].nrows()
    }

    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn aa(&self, a: usize) -> &DMatrix<f64> {
        &self.aa[a]
    }

    pub fn a2a(&self, a: usize) -> &DMatrix<f64> {
        &self.a2a[a]
    }

    pub fn abab(&self, a: usize, b: usize) -> &DMatrix<f64> {
        &self.abab[a * self.k() + b]
    }

    pub fn a2bb(&self, a: usize, b: usize) -> &DMatrix<f64> {
        &self.a2bb[a * self.k() + b]
    }

    fn zeros(&self) -> DMatrix<f64> {
        DMatrix::zeros(self.q(), self.q())
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let k = self.k();
        (0..k * k).map(move |i| (i / k, i % k, self.lambdas[i / k] * self.lambdas[i % k]))
    }

    /// `K_1 = sum_a lambda_a T(a, a)`: `n^{-1} K_1` is the leading covariance.
    pub fn k1(&self) -> DMatrix<f64> {
        let mut out = self.zeros();
        for (l, m) in self.lambdas.iter().zip(&self.aa) {
            out += m * *l;
        }
        out
    }

    /// `K_2`, the `n^{-2}` coefficient of the covariance of the plug-in estimate.
    pub fn k2(&self) -> DMatrix<f64> {
        let mut out = self.zeros();
        for (l, m) in self.lambdas.iter().zip(&self.a2a) {
            out += sym(m) * (l * l / 2.0);
        }
        for (a, b, w) in self.pairs() {
            out += (sym(self.a2bb(a, b)) + self.abab(a, b)) * (w / 2.0);
        }
        out
    }

    /// `C_1(V)`, the `n^{-1}` bias coefficient of `K_1(F_hat)`.
    pub fn c1_of_k1(&self) -> DMatrix<f64> {
        let mut out = self.zeros();
        for a in 0..self.k() {
            let l = self.lambdas[a];
            out += (sym(&self.a2a[a]) - &self.aa[a]) * (l * l);
        }
        for (a, b, w) in self.pairs() {
            out += (self.abab(a, b) + sym(self.a2bb(a, b)) / 2.0) * w;
        }
        out
    }

    /// `L = K_2 - C_1(V)`: `n^{-1} K_1 + n^{-2} L` at `F_hat` estimates the
    /// covariance of the plug-in estimate with bias `O(n^{-3})`.
    pub fn l(&self) -> DMatrix<f64> {
        self.k2() - self.c1_of_k1()
    }

    /// `Delta = K_1(T^alpha, T_1^beta) + K_1(T^beta, T_1^alpha)`, the change in
    /// the `n^{-2}` coefficient when `T` is replaced by `T + n^{-1} T_1`.
    pub fn delta(&self) -> DMatrix<f64> {
        let mut m = self.zeros();
        for c in 0..self.k() {
            let lc = self.lambdas[c];
            let mut inner = self.a2a[c].transpose() * lc;
            for a in 0..self.k() {
                inner += self.a2bb(a, c).transpose() * self.lambdas[a];
            }
            m -= inner * (lc / 2.0);
        }
        sym(&m)
    }

    /// `K_2[F] = K_2 + Delta`, the `n^{-2}` coefficient for a corrected estimate.
    pub fn k2_corrected(&self) -> DMatrix<f64> {
        self.k2() + self.delta()
    }

    /// `L[F] = L + Delta`.
    pub fn l_corrected(&self) -> DMatrix<f64> {
        self.l() + self.delta()
    }

    /// The part of `L` carried by `T(a, a)`, namely `sum_a lambda_a^2 T(a, a)`.
    fn aa_second(&self) -> DMatrix<f64> {
        let mut out = self.zeros();
        for (l, m) in self.lambdas.iter().zip(&self.aa) {
            out += m * (l * l);
        }
        out
    }
}

/// Which estimate's covariance is wanted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// `T(F_hat)` itself.
    PlugIn,
    /// A corrected estimate `T_np(F_hat)` with `p >= 2`.
    Corrected,
}

/// How the `T(a, a)` terms of the second-order estimate are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Divisor {
    /// `(n_a - 1)^{-1}` with `n_a = n / lambda_a`.
    #[default]
    NMinusOne,
    /// `n_a^{-1} + n_a^{-2}`, equal to the above through `O(n^{-2})`.
    Expanded,
}

/// `n^{-1} K_1`: covariance estimate with bias `O(n^{-2})` when evaluated at `F_hat`.
pub fn cov_first_order(b: &CovDerivativeBundle, n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return invalid("sample size must be positive");
    }
    Ok(b.k1() / n as f64)
}

/// `n^{-1} K_1 + n^{-2} L` (plug-in) or `n^{-1} K_1 + n^{-2} L[F]`
/// (corrected); at `F_hat` these estimate the covariance with bias `O(n^{-3})`.
pub fn cov_second_order(b: &CovDerivativeBundle, n: usize, target: Target, divisor: Divisor) -> Result<DMatrix<f64>> {
    if n < 2 {
        return invalid("second-order covariance needs n >= 2");
    }
    let nf = n as f64;
    let rest = match target {
        Target::PlugIn => b.l(),
        Target::Corrected => b.l_corrected(),
    } - b.aa_second();
    let mut out = rest / (nf * nf);
    for (l, aa) in b.lambdas.iter().zip(&b.aa) {
        let na = nf / l;
        let w = match divisor {
            Divisor::NMinusOne => {
                if na <= 1.0 {
                    return invalid("sample size n_a must exceed 1");
                }
                1.0 / (na - 1.0)
            }
            Divisor::Expanded => 1.0 / na + 1.0 / (na * na),
        };
        out += aa * w;
    }
    Ok(out)
}

/// `n^{-1} K_1 + n^{-2} K_2` at `F`: the covariance itself through `O(n^{-2})`.
pub fn covariance_expansion(b: &CovDerivativeBundle, n: usize, target: Target) -> Result<DMatrix<f64>> {
    if n == 0 {
        return invalid("sample size must be positive");
    }
    let nf = n as f64;
    let k2 = match target {
        Target::PlugIn => b.k2(),
        Target::Corrected => b.k2_corrected(),
    };
    Ok(b.k1() / nf + k2 / (nf * nf))
}

/// Contraction `sum g^alpha_{I} g^beta_{J} prod mu[...]` over all index
/// tuples, with `split` giving the lengths of the two derivative index
/// lists and `groups` the positions (into the concatenated tuple) joined
/// by each joint moment.
fn contract(
    ga: &PartialDerivativeTable,
    gb: &PartialDerivativeTable,
    jm: &JointMomentSet,
    split: (usize, usize),
    groups: &[&[usize]],
) -> Result<f64> {
    let (la, lb) = split;
    let mut total = 0.0;
    let mut key = Vec::new();
    for_each_tuple(jm.dim(), la + lb, |idx| {
        let (ia, ib) = idx.split_at(la);
        let x = ga.get(ia)?;
        if x == 0.0 {
            return Ok(());
        }
        let y = gb.get(ib)?;
        if y == 0.0 {
            return Ok(());
        }
        let mut prod = x * y;
        for g in groups {
            key.clear();
            key.extend(g.iter().map(|&p| idx[p]));
            prod *= jm.get(&key)?;
        }
        total += prod;
        Ok(())
    })?;
    Ok(total)
}

fn check_tables(g: &[PartialDerivativeTable], jm: &JointMomentSet, order: usize) -> Result<()> {
    if g.is_empty() {
        return invalid("at least one component is required");
    }
    for t in g {
        if t.q() != jm.dim() {
            return invalid(format!(
                "g has {} arguments, moments have dimension {}",
                t.q(),
                jm.dim()
            ));
        }
        if t.order() < order {
            return invalid(format!("g tables must reach order {order}"));
        }
    }
    Ok(())
}

fn matrix(q: usize, mut f: impl FnMut(usize, usize) -> Result<f64>) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(q, q);
    for i in 0..q {
        for j in 0..q {
            m[(i, j)] = f(i, j)?;
        }
    }
    Ok(m)
}

/// Bundle for `T^alpha = g^alpha(mu)`, `mu` the mean vector of one law.
pub fn mean_function_cov_bundle(g: &[PartialDerivativeTable], jm: &JointMomentSet) -> Result<CovDerivativeBundle> {
    check_tables(g, jm, 3)?;
    let q = g.len();
    let aa = matrix(q, |a, b| contract(&g[a], &g[b], jm, (1, 1), &[&[0, 1]]))?;
    let abab = matrix(q, |a, b| contract(&g[a], &g[b], jm, (2, 2), &[&[0, 2], &[1, 3]]))?;
    let a2a = matrix(q, |a, b| contract(&g[a], &g[b], jm, (2, 1), &[&[0, 1, 2]]))?;
    let a2bb = matrix(q, |a, b| contract(&g[a], &g[b], jm, (3, 1), &[&[0, 1], &[2, 3]]))?;
    CovDerivativeBundle::one_sample(aa, a2a, abab, a2bb)
}

/// Set partitions of `0..k`, each as a list of blocks.
fn set_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![vec![]];
    for item in 0..k {
        let mut next = Vec::new();
        for p in &out {
            for i in 0..p.len() {
                let mut q = p.clone();
                q[i].push(item);
                next.push(q);
            }
            let mut q = p.clone();
            q.push(vec![item]);
            next.push(q);
        }
        out = next;
    }
    out
}

/// A vector functional `T^alpha = g^alpha(S)` of one univariate law whose
/// statistics `S` are means and central moments, so that every derivative
/// of `T` is a polynomial in the deviations.
#[derive(Debug, Clone)]
pub struct StatFunctional {
    g: Vec<PartialDerivativeTable>,
    s: StatMoments,
}

impl StatFunctional {
    pub fn new(g: Vec<PartialDerivativeTable>, s: StatMoments) -> Result<Self> {
        if g.is_empty() {
            return invalid("at least one component is required");
        }
        if g.iter().any(|t| t.q() != s.q()) {
            return invalid("every g table must take one argument per statistic");
        }
        Ok(Self { g, s })
    }

    pub fn q(&self) -> usize {
        self.g.len()
    }

    /// `T^alpha_F` at the points labelled by `letters`.
    pub fn derivative(&self, alpha: usize, letters: &[usize]) -> Result<CenteredPoly> {
        let g = &self.g[alpha];
        if letters.len() > g.order() {
            return invalid(format!("derivative of order {} needs a deeper g table", letters.len()));
        }
        let stats = self.s.stats();
        let mut out = CenteredPoly::default();
        for blocks in set_partitions(letters.len()) {
            let parts: Vec<Vec<CenteredPoly>> = blocks
                .iter()
                .map(|blk| {
                    let l: Vec<usize> = blk.iter().map(|&p| letters[p]).collect();
                    stats.iter().map(|st| st.derivative(&l, self.s.moments())).collect()
                })
                .collect::<Result<_>>()?;
            let m = blocks.len();
            let mut idx = vec![0usize; m];
            loop {
                let c = g.get(&idx)?;
                if c != 0.0 {
                    let mut prod = CenteredPoly::constant(c);
                    for (b, &i) in idx.iter().enumerate() {
                        prod = prod.mul(&parts[b][i]);
                    }
                    out.add_scaled(&prod, 1.0);
                }
                let mut pos = 0;
                while pos < m {
                    idx[pos] += 1;
                    if idx[pos] < stats.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == m {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn integrate_pair(&self, left: &[usize], right: &[usize]) -> Result<DMatrix<f64>> {
        let q = self.q();
        let l: Vec<CenteredPoly> = (0..q).map(|a| self.derivative(a, left)).collect::<Result<_>>()?;
        let r: Vec<CenteredPoly> = (0..q).map(|a| self.derivative(a, right)).collect::<Result<_>>()?;
        matrix(q, |a, b| l[a].mul(&r[b]).integrate(self.s.moments()))
    }

    pub fn cov_bundle(&self) -> Result<CovDerivativeBundle> {
        let aa = self.integrate_pair(&[0], &[0])?;
        let a2a = self.integrate_pair(&[0, 0], &[0])?;
        let abab = self.integrate_pair(&[1, 0], &[0, 1])?;
        let a2bb = self.integrate_pair(&[0, 0, 1], &[1])?;
        CovDerivativeBundle::one_sample(aa, a2a, abab, a2bb)
    }

    /// The integrals entering the covariance of the bias estimate.
    pub fn bias_cov_terms(&self) -> Result<BiasCovTerms> {
        let t2 = (0..self.q())
            .map(|a| self.derivative(a, &[0, 0])?.integrate(self.s.moments()))
            .collect::<Result<Vec<f64>>>()?;
        Ok(BiasCovTerms {
            xx_xx: self.integrate_pair(&[0, 0], &[0, 0])?,
            t2,
            xxy_yy: self.integrate_pair(&[0, 0, 1], &[1, 1])?,
            xxz_yyz: self.integrate_pair(&[0, 0, 2], &[1, 1, 2])?,
        })
    }
}

/// Per-sample integrals of second and third derivatives:
/// `int T^alpha(xx) T^beta(xx)`, `T^alpha(a^2)`,
/// `int int T^alpha(xxy) T^beta(yy)` and `int int int T^alpha(xxz) T^beta(yyz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasCovTerms {
    pub xx_xx: DMatrix<f64>,
    pub t2: Vec<f64>,
    pub xxy_yy: DMatrix<f64>,
    pub xxz_yyz: DMatrix<f64>,
}

impl BiasCovTerms {
    /// The same integrals for `T^alpha = g^alpha(mu)` of one law's mean vector.
    pub fn mean_function(g: &[PartialDerivativeTable], jm: &JointMomentSet) -> Result<Self> {
        check_tables(g, jm, 3)?;
        let q = g.len();
        let mut t2 = Vec::with_capacity(q);
        for ga in g {
            let mut v = 0.0;
            for_each_tuple(jm.dim(), 2, |idx| {
                v += ga.get(idx)? * jm.get(idx)?;
                Ok(())
            })?;
            t2.push(v);
        }
        Ok(Self {
            xx_xx: matrix(q, |a, b| contract(&g[a], &g[b], jm, (2, 2), &[&[0, 1, 2, 3]]))?,
            t2,
            xxy_yy: matrix(q, |a, b| contract(&g[a], &g[b], jm, (3, 2), &[&[0, 1], &[2, 3, 4]]))?,
            xxz_yyz: matrix(q, |a, b| {
                contract(&g[a], &g[b], jm, (3, 3), &[&[0, 1], &[3, 4], &[2, 5]])
            })?,
        })
    }

    /// `int B_F(x)^2`-type matrix for this sample, before the `lambda_a^3` weight.
    pub fn v(&self) -> DMatrix<f64> {
        let q = self.t2.len();
        let outer = DMatrix::from_fn(q, q, |a, b| self.t2[a] * self.t2[b]);
        &self.xx_xx - outer + sym(&self.xxy_yy) + &self.xxz_yyz
    }
}

/// `V = sum_a lambda_a^3 V_a`, the influence variance of `B = sum_a lambda_a T(a^2)`.
pub fn bias_influence_variance(terms: &[BiasCovTerms], lambdas: &[f64]) -> Result<DMatrix<f64>> {
    if terms.is_empty() || terms.len() != lambdas.len() {
        return invalid("one set of bias terms per sample is required");
    }
    let q = terms[0].t2.len();
    let mut out = DMatrix::zeros(q, q);
    for (t, l) in terms.iter().zip(lambdas) {
        if t.t2.len() != q {
            return invalid("bias terms disagree on the number of components");
        }
        out += t.v() * l.powi(3);
    }
    Ok(out)
}

/// `n^{-3} V / 4`, estimating the covariance of the bias estimate
/// `n^{-1} B(F_hat) / 2` with bias `O(n^{-4})`.
pub fn bias_estimate_cov(terms: &[BiasCovTerms], lambdas: &[f64], n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return invalid("sample size must be positive");
    }
    Ok(bias_influence_variance(terms, lambdas)? / (4.0 * (n as f64).powi(3)))
}

/// Variance estimates of `1/mu_hat` from the plug-in mean and variance:
/// `(n-1)^{-1} mu^{-4} mu_2 - 6 n^{-2} mu^{-6} mu_2^2` and the variant with
/// `s^2 = mu_2 n/(n-1)`, `n^{-1} mu^{-4} s^2 - 6 n^{-2} mu^{-6} s^4`.
pub fn reciprocal_mean_variance(mean: f64, mu2: f64, n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return invalid("variance estimate needs n >= 2");
    }
    if mean == 0.0 {
        return Err(crate::Error::Degenerate("mean is zero".into()));
    }
    let nf = n as f64;
    let t_hat = mu2 / (nf - 1.0) / mean.powi(4) - 6.0 * mu2 * mu2 / (nf * nf * mean.powi(6));
    let s2 = mu2 * nf / (nf - 1.0);
    let t_star = s2 / nf / mean.powi(4) - 6.0 * s2 * s2 / (nf * nf * mean.powi(6));
    Ok((t_hat, t_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..=4).map(|k| set_partitions(k).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15]);
    }
}
