//! Exact expectations of plug-in statistics under small discrete laws, by
//! summing over every multinomial count vector.

use rayon::prelude::*;

use crate::empirical::{MomentSet, Sample};
use crate::error::{invalid, Error, Result};
use crate::numeric::{binomial, ln_factorials, CompensatedSum};

/// Default cap on the number of count vectors enumerated.
pub const DEFAULT_BUDGET: f64 = 1e6;

/// Finite law with strictly positive probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<A = f64> {
    atoms: Vec<A>,
    probs: Vec<f64>,
}

impl<A: Clone> DiscreteDistribution<A> {
    pub fn new(atoms: Vec<A>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return invalid("atoms and probabilities must be non-empty and of equal length");
        }
        if probs.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return invalid("probabilities must be positive");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        Ok(Self { atoms, probs })
    }

    pub fn atoms(&self) -> &[A] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn m(&self) -> usize {
        self.atoms.len()
    }
}

impl DiscreteDistribution<f64> {
    /// Population moments through `order`.
    pub fn moments(&self, order: usize) -> Result<MomentSet> {
        MomentSet::from_weighted(&self.atoms, &self.probs, order)
    }
}

impl DiscreteDistribution<Vec<f64>> {
    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    /// Atoms flattened row-major, for joint-moment computations.
    pub fn flat_atoms(&self) -> Vec<f64> {
        self.atoms.concat()
    }
}

/// A sample of size `n` summarized by how often each atom occurs.
#[derive(Debug, Clone, Copy)]
pub struct Tally<'a, A> {
    pub atoms: &'a [A],
    pub counts: &'a [usize],
    pub n: usize,
}

impl<A: Clone> Tally<'_, A> {
    /// Empirical weights `c_i / n`.
    pub fn weights(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }

    /// The observations, each atom repeated by its count.
    pub fn expanded(&self) -> Vec<A> {
        self.atoms
            .iter()
            .zip(self.counts)
            .flat_map(|(a, &c)| std::iter::repeat_n(a.clone(), c))
            .collect()
    }

    /// Atoms with non-zero count and their empirical weights.
    pub fn support(&self) -> (Vec<A>, Vec<f64>) {
        let mut atoms = Vec::new();
        let mut w = Vec::new();
        for (a, &c) in self.atoms.iter().zip(self.counts) {
            if c > 0 {
                atoms.push(a.clone());
                w.push(c as f64 / self.n as f64);
            }
        }
        (atoms, w)
    }
}

impl Tally<'_, f64> {
    pub fn sample(&self) -> Sample {
        Sample::univariate(self.expanded()).expect("tally of positive size")
    }

    /// Plug-in moments of the tallied sample.
    pub fn moments(&self, order: usize) -> Result<MomentSet> {
        let (atoms, w) = self.support();
        MomentSet::from_weighted(&atoms, &w, order)
    }
}

/// Number of count vectors of `m` atoms summing to `n`.
pub fn composition_count(n: usize, m: usize) -> f64 {
    binomial(n + m - 1, m - 1)
}

fn compositions(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, slot: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slot == m - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            go(left - c, slot + 1, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, 0, m, &mut Vec::with_capacity(m), &mut out);
    out
}

fn check_budget(count: f64, budget: f64) -> Result<()> {
    if count > budget {
        return Err(Error::InvalidArgument(format!(
            "enumeration needs {count} count vectors, budget is {budget}"
        )));
    }
    Ok(())
}

/// `E stat(F_hat)` for samples of size `n` from `dist`.
pub fn exact_expectation<A, S>(stat: S, dist: &DiscreteDistribution<A>, n: usize) -> Result<f64>
where
    A: Clone + Sync,
    S: Fn(&Tally<A>) -> f64 + Sync,
{
    exact_expectation_with_budget(stat, dist, n, DEFAULT_BUDGET)
}

pub fn exact_expectation_with_budget<A, S>(
    stat: S,
    dist: &DiscreteDistribution<A>,
    n: usize,
    budget: f64,
) -> Result<f64>
where
    A: Clone + Sync,
    S: Fn(&Tally<A>) -> f64 + Sync,
{
    if n == 0 {
        return invalid("sample size must be positive");
    }
    let m = dist.m();
    check_budget(composition_count(n, m), budget)?;
    let lf = ln_factorials(n);
    let lp: Vec<f64> = dist.probs.iter().map(|p| p.ln()).collect();
    let comps = compositions(n, m);
    let chunk_sums: Vec<f64> = comps
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = CompensatedSum::new();
            for counts in chunk {
                let lw = lf[n] + counts.iter().zip(&lp).map(|(&c, l)| c as f64 * l - lf[c]).sum::<f64>();
                let tally = Tally {
                    atoms: &dist.atoms,
                    counts,
                    n,
                };
                acc.add(lw.exp() * stat(&tally));
            }
            acc.value()
        })
        .collect();
    Ok(chunk_sums.into_iter().collect::<CompensatedSum>().value())
}

/// Sum of the multinomial probabilities; equals one up to rounding.
pub fn total_probability<A: Clone + Sync>(dist: &DiscreteDistribution<A>, n: usize) -> Result<f64> {
    exact_expectation(|_| 1.0, dist, n)
}

/// `E stat(F_hat_1, ..., F_hat_k)` for independent samples of sizes `ns`.
pub fn exact_expectation_multi<A, S>(stat: S, dists: &[DiscreteDistribution<A>], ns: &[usize]) -> Result<f64>
where
    A: Clone + Sync,
    S: Fn(&[Tally<A>]) -> f64 + Sync,
{
    if dists.is_empty() || dists.len() != ns.len() {
        return invalid("one sample size per distribution is required");
    }
    let total: f64 = dists
        .iter()
        .zip(ns)
        .map(|(d, &n)| composition_count(n, d.m()))
        .product();
    check_budget(total, DEFAULT_BUDGET)?;
    let per: Vec<Vec<(Vec<usize>, f64)>> = dists
        .iter()
        .zip(ns)
        .map(|(d, &n)| {
            let lf = ln_factorials(n);
            compositions(n, d.m())
                .into_iter()
                .map(|c| {
                    let lw = lf[n]
                        + c.iter()
                            .zip(&d.probs)
                            .map(|(&k, p)| k as f64 * p.ln() - lf[k])
                            .sum::<f64>();
                    (c, lw.exp())
                })
                .collect()
        })
        .collect();
    let mut acc = CompensatedSum::new();
    let mut pos = vec![0usize; dists.len()];
    loop {
        let tallies: Vec<Tally<A>> = (0..dists.len())
            .map(|s| Tally {
                atoms: &dists[s].atoms,
                counts: &per[s][pos[s]].0,
                n: ns[s],
            })
            .collect();
        let w: f64 = (0..dists.len()).map(|s| per[s][pos[s]].1).product();
        acc.add(w * stat(&tallies));
        let mut s = 0;
        while s < pos.len() {
            pos[s] += 1;
            if pos[s] < per[s].len() {
                break;
            }
            pos[s] = 0;
            s += 1;
        }
        if s == pos.len() {
            break;
        }
    }
    Ok(acc.value())
}

/// Exact bias `E stat_n(F_hat) - truth` for every `n` in `ns`.
pub fn exact_bias_curve<A, S, G>(
    family: G,
    dist: &DiscreteDistribution<A>,
    ns: &[usize],
    truth: f64,
) -> Result<Vec<(usize, f64)>>
where
    A: Clone + Sync,
    S: Fn(&Tally<A>) -> f64 + Sync,
    G: Fn(usize) -> S,
{
    ns.iter()
        .map(|&n| Ok((n, exact_expectation(family(n), dist, n)? - truth)))
        .collect()
}

/// `sup_n |bias_n| n^p` over a bias curve.
pub fn bias_order_bound(curve: &[(usize, f64)], p: usize) -> f64 {
    curve
        .iter()
        .map(|(n, b)| b.abs() * (*n as f64).powi(p as i32))
        .fold(0.0, f64::max)
}

/// Whether `|bias_n| n^p` shows no monotone growth across the curve: the
/// last scaled value does not exceed the first by more than `slack`.
pub fn is_order_bounded(curve: &[(usize, f64)], p: usize, slack: f64) -> bool {
    let scaled: Vec<f64> = curve
        .iter()
        .map(|(n, b)| b.abs() * (*n as f64).powi(p as i32))
        .collect();
    let increasing = scaled.windows(2).all(|w| w[1] > w[0]);
    match (scaled.first(), scaled.last()) {
        (Some(first), Some(last)) => !(increasing && *last > first * (1.0 + slack)),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_atoms() -> DiscreteDistribution {
        DiscreteDistribution::new(vec![0.0, 1.0, 3.0], vec![0.5, 0.3, 0.2]).unwrap()
    }

    #[test]
    fn probabilities_sum_to_one() {
        for n in [1, 4, 12] {
            assert!((total_probability(&three_atoms(), n).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_is_unbiased_and_variance_shrinks() {
        let d = three_atoms();
        let truth = d.moments(2).unwrap();
        for n in [2, 5, 9] {
            let e = exact_expectation(|t| t.moments(2).unwrap().mean(), &d, n).unwrap();
            assert!((e - truth.mean()).abs() < 1e-13);
            let v = exact_expectation(|t| t.moments(2).unwrap().mu(2).unwrap(), &d, n).unwrap();
            let expect = (1.0 - 1.0 / n as f64) * truth.mu(2).unwrap();
            assert!((v - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let d = DiscreteDistribution::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.2; 5]).unwrap();
        let err = exact_expectation(|_| 0.0, &d, 200).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(ref m) if m.contains("count vectors")));
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(DiscreteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn two_independent_samples() {
        let d = three_atoms();
        let e = exact_expectation_multi(
            |t| t[0].moments(2).unwrap().mean() * t[1].moments(2).unwrap().mean(),
            &[d.clone(), d.clone()],
            &[3, 4],
        )
        .unwrap();
        let mu = d.moments(2).unwrap().mean();
        assert!((e - mu * mu).abs() < 1e-13);
    }
}
