//! Integrated products of central-moment derivatives for pairs and triples
//! of moment orders, in closed form.

use crate::empirical::MomentSet;
use crate::error::{invalid, Result};
use crate::numeric::falling;

use super::central::mu_r_bracket;

/// Bracket selector. Orders are central-moment indices `>= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bracket {
    /// `int mu_i(x) mu_j(x) dF`
    B11(usize, usize),
    /// `int mu_i(x) mu_j(x) mu_k(x) dF`
    B111(usize, usize, usize),
    /// `int mu_i(x, x) mu_j(x) dF`
    B21(usize, usize),
    /// `int int mu_i(x) mu_j(x, y, y) dF dF`
    B1x122(usize, usize),
    /// `int int mu_i(x, y) mu_j(x, y) dF dF`
    B12x12(usize, usize),
    /// `int int mu_i(x, y) mu_j(x) mu_k(y) dF dF`
    B12x1x2(usize, usize, usize),
    /// `2 [11_ij] [2_k] + 4 [12_i 1_j 2_k]`
    G(usize, usize, usize),
    /// `4 [1_i 12^2_j] + [2_i][2_j] + 2 [12_i 12_j]`
    H(usize, usize),
}

impl Bracket {
    fn orders(self) -> Vec<usize> {
        match self {
            Bracket::B11(i, j)
            | Bracket::B21(i, j)
            | Bracket::B1x122(i, j)
            | Bracket::B12x12(i, j)
            | Bracket::H(i, j) => vec![i, j],
            Bracket::B111(i, j, k) | Bracket::B12x1x2(i, j, k) | Bracket::G(i, j, k) => vec![i, j, k],
        }
    }
}

/// Evaluates a bracket from the closed forms.
pub fn moment_pair_brackets(b: Bracket, m: &MomentSet) -> Result<f64> {
    let orders = b.orders();
    if orders.iter().any(|&o| o < 2) {
        return invalid("bracket orders must be at least 2");
    }
    let total: usize = orders.iter().sum();
    m.require(total.max(3))?;
    let e = Eval { m };
    Ok(match b {
        Bracket::B11(i, j) => e.b11(i, j),
        Bracket::B111(i, j, k) => e.b111(i, j, k),
        Bracket::B21(i, j) => e.b21(i, j),
        Bracket::B1x122(i, j) => e.b1_122(i, j),
        Bracket::B12x12(i, j) => e.b12_12(i, j),
        Bracket::B12x1x2(i, j, k) => e.b12_1_2(i, j, k),
        Bracket::G(i, j, k) => 2.0 * e.b11(i, j) * mu_r_bracket(k, &[2], m)? + 4.0 * e.b12_1_2(i, j, k),
        Bracket::H(i, j) => {
            4.0 * e.b1_122(i, j) + mu_r_bracket(i, &[2], m)? * mu_r_bracket(j, &[2], m)? + 2.0 * e.b12_12(i, j)
        }
    })
}

struct Eval<'a> {
    m: &'a MomentSet,
}

impl Eval<'_> {
    fn mu(&self, k: i64) -> f64 {
        self.m.at(k)
    }

    fn b11(&self, i: usize, j: usize) -> f64 {
        let (fi, fj) = (i as f64, j as f64);
        let (i, j) = (i as i64, j as i64);
        fi * fj * self.mu(i - 1) * self.mu(j - 1) * self.mu(2)
            - (fi * self.mu(i - 1) * self.mu(j + 1) + fj * self.mu(j - 1) * self.mu(i + 1))
            + self.mu(i + j)
            - self.mu(i) * self.mu(j)
    }

    fn b111(&self, i: usize, j: usize, k: usize) -> f64 {
        let idx = [i as i64, j as i64, k as i64];
        let mu = |r: i64| self.mu(r);
        let f = |r: i64| r as f64;
        let [a, b, c] = idx;
        let mut v = -f(a) * f(b) * f(c) * mu(a - 1) * mu(b - 1) * mu(c - 1) * mu(3);
        // The three rotations choose which index plays the distinguished role.
        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
            v += f(x) * f(y) * mu(x - 1) * mu(y - 1) * (mu(z + 2) - mu(z) * mu(2));
            v -= f(x) * mu(x - 1) * (mu(y + z + 1) - mu(y + 1) * mu(z) - mu(z + 1) * mu(y));
            v -= mu(x) * mu(y + z);
        }
        v + mu(a + b + c) + 2.0 * mu(a) * mu(b) * mu(c)
    }

    fn b21(&self, i: usize, j: usize) -> f64 {
        let fi2 = falling(i as f64, 2);
        let (fi, fj) = (i as f64, j as f64);
        let (i, j) = (i as i64, j as i64);
        let mu = |r: i64| self.mu(r);
        -fi2 * fj * mu(i - 2) * mu(j - 1) * mu(3)
            + fi2 * mu(i - 2) * (mu(j + 2) - mu(j) * mu(2))
            + 2.0 * fi * fj * mu(j - 1) * (mu(i + 1) - mu(i - 1) * mu(2))
            - 2.0 * fi * (mu(i + j) - mu(i) * mu(j) - mu(i - 1) * mu(j + 1))
    }

    fn b1_122(&self, i: usize, j: usize) -> f64 {
        let fj2 = falling(j as f64, 2);
        let fj3 = falling(j as f64, 3);
        let fi = i as f64;
        let (i, j) = (i as i64, j as i64);
        let mu = |r: i64| self.mu(r);
        fj2 * ((-3.0 * fi * mu(i - 1) * mu(j - 1) + mu(i + j - 2) - mu(i) * mu(j - 2)) * mu(2)
            + 2.0 * mu(i + 1) * mu(j - 1))
            + fj3 * (fi * mu(i - 1) * mu(j - 3) * mu(2) * mu(2) - mu(j - 3) * mu(i + 1) * mu(2))
    }

    fn b12_12(&self, i: usize, j: usize) -> f64 {
        let (fi2, fj2) = (falling(i as f64, 2), falling(j as f64, 2));
        let (fi, fj) = (i as f64, j as f64);
        let (i, j) = (i as i64, j as i64);
        let mu = |r: i64| self.mu(r);
        fi2 * fj2 * mu(i - 2) * mu(j - 2) * mu(2) * mu(2)
            - 2.0 * (fi * fj2 * mu(i) * mu(j - 2) + fj * fi2 * mu(j) * mu(i - 2)) * mu(2)
            + 2.0 * fi * fj * (mu(i + j - 2) * mu(2) - mu(i - 1) * mu(j - 1) * mu(2) + mu(i) * mu(j))
    }

    fn a(&self, j: i64) -> f64 {
        self.mu(j + 1) - j as f64 * self.mu(j - 1) * self.mu(2)
    }

    fn b(&self, i: i64, j: i64) -> f64 {
        self.mu(i + j - 1) - j as f64 * self.mu(j - 1) * self.mu(i) - self.mu(i - 1) * self.mu(j)
    }

    fn b12_1_2(&self, i: usize, j: usize, k: usize) -> f64 {
        let fi2 = falling(i as f64, 2);
        let fi = i as f64;
        let (i, j, k) = (i as i64, j as i64, k as i64);
        fi2 * self.mu(i - 2) * self.a(j) * self.a(k) - fi * (self.b(i, j) * self.a(k) + self.b(i, k) * self.a(j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_pair_at_normal() {
        let m = MomentSet::new(0.0, &[1.0, 0.0, 3.0, 0.0, 15.0]).unwrap();
        assert!((moment_pair_brackets(Bracket::B11(2, 2), &m).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pair_bracket_is_symmetric() {
        let m = MomentSet::new(0.5, &[1.2, 0.3, 4.0, 2.1, 18.0, 9.0, 80.0]).unwrap();
        for (i, j) in [(2, 3), (3, 5), (2, 6)] {
            let a = moment_pair_brackets(Bracket::B11(i, j), &m).unwrap();
            let b = moment_pair_brackets(Bracket::B11(j, i), &m).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert!(moment_pair_brackets(Bracket::B11(1, 2), &m).is_err());
        assert!(moment_pair_brackets(Bracket::B111(3, 3, 3), &m).is_err());
    }
}
