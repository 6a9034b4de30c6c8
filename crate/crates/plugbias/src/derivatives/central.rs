//! Derivatives of central moments and their integrated brackets.

use crate::empirical::MomentSet;
use crate::error::{invalid, Result};
use crate::numeric::falling;

/// `mu_{rF}(x_1 .. x_p)` with `h_i = x_i - mu`.
///
/// The printed form divides by `h_i`; here every term is multiplied out so
/// that `h_i = 0` is an ordinary point.
pub fn mu_r_derivative(r: usize, points: &[f64], m: &MomentSet) -> Result<f64> {
    if r < 2 {
        return invalid(format!("central moment order r = {r} must be at least 2"));
    }
    let p = points.len();
    if p == 0 {
        return invalid("at least one point is required");
    }
    m.require(r)?;
    if p > r {
        return Ok(0.0);
    }
    let h: Vec<f64> = points.iter().map(|x| x - m.mean()).collect();
    let (ri, pi) = (r as i64, p as i64);
    let prod: f64 = h.iter().product();
    let mut sum = 0.0;
    for i in 0..p {
        let others: f64 = h.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).product();
        sum += (h[i].powi((r - p + 1) as i32) - m.at(ri - pi + 1)) * others;
    }
    let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * (falling(r as f64, p as u32) * m.at(ri - pi) * prod - falling(r as f64, p as u32 - 1) * sum))
}

/// Evaluates the tabulated closed forms for `2 <= r <= 6`.
pub fn appendix_d_value(r: usize, points: &[f64], m: &MomentSet) -> Result<f64> {
    let p = points.len();
    if !(2..=6).contains(&r) || p == 0 || p > r {
        return invalid(format!("no tabulated derivative for r = {r}, p = {p}"));
    }
    m.require(r)?;
    let h: Vec<f64> = points.iter().map(|x| x - m.mean()).collect();
    let mu = |k: usize| m.central()[k];
    if p == 1 {
        return Ok(h[0].powi(r as i32) - mu(r) - r as f64 * h[0] * mu(r - 1));
    }
    // (coefficient of prod h times mu_{r-p}, coefficient of the symmetric sum
    // of (h_i^{r-p+1} - mu_{r-p+1}) prod_{j != i} h_j)
    let (a, b): (f64, f64) = match (r, p) {
        (2, 2) => (-2.0, 0.0),
        (3, 2) => (0.0, -3.0),
        (3, 3) => (12.0, 0.0),
        (4, 2) => (12.0, -4.0),
        (4, 3) => (0.0, 12.0),
        (4, 4) => (-72.0, 0.0),
        (5, 2) => (20.0, -5.0),
        (5, 3) => (-60.0, 20.0),
        (5, 4) => (0.0, -60.0),
        (5, 5) => (480.0, 0.0),
        (6, 2) => (30.0, -6.0),
        (6, 3) => (-120.0, 30.0),
        (6, 4) => (360.0, -120.0),
        (6, 5) => (0.0, 360.0),
        (6, 6) => (-3600.0, 0.0),
        _ => unreachable!(),
    };
    let prod: f64 = h.iter().product();
    let k = r - p + 1;
    let sum: f64 = (0..p)
        .map(|i| {
            let others: f64 = h.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).product();
            (h[i].powi(k as i32) - mu(k)) * others
        })
        .sum();
    Ok(a * mu(r - p) * prod + b * sum)
}

/// `mu_r(1^{i_1} 1^{i_2} ...)`, the integrated derivative with argument
/// groups of sizes `i_1, i_2, ...`.
pub fn mu_r_bracket(r: usize, partition: &[usize], m: &MomentSet) -> Result<f64> {
    if r < 2 {
        return invalid(format!("central moment order r = {r} must be at least 2"));
    }
    if partition.is_empty() || partition.contains(&0) {
        return invalid("partition parts must be positive");
    }
    let q: usize = partition.iter().sum();
    if q > r {
        return Ok(0.0);
    }
    let needed = partition.iter().copied().max().unwrap_or(0).max(r);
    m.require(needed)?;
    let (ri, qi) = (r as i64, q as i64);
    let prod: f64 = partition.iter().map(|&i| m.at(i as i64)).product();
    let mut sum = 0.0;
    for (idx, &i) in partition.iter().enumerate() {
        let others: f64 = partition
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, &v)| m.at(v as i64))
            .product();
        let ii = i as i64;
        sum += i as f64 * (m.at(ri - qi + ii) - m.at(ri - qi + 1) * m.at(ii - 1)) * others;
    }
    let sign = if q.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * (falling(r as f64, q as u32) * m.at(ri - qi) * prod - falling(r as f64, q as u32 - 1) * sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments() -> MomentSet {
        MomentSet::new(0.4, &[1.3, 0.7, 4.1, 2.2, 16.0, 9.0, 70.0]).unwrap()
    }

    #[test]
    fn second_moment_derivatives() {
        let m = moments();
        let (x, y) = (1.7, -0.2);
        let hx = x - 0.4;
        let hy = y - 0.4;
        assert!((mu_r_derivative(2, &[x], &m).unwrap() - (hx * hx - 1.3)).abs() < 1e-14);
        assert!((mu_r_derivative(2, &[x, y], &m).unwrap() + 2.0 * hx * hy).abs() < 1e-14);
        assert_eq!(mu_r_derivative(2, &[x, y, x], &m).unwrap(), 0.0);
        assert!(mu_r_derivative(1, &[x], &m).is_err());
    }

    #[test]
    fn zero_deviation_is_regular() {
        let m = moments();
        let v = mu_r_derivative(4, &[0.4, 1.0, 2.0], &m).unwrap();
        let d = appendix_d_value(4, &[0.4, 1.0, 2.0], &m).unwrap();
        assert!((v - d).abs() < 1e-12);
    }

    #[test]
    fn bracket_standard_partitions() {
        let m = moments();
        let mu = |k: usize| m.central()[k];
        for r in 2..=8usize {
            let rf = r as f64;
            let v = mu_r_bracket(r, &[2], &m).unwrap();
            let expect = falling(rf, 2) * m.at(r as i64 - 2) * mu(2) - 2.0 * rf * mu(r);
            assert!((v - expect).abs() < 1e-12 * (1.0 + expect.abs()), "r = {r}");
        }
        assert_eq!(mu_r_bracket(4, &[2, 2, 2], &m).unwrap(), 0.0);
        assert!((mu_r_bracket(3, &[3], &m).unwrap() - 12.0 * mu(3)).abs() < 1e-12);
        assert!((mu_r_bracket(3, &[2], &m).unwrap() + 6.0 * mu(3)).abs() < 1e-12);
    }
}
