use crate::error::{invalid, Result};

/// Central finite-difference approximation of the first von Mises
/// derivative of `t` at the atom `x`, for the law with `atoms` and `probs`.
///
/// `t` receives atoms and possibly signed weights summing to one.
pub fn gateaux_numeric<A: Clone>(
    t: impl Fn(&[A], &[f64]) -> f64,
    atoms: &[A],
    probs: &[f64],
    x: &A,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return invalid(format!("step eps = {eps} outside (0, 0.5]"));
    }
    if atoms.is_empty() || atoms.len() != probs.len() {
        return invalid("atoms and probabilities must be non-empty and of equal length");
    }
    let mut mixed_atoms = atoms.to_vec();
    mixed_atoms.push(x.clone());
    let eval = |e: f64| {
        let mut w: Vec<f64> = probs.iter().map(|p| p * (1.0 - e)).collect();
        w.push(e);
        t(&mixed_atoms, &w)
    };
    Ok((eval(eps) - eval(-eps)) / (2.0 * eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_derivative_is_deviation() {
        let mean = |a: &[f64], w: &[f64]| a.iter().zip(w).map(|(x, p)| x * p).sum::<f64>();
        let d = gateaux_numeric(mean, &[0.0, 1.0, 3.0], &[0.5, 0.3, 0.2], &2.5, 1e-3).unwrap();
        assert!((d - (2.5 - 0.9)).abs() < 1e-12);
        assert!(gateaux_numeric(mean, &[0.0], &[1.0], &1.0, 0.7).is_err());
    }
}
