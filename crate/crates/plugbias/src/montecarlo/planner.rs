//! Number of simulated samples needed to see the bias of a `p`th-order
//! estimate above Monte Carlo noise.

use serde::{Deserialize, Serialize};

use super::distribution::Distribution;
use crate::error::{invalid, unavailable, Result};
use crate::functionals::{Family, FunctionalId, LawMoments};

/// Simulation size for relative precision `eps` on the bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    /// `V_T = T(a, a)`.
    pub v_t: f64,
    /// Leading bias coefficient `S_p` of `S_np`.
    pub s_p: f64,
    /// `4 V_T / S_p^2`; `None` when `S_p` vanishes.
    pub phi: Option<f64>,
    /// `phi / eps^2`, the factor multiplying `n^{2p-1}`.
    pub coefficient: Option<f64>,
    /// `ceil(eps^-2 n^{2p-1} phi)`.
    pub required: Option<u64>,
}

/// `phi_p = 4 V_T S_p^{-2}` and `N = ceil(eps^-2 n^{2p-1} phi_p)` for a
/// univariate functional under `dist`.
pub fn plan_simulations(
    id: &FunctionalId,
    dist: &Distribution,
    n: usize,
    p: usize,
    eps: f64,
) -> Result<SimulationPlan> {
    if !(1..=4).contains(&p) {
        return invalid(format!("order p = {p} outside 1..=4"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid("precision eps must be positive");
    }
    if n == 0 {
        return invalid("sample size must be positive");
    }
    if id.sample_dim() != Some(1) {
        return unavailable(format!("{id} is not a univariate functional"));
    }
    let m = LawMoments::Univariate(dist.moments(id.moment_order())?);
    let series = id.series(&m, Family::S)?;
    if series.depth() < p {
        return unavailable(format!("{id} has no S_{p} term"));
    }
    let s_p = series.term(p)?;
    let v_t = id.influence_variance(&m)?;
    let scale = (0..=series.depth())
        .map(|i| series.term(i).map(f64::abs))
        .sum::<Result<f64>>()?;
    if s_p.abs() <= 1e-12 * scale {
        return Ok(SimulationPlan {
            v_t,
            s_p,
            phi: None,
            coefficient: None,
            required: None,
        });
    }
    let phi = 4.0 * v_t / (s_p * s_p);
    let coefficient = phi / (eps * eps);
    let required = (coefficient * (n as f64).powi(2 * p as i32 - 1)).ceil() as u64;
    Ok(SimulationPlan {
        v_t,
        s_p,
        phi: Some(phi),
        coefficient: Some(coefficient),
        required: Some(required),
    })
}
