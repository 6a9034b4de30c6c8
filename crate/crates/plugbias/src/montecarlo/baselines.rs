//! Resampling bias corrections used as comparison baselines.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::CompensatedSum;

/// A baseline estimate and the number of statistic evaluations it took.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineEstimate {
    pub value: f64,
    pub evaluations: usize,
}

/// First-order jackknife `n T(F_hat) - (n - 1) mean_i T(F_hat_{(i)})`.
///
/// `data` holds `n` observations of `dim` coordinates, row-major. Each
/// leave-one-out sample is the first `n - 1` rows after swapping row `i`
/// to the end, so `stat` must be symmetric in the observations.
pub fn jackknife_baseline(
    data: &[f64],
    dim: usize,
    mut stat: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<BaselineEstimate> {
    if dim == 0 || !data.len().is_multiple_of(dim) {
        return invalid("data length is not a multiple of the dimension");
    }
    let n = data.len() / dim;
    if n < 2 {
        return invalid("jackknife needs at least two observations");
    }
    let full = stat(data)?;
    let mut buf = data.to_vec();
    let last = n - 1;
    let mut loo = CompensatedSum::new();
    for i in 0..n {
        swap_rows(&mut buf, dim, i, last);
        loo.add(stat(&buf[..last * dim])?);
        swap_rows(&mut buf, dim, i, last);
    }
    let nf = n as f64;
    Ok(BaselineEstimate {
        value: nf * full - (nf - 1.0) * loo.value() / nf,
        evaluations: n + 1,
    })
}

fn swap_rows(buf: &mut [f64], dim: usize, i: usize, j: usize) {
    if i != j {
        for c in 0..dim {
            buf.swap(i * dim + c, j * dim + c);
        }
    }
}

/// Single-level bootstrap correction `2 T(F_hat) - mean_b T(F_hat*_b)` over
/// `b` resamples drawn with `rng`.
pub fn bootstrap_baseline<R: Rng + ?Sized>(
    data: &[f64],
    dim: usize,
    b: usize,
    rng: &mut R,
    mut stat: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<BaselineEstimate> {
    if b == 0 {
        return invalid("bootstrap needs at least one resample");
    }
    if dim == 0 || !data.len().is_multiple_of(dim) || data.is_empty() {
        return invalid("data length is not a positive multiple of the dimension");
    }
    let n = data.len() / dim;
    let full = stat(data)?;
    let mut resample = vec![0.0; data.len()];
    let mut acc = CompensatedSum::new();
    for _ in 0..b {
        for row in resample.chunks_exact_mut(dim) {
            let k = rng.random_range(0..n);
            row.copy_from_slice(&data[k * dim..(k + 1) * dim]);
        }
        acc.add(stat(&resample)?);
    }
    Ok(BaselineEstimate {
        value: 2.0 * full - acc.value() / b as f64,
        evaluations: b + 1,
    })
}
