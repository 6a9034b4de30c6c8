//! Seeded, parallel bias experiments.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baselines::{bootstrap_baseline, jackknife_baseline, BaselineEstimate};
use super::distribution::Distribution;
use crate::corrections::{plus_estimate, truncated_estimate};
use crate::empirical::Sample;
use crate::error::{invalid, unavailable, Error, Result};
use crate::functionals::{Family, FunctionalId, LawMoments};
use crate::numeric::pairwise_sum;

/// How the corrected estimate is formed from the correction series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorFamily {
    S,
    T,
    /// `S_np` replaced by `c` whenever `|T(F_hat)| >= u`.
    TruncatedS,
    /// `S_nq` with `q <= p` the longest run of decreasing terms.
    Plus,
}

impl fmt::Display for EstimatorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorFamily::S => "S",
            EstimatorFamily::T => "T",
            EstimatorFamily::TruncatedS => "truncated-S",
            EstimatorFamily::Plus => "plus",
        })
    }
}

impl FromStr for EstimatorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s" => Ok(EstimatorFamily::S),
            "t" => Ok(EstimatorFamily::T),
            "truncated-s" | "truncated" => Ok(EstimatorFamily::TruncatedS),
            "plus" => Ok(EstimatorFamily::Plus),
            _ => invalid(format!(
                "unknown estimator family {s:?} (expected S, T, truncated-S or plus)"
            )),
        }
    }
}

/// Truncation gate: keep the estimate while `|T(F_hat)| < u`, else use `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub u: f64,
    pub c: f64,
}

impl Gate {
    /// `u = 10 |T(F)|` and `c = 1/u`.
    pub fn tenfold(truth: f64) -> Result<Self> {
        let u = 10.0 * truth.abs();
        if !(u > 0.0 && u.is_finite()) {
            return invalid("default gate needs a finite non-zero true value");
        }
        Ok(Self { u, c: 1.0 / u })
    }
}

/// Resampling competitor run on the same samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    Jackknife,
    /// Single-level bootstrap with this many resamples.
    Bootstrap(usize),
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineKind::Jackknife => f.write_str("jackknife"),
            BaselineKind::Bootstrap(b) => write!(f, "bootstrap:{b}"),
        }
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.split_once(':') {
            None if lower == "jackknife" => Ok(BaselineKind::Jackknife),
            None if lower == "bootstrap" => Ok(BaselineKind::Bootstrap(200)),
            Some(("bootstrap", b)) => b
                .parse()
                .ok()
                .filter(|&b: &usize| b > 0)
                .map(BaselineKind::Bootstrap)
                .ok_or_else(|| Error::InvalidArgument(format!("bad resample count in {s:?}"))),
            _ => invalid(format!("unknown baseline {s:?} (expected jackknife or bootstrap:B)")),
        }
    }
}

/// One cell of a bias experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub functional: FunctionalId,
    pub distribution: Distribution,
    pub n: usize,
    pub p: usize,
    pub replications: usize,
    pub seed: u64,
    pub family: EstimatorFamily,
    /// Gate for [`EstimatorFamily::TruncatedS`]; [`Gate::tenfold`] when absent.
    pub gate: Option<Gate>,
    pub baselines: Vec<BaselineKind>,
    /// Run label carried into the report.
    pub run: usize,
    /// Thread count; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(functional: FunctionalId, distribution: Distribution, n: usize, p: usize, replications: usize) -> Self {
        Self {
            functional,
            distribution,
            n,
            p,
            replications,
            seed: 0,
            family: EstimatorFamily::S,
            gate: None,
            baselines: Vec::new(),
            run: 1,
            workers: None,
        }
    }
}

/// Summary of one estimator over the replicates of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub functional: String,
    pub distribution: String,
    pub estimator: String,
    pub run: usize,
    pub n: usize,
    pub p: usize,
    pub replications: usize,
    /// Replicates whose estimate was undefined or non-finite.
    pub failures: usize,
    pub mean: f64,
    pub truth: f64,
    pub bias: f64,
    /// `(mean - truth) / truth`, absent when the truth is zero.
    pub relative_bias: Option<f64>,
    /// Monte Carlo standard error of `mean`.
    pub std_error: f64,
    pub relative_std_error: Option<f64>,
    /// Statistic evaluations per replicate.
    pub evaluations: usize,
    pub seed: u64,
    /// Wall-clock time of the whole cell, baselines included. Not written
    /// to CSV.
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

/// The corrected estimator's report and one report per baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub primary: ExperimentReport,
    pub baselines: Vec<ExperimentReport>,
}

impl Experiment {
    pub fn reports(&self) -> impl Iterator<Item = &ExperimentReport> {
        std::iter::once(&self.primary).chain(&self.baselines)
    }
}

/// `T(F)` for a univariate law.
pub fn true_value(id: &FunctionalId, dist: &Distribution) -> Result<f64> {
    match *id {
        FunctionalId::ReturnPeriod { a, .. } => {
            let p = dist.cdf(a)?;
            if p <= 0.0 {
                return Err(Error::Degenerate(format!("P(X <= {a}) is zero under {dist}")));
            }
            Ok(1.0 / p)
        }
        _ if id.sample_dim() != Some(1) => unavailable(format!("{id} is not a univariate functional")),
        _ => id.value(&LawMoments::Univariate(dist.moments(id.moment_order())?)),
    }
}

/// `T(F_hat)` of a univariate data slice.
pub fn plug_in_value(id: &FunctionalId, xs: &[f64]) -> Result<f64> {
    let sample = Sample::univariate(xs.to_vec())?;
    Ok(id.estimate(&sample, Family::S, 1)?.plug_in)
}

fn corrected_value(cfg: &ExperimentConfig, gate: Option<Gate>, xs: Vec<f64>) -> Result<f64> {
    let id = &cfg.functional;
    let sample = Sample::univariate(xs)?;
    let n = sample.n();
    match cfg.family {
        EstimatorFamily::S | EstimatorFamily::T => {
            let family = if cfg.family == EstimatorFamily::S {
                Family::S
            } else {
                Family::T
            };
            Ok(id.estimate(&sample, family, cfg.p)?.corrected)
        }
        EstimatorFamily::TruncatedS => {
            let gate = gate.expect("gate resolved before the replicates run");
            let est = id.estimate(&sample, Family::S, cfg.p)?;
            truncated_estimate(est.corrected, est.plug_in, gate.u, gate.c)
        }
        EstimatorFamily::Plus => {
            let m = id.moments_of(&sample)?;
            Ok(plus_estimate(&id.series(&m, Family::S)?, n, cfg.p)?.0)
        }
    }
}

struct Replicate {
    primary: Option<f64>,
    baselines: Vec<Option<BaselineEstimate>>,
}

fn finite(r: Result<f64>) -> Option<f64> {
    r.ok().filter(|v| v.is_finite())
}

fn run_replicate(cfg: &ExperimentConfig, gate: Option<Gate>, index: usize) -> Result<Replicate> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let xs = cfg.distribution.sample(&mut rng, cfg.n)?;
    let stat = |d: &[f64]| plug_in_value(&cfg.functional, d);
    let baselines = cfg
        .baselines
        .iter()
        .map(|kind| {
            let est = match *kind {
                BaselineKind::Jackknife => jackknife_baseline(&xs, 1, stat),
                BaselineKind::Bootstrap(b) => bootstrap_baseline(&xs, 1, b, &mut rng, stat),
            };
            est.ok().filter(|e| e.value.is_finite())
        })
        .collect();
    let primary = finite(corrected_value(cfg, gate, xs));
    Ok(Replicate { primary, baselines })
}

fn summarize(
    cfg: &ExperimentConfig,
    estimator: String,
    truth: f64,
    values: &[f64],
    evaluations: usize,
    wall_clock_secs: f64,
) -> ExperimentReport {
    let count = values.len();
    let mean = pairwise_sum(values) / count as f64;
    let std_error = if count > 1 {
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        (pairwise_sum(&dev) / (count - 1) as f64 / count as f64).sqrt()
    } else {
        f64::NAN
    };
    let bias = mean - truth;
    let (relative_bias, relative_std_error) = if truth != 0.0 {
        (Some(bias / truth), Some(std_error / truth.abs()))
    } else {
        (None, None)
    };
    ExperimentReport {
        functional: cfg.functional.to_string(),
        distribution: cfg.distribution.to_string(),
        estimator,
        run: cfg.run,
        n: cfg.n,
        p: cfg.p,
        replications: cfg.replications,
        failures: cfg.replications - count,
        mean,
        truth,
        bias,
        relative_bias,
        std_error,
        relative_std_error,
        evaluations,
        seed: cfg.seed,
        wall_clock_secs,
    }
}

/// Draws `replications` samples of size `n`, applies the corrected estimator
/// and any baselines, and summarizes each against the true value.
///
/// Replicate `i` draws from the ChaCha stream `(seed, i)` and the summaries
/// are summed in replicate order, so the result does not depend on the
/// number of workers.
pub fn run_bias_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    if cfg.replications == 0 {
        return invalid("number of replications must be at least 1");
    }
    if cfg.n < 2 {
        return invalid("sample size must be at least 2");
    }
    if !(1..=4).contains(&cfg.p) {
        return invalid(format!("order p = {} outside 1..=4", cfg.p));
    }
    cfg.distribution.validate()?;
    let truth = true_value(&cfg.functional, &cfg.distribution)?;
    let gate = match (cfg.family, cfg.gate) {
        (EstimatorFamily::TruncatedS, None) => Some(Gate::tenfold(truth)?),
        (_, g) => g,
    };
    if let Some(g) = gate {
        if !(g.u > 0.0) || !g.c.is_finite() {
            return invalid("gate needs u > 0 and a finite c");
        }
    }
    let start = Instant::now();
    let work = || {
        (0..cfg.replications)
            .into_par_iter()
            .map(|i| run_replicate(cfg, gate, i))
            .collect::<Result<Vec<Replicate>>>()
    };
    let reps = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let secs = start.elapsed().as_secs_f64();
    let primary: Vec<f64> = reps.iter().filter_map(|r| r.primary).collect();
    if primary.is_empty() {
        return Err(Error::Degenerate(format!(
            "every replicate of {} failed",
            cfg.functional
        )));
    }
    let primary = summarize(cfg, cfg.family.to_string(), truth, &primary, 1, secs);
    let mut baselines = Vec::with_capacity(cfg.baselines.len());
    for (k, kind) in cfg.baselines.iter().enumerate() {
        let ests: Vec<BaselineEstimate> = reps.iter().filter_map(|r| r.baselines[k]).collect();
        if ests.is_empty() {
            return Err(Error::Degenerate(format!("every {kind} replicate failed")));
        }
        let values: Vec<f64> = ests.iter().map(|e| e.value).collect();
        baselines.push(summarize(
            cfg,
            kind.to_string(),
            truth,
            &values,
            ests[0].evaluations,
            secs,
        ));
    }
    Ok(Experiment { primary, baselines })
}
