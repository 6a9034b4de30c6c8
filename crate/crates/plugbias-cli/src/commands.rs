//! The four subcommands.

use std::fs;
use std::io::Write;
use std::path::Path;

use plugbias::corrections::{plus_estimate, truncated_estimate};
use plugbias::empirical::{JointMomentSet, MomentSet, Sample};
use plugbias::functionals::{Family, FunctionalId, LawMoments};
use plugbias::montecarlo::{
    markdown_table, plan_simulations, run_bias_experiment, write_csv, BaselineKind, Distribution, EstimatorFamily,
    ExperimentConfig, Gate,
};
use plugbias::oracle::{bias_order_bound, exact_bias_curve, is_order_bounded, DiscreteDistribution, Tally};

use crate::config::Flags;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
    Markdown,
}

fn format(flags: &Flags, default: Format) -> Result<Format, CliError> {
    match flags.format.as_deref().map(str::to_ascii_lowercase).as_deref() {
        None => Ok(default),
        Some("text") => Ok(Format::Text),
        Some("csv") => Ok(Format::Csv),
        Some("markdown" | "md") => Ok(Format::Markdown),
        Some(other) => Err(CliError::config(format!(
            "unknown format {other:?} (expected text, csv or markdown)"
        ))),
    }
}

fn family(flags: &Flags) -> Result<EstimatorFamily, CliError> {
    let family = match &flags.family {
        Some(f) => f.parse()?,
        None => EstimatorFamily::S,
    };
    Ok(if flags.u.is_some() && family == EstimatorFamily::S {
        EstimatorFamily::TruncatedS
    } else {
        family
    })
}

/// `--u` with `--c` defaulting to `u`.
fn gate(flags: &Flags) -> Result<Option<Gate>, CliError> {
    match (flags.u, flags.c) {
        (None, None) => Ok(None),
        (None, Some(_)) => Err(CliError::config("--c needs --u")),
        (Some(u), c) if u > 0.0 => Ok(Some(Gate { u, c: c.unwrap_or(u) })),
        (Some(_), _) => Err(CliError::config("--u must be positive")),
    }
}

fn orders(flags: &Flags, default: &[usize]) -> Result<Vec<usize>, CliError> {
    let ps = if flags.p.is_empty() {
        default.to_vec()
    } else {
        flags.p.clone()
    };
    match ps.iter().find(|p| !(1..=4).contains(*p)) {
        Some(p) => Err(CliError::config(format!("order p = {p} outside 1..=4"))),
        None => Ok(ps),
    }
}

/// Corrected estimate from one sample; the flag says whether the gate fired.
fn corrected(
    id: &FunctionalId,
    sample: &Sample,
    family: EstimatorFamily,
    gate: Option<Gate>,
    p: usize,
) -> plugbias::Result<(f64, bool)> {
    let n = sample.n();
    match family {
        EstimatorFamily::S => Ok((id.estimate(sample, Family::S, p)?.corrected, false)),
        EstimatorFamily::T => Ok((id.estimate(sample, Family::T, p)?.corrected, false)),
        EstimatorFamily::Plus => {
            let m = id.moments_of(sample)?;
            Ok((plus_estimate(&id.series(&m, Family::S)?, n, p)?.0, false))
        }
        EstimatorFamily::TruncatedS => {
            let gate = gate.ok_or_else(|| plugbias::Error::InvalidArgument("truncated-S needs --u".into()))?;
            let est = id.estimate(sample, Family::S, 1)?;
            if est.plug_in.abs() < gate.u {
                let value = id.estimate(sample, Family::S, p)?.corrected;
                Ok((truncated_estimate(value, est.plug_in, gate.u, gate.c)?, false))
            } else {
                Ok((gate.c, true))
            }
        }
    }
}

fn emit(flags: &Flags, out: &mut dyn Write, text: &[u8]) -> Result<(), CliError> {
    match &flags.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
        }
        None => out.write_all(text).map_err(CliError::io),
    }
}

pub fn estimate(flags: &Flags, data: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let id = flags.functional()?;
    let ps = orders(flags, &[2])?;
    let family = family(flags)?;
    let gate = gate(flags)?;
    let text = fs::read_to_string(data).map_err(|e| CliError::data(format!("cannot read {}: {e}", data.display())))?;
    let sample = Sample::parse(&text)?;
    let n = sample.n();
    let max_p = *ps.iter().max().expect("orders are non-empty");
    if n < max_p.max(2) {
        return Err(CliError::data(format!(
            "sample of size {n} is too small for order {max_p}"
        )));
    }
    let plug_in = id.estimate(&sample, Family::S, 1)?.plug_in;
    let series_family = if family == EstimatorFamily::T {
        Family::T
    } else {
        Family::S
    };
    let terms = id.moments_of(&sample).and_then(|m| id.series(&m, series_family));
    let mut rows = Vec::new();
    for &p in &ps {
        let (value, truncated) = corrected(&id, &sample, family, gate, p)?;
        rows.push((p, value, truncated));
    }
    let mut buf = Vec::new();
    match format(flags, Format::Text)? {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(["functional", "family", "n", "p", "plug_in", "estimate", "truncated"])
                .map_err(CliError::csv)?;
            for (p, value, truncated) in &rows {
                w.write_record([
                    id.to_string(),
                    family.to_string(),
                    n.to_string(),
                    p.to_string(),
                    plug_in.to_string(),
                    value.to_string(),
                    truncated.to_string(),
                ])
                .map_err(CliError::csv)?;
            }
            w.flush().map_err(CliError::io)?;
        }
        fmt => {
            let md = fmt == Format::Markdown;
            let line = |buf: &mut Vec<u8>, k: &str, v: String| {
                let row = if md {
                    format!("| {k} | {v} |\n")
                } else {
                    format!("{k:<12} {v}\n")
                };
                buf.extend_from_slice(row.as_bytes());
            };
            if md {
                buf.extend_from_slice(b"| quantity | value |\n|---|---:|\n");
            }
            line(&mut buf, "functional", id.to_string());
            line(&mut buf, "family", family.to_string());
            line(&mut buf, "n", n.to_string());
            line(&mut buf, "plug-in", plug_in.to_string());
            if let Ok(series) = &terms {
                let letter = if series_family == Family::T { "T" } else { "S" };
                for i in 1..max_p.min(series.depth() + 1) {
                    line(&mut buf, &format!("{letter}_{i}"), series.term(i)?.to_string());
                }
            }
            for (p, value, truncated) in &rows {
                let flag = if *truncated { " (truncated)" } else { "" };
                line(&mut buf, &format!("p={p}"), format!("{value}{flag}"));
            }
        }
    }
    emit(flags, out, &buf)
}

pub fn simulate(flags: &Flags, out: &mut dyn Write) -> Result<(), CliError> {
    let id = flags.functional()?;
    if flags.dist.is_empty() {
        return Err(CliError::config("--dist is required"));
    }
    let dists: Vec<Distribution> = flags.dist.iter().map(|d| d.parse()).collect::<plugbias::Result<_>>()?;
    if flags.n.is_empty() {
        return Err(CliError::config("--n is required"));
    }
    let ps = orders(flags, &[1])?;
    let replications = flags.replications.ok_or_else(|| CliError::config("--N is required"))?;
    if replications == 0 {
        return Err(CliError::config("--N must be at least 1"));
    }
    let runs = flags.runs.unwrap_or(1);
    if runs == 0 {
        return Err(CliError::config("--runs must be at least 1"));
    }
    let seed = flags.seed.unwrap_or(0);
    let baselines: Vec<BaselineKind> = flags
        .baseline
        .iter()
        .map(|b| b.parse())
        .collect::<plugbias::Result<_>>()?;
    let family = family(flags)?;
    let gate = gate(flags)?;
    let mut reports = Vec::new();
    for dist in &dists {
        for run in 1..=runs {
            for &n in &flags.n {
                for &p in &ps {
                    let cfg = ExperimentConfig {
                        seed: seed.wrapping_add(run as u64 - 1),
                        family,
                        gate,
                        baselines: baselines.clone(),
                        run,
                        workers: flags.workers,
                        ..ExperimentConfig::new(id, dist.clone(), n, p, replications)
                    };
                    reports.extend(run_bias_experiment(&cfg)?.reports().cloned());
                }
            }
        }
    }
    let mut buf = Vec::new();
    match format(flags, Format::Markdown)? {
        Format::Csv => write_csv(&reports, &mut buf)?,
        _ => {
            buf.extend_from_slice(format!("master seed {seed}\n\n").as_bytes());
            buf.extend_from_slice(markdown_table(&reports).as_bytes());
        }
    }
    emit(flags, out, &buf)
}

/// Four significant digits without trailing zeros.
fn short(x: f64) -> String {
    let decimals = if x == 0.0 {
        0
    } else {
        (3 - x.abs().log10().floor() as i32).max(0) as usize
    };
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn plan(flags: &Flags, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let id = flags.functional()?;
    if flags.dist.is_empty() {
        return Err(CliError::config("--dist is required"));
    }
    let ps = orders(flags, &[1])?;
    let eps = flags.eps.unwrap_or(0.1);
    let cap = flags.cap.unwrap_or(1e7);
    let mut buf = String::new();
    for d in &flags.dist {
        let dist: Distribution = d.parse()?;
        for &p in &ps {
            let power = 2 * p - 1;
            let n_part = if power == 1 {
                "n".to_string()
            } else {
                format!("n^{power}")
            };
            let plan = plan_simulations(&id, &dist, flags.n.first().copied().unwrap_or(1), p, eps)?;
            let head = format!("{id} {dist} p={p} eps={eps}:");
            let (Some(phi), Some(coef)) = (plan.phi, plan.coefficient) else {
                buf.push_str(&format!("{head} phi_{p} not defined (S_{p} = 0)\n"));
                continue;
            };
            buf.push_str(&format!(
                "{head} V_T = {}, S_{p} = {}, phi_{p} = {}, N >= {} {n_part}\n",
                short(plan.v_t),
                short(plan.s_p),
                short(phi),
                short(coef)
            ));
            for &n in &flags.n {
                let required = plan_simulations(&id, &dist, n, p, eps)?
                    .required
                    .expect("phi is defined");
                buf.push_str(&format!("  n={n}: N >= {required}\n"));
                if required as f64 > cap {
                    writeln!(
                        err,
                        "warning: {id} {dist} p={p} n={n} needs {required} simulations, above the cap of {cap}; \
                         the bias cannot be resolved at practical cost"
                    )
                    .map_err(CliError::io)?;
                }
            }
        }
    }
    emit(flags, out, buf.as_bytes())
}

/// `discrete:ATOMS:PROBS` where atoms are comma-separated and vector
/// coordinates are separated by `/`.
fn parse_discrete(spec: &str) -> Result<DiscreteDistribution<Vec<f64>>, CliError> {
    let bad = || CliError::config(format!("oracle needs discrete:ATOMS:PROBS, got {spec:?}"));
    let rest = spec.trim().strip_prefix("discrete:").ok_or_else(bad)?;
    let (atoms, probs) = rest.split_once(':').ok_or_else(bad)?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let atoms: Vec<Vec<f64>> = atoms
        .split(',')
        .map(|a| a.split('/').map(num).collect::<Result<Vec<f64>, _>>())
        .collect::<Result<_, _>>()?;
    let probs: Vec<f64> = probs.split(',').map(num).collect::<Result<_, _>>()?;
    if atoms.iter().any(|a| a.len() != atoms[0].len()) {
        return Err(CliError::config("atoms must all have the same dimension"));
    }
    Ok(DiscreteDistribution::new(atoms, probs)?)
}

fn discrete_truth(id: &FunctionalId, dist: &DiscreteDistribution<Vec<f64>>) -> plugbias::Result<f64> {
    if let FunctionalId::ReturnPeriod { a, .. } = *id {
        let p: f64 = dist
            .atoms()
            .iter()
            .zip(dist.probs())
            .filter(|(x, _)| x.iter().all(|&v| v <= a))
            .map(|(_, p)| p)
            .sum();
        return Ok(1.0 / p);
    }
    let m = if dist.dim() == 1 {
        let xs: Vec<f64> = dist.atoms().iter().map(|a| a[0]).collect();
        LawMoments::Univariate(MomentSet::from_weighted(&xs, dist.probs(), id.moment_order())?)
    } else {
        LawMoments::Joint(JointMomentSet::from_weighted(
            &dist.flat_atoms(),
            dist.dim(),
            dist.probs(),
            id.moment_order(),
        )?)
    };
    id.value(&m)
}

pub fn oracle(flags: &Flags, out: &mut dyn Write) -> Result<(), CliError> {
    let id = flags.functional()?;
    let spec = match flags.dist.as_slice() {
        [one] => one,
        _ => return Err(CliError::config("oracle needs exactly one --dist")),
    };
    let dist = parse_discrete(spec)?;
    let ps = orders(flags, &[1, 2])?;
    let ns = if flags.n.is_empty() {
        (4..=12).collect()
    } else {
        flags.n.clone()
    };
    let family = family(flags)?;
    let gate = gate(flags)?;
    let truth = discrete_truth(&id, &dist)?;
    let mut buf = format!("{id} under {spec}: T(F) = {truth}\n");
    for &p in &ps {
        let stat = |_n: usize| {
            move |t: &Tally<Vec<f64>>| {
                Sample::from_rows(&t.expanded())
                    .and_then(|s| corrected(&id, &s, family, gate, p))
                    .map_or(f64::NAN, |(v, _)| v)
            }
        };
        let curve = exact_bias_curve(stat, &dist, &ns, truth)?;
        if curve.iter().any(|(_, b)| !b.is_finite()) {
            return Err(CliError::numeric(format!(
                "{id} p={p}: exact expectation is not finite (some samples give no estimate)"
            )));
        }
        for (n, b) in &curve {
            buf.push_str(&format!(
                "n={n} p={p}: exact bias {b:.6e}, bias*n^{p} {:.6e}\n",
                b * (*n as f64).powi(p as i32)
            ));
        }
        let tol = 1e-9 * truth.abs().max(1e-300);
        let verdict = if curve.iter().all(|(_, b)| b.abs() <= tol) {
            "exact bias 0 (<=1e-9 relative)".to_string()
        } else if is_order_bounded(&curve, p, 0.05) {
            format!("bounded: sup |bias| n^{p} = {:.6e}", bias_order_bound(&curve, p))
        } else {
            format!("growing: |bias| n^{p} increases to {:.6e}", bias_order_bound(&curve, p))
        };
        buf.push_str(&format!("p={p}: {verdict}\n"));
    }
    emit(flags, out, buf.as_bytes())
}
