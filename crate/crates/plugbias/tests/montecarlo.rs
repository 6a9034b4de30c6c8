use plugbias::functionals::FunctionalId;
use plugbias::montecarlo::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dist(s: &str) -> Distribution {
    s.parse().unwrap()
}

fn id(s: &str) -> FunctionalId {
    s.parse().unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn analytic_moments_of_standard_laws() {
    let normal = dist("normal:0:4").moments(8).unwrap();
    for (r, want) in [(2, 4.0), (3, 0.0), (4, 48.0), (6, 960.0), (8, 26880.0)] {
        assert!(close(normal.mu(r).unwrap(), want, 1e-14), "normal mu_{r}");
    }
    let exp = dist("exp:1").moments(8).unwrap();
    for (r, want) in [
        (2, 1.0),
        (3, 2.0),
        (4, 9.0),
        (5, 44.0),
        (6, 265.0),
        (7, 1854.0),
        (8, 14833.0),
    ] {
        assert!(close(exp.mu(r).unwrap(), want, 1e-14), "exp mu_{r}");
    }
    let exp2 = dist("exp:2").moments(4).unwrap();
    assert!(close(exp2.mu(4).unwrap(), 9.0 / 16.0, 1e-14));
    for shape in [0.5, 2.0, 7.0] {
        let g = Distribution::Gamma { shape }.moments(4).unwrap();
        assert!(close(g.beta(4).unwrap(), 3.0 + 6.0 / shape, 1e-13));
        assert!(close(g.mean(), shape, 1e-15));
    }
    let u = Distribution::Uniform.moments(4).unwrap();
    assert!(close(u.mu(2).unwrap(), 1.0 / 12.0, 1e-15) && close(u.mu(4).unwrap(), 1.0 / 80.0, 1e-15));
    let b = dist("bernoulli:0.3").moments(3).unwrap();
    assert!(close(b.mu(2).unwrap(), 0.21, 1e-15) && close(b.mu(3).unwrap(), 0.21 * 0.4, 1e-14));
}

#[test]
fn gamma_with_unit_shape_is_the_unit_exponential() {
    let g = dist("gamma:1").moments(8).unwrap();
    let e = dist("exp:1").moments(8).unwrap();
    for r in 2..=8 {
        assert!(close(g.mu(r).unwrap(), e.mu(r).unwrap(), 1e-14));
    }
    for x in [0.1, 1.0, 3.0] {
        assert!(close(
            dist("gamma:1").cdf(x).unwrap(),
            dist("exp:1").cdf(x).unwrap(),
            1e-12
        ));
    }
}

#[test]
fn sampled_moments_agree_with_analytic_ones() {
    let draws = 10_000_000;
    for spec in [
        "normal:1:2",
        "exp:1",
        "gamma:3",
        "uniform",
        "bernoulli:0.3",
        "discrete:0,1,3:0.5,0.3,0.2",
    ] {
        let d = dist(spec);
        let m = d.moments(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs = d.sample(&mut rng, draws).unwrap();
        for r in 2..=8 {
            let pow: Vec<f64> = xs.iter().map(|x| (x - m.mean()).powi(r as i32)).collect();
            let mean = pow.iter().sum::<f64>() / draws as f64;
            let var = pow.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let se = (var / draws as f64).sqrt();
            assert!(
                (mean - m.mu(r).unwrap()).abs() <= 5.0 * se,
                "{spec} mu_{r}: {mean} vs {}",
                m.mu(r).unwrap()
            );
        }
    }
}

#[test]
fn distribution_strings_round_trip() {
    for s in [
        "normal:0.5:1",
        "exp:1",
        "gamma:2.5",
        "uniform",
        "bernoulli:0.25",
        "discrete:0,1,3:0.5,0.3,0.2",
    ] {
        assert_eq!(dist(s).to_string(), s);
    }
    for bad in [
        "normal:0:0",
        "exp:-1",
        "bernoulli:1",
        "discrete:0,1:0.5,0.6",
        "cauchy:1",
    ] {
        assert!(bad.parse::<Distribution>().is_err(), "{bad}");
    }
}

#[test]
fn jackknife_of_the_mean_is_the_mean() {
    let xs = [1.0, 4.0, 2.5, 7.0, -3.0];
    let mean = |d: &[f64]| Ok(d.iter().sum::<f64>() / d.len() as f64);
    let j = jackknife_baseline(&xs, 1, mean).unwrap();
    assert!(close(j.value, 2.3, 1e-14));
    assert_eq!(j.evaluations, 6);
}

#[test]
fn jackknife_of_the_variance_is_the_unbiased_variance() {
    let xs = [1.0, 4.0, 2.5, 7.0, -3.0, 0.5];
    let n = xs.len() as f64;
    let plug = plug_in_value(&id("central_moment:2"), &xs).unwrap();
    let j = jackknife_baseline(&xs, 1, |d| plug_in_value(&id("central_moment:2"), d)).unwrap();
    assert!(close(j.value, n * plug / (n - 1.0), 1e-13));
}

#[test]
fn jackknife_keeps_rows_together() {
    let rows = [1.0, 10.0, 2.0, 20.0, 4.0, 40.0];
    let ratio = |d: &[f64]| {
        let (a, b) = d.chunks(2).fold((0.0, 0.0), |(a, b), r| (a + r[0], b + r[1]));
        Ok(a / b)
    };
    assert!(close(jackknife_baseline(&rows, 2, ratio).unwrap().value, 0.1, 1e-14));
    assert!(jackknife_baseline(&rows, 4, ratio).is_err());
    assert!(jackknife_baseline(&[1.0], 1, ratio).is_err());
}

#[test]
fn bootstrap_of_the_mean_centres_on_the_mean() {
    let xs = [1.0, 4.0, 2.5, 7.0, -3.0];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mean = |d: &[f64]| Ok(d.iter().sum::<f64>() / d.len() as f64);
    let b = bootstrap_baseline(&xs, 1, 200_000, &mut rng, mean).unwrap();
    assert!((b.value - 2.3).abs() < 0.02);
    assert_eq!(b.evaluations, 200_001);
    assert!(bootstrap_baseline(&xs, 1, 0, &mut rng, mean).is_err());
}

#[test]
fn bootstrap_of_the_variance_approaches_its_closed_form() {
    let xs = [1.0, 4.0, 2.5, 7.0, -3.0, 0.5];
    let n = xs.len() as f64;
    let f = id("central_moment:2");
    let plug = plug_in_value(&f, &xs).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b = bootstrap_baseline(&xs, 1, 400_000, &mut rng, |d| plug_in_value(&f, d)).unwrap();
    assert!((b.value - plug * (1.0 + 1.0 / n)).abs() < 0.01 * plug);
}

#[test]
fn unbiased_variance_shows_no_bias() {
    let mut cfg = ExperimentConfig::new(id("central_moment:2"), dist("exp:1"), 8, 2, 20_000);
    cfg.seed = 17;
    let r = run_bias_experiment(&cfg).unwrap().primary;
    assert_eq!(r.failures, 0);
    assert!(r.bias.abs() < 3.0 * r.std_error, "{r:?}");
    assert_eq!(r.truth, 1.0);
}

#[test]
fn fourth_moment_cell_is_reproduced() {
    let mut cfg = ExperimentConfig::new(id("central_moment:4"), dist("normal:0:1"), 10, 1, 20_000);
    cfg.seed = 1;
    let r = run_bias_experiment(&cfg).unwrap().primary;
    assert!((r.relative_bias.unwrap() + 0.19).abs() < 0.03, "{r:?}");
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let mut cfg = ExperimentConfig::new(id("sd"), dist("exp:1"), 10, 2, 3_000);
    cfg.seed = 99;
    cfg.baselines = vec![BaselineKind::Jackknife, BaselineKind::Bootstrap(20)];
    cfg.workers = Some(1);
    let one = run_bias_experiment(&cfg).unwrap();
    cfg.workers = Some(4);
    let four = run_bias_experiment(&cfg).unwrap();
    let strip = |e: &Experiment| {
        e.reports()
            .map(|r| ExperimentReport {
                wall_clock_secs: 0.0,
                ..r.clone()
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&one), strip(&four));
    assert_eq!(one.baselines.len(), 2);
    assert_eq!(one.baselines[0].estimator, "jackknife");
    assert_eq!(one.baselines[0].evaluations, 11);
}

#[test]
fn different_seeds_give_different_runs() {
    let mut cfg = ExperimentConfig::new(id("sd"), dist("exp:1"), 10, 1, 500);
    let a = run_bias_experiment(&cfg).unwrap().primary;
    cfg.seed = 1;
    let b = run_bias_experiment(&cfg).unwrap().primary;
    assert_ne!(a.mean, b.mean);
}

#[test]
fn zero_truth_reports_absolute_bias() {
    let cfg = ExperimentConfig::new(id("central_moment:3"), dist("normal:0:1"), 10, 3, 2_000);
    let r = run_bias_experiment(&cfg).unwrap().primary;
    assert_eq!(r.truth, 0.0);
    assert!(r.relative_bias.is_none() && r.relative_std_error.is_none());
    assert!(r.bias.is_finite());
}

#[test]
fn bad_experiment_arguments_are_rejected() {
    let base = ExperimentConfig::new(id("sd"), dist("exp:1"), 10, 1, 100);
    assert!(run_bias_experiment(&ExperimentConfig {
        replications: 0,
        ..base.clone()
    })
    .is_err());
    assert!(run_bias_experiment(&ExperimentConfig { p: 5, ..base.clone() }).is_err());
    assert!(run_bias_experiment(&ExperimentConfig { n: 1, ..base.clone() }).is_err());
    assert!(run_bias_experiment(&ExperimentConfig {
        functional: id("ratio_means"),
        ..base
    })
    .is_err());
}

#[test]
fn truncation_gate_replaces_wild_estimates() {
    let mut cfg = ExperimentConfig::new(id("mean_pow:-1"), dist("normal:0.5:1"), 10, 1, 2_000);
    cfg.family = EstimatorFamily::TruncatedS;
    cfg.gate = Some(Gate { u: 20.0, c: 0.05 });
    let gated = run_bias_experiment(&cfg).unwrap().primary;
    assert!(gated.relative_bias.unwrap().abs() < 1.0, "{gated:?}");
    assert_eq!(Gate::tenfold(2.0).unwrap(), Gate { u: 20.0, c: 0.05 });
}

#[test]
fn plus_family_never_exceeds_the_requested_order() {
    let mut cfg = ExperimentConfig::new(id("sd"), dist("exp:1"), 10, 3, 2_000);
    cfg.family = EstimatorFamily::Plus;
    let plus = run_bias_experiment(&cfg).unwrap().primary;
    assert_eq!(plus.estimator, "plus");
    assert!(plus.relative_bias.unwrap().abs() < 0.1);
}

#[test]
fn return_period_truth_uses_the_cdf() {
    let t = true_value(&id("return_period:0"), &dist("normal:0:1")).unwrap();
    assert!(close(t, 2.0, 1e-12));
    let t = true_value(&id("return_period:1"), &dist("exp:1")).unwrap();
    assert!(close(t, 1.0 / (1.0 - (-1.0f64).exp()), 1e-12));
}

#[test]
fn estimator_names_parse() {
    assert_eq!(
        "truncated-S".parse::<EstimatorFamily>().unwrap(),
        EstimatorFamily::TruncatedS
    );
    assert_eq!(
        "bootstrap:50".parse::<BaselineKind>().unwrap(),
        BaselineKind::Bootstrap(50)
    );
    assert!("bootstrap:0".parse::<BaselineKind>().is_err());
    assert!("q".parse::<EstimatorFamily>().is_err());
}

#[test]
fn planner_for_the_variance() {
    let p = plan_simulations(&id("central_moment:2"), &dist("normal:0:1"), 10, 1, 0.01).unwrap();
    assert!(close(p.phi.unwrap(), 8.0, 1e-14));
    assert!(close(p.coefficient.unwrap(), 80_000.0, 1e-12));
    let p = plan_simulations(&id("central_moment:2"), &dist("exp:1"), 10, 1, 0.1).unwrap();
    assert!(close(p.phi.unwrap(), 32.0, 1e-14));
    let p = plan_simulations(&id("central_moment:2"), &dist("normal:0:1"), 10, 2, 0.1).unwrap();
    assert!(p.phi.is_none() && p.required.is_none());
}

#[test]
fn planner_for_the_fourth_moment() {
    let normal = dist("normal:0:1");
    let p1 = plan_simulations(&id("central_moment:4"), &normal, 100, 1, 0.1).unwrap();
    assert!(close(p1.phi.unwrap(), 32.0 / 3.0, 1e-14));
    assert_eq!(p1.required, Some(106_667));
    let p2 = plan_simulations(&id("central_moment:4"), &normal, 10, 2, 0.1).unwrap();
    assert!(close(p2.phi.unwrap(), 128.0 / 75.0, 1e-14));
    let e = plan_simulations(&id("central_moment:4"), &dist("exp:1"), 10, 1, 0.1).unwrap();
    assert!(close(e.v_t, 14_112.0, 1e-13));
    assert!(close(e.phi.unwrap(), 62.72, 1e-13));
}

#[test]
fn planner_for_the_standard_deviation() {
    let p1 = plan_simulations(&id("sd"), &dist("normal:0:1"), 10, 1, 0.1).unwrap();
    assert!(close(p1.phi.unwrap(), 32.0 / 9.0, 1e-14));
    assert_eq!(p1.required, Some(3556));
    let p2 = plan_simulations(&id("sd"), &dist("normal:0:1"), 10, 2, 0.1).unwrap();
    assert!(close(p2.s_p, 25.0 / 32.0, 1e-13));
    let e2 = plan_simulations(&id("sd"), &dist("exp:1"), 10, 2, 0.1).unwrap();
    assert!(close(e2.s_p, 185.0 / 8.0, 1e-12));
    assert!(close(e2.phi.unwrap(), 512.0 / 34_225.0, 1e-12));
}

#[test]
fn planner_rejects_bad_arguments() {
    let d = dist("normal:0:1");
    assert!(plan_simulations(&id("sd"), &d, 10, 0, 0.1).is_err());
    assert!(plan_simulations(&id("sd"), &d, 10, 1, 0.0).is_err());
    assert!(plan_simulations(&id("corr"), &d, 10, 1, 0.1).is_err());
}

#[test]
fn csv_round_trips_reports() {
    let mut cfg = ExperimentConfig::new(id("central_moment:3"), dist("exp:1"), 6, 2, 300);
    cfg.baselines = vec![BaselineKind::Jackknife];
    let e = run_bias_experiment(&cfg).unwrap();
    let mut reports: Vec<ExperimentReport> = e.reports().cloned().collect();
    reports.push(
        run_bias_experiment(&ExperimentConfig {
            distribution: dist("normal:0:1"),
            ..cfg
        })
        .unwrap()
        .primary,
    );
    let mut buf = Vec::new();
    write_csv(&reports, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("functional,distribution,estimator,run,n,p,"));
    let back = read_csv(buf.as_slice()).unwrap();
    for r in &mut reports {
        r.wall_clock_secs = 0.0;
    }
    assert_eq!(back, reports);
}

#[test]
fn markdown_table_has_one_row_per_run() {
    let mut reports = Vec::new();
    for (run, seed) in [(1, 10), (2, 11)] {
        for p in [1, 2] {
            let mut cfg = ExperimentConfig::new(id("sd"), dist("normal:0:1"), 10, p, 200);
            cfg.run = run;
            cfg.seed = seed;
            reports.push(run_bias_experiment(&cfg).unwrap().primary);
        }
    }
    let md = markdown_table(&reports);
    assert!(md.contains("seeds 10, 11"));
    assert!(md.contains("| n=10 p=1 | n=10 p=2 |"));
    assert!(md.contains("| normal:0:1 | Run1 |"));
    assert!(md.contains("|  | Run2 |"));
}
