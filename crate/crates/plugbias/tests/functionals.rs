use plugbias::corrections::{
    assemble_estimate, bias_coeffs_multisample, bias_coeffs_one_sample, corrections_multisample,
    corrections_one_sample, james_coefficients, simpler_one_sample, CorrectionSeries, DerivativeBundle, Pattern,
};
use plugbias::derivatives::PartialDerivativeTable;
use plugbias::empirical::{JointMomentSet, MomentSet, Sample};
use plugbias::functionals::*;
use plugbias::oracle::{exact_expectation, DiscreteDistribution, Tally};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_law(rng: &mut ChaCha8Rng, atoms: usize, order: usize) -> MomentSet {
    let xs: Vec<f64> = (0..atoms).map(|_| rng.random_range(-1.5..2.5)).collect();
    let mut ws: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = ws.iter().sum();
    ws.iter_mut().for_each(|w| *w /= total);
    MomentSet::from_weighted(&xs, &ws, order).unwrap()
}

fn random_positive_law(rng: &mut ChaCha8Rng, atoms: usize, order: usize) -> MomentSet {
    let xs: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.5..3.0)).collect();
    let mut ws: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = ws.iter().sum();
    ws.iter_mut().for_each(|w| *w /= total);
    MomentSet::from_weighted(&xs, &ws, order).unwrap()
}

fn random_joint(rng: &mut ChaCha8Rng, atoms: usize, order: usize) -> JointMomentSet {
    let pts: Vec<f64> = (0..2 * atoms).map(|_| rng.random_range(0.5..3.0)).collect();
    let mut ws: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = ws.iter().sum();
    ws.iter_mut().for_each(|w| *w /= total);
    JointMomentSet::from_weighted(&pts, 2, &ws, order).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn assert_series(a: &CorrectionSeries, b: &CorrectionSeries, tol: f64, what: &str) {
    assert!(
        close(a.base(), b.base(), tol),
        "{what}: base {} vs {}",
        a.base(),
        b.base()
    );
    assert_eq!(a.depth(), b.depth(), "{what}: depth");
    for (i, (x, y)) in a.terms().iter().zip(b.terms()).enumerate() {
        assert!(close(*x, *y, tol), "{what}: term {} {x} vs {y}", i + 1);
    }
}

fn assert_bundles(a: &DerivativeBundle, b: &DerivativeBundle, patterns: &[Pattern], tol: f64, what: &str) {
    for &p in patterns {
        let (x, y) = (a.get(p).unwrap(), b.get(p).unwrap());
        assert!(close(x, y, tol), "{what}: T({}) {x} vs {y}", p.label());
    }
}

#[test]
fn central_moment_closed_forms_match_brackets() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let m = random_law(&mut rng, 5, 24);
        for r in 2..=8 {
            let c = central_moment(r, &m).unwrap();
            let b = central_moment_bundle(r, &m).unwrap();
            assert_series(&c.t, &corrections_one_sample(&b).unwrap(), 1e-10, &format!("T mu_{r}"));
            assert_series(&c.s, &simpler_one_sample(&b).unwrap(), 1e-10, &format!("S mu_{r}"));
            let coeffs = bias_coeffs_one_sample(&b).unwrap();
            assert!(close(c.coefficients.c1, coeffs.c1, 1e-10));
            assert!(close(c.coefficients.c2, coeffs.c2, 1e-10));
            assert!(close(c.coefficients.c3, coeffs.c3, 1e-10));
            assert!(close(c.coefficients.c4.unwrap(), coeffs.c4.unwrap(), 1e-9), "C4 mu_{r}");
        }
    }
}

#[test]
fn variance_corrections_are_all_mu2() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = random_law(&mut rng, 4, 8);
    let c = central_moment(2, &m).unwrap();
    for t in c.t.terms() {
        assert!(close(*t, m.mu(2).unwrap(), 1e-12));
    }
}

#[test]
fn seventh_moment_james_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_law(&mut rng, 5, 14);
    let mu = |k: usize| m.mu(k).unwrap();
    let a = central_moment(7, &m).unwrap().james.unwrap();
    let printed = [
        mu(7),
        -7.0 * (2.0 * mu(7) + 3.0 * mu(5) * mu(2)),
        7.0 * (11.0 * mu(7) + 39.0 * mu(5) * mu(2) - 10.0 * mu(4) * mu(3) + 15.0 * mu(3) * mu(2) * mu(2)),
        -7.0 * (28.0 * mu(7) + 192.0 * mu(5) * mu(2) - 80.0 * mu(4) * mu(3) + 60.0 * mu(3) * mu(2) * mu(2)),
    ];
    for (x, y) in a.iter().zip(printed) {
        assert!(close(*x, y, 1e-10), "{x} vs {y}");
    }
}

fn three_atoms() -> DiscreteDistribution {
    DiscreteDistribution::new(vec![-1.0, 0.5, 2.0], vec![0.3, 0.5, 0.2]).unwrap()
}

#[test]
fn central_moment_unbiased_estimates_are_exact() {
    let d = three_atoms();
    for n in [6, 8] {
        for r in 2..=5 {
            let truth = d.moments(r).unwrap().mu(r).unwrap();
            let e = exact_expectation(
                |t: &Tally<f64>| {
                    let m = t.moments(16).unwrap();
                    central_moment(r, &m).unwrap().unbiased(n).unwrap()
                },
                &d,
                n,
            )
            .unwrap();
            assert!((e - truth).abs() < 1e-9, "r={r} n={n}: {e} vs {truth}");
        }
    }
}

#[test]
fn sixth_moment_james_form_needs_a_fourth_term() {
    let d = three_atoms();
    let m = d.moments(12).unwrap();
    let mu = |k: usize| m.mu(k).unwrap();
    // Coefficients of the exact unbiased estimate, fitted by enumeration.
    let exact = [
        mu(6),
        -9.0 * mu(6) - 15.0 * mu(4) * mu(2),
        31.0 * mu(6) + 120.0 * mu(4) * mu(2) - 40.0 * mu(3).powi(2) + 45.0 * mu(2).powi(3),
        -39.0 * mu(6) - 435.0 * mu(4) * mu(2) + 240.0 * mu(3).powi(2) - 150.0 * mu(2).powi(3),
    ];
    let a = central_moment(6, &m).unwrap().james.unwrap();
    for (x, y) in a.iter().zip(exact) {
        assert!(close(*x, y, 1e-10), "{x} vs {y}");
    }
    let n = 8;
    let nf = n as f64;
    let e = exact_expectation(
        |t: &Tally<f64>| {
            let m = t.moments(12).unwrap();
            let mu = |k: usize| m.mu(k).unwrap();
            let a4 = 40.0 * mu(6) + 600.0 * mu(4) * mu(2) - 400.0 * mu(3).powi(2);
            let den: f64 = (1..6).map(|i| 1.0 - i as f64 / nf).product();
            central_moment(6, &m).unwrap().unbiased(n).unwrap() + a4 / nf.powi(4) / den
        },
        &d,
        n,
    )
    .unwrap();
    assert!((e - mu(6)).abs() < 1e-9, "{e} vs {}", mu(6));
}

#[test]
fn fourth_moment_s_estimate_is_exact() {
    let d = three_atoms();
    let truth = d.moments(4).unwrap().mu(4).unwrap();
    let e = exact_expectation(
        |t: &Tally<f64>| {
            let c = central_moment(4, &t.moments(8).unwrap()).unwrap();
            assemble_estimate(&c.s, 6, 4).unwrap()
        },
        &d,
        6,
    )
    .unwrap();
    assert!((e - truth).abs() < 1e-9, "{e} vs {truth}");
}

#[test]
fn power_of_mean_matches_chain_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let m = random_positive_law(&mut rng, 4, 8);
        let p = rng.random_range(-3.0..3.0);
        let closed = power_of_mean(p, &m).unwrap();
        let b = FunctionalId::MeanPow(p)
            .bundle(&LawMoments::Univariate(m.clone()))
            .unwrap();
        assert_series(&closed.t, &corrections_one_sample(&b).unwrap(), 1e-10, "T mu^p");
        assert_series(&closed.s, &simpler_one_sample(&b).unwrap(), 1e-10, "S mu^p");
    }
}

#[test]
fn reciprocal_mean_normalized_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = random_positive_law(&mut rng, 4, 8);
    let mu = m.mean();
    let g = |r: usize| m.mu(r).unwrap() / mu.powi(r as i32);
    let s = power_of_mean(-1.0, &m).unwrap().normalized().unwrap();
    let expected = [
        -g(2),
        -2.0 * g(3) + 3.0 * g(2) * g(2),
        -3.0 * (2.0 * g(4) - 3.0 * g(2) * g(2)) + 20.0 * g(3) * g(2) - 15.0 * g(2).powi(3),
    ];
    for (x, y) in s.iter().zip(expected) {
        assert!(close(*x, y, 1e-10), "{x} vs {y}");
    }
}

#[test]
fn integer_powers_of_the_mean_have_exact_estimates() {
    let d = three_atoms();
    for p in 1..=4 {
        let truth = d.moments(4).unwrap().mean().powi(p);
        for n in [6, 8] {
            let e = exact_expectation(
                |t: &Tally<f64>| {
                    let s = power_of_mean(p as f64, &t.moments(4).unwrap()).unwrap().s;
                    assemble_estimate(&s, n, 4).unwrap()
                },
                &d,
                n,
            )
            .unwrap();
            assert!((e - truth).abs() < 1e-9, "p={p} n={n}: {e} vs {truth}");
        }
    }
}

#[test]
fn ratio_of_means_closed_forms_match_contractions() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let jm = random_joint(&mut rng, 5, 6);
        let closed = ratio_of_means(&jm).unwrap();
        let b = linear_ratio(&[1.0, 0.0], &[0.0, 1.0], &jm).unwrap();
        assert_series(&closed.t, &corrections_one_sample(&b).unwrap(), 1e-10, "T ratio");
        assert_series(&closed.s, &simpler_one_sample(&b).unwrap(), 1e-10, "S ratio");
    }
}

#[test]
fn two_sample_ratio_matches_multisample_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let num = random_positive_law(&mut rng, 3, 6);
        let den = random_positive_law(&mut rng, 4, 6);
        let (l1, l2) = (rng.random_range(1.0..3.0), rng.random_range(1.0..3.0));
        let closed = two_sample_ratio(&num, &den, l2).unwrap();
        let g = PartialDerivativeTable::power_product(1.0, &[1.0, -1.0], &[num.mean(), den.mean()], 6).unwrap();
        let b = means_of_k_samples(&g, &[num.clone(), den.clone()], &[l1, l2]).unwrap();
        let c = bias_coeffs_multisample(&b).unwrap();
        for (x, y) in closed.c.iter().zip([c.c1, c.c2, c.c3]) {
            assert!(close(*x, y, 1e-10), "C {x} vs {y}");
        }
        assert_series(
            &closed.t,
            &corrections_multisample(&b).unwrap(),
            1e-10,
            "T two-sample ratio",
        );
    }
}

#[test]
fn moment_product_sums_match_chain_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cases: Vec<Vec<MomentFactor>> = vec![
        vec![MomentFactor::new(3, 1.0), MomentFactor::new(2, 1.0)],
        vec![MomentFactor::new(2, 2.0)],
        vec![MomentFactor::new(2, 0.5)],
        vec![MomentFactor::new(4, -1.5), MomentFactor::new(2, 2.0)],
        vec![
            MomentFactor::new(2, 1.5),
            MomentFactor::new(3, 2.0),
            MomentFactor::new(4, 1.0),
        ],
    ];
    for _ in 0..20 {
        let m = random_law(&mut rng, 5, 24);
        for f in &cases {
            if f.iter().any(|x| m.mu(x.order).unwrap() < 0.0 && x.power.fract() != 0.0) {
                continue;
            }
            let a = moment_product(f, &m).unwrap();
            let b = moment_product_chain(f, &m).unwrap();
            assert_bundles(&a, &b, &Pattern::CORE, 1e-10, &format!("{f:?}"));
        }
    }
}

#[test]
fn mu3_mu2_derivative_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = random_law(&mut rng, 5, 12);
    let mu = |k: usize| m.mu(k).unwrap();
    let b = moment_product(&[MomentFactor::new(3, 1.0), MomentFactor::new(2, 1.0)], &m).unwrap();
    assert!(close(
        b.get(Pattern::A2).unwrap(),
        2.0 * mu(5) - 16.0 * mu(3) * mu(2),
        1e-12
    ));
    assert!(close(
        b.get(Pattern::A3).unwrap(),
        -24.0 * mu(5) + 72.0 * mu(3) * mu(2),
        1e-12
    ));
    assert!(close(b.get(Pattern::A22).unwrap(), 120.0 * mu(3) * mu(2), 1e-12));
}

#[test]
fn mu5_and_mu3_mu2_matrix_estimates_are_exact() {
    use nalgebra::DMatrix;
    use plugbias::corrections::{ue_matrix, UeMatrixProblem};
    let d = three_atoms();
    let m = d.moments(16).unwrap();
    let mu = |k: usize| m.mu(k).unwrap();
    let c5 = central_moment(5, &m).unwrap().coefficients;
    let b = moment_product(&[MomentFactor::new(3, 1.0), MomentFactor::new(2, 1.0)], &m).unwrap();
    let c32 = bias_coeffs_one_sample(&b).unwrap();
    assert!(close(c32.c1, mu(5) - 8.0 * mu(3) * mu(2), 1e-12));
    assert!(close(c32.c2, -4.0 * mu(5) + 27.0 * mu(3) * mu(2), 1e-12));
    assert!(close(c5.c2, 10.0 * mu(5) - 50.0 * mu(3) * mu(2), 1e-12));
    let a1 = DMatrix::from_row_slice(2, 2, &[-5.0, 10.0, 1.0, -8.0]);
    let a2 = DMatrix::from_row_slice(2, 2, &[10.0, -50.0, -4.0, 27.0]);
    let sol = ue_matrix(&UeMatrixProblem::new(5, vec![a1, a2]).unwrap()).unwrap();
    assert_eq!(sol.b(2), &DMatrix::from_row_slice(2, 2, &[10.0, 20.0, 1.0, 2.0]));
    for n in [6, 8] {
        let e = exact_expectation(
            |t: &Tally<f64>| {
                let m = t.moments(5).unwrap();
                let v = [m.mu(5).unwrap(), m.mu(3).unwrap() * m.mu(2).unwrap()];
                sol.evaluate(&v, n).unwrap()[1]
            },
            &d,
            n,
        )
        .unwrap();
        assert!((e - mu(3) * mu(2)).abs() < 1e-12, "n={n}: {e}");
    }
}

#[test]
fn squared_variance_corrections() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let m = random_law(&mut rng, 5, 16);
    let (m2, m4) = (m.mu(2).unwrap(), m.mu(4).unwrap());
    let b = moment_product(&[MomentFactor::new(2, 2.0)], &m).unwrap();
    let c = bias_coeffs_one_sample(&b).unwrap();
    assert!(close(c.c1, m4 - 3.0 * m2 * m2, 1e-12));
    assert!(close(c.c2, -2.0 * m4 + 5.0 * m2 * m2, 1e-12));
    let t = corrections_one_sample(&b).unwrap();
    assert!(close(t.term(1).unwrap(), -m4 + 3.0 * m2 * m2, 1e-12));
    assert!(close(t.term(2).unwrap(), -5.0 * m4 + 10.0 * m2 * m2, 1e-12));
    let s = simpler_one_sample(&b).unwrap();
    assert!(close(s.term(2).unwrap(), -4.0 * m4 + 7.0 * m2 * m2, 1e-12));
    let a = james_coefficients(&t, 4).unwrap();
    let printed = [m2 * m2, -m4 - 3.0 * m2 * m2, m4 + 3.0 * m2 * m2];
    for (x, y) in a.iter().zip(printed) {
        assert!(close(*x, y, 1e-12), "{x} vs {y}");
    }
}

#[test]
fn moment_power_brackets_agree_with_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = random_positive_law(&mut rng, 5, 24);
    for r in 2..=4 {
        for p in [-1.0f64, 0.5, 2.0, 3.0] {
            if m.mu(r).unwrap() < 0.0 && p.fract() != 0.0 {
                continue;
            }
            let a = moment_power_brackets(r, p, &m).unwrap();
            let b = moment_product_chain(&[MomentFactor::new(r, p)], &m).unwrap();
            for (x, pat) in a.iter().zip([Pattern::A2, Pattern::A3, Pattern::A22]) {
                assert!(close(*x, b.get(pat).unwrap(), 1e-10), "r={r} p={p} {}", pat.label());
            }
        }
    }
}

fn power_derivs(q: f64, v: f64) -> [f64; 7] {
    let mut g = [0.0; 7];
    for (i, slot) in g.iter_mut().enumerate() {
        *slot = plugbias::numeric::falling(q, i as u32) * v.powf(q - i as f64);
    }
    g
}

#[test]
fn variance_power_matches_chain_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let m = random_law(&mut rng, 5, 16);
        let q = rng.random_range(-2.0..3.0);
        let closed = variance_power(q, &m).unwrap();
        let b = function_of_variance_bundle(&power_derivs(q, m.mu(2).unwrap()), &m).unwrap();
        assert_bundles(&closed.bundle, &b, &Pattern::CORE, 1e-10, &format!("mu_2^{q}"));
    }
}

#[test]
fn function_of_variance_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let m = random_law(&mut rng, 5, 16);
        let g: [f64; 7] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let closed = function_of_variance(&g, &m).unwrap();
        let b = function_of_variance_bundle(&g, &m).unwrap();
        let c = bias_coeffs_one_sample(&b).unwrap();
        for (x, y) in closed.coefficients.iter().zip([c.c1, c.c2, c.c3]) {
            assert!(close(*x, y, 1e-10), "C {x} vs {y}");
        }
        assert_series(&closed.t, &corrections_one_sample(&b).unwrap(), 1e-10, "T g(mu_2)");
        assert_series(&closed.s, &simpler_one_sample(&b).unwrap(), 1e-10, "S g(mu_2)");
    }
}

#[test]
fn standard_deviation_normalized_terms() {
    let normal = MomentSet::new(0.0, &[1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0]).unwrap();
    let sd = standard_deviation(&normal).unwrap();
    let (t, s) = sd.normalized();
    assert!(close(s[0], 0.75, 1e-14));
    assert!(close(t[0], 0.75, 1e-14));
    assert!(close(s[1], 25.0 / 32.0, 1e-12), "{}", s[1]);
    let (l1, _) = sd_bias_ratios(&normal).unwrap();
    assert!(close(l1, 1.0 / 3.0, 1e-14));

    let exp1 = MomentSet::new(1.0, &[1.0, 2.0, 9.0, 44.0, 265.0, 1854.0, 14833.0]).unwrap();
    let (_, s) = standard_deviation(&exp1).unwrap().normalized();
    assert!(close(s[0], 1.5, 1e-14));
    assert!(close(s[1], 185.0 / 8.0, 1e-12), "{}", s[1]);
}

#[test]
fn mean_over_sd_matches_chain_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..100 {
        let m = random_law(&mut rng, 5, 16);
        let closed = mean_over_sd(&m).unwrap();
        let chain = mean_over_sd_chain(&m).unwrap();
        assert_bundles(
            &closed.bundle,
            &chain,
            &[Pattern::A2, Pattern::A3, Pattern::A4, Pattern::A22],
            1e-10,
            "mu/sigma",
        );
        let s = simpler_one_sample(&chain).unwrap();
        assert!(close(closed.s.term(1).unwrap(), s.term(1).unwrap(), 1e-10));
        assert!(close(closed.s.term(2).unwrap(), s.term(2).unwrap(), 1e-10));
    }
}

#[test]
fn mean_over_sd_fourth_order_is_unavailable() {
    let m = MomentSet::new(1.0, &[1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0]).unwrap();
    let id = FunctionalId::MeanOverSd;
    let s = id.series(&LawMoments::Univariate(m), Family::S).unwrap();
    assert!(matches!(
        assemble_estimate(&s, 10, 4),
        Err(plugbias::Error::Unavailable(_))
    ));
    assert!(assemble_estimate(&s, 10, 3).is_ok());
}

#[test]
fn return_period_examples() {
    let est = return_period(0.5, 11, 0.05).unwrap();
    assert!(close(est, 2.0 - 2.0 / 10.0 + 6.0 / 90.0 - 24.0 / 720.0, 1e-14));
    assert_eq!(return_period(1.0, 11, 0.05).unwrap(), 1.0);
    assert_eq!(return_period(0.04, 11, 0.05).unwrap(), 20.0);
    assert!(return_period(0.5, 11, 1.5).is_err());
}

#[test]
fn conditional_mean_edge_cases() {
    let s = Sample::univariate(vec![1.0, 2.0, 3.0, 4.0, 6.0]).unwrap();
    let all = conditional_mean(&s, |_| true, |x| x[0] * 2.0, 0.0).unwrap();
    assert!(close(all.corrected, 6.4, 1e-14));
    let none = conditional_mean(&s, |_| false, |x| x[0], -1.0).unwrap();
    assert_eq!(none.corrected, -1.0);

    let below = mean_exceedance(&s, 0.0, 0.0).unwrap();
    assert_eq!(below.p_hat, 1.0);
    assert!(close(below.corrected, 3.2, 1e-14));
    let above = mean_exceedance(&s, 10.0, 7.0).unwrap();
    assert_eq!(above.corrected, 7.0);
    let cdf = exceedance_cdf(&s, 1.5, 2.0, 0.0).unwrap();
    assert!(close(cdf.plug_in, 0.5, 1e-14));
}

#[test]
fn conditional_mean_plug_in_is_unbiased_given_a_hit() {
    // X = 1 in A with payoff 3, X = 0 outside A.
    let d = DiscreteDistribution::new(vec![0.0, 1.0], vec![0.6, 0.4]).unwrap();
    let n = 6;
    let stat = |t: &Tally<f64>| {
        conditional_mean(&t.sample(), |x| x[0] > 0.5, |_| 3.0, 0.0)
            .unwrap()
            .plug_in
    };
    let e = exact_expectation(stat, &d, n).unwrap();
    let miss = 0.6f64.powi(n as i32);
    assert!((e - 3.0 * (1.0 - miss)).abs() < 1e-12);
}

#[test]
fn exceedance_derivative_scales_by_tail() {
    let d = exceedance_derivative(|y| y * y, 3.0, 1.0, 0.25).unwrap();
    assert!(close(d, 16.0, 1e-14));
    assert!(exceedance_derivative(|y| y, 3.0, 1.0, 0.0).is_err());
}

fn bivariate_normal(rho: f64) -> JointMomentSet {
    // Isserlis moments of a standard bivariate normal.
    JointMomentSet::from_fn(vec![0.0, 0.0], 4, |idx| {
        let ones = idx.iter().filter(|&&i| i == 0).count();
        match (idx.len(), ones) {
            (2, 1) => rho,
            (2, _) => 1.0,
            (4, 4) | (4, 0) => 3.0,
            (4, 3) | (4, 1) => 3.0 * rho,
            (4, 2) => 1.0 + 2.0 * rho * rho,
            _ => 0.0,
        }
    })
    .unwrap()
}

#[test]
fn correlation_normal_values() {
    let c = correlation(&bivariate_normal(0.5)).unwrap();
    assert!(close(c.t2, -0.375, 1e-14));
    let c2 = squared_correlation(&bivariate_normal(0.5)).unwrap();
    assert!(close(c2.t2, 2.0 * 0.75 * 0.5, 1e-14));
    let id = FunctionalId::Corr;
    let v = id
        .influence_variance(&LawMoments::Joint(bivariate_normal(0.5)))
        .unwrap();
    assert!(close(v, 0.75 * 0.75, 1e-14));
}

#[test]
fn correlation_of_identical_coordinates() {
    let rows: Vec<Vec<f64>> = [0.1, 1.3, 2.2, 4.0, 0.7].iter().map(|&x| vec![x, x]).collect();
    let s = Sample::from_rows(&rows).unwrap();
    let jm = plugbias::empirical::joint_central_moments(&s, 4).unwrap();
    let c = correlation(&jm).unwrap();
    assert!(close(c.value, 1.0, 1e-14));
    assert!(c.t2.abs() < 1e-12);
    assert_eq!(c.corrected(5), c.value);
}

#[test]
fn correlation_derivative_integrates_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let pts: Vec<[f64; 2]> = (0..6)
        .map(|_| [rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)])
        .collect();
    let w = vec![1.0 / 6.0; 6];
    let jm = JointMomentSet::from_weighted(&pts.concat(), 2, &w, 4).unwrap();
    let mean: f64 = pts
        .iter()
        .map(|p| correlation_first_derivative(p, &jm).unwrap())
        .sum::<f64>()
        / 6.0;
    assert!(mean.abs() < 1e-12);
    let var: f64 = pts
        .iter()
        .map(|p| correlation_first_derivative(p, &jm).unwrap().powi(2))
        .sum::<f64>()
        / 6.0;
    let v = FunctionalId::Corr.influence_variance(&LawMoments::Joint(jm)).unwrap();
    assert!(close(var, v, 1e-12));
}

#[test]
fn product_moment_unbiased_estimates() {
    let d2 = DiscreteDistribution::new(
        vec![vec![0.0, 1.0], vec![1.0, -1.0], vec![2.0, 2.5]],
        vec![0.2, 0.5, 0.3],
    )
    .unwrap();
    let truth = JointMomentSet::from_weighted(&d2.flat_atoms(), 2, d2.probs(), 2)
        .unwrap()
        .get(&[0, 1])
        .unwrap();
    let n = 5;
    let e = exact_expectation(
        |t: &Tally<Vec<f64>>| {
            let (atoms, w) = t.support();
            let jm = JointMomentSet::from_weighted(&atoms.concat(), 2, &w, 2).unwrap();
            multivariate_moment_ue(&[0, 1], &jm, n).unwrap()
        },
        &d2,
        n,
    )
    .unwrap();
    assert!((e - truth).abs() < 1e-12, "{e} vs {truth}");

    let d3 = DiscreteDistribution::new(
        vec![vec![0.0, 1.0, 2.0], vec![1.0, -1.0, 0.5], vec![2.0, 2.5, -1.0]],
        vec![0.2, 0.5, 0.3],
    )
    .unwrap();
    let truth = JointMomentSet::from_weighted(&d3.flat_atoms(), 3, d3.probs(), 3)
        .unwrap()
        .get(&[0, 1, 2])
        .unwrap();
    let n = 6;
    let e = exact_expectation(
        |t: &Tally<Vec<f64>>| {
            let (atoms, w) = t.support();
            let jm = JointMomentSet::from_weighted(&atoms.concat(), 3, &w, 3).unwrap();
            multivariate_moment_ue(&[0, 1, 2], &jm, n).unwrap()
        },
        &d3,
        n,
    )
    .unwrap();
    assert!((e - truth).abs() < 1e-12, "{e} vs {truth}");
}

#[test]
fn duplicated_coordinates_reduce_to_variance_estimate() {
    let xs = [0.3, 1.1, 2.5, 4.0];
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x, x]).collect();
    let jm = plugbias::empirical::joint_central_moments(&Sample::from_rows(&rows).unwrap(), 2).unwrap();
    let m = plugbias::empirical::central_moments_of(&xs, 2).unwrap();
    let ue = multivariate_moment_ue(&[0, 1], &jm, 4).unwrap();
    assert!(close(ue, 4.0 * m.mu(2).unwrap() / 3.0, 1e-14));
}

#[test]
fn catalog_ids_round_trip() {
    for s in [
        "mean_pow:-1",
        "central_moment:4",
        "sd",
        "mean_over_sd",
        "mu3_mu2",
        "moment_pow:2:2",
        "ratio_means",
        "corr",
        "corr2",
        "return_period:0.1",
        "return_period:0.1:0.05",
    ] {
        let id: FunctionalId = s.parse().unwrap();
        assert_eq!(id.to_string(), s);
    }
    for bad in ["central_moment:9", "foo", "mean_pow:x", "return_period:1:2"] {
        assert!(bad.parse::<FunctionalId>().is_err(), "{bad}");
    }
}

#[test]
fn catalog_estimates_on_a_sample() {
    let s = Sample::univariate(vec![0.4, 1.2, 2.7, 3.1, 0.9, 1.8, 2.2]).unwrap();
    let id: FunctionalId = "central_moment:2".parse().unwrap();
    let e = id.estimate(&s, Family::S, 2).unwrap();
    assert!(close(e.corrected, e.plug_in * 7.0 / 6.0, 1e-12));
    let sd: FunctionalId = "sd".parse().unwrap();
    let e = sd.estimate(&s, Family::T, 4).unwrap();
    assert!(e.corrected > e.plug_in);
    let rp: FunctionalId = "return_period:1.0".parse().unwrap();
    let e = rp.estimate(&s, Family::S, 4).unwrap();
    let p: f64 = 2.0 / 7.0;
    assert!(close(e.plug_in, 1.0 / p, 1e-12));
    assert!(close(e.corrected, return_period(p, 7, 1.0 / 7.0).unwrap(), 1e-12));
    assert!(FunctionalId::Corr.estimate(&s, Family::T, 2).is_err());
}

#[test]
fn catalog_influence_variance_for_smooth_entries() {
    let normal = LawMoments::Univariate(MomentSet::new(2.0, &[1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0]).unwrap());
    let v = FunctionalId::Sd.influence_variance(&normal).unwrap();
    assert!(close(v, 0.5, 1e-14));
    let v = FunctionalId::MeanPow(-1.0).influence_variance(&normal).unwrap();
    assert!(close(v, 1.0 / 16.0, 1e-14));
    let v = FunctionalId::CentralMoment(2).influence_variance(&normal).unwrap();
    assert!(close(v, 2.0, 1e-14));
}
