//! End-to-end acceptance checks. Each check prints one `PASS`/`FAIL` line;
//! the process exits non-zero if any check fails.

use fermishadow::gaussian::{slater_probe_state, GaussianStateSpec, SlaterSpec};
use fermishadow::majorana::PauliString;
use fermishadow::matchgate::{compile_matchgate, defining_relation_defect, sample_haar_orthogonal, sample_signed_permutation};
use fermishadow::noise::{analytic_b, brute_force_b, fidelity_table};
use fermishadow::shadow::{
    calibrate, collect_samples, estimate_gaussian_overlap, estimate_majorana, estimate_slater_overlap,
    estimate_unmitigated, majorana_round_value, single_round_f_estimates,
};
use fermishadow::simulator::random_pure_state;
use fermishadow::skew::{pfaffian, SkewMatrix};
use fermishadow::theory::{exact_f2k, exact_fhat_second_moment, variance_bound_majorana};
use fermishadow::{
    DenseOperator, DensityMatrix, EstimatorConfig, Error, MajoranaIndexSet, Matrix, NoiseModel, RotationQ,
    SamplingGroup, SeededRng, SignedPermutation,
};
use num_complex::Complex;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;
use std::time::Instant;

type C64 = Complex<f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(value: f64, target: f64, se: f64, sigmas: f64) -> bool {
    (value - target).abs() <= sigmas * se + 1e-12
}

fn majorana_truth(rho: &DenseOperator<f64>, s: &MajoranaIndexSet, q1: &RotationQ<f64>) -> f64 {
    fermishadow::shadow::dense_majorana_expectation(rho, s, q1).unwrap()
}

fn calibration_unbiasedness() -> Outcome {
    let n = 4;
    let cfg = EstimatorConfig::new(1, 1, 4000, 20).unwrap();
    let model = NoiseModel::Noiseless;
    let cal = calibrate(&model, n, &cfg, SamplingGroup::Orth, &SeededRng::new(101, 0)).unwrap();
    let mut pass = cal.rounds_used == 80_000;
    let mut parts = Vec::new();
    for k in 0..=n {
        let exact = exact_f2k(&model, n, k).unwrap();
        let ok = within(cal.f_hat[k], exact, cal.std_error[k], 3.0);
        pass &= ok;
        parts.push(format!("k={k}: {:.5}±{:.5} vs {:.5}", cal.f_hat[k], cal.std_error[k], exact));
    }
    outcome(pass, parts.join(", "))
}

fn noise_models_n4() -> Vec<(String, NoiseModel<f64>)> {
    let n = 4;
    let d = 1 << n;
    let weights: Vec<f64> = (0..d).map(|u| (u + 1) as f64).collect();
    let total: f64 = weights.iter().sum();
    let p_bar: Vec<f64> = weights.iter().map(|w| 0.2 * w / total).collect();
    vec![
        ("depolarizing p=0.1".into(), NoiseModel::depolarizing(0.1).unwrap()),
        ("depolarizing p=0.2".into(), NoiseModel::depolarizing(0.2).unwrap()),
        ("depolarizing p=0.3".into(), NoiseModel::depolarizing(0.3).unwrap()),
        ("damping Σp̄=0.2".into(), NoiseModel::damping_symmetric(n, p_bar).unwrap()),
        (
            "x-rotation θ=π/6".into(),
            NoiseModel::x_rotation(vec![std::f64::consts::PI / 6.0; n]).unwrap(),
        ),
    ]
}

fn noise_scaled_coefficients() -> Outcome {
    let n = 4;
    let cfg = EstimatorConfig::new(1, 1, 4000, 20).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (label, model)) in noise_models_n4().into_iter().enumerate() {
        let b = analytic_b(&model, n).unwrap();
        let mut brute_dev = 0.0f64;
        for k in 0..=n {
            brute_dev = brute_dev.max((brute_force_b(&model, n, k).unwrap() - b.get(k)).abs());
        }
        let cal = calibrate(&model, n, &cfg, SamplingGroup::Orth, &SeededRng::new(200 + i as u64, 0)).unwrap();
        let mut worst = 0.0f64;
        let mut ok = brute_dev < 1e-8;
        for k in 0..=n {
            let exact = exact_f2k(&model, n, k).unwrap();
            ok &= within(cal.f_hat[k], exact, cal.std_error[k], 3.0);
            if cal.std_error[k] > 0.0 {
                worst = worst.max((cal.f_hat[k] - exact).abs() / cal.std_error[k]);
            }
        }
        pass &= ok;
        parts.push(format!("{label}: max dev {worst:.2}σ, |analytic-brute| {brute_dev:.1e}"));
    }
    outcome(pass, parts.join("; "))
}

fn bias_separation() -> Outcome {
    let n = 4;
    let p = 0.2f64;
    let model = NoiseModel::depolarizing(p).unwrap();
    let group = SamplingGroup::SignedPerm;
    let n_e = (4000.0 / (1.0 - p)).round() as usize;
    let cfg = EstimatorConfig::new(n_e, 10, 4000, 20).unwrap();
    let mut rng = SeededRng::new(300, 0).rng();
    let gspec = GaussianStateSpec::<f64>::random(n, &mut rng);
    let rho = DensityMatrix::new(gspec.to_dense().unwrap()).unwrap();
    let q1 = sample_haar_orthogonal::<f64, _>(n, &mut rng);
    let s = MajoranaIndexSet::new(n, vec![1, 2]).unwrap();
    let truth = majorana_truth(rho.matrix(), &s, &q1);
    let cal = calibrate(&model, n, &cfg, group, &SeededRng::new(301, 0)).unwrap();
    let samples = collect_samples(&rho, &model, group, cfg.estimation_rounds(), &SeededRng::new(302, 0)).unwrap();
    let mit = estimate_majorana(&samples, &cal, &s, &q1, &cfg).unwrap();
    let cs = estimate_unmitigated(&samples, &s, &q1, &cfg).unwrap();
    let pass = within(mit.value, truth, mit.std_error, 3.0) && within(cs.value, (1.0 - p) * truth, cs.std_error, 3.0);
    outcome(
        pass,
        format!(
            "truth {truth:.4}; mitigated {:.4}±{:.4}; cs {:.4}±{:.4} vs {:.4}",
            mit.value,
            mit.std_error,
            cs.value,
            cs.std_error,
            (1.0 - p) * truth
        ),
    )
}

fn counterexample() -> Outcome {
    let n = 4;
    let q = SignedPermutation::from_signed_one_based(&[3, 4, 1, 5, 6, 8, 7, 2])
        .unwrap()
        .to_rotation::<f64>()
        .unwrap();
    let model = NoiseModel::gaussian_unitary(q).unwrap();
    let b = analytic_b(&model, n).unwrap();
    let zero_b = b.get(2).abs() < 1e-12 && b.get(3).abs() < 1e-12;
    let cfg = EstimatorConfig::new(1, 1, 4000, 20).unwrap();
    let cal = calibrate(&model, n, &cfg, SamplingGroup::Orth, &SeededRng::new(400, 0)).unwrap();
    let raised = match cal.ensure_invertible() {
        Err(Error::MitigationFailure { ks }) => ks.contains(&2) && ks.contains(&3),
        _ => false,
    };
    outcome(
        zero_b && raised,
        format!("B = {:?}; f̂ = {:?}; se = {:?}; flagged k = {:?}", b.as_slice(), cal.f_hat, cal.std_error, cal.flagged),
    )
}

/// Sum over perfect matchings, expanding along the first index.
fn pfaffian_by_matchings(a: &Matrix<f64>, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let first = idx[0];
    let mut acc = 0.0;
    for j in 1..idx.len() {
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != idx[j]).collect();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        acc += sign * a[(first, idx[j])] * pfaffian_by_matchings(a, &rest);
    }
    acc
}

fn pfaffian_identities() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 1200,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (1usize..=4, any::<u64>());
    let worst = std::cell::Cell::new(0.0f64);
    let result = runner.run(&strategy, |(half, seed)| {
        let dim = 2 * half;
        let mut rng = SeededRng::new(seed, 0).rng();
        let upper: Vec<f64> = (0..dim * (dim - 1) / 2).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let a = SkewMatrix::from_upper(dim, &upper).unwrap();
        let pf = pfaffian(&a);
        let det = a.matrix().det();
        let all: Vec<usize> = (0..dim).collect();
        let comb = pfaffian_by_matchings(a.matrix(), &all);
        let q = sample_haar_orthogonal::<f64, _>(half, &mut rng);
        let qd = q.det() as f64;
        let rotated = pfaffian(&a.congruence(q.matrix()).unwrap());
        let dev = (pf * pf - det).abs().max((rotated - qd * pf).abs()).max((pf - comb).abs());
        worst.set(worst.get().max(dev));
        prop_assert!(dev < 1e-8, "deviation {dev:e} at dim {dim}");
        Ok(())
    });
    match result {
        Ok(()) => outcome(true, format!("1200 random instances up to 8×8, max deviation {:.1e}", worst.get())),
        Err(e) => outcome(false, format!("{e}")),
    }
}

fn expectation_lemma() -> Outcome {
    let n = 3;
    let mut rng = SeededRng::new(600, 0).rng();
    let mut worst = 0.0f64;
    let mut relation = 0.0f64;
    let sets: Vec<MajoranaIndexSet> = (0..=n).flat_map(|k| MajoranaIndexSet::all_of_size(n, 2 * k)).collect();
    for _ in 0..50 {
        let q = sample_haar_orthogonal::<f64, _>(n, &mut rng);
        let u = compile_matchgate(&q).unwrap();
        relation = relation.max(defining_relation_defect(&u, &q).unwrap());
        for x in 0..1usize << n {
            let cov = SkewMatrix::basis(n, x).congruence(q.matrix()).unwrap();
            let mut ket = vec![C64::new(0.0, 0.0); 1 << n];
            ket[x] = C64::new(1.0, 0.0);
            let ux = u.mat_vec(&ket);
            for s in &sets {
                let k = s.len() / 2;
                let sub = fermishadow::skew::skew_submatrix(&cov, s.indices()).unwrap();
                let fast = fermishadow::scalar::i_pow::<f64>(k as i64) * pfaffian(&sub);
                let dense = PauliString::gamma(s).expectation(&ux);
                worst = worst.max((fast - dense).norm());
            }
        }
    }
    outcome(
        worst < 1e-8 && relation < 1e-10,
        format!(
            "50 rotations × 8 inputs × {} sets, max deviation {worst:.1e}, U†γU defect {relation:.1e}",
            sets.len()
        ),
    )
}

fn second_moment() -> Outcome {
    let n = 2;
    let rounds = 1_000_000;
    let vac = DensityMatrix::vacuum(n);
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, model) in [NoiseModel::Noiseless, NoiseModel::depolarizing(0.5).unwrap()].into_iter().enumerate() {
        let samples = collect_samples(&vac, &model, SamplingGroup::Orth, rounds, &SeededRng::new(700 + i as u64, 0)).unwrap();
        let rows: Vec<Vec<f64>> = samples.iter().map(single_round_f_estimates).collect();
        for k in 0..=n {
            let sq: Vec<f64> = rows.iter().map(|r| r[k] * r[k]).collect();
            let m = fermishadow::stats::mean(&sq);
            let se = (fermishadow::stats::variance(&sq) / rounds as f64).sqrt();
            let exact = exact_fhat_second_moment(&model, n, k).unwrap();
            let ok = within(m, exact, se, 3.0);
            pass &= ok;
            parts.push(format!("{} k={k}: {m:.5}±{se:.5} vs {exact:.5}", model.label()));
        }
    }
    outcome(pass, parts.join(", "))
}

/// The four swept noise families at their six plotted strengths.
fn figure_points(n: usize) -> Vec<(String, NoiseModel<f64>)> {
    let mut out = Vec::new();
    let mut rng = SeededRng::new(800, 0).rng();
    for j in 1..=6 {
        let p = 0.05 * j as f64;
        out.push((format!("depolarizing p={p:.2}"), NoiseModel::depolarizing(p).unwrap()));
    }
    for j in 1..=6 {
        out.push((format!("damping j={j}"), fermishadow::noise::damping_sweep_point(n, j, &mut rng).unwrap()));
    }
    for j in 1..=6 {
        let theta = std::f64::consts::PI / (2.0 * (8 - j) as f64);
        out.push((
            format!("x-rotation θ=π/{}", 2 * (8 - j)),
            NoiseModel::x_rotation(vec![theta; n]).unwrap(),
        ));
    }
    let mut found = 0;
    while found < 6 {
        let q = sample_signed_permutation(n, &mut rng).to_rotation::<f64>().unwrap();
        let model = NoiseModel::gaussian_unitary(q).unwrap();
        if analytic_b(&model, n).unwrap().get(1).abs() > 1e-12 {
            found += 1;
            out.push((format!("gaussian-unitary #{found}"), model));
        }
    }
    out
}

fn variance_soundness() -> Outcome {
    let n = 4;
    let cfg = EstimatorConfig::new(5000, 10, 4000, 20).unwrap();
    let mut rng = SeededRng::new(810, 0).rng();
    let rho = random_pure_state::<f64, _>(n, &mut rng).unwrap();
    let q1 = sample_haar_orthogonal::<f64, _>(n, &mut rng);
    let s = MajoranaIndexSet::new(n, vec![1, 2]).unwrap();
    let mut pass = true;
    let mut tightest = (f64::INFINITY, String::new());
    for (i, (label, model)) in figure_points(n).into_iter().enumerate() {
        let seed = 820 + 3 * i as u64;
        let cal = calibrate(&model, n, &cfg, SamplingGroup::Orth, &SeededRng::new(seed, 0)).unwrap();
        let f = cal.f_hat[1];
        let eps_c = 3.0 * cal.std_error[1] / f.abs();
        let bound = variance_bound_majorana(&model, n, 1, eps_c).unwrap();
        let samples = collect_samples(&rho, &model, SamplingGroup::Orth, cfg.estimation_rounds(), &SeededRng::new(seed + 1, 0)).unwrap();
        let values: Vec<f64> = samples.iter().map(|x| majorana_round_value(x, &s, &q1) / f).collect();
        let var = fermishadow::stats::variance(&values);
        // the sample variance itself fluctuates; test the population value at 3 standard errors
        let mean = fermishadow::stats::mean(&values);
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / values.len() as f64;
        let se_var = ((m4 - var * var).max(0.0) / values.len() as f64).sqrt();
        pass &= var - 3.0 * se_var <= bound;
        let ratio = var / bound;
        if bound / var < tightest.0 {
            tightest = (bound / var, format!("{label}: var {var:.3}±{se_var:.3} vs bound {bound:.3} (ratio {ratio:.3})"));
        }
    }
    outcome(pass, format!("24 points; tightest {}", tightest.1))
}

fn gaussian_overlap() -> Outcome {
    let n = 4;
    let cfg = EstimatorConfig::new(10_000, 10, 4000, 20).unwrap();
    let mut rng = SeededRng::new(900, 0).rng();
    let rho = random_pure_state::<f64, _>(n, &mut rng).unwrap();
    let gspec = GaussianStateSpec::<f64>::random(n, &mut rng);
    let truth = rho.matrix().trace_product(&gspec.to_dense().unwrap()).re;
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, model) in [NoiseModel::Noiseless, NoiseModel::depolarizing(0.2).unwrap()].into_iter().enumerate() {
        let seed = 910 + 2 * i as u64;
        let cal = calibrate(&model, n, &cfg, SamplingGroup::Orth, &SeededRng::new(seed, 0)).unwrap();
        let samples = collect_samples(&rho, &model, SamplingGroup::Orth, cfg.estimation_rounds(), &SeededRng::new(seed + 1, 0)).unwrap();
        let est = estimate_gaussian_overlap(&samples, &cal, &gspec, &cfg).unwrap();
        pass &= within(est.value, truth, est.std_error, 3.0);
        parts.push(format!("{}: {:.4}±{:.4}", model.label(), est.value, est.std_error));
    }
    outcome(pass, format!("truth {truth:.4}; {}", parts.join(", ")))
}

fn slater_overlap() -> Outcome {
    let n = 3;
    let tau = 1;
    let cfg = EstimatorConfig::new(20_000, 10, 4000, 20).unwrap();
    let mut rng = SeededRng::new(1000, 0).rng();
    let sspec = SlaterSpec::<f64>::random(n, tau, &mut rng).unwrap();
    let psi = fermishadow::simulator::random_state_vector::<f64, _>(n, &mut rng);
    let phi = sspec.state_vector().unwrap();
    let truth: C64 = psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
    let probe = slater_probe_state(&psi, tau).unwrap();
    let big_n = probe.n();
    let model = NoiseModel::Noiseless;
    let cal = calibrate(&model, big_n, &cfg, SamplingGroup::Orth, &SeededRng::new(1001, 0)).unwrap();
    let samples = collect_samples(&probe, &model, SamplingGroup::Orth, cfg.estimation_rounds(), &SeededRng::new(1002, 0)).unwrap();
    let est = estimate_slater_overlap(&samples, &cal, &sspec, &cfg).unwrap();
    let pass = big_n == n + 1
        && within(est.value.re, truth.re, est.std_error_re, 3.0)
        && within(est.value.im, truth.im, est.std_error_im, 3.0);
    outcome(
        pass,
        format!(
            "register {big_n} qubits; truth {:.4}{:+.4}i; estimate {:.4}±{:.4} {:+.4}±{:.4}i",
            truth.re, truth.im, est.value.re, est.std_error_re, est.value.im, est.std_error_im
        ),
    )
}

fn table_two() -> Outcome {
    let mut worst = 0.0f64;
    let mut check = |got: f64, want: f64| worst = worst.max((got - want).abs());
    for p in [0.0, 0.1, 0.37, 0.8, 1.0] {
        let row = fidelity_table(&NoiseModel::depolarizing(p).unwrap(), 1).unwrap();
        check(row.f_avg, 1.0 - p / 2.0);
        check(row.f_z, 1.0 - p / 2.0);
        check(row.b1, 1.0 - p);
    }
    for (p0, p1) in [(0.0, 0.0), (0.1, 0.3), (0.25, 0.05), (0.9, 0.6), (1.0, 0.2)] {
        let row = fidelity_table(&NoiseModel::damping_symmetric(1, vec![p0, p1]).unwrap(), 1).unwrap();
        check(row.f_avg, 2.0 / 3.0 - (p0 + p1) / 6.0 + ((1.0 - p0) * (1.0 - p1)).sqrt() / 3.0);
        check(row.f_z, 1.0 - (p0 + p1) / 2.0);
        check(row.b1, 1.0 - (p0 + p1));
    }
    for theta in [0.0, 0.3, 1.1, std::f64::consts::FRAC_PI_2, 2.9] {
        let row = fidelity_table(&NoiseModel::x_rotation(vec![theta]).unwrap(), 1).unwrap();
        check(row.f_avg, (theta.cos() + 2.0) / 3.0);
        check(row.f_z, (theta / 2.0).cos().powi(2));
        check(row.b1, theta.cos());
    }
    outcome(worst < 1e-12, format!("15 parameter points × 3 rows, max deviation {worst:.1e}"))
}

fn main() {
    let checks: Vec<(&str, fn() -> Outcome)> = vec![
        ("calibration unbiasedness", calibration_unbiasedness),
        ("noise-scaled coefficients", noise_scaled_coefficients),
        ("bias separation", bias_separation),
        ("counterexample", counterexample),
        ("pfaffian identities", pfaffian_identities),
        ("expectation lemma", expectation_lemma),
        ("second moment", second_moment),
        ("variance-bound soundness", variance_soundness),
        ("gaussian overlap", gaussian_overlap),
        ("slater overlap", slater_overlap),
        ("fidelity table", table_two),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let r = check();
        let tag = if r.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name} ({:.1}s): {}", start.elapsed().as_secs_f64(), r.detail);
        if !r.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
