//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relaybeam::airlink::evaluate_sinr;
use relaybeam::beamformer::{estimated_stats, perturbed_stats, solve_max_sinr_variant};
use relaybeam::channel::complex_normal;
use relaybeam::estimator::error_spectrum;
use relaybeam::simulator::{mean_and_std_err, run_experiment};
use relaybeam::validate::{monte_carlo_powers, run_checks, sample_stats};
use relaybeam::{
    linear_to_db, Algorithm, CMatrix, CVector, ScenarioConfig, SinrReport, SolveInputs,
    SolveVariant, Sweep, SweepAxis, C64,
};

type Check = fn() -> Outcome;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn random_unit(m: usize, rng: &mut ChaCha8Rng) -> CVector {
    let v = CVector::from_fn(m, |_, _| complex_normal(1.0, rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

fn solve(inputs: &SolveInputs) -> relaybeam::BeamWeights {
    solve_max_sinr_variant(inputs, SolveVariant::Consistent).expect("solvable instance")
}

fn solver_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let base = ScenarioConfig::default();
    let mut worst_gap = 0.0f64;
    let mut worst_power = 0.0f64;
    for i in 0..100 {
        let mut config = base.clone();
        config.p_t_dbw = rng.random_range(1.0..5.0);
        config.snr_db = rng.random_range(0.0..20.0);
        let (_, _, exact) = sample_stats(&config, &mut rng).unwrap();
        // exact, loaded, and rebuilt-from-estimates matrices in turn
        let stats = match i % 3 {
            0 => exact,
            1 => perturbed_stats(&exact, rng.random_range(0.05..0.5)),
            _ => {
                let f: Vec<CVector> = (0..config.k).map(|_| random_unit(config.m, &mut rng)).collect();
                let g = random_unit(config.m, &mut rng);
                estimated_stats(&f, &g, &config.source_power_vec(), config.noise_power()).unwrap()
            }
        };
        let inputs = SolveInputs::from_stats(&stats, config.p_t());
        let w = solve(&inputs);
        let evaluated = evaluate_sinr(&w.w, &stats).unwrap();
        worst_gap = worst_gap.max((linear_to_db(w.predicted_sinr) - linear_to_db(evaluated)).abs());
        let power: f64 = w.w.iter().zip(&stats.d).map(|(x, d)| d * x.norm_sqr()).sum();
        worst_power = worst_power.max((power - config.p_t()).abs() / config.p_t());
    }
    outcome(
        worst_gap <= 1e-8 && worst_power <= 1e-9,
        format!("max SINR gap {worst_gap:.2e} dB, max power error {worst_power:.2e}"),
    )
}

fn scalar_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let log = |rng: &mut ChaCha8Rng| 10f64.powf(rng.random_range(-2.0..2.0));
        let (r1, u, d, p_t, p_n) = (log(&mut rng), log(&mut rng), log(&mut rng), log(&mut rng), log(&mut rng));
        let inputs = SolveInputs {
            r1: CMatrix::from_element(1, 1, C64::new(r1, 0.0)),
            u: CMatrix::from_element(1, 1, C64::new(u, 0.0)),
            d: vec![d],
            p_t,
            p_n,
            r1_factor: None,
        };
        let solved = solve(&inputs).predicted_sinr;
        let limit = (p_t / d).sqrt();
        let grid = (0..10_000)
            .map(|i| {
                let mag = limit * i as f64 / 9_999.0;
                r1 * mag * mag / (p_n + u * mag * mag)
            })
            .fold(0.0, f64::max);
        worst = worst.max((solved - grid).abs() / grid);
    }
    outcome(worst <= 1e-6, format!("max relative gap {worst:.2e} over 50 draws"))
}

fn randomized_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..20 {
        let config = ScenarioConfig {
            m: if i % 2 == 0 { 2 } else { 4 },
            ..ScenarioConfig::default()
        };
        let (_, _, stats) = sample_stats(&config, &mut rng).unwrap();
        let p_t = config.p_t();
        let best = evaluate_sinr(&solve(&SolveInputs::from_stats(&stats, p_t)).w, &stats).unwrap();
        for _ in 0..100_000 {
            let v = random_unit(config.m, &mut rng);
            let budget: f64 = rng.random_range(0.0..=1.0);
            let w = CVector::from_fn(config.m, |r, _| v[r] * (budget * p_t / stats.d[r]).sqrt());
            worst = worst.max(evaluate_sinr(&w, &stats).unwrap() / best - 1.0);
        }
    }
    outcome(worst <= 1e-9, format!("best candidate relative excess {worst:.2e}"))
}

fn quadrature_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let m = 2 + i % 7;
        let a = CMatrix::from_fn(m, m, |_, _| complex_normal(1.0, &mut rng));
        let r = &a * a.adjoint() / C64::new(m as f64, 0.0);
        let eps_max = if i % 2 == 0 { 0.2 } else { 0.5 };
        // 5-point Gauss-Legendre on [0, eps_max]
        let nodes = [
            (0.0, 128.0 / 225.0),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let norm = r.norm();
        let mut integral = CMatrix::zeros(m, m);
        for (x, weight) in nodes {
            let eps = 0.5 * eps_max * (x + 1.0);
            let integrand = &r + CMatrix::identity(m, m) * C64::new(eps * norm, 0.0);
            integral += integrand * C64::new(0.5 * eps_max * weight, 0.0);
        }
        let diff = (error_spectrum(&r, eps_max) - integral)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    outcome(worst <= 1e-8, format!("max entry difference {worst:.2e} over 50 matrices"))
}

fn monte_carlo_sinr() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let config = ScenarioConfig::default();
    let powers = config.source_power_vec();
    let mut worst = 0.0f64;
    for i in 0..10 {
        let (f, g, stats) = sample_stats(&config, &mut rng).unwrap();
        // alternate optimized and arbitrary weights so interference is not always nulled
        let w = if i % 2 == 0 {
            solve(&SolveInputs::from_stats(&stats, config.p_t())).w
        } else {
            CVector::from_fn(config.m, |_, _| complex_normal(0.1, &mut rng))
        };
        let measured =
            monte_carlo_powers(&f, &g, &w, &powers, config.noise_power(), 1_000_000, &mut rng).unwrap();
        let analytic = evaluate_sinr(&w, &stats).unwrap();
        worst = worst.max((linear_to_db(measured.sinr()) - linear_to_db(analytic)).abs());
    }
    outcome(worst <= 0.05, format!("max |measured - analytic| {worst:.4} dB over 10 realizations"))
}

fn paired_margin(a: &[f64], b: &[f64]) -> (f64, f64) {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    mean_and_std_err(&diff)
}

fn samples(report: &SinrReport, algorithm: Algorithm, point: usize) -> &[f64] {
    &report.series(algorithm).samples[point]
}

fn pt_trend() -> Outcome {
    let mut config = ScenarioConfig::pt_sweep();
    config.trials = 200;
    let sweep = Sweep::new(SweepAxis::PtDbw, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    let report = run_experiment(&config, &sweep).unwrap();
    let mut failures = Vec::new();
    for algorithm in Algorithm::ALL {
        let db = &report.series(algorithm).sinr_db;
        if db.windows(2).any(|p| p[1] < p[0] - 0.1) {
            failures.push(format!("{} not nondecreasing {db:.2?}", algorithm.name()));
        }
    }
    let mut weakest = f64::INFINITY;
    for point in 0..report.axis_values.len() {
        let perfect = samples(&report, Algorithm::PerfectCsi, point);
        let ccsp = samples(&report, Algorithm::Ccsp, point);
        let naive = samples(&report, Algorithm::NaiveMismatched, point);
        for (name, hi, lo) in [("perfect-ccsp", perfect, ccsp), ("ccsp-naive", ccsp, naive)] {
            let (mean, se) = paired_margin(hi, lo);
            weakest = weakest.min(mean / se);
            if mean < 3.0 * se {
                failures.push(format!("{name} margin {:.2} SE at point {point}", mean / se));
            }
        }
        let db = |a| report.series(a).sinr_db[point];
        let ccsp_gap = db(Algorithm::PerfectCsi) - db(Algorithm::Ccsp);
        let naive_gap = db(Algorithm::PerfectCsi) - db(Algorithm::NaiveMismatched);
        if ccsp_gap >= naive_gap {
            failures.push(format!("gap {ccsp_gap:.2} dB not below naive {naive_gap:.2} dB at point {point}"));
        }
    }
    let summary = format!(
        "ccsp {:.2?} dB, perfect {:.2?}, naive {:.2?}, weakest ordering margin {weakest:.1} SE",
        report.series(Algorithm::Ccsp).sinr_db,
        report.series(Algorithm::PerfectCsi).sinr_db,
        report.series(Algorithm::NaiveMismatched).sinr_db,
    );
    let passed = failures.is_empty();
    outcome(passed, if passed { summary } else { format!("{summary}; {}", failures.join("; ")) })
}

fn snapshot_trend() -> Outcome {
    let mut config = ScenarioConfig::snapshot_sweep();
    config.trials = 200;
    let sweep = Sweep::new(SweepAxis::Snapshots, vec![5.0, 100.0]);
    let report = run_experiment(&config, &sweep).unwrap();
    let (gain, se) = paired_margin(samples(&report, Algorithm::Ccsp, 1), samples(&report, Algorithm::Ccsp, 0));
    let db = |a, p| report.series(a).sinr_db[p];
    let ccsp_final = db(Algorithm::Ccsp, 1);
    let naive_final = db(Algorithm::NaiveMismatched, 1);
    outcome(
        gain >= 3.0 * se && ccsp_final > naive_final,
        format!(
            "ccsp {:.2} -> {ccsp_final:.2} dB (gain {:.1} SE), naive final {naive_final:.2} dB",
            db(Algorithm::Ccsp, 0),
            gain / se
        ),
    )
}

fn validate_suite() -> Outcome {
    let results = run_checks(&ScenarioConfig::default(), None);
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    outcome(
        failed.is_empty(),
        format!("{} checks, failed: {failed:?}", results.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Check); 8] = [
        ("solver consistency", Duration::from_secs(5), solver_consistency),
        ("scalar grid oracle", Duration::from_secs(5), scalar_oracle),
        ("randomized dominance", Duration::from_secs(30), randomized_dominance),
        ("error spectrum quadrature", Duration::from_secs(10), quadrature_oracle),
        ("monte carlo sinr", Duration::from_secs(60), monte_carlo_sinr),
        ("sinr vs relay power trend", Duration::from_secs(600), pt_trend),
        ("sinr vs snapshots trend", Duration::from_secs(600), snapshot_trend),
        ("validate suite", Duration::from_secs(300), validate_suite),
    ];
    let mut all = true;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let passed = result.passed && elapsed <= budget;
        all &= passed;
        println!(
            "{} criterion {}: {name} ({:.1}s of {}s) {}",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            result.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
