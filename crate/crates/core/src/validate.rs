//! Self-check suite run by `relaybeam validate`.
//!
//! Every check is deterministic given the scenario seed and compares a
//! library result against an independent oracle: a brute-force search, a
//! quadrature, a Monte Carlo measurement or a direct batch computation.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::Rng;

use crate::airlink::{
    destination_receive, evaluate_sinr, exact_stats, qpsk_symbols, relay_forward, transmit_hop,
    SecondOrderStats,
};
use crate::beamformer::{
    predicted_vs_realized, solve_max_sinr, solve_max_sinr_general, solve_max_sinr_variant,
    SolveInputs, SolveVariant,
};
use crate::channel::{
    complex_normal, complex_normal_vector, inject_mismatch, realization_norms,
    relay_destination_distance, sample_channels, sample_geometry,
};
use crate::config::ScenarioConfig;
use crate::error::Component;
use crate::estimator::{error_spectrum, EstimatorState};
use crate::linalg::{hermitian_defect, max_abs, min_eigenvalue, outer};
use crate::simulator::{run_trial, trial_rng};
use crate::{linear_to_db, CMatrix, CVector, Result, C64};

/// Deliberate corruption used to prove the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Adds an off-diagonal Hermitian bump to every projector.
    Projector,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "projector" => Ok(Fault::Projector),
            other => Err(format!("unknown fault `{other}` (expected `projector`)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckResult { name, passed, detail }
    }
}

/// Channels and statistics of one random scenario instance.
pub fn sample_stats<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<(CMatrix, CVector, SecondOrderStats)> {
    let geometry = sample_geometry(config, rng);
    let (f, g) = sample_channels(&geometry, config, rng)?;
    let stats = exact_stats(&f, &g, &config.source_power_vec(), config.noise_power())?;
    Ok((f, g, stats))
}

/// Sample averages of the destination signal terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub desired: f64,
    pub interference: f64,
    pub noise: f64,
    /// Mean of `|z|²`.
    pub total: f64,
    /// Mean of `‖y‖²` at the relays.
    pub relay_power: f64,
}

impl PowerSplit {
    pub fn sinr(&self) -> f64 {
        self.desired / (self.interference + self.noise)
    }
}

/// Simulates the two-hop link `draws` times with QPSK symbols and Gaussian
/// noise, measuring each destination term separately.
pub fn monte_carlo_powers<R: Rng + ?Sized>(
    f: &CMatrix,
    g: &CVector,
    w: &CVector,
    source_powers: &[f64],
    noise_power: f64,
    draws: usize,
    rng: &mut R,
) -> Result<PowerSplit> {
    let m = f.nrows();
    let k = f.ncols();
    let zero_noise = CVector::zeros(m);
    let mut acc = PowerSplit {
        desired: 0.0,
        interference: 0.0,
        noise: 0.0,
        total: 0.0,
        relay_power: 0.0,
    };
    for _ in 0..draws {
        let symbols = qpsk_symbols(k, rng);
        let relay_noise = complex_normal_vector(m, noise_power, rng);
        let dest_noise = complex_normal(noise_power, rng);

        let x = transmit_hop(f, &symbols, source_powers, &relay_noise)?;
        let y = relay_forward(w, &x)?;
        let z = destination_receive(g, &y, dest_noise)?;

        let desired_x = transmit_hop(f, &masked(&symbols, |i| i == 0), source_powers, &zero_noise)?;
        let interf_x = transmit_hop(f, &masked(&symbols, |i| i > 0), source_powers, &zero_noise)?;
        let noise_part = destination_receive(g, &relay_forward(w, &relay_noise)?, dest_noise)?;
        let zero = C64::new(0.0, 0.0);
        acc.desired += destination_receive(g, &relay_forward(w, &desired_x)?, zero)?.norm_sqr();
        acc.interference += destination_receive(g, &relay_forward(w, &interf_x)?, zero)?.norm_sqr();
        acc.noise += noise_part.norm_sqr();
        acc.total += z.norm_sqr();
        acc.relay_power += y.norm_squared();
    }
    let n = draws as f64;
    Ok(PowerSplit {
        desired: acc.desired / n,
        interference: acc.interference / n,
        noise: acc.noise / n,
        total: acc.total / n,
        relay_power: acc.relay_power / n,
    })
}

fn masked(symbols: &CVector, keep: impl Fn(usize) -> bool) -> CVector {
    CVector::from_fn(symbols.len(), |i, _| if keep(i) { symbols[i] } else { C64::new(0.0, 0.0) })
}

fn variant(config: &ScenarioConfig) -> SolveVariant {
    if config.literal_denominator {
        SolveVariant::Unscaled
    } else {
        SolveVariant::Consistent
    }
}

/// `(x, z, mismatched F, mismatched g)` of one snapshot.
type Observation = (CVector, C64, CMatrix, CVector);

fn estimator_after<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    snapshots: usize,
    rng: &mut R,
) -> Result<(EstimatorState, Vec<Observation>)> {
    let (f, g, _) = sample_stats(config, rng)?;
    let (f_norms, g_norm) = realization_norms(&f, &g);
    let powers = config.source_power_vec();
    let p_n = config.noise_power();
    let w = CVector::from_element(config.m, C64::new(0.3, 0.0));
    let mut est = EstimatorState::new(config.m, config.k, config.epsilon_max, config.n_components);
    let mut history = Vec::with_capacity(snapshots);
    for _ in 0..snapshots {
        let state = inject_mismatch(&f, &g, config, &f_norms, g_norm, rng)?;
        let x = transmit_hop(
            &f,
            &qpsk_symbols(config.k, rng),
            &powers,
            &complex_normal_vector(config.m, p_n, rng),
        )?;
        let z = destination_receive(&g, &relay_forward(&w, &x)?, complex_normal(p_n, rng))?;
        est.update(&x, z, &state.f_mismatched, &state.g_mismatched)?;
        history.push((x, z, state.f_mismatched, state.g_mismatched));
    }
    Ok((est, history))
}

fn projector_checks(config: &ScenarioConfig, fault: Option<Fault>) -> Result<Vec<CheckResult>> {
    let mut rng = trial_rng(config.seed, 101);
    let mut hermitian = 0.0f64;
    let mut idempotence = 0.0f64;
    let mut trace = 0.0f64;
    for _ in 0..5 {
        let (est, _) = estimator_after(config, 20, &mut rng)?;
        let components = (0..config.k).map(Component::Source).chain([Component::Destination]);
        for component in components {
            let mut p = est.projector(component)?;
            if fault == Some(Fault::Projector) && config.m > 1 {
                p[(0, 1)] += C64::new(1e-3, 0.0);
                p[(1, 0)] += C64::new(1e-3, 0.0);
            }
            let rank = config.n_components.resolve(&est.spectrum(component))? as f64;
            hermitian = hermitian.max(hermitian_defect(&p));
            idempotence = idempotence.max(max_abs(&(&p * &p - &p)));
            trace = trace.max((p.trace().re - rank).abs());
        }
    }
    let tol = 1e-10;
    Ok(vec![
        CheckResult::new("projector hermitian", hermitian <= tol, format!("max |P - Pᴴ| = {hermitian:.2e}")),
        CheckResult::new("projector idempotence", idempotence <= tol, format!("max |P² - P| = {idempotence:.2e}")),
        CheckResult::new("projector trace", trace <= tol, format!("max |tr P - N| = {trace:.2e}")),
    ])
}

fn recursion_check(config: &ScenarioConfig) -> Result<CheckResult> {
    let mut rng = trial_rng(config.seed, 102);
    let (est, history) = estimator_after(config, 50, &mut rng)?;
    let n = C64::new(history.len() as f64, 0.0);
    let mut scv = CVector::zeros(config.m);
    let mut r_g = CMatrix::zeros(config.m, config.m);
    let mut r_f = vec![CMatrix::zeros(config.m, config.m); config.k];
    for (x, z, f_mis, g_mis) in &history {
        scv += x * z.conj();
        r_g += outer(g_mis, g_mis);
        for (r, fk) in r_f.iter_mut().zip(f_mis.column_iter()) {
            let fk = fk.into_owned();
            *r += outer(&fk, &fk);
        }
    }
    let vmax = |v: &CVector| v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut err = vmax(&(est.scv() - scv / n)) / vmax(est.scv());
    err = err.max(max_abs(&(est.r_g_hat() - r_g / n)) / max_abs(est.r_g_hat()));
    for (a, b) in est.r_f_hat().iter().zip(r_f) {
        err = err.max(max_abs(&(a - b / n)) / max_abs(a));
    }
    Ok(CheckResult::new(
        "scv recursion vs batch",
        err <= 1e-12,
        format!("max relative difference {err:.2e} over 50 snapshots"),
    ))
}

fn stats_check(config: &ScenarioConfig) -> Result<CheckResult> {
    let mut rng = trial_rng(config.seed, 103);
    let mut worst_defect = 0.0f64;
    let mut worst_eig = 0.0f64;
    let mut d_positive = true;
    for _ in 0..20 {
        let (_, _, stats) = sample_stats(config, &mut rng)?;
        for x in stats.r.iter().chain([&stats.q]) {
            let scale = max_abs(x).max(f64::MIN_POSITIVE);
            worst_defect = worst_defect.max(hermitian_defect(x) / scale);
            worst_eig = worst_eig.max(-min_eigenvalue(x) / scale);
        }
        d_positive &= stats.d.iter().all(|&d| d > 0.0);
    }
    Ok(CheckResult::new(
        "stats hermitian psd",
        worst_defect <= 1e-12 && worst_eig <= 1e-10 && d_positive,
        format!("defect {worst_defect:.2e}, negative eigenvalue {worst_eig:.2e}, D positive {d_positive}"),
    ))
}

/// Largest SINR over a `points`-point grid of the scalar weight magnitude
/// on `[0, sqrt(P_T / d)]`, with the phase swept alongside.
pub fn scalar_grid_max(inputs: &SolveInputs, points: usize) -> f64 {
    let limit = (inputs.p_t / inputs.d[0]).sqrt();
    (0..points)
        .map(|i| {
            let mag = limit * i as f64 / (points - 1) as f64;
            let phase = TAU * i as f64 / points as f64;
            inputs.sinr(&CVector::from_element(1, C64::from_polar(mag, phase)))
        })
        .fold(0.0, f64::max)
}

fn scalar_check(config: &ScenarioConfig) -> Result<CheckResult> {
    let mut rng = trial_rng(config.seed, 104);
    let mut scalar = config.clone();
    scalar.m = 1;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (_, _, stats) = sample_stats(&scalar, &mut rng)?;
        let inputs = SolveInputs::from_stats(&stats, config.p_t());
        let solved = inputs.sinr(&solve_max_sinr(&inputs)?.w);
        let grid = scalar_grid_max(&inputs, 10_000);
        worst = worst.max((solved - grid).abs() / grid);
    }
    Ok(CheckResult::new(
        "scalar grid oracle",
        worst <= 1e-6,
        format!("max relative gap {worst:.2e} over 50 draws"),
    ))
}

/// Composite Simpson rule for `∫₀^{ε_max} (R + ε ‖R‖_F I) dε`.
pub fn simpson_spectrum(r: &CMatrix, epsilon_max: f64, intervals: usize) -> CMatrix {
    let m = r.nrows();
    let h = epsilon_max / intervals as f64;
    let norm = r.norm();
    let integrand = |eps: f64| r + CMatrix::identity(m, m) * C64::new(eps * norm, 0.0);
    let mut sum = integrand(0.0) + integrand(epsilon_max);
    for i in 1..intervals {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += integrand(h * i as f64) * C64::new(weight, 0.0);
    }
    sum * C64::new(h / 3.0, 0.0)
}

fn quadrature_check(config: &ScenarioConfig) -> Result<CheckResult> {
    let mut rng = trial_rng(config.seed, 105);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let a = CMatrix::from_fn(config.m, config.m, |_, _| complex_normal(1.0, &mut rng));
        let r = &a * a.adjoint();
        let eps = if i % 2 == 0 { 0.2 } else { 0.5 };
        let diff = max_abs(&(error_spectrum(&r, eps) - simpson_spectrum(&r, eps, 64)));
        worst = worst.max(diff / max_abs(&r).max(1.0));
    }
    Ok(CheckResult::new(
        "error spectrum quadrature",
        worst <= 1e-8,
        format!("max scaled difference {worst:.2e}"),
    ))
}

fn consistency_check(config: &ScenarioConfig) -> Result<CheckResult> {
    let mut rng = trial_rng(config.seed, 106);
    let p_t = config.p_t();
    let mut gap = 0.0f64;
    let mut power = 0.0f64;
    for _ in 0..20 {
        let (_, _, stats) = sample_stats(config, &mut rng)?;
        let inputs = SolveInputs::from_stats(&stats, p_t);
        let w = solve_max_sinr_variant(&inputs, variant(config))?;
        gap = gap.max(predicted_vs_realized(&w, &inputs));
        power = power.max((w.transmit_power - p_t).abs() / p_t);
    }
    Ok(CheckResult::new(
        "solver consistency",
        gap <= 1e-8 && power <= 1e-9,
        format!("predicted vs evaluated {gap:.2e} dB, power error {power:.2e}"),
    ))
}

fn monte_carlo_check(config: &ScenarioConfig) -> Result<CheckResult> {
    let mut rng = trial_rng(config.seed, 107);
    let powers = config.source_power_vec();
    let p_n = config.noise_power();
    let mut sinr_gap = 0.0f64;
    let mut power_gap = 0.0f64;
    let mut closure = 0.0f64;
    for _ in 0..2 {
        let (f, g, stats) = sample_stats(config, &mut rng)?;
        let w = solve_max_sinr(&SolveInputs::from_stats(&stats, config.p_t()))?;
        let measured = monte_carlo_powers(&f, &g, &w.w, &powers, p_n, 100_000, &mut rng)?;
        let analytic = evaluate_sinr(&w.w, &stats)?;
        sinr_gap = sinr_gap.max((linear_to_db(measured.sinr()) - linear_to_db(analytic)).abs());
        power_gap = power_gap.max((measured.relay_power - w.transmit_power).abs() / w.transmit_power);
        let parts = measured.desired + measured.interference + measured.noise;
        closure = closure.max((measured.total - parts).abs() / parts);
    }
    Ok(CheckResult::new(
        "monte carlo sinr",
        sinr_gap <= 0.05 && power_gap <= 0.01 && closure <= 0.01,
        format!("sinr gap {sinr_gap:.3} dB, relay power {power_gap:.2e}, closure {closure:.2e}"),
    ))
}

fn determinism_check(config: &ScenarioConfig) -> Result<CheckResult> {
    let mut small = config.clone();
    small.snapshots = small.snapshots.min(10);
    let a = run_trial(&small, &mut trial_rng(small.seed, 7))?;
    let b = run_trial(&small, &mut trial_rng(small.seed, 7))?;
    let same = a
        .ccsp
        .iter()
        .chain(&a.perfect_csi)
        .chain(&a.naive_mismatched)
        .zip(b.ccsp.iter().chain(&b.perfect_csi).chain(&b.naive_mismatched))
        .all(|(x, y)| x.to_bits() == y.to_bits());
    Ok(CheckResult::new(
        "determinism",
        same,
        format!("two runs of {} snapshots bitwise equal: {same}", small.snapshots),
    ))
}

fn alignment(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).norm() / (a.norm() * b.norm())
}

fn scale_invariance_check(config: &ScenarioConfig) -> Result<CheckResult> {
    let mut rng = trial_rng(config.seed, 108);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (_, _, stats) = sample_stats(config, &mut rng)?;
        let inputs = SolveInputs::from_stats(&stats, config.p_t());
        let c: f64 = rng.random_range(0.1..10.0);
        let mut scaled = inputs.clone();
        scaled.r1 *= C64::new(c, 0.0);
        scaled.u *= C64::new(c, 0.0);
        scaled.p_n *= c;
        scaled.r1_factor = scaled.r1_factor.map(|a| a * C64::new(c.sqrt(), 0.0));
        let w = solve_max_sinr_general(&inputs, SolveVariant::Consistent)?;
        let ws = solve_max_sinr_general(&scaled, SolveVariant::Consistent)?;
        worst = worst.max(1.0 - alignment(&w.w, &ws.w));
    }
    Ok(CheckResult::new(
        "argmax scale invariance",
        worst <= 1e-9,
        format!("max 1 - |cos| = {worst:.2e}"),
    ))
}

fn dominance_check(config: &ScenarioConfig) -> Result<CheckResult> {
    let mut rng = trial_rng(config.seed, 109);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..5 {
        let (_, _, stats) = sample_stats(config, &mut rng)?;
        let inputs = SolveInputs::from_stats(&stats, config.p_t());
        let best = solve_max_sinr(&inputs)?.predicted_sinr;
        for _ in 0..10_000 {
            let mut v = complex_normal_vector(config.m, 1.0, &mut rng);
            v /= C64::new(v.norm(), 0.0);
            let w = CVector::from_fn(config.m, |r, _| v[r] * (config.p_t() / inputs.d[r]).sqrt());
            worst = worst.max(inputs.sinr(&w) / best - 1.0);
        }
    }
    Ok(CheckResult::new(
        "randomized dominance",
        worst <= 1e-9,
        format!("best candidate relative excess {worst:.2e}"),
    ))
}

fn trig_check(config: &ScenarioConfig) -> CheckResult {
    let mut rng = trial_rng(config.seed, 110);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d: f64 = rng.random_range(0.5..0.9);
        let theta: f64 = rng.random_range(-PI / 2.0..PI / 2.0);
        let (rx, ry) = (d * theta.cos(), d * theta.sin());
        let direct = (rx - 1.0).hypot(ry);
        worst = worst.max((relay_destination_distance(d, theta) - direct).abs());
    }
    CheckResult::new(
        "geometry law of cosines",
        worst <= 1e-12,
        format!("max distance difference {worst:.2e}"),
    )
}

/// Runs the whole suite. A check that errors counts as failed.
pub fn run_checks(config: &ScenarioConfig, fault: Option<Fault>) -> Vec<CheckResult> {
    let mut results = Vec::new();
    let mut push = |name: &'static str, outcome: Result<Vec<CheckResult>>| match outcome {
        Ok(r) => results.extend(r),
        Err(e) => results.push(CheckResult::new(name, false, format!("error: {e}"))),
    };
    push("projector laws", projector_checks(config, fault));
    push("scv recursion vs batch", recursion_check(config).map(|r| vec![r]));
    push("stats hermitian psd", stats_check(config).map(|r| vec![r]));
    push("scalar grid oracle", scalar_check(config).map(|r| vec![r]));
    push("error spectrum quadrature", quadrature_check(config).map(|r| vec![r]));
    push("solver consistency", consistency_check(config).map(|r| vec![r]));
    push("monte carlo sinr", monte_carlo_check(config).map(|r| vec![r]));
    push("determinism", determinism_check(config).map(|r| vec![r]));
    push("argmax scale invariance", scale_invariance_check(config).map(|r| vec![r]));
    push("randomized dominance", dominance_check(config).map(|r| vec![r]));
    push("geometry law of cosines", Ok(vec![trig_check(config)]));
    results
}

pub fn format_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{status}  {:width$}  {}", r.name, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{} checks, {failed} failed", results.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_linear_loading() {
        let r = CMatrix::from_fn(3, 3, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let diff = max_abs(&(simpson_spectrum(&r, 0.5, 2) - error_spectrum(&r, 0.5)));
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn projector_fault_trips_only_idempotence() {
        let config = ScenarioConfig::default();
        let results = projector_checks(&config, Some(Fault::Projector)).unwrap();
        let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
        assert_eq!(failed, ["projector idempotence"]);
    }

    #[test]
    fn fault_names_parse() {
        assert_eq!("projector".parse::<Fault>(), Ok(Fault::Projector));
        assert!("solver".parse::<Fault>().is_err());
    }
}
