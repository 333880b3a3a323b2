//! Seeded Monte Carlo trials and parameter sweeps.
//!
//! Trial `t` of a run with seed `s` draws from `ChaCha8Rng::seed_from_u64(s)`
//! switched to stream `t`. The same substreams are reused at every sweep point,
//! so sweep curves are compared on common random numbers. Results land in a
//! slot per trial, which keeps reports independent of thread scheduling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::airlink::{
    destination_receive, exact_stats, qpsk_symbols, relay_forward, transmit_hop, BeamWeights,
};
use crate::beamformer::{
    estimated_stats, perturbed_stats, solve_max_sinr_variant, SolveInputs, SolveVariant,
};
use crate::channel::{
    complex_normal, complex_normal_vector, inject_mismatch, realization_norms, sample_channels,
    sample_geometry,
};
use crate::config::{Fading, Readout, ScenarioConfig};
use crate::error::Component;
use crate::estimator::EstimatorState;
use crate::{linear_to_db, CVector, Error, Result, C64};

/// Beamformers compared in every trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Weights from the cross-correlation and subspace projection estimates.
    Ccsp,
    /// Weights from the true channels.
    PerfectCsi,
    /// Weights from the mismatched channels taken at face value.
    NaiveMismatched,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::Ccsp,
        Algorithm::PerfectCsi,
        Algorithm::NaiveMismatched,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ccsp => "ccsp",
            Algorithm::PerfectCsi => "perfect_csi",
            Algorithm::NaiveMismatched => "naive_mismatched",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    PtDbw,
    SnrDb,
    Snapshots,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::PtDbw => "pt_dbw",
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::Snapshots => "snapshots",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pt_dbw" => Ok(SweepAxis::PtDbw),
            "snr_db" => Ok(SweepAxis::SnrDb),
            "snapshots" => Ok(SweepAxis::Snapshots),
            _ => Err("expected pt_dbw, snr_db or snapshots".to_owned()),
        }
    }
}

/// Sweep axis and grid. An empty grid on the snapshot axis means every snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
}

impl Sweep {
    pub fn new(axis: SweepAxis, grid: Vec<f64>) -> Self {
        Sweep { axis, grid }
    }

    /// Parses `start:stop:step` (inclusive) or a comma separated list.
    pub fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Vec::new());
        }
        let num = |s: &str| {
            f64::from_str(s.trim())
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{s}` is not a finite number"))
        };
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 3 {
                return Err("range grids are written start:stop:step".to_owned());
            }
            let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0) || stop < start {
                return Err("range grid needs step > 0 and stop >= start".to_owned());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        } else {
            text.split(',').map(num).collect()
        }
    }

    pub fn grid_text(&self) -> String {
        self.grid
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn validate(&self, snapshots: usize) -> Result<()> {
        match self.axis {
            SweepAxis::PtDbw | SweepAxis::SnrDb if self.grid.is_empty() => {
                Err(Error::config("sweep_grid", "grid is empty"))
            }
            SweepAxis::Snapshots => {
                for &v in &self.grid {
                    if v.fract() != 0.0 || v < 1.0 || v > snapshots as f64 {
                        return Err(Error::config(
                            "sweep_grid",
                            format!("snapshot index {v} outside 1..={snapshots}"),
                        ));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Grid values with the empty snapshot grid expanded.
    pub fn points(&self, snapshots: usize) -> Vec<f64> {
        if self.axis == SweepAxis::Snapshots && self.grid.is_empty() {
            (1..=snapshots).map(|i| i as f64).collect()
        } else {
            self.grid.clone()
        }
    }
}

/// Random stream of one trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Linear output SINR of each algorithm at every snapshot of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub ccsp: Vec<f64>,
    pub perfect_csi: Vec<f64>,
    pub naive_mismatched: Vec<f64>,
    /// Snapshots at which the CCSP estimate fell back to an earlier one.
    pub fallbacks: usize,
}

impl TrialOutcome {
    pub fn series(&self, algorithm: Algorithm) -> &[f64] {
        match algorithm {
            Algorithm::Ccsp => &self.ccsp,
            Algorithm::PerfectCsi => &self.perfect_csi,
            Algorithm::NaiveMismatched => &self.naive_mismatched,
        }
    }
}

fn variant(config: &ScenarioConfig) -> SolveVariant {
    if config.literal_denominator {
        SolveVariant::Unscaled
    } else {
        SolveVariant::Consistent
    }
}

/// Uniform weights meeting `wᴴ D̂ w = P_T` for `D̂` loaded with `ε_max / 2`.
pub fn bootstrap_weights(
    f_mismatched: &nalgebra::DMatrix<C64>,
    g_mismatched: &CVector,
    config: &ScenarioConfig,
) -> Result<CVector> {
    let stats = exact_stats(
        f_mismatched,
        g_mismatched,
        &config.source_power_vec(),
        config.noise_power(),
    )?;
    let loaded = perturbed_stats(&stats, config.epsilon_max / 2.0);
    let total: f64 = loaded.d.iter().sum();
    Ok(CVector::from_element(
        config.m,
        C64::new((config.p_t() / total).sqrt(), 0.0),
    ))
}

/// Runs one trial with the stream of trial 0 coordinates in errors.
pub fn run_trial<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<TrialOutcome> {
    run_trial_indexed(config, rng, 0)
}

fn run_trial_indexed<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
    trial: usize,
) -> Result<TrialOutcome> {
    config.validate()?;
    let powers = config.source_power_vec();
    let p_n = config.noise_power();
    let p_t = config.p_t();
    let solve_variant = variant(config);
    let fail = |snapshot: usize, message: String| Error::Numerical {
        trial,
        snapshot,
        message,
    };

    let geometry = sample_geometry(config, rng);
    let (mut f, mut g) = sample_channels(&geometry, config, rng)?;
    let mut estimator = EstimatorState::new(config.m, config.k, config.epsilon_max, config.n_components);
    let mut last_f: Vec<Option<CVector>> = vec![None; config.k];
    let mut last_g: Option<CVector> = None;
    let mut w_prev: Option<CVector> = None;

    let mut outcome = TrialOutcome {
        ccsp: Vec::with_capacity(config.snapshots),
        perfect_csi: Vec::with_capacity(config.snapshots),
        naive_mismatched: Vec::with_capacity(config.snapshots),
        fallbacks: 0,
    };

    for snapshot in 1..=config.snapshots {
        if snapshot > 1 && config.fading == Fading::Block {
            (f, g) = sample_channels(&geometry, config, rng)?;
        }
        let (f_norms, g_norm) = realization_norms(&f, &g);
        let state = inject_mismatch(&f, &g, config, &f_norms, g_norm, rng)?;
        let truth = exact_stats(&f, &g, &powers, p_n)?;

        let bootstrap = bootstrap_weights(&state.f_mismatched, &state.g_mismatched, config)?;
        let w_forward = w_prev.take().unwrap_or_else(|| bootstrap.clone());

        let symbols = qpsk_symbols(config.k, rng);
        let relay_noise = complex_normal_vector(config.m, p_n, rng);
        let dest_noise = complex_normal(p_n, rng);
        let x = transmit_hop(&f, &symbols, &powers, &relay_noise)?;
        let z = destination_receive(&g, &relay_forward(&w_forward, &x)?, dest_noise)?;
        estimator.update(&x, z, &state.f_mismatched, &state.g_mismatched)?;

        let mut fell_back = false;
        for (k, slot) in last_f.iter_mut().enumerate() {
            match estimator.estimate(Component::Source(k)) {
                Ok(e) => *slot = Some(e),
                Err(Error::DegenerateProjection(_)) => fell_back = true,
                Err(e) => return Err(e),
            }
        }
        match estimator.estimate(Component::Destination) {
            Ok(e) => last_g = Some(e),
            Err(Error::DegenerateProjection(_)) => fell_back = true,
            Err(e) => return Err(e),
        }
        outcome.fallbacks += usize::from(fell_back);

        let estimates: Option<Vec<CVector>> = last_f.iter().cloned().collect();
        let ccsp_weights = match (estimates, &last_g) {
            (Some(fs), Some(ge)) => {
                let stats = estimated_stats(&fs, ge, &powers, p_n)?;
                let w = solve_max_sinr_variant(&SolveInputs::from_stats(&stats, p_t), solve_variant)?;
                check_power(&w, p_t).map_err(|m| fail(snapshot, format!("ccsp: {m}")))?;
                w.w
            }
            _ => bootstrap,
        };
        let perfect = solve_max_sinr_variant(&SolveInputs::from_stats(&truth, p_t), solve_variant)?;
        check_power(&perfect, p_t).map_err(|m| fail(snapshot, format!("perfect_csi: {m}")))?;
        let naive_stats = exact_stats(&state.f_mismatched, &state.g_mismatched, &powers, p_n)?;
        let naive = solve_max_sinr_variant(&SolveInputs::from_stats(&naive_stats, p_t), solve_variant)?;
        check_power(&naive, p_t).map_err(|m| fail(snapshot, format!("naive_mismatched: {m}")))?;

        for (series, w, name) in [
            (&mut outcome.ccsp, &ccsp_weights, "ccsp"),
            (&mut outcome.perfect_csi, &perfect.w, "perfect_csi"),
            (&mut outcome.naive_mismatched, &naive.w, "naive_mismatched"),
        ] {
            let sinr = crate::airlink::evaluate_sinr(w, &truth)?;
            if !sinr.is_finite() {
                return Err(fail(snapshot, format!("{name}: non-finite SINR")));
            }
            series.push(sinr);
        }
        w_prev = Some(ccsp_weights);
    }
    Ok(outcome)
}

fn check_power(w: &BeamWeights, p_t: f64) -> std::result::Result<(), String> {
    if w.transmit_power.is_finite() && w.transmit_power <= p_t * (1.0 + 1e-9) {
        Ok(())
    } else {
        Err(format!(
            "transmit power {} exceeds P_T = {p_t}",
            w.transmit_power
        ))
    }
}

/// Runs `config.trials` trials in parallel on the current rayon pool.
pub fn run_trials(config: &ScenarioConfig) -> Result<Vec<TrialOutcome>> {
    config.validate()?;
    (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial_indexed(config, &mut trial_rng(config.seed, t), t))
        .collect()
}

/// Trial-averaged results of one algorithm along the sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    pub algorithm: Algorithm,
    /// `10 log10` of `mean_linear`.
    pub sinr_db: Vec<f64>,
    pub mean_linear: Vec<f64>,
    pub std_err_linear: Vec<f64>,
    /// Per sweep point, the linear SINR of every trial in trial order.
    pub samples: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub series: Vec<SeriesReport>,
    pub config: ScenarioConfig,
    pub seed: u64,
}

impl SinrReport {
    pub fn series(&self, algorithm: Algorithm) -> &SeriesReport {
        self.series
            .iter()
            .find(|s| s.algorithm == algorithm)
            .expect("every algorithm is reported")
    }
}

/// Mean and standard error of a sample.
pub fn mean_and_std_err(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn readout(series: &[f64], mode: Readout) -> f64 {
    match mode {
        Readout::Final => *series.last().expect("at least one snapshot"),
        Readout::TimeAverage => series.iter().sum::<f64>() / series.len() as f64,
    }
}

/// Runs every sweep point and averages linear SINR over trials.
///
/// P_T and SNR sweeps read one value per trial (final snapshot, or the time
/// average if configured); the snapshot sweep reads the SINR at each listed
/// snapshot index.
pub fn run_experiment(config: &ScenarioConfig, sweep: &Sweep) -> Result<SinrReport> {
    config.validate()?;
    sweep.validate(config.snapshots)?;
    let points = sweep.points(config.snapshots);
    // samples[algorithm][point][trial]
    let mut samples: Vec<Vec<Vec<f64>>> = (0..3).map(|_| Vec::with_capacity(points.len())).collect();

    match sweep.axis {
        SweepAxis::Snapshots => {
            let outcomes = run_trials(config)?;
            for &p in &points {
                let idx = p as usize - 1;
                for (a, alg) in Algorithm::ALL.iter().enumerate() {
                    samples[a].push(outcomes.iter().map(|o| o.series(*alg)[idx]).collect());
                }
            }
        }
        SweepAxis::PtDbw | SweepAxis::SnrDb => {
            for &p in &points {
                let mut point_config = config.clone();
                if sweep.axis == SweepAxis::PtDbw {
                    point_config.p_t_dbw = p;
                } else {
                    point_config.snr_db = p;
                }
                let outcomes = run_trials(&point_config)?;
                for (a, alg) in Algorithm::ALL.iter().enumerate() {
                    samples[a].push(
                        outcomes
                            .iter()
                            .map(|o| readout(o.series(*alg), config.sinr_readout))
                            .collect(),
                    );
                }
            }
        }
    }

    let series = Algorithm::ALL
        .iter()
        .zip(samples)
        .map(|(&algorithm, per_point)| {
            let stats: Vec<(f64, f64)> = per_point.iter().map(|s| mean_and_std_err(s)).collect();
            SeriesReport {
                algorithm,
                sinr_db: stats.iter().map(|s| linear_to_db(s.0)).collect(),
                mean_linear: stats.iter().map(|s| s.0).collect(),
                std_err_linear: stats.iter().map(|s| s.1).collect(),
                samples: per_point,
            }
        })
        .collect();

    Ok(SinrReport {
        axis: sweep.axis,
        axis_values: points,
        series,
        config: ScenarioConfig {
            sweep: sweep.clone(),
            ..config.clone()
        },
        seed: config.seed,
    })
}
