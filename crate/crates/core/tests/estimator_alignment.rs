use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relaybeam::airlink::{destination_receive, qpsk_symbols, relay_forward, transmit_hop};
use relaybeam::channel::{complex_normal, complex_normal_vector, inject_mismatch, realization_norms};
use relaybeam::error::Component;
use relaybeam::validate::sample_stats;
use relaybeam::{CVector, ComponentCount, EstimatorState, ScenarioConfig, C64};

fn single_source(snr_db: f64) -> ScenarioConfig {
    ScenarioConfig {
        k: 1,
        snr_db,
        ..ScenarioConfig::default()
    }
}

fn alignment(estimate: &CVector, truth: &CVector) -> f64 {
    estimate.dotc(truth).norm() / truth.norm()
}

/// Runs `snapshots` observations and returns the source-channel alignment
/// after each one.
fn alignment_track(config: &ScenarioConfig, snapshots: usize, error_free: bool, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (f, g, _) = sample_stats(config, &mut rng).unwrap();
    let (f_norms, g_norm) = realization_norms(&f, &g);
    let truth = f.column(0).into_owned();
    let p_n = config.noise_power();
    let w = CVector::from_element(config.m, C64::new(0.5, 0.0));
    let mut est = EstimatorState::new(config.m, 1, config.epsilon_max, ComponentCount::Fixed(1));
    let mut track = Vec::with_capacity(snapshots);
    for _ in 0..snapshots {
        let (f_seen, g_seen) = if error_free {
            (f.clone(), g.clone())
        } else {
            let s = inject_mismatch(&f, &g, config, &f_norms, g_norm, &mut rng).unwrap();
            (s.f_mismatched, s.g_mismatched)
        };
        let noise = complex_normal_vector(config.m, p_n, &mut rng);
        let x = transmit_hop(&f, &qpsk_symbols(1, &mut rng), &[1.0], &noise).unwrap();
        let z = destination_receive(&g, &relay_forward(&w, &x).unwrap(), complex_normal(p_n, &mut rng)).unwrap();
        est.update(&x, z, &f_seen, &g_seen).unwrap();
        track.push(alignment(&est.estimate(Component::Source(0)).unwrap(), &truth));
    }
    track
}

#[test]
fn static_error_free_channel_is_recovered() {
    let config = single_source(20.0);
    for seed in 0..5 {
        let track = alignment_track(&config, 100, true, seed);
        assert!(track[99] >= 0.99, "seed {seed}: alignment {}", track[99]);
    }
}

#[test]
fn alignment_improves_with_snapshots_under_mismatch() {
    let config = single_source(10.0);
    let trials = 200;
    let (mut early, mut late) = (0.0, 0.0);
    for seed in 0..trials {
        let track = alignment_track(&config, 100, false, 1000 + seed);
        early += track[4];
        late += track[99];
    }
    let (early, late) = (early / trials as f64, late / trials as f64);
    assert!(late > early, "mean alignment {early} at 5 snapshots vs {late} at 100");
}
