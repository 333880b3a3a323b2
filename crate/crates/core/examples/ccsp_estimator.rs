//! Feeds relay observations to the CCSP estimator and tracks how well the
//! projected estimate of the desired source channel aligns with the truth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relaybeam::airlink::{destination_receive, qpsk_symbols, relay_forward, transmit_hop};
use relaybeam::channel::{complex_normal, complex_normal_vector, inject_mismatch, realization_norms};
use relaybeam::error::Component;
use relaybeam::validate::sample_stats;
use relaybeam::{CVector, EstimatorState, ScenarioConfig, C64};

fn main() -> relaybeam::Result<()> {
    let config = ScenarioConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (f, g, _) = sample_stats(&config, &mut rng)?;
    let (f_norms, g_norm) = realization_norms(&f, &g);
    let truth = f.column(0).into_owned();
    let powers = config.source_power_vec();
    let p_n = config.noise_power();
    let w = CVector::from_element(config.m, C64::new(0.5, 0.0));

    let mut estimator = EstimatorState::new(config.m, config.k, config.epsilon_max, config.n_components);
    println!("snapshot  alignment(f_1)  alignment(mismatched f_1)");
    for i in 1..=config.snapshots {
        let seen = inject_mismatch(&f, &g, &config, &f_norms, g_norm, &mut rng)?;
        let noise = complex_normal_vector(config.m, p_n, &mut rng);
        let x = transmit_hop(&f, &qpsk_symbols(config.k, &mut rng), &powers, &noise)?;
        let z = destination_receive(&g, &relay_forward(&w, &x)?, complex_normal(p_n, &mut rng))?;
        estimator.update(&x, z, &seen.f_mismatched, &seen.g_mismatched)?;
        if [1, 2, 5, 10, 20, 50, 100].contains(&i) {
            let estimate = estimator.estimate(Component::Source(0))?;
            let naive = seen.f_mismatched.column(0).into_owned();
            let align = |v: &CVector| v.dotc(&truth).norm() / (v.norm() * truth.norm());
            println!("{i:>8}  {:14.4}  {:14.4}", align(&estimate), align(&naive));
        }
    }
    Ok(())
}
