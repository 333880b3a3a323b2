//! Solves the power-constrained max-SINR problem on exact and on loaded
//! statistics, and compares the solver's prediction with direct evaluation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relaybeam::airlink::evaluate_sinr;
use relaybeam::beamformer::{perturbed_stats, predicted_vs_realized, solve_max_sinr};
use relaybeam::validate::sample_stats;
use relaybeam::{linear_to_db, ScenarioConfig, SolveInputs};

fn main() -> relaybeam::Result<()> {
    let config = ScenarioConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (_, _, exact) = sample_stats(&config, &mut rng)?;

    for eps in [0.0, 0.1, 0.5] {
        let stats = if eps == 0.0 { exact.clone() } else { perturbed_stats(&exact, eps) };
        let inputs = SolveInputs::from_stats(&stats, config.p_t());
        let weights = solve_max_sinr(&inputs)?;
        println!(
            "loading {eps:.1}: predicted {:6.2} dB, gap {:.1e} dB, power {:.6} W, SINR on true channel {:6.2} dB",
            linear_to_db(weights.predicted_sinr),
            predicted_vs_realized(&weights, &inputs),
            weights.transmit_power,
            linear_to_db(evaluate_sinr(&weights.w, &exact)?),
        );
    }
    Ok(())
}
