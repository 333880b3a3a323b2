//! Evaluates the destination SINR of fixed relay weights analytically and
//! checks it against a simulated link.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relaybeam::airlink::{destination_powers, evaluate_sinr, transmit_power};
use relaybeam::validate::{monte_carlo_powers, sample_stats};
use relaybeam::{linear_to_db, CVector, ScenarioConfig, C64};

fn main() -> relaybeam::Result<()> {
    let config = ScenarioConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (f, g, stats) = sample_stats(&config, &mut rng)?;

    // equal-gain weights scaled to the power budget
    let total: f64 = stats.d.iter().sum();
    let w = CVector::from_element(config.m, C64::new((config.p_t() / total).sqrt(), 0.0));
    let (desired, interference, noise) = destination_powers(&w, &stats)?;
    println!("relay power    {:.4} W (budget {:.4} W)", transmit_power(&w, &stats.d)?, config.p_t());
    println!("desired        {desired:.4e}");
    println!("interference   {interference:.4e}");
    println!("noise          {noise:.4e}");

    let analytic = evaluate_sinr(&w, &stats)?;
    let measured = monte_carlo_powers(&f, &g, &w, &config.source_power_vec(), config.noise_power(), 200_000, &mut rng)?;
    println!("SINR analytic  {:.3} dB", linear_to_db(analytic));
    println!("SINR simulated {:.3} dB over 200000 draws", linear_to_db(measured.sinr()));
    Ok(())
}
