//! Draws one relay geometry and its channels, then shows the CSI mismatch
//! the algorithms actually see.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relaybeam::channel::{inject_mismatch, path_loss, realization_norms, sample_channels, sample_geometry};
use relaybeam::ScenarioConfig;

fn main() -> relaybeam::Result<()> {
    let config = ScenarioConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let geometry = sample_geometry(&config, &mut rng);
    let (f, g) = sample_channels(&geometry, &config, &mut rng)?;

    println!("relay  d_sr   theta   d_rd   gamma_sr  |f_m1|   |g_m|");
    for m in 0..config.m {
        let d_sr = geometry.source_relay_distances[m];
        let d_rd = geometry.relay_dest_distances[m];
        println!(
            "{m:>5}  {d_sr:.3}  {:+.3}  {d_rd:.3}  {:8.3}  {:.3}    {:.3}",
            geometry.relay_source_dest_angles[m],
            path_loss(d_sr, config.l_db, config.rho)?,
            f[(m, 0)].norm(),
            g[m].norm(),
        );
    }

    let (f_norms, g_norm) = realization_norms(&f, &g);
    let state = inject_mismatch(&f, &g, &config, &f_norms, g_norm, &mut rng)?;
    let error = (&state.f_mismatched - &f).norm() / f.norm();
    println!("\nmismatch draw eps = {:.3}, relative F error {error:.3}", state.epsilon_draw);
    Ok(())
}
