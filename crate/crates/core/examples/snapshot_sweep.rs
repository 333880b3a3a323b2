//! Runs the `snapshot_sweep` scenario and prints mean SINR per algorithm.
//! Pass a trial count to trade accuracy for time: `cargo run --release --example snapshot_sweep -- 50`.

use relaybeam::simulator::run_experiment;
use relaybeam::{Algorithm, ScenarioConfig};

fn main() -> relaybeam::Result<()> {
    let mut config = ScenarioConfig::snapshot_sweep();
    config.trials = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    let report = run_experiment(&config, &config.sweep)?;

    print!("{:>10}", report.axis.to_string());
    for algorithm in Algorithm::ALL {
        print!("{:>18}", algorithm.name());
    }
    println!();
    for (i, value) in report.axis_values.iter().enumerate() {
        print!("{value:>10}");
        for algorithm in Algorithm::ALL {
            print!("{:>15.2} dB", report.series(algorithm).sinr_db[i]);
        }
        println!();
    }
    Ok(())
}
