//! Runs the self-check suite, then again with a corrupted projector to show
//! that the suite notices.

use relaybeam::validate::{format_table, run_checks, Fault};
use relaybeam::ScenarioConfig;

fn main() {
    let config = ScenarioConfig::default();
    print!("{}", format_table(&run_checks(&config, None)));
    println!("\nwith an injected projector fault:");
    print!("{}", format_table(&run_checks(&config, Some(Fault::Projector))));
}
