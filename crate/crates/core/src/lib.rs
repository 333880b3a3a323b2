//! Robust distributed beamforming for two-hop amplify-and-forward relay
//! networks with imperfect channel state information.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`] draws relay geometry, path loss, shadowing and Rayleigh
//!   channels, and corrupts them with CSI mismatch.
//! * [`airlink`] is the two-hop signal model: relay inputs, amplify-and-forward,
//!   destination output, second-order statistics, transmit power and SINR.
//! * [`estimator`] keeps the running cross-correlation vector and channel
//!   covariance estimates and turns them into projected channel estimates
//!   (cross-correlation and subspace projection, CCSP).
//! * [`beamformer`] builds the optimization matrices and solves the
//!   power-constrained max-SINR problem as a Hermitian-definite generalized
//!   eigenproblem.
//! * [`simulator`] runs seeded Monte Carlo trials and sweeps.
//! * [`report`], [`validate`] and [`cli`] are the file formats, the
//!   self-check suite and the `relaybeam` command-line front end.
//!
//! ```
//! use relaybeam::{ScenarioConfig, simulator::{run_trial, trial_rng}};
//!
//! let mut config = ScenarioConfig::default();
//! config.snapshots = 10;
//! let outcome = run_trial(&config, &mut trial_rng(config.seed, 0)).unwrap();
//! assert_eq!(outcome.ccsp.len(), 10);
//! ```

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airlink;
pub mod beamformer;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod report;
pub mod simulator;
pub mod validate;

pub use airlink::{BeamWeights, SecondOrderStats};
pub use beamformer::{SolveInputs, SolveVariant};
pub use channel::{ChannelState, RelayGeometry};
pub use config::ScenarioConfig;
pub use error::{Error, Result};
pub use estimator::{ComponentCount, EstimatorState};
pub use simulator::{Algorithm, SinrReport, Sweep, SweepAxis};

/// Complex sample type used throughout the crate.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
