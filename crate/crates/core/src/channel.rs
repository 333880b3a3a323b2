//! Relay geometry, large/small-scale fading and CSI mismatch.
//!
//! Distances are relative to the source-destination distance, which is 1.
//! Source-to-relay channels use the source-relay distance; relay-to-destination
//! channels use the distance obtained from the law of cosines.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::ScenarioConfig;
use crate::{db_to_linear, CMatrix, CVector, Error, Result, C64};

/// Range of the uniformly drawn source-relay distances.
pub const SOURCE_RELAY_RANGE: (f64, f64) = (0.5, 0.9);

#[derive(Debug, Clone, PartialEq)]
pub struct RelayGeometry {
    pub source_relay_distances: Vec<f64>,
    /// Relay-source-destination angles in radians, within [-π/2, π/2].
    pub relay_source_dest_angles: Vec<f64>,
    pub relay_dest_distances: Vec<f64>,
}

impl RelayGeometry {
    /// Builds a geometry from source-relay distances and angles.
    pub fn from_polar(distances: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        crate::error::check_len("relay angles", distances.len(), angles.len())?;
        if let Some(d) = distances.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(Error::domain(format!("relay distance must be positive, got {d}")));
        }
        let relay_dest_distances = distances
            .iter()
            .zip(&angles)
            .map(|(&d, &theta)| relay_destination_distance(d, theta))
            .collect();
        Ok(RelayGeometry {
            source_relay_distances: distances,
            relay_source_dest_angles: angles,
            relay_dest_distances,
        })
    }

    pub fn relays(&self) -> usize {
        self.source_relay_distances.len()
    }
}

/// `sqrt(d² + 1 - 2 d cos θ)`: relay-destination distance for a relay at
/// distance `d` from the source and angle `θ` off the source-destination line.
pub fn relay_destination_distance(d: f64, theta: f64) -> f64 {
    (d * d + 1.0 - 2.0 * d * theta.cos()).sqrt()
}

/// Distance-based amplitude path loss `sqrt(L) / sqrt(d^ρ)` with `L` in dB.
pub fn path_loss(d: f64, l_db: f64, rho: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain(format!("path loss distance must be positive, got {d}")));
    }
    Ok((db_to_linear(l_db) / d.powf(rho)).sqrt())
}

/// Log-normal shadowing factor for a given standard normal draw.
pub fn shadowing_from_normal(sigma_s_db: f64, normal: f64) -> f64 {
    10f64.powf(sigma_s_db * normal / 10.0)
}

/// Draws a log-normal shadowing factor `10^(σ_s N(0,1) / 10)`.
pub fn shadowing<R: Rng + ?Sized>(sigma_s_db: f64, rng: &mut R) -> Result<f64> {
    if !(sigma_s_db >= 0.0) {
        return Err(Error::domain(format!(
            "shadowing spread must be nonnegative, got {sigma_s_db}"
        )));
    }
    let n: f64 = StandardNormal.sample(rng);
    Ok(shadowing_from_normal(sigma_s_db, n))
}

/// Circularly-symmetric complex Gaussian sample with variance `variance`.
pub fn complex_normal<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

pub fn complex_normal_vector<R: Rng + ?Sized>(len: usize, variance: f64, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| complex_normal(variance, rng))
}

pub fn sample_geometry<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> RelayGeometry {
    let (lo, hi) = SOURCE_RELAY_RANGE;
    let mut distances = Vec::with_capacity(config.m);
    let mut angles = Vec::with_capacity(config.m);
    for _ in 0..config.m {
        distances.push(rng.random_range(lo..=hi));
        angles.push(rng.random_range(-FRAC_PI_2..=FRAC_PI_2));
    }
    RelayGeometry::from_polar(distances, angles).expect("sampled distances are positive")
}

/// Draws the true channels `(F, g)` for one snapshot.
///
/// Every coefficient gets its own shadowing draw and its own CN(0,1) Rayleigh
/// draw, scaled by the path loss of the relevant link.
pub fn sample_channels<R: Rng + ?Sized>(
    geometry: &RelayGeometry,
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<(CMatrix, CVector)> {
    let m = geometry.relays();
    crate::error::check_len("geometry relays", config.m, m)?;
    let k = config.k;
    let mut f = CMatrix::zeros(m, k);
    for relay in 0..m {
        let gamma = path_loss(geometry.source_relay_distances[relay], config.l_db, config.rho)?;
        for source in 0..k {
            let beta = shadowing(config.sigma_s_db, rng)?;
            f[(relay, source)] = complex_normal(1.0, rng) * (gamma * beta);
        }
    }
    let mut g = CVector::zeros(m);
    for relay in 0..m {
        let gamma = path_loss(geometry.relay_dest_distances[relay], config.l_db, config.rho)?;
        let beta = shadowing(config.sigma_s_db, rng)?;
        g[relay] = complex_normal(1.0, rng) * (gamma * beta);
    }
    Ok((f, g))
}

/// One snapshot's true channels and the mismatched copies an algorithm sees.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub f: CMatrix,
    pub g: CVector,
    pub f_mismatched: CMatrix,
    pub g_mismatched: CVector,
    pub epsilon_draw: f64,
}

/// Draws ε uniformly on `(0, ε_max]` and corrupts the channels with it.
pub fn inject_mismatch<R: Rng + ?Sized>(
    f: &CMatrix,
    g: &CVector,
    config: &ScenarioConfig,
    r_f_norms: &[f64],
    r_g_norm: f64,
    rng: &mut R,
) -> Result<ChannelState> {
    if !(config.epsilon_max > 0.0) {
        return Err(Error::domain("epsilon_max must be positive"));
    }
    let u: f64 = rng.random();
    let epsilon = config.epsilon_max * (1.0 - u);
    inject_mismatch_with_epsilon(f, g, epsilon, config.g_mismatch, r_f_norms, r_g_norm, rng)
}

/// Adds i.i.d. CN(0, ε‖R_f_k‖_F) errors to every entry of column `k` of `F`
/// and, if `g_mismatch` is set, CN(0, ε‖R_g‖_F) errors to `g`.
pub fn inject_mismatch_with_epsilon<R: Rng + ?Sized>(
    f: &CMatrix,
    g: &CVector,
    epsilon: f64,
    g_mismatch: bool,
    r_f_norms: &[f64],
    r_g_norm: f64,
    rng: &mut R,
) -> Result<ChannelState> {
    crate::error::check_len("mismatch norms", f.ncols(), r_f_norms.len())?;
    crate::error::check_len("relay channel length", f.nrows(), g.len())?;
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    for &n in r_f_norms.iter().chain(std::iter::once(&r_g_norm)) {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain(format!(
                "channel covariance Frobenius norm must be positive, got {n}"
            )));
        }
    }
    let mut f_mismatched = f.clone();
    for (k, mut col) in f_mismatched.column_iter_mut().enumerate() {
        let variance = epsilon * r_f_norms[k];
        for entry in col.iter_mut() {
            *entry += complex_normal(variance, rng);
        }
    }
    let g_mismatched = if g_mismatch {
        g + complex_normal_vector(g.len(), epsilon * r_g_norm, rng)
    } else {
        g.clone()
    };
    Ok(ChannelState {
        f: f.clone(),
        g: g.clone(),
        f_mismatched,
        g_mismatched,
        epsilon_draw: epsilon,
    })
}

/// Frobenius norms of the per-realization covariances `f_k f_kᴴ` and `g gᴴ`,
/// i.e. `‖f_k‖²` and `‖g‖²`.
pub fn realization_norms(f: &CMatrix, g: &CVector) -> (Vec<f64>, f64) {
    let f_norms = f.column_iter().map(|c| c.norm_squared()).collect();
    (f_norms, g.norm_squared())
}
