//! Two-hop amplify-and-forward signal model.
//!
//! Sources reach the relays through `F`, each relay scales its input by its
//! weight, and the destination receives `gᵀ W x + n`. Second-order statistics
//! are conditioned on one channel realization: every expectation over the
//! channels is replaced by the instantaneous outer product.
//!
//! Because the weights multiply the signal without conjugation, the received
//! desired amplitude is `Σ w_m g_m f_m1 = wᴴ conj(f_1 ⊙ g)`. The statistics are
//! therefore built from conjugated factors, which keeps `wᴴ R_k w` equal to
//! the power the destination actually sees. Relay noise is independent across
//! relays, so its forwarded power `P_n Σ |w_m g_m|²` is a diagonal form.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use crate::error::check_len;
use crate::linalg::{hadamard, outer, quad_form, real_diag};
use crate::{CMatrix, CVector, Result, C64};

/// Matrices that drive the SINR and the relay transmit power.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderStats {
    /// `R_k = a_k a_kᴴ` with `a_k = sqrt(P_{s,k}) conj(f_k ⊙ g)`; index 0 is the desired source.
    pub r: Vec<CMatrix>,
    /// `Q = P_n diag(|g_m|²)`: relay noise forwarded to the destination.
    pub q: CMatrix,
    /// Diagonal of `D`, the per-relay received power.
    pub d: Vec<f64>,
    pub noise_power: f64,
    /// Rank-one factors `a_k` with `R_k = a_k a_kᴴ`, when known.
    pub r_factors: Option<Vec<CVector>>,
}

impl SecondOrderStats {
    pub fn relays(&self) -> usize {
        self.q.nrows()
    }

    /// `Q + Σ_{k≥2} R_k`.
    pub fn interference_plus_noise(&self) -> CMatrix {
        self.r.iter().skip(1).fold(self.q.clone(), |acc, r| acc + r)
    }
}

/// Relay weights with the power they consume and the SINR the solver predicts.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights {
    pub w: CVector,
    /// `wᴴ D w` for the `D` used when solving.
    pub transmit_power: f64,
    /// Linear SINR predicted by the solver.
    pub predicted_sinr: f64,
    /// Set when the desired-signal matrix was numerically zero.
    pub degenerate: bool,
}

/// Unit-variance QPSK symbol.
pub fn qpsk_symbol<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let im = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    C64::new(re, im)
}

pub fn qpsk_symbols<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| qpsk_symbol(rng))
}

/// Relay inputs `x = F (sqrt(P_s) ⊙ b) + ν`.
pub fn transmit_hop(
    f: &CMatrix,
    symbols: &CVector,
    source_powers: &[f64],
    noise: &CVector,
) -> Result<CVector> {
    check_len("symbols", f.ncols(), symbols.len())?;
    check_len("source powers", f.ncols(), source_powers.len())?;
    check_len("relay noise", f.nrows(), noise.len())?;
    let s = CVector::from_fn(symbols.len(), |k, _| symbols[k] * source_powers[k].sqrt());
    Ok(f * s + noise)
}

/// Relay outputs `y = diag(w) x`.
pub fn relay_forward(w: &CVector, x: &CVector) -> Result<CVector> {
    check_len("relay inputs", w.len(), x.len())?;
    Ok(w.component_mul(x))
}

/// Destination output `z = gᵀ y + n` (plain transpose).
pub fn destination_receive(g: &CVector, y: &CVector, n: C64) -> Result<C64> {
    check_len("relay outputs", g.len(), y.len())?;
    Ok(g.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<C64>() + n)
}

/// Statistics of one fixed channel realization.
pub fn exact_stats(
    f: &CMatrix,
    g: &CVector,
    source_powers: &[f64],
    noise_power: f64,
) -> Result<SecondOrderStats> {
    check_len("source powers", f.ncols(), source_powers.len())?;
    check_len("destination channel", f.nrows(), g.len())?;
    let factors: Vec<CVector> = f
        .column_iter()
        .zip(source_powers)
        .map(|(fk, &p)| hadamard(&fk.into_owned(), g).conjugate() * C64::new(p.sqrt(), 0.0))
        .collect();
    let r = factors.iter().map(|a| outer(a, a)).collect();
    let q = real_diag(&g.iter().map(|v| noise_power * v.norm_sqr()).collect::<Vec<_>>());
    let d = f
        .row_iter()
        .map(|row| {
            row.iter()
                .zip(source_powers)
                .map(|(v, p)| p * v.norm_sqr())
                .sum::<f64>()
                + noise_power
        })
        .collect();
    Ok(SecondOrderStats {
        r,
        q,
        d,
        noise_power,
        r_factors: Some(factors),
    })
}

/// Desired, interference and noise powers at the destination:
/// `wᴴR₁w`, `Σ_{k≥2} wᴴR_kw` and `P_n + wᴴQw`.
pub fn destination_powers(w: &CVector, stats: &SecondOrderStats) -> Result<(f64, f64, f64)> {
    check_len("weights", stats.relays(), w.len())?;
    let desired = quad_form(w, &stats.r[0]).max(0.0);
    let interference: f64 = stats.r.iter().skip(1).map(|r| quad_form(w, r)).sum();
    let noise = stats.noise_power + quad_form(w, &stats.q).max(0.0);
    Ok((desired, interference.max(0.0), noise))
}

/// Output SINR `wᴴR₁w / (P_n + wᴴ(Q + Σ_{k≥2} R_k)w)`.
pub fn evaluate_sinr(w: &CVector, stats: &SecondOrderStats) -> Result<f64> {
    let (desired, interference, noise) = destination_powers(w, stats)?;
    Ok(desired / (interference + noise))
}

/// Total relay transmit power `wᴴ D w` for a diagonal `D`.
pub fn transmit_power(w: &CVector, d: &[f64]) -> Result<f64> {
    check_len("weights", d.len(), w.len())?;
    Ok(w.iter().zip(d).map(|(wm, dm)| dm * wm.norm_sqr()).sum())
}
