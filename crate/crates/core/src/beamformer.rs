//! Power-constrained max-SINR relay weights.
//!
//! With `w = sqrt(p) D^{-1/2} w̃` and `‖w̃‖ = 1` the objective grows with `p`,
//! so the power constraint is active and the problem reduces to the
//! Hermitian-definite pencil
//!
//! ```text
//! R̃₁ w̃ = λ (P_n I + P_T Ũ) w̃,   R̃₁ = D^{-1/2} R₁ D^{-1/2},  Ũ = D^{-1/2} U D^{-1/2}
//! ```
//!
//! whose principal eigenpair gives the weights and `SINR_max = P_T λ_max`.

use crate::airlink::{exact_stats, transmit_power, BeamWeights, SecondOrderStats};
use crate::error::check_len;
use crate::linalg::{fix_phase, generalized_principal, hermitian_cholesky, hermitian_part, max_abs, quad_form};
use crate::{linear_to_db, CMatrix, CVector, Error, Result, C64};

/// Diagonal entries of `D` below this fraction of the largest one are clamped.
pub const D_CLAMP_FRACTION: f64 = 1e-15;

/// Which denominator matrix the principal eigenvector is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveVariant {
    /// `P_n I + P_T Ũ`, the form the reparameterized objective leads to.
    #[default]
    Consistent,
    /// `P_n I + Ũ`, without the `P_T` factor on the interference term.
    Unscaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveInputs {
    /// Desired-signal matrix.
    pub r1: CMatrix,
    /// Interference plus forwarded relay noise, `Q + Σ_{k≥2} R_k`.
    pub u: CMatrix,
    /// Diagonal of `D`.
    pub d: Vec<f64>,
    pub p_t: f64,
    pub p_n: f64,
    /// `a` with `R₁ = a aᴴ`, enabling the rank-one path.
    pub r1_factor: Option<CVector>,
}

impl SolveInputs {
    pub fn from_stats(stats: &SecondOrderStats, p_t: f64) -> Self {
        SolveInputs {
            r1: stats.r[0].clone(),
            u: stats.interference_plus_noise(),
            d: stats.d.clone(),
            p_t,
            p_n: stats.noise_power,
            r1_factor: stats.r_factors.as_ref().map(|f| f[0].clone()),
        }
    }

    fn relays(&self) -> usize {
        self.r1.nrows()
    }

    /// SINR of arbitrary weights under these matrices.
    pub fn sinr(&self, w: &CVector) -> f64 {
        quad_form(w, &self.r1).max(0.0) / (self.p_n + quad_form(w, &self.u).max(0.0))
    }
}

/// Diagonal loading by the Frobenius norm: `X + ε ‖X‖_F I` for every matrix.
pub fn perturbed_stats(stats: &SecondOrderStats, epsilon: f64) -> SecondOrderStats {
    let load = |x: &CMatrix| {
        let n = x.nrows();
        x + CMatrix::identity(n, n) * C64::new(epsilon * x.norm(), 0.0)
    };
    let d_norm = stats.d.iter().map(|v| v * v).sum::<f64>().sqrt();
    SecondOrderStats {
        r: stats.r.iter().map(load).collect(),
        q: load(&stats.q),
        d: stats.d.iter().map(|v| v + epsilon * d_norm).collect(),
        noise_power: stats.noise_power,
        r_factors: None,
    }
}

/// Statistics rebuilt from unit-norm channel estimates.
pub fn estimated_stats(
    f_estimates: &[CVector],
    g_estimate: &CVector,
    source_powers: &[f64],
    noise_power: f64,
) -> Result<SecondOrderStats> {
    check_len("source powers", f_estimates.len(), source_powers.len())?;
    for f in f_estimates {
        check_len("source channel estimate", g_estimate.len(), f.len())?;
    }
    let f = CMatrix::from_columns(f_estimates);
    exact_stats(&f, g_estimate, source_powers, noise_power)
}

fn checked_diagonal(d: &[f64]) -> Result<Vec<f64>> {
    if d.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::NotPositiveDefinite("D must have a positive diagonal"));
    }
    let floor = D_CLAMP_FRACTION * d.iter().cloned().fold(0.0, f64::max);
    Ok(d.iter().map(|&v| v.max(floor)).collect())
}

fn denominator(inputs: &SolveInputs, dinv: &[f64], variant: SolveVariant) -> CMatrix {
    let m = inputs.relays();
    let scale = match variant {
        SolveVariant::Consistent => inputs.p_t,
        SolveVariant::Unscaled => 1.0,
    };
    let u_tilde = CMatrix::from_fn(m, m, |r, c| inputs.u[(r, c)] * (dinv[r] * dinv[c]));
    hermitian_part(&(CMatrix::identity(m, m) * C64::new(inputs.p_n, 0.0) + u_tilde * C64::new(scale, 0.0)))
}

/// Solves with the rank-one shortcut when `R₁`'s factor is known.
pub fn solve_max_sinr(inputs: &SolveInputs) -> Result<BeamWeights> {
    solve(inputs, SolveVariant::Consistent, true)
}

pub fn solve_max_sinr_variant(inputs: &SolveInputs, variant: SolveVariant) -> Result<BeamWeights> {
    solve(inputs, variant, true)
}

/// Always takes the general generalized-eigenproblem route.
pub fn solve_max_sinr_general(inputs: &SolveInputs, variant: SolveVariant) -> Result<BeamWeights> {
    solve(inputs, variant, false)
}

fn solve(inputs: &SolveInputs, variant: SolveVariant, rank_one: bool) -> Result<BeamWeights> {
    let m = inputs.relays();
    check_len("U", m, inputs.u.nrows())?;
    check_len("D", m, inputs.d.len())?;
    if !(inputs.p_t > 0.0 && inputs.p_t.is_finite()) {
        return Err(Error::domain(format!("P_T must be positive, got {}", inputs.p_t)));
    }
    if !(inputs.p_n > 0.0) {
        return Err(Error::domain(format!("P_n must be positive, got {}", inputs.p_n)));
    }
    let d = checked_diagonal(&inputs.d)?;
    let dinv: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    let b = denominator(inputs, &dinv, variant);

    let (lambda, w_tilde) = match (&inputs.r1_factor, rank_one) {
        (Some(a), true) => {
            check_len("R1 factor", m, a.len())?;
            let a_tilde = CVector::from_fn(m, |r, _| a[r] * dinv[r]);
            let chol = hermitian_cholesky(&b, "P_n I + P_T Ũ")?;
            let x = chol.solve(&a_tilde);
            let lambda = a_tilde.dotc(&x).re;
            let norm = x.norm();
            let w = if norm > 0.0 { x / C64::new(norm, 0.0) } else { x };
            (lambda, w)
        }
        _ => {
            let r1_tilde = CMatrix::from_fn(m, m, |r, c| inputs.r1[(r, c)] * (dinv[r] * dinv[c]));
            generalized_principal(&r1_tilde, &b)?
        }
    };

    let degenerate = !(lambda > 0.0) || max_abs(&inputs.r1) == 0.0 || w_tilde.norm() == 0.0;
    let w_tilde = if degenerate {
        let mut e1 = CVector::zeros(m);
        e1[0] = C64::new(1.0, 0.0);
        e1
    } else {
        fix_phase(&w_tilde)
    };
    let scale = inputs.p_t.sqrt();
    let w = CVector::from_fn(m, |r, _| w_tilde[r] * (scale * dinv[r]));
    Ok(BeamWeights {
        transmit_power: transmit_power(&w, &d)?,
        predicted_sinr: if degenerate { 0.0 } else { inputs.p_t * lambda },
        w,
        degenerate,
    })
}

/// `|10 log10(predicted) - 10 log10(realized)|` for weights solved on `inputs`.
pub fn predicted_vs_realized(weights: &BeamWeights, inputs: &SolveInputs) -> f64 {
    let realized = inputs.sinr(&weights.w);
    if weights.predicted_sinr == 0.0 && realized == 0.0 {
        return 0.0;
    }
    (linear_to_db(weights.predicted_sinr) - linear_to_db(realized)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_normal;
    use crate::linalg::{identity, min_eigenvalue, real_diag};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_stats(m: usize, k: usize, seed: u64) -> SecondOrderStats {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let f = CMatrix::from_fn(m, k, |_, _| complex_normal(4.0, &mut r));
        let g = CVector::from_fn(m, |_, _| complex_normal(2.0, &mut r));
        let p: Vec<f64> = (0..k).map(|i| 1.0 + i as f64).collect();
        exact_stats(&f, &g, &p, 0.1).unwrap()
    }

    fn scalar(r: f64, u: f64, d: f64, p_t: f64, p_n: f64) -> SolveInputs {
        SolveInputs {
            r1: CMatrix::from_element(1, 1, c(r)),
            u: CMatrix::from_element(1, 1, c(u)),
            d: vec![d],
            p_t,
            p_n,
            r1_factor: None,
        }
    }

    #[test]
    fn perturbation_examples() {
        let mut s = random_stats(2, 2, 1);
        s.r[1] = CMatrix::zeros(2, 2);
        let p = perturbed_stats(&s, 0.3);
        assert_eq!(p.r[1], CMatrix::zeros(2, 2));

        s.r[0] = identity(2);
        let p = perturbed_stats(&s, 0.5);
        assert!((&p.r[0] - identity(2) * c(1.707_106_781_186_547_5)).norm() < 1e-14);
    }

    #[test]
    fn perturbation_loading_bound() {
        let s = random_stats(4, 3, 2);
        let p = perturbed_stats(&s, 0.2);
        for (orig, loaded) in s.r.iter().zip(&p.r) {
            assert!(min_eigenvalue(loaded) >= 0.2 * orig.norm() - 1e-10);
        }
        assert!(min_eigenvalue(&p.q) >= 0.2 * s.q.norm() - 1e-10);
        let dn = s.d.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (a, b) in s.d.iter().zip(&p.d) {
            assert!((b - a - 0.2 * dn).abs() < 1e-12);
        }
    }

    #[test]
    fn estimated_stats_scalar_collapse() {
        let one = CVector::from_element(1, c(1.0));
        let s = estimated_stats(&[one.clone(), one.clone()], &one, &[2.0, 3.0], 0.5).unwrap();
        assert!((s.r[0][(0, 0)] - c(2.0)).norm() < 1e-15);
        assert!((s.r[1][(0, 0)] - c(3.0)).norm() < 1e-15);
        assert!((s.q[(0, 0)] - c(0.5)).norm() < 1e-15);
        assert!((s.d[0] - 5.5).abs() < 1e-15);
    }

    #[test]
    fn estimated_stats_match_scalar_loop() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let unit = |r: &mut ChaCha8Rng| {
            let v = CVector::from_fn(4, |_, _| complex_normal(1.0, r));
            let n = v.norm();
            v / c(n)
        };
        let fs: Vec<CVector> = (0..3).map(|_| unit(&mut r)).collect();
        let g = unit(&mut r);
        let p = [1.0, 0.7, 2.5];
        let s = estimated_stats(&fs, &g, &p, 0.1).unwrap();
        for m in 0..4 {
            let mut d = 0.1;
            for k in 0..3 {
                d += p[k] * fs[k][m].norm_sqr();
            }
            assert!((s.d[m] - d).abs() < 1e-13);
        }
        for k in 0..3 {
            let mut trace = 0.0;
            for m in 0..4 {
                trace += p[k] * (fs[k][m] * g[m]).norm_sqr();
            }
            assert!((s.r[k].trace().re - trace).abs() < 1e-13);
            let eig = crate::linalg::hermitian_eigen(&s.r[k]);
            assert!(eig.values[1].abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_closed_form() {
        let inputs = scalar(3.0, 0.4, 2.0, 1.5, 0.2);
        let w = solve_max_sinr(&inputs).unwrap();
        let expected = 1.5 * (3.0 / 2.0) / (0.2 + 1.5 * 0.4 / 2.0);
        assert!((w.predicted_sinr - expected).abs() < 1e-12 * expected);
        assert!((w.w[0].norm() - (1.5f64 / 2.0).sqrt()).abs() < 1e-14);
        assert!((w.transmit_power - 1.5).abs() < 1e-14);
    }

    #[test]
    fn interference_free_limit() {
        let s = random_stats(3, 1, 4);
        let inputs = SolveInputs {
            r1: s.r[0].clone(),
            u: CMatrix::zeros(3, 3),
            d: vec![1.0; 3],
            p_t: 2.0,
            p_n: 0.5,
            r1_factor: None,
        };
        let w = solve_max_sinr(&inputs).unwrap();
        let lmax = crate::linalg::hermitian_eigen(&s.r[0]).values[0];
        assert!((w.predicted_sinr - 2.0 * lmax / 0.5).abs() < 1e-10 * w.predicted_sinr);
    }

    #[test]
    fn rank_one_path_agrees_with_general_path() {
        for seed in 0..20 {
            let s = random_stats(6, 3, 100 + seed);
            let inputs = SolveInputs::from_stats(&s, 1.26);
            assert!(inputs.r1_factor.is_some());
            let fast = solve_max_sinr(&inputs).unwrap();
            let general = solve_max_sinr_general(&inputs, SolveVariant::Consistent).unwrap();
            assert!((fast.predicted_sinr / general.predicted_sinr - 1.0).abs() < 1e-10);
            assert!((&fast.w - &general.w).norm() < 1e-8 * fast.w.norm());
        }
    }

    #[test]
    fn power_constraint_is_active() {
        let s = random_stats(8, 3, 5);
        for p_t in [0.1, 1.0, 10.0] {
            let w = solve_max_sinr(&SolveInputs::from_stats(&s, p_t)).unwrap();
            assert!((w.transmit_power / p_t - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn predicted_matches_realized() {
        let s = random_stats(8, 3, 6);
        let inputs = SolveInputs::from_stats(&s, 1.26);
        let w = solve_max_sinr(&inputs).unwrap();
        assert!(predicted_vs_realized(&w, &inputs) <= 1e-8);
        let scalar_inputs = scalar(3.0, 0.4, 2.0, 1.5, 0.2);
        let w = solve_max_sinr(&scalar_inputs).unwrap();
        assert!(predicted_vs_realized(&w, &scalar_inputs) < 1e-12);
    }

    #[test]
    fn argmax_is_scale_invariant() {
        let s = random_stats(5, 3, 7);
        let inputs = SolveInputs::from_stats(&s, 2.0);
        let mut scaled = inputs.clone();
        scaled.r1 *= c(7.5);
        scaled.r1_factor = scaled.r1_factor.map(|a| a * c(7.5f64.sqrt()));
        let a = solve_max_sinr(&inputs).unwrap();
        let b = solve_max_sinr(&scaled).unwrap();
        assert!((&a.w - &b.w).norm() < 1e-10 * a.w.norm());
        assert!((b.predicted_sinr / a.predicted_sinr - 7.5).abs() < 1e-10);
    }

    #[test]
    fn predicted_sinr_grows_with_power() {
        let s = random_stats(6, 3, 8);
        let mut last = 0.0;
        for i in 0..10 {
            let p_t = 0.1 * 2f64.powi(i);
            let w = solve_max_sinr(&SolveInputs::from_stats(&s, p_t)).unwrap();
            assert!(w.predicted_sinr >= last);
            last = w.predicted_sinr;
        }
    }

    #[test]
    fn generalized_residual() {
        let s = random_stats(6, 3, 9);
        let inputs = SolveInputs::from_stats(&s, 1.26);
        let w = solve_max_sinr_general(&inputs, SolveVariant::Consistent).unwrap();
        let dinv: Vec<f64> = inputs.d.iter().map(|v| 1.0 / v.sqrt()).collect();
        let wt = CVector::from_fn(6, |r, _| w.w[r] / (inputs.p_t.sqrt() * dinv[r]));
        let r1t = CMatrix::from_fn(6, 6, |r, cc| inputs.r1[(r, cc)] * (dinv[r] * dinv[cc]));
        let b = denominator(&inputs, &dinv, SolveVariant::Consistent);
        let lambda = w.predicted_sinr / inputs.p_t;
        let residual = (&r1t * &wt - &b * &wt * c(lambda)).norm();
        assert!(residual <= 1e-9 * r1t.norm(), "{residual}");
    }

    #[test]
    fn literal_variant_differs_when_power_is_not_unity() {
        let s = random_stats(6, 3, 10);
        let inputs = SolveInputs::from_stats(&s, 3.0);
        let w = solve_max_sinr_variant(&inputs, SolveVariant::Unscaled).unwrap();
        assert!(predicted_vs_realized(&w, &inputs) > 1e-6);
        let unit = SolveInputs { p_t: 1.0, ..inputs };
        let w = solve_max_sinr_variant(&unit, SolveVariant::Unscaled).unwrap();
        assert!(predicted_vs_realized(&w, &unit) < 1e-8);
    }

    #[test]
    fn zero_desired_matrix_is_degenerate() {
        let inputs = SolveInputs {
            r1: CMatrix::zeros(3, 3),
            u: identity(3),
            d: vec![2.0; 3],
            p_t: 1.0,
            p_n: 0.1,
            r1_factor: None,
        };
        let w = solve_max_sinr(&inputs).unwrap();
        assert!(w.degenerate);
        assert_eq!(w.predicted_sinr, 0.0);
        assert!((w.transmit_power - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_d_is_rejected() {
        let mut inputs = scalar(1.0, 0.0, 1.0, 1.0, 0.1);
        inputs.d = vec![0.0];
        assert!(matches!(solve_max_sinr(&inputs), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn tiny_d_entries_are_clamped() {
        let inputs = SolveInputs {
            r1: real_diag(&[1.0, 1.0]),
            u: CMatrix::zeros(2, 2),
            d: vec![1.0, 1e-30],
            p_t: 1.0,
            p_n: 0.1,
            r1_factor: None,
        };
        let w = solve_max_sinr(&inputs).unwrap();
        assert!(w.w.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        assert!((w.transmit_power - 1.0).abs() < 1e-9);
    }
}
