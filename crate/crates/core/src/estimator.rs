//! Cross-correlation and subspace projection (CCSP) channel estimation.
//!
//! Every snapshot contributes one relay observation `x(i)`, the destination
//! output `z(i)` and the mismatched channels seen at that snapshot. The running
//! averages kept here are
//!
//! ```text
//! q̂(i)      = (1/i) Σ_j x(j) z*(j)
//! R̂_f_k(i)  = (1/i) Σ_j f̂_k(j) f̂_k(j)ᴴ
//! R̂_g(i)    = (1/i) Σ_j ĝ(j) ĝ(j)ᴴ
//! ```
//!
//! Each covariance is turned into an error-spectrum matrix
//! `C = ε_max R̂ + (ε_max²/2) ‖R̂‖_F I`, the `N` principal eigenvectors of `C`
//! span a projection subspace, and the channel estimate is the normalised
//! projection of `q̂` onto it.

use crate::error::{check_len, Component};
use crate::linalg::{fix_phase, hermitian_eigen, outer};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Fraction of the error-spectrum trace kept by [`ComponentCount::Auto`].
pub const AUTO_ENERGY_FRACTION: f64 = 0.95;

/// Relative floor below which a projected SCV counts as degenerate.
pub const DEGENERATE_PROJECTION_FLOOR: f64 = 1e-12;

/// Dimension `N` of the projection subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentCount {
    /// Smallest `N` whose top eigenvalues hold [`AUTO_ENERGY_FRACTION`] of the trace.
    Auto,
    Fixed(usize),
}

impl ComponentCount {
    /// Resolves the count for a given error-spectrum matrix.
    pub fn resolve(self, spectrum: &CMatrix) -> Result<usize> {
        let m = spectrum.nrows();
        match self {
            ComponentCount::Fixed(n) if n == 0 || n > m => Err(Error::ComponentCount {
                requested: n,
                dimension: m,
            }),
            ComponentCount::Fixed(n) => Ok(n),
            ComponentCount::Auto => {
                let values = hermitian_eigen(spectrum).values;
                let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
                let mut acc = 0.0;
                for (i, v) in values.iter().enumerate() {
                    acc += v.max(0.0);
                    if acc >= AUTO_ENERGY_FRACTION * total {
                        return Ok(i + 1);
                    }
                }
                Ok(m)
            }
        }
    }
}

/// Closed form of `∫₀^{ε_max} (R̂ + ε ‖R̂‖_F I) dε`.
pub fn error_spectrum(r_hat: &CMatrix, epsilon_max: f64) -> CMatrix {
    let m = r_hat.nrows();
    let loading = 0.5 * epsilon_max * epsilon_max * r_hat.norm();
    r_hat * C64::new(epsilon_max, 0.0) + CMatrix::identity(m, m) * C64::new(loading, 0.0)
}

/// Orthogonal projector `V Vᴴ` onto the `n` principal eigenvectors of `c`.
pub fn principal_subspace(c: &CMatrix, n: usize) -> Result<CMatrix> {
    let m = c.nrows();
    if n == 0 || n > m {
        return Err(Error::ComponentCount {
            requested: n,
            dimension: m,
        });
    }
    let eig = hermitian_eigen(c);
    let v = eig.vectors.columns(0, n);
    Ok(v * v.adjoint())
}

/// `P q̂ / ‖P q̂‖₂`, phase-fixed so its largest entry is real and positive.
pub fn project_channel(p: &CMatrix, scv: &CVector, component: Component) -> Result<CVector> {
    check_len("projector", p.nrows(), scv.len())?;
    let projected = p * scv;
    let norm = projected.norm();
    if !(norm >= DEGENERATE_PROJECTION_FLOOR * scv.norm()) || norm == 0.0 {
        return Err(Error::DegenerateProjection(component));
    }
    Ok(fix_phase(&(projected / C64::new(norm, 0.0))))
}

/// Unit-norm channel estimates for every source and for the destination link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimates {
    pub f: Vec<CVector>,
    pub g: CVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    iteration: usize,
    scv: CVector,
    r_f_hat: Vec<CMatrix>,
    r_g_hat: CMatrix,
    epsilon_max: f64,
    n_components: ComponentCount,
}

impl EstimatorState {
    pub fn new(relays: usize, sources: usize, epsilon_max: f64, n_components: ComponentCount) -> Self {
        EstimatorState {
            iteration: 0,
            scv: CVector::zeros(relays),
            r_f_hat: vec![CMatrix::zeros(relays, relays); sources],
            r_g_hat: CMatrix::zeros(relays, relays),
            epsilon_max,
            n_components,
        }
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Sample cross-correlation vector `q̂(i)`.
    pub fn scv(&self) -> &CVector {
        &self.scv
    }

    pub fn r_f_hat(&self) -> &[CMatrix] {
        &self.r_f_hat
    }

    pub fn r_g_hat(&self) -> &CMatrix {
        &self.r_g_hat
    }

    /// Folds in snapshot `i = iteration + 1`.
    pub fn update(
        &mut self,
        x: &CVector,
        z: C64,
        f_mismatched: &CMatrix,
        g_mismatched: &CVector,
    ) -> Result<()> {
        let m = self.scv.len();
        check_len("relay observation", m, x.len())?;
        check_len("mismatched F rows", m, f_mismatched.nrows())?;
        check_len("mismatched F columns", self.r_f_hat.len(), f_mismatched.ncols())?;
        check_len("mismatched g", m, g_mismatched.len())?;

        let i = (self.iteration + 1) as f64;
        let keep = C64::new((i - 1.0) / i, 0.0);
        let add = C64::new(1.0 / i, 0.0);
        self.scv = &self.scv * keep + x * (z.conj() * add);
        for (r, fk) in self.r_f_hat.iter_mut().zip(f_mismatched.column_iter()) {
            let fk = fk.into_owned();
            *r = &*r * keep + outer(&fk, &fk) * add;
        }
        self.r_g_hat = &self.r_g_hat * keep + outer(g_mismatched, g_mismatched) * add;
        self.iteration += 1;
        Ok(())
    }

    fn covariance(&self, component: Component) -> &CMatrix {
        match component {
            Component::Source(k) => &self.r_f_hat[k],
            Component::Destination => &self.r_g_hat,
        }
    }

    /// Error-spectrum matrix of one component.
    pub fn spectrum(&self, component: Component) -> CMatrix {
        error_spectrum(self.covariance(component), self.epsilon_max)
    }

    /// Projector onto the principal subspace of one component's error spectrum.
    pub fn projector(&self, component: Component) -> Result<CMatrix> {
        let c = self.spectrum(component);
        let n = self.n_components.resolve(&c)?;
        principal_subspace(&c, n)
    }

    /// Projected estimate of one channel component.
    pub fn estimate(&self, component: Component) -> Result<CVector> {
        if self.iteration == 0 {
            return Err(Error::NoObservations);
        }
        project_channel(&self.projector(component)?, &self.scv, component)
    }

    pub fn estimate_all(&self) -> Result<ChannelEstimates> {
        let f = (0..self.r_f_hat.len())
            .map(|k| self.estimate(Component::Source(k)))
            .collect::<Result<Vec<_>>>()?;
        let g = self.estimate(Component::Destination)?;
        Ok(ChannelEstimates { f, g })
    }
}
