//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, Dyn};

use crate::{CMatrix, CVector, Error, Result, C64};

/// `a bᴴ`.
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Elementwise (Schur-Hadamard) product.
pub fn hadamard(a: &CVector, b: &CVector) -> CVector {
    a.component_mul(b)
}

/// Real part of `wᴴ A w`. For Hermitian `A` the imaginary part is rounding noise.
pub fn quad_form(w: &CVector, a: &CMatrix) -> f64 {
    w.dotc(&(a * w)).re
}

/// `(A + Aᴴ) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry modulus of `A - Aᴴ`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// Complex identity of size `n`.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Diagonal complex matrix from real entries.
pub fn real_diag(d: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        d.len(),
        d.iter().map(|&x| C64::new(x, 0.0)),
    ))
}

/// Eigen-decomposition of a Hermitian matrix sorted by descending eigenvalue.
///
/// Ties keep the order produced by the underlying solver (stable sort), which
/// makes the subspace choice deterministic for a given input.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the same order as `values`.
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(a: &CMatrix) -> HermitianEigen {
    let n = a.nrows();
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigen(a).values.last().copied().unwrap_or(0.0)
}

/// Cholesky factor of the Hermitian part of `b`.
///
/// The complex factorization happily takes square roots of negative pivots, so
/// the pivots are checked to be real and positive here.
pub fn hermitian_cholesky(b: &CMatrix, what: &'static str) -> Result<Cholesky<C64, Dyn>> {
    let chol = Cholesky::new(hermitian_part(b)).ok_or(Error::NotPositiveDefinite(what))?;
    let ok = chol
        .l_dirty()
        .diagonal()
        .iter()
        .all(|p| p.re > 0.0 && p.re.is_finite() && p.im.abs() <= 1e-12 * p.re);
    if ok {
        Ok(chol)
    } else {
        Err(Error::NotPositiveDefinite(what))
    }
}

/// Principal eigenpair of the Hermitian-definite pencil `A v = λ B v`.
///
/// `B = L Lᴴ` is factored, the pencil is reduced to the standard Hermitian
/// problem `L⁻¹ A L⁻ᴴ y = λ y`, and `v = L⁻ᴴ y` is returned normalised to unit
/// Euclidean norm.
pub fn generalized_principal(a: &CMatrix, b: &CMatrix) -> Result<(f64, CVector)> {
    let l = hermitian_cholesky(b, "generalized eigenproblem right-hand matrix")?.l();
    let left = l
        .solve_lower_triangular(&hermitian_part(a))
        .ok_or(Error::NotPositiveDefinite("singular Cholesky factor"))?;
    let reduced = l
        .solve_lower_triangular(&left.adjoint())
        .ok_or(Error::NotPositiveDefinite("singular Cholesky factor"))?;
    let eig = hermitian_eigen(&reduced);
    let y = eig.vectors.column(0).into_owned();
    let v = l
        .adjoint()
        .solve_upper_triangular(&y)
        .ok_or(Error::NotPositiveDefinite("singular Cholesky factor"))?;
    let norm = v.norm();
    Ok((eig.values[0], v / C64::new(norm, 0.0)))
}

/// Rotates `v` so that its largest-magnitude entry is real and positive.
///
/// The first index wins when several entries share the largest magnitude.
pub fn fix_phase(v: &CVector) -> CVector {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best = i;
            best_mag = mag;
        }
    }
    if best_mag <= 0.0 {
        return v.clone();
    }
    let rot = v[best].conj() / best_mag;
    v * rot
}
