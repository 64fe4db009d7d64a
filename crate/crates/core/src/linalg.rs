//! Small complex linear-algebra helpers shared by the design and
//! estimation code: sorted truncated SVD and least-squares solves with a
//! ridge fallback for singular systems.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::{CMatrix, Complex};

/// Top-k singular triplets of `m`, sorted by descending singular value.
///
/// Returns `(u, sigma, v)` with `u`: rows x k, `v`: cols x k, so that
/// `m ~ u * diag(sigma) * v^H`.
pub fn top_svd(m: &CMatrix, k: usize) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let rank_bound = m.nrows().min(m.ncols());
    if k == 0 || k > rank_bound {
        return Err(Error::InvalidInput(format!(
            "requested {k} singular triplets from a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD did not produce U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD did not produce V^H".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut u_k = CMatrix::zeros(m.nrows(), k);
    let mut v_k = CMatrix::zeros(m.ncols(), k);
    let mut sigma = Vec::with_capacity(k);
    for (j, &idx) in order.iter().take(k).enumerate() {
        u_k.set_column(j, &u.column(idx));
        // v_t stores V^H row-wise; conjugate back to columns of V.
        for r in 0..m.ncols() {
            v_k[(r, j)] = v_t[(idx, r)].conj();
        }
        sigma.push(svd.singular_values[idx]);
    }
    Ok((u_k, sigma, v_k))
}

/// Outcome of a least-squares solve.
pub struct Lstsq {
    pub solution: CMatrix,
    /// True when the normal equations needed a ridge term to factor.
    pub ridge_applied: bool,
}

/// Solve `min_X ||B - A X||_F` through the normal equations.
///
/// `A^H A` is Cholesky-factored; if that fails (rank-deficient `A`) a
/// small ridge proportional to the mean diagonal is added and the solve
/// is retried, with the fallback reported in the result.
pub fn lstsq(a: &CMatrix, b: &CMatrix) -> Result<Lstsq> {
    if a.nrows() != b.nrows() {
        return Err(Error::InvalidInput(format!(
            "lstsq shape mismatch: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let gram = a.adjoint() * a;
    let rhs = a.adjoint() * b;
    let n = gram.nrows();
    let mean_diag = gram.diagonal().iter().map(|d| d.re).sum::<f64>() / n.max(1) as f64;
    // Cholesky can "succeed" on a singular Gram matrix with a pivot at
    // rounding level, so screen the factor's diagonal against the scale.
    let pivot_tol = (mean_diag * 1e-12).sqrt();
    if let Some(chol) = Cholesky::new(gram.clone()) {
        let min_pivot = chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|d| d.re)
            .fold(f64::INFINITY, f64::min);
        if min_pivot > pivot_tol {
            return Ok(Lstsq {
                solution: chol.solve(&rhs),
                ridge_applied: false,
            });
        }
    }
    let ridge = (mean_diag * 1e-12).max(1e-300);
    let mut regularized = gram;
    for i in 0..n {
        regularized[(i, i)] += Complex::new(ridge, 0.0);
    }
    let chol = Cholesky::new(regularized)
        .ok_or_else(|| Error::Numerical("ridge-regularized normal equations failed".into()))?;
    Ok(Lstsq {
        solution: chol.solve(&rhs),
        ridge_applied: true,
    })
}

/// Squared Frobenius norm.
pub fn fro_norm_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}
