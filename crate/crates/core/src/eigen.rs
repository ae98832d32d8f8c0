//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use alloc::vec::Vec;

use crate::fmath;
use crate::{Error, Matrix, Result};

/// Largest accepted `|a_ij - a_ji|` on input.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
/// Sweeps are stopped once the off-diagonal norm falls below this fraction of
/// the input's Frobenius norm.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;
/// Eigenvalues at or below this are treated as zero by [`invert_spd`].
pub const SINGULARITY_TOLERANCE: f64 = 1e-12;

/// Eigenvalues sorted descending, with unit eigenvectors as matching columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    /// Rebuilds `V · diag(λ) · Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n).map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)]).sum();
            }
        }
        out
    }
}

/// Decomposes a symmetric matrix as `A = V · diag(λ) · Vᵀ`.
///
/// The input is symmetrized by averaging `a_ij` and `a_ji` before rotating.
/// Each eigenvector column is signed so its largest-magnitude entry is
/// positive, which makes results comparable across platforms.
pub fn sym_eigen(a: &Matrix) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let asym = a.max_asymmetry();
    if asym >= SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }
    let n = a.rows();
    let mut m = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let mut v = Matrix::identity(n);
    let threshold = OFF_DIAGONAL_TOLERANCE * m.frobenius_norm();

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > threshold {
        return Err(Error::NoConvergence { routine: "Jacobi eigensolver", iterations: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the diagonal order for exact ties.
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut pivot = 0;
        for i in 0..n {
            if fmath::abs(v[(i, src)]) > fmath::abs(v[(pivot, src)]) {
                pivot = i;
            }
        }
        let sign = if v[(pivot, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, dst)] = sign * v[(i, src)];
        }
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors: vectors })
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    fmath::sqrt(s)
}

/// One Jacobi rotation in the (p, q) plane that zeroes `m[p][q]`.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = m.rows();
    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
    let t = sign / (fmath::abs(theta) + fmath::sqrt(theta * theta + 1.0));
    let c = 1.0 / fmath::sqrt(t * t + 1.0);
    let s = t * c;

    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = c * akp - s * akq;
        m[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = c * apk - s * aqk;
        m[(q, k)] = s * apk + c * aqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Inverts a symmetric positive-definite matrix as `V · diag(1/λ) · Vᵀ`.
pub fn invert_spd(a: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(a)?;
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min <= SINGULARITY_TOLERANCE {
        return Err(Error::Singular { min_eigenvalue: min });
    }
    let inv = EigenDecomposition {
        eigenvalues: eig.eigenvalues.iter().map(|l| 1.0 / l).collect(),
        eigenvectors: eig.eigenvectors,
    };
    Ok(inv.reconstruct())
}
