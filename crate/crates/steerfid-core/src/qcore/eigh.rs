//! Hermitian eigendecomposition via cyclic complex Jacobi rotations.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::qcore::matrix::Matrix;

const MAX_SWEEPS: usize = 64;
const OFF_DIAG_TOL: f64 = 1e-14;

/// Eigenvalues (descending) and matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Unitary matrix whose `k`-th column is the eigenvector of `values[k]`.
    pub vectors: Matrix,
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in descending order. Each eigenvector column is
/// normalized with its first non-negligible entry made real and positive, so
/// repeated calls on equal inputs produce identical output.
pub fn eigh(m: &Matrix) -> Result<EigenDecomposition> {
    decompose(m, true)
}

/// Eigenvalues only, in descending order.
pub fn eigvalsh(m: &Matrix) -> Result<Vec<f64>> {
    Ok(decompose(m, false)?.values)
}

fn decompose(m: &Matrix, want_vectors: bool) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let scale = m.frobenius_norm().max(1.0);
    if m.hermiticity_defect() > 1e-8 * scale {
        return Err(Error::InvalidState(alloc::format!(
            "matrix is not Hermitian (defect {:.3e})",
            m.hermiticity_defect()
        )));
    }

    let mut a = m.clone();
    // Symmetrize away representation noise so rotations see an exactly
    // Hermitian matrix.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (a.get(i, j) + a.get(j, i).conj()) * 0.5;
            a.set(i, j, avg);
            a.set(j, i, avg.conj());
        }
        let d = a.get(i, i).re;
        a.set(i, i, Complex64::new(d, 0.0));
    }
    let mut v = if want_vectors {
        Matrix::identity(n)
    } else {
        Matrix::zeros(0, 0)
    };

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= OFF_DIAG_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q, want_vectors);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = if want_vectors {
        let mut sorted = Matrix::zeros(n, n);
        for (new_col, &old_col) in order.iter().enumerate() {
            let phase = column_phase(&v, old_col);
            for row in 0..n {
                sorted.set(row, new_col, v.get(row, old_col) * phase);
            }
        }
        sorted
    } else {
        Matrix::zeros(0, 0)
    };

    Ok(EigenDecomposition { values, vectors })
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, want_vectors: bool) {
    let apq = a.get(p, q);
    let beta = apq.norm();
    if beta == 0.0 {
        return;
    }
    let phase = apq / beta;
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let tau = (aqq - app) / (2.0 * beta);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = a.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        let new_kp = akp * c - akq * (phase.conj() * s);
        let new_kq = akp * (phase * s) + akq * c;
        a.set(k, p, new_kp);
        a.set(p, k, new_kp.conj());
        a.set(k, q, new_kq);
        a.set(q, k, new_kq.conj());
    }
    let new_pp = app * c * c + aqq * s * s - 2.0 * beta * c * s;
    let new_qq = app * s * s + aqq * c * c + 2.0 * beta * c * s;
    a.set(p, p, Complex64::new(new_pp, 0.0));
    a.set(q, q, Complex64::new(new_qq, 0.0));
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));

    if want_vectors {
        for k in 0..n {
            let vkp = v.get(k, p);
            let vkq = v.get(k, q);
            v.set(k, p, vkp * c - vkq * (phase.conj() * s));
            v.set(k, q, vkp * (phase * s) + vkq * c);
        }
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += a.get(i, j).norm_sqr();
        }
    }
    (2.0 * sum).sqrt()
}

fn column_phase(v: &Matrix, col: usize) -> Complex64 {
    for row in 0..v.rows() {
        let entry = v.get(row, col);
        if entry.norm() > 1e-12 {
            return entry.conj() / entry.norm();
        }
    }
    Complex64::new(1.0, 0.0)
}
