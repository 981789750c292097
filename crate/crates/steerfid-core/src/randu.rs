//! Random draws used by the stochastic optimizers: Gaussian samples, unit
//! vectors, and Haar-distributed unitaries.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::qcore::matrix::{vec_inner, vec_norm, Matrix};

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1 = rng.gen::<f64>().max(1e-300);
    let u2 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

pub(crate) fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        let norm = vec_norm(&v);
        if norm > 1e-12 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Haar-distributed unitary via Gram-Schmidt of a Gaussian matrix; the
/// triangular factor keeps a positive diagonal, which makes the distribution
/// exactly Haar.
pub(crate) fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        for q in &cols {
            let overlap = vec_inner(q, &v);
            for (vi, qi) in v.iter_mut().zip(q.iter()) {
                *vi -= overlap * qi;
            }
        }
        let norm = vec_norm(&v);
        if norm < 1e-9 {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        cols.push(v);
    }
    Matrix::from_fn(d, d, |i, j| cols[j][i])
}
