//! Density matrices and pure states with attached tensor layouts.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::eigh::eigvalsh;
use crate::qcore::layout::Layout;
use crate::qcore::matrix::{vec_norm, Matrix};

/// Tolerance for the physicality checks performed by the validating
/// constructors.
pub const STATE_TOL: f64 = 1e-10;

/// Density matrix together with the layout naming its tensor factors.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: Matrix,
    layout: Layout,
}

impl DensityMatrix {
    /// Validates hermiticity, positivity, unit trace, and layout dimension.
    pub fn new(mat: Matrix, layout: Layout) -> Result<Self> {
        let d = layout.total_dim();
        if mat.rows() != d || mat.cols() != d {
            return Err(Error::ShapeMismatch(alloc::format!(
                "matrix is {}x{} but layout dimension is {d}",
                mat.rows(),
                mat.cols()
            )));
        }
        let defect = mat.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::InvalidState(alloc::format!(
                "not Hermitian (defect {defect:.3e})"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(alloc::format!(
                "trace is {} + {}i, expected 1",
                tr.re,
                tr.im
            )));
        }
        let min_eig = eigvalsh(&mat)?.last().copied().unwrap_or(0.0);
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(alloc::format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(DensityMatrix { mat, layout })
    }

    /// Skips validation; for internal construction paths that already
    /// guarantee physicality.
    pub fn new_unchecked(mat: Matrix, layout: Layout) -> Self {
        debug_assert_eq!(mat.rows(), layout.total_dim());
        DensityMatrix { mat, layout }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> Result<usize> {
        let vals = eigvalsh(&self.mat)?;
        Ok(vals.iter().filter(|v| **v > tol).count())
    }

    pub fn into_parts(self) -> (Matrix, Layout) {
        (self.mat, self.layout)
    }
}

/// Pure state vector together with the layout naming its tensor factors.
#[derive(Debug, Clone)]
pub struct PureState {
    amps: Vec<Complex64>,
    layout: Layout,
}

impl PureState {
    /// Validates unit norm and layout dimension.
    pub fn new(amps: Vec<Complex64>, layout: Layout) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "vector has {} amplitudes but layout dimension is {}",
                amps.len(),
                layout.total_dim()
            )));
        }
        let norm = vec_norm(&amps);
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(alloc::format!(
                "norm is {norm}, expected 1"
            )));
        }
        Ok(PureState { amps, layout })
    }

    pub fn new_unchecked(amps: Vec<Complex64>, layout: Layout) -> Self {
        debug_assert_eq!(amps.len(), layout.total_dim());
        PureState { amps, layout }
    }

    /// Computational basis state `|index>`.
    pub fn basis(layout: Layout, index: usize) -> Self {
        let mut amps = alloc::vec![Complex64::new(0.0, 0.0); layout.total_dim()];
        amps[index] = Complex64::new(1.0, 0.0);
        PureState { amps, layout }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Projector `|psi><psi|` as a density matrix on the same layout.
    pub fn to_density(&self) -> DensityMatrix {
        let d = self.amps.len();
        let mut mat = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                mat.set(i, j, self.amps[i] * self.amps[j].conj());
            }
        }
        DensityMatrix::new_unchecked(mat, self.layout.clone())
    }
}
