//! Semidefinite upper bounds on the fidelity of separability: a symmetric
//! extension with partial-transpose cuts, a steering-channel relaxation,
//! and the Uhlmann fidelity program they both build on.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::oracle::validate_partitions;
use crate::qcore::eigh::eigh;
use crate::qcore::layout::Layout;
use crate::qcore::matrix::Matrix;
use crate::qcore::ops::{
    embed_operator, partial_trace, partial_transpose, permute_subsystems, symmetric_projector,
};
use crate::qcore::state::DensityMatrix;
use crate::states::purify;

use super::problem::{BlockId, SdpProblem};
use super::solver::{SdpSolution, SdpStatus, SolveOptions};

/// Eigenvalues at or below this threshold are treated as zero when support
/// subspaces are extracted.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Largest accepted extension level for the benchmark programs.
pub const MAX_EXTENSION_LEVEL: usize = 4;

/// Uhlmann fidelity between two states on the same layout, computed by
/// semidefinite programming.
pub fn fidelity_sdp(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(fidelity_sdp_detailed(rho, sigma)?.0)
}

/// Fidelity together with the solver certificate it came from.
pub fn fidelity_sdp_detailed(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<(f64, SdpSolution)> {
    if rho.layout().entries() != sigma.layout().entries() {
        return Err(Error::BadLayout(String::from(
            "fidelity needs both states on the same layout",
        )));
    }
    let (rho_vals, rho_basis) = support(rho.matrix())?;
    let (sigma_vals, sigma_basis) = support(sigma.matrix())?;
    let r1 = rho_vals.len();
    let r2 = sigma_vals.len();
    let overlap = sigma_basis.dagger().matmul(&rho_basis)?;

    let mut prob = SdpProblem::new();
    let uhl = prob.add_block("uhlmann", r1 + r2)?;
    pin_corner(&mut prob, uhl, 0, &Matrix::diag(&rho_vals))?;
    pin_corner(&mut prob, uhl, r1, &Matrix::diag(&sigma_vals))?;
    let mut objective = Matrix::zeros(r1 + r2, r1 + r2);
    for b in 0..r2 {
        for i in 0..r1 {
            let z = 0.5 * overlap.get(b, i);
            objective.set(r1 + b, i, z);
            objective.set(i, r1 + b, z.conj());
        }
    }
    prob.add_objective(uhl, &objective)?;

    let sol = certified(prob.solve(&SolveOptions::default())?, "fidelity")?;
    let root = sol.value.clamp(0.0, 1.0);
    Ok((root * root, sol))
}

/// Upper bound on the fidelity of separability across the `a`/`b` split
/// from a `k`-extendible target state with partial-transpose cuts on every
/// extension prefix.
pub fn benchmark1(rho: &DensityMatrix, a: &[&str], b: &[&str], k: usize) -> Result<f64> {
    Ok(benchmark1_detailed(rho, a, b, k)?.0)
}

/// [`benchmark1`] together with the solver certificate it came from.
pub fn benchmark1_detailed(
    rho: &DensityMatrix,
    a: &[&str],
    b: &[&str],
    k: usize,
) -> Result<(f64, SdpSolution)> {
    validate_partitions(rho.layout(), &[a, b])?;
    check_level(k)?;
    let dim_a = rho.layout().dim_of_set(a)?;
    let dim_b = rho.layout().dim_of_set(b)?;
    let dim_ab = dim_a * dim_b;
    let ordered: Vec<&str> = a.iter().chain(b.iter()).copied().collect();
    let (reordered, _) = permute_subsystems(rho.matrix(), rho.layout(), &ordered)?;
    let (vals, basis) = support(&reordered)?;
    let rank = vals.len();

    let copy_labels: Vec<String> = (1..=k).map(|j| format!("b{j}")).collect();
    let ext_layout = {
        let mut subs = vec![(String::from("a"), dim_a)];
        for label in &copy_labels {
            subs.push((label.clone(), dim_b));
        }
        Layout::from_owned(subs)?
    };
    let ext_dim = ext_layout.total_dim();

    let mut prob = SdpProblem::new();
    let uhl = prob.add_block("uhlmann", rank + dim_ab)?;
    let ext = prob.add_block("extension", ext_dim)?;
    pin_corner(&mut prob, uhl, 0, &Matrix::diag(&vals))?;

    // The second diagonal corner of the Uhlmann block is the first-copy
    // marginal of the extension.
    let first_copy: Vec<&str> = vec!["a", "b1"];
    for coord in hermitian_coords(dim_ab) {
        let corner = coord_matrix(rank + dim_ab, rank, coord);
        let pulled = embed_operator(&coord_matrix(dim_ab, 0, coord), &first_copy, &ext_layout)?;
        prob.add_constraint(&[(uhl, corner), (ext, pulled.scale_real(-1.0))], 0.0)?;
    }
    prob.add_constraint(&[(ext, Matrix::identity(ext_dim))], 1.0)?;
    for t in 0..k.saturating_sub(1) {
        add_swap_invariance_rows(&mut prob, ext, &ext_layout, 1 + t, 2 + t)?;
    }
    for j in 1..=k {
        let prefix_layout = {
            let mut subs = vec![(String::from("a"), dim_a)];
            for label in &copy_labels[..j] {
                subs.push((label.clone(), dim_b));
            }
            Layout::from_owned(subs)?
        };
        let prefix_dim = prefix_layout.total_dim();
        let slack = prob.add_block(&format!("ppt{j}"), prefix_dim)?;
        let transposed: Vec<&str> = copy_labels[..j].iter().map(String::as_str).collect();
        let mut targets: Vec<&str> = vec!["a"];
        targets.extend(transposed.iter().copied());
        for coord in hermitian_coords(prefix_dim) {
            let e = coord_matrix(prefix_dim, 0, coord);
            let pt = partial_transpose(&e, &prefix_layout, &transposed)?;
            let pulled = embed_operator(&pt, &targets, &ext_layout)?;
            prob.add_constraint(&[(slack, e), (ext, pulled.scale_real(-1.0))], 0.0)?;
        }
    }

    let mut objective = Matrix::zeros(rank + dim_ab, rank + dim_ab);
    for col in 0..dim_ab {
        for i in 0..rank {
            let z = 0.5 * basis.get(col, i);
            objective.set(rank + col, i, z);
            objective.set(i, rank + col, z.conj());
        }
    }
    prob.add_objective(uhl, &objective)?;

    let sol = certified(prob.solve(&SolveOptions::default())?, "extension benchmark")?;
    let root = sol.value.clamp(0.0, 1.0);
    Ok((root * root, sol))
}

/// Upper bound on the fidelity of separability from a `k`-extendible
/// steering channel acting on the purifying system, with partial-transpose
/// cuts on every output prefix.
pub fn benchmark2(rho: &DensityMatrix, a: &[&str], b: &[&str], k: usize) -> Result<f64> {
    Ok(benchmark2_detailed(rho, a, b, k)?.0)
}

/// [`benchmark2`] together with the solver certificate it came from.
pub fn benchmark2_detailed(
    rho: &DensityMatrix,
    a: &[&str],
    b: &[&str],
    k: usize,
) -> Result<(f64, SdpSolution)> {
    validate_partitions(rho.layout(), &[a, b])?;
    check_level(k)?;
    let dim_a = rho.layout().dim_of_set(a)?;
    let dim_b = rho.layout().dim_of_set(b)?;
    let ordered: Vec<&str> = a.iter().chain(b.iter()).copied().collect();
    let (reordered, reordered_layout) = permute_subsystems(rho.matrix(), rho.layout(), &ordered)?;
    let rank = {
        let (vals, _) = support(&reordered)?;
        vals.len()
    };
    let ref_label = fresh_label("ref", &reordered_layout);
    let state = DensityMatrix::new_unchecked(reordered, reordered_layout);
    let psi = purify(&state, &ref_label, rank)?.to_density();

    let grouped = Layout::new(&[("r", rank), ("a", dim_a), ("b", dim_b)])?;
    let objective_small = choi_objective(psi.matrix(), &grouped)?;

    let copy_labels: Vec<String> = (1..=k).map(|j| format!("p{j}")).collect();
    let gamma_layout = {
        let mut subs = vec![(String::from("r"), rank)];
        for label in &copy_labels {
            subs.push((label.clone(), dim_a));
        }
        Layout::from_owned(subs)?
    };
    let gamma_dim = gamma_layout.total_dim();

    let mut prob = SdpProblem::new();
    let choi = prob.add_block("choi", gamma_dim)?;
    prob.add_objective(
        choi,
        &embed_operator(&objective_small, &["r", "p1"], &gamma_layout)?,
    )?;
    for coord in hermitian_coords(rank) {
        let pulled = embed_operator(&coord_matrix(rank, 0, coord), &["r"], &gamma_layout)?;
        let rhs = match coord {
            Coord::Diag(_) => 1.0,
            _ => 0.0,
        };
        prob.add_constraint(&[(choi, pulled)], rhs)?;
    }
    for t in 0..k.saturating_sub(1) {
        add_swap_invariance_rows(&mut prob, choi, &gamma_layout, 1 + t, 2 + t)?;
    }
    for j in 1..=k {
        let slack = prob.add_block(&format!("ppt{j}"), gamma_dim)?;
        let transposed: Vec<&str> = copy_labels[..j].iter().map(String::as_str).collect();
        for coord in hermitian_coords(gamma_dim) {
            let e = coord_matrix(gamma_dim, 0, coord);
            let pt = partial_transpose(&e, &gamma_layout, &transposed)?;
            prob.add_constraint(&[(slack, e), (choi, pt.scale_real(-1.0))], 0.0)?;
        }
    }

    let sol = certified(prob.solve(&SolveOptions::default())?, "steering benchmark")?;
    let value = (2.0 * sol.value - 1.0).clamp(0.0, 1.0);
    Ok((value, sol))
}

/// Interval bracketing the fidelity of separability given the first
/// benchmark's value at extension level `k` over a `dim_b`-dimensional
/// steered side. The width shrinks as `k` grows and the bracket is vacuous
/// whenever `dim_b^2 >= k`.
pub fn bound_gap1(dim_b: usize, k: usize, value: f64) -> (f64, f64) {
    let lower = value;
    let ratio = (dim_b * dim_b) as f64 / k as f64;
    let upper = if ratio >= 1.0 {
        1.0
    } else {
        let slack = (1.0 - value).max(0.0).sqrt() - 2.0 * (ratio * (1.0 - ratio)).sqrt();
        let slack = slack.max(0.0);
        1.0 - slack * slack
    };
    (lower, upper.clamp(0.0, 1.0))
}

/// Objective operator on the reference and first-output factors: tracing
/// it against a Choi state gives the symmetric-projector acceptance of the
/// steered output.
fn choi_objective(psi: &Matrix, grouped: &Layout) -> Result<Matrix> {
    let rank = grouped.dim_of("r")?;
    let dim_a = grouped.dim_of("a")?;
    let dim_b = grouped.dim_of("b")?;
    let wide = Layout::new(&[("r", rank), ("a", dim_a), ("b", dim_b), ("p1", dim_a)])?;
    let transposed = partial_transpose(psi, grouped, &["r"])?;
    let projector = embed_operator(&symmetric_projector(dim_a), &["p1", "a"], &wide)?;
    let state_part = embed_operator(&transposed, &["r", "a", "b"], &wide)?;
    let product = projector.matmul(&state_part)?;
    let traced = partial_trace(&product, &wide, &["r", "p1"])?;
    let d = traced.rows();
    Ok(Matrix::from_fn(d, d, |i, j| {
        0.5 * (traced.get(i, j) + traced.get(j, i).conj())
    }))
}

fn check_level(k: usize) -> Result<()> {
    if k == 0 || k > MAX_EXTENSION_LEVEL {
        return Err(Error::InvalidConfig(format!(
            "extension level must lie in 1..={MAX_EXTENSION_LEVEL}, got {k}"
        )));
    }
    Ok(())
}

fn certified(sol: SdpSolution, what: &str) -> Result<SdpSolution> {
    if sol.status != SdpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "the {what} program ended with status {:?} after {} iterations \
             (residuals: primal {:.3e}, dual {:.3e}, gap {:.3e})",
            sol.status,
            sol.iterations,
            sol.residuals.primal,
            sol.residuals.dual,
            sol.residuals.gap
        )));
    }
    Ok(sol)
}

/// Eigenvalues above `SUPPORT_TOL` and the matching eigenvector columns.
fn support(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let dec = eigh(m)?;
    let rank = dec.values.iter().filter(|v| **v > SUPPORT_TOL).count();
    if rank == 0 {
        return Err(Error::InvalidState(String::from(
            "state has no support above the rank tolerance",
        )));
    }
    let vals: Vec<f64> = dec.values[..rank].to_vec();
    let basis = Matrix::from_fn(m.rows(), rank, |i, j| dec.vectors.get(i, j));
    Ok((vals, basis))
}

fn fresh_label(stem: &str, layout: &Layout) -> String {
    let mut label = String::from(stem);
    while layout.position(&label).is_ok() {
        label.push('_');
    }
    label
}

/// Hermitian coordinate functionals: diagonal entries, then real and
/// imaginary parts of each upper-triangle entry.
#[derive(Debug, Clone, Copy)]
enum Coord {
    Diag(usize),
    Re(usize, usize),
    Im(usize, usize),
}

fn hermitian_coords(dim: usize) -> Vec<Coord> {
    let mut out = Vec::with_capacity(dim * dim);
    for p in 0..dim {
        out.push(Coord::Diag(p));
        for q in (p + 1)..dim {
            out.push(Coord::Re(p, q));
            out.push(Coord::Im(p, q));
        }
    }
    out
}

/// Matrix whose trace against a Hermitian `M` reads off the coordinate,
/// placed at `offset` inside a `dim`-dimensional block.
fn coord_matrix(dim: usize, offset: usize, coord: Coord) -> Matrix {
    let mut m = Matrix::zeros(dim, dim);
    match coord {
        Coord::Diag(p) => {
            m.set(offset + p, offset + p, Complex64::new(1.0, 0.0));
        }
        Coord::Re(p, q) => {
            m.set(offset + p, offset + q, Complex64::new(0.5, 0.0));
            m.set(offset + q, offset + p, Complex64::new(0.5, 0.0));
        }
        Coord::Im(p, q) => {
            m.set(offset + p, offset + q, Complex64::new(0.0, 0.5));
            m.set(offset + q, offset + p, Complex64::new(0.0, -0.5));
        }
    }
    m
}

fn coord_value(target: &Matrix, coord: Coord) -> f64 {
    match coord {
        Coord::Diag(p) => target.get(p, p).re,
        Coord::Re(p, q) => target.get(p, q).re,
        Coord::Im(p, q) => target.get(p, q).im,
    }
}

/// Pins every coordinate of the square corner starting at `offset` to the
/// entries of `target`.
fn pin_corner(
    prob: &mut SdpProblem,
    block: BlockId,
    offset: usize,
    target: &Matrix,
) -> Result<()> {
    let dim = prob.block_dim(block)?;
    for coord in hermitian_coords(target.rows()) {
        prob.add_constraint(
            &[(block, coord_matrix(dim, offset, coord))],
            coord_value(target, coord),
        )?;
    }
    Ok(())
}

/// Constrains the block to equal its pullback under swapping the two tensor
/// factors at layout positions `pos_a` and `pos_b`.
fn add_swap_invariance_rows(
    prob: &mut SdpProblem,
    block: BlockId,
    layout: &Layout,
    pos_a: usize,
    pos_b: usize,
) -> Result<()> {
    let d = layout.total_dim();
    let mut pi = vec![0usize; d];
    for (idx, slot) in pi.iter_mut().enumerate() {
        let mut parts = layout.decompose(idx);
        parts.swap(pos_a, pos_b);
        *slot = layout.compose(&parts);
    }
    for coord in hermitian_coords(d) {
        let (src, img, trivial) = match coord {
            Coord::Diag(p) => ((p, p), (pi[p], pi[p]), pi[p] == p),
            Coord::Re(p, q) => {
                let img = (pi[p].min(pi[q]), pi[p].max(pi[q]));
                ((p, q), img, img == (p, q))
            }
            Coord::Im(p, q) => {
                let img = (pi[p].min(pi[q]), pi[p].max(pi[q]));
                // A swapped pair flips the sign, so only the untouched
                // coordinate is trivial.
                ((p, q), img, (pi[p], pi[q]) == (p, q))
            }
        };
        if trivial || img < src {
            continue;
        }
        let mut f = Matrix::zeros(d, d);
        match coord {
            Coord::Diag(p) => {
                f.add_at(p, p, Complex64::new(1.0, 0.0));
                f.add_at(pi[p], pi[p], Complex64::new(-1.0, 0.0));
            }
            Coord::Re(p, q) => {
                f.add_at(p, q, Complex64::new(0.5, 0.0));
                f.add_at(q, p, Complex64::new(0.5, 0.0));
                f.add_at(pi[p], pi[q], Complex64::new(-0.5, 0.0));
                f.add_at(pi[q], pi[p], Complex64::new(-0.5, 0.0));
            }
            Coord::Im(p, q) => {
                f.add_at(p, q, Complex64::new(0.0, 0.5));
                f.add_at(q, p, Complex64::new(0.0, -0.5));
                f.add_at(pi[p], pi[q], Complex64::new(0.0, -0.5));
                f.add_at(pi[q], pi[p], Complex64::new(0.0, 0.5));
            }
        }
        prob.add_constraint(&[(block, f)], 0.0)?;
    }
    Ok(())
}
