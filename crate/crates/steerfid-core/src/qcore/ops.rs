//! Tensor-product plumbing and quantum-information primitives.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::qcore::eigh::{eigh, eigvalsh};
use crate::qcore::layout::Layout;
use crate::qcore::matrix::Matrix;
use crate::qcore::state::DensityMatrix;

/// Eigenvalues in `[-NEG_EIG_CLIP, 0)` are treated as zero before square
/// roots; anything more negative is rejected.
pub const NEG_EIG_CLIP: f64 = 1e-10;

/// Kronecker product; the first factor is the most significant index block.
pub fn tensor(a: &Matrix, b: &Matrix) -> Matrix {
    a.kron(b)
}

/// Reduced matrix on `keep`, tracing out every other subsystem.
///
/// The result follows the layout order restricted to `keep`; pass the
/// restricted layout along when further addressing is needed.
pub fn partial_trace(m: &Matrix, layout: &Layout, keep: &[&str]) -> Result<Matrix> {
    check_square_layout(m, layout)?;
    let keep_layout = layout.restricted_to(keep)?;
    let traced_layout = layout.without(keep)?;
    let dk = keep_layout.total_dim();
    let dt = traced_layout.total_dim();

    let keep_positions: Vec<usize> = keep_layout
        .labels()
        .map(|l| layout.position(l).unwrap())
        .collect();
    let traced_positions: Vec<usize> = traced_layout
        .labels()
        .map(|l| layout.position(l).unwrap())
        .collect();
    let strides = layout.strides();

    let mut keep_offsets = alloc::vec![0usize; dk];
    for (i, off) in keep_offsets.iter_mut().enumerate() {
        let parts = keep_layout.decompose(i);
        *off = parts
            .iter()
            .zip(keep_positions.iter())
            .map(|(p, pos)| p * strides[*pos])
            .sum();
    }
    let mut traced_offsets = alloc::vec![0usize; dt];
    for (t, off) in traced_offsets.iter_mut().enumerate() {
        let parts = traced_layout.decompose(t);
        *off = parts
            .iter()
            .zip(traced_positions.iter())
            .map(|(p, pos)| p * strides[*pos])
            .sum();
    }

    let mut out = Matrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = Complex64::new(0.0, 0.0);
            for toff in &traced_offsets {
                acc += m.get(keep_offsets[i] + toff, keep_offsets[j] + toff);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Transpose applied only to the designated subsystems.
pub fn partial_transpose(m: &Matrix, layout: &Layout, transposed: &[&str]) -> Result<Matrix> {
    check_square_layout(m, layout)?;
    let positions: Vec<usize> = transposed
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<_>>()?;
    let d = layout.total_dim();
    let mut out = Matrix::zeros(d, d);
    for i in 0..d {
        let iparts = layout.decompose(i);
        for j in 0..d {
            let mut jparts = layout.decompose(j);
            let mut iswapped = iparts.clone();
            for &p in &positions {
                core::mem::swap(&mut iswapped[p], &mut jparts[p]);
            }
            out.set(
                layout.compose(&iswapped),
                layout.compose(&jparts),
                m.get(i, j),
            );
        }
    }
    Ok(out)
}

/// Reorders tensor factors of a square matrix into `new_order`.
pub fn permute_subsystems(m: &Matrix, layout: &Layout, new_order: &[&str]) -> Result<(Matrix, Layout)> {
    check_square_layout(m, layout)?;
    if new_order.len() != layout.len() {
        return Err(Error::BadLayout(alloc::format!(
            "permutation lists {} labels, layout has {}",
            new_order.len(),
            layout.len()
        )));
    }
    let new_layout = layout.restricted_to(new_order)?;
    let new_layout = {
        // restricted_to keeps layout order; rebuild in the requested order.
        let mut subs = Vec::new();
        for l in new_order {
            subs.push((alloc::string::String::from(*l), new_layout.dim_of(l)?));
        }
        Layout::from_owned(subs)?
    };
    let positions: Vec<usize> = new_order
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<_>>()?;
    let d = layout.total_dim();
    let mut index_map = alloc::vec![0usize; d];
    for (old, slot) in index_map.iter_mut().enumerate() {
        let parts = layout.decompose(old);
        let new_parts: Vec<usize> = positions.iter().map(|&p| parts[p]).collect();
        *slot = new_layout.compose(&new_parts);
    }
    let mut out = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out.set(index_map[i], index_map[j], m.get(i, j));
        }
    }
    Ok((out, new_layout))
}

/// Reorders tensor factors of a state vector into `new_order`.
pub fn permute_vector(
    amps: &[Complex64],
    layout: &Layout,
    new_order: &[&str],
) -> Result<(Vec<Complex64>, Layout)> {
    if amps.len() != layout.total_dim() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "vector length {} vs layout dimension {}",
            amps.len(),
            layout.total_dim()
        )));
    }
    let mut subs = Vec::new();
    for l in new_order {
        subs.push((alloc::string::String::from(*l), layout.dim_of(l)?));
    }
    if subs.len() != layout.len() {
        return Err(Error::BadLayout(alloc::format!(
            "permutation lists {} labels, layout has {}",
            subs.len(),
            layout.len()
        )));
    }
    let new_layout = Layout::from_owned(subs)?;
    let positions: Vec<usize> = new_order
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<_>>()?;
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); amps.len()];
    for (old, amp) in amps.iter().enumerate() {
        let parts = layout.decompose(old);
        let new_parts: Vec<usize> = positions.iter().map(|&p| parts[p]).collect();
        out[new_layout.compose(&new_parts)] = *amp;
    }
    Ok((out, new_layout))
}

/// Embeds an operator acting on `targets` (in the listed order) into the
/// full space described by `layout`, tensoring identity elsewhere.
pub fn embed_operator(op: &Matrix, targets: &[&str], layout: &Layout) -> Result<Matrix> {
    let mut target_dims = Vec::new();
    for l in targets {
        target_dims.push(layout.dim_of(l)?);
    }
    let dt: usize = target_dims.iter().product();
    if op.rows() != dt || op.cols() != dt {
        return Err(Error::ShapeMismatch(alloc::format!(
            "operator is {}x{} but targets have dimension {dt}",
            op.rows(),
            op.cols()
        )));
    }
    let positions: Vec<usize> = targets
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<_>>()?;
    let d = layout.total_dim();

    let target_layout = {
        let subs: Vec<(alloc::string::String, usize)> = targets
            .iter()
            .zip(target_dims.iter())
            .map(|(l, d)| (alloc::string::String::from(*l), *d))
            .collect();
        Layout::from_owned(subs)?
    };

    let mut out = Matrix::zeros(d, d);
    for i in 0..d {
        let iparts = layout.decompose(i);
        let it: Vec<usize> = positions.iter().map(|&p| iparts[p]).collect();
        let irow = target_layout.compose(&it);
        for j in 0..d {
            let jparts = layout.decompose(j);
            let mut rest_equal = true;
            for p in 0..layout.len() {
                if !positions.contains(&p) && iparts[p] != jparts[p] {
                    rest_equal = false;
                    break;
                }
            }
            if !rest_equal {
                continue;
            }
            let jt: Vec<usize> = positions.iter().map(|&p| jparts[p]).collect();
            out.set(i, j, op.get(irow, target_layout.compose(&jt)));
        }
    }
    Ok(out)
}

/// Swap operator on two `d`-dimensional factors: `F(|i>|j>) = |j>|i>`.
pub fn swap_operator(d: usize) -> Matrix {
    let mut f = Matrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f.set(j * d + i, i * d + j, Complex64::new(1.0, 0.0));
        }
    }
    f
}

/// Projector onto the symmetric subspace of two `d`-dimensional factors.
pub fn symmetric_projector(d: usize) -> Matrix {
    let f = swap_operator(d);
    let id = Matrix::identity(d * d);
    id.add(&f).unwrap().scale_real(0.5)
}

const MAX_SYMMETRIZE_GROUP: usize = 5;

/// Average of `m` conjugated by every permutation unitary of `group`.
pub fn symmetrize_permutations(m: &Matrix, layout: &Layout, group: &[&str]) -> Result<Matrix> {
    check_square_layout(m, layout)?;
    if group.len() > MAX_SYMMETRIZE_GROUP {
        return Err(Error::TooLarge(alloc::format!(
            "symmetrization over {} subsystems exceeds the cap of {MAX_SYMMETRIZE_GROUP}",
            group.len()
        )));
    }
    let positions: Vec<usize> = group
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<_>>()?;
    let dim0 = layout.dim_of(group.first().copied().unwrap_or(""))
        .unwrap_or(1);
    for l in group {
        if layout.dim_of(l)? != dim0 {
            return Err(Error::ShapeMismatch(alloc::format!(
                "subsystem {l} has a different dimension than the rest of the group"
            )));
        }
    }

    let perms = permutations(group.len());
    let d = layout.total_dim();
    let mut acc = Matrix::zeros(d, d);
    for perm in &perms {
        // Index map of the permutation unitary P: subsystem at group slot s
        // moves to group slot perm[s].
        let mut index_map = alloc::vec![0usize; d];
        for (old, slot) in index_map.iter_mut().enumerate() {
            let mut parts = layout.decompose(old);
            let originals: Vec<usize> = positions.iter().map(|&p| parts[p]).collect();
            for (s, &p) in positions.iter().enumerate() {
                parts[p] = originals[perm[s]];
            }
            *slot = layout.compose(&parts);
        }
        for i in 0..d {
            for j in 0..d {
                acc.add_at(index_map[i], index_map[j], m.get(i, j));
            }
        }
    }
    Ok(acc.scale_real(1.0 / perms.len() as f64))
}

/// All permutations of `0..n` in a deterministic order (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut items: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap_permute(&mut items, n, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// Operator norm: largest absolute eigenvalue for Hermitian input, largest
/// singular value otherwise.
pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    if m.is_square() && m.hermiticity_defect() <= 1e-10 * scale.max(1.0) {
        let vals = eigvalsh(m)?;
        return Ok(vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
    }
    let gram = m.dagger().matmul(m)?;
    let vals = eigvalsh(&gram)?;
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    Ok(top.sqrt())
}

/// Hermitian square root with the PSD clip applied to tiny negative
/// eigenvalues.
pub fn sqrt_psd(m: &Matrix) -> Result<Matrix> {
    let eig = eigh(m)?;
    let mut roots = Vec::with_capacity(eig.values.len());
    for v in &eig.values {
        if *v < -NEG_EIG_CLIP {
            return Err(Error::InvalidState(alloc::format!(
                "matrix is not PSD: eigenvalue {v:.3e}"
            )));
        }
        roots.push(v.max(0.0).sqrt());
    }
    let lambda = Matrix::diag(&roots);
    eig.vectors.matmul(&lambda)?.matmul(&eig.vectors.dagger())
}

/// Uhlmann fidelity `F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1^2` via
/// eigendecompositions.
pub fn fidelity_exact(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "fidelity of a {}-dim state against a {}-dim state",
            rho.dim(),
            sigma.dim()
        )));
    }
    let sr = sqrt_psd(rho.matrix())?;
    let inner = sr.matmul(sigma.matrix())?.matmul(&sr)?;
    let vals = eigvalsh(&inner)?;
    let mut root_sum = 0.0;
    for v in &vals {
        if *v < -NEG_EIG_CLIP {
            return Err(Error::InvalidState(alloc::format!(
                "fidelity inner matrix has eigenvalue {v:.3e}"
            )));
        }
        root_sum += v.max(0.0).sqrt();
    }
    Ok((root_sum * root_sum).clamp(0.0, 1.0 + 1e-9).min(1.0))
}

fn check_square_layout(m: &Matrix, layout: &Layout) -> Result<()> {
    let d = layout.total_dim();
    if m.rows() != d || m.cols() != d {
        return Err(Error::ShapeMismatch(alloc::format!(
            "matrix is {}x{} but layout dimension is {d}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}
