//! Measure-and-prepare channel acceptance: the symmetric-subspace check
//! computed by two independent routes.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::validate_partitions;
use crate::qcore::eigh::{eigh, eigvalsh};
use crate::qcore::layout::Layout;
use crate::qcore::matrix::Matrix;
use crate::qcore::ops::{
    embed_operator, partial_trace, permute_subsystems, permute_vector, symmetric_projector,
};
use crate::qcore::state::{DensityMatrix, PureState};
use crate::randu::random_unit_vector;
use crate::states::purify;
use crate::vqsa::reward::Split;

/// Agreement required between the two internal acceptance computations.
pub const EB_ROUTE_TOL: f64 = 1e-10;

const POVM_TOL: f64 = 1e-10;

/// A measure-and-prepare channel: a rank-one POVM on the reference and, per
/// outcome, one prepared pure state for each conditioned partition.
#[derive(Debug, Clone)]
pub struct EbChannelSpec {
    povm: Vec<Matrix>,
    preps: Vec<Vec<PureState>>,
}

impl EbChannelSpec {
    pub fn new(povm: Vec<Matrix>, preps: Vec<Vec<PureState>>) -> Result<Self> {
        if povm.is_empty() || povm.len() != preps.len() {
            return Err(Error::InvalidConfig(format!(
                "need matching outcome counts, got {} POVM elements and {} preparations",
                povm.len(),
                preps.len()
            )));
        }
        let dim = povm[0].rows();
        let mut sum = Matrix::zeros(dim, dim);
        for element in &povm {
            if element.rows() != dim || element.cols() != dim {
                return Err(Error::ShapeMismatch(String::from(
                    "POVM elements must share one square shape",
                )));
            }
            let eigs = eigvalsh(element)?;
            if eigs.iter().any(|e| *e < -POVM_TOL) {
                return Err(Error::InvalidState(String::from(
                    "POVM element is not positive semidefinite",
                )));
            }
            if eigs.len() > 1 && eigs[1] > POVM_TOL {
                return Err(Error::InvalidState(format!(
                    "POVM element has rank above one, second eigenvalue {}",
                    eigs[1]
                )));
            }
            sum = sum.add(element)?;
        }
        if sum.max_abs_diff(&Matrix::identity(dim)) > POVM_TOL {
            return Err(Error::InvalidState(String::from(
                "POVM elements do not sum to the identity",
            )));
        }
        for states in &preps {
            if states.is_empty() {
                return Err(Error::InvalidConfig(String::from(
                    "each outcome needs at least one prepared state",
                )));
            }
            for state in states {
                let norm_sq: f64 = state.amplitudes().iter().map(|a| a.norm_sqr()).sum();
                if (norm_sq - 1.0).abs() > POVM_TOL {
                    return Err(Error::InvalidState(String::from(
                        "prepared states must be normalized",
                    )));
                }
            }
        }
        Ok(EbChannelSpec { povm, preps })
    }

    pub fn ref_dim(&self) -> usize {
        self.povm[0].rows()
    }

    pub fn outcomes(&self) -> usize {
        self.povm.len()
    }

    pub fn povm(&self) -> &[Matrix] {
        &self.povm
    }

    pub fn preps(&self) -> &[Vec<PureState>] {
        &self.preps
    }
}

/// Both internal computations of the acceptance probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbAcceptance {
    /// Symmetric projector applied to the channel output.
    pub direct: f64,
    /// Weighted overlap expansion over measurement branches.
    pub expansion: f64,
}

/// Prepared state for one outcome, with amplitudes reordered to the layout
/// order of the first split group.
fn canonical_prep(prep: &PureState, a_layout: &Layout) -> Result<Vec<Complex64>> {
    if prep.layout().total_dim() != a_layout.total_dim() {
        return Err(Error::ShapeMismatch(format!(
            "prepared state dimension {} does not match partition dimension {}",
            prep.layout().total_dim(),
            a_layout.total_dim()
        )));
    }
    let order: Vec<&str> = a_layout.labels().collect();
    let (amps, _) = permute_vector(prep.amplitudes(), prep.layout(), &order)?;
    Ok(amps)
}

/// Acceptance probability of the symmetric-subspace check after sending the
/// purifying reference through the measure-and-prepare channel.
///
/// The value is computed two independent ways: directly, as the projector
/// expectation on the channel output, and through the branch expansion over
/// measurement outcomes. Both are returned so callers can audit agreement.
pub fn eb_acceptance_detailed(
    rho: &DensityMatrix,
    split: &Split,
    eb: &EbChannelSpec,
) -> Result<EbAcceptance> {
    validate_partitions(rho.layout(), &[split.a, split.b])?;
    for states in eb.preps() {
        if states.len() != 1 {
            return Err(Error::InvalidConfig(String::from(
                "bipartite acceptance takes exactly one prepared state per outcome",
            )));
        }
    }
    let ref_dim = eb.ref_dim();
    let psi = purify(rho, split.reference, ref_dim)?;
    let full = psi.to_density();
    let full_layout = full.layout().clone();

    let a_layout = rho.layout().restricted_to(split.a)?;
    let b_layout = rho.layout().without(split.a)?;
    let d_a = a_layout.total_dim();
    let d_b = b_layout.total_dim();
    let ab_order: Vec<&str> = a_layout.labels().chain(b_layout.labels()).collect();
    let ab_layout = a_layout.concat(&b_layout)?;

    let reduced_ref = partial_trace(full.matrix(), &full_layout, &[split.reference])?;
    let system_labels: Vec<&str> = rho.layout().labels().collect();

    let mut output = Matrix::zeros(d_a * d_a * d_b, d_a * d_a * d_b);
    let mut expansion_sum = 0.0f64;
    for (element, states) in eb.povm().iter().zip(eb.preps().iter()) {
        let weight = element.inner(&reduced_ref).re;
        let embedded = embed_operator(element, &[split.reference], &full_layout)?;
        let branch = partial_trace(
            &embedded.matmul(full.matrix())?,
            &full_layout,
            &system_labels,
        )?;
        let (branch_ab, _) = permute_subsystems(&branch, rho.layout(), &ab_order)?;

        let prep = canonical_prep(&states[0], &a_layout)?;
        let outer = Matrix::from_fn(d_a, d_a, |i, j| prep[i] * prep[j].conj());
        output = output.add(&outer.kron(&branch_ab))?;

        if weight > 1e-14 {
            let branch_a = partial_trace(&branch_ab, &ab_layout, split.a)?;
            let mut overlap = Complex64::new(0.0, 0.0);
            for i in 0..d_a {
                for j in 0..d_a {
                    overlap += prep[i].conj() * branch_a.get(i, j) * prep[j];
                }
            }
            expansion_sum += overlap.re;
        }
    }

    let checker = symmetric_projector(d_a).kron(&Matrix::identity(d_b));
    let direct = checker.inner(&output).re;
    let expansion = 0.5 * (1.0 + expansion_sum);
    Ok(EbAcceptance { direct, expansion })
}

/// Acceptance probability by the direct route, after checking that both
/// internal routes agree.
pub fn eb_acceptance(rho: &DensityMatrix, split: &Split, eb: &EbChannelSpec) -> Result<f64> {
    let both = eb_acceptance_detailed(rho, split, eb)?;
    if (both.direct - both.expansion).abs() > EB_ROUTE_TOL {
        return Err(Error::ConsistencyFailure(format!(
            "acceptance routes disagree: direct {} vs expansion {}",
            both.direct, both.expansion
        )));
    }
    Ok(both.direct)
}

/// Random channel: a rank-one POVM built from an isometry drawn from the
/// unitary group, with independent random preparations on the given layout.
pub fn random_eb_spec<R: Rng + ?Sized>(
    ref_dim: usize,
    n_outcomes: usize,
    prep_layout: &Layout,
    rng: &mut R,
) -> Result<EbChannelSpec> {
    if n_outcomes < ref_dim {
        return Err(Error::InvalidConfig(format!(
            "a rank-one POVM needs at least {ref_dim} outcomes, got {n_outcomes}"
        )));
    }
    let big = crate::randu::haar_unitary(n_outcomes, rng);
    let mut povm = Vec::with_capacity(n_outcomes);
    for x in 0..n_outcomes {
        let row: Vec<Complex64> = (0..ref_dim).map(|j| big.get(x, j)).collect();
        povm.push(Matrix::from_fn(ref_dim, ref_dim, |i, j| {
            row[i].conj() * row[j]
        }));
    }
    let preps = (0..n_outcomes)
        .map(|_| {
            alloc::vec![PureState::new_unchecked(
                random_unit_vector(prep_layout.total_dim(), rng),
                prep_layout.clone(),
            )]
        })
        .collect();
    EbChannelSpec::new(povm, preps)
}

/// Channel induced by a decomposing unitary: measure the reference in the
/// rotated basis, prepare the top eigenvector of each branch's reduced
/// state on the first split group.
pub fn eb_from_decomposition(
    rho: &DensityMatrix,
    split: &Split,
    decomposer: &Matrix,
) -> Result<EbChannelSpec> {
    validate_partitions(rho.layout(), &[split.a, split.b])?;
    let ref_dim = decomposer.rows();
    let psi = purify(rho, split.reference, ref_dim)?;
    let steered = crate::circuits::apply_to_subsystem(&psi, decomposer, &[split.reference])?;
    let branches = crate::circuits::measure_branches(&steered, &[split.reference])?;

    let a_layout = rho.layout().restricted_to(split.a)?;
    let d_a = a_layout.total_dim();
    let ground = PureState::basis(a_layout.clone(), 0);

    let mut povm = Vec::with_capacity(ref_dim);
    for x in 0..ref_dim {
        povm.push(Matrix::from_fn(ref_dim, ref_dim, |i, j| {
            decomposer.get(x, i).conj() * decomposer.get(x, j)
        }));
    }
    let mut preps = alloc::vec![alloc::vec![ground]; ref_dim];
    for branch in &branches {
        let reduced = partial_trace(
            branch.post.to_density().matrix(),
            branch.post.layout(),
            split.a,
        )?;
        let decomp = eigh(&reduced)?;
        let top: Vec<Complex64> = (0..d_a).map(|i| decomp.vectors.get(i, 0)).collect();
        preps[branch.outcome] =
            alloc::vec![PureState::new_unchecked(top, a_layout.clone())];
    }
    EbChannelSpec::new(povm, preps)
}
