//! Acceptance-probability rewards: steering branches, conditional circuits,
//! and exact or shot-sampled estimation.

use alloc::format;
use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::circuits::{apply_to_subsystem, hea_unitary, measure_branches, Branch, OutcomeTable, ParamCircuit};
use crate::error::{Error, Result};
use crate::oracle::validate_partitions;
use crate::qcore::eigh::eigvalsh;
use crate::qcore::ops::partial_trace;
use crate::qcore::state::{DensityMatrix, PureState};
use crate::states::{default_ref_dim, purify};
use crate::vqsa::{RewardKind, Shots, VqsaConfig};

/// Bipartite system split: the purifying reference label plus the two
/// measured-side and free-side label groups.
#[derive(Debug, Clone, Copy)]
pub struct Split<'a> {
    pub reference: &'a str,
    pub a: &'a [&'a str],
    pub b: &'a [&'a str],
}

pub(crate) fn resolve_ref_dim(cfg: &VqsaConfig, rho: &DensityMatrix) -> Result<usize> {
    let ref_dim = match cfg.ref_dim {
        Some(d) => d,
        None => default_ref_dim(rho)?,
    };
    if !ref_dim.is_power_of_two() {
        return Err(Error::InvalidConfig(format!(
            "reference dimension must be a power of two to host a circuit, got {ref_dim}"
        )));
    }
    Ok(ref_dim)
}

fn group_qubits(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() {
        return Err(Error::BadLayout(format!(
            "conditioned partitions must have power-of-two dimension, got {dim}"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Purifies, steers the reference through the ansatz at `params_w`, and
/// measures it.
pub(crate) fn steered_branches(
    rho: &DensityMatrix,
    reference: &str,
    ref_dim: usize,
    layers_w: usize,
    params_w: &[f64],
) -> Result<Vec<Branch>> {
    let psi = purify(rho, reference, ref_dim)?;
    let circ = ParamCircuit::new(ref_dim.trailing_zeros() as usize, layers_w, true);
    if params_w.len() != circ.param_count() {
        return Err(Error::InvalidConfig(format!(
            "steering circuit takes {} parameters, got {}",
            circ.param_count(),
            params_w.len()
        )));
    }
    let w = hea_unitary(&circ, params_w)?;
    let steered = apply_to_subsystem(&psi, &w, &[reference])?;
    measure_branches(&steered, &[reference])
}

/// All-zeros probability over the conditioned groups, plus the marginal
/// zero-probability of every conditioned qubit (groups in order, qubits
/// most significant first within each group).
fn zero_statistics(state: &PureState, groups: &[&[&str]]) -> Result<(f64, Vec<f64>)> {
    let layout = state.layout();
    let mut group_positions: Vec<Vec<(usize, usize)>> = Vec::with_capacity(groups.len());
    let mut group_bits = Vec::with_capacity(groups.len());
    for group in groups {
        let mut positions = Vec::with_capacity(group.len());
        for label in *group {
            positions.push((layout.position(label)?, layout.dim_of(label)?));
        }
        group_bits.push(group_qubits(layout.dim_of_set(group)?)?);
        group_positions.push(positions);
    }
    let total_bits: usize = group_bits.iter().sum();

    let mut all_zero = 0.0f64;
    let mut per_qubit = alloc::vec![0.0f64; total_bits];
    for (full, amp) in state.amplitudes().iter().enumerate() {
        let w = amp.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let parts = layout.decompose(full);
        let mut every_group_zero = true;
        let mut bit_offset = 0;
        for (positions, bits) in group_positions.iter().zip(group_bits.iter()) {
            let mut composite = 0usize;
            for (pos, dim) in positions {
                composite = composite * dim + parts[*pos];
            }
            if composite != 0 {
                every_group_zero = false;
            }
            for j in 0..*bits {
                if (composite >> (bits - 1 - j)) & 1 == 0 {
                    per_qubit[bit_offset + j] += w;
                }
            }
            bit_offset += bits;
        }
        if every_group_zero {
            all_zero += w;
        }
    }
    Ok((all_zero, per_qubit))
}

fn apply_conditionals(
    post: &PureState,
    groups: &[&[&str]],
    group_params: &[Vec<f64>],
    layers_u: usize,
) -> Result<PureState> {
    let mut state = post.clone();
    for (group, params) in groups.iter().zip(group_params.iter()) {
        let n = group_qubits(state.layout().dim_of_set(group)?)?;
        let circ = ParamCircuit::new(n, layers_u, true);
        if params.len() != circ.param_count() {
            return Err(Error::InvalidConfig(format!(
                "conditional circuit takes {} parameters, got {}",
                circ.param_count(),
                params.len()
            )));
        }
        let u = hea_unitary(&circ, params)?;
        state = apply_to_subsystem(&state, &u, group)?;
    }
    Ok(state)
}

/// Acceptance reward over steered branches with per-outcome conditional
/// parameters, evaluated exactly or from shots.
pub(crate) fn conditioned_reward(
    branches: &[Branch],
    groups: &[&[&str]],
    layers_u: usize,
    params_for_outcome: &mut dyn FnMut(usize) -> Result<Vec<Vec<f64>>>,
    shots: &Shots,
    kind: RewardKind,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut stats = Vec::with_capacity(branches.len());
    for branch in branches {
        let group_params = params_for_outcome(branch.outcome)?;
        let transformed = apply_conditionals(&branch.post, groups, &group_params, layers_u)?;
        let (all_zero, per_qubit) = zero_statistics(&transformed, groups)?;
        stats.push((branch.prob, all_zero, per_qubit));
    }
    let n_qubits = stats.first().map(|s| s.2.len()).unwrap_or(0);
    if matches!(kind, RewardKind::Local) && n_qubits == 0 {
        return Err(Error::InvalidConfig(alloc::string::String::from(
            "local reward needs at least one conditioned qubit",
        )));
    }

    match shots {
        Shots::Exact => {
            let value = match kind {
                RewardKind::Global => stats.iter().map(|(q, g, _)| q * g).sum::<f64>(),
                RewardKind::Local => stats
                    .iter()
                    .map(|(q, _, per)| q * per.iter().sum::<f64>() / n_qubits as f64)
                    .sum::<f64>(),
            };
            Ok(value.clamp(0.0, 1.0))
        }
        Shots::Count(n) => {
            let total: f64 = stats.iter().map(|(q, _, _)| *q).sum();
            let mut hits = 0usize;
            for _ in 0..*n {
                let mut draw = rng.gen::<f64>() * total;
                let mut chosen = stats.len() - 1;
                for (i, (q, _, _)) in stats.iter().enumerate() {
                    draw -= q;
                    if draw <= 0.0 {
                        chosen = i;
                        break;
                    }
                }
                let p = match kind {
                    RewardKind::Global => stats[chosen].1,
                    RewardKind::Local => stats[chosen].2[rng.gen_range(0..n_qubits)],
                };
                if rng.gen::<f64>() < p {
                    hits += 1;
                }
            }
            Ok(hits as f64 / *n as f64)
        }
    }
}

fn table_params(
    table: &OutcomeTable,
    outcome: usize,
    expected: usize,
) -> Result<Vec<f64>> {
    match table.get(outcome) {
        Some(params) if params.len() == expected => Ok(params.to_vec()),
        Some(params) => Err(Error::InvalidConfig(format!(
            "outcome {outcome} carries {} parameters, circuit takes {expected}",
            params.len()
        ))),
        None => Ok(alloc::vec![0.0; expected]),
    }
}

fn bipartite_reward(
    rho: &DensityMatrix,
    split: &Split,
    params_w: &[f64],
    table: &OutcomeTable,
    cfg: &VqsaConfig,
    kind: RewardKind,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    cfg.validate()?;
    validate_partitions(rho.layout(), &[split.a, split.b])?;
    let ref_dim = resolve_ref_dim(cfg, rho)?;
    let branches = steered_branches(rho, split.reference, ref_dim, cfg.layers_w, params_w)?;
    let n_a = group_qubits(rho.layout().dim_of_set(split.a)?)?;
    let expected = ParamCircuit::new(n_a, cfg.layers_u, true).param_count();
    let groups = [split.a];
    conditioned_reward(
        &branches,
        &groups,
        cfg.layers_u,
        &mut |outcome| Ok(alloc::vec![table_params(table, outcome, expected)?]),
        &cfg.shots,
        kind,
        rng,
    )
}

/// Probability that every conditioned qubit reads zero: steering on the
/// reference, conditional circuit on the first split group, then a
/// computational-basis check of that group.
pub fn global_reward(
    rho: &DensityMatrix,
    split: &Split,
    params_w: &[f64],
    table: &OutcomeTable,
    cfg: &VqsaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    bipartite_reward(rho, split, params_w, table, cfg, RewardKind::Global, rng)
}

/// Zero-probability of one conditioned qubit chosen uniformly at random;
/// exact mode averages over all of them.
pub fn local_reward(
    rho: &DensityMatrix,
    split: &Split,
    params_w: &[f64],
    table: &OutcomeTable,
    cfg: &VqsaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    bipartite_reward(rho, split, params_w, table, cfg, RewardKind::Local, rng)
}

/// Acceptance probability of the symmetric-subspace check on a pure state:
/// half of one plus the spectral norm of the reduced state on the first
/// group.
pub fn pure_state_test(psi: &PureState, partitions: &[&[&str]]) -> Result<f64> {
    if partitions.len() != 2 {
        return Err(Error::BadLayout(format!(
            "the pure-state test is bipartite, got {} partitions",
            partitions.len()
        )));
    }
    validate_partitions(psi.layout(), partitions)?;
    let reduced = partial_trace(psi.to_density().matrix(), psi.layout(), partitions[0])?;
    let top = eigvalsh(&reduced)?[0].clamp(0.0, 1.0);
    Ok(0.5 * (1.0 + top))
}
