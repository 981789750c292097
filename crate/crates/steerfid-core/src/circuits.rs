//! Hardware-efficient parameterized circuits, statevector evolution, and
//! computational-basis measurement with exact branching or shot sampling.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::layout::Layout;
use crate::qcore::matrix::Matrix;
use crate::qcore::state::PureState;

/// Hardware-efficient ansatz shape: per layer, every qubit gets a rotation
/// about x then about y (one angle each), followed by a chain of CNOT gates
/// where qubit `i` controls qubit `i+1` (dropped when `entangling` is off).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamCircuit {
    pub n_qubits: usize,
    pub layers: usize,
    pub entangling: bool,
}

impl ParamCircuit {
    pub fn new(n_qubits: usize, layers: usize, entangling: bool) -> Self {
        ParamCircuit {
            n_qubits,
            layers,
            entangling,
        }
    }

    /// Two angles per qubit per layer.
    ///
    /// Parameter order: layer-major, then qubit, then (x-angle, y-angle).
    pub fn param_count(&self) -> usize {
        2 * self.n_qubits * self.layers
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }
}

/// Parameter vectors indexed by measurement outcome.
#[derive(Debug, Clone, Default)]
pub struct OutcomeTable {
    entries: BTreeMap<usize, Vec<f64>>,
}

impl OutcomeTable {
    pub fn new() -> Self {
        OutcomeTable {
            entries: BTreeMap::new(),
        }
    }

    /// Zero-initialized table covering outcomes `0..n_outcomes`.
    pub fn zero_filled(n_outcomes: usize, param_count: usize) -> Self {
        let mut entries = BTreeMap::new();
        for x in 0..n_outcomes {
            entries.insert(x, alloc::vec![0.0; param_count]);
        }
        OutcomeTable { entries }
    }

    pub fn get(&self, outcome: usize) -> Option<&[f64]> {
        self.entries.get(&outcome).map(|v| v.as_slice())
    }

    /// Entry for `outcome`, created zero-initialized on demand.
    pub fn ensure(&mut self, outcome: usize, param_count: usize) -> &mut Vec<f64> {
        self.entries
            .entry(outcome)
            .or_insert_with(|| alloc::vec![0.0; param_count])
    }

    pub fn set(&mut self, outcome: usize, params: Vec<f64>) {
        self.entries.insert(outcome, params);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.entries.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn rx(theta: f64) -> Matrix {
    let (s, c) = (theta / 2.0).sin_cos();
    Matrix::from_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, -s),
            Complex64::new(c, 0.0),
        ],
    )
    .unwrap()
}

fn ry(theta: f64) -> Matrix {
    let (s, c) = (theta / 2.0).sin_cos();
    Matrix::from_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
    )
    .unwrap()
}

/// CNOT with `control` and `target` qubit positions, most significant qubit
/// first.
fn cnot(n_qubits: usize, control: usize, target: usize) -> Matrix {
    let d = 1usize << n_qubits;
    let cbit = n_qubits - 1 - control;
    let tbit = n_qubits - 1 - target;
    let mut m = Matrix::zeros(d, d);
    for col in 0..d {
        let row = if (col >> cbit) & 1 == 1 {
            col ^ (1 << tbit)
        } else {
            col
        };
        m.set(row, col, Complex64::new(1.0, 0.0));
    }
    m
}

/// Dense unitary of the ansatz at the given parameters.
pub fn hea_unitary(circ: &ParamCircuit, params: &[f64]) -> Result<Matrix> {
    if params.len() != circ.param_count() {
        return Err(Error::InvalidConfig(alloc::format!(
            "expected {} parameters, got {}",
            circ.param_count(),
            params.len()
        )));
    }
    let d = circ.dim();
    let mut u = Matrix::identity(d);
    for layer in 0..circ.layers {
        let mut rotations = Matrix::identity(1);
        for q in 0..circ.n_qubits {
            let base = layer * 2 * circ.n_qubits + 2 * q;
            let rot = ry(params[base + 1]).matmul(&rx(params[base])).unwrap();
            rotations = rotations.kron(&rot);
        }
        u = rotations.matmul(&u)?;
        if circ.entangling {
            for q in 0..circ.n_qubits.saturating_sub(1) {
                u = cnot(circ.n_qubits, q, q + 1).matmul(&u)?;
            }
        }
    }
    Ok(u)
}

/// Applies `u` to the listed target subsystems of a pure state; `u` indexes
/// the targets in the listed order, first label most significant.
pub fn apply_to_subsystem(state: &PureState, u: &Matrix, targets: &[&str]) -> Result<PureState> {
    let layout = state.layout();
    let target_layout = {
        let mut subs = Vec::new();
        for l in targets {
            subs.push((alloc::string::String::from(*l), layout.dim_of(l)?));
        }
        Layout::from_owned(subs)?
    };
    let dt = target_layout.total_dim();
    if u.rows() != dt || u.cols() != dt {
        return Err(Error::ShapeMismatch(alloc::format!(
            "operator is {}x{} but targets have dimension {dt}",
            u.rows(),
            u.cols()
        )));
    }
    let rest_layout = layout.without(targets)?;
    let dr = rest_layout.total_dim();
    let positions: Vec<usize> = targets
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<_>>()?;
    let rest_positions: Vec<usize> = rest_layout
        .labels()
        .map(|l| layout.position(l).unwrap())
        .collect();
    let strides = layout.strides();

    let mut target_offsets = alloc::vec![0usize; dt];
    for (t, off) in target_offsets.iter_mut().enumerate() {
        let parts = target_layout.decompose(t);
        *off = parts
            .iter()
            .zip(positions.iter())
            .map(|(p, pos)| p * strides[*pos])
            .sum();
    }
    let mut rest_offsets = alloc::vec![0usize; dr];
    for (r, off) in rest_offsets.iter_mut().enumerate() {
        let parts = rest_layout.decompose(r);
        *off = parts
            .iter()
            .zip(rest_positions.iter())
            .map(|(p, pos)| p * strides[*pos])
            .sum();
    }

    let amps = state.amplitudes();
    let mut out = amps.to_vec();
    let mut gathered = alloc::vec![Complex64::new(0.0, 0.0); dt];
    for roff in &rest_offsets {
        for (t, g) in gathered.iter_mut().enumerate() {
            *g = amps[roff + target_offsets[t]];
        }
        let transformed = u.matvec(&gathered)?;
        for (t, v) in transformed.iter().enumerate() {
            out[roff + target_offsets[t]] = *v;
        }
    }
    Ok(PureState::new_unchecked(out, layout.clone()))
}

/// One outcome of a computational-basis measurement.
#[derive(Debug, Clone)]
pub struct Branch {
    pub prob: f64,
    pub outcome: usize,
    pub post: PureState,
}

/// Probability of keeping a branch; smaller weights are dropped.
pub const BRANCH_PRUNE_TOL: f64 = 1e-14;

/// Exact branch decomposition of measuring `measured` in the computational
/// basis. Outcomes index the measured subsystems in layout order; post
/// states live on the reduced layout.
pub fn measure_branches(state: &PureState, measured: &[&str]) -> Result<Vec<Branch>> {
    let layout = state.layout();
    let measured_layout = layout.restricted_to(measured)?;
    let rest_layout = layout.without(measured)?;
    let dm = measured_layout.total_dim();
    let dr = rest_layout.total_dim();

    let measured_positions: Vec<usize> = measured_layout
        .labels()
        .map(|l| layout.position(l).unwrap())
        .collect();
    let rest_positions: Vec<usize> = rest_layout
        .labels()
        .map(|l| layout.position(l).unwrap())
        .collect();

    let mut branch_amps = alloc::vec![alloc::vec![Complex64::new(0.0, 0.0); dr]; dm];
    for (full, amp) in state.amplitudes().iter().enumerate() {
        if *amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let parts = layout.decompose(full);
        let m_idx = measured_layout.compose(
            &measured_positions
                .iter()
                .map(|&p| parts[p])
                .collect::<Vec<_>>(),
        );
        let r_idx = rest_layout.compose(
            &rest_positions
                .iter()
                .map(|&p| parts[p])
                .collect::<Vec<_>>(),
        );
        branch_amps[m_idx][r_idx] = *amp;
    }

    let mut branches = Vec::new();
    for (outcome, amps) in branch_amps.into_iter().enumerate() {
        let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if prob < BRANCH_PRUNE_TOL {
            continue;
        }
        let scale = 1.0 / prob.sqrt();
        let normalized: Vec<Complex64> = amps.iter().map(|a| a * scale).collect();
        branches.push(Branch {
            prob,
            outcome,
            post: PureState::new_unchecked(normalized, rest_layout.clone()),
        });
    }
    Ok(branches)
}

/// Draws one measurement outcome from the exact branch distribution.
pub fn sample_outcome<R: Rng + ?Sized>(
    state: &PureState,
    measured: &[&str],
    rng: &mut R,
) -> Result<(usize, PureState)> {
    let branches = measure_branches(state, measured)?;
    let total: f64 = branches.iter().map(|b| b.prob).sum();
    let mut draw = rng.gen::<f64>() * total;
    for branch in &branches {
        draw -= branch.prob;
        if draw <= 0.0 {
            return Ok((branch.outcome, branch.post.clone()));
        }
    }
    let last = branches.last().expect("at least one branch");
    Ok((last.outcome, last.post.clone()))
}
