//! Named test states, purification, and the single-qubit depolarizing
//! channel.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuits::{hea_unitary, ParamCircuit};
use crate::error::{Error, Result};
use crate::qcore::layout::Layout;
use crate::qcore::matrix::Matrix;
use crate::qcore::ops::{partial_trace, permute_subsystems};
use crate::qcore::state::{DensityMatrix, PureState};

/// Eigenvalues at or below this weight do not count toward the rank used for
/// purification capacity.
pub const PURIFY_RANK_TOL: f64 = 1e-12;

/// Recipe for a concrete input state.
#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    /// Mixture of the Bell states, ordered Φ⁺, Φ⁻, Ψ⁺, Ψ⁻; trailing weights
    /// may be omitted.
    BellMixture(Vec<f64>),
    /// n-qubit Greenberger-Horne-Zeilinger state.
    Ghz(usize),
    /// Four-qubit GHZ with the depolarizing channel applied to each of the
    /// first two qubits.
    DepolarizedGhz4(f64),
    /// Pure state prepared by the hardware-efficient ansatz at uniformly
    /// random angles drawn from a seeded generator.
    HeaRandom {
        seed: u64,
        layers: usize,
        entangling: bool,
    },
    /// A density matrix given directly.
    Explicit(Matrix),
}

/// A named state together with the subsystem layout it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedStateSpec {
    pub kind: StateKind,
    pub layout: Layout,
}

impl NamedStateSpec {
    pub fn new(kind: StateKind, layout: Layout) -> Self {
        NamedStateSpec { kind, layout }
    }
}

fn bell_vector(which: usize) -> Vec<Complex64> {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let zero = Complex64::new(0.0, 0.0);
    let plus = Complex64::new(s, 0.0);
    let minus = Complex64::new(-s, 0.0);
    match which {
        0 => alloc::vec![plus, zero, zero, plus],
        1 => alloc::vec![plus, zero, zero, minus],
        2 => alloc::vec![zero, plus, plus, zero],
        _ => alloc::vec![zero, plus, minus, zero],
    }
}

fn check_qubits(layout: &Layout, expected: usize) -> Result<()> {
    if layout.len() != expected || layout.entries().iter().any(|(_, d)| *d != 2) {
        return Err(Error::BadLayout(format!(
            "expected {expected} qubit subsystems, got layout {:?}",
            layout.entries()
        )));
    }
    Ok(())
}

fn ghz_vector(n: usize) -> Vec<Complex64> {
    let d = 1usize << n;
    let mut amps = alloc::vec![Complex64::new(0.0, 0.0); d];
    let s = core::f64::consts::FRAC_1_SQRT_2;
    amps[0] = Complex64::new(s, 0.0);
    amps[d - 1] = Complex64::new(s, 0.0);
    amps
}

/// Materializes the spec into a validated density matrix.
pub fn build_state(spec: &NamedStateSpec) -> Result<DensityMatrix> {
    match &spec.kind {
        StateKind::BellMixture(weights) => {
            check_qubits(&spec.layout, 2)?;
            if weights.is_empty() || weights.len() > 4 {
                return Err(Error::InvalidConfig(format!(
                    "bell mixture takes 1 to 4 weights, got {}",
                    weights.len()
                )));
            }
            let sum: f64 = weights.iter().sum();
            if weights.iter().any(|w| *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!(
                    "bell mixture weights must be a probability distribution, sum = {sum}"
                )));
            }
            let mut m = Matrix::zeros(4, 4);
            for (which, w) in weights.iter().enumerate() {
                let v = bell_vector(which);
                for i in 0..4 {
                    for j in 0..4 {
                        m.add_at(i, j, v[i] * v[j].conj() * *w);
                    }
                }
            }
            DensityMatrix::new(m, spec.layout.clone())
        }
        StateKind::Ghz(n) => {
            if *n < 2 {
                return Err(Error::InvalidConfig(format!(
                    "ghz needs at least 2 parties, got {n}"
                )));
            }
            check_qubits(&spec.layout, *n)?;
            let psi = PureState::new(ghz_vector(*n), spec.layout.clone())?;
            Ok(psi.to_density())
        }
        StateKind::DepolarizedGhz4(p) => {
            if spec.layout.total_dim() != 16 {
                return Err(Error::BadLayout(format!(
                    "depolarized 4-qubit GHZ needs total dimension 16, layout has {}",
                    spec.layout.total_dim()
                )));
            }
            let qubits = Layout::new(&[("q0", 2), ("q1", 2), ("q2", 2), ("q3", 2)])?;
            let ghz = PureState::new(ghz_vector(4), qubits).unwrap().to_density();
            let step = depolarize(&ghz, "q0", *p)?;
            let out = depolarize(&step, "q1", *p)?;
            DensityMatrix::new(out.into_parts().0, spec.layout.clone())
        }
        StateKind::HeaRandom {
            seed,
            layers,
            entangling,
        } => {
            let d = spec.layout.total_dim();
            if !d.is_power_of_two() {
                return Err(Error::BadLayout(format!(
                    "ansatz states need a power-of-two total dimension, got {d}"
                )));
            }
            let n_qubits = d.trailing_zeros() as usize;
            let circ = ParamCircuit::new(n_qubits, *layers, *entangling);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let params: Vec<f64> = (0..circ.param_count())
                .map(|_| rng.gen::<f64>() * 2.0 * core::f64::consts::PI)
                .collect();
            let u = hea_unitary(&circ, &params)?;
            let amps: Vec<Complex64> = (0..d).map(|i| u.get(i, 0)).collect();
            Ok(PureState::new(amps, spec.layout.clone())?.to_density())
        }
        StateKind::Explicit(m) => DensityMatrix::new(m.clone(), spec.layout.clone()),
    }
}

/// Smallest power of two that can hold a purification of `rho`, by rank.
pub fn default_ref_dim(rho: &DensityMatrix) -> Result<usize> {
    let rank = rho.rank(PURIFY_RANK_TOL)?;
    Ok(rank.max(1).next_power_of_two())
}

/// Purifies `rho` onto layout `[ref_label] ++ rho.layout`, writing Schmidt
/// terms in descending eigenvalue order.
pub fn purify(rho: &DensityMatrix, ref_label: &str, ref_dim: usize) -> Result<PureState> {
    if ref_dim == 0 {
        return Err(Error::InvalidConfig(String::from(
            "purifying dimension must be positive",
        )));
    }
    let decomp = crate::qcore::eigh::eigh(rho.matrix())?;
    let rank = decomp
        .values
        .iter()
        .filter(|v| **v > PURIFY_RANK_TOL)
        .count();
    if ref_dim < rank {
        return Err(Error::InvalidConfig(format!(
            "purifying dimension {ref_dim} cannot hold a state of rank {rank}"
        )));
    }
    let mut subs = Vec::with_capacity(rho.layout().len() + 1);
    subs.push((String::from(ref_label), ref_dim));
    subs.extend(rho.layout().entries().iter().cloned());
    let layout = Layout::from_owned(subs)?;

    let d = rho.dim();
    let mut amps = alloc::vec![Complex64::new(0.0, 0.0); ref_dim * d];
    for i in 0..rank {
        let coeff = decomp.values[i].max(0.0).sqrt();
        for j in 0..d {
            amps[i * d + j] = decomp.vectors.get(j, i) * coeff;
        }
    }
    Ok(PureState::new_unchecked(amps, layout))
}

/// Applies the depolarizing channel with strength `p` to one qubit
/// subsystem: the qubit is replaced by the maximally mixed state with
/// probability `p` and left alone otherwise.
pub fn depolarize(rho: &DensityMatrix, target: &str, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!(
            "depolarizing strength must lie in [0, 1], got {p}"
        )));
    }
    let layout = rho.layout();
    if layout.dim_of(target)? != 2 {
        return Err(Error::BadLayout(format!(
            "depolarizing channel acts on qubits, subsystem {target} has dimension {}",
            layout.dim_of(target)?
        )));
    }
    let rest_labels: Vec<&str> = layout.labels().filter(|l| *l != target).collect();
    let reduced = partial_trace(rho.matrix(), layout, &rest_labels)?;
    let half_identity = Matrix::identity(2).scale_real(0.5);
    let replaced = half_identity.kron(&reduced);
    let replaced_layout = layout.restricted_to(&[target])?.concat(&layout.without(&[target])?)?;
    let original_order: Vec<&str> = layout.labels().collect();
    let (replaced_ordered, _) = permute_subsystems(&replaced, &replaced_layout, &original_order)?;
    let mixed = rho
        .matrix()
        .scale_real(1.0 - p)
        .add(&replaced_ordered.scale_real(p))?;
    DensityMatrix::new(mixed, layout.clone())
}
