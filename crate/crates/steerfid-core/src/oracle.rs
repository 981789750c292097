//! Brute-force lower bounds on the fidelity of separability, used as ground
//! truth for the variational and semidefinite pipelines.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuits::{apply_to_subsystem, measure_branches};
use crate::error::{Error, Result};
use crate::qcore::eigh::eigvalsh;
use crate::qcore::layout::Layout;
use crate::qcore::matrix::Matrix;
use crate::qcore::ops::partial_trace;
use crate::qcore::state::{DensityMatrix, PureState};
use crate::randu::random_unit_vector;
use crate::states::{purify, PURIFY_RANK_TOL};

/// Largest total dimension the brute-force search accepts.
pub const MAX_ORACLE_DIM: usize = 16;

/// Tuning knobs for the restart-based searches.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub restarts: usize,
    pub inner_tol: f64,
    pub max_inner_iter: usize,
    /// Outcome-space dimension of the decomposing unitary; `None` selects
    /// the squared rank of the input.
    pub decomposition_dim: Option<usize>,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            restarts: 40,
            inner_tol: 1e-10,
            max_inner_iter: 200,
            decomposition_dim: None,
            seed: 0,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig(String::from(
                "oracle needs at least one restart",
            )));
        }
        if self.decomposition_dim == Some(0) {
            return Err(Error::InvalidConfig(String::from(
                "decomposition dimension must be positive",
            )));
        }
        Ok(())
    }
}

pub(crate) fn validate_partitions(layout: &Layout, partitions: &[&[&str]]) -> Result<()> {
    if partitions.len() < 2 {
        return Err(Error::BadLayout(format!(
            "need at least two partitions, got {}",
            partitions.len()
        )));
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for group in partitions {
        if group.is_empty() {
            return Err(Error::BadLayout(String::from("empty partition group")));
        }
        for label in *group {
            layout.position(label)?;
            if !seen.insert(label) {
                return Err(Error::BadLayout(format!(
                    "label {label} appears in more than one partition"
                )));
            }
        }
    }
    if seen.len() != layout.len() {
        return Err(Error::BadLayout(String::from(
            "partitions must cover every subsystem",
        )));
    }
    Ok(())
}

/// Fidelity of separability of a pure state across the given partitions,
/// with default search settings.
pub fn fs_pure(psi: &PureState, partitions: &[&[&str]]) -> Result<f64> {
    fs_pure_with(psi, partitions, &OracleConfig::default())
}

/// Fidelity of separability of a pure state across the given partitions.
///
/// Two partitions reduce to the spectral norm of a reduced state and are
/// exact; more partitions run a multi-restart alternating ascent over
/// product vectors and report the best overlap found.
pub fn fs_pure_with(psi: &PureState, partitions: &[&[&str]], cfg: &OracleConfig) -> Result<f64> {
    cfg.validate()?;
    validate_partitions(psi.layout(), partitions)?;
    if partitions.len() == 2 {
        let reduced = partial_trace(psi.to_density().matrix(), psi.layout(), partitions[0])?;
        let eigs = eigvalsh(&reduced)?;
        return Ok(eigs[0].clamp(0.0, 1.0));
    }

    let flat_order: Vec<&str> = partitions.iter().flat_map(|g| g.iter().copied()).collect();
    let (amps, flat_layout) =
        crate::qcore::ops::permute_vector(psi.amplitudes(), psi.layout(), &flat_order)?;
    let mut dims = Vec::with_capacity(partitions.len());
    for group in partitions {
        dims.push(flat_layout.dim_of_set(group)?);
    }

    let mut best = 0.0f64;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64);
        let value = product_overlap_ascent(&amps, &dims, cfg, &mut rng);
        best = best.max(value);
    }
    Ok(best.clamp(0.0, 1.0))
}

/// Alternating ascent over one product vector per party; monotone in the
/// squared overlap.
fn product_overlap_ascent(
    amps: &[Complex64],
    dims: &[usize],
    cfg: &OracleConfig,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let n_parties = dims.len();
    let mut parts_buf = alloc::vec![0usize; n_parties];
    let mut vectors: Vec<Vec<Complex64>> = dims
        .iter()
        .map(|&d| random_unit_vector(d, rng))
        .collect();
    let mut value = 0.0f64;
    for _ in 0..cfg.max_inner_iter {
        let previous = value;
        for target in 0..n_parties {
            let mut conditioned = alloc::vec![Complex64::new(0.0, 0.0); dims[target]];
            for (full, amp) in amps.iter().enumerate() {
                if *amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut rem = full;
                for (j, &d) in dims.iter().enumerate().rev() {
                    parts_buf[j] = rem % d;
                    rem /= d;
                }
                let mut weight = *amp;
                for (j, v) in vectors.iter().enumerate() {
                    if j != target {
                        weight *= v[parts_buf[j]].conj();
                    }
                }
                conditioned[parts_buf[target]] += weight;
            }
            let norm_sq: f64 = conditioned.iter().map(|c| c.norm_sqr()).sum();
            if norm_sq < 1e-24 {
                vectors[target] = random_unit_vector(dims[target], rng);
                continue;
            }
            let norm = norm_sq.sqrt();
            for (slot, c) in vectors[target].iter_mut().zip(conditioned.iter()) {
                *slot = c / norm;
            }
            value = norm_sq;
        }
        if value - previous < cfg.inner_tol {
            break;
        }
    }
    value
}

/// Unitary from a chain of two-parameter Givens rotations over all index
/// pairs; spans the unitary group up to a right diagonal-phase factor, which
/// the decomposition objective cannot see.
fn givens_unitary(d: usize, params: &[f64]) -> Matrix {
    let mut u = Matrix::identity(d);
    let mut idx = 0;
    for p in 0..d {
        for q in (p + 1)..d {
            let theta = params[idx];
            let phi = params[idx + 1];
            idx += 2;
            let (s, c) = theta.sin_cos();
            let e_pos = Complex64::new(0.0, phi).exp();
            let e_neg = Complex64::new(0.0, -phi).exp();
            for col in 0..d {
                let up = u.get(p, col);
                let uq = u.get(q, col);
                u.set(p, col, up * c - uq * (e_pos * s));
                u.set(q, col, up * (e_neg * s) + uq * c);
            }
        }
    }
    u
}

fn decomposition_objective(
    psi: &PureState,
    ref_label: &str,
    w: &Matrix,
    partitions: &[&[&str]],
    branch_cfg: &OracleConfig,
) -> Result<f64> {
    let steered = apply_to_subsystem(psi, w, &[ref_label])?;
    let branches = measure_branches(&steered, &[ref_label])?;
    let mut total = 0.0;
    for branch in &branches {
        total += branch.prob * fs_pure_with(&branch.post, partitions, branch_cfg)?;
    }
    Ok(total)
}

/// Lower bound on the fidelity of separability of a mixed state, from a
/// multi-restart coordinate search over pure-state decompositions.
///
/// Decompositions are parameterized by a unitary on a purifying reference of
/// dimension `cfg.decomposition_dim`; each unitary is scored by the weighted
/// fidelity of separability of the steered branches. The returned value is
/// the best decomposition found, never an upper bound.
pub fn fs_bruteforce(
    rho: &DensityMatrix,
    partitions: &[&[&str]],
    cfg: &OracleConfig,
) -> Result<f64> {
    Ok(fs_bruteforce_detailed(rho, partitions, cfg)?.0)
}

/// Same search as [`fs_bruteforce`], also returning the decomposing unitary
/// that achieved the best value.
pub fn fs_bruteforce_detailed(
    rho: &DensityMatrix,
    partitions: &[&[&str]],
    cfg: &OracleConfig,
) -> Result<(f64, Matrix)> {
    cfg.validate()?;
    validate_partitions(rho.layout(), partitions)?;
    if rho.dim() > MAX_ORACLE_DIM {
        return Err(Error::TooLarge(format!(
            "brute-force search handles dimension at most {MAX_ORACLE_DIM}, state has {}",
            rho.dim()
        )));
    }
    let rank = rho.rank(PURIFY_RANK_TOL)?;
    let dec_dim = cfg.decomposition_dim.unwrap_or(rank * rank).max(1);

    let mut ref_label = String::from("ref");
    while rho.layout().position(&ref_label).is_ok() {
        ref_label.push('_');
    }
    let psi = purify(rho, &ref_label, dec_dim)?;

    let branch_cfg = OracleConfig {
        restarts: 3,
        ..cfg.clone()
    };
    let n_params = dec_dim * (dec_dim - 1);
    let objective = |params: &[f64]| -> Result<f64> {
        decomposition_objective(
            &psi,
            &ref_label,
            &givens_unitary(dec_dim, params),
            partitions,
            &branch_cfg,
        )
    };

    let mut best_params = alloc::vec![0.0; n_params];
    let mut best = objective(&best_params)?;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(0x6f72 + restart as u64);
        let mut params: Vec<f64> = if restart == 0 {
            alloc::vec![0.0; n_params]
        } else {
            (0..n_params)
                .map(|_| rng.gen::<f64>() * 2.0 * core::f64::consts::PI)
                .collect()
        };
        let mut value = objective(&params)?;
        let mut step = 0.4;
        let mut sweeps = 0;
        while step > 1e-4 && sweeps < 400 {
            sweeps += 1;
            let mut improved = false;
            for i in 0..n_params {
                for delta in [step, -step] {
                    let old = params[i];
                    params[i] = old + delta;
                    let trial = objective(&params)?;
                    if trial > value + 1e-12 {
                        value = trial;
                        improved = true;
                        break;
                    }
                    params[i] = old;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if value > best {
            best = value;
            best_params = params;
        }
    }

    let decomposer = givens_unitary(dec_dim, &best_params);
    let full = decomposition_objective(&psi, &ref_label, &decomposer, partitions, cfg)?;
    Ok((best.max(full).clamp(0.0, 1.0), decomposer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{hea_unitary, ParamCircuit};
    use crate::qcore::matrix::vec_inner;
    use crate::qcore::ops::tensor;
    use crate::states::{build_state, NamedStateSpec, StateKind};

    fn bell_mixture() -> DensityMatrix {
        let layout = Layout::new(&[("A", 2), ("B", 2)]).unwrap();
        build_state(&NamedStateSpec::new(
            StateKind::BellMixture(alloc::vec![0.75, 0.25]),
            layout,
        ))
        .unwrap()
    }

    #[test]
    fn bell_state_halves() {
        let layout = Layout::new(&[("A", 2), ("B", 2)]).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let psi = PureState::new(
            alloc::vec![
                Complex64::new(s, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(s, 0.0),
            ],
            layout,
        )
        .unwrap();
        let val = fs_pure(&psi, &[&["A"], &["B"]]).unwrap();
        assert!((val - 0.5).abs() < 1e-12);
    }

    #[test]
    fn product_states_have_unit_value() {
        let layout = Layout::new(&[("a", 2), ("b", 2), ("c", 2)]).unwrap();
        let psi = PureState::basis(layout, 5);
        assert!((fs_pure(&psi, &[&["a"], &["b", "c"]]).unwrap() - 1.0).abs() < 1e-9);
        let cfg = OracleConfig {
            restarts: 10,
            ..OracleConfig::default()
        };
        assert!((fs_pure_with(&psi, &[&["a"], &["b"], &["c"]], &cfg).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ghz3_reaches_one_half() {
        let layout = Layout::new(&[("a", 2), ("b", 2), ("c", 2)]).unwrap();
        let rho = build_state(&NamedStateSpec::new(StateKind::Ghz(3), layout.clone())).unwrap();
        let decomp = crate::qcore::eigh::eigh(rho.matrix()).unwrap();
        let amps: Vec<Complex64> = (0..8).map(|i| decomp.vectors.get(i, 0)).collect();
        let psi = PureState::new(amps, layout).unwrap();

        let cfg = OracleConfig {
            restarts: 50,
            ..OracleConfig::default()
        };
        let val = fs_pure_with(&psi, &[&["a"], &["b"], &["c"]], &cfg).unwrap();
        assert!((val - 0.5).abs() < 1e-6, "ascent value {val}");

        // Independent coarse check: real product vectors on a 3-degree grid
        // never beat the ascent and come close to it.
        let steps = 60usize;
        let mut grid_best = 0.0f64;
        for i in 0..steps {
            let a = core::f64::consts::PI * i as f64 / steps as f64;
            for j in 0..steps {
                let b = core::f64::consts::PI * j as f64 / steps as f64;
                for k in 0..steps {
                    let c = core::f64::consts::PI * k as f64 / steps as f64;
                    let overlap = (a.cos() * b.cos() * c.cos() + a.sin() * b.sin() * c.sin())
                        * core::f64::consts::FRAC_1_SQRT_2;
                    grid_best = grid_best.max(overlap * overlap);
                }
            }
        }
        assert!(grid_best <= val + 1e-9);
        assert!(val - grid_best < 1e-2);
    }

    #[test]
    fn classical_two_qubit_mixture_is_separable() {
        let mut m = Matrix::zeros(4, 4);
        m.set(0, 0, Complex64::new(0.5, 0.0));
        m.set(3, 3, Complex64::new(0.5, 0.0));
        let rho =
            DensityMatrix::new(m, Layout::new(&[("A", 2), ("B", 2)]).unwrap()).unwrap();
        let cfg = OracleConfig {
            restarts: 5,
            ..OracleConfig::default()
        };
        let val = fs_bruteforce(&rho, &[&["A"], &["B"]], &cfg).unwrap();
        assert!((val - 1.0).abs() < 1e-6, "value {val}");
    }

    #[test]
    fn pure_input_matches_fs_pure() {
        let layout = Layout::new(&[("A", 2), ("B", 2)]).unwrap();
        let spec = NamedStateSpec::new(
            StateKind::HeaRandom {
                seed: 4,
                layers: 2,
                entangling: true,
            },
            layout.clone(),
        );
        let rho = build_state(&spec).unwrap();
        let decomp = crate::qcore::eigh::eigh(rho.matrix()).unwrap();
        let amps: Vec<Complex64> = (0..4).map(|i| decomp.vectors.get(i, 0)).collect();
        let psi = PureState::new(amps, layout).unwrap();

        let direct = fs_pure(&psi, &[&["A"], &["B"]]).unwrap();
        let cfg = OracleConfig {
            restarts: 2,
            ..OracleConfig::default()
        };
        let roof = fs_bruteforce(&rho, &[&["A"], &["B"]], &cfg).unwrap();
        assert!((roof - direct).abs() < 1e-8);
    }

    #[test]
    fn bell_mixture_reaches_known_optimum() {
        let rho = bell_mixture();
        let val = fs_bruteforce(&rho, &[&["A"], &["B"]], &OracleConfig::default()).unwrap();
        let expected = 0.5 + (3.0f64).sqrt() / 4.0;
        assert!((val - expected).abs() < 0.005, "value {val}");
        assert!(val <= expected + 1e-9, "lower bound exceeded: {val}");
    }

    #[test]
    fn invariant_under_local_unitaries() {
        let rho = bell_mixture();
        let cfg = OracleConfig {
            restarts: 20,
            ..OracleConfig::default()
        };
        let base = fs_bruteforce(&rho, &[&["A"], &["B"]], &cfg).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let circ = ParamCircuit::new(1, 2, false);
        let mk = |rng: &mut ChaCha8Rng| {
            let params: Vec<f64> = (0..circ.param_count())
                .map(|_| rng.gen::<f64>() * 2.0 * core::f64::consts::PI)
                .collect();
            hea_unitary(&circ, &params).unwrap()
        };
        let local = tensor(&mk(&mut rng), &mk(&mut rng));
        let rotated = local
            .matmul(rho.matrix())
            .unwrap()
            .matmul(&local.dagger())
            .unwrap();
        let rotated = DensityMatrix::new(rotated, rho.layout().clone()).unwrap();
        let moved = fs_bruteforce(&rotated, &[&["A"], &["B"]], &cfg).unwrap();
        assert!((base - moved).abs() < 2e-3, "base {base}, moved {moved}");
    }

    #[test]
    fn ascent_dominates_explicit_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let layout = Layout::new(&[("a", 2), ("b", 2), ("c", 2)]).unwrap();
        let psi = PureState::new(random_unit_vector(8, &mut rng), layout).unwrap();
        let cfg = OracleConfig {
            restarts: 12,
            ..OracleConfig::default()
        };
        let val = fs_pure_with(&psi, &[&["a"], &["b"], &["c"]], &cfg).unwrap();
        for _ in 0..20 {
            let witness_parts: Vec<Vec<Complex64>> =
                (0..3).map(|_| random_unit_vector(2, &mut rng)).collect();
            let mut witness = alloc::vec![Complex64::new(0.0, 0.0); 8];
            for (i, w) in witness.iter_mut().enumerate() {
                *w = witness_parts[0][(i >> 2) & 1]
                    * witness_parts[1][(i >> 1) & 1]
                    * witness_parts[2][i & 1];
            }
            let overlap = vec_inner(&witness, psi.amplitudes()).norm_sqr();
            assert!(val + 1e-9 >= overlap);
        }
    }

    #[test]
    fn search_is_deterministic() {
        let rho = bell_mixture();
        let cfg = OracleConfig {
            restarts: 6,
            ..OracleConfig::default()
        };
        let a = fs_bruteforce(&rho, &[&["A"], &["B"]], &cfg).unwrap();
        let b = fs_bruteforce(&rho, &[&["A"], &["B"]], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_oversized_states() {
        let layout = Layout::new(&[("A", 8), ("B", 4)]).unwrap();
        let rho = DensityMatrix::new(
            Matrix::identity(32).scale_real(1.0 / 32.0),
            layout,
        )
        .unwrap();
        assert!(matches!(
            fs_bruteforce(&rho, &[&["A"], &["B"]], &OracleConfig::default()),
            Err(Error::TooLarge(_))
        ));
    }
}
