//! The variational steering pipeline: reward estimation, SPSA optimization,
//! and direct acceptance-probability checks for measure-and-prepare
//! channels.

mod eb;
mod reward;
mod spsa;

pub use eb::{
    eb_acceptance, eb_acceptance_detailed, eb_from_decomposition, random_eb_spec, EbAcceptance,
    EbChannelSpec, EB_ROUTE_TOL,
};
pub use reward::{global_reward, local_reward, pure_state_test, Split};
pub use spsa::{hash_params, spsa_minimize, TraceRecord, VqsaTrace};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuits::ParamCircuit;
use crate::error::{Error, Result};
use crate::oracle::validate_partitions;
use crate::states::{build_state, NamedStateSpec};

/// Reward evaluation mode: exact branch enumeration or a finite shot budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Count(usize),
}

/// Which acceptance observable drives the optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardKind {
    /// All conditioned qubits must read zero.
    Global,
    /// One uniformly chosen conditioned qubit must read zero.
    Local,
}

/// Gain schedule for the stochastic optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpsaGains {
    pub a: f64,
    pub c: f64,
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl SpsaGains {
    /// Standard schedule with the stability offset set to a tenth of the
    /// iteration budget.
    pub fn for_iterations(iterations: usize) -> Self {
        SpsaGains {
            a: 0.2,
            c: 0.1,
            big_a: iterations as f64 / 10.0,
            alpha: 0.602,
            gamma: 0.101,
        }
    }
}

/// Settings for a full variational run.
#[derive(Debug, Clone, PartialEq)]
pub struct VqsaConfig {
    pub layers_w: usize,
    pub layers_u: usize,
    pub shots: Shots,
    pub iterations: usize,
    pub spsa: SpsaGains,
    pub seed: u64,
    pub reward: RewardKind,
    /// Purifying reference dimension; `None` selects the smallest power of
    /// two holding the input's rank.
    pub ref_dim: Option<usize>,
}

impl Default for VqsaConfig {
    fn default() -> Self {
        VqsaConfig {
            layers_w: 2,
            layers_u: 2,
            shots: Shots::Count(1024),
            iterations: 300,
            spsa: SpsaGains::for_iterations(300),
            seed: 0,
            reward: RewardKind::Global,
            ref_dim: None,
        }
    }
}

impl VqsaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers_w == 0 || self.layers_u == 0 {
            return Err(Error::InvalidConfig(String::from(
                "circuit layer counts must be positive",
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig(String::from(
                "need at least one iteration",
            )));
        }
        if let Shots::Count(0) = self.shots {
            return Err(Error::InvalidConfig(String::from(
                "need at least one shot",
            )));
        }
        if self.ref_dim == Some(0) {
            return Err(Error::InvalidConfig(String::from(
                "reference dimension must be positive",
            )));
        }
        let g = &self.spsa;
        if g.a <= 0.0 || g.c <= 0.0 || g.big_a < 0.0 || g.alpha <= 0.0 || g.gamma <= 0.0 {
            return Err(Error::InvalidConfig(String::from(
                "optimizer gains must be positive",
            )));
        }
        Ok(())
    }
}

/// Runs the full pipeline on a named state: purify, steer, condition, and
/// optimize all circuit parameters jointly.
///
/// Every partition except the last receives a conditional circuit; the
/// reward is the acceptance probability of reading zeros across those
/// partitions. The joint parameter vector holds the steering parameters
/// followed by one conditional block per reference outcome.
pub fn run_vqsa(
    spec: &NamedStateSpec,
    partitions: &[&[&str]],
    cfg: &VqsaConfig,
) -> Result<VqsaTrace> {
    cfg.validate()?;
    let rho = build_state(spec)?;
    validate_partitions(rho.layout(), partitions)?;

    let mut reference = String::from("R");
    while rho.layout().position(&reference).is_ok() {
        reference.push('_');
    }
    let ref_dim = reward::resolve_ref_dim(cfg, &rho)?;
    let w_len = ParamCircuit::new(ref_dim.trailing_zeros() as usize, cfg.layers_w, true)
        .param_count();

    let conditioned = &partitions[..partitions.len() - 1];
    let mut group_lens = Vec::with_capacity(conditioned.len());
    for group in conditioned {
        let dim = rho.layout().dim_of_set(group)?;
        if !dim.is_power_of_two() {
            return Err(Error::BadLayout(format!(
                "conditioned partitions must have power-of-two dimension, got {dim}"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        group_lens.push(ParamCircuit::new(n, cfg.layers_u, true).param_count());
    }
    let per_outcome: usize = group_lens.iter().sum();
    let n_params = w_len + ref_dim * per_outcome;

    let unpack = |theta: &[f64], outcome: usize| -> Vec<Vec<f64>> {
        let mut offset = w_len + outcome * per_outcome;
        group_lens
            .iter()
            .map(|len| {
                let slice = theta[offset..offset + len].to_vec();
                offset += len;
                slice
            })
            .collect()
    };
    let evaluate = |theta: &[f64], shots: &Shots, rng: &mut ChaCha8Rng| -> Result<f64> {
        let branches = reward::steered_branches(
            &rho,
            &reference,
            ref_dim,
            cfg.layers_w,
            &theta[..w_len],
        )?;
        reward::conditioned_reward(
            &branches,
            conditioned,
            cfg.layers_u,
            &mut |outcome| Ok(unpack(theta, outcome)),
            shots,
            cfg.reward,
            rng,
        )
    };

    let mut objective =
        |theta: &[f64], rng: &mut ChaCha8Rng| Ok(-evaluate(theta, &cfg.shots, rng)?);
    let mut exact_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut exact = |theta: &[f64]| Ok(-evaluate(theta, &Shots::Exact, &mut exact_rng)?);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let theta0: Vec<f64> = (0..n_params)
        .map(|_| rand::Rng::gen::<f64>(&mut rng) * 2.0 * core::f64::consts::PI)
        .collect();
    spsa_minimize(&mut objective, Some(&mut exact), &theta0, cfg, &mut rng)
}
