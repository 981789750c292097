//! Simultaneous-perturbation stochastic approximation with a reward trace.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::vqsa::VqsaConfig;

/// One optimizer iteration as seen from the outside: the reward estimate at
/// the current iterate, the running best, and a hash of the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub reward: f64,
    pub best_reward: f64,
    pub params_hash: u64,
}

/// Full optimization history plus the winning parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct VqsaTrace {
    pub records: Vec<TraceRecord>,
    pub best_reward: f64,
    pub best_params: Vec<f64>,
}

/// FNV-1a over the parameter bit patterns.
pub fn hash_params(params: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in params {
        for byte in p.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Minimizes a stochastic objective with two-sided simultaneous
/// perturbations and Rademacher directions.
///
/// The trace reports rewards, defined as the negated objective; its estimate
/// at iteration k is the mean of the two perturbed evaluations. When an
/// exact evaluator is supplied, the final iterate and the best estimated
/// iterate are re-scored exactly and the winner is returned.
pub fn spsa_minimize(
    objective: &mut dyn FnMut(&[f64], &mut ChaCha8Rng) -> Result<f64>,
    mut exact: Option<&mut dyn FnMut(&[f64]) -> Result<f64>>,
    theta0: &[f64],
    cfg: &VqsaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<VqsaTrace> {
    cfg.validate()?;
    let dim = theta0.len();
    let mut theta = theta0.to_vec();
    let mut records = Vec::with_capacity(cfg.iterations);
    let mut best_estimate = f64::INFINITY;
    let mut best_theta = theta.clone();

    let mut delta = alloc::vec![0.0f64; dim];
    let mut perturbed = alloc::vec![0.0f64; dim];
    for k in 0..cfg.iterations {
        let ck = cfg.spsa.c / ((k + 1) as f64).powf(cfg.spsa.gamma);
        let ak = cfg.spsa.a / (cfg.spsa.big_a + (k + 1) as f64).powf(cfg.spsa.alpha);
        for d in delta.iter_mut() {
            *d = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        }

        for (p, (t, d)) in perturbed.iter_mut().zip(theta.iter().zip(delta.iter())) {
            *p = t + ck * d;
        }
        let f_plus = objective(&perturbed, rng)?;
        for (p, (t, d)) in perturbed.iter_mut().zip(theta.iter().zip(delta.iter())) {
            *p = t - ck * d;
        }
        let f_minus = objective(&perturbed, rng)?;

        let estimate = 0.5 * (f_plus + f_minus);
        if estimate < best_estimate {
            best_estimate = estimate;
            best_theta.copy_from_slice(&theta);
        }
        let record = TraceRecord {
            iteration: k,
            reward: -estimate,
            best_reward: -best_estimate,
            params_hash: hash_params(&theta),
        };
        records.push(record);

        let scale = (f_plus - f_minus) / (2.0 * ck);
        for (t, d) in theta.iter_mut().zip(delta.iter()) {
            *t -= ak * scale / d;
        }
    }

    let (best_reward, best_params) = match exact.as_mut() {
        Some(eval) => {
            let at_final = eval(&theta)?;
            let at_best = eval(&best_theta)?;
            if at_final <= at_best {
                (-at_final, theta)
            } else {
                (-at_best, best_theta)
            }
        }
        None => (-best_estimate, best_theta),
    };
    Ok(VqsaTrace {
        records,
        best_reward,
        best_params,
    })
}
