//! Output artifacts: trace CSV, summary and result JSON, and the circuit
//! spec serialization. Files carry no timestamps, so reruns of the same
//! configuration are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use steerfid_core::sdp::{SdpSolution, SdpStatus};
use steerfid_core::vqsa::{RewardKind, Shots, VqsaConfig, VqsaTrace};

use crate::fail::Failure;

/// One parameterized circuit with its angles, as stored on disk.
#[derive(Serialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub layers: usize,
    pub entangling: bool,
    pub params: Vec<f64>,
}

#[derive(Serialize)]
pub struct ResidualsOut {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

pub fn residuals_out(sol: &SdpSolution) -> ResidualsOut {
    ResidualsOut {
        primal: sol.residuals.primal,
        dual: sol.residuals.dual,
        gap: sol.residuals.gap,
    }
}

pub fn status_word(status: SdpStatus) -> &'static str {
    match status {
        SdpStatus::Optimal => "optimal",
        SdpStatus::MaxIter => "max_iter",
        SdpStatus::NumericalFailure => "numerical_failure",
    }
}

pub fn shots_value(shots: Shots) -> Value {
    match shots {
        Shots::Exact => json!("exact"),
        Shots::Count(n) => json!(n),
    }
}

pub fn reward_word(reward: RewardKind) -> &'static str {
    match reward {
        RewardKind::Global => "global",
        RewardKind::Local => "local",
    }
}

/// The `config` block echoed into summaries: the fully resolved settings a
/// rerun needs.
pub fn vqsa_config_value(cfg: &VqsaConfig, partitions: &[Vec<String>]) -> Value {
    json!({
        "layers_w": cfg.layers_w,
        "layers_u": cfg.layers_u,
        "shots": shots_value(cfg.shots),
        "iterations": cfg.iterations,
        "spsa": {
            "a": cfg.spsa.a,
            "c": cfg.spsa.c,
            "big_a": cfg.spsa.big_a,
            "alpha": cfg.spsa.alpha,
            "gamma": cfg.spsa.gamma,
        },
        "seed": cfg.seed,
        "reward": reward_word(cfg.reward),
        "ref_dim": cfg.ref_dim,
        "partitions": partitions,
    })
}

pub fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::config(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

pub fn write_trace_csv(path: &Path, trace: &VqsaTrace) -> Result<(), Failure> {
    let mut text = String::from("iteration,reward,best_reward\n");
    for record in &trace.records {
        let _ = writeln!(
            text,
            "{},{},{}",
            record.iteration, record.reward, record.best_reward
        );
    }
    fs::write(path, text)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}
