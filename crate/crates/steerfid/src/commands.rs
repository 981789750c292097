//! The four experiment drivers behind the subcommands.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::{json, Value};
use steerfid_core::oracle::{fs_bruteforce, OracleConfig};
use steerfid_core::sdp::{benchmark1_detailed, benchmark2_detailed, bound_gap1, SdpSolution};
use steerfid_core::states::{build_state, default_ref_dim, NamedStateSpec};
use steerfid_core::vqsa::{run_vqsa, VqsaConfig};
use steerfid_core::DensityMatrix;

use crate::config::{self, FileConfig, Overrides};
use crate::fail::Failure;
use crate::output::{self, CircuitSpec};
use crate::state::resolve_partitions;

/// Comparisons tolerate this much optimizer and solver slack before the
/// ordering oracle ≤ benchmark is declared violated.
const ORDERING_TOL: f64 = 1e-4;

/// Everything a command needs after argument resolution.
pub struct Run {
    pub spec: NamedStateSpec,
    pub file: FileConfig,
    pub overrides: Overrides,
    pub out: PathBuf,
    pub k: Option<usize>,
}

impl Run {
    fn build(&self) -> Result<(DensityMatrix, Vec<Vec<String>>), Failure> {
        let rho = build_state(&self.spec)?;
        let partitions = resolve_partitions(self.file.partitions.as_deref(), rho.layout());
        if partitions.len() < 2 {
            return Err(Failure::config(
                "need at least two partitions; configure \"partitions\" with the groups to split",
            ));
        }
        Ok((rho, partitions))
    }

    fn resolve_k(&self) -> Result<usize, Failure> {
        self.k
            .or(self.file.k)
            .ok_or_else(|| Failure::config("the benchmark needs an extension level; pass --k"))
    }
}

fn as_groups(partitions: &[Vec<String>]) -> Vec<Vec<&str>> {
    partitions
        .iter()
        .map(|group| group.iter().map(String::as_str).collect())
        .collect()
}

fn as_views<'a>(groups: &'a [Vec<&'a str>]) -> Vec<&'a [&'a str]> {
    groups.iter().map(Vec::as_slice).collect()
}

fn bipartite<'a>(views: &'a [&'a [&'a str]]) -> Result<(&'a [&'a str], &'a [&'a str]), Failure> {
    if views.len() != 2 {
        return Err(Failure::config(format!(
            "this pipeline works on a bipartite split; configure exactly 2 partitions, got {}",
            views.len()
        )));
    }
    Ok((views[0], views[1]))
}

/// Serializes the winning parameters as one steering circuit plus one
/// conditional circuit per reference outcome and conditioned group, in the
/// same packing order the optimizer used.
fn circuits_value(
    rho: &DensityMatrix,
    partitions: &[Vec<String>],
    cfg: &VqsaConfig,
    best: &[f64],
) -> Result<Value, Failure> {
    let ref_dim = match cfg.ref_dim {
        Some(d) => d,
        None => default_ref_dim(rho)?,
    };
    let ref_qubits = ref_dim.trailing_zeros() as usize;
    let w_len = 2 * ref_qubits * cfg.layers_w;
    let steering = CircuitSpec {
        n_qubits: ref_qubits,
        layers: cfg.layers_w,
        entangling: true,
        params: best[..w_len].to_vec(),
    };

    let mut group_qubits = Vec::new();
    for group in &partitions[..partitions.len() - 1] {
        let labels: Vec<&str> = group.iter().map(String::as_str).collect();
        let dim = rho.layout().dim_of_set(&labels)?;
        group_qubits.push(dim.trailing_zeros() as usize);
    }
    let mut conditional = Vec::with_capacity(ref_dim);
    let mut offset = w_len;
    for _ in 0..ref_dim {
        let mut per_group = Vec::with_capacity(group_qubits.len());
        for &n in &group_qubits {
            let len = 2 * n * cfg.layers_u;
            per_group.push(CircuitSpec {
                n_qubits: n,
                layers: cfg.layers_u,
                entangling: true,
                params: best[offset..offset + len].to_vec(),
            });
            offset += len;
        }
        conditional.push(per_group);
    }
    Ok(json!({
        "steering": steering,
        "conditional": conditional,
    }))
}

pub fn cmd_estimate(run: &Run) -> Result<(), Failure> {
    let (rho, partitions) = run.build()?;
    let cfg = config::resolve_vqsa(run.file.vqsa.as_ref(), &run.overrides)?;
    let groups = as_groups(&partitions);
    let views = as_views(&groups);
    let trace = run_vqsa(&run.spec, &views, &cfg)?;

    output::ensure_dir(&run.out)?;
    output::write_trace_csv(&run.out.join("trace.csv"), &trace)?;
    let final_reward = trace.records.last().map(|r| r.reward);
    let summary = json!({
        "final": final_reward,
        "best": trace.best_reward,
        "config": output::vqsa_config_value(&cfg, &partitions),
        "seed": cfg.seed,
        "circuits": circuits_value(&rho, &partitions, &cfg, &trace.best_params)?,
    });
    output::write_json(&run.out.join("summary.json"), &summary)?;
    println!(
        "estimate: best reward {:.6} after {} iterations -> {}",
        trace.best_reward,
        trace.records.len(),
        run.out.display()
    );
    Ok(())
}

pub fn cmd_benchmark(run: &Run, pipeline: &str) -> Result<(), Failure> {
    let (rho, partitions) = run.build()?;
    let k = run.resolve_k()?;
    let groups = as_groups(&partitions);
    let views = as_views(&groups);
    let (a, b) = bipartite(&views)?;

    let (value, sol, bounds): (f64, SdpSolution, Value) = match pipeline {
        "benchmark1" => {
            let (value, sol) = benchmark1_detailed(&rho, a, b, k)?;
            let dim_b = rho.layout().dim_of_set(b)?;
            let (lower, upper) = bound_gap1(dim_b, k, value);
            (value, sol, json!({ "lower": lower, "upper": upper }))
        }
        "benchmark2" => {
            let (value, sol) = benchmark2_detailed(&rho, a, b, k)?;
            (value, sol, Value::Null)
        }
        other => return Err(Failure::config(format!("unknown pipeline {other:?}"))),
    };

    output::ensure_dir(&run.out)?;
    let result = json!({
        "pipeline": pipeline,
        "value": value,
        "k": k,
        "solver_status": output::status_word(sol.status),
        "residuals": output::residuals_out(&sol),
        "iterations": sol.iterations,
        "bounds": bounds,
    });
    output::write_json(&run.out.join("result.json"), &result)?;
    println!("{pipeline}: value {value:.6} at k={k} -> {}", run.out.display());
    Ok(())
}

pub fn cmd_oracle(run: &Run) -> Result<(), Failure> {
    let (rho, partitions) = run.build()?;
    let cfg = config::resolve_oracle(run.file.oracle.as_ref(), &run.overrides);
    let groups = as_groups(&partitions);
    let views = as_views(&groups);
    let value = fs_bruteforce(&rho, &views, &cfg)?;

    output::ensure_dir(&run.out)?;
    let result = json!({
        "value": value,
        "config": oracle_config_value(&cfg, &partitions),
    });
    output::write_json(&run.out.join("result.json"), &result)?;
    println!("oracle: value {value:.6} -> {}", run.out.display());
    Ok(())
}

fn oracle_config_value(cfg: &OracleConfig, partitions: &[Vec<String>]) -> Value {
    json!({
        "restarts": cfg.restarts,
        "inner_tol": cfg.inner_tol,
        "max_inner_iter": cfg.max_inner_iter,
        "decomposition_dim": cfg.decomposition_dim,
        "seed": cfg.seed,
        "partitions": partitions,
    })
}

/// Runs up to `cap` closures at a time, writing each result into its slot;
/// the output order is fixed by the task list, not the schedule.
fn run_capped<'a>(
    tasks: Vec<Box<dyn Fn() -> Result<f64, Failure> + Send + Sync + 'a>>,
    cap: usize,
) -> Vec<Result<f64, Failure>> {
    let workers = cap.min(tasks.len()).max(1);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<f64, Failure>>>> =
        tasks.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= tasks.len() {
                    break;
                }
                let outcome = tasks[idx]();
                *slots[idx].lock().unwrap() = Some(outcome);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("every task ran"))
        .collect()
}

pub fn cmd_compare(run: &Run) -> Result<(), Failure> {
    let (rho, partitions) = run.build()?;
    let k = run.k.or(run.file.k).unwrap_or(2);
    let oracle_cfg = config::resolve_oracle(run.file.oracle.as_ref(), &run.overrides);
    let vqsa_cfg = match &run.file.vqsa {
        Some(section) => Some(config::resolve_vqsa(Some(section), &run.overrides)?),
        None => None,
    };
    let groups = as_groups(&partitions);
    let views = as_views(&groups);
    let (a, b) = bipartite(&views)?;

    let mut tasks: Vec<Box<dyn Fn() -> Result<f64, Failure> + Send + Sync + '_>> = vec![
        Box::new(|| Ok(fs_bruteforce(&rho, &views, &oracle_cfg)?)),
        Box::new(|| Ok(benchmark1_detailed(&rho, a, b, k)?.0)),
        Box::new(|| Ok(benchmark2_detailed(&rho, a, b, k)?.0)),
    ];
    if let Some(cfg) = &vqsa_cfg {
        tasks.push(Box::new(|| Ok(run_vqsa(&run.spec, &views, cfg)?.best_reward)));
    }
    let cap = config::thread_cap()?.unwrap_or(tasks.len());
    let mut results = run_capped(tasks, cap).into_iter();
    let oracle = results.next().unwrap()?;
    let bench1 = results.next().unwrap()?;
    let bench2 = results.next().unwrap()?;
    let vqsa = results.next().transpose()?;

    let ordering_ok = oracle <= bench1 + ORDERING_TOL && oracle <= bench2 + ORDERING_TOL;
    output::ensure_dir(&run.out)?;
    let table = json!({
        "k": k,
        "oracle": oracle,
        "benchmark1": bench1,
        "benchmark2": bench2,
        "vqsa": vqsa,
        "tolerance": ORDERING_TOL,
        "ordering_ok": ordering_ok,
    });
    output::write_json(&run.out.join("comparison.json"), &table)?;

    println!("pipeline    value");
    println!("oracle      {oracle:.6}");
    println!("benchmark1  {bench1:.6}");
    println!("benchmark2  {bench2:.6}");
    if let Some(v) = vqsa {
        println!("vqsa        {v:.6}");
    }
    if !ordering_ok {
        return Err(Failure::Consistency(format!(
            "oracle value {oracle} exceeds a benchmark ({bench1}, {bench2}) beyond {ORDERING_TOL}; \
             one of the pipelines is wrong"
        )));
    }
    println!("ordering oracle <= benchmarks holds within {ORDERING_TOL}");
    Ok(())
}
