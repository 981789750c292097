//! State input handling: JSON files with explicit matrices, or named
//! constructors like `bell_mixture(0.75,0.25)`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use steerfid_core::states::{NamedStateSpec, StateKind};
use steerfid_core::{Layout, Matrix};

use crate::fail::Failure;

/// On-disk state format: a subsystem layout and a dense complex matrix with
/// `[re, im]` entry pairs.
#[derive(Deserialize)]
struct StateFile {
    layout: Vec<(String, usize)>,
    matrix: Vec<Vec<[f64; 2]>>,
}

/// Resolves the `--state` argument: an existing file is parsed as state
/// JSON, anything else as a named constructor.
pub fn resolve_state(arg: &str) -> Result<NamedStateSpec, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        return load_state_file(path);
    }
    parse_named(arg)
}

fn load_state_file(path: &Path) -> Result<NamedStateSpec, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let file: StateFile = serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("{} is not valid state JSON: {e}", path.display())))?;
    if file.layout.is_empty() {
        return Err(Failure::config(format!(
            "{}: the layout lists no subsystems",
            path.display()
        )));
    }
    let layout = Layout::from_owned(file.layout).map_err(Failure::from)?;
    let dim = layout.total_dim();
    if file.matrix.len() != dim {
        return Err(Failure::config(format!(
            "{}: layout dimension {dim} but the matrix has {} rows",
            path.display(),
            file.matrix.len()
        )));
    }
    for (i, row) in file.matrix.iter().enumerate() {
        if row.len() != dim {
            return Err(Failure::config(format!(
                "{}: matrix row {i} has {} entries, expected {dim}",
                path.display(),
                row.len()
            )));
        }
    }
    let m = Matrix::from_fn(dim, dim, |i, j| {
        Complex64::new(file.matrix[i][j][0], file.matrix[i][j][1])
    });
    Ok(NamedStateSpec::new(StateKind::Explicit(m), layout))
}

fn qubit_layout(n: usize) -> Result<Layout, Failure> {
    let subs: Vec<(String, usize)> = (0..n).map(|i| (format!("q{i}"), 2)).collect();
    Layout::from_owned(subs).map_err(Failure::from)
}

fn parse_named(arg: &str) -> Result<NamedStateSpec, Failure> {
    let arg = arg.trim();
    let (name, args) = split_constructor(arg)?;
    match name {
        "bell_mixture" => {
            let weights = args
                .iter()
                .map(|a| parse_arg::<f64>(arg, a, "a weight"))
                .collect::<Result<Vec<f64>, Failure>>()?;
            let layout = Layout::new(&[("A", 2), ("B", 2)]).map_err(Failure::from)?;
            Ok(NamedStateSpec::new(StateKind::BellMixture(weights), layout))
        }
        "ghz" => {
            let [n] = fixed_args::<1>(arg, &args)?;
            let n = parse_arg::<usize>(arg, n, "a party count")?;
            Ok(NamedStateSpec::new(StateKind::Ghz(n), qubit_layout(n)?))
        }
        "depolarized_ghz4" => {
            let [p] = fixed_args::<1>(arg, &args)?;
            let p = parse_arg::<f64>(arg, p, "a noise probability")?;
            let layout = Layout::new(&[("A", 4), ("B", 4)]).map_err(Failure::from)?;
            Ok(NamedStateSpec::new(StateKind::DepolarizedGhz4(p), layout))
        }
        "hea_random" => {
            if args.len() < 3 || args.len() > 4 {
                return Err(Failure::config(format!(
                    "{arg}: hea_random takes (n_qubits, seed, layers[, entangling])"
                )));
            }
            let n = parse_arg::<usize>(arg, args[0], "a qubit count")?;
            let seed = parse_arg::<u64>(arg, args[1], "a seed")?;
            let layers = parse_arg::<usize>(arg, args[2], "a layer count")?;
            let entangling = match args.get(3) {
                None => true,
                Some(&"true") => true,
                Some(&"false") => false,
                Some(other) => {
                    return Err(Failure::config(format!(
                        "{arg}: entangling must be true or false, got {other}"
                    )))
                }
            };
            Ok(NamedStateSpec::new(
                StateKind::HeaRandom {
                    seed,
                    layers,
                    entangling,
                },
                qubit_layout(n)?,
            ))
        }
        other => Err(Failure::config(format!(
            "{other} is neither a readable file nor a known state; named states are \
             bell_mixture(w1,..), ghz(n), depolarized_ghz4(p), \
             hea_random(n_qubits,seed,layers[,entangling])"
        ))),
    }
}

fn split_constructor(arg: &str) -> Result<(&str, Vec<&str>), Failure> {
    let Some(open) = arg.find('(') else {
        return Ok((arg, Vec::new()));
    };
    let Some(body) = arg[open + 1..].strip_suffix(')') else {
        return Err(Failure::config(format!("{arg}: missing closing parenthesis")));
    };
    let name = &arg[..open];
    let args = if body.trim().is_empty() {
        Vec::new()
    } else {
        body.split(',').map(str::trim).collect()
    };
    Ok((name, args))
}

fn fixed_args<'a, const N: usize>(arg: &str, args: &[&'a str]) -> Result<[&'a str; N], Failure> {
    <[&str; N]>::try_from(args.to_vec()).map_err(|_| {
        Failure::config(format!(
            "{arg}: expected {N} argument{}, got {}",
            if N == 1 { "" } else { "s" },
            args.len()
        ))
    })
}

fn parse_arg<T: std::str::FromStr>(arg: &str, text: &str, what: &str) -> Result<T, Failure> {
    text.parse()
        .map_err(|_| Failure::config(format!("{arg}: {text} is not {what}")))
}

/// Partition groups for a run: the configured ones, or one group per layout
/// entry when the configuration leaves them out.
pub fn resolve_partitions(
    configured: Option<&[Vec<String>]>,
    layout: &Layout,
) -> Vec<Vec<String>> {
    match configured {
        Some(groups) => groups.to_vec(),
        None => layout
            .entries()
            .iter()
            .map(|(label, _)| vec![label.clone()])
            .collect(),
    }
}
