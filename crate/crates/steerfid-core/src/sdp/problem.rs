//! Equality-constrained semidefinite programs over named Hermitian blocks.
//!
//! Objectives and constraints are real trace functionals of the block
//! matrices. Before the interior-point run every equality is eliminated by
//! substitution, so the solver only sees free coordinates and semidefinite
//! blocks; complex problems are realified, purely real ones stay at their
//! original dimension.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::eigh::eigvalsh;
use crate::qcore::matrix::Matrix;

use super::solver::{
    solve_cone, ConeBlock, ConeProgram, RMat, SdpResiduals, SdpSolution, SdpStatus, SolveOptions,
};

/// Largest total complex dimension across blocks accepted by `solve`.
pub const MAX_SDP_DIM: usize = 512;

/// Absolute Hermiticity defect tolerated in user-supplied functionals.
const HERMITICITY_TOL: f64 = 1e-9;
/// Coefficients below this magnitude are dropped from assembled rows.
const COEF_DROP_TOL: f64 = 1e-12;
/// Residual bound for declaring a fully eliminated row consistent.
const PRESOLVE_FEAS_TOL: f64 = 1e-9;
/// Imaginary-row right-hand sides above this disable the real fast path.
const IM_RHS_TOL: f64 = 1e-12;
/// Minimum pivot magnitude relative to the largest coefficient in a row.
const PIVOT_RATIO: f64 = 1e-8;
/// Normalized negative-eigenvalue bound for constant feasibility checks.
const CONSTANT_FEAS_TOL: f64 = 1e-9;

/// Handle to one semidefinite block of an `SdpProblem`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockId(usize);

#[derive(Debug, Clone)]
struct Row {
    /// Sorted by parameter index, with duplicates merged.
    terms: Vec<(usize, f64)>,
    rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ParamKind {
    Diag,
    Re,
    Im,
}

/// Maximization of a real trace functional over Hermitian positive
/// semidefinite blocks tied together by trace equality constraints.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    blocks: Vec<(String, usize)>,
    param_offsets: Vec<usize>,
    total_params: usize,
    /// Dense objective coefficients over the Hermitian parameters.
    objective: Vec<f64>,
    rows: Vec<Row>,
}

impl SdpProblem {
    pub fn new() -> Self {
        SdpProblem::default()
    }

    /// Declares a Hermitian positive semidefinite block of size `dim`.
    pub fn add_block(&mut self, name: &str, dim: usize) -> Result<BlockId> {
        if name.is_empty() {
            return Err(Error::InvalidConfig(String::from(
                "block names must be non-empty",
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidConfig(format!(
                "block {name} must have positive dimension"
            )));
        }
        if self.blocks.iter().any(|(n, _)| n == name) {
            return Err(Error::InvalidConfig(format!(
                "block name {name} is already taken"
            )));
        }
        let id = BlockId(self.blocks.len());
        self.blocks.push((String::from(name), dim));
        self.param_offsets.push(self.total_params);
        self.total_params += dim * dim;
        self.objective.resize(self.total_params, 0.0);
        Ok(id)
    }

    /// Dimension of a declared block.
    pub fn block_dim(&self, id: BlockId) -> Result<usize> {
        self.blocks
            .get(id.0)
            .map(|(_, d)| *d)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown block id {}", id.0)))
    }

    /// Sum of the declared complex block dimensions.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|(_, d)| *d).sum()
    }

    /// Adds `tr(coefficient * X_block)` to the maximized objective.
    pub fn add_objective(&mut self, block: BlockId, coefficient: &Matrix) -> Result<()> {
        let offset = self.check_coefficient(block, coefficient)?;
        let dim = self.blocks[block.0].1;
        let objective = &mut self.objective;
        functional_coefficients(offset, dim, coefficient, |p, c| objective[p] += c);
        Ok(())
    }

    /// Adds the equality `sum_i tr(F_i * X_{b_i}) = rhs` over the listed
    /// `(b_i, F_i)` terms; repeated blocks accumulate.
    pub fn add_constraint(&mut self, terms: &[(BlockId, Matrix)], rhs: f64) -> Result<()> {
        if !rhs.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "constraint right-hand side {rhs} is not finite"
            )));
        }
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (block, coefficient) in terms {
            let offset = self.check_coefficient(*block, coefficient)?;
            let dim = self.blocks[block.0].1;
            functional_coefficients(offset, dim, coefficient, |p, c| {
                *acc.entry(p).or_insert(0.0) += c;
            });
        }
        let terms: Vec<(usize, f64)> = acc
            .into_iter()
            .filter(|(_, c)| c.abs() > COEF_DROP_TOL)
            .collect();
        self.rows.push(Row { terms, rhs });
        Ok(())
    }

    /// Runs the interior-point solver and reports the iterate in the
    /// original complex block variables.
    pub fn solve(&self, opts: &SolveOptions) -> Result<SdpSolution> {
        opts.validate()?;
        if self.blocks.is_empty() {
            return Err(Error::InvalidConfig(String::from(
                "the problem declares no blocks",
            )));
        }
        let total = self.total_dim();
        if total > MAX_SDP_DIM {
            return Err(Error::TooLarge(format!(
                "total block dimension {total} exceeds the solver cap {MAX_SDP_DIM}"
            )));
        }
        let compiled = self.compile()?;
        if compiled.prog.c.is_empty() {
            return self.constant_solution(&compiled);
        }
        let out = solve_cone(&compiled.prog, opts);
        Ok(SdpSolution {
            value: compiled.c0 - out.pobj,
            dual_value: compiled.c0 - out.dobj,
            blocks: self.recover_blocks(&out.s, compiled.real_mode),
            residuals: out.residuals,
            status: out.status,
            iterations: out.iterations,
        })
    }

    /// Serializes the reduced program in SDPA sparse format, in the
    /// internal minimization orientation.
    pub fn dump_sdpa(&self) -> Result<String> {
        let compiled = self.compile()?;
        let n = compiled.prog.c.len();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "\"reduced cone program: minimize c.x with H0 + sum_v x_v K_v psd"
        );
        let mut names = String::new();
        for (name, dim) in &self.blocks {
            let _ = write!(names, " {name}:{dim}");
        }
        let _ = writeln!(
            out,
            "\"blocks{names} ({})",
            if compiled.real_mode { "real" } else { "realified" }
        );
        let _ = writeln!(out, "{n} = mDIM");
        let _ = writeln!(out, "{} = nBLOCK", compiled.prog.blocks.len());
        let mut dims = String::new();
        for block in &compiled.prog.blocks {
            let _ = write!(dims, "{} ", block.dim);
        }
        let _ = writeln!(out, "{}", dims.trim_end());
        let mut costs = String::new();
        for c in &compiled.prog.c {
            let _ = write!(costs, "{c:.16e} ");
        }
        let _ = writeln!(out, "{}", costs.trim_end());
        for (bno, block) in compiled.prog.blocks.iter().enumerate() {
            for i in 0..block.dim {
                for j in i..block.dim {
                    let v = -block.h0.get(i, j);
                    if v != 0.0 {
                        let _ = writeln!(out, "0 {} {} {} {v:.16e}", bno + 1, i + 1, j + 1);
                    }
                }
            }
        }
        for (bno, block) in compiled.prog.blocks.iter().enumerate() {
            for (v, ents) in &block.entries {
                for &(i, j, val) in ents {
                    if i <= j {
                        let _ = writeln!(
                            out,
                            "{} {} {} {} {val:.16e}",
                            v + 1,
                            bno + 1,
                            i + 1,
                            j + 1
                        );
                    }
                }
            }
        }
        Ok(out)
    }

    fn check_coefficient(&self, id: BlockId, m: &Matrix) -> Result<usize> {
        let (name, dim) = self
            .blocks
            .get(id.0)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown block id {}", id.0)))?;
        if m.rows() != *dim || m.cols() != *dim {
            return Err(Error::ShapeMismatch(format!(
                "coefficient for block {name} is {}x{}, the block has dimension {dim}",
                m.rows(),
                m.cols()
            )));
        }
        let defect = m.hermiticity_defect();
        if !(defect <= HERMITICITY_TOL) {
            return Err(Error::InvalidConfig(format!(
                "coefficient for block {name} is not Hermitian, defect {defect:.3e}"
            )));
        }
        Ok(self.param_offsets[id.0])
    }

    fn kind_table(&self) -> Vec<ParamKind> {
        let mut kinds = Vec::with_capacity(self.total_params);
        for (_, dim) in &self.blocks {
            for _ in 0..*dim {
                kinds.push(ParamKind::Diag);
            }
            for _ in 0..(dim * (dim - 1) / 2) {
                kinds.push(ParamKind::Re);
                kinds.push(ParamKind::Im);
            }
        }
        kinds
    }

    /// A problem is real when no objective coefficient touches an imaginary
    /// coordinate and every row is either free of imaginary coordinates or
    /// a homogeneous relation among them alone. Such problems are invariant
    /// under conjugating every block, so the imaginary coordinates can be
    /// fixed to zero.
    fn is_real_mode(&self, kinds: &[ParamKind]) -> bool {
        for (p, kind) in kinds.iter().enumerate() {
            if *kind == ParamKind::Im && self.objective[p].abs() > COEF_DROP_TOL {
                return false;
            }
        }
        for row in &self.rows {
            let mut has_im = false;
            let mut has_other = false;
            for &(p, _) in &row.terms {
                match kinds[p] {
                    ParamKind::Im => has_im = true,
                    _ => has_other = true,
                }
            }
            if has_im && (has_other || row.rhs.abs() > IM_RHS_TOL) {
                return false;
            }
        }
        true
    }

    fn compile(&self) -> Result<Compiled> {
        let kinds = self.kind_table();
        let real_mode = self.is_real_mode(&kinds);
        let forced_zero: Vec<usize> = if real_mode {
            kinds
                .iter()
                .enumerate()
                .filter(|(_, k)| **k == ParamKind::Im)
                .map(|(p, _)| p)
                .collect()
        } else {
            Vec::new()
        };
        let reduction = reduce(self.total_params, &self.rows, &forced_zero)?;

        let mut c_pub = vec![0.0; reduction.n_vars];
        let mut c0 = 0.0;
        for (p, &w) in self.objective.iter().enumerate() {
            if w.abs() <= COEF_DROP_TOL {
                continue;
            }
            let (terms, constant) = &reduction.exprs[p];
            c0 += w * constant;
            for &(v, b) in terms {
                c_pub[v] += w * b;
            }
        }

        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (bi, (_, dim)) in self.blocks.iter().enumerate() {
            let d = *dim;
            let dprime = if real_mode { d } else { 2 * d };
            let offset = self.param_offsets[bi];
            let mut h0 = RMat::zeros(dprime);
            let mut per_var: BTreeMap<usize, Vec<(u16, u16, f64)>> = BTreeMap::new();
            for p in 0..d {
                let positions = if real_mode {
                    vec![(p, p, 1.0)]
                } else {
                    vec![(p, p, 1.0), (d + p, d + p, 1.0)]
                };
                place(&reduction.exprs, offset + p, &positions, &mut h0, &mut per_var);
                for q in (p + 1)..d {
                    let base = offset + d + 2 * pair_index(d, p, q);
                    let re_positions = if real_mode {
                        vec![(p, q, 1.0), (q, p, 1.0)]
                    } else {
                        vec![
                            (p, q, 1.0),
                            (q, p, 1.0),
                            (d + p, d + q, 1.0),
                            (d + q, d + p, 1.0),
                        ]
                    };
                    place(&reduction.exprs, base, &re_positions, &mut h0, &mut per_var);
                    if !real_mode {
                        let im_positions = vec![
                            (p, d + q, -1.0),
                            (q, d + p, 1.0),
                            (d + p, q, 1.0),
                            (d + q, p, -1.0),
                        ];
                        place(&reduction.exprs, base + 1, &im_positions, &mut h0, &mut per_var);
                    }
                }
            }
            blocks.push(ConeBlock {
                dim: dprime,
                h0,
                entries: per_var.into_iter().collect(),
            });
        }

        Ok(Compiled {
            prog: ConeProgram {
                c: c_pub.iter().map(|v| -v).collect(),
                blocks,
            },
            c0,
            real_mode,
        })
    }

    fn constant_solution(&self, compiled: &Compiled) -> Result<SdpSolution> {
        for block in &compiled.prog.blocks {
            let vals = eigvalsh(&block.h0.to_complex())?;
            let largest = vals.first().copied().unwrap_or(0.0);
            let smallest = vals.last().copied().unwrap_or(0.0);
            if -smallest > CONSTANT_FEAS_TOL * (1.0 + largest.abs()) {
                return Err(Error::SolverFailure(String::from(
                    "the equality constraints force an indefinite block",
                )));
            }
        }
        let constants: Vec<RMat> = compiled.prog.blocks.iter().map(|b| b.h0.clone()).collect();
        Ok(SdpSolution {
            value: compiled.c0,
            dual_value: compiled.c0,
            blocks: self.recover_blocks(&constants, compiled.real_mode),
            residuals: SdpResiduals {
                primal: 0.0,
                dual: 0.0,
                gap: 0.0,
            },
            status: SdpStatus::Optimal,
            iterations: 0,
        })
    }

    fn recover_blocks(&self, mats: &[RMat], real_mode: bool) -> Vec<Matrix> {
        self.blocks
            .iter()
            .zip(mats.iter())
            .map(|((_, dim), s)| {
                let d = *dim;
                if real_mode {
                    Matrix::from_fn(d, d, |i, j| {
                        Complex64::new(0.5 * (s.get(i, j) + s.get(j, i)), 0.0)
                    })
                } else {
                    Matrix::from_fn(d, d, |i, j| {
                        let re = 0.25
                            * (s.get(i, j) + s.get(j, i) + s.get(d + i, d + j) + s.get(d + j, d + i));
                        let im = 0.25
                            * (s.get(d + i, j) + s.get(j, d + i) - s.get(i, d + j) - s.get(d + j, i));
                        Complex64::new(re, im)
                    })
                }
            })
            .collect()
    }
}

struct Compiled {
    prog: ConeProgram,
    c0: f64,
    real_mode: bool,
}

fn pair_index(dim: usize, p: usize, q: usize) -> usize {
    p * dim - p * (p + 1) / 2 + (q - p - 1)
}

/// Feeds the parameter coefficients of `tr(F X)` into `sink`, with the
/// Hermitian matrix `X` coordinatized as diagonal, real, and imaginary
/// off-diagonal parts.
fn functional_coefficients(
    offset: usize,
    dim: usize,
    f: &Matrix,
    mut sink: impl FnMut(usize, f64),
) {
    for p in 0..dim {
        let c = f.get(p, p).re;
        if c.abs() > COEF_DROP_TOL {
            sink(offset + p, c);
        }
        for q in (p + 1)..dim {
            let z = 0.5 * (f.get(p, q) + f.get(q, p).conj());
            let base = offset + dim + 2 * pair_index(dim, p, q);
            if (2.0 * z.re).abs() > COEF_DROP_TOL {
                sink(base, 2.0 * z.re);
            }
            if (2.0 * z.im).abs() > COEF_DROP_TOL {
                sink(base + 1, 2.0 * z.im);
            }
        }
    }
}

fn place(
    exprs: &[(Vec<(usize, f64)>, f64)],
    param: usize,
    positions: &[(usize, usize, f64)],
    h0: &mut RMat,
    per_var: &mut BTreeMap<usize, Vec<(u16, u16, f64)>>,
) {
    let (terms, constant) = &exprs[param];
    for &(i, j, s) in positions {
        if *constant != 0.0 {
            h0.add_at(i, j, s * constant);
        }
        for &(v, b) in terms {
            per_var
                .entry(v)
                .or_default()
                .push((i as u16, j as u16, s * b));
        }
    }
}

struct Substitution {
    param: usize,
    terms: Vec<(usize, f64)>,
    constant: f64,
}

struct Reduction {
    n_vars: usize,
    /// Per parameter: affine expression over the surviving variables.
    exprs: Vec<(Vec<(usize, f64)>, f64)>,
}

struct Work {
    terms: Vec<(usize, f64)>,
    rhs: f64,
}

enum RowAction {
    Drop,
    Pivot(usize, f64),
}

/// Eliminates every equality row by substitution. Rows holding a parameter
/// that appears nowhere else resolve directly; when none is left, one
/// Gaussian elimination step on the shortest row restores that shape.
fn reduce(total_params: usize, rows: &[Row], forced_zero: &[usize]) -> Result<Reduction> {
    let mut active = vec![true; total_params];
    let mut subs: Vec<Substitution> = Vec::new();
    for &p in forced_zero {
        if active[p] {
            active[p] = false;
            subs.push(Substitution {
                param: p,
                terms: Vec::new(),
                constant: 0.0,
            });
        }
    }

    let mut work: Vec<Option<Work>> = rows
        .iter()
        .map(|row| {
            Some(Work {
                terms: row
                    .terms
                    .iter()
                    .copied()
                    .filter(|(p, _)| active[*p])
                    .collect(),
                rhs: row.rhs,
            })
        })
        .collect();
    let empty_tol =
        PRESOLVE_FEAS_TOL * (1.0 + rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max));

    let mut occurrence = vec![0usize; total_params];
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); total_params];
    for (ri, w) in work.iter().enumerate() {
        if let Some(w) = w {
            for &(p, _) in &w.terms {
                occurrence[p] += 1;
                holders[p].push(ri);
            }
        }
    }
    let mut remaining = work.len();

    while remaining > 0 {
        let mut progress = false;
        for ri in 0..work.len() {
            let action = match &work[ri] {
                None => None,
                Some(w) if w.terms.is_empty() => {
                    if w.rhs.abs() > empty_tol {
                        return Err(Error::SolverFailure(String::from(
                            "equality constraints are mutually inconsistent",
                        )));
                    }
                    Some(RowAction::Drop)
                }
                Some(w) => {
                    let largest = w.terms.iter().map(|(_, a)| a.abs()).fold(0.0, f64::max);
                    let mut best: Option<(usize, f64)> = None;
                    for &(p, a) in &w.terms {
                        if occurrence[p] == 1
                            && a.abs() >= PIVOT_RATIO * largest
                            && best.map_or(true, |(_, cur)| a.abs() > cur.abs())
                        {
                            best = Some((p, a));
                        }
                    }
                    best.map(|(p, a)| RowAction::Pivot(p, a))
                }
            };
            match action {
                None => {}
                Some(RowAction::Drop) => {
                    work[ri] = None;
                    remaining -= 1;
                    progress = true;
                }
                Some(RowAction::Pivot(p, a)) => {
                    let w = work[ri].take().unwrap();
                    remaining -= 1;
                    consume_as_substitution(w, p, a, &mut occurrence, &mut active, &mut subs);
                    progress = true;
                }
            }
        }
        if remaining == 0 {
            break;
        }
        if progress {
            continue;
        }

        let ri = (0..work.len())
            .filter(|&i| work[i].is_some())
            .min_by_key(|&i| work[i].as_ref().unwrap().terms.len())
            .unwrap();
        let pivot_row = work[ri].take().unwrap();
        remaining -= 1;
        let (p, a) = pivot_row
            .terms
            .iter()
            .copied()
            .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap())
            .unwrap();
        let holder_ids: Vec<usize> = holders[p].clone();
        for rj in holder_ids {
            if rj == ri {
                continue;
            }
            let Some(other) = work[rj].take() else {
                continue;
            };
            let Some(fpos) = other.terms.iter().position(|&(u, _)| u == p) else {
                work[rj] = Some(other);
                continue;
            };
            let factor = other.terms[fpos].1 / a;
            let merged = merge_scaled(&other.terms, &pivot_row.terms, -factor, p);
            for &(u, _) in &other.terms {
                occurrence[u] -= 1;
            }
            for &(u, _) in &merged {
                occurrence[u] += 1;
                holders[u].push(rj);
            }
            work[rj] = Some(Work {
                terms: merged,
                rhs: other.rhs - factor * pivot_row.rhs,
            });
        }
        consume_as_substitution(pivot_row, p, a, &mut occurrence, &mut active, &mut subs);
    }

    let mut var_of: Vec<Option<usize>> = vec![None; total_params];
    let mut n_vars = 0usize;
    for (p, flag) in active.iter().enumerate() {
        if *flag {
            var_of[p] = Some(n_vars);
            n_vars += 1;
        }
    }
    let mut exprs: Vec<Option<(Vec<(usize, f64)>, f64)>> = (0..total_params)
        .map(|p| var_of[p].map(|v| (vec![(v, 1.0)], 0.0)))
        .collect();
    for sub in subs.iter().rev() {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        let mut constant = sub.constant;
        for &(u, a) in &sub.terms {
            let (terms, c) = exprs[u]
                .as_ref()
                .expect("eliminated parameters resolve in reverse order");
            constant += a * c;
            for &(v, b) in terms {
                *acc.entry(v).or_insert(0.0) += a * b;
            }
        }
        exprs[sub.param] = Some((
            acc.into_iter()
                .filter(|(_, v)| v.abs() > COEF_DROP_TOL)
                .collect(),
            constant,
        ));
    }
    Ok(Reduction {
        n_vars,
        exprs: exprs.into_iter().map(|e| e.unwrap()).collect(),
    })
}

fn consume_as_substitution(
    row: Work,
    pivot: usize,
    coef: f64,
    occurrence: &mut [usize],
    active: &mut [bool],
    subs: &mut Vec<Substitution>,
) {
    let mut expr = Vec::with_capacity(row.terms.len().saturating_sub(1));
    for &(u, au) in &row.terms {
        occurrence[u] -= 1;
        if u != pivot {
            expr.push((u, -au / coef));
        }
    }
    subs.push(Substitution {
        param: pivot,
        terms: expr,
        constant: row.rhs / coef,
    });
    active[pivot] = false;
}

/// Returns `a + factor * b` over sorted term lists, skipping `skip` and
/// dropping coefficients that cancel to noise.
fn merge_scaled(
    a: &[(usize, f64)],
    b: &[(usize, f64)],
    factor: f64,
    skip: usize,
) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&(pa, va)), Some(&(pb, vb))) => {
                if pa == pb {
                    i += 1;
                    j += 1;
                    (pa, va + factor * vb)
                } else if pa < pb {
                    i += 1;
                    (pa, va)
                } else {
                    j += 1;
                    (pb, factor * vb)
                }
            }
            (Some(&(pa, va)), None) => {
                i += 1;
                (pa, va)
            }
            (None, Some(&(pb, vb))) => {
                j += 1;
                (pb, factor * vb)
            }
            (None, None) => unreachable!(),
        };
        if next.0 != skip && next.1.abs() > COEF_DROP_TOL {
            out.push(next);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(dim: usize, i: usize, j: usize, v: Complex64) -> Matrix {
        let mut m = Matrix::zeros(dim, dim);
        m.set(i, j, v);
        if i != j {
            m.set(j, i, v.conj());
        }
        m
    }

    fn real_entry(dim: usize, i: usize, j: usize, v: f64) -> Matrix {
        entry(dim, i, j, Complex64::new(v, 0.0))
    }

    #[test]
    fn builder_rejects_bad_blocks() {
        let mut prob = SdpProblem::new();
        assert!(matches!(
            prob.add_block("", 2),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            prob.add_block("x", 0),
            Err(Error::InvalidConfig(_))
        ));
        prob.add_block("x", 2).unwrap();
        assert!(matches!(
            prob.add_block("x", 3),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn builder_rejects_bad_coefficients() {
        let mut prob = SdpProblem::new();
        let x = prob.add_block("x", 2).unwrap();
        assert!(matches!(
            prob.add_objective(x, &Matrix::identity(3)),
            Err(Error::ShapeMismatch(_))
        ));
        let mut skew = Matrix::zeros(2, 2);
        skew.set(0, 1, Complex64::new(1.0, 0.0));
        assert!(matches!(
            prob.add_objective(x, &skew),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            prob.add_objective(BlockId(7), &Matrix::identity(2)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn inconsistent_pins_are_rejected() {
        let mut prob = SdpProblem::new();
        let x = prob.add_block("x", 1).unwrap();
        prob.add_constraint(&[(x, Matrix::identity(1))], 1.0).unwrap();
        prob.add_constraint(&[(x, Matrix::identity(1))], 2.0).unwrap();
        assert!(matches!(
            prob.solve(&SolveOptions::default()),
            Err(Error::SolverFailure(_))
        ));
    }

    #[test]
    fn fully_pinned_program_needs_no_iterations() {
        let mut prob = SdpProblem::new();
        let x = prob.add_block("x", 1).unwrap();
        prob.add_constraint(&[(x, Matrix::identity(1))], 2.0).unwrap();
        prob.add_objective(x, &Matrix::identity(1).scale_real(3.0))
            .unwrap();
        let sol = prob.solve(&SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_eq!(sol.iterations, 0);
        assert!((sol.value - 6.0).abs() < 1e-12);
        assert!((sol.blocks[0].get(0, 0).re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pinned_negative_value_is_infeasible() {
        let mut prob = SdpProblem::new();
        let x = prob.add_block("x", 1).unwrap();
        prob.add_constraint(&[(x, Matrix::identity(1))], -1.0).unwrap();
        assert!(matches!(
            prob.solve(&SolveOptions::default()),
            Err(Error::SolverFailure(_))
        ));
    }

    #[test]
    fn scalar_lp_reaches_the_better_vertex() {
        let mut prob = SdpProblem::new();
        let a = prob.add_block("a", 1).unwrap();
        let b = prob.add_block("b", 1).unwrap();
        prob.add_constraint(
            &[(a, Matrix::identity(1)), (b, Matrix::identity(1))],
            1.0,
        )
        .unwrap();
        prob.add_objective(a, &Matrix::identity(1).scale_real(2.0))
            .unwrap();
        prob.add_objective(b, &Matrix::identity(1).scale_real(3.0))
            .unwrap();
        let sol = prob.solve(&SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value - 3.0).abs() < 1e-6);
        assert!(sol.value <= sol.dual_value + 1e-7);
        assert!(sol.blocks[0].get(0, 0).re.abs() < 1e-5);
        assert!((sol.blocks[1].get(0, 0).re - 1.0).abs() < 1e-5);
    }

    #[test]
    fn redundant_rows_resolve_by_gaussian_elimination() {
        // a + b = 1 and a - b = 0 share both parameters, so no row has a
        // parameter of its own; the fallback must still pin a = b = 1/2.
        let mut prob = SdpProblem::new();
        let a = prob.add_block("a", 1).unwrap();
        let b = prob.add_block("b", 1).unwrap();
        prob.add_constraint(
            &[(a, Matrix::identity(1)), (b, Matrix::identity(1))],
            1.0,
        )
        .unwrap();
        prob.add_constraint(
            &[(a, Matrix::identity(1)), (b, Matrix::identity(1).scale_real(-1.0))],
            0.0,
        )
        .unwrap();
        prob.add_objective(a, &Matrix::identity(1).scale_real(2.0))
            .unwrap();
        let sol = prob.solve(&SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_eq!(sol.iterations, 0);
        assert!((sol.value - 1.0).abs() < 1e-12);
        assert!((sol.blocks[1].get(0, 0).re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matrix_capped_by_identity_fills_it() {
        let mut prob = SdpProblem::new();
        let x = prob.add_block("x", 2).unwrap();
        let s = prob.add_block("slack", 2).unwrap();
        for (i, j) in [(0, 0), (1, 1), (0, 1)] {
            let rhs = if i == j { 1.0 } else { 0.0 };
            prob.add_constraint(
                &[
                    (x, real_entry(2, i, j, 1.0)),
                    (s, real_entry(2, i, j, 1.0)),
                ],
                rhs,
            )
            .unwrap();
            if i != j {
                prob.add_constraint(
                    &[
                        (x, entry(2, i, j, Complex64::new(0.0, 1.0))),
                        (s, entry(2, i, j, Complex64::new(0.0, 1.0))),
                    ],
                    0.0,
                )
                .unwrap();
            }
        }
        prob.add_objective(x, &Matrix::identity(2)).unwrap();
        let sol = prob.solve(&SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value - 2.0).abs() < 1e-6);
        assert!((sol.blocks[0].get(0, 0).re - 1.0).abs() < 1e-5);
        assert!((sol.blocks[0].get(1, 1).re - 1.0).abs() < 1e-5);
        assert!(sol.blocks[0].get(0, 1).norm() < 1e-5);
        assert!(sol.residuals.gap <= 1e-8);
    }

    #[test]
    fn complex_objective_reaches_largest_eigenvalue() {
        // max tr(C X) over states X is the top eigenvalue of C; the chosen
        // C has eigenvalues +-sqrt(2)/2 and needs the imaginary coordinate.
        let mut prob = SdpProblem::new();
        let x = prob.add_block("x", 2).unwrap();
        prob.add_constraint(&[(x, Matrix::identity(2))], 1.0).unwrap();
        prob.add_objective(x, &entry(2, 0, 1, Complex64::new(0.5, -0.5)))
            .unwrap();
        let sol = prob.solve(&SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        let expected = 0.5f64.sqrt();
        assert!((sol.value - expected).abs() < 1e-6);
        assert!((sol.blocks[0].trace().re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unbounded_objective_never_certifies() {
        let mut prob = SdpProblem::new();
        let x = prob.add_block("x", 1).unwrap();
        prob.add_objective(x, &Matrix::identity(1)).unwrap();
        let opts = SolveOptions {
            max_iter: 40,
            ..SolveOptions::default()
        };
        let sol = prob.solve(&opts).unwrap();
        assert_ne!(sol.status, SdpStatus::Optimal);
    }

    #[test]
    fn oversized_problems_are_refused() {
        let mut prob = SdpProblem::new();
        prob.add_block("x", 513).unwrap();
        assert!(matches!(
            prob.solve(&SolveOptions::default()),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn dump_lists_the_reduced_program() {
        let mut prob = SdpProblem::new();
        let x = prob.add_block("x", 2).unwrap();
        prob.add_constraint(&[(x, Matrix::identity(2))], 1.0).unwrap();
        prob.add_objective(x, &real_entry(2, 0, 1, 0.5)).unwrap();
        let dump = prob.dump_sdpa().unwrap();
        assert!(dump.starts_with('"'));
        assert!(dump.contains("= mDIM"));
        assert!(dump.contains("= nBLOCK"));
        assert!(dump.contains("x:2"));
    }
}
