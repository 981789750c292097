//! Interior-point solver for the reduced cone programs produced by
//! `SdpProblem`.
//!
//! The internal form is `minimize c.x` subject to `H0_b + sum_v x_v K_{b,v}`
//! staying positive semidefinite for every block `b`. Iterates follow a
//! Nesterov-Todd scaled Mehrotra predictor-corrector scheme on real
//! symmetric blocks.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::qcore::eigh::{eigh, eigvalsh};
use crate::qcore::matrix::Matrix;

/// Smallest step length the line search may return before the run is
/// declared numerically stuck.
const MIN_STEP: f64 = 1e-10;
/// Fraction of the distance to the cone boundary taken by each step.
const STEP_DAMPING: f64 = 0.99;
/// Diagonal jitter levels tried when the Schur complement loses positive
/// definiteness to rounding.
const CHOLESKY_JITTERS: [f64; 4] = [0.0, 1e-12, 1e-9, 1e-6];

/// Stopping tolerances and iteration cap for `SdpProblem::solve`.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Normalized duality gap below which an iterate counts as optimal.
    pub gap_tol: f64,
    /// Normalized primal and dual residual bound for optimality.
    pub feas_tol: f64,
    /// Iteration cap; reaching it yields `SdpStatus::MaxIter`.
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iter: 200,
        }
    }
}

impl SolveOptions {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.gap_tol > 0.0) || !(self.feas_tol > 0.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "solver tolerances must be positive, got gap {} feas {}",
                self.gap_tol,
                self.feas_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig(alloc::string::String::from(
                "iteration cap must be at least 1",
            )));
        }
        Ok(())
    }
}

/// Termination state of an interior-point run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    /// All residuals fell below the requested tolerances.
    Optimal,
    /// The iteration cap was reached first.
    MaxIter,
    /// A scaling, factorization, or step degenerated beyond repair.
    NumericalFailure,
}

/// Normalized optimality measures of the returned iterate.
#[derive(Debug, Clone, Copy)]
pub struct SdpResiduals {
    /// Primal equation violation, scaled by the constant-term norm.
    pub primal: f64,
    /// Dual equation violation, scaled by the objective norm.
    pub dual: f64,
    /// Duality gap, scaled by the objective magnitudes.
    pub gap: f64,
}

/// Solver output, reported in the problem's original maximization sense.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Objective value of the primal iterate.
    pub value: f64,
    /// Dual objective value; exceeds `value` by at most the residual slack.
    pub dual_value: f64,
    /// One Hermitian matrix per declared block, in declaration order.
    pub blocks: Vec<Matrix>,
    /// Optimality measures of the returned iterate.
    pub residuals: SdpResiduals,
    /// How the run ended; only `Optimal` certifies the value.
    pub status: SdpStatus,
    /// Interior-point iterations spent.
    pub iterations: usize,
}

/// Dense real matrix in row-major storage.
#[derive(Debug, Clone)]
pub(super) struct RMat {
    n: usize,
    a: Vec<f64>,
}

impl RMat {
    pub(super) fn zeros(n: usize) -> Self {
        RMat {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub(super) fn identity(n: usize) -> Self {
        let mut m = RMat::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub(super) fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub(super) fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub(super) fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    fn matmul(&self, other: &RMat) -> RMat {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = RMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += aik * other.a[k * n + j];
                }
            }
        }
        out
    }

    fn add_scaled(&mut self, other: &RMat, factor: f64) {
        debug_assert_eq!(self.n, other.n);
        for (d, s) in self.a.iter_mut().zip(other.a.iter()) {
            *d += factor * s;
        }
    }

    fn scaled(&self, factor: f64) -> RMat {
        RMat {
            n: self.n,
            a: self.a.iter().map(|v| v * factor).collect(),
        }
    }

    fn inner(&self, other: &RMat) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.a.iter().zip(other.a.iter()).map(|(x, y)| x * y).sum()
    }

    pub(super) fn frobenius_norm(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.a[i * n + j] + self.a[j * n + i]);
                self.a[i * n + j] = avg;
                self.a[j * n + i] = avg;
            }
        }
    }

    fn transpose(&self) -> RMat {
        let n = self.n;
        let mut out = RMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.a[j * n + i] = self.a[i * n + j];
            }
        }
        out
    }

    pub(super) fn to_complex(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| Complex64::new(self.get(i, j), 0.0))
    }
}

/// Eigendecomposition of a real symmetric matrix, values descending and
/// eigenvectors as columns.
fn eigh_real(m: &RMat) -> Result<(Vec<f64>, RMat)> {
    let dec = eigh(&m.to_complex())?;
    let n = m.n;
    let mut vecs = RMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            vecs.a[i * n + j] = dec.vectors.get(i, j).re;
        }
    }
    Ok((dec.values, vecs))
}

fn eigvals_real(m: &RMat) -> Result<Vec<f64>> {
    eigvalsh(&m.to_complex())
}

/// Builds `Q f(L) Q^T` from an eigendecomposition.
fn spectral_apply(vals: &[f64], vecs: &RMat, f: impl Fn(f64) -> f64) -> RMat {
    let n = vecs.n;
    let mut scaled = RMat::zeros(n);
    for i in 0..n {
        for k in 0..n {
            scaled.a[i * n + k] = vecs.a[i * n + k] * f(vals[k]);
        }
    }
    let mut out = RMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += scaled.a[i * n + k] * vecs.a[j * n + k];
            }
            out.a[i * n + j] = acc;
        }
    }
    out
}

/// Solves `V K + K V = 2 R` for symmetric `K`, given `V = Q diag(vals) Q^T`.
fn lyapunov_solve(vals: &[f64], vecs: &RMat, rhs: &RMat) -> RMat {
    let n = vecs.n;
    let qt = vecs.transpose();
    let mut t = qt.matmul(rhs).matmul(vecs);
    for i in 0..n {
        for j in 0..n {
            t.a[i * n + j] *= 2.0 / (vals[i] + vals[j]);
        }
    }
    vecs.matmul(&t).matmul(&qt)
}

/// One semidefinite block of the reduced program.
pub(super) struct ConeBlock {
    pub(super) dim: usize,
    /// Constant term of the block's affine matrix map.
    pub(super) h0: RMat,
    /// Per-variable sparse symmetric coefficient matrices, sorted by
    /// variable index; entries list both triangles.
    pub(super) entries: Vec<(usize, Vec<(u16, u16, f64)>)>,
}

/// Reduced program: `minimize c.x` with every block matrix semidefinite.
pub(super) struct ConeProgram {
    pub(super) c: Vec<f64>,
    pub(super) blocks: Vec<ConeBlock>,
}

/// Raw iterate returned by `solve_cone`, still in internal coordinates.
pub(super) struct ConeOutcome {
    pub(super) s: Vec<RMat>,
    pub(super) pobj: f64,
    pub(super) dobj: f64,
    pub(super) residuals: SdpResiduals,
    pub(super) status: SdpStatus,
    pub(super) iterations: usize,
}

struct Scaling {
    w_half: RMat,
    w_inv_half: RMat,
    w_inv: RMat,
    v_vals: Vec<f64>,
    v_vecs: RMat,
    v_inv_half: RMat,
}

fn build_scaling(s: &RMat, z: &RMat) -> Result<Scaling> {
    let (s_vals, s_vecs) = eigh_real(s)?;
    check_positive(&s_vals)?;
    let s_half = spectral_apply(&s_vals, &s_vecs, f64::sqrt);
    let (a_vals, a_vecs) = {
        let mut a = s_half.matmul(z).matmul(&s_half);
        a.symmetrize();
        eigh_real(&a)?
    };
    check_positive(&a_vals)?;
    let a_inv_half = spectral_apply(&a_vals, &a_vecs, |v| 1.0 / v.sqrt());
    let mut w = s_half.matmul(&a_inv_half).matmul(&s_half);
    w.symmetrize();
    let (w_vals, w_vecs) = eigh_real(&w)?;
    check_positive(&w_vals)?;
    let w_half = spectral_apply(&w_vals, &w_vecs, f64::sqrt);
    let w_inv_half = spectral_apply(&w_vals, &w_vecs, |v| 1.0 / v.sqrt());
    let w_inv = spectral_apply(&w_vals, &w_vecs, |v| 1.0 / v);
    let mut v = w_inv_half.matmul(s).matmul(&w_inv_half);
    v.symmetrize();
    let (v_vals, v_vecs) = eigh_real(&v)?;
    check_positive(&v_vals)?;
    let v_inv_half = spectral_apply(&v_vals, &v_vecs, |x| 1.0 / x.sqrt());
    Ok(Scaling {
        w_half,
        w_inv_half,
        w_inv,
        v_vals,
        v_vecs,
        v_inv_half,
    })
}

fn check_positive(vals: &[f64]) -> Result<()> {
    let largest = vals.first().copied().unwrap_or(0.0);
    let smallest = vals.last().copied().unwrap_or(0.0);
    if !(smallest > 0.0) || !largest.is_finite() || smallest < 1e-14 * largest.max(1.0) {
        return Err(Error::SolverFailure(alloc::string::String::from(
            "an iterate left the positive definite cone",
        )));
    }
    Ok(())
}

/// Applies the block's linear map `x -> sum_v x_v K_v`.
fn apply_map(block: &ConeBlock, x: &[f64]) -> RMat {
    let mut out = RMat::zeros(block.dim);
    for (v, ents) in &block.entries {
        let xv = x[*v];
        if xv == 0.0 {
            continue;
        }
        for &(i, j, val) in ents {
            out.add_at(i as usize, j as usize, xv * val);
        }
    }
    out
}

/// Accumulates the adjoint `acc_v += <K_v, m>` for one block.
fn accumulate_adjoint(block: &ConeBlock, m: &RMat, acc: &mut [f64]) {
    for (v, ents) in &block.entries {
        let mut dot = 0.0;
        for &(i, j, val) in ents {
            dot += val * m.get(i as usize, j as usize);
        }
        acc[*v] += dot;
    }
}

fn assemble_schur(prog: &ConeProgram, scalings: &[Scaling]) -> Vec<f64> {
    let n = prog.c.len();
    let mut h = vec![0.0; n * n];
    for (block, scaling) in prog.blocks.iter().zip(scalings.iter()) {
        let wi = &scaling.w_inv;
        for (pos, (v, ents_v)) in block.entries.iter().enumerate() {
            for (u, ents_u) in &block.entries[pos..] {
                // <K_u, W^-1 K_v W^-1> expanded over the sparse entries.
                let mut acc = 0.0;
                for &(a, b, alpha) in ents_u {
                    let (a, b) = (a as usize, b as usize);
                    for &(c, d, beta) in ents_v {
                        acc += alpha * beta * wi.get(a, c as usize) * wi.get(d as usize, b);
                    }
                }
                h[v * n + u] += acc;
                if u != v {
                    h[u * n + v] += acc;
                }
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (h[i * n + j] + h[j * n + i]);
            h[i * n + j] = avg;
            h[j * n + i] = avg;
        }
    }
    h
}

/// In-place lower Cholesky factorization; `false` on a non-positive pivot.
fn cholesky(n: usize, a: &mut [f64]) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let root = d.sqrt();
        a[j * n + j] = root;
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / root;
        }
    }
    true
}

fn cholesky_with_jitter(n: usize, h: &[f64]) -> Option<Vec<f64>> {
    let mut scale = 0.0f64;
    for i in 0..n {
        scale = scale.max(h[i * n + i].abs());
    }
    scale += 1.0;
    for jitter in CHOLESKY_JITTERS {
        let mut a = h.to_vec();
        for i in 0..n {
            a[i * n + i] += jitter * scale;
        }
        if cholesky(n, &mut a) {
            return Some(a);
        }
    }
    None
}

fn cholesky_solve(n: usize, l: &[f64], b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut v = y[i];
        for k in 0..i {
            v -= l[i * n + k] * y[k];
        }
        y[i] = v / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v -= l[k * n + i] * y[k];
        }
        y[i] = v / l[i * n + i];
    }
    y
}

/// Cholesky solve followed by two rounds of iterative refinement against
/// the unfactored matrix. The refinement recovers accuracy lost to
/// ill-conditioning near the central path's end.
fn refined_solve(n: usize, h: &[f64], l: &[f64], b: &[f64]) -> Vec<f64> {
    let mut x = cholesky_solve(n, l, b);
    for _ in 0..2 {
        let mut r = b.to_vec();
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += h[i * n + j] * x[j];
            }
            r[i] -= acc;
        }
        let correction = cholesky_solve(n, l, &r);
        for (xv, cv) in x.iter_mut().zip(correction.iter()) {
            *xv += cv;
        }
    }
    x
}

struct Direction {
    dx: Vec<f64>,
    ds: Vec<RMat>,
    dz: Vec<RMat>,
}

/// Iterative refinement of a Newton direction against the dual equation.
///
/// The direction returned by [`solve_newton`] satisfies the primal and
/// complementarity equations to rounding error by construction, but its
/// dual-equation error is the Schur solve error amplified by the inverse
/// scaling, which dominates near the central path's end. Re-solving with
/// that error as the only right-hand side removes it without disturbing
/// the other two equations.
fn refine_dual_equation(
    prog: &ConeProgram,
    scalings: &[Scaling],
    schur: &[f64],
    chol: &[f64],
    r_dual: &[f64],
    c_norm: f64,
    dir: &mut Direction,
) {
    let n = prog.c.len();
    let zero_blocks: Vec<RMat> = prog.blocks.iter().map(|b| RMat::zeros(b.dim)).collect();
    for _ in 0..2 {
        let mut err = vec![0.0; n];
        for (block, dzb) in prog.blocks.iter().zip(dir.dz.iter()) {
            accumulate_adjoint(block, dzb, &mut err);
        }
        for (e, rd) in err.iter_mut().zip(r_dual.iter()) {
            *e -= rd;
        }
        let norm = err.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-13 * (1.0 + c_norm) {
            break;
        }
        for e in err.iter_mut() {
            *e = -*e;
        }
        let fix = solve_newton(prog, scalings, schur, chol, &zero_blocks, &err, &zero_blocks);
        for (dxv, f) in dir.dx.iter_mut().zip(fix.dx.iter()) {
            *dxv += f;
        }
        for (dsb, f) in dir.ds.iter_mut().zip(fix.ds.iter()) {
            dsb.add_scaled(f, 1.0);
        }
        for (dzb, f) in dir.dz.iter_mut().zip(fix.dz.iter()) {
            dzb.add_scaled(f, 1.0);
        }
    }
}

fn solve_newton(
    prog: &ConeProgram,
    scalings: &[Scaling],
    schur: &[f64],
    chol: &[f64],
    r_prim: &[RMat],
    r_dual: &[f64],
    r3: &[RMat],
) -> Direction {
    let n = prog.c.len();
    let mut rhs = vec![0.0; n];
    for ((block, scaling), (rp, r3b)) in prog
        .blocks
        .iter()
        .zip(scalings.iter())
        .zip(r_prim.iter().zip(r3.iter()))
    {
        let mut inner_term = r3b.clone();
        inner_term.add_scaled(rp, 1.0);
        let mut g = scaling.w_inv.matmul(&inner_term).matmul(&scaling.w_inv);
        g.symmetrize();
        accumulate_adjoint(block, &g, &mut rhs);
    }
    for (r, rd) in rhs.iter_mut().zip(r_dual.iter()) {
        *r -= rd;
    }
    let dx = refined_solve(n, schur, chol, &rhs);
    let mut ds = Vec::with_capacity(prog.blocks.len());
    let mut dz = Vec::with_capacity(prog.blocks.len());
    for ((block, scaling), (rp, r3b)) in prog
        .blocks
        .iter()
        .zip(scalings.iter())
        .zip(r_prim.iter().zip(r3.iter()))
    {
        let adx = apply_map(block, &dx);
        let mut dsb = adx.clone();
        dsb.add_scaled(rp, -1.0);
        dsb.symmetrize();
        let mut t = r3b.clone();
        t.add_scaled(rp, 1.0);
        t.add_scaled(&adx, -1.0);
        let mut dzb = scaling.w_inv.matmul(&t).matmul(&scaling.w_inv);
        dzb.symmetrize();
        ds.push(dsb);
        dz.push(dzb);
    }
    Direction { dx, ds, dz }
}

/// Largest step in `[0, 1]` keeping every scaled iterate inside the cone.
fn step_length(scalings: &[Scaling], deltas: &[RMat], to_v_space: impl Fn(&Scaling, &RMat) -> RMat) -> Result<f64> {
    let mut alpha = 1.0f64;
    for (scaling, delta) in scalings.iter().zip(deltas.iter()) {
        let scaled = to_v_space(scaling, delta);
        let mut normalized = scaling
            .v_inv_half
            .matmul(&scaled)
            .matmul(&scaling.v_inv_half);
        normalized.symmetrize();
        let vals = eigvals_real(&normalized)?;
        let smallest = vals.last().copied().unwrap_or(0.0);
        if smallest < -1e-13 {
            alpha = alpha.min(-STEP_DAMPING / smallest);
        }
    }
    Ok(alpha.min(1.0))
}

pub(super) fn solve_cone(prog: &ConeProgram, opts: &SolveOptions) -> ConeOutcome {
    let n = prog.c.len();
    debug_assert!(n > 0);
    let nu: f64 = prog.blocks.iter().map(|b| b.dim as f64).sum();
    let h_norm = {
        let sq: f64 = prog.blocks.iter().map(|b| {
            let f = b.h0.frobenius_norm();
            f * f
        }).sum();
        sq.sqrt()
    };
    let c_norm = prog.c.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut x = vec![0.0; n];
    let mut s: Vec<RMat> = prog.blocks.iter().map(|b| RMat::identity(b.dim)).collect();
    let mut z: Vec<RMat> = prog.blocks.iter().map(|b| RMat::identity(b.dim)).collect();

    let mut iterations = 0usize;
    let mut pobj: f64;
    let mut dobj: f64;
    let mut residuals: SdpResiduals;
    let status;

    loop {
        let r_prim: Vec<RMat> = prog
            .blocks
            .iter()
            .zip(s.iter())
            .map(|(block, sb)| {
                let mut r = sb.clone();
                r.add_scaled(&block.h0, -1.0);
                r.add_scaled(&apply_map(block, &x), -1.0);
                r
            })
            .collect();
        let mut r_dual = prog.c.clone();
        for (block, zb) in prog.blocks.iter().zip(z.iter()) {
            let mut adjoint = vec![0.0; n];
            accumulate_adjoint(block, zb, &mut adjoint);
            for (r, a) in r_dual.iter_mut().zip(adjoint.iter()) {
                *r -= a;
            }
        }
        let gap: f64 = s.iter().zip(z.iter()).map(|(sb, zb)| sb.inner(zb)).sum();
        pobj = prog.c.iter().zip(x.iter()).map(|(c, xv)| c * xv).sum();
        dobj = -prog
            .blocks
            .iter()
            .zip(z.iter())
            .map(|(block, zb)| block.h0.inner(zb))
            .sum::<f64>();
        let prim_sq: f64 = r_prim.iter().map(|r| {
            let f = r.frobenius_norm();
            f * f
        }).sum();
        residuals = SdpResiduals {
            primal: prim_sq.sqrt() / (1.0 + h_norm),
            dual: r_dual.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + c_norm),
            gap: gap / (1.0 + pobj.abs() + dobj.abs()),
        };
        if !gap.is_finite() || !pobj.is_finite() || !dobj.is_finite() {
            status = SdpStatus::NumericalFailure;
            break;
        }
        if residuals.primal <= opts.feas_tol
            && residuals.dual <= opts.feas_tol
            && residuals.gap <= opts.gap_tol
        {
            status = SdpStatus::Optimal;
            break;
        }
        if iterations >= opts.max_iter {
            status = SdpStatus::MaxIter;
            break;
        }

        let scalings: Vec<Scaling> = match s
            .iter()
            .zip(z.iter())
            .map(|(sb, zb)| build_scaling(sb, zb))
            .collect::<Result<_>>()
        {
            Ok(sc) => sc,
            Err(_) => {
                status = SdpStatus::NumericalFailure;
                break;
            }
        };
        let schur = assemble_schur(prog, &scalings);
        let chol = match cholesky_with_jitter(n, &schur) {
            Some(l) => l,
            None => {
                status = SdpStatus::NumericalFailure;
                break;
            }
        };

        let r3_affine: Vec<RMat> = s.iter().map(|sb| sb.scaled(-1.0)).collect();
        let affine = solve_newton(prog, &scalings, &schur, &chol, &r_prim, &r_dual, &r3_affine);
        let steps = (
            step_length(&scalings, &affine.ds, |sc, d| {
                sc.w_inv_half.matmul(d).matmul(&sc.w_inv_half)
            }),
            step_length(&scalings, &affine.dz, |sc, d| {
                sc.w_half.matmul(d).matmul(&sc.w_half)
            }),
        );
        let (alpha_p_aff, alpha_d_aff) = match steps {
            (Ok(p), Ok(d)) => (p, d),
            _ => {
                status = SdpStatus::NumericalFailure;
                break;
            }
        };
        let gap_affine: f64 = s
            .iter()
            .zip(z.iter())
            .zip(affine.ds.iter().zip(affine.dz.iter()))
            .map(|((sb, zb), (dsb, dzb))| {
                let mut sn = sb.clone();
                sn.add_scaled(dsb, alpha_p_aff);
                let mut zn = zb.clone();
                zn.add_scaled(dzb, alpha_d_aff);
                sn.inner(&zn)
            })
            .sum();
        let mu = gap / nu;
        let sigma = (gap_affine / gap).powi(3).clamp(1e-10, 1.0);
        // Aiming far below the requested gap tolerance only degrades the
        // Newton system's conditioning, so the centering target is floored
        // just under it.
        let mu_floor = 0.1 * opts.gap_tol * (1.0 + pobj.abs() + dobj.abs()) / nu;
        let mu_target = (sigma * mu).max(mu_floor.min(mu));

        let r3: Vec<RMat> = scalings
            .iter()
            .zip(affine.ds.iter().zip(affine.dz.iter()))
            .map(|(sc, (dsb, dzb))| {
                let mut ds_tilde = sc.w_inv_half.matmul(dsb).matmul(&sc.w_inv_half);
                ds_tilde.symmetrize();
                let mut dz_tilde = sc.w_half.matmul(dzb).matmul(&sc.w_half);
                dz_tilde.symmetrize();
                let cross_a = ds_tilde.matmul(&dz_tilde);
                let cross_b = dz_tilde.matmul(&ds_tilde);
                let d = ds_tilde.dim();
                let mut rhs = spectral_apply(&sc.v_vals, &sc.v_vecs, |v| v * v).scaled(-1.0);
                rhs.add_scaled(&cross_a, -0.5);
                rhs.add_scaled(&cross_b, -0.5);
                for i in 0..d {
                    rhs.add_at(i, i, mu_target);
                }
                rhs.symmetrize();
                let k = lyapunov_solve(&sc.v_vals, &sc.v_vecs, &rhs);
                let mut r3b = sc.w_half.matmul(&k).matmul(&sc.w_half);
                r3b.symmetrize();
                r3b
            })
            .collect();
        let mut corrected = solve_newton(prog, &scalings, &schur, &chol, &r_prim, &r_dual, &r3);
        refine_dual_equation(
            prog,
            &scalings,
            &schur,
            &chol,
            &r_dual,
            c_norm,
            &mut corrected,
        );
        let steps = (
            step_length(&scalings, &corrected.ds, |sc, d| {
                sc.w_inv_half.matmul(d).matmul(&sc.w_inv_half)
            }),
            step_length(&scalings, &corrected.dz, |sc, d| {
                sc.w_half.matmul(d).matmul(&sc.w_half)
            }),
        );
        let (alpha_p, alpha_d) = match steps {
            (Ok(p), Ok(d)) => (p, d),
            _ => {
                status = SdpStatus::NumericalFailure;
                break;
            }
        };
        if alpha_p.max(alpha_d) < MIN_STEP {
            status = SdpStatus::NumericalFailure;
            break;
        }
        for (xv, dxv) in x.iter_mut().zip(corrected.dx.iter()) {
            *xv += alpha_p * dxv;
        }
        for (sb, dsb) in s.iter_mut().zip(corrected.ds.iter()) {
            sb.add_scaled(dsb, alpha_p);
            sb.symmetrize();
        }
        for (zb, dzb) in z.iter_mut().zip(corrected.dz.iter()) {
            zb.add_scaled(dzb, alpha_d);
            zb.symmetrize();
        }
        iterations += 1;
    }

    ConeOutcome {
        s,
        pobj,
        dobj,
        residuals,
        status,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp_block(coeffs: &[(usize, f64)], constant: f64) -> ConeBlock {
        let mut h0 = RMat::zeros(1);
        h0.add_at(0, 0, constant);
        ConeBlock {
            dim: 1,
            h0,
            entries: coeffs
                .iter()
                .map(|&(v, c)| (v, alloc::vec![(0u16, 0u16, c)]))
                .collect(),
        }
    }

    #[test]
    fn scalar_bound_reaches_optimum() {
        // minimize -x with x >= 0 and 1 - x >= 0; optimum x = 1.
        let prog = ConeProgram {
            c: alloc::vec![-1.0],
            blocks: alloc::vec![lp_block(&[(0, 1.0)], 0.0), lp_block(&[(0, -1.0)], 1.0)],
        };
        let out = solve_cone(&prog, &SolveOptions::default());
        assert_eq!(out.status, SdpStatus::Optimal);
        assert!((out.s[0].get(0, 0) - 1.0).abs() < 1e-7);
        assert!((out.pobj + 1.0).abs() < 1e-7);
        assert!((out.dobj + 1.0).abs() < 1e-6);
    }

    #[test]
    fn weak_duality_holds_at_optimum() {
        let prog = ConeProgram {
            c: alloc::vec![-2.0, -3.0],
            blocks: alloc::vec![
                lp_block(&[(0, 1.0)], 0.0),
                lp_block(&[(1, 1.0)], 0.0),
                lp_block(&[(0, -1.0), (1, -1.0)], 1.0),
            ],
        };
        let out = solve_cone(&prog, &SolveOptions::default());
        assert_eq!(out.status, SdpStatus::Optimal);
        assert!((out.pobj + 3.0).abs() < 1e-6);
        assert!(out.dobj <= out.pobj + 1e-7);
        assert!(out.residuals.primal <= 1e-8);
        assert!(out.residuals.dual <= 1e-8);
        assert!(out.residuals.gap <= 1e-8);
    }

    #[test]
    fn matrix_bound_saturates_identity() {
        // maximize tr X subject to 0 <= X <= I in two dimensions; the slack
        // block is I - X with X expressed through three coordinates.
        let vars = [
            (0usize, alloc::vec![(0u16, 0u16, 1.0)]),
            (1usize, alloc::vec![(1u16, 1u16, 1.0)]),
            (2usize, alloc::vec![(0u16, 1u16, 1.0), (1u16, 0u16, 1.0)]),
        ];
        let x_block = ConeBlock {
            dim: 2,
            h0: RMat::zeros(2),
            entries: vars.iter().cloned().collect(),
        };
        let slack = ConeBlock {
            dim: 2,
            h0: RMat::identity(2),
            entries: vars
                .iter()
                .map(|(v, ents)| {
                    (
                        *v,
                        ents.iter().map(|&(i, j, c)| (i, j, -c)).collect::<Vec<_>>(),
                    )
                })
                .collect(),
        };
        let prog = ConeProgram {
            c: alloc::vec![-1.0, -1.0, 0.0],
            blocks: alloc::vec![x_block, slack],
        };
        let out = solve_cone(&prog, &SolveOptions::default());
        assert_eq!(out.status, SdpStatus::Optimal);
        assert!((out.pobj + 2.0).abs() < 1e-6);
        assert!((out.s[0].get(0, 0) - 1.0).abs() < 1e-5);
        assert!((out.s[0].get(1, 1) - 1.0).abs() < 1e-5);
        assert!(out.s[0].get(0, 1).abs() < 1e-5);
    }

    #[test]
    fn infeasible_program_does_not_certify() {
        // x >= 0 and -1 - x >= 0 cannot hold together.
        let prog = ConeProgram {
            c: alloc::vec![1.0],
            blocks: alloc::vec![lp_block(&[(0, 1.0)], 0.0), lp_block(&[(0, -1.0)], -1.0)],
        };
        let opts = SolveOptions {
            max_iter: 60,
            ..SolveOptions::default()
        };
        let out = solve_cone(&prog, &opts);
        assert_ne!(out.status, SdpStatus::Optimal);
    }

    #[test]
    fn lyapunov_solution_satisfies_equation() {
        let mut v = RMat::zeros(3);
        for (i, val) in [2.0, 1.0, 0.5].iter().enumerate() {
            v.add_at(i, i, *val);
        }
        let mut rhs = RMat::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                rhs.add_at(i, j, ((i + 2 * j) as f64).sin());
            }
        }
        rhs.symmetrize();
        let (vals, vecs) = eigh_real(&v).unwrap();
        let k = lyapunov_solve(&vals, &vecs, &rhs);
        let mut check = v.matmul(&k);
        check.add_scaled(&k.matmul(&v), 1.0);
        check.add_scaled(&rhs, -2.0);
        assert!(check.frobenius_norm() < 1e-12);
    }
}
