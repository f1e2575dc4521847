//! A deterministic primal-dual interior-point solver for conic programs
//! with a block-arrow shape: a modest free/nonnegative part coupled to many
//! small PSD blocks through sparse equalities.
//!
//! The method is infeasible-start path following with Nesterov-Todd scaling
//! and a Mehrotra predictor-corrector step. Free variables stay in the
//! Newton system directly; static regularization keeps the reduced system
//! factorizable and two rounds of iterative refinement recover the accuracy
//! the regularization takes away. Per-block elimination reduces each Newton
//! solve to small per-component Cholesky factorizations plus one dense
//! Schur complement over the coupling (free) variables, so cost grows
//! linearly in the number of per-sample blocks.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sosfit::ConicProblem;

type Chol = nalgebra::Cholesky<f64, nalgebra::Dyn>;

/// Fraction-to-boundary step damping.
const STEP_FRACTION: f64 = 0.99;
/// Iterative refinement rounds on each Newton solve.
const REFINE_ROUNDS: usize = 2;
/// Fixed chunk granularity for deterministic parallel reduction.
const MAX_CHUNKS: usize = 16;

// --- Public types -----------------------------------------------------------

/// Variable layout of a standard-form problem: free block, nonnegative
/// block, then PSD blocks in symmetric-vectorized form (lower triangle,
/// column-major, off-diagonal entries scaled by sqrt(2)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeLayout {
    pub n_free: usize,
    pub n_nonneg: usize,
    pub psd_blocks: Vec<usize>,
}

pub fn svec_len(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Position of matrix entry `(i, j)`, `i >= j`, in the svec ordering.
pub fn svec_index(i: usize, j: usize, m: usize) -> usize {
    debug_assert!(i >= j && i < m);
    // Column-major lower triangle: columns 0..j come first.
    j * m - j * (j + 1) / 2 + i
}

pub fn mat_to_svec(mat: &DMatrix<f64>) -> Vec<f64> {
    let m = mat.nrows();
    let mut out = vec![0.0; svec_len(m)];
    for j in 0..m {
        for i in j..m {
            let v = 0.5 * (mat[(i, j)] + mat[(j, i)]);
            out[svec_index(i, j, m)] = if i == j { v } else { v * std::f64::consts::SQRT_2 };
        }
    }
    out
}

pub fn svec_to_mat(v: &[f64], m: usize) -> DMatrix<f64> {
    let mut mat = DMatrix::zeros(m, m);
    for j in 0..m {
        for i in j..m {
            let e = v[svec_index(i, j, m)];
            if i == j {
                mat[(i, j)] = e;
            } else {
                let w = e / std::f64::consts::SQRT_2;
                mat[(i, j)] = w;
                mat[(j, i)] = w;
            }
        }
    }
    mat
}

impl ConeLayout {
    pub fn new(n_free: usize, n_nonneg: usize, psd_blocks: Vec<usize>) -> Self {
        ConeLayout { n_free, n_nonneg, psd_blocks }
    }

    /// Total dimension of the cone part in svec form.
    pub fn cone_dim(&self) -> usize {
        self.n_nonneg + self.psd_blocks.iter().map(|&m| svec_len(m)).sum::<usize>()
    }

    pub fn total_dim(&self) -> usize {
        self.n_free + self.cone_dim()
    }

    /// Barrier degree: orthant count plus the sum of block sides.
    pub fn barrier_degree(&self) -> usize {
        self.n_nonneg + self.psd_blocks.iter().sum::<usize>()
    }

    /// Cone-local offset of PSD block `j` (after the nonnegative block).
    pub fn block_offset(&self, j: usize) -> usize {
        self.n_nonneg + self.psd_blocks[..j].iter().map(|&m| svec_len(m)).sum::<usize>()
    }
}

/// Solver tolerances and controls.
#[derive(Debug, Clone)]
pub struct SolverSettings {
    /// Relative duality-gap tolerance.
    pub tol_gap: f64,
    /// Primal/dual residual tolerance.
    pub tol_feas: f64,
    /// Normalized infeasibility-certificate threshold.
    pub tol_infeas: f64,
    pub max_iter: usize,
    /// Static regularization on both diagonal blocks of the KKT system.
    pub static_reg: f64,
    /// Worker threads for per-block elimination (results are identical for
    /// any value).
    pub threads: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol_gap: 1e-8,
            tol_feas: 1e-8,
            tol_infeas: 1e-8,
            max_iter: 200,
            static_reg: 1e-9,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
    NumericalFailure,
}

impl std::fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolverStatus::Optimal => "optimal",
            SolverStatus::PrimalInfeasible => "primal infeasible",
            SolverStatus::DualInfeasible => "dual infeasible",
            SolverStatus::IterationLimit => "iteration limit",
            SolverStatus::NumericalFailure => "numerical failure",
        };
        f.write_str(s)
    }
}

/// Solver output: primal/dual iterates in the original (unscaled) data,
/// objective values and residual norms.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolverStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Dual cone variable aligned with the full variable vector; the free
    /// block is identically zero.
    pub z: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

// --- Sparse matrix -----------------------------------------------------------

/// Row-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidParams(format!(
                    "triplet ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for (r, c, v) in merged {
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(SparseMatrix { nrows, ncols, row_ptr, col_idx, values })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.nrows);
        let mut out = vec![0.0; self.ncols];
        for r in 0..self.nrows {
            let yr = y[r];
            if yr != 0.0 {
                for (c, v) in self.row(r) {
                    out[c] += v * yr;
                }
            }
        }
        out
    }

    /// Copy with entry `(r, c)` mapped through `f(r, c, v)`.
    fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64) -> SparseMatrix {
        let mut out = self.clone();
        for r in 0..self.nrows {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            for k in lo..hi {
                out.values[k] = f(r, self.col_idx[k], self.values[k]);
            }
        }
        out
    }
}

// --- Equilibration -----------------------------------------------------------

struct Scaled {
    a: SparseMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    obj_scale: f64,
}

/// Ruiz equilibration. Nonnegative and free columns scale individually;
/// all svec columns of one PSD block share a scale so the block stays a
/// uniform multiple of a PSD matrix.
fn equilibrate(problem: &ConicProblem) -> Scaled {
    let a = &problem.matrix;
    let layout = &problem.layout;
    let ncols = a.ncols();
    let nrows = a.nrows();
    let mut row_scale = vec![1.0f64; nrows];
    let mut col_scale = vec![1.0f64; ncols];

    // Column group id: free/nonneg columns are their own group; svec columns
    // share the block's group.
    let mut group_of = vec![0usize; ncols];
    let mut n_groups = layout.n_free + layout.n_nonneg;
    for c in 0..(layout.n_free + layout.n_nonneg) {
        group_of[c] = c;
    }
    {
        let mut col = layout.n_free + layout.n_nonneg;
        for &m in &layout.psd_blocks {
            for _ in 0..svec_len(m) {
                group_of[col] = n_groups;
                col += 1;
            }
            n_groups += 1;
        }
    }

    for _ in 0..3 {
        let mut row_max = vec![0.0f64; nrows];
        let mut group_max = vec![0.0f64; n_groups];
        for (r, c, v) in a.triplets() {
            let e = (v * row_scale[r] * col_scale[c]).abs();
            row_max[r] = row_max[r].max(e);
            group_max[group_of[c]] = group_max[group_of[c]].max(e);
        }
        for r in 0..nrows {
            if row_max[r] > 0.0 {
                row_scale[r] /= row_max[r].sqrt();
            }
        }
        for c in 0..ncols {
            let g = group_max[group_of[c]];
            if g > 0.0 {
                col_scale[c] /= g.sqrt();
            }
        }
    }

    let a_scaled = a.map_values(|r, c, v| v * row_scale[r] * col_scale[c]);
    let b: Vec<f64> = problem.rhs.iter().zip(&row_scale).map(|(&b, &s)| b * s).collect();
    let mut c: Vec<f64> =
        problem.objective.iter().zip(&col_scale).map(|(&c0, &s)| c0 * s).collect();
    let obj_scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for v in &mut c {
        *v /= obj_scale;
    }
    Scaled { a: a_scaled, b, c, row_scale, col_scale, obj_scale }
}

// --- Block-arrow structure ---------------------------------------------------

/// Rows and cone columns that must be eliminated together: connected
/// components of the row/cone-column incidence graph after making each PSD
/// block atomic. Components interact only through the free columns.
struct Component {
    rows: Vec<usize>,
    nonneg: Vec<usize>, // global cone-local indices into the orthant part
    blocks: Vec<usize>, // psd block ids
    cone_dim: usize,
    /// Sparse rows over local cone coordinates.
    c_rows: Vec<Vec<(usize, f64)>>,
    /// Sparse rows over free coordinates.
    b_rows: Vec<Vec<(usize, f64)>>,
}

struct Structure {
    comps: Vec<Component>,
    /// Fixed chunk boundaries for deterministic parallel reduction.
    chunks: Vec<std::ops::Range<usize>>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = i;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, i: usize, j: usize) {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri != rj {
            // Deterministic: smaller root wins.
            let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
            self.0[hi] = lo;
        }
    }
}

fn analyze(a: &SparseMatrix, layout: &ConeLayout) -> Structure {
    let n_free = layout.n_free;
    let cone_dim = layout.cone_dim();
    let mut uf = UnionFind::new(cone_dim);

    // PSD blocks are atomic.
    for (j, &m) in layout.psd_blocks.iter().enumerate() {
        let off = layout.block_offset(j);
        for k in 1..svec_len(m) {
            uf.union(off, off + k);
        }
    }
    // Cone columns sharing a row merge.
    for r in 0..a.nrows() {
        let mut first: Option<usize> = None;
        for (c, _) in a.row(r) {
            if c >= n_free {
                let local = c - n_free;
                match first {
                    None => first = Some(local),
                    Some(f) => uf.union(f, local),
                }
            }
        }
    }

    // Component ids in deterministic order of first appearance over cone
    // indices, then rows.
    let mut comp_of_root: std::collections::HashMap<usize, usize> = Default::default();
    let mut comps: Vec<Component> = Vec::new();
    let mut cone_home = vec![(usize::MAX, usize::MAX); cone_dim];

    let mut comp_id_of_cone = vec![usize::MAX; cone_dim];
    for i in 0..cone_dim {
        let root = uf.find(i);
        let id = *comp_of_root.entry(root).or_insert_with(|| {
            comps.push(Component {
                rows: vec![],
                nonneg: vec![],
                blocks: vec![],
                cone_dim: 0,
                c_rows: vec![],
                b_rows: vec![],
            });
            comps.len() - 1
        });
        comp_id_of_cone[i] = id;
    }
    // Local layout per component: orthant entries in global order, then
    // blocks in global order.
    for i in 0..layout.n_nonneg {
        let id = comp_id_of_cone[i];
        let local = comps[id].cone_dim;
        comps[id].nonneg.push(i);
        comps[id].cone_dim += 1;
        cone_home[i] = (id, local);
    }
    for (j, &m) in layout.psd_blocks.iter().enumerate() {
        let off = layout.block_offset(j);
        let id = comp_id_of_cone[off];
        let base = comps[id].cone_dim;
        comps[id].blocks.push(j);
        comps[id].cone_dim += svec_len(m);
        for k in 0..svec_len(m) {
            cone_home[off + k] = (id, base + k);
        }
    }

    // Assign rows; rows with no cone columns get their own singleton
    // components.
    for r in 0..a.nrows() {
        let mut target: Option<usize> = None;
        for (c, _) in a.row(r) {
            if c >= n_free {
                target = Some(cone_home[c - n_free].0);
                break;
            }
        }
        let id = target.unwrap_or_else(|| {
            comps.push(Component {
                rows: vec![],
                nonneg: vec![],
                blocks: vec![],
                cone_dim: 0,
                c_rows: vec![],
                b_rows: vec![],
            });
            comps.len() - 1
        });
        let mut c_row = Vec::new();
        let mut b_row = Vec::new();
        for (c, v) in a.row(r) {
            if c >= n_free {
                c_row.push((cone_home[c - n_free].1, v));
            } else {
                b_row.push((c, v));
            }
        }
        comps[id].rows.push(r);
        comps[id].c_rows.push(c_row);
        comps[id].b_rows.push(b_row);
    }

    let n_comps = comps.len();
    let n_chunks = n_comps.clamp(1, MAX_CHUNKS);
    let per = n_comps.div_ceil(n_chunks);
    let chunks = (0..n_chunks)
        .map(|k| (k * per)..(((k + 1) * per).min(n_comps)))
        .filter(|r| !r.is_empty())
        .collect();

    Structure { comps, chunks }
}

// --- Nesterov-Todd scaling ---------------------------------------------------

struct PsdScaling {
    /// Inverse of the NT scaling matrix `T` defined by `T Z T = X`.
    t_inv: DMatrix<f64>,
    t_half: DMatrix<f64>,
    t_inv_half: DMatrix<f64>,
    /// Eigendecomposition of the scaled point for the corrector Lyapunov
    /// solve.
    lam_vecs: DMatrix<f64>,
    lam_vals: DVector<f64>,
    x_chol: Chol,
    z_chol: Chol,
    x_inv: DMatrix<f64>,
}

struct Scaling {
    /// Orthant `z_i / x_i` (the inverse NT scaling).
    orthant_hinv: Vec<f64>,
    psd: Vec<PsdScaling>,
}

fn sym_eigen(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, DVector<f64>)> {
    if m.nrows() == 1 {
        return Some((DMatrix::identity(1, 1), DVector::from_element(1, m[(0, 0)])));
    }
    let sym = 0.5 * (m + m.transpose());
    let e = nalgebra::SymmetricEigen::new(sym);
    Some((e.eigenvectors, e.eigenvalues))
}

fn psd_scaling(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<PsdScaling> {
    let x_chol = Chol::new(x.clone())?;
    let z_chol = Chol::new(z.clone())?;
    let l = x_chol.l();
    let y = l.transpose() * z * &l;
    let (q, d) = sym_eigen(&y)?;
    if d.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let d_inv_half = DMatrix::from_diagonal(&d.map(|v| 1.0 / v.sqrt()));
    let t = &l * &q * d_inv_half * q.transpose() * l.transpose();
    let t = 0.5 * (&t + t.transpose());
    let (p, e) = sym_eigen(&t)?;
    if e.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let mk = |f: fn(f64) -> f64| {
        let diag = DMatrix::from_diagonal(&e.map(f));
        let mat = &p * diag * p.transpose();
        0.5 * (&mat + mat.transpose())
    };
    let t_inv = mk(|v| 1.0 / v);
    let t_half = mk(f64::sqrt);
    let t_inv_half = mk(|v| 1.0 / v.sqrt());
    // Scaled point Lambda = T^{1/2} Z T^{1/2}.
    let lam = &t_half * z * &t_half;
    let (lam_vecs, lam_vals) = sym_eigen(&lam)?;
    if lam_vals.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let x_inv = x_chol.inverse();
    Some(PsdScaling {
        t_inv,
        t_half,
        t_inv_half,
        lam_vecs,
        lam_vals,
        x_chol,
        z_chol,
        x_inv: 0.5 * (&x_inv + x_inv.transpose()),
    })
}

/// Dense svec-space operator of `U -> A U A` for symmetric `A`.
fn sym_kron(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    let d = svec_len(m);
    let mut out = DMatrix::zeros(d, d);
    let mut basis = DMatrix::zeros(m, m);
    for j in 0..m {
        for i in j..m {
            let col = svec_index(i, j, m);
            let v = if i == j { 1.0 } else { 1.0 / std::f64::consts::SQRT_2 };
            basis[(i, j)] = v;
            basis[(j, i)] = v;
            let img = a * &basis * a;
            let sv = mat_to_svec(&img);
            for (r, &e) in sv.iter().enumerate() {
                out[(r, col)] = e;
            }
            basis[(i, j)] = 0.0;
            basis[(j, i)] = 0.0;
        }
    }
    0.5 * (&out + out.transpose())
}

// --- Workspace ----------------------------------------------------------------

struct Iterate {
    x: Vec<f64>, // total_dim
    y: Vec<f64>, // nrows
    z: Vec<f64>, // cone_dim
}

struct CompFactor {
    /// Diagonal of G over local orthant entries.
    g_diag: Vec<f64>,
    /// Per local PSD block: Cholesky of `Hinv_svec + eps I`.
    g_blocks: Vec<Chol>,
    /// Cholesky of `C G C^T + delta I`.
    m_chol: Option<Chol>,
}

struct Factors {
    comp: Vec<CompFactor>,
    s_chol: Option<Chol>,
}

struct Solver<'a> {
    layout: &'a ConeLayout,
    a: &'a SparseMatrix,
    structure: Structure,
    settings: SolverSettings,
    pool: Option<rayon::ThreadPool>,
}

impl Component {
    /// Apply `G = (Hinv + eps I)^{-1}` to a local cone vector.
    fn apply_g(&self, f: &CompFactor, layout: &ConeLayout, v: &mut [f64]) {
        for (li, _) in self.nonneg.iter().enumerate() {
            v[li] *= f.g_diag[li];
        }
        let mut off = self.nonneg.len();
        for (bi, &bj) in self.blocks.iter().enumerate() {
            let d = svec_len(layout.psd_blocks[bj]);
            let mut seg = DVector::from_column_slice(&v[off..off + d]);
            f.g_blocks[bi].solve_mut(&mut seg);
            v[off..off + d].copy_from_slice(seg.as_slice());
            off += d;
        }
    }
}

impl<'a> Solver<'a> {
    fn cone_slice<'b>(&self, x: &'b [f64]) -> &'b [f64] {
        &x[self.layout.n_free..]
    }

    /// `Hinv` applied to a global cone vector (matrix form per block).
    fn apply_hinv(&self, s: &Scaling, v: &[f64], out: &mut [f64]) {
        for i in 0..self.layout.n_nonneg {
            out[i] = s.orthant_hinv[i] * v[i];
        }
        for (j, &m) in self.layout.psd_blocks.iter().enumerate() {
            let off = self.layout.block_offset(j);
            let mat = svec_to_mat(&v[off..off + svec_len(m)], m);
            let img = &s.psd[j].t_inv * mat * &s.psd[j].t_inv;
            let sv = mat_to_svec(&img);
            out[off..off + svec_len(m)].copy_from_slice(&sv);
        }
    }

    fn scaling(&self, it: &Iterate) -> Option<Scaling> {
        let z = &it.z;
        let xc = self.cone_slice(&it.x);
        let mut orthant_hinv = Vec::with_capacity(self.layout.n_nonneg);
        for i in 0..self.layout.n_nonneg {
            if xc[i] <= 0.0 || z[i] <= 0.0 {
                return None;
            }
            orthant_hinv.push(z[i] / xc[i]);
        }
        let psd: Vec<Option<PsdScaling>> = self
            .layout
            .psd_blocks
            .iter()
            .enumerate()
            .map(|(j, &m)| {
                let off = self.layout.block_offset(j);
                let xm = svec_to_mat(&xc[off..off + svec_len(m)], m);
                let zm = svec_to_mat(&z[off..off + svec_len(m)], m);
                psd_scaling(&xm, &zm)
            })
            .collect();
        if psd.iter().any(Option::is_none) {
            return None;
        }
        Some(Scaling { orthant_hinv, psd: psd.into_iter().flatten().collect() })
    }

    fn run_chunks<T: Send>(&self, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
        let ids: Vec<usize> = (0..self.structure.chunks.len()).collect();
        match &self.pool {
            Some(pool) if self.structure.chunks.len() > 1 => {
                pool.install(|| ids.par_iter().map(|&k| job(k)).collect())
            }
            _ => ids.iter().map(|&k| job(k)).collect(),
        }
    }

    /// Build per-component factors and the Schur complement for the current
    /// scaling, retrying with stronger regularization on breakdown.
    fn factorize(&self, s: &Scaling) -> Option<Factors> {
        let n_free = self.layout.n_free;
        for bump in 0..4 {
            let eps = self.settings.static_reg * 100f64.powi(bump);
            let delta = eps;
            let parts: Vec<Option<(Vec<CompFactor>, DMatrix<f64>)>> =
                self.run_chunks(|chunk_id| {
                    let range = self.structure.chunks[chunk_id].clone();
                    let mut s_part = DMatrix::zeros(n_free, n_free);
                    let mut factors = Vec::with_capacity(range.len());
                    for ci in range {
                        let comp = &self.structure.comps[ci];
                        let f = self.component_factor(comp, s, eps, delta, &mut s_part)?;
                        factors.push(f);
                    }
                    Some((factors, s_part))
                });
            if parts.iter().any(Option::is_none) {
                continue;
            }
            let mut comp_factors = Vec::with_capacity(self.structure.comps.len());
            let mut schur = DMatrix::from_diagonal_element(n_free, n_free, eps);
            for part in parts.into_iter().flatten() {
                comp_factors.extend(part.0);
                schur += part.1;
            }
            // Mirror the accumulated lower triangle.
            for i in 0..n_free {
                for j in (i + 1)..n_free {
                    schur[(i, j)] = schur[(j, i)];
                }
            }
            let s_chol = if n_free > 0 {
                match Chol::new(schur) {
                    Some(c) => Some(c),
                    None => continue,
                }
            } else {
                None
            };
            return Some(Factors { comp: comp_factors, s_chol });
        }
        None
    }

    fn component_factor(
        &self,
        comp: &Component,
        s: &Scaling,
        eps: f64,
        delta: f64,
        s_part: &mut DMatrix<f64>,
    ) -> Option<CompFactor> {
        // G factors.
        let g_diag: Vec<f64> =
            comp.nonneg.iter().map(|&gi| 1.0 / (s.orthant_hinv[gi] + eps)).collect();
        let mut g_blocks = Vec::with_capacity(comp.blocks.len());
        for &bj in &comp.blocks {
            let mut hinv = sym_kron(&s.psd[bj].t_inv);
            for d in 0..hinv.nrows() {
                hinv[(d, d)] += eps;
            }
            g_blocks.push(Chol::new(hinv)?);
        }
        let f = CompFactor { g_diag, g_blocks, m_chol: None };

        let nr = comp.rows.len();
        if nr == 0 {
            return Some(f);
        }
        // M = C G C^T + delta I.
        let mut m = DMatrix::from_diagonal_element(nr, nr, delta);
        let mut gc = vec![0.0; comp.cone_dim];
        for (r, c_row) in comp.c_rows.iter().enumerate() {
            gc.iter_mut().for_each(|v| *v = 0.0);
            for &(li, v) in c_row {
                gc[li] = v;
            }
            comp.apply_g(&f, self.layout, &mut gc);
            for (r2, c_row2) in comp.c_rows.iter().enumerate() {
                let dot: f64 = c_row2.iter().map(|&(li, v)| v * gc[li]).sum();
                m[(r2, r)] += dot;
            }
        }
        let m_chol = Chol::new(m)?;

        // Schur contribution: with K = L^{-1} B (rows x n_free), add K^T K.
        let n_free = self.layout.n_free;
        if n_free > 0 {
            let mut bloc = DMatrix::zeros(nr, n_free);
            for (r, b_row) in comp.b_rows.iter().enumerate() {
                for &(cj, v) in b_row {
                    bloc[(r, cj)] = v;
                }
            }
            let l = m_chol.l_dirty();
            // Forward substitution in place: bloc <- L^{-1} bloc.
            for i in 0..nr {
                for k in 0..i {
                    let lik = l[(i, k)];
                    if lik != 0.0 {
                        for j in 0..n_free {
                            let t = bloc[(k, j)] * lik;
                            bloc[(i, j)] -= t;
                        }
                    }
                }
                let inv = 1.0 / l[(i, i)];
                for j in 0..n_free {
                    bloc[(i, j)] *= inv;
                }
            }
            // Lower-triangle accumulation of K^T K.
            for r in 0..nr {
                let row = bloc.row(r);
                for j in 0..n_free {
                    let kv = row[j];
                    if kv != 0.0 {
                        for i in j..n_free {
                            s_part[(i, j)] += kv * row[i];
                        }
                    }
                }
            }
        }
        Some(CompFactor { m_chol: Some(m_chol), ..f })
    }

    /// Solve the reduced KKT system
    /// `[-(Hinv) A^T; A 0] [dx; dy] = [r1; r2]`
    /// through the factored regularized system plus iterative refinement.
    fn kkt_solve(
        &self,
        s: &Scaling,
        f: &Factors,
        r1: &[f64],
        r2: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let (mut dx, mut dy) = self.kkt_solve_once(f, r1, r2);
        for _ in 0..REFINE_ROUNDS {
            let (res1, res2) = self.kkt_residual(s, r1, r2, &dx, &dy);
            let (cx, cy) = self.kkt_solve_once(f, &res1, &res2);
            for (v, c) in dx.iter_mut().zip(&cx) {
                *v += c;
            }
            for (v, c) in dy.iter_mut().zip(&cy) {
                *v += c;
            }
        }
        (dx, dy)
    }

    fn kkt_residual(
        &self,
        s: &Scaling,
        r1: &[f64],
        r2: &[f64],
        dx: &[f64],
        dy: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let n_free = self.layout.n_free;
        let at_dy = self.a.tr_mul_vec(dy);
        let mut res1 = vec![0.0; self.layout.total_dim()];
        for j in 0..n_free {
            res1[j] = r1[j] - at_dy[j];
        }
        let mut hinv_dx = vec![0.0; self.layout.cone_dim()];
        self.apply_hinv(s, &dx[n_free..], &mut hinv_dx);
        for i in 0..self.layout.cone_dim() {
            res1[n_free + i] = r1[n_free + i] - (at_dy[n_free + i] - hinv_dx[i]);
        }
        let a_dx = self.a.mul_vec(dx);
        let res2: Vec<f64> = r2.iter().zip(&a_dx).map(|(&r, &v)| r - v).collect();
        (res1, res2)
    }

    fn kkt_solve_once(&self, f: &Factors, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n_free = self.layout.n_free;
        let n_comps = self.structure.comps.len();

        // Per component: u = M^{-1} (r2_local + C G r1_local).
        let partials: Vec<(Vec<DVector<f64>>, Vec<f64>)> = self.run_chunks(|chunk_id| {
            let range = self.structure.chunks[chunk_id].clone();
            let mut us = Vec::with_capacity(range.len());
            let mut rhs_part = vec![0.0; n_free];
            for ci in range.clone() {
                let comp = &self.structure.comps[ci];
                let cf = &f.comp[ci];
                let mut gw = vec![0.0; comp.cone_dim];
                for (li, &gi) in comp.nonneg.iter().enumerate() {
                    gw[li] = r1[n_free + gi];
                }
                let mut off = comp.nonneg.len();
                for &bj in &comp.blocks {
                    let d = svec_len(self.layout.psd_blocks[bj]);
                    let goff = n_free + self.layout.block_offset(bj);
                    gw[off..off + d].copy_from_slice(&r1[goff..goff + d]);
                    off += d;
                }
                comp.apply_g(cf, self.layout, &mut gw);

                let nr = comp.rows.len();
                let mut rt = DVector::zeros(nr);
                for (r, &grow) in comp.rows.iter().enumerate() {
                    let cdot: f64 = comp.c_rows[r].iter().map(|&(li, v)| v * gw[li]).sum();
                    rt[r] = r2[grow] + cdot;
                }
                if let Some(m_chol) = &cf.m_chol {
                    m_chol.solve_mut(&mut rt);
                }
                // rhs_theta += B^T u.
                for (r, b_row) in comp.b_rows.iter().enumerate() {
                    let ur = rt[r];
                    if ur != 0.0 {
                        for &(cj, v) in b_row {
                            rhs_part[cj] += v * ur;
                        }
                    }
                }
                us.push(rt);
            }
            (us, rhs_part)
        });

        let mut us: Vec<DVector<f64>> = Vec::with_capacity(n_comps);
        let mut rhs_theta = vec![0.0; n_free];
        for (u_chunk, rhs_part) in partials {
            us.extend(u_chunk);
            for (acc, v) in rhs_theta.iter_mut().zip(&rhs_part) {
                *acc += v;
            }
        }
        for j in 0..n_free {
            rhs_theta[j] -= r1[j];
        }
        let dtheta: Vec<f64> = match &f.s_chol {
            Some(chol) => {
                let mut v = DVector::from_column_slice(&rhs_theta);
                chol.solve_mut(&mut v);
                v.as_slice().to_vec()
            }
            None => vec![],
        };

        // Back substitution per component: dy rows, then the cone part of dx.
        let mut dx = vec![0.0; self.layout.total_dim()];
        dx[..n_free].copy_from_slice(&dtheta);
        let mut dy = vec![0.0; self.a.nrows()];
        let results: Vec<Vec<(usize, Vec<f64>, Vec<f64>)>> = self.run_chunks(|chunk_id| {
            let range = self.structure.chunks[chunk_id].clone();
            let mut out = Vec::with_capacity(range.len());
            for ci in range {
                let comp = &self.structure.comps[ci];
                let cf = &f.comp[ci];
                let nr = comp.rows.len();
                let mut v = us[ci].clone();
                if nr > 0 {
                    let mut bd = DVector::zeros(nr);
                    for (r, b_row) in comp.b_rows.iter().enumerate() {
                        bd[r] = b_row.iter().map(|&(cj, w)| w * dtheta[cj]).sum();
                    }
                    if let Some(m_chol) = &cf.m_chol {
                        m_chol.solve_mut(&mut bd);
                    }
                    v -= bd;
                }
                // dxc = G (C^T dy_local - r1_c).
                let mut rhs = vec![0.0; comp.cone_dim];
                for (r, c_row) in comp.c_rows.iter().enumerate() {
                    let vr = v[r];
                    if vr != 0.0 {
                        for &(li, w) in c_row {
                            rhs[li] += w * vr;
                        }
                    }
                }
                for (li, &gi) in comp.nonneg.iter().enumerate() {
                    rhs[li] -= r1[n_free + gi];
                }
                let mut off = comp.nonneg.len();
                for &bj in &comp.blocks {
                    let d = svec_len(self.layout.psd_blocks[bj]);
                    let goff = n_free + self.layout.block_offset(bj);
                    for k in 0..d {
                        rhs[off + k] -= r1[goff + k];
                    }
                    off += d;
                }
                comp.apply_g(cf, self.layout, &mut rhs);
                out.push((ci, rhs, v.as_slice().to_vec()));
            }
            out
        });
        for chunk in results {
            for (ci, dxc, dyr) in chunk {
                let comp = &self.structure.comps[ci];
                for (li, &gi) in comp.nonneg.iter().enumerate() {
                    dx[n_free + gi] = dxc[li];
                }
                let mut off = comp.nonneg.len();
                for &bj in &comp.blocks {
                    let d = svec_len(self.layout.psd_blocks[bj]);
                    let goff = n_free + self.layout.block_offset(bj);
                    dx[goff..goff + d].copy_from_slice(&dxc[off..off + d]);
                    off += d;
                }
                for (r, &grow) in comp.rows.iter().enumerate() {
                    dy[grow] = dyr[r];
                }
            }
        }
        (dx, dy)
    }
}

// --- Cone operations ---------------------------------------------------------

fn cone_inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Largest step `alpha` with `x + alpha dx` staying in the cone; `f64::MAX`
/// when unconstrained.
fn step_to_boundary(layout: &ConeLayout, scal: &Scaling, x: &[f64], dx: &[f64], dual: bool) -> f64 {
    let mut alpha = f64::MAX;
    for i in 0..layout.n_nonneg {
        if dx[i] < 0.0 {
            alpha = alpha.min(-x[i] / dx[i]);
        }
    }
    for (j, &m) in layout.psd_blocks.iter().enumerate() {
        let off = layout.block_offset(j);
        let d = svec_len(m);
        let dm = svec_to_mat(&dx[off..off + d], m);
        let chol = if dual { &scal.psd[j].z_chol } else { &scal.psd[j].x_chol };
        let l = chol.l();
        // W = L^{-1} dM L^{-T}; alpha bound is -1 / lambda_min(W).
        let li = match l.solve_lower_triangular(&dm) {
            Some(v) => v,
            None => return 0.0,
        };
        let w = match l.solve_lower_triangular(&li.transpose()) {
            Some(v) => v,
            None => return 0.0,
        };
        if let Some((_, vals)) = sym_eigen(&w) {
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < 0.0 {
                alpha = alpha.min(-1.0 / min);
            }
        }
    }
    alpha
}

/// Jordan inverse of a cone point.
fn cone_inverse(layout: &ConeLayout, scal: &Scaling, x: &[f64], primal: bool) -> Vec<f64> {
    let mut out = vec![0.0; layout.cone_dim()];
    for i in 0..layout.n_nonneg {
        out[i] = 1.0 / x[i];
    }
    for j in 0..layout.psd_blocks.len() {
        let off = layout.block_offset(j);
        let d = svec_len(layout.psd_blocks[j]);
        let inv = if primal {
            scal.psd[j].x_inv.clone()
        } else {
            let zi = scal.psd[j].z_chol.inverse();
            0.5 * (&zi + zi.transpose())
        };
        out[off..off + d].copy_from_slice(&mat_to_svec(&inv));
    }
    out
}

// --- Main solve ---------------------------------------------------------------

/// Solve a standard-form conic problem. Deterministic: identical inputs and
/// settings produce bitwise-identical iterates for any thread count.
pub fn solve(problem: &ConicProblem, settings: &SolverSettings) -> Result<Solution> {
    let layout = &problem.layout;
    let total = layout.total_dim();
    if problem.objective.len() != total {
        return Err(Error::DimensionMismatch { expected: total, got: problem.objective.len() });
    }
    if problem.matrix.ncols() != total {
        return Err(Error::DimensionMismatch { expected: total, got: problem.matrix.ncols() });
    }
    if problem.rhs.len() != problem.matrix.nrows() {
        return Err(Error::DimensionMismatch {
            expected: problem.matrix.nrows(),
            got: problem.rhs.len(),
        });
    }

    let scaled = equilibrate(problem);
    let structure = analyze(&scaled.a, layout);
    let pool = if settings.threads > 1 {
        rayon::ThreadPoolBuilder::new().num_threads(settings.threads).build().ok()
    } else {
        None
    };
    let solver =
        Solver { layout, a: &scaled.a, structure, settings: settings.clone(), pool };

    let n_free = layout.n_free;
    let cone_dim = layout.cone_dim();
    let nrows = scaled.a.nrows();
    let nu = layout.barrier_degree().max(1);

    // Unit initialization, mildly scaled to the data.
    let b_inf = scaled.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c_inf = scaled.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rho_p = (1.0 + b_inf).sqrt();
    let rho_d = (1.0 + c_inf).sqrt();
    let mut it = Iterate { x: vec![0.0; total], y: vec![0.0; nrows], z: vec![0.0; cone_dim] };
    for i in 0..layout.n_nonneg {
        it.x[n_free + i] = rho_p;
        it.z[i] = rho_d;
    }
    for (j, &m) in layout.psd_blocks.iter().enumerate() {
        let off = layout.block_offset(j);
        for d in 0..m {
            it.x[n_free + off + svec_index(d, d, m)] = rho_p;
            it.z[off + svec_index(d, d, m)] = rho_d;
        }
    }

    let unscale = |it: &Iterate| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let x: Vec<f64> =
            it.x.iter().zip(&scaled.col_scale).map(|(&v, &s)| v * s).collect();
        let y: Vec<f64> =
            it.y.iter().zip(&scaled.row_scale).map(|(&v, &s)| v * s * scaled.obj_scale).collect();
        let mut z = vec![0.0; total];
        for i in 0..cone_dim {
            z[n_free + i] = it.z[i] * scaled.obj_scale / scaled.col_scale[n_free + i];
        }
        (x, y, z)
    };

    let metrics = |x: &[f64], y: &[f64], z: &[f64]| -> (f64, f64, f64, f64, f64) {
        let ax = problem.matrix.mul_vec(x);
        let aty = problem.matrix.tr_mul_vec(y);
        let b_inf0 = problem.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let c_inf0 = problem.objective.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rp = ax
            .iter()
            .zip(&problem.rhs)
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()))
            / (1.0 + b_inf0);
        let rd = (0..total)
            .map(|jj| problem.objective[jj] - aty[jj] - z[jj])
            .fold(0.0f64, |m, v| m.max(v.abs()))
            / (1.0 + c_inf0);
        let p_obj: f64 = problem.objective.iter().zip(x).map(|(&c, &v)| c * v).sum();
        let d_obj: f64 = problem.rhs.iter().zip(y).map(|(&b, &v)| b * v).sum();
        let gap = (p_obj - d_obj).abs() / (1.0 + p_obj.abs());
        (rp, rd, gap, p_obj, d_obj)
    };

    let mut best: Option<(f64, Solution)> = None;
    let mut iterations = 0usize;

    for iter in 0..settings.max_iter {
        let (xu, yu, zu) = unscale(&it);
        let (rp, rd, gap, p_obj, d_obj) = metrics(&xu, &yu, &zu);

        let make_solution = |status: SolverStatus| Solution {
            status,
            x: xu.clone(),
            y: yu.clone(),
            z: zu.clone(),
            primal_objective: p_obj,
            dual_objective: d_obj,
            relative_gap: gap,
            primal_residual: rp,
            dual_residual: rd,
            iterations: iter,
        };

        if rp <= settings.tol_feas && rd <= settings.tol_feas && gap <= settings.tol_gap {
            return Ok(make_solution(SolverStatus::Optimal));
        }
        let score = rp.max(rd).max(gap);
        if best.as_ref().map_or(true, |(s, _)| score < *s) {
            best = Some((score, make_solution(SolverStatus::IterationLimit)));
        }

        // Infeasibility certificates on the unscaled iterates.
        {
            let bty: f64 = problem.rhs.iter().zip(&yu).map(|(&b, &v)| b * v).sum();
            let y_inf = yu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if bty > 1e-10 * (1.0 + y_inf) {
                let aty = problem.matrix.tr_mul_vec(&yu);
                let res = (0..total)
                    .map(|jj| aty[jj] + zu[jj])
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                if res <= settings.tol_infeas * bty {
                    return Ok(make_solution(SolverStatus::PrimalInfeasible));
                }
            }
            let ctx: f64 = problem.objective.iter().zip(&xu).map(|(&c, &v)| c * v).sum();
            let x_inf = xu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if ctx < -1e-10 * (1.0 + x_inf) {
                let ax = problem.matrix.mul_vec(&xu);
                let res = ax.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if res <= settings.tol_infeas * (-ctx) {
                    return Ok(make_solution(SolverStatus::DualInfeasible));
                }
            }
        }

        let scal = match solver.scaling(&it) {
            Some(s) => s,
            None => return Ok(best_or(best, SolverStatus::NumericalFailure)),
        };
        let factors = match solver.factorize(&scal) {
            Some(f) => f,
            None => return Ok(best_or(best, SolverStatus::NumericalFailure)),
        };

        let xc = solver.cone_slice(&it.x).to_vec();
        let mu = cone_inner(&xc, &it.z) / nu as f64;

        // Residuals in scaled space.
        let ax = scaled.a.mul_vec(&it.x);
        let r_p: Vec<f64> = scaled.b.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
        let aty = scaled.a.tr_mul_vec(&it.y);
        let mut r_d = vec![0.0; total];
        for j in 0..total {
            let zj = if j >= n_free { it.z[j - n_free] } else { 0.0 };
            r_d[j] = scaled.c[j] - aty[j] - zj;
        }

        // Predictor: d_c = -x, i.e. q = Hinv d_c = -z.
        let mut r1 = r_d.clone();
        for i in 0..cone_dim {
            r1[n_free + i] += it.z[i];
        }
        let (dx_a, _dy_a) = solver.kkt_solve(&scal, &factors, &r1, &r_p);
        // dz = q - Hinv dx.
        let mut hinv_dx = vec![0.0; cone_dim];
        solver.apply_hinv(&scal, &dx_a[n_free..], &mut hinv_dx);
        let dz_a: Vec<f64> = (0..cone_dim).map(|i| -it.z[i] - hinv_dx[i]).collect();

        let alpha_pa = step_to_boundary(layout, &scal, &xc, &dx_a[n_free..], false).min(1.0);
        let alpha_da = step_to_boundary(layout, &scal, &it.z, &dz_a, true).min(1.0);
        let mu_aff = {
            let xa: Vec<f64> =
                (0..cone_dim).map(|i| xc[i] + alpha_pa * dx_a[n_free + i]).collect();
            let za: Vec<f64> = (0..cone_dim).map(|i| it.z[i] + alpha_da * dz_a[i]).collect();
            cone_inner(&xa, &za) / nu as f64
        };
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Combined corrector: q = sigma mu x^{-1} - z - Hinv(corr).
        let x_inv = cone_inverse(layout, &scal, &xc, true);
        let mut q = vec![0.0; cone_dim];
        for i in 0..layout.n_nonneg {
            let corr = dx_a[n_free + i] * dz_a[i] / xc[i];
            q[i] = sigma * mu * x_inv[i] - it.z[i] - corr;
        }
        for (j, &m) in layout.psd_blocks.iter().enumerate() {
            let off = layout.block_offset(j);
            let d = svec_len(m);
            let ps = &scal.psd[j];
            let dxm = svec_to_mat(&dx_a[n_free + off..n_free + off + d], m);
            let dzm = svec_to_mat(&dz_a[off..off + d], m);
            // eta = sym((T^{-1/2} dX T^{-1/2})(T^{1/2} dZ T^{1/2}))
            let lx = &ps.t_inv_half * dxm * &ps.t_inv_half;
            let lz = &ps.t_half * dzm * &ps.t_half;
            let prod = &lx * &lz;
            let eta = 0.5 * (&prod + prod.transpose());
            // Solve Lambda U + U Lambda = 2 eta in the Lambda eigenbasis.
            let e_basis = ps.lam_vecs.transpose() * (2.0 * eta) * &ps.lam_vecs;
            let mut u = e_basis;
            for r in 0..m {
                for cidx in 0..m {
                    u[(r, cidx)] /= ps.lam_vals[r] + ps.lam_vals[cidx];
                }
            }
            let u = &ps.lam_vecs * u * ps.lam_vecs.transpose();
            // Hinv corr = T^{-1/2} U T^{-1/2}.
            let hc = &ps.t_inv_half * u * &ps.t_inv_half;
            let hc_sv = mat_to_svec(&(0.5 * (&hc + hc.transpose())));
            let zsl = &it.z[off..off + d];
            let xinv_sl = &x_inv[off..off + d];
            for k in 0..d {
                q[off + k] = sigma * mu * xinv_sl[k] - zsl[k] - hc_sv[k];
            }
        }
        let mut r1c = r_d.clone();
        for i in 0..cone_dim {
            r1c[n_free + i] -= q[i];
        }
        let (dx, dy) = solver.kkt_solve(&scal, &factors, &r1c, &r_p);
        let mut hinv_dxc = vec![0.0; cone_dim];
        solver.apply_hinv(&scal, &dx[n_free..], &mut hinv_dxc);
        let dz: Vec<f64> = (0..cone_dim).map(|i| q[i] - hinv_dxc[i]).collect();

        let alpha_p = (STEP_FRACTION
            * step_to_boundary(layout, &scal, &xc, &dx[n_free..], false))
        .min(1.0);
        let alpha_d =
            (STEP_FRACTION * step_to_boundary(layout, &scal, &it.z, &dz, true)).min(1.0);

        if !alpha_p.is_finite() || !alpha_d.is_finite() || alpha_p <= 0.0 || alpha_d <= 0.0 {
            return Ok(best_or(best, SolverStatus::NumericalFailure));
        }

        for j in 0..total {
            it.x[j] += alpha_p * dx[j];
        }
        for r in 0..nrows {
            it.y[r] += alpha_d * dy[r];
        }
        for i in 0..cone_dim {
            it.z[i] += alpha_d * dz[i];
        }
        if it.x.iter().any(|v| !v.is_finite())
            || it.z.iter().any(|v| !v.is_finite())
            || it.y.iter().any(|v| !v.is_finite())
        {
            return Ok(best_or(best, SolverStatus::NumericalFailure));
        }
        iterations = iter + 1;
    }

    let mut out = best_or(best, SolverStatus::IterationLimit);
    out.iterations = iterations;
    Ok(out)
}

fn best_or(best: Option<(f64, Solution)>, status: SolverStatus) -> Solution {
    match best {
        Some((_, mut sol)) => {
            sol.status = status;
            sol
        }
        None => Solution {
            status,
            x: vec![],
            y: vec![],
            z: vec![],
            primal_objective: f64::NAN,
            dual_objective: f64::NAN,
            relative_gap: f64::NAN,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            iterations: 0,
        },
    }
}

/// Planted-solution instance generator used by tests and benchmarks: builds
/// block-arrow problems from a known strictly feasible primal-dual pair, so
/// the optimum is bracketed by `b^T y*` and `c^T x*`.
pub mod testgen {
    use super::{mat_to_svec, svec_len, ConeLayout, SparseMatrix};
    use crate::sosfit::ConicProblem;
    use nalgebra::DMatrix;

    /// Deterministic stream of floats from a SplitMix64 walk.
    pub struct Stream(u64);

    impl Stream {
        pub fn new(seed: u64) -> Self {
            Stream(seed)
        }

        pub fn next_u64(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        }

        /// Uniform in `[lo, hi)`.
        pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
            let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            lo + (hi - lo) * u
        }

        pub fn index(&mut self, n: usize) -> usize {
            (self.next_u64() % n as u64) as usize
        }
    }

    /// A planted instance with the primal and dual objective values of the
    /// known strictly feasible pair.
    pub struct Planted {
        pub problem: ConicProblem,
        pub primal_feasible_objective: f64,
        pub dual_feasible_objective: f64,
    }

    fn random_spd(rng: &mut Stream, m: usize) -> DMatrix<f64> {
        let r = DMatrix::from_fn(m, m, |_, _| rng.uniform(-1.0, 1.0));
        &r * r.transpose() + DMatrix::identity(m, m) * 0.4
    }

    /// Block-arrow instance: `blocks` PSD blocks, each coupled to the free
    /// variables by `rows_per_block` equality rows, plus one nonnegative
    /// scalar per block.
    pub fn block_arrow(seed: u64, n_free: usize, blocks: usize, block_size: usize) -> Planted {
        let mut rng = Stream::new(seed);
        let rows_per_block = 2usize;
        let layout = ConeLayout::new(n_free, blocks, vec![block_size; blocks]);
        let total = layout.total_dim();
        let nrows = blocks * rows_per_block;

        // Planted strictly feasible primal point.
        let mut x_star = vec![0.0; total];
        for v in x_star.iter_mut().take(n_free) {
            *v = rng.uniform(-1.0, 1.0);
        }
        for i in 0..blocks {
            x_star[n_free + i] = rng.uniform(0.5, 2.0);
        }
        for j in 0..blocks {
            let off = n_free + layout.block_offset(j);
            let sv = mat_to_svec(&random_spd(&mut rng, block_size));
            x_star[off..off + svec_len(block_size)].copy_from_slice(&sv);
        }

        let mut triplets = Vec::new();
        for j in 0..blocks {
            let boff = layout.n_free + layout.block_offset(j);
            for rr in 0..rows_per_block {
                let row = j * rows_per_block + rr;
                // A couple of free couplings.
                for _ in 0..2.min(n_free) {
                    let col = rng.index(n_free.max(1));
                    if n_free > 0 {
                        triplets.push((row, col, rng.uniform(-1.0, 1.0)));
                    }
                }
                // The block's own entries.
                for k in 0..svec_len(block_size) {
                    triplets.push((row, boff + k, rng.uniform(-1.0, 1.0)));
                }
                // Its nonnegative scalar.
                triplets.push((row, n_free + j, rng.uniform(-1.0, 1.0)));
            }
        }
        let a = SparseMatrix::from_triplets(nrows, total, triplets).expect("valid triplets");
        let b = a.mul_vec(&x_star);

        // Planted strictly feasible dual pair: c = A^T y* + [0; z*].
        let y_star: Vec<f64> = (0..nrows).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mut z_star = vec![0.0; total];
        for i in 0..blocks {
            z_star[n_free + i] = rng.uniform(0.5, 2.0);
        }
        for j in 0..blocks {
            let off = n_free + layout.block_offset(j);
            let sv = mat_to_svec(&random_spd(&mut rng, block_size));
            z_star[off..off + svec_len(block_size)].copy_from_slice(&sv);
        }
        let mut c = a.tr_mul_vec(&y_star);
        for (cv, zv) in c.iter_mut().zip(&z_star) {
            *cv += zv;
        }

        let primal_feasible_objective = c.iter().zip(&x_star).map(|(&c, &x)| c * x).sum();
        let dual_feasible_objective = b.iter().zip(&y_star).map(|(&b, &y)| b * y).sum();
        Planted {
            problem: ConicProblem { objective: c, matrix: a, rhs: b, layout, map: None },
            primal_feasible_objective,
            dual_feasible_objective,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(
        layout: ConeLayout,
        triplets: Vec<(usize, usize, f64)>,
        nrows: usize,
        b: Vec<f64>,
        c: Vec<f64>,
    ) -> ConicProblem {
        let total = layout.total_dim();
        ConicProblem {
            objective: c,
            matrix: SparseMatrix::from_triplets(nrows, total, triplets).unwrap(),
            rhs: b,
            layout,
            map: None,
        }
    }

    #[test]
    fn svec_roundtrip() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, -1.0, 0.5, 3.0, 0.25, -1.0, 0.25, 4.0]);
        let v = mat_to_svec(&m);
        assert_eq!(v.len(), 6);
        let back = svec_to_mat(&v, 3);
        assert!((&back - &m).abs().max() < 1e-15);
        // svec preserves the Frobenius inner product.
        let m2 = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 5.0, 1.0, 0.0, 1.0, -1.0]);
        let v2 = mat_to_svec(&m2);
        let dot: f64 = v.iter().zip(&v2).map(|(a, b)| a * b).sum();
        let frob = (m * m2).trace();
        assert!((dot - frob).abs() < 1e-12);
    }

    #[test]
    fn extreme_correlation_matrix() {
        // minimize 2 W01 s.t. W00 = W11 = 1, W PSD -> -2 at W = [[1,-1],[-1,1]].
        let layout = ConeLayout::new(0, 0, vec![2]);
        let f = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let c = mat_to_svec(&f);
        let triplets = vec![(0, svec_index(0, 0, 2), 1.0), (1, svec_index(1, 1, 2), 1.0)];
        let p = problem(layout, triplets, 2, vec![1.0, 1.0], c);
        let sol = solve(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.primal_objective + 2.0).abs() < 1e-6, "{}", sol.primal_objective);
        let w = svec_to_mat(&sol.x, 2);
        assert!((w[(0, 1)] + 1.0).abs() < 1e-5);
    }

    #[test]
    fn linear_program_with_slack() {
        // minimize x s.t. x - s = 3, s >= 0 -> 3.
        let layout = ConeLayout::new(1, 1, vec![]);
        let p = problem(layout, vec![(0, 0, 1.0), (0, 1, -1.0)], 1, vec![3.0], vec![1.0, 0.0]);
        let sol = solve(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.primal_objective - 3.0).abs() < 1e-7);
        assert!((sol.x[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn unbounded_problem_is_dual_infeasible() {
        // minimize -t s.t. t >= 0: unbounded below.
        let layout = ConeLayout::new(0, 1, vec![]);
        let p = problem(layout, vec![], 0, vec![], vec![-1.0]);
        let sol = solve(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolverStatus::DualInfeasible);
    }

    #[test]
    fn infeasible_equalities_detected() {
        // s1 >= 0, s2 >= 0, s1 + s2 = -1 is primal infeasible.
        let layout = ConeLayout::new(0, 2, vec![]);
        let p = problem(
            layout,
            vec![(0, 0, 1.0), (0, 1, 1.0)],
            1,
            vec![-1.0],
            vec![1.0, 1.0],
        );
        let sol = solve(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolverStatus::PrimalInfeasible);
    }

    #[test]
    fn planted_instances_reach_optimal() {
        for seed in 0..20u64 {
            let inst =
                testgen::block_arrow(seed + 1, 8 + (seed as usize % 23), 3 + (seed as usize % 8), 2 + (seed as usize % 3));
            let sol = solve(&inst.problem, &SolverSettings::default()).unwrap();
            assert_eq!(sol.status, SolverStatus::Optimal, "seed {seed}: {:?}", sol.status);
            assert!(sol.relative_gap <= 1e-8, "seed {seed}: gap {}", sol.relative_gap);
            // The optimum lies between the planted dual and primal values.
            assert!(
                sol.primal_objective <= inst.primal_feasible_objective + 1e-6,
                "seed {seed}: {} vs plant {}",
                sol.primal_objective,
                inst.primal_feasible_objective
            );
            assert!(
                sol.primal_objective >= inst.dual_feasible_objective - 1e-6,
                "seed {seed}: {} vs dual plant {}",
                sol.primal_objective,
                inst.dual_feasible_objective
            );
        }
    }

    #[test]
    fn deterministic_bitwise_reruns() {
        let inst = testgen::block_arrow(7, 12, 6, 3);
        let a = solve(&inst.problem, &SolverSettings::default()).unwrap();
        let b = solve(&inst.problem, &SolverSettings::default()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        for (u, v) in a.x.iter().zip(&b.x) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
        for (u, v) in a.y.iter().zip(&b.y) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let inst = testgen::block_arrow(11, 10, 40, 3);
        let s1 = SolverSettings { threads: 1, ..Default::default() };
        let s4 = SolverSettings { threads: 4, ..Default::default() };
        let a = solve(&inst.problem, &s1).unwrap();
        let b = solve(&inst.problem, &s4).unwrap();
        assert_eq!(a.status, SolverStatus::Optimal);
        for (u, v) in a.x.iter().zip(&b.x) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn objective_scaling_robustness() {
        // Scaling c by 1e3 must not move the optimizer materially.
        let inst = testgen::block_arrow(3, 10, 5, 3);
        let sol1 = solve(&inst.problem, &SolverSettings::default()).unwrap();
        let mut scaled = inst.problem.clone();
        for v in &mut scaled.objective {
            *v *= 1e3;
        }
        let sol2 = solve(&scaled, &SolverSettings::default()).unwrap();
        assert_eq!(sol1.status, SolverStatus::Optimal);
        assert_eq!(sol2.status, SolverStatus::Optimal);
        let norm = sol1.x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for (u, v) in sol1.x.iter().zip(&sol2.x) {
            assert!(
                (u - v).abs() / norm <= 1e-5,
                "optimizer moved: {u} vs {v} (norm {norm})"
            );
        }
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let layout = ConeLayout::new(1, 0, vec![]);
        let p = problem(layout, vec![], 0, vec![], vec![1.0, 2.0]);
        assert!(matches!(
            solve(&p, &SolverSettings::default()),
            Err(crate::error::Error::DimensionMismatch { .. })
        ));
    }
}
