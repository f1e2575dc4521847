//! Assembly of the sample-based fitting program into conic standard form,
//! and extraction of the fitted model from a solver solution.

use crate::conic::{ConeLayout, SparseMatrix};

/// A conic program in standard form: minimize `c^T x` subject to `A x = b`
/// with `x` split into a free block, a nonnegative block and a sequence of
/// small PSD blocks in symmetric-vectorized form.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub objective: Vec<f64>,
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub layout: ConeLayout,
    /// Present when the problem was assembled from samples; maps
    /// `(sample, certificate, entry)` back to variable positions.
    pub map: Option<AssemblyMap>,
}

/// Coordinate-wise affine map `x' = scale * x + offset` used to condition
/// the monomial basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordMap {
    pub scale: f64,
    pub offset: f64,
}

impl CoordMap {
    pub fn identity() -> Self {
        CoordMap { scale: 1.0, offset: 0.0 }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }
}

/// Index map from model quantities to variable positions in the assembled
/// problem.
#[derive(Debug, Clone)]
pub struct AssemblyMap {
    pub n: usize,
    pub n_samples: usize,
    pub phi_len: usize,
    pub psi_len: usize,
    pub h_col_start: usize,
    pub gamma_col_start: Option<usize>,
    pub slack_col_start: usize,
    pub cert_col_start: usize,
    pub cert_degree: usize,
    pub gram_sizes: (usize, usize),
    pub whole_line: bool,
    pub rows_per_sample: usize,
    pub domain_map: Vec<CoordMap>,
    pub data_fingerprint: String,
}
