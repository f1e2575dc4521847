//! Regression of possibly discontinuous multivariate functions by the
//! argmin of a fitted polynomial.

pub mod conic;
pub mod datasets;
pub mod error;
pub mod exact;
pub mod polys;
pub mod sosfit;

pub use conic::{ConeLayout, Solution, SolverSettings, SolverStatus, SparseMatrix};
pub use datasets::{SampleSet, SamplingDesign, TargetFunction};
pub use error::{Error, Result};
pub use exact::{ArgminModel, ModelRange, PiecewiseSpec};
pub use polys::{BoxDomain, Interval, MonomialBasis, MultiIndex, MVPoly, UniPoly};
pub use sosfit::ConicProblem;
