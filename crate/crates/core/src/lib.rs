//! Multiparameter sewing and rough integration on `[0,1]^k`.
//!
//! The crate covers the whole pipeline from grids and rectangular increments
//! to a tiled Picard solver for equations driven by a Hölder field:
//!
//! - [`grid`]: points, hyperrectangles and rectangular partitions.
//! - [`increment`]: box increments `□`, the face operators `ψ_i` and `δ`.
//! - [`holder`]: mixed and additive Hölder gauges and sampled norm estimates.
//! - [`fields`]: closed-form, sampled and random fields, plus CSV I/O.
//! - [`sewing`]: Riemann sums over dyadic partitions and Young integrals.
//! - [`solver`]: tiled Picard iteration for `Y = ξ + ∫ f(Y) dX`.

pub mod error;
pub mod fields;
pub mod grid;
pub mod holder;
pub mod increment;
pub mod sewing;
pub mod solver;
pub mod summation;

pub use error::{Error, Result};
pub use fields::{Field, FieldMeta, SampledField, ScalarFn, SheetSpec};
pub use grid::{GridPartition, HyperRect, MultiPoint};
pub use holder::{HolderExponents, NormReport};
pub use increment::{AxisSet, PairFunction};
pub use sewing::{ConvergenceStudy, SewResult, YoungScheme};
pub use solver::{Coefficient, Problem, Solution, SolverOptions, StabilityReport};
