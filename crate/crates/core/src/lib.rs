//! Exact computational toolkit for Minkowski sums of self-similar sets.
//!
//! Everything that decides a pass/fail verdict here runs on arbitrary-precision
//! rational or integer arithmetic; floating point is confined to slope
//! estimates and report values in [`boxdim`]. The main layers:
//!
//! * [`cellgrid`] — exact interval unions over an ordered scalar and lattice
//!   cell sets (outer covers / inner fills) at dyadic-style grid depths.
//! * [`ifs`] — equal-ratio similarity systems, their canonical starting sets,
//!   and exact iteration of the induced set map.
//! * [`sumset`] — Minkowski sums, signed sums, and the bitset kernel that
//!   rasterizes difference-vector sets.
//! * [`addcomb`] — finite-group sumset cardinality inequalities and the
//!   conjecture search harnesses.
//! * [`boxdim`] — box counting, slope estimation, and dimension lower-bound
//!   calculators.
//! * [`proofs`] — the finite verification engines (containment inductions,
//!   digit-recursion solver, polygon tiling checks) with structured reports.

pub mod addcomb;
pub mod bits;
pub mod boxdim;
pub mod cellgrid;
pub mod geometry;
pub mod ifs;
pub mod proofs;
pub mod report;
pub mod scalar;
pub mod sumset;

use num_bigint::BigInt;

/// Exact rational scalar used throughout the decision paths.
pub type Rat = num_rational::BigRational;
/// Exact integer used for cell counts and powers.
pub type Int = BigInt;

pub use cellgrid::{CellSet, IntervalUnion, Mode};
pub use geometry::{ConvexPolygon, Point2};
pub use ifs::{DigitSystem, IFSystem, Similarity};
pub use report::{CheckRecord, Method, Report};
pub use scalar::{rat, rat_int};
pub use sumset::DiffVectorSet;

/// Resource limits for the operations that can grow combinatorially.
///
/// Defaults are the shipped caps; override per call (the CLI reads
/// `SUMDIM_MAX_*` environment variables into this struct).
#[derive(Debug, Clone)]
pub struct Caps {
    /// Interval count in any one union (iteration, k-fold sums).
    pub max_intervals: usize,
    /// Cell count in any one cell set (d >= 2 storage, sums).
    pub max_cells: usize,
    /// Per-axis side of a difference-vector grid.
    pub max_grid_side: usize,
    /// Total bits of a difference-vector grid (side^k).
    pub max_grid_bits: u128,
    /// Tuple enumeration budget |A|^(k+1) in the group sweeps.
    pub max_enum: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_intervals: 10_000_000,
            max_cells: 50_000_000,
            max_grid_side: 1 << 14,
            max_grid_bits: 1 << 31,
            max_enum: 100_000_000,
        }
    }
}

/// Error taxonomy. `Hypothesis` and `ResourceCap` are kept distinct so the
/// CLI can map them to their own exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("hypothesis violated in {check}: {detail}")]
    Hypothesis { check: String, detail: String },
    #[error("resource cap exceeded in {what}: needed {needed}, cap {cap}")]
    ResourceCap {
        what: String,
        needed: u128,
        cap: u128,
    },
    #[error("representation mismatch: {0}")]
    Mismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn hypothesis(check: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Hypothesis {
            check: check.into(),
            detail: detail.into(),
        }
    }

    pub fn cap(what: impl Into<String>, needed: u128, cap: u128) -> Self {
        Error::ResourceCap {
            what: what.into(),
            needed,
            cap,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
