//! Fare structure design toolkit.
//!
//! Given a public transport network, origin-destination demand with
//! reference prices, and a desired fare strategy, the crate computes fare
//! structures that minimize the passenger-weighted sum of absolute
//! deviations from the reference prices:
//!
//! * flat tariffs via weighted medians ([`median`]),
//! * affine network/beeline distance tariffs via a finite candidate set
//!   with an LP cross-check ([`distance`]),
//! * counting-zones tariffs, both the price-setting subproblem for fixed
//!   zones ([`zone_pricing`]) and exact zone-partition search at desk
//!   scale ([`zone_design`]),
//! * a MILP export of the zone design problem for external solvers
//!   ([`milp`]),
//! * generators for the hard-instance graph constructions used to study
//!   the problem's complexity ([`reduction`]).
//!
//! Instance and result serialization lives in [`io`]; the `fareplan`
//! binary exposes everything on the command line.

pub mod distance;
pub mod fixtures;
pub mod io;
pub mod lp;
pub mod median;
pub mod milp;
pub mod ptn;
pub mod reduction;
pub mod tariff;
pub mod zone_design;
pub mod zone_pricing;

pub use distance::{affine_design, affine_design_lp, path_distance, AffineSolution, DistanceMetric, DistancePoint};
pub use median::{flat_design, weighted_median, FlatSolution, MedianInterval, MedianPick, WeightedSample};
pub use ptn::{OdPair, Path, Ptn, StationId};
pub use tariff::{
    check_monotone, check_no_stopover_condition, is_connected_partition, objective, zone_count, CountingMode,
    PriceList, Tariff, ZonePartition,
};
pub use zone_design::{solve_exact, DesignConfig, DesignResult};
pub use zone_pricing::{build_levels, price_monotone, price_no_stopover, price_unrestricted, LevelledDemand};

/// Absolute tolerance for price comparisons (monotonicity and fairness
/// property checks). Prices derive from finitely many medians of the
/// input data, which sit far apart relative to this.
pub const PRICE_EPS: f64 = 1e-9;

/// Tolerance for cross-checks between independent solution routes
/// (candidate set vs. LP, merge algorithm vs. LP).
pub const CROSS_CHECK_EPS: f64 = 1e-7;

/// Errors reported by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on operation input does not hold.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An instance, partition or tariff document failed validation.
    /// The location names the offending section, row and field.
    #[error("{location}: {message}")]
    Schema { location: String, message: String },
    /// A document could not be parsed at all.
    #[error("parse error: {0}")]
    Parse(String),
    /// The LP subsolver reported an infeasible program.
    #[error("linear program is infeasible")]
    Infeasible,
    /// The LP subsolver reported an unbounded program.
    #[error("linear program is unbounded")]
    Unbounded,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema { location: location.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
