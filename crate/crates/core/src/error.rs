use thiserror::Error;

use crate::instance::MetricViolation;
use crate::lp::InfeasibilityCertificate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid metric: {0}")]
    Metric(MetricViolation),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("point {point} is not contained in any ball at expansion 1")]
    UncoveredPoint { point: usize },

    #[error("linear program is infeasible (phase-1 optimum {})", crate::arith::fmt_rational(&.0.phase_one_value))]
    Infeasible(Box<InfeasibilityCertificate>),

    #[error("flow operation rejected: {0}")]
    Flow(String),

    /// A proven invariant of the rounding pipeline did not hold; this points
    /// at an implementation bug rather than bad input.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("instance has {balls} balls, enumeration budget is {budget}")]
    BudgetExceeded { balls: usize, budget: usize },

    #[error("no subset of balls admits a feasible assignment at the requested expansion")]
    NoCover,

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("malformed trace: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
