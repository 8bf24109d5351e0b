use thiserror::Error;

use crate::continuation::DiagnosticsRecord;
use crate::loops::SymmetricLoop;
use crate::minimize::MinimizeStats;
use crate::orbit::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("potential evaluated at the singularity x = 0")]
    Singularity,

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("loop node {node} sits at the origin")]
    Collision { node: usize },

    #[error("loop is constant (zero seminorm)")]
    DegenerateLoop,

    #[error("minimizer did not converge after {} iterations (gradient {:.3e})", .stats.iterations, .stats.final_gradient)]
    NonConvergence { best: Box<SymmetricLoop>, stats: Box<MinimizeStats> },

    #[error("line search step underflowed against the guard radius after {} iterations", .stats.iterations)]
    CollisionTrap { best: Box<SymmetricLoop>, stats: Box<MinimizeStats> },

    #[error("trajectory fell below the guard radius {guard} at t = {time}")]
    NearCollision { guard: f64, time: f64, partial: Box<Trajectory> },

    #[error("orbit never crosses |u| = {radius} (radius range [{min_radius}, {max_radius}])")]
    RecenterImpossible { radius: f64, min_radius: f64, max_radius: f64 },

    #[error("|u| > {radius} everywhere on the orbit (min radius {min_radius})")]
    NoInteriorPassage { radius: f64, min_radius: f64 },

    #[error("comparison radius L = {l} must lie strictly inside the boundary radius {r}")]
    InvalidComparisonRadius { l: f64, r: f64 },

    #[error("window half-width {tau} exceeds the half-period {half_period}")]
    Window { tau: f64, half_period: f64 },

    #[error("potential {0} carries no (V7) decay metadata")]
    UnsupportedPotential(String),

    #[error("virial thresholds not bracketed by the sampling grid: {0}")]
    InconclusiveThresholds(String),

    #[error("barrier inequality -V(x) >= C/|x|^2 fails at |x| = {radius} (delta = {delta})")]
    InadmissibleDelta { delta: f64, radius: f64 },

    #[error("continuation aborted at R = {radius}: {source}")]
    ContinuationAborted { radius: f64, partial: Box<Vec<DiagnosticsRecord>>, source: Box<Error> },

    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        if let Error::ContinuationAborted { source, .. } = self {
            return source.is_numerical();
        }
        matches!(
            self,
            Error::Collision { .. }
                | Error::DegenerateLoop
                | Error::NonConvergence { .. }
                | Error::CollisionTrap { .. }
                | Error::NearCollision { .. }
                | Error::RecenterImpossible { .. }
                | Error::NoInteriorPassage { .. }
                | Error::Window { .. }
                | Error::InconclusiveThresholds(_)
                | Error::InadmissibleDelta { .. }
        )
    }
}
