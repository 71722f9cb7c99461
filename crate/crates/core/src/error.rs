use std::path::PathBuf;

use crate::game::StrategyProfile;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `kl(p, q)` with `p(a) > 0` and `q(a) = 0`.
    #[error("KL divergence is infinite: p[{index}] = {p} but q[{index}] = 0")]
    InfiniteDivergence { index: usize, p: f64 },

    /// A strategy entry underflowed to zero (or went negative) where an
    /// interior strategy is required.
    #[error("strategy left the interior of the simplex at action {action} (value {value:e})")]
    InteriorityViolation { action: usize, value: f64 },

    #[error("run diverged at t = {t}: {detail}")]
    Diverged { t: u64, detail: String },

    #[error("integration left the simplex interior at time {time}")]
    TrajectoryEscaped { time: f64 },

    #[error("stationary point not found: residual {residual:e} > tol {tol:e} after {iters} iterations")]
    NonConvergence {
        residual: f64,
        tol: f64,
        iters: u64,
        best: Box<StrategyProfile>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
