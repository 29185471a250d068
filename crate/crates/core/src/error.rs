use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("comparison count overflow: {users} users x {per_user} comparisons")]
    CountOverflow { users: u64, per_user: u64 },

    /// The unregularized Bradley-Terry likelihood has no maximizer: the listed
    /// alternatives never lose a comparison against the remaining ones.
    #[error("maximum likelihood diverges: alternatives {alternatives:?} never lose to the rest; retry with ridge > 0")]
    Divergent { alternatives: Vec<usize> },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { solver: &'static str, iterations: usize, residual: f64, best: Option<Vec<f64>> },

    #[error("KL bisection bracket failure: KL(lambda={lambda_hi:e}) = {kl_hi:e} exceeds the budget {tau:e}")]
    Bracket { lambda_hi: f64, kl_hi: f64, tau: f64 },

    #[error("{what} is undefined under a general pair distribution")]
    UndefinedForNu { what: &'static str },

    #[error("infeasible construction parameters: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
