use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An experiment description violates its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Two unfolded levels coincide below the degeneracy threshold.
    /// Generic (irrational-squared) parameters never trigger this.
    #[error("degenerate spectrum at parameter {param}: adjacent unfolded levels separated by {gap:e}")]
    Degenerate { param: f64, gap: f64 },

    /// An estimator was handed an empty sample it cannot normalize.
    #[error("empty input: {0}")]
    Empty(&'static str),

    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A statistics grid does not fit inside the observation window.
    #[error("grid exceeds window: {0}")]
    GridTooWide(String),
}
