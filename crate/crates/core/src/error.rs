use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("atom lists differ: {left:?} vs {right:?}")]
    AtomMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },

    #[error("invalid constraint set: {0}")]
    InvalidConstraints(String),

    #[error("infeasible constraint set ({reason}); offending atoms: {atoms:?}")]
    Infeasible { atoms: Vec<String>, reason: String },

    #[error("{name} = {value} is outside its domain {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("confidence interval endpoint is unbounded at level {level}")]
    UnboundedEndpoint { level: f64 },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
