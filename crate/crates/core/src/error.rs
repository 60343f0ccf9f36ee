use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("domain error: {what} = {value} outside {constraint}")]
    Domain {
        what: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// Wave parameters describe a degenerate (constant or solitary) wave.
    #[error("degenerate wave: {0}")]
    DegenerateWave(&'static str),

    /// Requested value lies outside the attainable range of the map.
    #[error("{what} = {value} outside attainable range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// An iterative solver failed to converge or hit a conditioning wall.
    #[error("numerical failure in {who}: {detail}")]
    Numerical { who: &'static str, detail: String },
}

impl Error {
    pub fn domain(what: &'static str, value: f64, constraint: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            constraint,
        }
    }

    pub fn numerical(who: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            who,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
