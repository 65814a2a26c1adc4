//! Error type shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The data Gram matrix Z Z^T is numerically rank deficient.
    #[error("singular data matrix: lambda_min = {lambda_min:.6e} is below {threshold:.6e}")]
    SingularData { lambda_min: f64, threshold: f64 },

    #[error("client {client}: {source}")]
    Client {
        client: usize,
        #[source]
        source: Box<Error>,
    },

    /// A covariance matrix required to be positive definite is singular,
    /// typically because the noise specification is degenerate.
    #[error("covariance not identifiable: {0}")]
    NotIdentifiable(String),

    /// A gradient iteration blew past the divergence guard.
    #[error(
        "step size too large: iterate norm {theta_norm:.3e} exceeded guard {limit:.3e} \
         after {steps} steps"
    )]
    Divergence {
        theta_norm: f64,
        limit: f64,
        steps: usize,
    },

    #[error("client {client} update failed in round {round}: {source}")]
    ClientUpdate {
        client: usize,
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("diagnostics need recorded noise: dataset for client {0} has no W matrix")]
    MissingNoise(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn for_client(self, client: usize) -> Error {
        Error::Client {
            client,
            source: Box::new(self),
        }
    }
}
