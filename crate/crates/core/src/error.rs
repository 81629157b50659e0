use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (sizes, grids, flags).
    #[error("configuration error: {0}")]
    Config(String),
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A precondition on the shape or consistency of an input was violated.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("numerical failure at N={n_sites}, U={u}: {msg}")]
    Numerical { n_sites: usize, u: f64, msg: String },
    /// Linear-algebra failure not tied to a particular Hamiltonian.
    #[error("numerical error: {0}")]
    Linalg(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
