use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not hyperbolic: {0}")]
    NotHyperbolic(String),

    #[error("rectangle {width}×{height} too large for a wrap-free image")]
    OversizedRectangle { width: f64, height: f64 },

    #[error("partition has {nodes} nodes, over the budget of {budget}")]
    NodeBudget { nodes: usize, budget: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("leaf refinement exceeded {0} samples")]
    RefinementBudget(usize),

    #[error("holonomy does not converge: contraction rate {0} >= 1")]
    Divergent(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
