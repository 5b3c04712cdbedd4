use thiserror::Error;

/// Everything that can go wrong inside the lab.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid scale: {0}")]
    InvalidScale(String),

    #[error("point ({x}, {y}) lies outside Q0 = [-1,1]^2")]
    OutsideSquare { x: f64, y: f64 },

    #[error("line (a = {a}, b = {b}) is not in the parameter square |a|, |b| <= 1")]
    LineOutOfRange { a: f64, b: f64 },

    #[error("separation violated: elements {i} and {j} are {distance} apart, need {required}")]
    Separation {
        i: usize,
        j: usize,
        distance: f64,
        required: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),

    #[error("grid function support touches the box boundary: {0}")]
    SupportTouchesBoundary(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
