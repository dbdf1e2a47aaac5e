use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid availability distribution: {0}")]
    InvalidAvailability(String),

    #[error("invalid demand model: {0}")]
    InvalidDemand(String),

    #[error("invalid market: {0}")]
    InvalidMarket(String),

    #[error("availability level {level} outside 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("price {price} outside [0, {cap}]")]
    PriceOutOfRange { price: f64, cap: f64 },

    #[error("utility gap needs j < l, got l={l}, j={j}")]
    LevelOrder { l: usize, j: usize },

    #[error("invalid price strategy: {0}")]
    InvalidStrategy(String),

    #[error("sellers do not share one availability distribution")]
    NotSymmetric,

    #[error("aggregation is a no-op: demand {demand} >= max availability {max}")]
    AggregationNotNeeded { demand: usize, max: usize },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("no structure hypothesis: {0}")]
    NoHypothesis(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("problem too large: {size} exceeds cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("invalid simulation request: {0}")]
    InvalidSimulation(String),
}
