mod evaluate;
mod market;
mod strategy;

pub use evaluate::{
    expected_units_sold, expected_utility, linear_in_level, tie_share, units_sold_given,
    utility_gap_a, OpponentMasses,
};
pub use market::{AvailabilityDistribution, DemandModel, MarketConfig, Seller};
pub use strategy::{
    CdfPiece, CdfSegment, LevelStrategy, PriceStrategy, StrategyProfile, TabulatedCdf,
};
