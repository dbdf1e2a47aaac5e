//! Mixed-strategy price equilibria for two sellers whose commodity
//! availability is random, with certification tools and an oligopoly heuristic.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymmetric;
pub mod error;
pub mod model;
pub mod oligopoly;
pub mod scalar;
pub mod sweep;
pub mod symmetric;
pub mod verify;

pub use error::{Error, Result};
pub use model::Seller;
pub use scalar::Scalar;

pub type Availability = model::AvailabilityDistribution<f64>;
pub type Demand = model::DemandModel<f64>;
pub type Market = model::MarketConfig<f64>;
pub type Segment = model::CdfSegment<f64>;
pub type Strategy = model::PriceStrategy<f64>;
pub type Profile = model::StrategyProfile<f64>;
