//! Symmetric equilibrium: levels `1..=l*` price at the cap, each higher level
//! mixes over its own interval, and intervals move down as availability grows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    expected_utility, linear_in_level, AvailabilityDistribution, CdfPiece, CdfSegment, DemandModel,
    LevelStrategy, MarketConfig, OpponentMasses, PriceStrategy, Seller, StrategyProfile,
};
use crate::scalar::Scalar;

/// Availability with every level at or above the demand pooled into one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct AggregatedAvailability<T> {
    pub original: AvailabilityDistribution<T>,
    pub effective: AvailabilityDistribution<T>,
    pub demand: usize,
}

impl<T: Scalar> AggregatedAvailability<T> {
    /// Original levels whose strategy is the pooled level's; the split among
    /// them is not pinned down by the equilibrium.
    pub fn pooled_levels(&self) -> std::ops::RangeInclusive<usize> {
        self.demand..=self.original.max_level()
    }
}

pub fn aggregate_for_small_demand<T: Scalar>(
    avail: &AvailabilityDistribution<T>,
    d: usize,
) -> Result<AggregatedAvailability<T>> {
    let m = avail.max_level();
    if d >= m {
        return Err(Error::AggregationNotNeeded { demand: d, max: m });
    }
    if d == 0 {
        return Err(Error::InvalidDemand("demand must be at least 1".into()));
    }
    let mut probs = avail.probs()[..d].to_vec();
    probs.push(avail.tail(d));
    Ok(AggregatedAvailability {
        original: avail.clone(),
        effective: AvailabilityDistribution::new(probs)?,
        demand: d,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct SymmetricNE<T> {
    pub threshold: usize,
    /// One segment per level `threshold+1..=m_eff`, in increasing level order.
    pub segments: Vec<CdfSegment<T>>,
    /// Equilibrium utility of every original level `1..=m`.
    pub utilities: Vec<T>,
    /// Present when the demand was below the top availability level.
    pub aggregation: Option<AggregatedAvailability<T>>,
    pub profile: StrategyProfile<T>,
}

impl<T: Scalar> SymmetricNE<T> {
    /// Lowest price in either seller's support.
    pub fn p_tilde(&self) -> T {
        self.profile.p_tilde
    }

    /// Segment boundaries from lowest to highest, ending at `v`.
    pub fn boundaries(&self) -> Vec<T> {
        let mut out: Vec<T> = self.segments.iter().rev().map(|s| s.lo).collect();
        if let Some(top) = self.segments.first() {
            out.push(top.hi);
        }
        out
    }

    pub fn strategy(&self) -> &PriceStrategy<T> {
        &self.profile.strategies[0]
    }
}

/// Opponent masses inside level `i`'s interval: higher levels are all below,
/// lower ones all above, level `i` itself left at zero.
fn masses_in_interval<T: Scalar>(m: usize, i: usize) -> OpponentMasses<T> {
    let mut masses = OpponentMasses::zeros(m);
    for g in i + 1..=m {
        masses.below[g] = T::one();
    }
    masses
}

/// Recursion on a market where `d >= m` (with `d` the structural demand).
fn solve_reduced<T: Scalar>(cfg: &MarketConfig<T>) -> Result<(usize, Vec<CdfSegment<T>>)> {
    let m = cfg.max_level(Seller::First);
    let d = cfg.structural_demand();
    let (v, c) = (cfg.v(), cfg.c());
    let threshold = d / 2;
    if cfg.is_monopoly() {
        return Ok((m, Vec::new()));
    }
    let q = cfg.seller(Seller::First);
    let mut segments = Vec::with_capacity(m - threshold);
    let mut top = v;
    for i in threshold + 1..=m {
        if q.prob(i) <= T::zero() {
            return Err(Error::Unsupported(format!(
                "availability level {i} has zero probability inside the competitive range"
            )));
        }
        let masses = masses_in_interval(m, i);
        let (alpha, gamma) = linear_in_level(cfg, Seller::First, i, i, &masses);
        if !(gamma > T::zero()) {
            return Err(Error::Numerical(format!(
                "nonpositive CDF denominator {gamma} at level {i}"
            )));
        }
        let u = (top - c) * (alpha - gamma);
        let lo = c + u / alpha;
        if !(lo > c) || !(lo <= top) {
            return Err(Error::Numerical(format!(
                "level {i} lower bound {lo} outside ({c}, {top}]"
            )));
        }
        segments.push(CdfSegment {
            lo,
            hi: top,
            c,
            alpha,
            beta: u,
            gamma,
        });
        top = lo;
    }
    Ok((threshold, segments))
}

fn strategy_from_segments<T: Scalar>(
    m: usize,
    threshold: usize,
    segments: &[CdfSegment<T>],
    v: T,
) -> PriceStrategy<T> {
    let mut levels = vec![LevelStrategy::at_cap(); threshold];
    for s in segments {
        levels.push(LevelStrategy {
            pieces: vec![CdfPiece::Hyperbolic(*s)],
            atom_at_v: T::zero(),
        });
    }
    // Pooled levels above the demand share the top effective level's strategy.
    while levels.len() < m {
        let last = levels.last().cloned().unwrap_or_else(LevelStrategy::at_cap);
        levels.push(last);
    }
    PriceStrategy { v, levels }
}

/// Unique symmetric equilibrium of a market with identical sellers.
pub fn solve_symmetric<T: Scalar>(cfg: &MarketConfig<T>) -> Result<SymmetricNE<T>> {
    if !cfg.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let avail = cfg.seller(Seller::First);
    let m = avail.max_level();
    let d = cfg.structural_demand();
    let (reduced, aggregation) = if d < m {
        if cfg.demand().is_random() {
            return Err(Error::Unsupported(format!(
                "random demand needs its smallest positive demand ({d}) to be at least the top availability ({m})"
            )));
        }
        let agg = aggregate_for_small_demand(avail, d)?;
        let reduced = cfg.with_sellers(agg.effective.clone(), agg.effective.clone())?;
        (reduced, Some(agg))
    } else {
        (cfg.clone(), None)
    };

    let m_eff = reduced.max_level(Seller::First);
    let (threshold, segments) = solve_reduced(&reduced)?;
    let v = cfg.v();
    let strategy = strategy_from_segments(m, threshold.min(m_eff), &segments, v);
    let p_tilde = segments.last().map(|s| s.lo).unwrap_or(v);
    let threshold = threshold.min(m);
    let profile = StrategyProfile {
        strategies: [strategy.clone(), strategy.clone()],
        thresholds: [threshold, threshold],
        p_tilde,
    };

    let mut utilities = Vec::with_capacity(m);
    for l in 1..=m {
        let x = strategy.level(l).support(v).0;
        utilities.push(expected_utility(cfg, Seller::First, l, x, &strategy)?);
    }

    Ok(SymmetricNE {
        threshold,
        segments,
        utilities,
        aggregation,
        profile,
    })
}

/// Same as [`solve_symmetric`], with the demand replaced by a weighted set of
/// demand atoms.
pub fn solve_symmetric_random_demand<T: Scalar>(
    cfg: &MarketConfig<T>,
    weights: Vec<(usize, T)>,
) -> Result<SymmetricNE<T>> {
    solve_symmetric(&cfg.with_demand(DemandModel::random(weights)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(m: usize, r: f64) -> AvailabilityDistribution<f64> {
        AvailabilityDistribution::binomial(m, r).unwrap()
    }

    #[test]
    fn aggregation_pools_tail() {
        let q = AvailabilityDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let a = aggregate_for_small_demand(&q, 1).unwrap();
        assert_eq!(a.effective.probs(), &[0.2, 0.8]);
        let q = AvailabilityDistribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let a = aggregate_for_small_demand(&q, 2).unwrap();
        assert!((a.effective.prob(2) - 0.7_f64).abs() < 1e-15);
        assert!(matches!(
            aggregate_for_small_demand(&q, 3),
            Err(Error::AggregationNotNeeded { .. })
        ));
    }

    #[test]
    fn single_unit_market() {
        let q = AvailabilityDistribution::new(vec![0.4, 0.6]).unwrap();
        let cfg = MarketConfig::symmetric(1, 10.0, 1.0, q).unwrap();
        let ne = solve_symmetric(&cfg).unwrap();
        assert_eq!(ne.threshold, 0);
        // Indifference between v (sells only if rival is empty) and p̃ (always sells).
        assert!((ne.p_tilde() - (1.0 + 9.0 * 0.4_f64)).abs() < 1e-12);
    }

    #[test]
    fn monopoly_when_supply_never_exceeds_demand() {
        let cfg = MarketConfig::symmetric(6, 10.0, 1.0, binomial(3, 0.4)).unwrap();
        let ne = solve_symmetric(&cfg).unwrap();
        assert_eq!(ne.threshold, 3);
        assert!(ne.segments.is_empty());
        assert_eq!(ne.p_tilde(), 10.0);
    }

    #[test]
    fn boundaries_decrease_with_availability() {
        let cfg = MarketConfig::symmetric(5, 10.0, 1.0, binomial(5, 0.6)).unwrap();
        let ne = solve_symmetric(&cfg).unwrap();
        assert_eq!(ne.threshold, 2);
        let b = ne.boundaries();
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*b.last().unwrap(), 10.0);
        for s in &ne.segments {
            assert!(s.raw(s.lo).abs() < 1e-12_f64);
            assert!((s.raw(s.hi) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_asymmetric_market() {
        let cfg = MarketConfig::duopoly(3, 10.0, 1.0, binomial(3, 0.4), binomial(3, 0.5)).unwrap();
        assert_eq!(solve_symmetric(&cfg).unwrap_err(), Error::NotSymmetric);
    }
}
