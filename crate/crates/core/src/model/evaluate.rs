use crate::error::{Error, Result};
use crate::model::{MarketConfig, PriceStrategy, Seller};
use crate::scalar::Scalar;

/// Opponent price masses relative to one price `x`, indexed by opponent
/// availability `0..=m`. Entry 0 is ignored: an empty opponent never competes.
#[derive(Debug, Clone, PartialEq)]
pub struct OpponentMasses<T> {
    /// `P(opponent price < x)` per level.
    pub below: Vec<T>,
    /// `P(opponent price == x)` per level.
    pub tie: Vec<T>,
}

impl<T: Scalar> OpponentMasses<T> {
    pub fn zeros(m: usize) -> Self {
        Self {
            below: vec![T::zero(); m + 1],
            tie: vec![T::zero(); m + 1],
        }
    }

    /// Masses induced by `strategy` at price `x`.
    pub fn at(strategy: &PriceStrategy<T>, x: T) -> Self {
        let m = strategy.max_level();
        let mut out = Self::zeros(m);
        for i in 1..=m {
            out.below[i] = strategy.cdf_below(i, x);
            out.tie[i] = strategy.mass_at(i, x);
        }
        out
    }
}

/// Expected units from a tie between `l` own and `i` opponent units at demand `d`.
#[inline]
pub fn tie_share<T: Scalar>(l: usize, i: usize, d: usize) -> T {
    if l + i <= d {
        T::from_usize_lossy(l)
    } else {
        T::from_usize_lossy(l) * T::from_usize_lossy(d) / T::from_usize_lossy(l + i)
    }
}

/// Expected units sold at a single demand atom.
fn units_at_demand<T: Scalar>(q: &[T], l: usize, d: usize, masses: &OpponentMasses<T>) -> T {
    let full = l.min(d);
    let full_t = T::from_usize_lossy(full);
    let mut deficit = T::zero();
    for i in 1..q.len() {
        if q[i] == T::zero() {
            continue;
        }
        let under = full - l.min(d.saturating_sub(i));
        let tie = masses.tie[i];
        let mut loss = T::zero();
        if under > 0 {
            loss += masses.below[i] * T::from_usize_lossy(under);
        }
        if tie > T::zero() {
            loss += tie * (full_t - tie_share::<T>(l, i, d));
        }
        deficit += q[i] * loss;
    }
    full_t - deficit
}

/// `B_kl` for explicit opponent masses. Skips range checks; the opponent
/// availability is taken from `cfg`.
pub fn units_sold_given<T: Scalar>(
    cfg: &MarketConfig<T>,
    k: Seller,
    l: usize,
    masses: &OpponentMasses<T>,
) -> T {
    let q = cfg.seller(k.other()).probs();
    let m_other = q.len() - 1;
    if l + m_other <= cfg.structural_demand() {
        return T::from_usize_lossy(l);
    }
    let mut total = T::zero();
    for (d, r) in cfg.demand().atoms() {
        if r == T::zero() {
            continue;
        }
        if l + m_other <= d {
            total += r * T::from_usize_lossy(l);
        } else {
            total += r * units_at_demand(q, l, d, masses);
        }
    }
    total
}

fn check_call<T: Scalar>(
    cfg: &MarketConfig<T>,
    k: Seller,
    l: usize,
    x: T,
    opponent: &PriceStrategy<T>,
) -> Result<()> {
    let m = cfg.max_level(k);
    if l == 0 || l > m {
        return Err(Error::LevelOutOfRange { level: l, max: m });
    }
    let v = cfg.v();
    if !(x >= T::zero() && x <= v) {
        return Err(Error::PriceOutOfRange {
            price: x.to_f64().unwrap_or(f64::NAN),
            cap: v.to_f64().unwrap_or(f64::NAN),
        });
    }
    let m_other = cfg.max_level(k.other());
    if opponent.max_level() != m_other {
        return Err(Error::InvalidStrategy(format!(
            "opponent strategy covers {} levels, availability has {m_other}",
            opponent.max_level()
        )));
    }
    Ok(())
}

/// Expected units seller `k` sells with availability `l` at price `x`
/// against `opponent`.
pub fn expected_units_sold<T: Scalar>(
    cfg: &MarketConfig<T>,
    k: Seller,
    l: usize,
    x: T,
    opponent: &PriceStrategy<T>,
) -> Result<T> {
    check_call(cfg, k, l, x, opponent)?;
    Ok(units_sold_given(
        cfg,
        k,
        l,
        &OpponentMasses::at(opponent, x),
    ))
}

/// `(x - c) * B_kl(x)`.
pub fn expected_utility<T: Scalar>(
    cfg: &MarketConfig<T>,
    k: Seller,
    l: usize,
    x: T,
    opponent: &PriceStrategy<T>,
) -> Result<T> {
    Ok((x - cfg.c()) * expected_units_sold(cfg, k, l, x, opponent)?)
}

/// Per-unit utility difference `u_l / l - u_j / j` for `j < l`.
pub fn utility_gap_a<T: Scalar>(
    cfg: &MarketConfig<T>,
    k: Seller,
    l: usize,
    j: usize,
    x: T,
    opponent: &PriceStrategy<T>,
) -> Result<T> {
    if j == 0 || j >= l {
        return Err(Error::LevelOrder { l, j });
    }
    let bl = expected_units_sold(cfg, k, l, x, opponent)?;
    let bj = expected_units_sold(cfg, k, j, x, opponent)?;
    Ok((x - cfg.c()) * (bl / T::from_usize_lossy(l) - bj / T::from_usize_lossy(j)))
}

/// Units sold as an affine function of one opponent level's CDF `phi`, all
/// other opponent levels fixed by `masses`: returns `(B at phi=0, B(0) - B(1))`.
pub fn linear_in_level<T: Scalar>(
    cfg: &MarketConfig<T>,
    k: Seller,
    l: usize,
    level: usize,
    masses: &OpponentMasses<T>,
) -> (T, T) {
    let mut scratch = masses.clone();
    scratch.below[level] = T::zero();
    scratch.tie[level] = T::zero();
    let b0 = units_sold_given(cfg, k, l, &scratch);
    let q = cfg.seller(k.other()).probs();
    let m_other = q.len() - 1;
    if l + m_other <= cfg.structural_demand() {
        return (b0, T::zero());
    }
    let mut slope = T::zero();
    for (d, r) in cfg.demand().atoms() {
        if l + m_other <= d {
            continue;
        }
        let lost = l.min(d) - l.min(d.saturating_sub(level));
        slope += r * q[level] * T::from_usize_lossy(lost);
    }
    (b0, slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AvailabilityDistribution, DemandModel, LevelStrategy};

    fn fig1() -> MarketConfig<f64> {
        MarketConfig::duopoly(
            3,
            10.0,
            6.0,
            AvailabilityDistribution::new(vec![0.3, 0.2, 0.2, 0.3]).unwrap(),
            AvailabilityDistribution::new(vec![0.4, 0.2, 0.2, 0.2]).unwrap(),
        )
        .unwrap()
    }

    /// Direct enumeration of the sale rule over opponent availability and
    /// below / tie / above outcomes.
    fn brute(q: &[f64], l: usize, d: usize, below: &[f64], tie: &[f64]) -> f64 {
        let mut e = q[0] * l.min(d) as f64;
        for i in 1..q.len() {
            let above = 1.0 - below[i] - tie[i];
            let undercut = l.min(d.saturating_sub(i)) as f64;
            let tied = if i + l > d {
                l as f64 * d as f64 / (i + l) as f64
            } else {
                l as f64
            };
            e += q[i] * (below[i] * undercut + tie[i] * tied + above * l.min(d) as f64);
        }
        e
    }

    #[test]
    fn guaranteed_level_sells_everything() {
        let cfg = MarketConfig::duopoly(
            5,
            10.0,
            1.0,
            AvailabilityDistribution::new(vec![0.5, 0.2, 0.3]).unwrap(),
            AvailabilityDistribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
        )
        .unwrap();
        let opp = PriceStrategy::monopoly(2, 10.0);
        for x in [0.0, 3.0, 10.0] {
            for l in 1..=3 {
                assert_eq!(
                    expected_units_sold(&cfg, Seller::Second, l, x, &opp).unwrap(),
                    l as f64
                );
            }
        }
    }

    #[test]
    fn undercutting_a_cap_pricer_sells_all() {
        let cfg = fig1();
        let opp = PriceStrategy::monopoly(3, 10.0);
        for l in 1..=3 {
            let b = expected_units_sold(&cfg, Seller::First, l, 9.0, &opp).unwrap();
            assert!((b - l as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_brute_force_at_cap() {
        let cfg = fig1();
        let opp = PriceStrategy::monopoly(3, 10.0);
        let q = cfg.seller(Seller::Second).probs().to_vec();
        for l in 1..=3 {
            let b = expected_units_sold(&cfg, Seller::First, l, 10.0, &opp).unwrap();
            let want = brute(&q, l, 3, &[0.0; 4], &[0.0, 1.0, 1.0, 1.0]);
            assert!((b - want).abs() < 1e-14, "{b} vs {want}");
        }
    }

    #[test]
    fn utility_identities() {
        let cfg = fig1();
        let opp = PriceStrategy::monopoly(3, 10.0);
        assert_eq!(
            expected_utility(&cfg, Seller::First, 2, 6.0, &opp).unwrap(),
            0.0
        );
        assert_eq!(
            utility_gap_a(&cfg, Seller::First, 3, 1, 6.0, &opp).unwrap(),
            0.0
        );
        assert!(utility_gap_a(&cfg, Seller::First, 1, 3, 8.0, &opp).is_err());
        assert!(expected_units_sold(&cfg, Seller::First, 4, 8.0, &opp).is_err());
        assert!(expected_units_sold(&cfg, Seller::First, 1, 10.5, &opp).is_err());
    }

    #[test]
    fn single_atom_random_demand_is_bit_identical() {
        let cfg = fig1();
        let rnd = cfg
            .with_demand(DemandModel::random(vec![(3, 1.0)]).unwrap())
            .unwrap();
        let opp = PriceStrategy {
            v: 10.0,
            levels: vec![
                LevelStrategy::at_cap(),
                LevelStrategy {
                    pieces: vec![crate::model::CdfPiece::Hyperbolic(
                        crate::model::CdfSegment::spanning(8.0, 10.0, 6.0, 0.5),
                    )],
                    atom_at_v: 0.5,
                },
                LevelStrategy {
                    pieces: vec![crate::model::CdfPiece::Hyperbolic(
                        crate::model::CdfSegment::spanning(7.0, 8.0, 6.0, 1.0),
                    )],
                    atom_at_v: 0.0,
                },
            ],
        };
        for x in [6.5, 7.5, 8.5, 9.9, 10.0] {
            for l in 1..=3 {
                let a = expected_units_sold(&cfg, Seller::First, l, x, &opp).unwrap();
                let b = expected_units_sold(&rnd, Seller::First, l, x, &opp).unwrap();
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn linear_decomposition_is_exact() {
        let cfg = fig1();
        let mut masses = OpponentMasses::zeros(3);
        masses.below[3] = 1.0;
        let (a, g) = linear_in_level(&cfg, Seller::First, 2, 2, &masses);
        masses.below[2] = 0.3;
        let b = units_sold_given(&cfg, Seller::First, 2, &masses);
        assert!((b - (a - 0.3 * g)).abs() < 1e-14);
    }
}
