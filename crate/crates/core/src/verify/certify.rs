use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    units_sold_given, LevelStrategy, MarketConfig, OpponentMasses, PriceStrategy, Seller,
    StrategyProfile,
};
use crate::scalar::Scalar;
use crate::verify::structure::{check_theorem1_properties, InvariantReport};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_GRID: usize = 10_000;
const MIN_GRID: usize = 1_000;
/// Quantile nodes used to average utility over a level's continuous part.
const QUADRATURE_NODES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct LevelCertificate<T> {
    pub seller: Seller,
    pub level: usize,
    pub equilibrium_utility: T,
    pub best_response_utility: T,
    pub best_response_price: T,
    pub gap: T,
    pub relative_gap: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct EquilibriumCertificate<T> {
    pub levels: Vec<LevelCertificate<T>>,
    pub max_gap: T,
    pub tol: T,
    pub grid_size: usize,
    pub passed: bool,
    pub invariants: InvariantReport,
}

impl<T: Scalar> EquilibriumCertificate<T> {
    pub fn level(&self, k: Seller, l: usize) -> Option<&LevelCertificate<T>> {
        self.levels.iter().find(|c| c.seller == k && c.level == l)
    }
}

/// Masses with ties dropped: the left limit of the opponent CDF at `x`.
pub(crate) fn left_masses<T: Scalar>(opponent: &PriceStrategy<T>, x: T) -> OpponentMasses<T> {
    let mut masses = OpponentMasses::at(opponent, x);
    for t in masses.tie.iter_mut() {
        *t = T::zero();
    }
    masses
}

pub(crate) fn check_profile_shape<T: Scalar>(
    cfg: &MarketConfig<T>,
    profile: &StrategyProfile<T>,
) -> Result<()> {
    for k in Seller::BOTH {
        let s = profile.strategy(k);
        if s.max_level() != cfg.max_level(k) {
            return Err(Error::InvalidStrategy(format!(
                "{k:?} strategy has {} levels, market has {}",
                s.max_level(),
                cfg.max_level(k)
            )));
        }
        if s.v != cfg.v() {
            return Err(Error::InvalidStrategy(format!(
                "{k:?} strategy uses cap {} but market cap is {}",
                s.v,
                cfg.v()
            )));
        }
        s.validate(T::endpoint_tol())?;
    }
    Ok(())
}

/// Prices at the quantile midpoints of a level's continuous part.
pub(crate) fn quadrature_nodes<T: Scalar>(level: &LevelStrategy<T>, v: T) -> Vec<T> {
    let cont = T::one() - level.atom_at_v;
    if level.is_at_cap() || cont <= T::zero() {
        return Vec::new();
    }
    let n = T::from_usize_lossy(QUADRATURE_NODES);
    (0..QUADRATURE_NODES)
        .map(|j| level.quantile(cont * (T::from_usize_lossy(j) + T::lit(0.5)) / n, v))
        .collect()
}

/// Expected utility of the level's own mixed strategy.
pub(crate) fn equilibrium_utility<T: Scalar>(
    cfg: &MarketConfig<T>,
    k: Seller,
    l: usize,
    own: &PriceStrategy<T>,
    opponent: &PriceStrategy<T>,
) -> T {
    let level = own.level(l);
    let v = cfg.v();
    let c = cfg.c();
    let mut total = T::zero();
    if level.atom_at_v > T::zero() {
        let masses = OpponentMasses::at(opponent, v);
        total += level.atom_at_v * (v - c) * units_sold_given(cfg, k, l, &masses);
    }
    let cont = T::one() - level.atom_at_v;
    let nodes = quadrature_nodes(level, v);
    if !nodes.is_empty() {
        let mut acc = T::zero();
        for &x in &nodes {
            acc += (x - c) * units_sold_given(cfg, k, l, &left_masses(opponent, x));
        }
        total += cont * acc / T::from_usize_lossy(nodes.len());
    }
    total
}

/// Prices at which a deviation is tried.
pub(crate) fn candidate_prices<T: Scalar>(
    cfg: &MarketConfig<T>,
    profile: &StrategyProfile<T>,
    grid_size: usize,
) -> Vec<T> {
    let (v, c) = (cfg.v(), cfg.c());
    let g = T::from_usize_lossy(grid_size);
    let mut xs: Vec<T> = (0..=grid_size)
        .map(|t| c + (v - c) * T::from_usize_lossy(t) / g)
        .collect();
    for s in &profile.strategies {
        for level in &s.levels {
            for p in &level.pieces {
                xs.push(p.lo());
                xs.push(p.hi());
            }
        }
    }
    xs.push(v);
    xs.push(v - (v - c) * T::lit(1e-7));
    xs.retain(|&x| x >= c && x <= v);
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite prices"));
    xs.dedup();
    xs
}

/// Best-response certificate: for every seller and level, the largest
/// deviation payoff over a price grid augmented with all breakpoints.
pub fn certify<T: Scalar>(
    cfg: &MarketConfig<T>,
    profile: &StrategyProfile<T>,
    grid_size: usize,
    tol: T,
) -> Result<EquilibriumCertificate<T>> {
    if grid_size < MIN_GRID {
        return Err(Error::InvalidStrategy(format!(
            "certification grid {grid_size} below the minimum {MIN_GRID}"
        )));
    }
    check_profile_shape(cfg, profile)?;
    let (v, c) = (cfg.v(), cfg.c());
    let xs = candidate_prices(cfg, profile, grid_size);
    let mut levels = Vec::new();
    let mut max_gap = T::neg_infinity();
    for k in Seller::BOTH {
        let own = profile.strategy(k);
        let opp = profile.strategy(k.other());
        let m = cfg.max_level(k);
        let mut best = vec![(T::neg_infinity(), v); m];
        let mut own_nodes = xs.clone();
        for l in 1..=m {
            own_nodes.extend(quadrature_nodes(own.level(l), v));
        }
        own_nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite prices"));
        own_nodes.dedup();
        for &x in &own_nodes {
            let masses = OpponentMasses::at(opp, x);
            for (l, slot) in best.iter_mut().enumerate() {
                let u = (x - c) * units_sold_given(cfg, k, l + 1, &masses);
                if u > slot.0 {
                    *slot = (u, x);
                }
            }
        }
        for (idx, (br, at)) in best.into_iter().enumerate() {
            let l = idx + 1;
            let eq = equilibrium_utility(cfg, k, l, own, opp);
            let gap = br - eq;
            let relative_gap = if eq > T::zero() { gap / eq } else { T::zero() };
            if gap > max_gap {
                max_gap = gap;
            }
            levels.push(LevelCertificate {
                seller: k,
                level: l,
                equilibrium_utility: eq,
                best_response_utility: br,
                best_response_price: at,
                gap,
                relative_gap,
            });
        }
    }
    let passed = max_gap <= tol * (v - c);
    Ok(EquilibriumCertificate {
        levels,
        max_gap,
        tol,
        grid_size,
        passed,
        invariants: check_theorem1_properties(cfg, profile),
    })
}
