//! Symmetric heuristic for `n` sellers: levels up to `⌊d/n⌋` price at the cap,
//! higher levels mix over disjoint intervals built by the duopoly recursion
//! with an `n`-seller sales model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AvailabilityDistribution, CdfPiece, LevelStrategy, MarketConfig, PriceStrategy, TabulatedCdf,
};
use crate::scalar::Scalar;
use crate::symmetric::solve_symmetric;

pub const DEFAULT_GRID_POINTS: usize = 2048;
pub const DEFAULT_STATE_CAP: usize = 10_000_000;
const PHI_TOL: f64 = 1e-12;
const QUADRATURE_NODES: usize = 256;

/// How a deviating seller shares buyers with rivals at exactly its price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Tied rivals are treated as priced above: the deviator is served first.
    #[default]
    Ignore,
    /// Buyers split among tied units in proportion to units offered.
    Proportional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct OligopolyConfig<T> {
    pub n: usize,
    pub availability: AvailabilityDistribution<T>,
    pub d: usize,
    pub v: T,
    pub c: T,
    /// Price points per tabulated segment.
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    /// Cap on `(d + 1) * ((n - 1) m + 1)` convolution states.
    #[serde(default = "default_cap")]
    pub state_cap: usize,
    #[serde(default)]
    pub tie_rule: TieRule,
}

fn default_grid() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_cap() -> usize {
    DEFAULT_STATE_CAP
}

impl<T: Scalar> OligopolyConfig<T> {
    pub fn new(
        n: usize,
        availability: AvailabilityDistribution<T>,
        d: usize,
        v: T,
        c: T,
    ) -> Result<Self> {
        let cfg = Self {
            n,
            availability,
            d,
            v,
            c,
            grid_points: DEFAULT_GRID_POINTS,
            state_cap: DEFAULT_STATE_CAP,
            tie_rule: TieRule::Ignore,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidMarket(format!(
                "need at least two sellers, got {}",
                self.n
            )));
        }
        if self.d == 0 {
            return Err(Error::InvalidDemand("demand must be at least 1".into()));
        }
        if !(self.c >= T::zero()) || !(self.v > self.c) {
            return Err(Error::InvalidMarket(format!(
                "need v > c >= 0, got v={} c={}",
                self.v, self.c
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidMarket(
                "grid needs at least two points".into(),
            ));
        }
        let states = self.states();
        if states > self.state_cap {
            return Err(Error::TooLarge {
                size: states,
                cap: self.state_cap,
            });
        }
        Ok(())
    }

    pub fn max_level(&self) -> usize {
        self.availability.max_level()
    }

    pub fn threshold(&self) -> usize {
        self.d / self.n
    }

    pub fn is_monopoly(&self) -> bool {
        self.n * self.max_level() <= self.d
    }

    fn states(&self) -> usize {
        (self.d + 1).saturating_mul((self.n - 1).saturating_mul(self.max_level()) + 1)
    }
}

/// Distribution of (units priced strictly below, units tied) over the
/// `n - 1` opponents, each independent with availability `q`.
#[derive(Debug, Clone)]
struct Rivals<T> {
    d: usize,
    /// `p[s][t]`, `s` capped at `d`.
    p: Vec<Vec<T>>,
}

impl<T: Scalar> Rivals<T> {
    fn new(q: &[T], below: &[T], tie: &[T], rivals: usize, d: usize) -> Self {
        let m = q.len() - 1;
        let any_tie = tie.iter().any(|&t| t > T::zero());
        let t_max = if any_tie { rivals * m } else { 0 };
        let mut single: Vec<(usize, usize, T)> = Vec::with_capacity(2 * m + 1);
        let mut stay = q[0];
        for a in 1..=m {
            let b = q[a] * below[a];
            let t = q[a] * tie[a];
            stay += q[a] - b - t;
            if b > T::zero() {
                single.push((a.min(d), 0, b));
            }
            if t > T::zero() {
                single.push((0, a, t));
            }
        }
        single.push((0, 0, stay));
        let mut p = vec![vec![T::zero(); t_max + 1]; d + 1];
        p[0][0] = T::one();
        for _ in 0..rivals {
            let mut next = vec![vec![T::zero(); t_max + 1]; d + 1];
            for (s, row) in p.iter().enumerate() {
                for (t, &w) in row.iter().enumerate() {
                    if w == T::zero() {
                        continue;
                    }
                    for &(ds, dt, pw) in &single {
                        next[(s + ds).min(d)][t + dt] += w * pw;
                    }
                }
            }
            p = next;
        }
        Self { d, p }
    }

    /// Expected units sold by a seller offering `l` units.
    fn units(&self, l: usize) -> T {
        let lt = T::from_usize_lossy(l);
        let mut total = T::zero();
        for (s, row) in self.p.iter().enumerate() {
            let r = self.d - s;
            if r == 0 {
                continue;
            }
            for (t, &w) in row.iter().enumerate() {
                if w == T::zero() {
                    continue;
                }
                let sale = if l + t <= r {
                    lt
                } else {
                    lt * T::from_usize_lossy(r) / T::from_usize_lossy(l + t)
                };
                total += w * sale;
            }
        }
        total
    }
}

/// Expected units sold by one seller with `l` units at price `x` when every
/// other seller follows `strategy`.
pub fn oligopoly_units_sold<T: Scalar>(
    ocfg: &OligopolyConfig<T>,
    strategy: &PriceStrategy<T>,
    l: usize,
    x: T,
) -> Result<T> {
    let m = ocfg.max_level();
    if l == 0 || l > m {
        return Err(Error::LevelOutOfRange { level: l, max: m });
    }
    Ok(rivals_at(ocfg, strategy, x).units(l))
}

fn rivals_at<T: Scalar>(ocfg: &OligopolyConfig<T>, strategy: &PriceStrategy<T>, x: T) -> Rivals<T> {
    let m = ocfg.max_level();
    let mut below = vec![T::zero(); m + 1];
    let mut tie = vec![T::zero(); m + 1];
    for a in 1..=m {
        below[a] = strategy.cdf_below(a, x);
        if ocfg.tie_rule == TieRule::Proportional {
            tie[a] = strategy.mass_at(a, x);
        }
    }
    Rivals::new(ocfg.availability.probs(), &below, &tie, ocfg.n - 1, ocfg.d)
}

/// Rivals inside level `i`'s interval with that level's CDF at `phi`.
fn rivals_in_interval<T: Scalar>(ocfg: &OligopolyConfig<T>, i: usize, phi: T) -> Rivals<T> {
    let m = ocfg.max_level();
    let mut below = vec![T::zero(); m + 1];
    for b in below.iter_mut().skip(i + 1) {
        *b = T::one();
    }
    below[i] = phi;
    Rivals::new(
        ocfg.availability.probs(),
        &below,
        &vec![T::zero(); m + 1],
        ocfg.n - 1,
        ocfg.d,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct OligopolyProfile<T> {
    pub n: usize,
    pub threshold: usize,
    pub strategy: PriceStrategy<T>,
    pub p_tilde: T,
}

fn solve_phi<T: Scalar>(ocfg: &OligopolyConfig<T>, i: usize, x: T, u: T) -> T {
    let c = ocfg.c;
    let f = |phi: T| (x - c) * rivals_in_interval(ocfg, i, phi).units(i) - u;
    let (mut lo, mut hi) = (T::zero(), T::one());
    if f(lo) <= T::zero() {
        return T::zero();
    }
    if f(hi) >= T::zero() {
        return T::one();
    }
    let tol = T::lit(PHI_TOL);
    while hi - lo > tol {
        let mid = (lo + hi) / T::lit(2.0);
        if f(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Builds the heuristic strategy shared by all sellers.
pub fn build_heuristic<T: Scalar>(ocfg: &OligopolyConfig<T>) -> Result<OligopolyProfile<T>> {
    ocfg.validate()?;
    let m = ocfg.max_level();
    let (v, c) = (ocfg.v, ocfg.c);
    if ocfg.is_monopoly() {
        return Ok(OligopolyProfile {
            n: ocfg.n,
            threshold: m,
            strategy: PriceStrategy::monopoly(m, v),
            p_tilde: v,
        });
    }
    if ocfg.d < m {
        return Err(Error::Unsupported(format!(
            "demand {} below top availability {m}",
            ocfg.d
        )));
    }
    if ocfg.n == 2 {
        let cfg = MarketConfig::symmetric(ocfg.d, v, c, ocfg.availability.clone())?;
        let ne = solve_symmetric(&cfg)?;
        return Ok(OligopolyProfile {
            n: 2,
            threshold: ne.threshold,
            strategy: ne.strategy().clone(),
            p_tilde: ne.p_tilde(),
        });
    }
    let threshold = ocfg.threshold();
    let mut levels = vec![LevelStrategy::at_cap(); threshold];
    let mut top = v;
    for i in threshold + 1..=m {
        if ocfg.availability.prob(i) <= T::zero() {
            return Err(Error::Unsupported(format!(
                "availability level {i} has zero probability inside the competitive range"
            )));
        }
        let b0 = rivals_in_interval(ocfg, i, T::zero()).units(i);
        let b1 = rivals_in_interval(ocfg, i, T::one()).units(i);
        if !(b0 > b1) || !(b1 > T::zero()) {
            return Err(Error::Numerical(format!(
                "level {i}: sales do not fall with the level's own CDF ({b0} vs {b1})"
            )));
        }
        let u = (top - c) * b1;
        let lo = c + u / b0;
        let g = ocfg.grid_points - 1;
        let mut prices = Vec::with_capacity(g + 1);
        let mut probs = Vec::with_capacity(g + 1);
        for j in 0..=g {
            let x = lo + (top - lo) * T::from_usize_lossy(j) / T::from_usize_lossy(g);
            let phi = if j == 0 {
                T::zero()
            } else if j == g {
                T::one()
            } else {
                solve_phi(ocfg, i, x, u)
            };
            prices.push(x);
            probs.push(phi);
        }
        levels.push(LevelStrategy {
            pieces: vec![CdfPiece::Tabulated(TabulatedCdf::new(prices, probs)?)],
            atom_at_v: T::zero(),
        });
        top = lo;
    }
    let strategy = PriceStrategy::new(v, levels)?;
    Ok(OligopolyProfile {
        n: ocfg.n,
        threshold,
        strategy,
        p_tilde: top,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct LevelGap<T> {
    pub level: usize,
    pub proposed_utility: T,
    pub best_response_utility: T,
    pub best_response_price: T,
    pub relative_difference: T,
}

fn nodes<T: Scalar>(level: &LevelStrategy<T>, v: T) -> Vec<T> {
    let cont = T::one() - level.atom_at_v;
    if level.is_at_cap() || cont <= T::zero() {
        return Vec::new();
    }
    let n = T::from_usize_lossy(QUADRATURE_NODES);
    (0..QUADRATURE_NODES)
        .map(|j| level.quantile(cont * (T::from_usize_lossy(j) + T::lit(0.5)) / n, v))
        .collect()
}

/// Relative gain `(U_best - U_heuristic) / U_heuristic` of one seller
/// deviating alone, per availability level.
pub fn heuristic_gap<T: Scalar>(
    ocfg: &OligopolyConfig<T>,
    profile: &OligopolyProfile<T>,
    grid_size: usize,
) -> Result<Vec<LevelGap<T>>> {
    ocfg.validate()?;
    let s = &profile.strategy;
    let m = ocfg.max_level();
    if s.max_level() != m {
        return Err(Error::InvalidStrategy(format!(
            "strategy covers {} levels, availability has {m}",
            s.max_level()
        )));
    }
    if grid_size == 0 {
        return Err(Error::InvalidStrategy("empty deviation grid".into()));
    }
    let (v, c) = (ocfg.v, ocfg.c);
    let g = T::from_usize_lossy(grid_size);
    let mut xs: Vec<T> = (0..=grid_size)
        .map(|t| c + (v - c) * T::from_usize_lossy(t) / g)
        .collect();
    let mut own: Vec<Vec<T>> = Vec::with_capacity(m);
    for l in 1..=m {
        let level = s.level(l);
        for p in &level.pieces {
            xs.push(p.lo());
            xs.push(p.hi());
        }
        let ns = nodes(level, v);
        xs.extend(ns.iter().copied());
        own.push(ns);
    }
    xs.push(v);
    xs.push(v - (v - c) * T::lit(1e-7));
    xs.retain(|&x| x >= c && x <= v);
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite prices"));
    xs.dedup();

    let mut best = vec![(T::neg_infinity(), v); m];
    for &x in &xs {
        let rivals = rivals_at(ocfg, s, x);
        for (l, slot) in best.iter_mut().enumerate() {
            let u = (x - c) * rivals.units(l + 1);
            if u > slot.0 {
                *slot = (u, x);
            }
        }
    }
    let mut out = Vec::with_capacity(m);
    for l in 1..=m {
        let level = s.level(l);
        let mut proposed = T::zero();
        if level.atom_at_v > T::zero() {
            proposed += level.atom_at_v * (v - c) * rivals_at(ocfg, s, v).units(l);
        }
        let ns = &own[l - 1];
        if !ns.is_empty() {
            let cont = T::one() - level.atom_at_v;
            let mut acc = T::zero();
            for &x in ns {
                acc += (x - c) * rivals_at(ocfg, s, x).units(l);
            }
            proposed += cont * acc / T::from_usize_lossy(ns.len());
        }
        let (br, at) = best[l - 1];
        let relative_difference = if proposed > T::zero() {
            ((br - proposed) / proposed).max(T::zero())
        } else {
            T::zero()
        };
        out.push(LevelGap {
            level: l,
            proposed_utility: proposed,
            best_response_utility: br,
            best_response_price: at,
            relative_difference,
        });
    }
    Ok(out)
}
