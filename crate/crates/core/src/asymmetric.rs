//! Equilibria of general duopolies. A structure hypothesis fixes both
//! thresholds and the order in which interior lower bounds appear when
//! sweeping down from `v`. Given the size of the single jump at `v`, the sweep
//! determines every support and CDF, so each hypothesis reduces to one scalar
//! equation: both sellers' supports must bottom out at the same price.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    linear_in_level, units_sold_given, AvailabilityDistribution, CdfPiece, CdfSegment,
    LevelStrategy, MarketConfig, OpponentMasses, PriceStrategy, Seller, StrategyProfile,
};
use crate::scalar::Scalar;
use crate::symmetric::{aggregate_for_small_demand, AggregatedAvailability};
use crate::verify::{certify, left_masses, EquilibriumCertificate};

/// Scan resolution for the jump parameter.
const SCAN_POINTS: usize = 400;
const BISECTION_STEPS: usize = 200;
const MAX_HYPOTHESES: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructureHypothesis {
    pub thresholds: [usize; 2],
    /// Owner of each interior lower bound, from the highest price down.
    pub interleaving: Vec<Seller>,
}

impl StructureHypothesis {
    /// Word such as `"1212"`.
    pub fn word(&self) -> String {
        self.interleaving
            .iter()
            .map(|s| if *s == Seller::First { '1' } else { '2' })
            .collect()
    }
}

/// `Φ_{seller,level}` evaluated at the lower bound of `(at_seller, at_level)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct CrossValue<T> {
    pub seller: Seller,
    pub level: usize,
    pub at_seller: Seller,
    pub at_level: usize,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct CandidateSolution<T> {
    pub hypothesis: StructureHypothesis,
    pub p_tilde: T,
    /// Lower bound of every level `l_k+1..=m_k`, per seller.
    pub lower_bounds: [Vec<T>; 2],
    pub jumps: [T; 2],
    pub cross_values: Vec<CrossValue<T>>,
    /// Mismatch of the two sellers' bottom prices, scaled by `v - c`.
    pub residual: T,
    /// Worst spread of a level's utility across its support, scaled by `v - c`.
    pub utility_residual: T,
    pub valid: bool,
    pub notes: Vec<String>,
    #[serde(skip)]
    segments: [Vec<Vec<CdfSegment<T>>>; 2],
}

/// Everything one sweep produces for a given jump.
struct Sweep<T> {
    residual: T,
    p_pair: (T, T),
    lower_bounds: [Vec<T>; 2],
    cross_values: Vec<CrossValue<T>>,
    /// `[seller][level - l_k - 1]` pieces from the top price down.
    segments: [Vec<Vec<CdfSegment<T>>>; 2],
    utilities: [T; 2],
}

/// Market used for solving: levels above the demand pooled.
#[derive(Debug, Clone)]
struct Reduced<T> {
    cfg: MarketConfig<T>,
    aggregation: [Option<AggregatedAvailability<T>>; 2],
}

fn reduce<T: Scalar>(cfg: &MarketConfig<T>) -> Result<Reduced<T>> {
    let d = cfg.structural_demand();
    let mut aggregation = [None, None];
    let mut sellers = [
        cfg.seller(Seller::First).clone(),
        cfg.seller(Seller::Second).clone(),
    ];
    for k in Seller::BOTH {
        if cfg.max_level(k) > d {
            if cfg.demand().is_random() {
                return Err(Error::Unsupported(format!(
                    "random demand needs its smallest positive demand ({d}) to be at least every top availability"
                )));
            }
            let agg = aggregate_for_small_demand(cfg.seller(k), d)?;
            sellers[k.index()] = agg.effective.clone();
            aggregation[k.index()] = Some(agg);
        }
    }
    let [a, b] = sellers;
    let reduced = if aggregation.iter().any(Option::is_some) {
        cfg.with_sellers(a, b)?
    } else {
        cfg.clone()
    };
    Ok(Reduced {
        cfg: reduced,
        aggregation,
    })
}

fn words(n1: usize, n2: usize) -> Vec<Vec<Seller>> {
    if n1 == 0 && n2 == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    if n1 > 0 {
        for mut w in words(n1 - 1, n2) {
            w.insert(0, Seller::First);
            out.push(w);
        }
    }
    if n2 > 0 {
        for mut w in words(n1, n2 - 1) {
            w.insert(0, Seller::Second);
            out.push(w);
        }
    }
    out
}

fn binomial_count(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

fn threshold_pairs<T: Scalar>(cfg: &MarketConfig<T>) -> Vec<[usize; 2]> {
    let d = cfg.structural_demand();
    let (m1, m2) = (cfg.max_level(Seller::First), cfg.max_level(Seller::Second));
    let (e1, e2) = (
        cfg.guaranteed_level(Seller::First),
        cfg.guaranteed_level(Seller::Second),
    );
    let mut out = Vec::new();
    for l1 in e1..m1 {
        for l2 in e2..m2 {
            if l1 + l2 == d || l1 + l2 + 1 == d {
                out.push([l1, l2]);
            }
        }
    }
    out
}

/// All threshold pairs and lower-bound orders compatible with the necessary
/// equilibrium structure, in lexicographic order. Demand at or above the
/// larger top level is assumed; use [`solve_asymmetric`] for smaller demand.
pub fn enumerate_hypotheses<T: Scalar>(cfg: &MarketConfig<T>) -> Result<Vec<StructureHypothesis>> {
    if cfg.is_monopoly() {
        return Err(Error::NoHypothesis(
            "total supply never exceeds demand; both sellers price at v".into(),
        ));
    }
    let d = cfg.structural_demand();
    let m_max = cfg
        .max_level(Seller::First)
        .max(cfg.max_level(Seller::Second));
    if d < m_max {
        return Err(Error::Unsupported(format!(
            "demand {d} below top availability {m_max}; aggregate first"
        )));
    }
    let mut total = 0usize;
    let mut out = Vec::new();
    for t in threshold_pairs(cfg) {
        let n1 = cfg.max_level(Seller::First) - t[0] - 1;
        let n2 = cfg.max_level(Seller::Second) - t[1] - 1;
        total = total.saturating_add(binomial_count(n1 + n2, n1));
        if total > MAX_HYPOTHESES {
            return Err(Error::TooLarge {
                size: total,
                cap: MAX_HYPOTHESES,
            });
        }
        for w in words(n1, n2) {
            out.push(StructureHypothesis {
                thresholds: t,
                interleaving: w,
            });
        }
    }
    if out.is_empty() {
        return Err(Error::NoHypothesis(
            "no threshold pair satisfies the structural constraints".into(),
        ));
    }
    out.sort_by_key(|a| (a.thresholds, a.word()));
    Ok(out)
}

/// Masses of seller `k`'s levels when level `active` is the one mixing at the
/// current price: higher levels entirely below, active level left at zero.
fn masses_for<T: Scalar>(m: usize, active: usize) -> OpponentMasses<T> {
    let mut masses = OpponentMasses::zeros(m);
    for g in active + 1..=m {
        masses.below[g] = T::one();
    }
    masses
}

fn sweep<T: Scalar>(
    cfg: &MarketConfig<T>,
    hyp: &StructureHypothesis,
    jumps: [T; 2],
) -> Option<Sweep<T>> {
    let (v, c) = (cfg.v(), cfg.c());
    let span = v - c;
    let tol = T::endpoint_tol() * span.max(T::one());
    let m = [cfg.max_level(Seller::First), cfg.max_level(Seller::Second)];
    let l = hyp.thresholds;
    let mut active = [l[0] + 1, l[1] + 1];
    // CDF of each active level at the current top of the interval.
    let mut phi = [T::one() - jumps[0], T::one() - jumps[1]];
    let coeffs = |active: [usize; 2]| -> Option<[(T, T); 2]> {
        let mut out = [(T::zero(), T::zero()); 2];
        for k in Seller::BOTH {
            let o = k.other();
            let masses = masses_for::<T>(m[o.index()], active[o.index()]);
            let (a, g) = linear_in_level(cfg, k, active[k.index()], active[o.index()], &masses);
            if !(g > T::zero()) || !(a > T::zero()) {
                return None;
            }
            out[k.index()] = (a, g);
        }
        Some(out)
    };
    let mut co = coeffs(active)?;
    // Utility of each seller's active level, constant across its support.
    let mut util = [T::zero(); 2];
    for k in 0..2 {
        let (a, g) = co[k];
        util[k] = (v - c) * (a - g * phi[1 - k]);
        if !(util[k] > T::zero()) {
            return None;
        }
    }
    let utilities = util;
    let mut top = v;
    let mut lower_bounds: [Vec<T>; 2] = [Vec::new(), Vec::new()];
    let mut segments: [Vec<Vec<CdfSegment<T>>>; 2] =
        [vec![Vec::new(); m[0] - l[0]], vec![Vec::new(); m[1] - l[1]]];
    let mut cross_values = Vec::new();
    // Seller k's active CDF is pinned by the other seller's indifference.
    let segment = |k: usize, lo: T, hi: T, co: &[(T, T); 2], util: &[T; 2]| CdfSegment {
        lo,
        hi,
        c,
        alpha: co[1 - k].0,
        beta: util[1 - k],
        gamma: co[1 - k].1,
    };
    let cdf = |k: usize, x: T, co: &[(T, T); 2], util: &[T; 2]| {
        (co[1 - k].0 - util[1 - k] / (x - c)) / co[1 - k].1
    };

    for &s in &hyp.interleaving {
        let si = s.index();
        let o = 1 - si;
        // Seller s's active level runs out where its CDF reaches zero.
        let mut b = c + util[o] / co[o].0;
        if !(b > c) || b > top + tol {
            return None;
        }
        b = b.min(top);
        let other_phi = cdf(o, b, &co, &util);
        if other_phi < -tol || other_phi > T::one() + tol {
            return None;
        }
        let other_phi = other_phi.max(T::zero()).min(T::one());
        for k in 0..2 {
            segments[k][active[k] - l[k] - 1].push(segment(k, b, top, &co, &util));
        }
        lower_bounds[si].push(b);
        cross_values.push(CrossValue {
            seller: Seller::from_index(o),
            level: active[o],
            at_seller: s,
            at_level: active[si],
            value: other_phi,
        });
        active[si] += 1;
        if active[si] > m[si] {
            return None;
        }
        top = b;
        phi[si] = T::one();
        phi[o] = other_phi;
        co = coeffs(active)?;
        let (a, g) = co[si];
        util[si] = (top - c) * (a - g * phi[o]);
        if !(util[si] > T::zero()) {
            return None;
        }
    }
    if active != m {
        return None;
    }
    // Bottom of each seller's last level.
    let p1 = c + util[1] / co[1].0;
    let p2 = c + util[0] / co[0].0;
    if !(p1 > c) || !(p2 > c) || p1 > top + tol || p2 > top + tol {
        return None;
    }
    let lo = ((p1 + p2) / T::lit(2.0)).min(top);
    for k in 0..2 {
        let mut seg = segment(k, lo, top, &co, &util);
        seg.lo = lo;
        segments[k][active[k] - l[k] - 1].push(seg);
        lower_bounds[k].push(lo);
    }
    Some(Sweep {
        residual: (p1 - p2) / span,
        p_pair: (p1, p2),
        lower_bounds,
        cross_values,
        segments,
        utilities,
    })
}

/// Jump parameter: `t > 0` puts a jump of size `t` on the first seller,
/// `t < 0` a jump of size `-t` on the second.
fn jumps_for<T: Scalar>(t: T) -> [T; 2] {
    if t > T::zero() {
        [t, T::zero()]
    } else if t < T::zero() {
        [T::zero(), -t]
    } else {
        [T::zero(); 2]
    }
}

fn finish<T: Scalar>(
    cfg: &MarketConfig<T>,
    hyp: &StructureHypothesis,
    jumps: [T; 2],
    sw: Sweep<T>,
) -> CandidateSolution<T> {
    let (v, c) = (cfg.v(), cfg.c());
    let mut notes = Vec::new();
    let p_tilde = (sw.p_pair.0 + sw.p_pair.1) / T::lit(2.0);
    let mut cand = CandidateSolution {
        hypothesis: hyp.clone(),
        p_tilde,
        lower_bounds: sw.lower_bounds,
        jumps,
        cross_values: sw.cross_values,
        residual: sw.residual,
        utility_residual: T::zero(),
        valid: true,
        notes: Vec::new(),
        segments: sw.segments,
    };
    // A jump must earn at v what the rest of its level earns.
    for k in Seller::BOTH {
        let f = jumps[k.index()];
        if f > T::zero() {
            let l = hyp.thresholds[k.index()] + 1;
            let mo = cfg.max_level(k.other());
            let lo = hyp.thresholds[k.other().index()];
            let mut masses = OpponentMasses::zeros(mo);
            for g in 1..=mo {
                if g <= lo {
                    masses.tie[g] = T::one();
                } else {
                    masses.below[g] = T::one();
                }
            }
            let at_v = (v - c) * units_sold_given(cfg, k, l, &masses);
            let want = sw.utilities[k.index()];
            if (at_v - want).abs() > T::lit(1e-10) * (v - c) {
                notes.push(format!(
                    "{k:?} jump at v earns {at_v}, the rest of level {l} earns {want}"
                ));
                cand.valid = false;
            }
        }
    }
    match reconstruct_distributions(cfg, &cand) {
        Ok(profile) => {
            cand.utility_residual = utility_residual(cfg, &profile);
            if cand.utility_residual > T::lit(1e-10) {
                notes.push(format!(
                    "equal-utility residual {} above 1e-10",
                    cand.utility_residual
                ));
                cand.valid = false;
            }
        }
        Err(e) => {
            notes.push(format!("reconstruction failed: {e}"));
            cand.valid = false;
        }
    }
    cand.notes = notes;
    cand
}

/// Largest spread of a level's utility over the endpoints of its pieces
/// (left limits) and, for a jump, the price `v`, scaled by `v - c`.
fn utility_residual<T: Scalar>(cfg: &MarketConfig<T>, profile: &StrategyProfile<T>) -> T {
    let (v, c) = (cfg.v(), cfg.c());
    let mut worst = T::zero();
    for k in Seller::BOTH {
        let own = profile.strategy(k);
        let opp = profile.strategy(k.other());
        for l in profile.thresholds[k.index()] + 1..=own.max_level() {
            let level = own.level(l);
            let mut us = Vec::new();
            for p in &level.pieces {
                for x in [p.lo(), p.hi()] {
                    us.push((x - c) * units_sold_given(cfg, k, l, &left_masses(opp, x)));
                }
            }
            if level.atom_at_v > T::zero() {
                us.push((v - c) * units_sold_given(cfg, k, l, &OpponentMasses::at(opp, v)));
            }
            let hi = us.iter().copied().fold(T::neg_infinity(), T::max);
            let lo = us.iter().copied().fold(T::infinity(), T::min);
            if hi > lo {
                worst = worst.max((hi - lo) / (v - c));
            }
        }
    }
    worst
}

/// Solves one hypothesis for every jump size that closes the system. An
/// empty result means the hypothesis is infeasible.
pub fn solve_hypothesis<T: Scalar>(
    cfg: &MarketConfig<T>,
    hyp: &StructureHypothesis,
) -> Result<Vec<CandidateSolution<T>>> {
    let eval = |t: T| sweep(cfg, hyp, jumps_for(t)).map(|s| (s.residual, s));
    let edge = T::one() - T::lit(1e-9);
    let n = SCAN_POINTS;
    let mut ts: Vec<T> = (1..n)
        .map(|i| T::from_usize_lossy(2 * i) / T::from_usize_lossy(n) - T::one())
        .collect();
    ts.insert(0, -edge);
    ts.push(edge);
    let samples: Vec<Option<T>> = ts.iter().map(|&t| eval(t).map(|(r, _)| r)).collect();

    let mut roots: Vec<T> = Vec::new();
    if let Some((r, _)) = eval(T::zero()) {
        if r.abs() <= T::lit(1e-12) {
            roots.push(T::zero());
        }
    }
    for i in 0..ts.len() - 1 {
        let (Some(ra), Some(rb)) = (samples[i], samples[i + 1]) else {
            continue;
        };
        if ra == T::zero() {
            roots.push(ts[i]);
            continue;
        }
        if ra.signum() == rb.signum() {
            continue;
        }
        let (mut a, mut b, mut fa) = (ts[i], ts[i + 1], ra);
        let mut ok = true;
        for _ in 0..BISECTION_STEPS {
            let mid = (a + b) / T::lit(2.0);
            if mid == a || mid == b {
                break;
            }
            match eval(mid) {
                Some((fm, _)) => {
                    if fm == T::zero() {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let root = match (eval(a), eval(b)) {
            (Some((x, _)), Some((y, _))) => {
                if x.abs() <= y.abs() {
                    a
                } else {
                    b
                }
            }
            (Some(_), None) => a,
            (None, Some(_)) => b,
            (None, None) => continue,
        };
        roots.push(root);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    roots.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-9));

    let mut out = Vec::new();
    for t in roots {
        let Some((r, sw)) = eval(t) else { continue };
        if r.abs() > T::lit(1e-9) {
            return Err(Error::Numerical(format!(
                "hypothesis {:?}/{}: bisection stalled with residual {r}",
                hyp.thresholds,
                hyp.word()
            )));
        }
        out.push(finish(cfg, hyp, jumps_for(t), sw));
    }
    Ok(out)
}

/// Builds both sellers' strategies from a solved candidate.
pub fn reconstruct_distributions<T: Scalar>(
    cfg: &MarketConfig<T>,
    sol: &CandidateSolution<T>,
) -> Result<StrategyProfile<T>> {
    let v = cfg.v();
    let l = sol.hypothesis.thresholds;
    let mut strategies = Vec::with_capacity(2);
    for k in Seller::BOTH {
        let ki = k.index();
        let mut levels = vec![LevelStrategy::at_cap(); l[ki]];
        for (idx, segs) in sol.segments[ki].iter().enumerate() {
            let pieces: Vec<CdfPiece<T>> = segs
                .iter()
                .rev()
                .filter(|s| s.hi > s.lo)
                .map(|s| CdfPiece::Hyperbolic(*s))
                .collect();
            if pieces.is_empty() {
                return Err(Error::InvalidStrategy(format!(
                    "{k:?} level {} has an empty support",
                    l[ki] + 1 + idx
                )));
            }
            let atom = if idx == 0 { sol.jumps[ki] } else { T::zero() };
            levels.push(LevelStrategy {
                pieces,
                atom_at_v: atom,
            });
        }
        let s = PriceStrategy { v, levels };
        s.validate(T::endpoint_tol() * (v - cfg.c()).max(T::one()))?;
        strategies.push(s);
    }
    let second = strategies.pop().expect("two strategies");
    let first = strategies.pop().expect("two strategies");
    Ok(StrategyProfile {
        strategies: [first, second],
        thresholds: l,
        p_tilde: sol.p_tilde,
    })
}

/// Options for the full asymmetric search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetricOptions<T> {
    pub grid_size: usize,
    pub tol: T,
}

impl<T: Scalar> Default for AsymmetricOptions<T> {
    fn default() -> Self {
        Self {
            grid_size: crate::verify::DEFAULT_GRID,
            tol: T::lit(crate::verify::DEFAULT_TOL),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct AsymmetricNE<T> {
    pub candidate: CandidateSolution<T>,
    pub profile: StrategyProfile<T>,
    pub certificate: EquilibriumCertificate<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct AsymmetricSolution<T> {
    pub equilibria: Vec<AsymmetricNE<T>>,
    /// Candidates that closed the system but failed a validity or
    /// best-response check.
    pub rejected: Vec<CandidateSolution<T>>,
    pub hypotheses: usize,
    pub aggregated: bool,
}

fn expand<T: Scalar>(profile: StrategyProfile<T>, cfg: &MarketConfig<T>) -> StrategyProfile<T> {
    let mut out = profile;
    for k in Seller::BOTH {
        let s = &mut out.strategies[k.index()];
        while s.levels.len() < cfg.max_level(k) {
            let last = s
                .levels
                .last()
                .cloned()
                .unwrap_or_else(LevelStrategy::at_cap);
            s.levels.push(last);
        }
    }
    out
}

fn same_solution<T: Scalar>(a: &CandidateSolution<T>, b: &CandidateSolution<T>, tol: T) -> bool {
    a.hypothesis.thresholds == b.hypothesis.thresholds
        && (a.p_tilde - b.p_tilde).abs() <= tol
        && (a.jumps[0] - b.jumps[0]).abs() <= tol
        && (a.jumps[1] - b.jumps[1]).abs() <= tol
        && (0..2).all(|k| {
            let (x, y) = (&a.lower_bounds[k], &b.lower_bounds[k]);
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| (*p - *q).abs() <= tol)
        })
}

/// All certified equilibria within the structure class, in hypothesis order.
pub fn solve_asymmetric<T: Scalar>(
    cfg: &MarketConfig<T>,
    opts: AsymmetricOptions<T>,
) -> Result<AsymmetricSolution<T>> {
    if cfg.is_monopoly() {
        let profile = StrategyProfile::monopoly(
            cfg.max_level(Seller::First),
            cfg.max_level(Seller::Second),
            cfg.v(),
        );
        let certificate = certify(cfg, &profile, opts.grid_size, opts.tol)?;
        let hyp = StructureHypothesis {
            thresholds: profile.thresholds,
            interleaving: Vec::new(),
        };
        let candidate = CandidateSolution {
            hypothesis: hyp,
            p_tilde: cfg.v(),
            lower_bounds: [Vec::new(), Vec::new()],
            jumps: [T::zero(); 2],
            cross_values: Vec::new(),
            residual: T::zero(),
            utility_residual: T::zero(),
            valid: true,
            notes: vec!["monopoly regime".into()],
            segments: [Vec::new(), Vec::new()],
        };
        return Ok(AsymmetricSolution {
            equilibria: vec![AsymmetricNE {
                candidate,
                profile,
                certificate,
            }],
            rejected: Vec::new(),
            hypotheses: 0,
            aggregated: false,
        });
    }
    let reduced = reduce(cfg)?;
    let hyps = enumerate_hypotheses(&reduced.cfg)?;
    let solved: Vec<Result<Vec<CandidateSolution<T>>>> = hyps
        .par_iter()
        .map(|h| solve_hypothesis(&reduced.cfg, h))
        .collect();
    let dedup_tol = T::lit(1e-6) * (cfg.v() - cfg.c());
    let mut equilibria: Vec<AsymmetricNE<T>> = Vec::new();
    let mut rejected: Vec<CandidateSolution<T>> = Vec::new();
    for batch in solved {
        for cand in batch? {
            if equilibria
                .iter()
                .any(|e| same_solution(&e.candidate, &cand, dedup_tol))
                || rejected.iter().any(|r| same_solution(r, &cand, dedup_tol))
            {
                continue;
            }
            if !cand.valid {
                rejected.push(cand);
                continue;
            }
            let profile = expand(reconstruct_distributions(&reduced.cfg, &cand)?, cfg);
            let certificate = certify(cfg, &profile, opts.grid_size, opts.tol)?;
            if certificate.passed {
                equilibria.push(AsymmetricNE {
                    candidate: cand,
                    profile,
                    certificate,
                });
            } else {
                let mut cand = cand;
                cand.valid = false;
                cand.notes.push(format!(
                    "best-response gap {} above tolerance",
                    certificate.max_gap
                ));
                rejected.push(cand);
            }
        }
    }
    Ok(AsymmetricSolution {
        equilibria,
        rejected,
        hypotheses: hyps.len(),
        aggregated: reduced.aggregation.iter().any(Option::is_some),
    })
}

/// Reduced availability used when the demand is below a seller's top level.
pub fn effective_availability<T: Scalar>(
    cfg: &MarketConfig<T>,
) -> Result<[AvailabilityDistribution<T>; 2]> {
    let r = reduce(cfg)?;
    Ok([
        r.cfg.seller(Seller::First).clone(),
        r.cfg.seller(Seller::Second).clone(),
    ])
}
