use serde::{Deserialize, Serialize};

use crate::model::{
    units_sold_given, utility_gap_a, LevelStrategy, MarketConfig, OpponentMasses, PriceStrategy,
    Seller, StrategyProfile,
};
use crate::scalar::Scalar;
use crate::verify::certify::left_masses;

const UTILITY_SAMPLES: usize = 256;
const A_GRID: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl PropertyCheck {
    fn new(name: &str, failures: Vec<String>) -> Self {
        let passed = failures.is_empty();
        let detail = if passed {
            "ok".to_string()
        } else {
            failures.join("; ")
        };
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Structural properties every equilibrium of a competitive market must have.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    /// False in the monopoly regime, where every level prices at the cap.
    pub applicable: bool,
    pub checks: Vec<PropertyCheck>,
}

impl InvariantReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const THRESHOLD: &str = "threshold";
pub const CHAINING: &str = "chaining";
pub const DISJOINT: &str = "disjoint";
pub const CONTINUITY: &str = "continuity";
pub const SINGLE_JUMP: &str = "single_jump";
pub const COMMON_LOWER_BOUND: &str = "common_lower_bound";
pub const EQUAL_UTILITY: &str = "equal_utility";

fn tol<T: Scalar>(cfg: &MarketConfig<T>) -> T {
    T::endpoint_tol() * (cfg.v() - cfg.c()).max(T::one())
}

fn check_threshold<T: Scalar>(cfg: &MarketConfig<T>, p: &StrategyProfile<T>) -> PropertyCheck {
    let d = cfg.structural_demand();
    let mut fails = Vec::new();
    for k in Seller::BOTH {
        let s = p.strategy(k);
        let l = p.thresholds[k.index()];
        let e = cfg.guaranteed_level(k);
        let m = cfg.max_level(k);
        if s.threshold() != l {
            fails.push(format!(
                "{k:?}: levels 1..={} price at v, threshold claims {l}",
                s.threshold()
            ));
        }
        if l < e || l >= m {
            fails.push(format!("{k:?}: threshold {l} outside {e}..{m}"));
        }
        for i in l + 1..=m {
            if s.level(i).is_at_cap() {
                fails.push(format!("{k:?}: level {i} above threshold prices at v"));
            }
        }
    }
    let sum = p.thresholds[0] + p.thresholds[1];
    if sum + 1 != d && sum != d {
        fails.push(format!(
            "threshold sum {sum} not in {{{}, {d}}}",
            d.saturating_sub(1)
        ));
    }
    PropertyCheck::new(THRESHOLD, fails)
}

fn check_chaining<T: Scalar>(cfg: &MarketConfig<T>, p: &StrategyProfile<T>) -> PropertyCheck {
    let v = cfg.v();
    let t = tol(cfg);
    let mut fails = Vec::new();
    for k in Seller::BOTH {
        let s = p.strategy(k);
        let l = p.thresholds[k.index()];
        for i in l + 1..=s.max_level() {
            let level = s.level(i);
            for w in level.pieces.windows(2) {
                if (w[0].hi() - w[1].lo()).abs() > t {
                    fails.push(format!(
                        "{k:?} level {i}: support has a hole ({}, {})",
                        w[0].hi(),
                        w[1].lo()
                    ));
                }
            }
            let (_, hi) = level.support(v);
            let want = if i == l + 1 {
                v
            } else {
                s.level(i - 1).support(v).0
            };
            if (hi - want).abs() > t {
                fails.push(format!(
                    "{k:?} level {i}: support ends at {hi}, expected {want}"
                ));
            }
        }
    }
    PropertyCheck::new(CHAINING, fails)
}

fn check_disjoint<T: Scalar>(cfg: &MarketConfig<T>, p: &StrategyProfile<T>) -> PropertyCheck {
    let v = cfg.v();
    let t = tol(cfg);
    let mut fails = Vec::new();
    for k in Seller::BOTH {
        let s = p.strategy(k);
        let l = p.thresholds[k.index()];
        let m = s.max_level();
        for i in l + 1..=m {
            for j in i + 1..=m {
                let (a_lo, a_hi) = s.level(i).support(v);
                let (b_lo, b_hi) = s.level(j).support(v);
                let lo = a_lo.max(b_lo);
                let hi = a_hi.min(b_hi);
                if hi - lo > t {
                    fails.push(format!("{k:?} levels {i} and {j} overlap on [{lo}, {hi}]"));
                } else if b_hi > a_lo + t {
                    fails.push(format!("{k:?} level {j} is not priced below level {i}"));
                }
            }
        }
    }
    PropertyCheck::new(DISJOINT, fails)
}

fn check_continuity<T: Scalar>(cfg: &MarketConfig<T>, p: &StrategyProfile<T>) -> PropertyCheck {
    let v = cfg.v();
    let t = tol(cfg);
    let mut fails = Vec::new();
    for k in Seller::BOTH {
        for (idx, level) in p.strategy(k).levels.iter().enumerate() {
            if let Err(e) = level.validate(v, t) {
                fails.push(format!("{k:?} level {}: {e}", idx + 1));
                continue;
            }
            for w in level.pieces.windows(2) {
                let x = w[0].hi();
                let left = w[0].value(x);
                let right = w[1].value(w[1].lo());
                if (left - right).abs() > t {
                    fails.push(format!(
                        "{k:?} level {}: CDF jumps by {} at {x}",
                        idx + 1,
                        right - left
                    ));
                }
            }
        }
    }
    PropertyCheck::new(CONTINUITY, fails)
}

fn check_single_jump<T: Scalar>(p: &StrategyProfile<T>) -> PropertyCheck {
    let mut fails = Vec::new();
    let mut jumps = [T::zero(); 2];
    for k in Seller::BOTH {
        let s = p.strategy(k);
        let l = p.thresholds[k.index()];
        for i in l + 1..=s.max_level() {
            let atom = s.level(i).atom_at_v;
            if i == l + 1 {
                jumps[k.index()] = atom;
                if atom >= T::one() {
                    fails.push(format!("{k:?} level {i}: jump of full size at v"));
                }
            } else if atom > T::zero() {
                fails.push(format!(
                    "{k:?} level {i}: jump {atom} above level {}",
                    l + 1
                ));
            }
        }
    }
    if jumps[0] * jumps[1] > T::lit(1e-9) {
        fails.push(format!(
            "both sellers jump at v ({}, {})",
            jumps[0], jumps[1]
        ));
    }
    PropertyCheck::new(SINGLE_JUMP, fails)
}

fn lowest_price<T: Scalar>(s: &PriceStrategy<T>, v: T) -> T {
    s.levels
        .iter()
        .map(|l| l.support(v).0)
        .fold(v, |a, b| a.min(b))
}

fn check_common_lower_bound<T: Scalar>(
    cfg: &MarketConfig<T>,
    p: &StrategyProfile<T>,
) -> PropertyCheck {
    let v = cfg.v();
    let t = tol(cfg);
    let a = lowest_price(&p.strategies[0], v);
    let b = lowest_price(&p.strategies[1], v);
    let mut fails = Vec::new();
    if (a - b).abs() > t {
        fails.push(format!("lowest prices differ: {a} vs {b}"));
    }
    if (a.min(b) - p.p_tilde).abs() > t {
        fails.push(format!(
            "recorded p_tilde {} but supports start at {}",
            p.p_tilde,
            a.min(b)
        ));
    }
    if !(p.p_tilde > cfg.c()) {
        fails.push(format!("p_tilde {} not above cost", p.p_tilde));
    }
    PropertyCheck::new(COMMON_LOWER_BOUND, fails)
}

/// Utility at the left limit of `x`, ignoring ties with atoms at `x`.
fn left_utility<T: Scalar>(
    cfg: &MarketConfig<T>,
    k: Seller,
    l: usize,
    x: T,
    opponent: &PriceStrategy<T>,
) -> T {
    (x - cfg.c()) * units_sold_given(cfg, k, l, &left_masses(opponent, x))
}

fn level_samples<T: Scalar>(level: &LevelStrategy<T>, v: T) -> Vec<T> {
    let (lo, hi) = match (level.pieces.first(), level.pieces.last()) {
        (Some(f), Some(l)) => (f.lo(), l.hi()),
        _ => return Vec::new(),
    };
    let n = T::from_usize_lossy(UTILITY_SAMPLES - 1);
    (0..UTILITY_SAMPLES)
        .map(|j| lo + (hi - lo) * T::from_usize_lossy(j) / n)
        .map(|x| x.min(v))
        .collect()
}

fn check_equal_utility<T: Scalar>(cfg: &MarketConfig<T>, p: &StrategyProfile<T>) -> PropertyCheck {
    let (v, c) = (cfg.v(), cfg.c());
    let limit = T::lit(1e-8) * (v - c);
    let mut fails = Vec::new();
    for k in Seller::BOTH {
        let own = p.strategy(k);
        let opp = p.strategy(k.other());
        for i in 1..=own.max_level() {
            let level = own.level(i);
            let mut us: Vec<T> = level_samples(level, v)
                .into_iter()
                .map(|x| left_utility(cfg, k, i, x, opp))
                .collect();
            if level.atom_at_v > T::zero() && !level.is_at_cap() {
                let masses = OpponentMasses::at(opp, v);
                us.push((v - c) * units_sold_given(cfg, k, i, &masses));
            }
            if us.is_empty() {
                continue;
            }
            let hi = us.iter().copied().fold(T::neg_infinity(), T::max);
            let lo = us.iter().copied().fold(T::infinity(), T::min);
            if hi - lo > limit {
                fails.push(format!(
                    "{k:?} level {i}: utility spread {} on its support",
                    hi - lo
                ));
            }
        }
    }
    PropertyCheck::new(EQUAL_UTILITY, fails)
}

/// Runs the seven structural checks. In the monopoly regime the report is
/// marked not applicable and only verifies that every level prices at `v`.
pub fn check_theorem1_properties<T: Scalar>(
    cfg: &MarketConfig<T>,
    profile: &StrategyProfile<T>,
) -> InvariantReport {
    let m_max = cfg
        .max_level(Seller::First)
        .max(cfg.max_level(Seller::Second));
    if cfg.structural_demand() < m_max && !cfg.is_monopoly() {
        return InvariantReport {
            applicable: false,
            checks: Vec::new(),
        };
    }
    if cfg.is_monopoly() {
        let mut fails = Vec::new();
        for k in Seller::BOTH {
            for (i, level) in profile.strategy(k).levels.iter().enumerate() {
                if !level.is_at_cap() {
                    fails.push(format!("{k:?} level {} does not price at v", i + 1));
                }
            }
        }
        return InvariantReport {
            applicable: false,
            checks: vec![PropertyCheck::new(THRESHOLD, fails)],
        };
    }
    InvariantReport {
        applicable: true,
        checks: vec![
            check_threshold(cfg, profile),
            check_chaining(cfg, profile),
            check_disjoint(cfg, profile),
            check_continuity(cfg, profile),
            check_single_jump(profile),
            check_common_lower_bound(cfg, profile),
            check_equal_utility(cfg, profile),
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct MonotoneViolation<T> {
    pub seller: Seller,
    pub l: usize,
    pub j: usize,
    pub x: T,
    pub next: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct MonotoneReport<T> {
    pub applicable: bool,
    pub interval: (T, T),
    pub pairs_checked: usize,
    pub violations: Vec<MonotoneViolation<T>>,
}

impl<T: Scalar> MonotoneReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `A_{k,l,j}` on 100 points of `[start, v)` and reports adjacent
/// pairs that fail to decrease. With demand above both top levels the
/// interval starts at the common lower bound; with demand equal to the larger
/// top level it starts at the highest lower bound among the levels just below
/// each seller's top. Pairs with `l` at or below the guaranteed level are
/// identically zero and skipped.
pub fn check_monotone_a<T: Scalar>(
    cfg: &MarketConfig<T>,
    profile: &StrategyProfile<T>,
) -> MonotoneReport<T> {
    let v = cfg.v();
    let d = cfg.structural_demand();
    let m_max = cfg
        .max_level(Seller::First)
        .max(cfg.max_level(Seller::Second));
    let start = if cfg.is_monopoly() || d < m_max {
        None
    } else if d > m_max {
        Some(profile.p_tilde)
    } else {
        let mut s = profile.p_tilde;
        for k in Seller::BOTH {
            let st = profile.strategy(k);
            let m = st.max_level();
            if m >= 2 {
                s = s.max(st.level(m - 1).support(v).0);
            }
        }
        Some(s)
    };
    let start = match start {
        Some(s) if s < v => s,
        other => {
            return MonotoneReport {
                applicable: other.is_some(),
                interval: (other.unwrap_or(v), v),
                pairs_checked: 0,
                violations: Vec::new(),
            }
        }
    };
    let n = T::from_usize_lossy(A_GRID);
    let xs: Vec<T> = (0..A_GRID)
        .map(|i| start + (v - start) * T::from_usize_lossy(i) / n)
        .collect();
    let slack = T::lit(1e-12);
    let mut violations = Vec::new();
    let mut pairs = 0;
    for k in Seller::BOTH {
        let opp = profile.strategy(k.other());
        let e = cfg.guaranteed_level(k);
        let m = cfg.max_level(k);
        for l in (e + 1).max(2)..=m {
            for j in 1..l {
                pairs += 1;
                let a: Vec<T> = xs
                    .iter()
                    .map(|&x| utility_gap_a(cfg, k, l, j, x, opp).unwrap_or(T::nan()))
                    .collect();
                for (w, x) in a.windows(2).zip(&xs) {
                    if !(w[1] < w[0] - slack) {
                        violations.push(MonotoneViolation {
                            seller: k,
                            l,
                            j,
                            x: *x,
                            next: w[1] - w[0],
                        });
                        break;
                    }
                }
            }
        }
    }
    MonotoneReport {
        applicable: true,
        interval: (start, v),
        pairs_checked: pairs,
        violations,
    }
}
