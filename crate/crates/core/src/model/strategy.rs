use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Equal-profit CDF piece `Φ(x) = (alpha - beta / (x - c)) / gamma` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct CdfSegment<T> {
    pub lo: T,
    pub hi: T,
    pub c: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Scalar> CdfSegment<T> {
    /// Unclamped closed form.
    #[inline]
    pub fn raw(&self, x: T) -> T {
        (self.alpha - self.beta / (x - self.c)) / self.gamma
    }

    #[inline]
    pub fn value(&self, x: T) -> T {
        self.raw(x).max(T::zero()).min(T::one())
    }

    /// Price at which the closed form reaches `p`.
    #[inline]
    pub fn inverse(&self, p: T) -> T {
        let x = self.c + self.beta / (self.alpha - self.gamma * p);
        x.max(self.lo).min(self.hi)
    }

    /// Hyperbolic CDF rising from 0 at `lo` to `top` at `hi`.
    pub fn spanning(lo: T, hi: T, c: T, top: T) -> Self {
        // Φ = (a - b/(x-c))/g with b = 1: Φ(lo) = 0 -> a = 1/(lo-c); Φ(hi) = top.
        let a = T::one() / (lo - c);
        let g = (a - T::one() / (hi - c)) / top;
        Self {
            lo,
            hi,
            c,
            alpha: a,
            beta: T::one(),
            gamma: g,
        }
    }
}

/// Monotone CDF tabulated on a price grid, linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct TabulatedCdf<T> {
    pub prices: Vec<T>,
    pub probs: Vec<T>,
}

impl<T: Scalar> TabulatedCdf<T> {
    pub fn new(prices: Vec<T>, probs: Vec<T>) -> Result<Self> {
        if prices.len() < 2 || prices.len() != probs.len() {
            return Err(Error::InvalidStrategy(
                "tabulated CDF needs at least two matching price/probability points".into(),
            ));
        }
        if prices.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidStrategy(
                "tabulated prices not increasing".into(),
            ));
        }
        if probs.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidStrategy("tabulated CDF decreases".into()));
        }
        Ok(Self { prices, probs })
    }

    pub fn value(&self, x: T) -> T {
        let n = self.prices.len();
        if x <= self.prices[0] {
            return self.probs[0];
        }
        if x >= self.prices[n - 1] {
            return self.probs[n - 1];
        }
        let idx = self.prices.partition_point(|&p| p <= x);
        let (x0, x1) = (self.prices[idx - 1], self.prices[idx]);
        let (p0, p1) = (self.probs[idx - 1], self.probs[idx]);
        p0 + (p1 - p0) * (x - x0) / (x1 - x0)
    }

    pub fn inverse(&self, p: T) -> T {
        let n = self.probs.len();
        if p <= self.probs[0] {
            return self.prices[0];
        }
        if p >= self.probs[n - 1] {
            return self.prices[n - 1];
        }
        let idx = self.probs.partition_point(|&q| q < p);
        let (x0, x1) = (self.prices[idx - 1], self.prices[idx]);
        let (p0, p1) = (self.probs[idx - 1], self.probs[idx]);
        if p1 <= p0 {
            return x0;
        }
        x0 + (x1 - x0) * (p - p0) / (p1 - p0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub enum CdfPiece<T> {
    Hyperbolic(CdfSegment<T>),
    Tabulated(TabulatedCdf<T>),
}

impl<T: Scalar> CdfPiece<T> {
    pub fn lo(&self) -> T {
        match self {
            CdfPiece::Hyperbolic(s) => s.lo,
            CdfPiece::Tabulated(t) => t.prices[0],
        }
    }

    pub fn hi(&self) -> T {
        match self {
            CdfPiece::Hyperbolic(s) => s.hi,
            CdfPiece::Tabulated(t) => *t.prices.last().unwrap(),
        }
    }

    pub fn value(&self, x: T) -> T {
        match self {
            CdfPiece::Hyperbolic(s) => s.value(x),
            CdfPiece::Tabulated(t) => t.value(x),
        }
    }

    pub fn inverse(&self, p: T) -> T {
        match self {
            CdfPiece::Hyperbolic(s) => s.inverse(p),
            CdfPiece::Tabulated(t) => t.inverse(p),
        }
    }

    /// Unclamped value at the lower end, used for invariant checks.
    fn raw_lo(&self) -> T {
        match self {
            CdfPiece::Hyperbolic(s) => s.raw(s.lo),
            CdfPiece::Tabulated(t) => t.probs[0],
        }
    }

    fn raw_hi(&self) -> T {
        match self {
            CdfPiece::Hyperbolic(s) => s.raw(s.hi),
            CdfPiece::Tabulated(t) => *t.probs.last().unwrap(),
        }
    }

    fn is_increasing(&self) -> bool {
        match self {
            // Φ' = beta / (gamma (x-c)^2)
            CdfPiece::Hyperbolic(s) => s.beta >= T::zero() && s.gamma > T::zero() && s.lo > s.c,
            CdfPiece::Tabulated(t) => t.probs.windows(2).all(|w| w[1] >= w[0]),
        }
    }
}

/// Price distribution used at one availability level: a continuous part made of
/// contiguous pieces plus an optional atom at the price cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct LevelStrategy<T> {
    pub pieces: Vec<CdfPiece<T>>,
    pub atom_at_v: T,
}

impl<T: Scalar> LevelStrategy<T> {
    /// Price `v` with probability one.
    pub fn at_cap() -> Self {
        Self {
            pieces: Vec::new(),
            atom_at_v: T::one(),
        }
    }

    pub fn is_at_cap(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Checks mass, contiguity and that atoms sit only at `v`.
    pub fn validate(&self, v: T, tol: T) -> Result<()> {
        let atom = self.atom_at_v;
        if !(atom >= T::zero() && atom <= T::one()) {
            return Err(Error::InvalidStrategy(format!(
                "atom {atom} outside [0, 1]"
            )));
        }
        if self.pieces.is_empty() {
            if (atom - T::one()).abs() > tol {
                return Err(Error::InvalidStrategy(format!(
                    "level without a continuous part carries mass {atom}"
                )));
            }
            return Ok(());
        }
        if atom >= T::one() {
            return Err(Error::InvalidStrategy(
                "continuous part present but atom at v has full mass".into(),
            ));
        }
        for p in &self.pieces {
            if !(p.hi() >= p.lo()) || !p.is_increasing() {
                return Err(Error::InvalidStrategy(format!(
                    "piece on [{}, {}] is not a nondecreasing CDF piece",
                    p.lo(),
                    p.hi()
                )));
            }
            if p.hi() > v + tol {
                return Err(Error::InvalidStrategy(format!(
                    "piece ends at {} above the cap {v}",
                    p.hi()
                )));
            }
        }
        let first = &self.pieces[0];
        if first.raw_lo().abs() > tol {
            return Err(Error::InvalidStrategy(format!(
                "CDF starts at {} instead of 0",
                first.raw_lo()
            )));
        }
        for w in self.pieces.windows(2) {
            if (w[0].hi() - w[1].lo()).abs() > tol {
                return Err(Error::InvalidStrategy(format!(
                    "gap between pieces at {} and {}",
                    w[0].hi(),
                    w[1].lo()
                )));
            }
            if (w[0].raw_hi() - w[1].raw_lo()).abs() > tol {
                return Err(Error::InvalidStrategy(format!(
                    "CDF jumps from {} to {} at {}",
                    w[0].raw_hi(),
                    w[1].raw_lo(),
                    w[0].hi()
                )));
            }
        }
        let last = self.pieces.last().unwrap();
        let top = last.raw_hi();
        if (top + atom - T::one()).abs() > tol {
            return Err(Error::InvalidStrategy(format!(
                "continuous mass {top} plus atom {atom} is not 1"
            )));
        }
        if atom > tol && (last.hi() - v).abs() > tol {
            return Err(Error::InvalidStrategy(format!(
                "atom at v but continuous part stops at {}",
                last.hi()
            )));
        }
        Ok(())
    }

    /// `(inf, sup)` of the support.
    pub fn support(&self, v: T) -> (T, T) {
        match (self.pieces.first(), self.pieces.last()) {
            (Some(f), Some(l)) => {
                let hi = if self.atom_at_v > T::zero() {
                    v
                } else {
                    l.hi()
                };
                (f.lo(), hi)
            }
            _ => (v, v),
        }
    }

    /// Continuous part of the CDF at `x < v`.
    fn continuous(&self, x: T) -> T {
        let first = match self.pieces.first() {
            Some(f) => f,
            None => return T::zero(),
        };
        if x <= first.lo() {
            return T::zero();
        }
        for p in &self.pieces {
            if x <= p.hi() {
                return p.value(x).min(T::one() - self.atom_at_v);
            }
        }
        T::one() - self.atom_at_v
    }

    /// `P(price < x)`.
    pub fn cdf_below(&self, x: T, v: T) -> T {
        if x > v {
            T::one()
        } else {
            self.continuous(x)
        }
    }

    /// `P(price == x)`; nonzero only at the cap.
    pub fn mass_at(&self, x: T, v: T) -> T {
        if x == v {
            self.atom_at_v
        } else {
            T::zero()
        }
    }

    /// `P(price <= x)`.
    pub fn cdf(&self, x: T, v: T) -> T {
        if x >= v {
            T::one()
        } else {
            self.continuous(x)
        }
    }

    /// Inverse-transform draw: `u` uniform on `[0, 1)`.
    pub fn quantile(&self, u: T, v: T) -> T {
        let cont = T::one() - self.atom_at_v;
        if self.pieces.is_empty() || u >= cont {
            return v;
        }
        for p in &self.pieces {
            if u <= p.value(p.hi()) {
                return p.inverse(u);
            }
        }
        self.pieces.last().unwrap().hi()
    }
}

/// One seller's strategy: a price distribution for each availability level `1..=m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct PriceStrategy<T> {
    pub v: T,
    pub levels: Vec<LevelStrategy<T>>,
}

impl<T: Scalar> PriceStrategy<T> {
    /// Everything at the cap.
    pub fn monopoly(m: usize, v: T) -> Self {
        Self {
            v,
            levels: vec![LevelStrategy::at_cap(); m],
        }
    }

    pub fn new(v: T, levels: Vec<LevelStrategy<T>>) -> Result<Self> {
        let s = Self { v, levels };
        s.validate(T::endpoint_tol())?;
        Ok(s)
    }

    pub fn validate(&self, tol: T) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidStrategy("no availability levels".into()));
        }
        for (i, l) in self.levels.iter().enumerate() {
            l.validate(self.v, tol).map_err(|e| match e {
                Error::InvalidStrategy(msg) => {
                    Error::InvalidStrategy(format!("level {}: {msg}", i + 1))
                }
                other => other,
            })?;
        }
        Ok(())
    }

    #[inline]
    pub fn max_level(&self) -> usize {
        self.levels.len()
    }

    /// Strategy at availability `level` (1-based).
    #[inline]
    pub fn level(&self, level: usize) -> &LevelStrategy<T> {
        &self.levels[level - 1]
    }

    pub fn cdf_below(&self, level: usize, x: T) -> T {
        self.level(level).cdf_below(x, self.v)
    }

    pub fn mass_at(&self, level: usize, x: T) -> T {
        self.level(level).mass_at(x, self.v)
    }

    /// Largest `l` such that levels `1..=l` all price at `v`.
    pub fn threshold(&self) -> usize {
        self.levels.iter().take_while(|l| l.is_at_cap()).count()
    }
}

/// Strategies of both sellers plus the structural summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct StrategyProfile<T> {
    pub strategies: [PriceStrategy<T>; 2],
    pub thresholds: [usize; 2],
    /// Common lowest support bound.
    pub p_tilde: T,
}

impl<T: Scalar> StrategyProfile<T> {
    /// Both sellers price every level at `v`.
    pub fn monopoly(m1: usize, m2: usize, v: T) -> Self {
        Self {
            strategies: [
                PriceStrategy::monopoly(m1, v),
                PriceStrategy::monopoly(m2, v),
            ],
            thresholds: [m1, m2],
            p_tilde: v,
        }
    }

    pub fn strategy(&self, k: crate::model::Seller) -> &PriceStrategy<T> {
        &self.strategies[k.index()]
    }

    /// Profile with the seller labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            strategies: [self.strategies[1].clone(), self.strategies[0].clone()],
            thresholds: [self.thresholds[1], self.thresholds[0]],
            p_tilde: self.p_tilde,
        }
    }

    /// Jump at `v` on level `l_k + 1` of each seller.
    pub fn jumps(&self) -> [T; 2] {
        let mut out = [T::zero(); 2];
        for k in 0..2 {
            let s = &self.strategies[k];
            let l = self.thresholds[k];
            if l < s.max_level() {
                out[k] = s.level(l + 1).atom_at_v;
            }
        }
        out
    }
}
