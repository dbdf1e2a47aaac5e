//! Lowest support price of the symmetric equilibrium as the top availability
//! grows, with binomial availability and demand equal to the top level.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{AvailabilityDistribution, MarketConfig};
use crate::scalar::Scalar;
use crate::symmetric::solve_symmetric;

pub const DEFAULT_RATES: [f64; 3] = [0.3, 0.5, 0.7];
pub const DEFAULT_M_RANGE: (usize, usize) = (2, 40);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct SweepRow<T> {
    pub r: T,
    pub m: usize,
    pub p_tilde: T,
}

/// Solves every `(r, m)` point in parallel and returns each outcome, sorted by
/// `r` then `m`, so a failure at one point leaves the others usable.
pub fn sweep_points<T: Scalar>(
    rates: &[T],
    ms: &[usize],
    v: T,
    c: T,
) -> Vec<(T, usize, Result<T>)> {
    let mut points: Vec<(T, usize)> = rates
        .iter()
        .flat_map(|&r| ms.iter().map(move |&m| (r, m)))
        .collect();
    points.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    points.dedup();
    points
        .par_iter()
        .map(|&(r, m)| (r, m, solve_point(r, m, v, c)))
        .collect()
}

fn solve_point<T: Scalar>(r: T, m: usize, v: T, c: T) -> Result<T> {
    let q = AvailabilityDistribution::binomial(m, r)?;
    let cfg = MarketConfig::symmetric(m, v, c, q)?;
    Ok(solve_symmetric(&cfg)?.p_tilde())
}

/// One row per `(r, m)`, sorted by `r` then `m`; fails on the first point
/// (in that order) the solver rejects.
pub fn asymptotic_sweep<T: Scalar>(
    rates: &[T],
    ms: &[usize],
    v: T,
    c: T,
) -> Result<Vec<SweepRow<T>>> {
    sweep_points(rates, ms, v, c)
        .into_iter()
        .map(|(r, m, p)| p.map(|p_tilde| SweepRow { r, m, p_tilde }))
        .collect()
}

/// Pairs `(m, m + 2)` within one rate's series where `p_tilde` moves against
/// `direction` (`-1` for nonincreasing, `1` for nondecreasing), from `m_min` on.
pub fn stride_two_violations<T: Scalar>(
    rows: &[SweepRow<T>],
    r: T,
    m_min: usize,
    direction: i8,
) -> Vec<(usize, T, T)> {
    let series: Vec<&SweepRow<T>> = rows.iter().filter(|row| row.r == r).collect();
    let mut out = Vec::new();
    for a in &series {
        if a.m < m_min {
            continue;
        }
        if let Some(b) = series.iter().find(|b| b.m == a.m + 2) {
            let bad = if direction < 0 {
                b.p_tilde > a.p_tilde
            } else {
                b.p_tilde < a.p_tilde
            };
            if bad {
                out.push((a.m, a.p_tilde, b.p_tilde));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_sorted_and_complete() {
        let rows = asymptotic_sweep(&[0.7, 0.3], &[3, 2], 10.0, 1.0).unwrap();
        let keys: Vec<(f64, usize)> = rows.iter().map(|r| (r.r, r.m)).collect();
        assert_eq!(keys, vec![(0.3, 2), (0.3, 3), (0.7, 2), (0.7, 3)]);
        assert!(rows.iter().all(|r| r.p_tilde > 1.0 && r.p_tilde < 10.0));
    }
}
