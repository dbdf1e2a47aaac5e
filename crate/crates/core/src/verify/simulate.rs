use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Hypergeometric;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{expected_units_sold, MarketConfig, Seller, StrategyProfile};
use crate::scalar::Scalar;
use crate::verify::check_profile_shape;

/// Rounds per RNG stream. Streams are keyed by `(seed, block)`, so results do
/// not depend on how blocks are spread over threads.
const BLOCK: u64 = 4096;
const PROBES_PER_SEGMENT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationOptions {
    pub rounds: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl SimulationOptions {
    pub fn new(rounds: u64, seed: u64) -> Self {
        Self {
            rounds,
            seed,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct ProbeResult<T> {
    pub seller: Seller,
    pub level: usize,
    pub price: T,
    /// Rounds in which the seller drew this level.
    pub samples: u64,
    pub mean: Option<T>,
    pub std_error: Option<T>,
    pub analytic: T,
    pub z: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct SimulationReport<T> {
    pub rounds: u64,
    pub seed: u64,
    pub probes: Vec<ProbeResult<T>>,
}

impl<T: Scalar> SimulationReport<T> {
    pub fn max_abs_z(&self) -> T {
        self.probes
            .iter()
            .filter_map(|p| p.z)
            .map(|z| z.abs())
            .fold(T::zero(), T::max)
    }

    /// Share of probes with data whose `|z|` is at most `bound`.
    pub fn fraction_within(&self, bound: T) -> f64 {
        let zs: Vec<T> = self.probes.iter().filter_map(|p| p.z).collect();
        if zs.is_empty() {
            return 1.0;
        }
        zs.iter().filter(|z| z.abs() <= bound).count() as f64 / zs.len() as f64
    }
}

/// Units a seller with `l` units at price `x` sells against an opponent with
/// `i` units at price `y`; equal prices split buyers unit by unit at random.
fn sale<R: Rng>(l: u64, x: f64, i: u64, y: f64, d: u64, rng: &mut R) -> u64 {
    if i == 0 || y > x {
        l.min(d)
    } else if y < x {
        l.min(d.saturating_sub(i))
    } else if l + i <= d {
        l
    } else {
        Hypergeometric::new(l + i, l, d)
            .expect("valid hypergeometric parameters")
            .sample(rng)
    }
}

fn probe_prices<T: Scalar>(profile: &StrategyProfile<T>, k: Seller, l: usize) -> Vec<T> {
    let s = profile.strategy(k);
    let level = s.level(l);
    let mut xs = Vec::new();
    for p in &level.pieces {
        let (lo, hi) = (p.lo(), p.hi());
        let n = T::from_usize_lossy(PROBES_PER_SEGMENT + 1);
        for j in 0..=PROBES_PER_SEGMENT + 1 {
            xs.push(lo + (hi - lo) * T::from_usize_lossy(j) / n);
        }
    }
    if level.atom_at_v > T::zero() {
        xs.push(s.v);
    }
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite probe"));
    xs.dedup();
    xs
}

#[derive(Clone)]
struct Counters {
    /// `[seller][level]` rounds with that level drawn.
    hits: [Vec<u64>; 2],
    /// `[seller][level][probe]` sum and sum of squares of units sold.
    sums: [Vec<Vec<u64>>; 2],
    squares: [Vec<Vec<u64>>; 2],
}

impl Counters {
    fn new(shape: &[Vec<Vec<f64>>; 2]) -> Self {
        let make = |k: usize| {
            shape[k]
                .iter()
                .map(|p| vec![0u64; p.len()])
                .collect::<Vec<_>>()
        };
        Self {
            hits: [vec![0; shape[0].len()], vec![0; shape[1].len()]],
            sums: [make(0), make(1)],
            squares: [make(0), make(1)],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for k in 0..2 {
            for (a, b) in self.hits[k].iter_mut().zip(&other.hits[k]) {
                *a += b;
            }
            for (row, orow) in self.sums[k].iter_mut().zip(&other.sums[k]) {
                for (a, b) in row.iter_mut().zip(orow) {
                    *a += b;
                }
            }
            for (row, orow) in self.squares[k].iter_mut().zip(&other.squares[k]) {
                for (a, b) in row.iter_mut().zip(orow) {
                    *a += b;
                }
            }
        }
        self
    }
}

struct Sampler {
    avail: [WeightedIndex<f64>; 2],
    demand: WeightedIndex<f64>,
    demands: Vec<u64>,
    v: f64,
}

fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().expect("finite scalar")
}

/// Monte-Carlo estimate of expected units sold at probe prices along each
/// level's support, compared with the analytic evaluator.
pub fn simulate<T: Scalar>(
    cfg: &MarketConfig<T>,
    profile: &StrategyProfile<T>,
    opts: SimulationOptions,
) -> Result<SimulationReport<T>> {
    if opts.rounds == 0 {
        return Err(Error::InvalidSimulation("zero rounds requested".into()));
    }
    check_profile_shape(cfg, profile)?;
    let weights = |k: Seller| -> Result<WeightedIndex<f64>> {
        WeightedIndex::new(cfg.seller(k).probs().iter().map(|&p| to_f64(p)))
            .map_err(|e| Error::InvalidSimulation(e.to_string()))
    };
    let atoms = cfg.demand().atoms();
    let sampler = Sampler {
        avail: [weights(Seller::First)?, weights(Seller::Second)?],
        demand: WeightedIndex::new(atoms.iter().map(|&(_, r)| to_f64(r)))
            .map_err(|e| Error::InvalidSimulation(e.to_string()))?,
        demands: atoms.iter().map(|&(d, _)| d as u64).collect(),
        v: to_f64(cfg.v()),
    };

    let mut probes_t: [Vec<Vec<T>>; 2] = [Vec::new(), Vec::new()];
    for k in Seller::BOTH {
        for l in 1..=cfg.max_level(k) {
            probes_t[k.index()].push(probe_prices(profile, k, l));
        }
    }
    let probes: [Vec<Vec<f64>>; 2] = [
        probes_t[0]
            .iter()
            .map(|p| p.iter().map(|&x| to_f64(x)).collect())
            .collect(),
        probes_t[1]
            .iter()
            .map(|p| p.iter().map(|&x| to_f64(x)).collect())
            .collect(),
    ];
    let strategies = &profile.strategies;

    let blocks = opts.rounds.div_ceil(BLOCK);
    let run_block = |b: u64| -> Counters {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(b);
        let mut acc = Counters::new(&probes);
        let rounds = BLOCK.min(opts.rounds - b * BLOCK);
        for _ in 0..rounds {
            let a = [
                sampler.avail[0].sample(&mut rng),
                sampler.avail[1].sample(&mut rng),
            ];
            let d = sampler.demands[sampler.demand.sample(&mut rng)];
            let mut y = [sampler.v; 2];
            for k in 0..2 {
                let u: f64 = rng.random();
                if a[k] > 0 {
                    y[k] = to_f64(
                        strategies[k]
                            .level(a[k])
                            .quantile(T::lit(u), strategies[k].v),
                    );
                }
            }
            for k in 0..2 {
                if a[k] == 0 {
                    continue;
                }
                let o = 1 - k;
                let l = a[k];
                acc.hits[k][l - 1] += 1;
                for (j, &x) in probes[k][l - 1].iter().enumerate() {
                    let s = sale(l as u64, x, a[o] as u64, y[o], d, &mut rng);
                    acc.sums[k][l - 1][j] += s;
                    acc.squares[k][l - 1][j] += s * s;
                }
            }
        }
        acc
    };
    let run_all = || {
        (0..blocks)
            .into_par_iter()
            .map(run_block)
            .reduce(|| Counters::new(&probes), Counters::merge)
    };
    let totals = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidSimulation(e.to_string()))?
            .install(run_all),
        None => run_all(),
    };

    let mut out = Vec::new();
    for k in Seller::BOTH {
        let opp = profile.strategy(k.other());
        for l in 1..=cfg.max_level(k) {
            let n = totals.hits[k.index()][l - 1];
            for (j, &x) in probes_t[k.index()][l - 1].iter().enumerate() {
                let analytic = expected_units_sold(cfg, k, l, x, opp)?;
                let (mean, se, z) = if n == 0 {
                    (None, None, None)
                } else {
                    let nf = n as f64;
                    let mean = totals.sums[k.index()][l - 1][j] as f64 / nf;
                    let sq = totals.squares[k.index()][l - 1][j] as f64 / nf;
                    let var = if n > 1 {
                        ((sq - mean * mean) * nf / (nf - 1.0)).max(0.0)
                    } else {
                        0.0
                    };
                    let se = (var / nf).sqrt();
                    let diff = mean - to_f64(analytic);
                    let z = if diff.abs() <= 1e-12 {
                        0.0
                    } else {
                        diff / se.max(f64::MIN_POSITIVE)
                    };
                    (Some(T::lit(mean)), Some(T::lit(se)), Some(T::lit(z)))
                };
                out.push(ProbeResult {
                    seller: k,
                    level: l,
                    price: x,
                    samples: n,
                    mean,
                    std_error: se,
                    analytic,
                    z,
                });
            }
        }
    }
    Ok(SimulationReport {
        rounds: opts.rounds,
        seed: opts.seed,
        probes: out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TieSplitResult {
    pub mean: [f64; 2],
    pub std_error: [f64; 2],
    pub expected: [f64; 2],
}

/// Both sellers at the same price with `a` and `b` units facing demand `d`.
pub fn tie_split_experiment(
    a: u64,
    b: u64,
    d: u64,
    rounds: u64,
    seed: u64,
) -> Result<TieSplitResult> {
    if rounds < 2 {
        return Err(Error::InvalidSimulation("need at least two rounds".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = [0u64; 2];
    let mut sq = [0u64; 2];
    for _ in 0..rounds {
        let s1 = sale(a, 1.0, b, 1.0, d, &mut rng);
        let s2 = (a + b).min(d) - s1;
        for (k, s) in [s1, s2].into_iter().enumerate() {
            sum[k] += s;
            sq[k] += s * s;
        }
    }
    let n = rounds as f64;
    let mut mean = [0.0; 2];
    let mut se = [0.0; 2];
    for k in 0..2 {
        mean[k] = sum[k] as f64 / n;
        let var = ((sq[k] as f64 / n - mean[k] * mean[k]) * n / (n - 1.0)).max(0.0);
        se[k] = (var / n).sqrt();
    }
    let share = |x: u64| {
        if a + b <= d {
            x as f64
        } else {
            x as f64 * d as f64 / (a + b) as f64
        }
    };
    Ok(TieSplitResult {
        mean,
        std_error: se,
        expected: [share(a), share(b)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AvailabilityDistribution;

    #[test]
    fn no_rationing_sells_full_draw() {
        let q = AvailabilityDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let cfg = MarketConfig::symmetric(4, 10.0, 1.0, q).unwrap();
        let profile = StrategyProfile::monopoly(2, 2, 10.0);
        let rep = simulate(&cfg, &profile, SimulationOptions::new(20_000, 3)).unwrap();
        for p in &rep.probes {
            assert_eq!(p.mean.unwrap(), p.level as f64);
            assert_eq!(p.z.unwrap(), 0.0);
        }
    }

    #[test]
    fn shard_count_does_not_matter() {
        let q = AvailabilityDistribution::binomial(3, 0.4).unwrap();
        let cfg = MarketConfig::symmetric(3, 10.0, 1.0, q).unwrap();
        let ne = crate::symmetric::solve_symmetric(&cfg).unwrap();
        let mut a = SimulationOptions::new(30_000, 11);
        a.jobs = Some(1);
        let mut b = a;
        b.jobs = Some(4);
        assert_eq!(
            simulate(&cfg, &ne.profile, a).unwrap(),
            simulate(&cfg, &ne.profile, b).unwrap()
        );
    }

    #[test]
    fn tie_split_matches_proportional_share() {
        let r = tie_split_experiment(3, 2, 4, 200_000, 5).unwrap();
        for k in 0..2 {
            assert!((r.mean[k] - r.expected[k]).abs() <= 3.0 * r.std_error[k]);
        }
    }

    #[test]
    fn zero_rounds_rejected() {
        let q = AvailabilityDistribution::binomial(2, 0.5).unwrap();
        let cfg = MarketConfig::symmetric(2, 10.0, 1.0, q).unwrap();
        let p = StrategyProfile::monopoly(2, 2, 10.0);
        assert!(simulate(&cfg, &p, SimulationOptions::new(0, 1)).is_err());
    }
}
