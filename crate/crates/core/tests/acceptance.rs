//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use duopoly_core::asymmetric::{solve_asymmetric, AsymmetricOptions, AsymmetricSolution};
use duopoly_core::model::{
    AvailabilityDistribution, CdfPiece, CdfSegment, DemandModel, LevelStrategy, MarketConfig,
    StrategyProfile,
};
use duopoly_core::oligopoly::{build_heuristic, heuristic_gap, OligopolyConfig};
use duopoly_core::sweep::{asymptotic_sweep, stride_two_violations, SweepRow};
use duopoly_core::symmetric::solve_symmetric;
use duopoly_core::verify::{
    certify, check_monotone_a, check_theorem1_properties, simulate, tie_split_experiment,
    SimulationOptions, DISJOINT, SINGLE_JUMP, THRESHOLD,
};
use duopoly_core::Seller;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const V: f64 = 10.0;
const C: f64 = 1.0;
const GRID: usize = 10_000;
const TOL: f64 = 1e-6;
const SUITE_SIZE: usize = 120;
const SUITE_SEED: u64 = 20_240_611;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn close(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn dist(q: &[f64]) -> AvailabilityDistribution<f64> {
    AvailabilityDistribution::new(q.to_vec()).unwrap()
}

fn market(q1: &[f64], q2: &[f64], d: usize, v: f64, c: f64) -> MarketConfig<f64> {
    MarketConfig::duopoly(d, v, c, dist(q1), dist(q2)).unwrap()
}

fn opts() -> AsymmetricOptions<f64> {
    AsymmetricOptions {
        grid_size: GRID,
        tol: TOL,
    }
}

fn lower_end(p: &StrategyProfile<f64>, k: Seller, l: usize) -> f64 {
    p.strategy(k).level(l).support(p.strategy(k).v).0
}

fn describe(sol: &AsymmetricSolution<f64>) -> String {
    let mut parts: Vec<String> = sol
        .equilibria
        .iter()
        .map(|e| {
            format!(
                "certified l=({},{}) p~={:.4} jumps=({:.4},{:.4})",
                e.profile.thresholds[0],
                e.profile.thresholds[1],
                e.candidate.p_tilde,
                e.candidate.jumps[0],
                e.candidate.jumps[1]
            )
        })
        .collect();
    parts.extend(sol.rejected.iter().map(|r| {
        format!(
            "rejected l=({},{}) p~={:.4} jumps=({:.4},{:.4}) [{}]",
            r.hypothesis.thresholds[0],
            r.hypothesis.thresholds[1],
            r.p_tilde,
            r.jumps[0],
            r.jumps[1],
            r.notes.join("; ")
        )
    }));
    parts.join(" | ")
}

fn unique_ne() -> Outcome {
    let cfg = market(&[0.45, 0.1, 0.4, 0.05], &[0.2, 0.2, 0.45, 0.15], 3, V, C);
    let start = Instant::now();
    let sol = solve_asymmetric(&cfg, opts()).unwrap();
    let elapsed = start.elapsed();
    let matches = |e: &duopoly_core::asymmetric::AsymmetricNE<f64>| {
        let p = &e.profile;
        let p12 = lower_end(p, Seller::First, 2);
        e.profile.thresholds == [1, 2]
            && close(p12, 9.0526, 1e-3)
            && close(p.p_tilde, 8.65, 5e-3)
            && close(
                p.strategy(Seller::Second).level(3).cdf(p12, V),
                0.3333,
                1e-3,
            )
            && close(e.candidate.jumps[1], 0.625, 1e-3)
    };
    let passed = sol.equilibria.len() == 1
        && matches(&sol.equilibria[0])
        && elapsed <= Duration::from_secs(10);
    outcome(
        passed,
        format!(
            "{} NE in {:.2?}: {}",
            sol.equilibria.len(),
            elapsed,
            describe(&sol)
        ),
    )
}

fn multiplicity() -> Outcome {
    let cfg = market(&[0.05, 0.1, 0.4, 0.45], &[0.2, 0.2, 0.4, 0.2], 3, V, C);
    let sol = solve_asymmetric(&cfg, opts()).unwrap();
    let phi13 = |p: &StrategyProfile<f64>| {
        let p22 = lower_end(p, Seller::Second, 2);
        p.strategy(Seller::First).level(3).cdf(p22, V)
    };
    let first = |e: &duopoly_core::asymmetric::AsymmetricNE<f64>| {
        e.profile.thresholds == [2, 1]
            && close(e.candidate.jumps[1], 0.06525, 1e-3)
            && close(e.profile.p_tilde, 5.95, 5e-3)
            && close(lower_end(&e.profile, Seller::Second, 2), 7.1875, 1e-3)
            && close(phi13(&e.profile), 0.4444, 1e-3)
    };
    let second = |e: &duopoly_core::asymmetric::AsymmetricNE<f64>| {
        e.profile.thresholds == [2, 1]
            && close(e.candidate.jumps[0], 0.7778, 1e-3)
            && close(e.profile.p_tilde, 5.8, 5e-3)
            && close(lower_end(&e.profile, Seller::Second, 2), 7.0, 1e-3)
            && close(phi13(&e.profile), 0.4444, 1e-3)
    };
    let passed = sol.equilibria.len() == 2
        && sol.equilibria.iter().any(first)
        && sol.equilibria.iter().any(second);
    outcome(
        passed,
        format!("{} NE: {}", sol.equilibria.len(), describe(&sol)),
    )
}

fn chained_supports() -> Outcome {
    let cfg = market(&[0.3, 0.2, 0.2, 0.3], &[0.4, 0.2, 0.2, 0.2], 3, 10.0, 6.0);
    let sol = solve_asymmetric(&cfg, opts()).unwrap();
    let shaped = |p: &StrategyProfile<f64>| {
        let v = 10.0;
        let t = 1e-9;
        let s = |k: Seller, l: usize| p.strategy(k).level(l).support(v);
        let (p12, p22) = (s(Seller::First, 2).0, s(Seller::Second, 2).0);
        p.thresholds == [1, 1]
            && close(s(Seller::First, 2).1, v, t)
            && close(s(Seller::Second, 2).1, v, t)
            && close(s(Seller::First, 3).1, p12, t)
            && close(s(Seller::Second, 3).1, p22, t)
            && close(s(Seller::First, 3).0, s(Seller::Second, 3).0, t)
            && close(p.strategy(Seller::Second).level(2).atom_at_v, 0.6, 0.05)
            && p.strategy(Seller::First).level(2).atom_at_v == 0.0
    };
    let passed = sol.equilibria.iter().any(|e| shaped(&e.profile));
    let atoms: Vec<String> = sol
        .equilibria
        .iter()
        .map(|e| {
            format!(
                "l=({},{}) atom1={:.4} atom2={:.4} p12={:.4} p22={:.4} p~={:.4}",
                e.profile.thresholds[0],
                e.profile.thresholds[1],
                e.profile.strategy(Seller::First).level(2).atom_at_v,
                e.profile.strategy(Seller::Second).level(2).atom_at_v,
                lower_end(&e.profile, Seller::First, 2),
                lower_end(&e.profile, Seller::Second, 2),
                e.profile.p_tilde
            )
        })
        .collect();
    outcome(
        passed,
        format!("{} NE: {}", sol.equilibria.len(), atoms.join(" | ")),
    )
}

/// Random two-seller markets with `m <= 4` and `d <= 8`; every third one symmetric.
fn suite() -> Vec<MarketConfig<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let draw = |m: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        let w: Vec<f64> = (0..=m).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    };
    (0..SUITE_SIZE)
        .map(|i| {
            let m1 = rng.random_range(1..=4);
            let q1 = draw(m1, &mut rng);
            let q2 = if i % 3 == 0 {
                q1.clone()
            } else {
                let m2 = rng.random_range(1..=4);
                draw(m2, &mut rng)
            };
            let d = rng.random_range(1..=(m1 + q2.len() - 1).min(8));
            let c = rng.random_range(0.0..8.0);
            market(&q1, &q2, d, V, c)
        })
        .collect()
}

struct Solved {
    cfg: MarketConfig<f64>,
    profiles: Vec<StrategyProfile<f64>>,
}

fn solve_suite(configs: &[MarketConfig<f64>]) -> Result<Vec<Solved>, String> {
    configs
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            let sol = solve_asymmetric(cfg, opts()).map_err(|e| format!("config {i}: {e}"))?;
            let mut profiles: Vec<StrategyProfile<f64>> =
                sol.equilibria.into_iter().map(|e| e.profile).collect();
            if cfg.is_symmetric() {
                let ne = solve_symmetric(cfg).map_err(|e| format!("config {i}: {e}"))?;
                profiles.push(ne.profile);
            }
            Ok(Solved {
                cfg: cfg.clone(),
                profiles,
            })
        })
        .collect()
}

fn best_response(solved: &[Solved], elapsed: Duration) -> Outcome {
    let mut checked = 0;
    let mut empty = 0;
    let mut worst: f64 = 0.0;
    let mut fails = Vec::new();
    for (i, s) in solved.iter().enumerate() {
        if s.profiles.is_empty() {
            empty += 1;
            fails.push(format!("config {i} produced no profile"));
        }
        let scale = s.cfg.v() - s.cfg.c();
        for p in &s.profiles {
            let cert = certify(&s.cfg, p, GRID, TOL).unwrap();
            checked += 1;
            worst = worst.max(cert.max_gap / scale);
            if cert.max_gap > TOL * scale {
                fails.push(format!("config {i}: gap {:e}", cert.max_gap));
            }
        }
    }
    let passed = fails.is_empty() && solved.len() >= 100 && elapsed <= Duration::from_secs(300);
    outcome(
        passed,
        format!(
            "{} configs, {checked} profiles, worst gap/(v-c) {worst:e}, {empty} configs without a profile, {:.1?}{}",
            solved.len(),
            elapsed,
            if fails.is_empty() { String::new() } else { format!("; {}", fails.join(", ")) }
        ),
    )
}

/// Moves half of level 1's mass off `v` onto a continuous piece.
fn shift_off_cap(p: &StrategyProfile<f64>, k: Seller, c: f64) -> StrategyProfile<f64> {
    let mut q = p.clone();
    let v = p.strategy(k).v;
    let level = &mut q.strategies[k.index()].levels[0];
    *level = LevelStrategy {
        pieces: vec![CdfPiece::Hyperbolic(CdfSegment::spanning(
            0.5 * (c + v),
            v,
            c,
            0.5,
        ))],
        atom_at_v: 0.5,
    };
    q
}

/// Stretches level `i`'s support down into level `i + 1`'s.
fn overlap(p: &StrategyProfile<f64>, k: Seller, i: usize, c: f64) -> StrategyProfile<f64> {
    let mut q = p.clone();
    let v = p.strategy(k).v;
    let (lo, _) = p.strategy(k).level(i + 1).support(v);
    let (own_lo, hi) = p.strategy(k).level(i).support(v);
    let start = 0.5 * (lo + own_lo);
    let level = &mut q.strategies[k.index()].levels[i - 1];
    let cont = 1.0 - level.atom_at_v;
    let top = if level.atom_at_v > 0.0 { v } else { hi };
    level.pieces = vec![CdfPiece::Hyperbolic(CdfSegment::spanning(
        start, top, c, cont,
    ))];
    q
}

/// Gives seller `k`'s first mixed level an atom at `v`, next to the rival's.
fn add_jump(p: &StrategyProfile<f64>, k: Seller, f: f64) -> Option<StrategyProfile<f64>> {
    let mut q = p.clone();
    let l = p.thresholds[k.index()];
    let level = q.strategies[k.index()].levels.get_mut(l)?;
    if level.atom_at_v > 0.0 || level.is_at_cap() {
        return None;
    }
    for piece in &mut level.pieces {
        match piece {
            CdfPiece::Hyperbolic(s) => {
                s.alpha *= 1.0 - f;
                s.beta *= 1.0 - f;
            }
            CdfPiece::Tabulated(t) => t.probs.iter_mut().for_each(|x| *x *= 1.0 - f),
        }
    }
    // The support must reach v to carry the atom.
    if let Some(CdfPiece::Hyperbolic(s)) = level.pieces.last() {
        if s.hi < p.strategy(k).v {
            return None;
        }
    }
    level.atom_at_v = f;
    Some(q)
}

fn structure(solved: &[Solved]) -> Outcome {
    let mut profiles = 0;
    let mut fails = Vec::new();
    let mut perturbed = [0usize; 3];
    let mut undetected = Vec::new();
    for (i, s) in solved.iter().enumerate() {
        let cfg = &s.cfg;
        let m_max = cfg
            .max_level(Seller::First)
            .max(cfg.max_level(Seller::Second));
        if cfg.structural_demand() <= m_max || cfg.is_monopoly() {
            continue;
        }
        for p in &s.profiles {
            profiles += 1;
            let r = check_theorem1_properties(cfg, p);
            if !r.applicable || r.checks.len() != 7 || !r.all_passed() {
                fails.push(format!(
                    "config {i}: {:?}",
                    r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>()
                ));
            }
            let fails_check = |q: &StrategyProfile<f64>, name: &str| {
                check_theorem1_properties(cfg, q)
                    .check(name)
                    .is_some_and(|c| !c.passed)
            };
            for k in Seller::BOTH {
                let l = p.thresholds[k.index()];
                if l >= 1 {
                    perturbed[0] += 1;
                    if !fails_check(&shift_off_cap(p, k, cfg.c()), THRESHOLD) {
                        undetected.push(format!("config {i}: mass off v at level 1 of {k:?}"));
                    }
                }
                if cfg.max_level(k) >= l + 2 {
                    perturbed[1] += 1;
                    if !fails_check(&overlap(p, k, l + 1, cfg.c()), DISJOINT) {
                        undetected.push(format!("config {i}: overlap for {k:?}"));
                    }
                }
                if let Some(q) = add_jump(p, k, 0.2) {
                    if q.strategy(k.other())
                        .level(q.thresholds[k.other().index()] + 1)
                        .atom_at_v
                        > 1e-6
                    {
                        perturbed[2] += 1;
                        if !fails_check(&q, SINGLE_JUMP) {
                            undetected.push(format!("config {i}: double jump via {k:?}"));
                        }
                    }
                }
            }
        }
    }
    let passed = fails.is_empty()
        && undetected.is_empty()
        && profiles > 0
        && perturbed.iter().all(|&n| n > 0);
    let mut detail = format!(
        "{profiles} profiles with d > max m; perturbations off-cap/overlap/double-jump: {}/{}/{}",
        perturbed[0], perturbed[1], perturbed[2]
    );
    if !fails.is_empty() {
        detail += &format!("; failing profiles: {}", fails.join(", "));
    }
    if !undetected.is_empty() {
        detail += &format!("; undetected: {}", undetected.join(", "));
    }
    outcome(passed, detail)
}

fn monotonicity(solved: &[Solved]) -> Outcome {
    let mut applicable = 0;
    let mut pairs = 0;
    let mut fails = Vec::new();
    for (i, s) in solved.iter().enumerate() {
        for p in &s.profiles {
            let r = check_monotone_a(&s.cfg, p);
            if !r.applicable {
                continue;
            }
            applicable += 1;
            pairs += r.pairs_checked;
            if !r.passed() {
                fails.push(format!("config {i}: {} violations", r.violations.len()));
            }
        }
    }
    outcome(
        fails.is_empty() && applicable > 0,
        format!(
            "{applicable} profiles, {pairs} (l, j) pairs{}",
            if fails.is_empty() {
                String::new()
            } else {
                format!("; {}", fails.join(", "))
            }
        ),
    )
}

fn oracle_agreement() -> Outcome {
    let rounds = 1_000_000;
    let mut profiles: Vec<(String, MarketConfig<f64>, StrategyProfile<f64>)> = Vec::new();
    let sym = MarketConfig::symmetric(
        3,
        10.0,
        6.0,
        AvailabilityDistribution::binomial(3, 0.5).unwrap(),
    )
    .unwrap();
    profiles.push((
        "binomial(3,0.5)".into(),
        sym.clone(),
        solve_symmetric(&sym).unwrap().profile,
    ));
    for (name, cfg) in [
        (
            "fig1",
            market(&[0.3, 0.2, 0.2, 0.3], &[0.4, 0.2, 0.2, 0.2], 3, 10.0, 6.0),
        ),
        (
            "unique",
            market(&[0.45, 0.1, 0.4, 0.05], &[0.2, 0.2, 0.45, 0.15], 3, V, C),
        ),
        (
            "wide",
            market(&[0.2, 0.3, 0.5], &[0.1, 0.2, 0.3, 0.4], 4, V, C),
        ),
    ] {
        let sol = solve_asymmetric(&cfg, opts()).unwrap();
        for (j, e) in sol.equilibria.into_iter().enumerate() {
            profiles.push((format!("{name}#{j}"), cfg.clone(), e.profile));
        }
    }
    let mut worst: f64 = 0.0;
    let mut probes = 0;
    let mut fails = Vec::new();
    for (seed, (name, cfg, p)) in profiles.iter().enumerate() {
        let report = simulate(cfg, p, SimulationOptions::new(rounds, seed as u64)).unwrap();
        probes += report.probes.iter().filter(|p| p.z.is_some()).count();
        let z = report.max_abs_z();
        worst = worst.max(z);
        if z > 4.0 {
            fails.push(format!("{name}: max |z| {z:.2}"));
        }
    }
    let mut ties = Vec::new();
    for (i, (a, b, d)) in [(1u64, 2u64, 2u64), (2, 3, 4), (3, 3, 5)]
        .into_iter()
        .enumerate()
    {
        let r = tie_split_experiment(a, b, d, rounds, 100 + i as u64).unwrap();
        for k in 0..2 {
            let own = if k == 0 { a } else { b };
            let expected = own as f64 * d as f64 / (a + b) as f64;
            let ok = (r.mean[k] - expected).abs() <= 3.0 * r.std_error[k];
            if !ok {
                fails.push(format!(
                    "tie ({a},{b},{d}) seller {}: {} vs {expected}",
                    k + 1,
                    r.mean[k]
                ));
            }
        }
        ties.push(format!("({a},{b},{d}) {:.4}/{:.4}", r.mean[0], r.mean[1]));
    }
    outcome(
        fails.is_empty(),
        format!(
            "{} profiles, {probes} probes, max |z| {worst:.2}; tie means {}{}",
            profiles.len(),
            ties.join(", "),
            if fails.is_empty() {
                String::new()
            } else {
                format!("; {}", fails.join(", "))
            }
        ),
    )
}

fn oligopoly_gaps() -> Outcome {
    let start = Instant::now();
    let q = AvailabilityDistribution::binomial(3, 0.4).unwrap();
    let mut parts = Vec::new();
    let mut passed = true;
    for n in 2..=6 {
        let ocfg = OligopolyConfig::new(n, q.clone(), n.max(3), V, C).unwrap();
        let profile = build_heuristic(&ocfg).unwrap();
        let gaps = heuristic_gap(&ocfg, &profile, GRID).unwrap();
        let worst = gaps
            .iter()
            .map(|g| g.relative_difference)
            .fold(0.0, f64::max);
        let at = gaps
            .iter()
            .max_by(|a, b| a.relative_difference.total_cmp(&b.relative_difference))
            .map(|g| g.level)
            .unwrap_or(0);
        let ok = if matches!(n, 4 | 5) {
            worst > 0.0 && worst < 0.03
        } else {
            worst <= 1e-4
        };
        passed &= ok;
        parts.push(format!(
            "n={n} {worst:.3e} (level {at}){}",
            if ok { "" } else { " out of range" }
        ));
    }
    let elapsed = start.elapsed();
    passed &= elapsed <= Duration::from_secs(120);
    outcome(passed, format!("{} in {elapsed:.2?}", parts.join(", ")))
}

fn sweep_shape() -> Outcome {
    let ms: Vec<usize> = (2..=40).collect();
    let rows = asymptotic_sweep(&[0.3, 0.5, 0.7], &ms, V, C).unwrap();
    let at = |r: f64, m: usize| {
        rows.iter()
            .find(|x: &&SweepRow<f64>| x.r == r && x.m == m)
            .unwrap()
            .p_tilde
    };
    let high = stride_two_violations(&rows, 0.7, 6, -1);
    let low = stride_two_violations(&rows, 0.3, 6, 1);
    let (a, b, c) = (at(0.7, 20), at(0.5, 20), at(0.3, 20));
    let ordered = a < b && b < c;
    let passed = high.is_empty() && low.is_empty() && ordered;
    let show = |v: &[(usize, f64, f64)]| -> String {
        v.iter()
            .map(|(m, x, y)| format!("m={m}: {x:.5} -> {y:.5}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    outcome(
        passed,
        format!(
            "r=0.7 rises: [{}]; r=0.3 falls: [{}]; m=20: {a:.4} < {b:.4} < {c:.4} {}",
            show(&high),
            show(&low),
            if ordered { "holds" } else { "fails" }
        ),
    )
}

fn reductions() -> Outcome {
    let mut fails = Vec::new();
    // Monopoly regime.
    for (q1, q2, d) in [
        (vec![0.5, 0.5], vec![0.2, 0.3, 0.5], 3),
        (vec![0.2, 0.3, 0.5], vec![0.2, 0.3, 0.5], 5),
    ] {
        let cfg = market(&q1, &q2, d, V, C);
        let sol = solve_asymmetric(&cfg, opts()).unwrap();
        let at_cap = sol.equilibria.len() == 1
            && sol.equilibria[0]
                .profile
                .strategies
                .iter()
                .all(|s| s.levels.iter().all(LevelStrategy::is_at_cap))
            && sol.equilibria[0].certificate.max_gap == 0.0;
        if !at_cap {
            fails.push(format!("monopoly d={d} not all at v with zero gap"));
        }
        if cfg.is_symmetric() {
            let ne = solve_symmetric(&cfg).unwrap();
            if certify(&cfg, &ne.profile, GRID, TOL).unwrap().max_gap != 0.0 {
                fails.push(format!("symmetric monopoly d={d} gap nonzero"));
            }
        }
    }
    // Single demand atom.
    for (q, d) in [
        (vec![0.125, 0.375, 0.375, 0.125], 3),
        (vec![0.1, 0.2, 0.3, 0.4], 5),
        (vec![0.3, 0.3, 0.4], 2),
    ] {
        let det = MarketConfig::symmetric(d, V, C, dist(&q)).unwrap();
        let rnd = det
            .with_demand(DemandModel::random(vec![(d, 1.0)]).unwrap())
            .unwrap();
        let a = serde_json::to_string(&solve_symmetric(&det).unwrap()).unwrap();
        let b = serde_json::to_string(&solve_symmetric(&rnd).unwrap()).unwrap();
        if a != b {
            fails.push(format!("single-atom demand differs for d={d}"));
        }
    }
    let det = market(&[0.3, 0.2, 0.2, 0.3], &[0.4, 0.2, 0.2, 0.2], 3, 10.0, 6.0);
    let rnd = det
        .with_demand(DemandModel::random(vec![(3, 1.0)]).unwrap())
        .unwrap();
    let a = serde_json::to_string(&solve_asymmetric(&det, opts()).unwrap()).unwrap();
    let b = serde_json::to_string(&solve_asymmetric(&rnd, opts()).unwrap()).unwrap();
    if a != b {
        fails.push("single-atom demand differs for the asymmetric solver".into());
    }
    // Demand below the top level.
    let mut aggregated = 0;
    for (q, d) in [
        (vec![0.2, 0.3, 0.3, 0.2], 2),
        (vec![0.1, 0.2, 0.3, 0.2, 0.2], 3),
        (vec![0.4, 0.3, 0.2, 0.1], 1),
    ] {
        let cfg = MarketConfig::symmetric(d, V, C, dist(&q)).unwrap();
        let ne = solve_symmetric(&cfg).unwrap();
        let agg = ne.aggregation.clone().expect("aggregation applied");
        let reduced = MarketConfig::symmetric(d, V, C, agg.effective.clone()).unwrap();
        let mut profile = ne.profile.clone();
        for s in &mut profile.strategies {
            s.levels.truncate(agg.effective.max_level());
        }
        profile.thresholds = profile.thresholds.map(|l| l.min(agg.effective.max_level()));
        let cert = certify(&reduced, &profile, GRID, TOL).unwrap();
        aggregated += 1;
        if !cert.passed {
            fails.push(format!("aggregated d={d} gap {:e}", cert.max_gap));
        }
    }
    let cfg = market(&[0.2, 0.3, 0.3, 0.2], &[0.3, 0.3, 0.2, 0.1, 0.1], 2, V, C);
    let sol = solve_asymmetric(&cfg, opts()).unwrap();
    if !sol.aggregated || sol.equilibria.is_empty() {
        fails.push(format!(
            "asymmetric d < m: aggregated={} with {} NE",
            sol.aggregated,
            sol.equilibria.len()
        ));
    }
    outcome(
        fails.is_empty(),
        format!(
            "monopoly, single-atom and {} aggregated cases{}",
            aggregated + 1,
            if fails.is_empty() {
                String::new()
            } else {
                format!("; {}", fails.join(", "))
            }
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut run = |n: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let o = f();
        println!(
            "{} criterion {n:>2} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, name, o));
    };
    run(1, "unique-NE regression", &mut unique_ne);
    run(2, "multiplicity regression", &mut multiplicity);
    run(3, "chained-support regression", &mut chained_supports);

    let start = Instant::now();
    let configs = suite();
    let solved = solve_suite(&configs);
    let elapsed = start.elapsed();
    match &solved {
        Ok(solved) => {
            run(4, "best-response certification", &mut || {
                best_response(solved, start.elapsed().max(elapsed))
            });
            run(5, "structure property suite", &mut || structure(solved));
            run(6, "per-unit gap monotonicity", &mut || monotonicity(solved));
        }
        Err(e) => {
            for (n, name) in [
                (4, "best-response certification"),
                (5, "structure property suite"),
                (6, "per-unit gap monotonicity"),
            ] {
                run(n, name, &mut || {
                    outcome(false, format!("suite failed to solve: {e}"))
                });
            }
        }
    }
    run(7, "simulator agreement", &mut oracle_agreement);
    run(8, "oligopoly heuristic gaps", &mut oligopoly_gaps);
    run(9, "asymptotic sweep shape", &mut sweep_shape);
    run(10, "degenerate and reduction cases", &mut reductions);

    let failed: Vec<String> = results
        .iter()
        .filter(|(_, _, o)| !o.passed)
        .map(|(n, _, _)| n.to_string())
        .collect();
    println!(
        "acceptance: {} of {} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {}", failed.join(", "))
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
