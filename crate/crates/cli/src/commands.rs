use std::path::Path;

use duopoly_core::asymmetric::{
    solve_asymmetric, AsymmetricNE, AsymmetricOptions, CandidateSolution,
};
use duopoly_core::model::StrategyProfile;
use duopoly_core::oligopoly::{
    build_heuristic, heuristic_gap, LevelGap, OligopolyConfig, OligopolyProfile,
};
use duopoly_core::sweep::{sweep_points, SweepRow};
use duopoly_core::symmetric::{solve_symmetric, AggregatedAvailability};
use duopoly_core::verify::{
    certify, check_monotone_a, simulate, EquilibriumCertificate, MonotoneReport, SimulationOptions,
    SimulationReport,
};
use duopoly_core::{Profile, Segment};
use serde::Serialize;
use serde_json::Value;

use crate::args::{MarketArgs, OligopolyArgs, ProfileArgs, RunArgs, SimulateArgs, SweepArgs};
use crate::config::{parse_list, MarketSpec};
use crate::error::{CliError, CliResult};
use crate::output::{num, opt, profile_rows, seller, Format, Sink, PROFILE_HEADER};

const SWEEP_V: f64 = 10.0;
const SWEEP_C: f64 = 1.0;

#[derive(Serialize)]
struct SymReport<'a> {
    command: &'static str,
    market: &'a MarketSpec,
    threshold: usize,
    p_tilde: f64,
    segments: &'a [Segment],
    utilities: &'a [f64],
    aggregation: &'a Option<AggregatedAvailability<f64>>,
    profile: &'a Profile,
    certificate: &'a EquilibriumCertificate<f64>,
}

pub fn solve_sym(market: &MarketArgs, run: &RunArgs, sink: &Sink) -> CliResult<()> {
    let spec = market.resolve()?;
    let cfg = spec.market()?;
    let ne = solve_symmetric(&cfg)?;
    let cert = certify(&cfg, &ne.profile, run.grid, run.tol)?;
    let mut rows = Vec::new();
    profile_rows(0, &ne.profile, &mut rows);
    sink.write(
        &SymReport {
            command: "solve-sym",
            market: &spec,
            threshold: ne.threshold,
            p_tilde: ne.p_tilde(),
            segments: &ne.segments,
            utilities: &ne.utilities,
            aggregation: &ne.aggregation,
            profile: &ne.profile,
            certificate: &cert,
        },
        &PROFILE_HEADER,
        &rows,
    )?;
    eprintln!(
        "threshold {}, p_tilde {}, max gap {:e}",
        ne.threshold,
        ne.p_tilde(),
        cert.max_gap
    );
    verdict(&cert)
}

#[derive(Serialize)]
struct AsymReport<'a> {
    command: &'static str,
    market: &'a MarketSpec,
    count: usize,
    hypotheses: usize,
    aggregated: bool,
    equilibria: &'a [AsymmetricNE<f64>],
    rejected: &'a [CandidateSolution<f64>],
}

pub fn solve_asym(market: &MarketArgs, run: &RunArgs, sink: &Sink) -> CliResult<()> {
    let spec = market.resolve()?;
    let cfg = spec.market()?;
    let sol = solve_asymmetric(
        &cfg,
        AsymmetricOptions {
            grid_size: run.grid,
            tol: run.tol,
        },
    )?;
    let mut rows = Vec::new();
    for (i, ne) in sol.equilibria.iter().enumerate() {
        profile_rows(i, &ne.profile, &mut rows);
    }
    sink.write(
        &AsymReport {
            command: "solve-asym",
            market: &spec,
            count: sol.equilibria.len(),
            hypotheses: sol.hypotheses,
            aggregated: sol.aggregated,
            equilibria: &sol.equilibria,
            rejected: &sol.rejected,
        },
        &PROFILE_HEADER,
        &rows,
    )?;
    eprintln!(
        "{} certified equilibria, {} rejected candidates, {} structures searched",
        sol.equilibria.len(),
        sol.rejected.len(),
        sol.hypotheses
    );
    for (i, ne) in sol.equilibria.iter().enumerate() {
        eprintln!(
            "  #{i}: thresholds {:?}, order {}, p_tilde {}, jumps {:?}",
            ne.candidate.hypothesis.thresholds,
            ne.candidate.hypothesis.word(),
            ne.candidate.p_tilde,
            ne.candidate.jumps
        );
    }
    if sol.equilibria.is_empty() {
        return Err(CliError::Verification(
            "no candidate passed certification".into(),
        ));
    }
    Ok(())
}

/// Reads the profile (and the market it was solved for, when recorded).
fn load_profile(args: &ProfileArgs) -> CliResult<(Profile, Option<MarketSpec>)> {
    let path: &Path = &args.profile;
    let shown = path.display();
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{shown}: {e}")))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::config(format!(
            "{shown}: line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let market = match doc.get("market") {
        Some(m) => Some(
            serde_json::from_value::<MarketSpec>(m.clone())
                .map_err(|e| CliError::config(format!("{shown}: field `market`: {e}")))?,
        ),
        None => None,
    };
    let (field, raw) = if let Some(list) = doc.get("equilibria") {
        let list = list.as_array().ok_or_else(|| {
            CliError::config(format!("{shown}: field `equilibria` is not a list"))
        })?;
        let ne = list.get(args.index).ok_or_else(|| {
            CliError::config(format!(
                "{shown}: --index {} but the file holds {} equilibria",
                args.index,
                list.len()
            ))
        })?;
        (
            format!("equilibria[{}].profile", args.index),
            ne.get("profile").cloned().unwrap_or(Value::Null),
        )
    } else if let Some(p) = doc.get("profile") {
        ("profile".to_string(), p.clone())
    } else {
        ("<root>".to_string(), doc)
    };
    let profile: StrategyProfile<f64> = serde_json::from_value(raw)
        .map_err(|e| CliError::config(format!("{shown}: field `{field}`: {e}")))?;
    Ok((profile, market))
}

fn market_for(args: &ProfileArgs, market: &MarketArgs) -> CliResult<(Profile, MarketSpec)> {
    let (profile, recorded) = load_profile(args)?;
    if recorded.is_none() && market.is_empty() {
        return Err(CliError::config(format!(
            "{} records no market; pass --config or market flags",
            args.profile.display()
        )));
    }
    let spec = recorded.unwrap_or_default().merge(market.resolve()?);
    Ok((profile, spec))
}

#[derive(Serialize)]
struct CertifyReport<'a> {
    command: &'static str,
    market: &'a MarketSpec,
    certificate: &'a EquilibriumCertificate<f64>,
    monotone: &'a MonotoneReport<f64>,
}

pub fn certify_cmd(
    args: &ProfileArgs,
    market: &MarketArgs,
    run: &RunArgs,
    sink: &Sink,
) -> CliResult<()> {
    let (profile, spec) = market_for(args, market)?;
    let cfg = spec.market()?;
    let cert = certify(&cfg, &profile, run.grid, run.tol)?;
    let mono = check_monotone_a(&cfg, &profile);
    let rows: Vec<Vec<String>> = cert
        .levels
        .iter()
        .map(|l| {
            let mut r = vec![seller(l.seller), l.level.to_string()];
            r.extend(
                [
                    l.equilibrium_utility,
                    l.best_response_utility,
                    l.best_response_price,
                    l.gap,
                    l.relative_gap,
                ]
                .map(num),
            );
            r
        })
        .collect();
    sink.write(
        &CertifyReport {
            command: "certify",
            market: &spec,
            certificate: &cert,
            monotone: &mono,
        },
        &[
            "seller",
            "level",
            "equilibrium_utility",
            "best_response_utility",
            "best_response_price",
            "gap",
            "relative_gap",
        ],
        &rows,
    )?;
    eprintln!(
        "max gap {:e} (tolerance {:e}), structure checks {}, monotonicity {}",
        cert.max_gap,
        cert.tol,
        if !cert.invariants.applicable {
            "not applicable"
        } else if cert.invariants.all_passed() {
            "passed"
        } else {
            "failed"
        },
        if mono.applicable {
            if mono.passed() {
                "passed"
            } else {
                "failed"
            }
        } else {
            "not applicable"
        }
    );
    verdict(&cert)
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    command: &'static str,
    market: &'a MarketSpec,
    max_abs_z: f64,
    z_max: f64,
    report: &'a SimulationReport<f64>,
}

pub fn simulate_cmd(
    args: &SimulateArgs,
    market: &MarketArgs,
    run: &RunArgs,
    sink: &Sink,
) -> CliResult<()> {
    if !(args.z_max > 0.0) {
        return Err(CliError::config(format!(
            "flag --z-max: {} must be positive",
            args.z_max
        )));
    }
    let (profile, spec) = market_for(&args.source, market)?;
    let cfg = spec.market()?;
    let opts = SimulationOptions {
        rounds: run.rounds,
        seed: run.seed,
        jobs: run.jobs,
    };
    let report = simulate(&cfg, &profile, opts)?;
    let max_z = report.max_abs_z();
    let rows: Vec<Vec<String>> = report
        .probes
        .iter()
        .map(|p| {
            vec![
                seller(p.seller),
                p.level.to_string(),
                num(p.price),
                p.samples.to_string(),
                opt(p.mean),
                opt(p.std_error),
                num(p.analytic),
                opt(p.z),
            ]
        })
        .collect();
    sink.write(
        &SimulateReport {
            command: "simulate",
            market: &spec,
            max_abs_z: max_z,
            z_max: args.z_max,
            report: &report,
        },
        &[
            "seller",
            "level",
            "price",
            "samples",
            "mean",
            "std_error",
            "analytic",
            "z",
        ],
        &rows,
    )?;
    eprintln!("{} probes, max |z| {max_z:.3}", report.probes.len());
    if max_z > args.z_max {
        return Err(CliError::Verification(format!(
            "max |z| {max_z} exceeds {}",
            args.z_max
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepFailure {
    r: f64,
    m: usize,
    error: String,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    command: &'static str,
    v: f64,
    c: f64,
    rows: &'a [SweepRow<f64>],
    failures: &'a [SweepFailure],
}

pub fn sweep(args: &SweepArgs, market: &MarketArgs, sink: &Sink) -> CliResult<()> {
    let rates = parse_list(&args.r).map_err(|e| CliError::config(format!("flag --r: {e}")))?;
    if let Some(r) = rates.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(CliError::config(format!("flag --r: {r} is outside (0, 1)")));
    }
    if args.m_min == 0 || args.m_min > args.m_max {
        return Err(CliError::config(format!(
            "flags --m-min/--m-max: need 1 <= {} <= {}",
            args.m_min, args.m_max
        )));
    }
    let spec = if market.is_empty() {
        MarketSpec::default()
    } else {
        market.resolve()?
    };
    let v = spec.v.unwrap_or(SWEEP_V);
    let c = spec.c.unwrap_or(SWEEP_C);
    let ms: Vec<usize> = (args.m_min..=args.m_max).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, m, res) in sweep_points(&rates, &ms, v, c) {
        match res {
            Ok(p_tilde) => rows.push(SweepRow { r, m, p_tilde }),
            Err(e) => failures.push(SweepFailure {
                r,
                m,
                error: e.to_string(),
            }),
        }
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|row| vec![num(row.r), row.m.to_string(), num(row.p_tilde)])
        .collect();
    sink.write(
        &SweepReport {
            command: "sweep-asymptotic",
            v,
            c,
            rows: &rows,
            failures: &failures,
        },
        &["r", "m", "p_tilde"],
        &table,
    )?;
    if let Some(f) = failures.first() {
        return Err(CliError::Numeric(format!(
            "{} of {} points failed, first at r = {}, m = {}: {}",
            failures.len(),
            failures.len() + rows.len(),
            f.r,
            f.m,
            f.error
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct OligopolyReport<'a> {
    command: &'static str,
    market: &'a MarketSpec,
    config: &'a OligopolyConfig<f64>,
    profile: &'a OligopolyProfile<f64>,
    gaps: &'a [LevelGap<f64>],
    max_relative_difference: f64,
}

pub fn oligopoly(
    args: &OligopolyArgs,
    market: &MarketArgs,
    run: &RunArgs,
    sink: &Sink,
) -> CliResult<()> {
    let spec = market.resolve()?;
    let mut ocfg = spec.oligopoly()?;
    ocfg.tie_rule = args.tie_rule.into();
    ocfg.grid_points = args.points;
    let profile = build_heuristic(&ocfg)?;
    let gaps = heuristic_gap(&ocfg, &profile, run.grid)?;
    let worst = gaps
        .iter()
        .map(|g| g.relative_difference)
        .fold(0.0, f64::max);
    let rows: Vec<Vec<String>> = gaps
        .iter()
        .map(|g| {
            let mut r = vec![g.level.to_string()];
            r.extend(
                [
                    g.proposed_utility,
                    g.best_response_utility,
                    g.best_response_price,
                    g.relative_difference,
                ]
                .map(num),
            );
            r
        })
        .collect();
    sink.write(
        &OligopolyReport {
            command: "oligopoly",
            market: &spec,
            config: &ocfg,
            profile: &profile,
            gaps: &gaps,
            max_relative_difference: worst,
        },
        &[
            "level",
            "proposed_utility",
            "best_response_utility",
            "best_response_price",
            "relative_difference",
        ],
        &rows,
    )?;
    eprintln!(
        "n = {}, d = {}, max relative difference {worst:e}",
        ocfg.n, ocfg.d
    );
    Ok(())
}

fn verdict(cert: &EquilibriumCertificate<f64>) -> CliResult<()> {
    if cert.passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "best-response gap {:e} exceeds {:e}",
            cert.max_gap, cert.tol
        )))
    }
}

pub fn default_format(sweep: bool) -> Format {
    if sweep {
        Format::Csv
    } else {
        Format::Json
    }
}
