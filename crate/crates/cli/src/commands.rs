use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use symwalk::bounds::{matching_tail, rt_continuous_terms, rt_discrete_terms, theorem_bound, ttr_bound_sum, BoundKind};
use symwalk::distances::{discrete_time, DistanceProfile};
use symwalk::montecarlo::{sample_walk, SimConfig, MIN_REPORTED_SAMPLES};
use symwalk::oracle::{class_measure_of, cross_check, MAX_EIGEN_N};
use symwalk::spectra::spectrum;
use symwalk::{Group, Real, TimeMode, Walk};

use crate::error::CliError;
use crate::grid::{eval_time, parse_floats, parse_range, time_grid};
use crate::output::{emit, render_json, render_table, Cell, Format, RunManifest, Table};

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Done,
    VerificationFailed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupArg {
    Sn,
    An,
}

impl From<GroupArg> for Group {
    fn from(g: GroupArg) -> Self {
        match g {
            GroupArg::Sn => Group::Symmetric,
            GroupArg::An => Group::Alternating,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Discrete,
    Continuous,
}

impl From<ModeArg> for TimeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Discrete => TimeMode::Discrete,
            ModeArg::Continuous => TimeMode::Continuous,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    RtDiscrete,
    RtContinuous,
    Ttr,
    FourCycle,
    RandomInsertion,
    Lemmas,
    Oracle,
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn params<T: Serialize>(args: &T) -> Result<Map<String, Value>, CliError> {
    match serde_json::to_value(args)? {
        Value::Object(m) => Ok(m),
        _ => unreachable!("argument structs serialize to objects"),
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ProfileArgs {
    /// rt | ttr-bound | class:<cycles> | lazy:<cycles>:<eps>, e.g. class:3,2 or lazy:3:1/2
    #[arg(long)]
    pub walk: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = GroupArg::Sn)]
    pub group: GroupArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Discrete)]
    pub mode: ModeArg,
    /// `auto` or comma-separated expressions in n, logn, nlogn, e.g. "0,n,0.5nlogn+2n"
    #[arg(long, default_value = "auto")]
    pub t_grid: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    #[serde(serialize_with = "ser_format")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn ser_format<S: serde::Serializer>(f: &Format, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(format_name(*f))
}

const PROFILE_COLUMNS: [&str; 7] = ["walk", "group", "n", "mode", "t", "d2", "log10_d2_sq"];

pub fn profile(args: &ProfileArgs, prec: usize) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let n = args.n;
    if n < 2 {
        return Err(CliError::usage("profile needs n >= 2"));
    }
    let nf = n as f64;
    let mode: TimeMode = args.mode.into();
    let group: Group = args.group.into();
    let mut table = Table::new(PROFILE_COLUMNS.to_vec());
    let group_name = match group {
        Group::Symmetric => "Sn",
        Group::Alternating => "An",
    };
    let mode_name = match mode {
        TimeMode::Discrete => "discrete",
        TimeMode::Continuous => "continuous",
    };
    if args.walk == "ttr-bound" {
        if mode != TimeMode::Discrete || group != Group::Symmetric {
            return Err(CliError::usage("ttr-bound is a discrete-time bound on S_n"));
        }
        let times = time_grid(&args.t_grid, n, nf * nf.ln())?;
        for t in times {
            let k = discrete_time(t);
            let sum = ttr_bound_sum(n, k, prec);
            let d2 = sum.sqrt().to_f64();
            let log10 = if sum.is_zero() { f64::NEG_INFINITY } else { sum.ln().to_f64() / std::f64::consts::LN_10 };
            table.push(vec![
                Cell::Text(args.walk.clone()),
                Cell::Text(group_name.into()),
                Cell::Int(n as u64),
                Cell::Text(mode_name.into()),
                Cell::Num(k as f64),
                Cell::Num(d2),
                Cell::Num(log10),
            ]);
        }
    } else {
        let walk = Walk::parse(&args.walk, n)?;
        let measure = class_measure_of(&walk, n)?.ok_or_else(|| {
            CliError::usage(format!("walk '{}' has no class spectrum; use rt, ttr-bound, class:... or lazy:...", args.walk))
        })?;
        if group == Group::Alternating && !measure.is_even() {
            return Err(CliError::usage(format!(
                "walk '{}' charges odd permutations and does not live on A_n; use --group sn",
                args.walk
            )));
        }
        let scale = match (mode, &walk) {
            (TimeMode::Continuous, _) => nf / 2.0 * nf.ln(),
            (TimeMode::Discrete, Walk::Class(c)) => nf / c.support() as f64 * nf.ln(),
            (TimeMode::Discrete, Walk::Lazy(c, eps)) => {
                let hold = eps.to_f64().unwrap_or(0.0);
                nf / c.support() as f64 * nf.ln() / (1.0 - hold).max(1e-9)
            }
            (TimeMode::Discrete, _) => nf / 2.0 * nf.ln(),
        };
        let times = time_grid(&args.t_grid, n, scale)?;
        let spec = spectrum(&measure, group)?;
        let profile = DistanceProfile::compute(&walk.name(), &spec, mode, &times, prec);
        for p in &profile.points {
            let log10 = p.log_d2_sq.map_or(f64::NEG_INFINITY, |l| l / std::f64::consts::LN_10);
            table.push(vec![
                Cell::Text(profile.walk.clone()),
                Cell::Text(group_name.into()),
                Cell::Int(n as u64),
                Cell::Text(mode_name.into()),
                Cell::Num(p.t),
                Cell::Num(p.d2),
                Cell::Num(log10),
            ]);
        }
    }
    let mut manifest = RunManifest::new("profile", params(args)?, None, prec);
    manifest.wall_time_secs = start.elapsed().as_secs_f64();
    emit(&render_table(&manifest, &table, args.format)?, args.output.as_deref())?;
    Ok(Outcome::Done)
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// a..b, a..=b, a or a,b,c
    #[arg(long)]
    pub n: String,
    /// Comma-separated values of c; defaults depend on the suite.
    #[arg(long)]
    pub c: Option<String>,
    /// Largest discrete time for the oracle suite.
    #[arg(long, default_value_t = 20)]
    pub t_max: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

const ORACLE_TIMES: [f64; 8] = [0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0];
const ORACLE_TOLERANCE: f64 = 1e-8;

fn oracle_walks(n: usize) -> Result<Vec<Walk>, CliError> {
    let mut walks = vec![Walk::RandomTransposition, Walk::TransposeTop, Walk::RandomInsertion];
    walks.push(Walk::parse("class:3", n)?);
    if n >= 4 {
        walks.push(Walk::parse("class:4", n)?);
    }
    walks.push(Walk::parse("lazy:3:1/2", n)?);
    Ok(walks)
}

pub fn verify(args: &VerifyArgs, prec: usize) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let ns = parse_range(&args.n)?;
    let kind = match args.suite {
        Suite::RtDiscrete => Some(BoundKind::RtDiscrete),
        Suite::RtContinuous => Some(BoundKind::RtContinuous),
        Suite::Ttr => Some(BoundKind::Ttr),
        Suite::FourCycle => Some(BoundKind::FourCycle),
        Suite::RandomInsertion => Some(BoundKind::RandomInsertion),
        Suite::Lemmas | Suite::Oracle => None,
    };
    let results: Vec<(Value, bool)> = match (args.suite, kind) {
        (_, Some(kind)) => {
            let default_c = match kind {
                BoundKind::RtDiscrete | BoundKind::Ttr => "0,1,2",
                _ => "2,3",
            };
            let cs = parse_floats(args.c.as_deref().unwrap_or(default_c))?;
            let jobs: Vec<(usize, f64)> = ns.iter().flat_map(|&n| cs.iter().map(move |&c| (n, c))).collect();
            let reports = jobs
                .par_iter()
                .map(|&(n, c)| theorem_bound(kind, n, c, prec))
                .collect::<symwalk::Result<Vec<_>>>()?;
            reports.into_iter().map(|r| Ok((serde_json::to_value(&r)?, r.pass))).collect::<Result<_, CliError>>()?
        }
        (Suite::Lemmas, None) => {
            if let Some(&low) = ns.iter().min() {
                if low < 10 {
                    return Err(CliError::usage(format!("lemma sweeps start at n = 10, got {low}")));
                }
            }
            let per_n = ns
                .par_iter()
                .map(|&n| {
                    let mut checks = rt_continuous_terms(n, prec)?.checks();
                    if n >= 14 {
                        checks.extend(rt_discrete_terms(n, prec)?.checks());
                    }
                    Ok(checks)
                })
                .collect::<symwalk::Result<Vec<_>>>()?;
            per_n
                .into_iter()
                .flatten()
                .map(|c| Ok((serde_json::to_value(&c)?, c.pass)))
                .collect::<Result<_, CliError>>()?
        }
        (Suite::Oracle, None) => {
            if let Some(&high) = ns.iter().max() {
                if high > MAX_EIGEN_N {
                    return Err(symwalk::Error::ResourceGuard { what: "oracle suite", n: high, limit: MAX_EIGEN_N }.into());
                }
            }
            if let Some(&low) = ns.iter().min() {
                if low < 3 {
                    return Err(CliError::usage(format!("oracle suite needs n >= 3, got {low}")));
                }
            }
            let mut out = Vec::new();
            for &n in &ns {
                for walk in oracle_walks(n)? {
                    let check = cross_check(&walk, n, args.t_max, &ORACLE_TIMES, ORACLE_TOLERANCE, prec)?;
                    out.push((serde_json::to_value(&check)?, check.pass));
                }
            }
            out
        }
        _ => unreachable!("every suite is covered"),
    };
    let failed = results.iter().filter(|(_, pass)| !pass).count();
    let summary = json!({ "total": results.len(), "passed": results.len() - failed, "failed": failed });
    let mut manifest = RunManifest::new("verify", params(args)?, None, prec);
    manifest.wall_time_secs = start.elapsed().as_secs_f64();
    let text = render_json(&manifest, results.into_iter().map(|(v, _)| v).collect(), Some(summary))?;
    emit(&text, args.output.as_deref())?;
    Ok(if failed == 0 { Outcome::Done } else { Outcome::VerificationFailed })
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    /// rt | ttr | ri | class:<cycles> | lazy:<cycles>:<eps>
    #[arg(long)]
    pub walk: String,
    #[arg(long)]
    pub n: usize,
    /// Number of steps, as an expression in n, logn, nlogn; rounded up.
    #[arg(long)]
    pub t: String,
    /// Fixed-point thresholds, comma-separated.
    #[arg(long, default_value = "2")]
    pub j: String,
    /// Number of trajectories.
    #[arg(long = "N", default_value_t = 10_000)]
    #[serde(rename = "N")]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report progress on stderr.
    #[arg(long)]
    pub progress: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    #[serde(serialize_with = "ser_format")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

const SIMULATE_COLUMNS: [&str; 10] =
    ["walk", "n", "t", "j", "samples", "seed", "empirical", "uniform_tail", "estimate", "std_error"];

pub fn simulate(args: &SimulateArgs, prec: usize) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let n = args.n;
    let walk = Walk::parse(&args.walk, n)?;
    let steps = discrete_time(eval_time(&args.t, n)?);
    if args.samples < MIN_REPORTED_SAMPLES {
        return Err(CliError::usage(format!("--N must be at least {MIN_REPORTED_SAMPLES}, got {}", args.samples)));
    }
    let js = parse_range(&args.j)?;
    if let Some(&bad) = js.iter().find(|&&j| j < 2 || j > n) {
        return Err(CliError::usage(format!("thresholds need 2 <= j <= n, got {bad}")));
    }
    let cfg = SimConfig { n, walk: walk.clone(), steps, samples: args.samples, seed: args.seed, j: js[0], progress: args.progress };
    let stats = sample_walk(&cfg)?;
    let mut table = Table::new(SIMULATE_COLUMNS.to_vec());
    for &j in &js {
        let tail = matching_tail(n, j, prec)?.value;
        let uniform = Real::from_ratio(&tail, prec).to_f64();
        let empirical = stats.frequency_at_least(j);
        table.push(vec![
            Cell::Text(walk.name()),
            Cell::Int(n as u64),
            Cell::Int(steps),
            Cell::Int(j as u64),
            Cell::Int(args.samples),
            Cell::Int(args.seed),
            Cell::Num(empirical),
            Cell::Num(uniform),
            Cell::Num(empirical - uniform),
            Cell::Num(stats.std_error(j)),
        ]);
    }
    let mut manifest = RunManifest::new("simulate", params(args)?, Some(args.seed), prec);
    manifest.wall_time_secs = start.elapsed().as_secs_f64();
    emit(&render_table(&manifest, &table, args.format)?, args.output.as_deref())?;
    Ok(Outcome::Done)
}
