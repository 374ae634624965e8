use serde::Serialize;

use moe_core::verify::search::{local_search_with, GradientMethod, SearchInit, SearchOptions};
use moe_core::verify::tables::{
    check_discretization, check_finite_support_divergence, default_dt_grid,
};
use moe_core::verify::{
    check_diagonal_restriction, check_passive_reduction, verify_conjecture_finite_with,
    verify_conjecture_infinitesimal_with, ChannelLabel, ReportStatus, VerificationReport,
    VerifyOptions,
};
use moe_core::{ChannelKind, LindbladSpec};

use super::{channel, engine, require_channel, require_entropy, Session};
use crate::args::VerifyCommand;
use crate::error::{usage, CliResult};
use crate::output::{num, opt, Report, Table};

/// Channels checked by `finite`, `infinitesimal` and `passive` when no
/// `--kind` is given.
pub fn reference_channels() -> Vec<LindbladSpec> {
    [
        ChannelKind::Loss { eta: 0.7, noise: 0.0 },
        ChannelKind::Amplifier { kappa: 1.5, noise: 0.0 },
        ChannelKind::Additive { noise: 0.3 },
    ]
    .iter()
    .map(|k| k.lindblad().expect("reference channels are valid"))
    .collect()
}

/// Columns of the CSV report for `finite`, `infinitesimal` and `passive`.
pub const REPORT_COLUMNS: [&str; 21] = [
    "check",
    "gamma_plus",
    "gamma_minus",
    "t",
    "s0",
    "dim",
    "seed",
    "trials",
    "evaluated",
    "excluded",
    "divergent",
    "baseline",
    "thermal_self_gap",
    "min_gap",
    "argmin_seed",
    "min_value",
    "violations",
    "entropy_error_budget",
    "status",
    "diagonal_restriction_tv",
    "support",
];

pub const DIVERGENCE_COLUMNS: [&str; 4] = ["dt", "increment", "quotient", "leading_ratio"];

pub const DISCRETIZATION_COLUMNS: [&str; 6] = [
    "step",
    "t",
    "nbar",
    "nbar_closed_form",
    "entropy",
    "entropy_closed_form",
];

pub const SEARCH_COLUMNS: [&str; 6] = [
    "output_entropy",
    "baseline",
    "gap",
    "iterations",
    "accepted_steps",
    "status",
];

pub fn run(c: VerifyCommand) -> CliResult<()> {
    let mut s = Session::open(&c.common)?;
    let mode = s
        .r
        .raw("mode", c.mode.as_ref())
        .ok_or_else(|| usage("missing --mode (finite, infinitesimal, passive, divergence, discretization, search)"))?;
    match mode.as_str() {
        "finite" | "infinitesimal" => conjecture(s, &c, &mode),
        "passive" => passive(s, &c),
        "divergence" => divergence(s, &c),
        "discretization" => discretization(s, &c),
        "search" => search(s, &c),
        other => Err(usage(format!(
            "unknown --mode `{other}` (finite, infinitesimal, passive, divergence, discretization, search)"
        ))),
    }
}

fn channels(s: &mut Session, c: &VerifyCommand) -> CliResult<Vec<LindbladSpec>> {
    Ok(match channel(&mut s.r, &c.channel, None)? {
        Some(spec) => vec![spec],
        None => reference_channels(),
    })
}

#[derive(Serialize)]
struct Checked {
    #[serde(flatten)]
    report: VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagonal_restriction_tv: Option<f64>,
}

fn report_row(r: &Checked, support: Option<usize>) -> Vec<String> {
    let v = &r.report;
    let spec = match v.channel {
        ChannelLabel::Covariant(spec) => spec,
        ChannelLabel::Contravariant(_) => unreachable!("covariant checks only"),
    };
    let check = serde_json::to_value(v.check)
        .ok()
        .and_then(|x| x.as_str().map(str::to_string))
        .unwrap_or_default();
    vec![
        check,
        num(spec.gamma_plus),
        num(spec.gamma_minus),
        num(spec.t),
        opt(v.s0.map(|e| e.nats())),
        v.dim.to_string(),
        v.seed.to_string(),
        v.trials.to_string(),
        v.evaluated.to_string(),
        v.excluded.to_string(),
        v.divergent.to_string(),
        opt(v.baseline),
        opt(v.thermal_self_gap),
        num(v.min_gap),
        v.argmin_seed.to_string(),
        opt(v.min_value),
        v.violations.to_string(),
        num(v.entropy_error_budget),
        status(v.status).to_string(),
        opt(r.diagonal_restriction_tv),
        support.map(|n| n.to_string()).unwrap_or_default(),
    ]
}

fn status(s: ReportStatus) -> &'static str {
    match s {
        ReportStatus::Pass => "PASS",
        ReportStatus::Finding => "FINDING",
    }
}

/// Violations are results, not failures; they are flagged on stderr and the
/// command still succeeds.
fn announce(reports: &[Checked]) {
    for r in reports.iter().filter(|r| r.report.status == ReportStatus::Finding) {
        let v = &r.report;
        eprintln!(
            "FINDING: {:?} check, channel {:?}: {} violation(s), min gap {:e} at seed {}",
            v.check, v.channel, v.violations, v.min_gap, v.argmin_seed
        );
    }
}

fn finish_reports(
    s: Session,
    reports: Vec<Checked>,
    support: Option<usize>,
) -> CliResult<()> {
    announce(&reports);
    let mut table = Table::new(&REPORT_COLUMNS);
    for r in &reports {
        table.push(report_row(r, support));
    }
    s.finish(Report::new("verify", reports, table)?)
}

fn conjecture(mut s: Session, c: &VerifyCommand, mode: &str) -> CliResult<()> {
    let dim = s.dim(&c.common, 256)?;
    let specs = channels(&mut s, c)?;
    let s0 = require_entropy(&mut s.r, &c.entropy)?;
    let default_trials = if mode == "finite" { 1000 } else { 500 };
    let trials: usize = s.r.or("trials", c.trials.as_ref(), default_trials)?;
    let seed = s.seed(c.seed.as_ref())?;
    let support: Option<usize> = s.r.get("support", c.support.as_ref())?;
    let options = VerifyOptions {
        dim,
        engine: engine(&mut s.r, c.engine.as_ref(), c.tolerance.as_ref())?,
        support,
    };
    let mut reports = Vec::with_capacity(specs.len());
    for spec in &specs {
        let report = if mode == "finite" {
            verify_conjecture_finite_with(spec, s0, trials, seed, &options)?
        } else {
            verify_conjecture_infinitesimal_with(spec, s0, trials, seed, &options)?
        };
        reports.push(Checked {
            report,
            diagonal_restriction_tv: None,
        });
    }
    finish_reports(s, reports, support)
}

fn passive(mut s: Session, c: &VerifyCommand) -> CliResult<()> {
    let dim = s.dim(&c.common, 16)?;
    let specs = channels(&mut s, c)?;
    let trials: usize = s.r.or("trials", c.trials.as_ref(), 200)?;
    let seed = s.seed(c.seed.as_ref())?;
    let mut reports = Vec::with_capacity(specs.len());
    for spec in &specs {
        reports.push(Checked {
            report: check_passive_reduction(spec, dim, trials, seed)?,
            diagonal_restriction_tv: Some(check_diagonal_restriction(spec, dim, trials, seed)?),
        });
    }
    finish_reports(s, reports, None)
}

fn parse_grid(list: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| usage(format!("invalid --dt-grid `{list}`")))
}

fn divergence(mut s: Session, c: &VerifyCommand) -> CliResult<()> {
    let dim = s.dim(&c.common, 64)?;
    let spec = require_channel(&mut s.r, &c.channel)?;
    let support_n: usize = s.r.or("support-n", c.support_n.as_ref(), 0)?;
    let grid = match s.r.raw("dt-grid", c.dt_grid.as_ref()) {
        Some(list) => parse_grid(&list)?,
        None => default_dt_grid(),
    };
    let table_data = check_finite_support_divergence(&spec, support_n, dim, &grid)?;
    let mut table = Table::new(&DIVERGENCE_COLUMNS);
    for row in &table_data.rows {
        table.push(vec![
            num(row.dt),
            num(row.increment),
            num(row.quotient),
            opt(row.leading_ratio),
        ]);
    }
    s.finish(Report::new("verify", table_data, table)?)
}

fn discretization(mut s: Session, c: &VerifyCommand) -> CliResult<()> {
    let dim = s.dim(&c.common, 256)?;
    let spec = require_channel(&mut s.r, &c.channel)?;
    let s0 = require_entropy(&mut s.r, &c.entropy)?;
    let steps: usize = s.r.or("steps", c.steps.as_ref(), 10)?;
    let table_data = check_discretization(&spec, s0, steps, dim)?;
    let mut table = Table::new(&DISCRETIZATION_COLUMNS);
    for row in &table_data.rows {
        table.push(vec![
            row.step.to_string(),
            num(row.t),
            num(row.nbar),
            num(row.nbar_closed_form),
            num(row.entropy),
            num(row.entropy_closed_form),
        ]);
    }
    s.finish(Report::new("verify", table_data, table)?)
}

#[derive(Serialize)]
struct SearchReport {
    spec: LindbladSpec,
    s0: f64,
    dim: usize,
    seed: u64,
    options: SearchOptions,
    output_entropy: f64,
    baseline: f64,
    gap: f64,
    iterations: usize,
    accepted_steps: usize,
    /// `FINDING` when the search ends below the thermal value.
    status: &'static str,
    state: Vec<f64>,
}

/// A search that ends below thermal by more than this is a finding.
const SEARCH_TOLERANCE: f64 = 1e-9;

fn search(mut s: Session, c: &VerifyCommand) -> CliResult<()> {
    let dim = s.dim(&c.common, 128)?;
    let spec = require_channel(&mut s.r, &c.channel)?;
    let s0 = require_entropy(&mut s.r, &c.entropy)?;
    let iterations: usize = s.r.or("iterations", c.iterations.as_ref(), 200)?;
    let seed = s.seed(c.seed.as_ref())?;
    let gradient = match s.r.or("gradient", c.gradient.as_ref(), "fd".to_string())?.as_str() {
        "fd" => GradientMethod::FiniteDifference,
        "adjoint" => GradientMethod::Adjoint,
        other => return Err(usage(format!("unknown --gradient `{other}` (fd, adjoint)"))),
    };
    let init = match s.r.or("init", c.init.as_ref(), "random".to_string())?.as_str() {
        "random" => SearchInit::Random,
        "thermal" => SearchInit::Thermal,
        other => return Err(usage(format!("unknown --init `{other}` (random, thermal)"))),
    };
    let options = SearchOptions { gradient, init };
    let r = local_search_with(&spec, s0, dim, iterations, seed, &options)?;
    let status = if r.gap() < -SEARCH_TOLERANCE { "FINDING" } else { "PASS" };
    if status == "FINDING" {
        eprintln!("FINDING: search reached {:e} below the thermal value", -r.gap());
    }
    let mut table = Table::new(&SEARCH_COLUMNS);
    table.push(vec![
        num(r.output_entropy.nats()),
        num(r.baseline),
        num(r.gap()),
        r.iterations.to_string(),
        r.accepted_steps.to_string(),
        status.to_string(),
    ]);
    let report = SearchReport {
        spec,
        s0: s0.nats(),
        dim,
        seed,
        options,
        output_entropy: r.output_entropy.nats(),
        baseline: r.baseline,
        gap: r.gap(),
        iterations: r.iterations,
        accepted_steps: r.accepted_steps,
        status,
        state: r.state.probs().to_vec(),
    };
    s.finish(Report::new("verify", report, table)?)
}
