use serde::Serialize;

use moe_core::channel::output_entropy_with;
use moe_core::critical::{find_critical_points, Branch, ScanConfig, ScanStatus};
use moe_core::{g, g_inverse, LindbladSpec, MoeError};

use super::{require_channel, require_entropy, Session};
use crate::args::CriticalCommand;
use crate::error::{CliError, CliResult};
use crate::output::{num, opt, Report, Table};

const DEFAULT_DIM: usize = 256;

/// Columns of the CSV report, one row per critical point.
pub const COLUMNS: [&str; 8] = [
    "branch",
    "mu",
    "entropy",
    "stationarity_residual",
    "output_entropy",
    "thermal_output_entropy",
    "output_gap",
    "ratios",
];

#[derive(Serialize)]
struct PointReport {
    branch: Branch,
    mu: f64,
    entropy: f64,
    stationarity_residual: f64,
    /// Absent when the output does not fit in the window.
    output_entropy: Option<f64>,
    output_gap: Option<f64>,
    ratios: Vec<f64>,
}

#[derive(Serialize)]
struct CriticalResult {
    spec: LindbladSpec,
    s0: f64,
    dim: usize,
    config: ScanConfig,
    status: ScanStatus,
    runs: usize,
    surviving_decreasing: usize,
    thermal_output_entropy: f64,
    points: Vec<PointReport>,
}

pub fn run(c: CriticalCommand) -> CliResult<()> {
    let mut s = Session::open(&c.common)?;
    let dim = s.dim(&c.common, DEFAULT_DIM)?;
    let spec = require_channel(&mut s.r, &c.channel)?;
    let s0 = require_entropy(&mut s.r, &c.entropy)?;
    let d = ScanConfig::default();
    let config = ScanConfig {
        mu_points: s.r.or("mu-points", c.mu_points.as_ref(), d.mu_points)?,
        z0_points: s.r.or("z0-points", c.z0_points.as_ref(), d.z0_points)?,
        n_max: s.r.or("n-max", c.n_max.as_ref(), d.n_max)?,
        max_runs: s.r.or("max-runs", c.max_runs.as_ref(), d.max_runs)?,
    };
    let scan = find_critical_points(spec.gamma_plus, spec.gamma_minus, s0, dim, &config)?;
    let thermal = g(spec.thermal_output_nbar(g_inverse(s0))?)?.nats();

    let mut points = Vec::with_capacity(scan.points.len());
    for point in &scan.points {
        let output = match output_entropy_with(&spec, point.distribution.as_fock(), Default::default()) {
            Ok(out) => Some(out.nats()),
            Err(MoeError::Truncation { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        points.push(PointReport {
            branch: point.branch,
            mu: point.mu,
            entropy: point.entropy.nats(),
            stationarity_residual: point.stationarity_residual,
            output_entropy: output,
            output_gap: output.map(|o| o - thermal),
            ratios: point.ratios.clone(),
        });
    }

    let mut table = Table::new(&COLUMNS);
    for p in &points {
        let branch = match p.branch {
            Branch::Geometric => "geometric",
            Branch::SuperExponential => "super_exponential",
        };
        table.push(vec![
            branch.to_string(),
            num(p.mu),
            num(p.entropy),
            num(p.stationarity_residual),
            opt(p.output_entropy),
            num(thermal),
            opt(p.output_gap),
            p.ratios.iter().map(|&z| num(z)).collect::<Vec<_>>().join(";"),
        ]);
    }
    let result = CriticalResult {
        spec,
        s0: s0.nats(),
        dim,
        config,
        status: scan.status,
        runs: scan.runs,
        surviving_decreasing: scan.surviving_decreasing,
        thermal_output_entropy: thermal,
        points,
    };
    let exhausted = scan.status == ScanStatus::BudgetExhausted;
    s.finish(Report::new("critical", result, table)?)?;
    if exhausted {
        return Err(CliError::Budget(format!(
            "scan budget of {} runs exhausted; points listed so far may be incomplete",
            config.max_runs
        )));
    }
    Ok(())
}
