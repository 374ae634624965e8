use serde::Serialize;

use moe_core::verify::{verify_conjecture_finite_with, VerificationReport, VerifyOptions};
use moe_core::{g, g_inverse, LindbladSpec};

use super::{channel, channel_flag, require_entropy, Session, CHANNEL_KEYS};
use crate::args::SweepCommand;
use crate::error::{usage, CliResult};
use crate::output::{num, opt, Report, Table};

const DEFAULT_DIM: usize = 256;
const DEFAULT_TRIALS: usize = 200;

pub const COLUMNS: [&str; 12] = [
    "parameter",
    "value",
    "gamma_plus",
    "gamma_minus",
    "t",
    "nbar_out",
    "baseline",
    "min_gap",
    "violations",
    "excluded",
    "entropy_error_budget",
    "status",
];

/// `start:stop:step`, both ends included up to rounding of the step count.
pub fn parse_range(text: &str) -> CliResult<Vec<f64>> {
    let bad = || usage(format!("invalid range `{text}` (start:stop:step)"));
    let parts = text
        .split(':')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && stop >= start) {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(usage(format!("range `{text}` has {count} points")));
    }
    // Rounded so `1.1 + 2·0.1` prints as 1.3.
    Ok((0..count)
        .map(|i| {
            let v = start + i as f64 * step;
            format!("{v:.12e}").parse().unwrap_or(v)
        })
        .collect())
}

#[derive(Serialize)]
struct Point {
    value: f64,
    spec: LindbladSpec,
    nbar_out: f64,
    baseline: f64,
    report: Option<VerificationReport>,
}

#[derive(Serialize)]
struct SweepResult {
    parameter: &'static str,
    s0: f64,
    points: Vec<Point>,
}

pub fn run(c: SweepCommand) -> CliResult<()> {
    let mut s = Session::open(&c.common)?;
    let dim = s.dim(&c.common, DEFAULT_DIM)?;
    let ranged: Vec<&'static str> = CHANNEL_KEYS
        .iter()
        .copied()
        .filter(|k| {
            s.r.peek(k, channel_flag(&c.channel, k))
                .is_some_and(|v| v.contains(':'))
        })
        .collect();
    let key = match ranged[..] {
        [k] => k,
        [] => return Err(usage("sweep needs one channel option given as start:stop:step")),
        _ => return Err(usage("sweep takes exactly one ranged channel option")),
    };
    let range = s.r.raw(key, channel_flag(&c.channel, key)).expect("peeked");
    let values = parse_range(&range)?;
    let s0 = require_entropy(&mut s.r, &c.entropy)?;
    let seed: Option<u64> = s.r.get("seed", c.seed.as_ref())?;
    // Without a seed only the closed-form columns are computed.
    let default_trials = if seed.is_some() { DEFAULT_TRIALS } else { 0 };
    let trials: usize = s.r.or("trials", c.trials.as_ref(), default_trials)?;
    let seed = if trials > 0 { Some(s.seed(c.seed.as_ref())?) } else { None };
    let options = VerifyOptions {
        dim,
        ..VerifyOptions::default()
    };
    let nbar_in = g_inverse(s0);

    let mut points = Vec::with_capacity(values.len());
    let mut table = Table::new(&COLUMNS);
    for &value in &values {
        let spec = channel(&mut s.r, &c.channel, Some((key, value)))?
            .ok_or_else(|| usage("sweep needs --kind"))?;
        let nbar_out = spec.thermal_output_nbar(nbar_in)?;
        let baseline = g(nbar_out)?.nats();
        let report = match seed {
            Some(seed) => Some(verify_conjecture_finite_with(&spec, s0, trials, seed, &options)?),
            None => None,
        };
        table.push(vec![
            key.to_string(),
            num(value),
            num(spec.gamma_plus),
            num(spec.gamma_minus),
            num(spec.t),
            num(nbar_out),
            num(baseline),
            opt(report.as_ref().map(|r| r.min_gap)),
            report.as_ref().map(|r| r.violations.to_string()).unwrap_or_default(),
            report.as_ref().map(|r| r.excluded.to_string()).unwrap_or_default(),
            opt(report.as_ref().map(|r| r.entropy_error_budget)),
            report
                .as_ref()
                .map(|r| if r.violations == 0 { "PASS" } else { "FINDING" })
                .unwrap_or_default()
                .to_string(),
        ]);
        if let Some(r) = report.as_ref().filter(|r| r.violations > 0) {
            eprintln!(
                "FINDING: {key} = {value}: {} violation(s), min gap {:e} at seed {}",
                r.violations, r.min_gap, r.argmin_seed
            );
        }
        points.push(Point {
            value,
            spec,
            nbar_out,
            baseline,
            report,
        });
    }
    let result = SweepResult {
        parameter: key,
        s0: s0.nats(),
        points,
    };
    s.finish(Report::new("sweep", result, table)?)
}
