use serde::Serialize;

use moe_core::contravariant::{
    covariant_partner, decompose, min_output_entropy_contravariant, recompose,
    ConjugatorDecomposition, ContravariantParams,
};
use moe_core::verify::{verify_contravariant, VerificationReport, VerifyOptions};
use moe_core::ChannelParams;

use super::{require_entropy, Session};
use crate::args::ContravariantCommand;
use crate::error::CliResult;
use crate::output::{num, opt, Report, Table};

const DEFAULT_DIM: usize = 256;

pub const COLUMNS: [&str; 16] = [
    "tau",
    "y",
    "s0",
    "eta",
    "kappa",
    "quantum_limited",
    "partner_tau",
    "partner_y",
    "min_output_entropy",
    "recomposition_residual",
    "trials",
    "mc_min_value",
    "mc_min_gap",
    "violations",
    "entropy_error_budget",
    "status",
];

#[derive(Serialize)]
struct ContravariantResult {
    params: ContravariantParams,
    s0: f64,
    decomposition: ConjugatorDecomposition,
    quantum_limited: bool,
    partner: ChannelParams,
    min_output_entropy: f64,
    recomposed: ContravariantParams,
    /// Largest of `|Δτ|`, `|Δy|` after recomposing.
    recomposition_residual: f64,
    monte_carlo: Option<VerificationReport>,
}

pub fn run(c: ContravariantCommand) -> CliResult<()> {
    let mut s = Session::open(&c.common)?;
    let dim = s.dim(&c.common, DEFAULT_DIM)?;
    let tau: f64 = s.r.require("tau", c.tau.as_ref())?;
    let y: f64 = s.r.require("y", c.y.as_ref())?;
    let params = ContravariantParams::new(tau, y)?;
    let s0 = require_entropy(&mut s.r, &c.entropy)?;
    let trials: usize = s.r.or("trials", c.trials.as_ref(), 0)?;

    let decomposition = decompose(&params)?;
    let recomposed = recompose(&decomposition)?;
    let residual = (recomposed.tau - tau).abs().max((recomposed.y - y).abs());
    let min_entropy = min_output_entropy_contravariant(&params, s0)?.nats();
    let monte_carlo = if trials > 0 {
        let seed = s.seed(c.seed.as_ref())?;
        let options = VerifyOptions {
            dim,
            ..VerifyOptions::default()
        };
        Some(verify_contravariant(&params, s0, trials, seed, &options)?)
    } else {
        None
    };
    if let Some(r) = monte_carlo.as_ref().filter(|r| r.violations > 0) {
        eprintln!(
            "FINDING: {} violation(s), min gap {:e} at seed {}",
            r.violations, r.min_gap, r.argmin_seed
        );
    }

    let partner = covariant_partner(decomposition.kappa)?;
    let mc = monte_carlo.as_ref();
    let mut table = Table::new(&COLUMNS);
    table.push(vec![
        num(tau),
        num(y),
        num(s0.nats()),
        num(decomposition.eta),
        num(decomposition.kappa),
        params.is_quantum_limited().to_string(),
        num(partner.tau),
        num(partner.y),
        num(min_entropy),
        num(residual),
        trials.to_string(),
        opt(mc.and_then(|r| r.min_value)),
        opt(mc.map(|r| r.min_gap)),
        mc.map(|r| r.violations.to_string()).unwrap_or_default(),
        opt(mc.map(|r| r.entropy_error_budget)),
        mc.map(|r| if r.violations == 0 { "PASS" } else { "FINDING" })
            .unwrap_or_default()
            .to_string(),
    ]);
    let result = ContravariantResult {
        params,
        s0: s0.nats(),
        decomposition,
        quantum_limited: params.is_quantum_limited(),
        partner,
        min_output_entropy: min_entropy,
        recomposed,
        recomposition_residual: residual,
        monte_carlo,
    };
    s.finish(Report::new("contravariant", result, table)?)
}
