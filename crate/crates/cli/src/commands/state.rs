use serde::Serialize;

use moe_core::channel::{output_entropy_with, thermal_entropy_rate, EntropyRate, OutputEntropy};
use moe_core::fock::{sample_passive_on_support, thermal_distribution};
use moe_core::{
    entropy_derivative_at_zero, evolve_with, g, g_inverse, shannon_entropy, FockDistribution,
};

use super::{engine, entropy_target, require_channel, channel, Session};
use crate::args::{StateCommand, ThermalCommand};
use crate::error::{usage, CliResult};
use crate::output::{num, opt, Report, Table};

const DEFAULT_DIM: usize = 256;

/// Input from exactly one of `--thermal`, `--state`, `--weights`, or
/// `--S0`/`--S0-nbar` with `--seed`.
fn input_state(s: &mut Session, c: &StateCommand, dim: usize) -> CliResult<FockDistribution> {
    let thermal: Option<f64> = s.r.get("thermal", c.thermal.as_ref())?;
    let named = s.r.raw("state", c.state.as_ref());
    let weights = s.r.raw("weights", c.weights.as_ref());
    let target = entropy_target(&mut s.r, &c.entropy)?;
    let given = [thermal.is_some(), named.is_some(), weights.is_some(), target.is_some()];
    match given.iter().filter(|&&b| b).count() {
        0 => return Err(usage("give an input: --thermal, --state, --weights, --S0 or --S0-nbar")),
        1 => {}
        _ => return Err(usage("give only one of --thermal, --state, --weights, --S0/--S0-nbar")),
    }
    if let Some(nbar) = thermal {
        return Ok(thermal_distribution(nbar, dim)?.into_fock());
    }
    if let Some(name) = named {
        return named_state(&name, dim);
    }
    if let Some(list) = weights {
        let mut w = list
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| usage(format!("invalid --weights `{list}`")))?;
        if w.len() > dim {
            return Err(usage(format!("{} weights exceed --dim {dim}", w.len())));
        }
        w.resize(dim, 0.0);
        return Ok(FockDistribution::from_weights(&w)?);
    }
    let s0 = target.expect("one source given");
    let seed = s.seed(c.seed.as_ref())?;
    let support: usize = s.r.or("support", c.support.as_ref(), dim)?;
    Ok(sample_passive_on_support(s0, dim, support, seed)?.into_fock())
}

fn named_state(name: &str, dim: usize) -> CliResult<FockDistribution> {
    let level = |prefix: &str| -> CliResult<usize> {
        name[prefix.len()..]
            .parse()
            .map_err(|_| usage(format!("invalid --state `{name}`")))
    };
    if name == "delta0" {
        Ok(FockDistribution::fock_state(0, dim)?)
    } else if name.starts_with("fock:") {
        Ok(FockDistribution::fock_state(level("fock:")?, dim)?)
    } else if name.starts_with("uniform:") {
        let top = level("uniform:")?;
        if top >= dim {
            return Err(usage(format!("--state {name} does not fit in --dim {dim}")));
        }
        let mut w = vec![0.0; dim];
        w[..=top].fill(1.0);
        Ok(FockDistribution::from_weights(&w)?)
    } else {
        Err(usage(format!("unknown --state `{name}` (delta0, fock:N, uniform:N)")))
    }
}

#[derive(Serialize)]
struct EntropyResult {
    input_entropy: f64,
    input_tail_bound: f64,
    output: Option<OutputEntropy>,
}

pub fn entropy(c: StateCommand) -> CliResult<()> {
    let mut s = Session::open(&c.common)?;
    let dim = s.dim(&c.common, DEFAULT_DIM)?;
    let spec = channel(&mut s.r, &c.channel, None)?;
    let engine = engine(&mut s.r, c.engine.as_ref(), c.tolerance.as_ref())?;
    let p = input_state(&mut s, &c, dim)?;
    let output = spec
        .map(|spec| output_entropy_with(&spec, &p, engine))
        .transpose()?;
    let result = EntropyResult {
        input_entropy: shannon_entropy(&p)?.nats(),
        input_tail_bound: p.tail_bound(),
        output,
    };
    let mut table = Table::new(&[
        "input_entropy",
        "input_tail_bound",
        "output_entropy",
        "output_error_budget",
        "output_tail_bound",
    ]);
    table.push(vec![
        num(result.input_entropy),
        num(result.input_tail_bound),
        opt(output.map(|o| o.nats())),
        opt(output.map(|o| o.error_budget)),
        opt(output.map(|o| o.tail_bound)),
    ]);
    s.finish(Report::new("entropy", result, table)?)
}

fn distribution_table(p: &FockDistribution) -> Table {
    let mut table = Table::new(&["n", "p_n"]);
    for (n, &x) in p.probs().iter().enumerate() {
        table.push(vec![n.to_string(), num(x)]);
    }
    table
}

#[derive(Serialize)]
struct Distribution<'a> {
    dim: usize,
    mean_photon_number: f64,
    entropy: f64,
    tail_bound: f64,
    probabilities: &'a [f64],
}

impl<'a> Distribution<'a> {
    fn of(p: &'a FockDistribution) -> CliResult<Self> {
        Ok(Distribution {
            dim: p.dim(),
            mean_photon_number: p.mean_photon_number(),
            entropy: shannon_entropy(p)?.nats(),
            tail_bound: p.tail_bound(),
            probabilities: p.probs(),
        })
    }
}

#[derive(Serialize)]
struct ThermalOutput {
    nbar: f64,
    entropy: f64,
    numerical: OutputEntropy,
}

#[derive(Serialize)]
struct ThermalResult<'a> {
    nbar: f64,
    entropy: f64,
    distribution: Distribution<'a>,
    output: Option<ThermalOutput>,
}

pub fn thermal(c: ThermalCommand) -> CliResult<()> {
    let mut s = Session::open(&c.common)?;
    let dim = s.dim(&c.common, DEFAULT_DIM)?;
    let spec = channel(&mut s.r, &c.channel, None)?;
    let nbar_flag: Option<f64> = s.r.get("nbar", c.nbar.as_ref())?;
    let target = entropy_target(&mut s.r, &c.entropy)?;
    let nbar = match (nbar_flag, target) {
        (Some(n), None) => n,
        (None, Some(s0)) => g_inverse(s0),
        (None, None) => return Err(usage("give --nbar, --S0 or --S0-nbar")),
        _ => return Err(usage("give only one of --nbar, --S0/--S0-nbar")),
    };
    let p = thermal_distribution(nbar, dim)?.into_fock();
    let output = match spec {
        Some(spec) => {
            let out_nbar = spec.thermal_output_nbar(nbar)?;
            Some(ThermalOutput {
                nbar: out_nbar,
                entropy: g(out_nbar)?.nats(),
                numerical: output_entropy_with(&spec, &p, Default::default())?,
            })
        }
        None => None,
    };
    let table = distribution_table(&p);
    let result = ThermalResult {
        nbar,
        entropy: g(nbar)?.nats(),
        distribution: Distribution::of(&p)?,
        output,
    };
    s.finish(Report::new("thermal", result, table)?)
}

#[derive(Serialize)]
struct EvolveResult<'a> {
    input: Distribution<'a>,
    output: Distribution<'a>,
    output_entropy: OutputEntropy,
}

pub fn evolve(c: StateCommand) -> CliResult<()> {
    let mut s = Session::open(&c.common)?;
    let dim = s.dim(&c.common, DEFAULT_DIM)?;
    let spec = require_channel(&mut s.r, &c.channel)?;
    let engine = engine(&mut s.r, c.engine.as_ref(), c.tolerance.as_ref())?;
    let p = input_state(&mut s, &c, dim)?;
    let out = evolve_with(&spec, &p, engine)?;
    let table = distribution_table(&out);
    let result = EvolveResult {
        input: Distribution::of(&p)?,
        output: Distribution::of(&out)?,
        output_entropy: output_entropy_with(&spec, &p, engine)?,
    };
    s.finish(Report::new("evolve", result, table)?)
}

#[derive(Serialize)]
struct DerivativeResult {
    status: &'static str,
    rate: EntropyRate,
    input_entropy: f64,
    /// Closed-form rate of the thermal input with the same entropy.
    thermal_rate: Option<EntropyRate>,
}

pub fn derivative(c: StateCommand) -> CliResult<()> {
    let mut s = Session::open(&c.common)?;
    let dim = s.dim(&c.common, DEFAULT_DIM)?;
    let spec = require_channel(&mut s.r, &c.channel)?;
    let p = input_state(&mut s, &c, dim)?;
    let rate = entropy_derivative_at_zero(&spec, &p);
    let h = shannon_entropy(&p)?;
    let thermal_rate = (h.nats() > 0.0).then(|| thermal_entropy_rate(&spec, g_inverse(h)));
    let status = if rate.is_divergent() { "DIVERGENT" } else { "FINITE" };
    let mut table = Table::new(&["status", "rate", "error_budget", "input_entropy", "thermal_rate"]);
    let (value, budget) = match rate {
        EntropyRate::Finite { rate, error_budget } => (num(rate), num(error_budget)),
        EntropyRate::Divergent => (num(f64::INFINITY), String::new()),
    };
    table.push(vec![
        status.to_string(),
        value,
        budget,
        num(h.nats()),
        opt(thermal_rate.and_then(|r| r.finite())),
    ]);
    let result = DerivativeResult {
        status,
        rate,
        input_entropy: h.nats(),
        thermal_rate,
    };
    s.finish(Report::new("derivative", result, table)?)
}
