mod contravariant;
mod critical;
mod state;
mod sweep;
mod verify;

use std::path::PathBuf;

use moe_core::channel::{Engine, DEFAULT_RK_TOLERANCE};
use moe_core::{g, ChannelKind, ChannelParams, EntropyValue, LindbladSpec};

use crate::args::{ChannelArgs, Command, Common, EntropyArgs};
use crate::config::Resolver;
use crate::error::{usage, CliResult};
use crate::output::{self, Format, Report};

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Entropy(c) => state::entropy(c),
        Command::Thermal(c) => state::thermal(c),
        Command::Evolve(c) => state::evolve(c),
        Command::Derivative(c) => state::derivative(c),
        Command::Critical(c) => critical::run(c),
        Command::Verify(c) => verify::run(c),
        Command::Sweep(c) => sweep::run(c),
        Command::Contravariant(c) => contravariant::run(c),
    }
}

/// Resolver plus output destination for one invocation.
pub struct Session {
    pub r: Resolver,
    format: Format,
    output: Option<PathBuf>,
}

impl Session {
    pub fn open(common: &Common) -> CliResult<Self> {
        let mut r = Resolver::new(common.config.as_deref())?;
        let format = r.or("format", common.format.as_ref(), Format::Json)?;
        // The destination is not part of the run, so it is not echoed.
        let output = common
            .output
            .clone()
            .or_else(|| r.peek("output", None).map(PathBuf::from));
        Ok(Session { r, format, output })
    }

    pub fn dim(&mut self, common: &Common, default: usize) -> CliResult<usize> {
        let dim: usize = self.r.or("dim", common.dim.as_ref(), default)?;
        if dim == 0 {
            return Err(usage("--dim must be positive"));
        }
        Ok(dim)
    }

    pub fn seed(&mut self, flag: Option<&String>) -> CliResult<u64> {
        self.r
            .get("seed", flag)?
            .ok_or_else(|| usage("--seed is required for stochastic commands"))
    }

    pub fn finish(self, report: Report) -> CliResult<()> {
        let bytes = output::render(&report, &self.r, self.format)?;
        output::emit(&bytes, self.output.as_deref())
    }
}

const CHANNEL_KEYS: [&str; 8] = ["eta", "kappa", "noise", "gamma-plus", "gamma-minus", "t", "tau", "y"];

fn channel_flag<'a>(a: &'a ChannelArgs, key: &str) -> Option<&'a String> {
    match key {
        "eta" => a.eta.as_ref(),
        "kappa" => a.kappa.as_ref(),
        "noise" => a.noise.as_ref(),
        "gamma-plus" => a.gamma_plus.as_ref(),
        "gamma-minus" => a.gamma_minus.as_ref(),
        "t" => a.t.as_ref(),
        "tau" => a.tau.as_ref(),
        "y" => a.y.as_ref(),
        _ => None,
    }
}

/// A channel option pinned to one value of a sweep grid.
pub type Pinned = Option<(&'static str, f64)>;

fn channel_field(
    r: &mut Resolver,
    a: &ChannelArgs,
    key: &str,
    pinned: Pinned,
    default: Option<f64>,
) -> CliResult<Option<f64>> {
    if let Some((k, v)) = pinned {
        if k == key {
            return Ok(Some(v));
        }
    }
    match default {
        Some(d) => r.or(key, channel_flag(a, key), d).map(Some),
        None => r.get(key, channel_flag(a, key)),
    }
}

fn need(value: Option<f64>, kind: &str, key: &str) -> CliResult<f64> {
    value.ok_or_else(|| usage(format!("--kind {kind} needs --{key}")))
}

/// Channel from `--kind` and its parameters, or `None` when no kind is
/// given anywhere.
pub fn channel(r: &mut Resolver, a: &ChannelArgs, pinned: Pinned) -> CliResult<Option<LindbladSpec>> {
    let Some(kind) = r.raw("kind", a.kind.as_ref()) else {
        let stray = CHANNEL_KEYS
            .iter()
            .find(|k| channel_flag(a, k).is_some());
        if let Some(k) = stray {
            return Err(usage(format!("--{k} given without --kind")));
        }
        return Ok(None);
    };
    let mut field = |key: &str| channel_field(r, a, key, pinned, None);
    let spec = match kind.as_str() {
        "loss" => ChannelKind::Loss {
            eta: need(field("eta")?, &kind, "eta")?,
            noise: channel_field(r, a, "noise", pinned, Some(0.0))?.unwrap_or(0.0),
        }
        .lindblad()?,
        "amplifier" => ChannelKind::Amplifier {
            kappa: need(field("kappa")?, &kind, "kappa")?,
            noise: channel_field(r, a, "noise", pinned, Some(0.0))?.unwrap_or(0.0),
        }
        .lindblad()?,
        "additive" => ChannelKind::Additive {
            noise: need(field("noise")?, &kind, "noise")?,
        }
        .lindblad()?,
        "lindblad" => LindbladSpec::new(
            need(field("gamma-plus")?, &kind, "gamma-plus")?,
            need(field("gamma-minus")?, &kind, "gamma-minus")?,
            need(field("t")?, &kind, "t")?,
        )?,
        "params" => LindbladSpec::from_params(ChannelParams::new(
            need(field("tau")?, &kind, "tau")?,
            need(field("y")?, &kind, "y")?,
        )?)?,
        other => {
            return Err(usage(format!(
                "unknown --kind `{other}` (loss, amplifier, additive, lindblad, params)"
            )))
        }
    };
    Ok(Some(spec))
}

pub fn require_channel(r: &mut Resolver, a: &ChannelArgs) -> CliResult<LindbladSpec> {
    channel(r, a, None)?.ok_or_else(|| usage("missing required --kind"))
}

/// `--S0` in nats or `--S0-nbar` as a thermal mean; at most one.
pub fn entropy_target(r: &mut Resolver, a: &EntropyArgs) -> CliResult<Option<EntropyValue>> {
    let nats: Option<f64> = r.get("S0", a.s0.as_ref())?;
    let nbar: Option<f64> = r.get("S0-nbar", a.s0_nbar.as_ref())?;
    match (nats, nbar) {
        (Some(_), Some(_)) => Err(usage("give either --S0 or --S0-nbar, not both")),
        (Some(s), None) => Ok(Some(EntropyValue::new(s)?)),
        (None, Some(n)) => Ok(Some(g(n)?)),
        (None, None) => Ok(None),
    }
}

pub fn require_entropy(r: &mut Resolver, a: &EntropyArgs) -> CliResult<EntropyValue> {
    entropy_target(r, a)?.ok_or_else(|| usage("missing --S0 or --S0-nbar"))
}

pub fn engine(
    r: &mut Resolver,
    engine: Option<&String>,
    tolerance: Option<&String>,
) -> CliResult<Engine> {
    let name: String = r.or("engine", engine, "rk".to_string())?;
    match name.as_str() {
        "rk" => Ok(Engine::AdaptiveRk {
            tolerance: r.or("tolerance", tolerance, DEFAULT_RK_TOLERANCE)?,
        }),
        "dense" => Ok(Engine::DenseExponential),
        other => Err(usage(format!("unknown --engine `{other}` (rk, dense)"))),
    }
}
