//! Grid arguments: `start:stop:step` (endpoints inclusive within 1e-12),
//! a comma list, or a single value.

use clap::{Args, ValueEnum};
use gkp_core::{ChannelKind, ChannelSpec};

use crate::error::CliError;

const ENDPOINT_TOL: f64 = 1e-12;
const MAX_POINTS: usize = 1_000_000;

pub fn parse_grid(text: &str, allow_inf: bool) -> Result<Vec<f64>, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(CliError::usage("empty grid"));
    }
    let out = if text.contains(':') {
        parse_range(text)?
    } else {
        text.split(',').map(|s| parse_value(s, allow_inf)).collect::<Result<Vec<_>, _>>()?
    };
    if out.is_empty() {
        return Err(CliError::usage(format!("grid '{text}' has no points")));
    }
    Ok(out)
}

fn parse_value(s: &str, allow_inf: bool) -> Result<f64, CliError> {
    let s = s.trim();
    if allow_inf && s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::usage(format!("invalid grid value '{s}'"))),
    }
}

fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, h] = parts[..] else {
        return Err(CliError::usage(format!("range '{text}' must be start:stop:step")));
    };
    let (start, stop, step) = (parse_value(a, false)?, parse_value(b, false)?, parse_value(h, false)?);
    if !(step > 0.0) {
        return Err(CliError::usage(format!("range step must be positive, got {step}")));
    }
    if stop < start {
        return Ok(Vec::new());
    }
    let span = (stop - start) / step;
    let n = (span + ENDPOINT_TOL * span.abs().max(1.0)).floor();
    if n >= MAX_POINTS as f64 {
        return Err(CliError::usage(format!("range '{text}' has too many points")));
    }
    // index-based so the values do not accumulate rounding
    Ok((0..=n as usize).map(|i| start + i as f64 * step).collect())
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Channel {
    Loss,
    Amp,
}

/// Channel kind with its strength grid.
#[derive(Args)]
pub struct ChannelArgs {
    #[arg(long, value_enum, default_value = "loss")]
    pub channel: Channel,
    /// Loss-rate grid for `--channel loss`.
    #[arg(long, conflicts_with = "gain")]
    pub gamma: Option<String>,
    /// Gain grid for `--channel amp`.
    #[arg(long)]
    pub gain: Option<String>,
}

impl ChannelArgs {
    pub fn channels(&self) -> Result<Vec<ChannelSpec>, CliError> {
        let (kind, grid) = match (self.channel, &self.gamma, &self.gain) {
            (Channel::Loss, Some(g), None) => (ChannelKind::Loss, g),
            (Channel::Amp, None, Some(g)) => (ChannelKind::Amp, g),
            (Channel::Loss, _, _) => return Err(CliError::usage("--channel loss needs --gamma")),
            (Channel::Amp, _, _) => return Err(CliError::usage("--channel amp needs --gain")),
        };
        parse_grid(grid, false)?
            .into_iter()
            .map(|v| ChannelSpec::new(kind, v).map_err(|e| CliError::usage(e.to_string())))
            .collect()
    }
}
