use std::io::Write;

use semshard_core::throughput::{round_latency, throughput, LatencyBreakdown, RoundConditions};
use semshard_core::{Error as CoreError, NetworkConfig, ShardingState, MEGABYTE_BITS};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalArgs {
    pub shards: usize,
    pub message_bits: u64,
    pub nodes: usize,
    pub rate: f64,
    pub semantic_time: f64,
    pub reconfigured: bool,
}

fn split_unit(text: &str) -> (&str, &str) {
    let at = text
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-')))
        .unwrap_or(text.len());
    (text[..at].trim(), text[at..].trim())
}

fn number(text: &str, what: &str) -> Result<f64> {
    let value: f64 = text
        .parse()
        .map_err(|_| CliError::Usage(format!("{what}: cannot parse `{text}`")))?;
    if !value.is_finite() || value < 0.0 {
        return Err(CliError::Usage(format!(
            "{what}: `{text}` is not a non-negative number"
        )));
    }
    Ok(value)
}

/// Message size in bits. Bare numbers are bits; `b`/`kb`/`Mb` are bits,
/// `B`/`KB`/`MB` are bytes with `1 MB = 8·10⁶` bits.
pub fn parse_size(text: &str) -> Result<u64> {
    let (num, unit) = split_unit(text);
    let value = number(num, "--msg-size")?;
    let scale = match unit {
        "" | "b" | "bit" | "bits" => 1.0,
        "kb" | "Kb" => 1e3,
        "Mb" => 1e6,
        "B" => 8.0,
        "KB" | "kB" => 8e3,
        "MB" => MEGABYTE_BITS as f64,
        _ => {
            return Err(CliError::Usage(format!(
                "--msg-size: unknown unit `{unit}`"
            )))
        }
    };
    let bits = value * scale;
    if bits.fract() != 0.0 {
        return Err(CliError::Usage(format!(
            "--msg-size: `{text}` is not a whole number of bits"
        )));
    }
    Ok(bits as u64)
}

/// Rate in bits per second: bare numbers or `bps`, `kbps`, `Mbps`, `Gbps`.
pub fn parse_rate(text: &str) -> Result<f64> {
    let (num, unit) = split_unit(text);
    let value = number(num, "--rate")?;
    let scale = match unit {
        "" | "bps" => 1.0,
        "kbps" | "Kbps" => 1e3,
        "Mbps" => 1e6,
        "Gbps" => 1e9,
        _ => return Err(CliError::Usage(format!("--rate: unknown unit `{unit}`"))),
    };
    let rate = value * scale;
    if rate <= 0.0 {
        return Err(CliError::Usage("--rate: must be positive".into()));
    }
    Ok(rate)
}

pub fn evaluate(
    args: &EvalArgs,
    cfg: &NetworkConfig,
) -> Result<(ShardingState, LatencyBreakdown, f64)> {
    let state = ShardingState::new(args.nodes, args.shards, args.message_bits, 0, cfg).map_err(
        |e| match e {
            CoreError::InvalidSharding(msg) => CliError::Usage(format!("invalid sharding: {msg}")),
            other => other.into(),
        },
    )?;
    let cond = RoundConditions {
        rate: args.rate,
        semantic_time: args.semantic_time,
        reconfigured: args.reconfigured,
    };
    let lat = round_latency(&state, &cond, cfg);
    let tps = throughput(&state, &lat, cfg);
    Ok((state, lat, tps))
}

/// `eval-throughput` subcommand.
pub fn cmd_eval_throughput(
    args: &EvalArgs,
    cfg: &NetworkConfig,
    out: &mut impl Write,
) -> Result<()> {
    let (state, lat, tps) = evaluate(args, cfg)?;
    let sizes = state.shard_sizes();
    let text = format!(
        "shards        {}\n\
         shard_sizes   {}..{}\n\
         message_bits  {}\n\
         t_config      {:.9}\n\
         t_prop        {:.9}\n\
         t_intra       {:.9}\n\
         t_inter       {:.9}\n\
         t_round       {:.9}\n\
         tps           {:.9}\n",
        state.num_shards(),
        sizes.iter().min().unwrap_or(&0),
        state.largest_shard(),
        state.message_size(),
        lat.t_config,
        lat.t_prop,
        lat.t_intra,
        lat.t_inter,
        lat.t_round,
        tps,
    );
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Unwritable {
            path: "<stdout>".into(),
            source: e,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_rates() {
        assert_eq!(parse_size("1MB").unwrap(), 8_000_000);
        assert_eq!(parse_size("0.1MB").unwrap(), 800_000);
        assert_eq!(parse_size("800000").unwrap(), 800_000);
        assert_eq!(parse_size("8Mb").unwrap(), 8_000_000);
        assert!(parse_size("1XB").is_err());
        assert_eq!(parse_rate("10Mbps").unwrap(), 1e7);
        assert_eq!(parse_rate("1e8").unwrap(), 1e8);
        assert!(parse_rate("0").is_err());
    }

    #[test]
    fn invalid_sharding_is_usage() {
        let args = EvalArgs {
            shards: 30,
            message_bits: 8_000_000,
            nodes: 100,
            rate: 1e7,
            semantic_time: 20.0,
            reconfigured: true,
        };
        let err = evaluate(&args, &NetworkConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
