//! Run configuration: a TOML file with `[network]` and `[agent]` sections.
//!
//! Every key may be overridden from the environment as
//! `SEMSHARD_<SECTION>_<KEY>`, e.g. `SEMSHARD_AGENT_DISCOUNT=0.9`. An empty
//! file (or no file) yields the case-study defaults.
//!
//! The canonical form used for hashing lists every resolved key as
//! `section.key = value`, sorted, one per line, so the hash does not depend on
//! key order or on which values were left at their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use semshard_core::dqn::Hyperparameters;
use semshard_core::{Error as CoreError, NetworkConfig};

use crate::error::{CliError, Result};

pub const ENV_PREFIX: &str = "SEMSHARD_";
const SECTIONS: [&str; 2] = ["network", "agent"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkConfig,
    pub agent: Hyperparameters,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let section = |prefix: &str, e: CoreError| match e {
            CoreError::InvalidConfig { key, reason } => {
                CliError::config(format!("{prefix}.{key}"), reason)
            }
            other => CliError::Core(other),
        };
        self.network.validate().map_err(|e| section("network", e))?;
        self.agent.validate().map_err(|e| section("agent", e))?;
        if i64::try_from(self.network.seed).is_err() {
            return Err(CliError::config(
                "network.seed",
                "must fit in a signed 64-bit integer",
            ));
        }
        Ok(())
    }

    /// Parse TOML text, apply overrides, and validate.
    pub fn from_toml_with_overrides<I>(text: &str, overrides: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::config("<file>", e.message().to_string()))?;
        apply_overrides(&mut table, overrides)?;
        let cfg: RunConfig =
            serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
                let key = e.path().to_string();
                CliError::config(key, e.into_inner().to_string())
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load from an optional file plus the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|source| CliError::Unreadable {
                path: p.to_path_buf(),
                source,
            })?,
            None => String::new(),
        };
        Self::from_toml_with_overrides(&text, std::env::vars())
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("config serializes to a TOML table")
    }

    pub fn canonical(&self) -> String {
        let mut lines = Vec::new();
        for (section, body) in self.to_table() {
            if let toml::Value::Table(fields) = body {
                for (key, value) in fields {
                    lines.push(format!("{section}.{key} = {value}"));
                }
            }
        }
        lines.sort();
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    /// Hex SHA-256 of `"config <len>\0" ‖ canonical`.
    pub fn content_hash(&self) -> String {
        let body = self.canonical();
        let mut h = Sha256::new();
        h.update(format!("config {}\0", body.len()));
        h.update(body);
        hex::encode(h.finalize())
    }
}

fn parse_override_value(raw: &str) -> toml::Value {
    let probe = format!("v = {raw}");
    match probe.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("probe key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_overrides<I>(table: &mut toml::Table, overrides: I) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    for (var, raw) in overrides {
        let Some(rest) = var.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let rest = rest.to_ascii_lowercase();
        let Some((section, key)) = SECTIONS.iter().find_map(|s| {
            rest.strip_prefix(s)
                .and_then(|k| k.strip_prefix('_'))
                .map(|k| (*s, k))
        }) else {
            return Err(CliError::config(
                var.clone(),
                "override names no known config section",
            ));
        };
        let entry = table
            .entry(section)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let toml::Value::Table(fields) = entry else {
            return Err(CliError::config(section, "must be a table"));
        };
        fields.insert(key.to_string(), parse_override_value(&raw));
    }
    Ok(())
}
