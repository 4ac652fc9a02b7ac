//! Configuration: `key = value` text files, the `SVE_CONFIG` environment
//! variable for a default path, and flag-over-file-over-default
//! precedence. The resolved values are echoed into every output for
//! provenance.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use sve_core::cut::TauOption;

pub const CONFIG_ENV: &str = "SVE_CONFIG";

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    map: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected 'key = value', got '{line}'", i + 1);
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { map })
    }

    /// Loads from an explicit path, else from `SVE_CONFIG`, else empty.
    pub fn load(flag: Option<&Path>) -> Result<ConfigFile> {
        let path = match flag {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_ENV).map(Into::into),
        };
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(&p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                ConfigFile::parse(&text)
            }
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }
}

/// Tracks final values for the provenance echo.
#[derive(Debug, Default, Clone)]
pub struct Resolved {
    values: BTreeMap<String, String>,
}

impl Resolved {
    /// flag > config file > default.
    pub fn pick<T: FromStr + ToString>(
        &mut self,
        cfg: &ConfigFile,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T> {
        let value = match flag {
            Some(v) => v,
            None => match cfg.get(key) {
                Some(raw) => raw
                    .parse()
                    .map_err(|_| anyhow::anyhow!("config key '{key}': bad value '{raw}'"))?,
                None => default,
            },
        };
        self.values.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

/// Tau selection shared by the explain and eval commands.
pub fn resolve_tau(
    resolved: &mut Resolved,
    cfg: &ConfigFile,
    option: Option<String>,
    c0: Option<u64>,
    scale: Option<u64>,
) -> Result<TauOption> {
    let name = match option {
        Some(v) => v,
        None => cfg.get("tau").unwrap_or("scale_invariant").to_string(),
    };
    let tau = match name.as_str() {
        "one" => TauOption::One,
        "inverse_gap" | "inverse-gap" => TauOption::InverseGap {
            scale: resolved.pick(cfg, "scale", scale, TauOption::DEFAULT_INVERSE_GAP_SCALE)?,
        },
        "scale_invariant" | "scale-invariant" => TauOption::ScaleInvariant {
            c0: resolved.pick(cfg, "c0", c0, TauOption::DEFAULT_C0)?,
        },
        other => bail!("unknown tau option '{other}'"),
    };
    resolved.note(
        "tau",
        match tau {
            TauOption::One => "one",
            TauOption::InverseGap { .. } => "inverse_gap",
            TauOption::ScaleInvariant { .. } => "scale_invariant",
        },
    );
    Ok(tau)
}
