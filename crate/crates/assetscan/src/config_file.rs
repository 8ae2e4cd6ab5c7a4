// SPDX-License-Identifier: Apache-2.0

//! The TOML family configuration format.
//!
//! ```toml
//! version = 1
//! family = "crypto"            # builtin name or any custom label
//! global_exclusions = ["clk", "clock", "rst", "reset"]   # optional
//!
//! [[groups]]
//! name = "enable"
//! fragments = ["en"]
//! exclude_fragments = ["end"]  # optional
//! expected_directions = ["input", "net"]
//! expected_width_classes = ["single"]
//! objectives = ["availability"]
//!
//! [[rules]]                    # optional for builtin families
//! name = "crypto-control"
//! require_groups = ["enable"]
//! require_patterns = ["control"]
//! require_directions = ["input", "inout", "net"]
//! min_width_bits = 1
//! max_width_bits = 1           # optional, unbounded when absent
//! assign_objectives = ["availability"]
//! ```
//!
//! Omitted `global_exclusions` default to clock/reset names plus the Verilog
//! reserved words. Omitted rules on a builtin family take its bundled rules.

use std::fs;
use std::path::Path;

use assetscan_core::config::{builtin_config, default_exclusions, ConfigError, FamilyConfig, IpFamily, PartialKeywordGroup};
use assetscan_core::rules::{default_rules, ClassificationRule};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    version: u32,
    family: IpFamily,
    #[serde(default = "default_exclusions")]
    global_exclusions: Vec<String>,
    groups: Vec<PartialKeywordGroup>,
    #[serde(default)]
    rules: Vec<ClassificationRule>,
}

pub fn parse_config(text: &str, path: &Path) -> Result<FamilyConfig> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| Error::ConfigFile { path: path.to_path_buf(), message: e.to_string().trim_end().into() })?;
    if file.version != CONFIG_VERSION {
        return Err(Error::ConfigFile {
            path: path.to_path_buf(),
            message: format!("unsupported version {}; expected {CONFIG_VERSION}", file.version),
        });
    }
    let rules = if file.rules.is_empty() && IpFamily::builtin(file.family.as_str()).is_some() {
        default_rules(file.family.as_str())?
    } else {
        file.rules
    };
    let config = FamilyConfig { family: file.family, groups: file.groups, global_exclusions: file.global_exclusions, rules };
    config.validate()?;
    Ok(config)
}

pub fn load_config_file(path: &Path) -> Result<FamilyConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

/// A builtin family name, or a path to a configuration file.
pub fn load_family_config(spec: &str) -> Result<FamilyConfig> {
    if IpFamily::builtin(spec).is_some() {
        return Ok(builtin_config(spec)?);
    }
    let path = Path::new(spec);
    if path.is_file() {
        return load_config_file(path);
    }
    Err(Error::Config(ConfigError::UnknownFamily(spec.into())))
}

pub fn config_to_toml(config: &FamilyConfig) -> Result<String> {
    let file = ConfigFile {
        version: CONFIG_VERSION,
        family: config.family.clone(),
        global_exclusions: config.global_exclusions.clone(),
        groups: config.groups.clone(),
        rules: config.rules.clone(),
    };
    toml::to_string_pretty(&file).map_err(|e| Error::Serialize(e.to_string()))
}
