//! Command arguments, doubling as the serialized run configuration.
//!
//! Every argument struct is both a clap parser and a serde record: the
//! flags are parsed, turned into JSON, overlaid with the `--config` file
//! (which wins), and parsed back. The merged record is what the manifest
//! echoes, so feeding a manifest back through `--config` repeats the run.

use std::path::Path;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use poissonbc_core::codingsim::Setting;
use poissonbc_core::{BlockInputModel, ChannelParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ConfigError;

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ChannelArgs {
    /// Attenuation of receiver y.
    #[arg(long = "ay", allow_negative_numbers = true, default_value_t = 1.0)]
    pub a_y: f64,
    /// Dark current of receiver y.
    #[arg(long = "ly", allow_negative_numbers = true, default_value_t = 0.1)]
    pub lambda_y: f64,
    #[arg(long = "az", allow_negative_numbers = true, default_value_t = 0.5)]
    pub a_z: f64,
    #[arg(long = "lz", allow_negative_numbers = true, default_value_t = 0.2)]
    pub lambda_z: f64,
}

impl ChannelArgs {
    pub fn params(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.a_y, self.lambda_y, self.a_z, self.lambda_z).map_err(|e| ConfigError(e.to_string()).into())
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Block length.
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    /// Auxiliary law; comma separated. Defaults to `alpha, 1 - alpha`.
    #[arg(long, value_delimiter = ',')]
    pub aux_probs: Option<Vec<f64>>,
    /// On-probability per auxiliary symbol; comma separated. Defaults to
    /// `p, q`.
    #[arg(long, value_delimiter = ',')]
    pub cond: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.4)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    pub p: f64,
    #[arg(long, default_value_t = 0.1)]
    pub q: f64,
}

impl ModelArgs {
    pub fn model(&self, n: usize) -> Result<BlockInputModel> {
        let aux = self.aux_probs.clone().unwrap_or_else(|| vec![self.alpha, 1.0 - self.alpha]);
        let cond = self.cond.clone().unwrap_or_else(|| vec![self.p, self.q]);
        BlockInputModel::new(self.tau, n, aux, cond).map_err(|e| ConfigError(e.to_string()).into())
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ResolutionArgs {
    /// Grid cells per unit parameter length; default 200 (bc) or 50 (dms).
    #[arg(long)]
    pub grid_cells: Option<usize>,
    #[arg(long, default_value_t = 181)]
    pub angles: usize,
    /// Refinement starts per angle.
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub resolution: ResolutionArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyKind {
    Identity,
    McInequality,
    Lln,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of blocks (identity and inequality checks).
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Block counts for the LLN table; comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CodesimArgs {
    #[arg(long, value_parser = parse_setting, default_value = "independent")]
    pub setting: Setting,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Block counts to sweep; comma separated.
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    pub ns: Vec<usize>,
    /// Private rate `R_y`, nats per unit time.
    #[arg(long)]
    pub ry: Option<f64>,
    /// Cloud rate `R_z` (or `R_0`), nats per unit time.
    #[arg(long)]
    pub rz: Option<f64>,
    /// Rates as this fraction of the model's targets, for any rate not
    /// given explicitly.
    #[arg(long, default_value_t = 0.8)]
    pub rate_fraction: f64,
    /// Threshold slacks; default `(C - R) / 2`.
    #[arg(long)]
    pub gamma_y: Option<f64>,
    #[arg(long)]
    pub gamma_z: Option<f64>,
    #[arg(long, default_value_t = 500)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Use one codebook for all trials instead of a fresh one per trial.
    #[arg(long)]
    pub fixed_codebook: bool,
    /// Cap on stored codeword symbols.
    #[arg(long, default_value_t = poissonbc_core::codingsim::DEFAULT_SYMBOL_CAP)]
    pub symbol_cap: u128,
}

fn parse_setting(s: &str) -> std::result::Result<Setting, String> {
    s.parse().map_err(|e: poissonbc_core::Error| e.to_string())
}

/// Overlays `overlay` onto `base`, recursing into objects.
pub fn merge(base: &mut Value, overlay: &Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

/// Reads a config file. A manifest is accepted too; its `config` member is
/// used.
pub fn load_overlay(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    if let Some(inner) = v.get_mut("config") {
        return Ok(inner.take());
    }
    Ok(v)
}

/// The run configuration recorded in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig<T> {
    pub command: String,
    pub bits: bool,
    pub format: OutputFormat,
    pub args: T,
}

impl<T: Serialize + DeserializeOwned> RunConfig<T> {
    /// Applies the overlay, if any, and checks that the command matches.
    pub fn resolve(self, overlay: Option<&Value>) -> Result<Self> {
        let Some(o) = overlay else {
            return Ok(self);
        };
        if let Some(cmd) = o.get("command").and_then(Value::as_str) {
            if cmd != self.command {
                return Err(ConfigError(format!("config is for '{cmd}', not '{}'", self.command)).into());
            }
        }
        let mut v = serde_json::to_value(&self)?;
        merge(&mut v, o);
        serde_json::from_value(v).map_err(|e| ConfigError(format!("config: {e}")).into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overlay_wins_and_recurses() {
        let mut base = json!({"a": 1, "b": {"c": 2, "d": 3}});
        merge(&mut base, &json!({"b": {"c": 5}, "e": true}));
        assert_eq!(base, json!({"a": 1, "b": {"c": 5, "d": 3}, "e": true}));
    }
}
