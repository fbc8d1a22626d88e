//! Parsing of channel files, distortion arguments, and simulation configs.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rdl_core::frontier::DistortionSpec;
use rdl_core::model::{load_model, parse_model, AuxChannel, DecimalNum, JointPmf3, SourceModel, Var};
use rdl_core::regions_discrete::{Decoder, DistortionMatrix};
use serde::Deserialize;

pub fn read_model(path: &Path) -> Result<SourceModel> {
    load_model(path).with_context(|| format!("loading model {}", path.display()))
}

pub fn discrete(model: SourceModel, what: &str) -> Result<JointPmf3> {
    match model {
        SourceModel::Discrete(m) => Ok(m),
        SourceModel::Gaussian(_) => bail!("{what} needs a discrete model"),
    }
}

/// A channel as written in JSON: conditioning variables plus one row per
/// input cell, row-major over the inputs.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub inputs: Vec<Var>,
    pub rows: Vec<Vec<DecimalNum>>,
}

impl ChannelSpec {
    /// Builds the channel, taking input sizes from the model and from the
    /// already-built auxiliaries.
    pub fn build(&self, model: &JointPmf3, u: Option<&AuxChannel>, v: Option<&AuxChannel>) -> Result<AuxChannel> {
        let [nx, ny, nz] = model.sizes();
        let dims = self
            .inputs
            .iter()
            .map(|var| match var {
                Var::X => Ok(nx),
                Var::Y => Ok(ny),
                Var::Z => Ok(nz),
                Var::U => u.map(AuxChannel::aux_size).ok_or_else(|| anyhow!("channel conditions on U but no U is given")),
                Var::V => v.map(AuxChannel::aux_size).ok_or_else(|| anyhow!("channel conditions on V but no V is given")),
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(DecimalNum::value).collect::<rdl_core::Result<Vec<_>>>())
            .collect::<rdl_core::Result<Vec<_>>>()?;
        Ok(AuxChannel::from_rows(self.inputs.clone(), dims, &rows)?)
    }
}

/// Auxiliary channels and an optional reconstruction table for `region eval`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub u: Option<ChannelSpec>,
    pub v: Option<ChannelSpec>,
    pub xhat: Option<ChannelSpec>,
    pub g: Option<Vec<usize>>,
}

pub fn read_channels(path: &Path) -> Result<ChannelFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing channel file {}", path.display()))
}

/// Distortion measure: a name or an explicit `|X| × |X̂|` table.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum DistortionArg {
    Named(String),
    Table { rows: Vec<Vec<DecimalNum>> },
}

impl Default for DistortionArg {
    fn default() -> Self {
        DistortionArg::Named("logloss".into())
    }
}

impl DistortionArg {
    /// Reads a command-line value: `logloss`, `hamming`, or a JSON file path.
    pub fn from_flag(s: &str) -> Result<Self> {
        match s {
            "logloss" | "hamming" => Ok(DistortionArg::Named(s.into())),
            path => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading distortion file {path}"))?;
                let d: DistortionArg =
                    serde_json::from_str(&text).with_context(|| format!("parsing distortion file {path}"))?;
                Ok(d)
            }
        }
    }

    pub fn spec(&self, x_size: usize) -> Result<DistortionSpec> {
        match self {
            DistortionArg::Named(n) if n == "logloss" => Ok(DistortionSpec::LogLoss),
            DistortionArg::Named(n) if n == "hamming" => Ok(DistortionSpec::Matrix(DistortionMatrix::hamming(x_size))),
            DistortionArg::Named(n) => bail!("unknown distortion {n:?} (expected logloss, hamming, or a table)"),
            DistortionArg::Table { rows } => {
                let rows = rows
                    .iter()
                    .map(|r| r.iter().map(DecimalNum::value).collect::<rdl_core::Result<Vec<_>>>())
                    .collect::<rdl_core::Result<Vec<_>>>()?;
                let m = DistortionMatrix::from_rows(&rows)?;
                if m.x_size() != x_size {
                    bail!("distortion table has {} rows, |X| = {x_size}", m.x_size());
                }
                Ok(DistortionSpec::Matrix(m))
            }
        }
    }

    pub fn matrix(&self, x_size: usize) -> Result<DistortionMatrix> {
        match self.spec(x_size)? {
            DistortionSpec::Matrix(m) => Ok(m),
            DistortionSpec::LogLoss => bail!("this command needs a distortion table, not logloss"),
        }
    }

    /// Decoder for corner evaluation: a fixed table when `g` is given,
    /// otherwise the per-cell optimum.
    pub fn decoder(&self, x_size: usize, g: Option<&Vec<usize>>) -> Result<Decoder> {
        Ok(match (self.spec(x_size)?, g) {
            (DistortionSpec::LogLoss, None) => Decoder::LogLoss,
            (DistortionSpec::LogLoss, Some(_)) => bail!("a reconstruction table g needs a distortion table"),
            (DistortionSpec::Matrix(m), None) => Decoder::Argmin(m),
            (DistortionSpec::Matrix(m), Some(g)) => Decoder::Table {
                g: g.clone(),
                distortion: m,
            },
        })
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    OneSided,
    Forwarding,
    Keyed,
}

/// Model given inline or as a path relative to the config file.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Path(PathBuf),
    Inline(serde_json::Value),
}

/// Simulator configuration file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scheme: SchemeKind,
    pub model: ModelRef,
    /// Setting for forwarding and keyed schemes, e.g. `tri-a`.
    pub setting: Option<String>,
    pub u: Option<ChannelSpec>,
    pub v: ChannelSpec,
    #[serde(default)]
    pub distortion: Option<DistortionArg>,
    pub g: Option<Vec<usize>>,
    pub r1: f64,
    pub r2: Option<f64>,
    pub r3: Option<f64>,
    pub key: Option<rdl_core::schemesim::KeyConfig>,
    pub n: usize,
    pub trials: usize,
    pub eps: Option<f64>,
    pub chunk: Option<usize>,
    pub max_codebook_bits: Option<u32>,
    #[serde(default)]
    pub exact_leakage: bool,
}

impl SimConfig {
    pub fn model(&self, base: &Path) -> Result<JointPmf3> {
        let m = match &self.model {
            ModelRef::Path(p) => read_model(&base.join(p))?,
            ModelRef::Inline(v) => parse_model(&v.to_string()).context("parsing inline model")?,
        };
        discrete(m, "simulation")
    }

    /// Distortion table; Hamming when absent.
    pub fn distortion(&self, x_size: usize) -> Result<DistortionMatrix> {
        self.distortion
            .clone()
            .unwrap_or(DistortionArg::Named("hamming".into()))
            .matrix(x_size)
    }
}
