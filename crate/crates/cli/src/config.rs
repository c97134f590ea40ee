//! TOML experiment configs. Parameter vectors may be written as decimal
//! strings (`alpha = ["0.7", "1.3", "2.1"]`) so that they are parsed by the
//! same correctly rounded routine as command-line values.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::args::Boundary;
use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Spectrum,
    Gap,
    Chain,
    Diffusion,
    Poincare,
    Infinite,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::Gap => "gap",
            Kind::Chain => "chain",
            Kind::Diffusion => "diffusion",
            Kind::Poincare => "poincare",
            Kind::Infinite => "infinite",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Decimal {
    Text(String),
    Float(f64),
    Int(i64),
}

impl Decimal {
    pub fn to_text(&self) -> String {
        match self {
            Decimal::Text(s) => s.clone(),
            Decimal::Float(v) => v.to_string(),
            Decimal::Int(v) => v.to_string(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Word(String),
    Point(Vec<Decimal>),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub d_max: Option<u32>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainBlock {
    pub m: Option<u32>,
    pub relaxed: Option<bool>,
    pub perturb: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionBlock {
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub stride: Option<usize>,
    pub boundary: Option<Boundary>,
    pub paths: Option<usize>,
    pub x0: Option<StartSpec>,
    pub assert_stationary: Option<bool>,
    pub eigenfunction: Option<usize>,
    pub outer: Option<usize>,
    pub inner: Option<usize>,
    pub bootstrap: Option<usize>,
    pub t_start: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareBlock {
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfiniteBlock {
    pub c: Option<f64>,
    pub r: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub alpha_inf: Option<f64>,
    pub sizes: Option<Vec<usize>>,
    pub paths: Option<usize>,
    pub dt: Option<f64>,
    /// Starting point of the coupled runs.
    pub x: Option<Vec<f64>>,
    pub pairs: Option<Vec<(usize, usize)>>,
    pub horizons: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tolerance: Option<f64>,
    pub alpha: Option<Vec<Decimal>>,
    pub spectrum: Option<SpectrumBlock>,
    pub gap: Option<SpectrumBlock>,
    pub chain: Option<ChainBlock>,
    pub diffusion: Option<DiffusionBlock>,
    pub poincare: Option<PoincareBlock>,
    pub infinite: Option<InfiniteBlock>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))
    }

    fn blocks(&self) -> Vec<Kind> {
        [
            (self.spectrum.is_some(), Kind::Spectrum),
            (self.gap.is_some(), Kind::Gap),
            (self.chain.is_some(), Kind::Chain),
            (self.diffusion.is_some(), Kind::Diffusion),
            (self.poincare.is_some(), Kind::Poincare),
            (self.infinite.is_some(), Kind::Infinite),
        ]
        .into_iter()
        .filter_map(|(present, k)| present.then_some(k))
        .collect()
    }

    /// A config describes exactly one kind of experiment, and it must be the
    /// one the subcommand runs.
    pub fn check_kind(&self, wanted: Kind) -> Result<()> {
        let mut kinds = self.blocks();
        if let Some(k) = self.kind {
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
        match kinds.as_slice() {
            [] => Ok(()),
            [k] if *k == wanted => Ok(()),
            [k] => Err(CliError::validation(format!(
                "field `kind`: config describes a {} experiment, the command runs {}",
                k.name(),
                wanted.name()
            ))),
            many => Err(CliError::validation(format!(
                "field `kind`: config mixes experiment kinds {:?}",
                many.iter().map(|k| k.name()).collect::<Vec<_>>()
            ))),
        }
    }
}
