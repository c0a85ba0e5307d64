use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use macstate::region::SearchConfig;
use macstate::Channel;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Region,
    RegionConstrained,
    Fme,
    Sim,
    Compare,
    DeriveExamples,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Region => "region",
            Command::RegionConstrained => "region-constrained",
            Command::Fme => "fme",
            Command::Sim => "sim",
            Command::Compare => "compare",
            Command::DeriveExamples => "derive-examples",
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FmeSection {
    /// Text system to project; the block-Markov constraints when absent.
    pub system: Option<PathBuf>,
    #[serde(default = "default_eliminate")]
    pub eliminate: Vec<String>,
    /// Apply the chain-rule rewrites and drop redundant rows.
    #[serde(default = "yes")]
    pub simplify: bool,
}

fn default_eliminate() -> Vec<String> {
    vec!["R0".into(), "Rhat".into()]
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub a: PathBuf,
    pub b: PathBuf,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    0.025
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeriveSection {
    pub corpus: PathBuf,
    /// Defaults to `<corpus>/derived`.
    pub out: Option<PathBuf>,
}

/// One JSON experiment file. Paths inside it are relative to the file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub channel: Option<PathBuf>,
    pub search: Option<SearchConfig>,
    /// A simulation config without its `channel`; `factors` may be a path.
    /// Extra keys: `sweep` (list of rate quadruples) and `exact` (bool).
    pub sim: Option<Value>,
    pub fme: Option<FmeSection>,
    pub compare: Option<CompareSection>,
    pub derive: Option<DeriveSection>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub base: PathBuf,
}

/// Reads a JSON file, reporting the line and column of a syntax or field
/// error.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| anyhow!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let mut cfg: ExperimentConfig = read_json(path)?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn channel(&self) -> Result<Channel> {
        let p = self.channel.as_ref().ok_or_else(|| anyhow!("config needs a `channel` path"))?;
        read_json(&self.resolve(p))
    }

    pub fn search(&self) -> SearchConfig {
        let mut s = self.search.clone().unwrap_or_default();
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        s
    }

    pub fn section<'a, T>(&self, v: &'a Option<T>, name: &str) -> Result<&'a T> {
        match v {
            Some(x) => Ok(x),
            None => bail!("command needs a `{name}` section"),
        }
    }
}
