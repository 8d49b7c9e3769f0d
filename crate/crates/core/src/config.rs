//! Run configuration: a JSON document validated before any computation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusSpec;
use crate::error::{Error, Result};
use crate::grid::GridBox;
use crate::selfcheck::{CorpusSizes, Perturbation, SelfcheckConfig};
use crate::spaces::KernelProfile;
use crate::tolerance::Tolerances;
use crate::wavelet::{load_filter, FilterPair, DEFAULT_FILTER};

/// Origin and side of the working box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub origin: Vec<f64>,
    pub side: f64,
}

fn default_filter() -> String {
    DEFAULT_FILTER.to_string()
}
fn default_finest() -> i32 {
    10
}
fn default_corpus_size() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_filter")]
    pub filter: String,
    /// Finest level of generated grids.
    #[serde(default = "default_finest", rename = "J")]
    pub finest: i32,
    /// Coarse level of expansions; the box level when absent.
    #[serde(default, rename = "j0")]
    pub coarse: Option<i32>,
    #[serde(default, rename = "box")]
    pub domain: Option<BoxConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_corpus_size")]
    pub corpus_size: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Kernel of the grand-maximal proxy.
    #[serde(default)]
    pub kernel: Option<KernelProfile>,
    /// Perturbs one filter tap in the self-check.
    #[serde(default)]
    pub perturbation: Option<Perturbation>,
    /// Corpus of the `gen` command.
    #[serde(default)]
    pub corpus: Option<CorpusSpec>,
    /// Corpus sizes of the self-check.
    #[serde(default)]
    pub selfcheck: Option<CorpusSizes>,
    /// Folds the coarse term of `split` into `Π2`.
    #[serde(default)]
    pub fold_coarse: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            filter: default_filter(),
            finest: default_finest(),
            coarse: None,
            domain: None,
            seed: 0,
            corpus_size: default_corpus_size(),
            tolerances: Tolerances::default(),
            kernel: None,
            perturbation: None,
            corpus: None,
            selfcheck: None,
            fold_coarse: false,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        load_filter(&self.filter)?;
        if !(1..=24).contains(&self.finest) {
            return Err(Error::Config(format!(
                "J = {} must lie in [1, 24]",
                self.finest
            )));
        }
        if let Some(b) = &self.domain {
            let domain = GridBox::new(b.origin.clone(), b.side)?;
            if let Some(j0) = self.coarse {
                if j0 < domain.coarsest_level() || j0 >= self.finest {
                    return Err(Error::Config(format!(
                        "j0 = {j0} must lie in [{}, {})",
                        domain.coarsest_level(),
                        self.finest
                    )));
                }
            }
        } else if let Some(j0) = self.coarse {
            if j0 < 0 || j0 >= self.finest {
                return Err(Error::Config(format!(
                    "j0 = {j0} must lie in [0, {})",
                    self.finest
                )));
            }
        }
        if let Some(spec) = &self.corpus {
            spec.validate()?;
        }
        self.tolerances.validate()
    }

    /// The configured box in `dims` dimensions.
    pub fn domain(&self, dims: usize) -> Result<GridBox> {
        match &self.domain {
            Some(b) if b.origin.len() == dims => GridBox::new(b.origin.clone(), b.side),
            Some(b) => Err(Error::Config(format!(
                "box has {} dimensions, input has {dims}",
                b.origin.len()
            ))),
            None => Ok(GridBox::unit(dims)),
        }
    }

    pub fn load_filter(&self) -> Result<FilterPair> {
        load_filter(&self.filter)
    }

    /// Coarse level for functions on `domain`.
    pub fn coarse_for(&self, domain: &GridBox) -> i32 {
        self.coarse.unwrap_or(domain.coarsest_level())
    }

    pub fn selfcheck(&self) -> SelfcheckConfig {
        SelfcheckConfig {
            seed: self.seed,
            filter: self.filter.clone(),
            perturbation: self.perturbation,
            tolerances: self.tolerances.clone(),
            sizes: self.selfcheck.clone().unwrap_or_default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"filtre": "db3"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"tolerances": {"nope": 1}}"#).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::from_json(r#"{"filter": "db99"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"J": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"J": 5, "j0": 5}"#).is_err());
        assert!(RunConfig::from_json(r#"{"box": {"origin": [0.5], "side": 3}}"#).is_err());
    }

    #[test]
    fn full_document_round_trips() {
        let text = r#"{
            "filter": "db4", "J": 8, "j0": 1, "box": {"origin": [0, 0], "side": 1},
            "seed": 9, "corpus_size": 4, "tolerances": {"split": 1e-9},
            "kernel": "gaussian", "perturbation": {"tap": 0, "delta": 0.001},
            "corpus": {"kind": "atom", "J": 8, "dims": 2}, "fold_coarse": true
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.domain(2).unwrap().dims(), 2);
        assert!(cfg.domain(1).is_err());
        let sc = cfg.selfcheck();
        assert_eq!(sc.tolerances.split, 1e-9);
        assert_eq!(sc.perturbation.unwrap().delta, 0.001);
    }
}
