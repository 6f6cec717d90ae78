// Copyright 2026 The stagevote Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Simulation configuration, read from JSON.
//!
//! ```json
//! {
//!   "numCandiates": 10,
//!   "numVoters": 100,
//!   "numElections": 200,
//!   "columnBlindness": 5,
//!   "crowdBuildMethod": {"name": "standardDistribution", "mean": 4000, "standardDeviation": 1500},
//!   "dataSetName": "mySynthetic",
//!   "predictedFeature": "y",
//!   "seed": 7
//! }
//! ```

use super::dataset::{DEFAULT_DATASET_SIZE, MIN_DATASET_SIZE, NUM_FEATURES};
use crate::select::{GammaRule, NullCutoff, SelectError, SelectionConfig, StageSelector};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt;
use thiserror::Error;

pub const DATASET_NAME: &str = "mySynthetic";
pub const PREDICTED_FEATURE: &str = "y";
pub const CROWD_METHOD: &str = "standardDistribution";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("invalid algorithm entry {index}: {source}")]
    Algorithm {
        index: usize,
        #[source]
        source: SelectError,
    },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_owned(),
        reason: reason.into(),
    }
}

/// How many features each voter cannot see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Blindness {
    Fixed(usize),
    /// Drawn uniformly from the inclusive range.
    Range(usize, usize),
}

impl fmt::Display for Blindness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Blindness::Fixed(n) => write!(f, "{n}"),
            Blindness::Range(lo, hi) => write!(f, "[{lo}, {hi}]"),
        }
    }
}

/// Voter target MSEs are drawn from a normal distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CrowdBuildMethod {
    pub name: String,
    pub mean: f64,
    pub standard_deviation: f64,
}

/// One windowed-rule entry of the `algorithms` list.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct AlgorithmEntry {
    alpha: f64,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default)]
    gamma: Option<String>,
    #[serde(default)]
    selector: Option<String>,
    #[serde(default)]
    beta_mode: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawConfig {
    #[serde(alias = "numCandiates")]
    num_candidates: Option<usize>,
    num_voters: Option<usize>,
    num_elections: Option<usize>,
    column_blindness: Option<Value>,
    crowd_build_method: Option<CrowdBuildMethod>,
    data_set_name: Option<String>,
    predicted_feature: Option<String>,
    seed: Option<u64>,
    num_prefs: Option<usize>,
    num_dataset_candidates: Option<usize>,
    algorithms: Option<Vec<AlgorithmEntry>>,
    basic_alphas: Option<Vec<f64>>,
    epochs: Option<Value>,
    trainable_layer_count: Option<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub num_candidates: usize,
    pub num_voters: usize,
    pub num_elections: usize,
    pub column_blindness: Blindness,
    pub crowd: CrowdBuildMethod,
    pub data_set_name: String,
    pub predicted_feature: String,
    pub seed: Option<u64>,
    /// Preferences per ballot. Defaults to the slate size, which leaves
    /// NULL in last place implicit.
    pub num_prefs: Option<usize>,
    pub dataset_size: usize,
    pub algorithms: Vec<SelectionConfig>,
    pub basic_alphas: Vec<f64>,
}

/// Every windowed rule compared by default: each α with every γ above it,
/// with and without β, under all selectors.
pub fn default_algorithms() -> Vec<SelectionConfig> {
    let mut out = Vec::new();
    for alpha in [0.5, 0.66, 0.8] {
        for beta in [None, Some(0.33)] {
            let gammas = std::iter::once(GammaRule::None).chain(
                [0.66, 0.8]
                    .into_iter()
                    .filter(|&g| g > alpha)
                    .map(|gamma| GammaRule::AnyExceeds { gamma }),
            );
            for gamma in gammas {
                for selector in StageSelector::ALL {
                    out.push(SelectionConfig {
                        alpha,
                        beta,
                        gamma,
                        selector,
                        beta_mode: NullCutoff::ExcludeCrossing,
                    });
                }
            }
        }
    }
    out
}

pub const DEFAULT_BASIC_ALPHAS: [f64; 1] = [0.5];

impl SimConfig {
    /// Parses and validates a configuration. Returns warnings alongside it.
    pub fn from_json(text: &str) -> Result<(SimConfig, Vec<String>), ConfigError> {
        let raw: RawConfig = serde_json::from_str(text)?;
        let mut warnings = Vec::new();
        if raw.epochs.is_some() {
            warnings.push("`epochs` is ignored: voters are not trained iteratively".to_owned());
        }
        if raw.trainable_layer_count.is_some() {
            warnings.push("`trainableLayerCount` is ignored: voters are not trained iteratively".to_owned());
        }

        let num_candidates = raw.num_candidates.ok_or(ConfigError::Missing("numCandidates"))?;
        let num_voters = raw.num_voters.ok_or(ConfigError::Missing("numVoters"))?;
        let num_elections = raw.num_elections.ok_or(ConfigError::Missing("numElections"))?;
        let blindness_value = raw.column_blindness.ok_or(ConfigError::Missing("columnBlindness"))?;
        let column_blindness: Blindness = serde_json::from_value(blindness_value)
            .map_err(|_| invalid("columnBlindness", "expected an integer or a pair [lo, hi]"))?;
        let crowd = raw.crowd_build_method.ok_or(ConfigError::Missing("crowdBuildMethod"))?;
        let data_set_name = raw.data_set_name.unwrap_or_else(|| DATASET_NAME.to_owned());
        let predicted_feature = raw.predicted_feature.unwrap_or_else(|| PREDICTED_FEATURE.to_owned());
        let dataset_size = raw.num_dataset_candidates.unwrap_or(DEFAULT_DATASET_SIZE);

        let algorithms = match raw.algorithms {
            None => default_algorithms(),
            Some(entries) => entries
                .into_iter()
                .enumerate()
                .map(|(index, e)| {
                    e.into_config()
                        .map_err(|source| ConfigError::Algorithm { index, source })
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        for (index, a) in algorithms.iter().enumerate() {
            a.validate()
                .map_err(|source| ConfigError::Algorithm { index, source })?;
        }

        let cfg = SimConfig {
            num_candidates,
            num_voters,
            num_elections,
            column_blindness,
            crowd,
            data_set_name,
            predicted_feature,
            seed: raw.seed,
            num_prefs: raw.num_prefs,
            dataset_size,
            algorithms,
            basic_alphas: raw.basic_alphas.unwrap_or_else(|| DEFAULT_BASIC_ALPHAS.to_vec()),
        };
        cfg.validate()?;
        Ok((cfg, warnings))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_candidates < 1 {
            return Err(invalid("numCandidates", "must be at least 1"));
        }
        if self.num_voters < 1 {
            return Err(invalid("numVoters", "must be at least 1"));
        }
        if self.num_elections < 1 {
            return Err(invalid("numElections", "must be at least 1"));
        }
        match self.column_blindness {
            Blindness::Fixed(n) if n >= NUM_FEATURES => {
                return Err(invalid("columnBlindness", format!("must be below {NUM_FEATURES}")));
            }
            Blindness::Range(lo, hi) if lo > hi || hi >= NUM_FEATURES => {
                return Err(invalid(
                    "columnBlindness",
                    format!("range must satisfy lo <= hi < {NUM_FEATURES}"),
                ));
            }
            _ => {}
        }
        if self.crowd.name != CROWD_METHOD {
            return Err(invalid(
                "crowdBuildMethod.name",
                format!("only `{CROWD_METHOD}` is supported"),
            ));
        }
        if !self.crowd.mean.is_finite() {
            return Err(invalid("crowdBuildMethod.mean", "must be finite"));
        }
        if !(self.crowd.standard_deviation.is_finite() && self.crowd.standard_deviation >= 0.0) {
            return Err(invalid(
                "crowdBuildMethod.standardDeviation",
                "must be finite and non-negative",
            ));
        }
        if self.data_set_name != DATASET_NAME {
            return Err(invalid("dataSetName", format!("only `{DATASET_NAME}` is available")));
        }
        if self.predicted_feature != PREDICTED_FEATURE {
            return Err(invalid(
                "predictedFeature",
                format!("only `{PREDICTED_FEATURE}` is available"),
            ));
        }
        let test_len = ((self.dataset_size as f64) * super::dataset::TEST_SHARE).round() as usize;
        if self.dataset_size < MIN_DATASET_SIZE || self.num_candidates > test_len {
            return Err(invalid(
                "numDatasetCandidates",
                format!(
                    "the test split must hold at least numCandidates = {}",
                    self.num_candidates
                ),
            ));
        }
        if let Some(p) = self.num_prefs {
            if p < 1 || p > self.num_candidates + 1 {
                return Err(invalid("numPrefs", "must lie in [1, numCandidates + 1]"));
            }
        }
        if let Some(a) = self.basic_alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(invalid("basicAlphas", format!("{a} is outside [0, 1]")));
        }
        Ok(())
    }

    /// Parameter echo printed at the top of a report.
    pub fn header(&self, seed: u64) -> String {
        format!(
            "numCandiates : {}\n\
             numVoters : {}\n\
             numElections : {}\n\
             columnBlindness : {}\n\
             crowdBuildMethod : {{'name': '{}', 'mean': {}, 'standardDeviation': {}}}\n\
             dataSetName : {}\n\
             predictedFeature : {}\n\
             seed : {seed}\n",
            self.num_candidates,
            self.num_voters,
            self.num_elections,
            self.column_blindness,
            self.crowd.name,
            self.crowd.mean,
            self.crowd.standard_deviation,
            self.data_set_name,
            self.predicted_feature,
        )
    }

    pub fn header_json(&self, seed: u64) -> Value {
        serde_json::json!({
            "numCandidates": self.num_candidates,
            "numVoters": self.num_voters,
            "numElections": self.num_elections,
            "columnBlindness": self.column_blindness,
            "crowdBuildMethod": self.crowd,
            "dataSetName": self.data_set_name,
            "predictedFeature": self.predicted_feature,
            "seed": seed,
        })
    }
}

impl AlgorithmEntry {
    fn into_config(self) -> Result<SelectionConfig, SelectError> {
        Ok(SelectionConfig {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma.as_deref().map(str::parse).transpose()?.unwrap_or_default(),
            selector: self
                .selector
                .as_deref()
                .map(str::parse)
                .transpose()?
                .unwrap_or_default(),
            beta_mode: self
                .beta_mode
                .as_deref()
                .map(str::parse)
                .transpose()?
                .unwrap_or_default(),
        })
    }
}
