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

//! Synthetic candidates: ten uniform features and a quality score that is
//! their weighted sum under one shared random weight vector.

use rand::Rng;

pub const NUM_FEATURES: usize = 10;
pub const DEFAULT_DATASET_SIZE: usize = 3000;
pub const MIN_DATASET_SIZE: usize = 20;
pub const FEATURE_RANGE: std::ops::Range<f64> = 5.0..10.0;
pub const WEIGHT_RANGE: std::ops::Range<f64> = -10.0..10.0;
/// Share of the candidates reserved for elections.
pub const TEST_SHARE: f64 = 0.3;
/// Share of the training candidates held back to measure voter quality.
pub const VALIDATION_SHARE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRecord {
    pub id: usize,
    pub features: [f64; NUM_FEATURES],
    /// Quality, higher is better.
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    candidates: Vec<CandidateRecord>,
    weights: [f64; NUM_FEATURES],
    train_len: usize,
    fit_len: usize,
    null_y: f64,
}

pub fn weighted_sum(features: &[f64; NUM_FEATURES], weights: &[f64; NUM_FEATURES]) -> f64 {
    features.iter().zip(weights).map(|(x, w)| x * w).sum()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Draws `size` candidates. The first 70% are the training split, the rest
/// the test split that election slates come from.
pub fn generate_dataset<R: Rng>(size: usize, rng: &mut R) -> Dataset {
    assert!(
        size >= MIN_DATASET_SIZE,
        "dataset needs at least {MIN_DATASET_SIZE} candidates"
    );
    let mut weights = [0.0; NUM_FEATURES];
    for w in weights.iter_mut() {
        *w = rng.random_range(WEIGHT_RANGE);
    }
    let candidates: Vec<CandidateRecord> = (0..size)
        .map(|id| {
            let mut features = [0.0; NUM_FEATURES];
            for x in features.iter_mut() {
                *x = rng.random_range(FEATURE_RANGE);
            }
            CandidateRecord {
                id,
                features,
                y: weighted_sum(&features, &weights),
            }
        })
        .collect();
    let test_len = ((size as f64) * TEST_SHARE).round() as usize;
    let train_len = size - test_len;
    let fit_len = train_len - ((train_len as f64) * VALIDATION_SHARE).round() as usize;
    let ys: Vec<f64> = candidates.iter().map(|c| c.y).collect();
    Dataset {
        null_y: median(&ys),
        candidates,
        weights,
        train_len,
        fit_len,
    }
}

impl Dataset {
    pub fn candidates(&self) -> &[CandidateRecord] {
        &self.candidates
    }

    pub fn weights(&self) -> &[f64; NUM_FEATURES] {
        &self.weights
    }

    /// Quality the NULL candidate is assumed to have: the median of all `y`.
    pub fn null_y(&self) -> f64 {
        self.null_y
    }

    pub fn train(&self) -> &[CandidateRecord] {
        &self.candidates[..self.train_len]
    }

    /// Training candidates voters fit their estimators on.
    pub fn fit_set(&self) -> &[CandidateRecord] {
        &self.candidates[..self.fit_len]
    }

    /// Training candidates used to measure voter quality.
    pub fn validation(&self) -> &[CandidateRecord] {
        &self.candidates[self.fit_len..self.train_len]
    }

    pub fn test(&self) -> &[CandidateRecord] {
        &self.candidates[self.train_len..]
    }
}
