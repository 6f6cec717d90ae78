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

//! Voters are least-squares estimators over the features they can see, plus
//! a fixed per-candidate noise term whose scale is tuned so that the voter's
//! validation error hits a drawn target.

use super::config::{Blindness, SimConfig};
use super::dataset::{CandidateRecord, Dataset, NUM_FEATURES};
use crate::baselines::Predictor;
use log::debug;
use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

/// Targets below this are redrawn.
pub const MIN_TARGET_MSE: f64 = 1e-9;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Voter {
    /// Features this voter never sees, sorted.
    pub blind: Vec<usize>,
    /// Features this voter sees, sorted.
    pub visible: Vec<usize>,
    pub intercept: f64,
    /// One coefficient per visible feature.
    pub coefficients: Vec<f64>,
    pub noise_sd: f64,
    pub noise_seed: u64,
    pub target_mse: f64,
    /// Validation MSE after calibration.
    pub achieved_mse: f64,
    /// Lowest validation MSE reachable by this estimator.
    pub floor_mse: f64,
    /// The target was below `floor_mse` and could not be met.
    pub clamped: bool,
}

impl Voter {
    /// The estimator's noise-free prediction.
    pub fn estimate(&self, c: &CandidateRecord) -> f64 {
        self.intercept
            + self
                .visible
                .iter()
                .zip(&self.coefficients)
                .map(|(&f, w)| w * c.features[f])
                .sum::<f64>()
    }

    /// Standard normal draw tied to this voter and candidate, so a voter
    /// always judges the same candidate the same way.
    pub fn noise(&self, c: &CandidateRecord) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.noise_seed);
        rng.set_stream(c.id as u64);
        StandardNormal.sample(&mut rng)
    }

    pub fn predict(&self, c: &CandidateRecord) -> f64 {
        let e = self.estimate(c);
        if self.noise_sd == 0.0 {
            e
        } else {
            e + self.noise_sd * self.noise(c)
        }
    }

    pub fn mse(&self, set: &[CandidateRecord]) -> f64 {
        set.iter().map(|c| (self.predict(c) - c.y).powi(2)).sum::<f64>() / set.len() as f64
    }
}

impl Predictor<CandidateRecord> for Voter {
    fn predict(&self, c: &CandidateRecord) -> f64 {
        Voter::predict(self, c)
    }
}

/// Ordinary least squares with an intercept on the `visible` features.
/// Returns the intercept followed by one coefficient per visible feature.
pub fn fit_estimator(set: &[CandidateRecord], visible: &[usize]) -> Vec<f64> {
    let cols = visible.len() + 1;
    let x = DMatrix::from_fn(set.len(), cols, |i, j| {
        if j == 0 {
            1.0
        } else {
            set[i].features[visible[j - 1]]
        }
    });
    let y = DVector::from_iterator(set.len(), set.iter().map(|c| c.y));
    let xt = x.transpose();
    let xtx = &xt * &x;
    let xty = &xt * &y;
    let solution = match xtx.clone().cholesky() {
        Some(ch) => ch.solve(&xty),
        None => xtx
            .svd(true, true)
            .solve(&xty, 1e-12)
            .expect("SVD was computed with both factors"),
    };
    solution.iter().copied().collect()
}

/// Validation error as a function of the noise scale:
/// `mse(s) = mean((r + s z)^2)` for residuals `r` and fixed draws `z`.
struct NoiseCurve {
    residuals: Vec<f64>,
    draws: Vec<f64>,
}

impl NoiseCurve {
    fn mse(&self, sd: f64) -> f64 {
        self.residuals
            .iter()
            .zip(&self.draws)
            .map(|(r, z)| (r + sd * z).powi(2))
            .sum::<f64>()
            / self.residuals.len() as f64
    }

    /// Noise scale minimizing the error; the curve increases past it.
    fn argmin(&self) -> f64 {
        let rz: f64 = self.residuals.iter().zip(&self.draws).map(|(r, z)| r * z).sum();
        let zz: f64 = self.draws.iter().map(|z| z * z).sum();
        if zz > 0.0 {
            (-rz / zz).max(0.0)
        } else {
            0.0
        }
    }

    /// Bisection for `mse(sd) = target` on the increasing branch.
    fn solve(&self, target: f64) -> f64 {
        let mut lo = self.argmin();
        if self.mse(lo) >= target {
            return lo;
        }
        let mut hi = lo.max(1.0);
        while self.mse(hi) < target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.mse(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= 1e-12 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

fn draw_target<R: Rng>(mean: f64, sd: f64, rng: &mut R) -> f64 {
    if sd == 0.0 {
        return mean.max(MIN_TARGET_MSE);
    }
    let normal = Normal::new(mean, sd).expect("validated: finite mean, sd >= 0");
    for _ in 0..MAX_REDRAWS {
        let t = normal.sample(rng);
        if t >= MIN_TARGET_MSE {
            return t;
        }
    }
    MIN_TARGET_MSE
}

fn draw_blindness<R: Rng>(b: Blindness, rng: &mut R) -> usize {
    match b {
        Blindness::Fixed(n) => n,
        Blindness::Range(lo, hi) => rng.random_range(lo..=hi),
    }
}

/// Builds one calibrated voter.
pub fn build_voter<R: Rng>(dataset: &Dataset, blind_count: usize, target_mse: f64, rng: &mut R) -> Voter {
    let mut blind = index::sample(rng, NUM_FEATURES, blind_count).into_vec();
    blind.sort_unstable();
    let visible: Vec<usize> = (0..NUM_FEATURES).filter(|f| !blind.contains(f)).collect();
    let solution = fit_estimator(dataset.fit_set(), &visible);
    let noise_seed = rng.random();
    let mut voter = Voter {
        blind,
        visible,
        intercept: solution[0],
        coefficients: solution[1..].to_vec(),
        noise_sd: 0.0,
        noise_seed,
        target_mse,
        achieved_mse: 0.0,
        floor_mse: 0.0,
        clamped: false,
    };
    let validation = dataset.validation();
    let curve = NoiseCurve {
        residuals: validation.iter().map(|c| voter.estimate(c) - c.y).collect(),
        draws: validation.iter().map(|c| voter.noise(c)).collect(),
    };
    voter.floor_mse = curve.mse(curve.argmin());
    voter.noise_sd = curve.solve(target_mse);
    voter.achieved_mse = curve.mse(voter.noise_sd);
    voter.clamped = target_mse < voter.floor_mse;
    if voter.clamped {
        debug!(
            "target MSE {target_mse:.3} is below the floor {:.3} of a voter blind to {:?}",
            voter.floor_mse, voter.blind
        );
    }
    voter
}

/// Builds `numVoters` voters with normally distributed target qualities.
pub fn build_crowd<R: Rng>(cfg: &SimConfig, dataset: &Dataset, rng: &mut R) -> Vec<Voter> {
    (0..cfg.num_voters)
        .map(|_| {
            let target = draw_target(cfg.crowd.mean, cfg.crowd.standard_deviation, rng);
            let blind = draw_blindness(cfg.column_blindness, rng);
            build_voter(dataset, blind, target, rng)
        })
        .collect()
}
