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

//! Seeded election simulator.
//!
//! A run draws a synthetic dataset, builds a crowd of voters of varying
//! quality, then holds `numElections` elections on random slates from the
//! test split and reports how well each method's winners rank by true
//! quality. All randomness comes from one seed, split into independent
//! ChaCha streams, so parallel and serial runs agree bit for bit.

pub mod config;
pub mod crowd;
pub mod dataset;
pub mod election;
pub mod metrics;

pub use config::{Blindness, ConfigError, CrowdBuildMethod, SimConfig};
pub use crowd::{build_crowd, Voter};
pub use dataset::{generate_dataset, CandidateRecord, Dataset};
pub use election::{cast_ballot, run_election, Contender, ElectionRecord, Outcome};
pub use metrics::{MetricsRow, MetricsTable};

use crate::baselines::{best_voter, Predictor};
use log::info;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write;

const DATASET_STREAM: u64 = 0;
const CROWD_STREAM: u64 = 1;
const FIRST_ELECTION_STREAM: u64 = 2;

/// Random stream `stream` of `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Every method compared in a run, in report order before sorting.
pub fn contenders(cfg: &SimConfig) -> Vec<Contender> {
    let mut out: Vec<Contender> = cfg.algorithms.iter().copied().map(Contender::Staged).collect();
    out.extend(cfg.basic_alphas.iter().copied().map(Contender::Basic));
    out.extend([
        Contender::Fptp,
        Contender::Irv,
        Contender::CrowdMean,
        Contender::CrowdMedian,
        Contender::BestVoter,
    ]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Overrides the configured seed.
    pub seed: Option<u64>,
    pub serial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MseRow {
    pub label: String,
    pub validation_mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub config: SimConfig,
    pub seed: u64,
    pub labels: Vec<String>,
    pub metrics: MetricsTable,
    pub mse: Vec<MseRow>,
    pub best_voter: usize,
    pub clamped_voters: usize,
    pub elections: Vec<ElectionRecord>,
}

/// Mean squared error of a predictor over `(candidate, truth)` pairs.
fn mse<P: Predictor<CandidateRecord>>(p: &P, set: &[(CandidateRecord, f64)]) -> f64 {
    set.iter().map(|(c, y)| (p.predict(c) - y).powi(2)).sum::<f64>() / set.len() as f64
}

struct CrowdAggregate<'a> {
    crowd: &'a [Voter],
    median: bool,
}

impl Predictor<CandidateRecord> for CrowdAggregate<'_> {
    fn predict(&self, c: &CandidateRecord) -> f64 {
        let mut p: Vec<f64> = self.crowd.iter().map(|v| v.predict(c)).collect();
        if self.median {
            dataset::median(&p)
        } else {
            let n = p.len() as f64;
            p.drain(..).sum::<f64>() / n
        }
    }
}

pub fn run_simulation(cfg: &SimConfig, opts: RunOptions) -> SimulationRun {
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let dataset = generate_dataset(cfg.dataset_size, &mut rng_stream(seed, DATASET_STREAM));
    let crowd = build_crowd(cfg, &dataset, &mut rng_stream(seed, CROWD_STREAM));
    let validation: Vec<(CandidateRecord, f64)> = dataset.validation().iter().map(|c| (c.clone(), c.y)).collect();
    let best = best_voter(&crowd, &validation).expect("crowd and validation set are non-empty");
    let clamped_voters = crowd.iter().filter(|v| v.clamped).count();
    info!(
        "seed {seed}: {} voters, {clamped_voters} above their target MSE, best voter {best}",
        crowd.len()
    );

    let contenders = contenders(cfg);
    let labels: Vec<String> = contenders.iter().map(Contender::label).collect();
    let num_prefs = cfg.num_prefs.unwrap_or(cfg.num_candidates);
    let test = dataset.test();
    let hold = |i: usize| {
        let mut rng = rng_stream(seed, FIRST_ELECTION_STREAM + i as u64);
        let slate: Vec<CandidateRecord> = index::sample(&mut rng, test.len(), cfg.num_candidates)
            .into_iter()
            .map(|j| test[j].clone())
            .collect();
        run_election(i, &crowd, &slate, &contenders, dataset.null_y(), best, num_prefs)
    };
    let elections: Vec<ElectionRecord> = if opts.serial {
        (0..cfg.num_elections).map(hold).collect()
    } else {
        (0..cfg.num_elections).into_par_iter().map(hold).collect()
    };

    let metrics = MetricsTable::from_records(&labels, &elections);
    let mse = vec![
        MseRow {
            label: Contender::CrowdMean.label(),
            validation_mse: mse(
                &CrowdAggregate {
                    crowd: &crowd,
                    median: false,
                },
                &validation,
            ),
        },
        MseRow {
            label: Contender::CrowdMedian.label(),
            validation_mse: mse(
                &CrowdAggregate {
                    crowd: &crowd,
                    median: true,
                },
                &validation,
            ),
        },
        MseRow {
            label: Contender::BestVoter.label(),
            validation_mse: mse(&crowd[best], &validation),
        },
    ];
    SimulationRun {
        config: cfg.clone(),
        seed,
        labels,
        metrics,
        mse,
        best_voter: best,
        clamped_voters,
        elections,
    }
}

impl SimulationRun {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("=================================== START OF SIMULATION ===================================\n");
        out.push_str(&self.config.header(self.seed));
        out.push('\n');
        out.push_str("========= SIMULATION RESULTS ========\n");
        out.push_str(&self.metrics.to_text());
        out.push('\n');
        let width = metrics::label_width(self.mse.iter().map(|r| r.label.as_str()));
        writeln!(out, "{}val_MeanSquaredErr", metrics::pad("Metrics", width + 2)).unwrap();
        writeln!(out, "Algorithms").unwrap();
        for r in &self.mse {
            writeln!(out, "{}{:>20.6}", metrics::pad(&r.label, width), r.validation_mse).unwrap();
        }
        out.push_str("==================================== END OF SIMULATION ====================================\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config.header_json(self.seed),
            "metrics": self.metrics.rows,
            "validationMse": self.mse,
            "bestVoter": self.best_voter,
            "clampedVoters": self.clamped_voters,
            "algorithms": self.labels,
            "elections": self.elections,
        })
    }
}
