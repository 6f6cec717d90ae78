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

//! One election: a slate drawn from the test split, sincere ballots from
//! every voter, and the winner under each contending method.

use super::crowd::Voter;
use super::dataset::CandidateRecord;
use crate::ballot::{Ballot, CandidateRoster, NULL_TOKEN};
use crate::baselines::{crowd_mean_ranking, crowd_median_ranking, fptp_winner, irv_winner, PredictionMatrix};
use crate::select::{basic_winner, beta_gamma_winner, SelectionConfig};
use crate::tally::tally;
use serde::Serialize;

/// A method compared in the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contender {
    Staged(SelectionConfig),
    Basic(f64),
    Fptp,
    Irv,
    CrowdMean,
    CrowdMedian,
    BestVoter,
}

impl Contender {
    pub fn label(&self) -> String {
        match self {
            Contender::Staged(cfg) => cfg.label(),
            Contender::Basic(alpha) => format!("MyVoteSys basic <α={alpha:.2}>"),
            Contender::Fptp => "FirstPastThePost (but without tactical voting)".to_owned(),
            Contender::Irv => "InstantRunoffVoting".to_owned(),
            Contender::CrowdMean => "crowd-Mean".to_owned(),
            Contender::CrowdMedian => "crowd-Median".to_owned(),
            Contender::BestVoter => "bestVoter (Dictatorship)".to_owned(),
        }
    }
}

/// Roster for a slate: candidate ids in slate order, then NULL.
pub fn slate_roster(slate: &[CandidateRecord]) -> CandidateRoster {
    let mut ids: Vec<String> = slate.iter().map(|c| c.id.to_string()).collect();
    ids.push(NULL_TOKEN.to_owned());
    CandidateRoster::new(ids, NULL_TOKEN, None).expect("slate ids are distinct integers")
}

/// A voter's predictions for the slate followed by NULL at `null_y`.
pub fn predictions(voter: &Voter, slate: &[CandidateRecord], null_y: f64) -> Vec<f64> {
    slate
        .iter()
        .map(|c| voter.predict(c))
        .chain(std::iter::once(null_y))
        .collect()
}

/// Sincere ballot: columns by descending predicted quality, slate order on
/// ties, truncated to `num_prefs`.
pub fn ballot_from_predictions(
    voter_id: impl Into<String>,
    predicted: &[f64],
    roster: &CandidateRoster,
    num_prefs: usize,
) -> Ballot {
    let mut order: Vec<usize> = (0..predicted.len()).collect();
    order.sort_by(|&a, &b| predicted[b].total_cmp(&predicted[a]));
    order.truncate(num_prefs);
    Ballot::from_indices(voter_id, order, roster)
}

pub fn cast_ballot(
    voter: &Voter,
    slate: &[CandidateRecord],
    null_y: f64,
    roster: &CandidateRoster,
    num_prefs: usize,
) -> Ballot {
    ballot_from_predictions("voter", &predictions(voter, slate, null_y), roster, num_prefs)
}

/// Where the elected column stands by true quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Outcome {
    /// Elected column; the last column is NULL.
    pub column: usize,
    /// 1 + number of slate candidates truly better than the winner. For
    /// NULL, the candidates truly better than the NULL quality.
    pub true_rank: usize,
    pub below_null: bool,
}

pub fn outcome(column: usize, slate: &[CandidateRecord], null_y: f64) -> Outcome {
    let (y, below_null) = match slate.get(column) {
        Some(c) => (c.y, c.y < null_y),
        None => (null_y, false),
    };
    Outcome {
        column,
        true_rank: 1 + slate.iter().filter(|c| c.y > y).count(),
        below_null,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ElectionRecord {
    pub index: usize,
    pub slate: Vec<usize>,
    /// One entry per contender, in contender order.
    pub outcomes: Vec<Outcome>,
}

/// Runs every contender on one slate. `best_voter` indexes into `crowd`.
pub fn run_election(
    index: usize,
    crowd: &[Voter],
    slate: &[CandidateRecord],
    contenders: &[Contender],
    null_y: f64,
    best_voter: usize,
    num_prefs: usize,
) -> ElectionRecord {
    let roster = slate_roster(slate);
    let predicted: Vec<Vec<f64>> = crowd.iter().map(|v| predictions(v, slate, null_y)).collect();
    let ballots: Vec<Ballot> = predicted
        .iter()
        .enumerate()
        .map(|(i, p)| ballot_from_predictions(i.to_string(), p, &roster, num_prefs))
        .collect();
    let tables = tally(&ballots, &roster, num_prefs).expect("simulated ballots are valid");
    let matrix = PredictionMatrix::new(roster.column_labels(), predicted.clone()).expect("predictions are finite");

    let outcomes = contenders
        .iter()
        .map(|c| {
            let column = match c {
                Contender::Staged(cfg) => {
                    beta_gamma_winner(&tables.scores, cfg, NULL_TOKEN)
                        .expect("configurations are validated")
                        .winner_column
                }
                Contender::Basic(alpha) => {
                    basic_winner(&tables.scores, *alpha)
                        .expect("alpha is validated")
                        .winner_column
                }
                Contender::Fptp => fptp_winner(&ballots, &roster).expect("crowd is non-empty").column,
                Contender::Irv => irv_winner(&ballots, &roster).expect("crowd is non-empty").column,
                Contender::CrowdMean => crowd_mean_ranking(&matrix)[0],
                Contender::CrowdMedian => crowd_median_ranking(&matrix)[0],
                Contender::BestVoter => {
                    let p = &predicted[best_voter];
                    (0..p.len())
                        .rev()
                        .max_by(|&a, &b| p[a].total_cmp(&p[b]))
                        .expect("slate is non-empty")
                }
            };
            outcome(column, slate, null_y)
        })
        .collect();
    ElectionRecord {
        index,
        slate: slate.iter().map(|c| c.id).collect(),
        outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::select::StageSelector;

    fn record(id: usize, y: f64) -> CandidateRecord {
        CandidateRecord {
            id,
            features: [0.0; 10],
            y,
        }
    }

    /// Noise-free voter predicting `coef` times the first feature.
    fn oracle_voter(coef: f64) -> Voter {
        let mut coefficients = vec![0.0; 10];
        coefficients[0] = coef;
        Voter {
            blind: vec![],
            visible: (0..10).collect(),
            intercept: 0.0,
            coefficients,
            noise_sd: 0.0,
            noise_seed: 0,
            target_mse: 0.0,
            achieved_mse: 0.0,
            floor_mse: 0.0,
            clamped: false,
        }
    }

    fn featured(id: usize, x: f64, y: f64) -> CandidateRecord {
        let mut c = record(id, y);
        c.features[0] = x;
        c
    }

    #[test]
    fn true_rank() {
        let slate = [record(10, 5.0), record(11, 9.0), record(12, 1.0)];
        assert_eq!(
            outcome(0, &slate, 3.0),
            Outcome {
                column: 0,
                true_rank: 2,
                below_null: false
            }
        );
        assert_eq!(outcome(1, &slate, 3.0).true_rank, 1);
        let worst = outcome(2, &slate, 3.0);
        assert_eq!(worst.true_rank, 3);
        assert!(worst.below_null);
        let null = outcome(3, &slate, 3.0);
        assert_eq!(null.true_rank, 3);
        assert!(!null.below_null);
        assert_eq!(outcome(3, &slate, 100.0).true_rank, 1);
        assert_eq!(outcome(3, &slate, -1.0).true_rank, 4);
    }

    #[test]
    fn ballots_are_sorted_and_truncated() {
        let slate = [featured(0, 1.0, 1.0), featured(1, 3.0, 3.0), featured(2, 2.0, 2.0)];
        let roster = slate_roster(&slate);
        let b = cast_ballot(&oracle_voter(1.0), &slate, 2.5, &roster, 3);
        assert_eq!(b.ids(&roster).collect::<Vec<_>>(), ["1", "NULL", "2"]);
        let b = cast_ballot(&oracle_voter(-1.0), &slate, 0.0, &roster, 4);
        assert_eq!(b.ids(&roster).collect::<Vec<_>>(), ["NULL", "0", "2", "1"]);
    }

    #[test]
    fn unanimous_crowd_elects_the_best() {
        let slate: Vec<_> = (0..5).map(|i| featured(i, i as f64, i as f64)).collect();
        let crowd = vec![oracle_voter(1.0); 7];
        let contenders = [
            Contender::Staged(SelectionConfig {
                selector: StageSelector::MaxEntropy,
                ..SelectionConfig::default()
            }),
            Contender::Basic(0.5),
            Contender::Fptp,
            Contender::Irv,
            Contender::CrowdMean,
            Contender::CrowdMedian,
            Contender::BestVoter,
        ];
        let r = run_election(0, &crowd, &slate, &contenders, 2.5, 3, 5);
        assert_eq!(r.slate, [0, 1, 2, 3, 4]);
        for o in &r.outcomes {
            assert_eq!(
                *o,
                Outcome {
                    column: 4,
                    true_rank: 1,
                    below_null: false
                }
            );
        }
    }

    #[test]
    fn null_wins_when_everyone_prefers_it() {
        let slate: Vec<_> = (0..4).map(|i| featured(i, i as f64, i as f64)).collect();
        let crowd = vec![oracle_voter(1.0); 5];
        let contenders = [
            Contender::Staged(SelectionConfig::default()),
            Contender::Fptp,
            Contender::CrowdMean,
        ];
        let r = run_election(0, &crowd, &slate, &contenders, 10.0, 0, 4);
        for o in &r.outcomes {
            assert_eq!(o.column, 4);
            assert_eq!(o.true_rank, 1);
        }
    }
}
