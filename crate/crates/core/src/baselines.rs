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

//! Reference methods the staged rule is compared against: plurality,
//! instant-runoff, and rankings built from the crowd's raw predictions.
//!
//! All ties are broken by roster (column) order, earliest first.

use crate::ballot::{Ballot, CandidateRoster};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaselineError {
    #[error("no ballot expresses a preference")]
    NoBallots,
    #[error("prediction matrix is empty")]
    EmptyMatrix,
    #[error("prediction matrix: {0}")]
    Malformed(String),
}

/// Winner of a baseline method, as a tally column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineWinner {
    pub column: usize,
    pub candidate: String,
    /// Set when the winner was picked among equally strong candidates.
    pub tie: bool,
}

fn winner(roster: &CandidateRoster, column: usize, tie: bool) -> BaselineWinner {
    BaselineWinner {
        column,
        candidate: roster.column_labels()[column].clone(),
        tie,
    }
}

/// Ballot preferences as tally columns, "I don't know" stamps dropped.
fn columns<'a>(b: &'a Ballot, roster: &'a CandidateRoster) -> impl Iterator<Item = usize> + 'a {
    b.prefs().iter().filter_map(|&i| roster.column_of(i))
}

/// Plurality of sincere first preferences.
pub fn fptp_winner(ballots: &[Ballot], roster: &CandidateRoster) -> Result<BaselineWinner, BaselineError> {
    let mut firsts = vec![0usize; roster.num_columns()];
    let mut counted = 0;
    for b in ballots {
        if let Some(c) = columns(b, roster).next() {
            firsts[c] += 1;
            counted += 1;
        }
    }
    if counted == 0 {
        return Err(BaselineError::NoBallots);
    }
    let top = *firsts.iter().max().expect("roster has columns");
    let mut leaders = (0..firsts.len()).filter(|&c| firsts[c] == top);
    let first = leaders.next().expect("max exists");
    Ok(winner(roster, first, leaders.next().is_some()))
}

/// Instant-runoff: eliminate the weakest candidate and transfer its ballots
/// until someone holds a strict majority of the ballots still in play.
///
/// Among equally weak candidates the one latest in roster order goes first.
pub fn irv_winner(ballots: &[Ballot], roster: &CandidateRoster) -> Result<BaselineWinner, BaselineError> {
    let k = roster.num_columns();
    let prefs: Vec<Vec<usize>> = ballots
        .iter()
        .map(|b| columns(b, roster).collect::<Vec<_>>())
        .filter(|p| !p.is_empty())
        .collect();
    if prefs.is_empty() {
        return Err(BaselineError::NoBallots);
    }
    let mut active = vec![true; k];
    let mut remaining = k;
    let mut tie = false;
    loop {
        let mut tallies = vec![0usize; k];
        let mut live = 0;
        for p in &prefs {
            if let Some(&c) = p.iter().find(|&&c| active[c]) {
                tallies[c] += 1;
                live += 1;
            }
        }
        let (leader, &lead) = tallies
            .iter()
            .enumerate()
            .filter(|&(c, _)| active[c])
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("an active candidate remains");
        if 2 * lead > live || remaining == 1 {
            return Ok(winner(roster, leader, tie));
        }
        let weakest = (0..k)
            .filter(|&c| active[c])
            .min_by(|&a, &b| tallies[a].cmp(&tallies[b]).then(b.cmp(&a)))
            .expect("an active candidate remains");
        tie |= (0..k).any(|c| c != weakest && active[c] && tallies[c] == tallies[weakest]);
        active[weakest] = false;
        remaining -= 1;
    }
}

/// Raw numeric predictions, one row per voter, one column per candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    slate: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl PredictionMatrix {
    pub fn new(slate: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self, BaselineError> {
        if slate.is_empty() || values.is_empty() {
            return Err(BaselineError::EmptyMatrix);
        }
        if values.iter().any(|r| r.len() != slate.len()) {
            return Err(BaselineError::Malformed("ragged rows".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(BaselineError::Malformed("non-finite prediction".into()));
        }
        Ok(PredictionMatrix { slate, values })
    }

    pub fn slate(&self) -> &[String] {
        &self.slate
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.values.len() as f64;
        (0..self.slate.len())
            .map(|c| self.values.iter().map(|r| r[c]).sum::<f64>() / n)
            .collect()
    }

    pub fn column_medians(&self) -> Vec<f64> {
        (0..self.slate.len())
            .map(|c| {
                let mut col: Vec<f64> = self.values.iter().map(|r| r[c]).collect();
                col.sort_by(f64::total_cmp);
                let mid = col.len() / 2;
                if col.len() % 2 == 1 {
                    col[mid]
                } else {
                    (col[mid - 1] + col[mid]) / 2.0
                }
            })
            .collect()
    }
}

/// Column indices sorted by descending value, stable on ties.
fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

/// Slate ordered by the crowd's mean prediction, best first.
pub fn crowd_mean_ranking(pm: &PredictionMatrix) -> Vec<usize> {
    rank_descending(&pm.column_means())
}

/// Slate ordered by the crowd's median prediction, best first.
pub fn crowd_median_ranking(pm: &PredictionMatrix) -> Vec<usize> {
    rank_descending(&pm.column_medians())
}

/// Anything that predicts the quality of a candidate.
pub trait Predictor<C: ?Sized> {
    fn predict(&self, candidate: &C) -> f64;
}

/// Index of the predictor with the lowest mean squared error over a labelled
/// validation set; the earliest one on ties. `None` for an empty crowd or
/// validation set.
pub fn best_voter<C, P: Predictor<C>>(crowd: &[P], validation: &[(C, f64)]) -> Option<usize> {
    if validation.is_empty() {
        return None;
    }
    crowd
        .iter()
        .map(|p| validation.iter().map(|(c, y)| (p.predict(c) - y).powi(2)).sum::<f64>() / validation.len() as f64)
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}
