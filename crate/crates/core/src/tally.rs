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

//! The three tally tables and per-stage statistics.
//!
//! * Vote counts: mass given to each candidate at each preference.
//! * Processed vote counts: running sums down each column, so stage `i`
//!   holds everything ranked within the first `i` preferences.
//! * Scores: `100 * processed / n`, the percentage of voters that ranked a
//!   candidate within the first `i` preferences.
//!
//! Counts are exact rationals, since incomplete ballots contribute fractional
//! mass. Scores are `f64`.

use crate::ballot::{expand_incomplete, Ballot, CandidateRoster, FractionalBallot};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use thiserror::Error;

/// Vote mass. Integral for complete ballots.
pub type Mass = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TallyError {
    #[error(
        "ballot {index} is expanded over {columns} columns and {prefs} preferences, \
         expected {expected_columns} and {expected_prefs}"
    )]
    MixedRoster {
        index: usize,
        columns: usize,
        prefs: usize,
        expected_columns: usize,
        expected_prefs: usize,
    },
    #[error("scores are undefined for an election without voters")]
    NoVoters,
    #[error("stage {stage} is outside 1..={stages}")]
    StageOutOfRange { stage: usize, stages: usize },
    #[error("stage {0} carries no score, its distribution is undefined")]
    DegenerateDistribution(usize),
    #[error("malformed table: {0}")]
    Malformed(String),
}

/// Vote mass per (preference, candidate).
#[derive(Debug, Clone, PartialEq)]
pub struct VoteCountTable {
    candidates: Vec<String>,
    counts: Vec<Vec<Mass>>,
    n: usize,
}

/// Cumulative vote mass per (stage, candidate).
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedTable {
    candidates: Vec<String>,
    cumulative: Vec<Vec<Mass>>,
    n: usize,
}

/// Percentage scores per (stage, candidate).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    candidates: Vec<String>,
    scores: Vec<Vec<f64>>,
    n: usize,
    column_order: Vec<usize>,
}

fn check_rect<T>(candidates: &[String], rows: &[Vec<T>]) -> Result<(), TallyError> {
    if candidates.is_empty() {
        return Err(TallyError::Malformed("no candidates".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != candidates.len()) {
        return Err(TallyError::Malformed(format!(
            "row {} has {} entries for {} candidates",
            i + 1,
            r.len(),
            candidates.len()
        )));
    }
    Ok(())
}

impl VoteCountTable {
    pub fn new(candidates: Vec<String>, counts: Vec<Vec<Mass>>, n: usize) -> Result<Self, TallyError> {
        check_rect(&candidates, &counts)?;
        if counts.iter().flatten().any(|x| *x < Mass::zero()) {
            return Err(TallyError::Malformed("negative vote mass".into()));
        }
        Ok(VoteCountTable { candidates, counts, n })
    }

    /// Convenience constructor for integral counts.
    pub fn from_integers(candidates: &[&str], counts: &[Vec<u64>], n: usize) -> Result<Self, TallyError> {
        Self::new(
            candidates.iter().map(|&c| c.to_owned()).collect(),
            counts
                .iter()
                .map(|r| r.iter().map(|&x| Mass::from_integer(x.into())).collect())
                .collect(),
            n,
        )
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    pub fn counts(&self) -> &[Vec<Mass>] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_prefs(&self) -> usize {
        self.counts.len()
    }
}

impl ProcessedTable {
    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    pub fn cumulative(&self) -> &[Vec<Mass>] {
        &self.cumulative
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_stages(&self) -> usize {
        self.cumulative.len()
    }
}

impl ScoreTable {
    /// Builds a table from percentages, e.g. to replay a published table.
    pub fn from_scores(candidates: Vec<String>, scores: Vec<Vec<f64>>, n: usize) -> Result<Self, TallyError> {
        check_rect(&candidates, &scores)?;
        if scores.iter().flatten().any(|s| !s.is_finite()) {
            return Err(TallyError::Malformed("non-finite score".into()));
        }
        let column_order = (0..candidates.len()).collect();
        Ok(ScoreTable {
            candidates,
            scores,
            n,
            column_order,
        })
    }

    pub fn from_json(json: &str) -> Result<Self, TallyError> {
        let t: TableJson<f64> = serde_json::from_str(json).map_err(|e| TallyError::Malformed(e.to_string()))?;
        Self::from_scores(t.candidates, t.stages, t.n)
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    pub fn scores(&self) -> &[Vec<f64>] {
        &self.scores
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_stages(&self) -> usize {
        self.scores.len()
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    /// Score of column `col` at the 1-based `stage`.
    pub fn get(&self, stage: usize, col: usize) -> f64 {
        self.scores[stage - 1][col]
    }

    pub fn column(&self, id: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c == id)
    }

    /// Presentation order of the columns, see [`sort_columns`].
    pub fn column_order(&self) -> &[usize] {
        &self.column_order
    }

    fn row(&self, stage: usize) -> Result<&[f64], TallyError> {
        if stage == 0 || stage > self.scores.len() {
            return Err(TallyError::StageOutOfRange {
                stage,
                stages: self.scores.len(),
            });
        }
        Ok(&self.scores[stage - 1])
    }
}

/// Sums the expanded ballots into a vote-count table.
pub fn count_votes(
    ballots: &[FractionalBallot],
    roster: &CandidateRoster,
    num_prefs: usize,
) -> Result<VoteCountTable, TallyError> {
    let k = roster.num_columns();
    // Whole stamps are counted as integers; spread rows are grouped by their
    // denominator and only turned into rationals at the end.
    let mut whole = vec![vec![0u64; k]; num_prefs];
    let mut split: BTreeMap<usize, Vec<Vec<u64>>> = BTreeMap::new();
    for (index, b) in ballots.iter().enumerate() {
        if b.num_columns() != k || b.num_prefs() != num_prefs {
            return Err(TallyError::MixedRoster {
                index,
                columns: b.num_columns(),
                prefs: b.num_prefs(),
                expected_columns: k,
                expected_prefs: num_prefs,
            });
        }
        let m = b.spread().len();
        for row in 0..num_prefs {
            match b.stamp(row) {
                Some(c) => whole[row][c] += 1,
                None if m == 1 => whole[row][b.spread()[0]] += 1,
                None => {
                    let acc = split.entry(m).or_insert_with(|| vec![vec![0; k]; num_prefs]);
                    for &c in b.spread() {
                        acc[row][c] += 1;
                    }
                }
            }
        }
    }
    let counts = (0..num_prefs)
        .map(|row| {
            (0..k)
                .map(|c| {
                    let mut x = Mass::from_integer(whole[row][c].into());
                    for (&m, acc) in &split {
                        if acc[row][c] > 0 {
                            x += Mass::new(BigInt::from(acc[row][c]), BigInt::from(m));
                        }
                    }
                    x
                })
                .collect()
        })
        .collect();
    Ok(VoteCountTable {
        candidates: roster.column_labels(),
        counts,
        n: ballots.len(),
    })
}

/// Running column sums: `f1(X, i) = f1(X, i - 1) + x_i`.
pub fn cumulate(vc: &VoteCountTable) -> ProcessedTable {
    let mut cumulative: Vec<Vec<Mass>> = Vec::with_capacity(vc.counts.len());
    for row in &vc.counts {
        let next = match cumulative.last() {
            None => row.clone(),
            Some(prev) => prev.iter().zip(row).map(|(a, b)| a + b).collect(),
        };
        cumulative.push(next);
    }
    ProcessedTable {
        candidates: vc.candidates.clone(),
        cumulative,
        n: vc.n,
    }
}

/// Percentage of voters that ranked each candidate within the first `i`
/// preferences: `100 * f1(X, i) / n`.
pub fn score(pt: &ProcessedTable) -> Result<ScoreTable, TallyError> {
    if pt.n == 0 {
        return Err(TallyError::NoVoters);
    }
    let n = BigInt::from(pt.n);
    let hundred = BigInt::from(100);
    let scores = pt
        .cumulative
        .iter()
        .map(|row| {
            row.iter()
                .map(|f1| {
                    Mass::new(f1.numer() * &hundred, f1.denom() * &n)
                        .to_f64()
                        .unwrap_or(f64::NAN)
                })
                .collect()
        })
        .collect();
    ScoreTable::from_scores(pt.candidates.clone(), scores, pt.n)
}

/// Share of each candidate in the stage's total mass, `f1(X, i) / sum_Y f1(Y, i)`.
pub fn stage_distribution(st: &ScoreTable, stage: usize) -> Result<Vec<f64>, TallyError> {
    let row = st.row(stage)?;
    let total: f64 = row.iter().sum();
    if total <= 0.0 {
        return Err(TallyError::DegenerateDistribution(stage));
    }
    Ok(row.iter().map(|s| s / total).collect())
}

/// Shannon entropy in bits of [`stage_distribution`].
pub fn stage_entropy(st: &ScoreTable, stage: usize) -> Result<f64, TallyError> {
    let p = stage_distribution(st, stage)?;
    Ok(-p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>())
}

/// Population variance of the stage's scores across candidates.
pub fn stage_variance(st: &ScoreTable, stage: usize) -> Result<f64, TallyError> {
    let row = st.row(stage)?;
    let k = row.len() as f64;
    let mean = row.iter().sum::<f64>() / k;
    Ok(row.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k)
}

pub fn stage_stddev(st: &ScoreTable, stage: usize) -> Result<f64, TallyError> {
    stage_variance(st, stage).map(f64::sqrt)
}

/// Orders columns by descending score, comparing the last stage first and
/// falling back to earlier stages. Equal columns keep their original order.
pub fn sort_columns(st: &ScoreTable) -> ScoreTable {
    let mut order: Vec<usize> = (0..st.num_candidates()).collect();
    order.sort_by(|&a, &b| compare_columns(st, a, b));
    ScoreTable {
        column_order: order,
        ..st.clone()
    }
}

/// `Less` when column `a` ranks ahead of column `b`.
pub(crate) fn compare_columns(st: &ScoreTable, a: usize, b: usize) -> Ordering {
    for row in st.scores.iter().rev() {
        match row[b].total_cmp(&row[a]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Position of every column in the [`sort_columns`] order, lower is better.
pub(crate) fn column_priority(st: &ScoreTable) -> Vec<usize> {
    let sorted = sort_columns(st);
    let mut rank = vec![0; st.num_candidates()];
    for (pos, &c) in sorted.column_order.iter().enumerate() {
        rank[c] = pos;
    }
    rank
}

/// All three tables of one election.
#[derive(Debug, Clone, PartialEq)]
pub struct TallySet {
    pub counts: VoteCountTable,
    pub processed: ProcessedTable,
    pub scores: ScoreTable,
}

/// Expands, counts, cumulates and scores a set of valid ballots.
pub fn tally(ballots: &[Ballot], roster: &CandidateRoster, num_prefs: usize) -> Result<TallySet, TallyError> {
    let expanded: Vec<FractionalBallot> = ballots
        .iter()
        .map(|b| expand_incomplete(b, roster, num_prefs))
        .collect();
    let counts = count_votes(&expanded, roster, num_prefs)?;
    let processed = cumulate(&counts);
    let scores = score(&processed)?;
    Ok(TallySet {
        counts,
        processed,
        scores,
    })
}

#[derive(Serialize, Deserialize)]
struct TableJson<T> {
    candidates: Vec<String>,
    stages: Vec<Vec<T>>,
    n: usize,
}

fn mass_to_f64(x: &Mass) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Integers print as such, anything else with at most four decimals.
pub fn format_mass(x: &Mass) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        trim_decimals(format!("{:.4}", mass_to_f64(x)))
    }
}

pub fn format_score(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}%")
    } else {
        format!("{}%", trim_decimals(format!("{x:.2}")))
    }
}

fn trim_decimals(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

fn render(title: &str, row_label: &str, labels: &[String], cells: &[Vec<String>]) -> String {
    let row_names: Vec<String> = (1..=cells.len()).map(|i| format!("{row_label}{i}")).collect();
    let first = row_names.iter().map(String::len).max().unwrap_or(0);
    let widths: Vec<usize> = labels
        .iter()
        .enumerate()
        .map(|(c, l)| cells.iter().map(|r| r[c].len()).chain([l.len()]).max().unwrap_or(0))
        .collect();
    let mut out = format!("{title}\n{:first$}", "");
    for (l, w) in labels.iter().zip(&widths) {
        out.push_str(&format!("  {l:>w$}"));
    }
    out.push('\n');
    for (name, row) in row_names.iter().zip(cells) {
        out.push_str(&format!("{name:<first$}"));
        for (x, w) in row.iter().zip(&widths) {
            out.push_str(&format!("  {x:>w$}"));
        }
        out.push('\n');
    }
    out
}

impl VoteCountTable {
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .counts
            .iter()
            .map(|r| r.iter().map(format_mass).collect())
            .collect();
        render("Vote Counts", "Preference", &self.candidates, &cells)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TableJson {
            candidates: self.candidates.clone(),
            stages: self
                .counts
                .iter()
                .map(|r| r.iter().map(mass_to_f64).collect::<Vec<_>>())
                .collect(),
            n: self.n,
        })
        .expect("plain data serializes")
    }
}

impl ProcessedTable {
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .cumulative
            .iter()
            .map(|r| r.iter().map(format_mass).collect())
            .collect();
        render("Processed Vote Counts", "Stage", &self.candidates, &cells)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TableJson {
            candidates: self.candidates.clone(),
            stages: self
                .cumulative
                .iter()
                .map(|r| r.iter().map(mass_to_f64).collect::<Vec<_>>())
                .collect(),
            n: self.n,
        })
        .expect("plain data serializes")
    }
}

impl ScoreTable {
    /// Renders the table with columns in [`ScoreTable::column_order`].
    pub fn to_text(&self) -> String {
        let labels: Vec<String> = self.column_order.iter().map(|&c| self.candidates[c].clone()).collect();
        let cells: Vec<Vec<String>> = self
            .scores
            .iter()
            .map(|r| self.column_order.iter().map(|&c| format_score(r[c])).collect())
            .collect();
        render("Score of Candidates", "Stage", &labels, &cells)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TableJson {
            candidates: self.candidates.clone(),
            stages: self.scores.clone(),
            n: self.n,
        })
        .expect("plain data serializes")
    }
}

impl TallySet {
    pub fn to_text(&self) -> String {
        format!(
            "{}\n{}\n{}",
            self.counts.to_text(),
            self.processed.to_text(),
            self.scores.to_text()
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "counts": self.counts.to_json(),
            "processed": self.processed.to_json(),
            "scores": self.scores.to_json(),
        })
    }
}
