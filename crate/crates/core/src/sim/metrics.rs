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

use super::election::ElectionRecord;
use serde::Serialize;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsRow {
    pub label: String,
    pub mean_winner_rank: f64,
    pub rate_true_winners: f64,
    pub rate_winner_below_null: f64,
}

/// Per-method averages over all elections, best mean rank first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    /// `labels[i]` names the method behind `outcomes[i]` of every record.
    pub fn from_records(labels: &[String], records: &[ElectionRecord]) -> MetricsTable {
        let n = records.len() as f64;
        let mut rows: Vec<MetricsRow> = labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let (mut rank, mut wins, mut below) = (0usize, 0usize, 0usize);
                for r in records {
                    let o = &r.outcomes[i];
                    rank += o.true_rank;
                    wins += usize::from(o.true_rank == 1);
                    below += usize::from(o.below_null);
                }
                MetricsRow {
                    label: label.clone(),
                    mean_winner_rank: rank as f64 / n,
                    rate_true_winners: wins as f64 / n,
                    rate_winner_below_null: below as f64 / n,
                }
            })
            .collect();
        rows.sort_by(|a, b| a.mean_winner_rank.total_cmp(&b.mean_winner_rank));
        MetricsTable { rows }
    }

    pub fn get(&self, label: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn to_text(&self) -> String {
        let width = label_width(self.rows.iter().map(|r| r.label.as_str()));
        let mut out = String::new();
        writeln!(
            out,
            "{}meanWinnerRank  rateTrueWinners  rateWinner<NULL",
            pad("Metrics", width.saturating_sub(2))
        )
        .unwrap();
        writeln!(out, "Algorithms").unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{}{:>12.3}{:>17.3}{:>17.3}",
                pad(&r.label, width),
                r.mean_winner_rank,
                r.rate_true_winners,
                r.rate_winner_below_null
            )
            .unwrap();
        }
        out
    }
}

pub(crate) fn label_width<'a>(labels: impl Iterator<Item = &'a str>) -> usize {
    labels.map(|l| l.chars().count()).max().unwrap_or(0)
}

/// Left-aligns by characters, so labels with Greek letters line up.
pub(crate) fn pad(label: &str, width: usize) -> String {
    let n = label.chars().count();
    format!("{label}{}", " ".repeat(width.saturating_sub(n)))
}
