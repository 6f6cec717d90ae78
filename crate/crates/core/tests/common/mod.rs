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

//! Fixtures and independent reference implementations shared by the
//! integration tests.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use stagevote::ballot::{Ballot, CandidateRoster};
use stagevote::select::{NullCutoff, SelectionConfig, StageWindow};
use stagevote::tally::ScoreTable;
use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn ballots(roster: &CandidateRoster, rows: &[Vec<&str>]) -> Vec<Ballot> {
    rows.iter()
        .enumerate()
        .map(|(i, p)| Ballot::from_ids(format!("v{i}"), p, roster).unwrap())
        .collect()
}

/// 100 voters: each real candidate is first for 25 of them, X second and
/// NULL third for everyone.
pub fn concrete_example() -> (CandidateRoster, Vec<Ballot>) {
    let roster = CandidateRoster::parse("A,B,C,D,X,NULL").unwrap();
    let orders = [
        ["A", "X", "NULL", "B", "C", "D"],
        ["B", "X", "NULL", "C", "D", "A"],
        ["C", "X", "NULL", "D", "A", "B"],
        ["D", "X", "NULL", "A", "B", "C"],
    ];
    let rows: Vec<Vec<&str>> = (0..100).map(|i| orders[i % 4].to_vec()).collect();
    let b = ballots(&roster, &rows);
    (roster, b)
}

pub const CONCRETE_COUNTS: [[u64; 6]; 6] = [
    [25, 25, 25, 25, 0, 0],
    [0, 0, 0, 0, 100, 0],
    [0, 0, 0, 0, 0, 100],
    [25, 25, 25, 25, 0, 0],
    [25, 25, 25, 25, 0, 0],
    [25, 25, 25, 25, 0, 0],
];

pub const CONCRETE_PROCESSED: [[u64; 6]; 6] = [
    [25, 25, 25, 25, 0, 0],
    [25, 25, 25, 25, 100, 0],
    [25, 25, 25, 25, 100, 100],
    [50, 50, 50, 50, 100, 100],
    [75, 75, 75, 75, 100, 100],
    [100, 100, 100, 100, 100, 100],
];

/// Counts per preference for A, B, C, D, NULL over 20 voters. Stage 2 scores
/// are 65/55/40/40/0 and NULL reaches 35% at stage 3.
pub const BETA_COUNTS: [[u32; 5]; 5] = [
    [5, 5, 5, 5, 0],
    [8, 6, 3, 3, 0],
    [2, 3, 4, 4, 7],
    [3, 3, 4, 4, 6],
    [2, 3, 4, 4, 7],
];

/// Splits a count matrix whose rows and columns all sum to `n` into `n`
/// complete ballots, one perfect matching at a time.
pub fn decompose(counts: &[Vec<u32>]) -> Vec<Vec<usize>> {
    fn augment(r: usize, c: &[Vec<u32>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for j in 0..c[r].len() {
            if c[r][j] > 0 && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|o| augment(o, c, seen, owner)) {
                    owner[j] = Some(r);
                    return true;
                }
            }
        }
        false
    }
    let mut c = counts.to_vec();
    let n: u32 = c[0].iter().sum();
    let k = c[0].len();
    assert_eq!(c.len(), k, "square matrix expected");
    let mut out = Vec::new();
    for _ in 0..n {
        let mut owner = vec![None; k];
        for r in 0..k {
            assert!(augment(r, &c, &mut vec![false; k], &mut owner), "no perfect matching");
        }
        let mut perm = vec![0; k];
        for (j, o) in owner.iter().enumerate() {
            perm[o.unwrap()] = j;
        }
        for (r, &j) in perm.iter().enumerate() {
            c[r][j] -= 1;
        }
        out.push(perm);
    }
    out
}

pub fn ballots_from_counts(roster: &CandidateRoster, counts: &[Vec<u32>]) -> Vec<Ballot> {
    let labels = roster.column_labels();
    decompose(counts)
        .into_iter()
        .enumerate()
        .map(|(i, perm)| {
            let ids: Vec<&str> = perm.iter().map(|&j| labels[j].as_str()).collect();
            Ballot::from_ids(format!("v{i}"), &ids, roster).unwrap()
        })
        .collect()
}

pub fn beta_example() -> (CandidateRoster, Vec<Ballot>) {
    let roster = CandidateRoster::parse("A,B,C,D,NULL").unwrap();
    let counts: Vec<Vec<u32>> = BETA_COUNTS.iter().map(|r| r.to_vec()).collect();
    let b = ballots_from_counts(&roster, &counts);
    (roster, b)
}

/// One of the appendix's random runs: 16 voters, candidates `0..=7` with
/// `0` as NULL. Scores are in units of 1/16.
pub struct AppendixRun {
    pub name: &'static str,
    pub null: [u32; 8],
    pub lead: usize,
    pub lead_units: [u32; 8],
    /// 1-based first stage by alpha, last by beta, last by gamma.
    pub window: (Option<usize>, usize, usize),
    /// Winner, stage and score under the windowed rule with `Last`.
    pub winner: (&'static str, Option<usize>, Option<f64>),
    /// Winner, stage and score under the basic rule.
    pub basic: (&'static str, usize, f64),
}

pub fn appendix_runs() -> Vec<AppendixRun> {
    vec![
        AppendixRun {
            name: "run 1",
            null: [3, 3, 3, 3, 4, 6, 10, 16],
            lead: 7,
            lead_units: [1, 4, 10, 12, 14, 15, 16, 16],
            window: (Some(3), 5, 4),
            winner: ("7", Some(4), Some(75.0)),
            basic: ("7", 3, 62.5),
        },
        AppendixRun {
            name: "run 2",
            null: [1, 2, 2, 3, 6, 10, 13, 16],
            lead: 6,
            lead_units: [4, 9, 11, 12, 14, 15, 16, 16],
            window: (Some(2), 4, 3),
            winner: ("6", Some(3), Some(68.75)),
            basic: ("6", 2, 56.25),
        },
        AppendixRun {
            name: "run 3",
            null: [1, 3, 5, 7, 7, 9, 16, 16],
            lead: 5,
            lead_units: [3, 6, 9, 11, 13, 15, 16, 16],
            window: (Some(3), 3, 4),
            winner: ("5", Some(3), Some(56.25)),
            basic: ("5", 3, 56.25),
        },
        AppendixRun {
            name: "run 4",
            null: [1, 6, 7, 8, 8, 10, 12, 16],
            lead: 2,
            lead_units: [2, 5, 8, 11, 13, 15, 16, 16],
            window: (Some(4), 1, 4),
            winner: ("0", None, None),
            basic: ("2", 4, 68.75),
        },
    ]
}

impl AppendixRun {
    pub fn roster(&self) -> CandidateRoster {
        CandidateRoster::new((0..8).map(|i| i.to_string()).collect(), "0", None).unwrap()
    }

    /// Cumulative unit table: NULL and the leading candidate as given, the
    /// other six columns sharing the rest as evenly as possible.
    pub fn cumulative(&self) -> Vec<Vec<u32>> {
        (0..8)
            .map(|t| {
                let rest = 16 * (t as u32 + 1) - self.null[t] - self.lead_units[t];
                let mut row = vec![0; 8];
                row[0] = self.null[t];
                row[self.lead] = self.lead_units[t];
                let fillers: Vec<usize> = (1..8).filter(|&c| c != self.lead).collect();
                for (i, &c) in fillers.iter().enumerate() {
                    row[c] = rest / 6 + u32::from((i as u32) < rest % 6);
                }
                row
            })
            .collect()
    }

    pub fn ballots(&self) -> (CandidateRoster, Vec<Ballot>) {
        let cum = self.cumulative();
        let counts: Vec<Vec<u32>> = (0..8)
            .map(|t| {
                (0..8)
                    .map(|c| cum[t][c] - if t == 0 { 0 } else { cum[t - 1][c] })
                    .collect()
            })
            .collect();
        let roster = self.roster();
        let b = ballots_from_counts(&roster, &counts);
        (roster, b)
    }

    pub fn config() -> SelectionConfig {
        SelectionConfig {
            alpha: 0.5,
            beta: Some(0.3333),
            gamma: "any:0.6666".parse().unwrap(),
            selector: stagevote::StageSelector::Last,
            beta_mode: NullCutoff::ExcludeCrossing,
        }
    }
}

/// Running sums, written as a plain double loop.
pub fn prefix_sums(counts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; counts.first().map_or(0, Vec::len)]; counts.len()];
    for t in 0..counts.len() {
        for c in 0..counts[t].len() {
            let mut s = 0.0;
            for row in counts.iter().take(t + 1) {
                s += row[c];
            }
            out[t][c] = s;
        }
    }
    out
}

/// Stage window by checking every stage against the definitions directly.
pub fn window_oracle(st: &ScoreTable, cfg: &SelectionConfig, null: usize) -> StageWindow {
    let k = st.num_stages();
    let real = |c: usize| c != null;
    let alpha_ok = |t: usize| {
        (0..st.num_candidates()).any(|c| real(c) && st.get(t, c) > 100.0 * cfg.alpha && st.get(t, null) <= st.get(t, c))
    };
    let mut first = None;
    for t in 1..=k {
        if alpha_ok(t) {
            first = Some(t);
            break;
        }
    }
    let (bar, include) = match cfg.beta {
        Some(b) => (100.0 * b, cfg.beta_mode == NullCutoff::IncludeCrossing),
        None => (100.0 * cfg.alpha, true),
    };
    let mut last_by_beta = k;
    for t in 1..=k {
        if st.get(t, null) > bar {
            last_by_beta = if include { t } else { t - 1 };
            break;
        }
    }
    let mut last_by_gamma = k;
    for t in 1..=k {
        let real_scores: Vec<f64> = (0..st.num_candidates())
            .filter(|&c| real(c))
            .map(|c| st.get(t, c))
            .collect();
        if fires(&cfg.gamma, &real_scores) {
            last_by_gamma = t;
            break;
        }
    }
    let end = last_by_beta.min(last_by_gamma);
    let pool = match first {
        Some(f) if f <= end => Some((f, end)),
        _ => None,
    };
    StageWindow {
        first_by_alpha: first,
        last_by_beta,
        last_by_gamma,
        pool,
    }
}

fn fires(rule: &stagevote::select::GammaRule, real_scores: &[f64]) -> bool {
    use stagevote::select::GammaRule::*;
    let above = |g: f64| real_scores.iter().filter(|&&s| s > 100.0 * g).count();
    match *rule {
        None => false,
        AnyExceeds { gamma } => above(gamma) > 0,
        FractionExceeds { gamma, fraction } => above(gamma) as f64 >= fraction * real_scores.len() as f64,
        CountExceeds { gamma, count } => above(gamma) >= count,
    }
}

/// Random score table with non-decreasing columns in multiples of 100/n.
pub fn random_table<R: Rng>(rng: &mut R, k: usize, stages: usize, n: usize) -> ScoreTable {
    let mut labels: Vec<String> = (0..k - 1).map(|i| format!("c{i}")).collect();
    labels.insert(rng.random_range(0..k), "NULL".to_owned());
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for _ in 0..k {
        let mut v = 0usize;
        let mut col = Vec::new();
        for _ in 0..stages {
            v = rng.random_range(v..=n);
            col.push(100.0 * v as f64 / n as f64);
        }
        cols.push(col);
    }
    let rows = (0..stages).map(|t| cols.iter().map(|c| c[t]).collect()).collect();
    ScoreTable::from_scores(labels, rows, n).unwrap()
}

pub fn random_config<R: Rng>(rng: &mut R) -> SelectionConfig {
    use stagevote::select::GammaRule;
    let pick = |rng: &mut R| [0.1, 0.25, 0.3333, 0.5, 0.6, 0.6666, 0.75, 0.9][rng.random_range(0..8)];
    let gamma = match rng.random_range(0..4) {
        0 => GammaRule::None,
        1 => GammaRule::AnyExceeds { gamma: pick(rng) },
        2 => GammaRule::FractionExceeds {
            gamma: pick(rng),
            fraction: [0.25, 0.5, 1.0][rng.random_range(0..3)],
        },
        _ => GammaRule::CountExceeds {
            gamma: pick(rng),
            count: rng.random_range(1..4),
        },
    };
    SelectionConfig {
        alpha: pick(rng),
        beta: if rng.random_bool(0.5) { Some(pick(rng)) } else { None },
        gamma,
        selector: stagevote::StageSelector::ALL[rng.random_range(0..7)],
        beta_mode: if rng.random_bool(0.5) {
            NullCutoff::ExcludeCrossing
        } else {
            NullCutoff::IncludeCrossing
        },
    }
}

/// Random ballots over `roster`, each of a random length up to `max_len`.
pub fn random_ballots<R: Rng>(rng: &mut R, roster: &CandidateRoster, voters: usize, max_len: usize) -> Vec<Ballot> {
    (0..voters)
        .map(|i| {
            let mut order: Vec<usize> = (0..roster.len()).collect();
            order.shuffle(rng);
            order.truncate(rng.random_range(0..=max_len.min(roster.len())));
            Ballot::from_indices(format!("v{i}"), order, roster)
        })
        .collect()
}

/// Roster of `m` real candidates plus NULL.
pub fn roster_of(m: usize) -> CandidateRoster {
    let mut ids: Vec<String> = (0..m).map(|i| format!("c{i}")).collect();
    ids.push("NULL".to_owned());
    CandidateRoster::new(ids, "NULL", None).unwrap()
}

/// Plurality winner written independently: most first choices, earliest
/// column on ties.
pub fn plurality_oracle(ballots: &[Ballot], roster: &CandidateRoster) -> usize {
    let mut firsts = vec![0usize; roster.num_columns()];
    for b in ballots {
        if let Some(&p) = b.prefs().first() {
            firsts[roster.column_of(p).unwrap()] += 1;
        }
    }
    let best = *firsts.iter().max().unwrap();
    firsts.iter().position(|&f| f == best).unwrap()
}
