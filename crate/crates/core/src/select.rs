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

//! Winner selection over a [`ScoreTable`].
//!
//! The basic rule walks the stages until some candidate's score strictly
//! exceeds `100 * alpha` and elects the best-scoring candidate of that stage.
//!
//! The windowed rule first computes the pool of consecutive stages a winner
//! may be taken from:
//!
//! * it opens at the first stage where a real candidate exceeds `alpha`
//!   without being beaten by NULL,
//! * it closes when NULL exceeds `beta` (or `alpha` when no `beta` is set),
//! * it closes at the first stage where the gamma rule fires.
//!
//! A stage selector then picks one stage of the pool. An empty pool elects
//! NULL.

use crate::tally::{self, column_priority, ScoreTable, TallyError};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectError {
    #[error("score table has no stages")]
    EmptyTable,
    #[error("NULL candidate `{0}` has no column in the score table")]
    MissingNull(String),
    #[error("the stage pool is empty")]
    NoStage,
    #[error("invalid selection config: {0}")]
    InvalidConfig(String),
    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error(transparent)]
    Tally(#[from] TallyError),
}

fn parse_error(input: &str, reason: impl Into<String>) -> SelectError {
    SelectError::Parse {
        input: input.to_owned(),
        reason: reason.into(),
    }
}

/// Marks stages as too late once candidates exceed a score cap.
///
/// Thresholds are fractions of the electorate, compared strictly against
/// `score / 100`. The NULL candidate is not counted.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GammaRule {
    #[default]
    None,
    /// Fires when any candidate exceeds `gamma`.
    AnyExceeds { gamma: f64 },
    /// Fires when at least `fraction` of the candidates exceed `gamma`.
    FractionExceeds { gamma: f64, fraction: f64 },
    /// Fires when at least `count` candidates exceed `gamma`.
    CountExceeds { gamma: f64, count: usize },
}

impl GammaRule {
    pub fn validate(&self) -> Result<(), SelectError> {
        let check = |g: f64| {
            if g > 0.0 && g < 1.0 {
                Ok(())
            } else {
                Err(SelectError::InvalidConfig(format!("gamma must lie in (0, 1), got {g}")))
            }
        };
        match *self {
            GammaRule::None => Ok(()),
            GammaRule::AnyExceeds { gamma } => check(gamma),
            GammaRule::FractionExceeds { gamma, fraction } => {
                check(gamma)?;
                if fraction > 0.0 && fraction <= 1.0 {
                    Ok(())
                } else {
                    Err(SelectError::InvalidConfig(format!(
                        "gamma fraction must lie in (0, 1], got {fraction}"
                    )))
                }
            }
            GammaRule::CountExceeds { gamma, count } => {
                check(gamma)?;
                if count >= 1 {
                    Ok(())
                } else {
                    Err(SelectError::InvalidConfig("gamma count must be at least 1".into()))
                }
            }
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            GammaRule::None => None,
            GammaRule::AnyExceeds { gamma }
            | GammaRule::FractionExceeds { gamma, .. }
            | GammaRule::CountExceeds { gamma, .. } => Some(gamma),
        }
    }

    /// Whether the rule fires on a stage row.
    pub fn fires(&self, row: &[f64], null_col: usize) -> bool {
        let Some(gamma) = self.gamma() else {
            return false;
        };
        let cap = 100.0 * gamma;
        let real = row.len() - 1;
        let above = row
            .iter()
            .enumerate()
            .filter(|&(c, &s)| c != null_col && s > cap)
            .count();
        match *self {
            GammaRule::None => false,
            GammaRule::AnyExceeds { .. } => above >= 1,
            GammaRule::FractionExceeds { fraction, .. } => real > 0 && above as f64 >= fraction * real as f64,
            GammaRule::CountExceeds { count, .. } => above >= count,
        }
    }

    /// Short form used in result tables, `____` for no rule.
    pub fn label(&self) -> String {
        match *self {
            GammaRule::None => "____".into(),
            GammaRule::AnyExceeds { gamma } => format!("{gamma:.2}"),
            GammaRule::FractionExceeds { gamma, fraction } => format!("{gamma:.2}@{fraction}"),
            GammaRule::CountExceeds { gamma, count } => format!("{gamma:.2}x{count}"),
        }
    }
}

/// `none`, `any:G`, `frac:F:G` or `count:C:G`.
impl FromStr for GammaRule {
    type Err = SelectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |x: &str| -> Result<f64, SelectError> {
            x.trim().parse::<f64>().map_err(|e| parse_error(s, e.to_string()))
        };
        let rule = match parts.as_slice() {
            ["none"] => GammaRule::None,
            ["any", g] => GammaRule::AnyExceeds { gamma: num(g)? },
            ["frac", f, g] => GammaRule::FractionExceeds {
                gamma: num(g)?,
                fraction: num(f)?,
            },
            ["count", c, g] => GammaRule::CountExceeds {
                gamma: num(g)?,
                count: c
                    .trim()
                    .parse()
                    .map_err(|e: std::num::ParseIntError| parse_error(s, e.to_string()))?,
            },
            _ => return Err(parse_error(s, "expected none, any:G, frac:F:G or count:C:G")),
        };
        rule.validate().map_err(|e| parse_error(s, e.to_string()))?;
        Ok(rule)
    }
}

impl fmt::Display for GammaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GammaRule::None => f.write_str("none"),
            GammaRule::AnyExceeds { gamma } => write!(f, "any:{gamma}"),
            GammaRule::FractionExceeds { gamma, fraction } => write!(f, "frac:{fraction}:{gamma}"),
            GammaRule::CountExceeds { gamma, count } => write!(f, "count:{count}:{gamma}"),
        }
    }
}

/// Picks the decision stage inside the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub enum StageSelector {
    #[default]
    First,
    Last,
    MinEntropy,
    MaxEntropy,
    MinVariance,
    MaxVariance,
    MaxStDev,
}

impl StageSelector {
    pub const ALL: [StageSelector; 7] = [
        StageSelector::First,
        StageSelector::Last,
        StageSelector::MinEntropy,
        StageSelector::MaxEntropy,
        StageSelector::MinVariance,
        StageSelector::MaxVariance,
        StageSelector::MaxStDev,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StageSelector::First => "First",
            StageSelector::Last => "Last",
            StageSelector::MinEntropy => "MinEntropy",
            StageSelector::MaxEntropy => "MaxEntropy",
            StageSelector::MinVariance => "MinVariance",
            StageSelector::MaxVariance => "MaxVariance",
            StageSelector::MaxStDev => "MaxStDev",
        }
    }
}

impl fmt::Display for StageSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StageSelector {
    type Err = SelectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_'))
            .collect::<String>()
            .to_ascii_lowercase();
        StageSelector::ALL
            .into_iter()
            .find(|sel| sel.name().to_ascii_lowercase() == key)
            .ok_or_else(|| parse_error(s, "unknown stage selector"))
    }
}

/// How the stage where NULL crosses `beta` is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum NullCutoff {
    /// The crossing stage is outside the pool.
    #[default]
    ExcludeCrossing,
    /// The crossing stage is the last stage of the pool.
    IncludeCrossing,
}

impl FromStr for NullCutoff {
    type Err = SelectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exclude" => Ok(NullCutoff::ExcludeCrossing),
            "include" => Ok(NullCutoff::IncludeCrossing),
            _ => Err(parse_error(s, "expected `exclude` or `include`")),
        }
    }
}

/// Parameters of the windowed rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gamma: GammaRule,
    pub selector: StageSelector,
    pub beta_mode: NullCutoff,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            alpha: 0.5,
            beta: None,
            gamma: GammaRule::None,
            selector: StageSelector::First,
            beta_mode: NullCutoff::ExcludeCrossing,
        }
    }
}

impl SelectionConfig {
    /// Checks the ranges and returns warnings for legal but odd settings.
    pub fn validate(&self) -> Result<Vec<String>, SelectError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(SelectError::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        let mut warnings = Vec::new();
        if let Some(beta) = self.beta {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(SelectError::InvalidConfig(format!(
                    "beta must lie in (0, 1), got {beta}"
                )));
            }
        }
        self.gamma.validate()?;
        if let Some(gamma) = self.gamma.gamma().filter(|&g| g <= self.alpha) {
            warnings.push(format!(
                "gamma {gamma} does not exceed alpha {}: the cap fires as soon as anyone qualifies",
                self.alpha
            ));
        }
        Ok(warnings)
    }

    /// Row label such as `MyVoteSys <α=0.50, β=0.33, γ=____, First>`.
    pub fn label(&self) -> String {
        let beta = self.beta.map_or("____".to_owned(), |b| format!("{b:.2}"));
        let mode = match (self.beta, self.beta_mode) {
            (Some(_), NullCutoff::IncludeCrossing) => "+",
            _ => "",
        };
        format!(
            "MyVoteSys <α={:.2}, β={beta}{mode}, γ={}, {}>",
            self.alpha,
            self.gamma.label(),
            self.selector
        )
    }
}

/// Consecutive stages a winner may be picked from. Stages are 1-based; a
/// `last_*` value of 0 means no stage survives that cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageWindow {
    pub first_by_alpha: Option<usize>,
    pub last_by_beta: usize,
    pub last_by_gamma: usize,
    pub pool: Option<(usize, usize)>,
}

impl StageWindow {
    pub fn contains(&self, stage: usize) -> bool {
        self.pool.is_some_and(|(a, b)| (a..=b).contains(&stage))
    }

    pub fn stages(&self) -> impl Iterator<Item = usize> {
        let (a, b) = self.pool.unwrap_or((1, 0));
        a..=b
    }

    /// Last stage allowed by both the beta and gamma cutoffs.
    pub fn last_allowed(&self) -> usize {
        self.last_by_beta.min(self.last_by_gamma)
    }
}

/// Statistics of one stage row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageStats {
    pub stage: usize,
    /// `None` when the row carries no score at all.
    pub entropy: Option<f64>,
    pub variance: f64,
    #[serde(rename = "stdDev")]
    pub stddev: f64,
}

pub fn stage_stats(st: &ScoreTable) -> Vec<StageStats> {
    (1..=st.num_stages())
        .map(|stage| {
            let variance = tally::stage_variance(st, stage).expect("stage in range");
            StageStats {
                stage,
                entropy: tally::stage_entropy(st, stage).ok(),
                variance,
                stddev: variance.sqrt(),
            }
        })
        .collect()
}

fn null_column(st: &ScoreTable, null_id: &str) -> Result<usize, SelectError> {
    st.column(null_id)
        .ok_or_else(|| SelectError::MissingNull(null_id.to_owned()))
}

/// Computes the stage pool for `cfg`.
pub fn stage_window(st: &ScoreTable, cfg: &SelectionConfig, null_id: &str) -> Result<StageWindow, SelectError> {
    let null = null_column(st, null_id)?;
    let stages = st.num_stages();
    let bar = 100.0 * cfg.alpha;
    let rows = st.scores();

    let first_by_alpha = rows
        .iter()
        .position(|row| {
            row.iter()
                .enumerate()
                .any(|(c, &s)| c != null && s > bar && row[null] <= s)
        })
        .map(|i| i + 1);

    // Without beta, the run stops once NULL itself passes alpha and the
    // stopping stage still counts.
    let (null_bar, mode) = match cfg.beta {
        Some(beta) => (100.0 * beta, cfg.beta_mode),
        None => (bar, NullCutoff::IncludeCrossing),
    };
    let last_by_beta = match rows.iter().position(|row| row[null] > null_bar) {
        None => stages,
        Some(i) => match mode {
            NullCutoff::ExcludeCrossing => i,
            NullCutoff::IncludeCrossing => i + 1,
        },
    };
    let last_by_gamma = rows
        .iter()
        .position(|row| cfg.gamma.fires(row, null))
        .map_or(stages, |i| i + 1);

    let end = last_by_beta.min(last_by_gamma);
    let pool = first_by_alpha.filter(|&f| f <= end).map(|f| (f, end));
    Ok(StageWindow {
        first_by_alpha,
        last_by_beta,
        last_by_gamma,
        pool,
    })
}

/// Picks a stage of the window's pool. Extremal selectors keep the earliest
/// stage on exact ties; `MaxStDev` ranks by variance, which orders stages the
/// same way as the standard deviation.
pub fn select_stage(window: &StageWindow, selector: StageSelector, stats: &[StageStats]) -> Result<usize, SelectError> {
    let (first, last) = window.pool.ok_or(SelectError::NoStage)?;
    let stat = |s: usize| stats.iter().find(|x| x.stage == s);
    let extremal = |key: &dyn Fn(&StageStats) -> Option<f64>, maximize: bool| {
        let mut best: Option<(usize, f64)> = None;
        for s in first..=last {
            let Some(v) = stat(s).and_then(key).filter(|v| !v.is_nan()) else {
                continue;
            };
            let better = match best {
                None => true,
                Some((_, b)) => {
                    if maximize {
                        v > b
                    } else {
                        v < b
                    }
                }
            };
            if better {
                best = Some((s, v));
            }
        }
        best.map_or(first, |(s, _)| s)
    };
    Ok(match selector {
        StageSelector::First => first,
        StageSelector::Last => last,
        StageSelector::MinEntropy => extremal(&|x| x.entropy, false),
        StageSelector::MaxEntropy => extremal(&|x| x.entropy, true),
        StageSelector::MinVariance => extremal(&|x| Some(x.variance), false),
        StageSelector::MaxVariance | StageSelector::MaxStDev => extremal(&|x| Some(x.variance), true),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    Basic,
    BetaGamma,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Basic => "basic",
            Algorithm::BetaGamma => "BetaGamma",
        })
    }
}

/// Outcome of a selection rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub algorithm: Algorithm,
    pub winner: String,
    pub winner_column: usize,
    pub null_candidate: Option<String>,
    pub stage: Option<usize>,
    pub score: Option<f64>,
    pub window: Option<StageWindow>,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gamma: GammaRule,
    pub selector: Option<StageSelector>,
    /// Set when no stage passed `alpha` and the last stage decided.
    pub fallback: bool,
    pub diagnostics: Vec<StageStats>,
}

impl Decision {
    pub fn is_null(&self) -> bool {
        self.null_candidate.as_deref() == Some(self.winner.as_str())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let w = self.window.as_ref();
        serde_json::json!({
            "algorithm": self.algorithm.to_string(),
            "NULLCandidate": self.null_candidate,
            "winner": self.winner,
            "stage": self.stage,
            "score": self.score,
            "bestScoreStage": w.map(StageWindow::last_allowed),
            "lastStageByBeta": w.map(|w| w.last_by_beta),
            "lastStageByGamma": w.map(|w| w.last_by_gamma),
            "firstStageByAlpha": w.and_then(|w| w.first_by_alpha),
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": match self.gamma {
                GammaRule::None => serde_json::Value::Null,
                GammaRule::AnyExceeds { gamma } => gamma.into(),
                other => other.to_string().into(),
            },
            "selector": self.selector.map(|s| s.name()),
            "fallback": self.fallback,
            "diagnostics": self.diagnostics,
        })
    }

    /// `key: value` block, one line per field; absent values print as `-`.
    pub fn to_text(&self) -> String {
        fn opt<T: fmt::Display>(x: Option<T>) -> String {
            x.map_or("-".to_owned(), |v| v.to_string())
        }
        let mut out = format!("algorithm: {}\n", self.algorithm);
        if let Some(null) = &self.null_candidate {
            out += &format!("NULLCandidate: {null}\n");
        }
        out += &format!("winner: {}\n", self.winner);
        out += &format!("stage: {}\n", opt(self.stage));
        out += &format!("score: {}\n", opt(self.score));
        if let Some(w) = &self.window {
            out += &format!("bestScoreStage: {}\n", w.last_allowed());
            out += &format!("lastStageByBeta: {}\n", w.last_by_beta);
            out += &format!("lastStageByGamma: {}\n", w.last_by_gamma);
            out += &format!("firstStageByAlpha: {}\n", opt(w.first_by_alpha));
        }
        out += &format!("alpha: {}\n", self.alpha);
        if self.algorithm == Algorithm::BetaGamma {
            out += &format!("beta: {}\n", opt(self.beta));
            out += &format!("gamma: {}\n", self.gamma);
            out += &format!("selector: {}\n", opt(self.selector));
        }
        if self.fallback {
            out += "fallback: true\n";
        }
        out
    }
}

/// Best column of `cols` at a stage, ties going to the earlier column in
/// [`tally::sort_columns`] order.
fn best_of(st: &ScoreTable, stage: usize, cols: impl Iterator<Item = usize>, priority: &[usize]) -> Option<usize> {
    cols.min_by(|&a, &b| {
        st.get(stage, b)
            .total_cmp(&st.get(stage, a))
            .then(priority[a].cmp(&priority[b]))
    })
}

/// Elects the best candidate of the first stage where anyone exceeds
/// `100 * alpha`. NULL competes like any other column. When no stage
/// qualifies, the best candidate of the last stage wins and
/// [`Decision::fallback`] is set.
pub fn basic_winner(st: &ScoreTable, alpha: f64) -> Result<Decision, SelectError> {
    if st.num_stages() == 0 {
        return Err(SelectError::EmptyTable);
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SelectError::InvalidConfig(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let priority = column_priority(st);
    let bar = 100.0 * alpha;
    let crossing = (1..=st.num_stages()).find(|&s| st.scores()[s - 1].iter().any(|&x| x > bar));
    let (stage, fallback) = match crossing {
        Some(s) => (s, false),
        None => (st.num_stages(), true),
    };
    let winner = best_of(st, stage, 0..st.num_candidates(), &priority).expect("table has columns");
    Ok(Decision {
        algorithm: Algorithm::Basic,
        winner: st.candidates()[winner].clone(),
        winner_column: winner,
        null_candidate: None,
        stage: Some(stage),
        score: Some(st.get(stage, winner)),
        window: None,
        alpha,
        beta: None,
        gamma: GammaRule::None,
        selector: None,
        fallback,
        diagnostics: stage_stats(st),
    })
}

/// Windowed selection.
///
/// Within the pool up to the selected stage `s`, a real candidate is eligible
/// at stage `t` when its score exceeds `alpha` there and NULL does not score
/// higher. Each candidate keeps its best eligible score; the highest one wins,
/// reported with the latest stage achieving it.
pub fn beta_gamma_winner(st: &ScoreTable, cfg: &SelectionConfig, null_id: &str) -> Result<Decision, SelectError> {
    if st.num_stages() == 0 {
        return Err(SelectError::EmptyTable);
    }
    cfg.validate()?;
    let null = null_column(st, null_id)?;
    let window = stage_window(st, cfg, null_id)?;
    let diagnostics = stage_stats(st);
    let mut decision = Decision {
        algorithm: Algorithm::BetaGamma,
        winner: null_id.to_owned(),
        winner_column: null,
        null_candidate: Some(null_id.to_owned()),
        stage: None,
        score: None,
        window: Some(window),
        alpha: cfg.alpha,
        beta: cfg.beta,
        gamma: cfg.gamma,
        selector: Some(cfg.selector),
        fallback: false,
        diagnostics,
    };
    let Some((first, _)) = window.pool else {
        return Ok(decision);
    };
    let selected = select_stage(&window, cfg.selector, &decision.diagnostics)?;
    let bar = 100.0 * cfg.alpha;
    let priority = column_priority(st);

    let mut best: Option<(usize, usize, f64)> = None;
    for col in (0..st.num_candidates()).filter(|&c| c != null) {
        let eligible = (first..=selected)
            .filter(|&t| st.get(t, col) > bar && st.get(t, null) <= st.get(t, col))
            .fold(None, |acc: Option<(usize, f64)>, t| {
                let s = st.get(t, col);
                match acc {
                    Some((_, b)) if b > s => acc,
                    _ => Some((t, s)),
                }
            });
        let Some((t, s)) = eligible else { continue };
        let better = match best {
            None => true,
            Some((bc, _, bs)) => s > bs || (s == bs && priority[col] < priority[bc]),
        };
        if better {
            best = Some((col, t, s));
        }
    }
    let (col, stage, score) = best.expect("the first pool stage always has an eligible candidate");
    decision.winner = st.candidates()[col].clone();
    decision.winner_column = col;
    decision.stage = Some(stage);
    decision.score = Some(score);
    Ok(decision)
}

/// Smallest number of stages `x` with `x > alpha * k`, which guarantees some
/// candidate exceeds `alpha` even when every preference is split evenly over
/// the `k` candidates. The electorate size does not enter the bound.
pub fn min_stages(_n: u64, k: u64, alpha: f64) -> u64 {
    let bound = alpha * k as f64;
    if bound < 0.0 {
        1
    } else {
        bound.floor() as u64 + 1
    }
}
