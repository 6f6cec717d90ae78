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

//! Staged cumulative ranked voting.
//!
//! Ballots rank candidates, including a `NULL` candidate meaning "none of
//! these is good enough" and, optionally, an "I don't know" candidate.
//! Preferences are counted by rank, accumulated stage by stage and turned
//! into percentage scores. A winner is then chosen from a window of stages
//! bounded by three thresholds:
//!
//! * `alpha`: a candidate must be backed by more than this share of voters;
//! * `beta`: stages where NULL has more than this share are too late;
//! * `gamma`: stages where candidates have more than this share are too late.
//!
//! ```
//! use stagevote::ballot::{Ballot, CandidateRoster};
//! use stagevote::select::{beta_gamma_winner, SelectionConfig};
//! use stagevote::tally::tally;
//!
//! let roster = CandidateRoster::parse("A,B,NULL").unwrap();
//! let ballots: Vec<Ballot> = [["A", "B", "NULL"], ["A", "NULL", "B"], ["B", "A", "NULL"]]
//!     .iter()
//!     .enumerate()
//!     .map(|(i, p)| Ballot::from_ids(i.to_string(), p, &roster).unwrap())
//!     .collect();
//! let tables = tally(&ballots, &roster, 3).unwrap();
//! let decision = beta_gamma_winner(&tables.scores, &SelectionConfig::default(), "NULL").unwrap();
//! assert_eq!(decision.winner, "A");
//! ```

pub mod ballot;
pub mod baselines;
pub mod cli;
pub mod select;
pub mod sim;
pub mod tally;

pub use ballot::{Ballot, CandidateRoster, FractionalBallot};
pub use select::{Decision, SelectionConfig, StageSelector};
pub use tally::{ScoreTable, TallySet};
