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

//! Candidates, ballots and the ballot CSV format.
//!
//! A ballot file looks like
//!
//! ```text
//! voter_id,pref1,pref2,pref3
//! v1,D,B,NULL
//! v2,A
//! ```
//!
//! The literal tokens `NULL` and `IDK` name the NULL candidate and the
//! "I don't know" candidate of the roster. Empty cells are only allowed as a
//! suffix of a row, and trailing cells may be omitted altogether.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use thiserror::Error;

/// Token naming the NULL candidate in ballot files.
pub const NULL_TOKEN: &str = "NULL";
/// Token naming the "I don't know" candidate in ballot files.
pub const IDK_TOKEN: &str = "IDK";

/// Errors raised while building a [`CandidateRoster`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RosterError {
    #[error("roster needs at least one real candidate plus NULL, got {0} candidate(s)")]
    TooSmall(usize),
    #[error("candidate `{0}` appears twice in the roster")]
    DuplicateCandidate(String),
    #[error("NULL candidate `{0}` is not part of the roster")]
    MissingNull(String),
    #[error("\"I don't know\" candidate `{0}` is not part of the roster")]
    MissingIdk(String),
    #[error("the NULL and \"I don't know\" candidates must differ (both `{0}`)")]
    NullIsIdk(String),
    #[error("empty candidate identifier in roster")]
    EmptyIdentifier,
}

/// Errors raised while reading a ballot CSV file.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("ballot file is empty")]
    EmptyInput,
    #[error("unexpected header: {0}")]
    Header(String),
    #[error("line {line}: malformed CSV: {message}")]
    Csv { line: u64, message: String },
    #[error("line {line}: {found} cells but the header declares {expected}")]
    TooManyCells { line: u64, found: usize, expected: usize },
    #[error("line {line}: preference {column} is empty but a later preference is filled")]
    Gap { line: u64, column: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reasons a [`RawBallot`] is rejected by [`validate_ballot`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BallotError {
    #[error("line {line}, voter `{voter_id}`: candidate `{id}` ranked twice (preferences {} and {})", positions.0, positions.1)]
    DuplicateCandidate {
        voter_id: String,
        line: u64,
        id: String,
        positions: (usize, usize),
    },
    #[error("line {line}, voter `{voter_id}`: unknown candidate `{id}` at preference {position}")]
    UnknownCandidate {
        voter_id: String,
        line: u64,
        id: String,
        position: usize,
    },
    #[error("line {line}: voter id `{voter_id}` already used on line {first_line}")]
    DuplicateVoter {
        voter_id: String,
        line: u64,
        first_line: u64,
    },
}

/// The ordered set of candidates of an election, including the NULL
/// candidate and optionally an "I don't know" candidate.
///
/// Every candidate except "I don't know" owns a column in the tally tables.
/// Stamps for "I don't know" are ignored and their preference is spread over
/// the remaining candidates, see [`expand_incomplete`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRoster {
    candidates: Vec<String>,
    null_index: usize,
    idk_index: Option<usize>,
    lookup: HashMap<String, usize>,
    column_of: Vec<Option<usize>>,
    columns: Vec<usize>,
}

impl CandidateRoster {
    pub fn new(candidates: Vec<String>, null_id: &str, idk_id: Option<&str>) -> Result<Self, RosterError> {
        let mut lookup = HashMap::with_capacity(candidates.len());
        for (i, c) in candidates.iter().enumerate() {
            if c.is_empty() {
                return Err(RosterError::EmptyIdentifier);
            }
            if lookup.insert(c.clone(), i).is_some() {
                return Err(RosterError::DuplicateCandidate(c.clone()));
            }
        }
        let null_index = *lookup
            .get(null_id)
            .ok_or_else(|| RosterError::MissingNull(null_id.to_owned()))?;
        let idk_index = match idk_id {
            None => None,
            Some(idk) if idk == null_id => return Err(RosterError::NullIsIdk(idk.to_owned())),
            Some(idk) => Some(*lookup.get(idk).ok_or_else(|| RosterError::MissingIdk(idk.to_owned()))?),
        };
        let columns: Vec<usize> = (0..candidates.len()).filter(|&i| Some(i) != idk_index).collect();
        if columns.len() < 2 {
            return Err(RosterError::TooSmall(columns.len()));
        }
        let mut column_of = vec![None; candidates.len()];
        for (col, &i) in columns.iter().enumerate() {
            column_of[i] = Some(col);
        }
        Ok(CandidateRoster {
            candidates,
            null_index,
            idk_index,
            lookup,
            column_of,
            columns,
        })
    }

    /// Parses an inline roster such as `A,B,C,D,NULL`. The `NULL` token is the
    /// NULL candidate; `IDK`, if listed, is the "I don't know" candidate.
    pub fn parse(spec: &str) -> Result<Self, RosterError> {
        let candidates: Vec<String> = spec
            .split(',')
            .map(|s| s.trim().to_owned())
            .filter(|s| !s.is_empty())
            .collect();
        let idk = candidates.iter().any(|c| c == IDK_TOKEN);
        Self::new(candidates, NULL_TOKEN, idk.then_some(IDK_TOKEN))
    }

    /// Builds a roster from the identifiers used in a ballot file: the real
    /// candidates in lexicographic order, then `NULL`, then `IDK` if it was
    /// used anywhere.
    pub fn infer(rows: &[RawBallot]) -> Result<Self, RosterError> {
        let mut seen: Vec<&str> = rows
            .iter()
            .flat_map(|r| r.prefs.iter().map(String::as_str))
            .filter(|&p| p != NULL_TOKEN && p != IDK_TOKEN)
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        seen.sort_unstable();
        let mut candidates: Vec<String> = seen.into_iter().map(str::to_owned).collect();
        candidates.push(NULL_TOKEN.to_owned());
        let idk = rows.iter().any(|r| r.prefs.iter().any(|p| p == IDK_TOKEN));
        if idk {
            candidates.push(IDK_TOKEN.to_owned());
        }
        Self::new(candidates, NULL_TOKEN, idk.then_some(IDK_TOKEN))
    }

    /// Number of candidates in the roster, "I don't know" included.
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    pub fn null_id(&self) -> &str {
        &self.candidates[self.null_index]
    }

    pub fn idk_id(&self) -> Option<&str> {
        self.idk_index.map(|i| self.candidates[i].as_str())
    }

    pub fn null_index(&self) -> usize {
        self.null_index
    }

    pub fn idk_index(&self) -> Option<usize> {
        self.idk_index
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.lookup.get(id).copied()
    }

    /// Number of tally columns (the roster minus "I don't know").
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    /// Tally column of a roster index; `None` for "I don't know".
    pub fn column_of(&self, index: usize) -> Option<usize> {
        self.column_of[index]
    }

    pub fn null_column(&self) -> usize {
        self.column_of[self.null_index].expect("NULL always owns a column")
    }

    /// Candidate identifiers in column order.
    pub fn column_labels(&self) -> Vec<String> {
        self.columns.iter().map(|&i| self.candidates[i].clone()).collect()
    }

    /// Maps the file tokens `NULL` and `IDK` onto this roster's identifiers.
    pub fn resolve_token<'a>(&'a self, token: &'a str) -> &'a str {
        match token {
            NULL_TOKEN => self.null_id(),
            IDK_TOKEN => self.idk_id().unwrap_or(token),
            other => other,
        }
    }

    fn file_token(&self, index: usize) -> &str {
        if index == self.null_index {
            NULL_TOKEN
        } else if Some(index) == self.idk_index {
            IDK_TOKEN
        } else {
            &self.candidates[index]
        }
    }
}

/// An unchecked row of a ballot file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawBallot {
    pub voter_id: String,
    pub prefs: Vec<String>,
    /// 1-based line in the source file, 0 when not read from a file.
    pub line: u64,
}

impl RawBallot {
    pub fn new(voter_id: impl Into<String>, prefs: &[&str]) -> Self {
        RawBallot {
            voter_id: voter_id.into(),
            prefs: prefs.iter().map(|&p| p.to_owned()).collect(),
            line: 0,
        }
    }
}

/// A valid ballot: distinct roster members in preference order, stored as
/// roster indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ballot {
    pub voter_id: String,
    prefs: Vec<usize>,
}

impl Ballot {
    /// Validates `prefs` against `roster`.
    pub fn from_ids(
        voter_id: impl Into<String>,
        prefs: &[&str],
        roster: &CandidateRoster,
    ) -> Result<Self, BallotError> {
        let mut raw = RawBallot::new(voter_id, prefs);
        for p in raw.prefs.iter_mut() {
            *p = roster.resolve_token(p).to_owned();
        }
        validate_ballot(&raw, roster)
    }

    /// Builds a ballot from roster indices. Panics on out-of-range or
    /// repeated indices.
    pub fn from_indices(voter_id: impl Into<String>, prefs: Vec<usize>, roster: &CandidateRoster) -> Self {
        let mut seen = vec![false; roster.len()];
        for &p in &prefs {
            assert!(!std::mem::replace(&mut seen[p], true), "candidate {p} ranked twice");
        }
        Ballot {
            voter_id: voter_id.into(),
            prefs,
        }
    }

    /// Roster indices in preference order.
    pub fn prefs(&self) -> &[usize] {
        &self.prefs
    }

    pub fn len(&self) -> usize {
        self.prefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefs.is_empty()
    }

    pub fn is_complete(&self, roster: &CandidateRoster) -> bool {
        self.prefs.len() == roster.len()
    }

    pub fn ids<'a>(&'a self, roster: &'a CandidateRoster) -> impl Iterator<Item = &'a str> + 'a {
        self.prefs.iter().map(move |&i| roster.candidates[i].as_str())
    }
}

/// Reads the rows of a ballot CSV file without resolving any identifier.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<RawBallot>, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(ParseError::EmptyInput),
        Some(h) => h.map_err(csv_error)?,
    };
    let width = check_header(&header)?;

    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() > width + 1 {
            return Err(ParseError::TooManyCells {
                line,
                found: record.len(),
                expected: width + 1,
            });
        }
        let voter_id = record.get(0).unwrap_or_default().to_owned();
        let cells: Vec<&str> = record.iter().skip(1).collect();
        let filled = cells.iter().position(|c| c.is_empty()).unwrap_or(cells.len());
        if cells[filled..].iter().any(|c| !c.is_empty()) {
            return Err(ParseError::Gap {
                line,
                column: filled + 1,
            });
        }
        rows.push(RawBallot {
            voter_id,
            prefs: cells[..filled].iter().map(|&c| c.to_owned()).collect(),
            line,
        });
    }
    Ok(rows)
}

fn csv_error(e: csv::Error) -> ParseError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => ParseError::Io(io),
        kind => ParseError::Csv {
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Returns the number of preference columns declared by the header.
fn check_header(header: &csv::StringRecord) -> Result<usize, ParseError> {
    match header.get(0) {
        Some("voter_id") => {}
        other => {
            return Err(ParseError::Header(format!(
                "first column must be `voter_id`, found `{}`",
                other.unwrap_or_default()
            )))
        }
    }
    if header.len() < 2 {
        return Err(ParseError::Header("no preference columns".into()));
    }
    for (i, name) in header.iter().enumerate().skip(1) {
        if name != format!("pref{i}") {
            return Err(ParseError::Header(format!(
                "column {} must be `pref{i}`, found `{name}`",
                i + 1
            )));
        }
    }
    Ok(header.len() - 1)
}

/// Reads a ballot file and maps the `NULL`/`IDK` tokens onto `roster`.
pub fn parse_ballots<R: Read>(input: R, roster: &CandidateRoster) -> Result<Vec<RawBallot>, ParseError> {
    let mut rows = read_rows(input)?;
    for row in rows.iter_mut() {
        for p in row.prefs.iter_mut() {
            if let Some(resolved) =
                matches!(p.as_str(), NULL_TOKEN | IDK_TOKEN).then(|| roster.resolve_token(p).to_owned())
            {
                *p = resolved;
            }
        }
    }
    Ok(rows)
}

/// Accepts a raw ballot iff it ranks only roster members, each at most once.
pub fn validate_ballot(raw: &RawBallot, roster: &CandidateRoster) -> Result<Ballot, BallotError> {
    let mut first_seen: HashMap<usize, usize> = HashMap::new();
    let mut prefs = Vec::with_capacity(raw.prefs.len());
    for (pos, id) in raw.prefs.iter().enumerate() {
        let index = roster.index_of(id).ok_or_else(|| BallotError::UnknownCandidate {
            voter_id: raw.voter_id.clone(),
            line: raw.line,
            id: id.clone(),
            position: pos + 1,
        })?;
        if let Some(&earlier) = first_seen.get(&index) {
            return Err(BallotError::DuplicateCandidate {
                voter_id: raw.voter_id.clone(),
                line: raw.line,
                id: id.clone(),
                positions: (earlier + 1, pos + 1),
            });
        }
        first_seen.insert(index, pos);
        prefs.push(index);
    }
    Ok(Ballot {
        voter_id: raw.voter_id.clone(),
        prefs,
    })
}

/// Validates every row, collecting all rejections. With `strict`, repeated
/// voter ids are rejected as well.
pub fn validate_all(
    rows: &[RawBallot],
    roster: &CandidateRoster,
    strict: bool,
) -> Result<Vec<Ballot>, Vec<BallotError>> {
    let mut ballots = Vec::with_capacity(rows.len());
    let mut errors = Vec::new();
    let mut voters: HashMap<&str, u64> = HashMap::new();
    for row in rows {
        if strict {
            if let Some(&first_line) = voters.get(row.voter_id.as_str()) {
                errors.push(BallotError::DuplicateVoter {
                    voter_id: row.voter_id.clone(),
                    line: row.line,
                    first_line,
                });
                continue;
            }
            voters.insert(&row.voter_id, row.line);
        }
        match validate_ballot(row, roster) {
            Ok(b) => ballots.push(b),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(ballots)
    } else {
        Err(errors)
    }
}

/// Writes ballots in the CSV format read by [`read_rows`], with
/// `num_prefs` preference columns.
pub fn write_ballots<W: Write>(
    out: W,
    ballots: &[Ballot],
    roster: &CandidateRoster,
    num_prefs: usize,
) -> csv::Result<()> {
    let mut writer = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let mut header = vec!["voter_id".to_owned()];
    header.extend((1..=num_prefs).map(|i| format!("pref{i}")));
    writer.write_record(&header)?;
    for b in ballots {
        let mut record = vec![b.voter_id.as_str()];
        record.extend(b.prefs.iter().take(num_prefs).map(|&i| roster.file_token(i)));
        if record.len() == 1 {
            // A lone field would be read back as a blank line.
            record.push("");
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Per-preference weights of a ballot after spreading its missing
/// preferences.
///
/// Each preference row is either a stamp (weight 1 on one column) or
/// missing, in which case the row's unit weight is split evenly over the
/// columns not stamped anywhere on the ballot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalBallot {
    rows: Vec<Option<usize>>,
    spread: Vec<usize>,
    num_columns: usize,
}

impl FractionalBallot {
    pub fn num_prefs(&self) -> usize {
        self.rows.len()
    }

    pub fn num_columns(&self) -> usize {
        self.num_columns
    }

    /// Stamped column of a 0-based preference row, `None` if the row is spread.
    pub fn stamp(&self, row: usize) -> Option<usize> {
        self.rows[row]
    }

    /// Columns sharing the weight of missing rows.
    pub fn spread(&self) -> &[usize] {
        &self.spread
    }

    pub fn is_fractional(&self) -> bool {
        self.rows.iter().any(Option::is_none) && self.spread.len() > 1
    }

    /// Weight of `column` at the 0-based preference `row`.
    pub fn weight(&self, row: usize, column: usize) -> BigRational {
        match self.rows[row] {
            Some(c) if c == column => BigRational::one(),
            Some(_) => BigRational::zero(),
            None if self.spread.contains(&column) => BigRational::new(BigInt::one(), BigInt::from(self.spread.len())),
            None => BigRational::zero(),
        }
    }

    pub fn row_weights(&self, row: usize) -> Vec<BigRational> {
        (0..self.num_columns).map(|c| self.weight(row, c)).collect()
    }

    /// Column with the largest weight in `row` (lowest column on ties).
    pub fn argmax(&self, row: usize) -> usize {
        match self.rows[row] {
            Some(c) => c,
            None => self.spread[0],
        }
    }
}

/// Expands a ballot over `num_prefs` preference rows.
///
/// Preferences past `num_prefs` are dropped. "I don't know" stamps count as
/// missing. Every missing row gives weight `1/m` to each of the `m` columns
/// that are not stamped on the (truncated) ballot.
///
/// # Panics
///
/// If `num_prefs` is zero or exceeds the number of tally columns.
pub fn expand_incomplete(b: &Ballot, roster: &CandidateRoster, num_prefs: usize) -> FractionalBallot {
    let k = roster.num_columns();
    assert!(
        (1..=k).contains(&num_prefs),
        "num_prefs must lie in 1..={k}, got {num_prefs}"
    );
    let mut rows: Vec<Option<usize>> = b.prefs.iter().take(num_prefs).map(|&i| roster.column_of(i)).collect();
    rows.resize(num_prefs, None);
    let mut stamped = vec![false; k];
    for c in rows.iter().flatten() {
        stamped[*c] = true;
    }
    let spread = (0..k).filter(|&c| !stamped[c]).collect();
    FractionalBallot {
        rows,
        spread,
        num_columns: k,
    }
}

impl fmt::Display for Ballot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.voter_id)?;
        for (i, p) in self.prefs.iter().enumerate() {
            write!(f, "{}{}", if i == 0 { " " } else { " > " }, p)?;
        }
        Ok(())
    }
}
