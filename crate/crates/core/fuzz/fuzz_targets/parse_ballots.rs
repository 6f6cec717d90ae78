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

#![no_main]

use libfuzzer_sys::fuzz_target;
use stagevote::ballot::{read_rows, validate_all, CandidateRoster};
use stagevote::tally::tally;

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = read_rows(data) else { return };
    let Ok(roster) = CandidateRoster::infer(&rows) else {
        return;
    };
    let Ok(ballots) = validate_all(&rows, &roster, false) else {
        return;
    };
    if ballots.is_empty() || roster.num_columns() > 64 {
        return;
    }
    let k = roster.num_columns();
    let t = tally(&ballots, &roster, k).expect("valid ballots always tally");
    assert_eq!(t.scores.num_stages(), k);
});
