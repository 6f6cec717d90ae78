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
use stagevote::select::{basic_winner, beta_gamma_winner, SelectionConfig};
use stagevote::tally::ScoreTable;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(st) = ScoreTable::from_json(s) else { return };
    let _ = basic_winner(&st, 0.5);
    if st.column("NULL").is_some() {
        let _ = beta_gamma_winner(&st, &SelectionConfig::default(), "NULL");
    }
});
