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
use stagevote::ballot::CandidateRoster;
use stagevote::select::{GammaRule, NullCutoff, StageSelector};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = CandidateRoster::parse(s) {
        assert!(r.index_of(r.null_id()).is_some());
    }
    if let Ok(g) = s.parse::<GammaRule>() {
        // Rules print in the form they are parsed from.
        assert_eq!(g.to_string().parse::<GammaRule>().ok(), Some(g));
    }
    let _ = s.parse::<StageSelector>();
    let _ = s.parse::<NullCutoff>();
});
