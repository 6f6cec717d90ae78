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

//! Command-line front end. [`run`] takes the arguments and output streams
//! explicitly and returns the process exit status.

use crate::ballot::{parse_ballots, read_rows, validate_all, CandidateRoster};
use crate::select::{
    basic_winner, beta_gamma_winner, min_stages, GammaRule, NullCutoff, SelectionConfig, StageSelector,
};
use crate::sim::{run_simulation, RunOptions, SimConfig};
use crate::tally::tally;
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

/// Exit status for a non-NULL winner or a successful command.
pub const EXIT_OK: i32 = 0;
/// Exit status for bad input or flags.
pub const EXIT_ERROR: i32 = 1;
/// Exit status when the NULL candidate wins.
pub const EXIT_NULL_WINNER: i32 = 2;

/// Environment variable supplying the default simulation seed.
pub const SEED_ENV: &str = "STAGEVOTE_SEED";

#[derive(Debug, Parser)]
#[command(name = "stagevote", version, about = "Staged cumulative ranked voting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    /// First stage where anyone passes alpha; NULL competes normally.
    Basic,
    /// Stage window bounded by alpha, beta and gamma.
    BetaGamma,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tally a ballot CSV and decide the winner.
    Tally {
        /// Ballot file with header `voter_id,pref1,...,prefN`; `-` reads stdin.
        ballots: PathBuf,
        /// Inline roster such as `A,B,C,D,NULL`. Inferred from the ballots when absent.
        #[arg(long)]
        candidates: Option<String>,
        #[arg(long, value_enum, default_value_t = Rule::BetaGamma)]
        rule: Rule,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long)]
        beta: Option<f64>,
        /// `none`, `any:G`, `frac:F:G` or `count:C:G`.
        #[arg(long, default_value = "none")]
        gamma: GammaRule,
        #[arg(long, default_value = "first")]
        selector: StageSelector,
        /// Whether the stage where NULL crosses beta stays in the pool: `exclude` or `include`.
        #[arg(long, default_value = "exclude")]
        beta_mode: NullCutoff,
        /// Preferences counted per ballot. Defaults to the longest ballot, at least k-1.
        #[arg(long)]
        num_prefs: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Reject repeated voter ids.
        #[arg(long)]
        strict: bool,
    },
    /// Run an election simulation from a JSON config.
    Simulate {
        config: PathBuf,
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Run elections on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Smallest number of stages guaranteeing someone passes alpha.
    MinStages { n: u64, k: u64, alpha: f64 },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Tally {
            ballots,
            candidates,
            rule,
            alpha,
            beta,
            gamma,
            selector,
            beta_mode,
            num_prefs,
            format,
            strict,
        } => {
            let cfg = SelectionConfig {
                alpha,
                beta,
                gamma,
                selector,
                beta_mode,
            };
            let opts = TallyOptions {
                candidates,
                rule,
                cfg,
                num_prefs,
                format,
                strict,
            };
            cmd_tally(&ballots, &opts, out, err)
        }
        Command::Simulate {
            config,
            seed,
            format,
            serial,
        } => cmd_simulate(&config, RunOptions { seed, serial }, format, out, err),
        Command::MinStages { n, k, alpha } => cmd_min_stages(n, k, alpha, out),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_ERROR
        }
    }
}

#[derive(Debug, Clone)]
pub struct TallyOptions {
    pub candidates: Option<String>,
    pub rule: Rule,
    pub cfg: SelectionConfig,
    pub num_prefs: Option<usize>,
    pub format: Format,
    pub strict: bool,
}

fn read_input(path: &PathBuf) -> Result<Vec<u8>, String> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::Read::read_to_end(&mut std::io::stdin(), &mut buf).map_err(|e| format!("stdin: {e}"))?;
        Ok(buf)
    } else {
        std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), String> {
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())
}

pub fn cmd_tally(path: &PathBuf, opts: &TallyOptions, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let mut warnings = opts.cfg.validate().map_err(|e| e.to_string())?;
    if opts.rule == Rule::Basic && (opts.cfg.beta.is_some() || opts.cfg.gamma != GammaRule::None) {
        warnings.push("the basic rule ignores --beta and --gamma".to_owned());
    }
    let bytes = read_input(path)?;
    let rows = read_rows(bytes.as_slice()).map_err(|e| format!("{}: {e}", path.display()))?;
    let inferred = CandidateRoster::infer(&rows);
    let roster = match &opts.candidates {
        Some(spec) => {
            let roster = CandidateRoster::parse(spec).map_err(|e| format!("--candidates: {e}"))?;
            if let Ok(inferred) = &inferred {
                let mut a: Vec<&String> = roster.candidates().iter().collect();
                let mut b: Vec<&String> = inferred.candidates().iter().collect();
                a.sort();
                b.sort();
                if a != b {
                    warnings.push(format!(
                        "--candidates differs from the identifiers in the ballots ({}); using --candidates",
                        inferred.candidates().join(",")
                    ));
                }
            }
            roster
        }
        None => inferred.map_err(|e| format!("cannot infer the roster: {e}"))?,
    };
    let rows = parse_ballots(bytes.as_slice(), &roster).map_err(|e| e.to_string())?;
    let ballots = match validate_all(&rows, &roster, opts.strict) {
        Ok(b) => b,
        Err(errors) => {
            for e in &errors {
                let _ = writeln!(err, "invalid ballot: {e}");
            }
            return Err(format!("{} invalid ballot(s)", errors.len()));
        }
    };
    if ballots.is_empty() {
        return Err(format!("{}: no ballots", path.display()));
    }
    let k = roster.num_columns();
    let num_prefs = match opts.num_prefs {
        Some(p) if p >= 1 && p <= k => p,
        Some(p) => return Err(format!("--num-prefs must lie in [1, {k}], got {p}")),
        None => ballots.iter().map(|b| b.len()).max().unwrap_or(0).clamp(k - 1, k),
    };
    for w in &warnings {
        let _ = writeln!(err, "warning: {w}");
    }

    let tables = tally(&ballots, &roster, num_prefs).map_err(|e| e.to_string())?;
    let decision = match opts.rule {
        Rule::Basic => basic_winner(&tables.scores, opts.cfg.alpha),
        Rule::BetaGamma => beta_gamma_winner(&tables.scores, &opts.cfg, roster.null_id()),
    }
    .map_err(|e| e.to_string())?;

    match opts.format {
        Format::Text => {
            let mut text = tables.to_text();
            text.push('\n');
            text.push_str(&decision.to_text());
            emit(out, &text)?;
        }
        Format::Json => {
            let doc = serde_json::json!({
                "tables": tables.to_json(),
                "decision": decision.to_json(),
                "warnings": warnings,
            });
            emit(
                out,
                &format!(
                    "{}\n",
                    serde_json::to_string_pretty(&doc).expect("JSON values serialize")
                ),
            )?;
        }
    }
    Ok(if decision.winner == roster.null_id() {
        EXIT_NULL_WINNER
    } else {
        EXIT_OK
    })
}

pub fn cmd_simulate(
    path: &PathBuf,
    opts: RunOptions,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, String> {
    let text = String::from_utf8(read_input(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    let (cfg, warnings) = SimConfig::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    for w in &warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    if opts.seed.is_none() && cfg.seed.is_none() {
        let _ = writeln!(err, "warning: no seed given; using 0");
    }
    let run = run_simulation(&cfg, opts);
    match format {
        Format::Text => emit(out, &run.to_text())?,
        Format::Json => emit(
            out,
            &format!(
                "{}\n",
                serde_json::to_string_pretty(&run.to_json()).expect("JSON values serialize")
            ),
        )?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_min_stages(n: u64, k: u64, alpha: f64, out: &mut dyn Write) -> Result<i32, String> {
    if k < 1 {
        return Err("k must be at least 1".to_owned());
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    emit(out, &format!("{}\n", min_stages(n, k, alpha)))?;
    Ok(EXIT_OK)
}
