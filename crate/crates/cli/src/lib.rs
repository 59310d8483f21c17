//! Command-line front end for the `weaklog` library.
//!
//! [`run`] parses arguments, executes one command and renders its report
//! without touching the process streams, so the binary and the tests share
//! one code path. Exit codes: 0 affirmative, 1 negative verdict, 2 input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Parser;
use serde::Serialize;

mod args;
mod commands;
pub mod registry;

pub use args::{Cli, Command, Format};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Affirmative,
    Negative,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Affirmative
        } else {
            Verdict::Negative
        }
    }

    pub fn code(self) -> i32 {
        match self {
            Verdict::Affirmative => 0,
            Verdict::Negative => 1,
        }
    }
}

/// Everything needed to rerun a command; embedded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub params: serde_json::Value,
}

/// A finished command before rendering.
#[derive(Debug)]
pub struct Outcome {
    pub config: RunConfig,
    pub text: String,
    pub json: serde_json::Value,
    /// `(file name, contents)`; the first one is what `--format csv` prints.
    pub csv: Vec<(String, String)>,
    pub verdict: Verdict,
}

impl Outcome {
    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        Ok(match format {
            Format::Text => {
                let cfg = serde_json::to_string(&self.config)?;
                let mut s = format!("# weaklog {} {}\n", self.config.command, cfg);
                s.push_str(&self.text);
                if !s.ends_with('\n') {
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let doc = serde_json::json!({ "run_config": self.config, "report": self.json });
                serde_json::to_string_pretty(&doc)? + "\n"
            }
            Format::Csv => match self.csv.first() {
                Some((_, body)) => body.clone(),
                None => anyhow::bail!("`{}` has no CSV output; use --format text or json", self.config.command),
            },
        })
    }

    /// Writes `report.txt`, `report.json` and every CSV artifact into `dir`.
    pub fn write_to(&self, dir: &Path) -> anyhow::Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("report.txt"), self.render(Format::Text)?)?;
        fs::write(dir.join("report.json"), self.render(Format::Json)?)?;
        for (name, body) in &self.csv {
            fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> RunResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let msg = e.render().to_string();
            return if code == 0 {
                RunResult { code, stdout: msg, stderr: String::new() }
            } else {
                RunResult { code, stdout: String::new(), stderr: msg }
            };
        }
    };
    let format = cli.command.common().format;
    let out = cli.command.common().out.clone();
    let result = commands::execute(&cli.command).and_then(|o| {
        if let Some(dir) = &out {
            o.write_to(dir)?;
        }
        Ok((o.render(format)?, o.verdict))
    });
    match result {
        Ok((stdout, verdict)) => RunResult {
            code: verdict.code(),
            stdout,
            stderr: String::new(),
        },
        Err(e) => {
            let mut stderr = String::new();
            let _ = writeln!(stderr, "error: {e:#}");
            RunResult { code: 2, stdout: String::new(), stderr }
        }
    }
}

impl Command {
    pub fn common(&self) -> &args::Common {
        match self {
            Command::CheckLog { common }
            | Command::CheckWeaklog { common, .. }
            | Command::Witness { common, .. }
            | Command::Blowup { common, .. }
            | Command::Pullback { common, .. }
            | Command::Pushout { common, .. }
            | Command::Principalize { common, .. }
            | Command::Simulate { common, .. }
            | Command::EpsFamily { common, .. }
            | Command::Stability { common, .. }
            | Command::Reproduce { common, .. } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckLog { .. } => "check-log",
            Command::CheckWeaklog { .. } => "check-weaklog",
            Command::Witness { .. } => "witness",
            Command::Blowup { .. } => "blowup",
            Command::Pullback { .. } => "pullback",
            Command::Pushout { .. } => "pushout",
            Command::Principalize { .. } => "principalize",
            Command::Simulate { .. } => "simulate",
            Command::EpsFamily { .. } => "eps-family",
            Command::Stability { .. } => "stability",
            Command::Reproduce { .. } => "reproduce",
        }
    }
}
