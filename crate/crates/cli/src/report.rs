use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// What a command found: named checks, plus data worth keeping.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub verdicts: Vec<Verdict>,
    pub artifacts: serde_json::Map<String, Value>,
    #[serde(skip)]
    text: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.into(),
            verdicts: Vec::new(),
            artifacts: serde_json::Map::new(),
            text: Vec::new(),
        }
    }

    pub fn verdict(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn artifact(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("artifacts serialize");
        self.artifacts.insert(name.into(), v);
    }

    /// A line shown only in text output.
    pub fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("reports serialize") + "\n",
            Format::Text => {
                let mut out = String::new();
                for v in &self.verdicts {
                    let mark = if v.pass { "PASS" } else { "FAIL" };
                    let _ = writeln!(out, "{mark} {}: {}", v.name, v.detail);
                }
                for l in &self.text {
                    let _ = writeln!(out, "{l}");
                }
                out
            }
        }
    }
}
