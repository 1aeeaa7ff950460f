use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

/// Outcome of one command. `result` and `lines` carry the same numbers;
/// `lines` is only the human layout.
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub seed: Option<u64>,
    pub context: Option<String>,
    pub passed: bool,
    pub result: Value,
    pub lines: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, config: Value) -> Self {
        Report { command, config, seed: None, context: None, passed: true, result: json!({}), lines: Vec::new() }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    /// Records a named check and folds it into the overall status.
    pub fn check(&mut self, name: &str, ok: bool, detail: impl std::fmt::Display) {
        self.passed &= ok;
        self.lines.push(format!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" }));
    }

    /// Hash of the command, its configuration and the context fingerprint.
    pub fn config_hash(&self) -> String {
        let key = json!({ "command": self.command, "config": self.config, "context": self.context });
        hex::encode(Sha256::digest(key.to_string().as_bytes()))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => {
                let record = json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": self.command,
                    "status": if self.passed { "pass" } else { "fail" },
                    "config_hash": self.config_hash(),
                    "seed": self.seed,
                    "context": self.context,
                    "config": self.config,
                    "result": self.result,
                });
                format!("{}\n", serde_json::to_string_pretty(&record).expect("json values serialise"))
            }
            Format::Text => {
                let mut out = format!("pks-lab {}\nconfig hash {}\n", self.command, self.config_hash());
                if let Some(seed) = self.seed {
                    out += &format!("seed {seed}\n");
                }
                if let Some(ctx) = &self.context {
                    out += &format!("context {ctx}\n");
                }
                for l in &self.lines {
                    out += l;
                    out.push('\n');
                }
                out += if self.passed { "status PASS\n" } else { "status FAIL\n" };
                out
            }
        }
    }
}
