//! `key=value` config files and the resolved-settings echo.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

const SUBCOMMANDS: [&str; 5] = ["fit", "estimate-dim", "double", "simulate", "benchmark"];

/// Parse `key=value` lines into flag tokens. Blank lines and `#` comments
/// are skipped; `true` makes a bare switch and `false` drops the key.
pub fn parse_config(text: &str, source: &Path) -> Result<Vec<OsString>, CliError> {
    let mut tokens = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "{}:{}: expected key=value, got '{line}'",
                source.display(),
                i + 1
            ))
        })?;
        let key = key.trim().trim_start_matches('-').replace('_', "-");
        let value = value.trim();
        if key.is_empty() {
            return Err(CliError::Usage(format!(
                "{}:{}: empty key",
                source.display(),
                i + 1
            )));
        }
        match value {
            "true" => tokens.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                tokens.push(format!("--{key}").into());
                tokens.push(value.into());
            }
        }
    }
    Ok(tokens)
}

fn config_path(args: &[OsString]) -> Option<(usize, usize, OsString)> {
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return args.get(i + 1).map(|v| (i, 2, v.clone()));
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some((i, 1, v.into()));
        }
    }
    None
}

/// Splice the config file's tokens in right after the subcommand so that
/// later command-line flags override them.
pub fn expand_args(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some((at, width, path)) = config_path(&args) else {
        return Ok(args);
    };
    args.drain(at..at + width);
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let tokens = parse_config(&text, path)?;
    let sub = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()));
    match sub {
        Some(pos) => {
            args.splice(pos + 1..pos + 1, tokens);
        }
        None => args.extend(tokens),
    }
    Ok(args)
}

/// Ordered `key=value` pairs that reproduce a run via `--config`.
#[derive(Debug, Default)]
pub struct Resolved {
    entries: Vec<(String, String)>,
}

impl Resolved {
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.entries
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }
}
