//! `--config` files: one `key = value` per line, `#` starts a comment.
//!
//! Each entry becomes `--key value` (or a bare `--key` for `true`; `false`
//! drops it) inserted right after the subcommand, so flags given on the
//! command line override the file.

use std::path::Path;

use crate::CliError;

pub fn parse_config(text: &str) -> Result<Vec<String>, CliError> {
    let mut args = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(CliError::Usage(format!(
                "config line {}: bad key '{key}'",
                lineno + 1
            )));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            v => {
                args.push(format!("--{key}"));
                args.push(v.trim_matches('"').to_string());
            }
        }
    }
    Ok(args)
}

/// Removes `--config PATH` / `--config=PATH` from `argv` and splices the
/// file's arguments in after the subcommand.
pub fn expand_config(argv: &[String]) -> Result<Vec<String>, CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let p = it
                .next()
                .ok_or_else(|| CliError::Usage("--config needs a path".into()))?;
            path = Some(p.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a.clone());
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let extra = parse_config(&text)?;
    let at = rest
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, a)| !a.starts_with('-'))
        .map(|(i, _)| i + 1)
        .unwrap_or(rest.len());
    rest.splice(at..at, extra);
    Ok(rest)
}
