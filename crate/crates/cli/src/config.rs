//! `--config FILE` support.
//!
//! The file is a JSON object whose keys are long flag names of the chosen
//! subcommand. Its entries are spliced into the argument list right after the
//! subcommand name, ahead of the user's own flags; since every flag overrides
//! earlier occurrences of itself, explicit flags win.

use std::ffi::OsString;

use serde_json::Value;

use crate::error::CliError;

/// Returns the argument list with config entries injected.
pub fn inject_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("config {path}: {e}")))?;
    let flags = flags_from_json(&value).map_err(|msg| CliError::Input(format!("config {path}: {msg}")))?;
    let Some(at) = subcommand_position(&args) else {
        return Ok(args);
    };
    let mut out = args[..=at].to_vec();
    out.extend(flags.into_iter().map(OsString::from));
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<String> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            return it.next().map(|p| p.to_string_lossy().into_owned());
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Index of the first positional token, which is the subcommand.
fn subcommand_position(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            i += 2;
            continue;
        }
        if !a.starts_with('-') {
            return Some(i);
        }
        i += 1;
    }
    None
}

pub fn flags_from_json(value: &Value) -> Result<Vec<String>, String> {
    let Value::Object(map) = value else {
        return Err("top level must be an object".into());
    };
    let mut out = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Null => {}
            Value::Bool(b) => out.push(format!("{flag}={b}")),
            Value::Number(n) => out.push(format!("{flag}={n}")),
            Value::String(s) => out.push(format!("{flag}={s}")),
            Value::Array(items) if key == "param" => {
                for item in items {
                    out.push(format!("{flag}={}", scalar(item).ok_or(format!("bad entry in {key}"))?));
                }
            }
            Value::Array(items) => {
                let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
                out.push(format!(
                    "{flag}={}",
                    parts.ok_or(format!("bad entry in {key}"))?.join(",")
                ));
            }
            Value::Object(_) => return Err(format!("nested object for {key}")),
        }
    }
    Ok(out)
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}
