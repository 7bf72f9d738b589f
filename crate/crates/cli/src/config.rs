//! `--config file.json` expansion into ordinary arguments.
//!
//! The file is an object such as
//! `{"command": "flow", "state": "s.json", "time": [0.5, 1], "seed": 3}`.
//! Keys become `--kebab-case` flags, arrays become comma lists, `true`
//! becomes a bare flag and `false`/`null` are dropped. Flags given on the
//! command line after `--config` are appended and win over the file.

use std::ffi::OsString;
use std::path::Path;

use serde_json::Value;

use crate::error::{CliError, CliResult};

pub fn expand(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.to_string_lossy().starts_with("--config=")) else {
        return Ok(args);
    };
    let flag = args[pos].to_string_lossy().into_owned();
    let (path, consumed) = match flag.strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => {
            let p = args
                .get(pos + 1)
                .ok_or_else(|| CliError::usage("--config", "missing file path"))?;
            (p.to_string_lossy().into_owned(), 2)
        }
    };
    let from_file = config_args(Path::new(&path))?;
    let mut rest: Vec<OsString> = args[..pos].iter().chain(&args[pos + consumed..]).cloned().collect();
    let program = rest.remove(0);
    let mut out = vec![program];
    out.extend(from_file.into_iter().map(OsString::from));
    out.extend(rest);
    Ok(out)
}

fn config_args(path: &Path) -> CliResult<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        field: "--config".into(),
        path: path.to_path_buf(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage("--config", format!("{} is not valid JSON: {e}", path.display())))?;
    to_args(&value)
}

fn to_args(value: &Value) -> CliResult<Vec<String>> {
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::usage("--config", "top level must be a JSON object"))?;
    let command = obj
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::usage("--config", "missing string field \"command\""))?;
    let mut out = vec![command.to_string()];
    for (key, v) in obj {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag),
            Value::Array(items) => {
                let parts = items.iter().map(|x| scalar(key, x)).collect::<CliResult<Vec<_>>>()?;
                out.push(format!("{flag}={}", parts.join(",")));
            }
            other => out.push(format!("{flag}={}", scalar(key, other)?)),
        }
    }
    Ok(out)
}

fn scalar(key: &str, v: &Value) -> CliResult<String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        _ => Err(CliError::usage("--config", format!("field {key:?} must hold numbers or strings"))),
    }
}
