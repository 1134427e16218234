//! `--config FILE`: flat `key=value` defaults merged into argv.
//!
//! Each key is a long flag name. A key is injected only when the flag is
//! absent from the command line, so explicit flags always win. Keys that the
//! chosen subcommand does not take are skipped; keys no subcommand knows are
//! an error.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::Path;

use clap::{ArgAction, Command};

#[derive(Debug)]
pub struct ConfigError(pub String);

/// Returns `args` with config-file entries appended, or `args` untouched when
/// no `--config` is present.
pub fn merge(cmd: &Command, args: Vec<OsString>) -> Result<Vec<OsString>, ConfigError> {
    let strings: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let Some(path) = config_path(&strings) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| {
        ConfigError(format!(
            "cannot read config {}: {e}",
            Path::new(&path).display()
        ))
    })?;
    let entries = parse(&text)?;

    let Some(sub) = strings
        .iter()
        .skip(1)
        .find_map(|a| cmd.get_subcommands().find(|s| s.get_name() == a))
    else {
        // let clap report the missing subcommand
        return Ok(args);
    };
    let everywhere: BTreeSet<String> = cmd
        .get_subcommands()
        .flat_map(|s| {
            s.get_arguments()
                .filter_map(|a| a.get_long().map(str::to_string))
        })
        .collect();

    let mut out = args;
    for (line, key, value) in entries {
        if key == "config" {
            continue;
        }
        let Some(arg) = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
        else {
            if everywhere.contains(&key) {
                continue;
            }
            return Err(ConfigError(format!(
                "config line {line}: unknown key `{key}`"
            )));
        };
        let flag = format!("--{key}");
        let given = strings
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" | "1" | "yes" => out.push(flag.into()),
                "false" | "0" | "no" => {}
                other => {
                    return Err(ConfigError(format!(
                        "config line {line}: `{key}` expects true or false, got `{other}`"
                    )))
                }
            }
        } else {
            out.push(format!("{flag}={value}").into());
        }
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn parse(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError(format!(
                "config line {}: expected key=value",
                i + 1
            )));
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        entries.push((i + 1, key, v.trim().to_string()));
    }
    Ok(entries)
}
