//! `--config <file>` support: a flat `key = value` file whose keys are flag
//! names. Values fill in flags that are absent from the command line.

use std::path::Path;

use clap::CommandFactory;

use crate::{Cli, CliError};

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
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

/// Long flag names accepted by the (sub)command the arguments select,
/// including global flags.
fn accepted_flags(args: &[String]) -> Vec<(String, bool)> {
    let root = Cli::command();
    let mut flags: Vec<(String, bool)> = Vec::new();
    let collect = |cmd: &clap::Command, flags: &mut Vec<(String, bool)>| {
        for a in cmd.get_arguments() {
            if let Some(l) = a.get_long() {
                let takes_value = a.get_action().takes_values();
                flags.push((l.to_string(), takes_value));
            }
        }
    };
    collect(&root, &mut flags);
    let mut cmd = &root;
    for a in args.iter().skip(1) {
        if let Some(sub) = cmd.find_subcommand(a) {
            cmd = sub;
            collect(cmd, &mut flags);
        }
    }
    flags
}

/// Returns `args` with config-file values appended for every flag the
/// selected command accepts and the command line does not already set.
pub fn merge_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let entries = parse_config(&text)?;
    let flags = accepted_flags(&args);
    let mut merged = args.clone();
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        let Some((_, takes_value)) = flags.iter().find(|(f, _)| *f == key) else {
            continue;
        };
        let flag = format!("--{key}");
        let present = args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if present {
            continue;
        }
        if *takes_value {
            merged.push(flag);
            merged.push(value);
        } else if value.eq_ignore_ascii_case("true") {
            merged.push(flag);
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let cfg = parse_config("# defaults\ntrials = 10\nmax_steps=5 # inline\n\n").unwrap();
        assert_eq!(cfg, [("trials".into(), "10".into()), ("max-steps".into(), "5".into())]);
        assert!(parse_config("oops").is_err());
    }

    #[test]
    fn flags_follow_the_selected_subcommand() {
        let args: Vec<String> = ["linecross", "simulate", "crossing"].map(String::from).to_vec();
        let flags = accepted_flags(&args);
        assert!(flags.iter().any(|(f, _)| f == "trials"));
        assert!(flags.iter().any(|(f, _)| f == "seed"));
        assert!(flags.iter().any(|(f, v)| f == "compare-analytic" && !v));
        let args: Vec<String> = ["linecross", "count"].map(String::from).to_vec();
        assert!(!accepted_flags(&args).iter().any(|(f, _)| f == "trials"));
    }
}
