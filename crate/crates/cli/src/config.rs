//! `key = value` config files and the resolved-config echo.
//!
//! File entries are turned into flags placed right after the subcommand
//! name, ahead of the user's own flags; since later occurrences win, the
//! command line overrides the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgMatches, CommandFactory};

use crate::Cli;

const GLOBAL_WITH_VALUE: [&str; 4] = ["--config", "--seed", "--jobs", "--echo"];

/// Position of the subcommand token and the `--config` value, if any.
fn scan(raw: &[String]) -> (Option<usize>, Option<String>) {
    let names: Vec<String> = Cli::command().get_subcommands().map(|s| s.get_name().to_string()).collect();
    let mut sub = None;
    let mut config = None;
    let mut i = 1;
    while i < raw.len() {
        let a = &raw[i];
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else if GLOBAL_WITH_VALUE.contains(&a.as_str()) {
            if a == "--config" {
                config = raw.get(i + 1).cloned();
            }
            i += 1;
        } else if sub.is_none() && names.contains(a) {
            sub = Some(i);
        }
        i += 1;
    }
    (sub, config)
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

/// Returns `raw` with the config file's entries spliced in as flags.
pub fn apply_config_file(raw: &[String]) -> Result<Vec<String>> {
    let (sub, config) = scan(raw);
    let (Some(sub), Some(path)) = (sub, config) else { return Ok(raw.to_vec()) };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let root = Cli::command();
    let cmd = root.find_subcommand(&raw[sub]).expect("scan found a known subcommand").clone();
    let mut injected = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config {path} line {}: expected 'key = value', found '{line}'", n + 1);
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            bail!("config {path} line {}: 'config' cannot be set from a config file", n + 1);
        }
        let arg = cmd
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .with_context(|| format!("config {path} line {}: unknown key '{key}' for '{}'", n + 1, raw[sub]))?;
        if arg.get_action().takes_values() {
            injected.push(format!("--{key}"));
            injected.push(value.to_string());
        } else {
            match parse_bool(value) {
                Some(true) => injected.push(format!("--{key}")),
                Some(false) => {}
                None => bail!("config {path} line {}: key '{key}' needs true or false, found '{value}'", n + 1),
            }
        }
    }
    let mut out = raw[..=sub].to_vec();
    out.extend(injected);
    out.extend_from_slice(&raw[sub + 1..]);
    Ok(out)
}

/// The resolved configuration of a run in config-file syntax, so it can
/// be fed back with `--config`.
pub fn echo(matches: &ArgMatches, name: &str) -> String {
    let mut out = format!("# molsynth {name}\n");
    let sub = matches.subcommand_matches(name).expect("subcommand was parsed");
    for key in ["seed", "jobs"] {
        if let Some(v) = matches.get_raw(key).and_then(|mut v| v.next()) {
            out.push_str(&format!("{key} = {}\n", v.to_string_lossy()));
        }
    }
    let root = Cli::command();
    let cmd = root.find_subcommand(name).expect("known subcommand");
    for arg in cmd.get_arguments() {
        let Some(long) = arg.get_long() else { continue };
        let id = arg.get_id().as_str();
        if arg.get_action().takes_values() {
            if let Some(values) = sub.get_raw(id) {
                for v in values {
                    out.push_str(&format!("{long} = {}\n", v.to_string_lossy()));
                }
            }
        } else if matches!(arg.get_action(), clap::ArgAction::SetTrue) {
            out.push_str(&format!("{long} = {}\n", sub.get_flag(id)));
        }
    }
    out
}

fn default_echo_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".cfg");
    out.with_file_name(name)
}

/// Writes the echo to `--echo` or next to the primary output; runs that
/// only print to stdout keep the echo in the log.
pub fn write_echo(cli: &Cli, primary: Option<&Path>, echo: &str) -> Result<()> {
    let path = match (&cli.echo, primary) {
        (Some(p), _) => p.clone(),
        (None, Some(out)) => default_echo_path(out),
        (None, None) => return Ok(()),
    };
    std::fs::write(&path, echo).with_context(|| format!("writing config echo {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn scan_skips_global_values() {
        let (sub, cfg) = scan(&args("molsynth --seed 3 --config c.cfg synth --count 4"));
        assert_eq!(sub, Some(5));
        assert_eq!(cfg.as_deref(), Some("c.cfg"));
        assert_eq!(scan(&args("molsynth --config=x split")).1.as_deref(), Some("x"));
    }

    #[test]
    fn file_values_come_before_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.cfg");
        std::fs::write(&cfg, "# comment\ncount = 5\nallow_replacement = true\nseed = 9\n").unwrap();
        let raw = args(&format!("molsynth --config {} synth --triplets t.csv --count 7", cfg.display()));
        let out = apply_config_file(&raw).unwrap();
        let joined = out.join(" ");
        assert!(joined.contains("synth --count 5 --allow-replacement --seed 9 --triplets t.csv --count 7"), "{joined}");
    }

    #[test]
    fn unknown_key_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.cfg");
        std::fs::write(&cfg, "epochs = 3\n").unwrap();
        let raw = args(&format!("molsynth --config {} synth", cfg.display()));
        let err = apply_config_file(&raw).unwrap_err().to_string();
        assert!(err.contains("unknown key 'epochs'"), "{err}");
    }
}
