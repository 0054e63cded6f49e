//! `key = value` configuration files.
//!
//! Each entry becomes `--key=value` spliced in right after the subcommand
//! name, ahead of the user's own flags. Since every flag overrides earlier
//! occurrences of itself, the command line wins over the file.

use std::ffi::OsString;
use std::path::Path;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if k.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Flags as they would be typed. Boolean switches take `true`/`false`.
fn as_flags(entries: &[(String, String)]) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (k, v) in entries {
        if k == "config" {
            return Err("a config file cannot name another config file".into());
        }
        match v.as_str() {
            "true" if matches!(k.as_str(), "json" | "no-cache") => out.push(format!("--{k}").into()),
            "false" if matches!(k.as_str(), "json" | "no-cache") => {}
            _ => out.push(format!("--{k}={v}").into()),
        }
    }
    Ok(out)
}

/// `argv` with the file's flags inserted after the subcommand token.
pub fn merge(argv: &[OsString], subcommand: &str, path: &Path) -> Result<Vec<OsString>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let flags = as_flags(&parse(&text).map_err(|e| format!("{}: {e}", path.display()))?)?;
    let at = argv
        .iter()
        .skip(1)
        .position(|a| a == subcommand)
        .map(|i| i + 2)
        .ok_or_else(|| format!("subcommand {subcommand} not found in arguments"))?;
    let mut out = argv[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_normalises_keys() {
        let e = parse("# header\nepsilon = 4 # inline\n\nmass_convention=physical\n").unwrap();
        assert_eq!(e, vec![("epsilon".into(), "4".into()), ("mass-convention".into(), "physical".into())]);
        assert!(parse("nonsense").is_err());
    }

    #[test]
    fn switches_become_bare_flags() {
        let f = as_flags(&[("json".into(), "true".into()), ("no-cache".into(), "false".into())]).unwrap();
        assert_eq!(f, vec![OsString::from("--json")]);
    }
}
