//! `trionlab` command-line front end.

mod args;
mod cache;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use sha2::{Digest, Sha256};

use args::{Cli, Command, PhysicsOptions};
use cache::Cache;
use output::{Meta, Table};

enum Failure {
    /// Bad flags or configuration: exit 2.
    Usage(String),
    /// Invalid physics input or a numerical failure: exit 1.
    Domain(String),
}

impl From<trionlab::Error> for Failure {
    fn from(e: trionlab::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn parse(argv: &[OsString]) -> Result<Cli, ExitCode> {
    Cli::try_parse_from(argv).map_err(|e| {
        let _ = e.print();
        ExitCode::from(e.exit_code() as u8)
    })
}

/// Everything that determines the output, hashed for the header and the
/// cache. Thread count and output destination are deliberately absent.
fn config_hash(cmd: &Command, phys: &PhysicsOptions) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        version: &'a str,
        command: &'a Command,
        physics: &'a PhysicsOptions,
    }
    let key = Key { version: env!("CARGO_PKG_VERSION"), command: cmd, physics: phys };
    hex::encode(Sha256::digest(serde_json::to_vec(&key).expect("serialisable")))
}

fn cache_dir(cli: &Cli) -> Option<PathBuf> {
    if cli.global.no_cache {
        return None;
    }
    cli.global.cache_dir.clone().or_else(|| std::env::var_os("TRIONLAB_CACHE").filter(|v| !v.is_empty()).map(PathBuf::from))
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    trionlab::exec::configure_threads(cli.global.threads).map_err(Failure::Usage)?;
    let hash = config_hash(&cli.command, &cli.global.physics);
    let cache = cache_dir(cli).map(Cache::new);
    let table: Table = match cache.as_ref().and_then(|c| c.load(&hash)) {
        Some(t) => t,
        None => {
            let t = commands::run(&cli.command, &cli.global.physics)?;
            if let Some(c) = &cache {
                c.store(&hash, &t);
            }
            t
        }
    };
    let meta = Meta { command: cli.command.name(), config_hash: &hash };
    let text = if cli.global.json { output::to_json(&table, &meta) } else { output::to_csv(&table, &meta) };
    match &cli.global.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Domain(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let mut cli = match parse(&argv) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(path) = cli.global.config.clone() {
        let merged = match config::merge(&argv, cli.command.name(), &path) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        };
        cli = match parse(&merged) {
            Ok(c) => c,
            Err(code) => return code,
        };
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
