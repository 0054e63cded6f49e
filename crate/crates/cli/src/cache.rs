//! Content-addressed result cache: one JSON file per configuration hash.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::output::Table;

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    version: String,
    table: Table,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Self {
        Cache { dir }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A stored table, or `None` on a miss. Unreadable or mismatched
    /// entries are reported on stderr and treated as misses.
    pub fn load(&self, key: &str) -> Option<Table> {
        let path = self.path(key);
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<Entry>(&text) {
            Ok(e) if e.key == key && e.version == env!("CARGO_PKG_VERSION") => Some(e.table),
            Ok(_) => {
                warn(&path, "key or version mismatch");
                None
            }
            Err(err) => {
                warn(&path, &err.to_string());
                None
            }
        }
    }

    /// Best effort: failures only produce a warning.
    pub fn store(&self, key: &str, table: &Table) {
        let entry = Entry { key: key.into(), version: env!("CARGO_PKG_VERSION").into(), table: table.clone() };
        let result = fs::create_dir_all(&self.dir).and_then(|_| {
            let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
            let mut f = fs::File::create(&tmp)?;
            f.write_all(serde_json::to_string(&entry).expect("serialisable").as_bytes())?;
            f.sync_all()?;
            fs::rename(&tmp, self.path(key))
        });
        if let Err(e) = result {
            eprintln!("warning: could not write cache entry in {}: {e}", self.dir.display());
        }
    }
}

fn warn(path: &Path, why: &str) {
    eprintln!("warning: ignoring corrupt cache entry {} ({why}); recomputing", path.display());
}
