use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use slownim::table::{load_table_for, read_header, save_table_file};
use slownim::{GameSpec, SolveTable};

use crate::{Io, Status};

const EXT: &str = "slownim";

/// Directory of saved remoteness tables, one file per game and cap.
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// The given directory, else `$HOME/.cache/slownim`, else
    /// `.slownim-cache` in the working directory.
    pub fn resolve(dir: Option<PathBuf>) -> Self {
        let dir = dir
            .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("slownim")))
            .unwrap_or_else(|| PathBuf::from(".slownim-cache"));
        Self { dir }
    }

    pub fn path_for(&self, spec: &GameSpec, cap: u32) -> PathBuf {
        self.dir.join(format!("n{}-k{}-{}-cap{}.{EXT}", spec.n, spec.k, spec.version.as_str(), cap))
    }

    /// A cached table for exactly this game and cap, if one is stored.
    pub fn load(&self, spec: &GameSpec, cap: u32) -> Result<Option<SolveTable>> {
        let path = self.path_for(spec, cap);
        if !path.exists() {
            return Ok(None);
        }
        let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
        let table = load_table_for(std::io::BufReader::new(file), *spec, cap)
            .with_context(|| format!("reading cached table {}", path.display()))?;
        Ok(Some(table))
    }

    pub fn store(&self, table: &SolveTable) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let path = self.path_for(table.spec(), table.cap());
        save_table_file(table, &path).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn info(&self, io: &mut Io<'_>) -> Result<Status> {
        writeln!(io.out, "cache directory: {}", self.dir.display())?;
        let mut entries: Vec<PathBuf> = match fs::read_dir(&self.dir) {
            Ok(rd) => rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == EXT))
                .collect(),
            Err(_) => Vec::new(),
        };
        entries.sort();
        if entries.is_empty() {
            writeln!(io.out, "no cached tables")?;
        }
        for path in entries {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            match read_header(&bytes) {
                Ok(h) => writeln!(
                    io.out,
                    "{name}: n={} k={} version={} cap={} positions={} bytes={}",
                    h.spec.n,
                    h.spec.k,
                    h.spec.version.as_str(),
                    h.cap,
                    h.count,
                    bytes.len()
                )?,
                Err(e) => writeln!(io.out, "{name}: unreadable ({e})")?,
            }
        }
        Ok(Status::Success)
    }
}
