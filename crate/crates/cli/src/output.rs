use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub const OUT_DIR_ENV: &str = "EBAND_OUT_DIR";

/// Where a subcommand's main output goes.
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    /// Relative `--out` paths land in `$EBAND_OUT_DIR` when it is set. With
    /// no `--out`, the variable selects `default_name` inside it; otherwise
    /// output goes to stdout.
    pub fn resolve(out: Option<&Path>, default_name: &str) -> Sink {
        let dir = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()).map(PathBuf::from);
        match (out, dir) {
            (Some(p), Some(dir)) if p.is_relative() => Sink::File(dir.join(p)),
            (Some(p), _) => Sink::File(p.to_path_buf()),
            (None, Some(dir)) => Sink::File(dir.join(default_name)),
            (None, None) => Sink::Stdout,
        }
    }

    pub fn write_with(&self, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
        match self {
            Sink::Stdout => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                match f(&mut lock).and_then(|_| lock.flush()) {
                    // reader went away (`| head`), nothing left to report
                    Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                    r => r.map_err(|e| CliError::io("<stdout>", e)),
                }
            }
            Sink::File(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
                }
                let file = File::create(path).map_err(|e| CliError::io(path, e))?;
                let mut w = BufWriter::new(file);
                f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
            }
        }
    }

    pub fn write_json(&self, value: &serde_json::Value) -> CliResult<()> {
        self.write_with(|w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::from)?;
            writeln!(w)
        })
    }
}

pub fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
