use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Comment block that opens every output: version, command, seed, units,
/// a hash of the resolved configuration, and the configuration itself.
pub fn header(command: &str, seed: u64, units: &str, resolved: &str) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "# netfair {VERSION}");
    let _ = writeln!(h, "# command: {command}");
    let _ = writeln!(h, "# seed: {seed}");
    let _ = writeln!(h, "# units: {units}");
    let _ = writeln!(h, "# config_sha256: {}", sha256_hex(resolved.as_bytes()));
    let _ = writeln!(h, "# resolved config:");
    for line in resolved.lines() {
        let _ = writeln!(h, "#   {line}");
    }
    h
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes named artifacts into `--out`, or to stdout when none was given.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", d.display())))?;
        }
        Ok(Self { dir })
    }

    pub fn emit(&self, name: &str, content: &str) -> Result<(), CliError> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, content)
                    .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
            }
            None => std::io::stdout()
                .lock()
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Io(e.to_string())),
        }
    }
}
