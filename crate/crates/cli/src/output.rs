use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::Failure;
use subsonic_core::solver::write_solution_csv;
use subsonic_core::SolutionPair;

/// `--out` if given, else `./out/<command>-<unix seconds>`; created if missing.
pub fn output_dir(explicit: Option<&Path>, command: &str) -> Result<PathBuf, Failure> {
    let dir = match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            PathBuf::from("out").join(format!("{command}-{secs}"))
        }
    };
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(file, value).map_err(|e| Failure::input(format!("writing {}: {e}", path.display())))
}

pub fn write_solution(path: &Path, sol: &SolutionPair) -> Result<(), Failure> {
    write_solution_csv(sol, BufWriter::new(File::create(path)?))?;
    Ok(())
}
