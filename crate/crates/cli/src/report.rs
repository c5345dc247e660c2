//! Report files: a commented header echoing the configuration, a CSV body, and optional
//! gnuplot companions.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::ExperimentConfig;

/// Prefix of the one header line that varies between identical runs.
pub const VOLATILE_PREFIX: &str = "#~";

/// Tracks written files so a failed run can remove its partial outputs.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> io::Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), created_dir, files: Vec::new() })
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    /// Opens `name` and writes the configuration header.
    pub fn table(&mut self, name: &str, cfg: &ExperimentConfig) -> io::Result<Table> {
        let path = self.dir.join(name);
        self.files.push(path.clone());
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "# dsurf {} report: {name}", cfg.command)?;
        for line in cfg.echo() {
            writeln!(out, "# {line}")?;
        }
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        writeln!(out, "{VOLATILE_PREFIX} generated at unix time {stamp}; excluded from reproducibility comparisons")?;
        Ok(Table { out, path })
    }

    /// Writes a gnuplot script `name` plotting columns of `table` (1-based `(x, y, title)`).
    pub fn gnuplot(&mut self, name: &str, table: &str, title: &str, xlabel: &str, series: &[(usize, usize, &str)]) -> io::Result<()> {
        let path = self.dir.join(name);
        self.files.push(path.clone());
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "set datafile separator ','")?;
        writeln!(out, "set datafile commentschars '#'")?;
        writeln!(out, "set title '{title}'")?;
        writeln!(out, "set xlabel '{xlabel}'")?;
        writeln!(out, "set key outside autotitle columnhead")?;
        let plots: Vec<String> = series
            .iter()
            .map(|(x, y, t)| format!("'{table}' using {x}:{y} with lines title '{t}'"))
            .collect();
        writeln!(out, "plot {}", plots.join(", \\\n     "))?;
        out.flush()
    }

    /// Deletes everything written so far (and the directory if this run created it).
    pub fn discard(self) {
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

pub struct Table {
    out: BufWriter<File>,
    path: PathBuf,
}

impl Table {
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn comment(&mut self, text: &str) -> io::Result<()> {
        writeln!(self.out, "# {text}")
    }

    /// CSV writer for the body; call after all header comments.
    pub fn csv(self) -> csv::Writer<BufWriter<File>> {
        csv::WriterBuilder::new().from_writer(self.out)
    }
}

/// Report body with the volatile line removed, for reproducibility comparisons.
pub fn stable_body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with(VOLATILE_PREFIX)).collect::<Vec<_>>().join("\n")
}
