//! Deterministic result files: CSV curves, JSON summaries, and the run
//! manifest. Floats are printed with 17 significant digits so files
//! re-parse bit-exactly; line endings are LF.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// 17-significant-digit float formatting (round-trips exactly).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One CSV cell; `Missing` renders as an empty field.
#[derive(Clone, Debug)]
pub enum Cell {
    Int(i64),
    F(f64),
    S(String),
    Missing,
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Cell::F(v) => out.push_str(&fmt_f64(*v)),
            Cell::S(s) => out.push_str(s),
            Cell::Missing => {}
        }
    }
}

/// Writes a CSV file with a header row naming every column.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> io::Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        assert_eq!(row.len(), header.len(), "row width != header width");
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                text.push(',');
            }
            cell.render(&mut text);
        }
        text.push('\n');
    }
    fs::write(path, text)
}

/// Writes pretty-printed JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)
}

/// Output directory handle; collects file names for the manifest.
pub struct RunDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(dir: &Path) -> io::Result<RunDir> {
        fs::create_dir_all(dir)?;
        Ok(RunDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn file(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<Cell>]) -> io::Result<()> {
        let p = self.file(name);
        write_csv(&p, header, rows)
    }

    pub fn json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let p = self.file(name);
        write_json(&p, value)
    }

    /// Writes the manifest echoing the fully resolved configuration; called
    /// last so its file list covers everything the run produced.
    pub fn manifest<T: serde::Serialize>(
        self,
        experiment: &str,
        seed: u64,
        config: &T,
    ) -> io::Result<()> {
        #[derive(serde::Serialize)]
        struct Manifest<'a, T> {
            experiment: &'a str,
            version: &'a str,
            seed: u64,
            config: &'a T,
            outputs: &'a [String],
        }
        let m = Manifest {
            experiment,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config,
            outputs: &self.files,
        };
        write_json(&self.dir.join("manifest.json"), &m)
    }
}
