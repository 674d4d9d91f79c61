use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Output directory that refuses to replace existing files unless forced,
/// and remembers what it wrote.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    force: bool,
    written: Vec<String>,
}

impl OutputDir {
    pub fn new(root: &Path, force: bool) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            force,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Files written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn claim(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.root.join(name);
        if path.exists() && !self.force && !self.written.iter().any(|w| w == name) {
            return Err(Error::WouldOverwrite(path));
        }
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(path)
    }

    /// Writes `name` through `body`, which receives a buffered writer.
    pub fn write_with(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.claim(name)?;
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = std::io::BufWriter::new(file);
        body(&mut out)?;
        out.flush().map_err(|e| Error::io(&path, e))
    }

    /// Writes a delimited table with a header row.
    pub fn write_table<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.root.join(name);
        self.write_with(name, |out| {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header).map_err(|e| Error::csv(&path, e))?;
            for row in rows {
                w.write_record(&row).map_err(|e| Error::csv(&path, e))?;
            }
            w.flush().map_err(|e| Error::io(&path, e))
        })
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::InvalidArgument(format!("serializing {name}: {e}")))?;
        let path = self.root.join(name);
        self.write_with(name, |out| {
            out.write_all(text.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .map_err(|e| Error::io(&path, e))
        })
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Shortest round-trip float text; missing values are empty cells.
pub fn fmt_value(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        Some(x) if x.is_nan() => "NaN".into(),
        Some(x) if x > 0.0 => "inf".into(),
        Some(_) => "-inf".into(),
        None => String::new(),
    }
}

pub fn fmt_fixed(x: f64, decimals: usize) -> String {
    if x.is_finite() {
        format!("{x:.decimals$}")
    } else {
        fmt_value(Some(x))
    }
}
