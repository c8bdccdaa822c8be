use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use mfc0::io::{self, IoError, Manifest};
use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};

pub const MATRIX_BANNER: &str = "one matrix row per line; samples are columns";

/// An output directory. Files are written through here so failures name the
/// offending path.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::Output { path: root.to_path_buf(), source: e.into() })?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn subdir(&self, name: &str) -> CliResult<Self> {
        Self::create(&self.root.join(name))
    }

    pub fn write_with(&self, name: &str, body: impl FnOnce(&mut dyn Write) -> Result<(), IoError>) -> CliResult<()> {
        let path = self.root.join(name);
        let wrap = |source: IoError| CliError::Output { path: path.clone(), source };
        let file = File::create(&path).map_err(|e| wrap(e.into()))?;
        let mut w = BufWriter::new(file);
        body(&mut w).map_err(wrap)?;
        w.flush().map_err(|e| wrap(e.into()))
    }

    pub fn matrix(&self, name: &str, m: &DMatrix<f64>) -> CliResult<()> {
        self.write_with(name, |w| io::write_matrix_csv(w, m, MATRIX_BANNER))
    }

    pub fn text(&self, name: &str, text: &str) -> CliResult<()> {
        self.write_with(name, |w| w.write_all(text.as_bytes()).map_err(IoError::from))
    }

    pub fn bytes(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        self.write_with(name, |w| w.write_all(bytes).map_err(IoError::from))
    }

    pub fn manifest(&self, manifest: &Manifest) -> CliResult<()> {
        self.text("manifest.txt", &manifest.to_text())
    }
}

pub fn unix_seconds() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Reads a file and returns its bytes with the content hash.
pub fn read_input(path: &Path) -> CliResult<(Vec<u8>, String)> {
    let bytes = fs::read(path).map_err(|e| CliError::Input { path: path.to_path_buf(), source: e.into() })?;
    let hash = io::content_hash(&bytes);
    Ok((bytes, hash))
}

/// `start:stop:step` (inclusive) or `a,b,c`.
pub fn parse_ratios(spec: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad ratio '{s}'"));
    let ratios = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(format!("ratio range '{spec}' must be start:stop:step"));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(format!("empty ratio range '{spec}'"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if let Some(bad) = ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(format!("ratio {bad} outside [0, 1]"));
    }
    Ok(ratios)
}
