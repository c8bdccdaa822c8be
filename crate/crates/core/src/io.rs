//! Text and image formats: dense matrix CSV, label lists, key=value run
//! manifests and 8-bit PGM heatmaps.
//!
//! Matrix CSV has no header, one matrix row per line, comma separated, and
//! may carry `#` comment lines. Samples are columns.

use std::fmt::Write as _;
use std::io::Write;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("line {line}, column {col}: cannot parse '{text}' as a number")]
    BadNumber { line: u64, col: usize, text: String },

    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged { line: u64, expected: usize, found: usize },

    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("input contains no data")]
    Empty,

    #[error("PGM: {0}")]
    Pgm(String),
}

pub type IoResult<T> = std::result::Result<T, IoError>;

/// Parses a comma-separated matrix. Line and column numbers in errors are
/// 1-based.
pub fn parse_matrix_csv(input: &[u8]) -> IoResult<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);

    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            IoError::Malformed { line, message: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *cols.get_or_insert(record.len());
        if record.len() != expected {
            return Err(IoError::Ragged { line, expected, found: record.len() });
        }
        for (j, field) in record.iter().enumerate() {
            let v = field
                .parse::<f64>()
                .map_err(|_| IoError::BadNumber { line, col: j + 1, text: field.to_string() })?;
            values.push(v);
        }
        rows += 1;
    }
    match cols {
        Some(c) if rows > 0 && c > 0 => Ok(DMatrix::from_row_slice(rows, c, &values)),
        _ => Err(IoError::Empty),
    }
}

/// Writes `m` with 17 significant digits per entry after a `#` banner line.
pub fn write_matrix_csv<W: Write>(mut out: W, m: &DMatrix<f64>, banner: &str) -> IoResult<()> {
    writeln!(out, "# {banner}")?;
    let mut line = String::new();
    for row in m.row_iter() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            write!(line, "{v:.16e}").expect("writing to a String cannot fail");
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// One non-negative integer per line; blank and `#` lines are skipped.
pub fn parse_labels(input: &str) -> IoResult<Vec<usize>> {
    let mut labels = Vec::new();
    for (i, raw) in input.lines().enumerate() {
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let label = text.parse::<usize>().map_err(|_| IoError::BadNumber {
            line: i as u64 + 1,
            col: 1,
            text: text.to_string(),
        })?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(IoError::Empty);
    }
    Ok(labels)
}

pub fn write_labels<W: Write>(mut out: W, labels: &[usize]) -> IoResult<()> {
    for l in labels {
        writeln!(out, "{l}")?;
    }
    Ok(())
}

/// Ordered `key=value` pairs describing one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an entry. Keys must be non-empty, contain no `=` and no
    /// newline; values must not contain a newline.
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        let key = key.into();
        let value = value.to_string();
        assert!(valid_key(&key), "invalid manifest key {key:?}");
        assert!(!value.contains(['\n', '\r']), "manifest value for {key} spans lines");
        self.entries.push((key, value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut text = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(text, "{k}={v}");
        }
        text
    }

    pub fn parse(input: &str) -> IoResult<Self> {
        let mut manifest = Self::new();
        for (i, raw) in input.lines().enumerate() {
            let line = i as u64 + 1;
            let text = raw.trim_end_matches('\r');
            if text.trim().is_empty() || text.starts_with('#') {
                continue;
            }
            let (key, value) = text
                .split_once('=')
                .ok_or_else(|| IoError::Malformed { line, message: "expected key=value".into() })?;
            let key = key.trim();
            if !valid_key(key) {
                return Err(IoError::Malformed { line, message: format!("invalid key {key:?}") });
            }
            if manifest.get(key).is_some() {
                return Err(IoError::Malformed { line, message: format!("duplicate key {key}") });
            }
            manifest.entries.push((key.to_string(), value.to_string()));
        }
        Ok(manifest)
    }
}

fn valid_key(key: &str) -> bool {
    !key.is_empty() && !key.contains(['=', '\n', '\r', '#']) && key.trim() == key
}

/// `sha256("blob <len>\0" ++ bytes)` in hex, the git object-id recipe with
/// SHA-256.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", bytes.len()).as_bytes());
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u8>,
}

/// Binary 8-bit PGM of `|m|`, linear over `[0, max |m|]`; one pixel per
/// entry, rows of the image are rows of the matrix.
pub fn matrix_to_pgm(m: &DMatrix<f64>) -> Vec<u8> {
    let (h, w) = m.shape();
    let top = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h);
    for i in 0..h {
        for j in 0..w {
            let level = if top > 0.0 { (255.0 * m[(i, j)].abs() / top).round() } else { 0.0 };
            out.push(level.clamp(0.0, 255.0) as u8);
        }
    }
    out
}

fn pgm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> IoResult<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(IoError::Pgm("truncated header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn pgm_number(bytes: &[u8], pos: &mut usize, what: &str) -> IoResult<usize> {
    let tok = pgm_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| IoError::Pgm(format!("bad {what}")))
}

/// Reads a binary (`P5`) PGM with `maxval <= 255`.
pub fn parse_pgm(bytes: &[u8]) -> IoResult<PgmImage> {
    let mut pos = 0;
    if pgm_token(bytes, &mut pos)? != b"P5" {
        return Err(IoError::Pgm("missing P5 magic".into()));
    }
    let width = pgm_number(bytes, &mut pos, "width")?;
    let height = pgm_number(bytes, &mut pos, "height")?;
    let maxval = pgm_number(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(IoError::Pgm(format!("unsupported maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(IoError::Pgm("missing raster separator".into()));
    }
    pos += 1;
    let size = width.checked_mul(height).ok_or_else(|| IoError::Pgm("image too large".into()))?;
    let raster = &bytes[pos..];
    if raster.len() < size {
        return Err(IoError::Pgm(format!("raster has {} bytes, expected {size}", raster.len())));
    }
    let pixels = raster[..size].to_vec();
    if let Some(bad) = pixels.iter().find(|&&p| p as usize > maxval) {
        return Err(IoError::Pgm(format!("pixel {bad} exceeds maxval {maxval}")));
    }
    Ok(PgmImage { width, height, maxval: maxval as u16, pixels })
}
