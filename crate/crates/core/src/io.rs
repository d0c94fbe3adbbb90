//! Text formats: inner-function spec documents, node lists, Gram matrices,
//! circle traces, section spectra and `a..b` windows.
//!
//! Parsers take `&str` and never panic on malformed input. File loaders are
//! thin wrappers that resolve paths and hand the text to a parser.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hardy::CircleTrace;
use crate::inner::{
    clark_inner, validate_window, InnerError, InnerFunctionSpec, MeromorphicInner, TailPolicy,
};
use crate::kernels::{GramMatrix, GramMeta};
use crate::linalg::CMatrix;
use crate::C64;

/// Upper bound on any row count read from text, so a hostile file cannot ask
/// for an enormous allocation.
pub const MAX_ROWS: usize = 1 << 22;
/// Largest Gram matrix side accepted from CSV.
pub const MAX_GRAM_SIZE: usize = 4096;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("spec document: {0}")]
    Document(String),
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error(transparent)]
    Inner(#[from] InnerError),
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| IoError::File {
            path: dir.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    std::fs::write(path, text).map_err(|e| IoError::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Parses an inclusive index window `a..b`, with `a ≤ b`.
pub fn parse_window(text: &str) -> Result<(i64, i64), IoError> {
    let (a, b) = text
        .trim()
        .split_once("..")
        .ok_or_else(|| parse_err(1, format!("window {text:?} is not of the form a..b")))?;
    let a: i64 = a
        .trim()
        .parse()
        .map_err(|_| parse_err(1, format!("window start {a:?} is not an integer")))?;
    let b: i64 = b
        .trim()
        .parse()
        .map_err(|_| parse_err(1, format!("window end {b:?} is not an integer")))?;
    if a > b {
        return Err(parse_err(1, format!("window {a}..{b} is empty")));
    }
    Ok((a, b))
}

pub fn format_window(first: i64, last: i64) -> String {
    format!("{first}..{last}")
}

/// Data rows of a CSV body with their 1-based line numbers. Blank lines and
/// `#` comments are skipped, as is a first row whose leading field is not
/// numeric (a header).
fn csv_rows(text: &str, columns: usize) -> Result<Vec<(usize, Vec<&str>)>, IoError> {
    let mut rows = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        if rows.is_empty() && fields[0].parse::<f64>().is_err() {
            continue;
        }
        if fields.len() != columns {
            return Err(parse_err(
                line,
                format!("expected {columns} fields, found {}", fields.len()),
            ));
        }
        if rows.len() == MAX_ROWS {
            return Err(parse_err(line, format!("more than {MAX_ROWS} rows")));
        }
        rows.push((line, fields));
    }
    Ok(rows)
}

fn field_i64(line: usize, s: &str) -> Result<i64, IoError> {
    s.parse()
        .map_err(|_| parse_err(line, format!("{s:?} is not an integer")))
}

fn field_usize(line: usize, s: &str) -> Result<usize, IoError> {
    s.parse()
        .map_err(|_| parse_err(line, format!("{s:?} is not a non-negative integer")))
}

fn field_f64(line: usize, s: &str) -> Result<f64, IoError> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(line, format!("{s:?} is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{s:?} is not finite")));
    }
    Ok(v)
}

/// A node list: consecutive integer indices with one real value each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeList {
    pub first_index: i64,
    pub values: Vec<f64>,
}

impl NodeList {
    pub fn last_index(&self) -> i64 {
        self.first_index + self.values.len() as i64 - 1
    }

    /// The sub-list with indices in `first..=last`.
    pub fn window(&self, first: i64, last: i64) -> Result<NodeList, IoError> {
        if first < self.first_index || last > self.last_index() || first > last {
            return Err(IoError::Document(format!(
                "window {first}..{last} is not inside {}..{}",
                self.first_index,
                self.last_index()
            )));
        }
        let lo = (first - self.first_index) as usize;
        let hi = (last - self.first_index) as usize;
        Ok(NodeList {
            first_index: first,
            values: self.values[lo..=hi].to_vec(),
        })
    }
}

/// Parses `index,value` rows with consecutive indices.
pub fn parse_node_csv(text: &str) -> Result<NodeList, IoError> {
    let rows = csv_rows(text, 2)?;
    let mut first = None;
    let mut values = Vec::with_capacity(rows.len());
    for (line, f) in rows {
        let index = field_i64(line, f[0])?;
        let value = field_f64(line, f[1])?;
        let expected = first.map(|s: i64| s.checked_add(values.len() as i64));
        match expected {
            None => first = Some(index),
            Some(Some(e)) if e == index => {}
            _ => return Err(parse_err(line, format!("index {index} breaks the run"))),
        }
        values.push(value);
    }
    let first_index = first.ok_or_else(|| parse_err(0, "no node rows"))?;
    Ok(NodeList {
        first_index,
        values,
    })
}

pub fn write_node_csv(nodes: &NodeList) -> String {
    let mut out = String::from("index,value\n");
    for (k, v) in nodes.values.iter().enumerate() {
        let _ = writeln!(out, "{},{:e}", nodes.first_index + k as i64, v);
    }
    out
}

/// Parses `index,re,im` rows with indices `0, 1, …` into circle samples.
pub fn parse_trace_csv(text: &str) -> Result<Vec<C64>, IoError> {
    let rows = csv_rows(text, 3)?;
    let mut samples = Vec::with_capacity(rows.len());
    for (line, f) in rows {
        let index = field_usize(line, f[0])?;
        if index != samples.len() {
            return Err(parse_err(line, format!("expected index {}", samples.len())));
        }
        samples.push(C64::new(field_f64(line, f[1])?, field_f64(line, f[2])?));
    }
    Ok(samples)
}

/// Loads a trace dump, checking its length is a supported grid size.
pub fn trace_from_csv(text: &str) -> Result<CircleTrace, IoError> {
    let samples = parse_trace_csv(text)?;
    CircleTrace::from_samples(samples).map_err(|e| IoError::Document(e.to_string()))
}

pub fn write_trace_csv(trace: &CircleTrace) -> String {
    let mut out = String::from("index,re,im\n");
    for (j, s) in trace.samples().iter().enumerate() {
        let _ = writeln!(out, "{j},{:e},{:e}", s.re, s.im);
    }
    out
}

/// Parses `row,col,re,im` rows into a dense square matrix. Every entry must
/// appear exactly once.
pub fn parse_gram_csv(text: &str) -> Result<CMatrix, IoError> {
    let rows = csv_rows(text, 4)?;
    let count = rows.len();
    let size = (count as f64).sqrt().round() as usize;
    if size == 0 || size * size != count || size > MAX_GRAM_SIZE {
        return Err(parse_err(
            0,
            format!("{count} entries do not fill a square matrix of side at most {MAX_GRAM_SIZE}"),
        ));
    }
    let mut entries = vec![None; count];
    for (line, f) in rows {
        let r = field_usize(line, f[0])?;
        let c = field_usize(line, f[1])?;
        if r >= size || c >= size {
            return Err(parse_err(
                line,
                format!("({r}, {c}) is outside {size}×{size}"),
            ));
        }
        let slot = &mut entries[r * size + c];
        if slot.is_some() {
            return Err(parse_err(line, format!("({r}, {c}) appears twice")));
        }
        *slot = Some(C64::new(field_f64(line, f[2])?, field_f64(line, f[3])?));
    }
    let values: Option<Vec<C64>> = entries.into_iter().collect();
    let values = values.ok_or_else(|| parse_err(0, "missing entries"))?;
    Ok(CMatrix::from_row_slice(size, size, &values))
}

pub fn write_gram_csv(gram: &GramMatrix) -> String {
    let a = gram.entries();
    let mut out = String::from("row,col,re,im\n");
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            let v = a[(r, c)];
            let _ = writeln!(out, "{r},{c},{:e},{:e}", v.re, v.im);
        }
    }
    out
}

/// The sidecar document describing a Gram CSV.
pub fn write_gram_meta(meta: &GramMeta) -> String {
    toml::to_string(meta).unwrap_or_default()
}

pub fn parse_gram_meta(text: &str) -> Result<GramMeta, IoError> {
    toml::from_str(text).map_err(|e| IoError::Document(e.to_string()))
}

/// Rebuilds a Gram matrix from its CSV and sidecar.
pub fn gram_from_text(csv: &str, meta: &str) -> Result<GramMatrix, IoError> {
    let entries = parse_gram_csv(csv)?;
    let meta = parse_gram_meta(meta)?;
    let span = meta
        .last_index
        .checked_sub(meta.first_index)
        .and_then(|d| d.checked_add(1));
    if meta.size != entries.nrows() || span != Some(meta.size as i64) {
        return Err(IoError::Document(format!(
            "sidecar describes {}..{} ({} nodes), matrix has side {}",
            meta.first_index,
            meta.last_index,
            meta.size,
            entries.nrows()
        )));
    }
    Ok(GramMatrix::new(entries, meta.first_index))
}

/// One row of a spectrum dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub size: usize,
    pub k: usize,
    pub sigma: f64,
}

/// Parses `N,k,sigma_k` rows.
pub fn parse_spectrum_csv(text: &str) -> Result<Vec<SpectrumRow>, IoError> {
    let rows = csv_rows(text, 3)?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, f) in rows {
        let size = field_usize(line, f[0])?;
        let k = field_usize(line, f[1])?;
        if k >= size {
            return Err(parse_err(line, format!("k = {k} is not below N = {size}")));
        }
        let sigma = field_f64(line, f[2])?;
        if sigma < 0.0 {
            return Err(parse_err(line, "negative singular value"));
        }
        out.push(SpectrumRow { size, k, sigma });
    }
    Ok(out)
}

/// Tail policy names accepted in spec documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TailName {
    Plain,
    #[default]
    SymmetricPairing,
    LatticeTail,
}

/// The `[clark]` block of a spec document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClarkBlock {
    /// Node CSV, relative to the document.
    pub lambdas: String,
    /// Weight CSV with the same indices; every weight is `weight` when absent.
    #[serde(default)]
    pub nus: Option<String>,
    /// Index window `a..b` to keep; the whole node list when absent.
    #[serde(default)]
    pub window: Option<String>,
    #[serde(default)]
    pub tail: TailName,
    /// Weight of absent `nus` entries and of lattice-tail nodes.
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0 / std::f64::consts::PI
}

/// A spec document. With a `[clark]` block it describes a Clark inner
/// function; otherwise `e^{i·exp_type·z}` times the Blaschke factors of
/// `zeros`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerSpecDoc {
    #[serde(default)]
    pub exp_type: f64,
    #[serde(default)]
    pub zeros: Vec<[f64; 2]>,
    #[serde(default)]
    pub clark: Option<ClarkBlock>,
}

pub fn parse_inner_spec(text: &str) -> Result<InnerSpecDoc, IoError> {
    let doc: InnerSpecDoc = toml::from_str(text).map_err(|e| IoError::Document(e.to_string()))?;
    if doc.clark.is_some() && (doc.exp_type != 0.0 || !doc.zeros.is_empty()) {
        return Err(IoError::Document(
            "a [clark] block excludes exp_type and zeros".into(),
        ));
    }
    if let Some(c) = &doc.clark {
        if !(c.weight.is_finite() && c.weight > 0.0) {
            return Err(IoError::Document(format!(
                "weight {} is not positive",
                c.weight
            )));
        }
        if let Some(w) = &c.window {
            parse_window(w)?;
        }
    }
    Ok(doc)
}

pub fn write_inner_spec(doc: &InnerSpecDoc) -> String {
    toml::to_string(doc).unwrap_or_default()
}

/// Builds the explicit inner function of a document without a `[clark]`
/// block.
pub fn explicit_inner(doc: &InnerSpecDoc) -> Result<MeromorphicInner, IoError> {
    let zeros = doc.zeros.iter().map(|z| C64::new(z[0], z[1])).collect();
    Ok(MeromorphicInner::new(doc.exp_type, zeros)?)
}

/// Resolves a spec document into an inner function. Node files are read
/// through `read`, which receives paths relative to the document.
pub fn resolve_inner_spec<R>(doc: &InnerSpecDoc, mut read: R) -> Result<InnerFunctionSpec, IoError>
where
    R: FnMut(&str) -> Result<String, IoError>,
{
    let Some(c) = &doc.clark else {
        return Ok(InnerFunctionSpec::Explicit(explicit_inner(doc)?));
    };
    let mut nodes = parse_node_csv(&read(&c.lambdas)?)?;
    let mut weights = match &c.nus {
        Some(path) => {
            let w = parse_node_csv(&read(path)?)?;
            if w.first_index != nodes.first_index || w.values.len() != nodes.values.len() {
                return Err(IoError::Document(format!(
                    "weights cover {}..{}, nodes cover {}..{}",
                    w.first_index,
                    w.last_index(),
                    nodes.first_index,
                    nodes.last_index()
                )));
            }
            w
        }
        None => NodeList {
            first_index: nodes.first_index,
            values: vec![c.weight; nodes.values.len()],
        },
    };
    if let Some(w) = &c.window {
        let (a, b) = parse_window(w)?;
        nodes = nodes.window(a, b)?;
        weights = weights.window(a, b)?;
    }
    let tail = match c.tail {
        TailName::Plain => TailPolicy::Plain,
        TailName::SymmetricPairing => TailPolicy::SymmetricPairing,
        TailName::LatticeTail => TailPolicy::LatticeTail { weight: c.weight },
    };
    let seq = validate_window(nodes.first_index, &nodes.values, &weights.values)?;
    Ok(InnerFunctionSpec::Clark(clark_inner(&seq, tail)?))
}

/// Reads and resolves a spec document from disk.
pub fn load_inner_spec(path: &Path) -> Result<InnerFunctionSpec, IoError> {
    let doc = parse_inner_spec(&read_text(path)?)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    resolve_inner_spec(&doc, |rel| read_text(&base.join(rel)))
}
