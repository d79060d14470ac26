//! Text formats: JDM files, edge lists, spectra blocks and line-delimited
//! JSON sample records.
//!
//! Blank lines and lines starting with `#` are skipped by every reader.
//! Line numbers in errors are 1-based and count those lines too.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Jdm, LabeledGraph, WeightedSample};
use crate::spectra::SpectraMatrix;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_numbers(line: usize, text: &str) -> Result<Vec<usize>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("expected a non-negative integer, found {tok:?}"),
            })
        })
        .collect()
}

/// First line Δ, then Δ rows of Δ entries. Symmetry is checked.
pub fn parse_jdm(text: &str) -> Result<Jdm> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty input".into(),
    })?;
    let dim = match parse_numbers(line, header)?.as_slice() {
        [d] => *d,
        _ => {
            return Err(Error::Parse {
                line,
                message: "header must hold the single value Δ".into(),
            })
        }
    };
    let mut entries = Vec::with_capacity(dim * dim);
    let mut last = line;
    for _ in 0..dim {
        let (line, row) = lines.next().ok_or(Error::Parse {
            line: last + 1,
            message: format!("expected {dim} rows"),
        })?;
        let values = parse_numbers(line, row)?;
        if values.len() != dim {
            return Err(Error::Parse {
                line,
                message: format!("row has {} entries, expected {dim}", values.len()),
            });
        }
        entries.extend(values);
        last = line;
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse {
            line,
            message: "unexpected content after the matrix".into(),
        });
    }
    Jdm::new(dim, entries)
}

pub fn format_jdm(j: &Jdm) -> String {
    j.to_string()
}

/// One `u v` pair per line, 0-indexed. The node count is one past the
/// largest index.
pub fn parse_edge_list(text: &str) -> Result<LabeledGraph> {
    let mut pairs = Vec::new();
    for (line, l) in content_lines(text) {
        match parse_numbers(line, l)?.as_slice() {
            [u, v] => pairs.push((line, *u, *v)),
            _ => {
                return Err(Error::Parse {
                    line,
                    message: "expected two node indices".into(),
                })
            }
        }
    }
    let n = pairs.iter().map(|&(_, u, v)| u.max(v) + 1).max().unwrap_or(0);
    let mut g = LabeledGraph::new(n);
    for (line, u, v) in pairs {
        g.add_edge(u, v).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
    }
    Ok(g)
}

pub fn format_edge_list(g: &LabeledGraph) -> String {
    g.edges().map(|(u, v)| format!("{u} {v}\n")).collect()
}

/// A spectra matrix with the id and log-weight it was drawn with.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraRecord {
    pub id: u64,
    pub log_weight: f64,
    pub matrix: SpectraMatrix,
}

/// Blocks of `# spectra <id> log_weight <lw>`, a `Δ N` header and Δ rows.
pub fn format_spectra(r: &SpectraRecord) -> String {
    format!("# spectra {} log_weight {:?}\n{}", r.id, r.log_weight, r.matrix)
}

pub fn parse_spectra(text: &str) -> Result<Vec<SpectraRecord>> {
    let mut out = Vec::new();
    let mut meta: Option<(u64, f64)> = None;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    while let Some((line, l)) = lines.next() {
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix('#') {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if let ["spectra", id, "log_weight", lw] = toks.as_slice() {
                let bad = |what: &str| Error::Parse {
                    line,
                    message: format!("malformed {what} in spectra comment"),
                };
                meta = Some((id.parse().map_err(|_| bad("id"))?, lw.parse().map_err(|_| bad("log-weight"))?));
            }
            continue;
        }
        let (dim, n) = match parse_numbers(line, l)?.as_slice() {
            [d, n] => (*d, *n),
            _ => {
                return Err(Error::Parse {
                    line,
                    message: "spectra header must be \"Δ N\"".into(),
                })
            }
        };
        let mut rows = Vec::with_capacity(dim);
        while rows.len() < dim {
            let (line, l) = lines.next().ok_or(Error::Parse {
                line: line + rows.len() + 1,
                message: format!("expected {dim} rows"),
            })?;
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let row = parse_numbers(line, l)?;
            if row.len() != n {
                return Err(Error::Parse {
                    line,
                    message: format!("row has {} entries, expected {n}", row.len()),
                });
            }
            rows.push(row);
        }
        let matrix = if dim == 0 {
            SpectraMatrix::zeros(0, n)
        } else {
            SpectraMatrix::from_rows(&rows)?
        };
        let (id, log_weight) = meta.take().unwrap_or((out.len() as u64, 0.0));
        out.push(SpectraRecord { id, log_weight, matrix });
    }
    Ok(out)
}

/// One line of a sample stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: u64,
    pub spectra_id: u64,
    pub log_weight: f64,
    pub spectra_log_weight: f64,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl From<&WeightedSample> for SampleRecord {
    fn from(s: &WeightedSample) -> Self {
        SampleRecord {
            sample_id: s.sample_id,
            spectra_id: s.spectra_id,
            log_weight: s.log_weight,
            spectra_log_weight: s.spectra_log_weight,
            n: s.graph.node_count(),
            edges: s.graph.edges().collect(),
        }
    }
}

impl TryFrom<SampleRecord> for WeightedSample {
    type Error = Error;

    fn try_from(r: SampleRecord) -> Result<Self> {
        if !r.log_weight.is_finite() || !r.spectra_log_weight.is_finite() {
            return Err(Error::Internal("non-finite log-weight".into()));
        }
        Ok(WeightedSample {
            sample_id: r.sample_id,
            spectra_id: r.spectra_id,
            log_weight: r.log_weight,
            spectra_log_weight: r.spectra_log_weight,
            graph: LabeledGraph::from_edges(r.n, r.edges)?,
        })
    }
}

pub fn write_sample<W: Write>(out: &mut W, s: &WeightedSample) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, &SampleRecord::from(s))?;
    out.write_all(b"\n")
}

/// Reads a sample stream lazily, one record per non-blank line.
pub fn read_samples<R: BufRead>(input: R) -> impl Iterator<Item = Result<WeightedSample>> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(i, l)| {
            let line = i + 1;
            let l = l.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let rec: SampleRecord = serde_json::from_str(&l).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            WeightedSample::try_from(rec).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })
        })
}
