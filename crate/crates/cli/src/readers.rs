//! Data file readers: Matrix Market coordinate, dense CSV, svmlight/libsvm
//! rows, and plain vectors.

use std::fs;
use std::path::Path;

use crate::error::LoadError;

/// Sparse matrix as coordinate triplets.
#[derive(Clone, Debug, PartialEq)]
pub struct Triplets {
    pub n_rows: usize,
    pub n_cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn transpose(self) -> Self {
        Triplets {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            entries: self.entries.into_iter().map(|(r, c, v)| (c, r, v)).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Triplets {
            n_rows: n,
            n_cols: n,
            entries: (0..n).map(|i| (i, i, 1.0)).collect(),
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, String> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(format!("row {} has {} entries, row 1 has {n_cols}", r + 1, row.len()));
            }
            entries.extend(row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(c, &v)| (r, c, v)));
        }
        Ok(Triplets {
            n_rows: rows.len(),
            n_cols,
            entries,
        })
    }

    /// Stacks `parts` vertically; all must have the same column count.
    pub fn vstack(parts: Vec<Triplets>) -> Self {
        let n_cols = parts.first().map_or(0, |p| p.n_cols);
        let mut out = Triplets {
            n_rows: 0,
            n_cols,
            entries: Vec::new(),
        };
        for p in parts {
            let off = out.n_rows;
            out.entries.extend(p.entries.into_iter().map(|(r, c, v)| (r + off, c, v)));
            out.n_rows += p.n_rows;
        }
        out
    }
}

/// Rows of an svmlight/libsvm file.
#[derive(Clone, Debug, PartialEq)]
pub struct Labelled {
    pub matrix: Triplets,
    pub labels: Vec<f64>,
}

fn read_text(path: &Path, key: &str) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|e| LoadError::file(path, key, e))
}

pub fn read_matrix_market(path: &Path, key: &str) -> Result<Triplets, LoadError> {
    let text = read_text(path, key)?;
    let coo = nalgebra_sparse::io::load_coo_from_matrix_market_str::<f64>(&text)
        .map_err(|e| LoadError::parse(path, None, e.to_string()))?;
    Ok(Triplets {
        n_rows: coo.nrows(),
        n_cols: coo.ncols(),
        entries: coo.triplet_iter().map(|(r, c, &v)| (r, c, v)).collect(),
    })
}

/// Dense CSV without header; `#` starts a comment line.
pub fn read_csv_rows(path: &Path, key: &str) -> Result<Vec<Vec<f64>>, LoadError> {
    let text = read_text(path, key)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| LoadError::parse(path, e.position().map(|p| p.line()), e.to_string()))?;
        let line = rec.position().map(|p| p.line());
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| LoadError::parse(path, line, format!("`{s}` is not a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_csv_matrix(path: &Path, key: &str) -> Result<Triplets, LoadError> {
    let rows = read_csv_rows(path, key)?;
    Triplets::from_dense(&rows).map_err(|m| LoadError::parse(path, None, m))
}

/// svmlight/libsvm rows `label idx:value ...`. Indices are 1-based unless
/// `zero_based` is set. The column count is the largest index seen.
pub fn read_libsvm(path: &Path, key: &str, zero_based: bool) -> Result<Labelled, LoadError> {
    let text = read_text(path, key)?;
    let mut labels = Vec::new();
    let mut entries = Vec::new();
    let mut n_cols = 0;
    for (k, raw) in text.lines().enumerate() {
        let line_no = Some(k as u64 + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| LoadError::parse(path, line_no, m);
        let mut tokens = line.split_whitespace();
        let label = tokens.next().unwrap_or_default();
        let label: f64 = label
            .parse()
            .map_err(|_| err(format!("label `{label}` is not a number")))?;
        let row = labels.len();
        labels.push(label);
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected index:value, found `{tok}`")))?;
            if idx == "qid" {
                continue;
            }
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("bad feature index `{idx}`")))?;
            let col = if zero_based {
                idx
            } else {
                idx.checked_sub(1)
                    .ok_or_else(|| err("feature index 0 in a 1-based file".to_string()))?
            };
            let val: f64 = val
                .parse()
                .map_err(|_| err(format!("bad feature value `{val}`")))?;
            n_cols = n_cols.max(col + 1);
            entries.push((row, col, val));
        }
    }
    Ok(Labelled {
        matrix: Triplets {
            n_rows: labels.len(),
            n_cols,
            entries,
        },
        labels,
    })
}

/// Vector file: one value per line, or a single CSV row or column.
pub fn read_vector(path: &Path, key: &str) -> Result<Vec<f64>, LoadError> {
    let rows = read_csv_rows(path, key)?;
    if rows.len() == 1 {
        return Ok(rows.into_iter().next().unwrap_or_default());
    }
    if let Some(r) = rows.iter().position(|r| r.len() != 1) {
        return Err(LoadError::parse(
            path,
            None,
            format!("vector file row {} has {} values; expected one per line", r + 1, rows[r].len()),
        ));
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}
