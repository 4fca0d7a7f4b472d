//! Linear correspondence analysis and the coordinate/embedding file formats.
//!
//! CA factorizes the centered frequency matrix `Ξ = N/n − r cᵗ/n²` as a
//! generalized SVD `Ξ = Ŭ Ŝ V̆ᵗ` with `Ŭᵗ D(r)⁻¹ Ŭ = V̆ᵗ D(c)⁻¹ V̆ = I`, and
//! reports the principal coordinates
//!
//! ```text
//! F = D(r)⁻¹ Ŭ Ŝ      (one row per row category)
//! G = D(c)⁻¹ V̆ Ŝ      (one row per column category)
//! ```
//!
//! `Ξ` is already centered, so there is no trivial unit singular value to
//! discard.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{metric_gsvd, Decomposition, Matrix, Metric, Vector};
use crate::tables::{residual_matrix, ContingencyTable};

/// Row and column coordinates produced by a fit.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    pub f: Matrix,
    pub g: Matrix,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub singular_values: Vector,
    pub method_tag: String,
    /// Truncated factorization the coordinates were derived from, when the
    /// set comes from a fit rather than a file.
    pub decomposition: Option<Decomposition>,
}

impl EmbeddingSet {
    pub fn dim(&self) -> usize {
        self.singular_values.len()
    }

    /// Coordinates of one point set.
    pub fn points(&self, which: PointSet) -> (&Matrix, &[String]) {
        match which {
            PointSet::Row => (&self.f, &self.row_labels),
            PointSet::Col => (&self.g, &self.col_labels),
        }
    }
}

/// Which coordinate matrix to use: `F` (rows) or `G` (columns).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSet {
    Row,
    Col,
}

impl PointSet {
    fn tag(self) -> &'static str {
        match self {
            PointSet::Row => "row",
            PointSet::Col => "col",
        }
    }

    fn from_tag(s: &str) -> Option<Self> {
        match s {
            "row" => Some(PointSet::Row),
            "col" => Some(PointSet::Col),
            _ => None,
        }
    }
}

pub fn check_rank(k: usize, t: &ContingencyTable) -> Result<()> {
    let max = t.nrows().min(t.ncols());
    if k == 0 || k > max {
        return Err(Error::InvalidRank { k, max });
    }
    Ok(())
}

/// Default dimension for small tables: one less than the smaller side.
pub fn default_rank(t: &ContingencyTable) -> usize {
    (t.nrows().min(t.ncols()) - 1).max(1)
}

/// Generalized SVD of `Ξ` under `D(r)`, `D(c)`, truncated to `k` dimensions.
pub fn fit_linear_ca(t: &ContingencyTable, k: usize) -> Result<EmbeddingSet> {
    check_rank(k, t)?;
    let xi = residual_matrix(t);
    let wr = Metric::Diagonal(t.r().clone());
    let wc = Metric::Diagonal(t.c().clone());
    let d = metric_gsvd(&xi, &wr, &wc)?.truncated(k);
    let s = Matrix::from_diagonal(&d.s);
    let f = Matrix::from_diagonal(&t.r().map(|x| 1.0 / x)) * &d.u * &s;
    let g = Matrix::from_diagonal(&t.c().map(|x| 1.0 / x)) * &d.v * &s;
    Ok(EmbeddingSet {
        f,
        g,
        row_labels: t.row_labels().to_vec(),
        col_labels: t.col_labels().to_vec(),
        singular_values: d.s.clone(),
        method_tag: "linear".into(),
        decomposition: Some(d),
    })
}

/// Coordinates read back from a CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinates {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub f: Matrix,
    pub g: Matrix,
}

/// Writes `point_set,label,dim_1,…,dim_k` CSV, row points first.
pub fn export_coordinates(e: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    let k = e.dim();
    let mut header = vec!["point_set".to_string(), "label".to_string()];
    header.extend((1..=k).map(|d| format!("dim_{d}")));
    w.write_record(&header)?;
    for which in [PointSet::Row, PointSet::Col] {
        let (m, labels) = e.points(which);
        for (i, label) in labels.iter().enumerate() {
            let mut record = vec![which.tag().to_string(), label.clone()];
            record.extend((0..k).map(|d| m[(i, d)].to_string()));
            w.write_record(&record)?;
        }
    }
    w.flush().map_err(|err| Error::io(path, err))
}

pub fn read_coordinates(path: impl AsRef<Path>) -> Result<Coordinates> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    let k = rdr.headers()?.len().saturating_sub(2);
    let mut row_labels = Vec::new();
    let mut col_labels = Vec::new();
    let mut f = Vec::new();
    let mut g = Vec::new();
    for (lineno, record) in rdr.records().enumerate() {
        let record = record?;
        let line = lineno + 2;
        if record.len() != k + 2 {
            return Err(Error::parse(path, line, format!("expected {} fields", k + 2)));
        }
        let values = record
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|err| Error::parse(path, line, err.to_string()))?;
        match PointSet::from_tag(&record[0]) {
            Some(PointSet::Row) => {
                row_labels.push(record[1].to_string());
                f.extend(values);
            }
            Some(PointSet::Col) => {
                col_labels.push(record[1].to_string());
                g.extend(values);
            }
            None => {
                return Err(Error::parse(path, line, format!("unknown point set `{}`", &record[0])))
            }
        }
    }
    Ok(Coordinates {
        f: Matrix::from_row_slice(row_labels.len(), k, &f),
        g: Matrix::from_row_slice(col_labels.len(), k, &g),
        row_labels,
        col_labels,
    })
}

/// Tab-separated embeddings text: a header `method k s_1 … s_k`, then one
/// line `point_set label x_1 … x_k` per row label and per column label.
pub fn embeddings_to_string(e: &EmbeddingSet) -> String {
    let k = e.dim();
    let mut out = format!("{}\t{k}", e.method_tag);
    for s in e.singular_values.iter() {
        write!(out, "\t{s}").unwrap();
    }
    out.push('\n');
    for which in [PointSet::Row, PointSet::Col] {
        let (m, labels) = e.points(which);
        for (i, label) in labels.iter().enumerate() {
            write!(out, "{}\t{label}", which.tag()).unwrap();
            for d in 0..k {
                write!(out, "\t{}", m[(i, d)]).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn embeddings_from_str(text: &str, path: &Path) -> Result<EmbeddingSet> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::EmptyFile(path.to_path_buf()));
    };
    let fields: Vec<&str> = header.split('\t').collect();
    if fields.len() < 2 {
        return Err(Error::parse(path, 1, "header needs method tag and dimension"));
    }
    let method_tag = fields[0].to_string();
    let k: usize = fields[1]
        .parse()
        .map_err(|_| Error::parse(path, 1, format!("invalid dimension `{}`", fields[1])))?;
    let singular: Vec<f64> = fields[2..]
        .iter()
        .map(|s| s.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|err| Error::parse(path, 1, err.to_string()))?;
    if singular.len() != k {
        return Err(Error::parse(path, 1, format!("expected {k} singular values")));
    }

    let mut row_labels = Vec::new();
    let mut col_labels = Vec::new();
    let mut f = Vec::new();
    let mut g = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != k + 2 {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!("expected {} fields, found {}", k + 2, fields.len()),
            ));
        }
        let values = fields[2..]
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|err| Error::parse(path, lineno + 1, err.to_string()))?;
        match PointSet::from_tag(fields[0]) {
            Some(PointSet::Row) => {
                row_labels.push(fields[1].to_string());
                f.extend(values);
            }
            Some(PointSet::Col) => {
                col_labels.push(fields[1].to_string());
                g.extend(values);
            }
            None => {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("unknown point set `{}`", fields[0]),
                ))
            }
        }
    }
    Ok(EmbeddingSet {
        f: Matrix::from_row_slice(row_labels.len(), k, &f),
        g: Matrix::from_row_slice(col_labels.len(), k, &g),
        row_labels,
        col_labels,
        singular_values: Vector::from_vec(singular),
        method_tag,
        decomposition: None,
    })
}

pub fn write_embeddings(e: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, embeddings_to_string(e)).map_err(|err| Error::io(path, err))
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|err| Error::io(path, err))?;
    embeddings_from_str(&text, path)
}
