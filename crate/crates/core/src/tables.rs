//! Contingency tables, one-hot encodings and the centered frequency matrix.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{check_finite, Matrix, Vector};

/// Unit basis vector `e_index` of length `dim`.
pub fn one_hot(index: usize, dim: usize) -> Result<Vector> {
    if index >= dim {
        return Err(Error::IndexOutOfRange { index, dim });
    }
    let mut v = Vector::zeros(dim);
    v[index] = 1.0;
    Ok(v)
}

/// A two-way table of nonnegative counts with strictly positive marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    counts: Matrix,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    r: Vector,
    c: Vector,
    n: f64,
}

impl ContingencyTable {
    /// Validates counts and labels, then drops any row or column whose
    /// marginal is zero (logging the dropped labels).
    pub fn new(counts: Matrix, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        check_finite(&counts)?;
        if counts.nrows() != row_labels.len() || counts.ncols() != col_labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} counts with {} row labels and {} column labels",
                counts.nrows(),
                counts.ncols(),
                row_labels.len(),
                col_labels.len()
            )));
        }
        for j in 0..counts.ncols() {
            for i in 0..counts.nrows() {
                let value = counts[(i, j)];
                if value < 0.0 {
                    return Err(Error::NegativeCount { row: i, col: j, value });
                }
            }
        }

        let row_sums: Vec<f64> = counts.row_iter().map(|r| r.sum()).collect();
        let col_sums: Vec<f64> = counts.column_iter().map(|c| c.sum()).collect();
        let keep_rows: Vec<usize> = (0..row_sums.len()).filter(|&i| row_sums[i] > 0.0).collect();
        let keep_cols: Vec<usize> = (0..col_sums.len()).filter(|&j| col_sums[j] > 0.0).collect();

        let (counts, row_labels, col_labels) =
            if keep_rows.len() == row_sums.len() && keep_cols.len() == col_sums.len() {
                (counts, row_labels, col_labels)
            } else {
                let dropped_rows: Vec<&str> = (0..row_sums.len())
                    .filter(|&i| row_sums[i] <= 0.0)
                    .map(|i| row_labels[i].as_str())
                    .collect();
                let dropped_cols: Vec<&str> = (0..col_sums.len())
                    .filter(|&j| col_sums[j] <= 0.0)
                    .map(|j| col_labels[j].as_str())
                    .collect();
                warn!(
                    "dropping zero-marginal categories: rows {:?}, columns {:?}",
                    dropped_rows, dropped_cols
                );
                let sub = Matrix::from_fn(keep_rows.len(), keep_cols.len(), |i, j| {
                    counts[(keep_rows[i], keep_cols[j])]
                });
                let rl = keep_rows.iter().map(|&i| row_labels[i].clone()).collect();
                let cl = keep_cols.iter().map(|&j| col_labels[j].clone()).collect();
                (sub, rl, cl)
            };
        if counts.nrows() == 0 || counts.ncols() == 0 {
            return Err(Error::EmptyTable);
        }

        let r = Vector::from_iterator(counts.nrows(), counts.row_iter().map(|r| r.sum()));
        let c = Vector::from_iterator(counts.ncols(), counts.column_iter().map(|c| c.sum()));
        let n = r.sum();
        Ok(ContingencyTable {
            counts,
            row_labels,
            col_labels,
            r,
            c,
            n,
        })
    }

    /// Table with generated labels `r0, r1, ...` and `c0, c1, ...`.
    pub fn from_counts(counts: Matrix) -> Result<Self> {
        let rows = (0..counts.nrows()).map(|i| format!("r{i}")).collect();
        let cols = (0..counts.ncols()).map(|j| format!("c{j}")).collect();
        Self::new(counts, rows, cols)
    }

    pub fn counts(&self) -> &Matrix {
        &self.counts
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// Row marginals `N·1`.
    pub fn r(&self) -> &Vector {
        &self.r
    }

    /// Column marginals `Nᵗ·1`.
    pub fn c(&self) -> &Vector {
        &self.c
    }

    /// Grand total.
    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn nrows(&self) -> usize {
        self.counts.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.counts.ncols()
    }

    pub fn is_integer(&self) -> bool {
        self.counts.iter().all(|x| x.fract() == 0.0)
    }

    /// The same table divided by its total, so that `n = 1`.
    pub fn normalized(&self) -> ContingencyTable {
        self.scaled(1.0 / self.n)
    }

    pub fn scaled(&self, factor: f64) -> ContingencyTable {
        assert!(factor > 0.0 && factor.is_finite(), "scale factor must be positive");
        let counts = &self.counts * factor;
        let r = &self.r * factor;
        let c = &self.c * factor;
        let n = r.sum();
        ContingencyTable {
            counts,
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            r,
            c,
            n,
        }
    }

    pub fn transpose(&self) -> ContingencyTable {
        ContingencyTable {
            counts: self.counts.transpose(),
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            r: self.c.clone(),
            c: self.r.clone(),
            n: self.n,
        }
    }

    /// Expands an integer table back into one observation per unit count.
    pub fn to_observations(&self) -> Result<ObservationList> {
        if !self.is_integer() {
            return Err(Error::InvalidParameter(
                "only integer tables expand into observations".into(),
            ));
        }
        let mut pairs = Vec::with_capacity(self.n as usize);
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                for _ in 0..self.counts[(i, j)] as u64 {
                    pairs.push((i, j));
                }
            }
        }
        ObservationList::from_indices(self.row_labels.clone(), self.col_labels.clone(), pairs)
    }

    /// Renders the table as TSV: a header of column labels (after an empty
    /// corner cell), then one line per row label.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for label in &self.col_labels {
            out.push('\t');
            out.push_str(label);
        }
        out.push('\n');
        for (i, label) in self.row_labels.iter().enumerate() {
            out.push_str(label);
            for j in 0..self.ncols() {
                write!(out, "\t{}", self.counts[(i, j)]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv_str(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((_, header)) = lines.next() else {
            return Err(Error::EmptyFile(path.to_path_buf()));
        };
        let col_labels: Vec<String> = header.split('\t').skip(1).map(str::to_owned).collect();
        let mut row_labels = Vec::new();
        let mut entries = Vec::new();
        for (lineno, line) in lines {
            let mut fields = line.split('\t');
            let label = fields.next().unwrap_or_default();
            let mut width = 0;
            for field in fields {
                let value: f64 = field.trim().parse().map_err(|_| {
                    Error::parse(path, lineno + 1, format!("invalid count `{field}`"))
                })?;
                entries.push(value);
                width += 1;
            }
            if width != col_labels.len() {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("expected {} counts, found {width}", col_labels.len()),
                ));
            }
            row_labels.push(label.to_owned());
        }
        let counts = Matrix::from_row_slice(row_labels.len(), col_labels.len(), &entries);
        Self::new(counts, row_labels, col_labels)
    }

    pub fn read_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv_str(&text, path)
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }
}

/// Observations `a_1 … a_n`, each a (row category, column category) pair
/// stored as indices into the category lists.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationList {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    pairs: Vec<(usize, usize)>,
}

impl ObservationList {
    /// Categories are the distinct labels in lexicographic order, so the
    /// result does not depend on observation order.
    pub fn from_labels<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<Self> {
        let rows: BTreeSet<&str> = pairs.iter().map(|(a, _)| a.as_ref()).collect();
        let cols: BTreeSet<&str> = pairs.iter().map(|(_, b)| b.as_ref()).collect();
        let rows: Vec<String> = rows.into_iter().map(str::to_owned).collect();
        let cols: Vec<String> = cols.into_iter().map(str::to_owned).collect();
        Self::with_categories(rows, cols, pairs)
    }

    /// Uses the given category order; every observed label must be listed.
    pub fn with_categories<S: AsRef<str>>(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        pairs: &[(S, S)],
    ) -> Result<Self> {
        let row_index: HashMap<&str, usize> = row_labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let col_index: HashMap<&str, usize> = col_labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut indexed = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let i = *row_index.get(a.as_ref()).ok_or_else(|| {
                Error::InvalidParameter(format!("unknown row category `{}`", a.as_ref()))
            })?;
            let j = *col_index.get(b.as_ref()).ok_or_else(|| {
                Error::InvalidParameter(format!("unknown column category `{}`", b.as_ref()))
            })?;
            indexed.push((i, j));
        }
        Self::from_indices(row_labels, col_labels, indexed)
    }

    pub fn from_indices(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::NoObservations);
        }
        for &(i, j) in &pairs {
            if i >= row_labels.len() {
                return Err(Error::IndexOutOfRange { index: i, dim: row_labels.len() });
            }
            if j >= col_labels.len() {
                return Err(Error::IndexOutOfRange { index: j, dim: col_labels.len() });
            }
        }
        Ok(ObservationList { row_labels, col_labels, pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Row indicator matrix `Hʳ` (one one-hot row per observation).
    pub fn row_indicator(&self) -> Matrix {
        let mut h = Matrix::zeros(self.pairs.len(), self.row_labels.len());
        for (b, &(i, _)) in self.pairs.iter().enumerate() {
            h[(b, i)] = 1.0;
        }
        h
    }

    /// Column indicator matrix `Hᶜ`.
    pub fn col_indicator(&self) -> Matrix {
        let mut h = Matrix::zeros(self.pairs.len(), self.col_labels.len());
        for (b, &(_, j)) in self.pairs.iter().enumerate() {
            h[(b, j)] = 1.0;
        }
        h
    }
}

/// Counts `N = Hʳᵗ Hᶜ` accumulated directly from the observations.
pub fn contingency_from_observations(obs: &ObservationList) -> Result<ContingencyTable> {
    let mut counts = Matrix::zeros(obs.row_labels.len(), obs.col_labels.len());
    for &(i, j) in &obs.pairs {
        counts[(i, j)] += 1.0;
    }
    ContingencyTable::new(counts, obs.row_labels.clone(), obs.col_labels.clone())
}

/// `Ξ = N/n − r cᵗ/n²`. Rows and columns of the result sum to zero.
pub fn residual_matrix(t: &ContingencyTable) -> Matrix {
    let n = t.n;
    Matrix::from_fn(t.nrows(), t.ncols(), |i, j| {
        t.counts[(i, j)] / n - t.r[i] * t.c[j] / (n * n)
    })
}

pub const FISHER_EYE: [&str; 4] = ["blue", "light", "medium", "dark"];
pub const FISHER_HAIR: [&str; 5] = ["fair", "red", "medium", "dark", "black"];
pub const FISHER_COUNTS: [[u32; 5]; 4] = [
    [326, 38, 241, 110, 3],
    [688, 116, 584, 188, 4],
    [343, 84, 909, 412, 26],
    [98, 48, 403, 681, 85],
];

/// Fisher's eye colour (rows) by hair colour (columns) table, 5387 people.
pub fn fisher_table() -> ContingencyTable {
    let entries: Vec<f64> = FISHER_COUNTS.iter().flatten().map(|&x| x as f64).collect();
    ContingencyTable::new(
        Matrix::from_row_slice(4, 5, &entries),
        FISHER_EYE.iter().map(|s| s.to_string()).collect(),
        FISHER_HAIR.iter().map(|s| s.to_string()).collect(),
    )
    .expect("Fisher table is valid")
}
