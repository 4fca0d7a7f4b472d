//! Kernel correspondence analysis.
//!
//! The generalized problem is
//!
//! ```text
//! maximize    ½ tr(Rᵗ Kʳ A Kᶜ)
//! subject to  Rᵗ Kʳ R Kᶜ = I
//! ```
//!
//! where `A` is an association matrix built cellwise from `X = N/n` and
//! `Y = r cᵗ/n²`, and `Kʳ`, `Kᶜ` are symmetric positive-definite kernels.
//! Substituting `R = (Kʳ)^{-1/2} R̂ (Kᶜ)^{-1/2}` turns it into
//! `max ½ tr(R̂ᵗ Â)` with `R̂ᵗ R̂ = I` and `Â = (Kʳ)^{1/2} A (Kᶜ)^{1/2}`, solved
//! by the SVD `Â = Û S V̂ᵗ`. Coordinates are `F = (Kʳ)^{1/2} Û S^p` and
//! `G = (Kᶜ)^{1/2} V̂ S^p`.
//!
//! | method   | Kʳ            | Kᶜ            | A                         |
//! |----------|---------------|---------------|---------------------------|
//! | linear   | D(r)⁻¹        | D(c)⁻¹        | X − Y                     |
//! | gini     | I             | I             | X − Y                     |
//! | gtest    | I             | I             | X (log X − log Y)         |
//! | sgns(k)  | I             | I             | max(log X − log Y − log k, 0) |
//! | kpca_cd  | e^{α‖eᵢ−eⱼ‖²} | I             | X − Y                     |
//!
//! GloVe fits into the same frame with learned bias terms in place of
//! `log k`; bias fitting is not part of this crate.

use std::collections::{HashMap, HashSet};

use crate::ca::{check_rank, EmbeddingSet};
use crate::error::{Error, Result};
use crate::gini::Axis;
use crate::linalg::{apply_sign_convention, spd_roots, svd, Decomposition, Matrix, Metric};
use crate::tables::{residual_matrix, ContingencyTable};

/// What replaces `−∞` PMI values in zero-count cells for SGNS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PmiFloor {
    /// `max(PMI − log k, 0)` everywhere (shifted positive PMI).
    Positive,
    /// Shifted PMI left unclamped; zero-count cells take this value.
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Association {
    Linear,
    Gini,
    GTest,
    Sgns { shift: f64, floor: PmiFloor },
    KpcaCd { alpha: f64 },
}

impl Association {
    pub fn tag(&self) -> &'static str {
        match self {
            Association::Linear => "linear",
            Association::Gini => "gini",
            Association::GTest => "gtest",
            Association::Sgns { .. } => "sgns",
            Association::KpcaCd { .. } => "kpca_cd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Identity,
    /// `D(marginal)⁻¹`.
    InverseMarginal,
    /// `D(w) D(marginal)⁻¹` with `wᵢ = 1 + α` for labels in `words`, else 1.
    StopWord { alpha: f64, words: HashSet<String> },
    /// `1` on the diagonal, `e^{2α}` off it. Positive definite only for `α < 0`.
    KpcaCd { alpha: f64 },
    Explicit(Matrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KcaMethod {
    pub association: Association,
    pub row_kernel: KernelSpec,
    pub col_kernel: KernelSpec,
    /// Power `p` applied to singular values in the coordinates.
    pub exponent: f64,
}

impl KcaMethod {
    pub fn linear_ca() -> Self {
        KcaMethod {
            association: Association::Linear,
            row_kernel: KernelSpec::InverseMarginal,
            col_kernel: KernelSpec::InverseMarginal,
            exponent: 1.0,
        }
    }

    pub fn gini() -> Self {
        KcaMethod {
            association: Association::Gini,
            row_kernel: KernelSpec::Identity,
            col_kernel: KernelSpec::Identity,
            exponent: 1.0,
        }
    }

    pub fn gtest() -> Self {
        KcaMethod {
            association: Association::GTest,
            ..Self::gini()
        }
    }

    pub fn sgns(shift: f64) -> Self {
        KcaMethod {
            association: Association::Sgns {
                shift,
                floor: PmiFloor::Positive,
            },
            ..Self::gini()
        }
    }

    pub fn kpca_cd(alpha: f64) -> Self {
        KcaMethod {
            association: Association::KpcaCd { alpha },
            row_kernel: KernelSpec::KpcaCd { alpha },
            col_kernel: KernelSpec::Identity,
            exponent: 1.0,
        }
    }

    /// Replaces both kernels with stop-word kernels.
    pub fn with_stopwords(mut self, words: &HashSet<String>, alpha_row: f64, alpha_col: f64) -> Self {
        self.row_kernel = KernelSpec::StopWord {
            alpha: alpha_row,
            words: words.clone(),
        };
        self.col_kernel = KernelSpec::StopWord {
            alpha: alpha_col,
            words: words.clone(),
        };
        self
    }

    pub fn with_exponent(mut self, p: f64) -> Self {
        self.exponent = p;
        self
    }

    pub fn tag(&self) -> String {
        let sw = matches!(self.row_kernel, KernelSpec::StopWord { .. })
            || matches!(self.col_kernel, KernelSpec::StopWord { .. });
        if sw {
            format!("{}+sw", self.association.tag())
        } else {
            self.association.tag().to_string()
        }
    }

    fn validate(&self) -> Result<()> {
        if let Association::Sgns { shift, .. } = self.association {
            if !(shift > 0.0) || !shift.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "sgns shift must be positive, got {shift}"
                )));
            }
        }
        if !self.exponent.is_finite() {
            return Err(Error::InvalidParameter("exponent must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AssociationMatrix {
    pub values: Matrix,
    pub method_tag: String,
}

fn pmi(t: &ContingencyTable, i: usize, j: usize) -> f64 {
    let nij = t.counts()[(i, j)];
    (nij * t.n() / (t.r()[i] * t.c()[j])).ln()
}

/// Cellwise association between `X = N/n` and `Y = r cᵗ/n²`.
pub fn association_matrix(t: &ContingencyTable, method: &KcaMethod) -> Result<AssociationMatrix> {
    method.validate()?;
    let n = t.n();
    let values = match method.association {
        Association::Linear | Association::Gini | Association::KpcaCd { .. } => residual_matrix(t),
        Association::GTest => Matrix::from_fn(t.nrows(), t.ncols(), |i, j| {
            let nij = t.counts()[(i, j)];
            if nij == 0.0 {
                0.0
            } else {
                nij / n * pmi(t, i, j)
            }
        }),
        Association::Sgns { shift, floor } => {
            let log_k = shift.ln();
            Matrix::from_fn(t.nrows(), t.ncols(), |i, j| {
                let zero = t.counts()[(i, j)] == 0.0;
                match floor {
                    PmiFloor::Positive if zero => 0.0,
                    PmiFloor::Positive => (pmi(t, i, j) - log_k).max(0.0),
                    PmiFloor::Value(v) if zero => v,
                    PmiFloor::Value(_) => pmi(t, i, j) - log_k,
                }
            })
        }
    };
    Ok(AssociationMatrix {
        values,
        method_tag: method.tag(),
    })
}

/// Builds the kernel matrix for one axis of `t`.
pub fn materialize_kernel(spec: &KernelSpec, t: &ContingencyTable, axis: Axis) -> Result<Matrix> {
    let (marginal, labels) = match axis {
        Axis::Row => (t.r(), t.row_labels()),
        Axis::Col => (t.c(), t.col_labels()),
    };
    let m = marginal.len();
    let k = match spec {
        KernelSpec::Identity => Matrix::identity(m, m),
        KernelSpec::InverseMarginal => Matrix::from_diagonal(&marginal.map(|x| 1.0 / x)),
        KernelSpec::StopWord { alpha, words } => {
            let w = 1.0 + alpha;
            if !(w > 0.0) {
                return Err(Error::NotPositiveDefinite {
                    eigenvalue: w,
                    index: labels.iter().position(|l| words.contains(l)).unwrap_or(0),
                });
            }
            let diag = marginal
                .iter()
                .zip(labels)
                .map(|(&x, l)| if words.contains(l) { w / x } else { 1.0 / x });
            Matrix::from_diagonal(&nalgebra::DVector::from_iterator(m, diag))
        }
        KernelSpec::KpcaCd { alpha } => {
            let off = (2.0 * alpha).exp();
            Matrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { off })
        }
        KernelSpec::Explicit(k) => {
            if k.shape() != (m, m) {
                return Err(Error::DimensionMismatch(format!(
                    "explicit kernel is {}x{}, axis has {m} categories",
                    k.nrows(),
                    k.ncols()
                )));
            }
            k.clone()
        }
    };
    // SPD check
    spd_roots(&k)?;
    Ok(k)
}

/// A solved KCA problem before truncation.
#[derive(Debug, Clone)]
pub struct KcaSolution {
    pub association: Matrix,
    pub row_kernel: Matrix,
    pub col_kernel: Matrix,
    row_sqrt: Matrix,
    row_inv_sqrt: Matrix,
    col_sqrt: Matrix,
    col_inv_sqrt: Matrix,
    /// SVD of `Â = (Kʳ)^{1/2} A (Kᶜ)^{1/2}`.
    pub sandwich: Decomposition,
}

impl KcaSolution {
    fn new(association: Matrix, row_kernel: Matrix, col_kernel: Matrix) -> Result<Self> {
        let (row_sqrt, row_inv_sqrt) = spd_roots(&row_kernel)?;
        let (col_sqrt, col_inv_sqrt) = spd_roots(&col_kernel)?;
        let a_hat = &row_sqrt * &association * &col_sqrt;
        let mut sandwich = svd(&a_hat)?;
        // sign convention on (Kʳ)^{-1/2} Û, the left factor orthonormal under
        // (Kʳ)⁻¹; for linear CA this is Ŭ of the generalized SVD
        let mut left = &row_inv_sqrt * &sandwich.u;
        apply_sign_convention(&mut left, &mut sandwich.v);
        sandwich.u = &row_sqrt * left;
        Ok(KcaSolution {
            association,
            row_kernel,
            col_kernel,
            row_sqrt,
            row_inv_sqrt,
            col_sqrt,
            col_inv_sqrt,
            sandwich,
        })
    }

    /// `Â`, reconstructed from its SVD.
    pub fn a_hat(&self) -> Matrix {
        &self.row_sqrt * &self.association * &self.col_sqrt
    }

    /// Optimal `R = (Kʳ)^{-1/2} Û V̂ᵗ (Kᶜ)^{-1/2}`.
    pub fn rotation(&self) -> Matrix {
        let d = &self.sandwich;
        &self.row_inv_sqrt * &d.u * d.v.transpose() * &self.col_inv_sqrt
    }

    /// Maps an orthonormal `Q` into the feasible set `Rᵗ Kʳ R Kᶜ = I`.
    pub fn feasible_from_orthogonal(&self, q: &Matrix) -> Matrix {
        &self.row_inv_sqrt * q * &self.col_inv_sqrt
    }

    /// `½ tr(Rᵗ Kʳ A Kᶜ)`.
    pub fn objective(&self, r: &Matrix) -> f64 {
        0.5 * r.dot(&(&self.row_kernel * &self.association * &self.col_kernel))
    }

    /// `Rᵗ Kʳ R Kᶜ`, which is the identity for feasible `R`.
    pub fn constraint(&self, r: &Matrix) -> Matrix {
        r.transpose() * &self.row_kernel * r * &self.col_kernel
    }

    /// Attained maximum, `½ Σ sᵢ`.
    pub fn optimum(&self) -> f64 {
        0.5 * self.sandwich.s.sum()
    }

    fn embeddings(
        &self,
        t: &ContingencyTable,
        k: usize,
        exponent: f64,
        method_tag: String,
    ) -> EmbeddingSet {
        let d = self.sandwich.truncated(k);
        let sp = Matrix::from_diagonal(&d.s.map(|x| if x == 0.0 { 0.0 } else { x.powf(exponent) }));
        let f = &self.row_sqrt * &d.u * &sp;
        let g = &self.col_sqrt * &d.v * &sp;
        EmbeddingSet {
            f,
            g,
            row_labels: t.row_labels().to_vec(),
            col_labels: t.col_labels().to_vec(),
            singular_values: d.s.clone(),
            method_tag,
            decomposition: Some(Decomposition {
                u: &self.row_inv_sqrt * &d.u,
                s: d.s,
                v: &self.col_inv_sqrt * &d.v,
                metric_row: Metric::Dense(&self.row_inv_sqrt * &self.row_inv_sqrt),
                metric_col: Metric::Dense(&self.col_inv_sqrt * &self.col_inv_sqrt),
            }),
        }
    }
}

pub fn solve_kca(t: &ContingencyTable, method: &KcaMethod) -> Result<KcaSolution> {
    let a = association_matrix(t, method)?;
    let kr = materialize_kernel(&method.row_kernel, t, Axis::Row)?;
    let kc = materialize_kernel(&method.col_kernel, t, Axis::Col)?;
    KcaSolution::new(a.values, kr, kc)
}

pub fn fit_kca(t: &ContingencyTable, method: &KcaMethod, k: usize) -> Result<EmbeddingSet> {
    check_rank(k, t)?;
    let sol = solve_kca(t, method)?;
    Ok(sol.embeddings(t, k, method.exponent, method.tag()))
}

/// `γᵢⱼ = α·score(i, j) + β` over `labels`; unscored pairs use score 0.
pub fn similarity_gamma(
    labels: &[String],
    scores: &[(String, String, f64)],
    alpha: f64,
    beta: f64,
) -> Matrix {
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut gamma = Matrix::from_element(labels.len(), labels.len(), beta);
    for (a, b, s) in scores {
        if let (Some(&i), Some(&j)) = (index.get(a.as_str()), index.get(b.as_str())) {
            gamma[(i, j)] = alpha * s + beta;
            gamma[(j, i)] = alpha * s + beta;
        }
    }
    gamma
}

/// Default `α` keeping `Γ` positive for a score scale topping out at
/// `max_score`.
pub fn default_ws_alpha(max_score: f64) -> f64 {
    0.1 / max_score
}

/// Solves the word-similarity kernel problem.
///
/// With `P = Γʳ N` and `Q = N Γᶜ` the table is replaced by
/// `M = N ∘ (Γʳ N Γᶜ) − P ∘ Q` with marginals `r′ = (P ∘ Q) 1` and
/// `c′ = (P ∘ Q)ᵗ 1`; the association is `M / n²` (original `n`) and the
/// kernels are `D(r′)⁻¹`, `D(c′)⁻¹`.
pub fn solve_ws_kca(t: &ContingencyTable, gamma_row: &Matrix, gamma_col: &Matrix) -> Result<KcaSolution> {
    let (nr, nc) = (t.nrows(), t.ncols());
    if gamma_row.shape() != (nr, nr) || gamma_col.shape() != (nc, nc) {
        return Err(Error::DimensionMismatch(format!(
            "gamma matrices {:?} and {:?} for a {nr}x{nc} table",
            gamma_row.shape(),
            gamma_col.shape()
        )));
    }
    let n = t.counts();
    let p = gamma_row * n;
    let q = n * gamma_col;
    let pq = p.component_mul(&q);
    let m = n.component_mul(&(&p * gamma_col)) - &pq;
    let r_mod: Vec<f64> = pq.row_iter().map(|row| row.sum()).collect();
    let c_mod: Vec<f64> = pq.column_iter().map(|col| col.sum()).collect();
    for (value, label) in r_mod.iter().zip(t.row_labels()) {
        if !(*value > 0.0) {
            return Err(Error::NonPositiveMarginal { label: label.clone(), value: *value });
        }
    }
    for (value, label) in c_mod.iter().zip(t.col_labels()) {
        if !(*value > 0.0) {
            return Err(Error::NonPositiveMarginal { label: label.clone(), value: *value });
        }
    }
    let total = t.n();
    let association = m / (total * total);
    let kr = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(nr, r_mod.iter().map(|x| 1.0 / x)));
    let kc = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(nc, c_mod.iter().map(|x| 1.0 / x)));
    KcaSolution::new(association, kr, kc)
}

pub fn fit_ws_kca(t: &ContingencyTable, gamma_row: &Matrix, gamma_col: &Matrix, k: usize) -> Result<EmbeddingSet> {
    fit_ws_kca_with_exponent(t, gamma_row, gamma_col, k, 1.0)
}

pub fn fit_ws_kca_with_exponent(
    t: &ContingencyTable,
    gamma_row: &Matrix,
    gamma_col: &Matrix,
    k: usize,
    exponent: f64,
) -> Result<EmbeddingSet> {
    check_rank(k, t)?;
    let sol = solve_ws_kca(t, gamma_row, gamma_col)?;
    Ok(sol.embeddings(t, k, exponent, "linear+ws".into()))
}
