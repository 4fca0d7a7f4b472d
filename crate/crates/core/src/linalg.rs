//! Dense linear algebra used by every fitting routine: thin SVD with a fixed
//! sign convention, square roots of symmetric positive-definite matrices, and
//! the metric-weighted (generalized) SVD.
//!
//! A generalized SVD of `M` under metrics `Wr`, `Wc` is a factorization
//! `M = U diag(s) Vᵗ` with `Uᵗ Wr⁻¹ U = I` and `Vᵗ Wc⁻¹ V = I`. It is computed
//! by taking the ordinary SVD of `Wr^{-1/2} M Wc^{-1/2}` and mapping the
//! singular vectors back with `Wr^{1/2}`, `Wc^{1/2}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Singular values below this fraction of the largest one are flagged as
/// numerically zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Builds a matrix from row-major entries, rejecting NaN and infinities.
pub fn matrix_from_row_slice(rows: usize, cols: usize, entries: &[f64]) -> Result<Matrix> {
    if entries.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} entries for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    let m = Matrix::from_row_slice(rows, cols, entries);
    check_finite(&m)?;
    Ok(m)
}

pub fn check_finite(m: &Matrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Weight matrix a generalized SVD is orthonormal under.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Identity,
    Diagonal(Vector),
    Dense(Matrix),
}

impl Metric {
    pub fn diagonal(weights: &[f64]) -> Self {
        Metric::Diagonal(Vector::from_column_slice(weights))
    }

    /// The metric as an explicit `n x n` matrix.
    pub fn to_matrix(&self, n: usize) -> Matrix {
        match self {
            Metric::Identity => Matrix::identity(n, n),
            Metric::Diagonal(d) => Matrix::from_diagonal(d),
            Metric::Dense(m) => m.clone(),
        }
    }

    /// Explicit inverse of the metric.
    pub fn inverse_matrix(&self, n: usize) -> Result<Matrix> {
        match self {
            Metric::Identity => Ok(Matrix::identity(n, n)),
            Metric::Diagonal(d) => {
                check_positive_diagonal(d)?;
                Ok(Matrix::from_diagonal(&d.map(|x| 1.0 / x)))
            }
            Metric::Dense(m) => {
                let (_, inv_sqrt) = spd_roots(m)?;
                Ok(&inv_sqrt * &inv_sqrt)
            }
        }
    }

    fn check_dim(&self, n: usize, what: &str) -> Result<()> {
        let dim = match self {
            Metric::Identity => return Ok(()),
            Metric::Diagonal(d) => d.len(),
            Metric::Dense(m) => {
                if m.nrows() != m.ncols() {
                    return Err(Error::DimensionMismatch(format!(
                        "{what} metric is {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                m.nrows()
            }
        };
        if dim != n {
            return Err(Error::DimensionMismatch(format!(
                "{what} metric has dimension {dim}, matrix side is {n}"
            )));
        }
        Ok(())
    }

    /// `(W^{1/2}, W^{-1/2})` as explicit matrices.
    fn roots(&self, n: usize) -> Result<(Matrix, Matrix)> {
        match self {
            Metric::Identity => Ok((Matrix::identity(n, n), Matrix::identity(n, n))),
            Metric::Diagonal(d) => {
                check_positive_diagonal(d)?;
                Ok((
                    Matrix::from_diagonal(&d.map(f64::sqrt)),
                    Matrix::from_diagonal(&d.map(|x| 1.0 / x.sqrt())),
                ))
            }
            Metric::Dense(m) => spd_roots(m),
        }
    }
}

fn check_positive_diagonal(d: &Vector) -> Result<()> {
    for (index, &eigenvalue) in d.iter().enumerate() {
        if !(eigenvalue > 0.0) || !eigenvalue.is_finite() {
            return Err(Error::NotPositiveDefinite { eigenvalue, index });
        }
    }
    Ok(())
}

/// Singular triplets `(U, s, V)` together with the metrics `U` and `V` are
/// orthonormal under. Singular vectors are stored as columns.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub u: Matrix,
    pub s: Vector,
    pub v: Matrix,
    pub metric_row: Metric,
    pub metric_col: Metric,
}

impl Decomposition {
    pub fn rank_capacity(&self) -> usize {
        self.s.len()
    }

    /// Flags singular values below `RANK_TOLERANCE * s_max`.
    pub fn negligible(&self) -> Vec<bool> {
        let smax = self.s.iter().copied().fold(0.0, f64::max);
        self.s
            .iter()
            .map(|&x| smax == 0.0 || x < RANK_TOLERANCE * smax)
            .collect()
    }

    pub fn numerical_rank(&self) -> usize {
        self.negligible().iter().filter(|&&z| !z).count()
    }

    /// Keeps the leading `k` triplets.
    pub fn truncated(&self, k: usize) -> Decomposition {
        let k = k.min(self.s.len());
        Decomposition {
            u: self.u.columns(0, k).into_owned(),
            s: self.s.rows(0, k).into_owned(),
            v: self.v.columns(0, k).into_owned(),
            metric_row: self.metric_row.clone(),
            metric_col: self.metric_col.clone(),
        }
    }

    pub fn reconstruct(&self) -> Matrix {
        &self.u * Matrix::from_diagonal(&self.s) * self.v.transpose()
    }
}

/// Thin SVD with identity metrics.
///
/// In each left singular vector the entry of largest magnitude is made
/// nonnegative (lowest index on ties) and the matching right vector is flipped
/// with it, so results are reproducible.
pub fn svd(m: &Matrix) -> Result<Decomposition> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::DimensionMismatch(format!(
            "cannot decompose a {rows}x{cols} matrix"
        )));
    }
    let (mut u, mut s, mut v) = raw_svd(m).ok_or(Error::NoConvergence { rows, cols })?;
    sort_descending(&mut u, &mut s, &mut v);
    apply_sign_convention(&mut u, &mut v);
    let d = Decomposition {
        u,
        s,
        v,
        metric_row: Metric::Identity,
        metric_col: Metric::Identity,
    };
    check_finite(&d.u)?;
    check_finite(&d.v)?;
    Ok(d)
}

/// Thin SVD from faer, converted to nalgebra matrices. Rejected unless
/// `U S Vᵗ` reproduces `m`.
fn raw_svd(m: &Matrix) -> Option<(Matrix, Vector, Matrix)> {
    let (rows, cols) = m.shape();
    let f = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = f.thin_svd().ok()?;
    let (fu, fs, fv) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = fs.nrows();
    let u = Matrix::from_fn(rows, k, |i, j| fu[(i, j)]);
    let s = Vector::from_fn(k, |i, _| fs[i]);
    let v = Matrix::from_fn(cols, k, |i, j| fv[(i, j)]);
    let error = (&u * Matrix::from_diagonal(&s) * v.transpose() - m).amax();
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (error <= 1e-10 * scale).then_some((u, s, v))
}

fn sort_descending(u: &mut Matrix, s: &mut Vector, v: &mut Matrix) {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    if order.iter().enumerate().all(|(i, &j)| i == j) {
        return;
    }
    let u0 = u.clone();
    let v0 = v.clone();
    let s0 = s.clone();
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u0.column(src));
        v.set_column(dst, &v0.column(src));
        s[dst] = s0[src];
    }
}

pub(crate) fn apply_sign_convention(u: &mut Matrix, v: &mut Matrix) {
    for j in 0..u.ncols() {
        let mut best = 0;
        let mut best_abs = f64::NEG_INFINITY;
        for i in 0..u.nrows() {
            let a = u[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if u[(best, j)] < 0.0 {
            u.column_mut(j).neg_mut();
            v.column_mut(j).neg_mut();
        }
    }
}

/// Square root of a symmetric positive-definite matrix.
pub fn spd_sqrt(k: &Matrix) -> Result<Matrix> {
    spd_roots(k).map(|(sqrt, _)| sqrt)
}

/// Inverse square root of a symmetric positive-definite matrix.
pub fn spd_inv_sqrt(k: &Matrix) -> Result<Matrix> {
    spd_roots(k).map(|(_, inv)| inv)
}

/// `(K^{1/2}, K^{-1/2})`, with a fast path for diagonal input.
pub(crate) fn spd_roots(k: &Matrix) -> Result<(Matrix, Matrix)> {
    check_finite(k)?;
    let n = k.nrows();
    if n != k.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "square root of a {}x{} matrix",
            n,
            k.ncols()
        )));
    }
    if is_diagonal(k) {
        let d = k.diagonal();
        check_positive_diagonal(&d)?;
        return Ok((
            Matrix::from_diagonal(&d.map(f64::sqrt)),
            Matrix::from_diagonal(&d.map(|x| 1.0 / x.sqrt())),
        ));
    }

    let scale = k.amax();
    let asymmetry = (k - k.transpose()).amax();
    if asymmetry > SYMMETRY_TOLERANCE * scale.max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let sym = (k + k.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let lmax = eig.eigenvalues.amax();
    for (index, &eigenvalue) in eig.eigenvalues.iter().enumerate() {
        if eigenvalue <= RANK_TOLERANCE * lmax || !eigenvalue.is_finite() {
            return Err(Error::NotPositiveDefinite { eigenvalue, index });
        }
    }
    let q = &eig.eigenvectors;
    let sqrt = q * Matrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * q.transpose();
    let inv = q * Matrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt())) * q.transpose();
    Ok((symmetrize(sqrt), symmetrize(inv)))
}

fn is_diagonal(k: &Matrix) -> bool {
    for j in 0..k.ncols() {
        for i in 0..k.nrows() {
            if i != j && k[(i, j)] != 0.0 {
                return false;
            }
        }
    }
    true
}

fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// Generalized SVD of `m` under row metric `wr` and column metric `wc`.
///
/// Returns `U = Wr^{1/2} Û`, `V = Wc^{1/2} V̂` where `Û s V̂ᵗ` is the SVD of
/// `Wr^{-1/2} m Wc^{-1/2}`. The sign convention is applied to the returned `U`.
pub fn metric_gsvd(m: &Matrix, wr: &Metric, wc: &Metric) -> Result<Decomposition> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    wr.check_dim(rows, "row")?;
    wc.check_dim(cols, "column")?;
    let (wr_sqrt, wr_inv_sqrt) = wr.roots(rows)?;
    let (wc_sqrt, wc_inv_sqrt) = wc.roots(cols)?;
    let whitened = &wr_inv_sqrt * m * &wc_inv_sqrt;
    let inner = svd(&whitened)?;
    let mut u = wr_sqrt * inner.u;
    let mut v = wc_sqrt * inner.v;
    apply_sign_convention(&mut u, &mut v);
    Ok(Decomposition {
        u,
        s: inner.s,
        v,
        metric_row: wr.clone(),
        metric_col: wc.clone(),
    })
}

/// Sum of singular values; the maximum of `tr(Rᵗ M)` over orthogonal `R`.
pub fn nuclear_norm(m: &Matrix) -> Result<f64> {
    Ok(svd(m)?.s.sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn exactly_rank_deficient_svd() {
        // residual of [[22, 21], [17, 21], [19, 30]]: rows sum to zero
        let m = Matrix::from_column_slice(
            3,
            2,
            &[
                0.02165680473372783,
                0.0003550295857988328,
                -0.022011834319526608,
                -0.021656804733727802,
                -0.00035502958579880506,
                0.022011834319526635,
            ],
        );
        let d = svd(&m).unwrap();
        assert!(max_abs_diff(&d.reconstruct(), &m) < 1e-15);
        assert!(d.s[1] < 1e-15);
        assert_eq!(d.numerical_rank(), 1);
    }

    #[test]
    fn identity_svd() {
        let d = svd(&Matrix::identity(2, 2)).unwrap();
        assert_eq!(d.s.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn zero_matrix_svd() {
        let d = svd(&Matrix::zeros(3, 2)).unwrap();
        assert!(d.s.iter().all(|&x| x == 0.0));
        assert!(d.negligible().iter().all(|&z| z));
        assert_eq!(d.numerical_rank(), 0);
    }

    #[test]
    fn diagonal_svd_permutes_axes() {
        let m = matrix_from_row_slice(2, 2, &[3.0, 0.0, 0.0, 4.0]).unwrap();
        let d = svd(&m).unwrap();
        assert!((d.s[0] - 4.0).abs() < 1e-14);
        assert!((d.s[1] - 3.0).abs() < 1e-14);
        // leading left vector is e_2, with the sign convention making it +e_2
        assert!((d.u[(1, 0)] - 1.0).abs() < 1e-14);
        assert!((d.u[(0, 1)] - 1.0).abs() < 1e-14);
        assert!(max_abs_diff(&d.reconstruct(), &m) < 1e-14);
    }

    #[test]
    fn sign_convention_makes_largest_entry_nonnegative() {
        let m = matrix_from_row_slice(3, 2, &[-1.0, 2.0, -3.0, 0.5, 0.2, -4.0]).unwrap();
        let d = svd(&m).unwrap();
        for j in 0..d.u.ncols() {
            let col = d.u.column(j);
            let imax = col.iamax();
            assert!(col[imax] >= 0.0);
        }
        assert!(max_abs_diff(&d.reconstruct(), &m) < 1e-12);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(
            matrix_from_row_slice(1, 2, &[1.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        let mut m = Matrix::identity(2, 2);
        m[(1, 0)] = f64::INFINITY;
        assert!(svd(&m).is_err());
    }

    #[test]
    fn spd_sqrt_diagonal() {
        let k = Matrix::from_diagonal(&Vector::from_vec(vec![4.0, 9.0]));
        let r = spd_sqrt(&k).unwrap();
        assert_eq!(r, Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 3.0])));
        assert_eq!(spd_sqrt(&Matrix::identity(3, 3)).unwrap(), Matrix::identity(3, 3));
    }

    #[test]
    fn spd_sqrt_dense_squares_back() {
        let k = matrix_from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let r = spd_sqrt(&k).unwrap();
        assert!(max_abs_diff(&(&r * &r), &k) < 1e-10);
        assert!(max_abs_diff(&r, &r.transpose()) == 0.0);
        let inv = spd_inv_sqrt(&k).unwrap();
        assert!(max_abs_diff(&(&r * &inv), &Matrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn spd_sqrt_rejects_indefinite() {
        let k = matrix_from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        match spd_sqrt(&k) {
            Err(Error::NotPositiveDefinite { eigenvalue, .. }) => {
                assert!((eigenvalue + 1.0).abs() < 1e-12)
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
        let singular = Matrix::from_element(3, 3, 1.0);
        assert!(matches!(
            spd_sqrt(&singular),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let neg_diag = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -2.0]));
        assert!(matches!(
            spd_sqrt(&neg_diag),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn spd_sqrt_rejects_asymmetric() {
        let k = matrix_from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]).unwrap();
        assert!(matches!(spd_sqrt(&k), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn gsvd_with_identity_metrics_is_svd() {
        let m = matrix_from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0]).unwrap();
        let a = svd(&m).unwrap();
        let b = metric_gsvd(&m, &Metric::Identity, &Metric::Identity).unwrap();
        assert_eq!(a.s, b.s);
        assert_eq!(a.u, b.u);
        assert_eq!(a.v, b.v);
    }

    #[test]
    fn gsvd_rejects_bad_metric() {
        let m = Matrix::identity(2, 2);
        assert!(matches!(
            metric_gsvd(&m, &Metric::diagonal(&[1.0, 0.0]), &Metric::Identity),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
        assert!(matches!(
            metric_gsvd(&m, &Metric::diagonal(&[1.0]), &Metric::Identity),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn nuclear_norm_examples() {
        let m = Matrix::from_diagonal(&Vector::from_vec(vec![3.0, 4.0]));
        assert!((nuclear_norm(&m).unwrap() - 7.0).abs() < 1e-14);
        assert_eq!(nuclear_norm(&Matrix::zeros(2, 3)).unwrap(), 0.0);
    }

    #[test]
    fn truncation_keeps_leading_triplets() {
        let m = matrix_from_row_slice(3, 3, &[5.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 1.0]).unwrap();
        let d = svd(&m).unwrap();
        let t = d.truncated(2);
        assert_eq!(t.u.ncols(), 2);
        assert_eq!(t.v.ncols(), 2);
        assert_eq!(t.s.as_slice(), &d.s.as_slice()[..2]);
    }

    fn random_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-5.0f64..5.0, rows * cols)
            .prop_map(move |v| Matrix::from_row_slice(rows, cols, &v))
    }

    fn random_spd(n: usize) -> impl Strategy<Value = Matrix> {
        random_matrix(n, n).prop_map(move |b| &b * b.transpose() + Matrix::identity(n, n) * 0.5)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn gsvd_is_metric_orthonormal_and_reconstructs(
            m in random_matrix(4, 5),
            wr in random_spd(4),
            wc in random_spd(5),
        ) {
            let wr = Metric::Dense(wr);
            let wc = Metric::Dense(wc);
            let d = metric_gsvd(&m, &wr, &wc).unwrap();
            let ur = d.u.transpose() * wr.inverse_matrix(4).unwrap() * &d.u;
            let vc = d.v.transpose() * wc.inverse_matrix(5).unwrap() * &d.v;
            prop_assert!(max_abs_diff(&ur, &Matrix::identity(4, 4)) < 1e-8);
            prop_assert!(max_abs_diff(&vc, &Matrix::identity(4, 4)) < 1e-8);
            prop_assert!(max_abs_diff(&d.reconstruct(), &m) < 1e-8);
            prop_assert!(d.s.iter().zip(d.s.iter().skip(1)).all(|(a, b)| a >= b));
        }

        #[test]
        fn gsvd_diagonal_metrics(
            m in random_matrix(5, 3),
            wr in prop::collection::vec(0.05f64..10.0, 5),
            wc in prop::collection::vec(0.05f64..10.0, 3),
        ) {
            let wr = Metric::diagonal(&wr);
            let wc = Metric::diagonal(&wc);
            let d = metric_gsvd(&m, &wr, &wc).unwrap();
            let ur = d.u.transpose() * wr.inverse_matrix(5).unwrap() * &d.u;
            let vc = d.v.transpose() * wc.inverse_matrix(3).unwrap() * &d.v;
            prop_assert!(max_abs_diff(&ur, &Matrix::identity(3, 3)) < 1e-8);
            prop_assert!(max_abs_diff(&vc, &Matrix::identity(3, 3)) < 1e-8);
            prop_assert!(max_abs_diff(&d.reconstruct(), &m) < 1e-8);
        }

        #[test]
        fn spd_sqrt_squares_back(k in random_spd(4)) {
            let r = spd_sqrt(&k).unwrap();
            prop_assert!(max_abs_diff(&(&r * &r), &k) < 1e-10 * k.amax().max(1.0));
            prop_assert_eq!(&r, &r.transpose());
        }

        #[test]
        fn singular_values_permutation_invariant(
            m in random_matrix(4, 3),
            row_perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
            col_perm in Just(vec![0usize, 1, 2]).prop_shuffle(),
        ) {
            let p = Matrix::from_fn(4, 3, |i, j| m[(row_perm[i], col_perm[j])]);
            let a = svd(&m).unwrap();
            let b = svd(&p).unwrap();
            for (x, y) in a.s.iter().zip(b.s.iter()) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn nuclear_norm_is_sum_of_singular_values(m in random_matrix(3, 3)) {
            let d = svd(&m).unwrap();
            prop_assert!((nuclear_norm(&m).unwrap() - d.s.sum()).abs() < 1e-10);
        }
    }
}
