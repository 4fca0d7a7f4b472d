//! Gini's variance of a categorical variable and its two-variable extension,
//! the rotated covariance `max_R ½ tr(Rᵗ Ξ)` over orthogonal `R`.

use crate::error::{Error, Result};
use crate::linalg::{svd, Matrix};
use crate::tables::{residual_matrix, ContingencyTable, ObservationList};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Col,
}

/// `σ²(x) = (1 − Σ pᵢ²) / 2` with `pᵢ` the marginal proportions of `axis`.
///
/// This is the closed form of `1/(2n²) Σₐ Σ_b [x(a) ≠ x(b)]`.
pub fn gini_variance(t: &ContingencyTable, axis: Axis) -> f64 {
    let marginal = match axis {
        Axis::Row => t.r(),
        Axis::Col => t.c(),
    };
    let n = t.n();
    let sum_sq: f64 = marginal.iter().map(|m| (m / n) * (m / n)).sum();
    (1.0 - sum_sq) / 2.0
}

/// Number of ordered observation pairs that disagree on `axis`,
/// `n² − Σ mᵢ² = n²(1 − Σ pᵢ²)`. Integer tables only.
pub fn disagreeing_pairs(t: &ContingencyTable, axis: Axis) -> Option<u128> {
    if !t.is_integer() {
        return None;
    }
    let marginal = match axis {
        Axis::Row => t.r(),
        Axis::Col => t.c(),
    };
    let n = t.n() as u128;
    let same: u128 = marginal.iter().map(|&m| (m as u128) * (m as u128)).sum();
    Some(n * n - same)
}

/// Optimal rotation and the covariance it attains.
#[derive(Debug, Clone)]
pub struct RotatedCovariance {
    pub value: f64,
    pub rotation: Matrix,
}

/// Maximizes `½ tr(Rᵗ Ξ)` subject to orthonormality of `R`.
///
/// With `Ξ = U S Vᵗ` the maximizer is `R = U Vᵗ` and the maximum is half the
/// nuclear norm of `Ξ`. For a wide table the problem is solved on `Ξᵗ` and the
/// rotation transposed back, so `R Rᵗ = I` holds instead of `Rᵗ R = I`.
pub fn rotated_covariance(t: &ContingencyTable) -> Result<RotatedCovariance> {
    let xi = residual_matrix(t);
    if xi.nrows() < xi.ncols() {
        let tall = rotated_covariance_of(&xi.transpose())?;
        return Ok(RotatedCovariance {
            value: tall.value,
            rotation: tall.rotation.transpose(),
        });
    }
    rotated_covariance_of(&xi)
}

fn rotated_covariance_of(xi: &Matrix) -> Result<RotatedCovariance> {
    let d = svd(xi)?;
    Ok(RotatedCovariance {
        value: 0.5 * d.s.sum(),
        rotation: &d.u * d.v.transpose(),
    })
}

/// `½ tr(Rᵗ M)`.
pub fn half_trace(r: &Matrix, m: &Matrix) -> f64 {
    0.5 * r.dot(m)
}

/// Literal double sum `1/(4n²) Σₐ Σ_b (eʳ(a) − eʳ(b))ᵗ R (eᶜ(a) − eᶜ(b))`.
///
/// Quadratic in the number of observations; used as an oracle for the trace
/// form.
pub fn brute_force_covariance(obs: &ObservationList, r: &Matrix) -> Result<f64> {
    let (nr, nc) = (obs.row_labels().len(), obs.col_labels().len());
    if r.shape() != (nr, nc) {
        return Err(Error::DimensionMismatch(format!(
            "rotation is {}x{}, observations have {nr}x{nc} categories",
            r.nrows(),
            r.ncols()
        )));
    }
    let pairs = obs.pairs();
    let mut total = 0.0;
    for &(ra, ca) in pairs {
        for &(rb, cb) in pairs {
            total += r[(ra, ca)] - r[(ra, cb)] - r[(rb, ca)] + r[(rb, cb)];
        }
    }
    let n = pairs.len() as f64;
    Ok(total / (4.0 * n * n))
}
