//! Dense complex linear algebra on top of nalgebra.

use nalgebra::DMatrix;

use crate::C64;

pub type CMatrix = DMatrix<C64>;

pub fn from_rows(rows: &[Vec<C64>]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn to_rows(a: &CMatrix) -> Vec<Vec<C64>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
        .collect()
}

/// `max |A − A*|` entrywise.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    if a.nrows() != a.ncols() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(A + A*)/2`.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<f64> = hermitize(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `(λ_min, λ_max)` of a Hermitian matrix.
pub fn extremal_eigenvalues(a: &CMatrix) -> (f64, f64) {
    let ev = hermitian_eigenvalues(a);
    match (ev.first(), ev.last()) {
        (Some(lo), Some(hi)) => (*lo, *hi),
        _ => (f64::NAN, f64::NAN),
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Eigenvalues of `A x = μ B x` for Hermitian `A` and positive definite `B`,
/// ascending. `None` when `B` has no Cholesky factor.
pub fn generalized_eigenvalues(a: &CMatrix, b: &CMatrix) -> Option<Vec<f64>> {
    let chol = hermitize(b).cholesky()?;
    let l = chol.l();
    // L⁻¹ A L⁻*
    let x = l.solve_lower_triangular(&hermitize(a))?;
    let m = l.solve_lower_triangular(&x.adjoint())?;
    Some(hermitian_eigenvalues(&m))
}

/// Lower Cholesky factor of a positive definite Hermitian matrix.
pub fn cholesky_lower(a: &CMatrix) -> Option<CMatrix> {
    hermitize(a).cholesky().map(|c| c.l())
}

/// Diagonal of `A⁻¹`, `None` when `A` is numerically singular.
pub fn inverse_diagonal(a: &CMatrix) -> Option<Vec<f64>> {
    let inv = hermitize(a).try_inverse()?;
    Some((0..inv.nrows()).map(|i| inv[(i, i)].re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let g = 2.0 / std::f64::consts::PI;
        let a = from_rows(&[vec![c(1.0, 0.0), c(0.0, g)], vec![c(0.0, -g), c(1.0, 0.0)]]);
        let (lo, hi) = extremal_eigenvalues(&a);
        assert!((lo - (1.0 - g)).abs() < 1e-14);
        assert!((hi - (1.0 + g)).abs() < 1e-14);
        let d = inverse_diagonal(&a).unwrap();
        assert!((1.0 / d[0] - (1.0 - g * g)).abs() < 1e-14);
    }

    #[test]
    fn generalized_problem_matches_scaling() {
        let a = from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(8.0, 0.0)],
        ]);
        let b = from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(4.0, 0.0)],
        ]);
        let ev = generalized_eigenvalues(&a, &b).unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
        assert!(generalized_eigenvalues(&a, &CMatrix::zeros(2, 2)).is_none());
    }

    #[test]
    fn singular_values_sorted() {
        let a = from_rows(&[
            vec![c(3.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, -5.0)],
        ]);
        assert_eq!(singular_values(&a), vec![5.0, 3.0]);
        assert!(hermitian_defect(&a) > 1.0);
    }
}
