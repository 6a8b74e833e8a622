//! Small dense linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Least-squares solution with an SVD; `None` if `a` lacks full column rank.
pub(crate) fn lstsq_full_rank(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    if svd.singular_values.len() < a.ncols() || svd.singular_values.iter().any(|s| *s <= 1e-10 * max.max(1.0)) {
        return None;
    }
    svd.solve(b, 1e-14).ok()
}

/// Minimum-norm least squares.
pub(crate) fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    a.clone().svd(true, true).solve(b, 1e-12).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Orthonormal basis (as columns) of the null space of `a`.
pub(crate) fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let gram = a.transpose() * a;
    let eig = gram.symmetric_eigen();
    let max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max).max(1.0);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i].abs() <= 1e-10 * max)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Lawson–Hanson nonnegative least squares: `argmin ‖a x − b‖` over `x ≥ 0`.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let tol = 1e-12;
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let sub = |cols: &[usize]| DMatrix::from_columns(&cols.iter().map(|&j| a.column(j).into_owned()).collect::<Vec<_>>());
    for _ in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j]).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate.filter(|&j| w[j] > tol) else { break };
        passive[j] = true;
        for _ in 0..3 * n + 10 {
            let cols: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let s_p = lstsq(&sub(&cols), b);
            let mut s = DVector::zeros(n);
            for (k, &i) in cols.iter().enumerate() {
                s[i] = s_p[k];
            }
            if cols.iter().all(|&i| s[i] > tol) {
                x = s;
                break;
            }
            let alpha = cols
                .iter()
                .filter(|&&i| s[i] <= tol)
                .map(|&i| x[i] / (x[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            let alpha = if alpha.is_finite() { alpha.clamp(0.0, 1.0) } else { 0.0 };
            x += (s - &x) * alpha;
            for &i in &cols {
                if x[i] <= tol {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|p| *p) {
                break;
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_matches_known_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, -1.0, 0.0]);
        let x = nnls(&a, &b);
        // x2 is pushed to the boundary; x1 minimizes (x1−1)² + x1²
        assert!((x[0] - 0.5).abs() < 1e-10 && x[1] == 0.0);
        let b = DVector::from_vec(vec![0.3, 0.2, 0.5]);
        let x = nnls(&a, &b);
        assert!((x[0] - 0.3).abs() < 1e-10 && (x[1] - 0.2).abs() < 1e-10);
    }

    #[test]
    fn null_space_is_orthogonal_complement() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let n = null_space(&a);
        assert_eq!(n.ncols(), 2);
        assert!((a * &n).norm() < 1e-10);
        assert!(lstsq_full_rank(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]), &DVector::zeros(2)).is_none());
    }
}
