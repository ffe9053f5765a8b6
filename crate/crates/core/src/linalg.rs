//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: DMatrix<f64>,
}

impl SortedEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }
}

pub fn symmetric_eigen(m: &DMatrix<f64>) -> SortedEigen {
    let n = m.nrows();
    if n == 0 {
        return SortedEigen { values: Vec::new(), vectors: DMatrix::zeros(0, 0) };
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    SortedEigen { values, vectors }
}

/// Square root of a symmetric positive semidefinite matrix; negative
/// eigenvalues (round-off) are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = symmetric_eigen(m);
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (i, &lambda) in eig.values.iter().enumerate() {
        let v = eig.vectors.column(i);
        out += v * v.transpose() * lambda.max(0.0).sqrt();
    }
    out
}

/// Singular values, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * top).count()
}

/// Orthonormal basis (as columns) of the null space of `m`: the complement
/// of the row space spanned by right singular vectors with singular value
/// above `rel_tol · σ_max`.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    let mut projector = DMatrix::identity(n, n);
    if m.nrows() > 0 && n > 0 {
        let svd = m.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > rel_tol * top {
                let row = v_t.row(i).transpose();
                projector -= &row * row.transpose();
            }
        }
    }
    // the projector has eigenvalues 0 and 1 only
    let eig = symmetric_eigen(&projector);
    let cols: Vec<DVector<f64>> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.5)
        .map(|(i, _)| eig.vectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Minimum-norm least-squares solution of `m x = b` via the pseudo-inverse,
/// singular values below `rel_tol · σ_max` treated as zero.
pub fn pinv_solve(m: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (rel_tol * top).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_back() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let r = psd_sqrt(&a);
        assert!((&r * &r - &a).norm() < 1e-12);
        assert!((&r - r.transpose()).norm() < 1e-14);
    }

    #[test]
    fn sqrt_clamps_negative_noise() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-17]);
        let r = psd_sqrt(&a);
        assert!((r[(0, 0)] - 1.0).abs() < 1e-15);
        assert_eq!(r[(1, 1)], 0.0);
    }

    #[test]
    fn eigen_is_sorted_and_orthonormal() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let e = symmetric_eigen(&a);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let v = &e.vectors;
        assert!((v.transpose() * v - DMatrix::identity(3, 3)).norm() < 1e-12);
        assert!((e.min() - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn rank_and_null_space() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(numeric_rank(&m, 1e-10), 1);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).norm() < 1e-12);
        assert_eq!(numeric_rank(&DMatrix::zeros(2, 2), 1e-10), 0);
    }
}
