use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const SYM_TOL: f64 = 1e-9;

/// Classical (Torgerson) multidimensional scaling.
///
/// Returns `n` rows of `dim` coordinates. Axes whose eigenvalue is not
/// positive carry zeros.
pub fn classical_mds(dist: &[Vec<f64>], dim: usize) -> Result<Vec<Vec<f64>>> {
    let n = dist.len();
    if n == 0 {
        return Err(Error::EmptyInput("distance matrix"));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("embedding dimension must be positive"));
    }
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::LengthMismatch { left: n as u64, right: row.len() as u64 });
        }
        for (j, &d) in row.iter().enumerate() {
            if !d.is_finite() || d < 0.0 || (d - dist[j][i]).abs() > SYM_TOL || (i == j && d.abs() > SYM_TOL) {
                return Err(Error::NotSymmetric);
            }
        }
    }

    let sq = DMatrix::from_fn(n, n, |i, j| dist[i][j] * dist[i][j]);
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    // B = -1/2 J D^2 J with J the centering matrix.
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + grand));

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]));

    let mut out = vec![vec![0.0; dim]; n];
    for (axis, &e) in order.iter().take(dim).enumerate() {
        let lambda = eig.eigenvalues[e];
        if lambda <= 0.0 {
            continue;
        }
        let s = libm::sqrt(lambda);
        for (i, row) in out.iter_mut().enumerate() {
            row[axis] = eig.eigenvectors[(i, e)] * s;
        }
    }
    Ok(out)
}
