//! Dense symmetric eigendecomposition for the small category-space
//! covariance matrices used by PCA.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Upper bound on cyclic Jacobi sweeps; convergence is quadratic and a
/// 200 x 200 matrix settles in well under 20.
pub const MAX_SWEEPS: usize = 100;

/// Relative off-diagonal Frobenius norm at which rotation stops.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-15;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `m * v` for a square row-major matrix.
pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Eigenvalues (descending) and unit eigenvectors of a symmetric matrix, by
/// cyclic Jacobi rotation. `vectors[i]` belongs to `values[i]`.
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("matrix is not square".into()));
    }
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    for p in 0..n {
        for q in p + 1..n {
            if (a[p][q] - a[q][p]).abs() > 1e-12 * (a[p][q].abs() + a[q][p].abs()).max(1e-300) {
                return Err(Error::DimensionMismatch("matrix is not symmetric".into()));
            }
        }
    }
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            row
        })
        .collect();
    let frob: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off == 0.0 || off <= OFF_DIAGONAL_TOLERANCE * OFF_DIAGONAL_TOLERANCE * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = {
                    let t = 1.0 / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    if theta < 0.0 { -t } else { t }
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
                for row in v.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| v.iter().map(|row| row[i]).collect())
        .collect();
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let (vals, vecs) = symmetric_eigen(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(vals, vec![3.0, 1.0]);
        assert_eq!(vecs[0], vec![0.0, 1.0]);
    }

    #[test]
    fn two_by_two() {
        let m = [vec![2.0, 1.0], vec![1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        for (l, v) in vals.iter().zip(&vecs) {
            let mv = mat_vec(&m, v);
            assert!(mv.iter().zip(v).all(|(a, b)| (a - l * b).abs() < 1e-14));
            assert!((norm(v) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(symmetric_eigen(&[vec![1.0, 2.0]]).is_err());
        assert!(symmetric_eigen(&[vec![1.0, 2.0], vec![0.0, 1.0]]).is_err());
        assert_eq!(symmetric_eigen(&[]).unwrap().0.len(), 0);
    }
}
