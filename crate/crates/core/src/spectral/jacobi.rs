//! Cyclic Jacobi eigendecomposition for small symmetric matrices.
//!
//! Graphs here stay small (a few dozen tracks per frame), where plane
//! rotations are robust and dependency-free. Output is deterministic:
//! eigenvalues ascend and each eigenvector's largest-magnitude component
//! (ties broken by lowest index) is made positive.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigendecomposition of a symmetric matrix: ascending eigenvalues and
/// the orthonormal eigenvector matrix, column `i` paired with value `i`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Diagonalizes a symmetric matrix by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below 1e-12
/// relative to the matrix norm; fails after 100 sweeps.
pub fn eig_sym(matrix: &DMatrix<f64>) -> Result<Spectrum> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "eig_sym requires a square matrix");
    assert!(n >= 1, "eig_sym requires a non-empty matrix");

    let mut a = matrix.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let norm = matrix.norm();
    let tol = OFF_DIAGONAL_TOL * norm;

    for sweep in 0..=MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            return Ok(finalize(a, v));
        }
        if sweep == MAX_SWEEPS {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    let new_ip = aip - s * (aiq + tau * aip);
                    let new_iq = aiq + s * (aip - tau * aiq);
                    a[(i, p)] = new_ip;
                    a[(p, i)] = new_ip;
                    a[(i, q)] = new_iq;
                    a[(q, i)] = new_iq;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip - s * (viq + tau * vip);
                    v[(i, q)] = viq + s * (vip - tau * viq);
                }
            }
        }
    }

    Err(Error::Eigensolver(format!(
        "no convergence after {MAX_SWEEPS} sweeps (n = {n}, off-diagonal norm {:.3e}, matrix norm {:.3e})",
        off_diagonal_norm(&a),
        norm
    )))
}

fn finalize(a: DMatrix<f64>, v: DMatrix<f64>) -> Spectrum {
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).expect("finite eigenvalues"));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(a[(src, src)]);
        let mut column = v.column(src).clone_owned();
        let mut pivot = 0;
        for i in 1..n {
            if column[i].abs() > column[pivot].abs() {
                pivot = i;
            }
        }
        if column[pivot] < 0.0 {
            column.neg_mut();
        }
        eigenvectors.set_column(dst, &column);
    }
    Spectrum { eigenvalues, eigenvectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_node_laplacian_spectrum() {
        let l = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let spectrum = eig_sym(&l).unwrap();
        assert!(spectrum.eigenvalues[0].abs() < 1e-12);
        assert!((spectrum.eigenvalues[1] - 2.0).abs() < 1e-12);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert!((spectrum.eigenvectors[(0, 0)] - inv_sqrt2).abs() < 1e-12);
        assert!((spectrum.eigenvectors[(1, 0)] - inv_sqrt2).abs() < 1e-12);
    }

    #[test]
    fn diagonal_matrix_yields_sorted_diagonal() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0, 0.5]));
        let spectrum = eig_sym(&d).unwrap();
        assert_eq!(spectrum.eigenvalues, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn single_entry_matrix() {
        let m = DMatrix::from_row_slice(1, 1, &[0.0]);
        let spectrum = eig_sym(&m).unwrap();
        assert_eq!(spectrum.eigenvalues, vec![0.0]);
        assert_eq!(spectrum.eigenvectors[(0, 0)], 1.0);
    }

    #[test]
    fn random_symmetric_matrix_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 8;
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v: f64 = rng.random_range(-5.0..5.0);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            let spectrum = eig_sym(&m).unwrap();

            // Reconstruction oracle: V * diag(L) * V^T must reproduce M.
            let v = &spectrum.eigenvectors;
            let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
                spectrum.eigenvalues.clone(),
            ));
            let reconstructed = v * lambda * v.transpose();
            assert!(
                (&reconstructed - &m).norm() <= 1e-8 * m.norm().max(1.0),
                "reconstruction residual {}",
                (&reconstructed - &m).norm()
            );

            // Columns orthonormal.
            let gram = v.transpose() * v;
            assert!((&gram - DMatrix::<f64>::identity(n, n)).norm() < 1e-8);

            // Ascending order and eigen residuals.
            for w in spectrum.eigenvalues.windows(2) {
                assert!(w[0] <= w[1]);
            }
            for (i, &lam) in spectrum.eigenvalues.iter().enumerate() {
                let col = v.column(i);
                let residual = (&m * col - lam * col).norm();
                assert!(residual <= 1e-8 * m.norm().max(1.0), "residual {residual}");
            }
        }
    }

    #[test]
    fn converges_at_the_largest_expected_graph_size() {
        // Frames carry at most a few dozen tracks; a dense 50-node
        // Laplacian-like matrix must converge well inside the sweep cap.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 50;
        let mut w = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v: f64 = rng.random_range(0.0..1.0);
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
        let mut l = -w.clone();
        for i in 0..n {
            l[(i, i)] = w.row(i).sum();
        }
        let spectrum = eig_sym(&l).unwrap();
        assert!(spectrum.eigenvalues[0].abs() < 1e-8);
        let v = &spectrum.eigenvectors;
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            spectrum.eigenvalues.clone(),
        ));
        let residual = (v * lambda * v.transpose() - &l).norm();
        assert!(residual <= 1e-8 * l.norm(), "residual {residual}");
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let a = eig_sym(&m).unwrap();
        let b = eig_sym(&m).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
        for j in 0..3 {
            let col = a.eigenvectors.column(j);
            let mut pivot = 0;
            for i in 1..3 {
                if col[i].abs() > col[pivot].abs() {
                    pivot = i;
                }
            }
            assert!(col[pivot] > 0.0, "pivot component of column {j} must be positive");
        }
    }
}
