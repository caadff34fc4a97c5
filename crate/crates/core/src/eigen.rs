//! Jacobi eigensolver for small real symmetric matrices.
//!
//! All matrices in this crate are at most 8x8 (complex 4x4 Hermitian
//! matrices embedded as real symmetric ones), where cyclic Jacobi is both
//! simple and accurate to machine precision, and — unlike iterative
//! QR-based solvers — fully deterministic across runs.

use num_complex::Complex64;

use crate::linalg::ComplexMatrix;

/// Eigendecomposition of a real symmetric matrix `a` (row-major, `n` x `n`).
///
/// Returns `(eigenvalues, q)` with eigenvalues sorted in descending order
/// and `q` row-major with eigenvector `j` in column `j`, so that
/// `a = q * diag(eigenvalues) * q^T`.
pub(crate) fn jacobi_eigh(a_in: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a_in.len(), n * n, "matrix data length must be n*n");
    let mut a = a_in.to_vec();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }

    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let tol = 1e-15 * scale;

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for r in (p + 1)..n {
                off += a[p * n + r] * a[p * n + r];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n - 1 {
            for r in (p + 1)..n {
                let apr = a[p * n + r];
                if apr.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let arr = a[r * n + r];
                // Stable computation of tan(theta) for the Jacobi rotation.
                let tau = (arr - app) / (2.0 * apr);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akr = a[k * n + r];
                    a[k * n + p] = c * akp - s * akr;
                    a[k * n + r] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let ark = a[r * n + k];
                    a[p * n + k] = c * apk - s * ark;
                    a[r * n + k] = s * apk + c * ark;
                }
                for k in 0..n {
                    let qkp = q[k * n + p];
                    let qkr = q[k * n + r];
                    q[k * n + p] = c * qkp - s * qkr;
                    q[k * n + r] = s * qkp + c * qkr;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .expect("eigenvalues must not be NaN")
            .then(i.cmp(&j))
    });

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut q_sorted = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            q_sorted[i * n + new_col] = q[i * n + old_col];
        }
    }
    (eigenvalues, q_sorted)
}

/// Eigenvalues of a complex Hermitian matrix, descending.
///
/// Uses the real-symmetric embedding `H = A + iB -> [[A, -B], [B, A]]`,
/// whose spectrum is that of `H` with every eigenvalue doubled.
pub(crate) fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.dim();
    let m = 2 * n;
    let mut e = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z: Complex64 = h.get(i, j);
            e[i * m + j] = z.re;
            e[i * m + (j + n)] = -z.im;
            e[(i + n) * m + j] = z.im;
            e[(i + n) * m + (j + n)] = z.re;
        }
    }
    let (vals, _) = jacobi_eigh(&e, m);
    // Doubled spectrum: keep one representative of each pair.
    vals.into_iter().step_by(2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn diagonalizes_symmetric_3x3() {
        let a = [4.0, 1.0, -2.0, 1.0, 2.0, 0.0, -2.0, 0.0, 3.0];
        let (vals, q) = jacobi_eigh(&a, 3);
        // Reconstruct and compare.
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += q[i * 3 + k] * vals[k] * q[j * 3 + k];
                }
                assert!((s - a[i * 3 + j]).abs() < 1e-12);
            }
        }
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
    }

    #[test]
    fn orthogonal_eigenvectors() {
        let a = [2.0, 1.0, 1.0, 2.0];
        let (_, q) = jacobi_eigh(&a, 2);
        let dot = q[0] * q[1] + q[2] * q[3];
        assert!(dot.abs() < 1e-14);
    }

    #[test]
    fn hermitian_eigenvalues_of_pauli_y() {
        let y = ComplexMatrix::new(
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let vals = hermitian_eigenvalues(&y);
        assert!((vals[0] - 1.0).abs() < 1e-13);
        assert!((vals[1] + 1.0).abs() < 1e-13);
    }
}
