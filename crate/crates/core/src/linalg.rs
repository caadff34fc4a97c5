//! Dense complex matrices, density matrices and Bloch vectors for one- and
//! two-qubit objects.
//!
//! Dimensions are always 2 or 4, so everything is dense and value-semantic:
//! operations return new matrices and never mutate their inputs, which makes
//! every type here safe to share across threads.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

use crate::eigen;

/// Errors from constructing or converting linear-algebra domain types.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("unsupported dimension {0}: expected 2 or 4")]
    UnsupportedDim(usize),
    #[error("expected a {expected}x{expected} matrix, got {got}x{got}")]
    WrongDim { expected: usize, got: usize },
    #[error("state vector is not normalized: norm = {0}")]
    NotNormalized(f64),
    #[error("Bloch vector lies outside the unit ball: norm = {0}")]
    BlochOutsideBall(f64),
    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Build from row-major entries. Panics unless `dim` is 2 or 4 and
    /// `data.len() == dim * dim`.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Self {
        assert!(dim == 2 || dim == 4, "supported dimensions are 2 and 4");
        assert_eq!(data.len(), dim * dim, "entry count must equal dim^2");
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "supported dimensions are 2 and 4");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Build from real row-major entries.
    pub fn from_real(dim: usize, reals: &[f64]) -> Self {
        assert_eq!(reals.len(), dim * dim);
        Self {
            dim,
            data: reals.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Matrix product. Panics on dimension mismatch.
    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.dim, other.dim,
            "dimension mismatch in matrix multiplication"
        );
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn transpose(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn conj(&self) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch in addition");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch in subtraction");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim;
        let m = other.dim;
        let mut out = ComplexMatrix::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let aij = self.get(i, j);
                for k in 0..m {
                    for l in 0..m {
                        out.set(i * m + k, j * m + l, aij * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise absolute difference to `other` minimized over a
    /// global phase, i.e. `min_phi max_ij |self_ij - e^{i phi} other_ij|`.
    pub fn max_abs_diff_up_to_phase(&self, other: &ComplexMatrix) -> f64 {
        // Align the phase on the entry of `other` with the largest magnitude.
        let mut best = 0usize;
        let mut best_norm = 0.0;
        for (idx, z) in other.data.iter().enumerate() {
            if z.norm() > best_norm {
                best_norm = z.norm();
                best = idx;
            }
        }
        if best_norm < 1e-300 {
            return self.max_abs_diff(other);
        }
        let phase = self.data[best] / other.data[best];
        let phase = if phase.norm() < 1e-300 {
            Complex64::new(1.0, 0.0)
        } else {
            phase / phase.norm()
        };
        self.max_abs_diff(&other.scale(phase))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..=i {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let product = self.dagger().matmul(self);
        product.max_abs_diff(&ComplexMatrix::identity(self.dim)) <= tol
    }

    /// Determinant via cofactor expansion; dimensions here are at most 4.
    pub fn det(&self) -> Complex64 {
        fn det_rec(data: &[Complex64], n: usize) -> Complex64 {
            if n == 1 {
                return data[0];
            }
            if n == 2 {
                return data[0] * data[3] - data[1] * data[2];
            }
            let mut acc = Complex64::new(0.0, 0.0);
            let mut minor = vec![Complex64::new(0.0, 0.0); (n - 1) * (n - 1)];
            for col in 0..n {
                let mut idx = 0;
                for i in 1..n {
                    for j in 0..n {
                        if j == col {
                            continue;
                        }
                        minor[idx] = data[i * n + j];
                        idx += 1;
                    }
                }
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                acc += data[col] * det_rec(&minor, n - 1) * Complex64::new(sign, 0.0);
            }
            acc
        }
        det_rec(&self.data, self.dim)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, other: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(other)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, other: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::add(self, other)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, other: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::sub(self, other)
    }
}

/// Bloch vector `(x, y, z) = (<X>, <Y>, <Z>)` of a single-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
///
/// The validated constructors (`new`, `from_statevector`, `from_bloch`)
/// enforce the invariants. Hot-path evolution inside the simulator uses
/// `from_matrix_unchecked` because unitaries and trace-preserving Kraus
/// maps preserve them exactly; property tests re-check pipeline outputs
/// through [`DensityMatrix::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validated constructor: trace 1 within 1e-12, Hermitian within 1e-12,
    /// eigenvalues >= -1e-10.
    pub fn new(mat: ComplexMatrix) -> Result<Self, LinalgError> {
        let rho = Self { mat };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(mat: ComplexMatrix) -> Self {
        Self { mat }
    }

    /// Check the density-matrix invariants at the stated tolerances.
    pub fn validate(&self) -> Result<(), LinalgError> {
        let tr = self.mat.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(LinalgError::InvalidDensity(format!(
                "trace = {tr} is not 1"
            )));
        }
        if !self.mat.is_hermitian(1e-12) {
            return Err(LinalgError::InvalidDensity("not Hermitian".into()));
        }
        let min_eig = eigen::hermitian_eigenvalues(&self.mat)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(LinalgError::InvalidDensity(format!(
                "negative eigenvalue {min_eig}"
            )));
        }
        Ok(())
    }

    /// `|psi><psi|` from a normalized 2- or 4-component state vector.
    pub fn from_statevector(psi: &[Complex64]) -> Result<Self, LinalgError> {
        let dim = psi.len();
        if dim != 2 && dim != 4 {
            return Err(LinalgError::UnsupportedDim(dim));
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(LinalgError::NotNormalized(norm));
        }
        let mut mat = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                mat.set(i, j, psi[i] * psi[j].conj());
            }
        }
        Ok(Self { mat })
    }

    /// `(I + r · sigma) / 2` from a Bloch vector with norm <= 1.
    pub fn from_bloch(r: BlochVector) -> Result<Self, LinalgError> {
        let n = r.norm();
        if n > 1.0 + 1e-10 {
            return Err(LinalgError::BlochOutsideBall(n));
        }
        let mat = ComplexMatrix::new(
            2,
            vec![
                Complex64::new((1.0 + r.z) / 2.0, 0.0),
                Complex64::new(r.x / 2.0, -r.y / 2.0),
                Complex64::new(r.x / 2.0, r.y / 2.0),
                Complex64::new((1.0 - r.z) / 2.0, 0.0),
            ],
        );
        Ok(Self { mat })
    }

    /// Bloch vector `(tr rho X, tr rho Y, tr rho Z)` of a single-qubit state.
    pub fn bloch(&self) -> Result<BlochVector, LinalgError> {
        if self.mat.dim() != 2 {
            return Err(LinalgError::WrongDim {
                expected: 2,
                got: self.mat.dim(),
            });
        }
        let x = 2.0 * self.mat.get(0, 1).re;
        let y = -2.0 * self.mat.get(0, 1).im;
        let z = self.mat.get(0, 0).re - self.mat.get(1, 1).re;
        Ok(BlochVector::new(x, y, z))
    }

    /// Reduced state of qubit 0, tracing out the ancilla (qubit 1).
    pub fn trace_out_ancilla(&self) -> Result<DensityMatrix, LinalgError> {
        if self.mat.dim() != 4 {
            return Err(LinalgError::WrongDim {
                expected: 4,
                got: self.mat.dim(),
            });
        }
        let mut out = ComplexMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    s += self.mat.get(2 * i + k, 2 * j + k);
                }
                out.set(i, j, s);
            }
        }
        Ok(Self { mat: out })
    }

    /// Conjugate by a unitary: `U rho U^dagger`.
    pub fn evolve(&self, u: &ComplexMatrix) -> DensityMatrix {
        Self {
            mat: u.matmul(&self.mat).matmul(&u.dagger()),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// Purity `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.mat.matmul(&self.mat).trace().re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{haar_u4, pauli_x, pauli_y, pauli_z, RngStream};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hadamard() -> ComplexMatrix {
        let s = 1.0 / 2.0_f64.sqrt();
        ComplexMatrix::from_real(2, &[s, s, s, -s])
    }

    #[test]
    fn matmul_identity_cases() {
        let i = ComplexMatrix::identity(2);
        assert!(i.matmul(&i).max_abs_diff(&i) < 1e-15);
        let x = pauli_x();
        assert!(x.matmul(&x).max_abs_diff(&i) < 1e-15);
    }

    #[test]
    fn hxh_equals_z() {
        let h = hadamard();
        let hxh = h.matmul(&pauli_x()).matmul(&h);
        assert!(hxh.max_abs_diff(&pauli_z()) < 1e-14);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn matmul_dimension_mismatch_panics() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(4);
        let _ = a.matmul(&b);
    }

    #[test]
    fn dagger_of_phase_gate() {
        let s = ComplexMatrix::new(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        let sd = s.dagger();
        assert_eq!(sd.get(1, 1), c(0.0, -1.0));
        assert!(ComplexMatrix::identity(2).dagger().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn dagger_inverts_haar_unitaries() {
        let mut rng = RngStream::new(42);
        for _ in 0..100 {
            let u = haar_u4(&mut rng);
            let prod = u.dagger().matmul(&u);
            assert!(prod.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
        }
    }

    #[test]
    fn density_from_basis_and_superposition_states() {
        let zero = DensityMatrix::from_statevector(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(zero.matrix().get(0, 0), c(1.0, 0.0));
        assert_eq!(zero.matrix().get(1, 1), c(0.0, 0.0));

        let s = 1.0 / 2.0_f64.sqrt();
        let x = DensityMatrix::from_statevector(&[c(s, 0.0), c(s, 0.0)]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((x.matrix().get(i, j) - c(0.5, 0.0)).norm() < 1e-15);
            }
        }

        let y = DensityMatrix::from_statevector(&[c(s, 0.0), c(0.0, s)]).unwrap();
        assert!((y.matrix().get(0, 1) - c(0.0, -0.5)).norm() < 1e-15);
        assert!((y.matrix().get(1, 0) - c(0.0, 0.5)).norm() < 1e-15);
        assert!((y.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_rejects_unnormalized_statevector() {
        let err = DensityMatrix::from_statevector(&[c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(err, Err(LinalgError::NotNormalized(_))));
    }

    #[test]
    fn bloch_of_named_states() {
        let zero = DensityMatrix::from_statevector(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = zero.bloch().unwrap();
        assert!((r.x, r.y, r.z) == (0.0, 0.0, 1.0));

        let mixed = DensityMatrix::new(ComplexMatrix::from_real(2, &[0.5, 0.0, 0.0, 0.5])).unwrap();
        assert!(mixed.bloch().unwrap().norm() < 1e-15);

        let s = 1.0 / 2.0_f64.sqrt();
        let y = DensityMatrix::from_statevector(&[c(s, 0.0), c(0.0, s)]).unwrap();
        let ry = y.bloch().unwrap();
        assert!((ry.x.abs() < 1e-14) && ((ry.y - 1.0).abs() < 1e-14) && (ry.z.abs() < 1e-14));
    }

    #[test]
    fn bloch_rejects_two_qubit_state() {
        let rho4 = DensityMatrix::from_statevector(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert!(rho4.bloch().is_err());
    }

    #[test]
    fn from_bloch_rejects_outside_ball() {
        assert!(matches!(
            DensityMatrix::from_bloch(BlochVector::new(1.2, 0.0, 0.0)),
            Err(LinalgError::BlochOutsideBall(_))
        ));
    }

    #[test]
    fn partial_trace_cases() {
        // Product state |00>.
        let rho = DensityMatrix::from_statevector(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let reduced = rho.trace_out_ancilla().unwrap();
        assert!((reduced.matrix().get(0, 0) - c(1.0, 0.0)).norm() < 1e-15);

        // Bell state: maximally mixed marginal.
        let s = 1.0 / 2.0_f64.sqrt();
        let bell = DensityMatrix::from_statevector(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)])
            .unwrap();
        let reduced = bell.trace_out_ancilla().unwrap();
        assert!(reduced.matrix().max_abs_diff(&ComplexMatrix::from_real(2, &[0.5, 0.0, 0.0, 0.5])) < 1e-14);

        // |x> ⊗ |1> reduces to |x>.
        let x01 = DensityMatrix::from_statevector(&[c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0), c(s, 0.0)])
            .unwrap();
        let reduced = x01.trace_out_ancilla().unwrap();
        let expect = DensityMatrix::from_statevector(&[c(s, 0.0), c(s, 0.0)]).unwrap();
        assert!(reduced.matrix().max_abs_diff(expect.matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_is_linear_and_trace_preserving() {
        let mut rng = RngStream::new(7);
        for _ in 0..50 {
            // Random Hermitian via H = A + A^dagger from a Haar unitary seed.
            let u = haar_u4(&mut rng);
            let h = u.add(&u.dagger()).scale(c(0.5, 0.0));
            let rho_like = DensityMatrix::from_matrix_unchecked(h.clone());
            let reduced = rho_like.trace_out_ancilla().unwrap();
            assert!((reduced.matrix().trace() - h.trace()).norm() < 1e-12);

            let scaled = DensityMatrix::from_matrix_unchecked(h.scale(c(2.0, 0.0)));
            let reduced2 = scaled.trace_out_ancilla().unwrap();
            assert!(reduced2
                .matrix()
                .max_abs_diff(&reduced.matrix().scale(c(2.0, 0.0)))
                < 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "supported dimensions")]
    fn rejects_unsupported_dimension() {
        let _ = ComplexMatrix::zeros(3);
    }

    #[test]
    fn partial_trace_rejects_single_qubit_state() {
        let rho = DensityMatrix::from_statevector(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(
            rho.trace_out_ancilla(),
            Err(LinalgError::WrongDim { expected: 4, .. })
        ));
    }

    #[test]
    fn pauli_y_trace_identities() {
        let y = pauli_y();
        assert!(y.is_hermitian(0.0));
        assert!(y.is_unitary(1e-15));
        assert!((y.det() + c(1.0, 0.0)).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn bloch_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let mut r = BlochVector::new(x, y, z);
            let n = r.norm();
            if n > 1.0 {
                r = BlochVector::new(x / n, y / n, z / n);
            }
            let rho = DensityMatrix::from_bloch(r).unwrap();
            let back = rho.bloch().unwrap();
            prop_assert!((back.x - r.x).abs() < 1e-12);
            prop_assert!((back.y - r.y).abs() < 1e-12);
            prop_assert!((back.z - r.z).abs() < 1e-12);
        }
    }

    #[test]
    fn bloch_round_trip_dense_sampling() {
        let mut rng = RngStream::new(3);
        for _ in 0..1000 {
            let v = [rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)];
            let mut r = BlochVector::new(v[0], v[1], v[2]);
            if r.norm() > 1.0 {
                let n = r.norm();
                r = BlochVector::new(r.x / n, r.y / n, r.z / n);
            }
            let back = DensityMatrix::from_bloch(r).unwrap().bloch().unwrap();
            assert!((back.x - r.x).abs() < 1e-12);
            assert!((back.y - r.y).abs() < 1e-12);
            assert!((back.z - r.z).abs() < 1e-12);
        }
    }
}
