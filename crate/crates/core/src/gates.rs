//! Standard gate library, embedding into the two-qubit space, and
//! Haar-distributed random unitary sampling.
//!
//! Rotation gates follow `R_sigma(theta) = exp(-i theta sigma / 2)`. The
//! tensor ordering is the crate-wide convention: qubit 0 is the left
//! factor, so `embed_single_qubit(u, 0) = u ⊗ I` and
//! `embed_single_qubit(u, 1) = I ⊗ u`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::linalg::ComplexMatrix;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn hadamard() -> ComplexMatrix {
    let s = 1.0 / 2.0_f64.sqrt();
    ComplexMatrix::from_real(2, &[s, s, s, -s])
}

pub fn rx(theta: f64) -> ComplexMatrix {
    let (cos, sin) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    ComplexMatrix::new(2, vec![c(cos, 0.0), c(0.0, -sin), c(0.0, -sin), c(cos, 0.0)])
}

pub fn ry(theta: f64) -> ComplexMatrix {
    let (cos, sin) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    ComplexMatrix::new(2, vec![c(cos, 0.0), c(-sin, 0.0), c(sin, 0.0), c(cos, 0.0)])
}

pub fn rz(theta: f64) -> ComplexMatrix {
    ComplexMatrix::new(
        2,
        vec![
            Complex64::from_polar(1.0, -theta / 2.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            Complex64::from_polar(1.0, theta / 2.0),
        ],
    )
}

/// CNOT on the two-qubit space for any control/target assignment in {0, 1}.
pub fn cnot_matrix(control: usize, target: usize) -> ComplexMatrix {
    assert!(control < 2 && target < 2 && control != target, "invalid CNOT wiring");
    let mut m = ComplexMatrix::zeros(4);
    for q0 in 0..2usize {
        for q1 in 0..2usize {
            let bits = [q0, q1];
            let mut out = bits;
            if bits[control] == 1 {
                out[target] ^= 1;
            }
            m.set(2 * out[0] + out[1], 2 * bits[0] + bits[1], c(1.0, 0.0));
        }
    }
    m
}

/// Embed a single-qubit unitary into the two-qubit space.
///
/// Panics if `qubit` is not 0 or 1.
pub fn embed_single_qubit(u: &ComplexMatrix, qubit: usize) -> ComplexMatrix {
    assert_eq!(u.dim(), 2, "expected a single-qubit matrix");
    match qubit {
        0 => u.kron(&ComplexMatrix::identity(2)),
        1 => ComplexMatrix::identity(2).kron(u),
        _ => panic!("qubit index {qubit} out of range for a two-qubit system"),
    }
}

/// A gate acting on qubits {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    H { qubit: usize },
    X { qubit: usize },
    Cnot { control: usize, target: usize },
    Unitary1q { qubit: usize, matrix: ComplexMatrix },
    Unitary2q { matrix: ComplexMatrix },
}

/// Which qubits a gate touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Single(usize),
    Both,
}

impl Gate {
    /// The gate's own matrix: 2x2 for single-qubit kinds, 4x4 otherwise.
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            Gate::Rx { angle, .. } => rx(*angle),
            Gate::Ry { angle, .. } => ry(*angle),
            Gate::Rz { angle, .. } => rz(*angle),
            Gate::H { .. } => hadamard(),
            Gate::X { .. } => pauli_x(),
            Gate::Cnot { control, target } => cnot_matrix(*control, *target),
            Gate::Unitary1q { matrix, .. } => matrix.clone(),
            Gate::Unitary2q { matrix } => matrix.clone(),
        }
    }

    /// The gate embedded into the full two-qubit space.
    pub fn embedded(&self) -> ComplexMatrix {
        match self.support() {
            Support::Single(q) => embed_single_qubit(&self.matrix(), q),
            Support::Both => self.matrix(),
        }
    }

    pub fn support(&self) -> Support {
        match self {
            Gate::Rx { qubit, .. }
            | Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. }
            | Gate::H { qubit }
            | Gate::X { qubit }
            | Gate::Unitary1q { qubit, .. } => Support::Single(*qubit),
            Gate::Cnot { .. } | Gate::Unitary2q { .. } => Support::Both,
        }
    }

    pub fn is_cnot(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }
}

/// A gate together with its wall-clock duration, used by the relaxation
/// noise channel.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub gate: Gate,
    pub duration: f64,
}

/// Gate durations in seconds used when stamping circuits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateTimes {
    pub single: f64,
    pub cnot: f64,
}

impl Default for GateTimes {
    /// Typical transmon magnitudes: 35 ns single-qubit, 300 ns CNOT.
    fn default() -> Self {
        Self {
            single: 35e-9,
            cnot: 300e-9,
        }
    }
}

impl GateTimes {
    pub fn stamp(&self, gate: Gate) -> GateOp {
        let duration = match gate.support() {
            Support::Single(_) => self.single,
            Support::Both => self.cnot,
        };
        GateOp { gate, duration }
    }
}

/// Seeded, splittable random stream.
///
/// Identical seeds produce bit-identical sample sequences. Child streams
/// derived through [`RngStream::child`] are statistically independent,
/// which lets repetitions and experiments run concurrently while staying
/// reproducible.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream for repetition / experiment `index`.
    pub fn child(&self, index: u64) -> Self {
        // SplitMix64 finalizer over the (stream, index) pair keeps distinct
        // paths on distinct ChaCha streams.
        let mut h = self
            .stream
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(index)
            .wrapping_add(1);
        h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
        Self::with_stream(self.seed, h)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn gen_bool(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn binomial(&mut self, n: u64, p: f64) -> u64 {
        Binomial::new(n, p.clamp(0.0, 1.0))
            .expect("valid binomial parameters")
            .sample(&mut self.rng)
    }
}

/// Haar-random unitary on U(n) via a complex Ginibre matrix followed by
/// Gram-Schmidt orthonormalization with the triangular factor's diagonal
/// phases normalized. Euler-angle parameterizations are easy to get wrong
/// measure-wise; this route is uniform by construction.
fn haar_unitary(n: usize, rng: &mut RngStream) -> ComplexMatrix {
    // Ginibre matrix, columns as candidate basis vectors.
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| c(rng.standard_normal(), rng.standard_normal()))
                .collect()
        })
        .collect();

    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = cols[j].clone();
        // Two rounds of modified Gram-Schmidt for orthogonality at machine
        // precision.
        for _ in 0..2 {
            for u in &q {
                let proj: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u.iter()) {
                    *vi -= proj * ui;
                }
            }
        }
        // r_jj before normalization: projection of the original column on v.
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= norm;
        }
        let r_jj: Complex64 = v.iter().zip(cols[j].iter()).map(|(a, b)| a.conj() * b).sum();
        let phase = r_jj / r_jj.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
        cols[j].clone_from(&v);
        q.push(v);
    }

    let mut m = ComplexMatrix::zeros(n);
    for (j, col) in q.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            m.set(i, j, *z);
        }
    }
    m
}

/// Haar-random 2x2 unitary.
pub fn haar_su2(rng: &mut RngStream) -> ComplexMatrix {
    haar_unitary(2, rng)
}

/// Haar-random 4x4 unitary on U(4).
pub fn haar_u4(rng: &mut RngStream) -> ComplexMatrix {
    haar_unitary(4, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DensityMatrix;
    use std::f64::consts::PI;

    #[test]
    fn rz_zero_is_identity() {
        assert!(rz(0.0).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn ry_pi_flips_zero_to_one() {
        let u = ry(PI);
        // |0> -> |1> up to global phase.
        let col0 = [u.get(0, 0), u.get(1, 0)];
        assert!(col0[0].norm() < 1e-15);
        assert!((col0[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cnot_squares_to_identity() {
        let cx = cnot_matrix(0, 1);
        assert!(cx.matmul(&cx).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let cx10 = cnot_matrix(1, 0);
        assert!(cx10.matmul(&cx10).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn all_gate_matrices_unitary() {
        let gates = vec![
            Gate::Rx { qubit: 0, angle: 0.3 },
            Gate::Ry { qubit: 1, angle: -1.1 },
            Gate::Rz { qubit: 0, angle: 2.7 },
            Gate::H { qubit: 0 },
            Gate::X { qubit: 1 },
            Gate::Cnot { control: 0, target: 1 },
        ];
        for g in gates {
            assert!(g.matrix().is_unitary(1e-12), "{g:?} not unitary");
            assert!(g.embedded().is_unitary(1e-12));
        }
    }

    #[test]
    fn rotation_periodicity() {
        for theta in [0.0, 0.4, 1.9, -2.5] {
            assert!(rx(theta + 4.0 * PI).max_abs_diff(&rx(theta)) < 1e-10);
            assert!(ry(theta + 4.0 * PI).max_abs_diff(&ry(theta)) < 1e-10);
            assert!(rz(theta + 4.0 * PI).max_abs_diff(&rz(theta)) < 1e-10);
        }
    }

    #[test]
    fn embed_identity_and_basis_action() {
        let i4 = embed_single_qubit(&ComplexMatrix::identity(2), 0);
        assert!(i4.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);

        // X on qubit 0 maps |00> to |10> (index 0 -> index 2).
        let x0 = embed_single_qubit(&pauli_x(), 0);
        assert!((x0.get(2, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn embed_rejects_bad_qubit() {
        let _ = embed_single_qubit(&pauli_x(), 2);
    }

    #[test]
    fn disjoint_embeddings_commute() {
        let mut rng = RngStream::new(5);
        for _ in 0..50 {
            let a = haar_su2(&mut rng);
            let b = haar_su2(&mut rng);
            let ab = embed_single_qubit(&a, 0).matmul(&embed_single_qubit(&b, 1));
            let ba = embed_single_qubit(&b, 1).matmul(&embed_single_qubit(&a, 0));
            assert!(ab.max_abs_diff(&ba) < 1e-13);
        }
    }

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = RngStream::new(1);
        for _ in 0..200 {
            assert!(haar_su2(&mut rng).is_unitary(1e-12));
            assert!(haar_u4(&mut rng).is_unitary(1e-11));
        }
    }

    #[test]
    fn haar_su2_moment_and_isotropy() {
        let mut rng = RngStream::new(12);
        let n = 100_000;
        let mut moment = 0.0;
        let mut mean = [0.0f64; 3];
        for _ in 0..n {
            let u = haar_su2(&mut rng);
            moment += u.get(0, 0).norm_sqr();
            let psi = [u.get(0, 0), u.get(1, 0)];
            let rho = DensityMatrix::from_statevector(&psi).unwrap();
            let r = rho.bloch().unwrap();
            mean[0] += r.x;
            mean[1] += r.y;
            mean[2] += r.z;
        }
        moment /= n as f64;
        assert!(
            (moment - 0.5).abs() < 0.01,
            "E|u00|^2 = {moment}, expected 1/2"
        );
        for m in mean {
            assert!((m / n as f64).abs() < 0.01);
        }
    }

    #[test]
    fn haar_u4_spectrum_on_unit_circle() {
        // Unitarity implies |lambda| = 1; check via |det| = 1 and column norms.
        let mut rng = RngStream::new(9);
        for _ in 0..20 {
            let u = haar_u4(&mut rng);
            assert!((u.det().norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn haar_invariance_smoke() {
        // Mean |entry|^2 statistics of V * U match those of U within 3
        // standard errors for a fixed unitary V.
        let n = 20_000;
        let mut rng1 = RngStream::new(77);
        let mut rng2 = RngStream::new(78);
        let v = haar_u4(&mut RngStream::new(123456));
        let mut m1 = [[0.0f64; 4]; 4];
        let mut m2 = [[0.0f64; 4]; 4];
        for _ in 0..n {
            let u1 = haar_u4(&mut rng1);
            let u2 = v.matmul(&haar_u4(&mut rng2));
            for i in 0..4 {
                for j in 0..4 {
                    m1[i][j] += u1.get(i, j).norm_sqr();
                    m2[i][j] += u2.get(i, j).norm_sqr();
                }
            }
        }
        // var(|u|^2) = 3/80 for Haar U(4) entries.
        let se = (2.0 * 3.0 / 80.0 / n as f64).sqrt();
        for i in 0..4 {
            for j in 0..4 {
                let diff = (m1[i][j] - m2[i][j]) / n as f64;
                assert!(diff.abs() < 3.0 * se, "entry ({i},{j}) diff {diff}");
            }
        }
    }

    #[test]
    fn seeded_determinism() {
        let mut a = RngStream::new(99);
        let mut b = RngStream::new(99);
        for _ in 0..10 {
            assert_eq!(haar_u4(&mut a), haar_u4(&mut b));
        }
        // Child streams differ from the parent and from each other.
        let mut c0 = RngStream::new(99).child(0);
        let mut c1 = RngStream::new(99).child(1);
        assert_ne!(haar_u4(&mut c0), haar_u4(&mut c1));
        // But are themselves reproducible.
        let mut c0b = RngStream::new(99).child(0);
        let mut c0c = RngStream::new(99).child(0);
        assert_eq!(haar_u4(&mut c0b), haar_u4(&mut c0c));
    }
}
