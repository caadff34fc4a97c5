//! Single-qubit process tomography of the qubit-0 channel.
//!
//! Four input states (|0>, |1>, |x>, |y>, with the ancilla in |0>) are
//! each measured along the three coordinate axes — 12 experiments — to
//! reconstruct the affine Bloch map `r -> M r + c` by linear inversion.
//! Channel quality is summarized by per-state fidelities and by the
//! geometry of the image ellipsoid (semi-axes, principal axes, and tilt of
//! the major axis away from z).

use num_complex::Complex64;

use crate::channels::{measure_polarization, simulate, Circuit, MeasureMode, MeasurementAxis};
use crate::linalg::{BlochVector, DensityMatrix};
use crate::noise::{apply_kraus, KrausSet, NoiseModel};
use crate::gates::RngStream;
use crate::eigen::jacobi_eigh;

/// Measurement shots per experiment when none are specified.
pub const DEFAULT_SHOTS: u64 = 8192;
/// Experiment repetitions when none are specified.
pub const DEFAULT_REPS: usize = 25;

/// The four tomography input states, prepared on qubit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputState {
    Zero,
    One,
    PlusX,
    PlusY,
}

impl InputState {
    pub const ALL: [InputState; 4] = [
        InputState::Zero,
        InputState::One,
        InputState::PlusX,
        InputState::PlusY,
    ];

    pub fn bloch(&self) -> BlochVector {
        match self {
            InputState::Zero => BlochVector::new(0.0, 0.0, 1.0),
            InputState::One => BlochVector::new(0.0, 0.0, -1.0),
            InputState::PlusX => BlochVector::new(1.0, 0.0, 0.0),
            InputState::PlusY => BlochVector::new(0.0, 1.0, 0.0),
        }
    }

    pub fn statevector(&self) -> [Complex64; 2] {
        let s = 1.0 / 2.0_f64.sqrt();
        match self {
            InputState::Zero => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            InputState::One => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            InputState::PlusX => [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
            InputState::PlusY => [Complex64::new(s, 0.0), Complex64::new(0.0, s)],
        }
    }

    /// Input state on qubit 0 with the ancilla prepared in |0>.
    pub fn two_qubit_density(&self) -> DensityMatrix {
        let q0 = self.statevector();
        let psi = [
            q0[0],
            Complex64::new(0.0, 0.0),
            q0[1],
            Complex64::new(0.0, 0.0),
        ];
        DensityMatrix::from_statevector(&psi).expect("normalized input state")
    }

    pub fn label(&self) -> &'static str {
        match self {
            InputState::Zero => "zero",
            InputState::One => "one",
            InputState::PlusX => "x",
            InputState::PlusY => "y",
        }
    }
}

/// Affine Bloch-sphere map `r -> m r + c` (9 + 3 = 12 parameters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub m: [[f64; 3]; 3],
    pub c: [f64; 3],
}

impl AffineMap {
    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            c: [0.0; 3],
        }
    }

    pub fn apply(&self, r: &BlochVector) -> BlochVector {
        let v = r.as_array();
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = self.c[i];
            for j in 0..3 {
                out[i] += self.m[i][j] * v[j];
            }
        }
        BlochVector::new(out[0], out[1], out[2])
    }

    /// Largest |entry| deviation of `m` from the identity matrix.
    pub fn max_deviation_from_identity(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((self.m[i][j] - target).abs());
            }
        }
        dev
    }

    pub fn translation_norm(&self) -> f64 {
        (self.c[0].powi(2) + self.c[1].powi(2) + self.c[2].powi(2)).sqrt()
    }
}

/// Tomography output: the reconstructed map, per-state fidelities and
/// output Bloch vectors, and standard errors over the repetitions.
///
/// `fidelities` are clamped to [0, 1] (shot noise can push the estimates
/// slightly outside); `raw_fidelities` keep the unclamped values.
#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub map: AffineMap,
    pub fidelities: [f64; 4],
    pub raw_fidelities: [f64; 4],
    pub output_bloch: [BlochVector; 4],
    pub map_std_err: AffineMap,
    pub fidelity_std_err: [f64; 4],
    pub n_reps: usize,
}

impl TomographyResult {
    pub fn mean_fidelity(&self) -> f64 {
        self.fidelities.iter().sum::<f64>() / 4.0
    }

    pub fn fidelity_spread(&self) -> f64 {
        let max = self.fidelities.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.fidelities.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }
}

/// Reconstruct the affine map from the four output Bloch vectors, ordered
/// as [`InputState::ALL`] (inputs +z, -z, +x, +y):
/// `c = (r'_0 + r'_1)/2`, `M z = (r'_0 - r'_1)/2`, `M x = r'_x - c`,
/// `M y = r'_y - c`.
pub fn reconstruct_affine(outputs: &[BlochVector; 4]) -> AffineMap {
    let [r0, r1, rx, ry] = outputs;
    let c = [
        (r0.x + r1.x) / 2.0,
        (r0.y + r1.y) / 2.0,
        (r0.z + r1.z) / 2.0,
    ];
    let col_z = [
        (r0.x - r1.x) / 2.0,
        (r0.y - r1.y) / 2.0,
        (r0.z - r1.z) / 2.0,
    ];
    let col_x = [rx.x - c[0], rx.y - c[1], rx.z - c[2]];
    let col_y = [ry.x - c[0], ry.y - c[1], ry.z - c[2]];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        m[i][0] = col_x[i];
        m[i][1] = col_y[i];
        m[i][2] = col_z[i];
    }
    AffineMap { m, c }
}

/// Fidelity of a pure input against the measured output Bloch vector:
/// `F = (1 + r_in . r_out) / 2`, clamped to [0, 1].
pub fn fidelity(input: InputState, out_bloch: &BlochVector) -> f64 {
    raw_fidelity(input, out_bloch).clamp(0.0, 1.0)
}

fn raw_fidelity(input: InputState, out_bloch: &BlochVector) -> f64 {
    (1.0 + input.bloch().dot(out_bloch)) / 2.0
}

/// Run the 12-experiment protocol on a fixed circuit.
pub fn run_tomography(
    circuit: &Circuit,
    noise: Option<&NoiseModel>,
    mode: MeasureMode,
    n_reps: usize,
    rng: &RngStream,
) -> TomographyResult {
    run_tomography_with(|_, _| circuit.clone(), noise, mode, n_reps, rng)
}

/// Run the protocol with a fresh circuit per repetition (random-unitary
/// and twirled channels draw a new sequence for every repetition).
///
/// The builder receives the repetition index and a dedicated random lane;
/// shot sampling uses an independent lane of the same repetition child.
pub fn run_tomography_with<F>(
    mut build: F,
    noise: Option<&NoiseModel>,
    mode: MeasureMode,
    n_reps: usize,
    rng: &RngStream,
) -> TomographyResult
where
    F: FnMut(usize, &RngStream) -> Circuit,
{
    assert!(n_reps >= 1, "need at least one repetition");
    // polarizations[rep][state][axis]
    let mut polarizations = vec![[[0.0f64; 3]; 4]; n_reps];
    for rep in 0..n_reps {
        let rep_rng = rng.child(rep as u64);
        let circuit_rng = rep_rng.child(0);
        let mut shot_rng = rep_rng.child(1);
        let circuit = build(rep, &circuit_rng);
        for (si, state) in InputState::ALL.iter().enumerate() {
            let rho_out = simulate(&circuit, &state.two_qubit_density(), noise);
            for (ai, axis) in MeasurementAxis::ALL.iter().enumerate() {
                polarizations[rep][si][ai] =
                    measure_polarization(&rho_out, *axis, mode, noise, &mut shot_rng);
            }
        }
    }

    // Means and standard errors over repetitions.
    let mut mean = [[0.0f64; 3]; 4];
    let mut std_err = [[0.0f64; 3]; 4];
    for si in 0..4 {
        for ai in 0..3 {
            let mut s = 0.0;
            for rep in 0..n_reps {
                s += polarizations[rep][si][ai];
            }
            let mu = s / n_reps as f64;
            mean[si][ai] = mu;
            if n_reps > 1 {
                let var: f64 = polarizations
                    .iter()
                    .map(|p| (p[si][ai] - mu).powi(2))
                    .sum::<f64>()
                    / (n_reps - 1) as f64;
                std_err[si][ai] = (var / n_reps as f64).sqrt();
            }
        }
    }

    let output_bloch = [
        BlochVector::new(mean[0][0], mean[0][1], mean[0][2]),
        BlochVector::new(mean[1][0], mean[1][1], mean[1][2]),
        BlochVector::new(mean[2][0], mean[2][1], mean[2][2]),
        BlochVector::new(mean[3][0], mean[3][1], mean[3][2]),
    ];
    let map = reconstruct_affine(&output_bloch);

    // Linear error propagation through the reconstruction formulas.
    let quad = |a: f64, b: f64| (a * a + b * b).sqrt();
    let mut c_err = [0.0; 3];
    let mut m_err = [[0.0; 3]; 3];
    for i in 0..3 {
        c_err[i] = quad(std_err[0][i], std_err[1][i]) / 2.0;
        m_err[i][2] = quad(std_err[0][i], std_err[1][i]) / 2.0;
        m_err[i][0] = quad(std_err[2][i], c_err[i]);
        m_err[i][1] = quad(std_err[3][i], c_err[i]);
    }

    let mut fidelities = [0.0; 4];
    let mut raw_fidelities = [0.0; 4];
    let mut fidelity_std_err = [0.0; 4];
    for (si, state) in InputState::ALL.iter().enumerate() {
        raw_fidelities[si] = raw_fidelity(*state, &output_bloch[si]);
        fidelities[si] = raw_fidelities[si].clamp(0.0, 1.0);
        // The input Bloch vectors are coordinate axes, so only one
        // polarization component enters each fidelity.
        let axis_index = match state {
            InputState::Zero | InputState::One => 2,
            InputState::PlusX => 0,
            InputState::PlusY => 1,
        };
        fidelity_std_err[si] = std_err[si][axis_index] / 2.0;
    }

    TomographyResult {
        map,
        fidelities,
        raw_fidelities,
        output_bloch,
        map_std_err: AffineMap { m: m_err, c: c_err },
        fidelity_std_err,
        n_reps,
    }
}

/// Exact affine map of a single-qubit Kraus channel, from the same four
/// input states.
pub fn tomography_of_kraus(kraus: &KrausSet) -> AffineMap {
    assert_eq!(kraus.dim(), 2, "expected a single-qubit channel");
    let mut outputs = [BlochVector::new(0.0, 0.0, 0.0); 4];
    for (si, state) in InputState::ALL.iter().enumerate() {
        let rho = DensityMatrix::from_statevector(&state.statevector()).expect("valid state");
        let out = apply_kraus(&rho, kraus).expect("matching dims");
        outputs[si] = out.bloch().expect("single-qubit output");
    }
    reconstruct_affine(&outputs)
}

/// Ellipsoid geometry of an affine map: singular values of `m` (semi-axes,
/// descending), left singular vectors (principal axes), the center `c`,
/// and the acute angle between the major axis and z.
#[derive(Debug, Clone)]
pub struct EllipsoidReport {
    pub semi_axes: [f64; 3],
    /// `principal_axes[k]` is the unit axis for `semi_axes[k]`.
    pub principal_axes: [[f64; 3]; 3],
    pub center: [f64; 3],
    pub tilt_deg: f64,
    /// Set when the top two semi-axes coincide within 1e-9; the tilt is
    /// then reported as 0 since the major axis is not unique.
    pub degenerate_major: bool,
}

/// SVD of a real 3x3 matrix via the symmetric eigenproblem of `m^T m`.
/// Returns (singular values descending, left singular vectors as rows).
fn svd3(m: &[[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut mtm = [0.0f64; 9];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += m[k][i] * m[k][j];
            }
            mtm[i * 3 + j] = s;
        }
    }
    let (vals, v) = jacobi_eigh(&mtm, 3);
    let sigma = [
        vals[0].max(0.0).sqrt(),
        vals[1].max(0.0).sqrt(),
        vals[2].max(0.0).sqrt(),
    ];

    let matvec = |m: &[[f64; 3]; 3], x: [f64; 3]| {
        let mut out = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i] += m[i][j] * x[j];
            }
        }
        out
    };
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };

    let mut u = [[0.0f64; 3]; 3];
    let scale = sigma[0].max(1e-300);
    for k in 0..3 {
        let vk = [v[k], v[3 + k], v[6 + k]];
        let w = matvec(m, vk);
        let mut cand = w;
        // Orthogonalize against already-fixed axes.
        for fixed in u.iter().take(k) {
            let proj = dot(cand, *fixed);
            for i in 0..3 {
                cand[i] -= proj * fixed[i];
            }
        }
        let norm = dot(cand, cand).sqrt();
        if sigma[k] > 1e-12 * scale && norm > 1e-14 * scale {
            for i in 0..3 {
                u[k][i] = cand[i] / norm;
            }
        } else {
            // Rank-deficient direction: complete the orthonormal basis.
            u[k] = match k {
                0 => [1.0, 0.0, 0.0],
                1 => {
                    // Any unit vector orthogonal to u[0].
                    let pick = if u[0][0].abs() < 0.9 {
                        [1.0, 0.0, 0.0]
                    } else {
                        [0.0, 1.0, 0.0]
                    };
                    let mut c2 = cross(u[0], pick);
                    let n = dot(c2, c2).sqrt();
                    for x in c2.iter_mut() {
                        *x /= n;
                    }
                    c2
                }
                _ => {
                    let mut c2 = cross(u[0], u[1]);
                    let n = dot(c2, c2).sqrt();
                    for x in c2.iter_mut() {
                        *x /= n;
                    }
                    c2
                }
            };
        }
    }
    (sigma, u)
}

/// Ellipsoid report for a reconstructed map.
pub fn ellipsoid_report(map: &AffineMap) -> EllipsoidReport {
    let (semi_axes, principal_axes) = svd3(&map.m);
    let degenerate_major = (semi_axes[0] - semi_axes[1]).abs() < 1e-9;
    let tilt_deg = if degenerate_major {
        0.0
    } else {
        principal_axes[0][2].abs().clamp(0.0, 1.0).acos().to_degrees()
    };
    EllipsoidReport {
        semi_axes,
        principal_axes,
        center: map.c,
        tilt_deg,
        degenerate_major,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::build_cnot_echo;
    use crate::gates::GateTimes;
    use crate::noise::{depolarizing_kraus, thermal_relaxation_kraus};
    use proptest::prelude::*;

    #[test]
    fn identity_channel_exact() {
        let circuit = build_cnot_echo(0, GateTimes::default());
        let result = run_tomography(&circuit, None, MeasureMode::Exact, 1, &RngStream::new(1));
        assert!(result.map.max_deviation_from_identity() < 1e-12);
        assert!(result.map.translation_norm() < 1e-12);
        for f in result.fidelities {
            assert!((f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn protocol_defaults_match_convention() {
        assert_eq!(DEFAULT_SHOTS, 8192);
        assert_eq!(DEFAULT_REPS, 25);
    }

    #[test]
    fn amplitude_damping_analytic_map() {
        for gamma in [0.0f64, 0.1, 0.5, 1.0] {
            // Pure amplitude damping: t2 = 2 t1 removes extra dephasing;
            // pick duration for the target gamma.
            let t1 = 1.0;
            let duration = if gamma < 1.0 {
                -(1.0 - gamma).ln() * t1
            } else {
                1e6
            };
            let kraus = thermal_relaxation_kraus(t1, 2.0 * t1, duration).unwrap();
            let map = tomography_of_kraus(&kraus);
            let root = (1.0 - gamma).sqrt();
            for i in 0..3 {
                for j in 0..3 {
                    let expect = match (i, j) {
                        (0, 0) | (1, 1) => root,
                        (2, 2) => 1.0 - gamma,
                        _ => 0.0,
                    };
                    assert!(
                        (map.m[i][j] - expect).abs() < 1e-10,
                        "gamma {gamma}: m[{i}][{j}] = {}",
                        map.m[i][j]
                    );
                }
            }
            assert!(map.c[0].abs() < 1e-10 && map.c[1].abs() < 1e-10);
            assert!((map.c[2] - gamma).abs() < 1e-10);
        }
    }

    #[test]
    fn depolarizing_map_is_uniform_contraction() {
        let map = tomography_of_kraus(&depolarizing_kraus(0.25, 1).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.75 } else { 0.0 };
                assert!((map.m[i][j] - expect).abs() < 1e-12);
            }
        }
        assert!(map.translation_norm() < 1e-12);
    }

    #[test]
    fn reconstruct_affine_trivial_cases() {
        let inputs: [BlochVector; 4] = [
            InputState::Zero.bloch(),
            InputState::One.bloch(),
            InputState::PlusX.bloch(),
            InputState::PlusY.bloch(),
        ];
        let map = reconstruct_affine(&inputs);
        assert!(map.max_deviation_from_identity() < 1e-15);
        assert!(map.translation_norm() < 1e-15);

        let zeroes = [BlochVector::new(0.0, 0.0, 0.0); 4];
        let map = reconstruct_affine(&zeroes);
        for row in map.m {
            for v in row {
                assert_eq!(v, 0.0);
            }
        }
        assert_eq!(map.c, [0.0; 3]);
    }

    proptest! {
        #[test]
        fn reconstruct_inverts_forward_map(
            entries in proptest::array::uniform9(-1.0f64..1.0),
            shift in proptest::array::uniform3(-0.3f64..0.3),
        ) {
            // Scale down so singular values stay below 1; reconstruction is
            // linear so the scaling is irrelevant to the identity tested.
            let mut m = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = entries[3 * i + j] / 3.0;
                }
            }
            let truth = AffineMap { m, c: shift };
            let outputs = [
                truth.apply(&InputState::Zero.bloch()),
                truth.apply(&InputState::One.bloch()),
                truth.apply(&InputState::PlusX.bloch()),
                truth.apply(&InputState::PlusY.bloch()),
            ];
            let rec = reconstruct_affine(&outputs);
            for i in 0..3 {
                prop_assert!((rec.c[i] - truth.c[i]).abs() < 1e-12);
                for j in 0..3 {
                    prop_assert!((rec.m[i][j] - truth.m[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn fidelity_limit_cases_and_density_formula() {
        let r_in = InputState::PlusX.bloch();
        assert!((fidelity(InputState::PlusX, &r_in) - 1.0).abs() < 1e-15);
        assert!((fidelity(InputState::PlusX, &BlochVector::new(0.0, 0.0, 0.0)) - 0.5).abs() < 1e-15);
        assert!(fidelity(InputState::PlusX, &BlochVector::new(-1.0, 0.0, 0.0)).abs() < 1e-15);

        // Agreement with <psi| rho |psi> on arbitrary valid outputs.
        let mut rng = RngStream::new(40);
        for _ in 0..200 {
            let mut r = BlochVector::new(
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
            );
            if r.norm() > 1.0 {
                let n = r.norm();
                r = BlochVector::new(r.x / n, r.y / n, r.z / n);
            }
            for state in InputState::ALL {
                let rho_out = DensityMatrix::from_bloch(r).unwrap();
                let psi = state.statevector();
                let mut overlap = Complex64::new(0.0, 0.0);
                for i in 0..2 {
                    for j in 0..2 {
                        overlap += psi[i].conj() * rho_out.matrix().get(i, j) * psi[j];
                    }
                }
                assert!((fidelity(state, &r) - overlap.re).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fidelity_clamps_shot_noise_overshoot() {
        let r = BlochVector::new(0.0, 0.0, 1.02);
        assert_eq!(fidelity(InputState::Zero, &r), 1.0);
        assert!((raw_fidelity(InputState::Zero, &r) - 1.01).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_diagonal_cases() {
        let sphere = ellipsoid_report(&AffineMap::identity());
        assert!(sphere.degenerate_major);
        assert_eq!(sphere.tilt_deg, 0.0);

        let map = AffineMap {
            m: [[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.9]],
            c: [0.0; 3],
        };
        let rep = ellipsoid_report(&map);
        assert!(!rep.degenerate_major);
        assert!((rep.semi_axes[0] - 0.9).abs() < 1e-14);
        assert!((rep.semi_axes[1] - 0.5).abs() < 1e-14);
        assert!(rep.tilt_deg.abs() < 1e-10);
        assert!((rep.principal_axes[0][2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_detects_rotated_major_axis() {
        // Rotate diag(0.5, 0.5, 0.9) about x by 0.3 rad.
        let (cos, sin) = (0.3f64.cos(), 0.3f64.sin());
        let rot = [[1.0, 0.0, 0.0], [0.0, cos, -sin], [0.0, sin, cos]];
        let diag = [[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.9]];
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    m[i][j] += rot[i][k] * diag[k][j];
                }
            }
        }
        let rep = ellipsoid_report(&AffineMap { m, c: [0.0; 3] });
        assert!((rep.tilt_deg - 0.3f64.to_degrees()).abs() < 1e-9);
        // Principal axes stay orthonormal.
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| rep.principal_axes[i][k] * rep.principal_axes[j][k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sampled_identity_tomography_concentrates() {
        let circuit = build_cnot_echo(0, GateTimes::default());
        let bound = 5.0 * 2.2e-3;
        for seed in [1u64, 2, 3] {
            let result = run_tomography(
                &circuit,
                None,
                MeasureMode::Shots(DEFAULT_SHOTS),
                DEFAULT_REPS,
                &RngStream::new(seed),
            );
            assert!(
                result.map.max_deviation_from_identity() < bound,
                "seed {seed}: deviation {}",
                result.map.max_deviation_from_identity()
            );
            assert!(result.map.translation_norm() < bound);
            // Standard errors should be of the expected scale.
            for i in 0..3 {
                for j in 0..3 {
                    assert!(result.map_std_err.m[i][j] < 3.0 * 2.2e-3);
                }
            }
        }
    }

    #[test]
    fn exact_mode_has_zero_uncertainty() {
        let circuit = build_cnot_echo(2, GateTimes::default());
        let result = run_tomography(&circuit, None, MeasureMode::Exact, 5, &RngStream::new(1));
        for i in 0..3 {
            assert_eq!(result.map_std_err.c[i], 0.0);
            for j in 0..3 {
                assert_eq!(result.map_std_err.m[i][j], 0.0);
            }
        }
    }

    #[test]
    fn exact_tomography_matches_kraus_propagation_through_circuit() {
        // A unitary rotation channel: tomography through the simulator
        // matches the Rodrigues rotation of the Bloch ball.
        use crate::gates::Gate;
        let angle = 0.4;
        let circuit = Circuit {
            ops: vec![GateTimes::default().stamp(Gate::Rx { qubit: 0, angle })],
            meta: None,
        };
        let result = run_tomography(&circuit, None, MeasureMode::Exact, 1, &RngStream::new(2));
        let (cos, sin) = (angle.cos(), angle.sin());
        let expect = [[1.0, 0.0, 0.0], [0.0, cos, -sin], [0.0, sin, cos]];
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (result.map.m[i][j] - expect[i][j]).abs() < 1e-10,
                    "m[{i}][{j}]"
                );
            }
        }
    }
}
