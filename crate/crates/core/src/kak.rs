//! Cartan decomposition of 4x4 unitaries and synthesis into a circuit of
//! at most 3 CNOTs and 15 single-qubit rotations from {Ry, Rz}.
//!
//! The decomposition follows the magic-basis construction. Writing
//! `V = B^dagger U B` for the magic-basis change `B`, the matrix
//! `M = V^T V` is complex symmetric and unitary, so its real and imaginary
//! parts are commuting real symmetric matrices. A real orthogonal joint
//! eigenbasis of the pair yields the interaction eigenphases and the right
//! local factor; the left factor follows by division. In the computational
//! basis this gives
//!
//! ```text
//! U = e^{i phi} (a1 ⊗ a2) · exp(i (a XX + b YY + c ZZ)) · (a3 ⊗ a4)
//! ```
//!
//! with the interaction coefficients canonicalized into the Weyl chamber
//! `pi/4 >= a >= b >= |c|` (and `c >= 0` on the `a = pi/4` face) by folding
//! shifts, reflections, and axis permutations into the local factors.
//!
//! Degenerate interaction eigenphases (the identity and CNOT are both
//! degenerate) are handled by diagonalizing the real part first and then
//! the imaginary part within each degenerate eigenspace, followed by a few
//! joint-Jacobi polish sweeps that also repair near-degenerate clusters;
//! the input is never perturbed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::channels::Circuit;
use crate::eigen::jacobi_eigh;
use crate::gates::{hadamard, pauli_x, pauli_y, pauli_z, rx, Gate, GateTimes};
use crate::linalg::ComplexMatrix;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Error)]
pub enum KakError {
    #[error("input matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("input matrix must be 4x4, got {0}x{0}")]
    WrongDim(usize),
    #[error("internal numerical failure: {0}")]
    Numerical(String),
}

/// Result of the Cartan decomposition:
/// `U = e^{i global_phase} (a1 ⊗ a2) · exp(i(a XX + b YY + c ZZ)) · (a3 ⊗ a4)`
/// with `canonical_params = (a, b, c)` in the Weyl chamber.
#[derive(Debug, Clone)]
pub struct KakDecomposition {
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
    pub a3: ComplexMatrix,
    pub a4: ComplexMatrix,
    pub canonical_params: (f64, f64, f64),
    pub global_phase: f64,
}

/// The magic (Bell-like) basis change. Columns are phased Bell states;
/// conjugation by `B` maps SU(2)⊗SU(2) onto SO(4) and diagonalizes the
/// XX/YY/ZZ interaction family.
fn magic_basis() -> ComplexMatrix {
    let s = 1.0 / 2.0_f64.sqrt();
    ComplexMatrix::new(
        4,
        vec![
            c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, s),
            c(0.0, 0.0), c(0.0, s), c(s, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, s), c(-s, 0.0), c(0.0, 0.0),
            c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -s),
        ],
    )
}

/// Eigenphases of `exp(i(a XX + b YY + c ZZ))` on the four magic-basis
/// states, in column order of [`magic_basis`].
fn interaction_phases(a: f64, b: f64, co: f64) -> [f64; 4] {
    [a - b + co, a + b - co, -a - b - co, -a + b + co]
}

/// `exp(i(a XX + b YY + c ZZ))`, built exactly from its magic-basis
/// diagonal form.
pub fn canonical_matrix(a: f64, b: f64, co: f64) -> ComplexMatrix {
    let bm = magic_basis();
    let mu = interaction_phases(a, b, co);
    let mut d = ComplexMatrix::zeros(4);
    for (j, m) in mu.iter().enumerate() {
        d.set(j, j, Complex64::from_polar(1.0, *m));
    }
    bm.matmul(&d).matmul(&bm.dagger())
}

fn kron2(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Joint orthogonal diagonalization of two commuting real symmetric 4x4
/// matrices. Returns `p` (orthogonal, row-major, eigenvectors in columns)
/// with `p^T f p` and `p^T g p` both diagonal.
fn joint_diagonalize(f: &[f64; 16], g: &[f64; 16]) -> [f64; 16] {
    let n = 4usize;
    let (f_vals, mut p) = jacobi_eigh(f, n);

    // Stage two: within each cluster of (near-)equal eigenvalues of F,
    // diagonalize the restriction of G.
    let cluster_tol = 1e-6;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (f_vals[end] - f_vals[start]).abs() < cluster_tol {
            end += 1;
        }
        let k = end - start;
        if k > 1 {
            // g_block = Qc^T G Qc for the cluster columns Qc.
            let mut g_block = vec![0.0; k * k];
            for bi in 0..k {
                for bj in 0..k {
                    let mut s = 0.0;
                    for r in 0..n {
                        for cidx in 0..n {
                            s += p[r * n + (start + bi)] * g[r * n + cidx] * p[cidx * n + (start + bj)];
                        }
                    }
                    g_block[bi * k + bj] = s;
                }
            }
            let (_, w) = jacobi_eigh(&g_block, k);
            let mut rotated = vec![0.0; n * k];
            for r in 0..n {
                for bj in 0..k {
                    let mut s = 0.0;
                    for bi in 0..k {
                        s += p[r * n + (start + bi)] * w[bi * k + bj];
                    }
                    rotated[r * k + bj] = s;
                }
            }
            for r in 0..n {
                for bj in 0..k {
                    p[r * n + (start + bj)] = rotated[r * k + bj];
                }
            }
        }
        start = end;
    }

    // Polish: joint-Jacobi sweeps on the pair. For commuting inputs this
    // converges quadratically and cleans up clusters that straddled the
    // stage-one tolerance.
    let mut fw = *f;
    let mut gw = *g;
    let similarity = |m: &mut [f64; 16], p: &[f64; 16]| {
        let mut tmp = [0.0f64; 16];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k2 in 0..n {
                    for l in 0..n {
                        s += p[k2 * n + i] * m[k2 * n + l] * p[l * n + j];
                    }
                }
                tmp[i * n + j] = s;
            }
        }
        *m = tmp;
    };
    let mut p_arr = [0.0f64; 16];
    p_arr.copy_from_slice(&p);
    similarity(&mut fw, &p_arr);
    similarity(&mut gw, &p_arr);

    for _ in 0..32 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += fw[i * n + j].powi(2) + gw[i * n + j].powi(2);
            }
        }
        if off < 1e-28 {
            break;
        }
        for pi in 0..n - 1 {
            for qi in (pi + 1)..n {
                let hf = [fw[pi * n + pi] - fw[qi * n + qi], 2.0 * fw[pi * n + qi]];
                let hg = [gw[pi * n + pi] - gw[qi * n + qi], 2.0 * gw[pi * n + qi]];
                let s00 = hf[0] * hf[0] + hg[0] * hg[0];
                let s01 = hf[0] * hf[1] + hg[0] * hg[1];
                let s11 = hf[1] * hf[1] + hg[1] * hg[1];
                let psi = 0.5 * (2.0 * s01).atan2(s00 - s11);
                let (mut vx, mut vy) = (psi.cos(), psi.sin());
                if vx < 0.0 {
                    vx = -vx;
                    vy = -vy;
                }
                let theta = 0.5 * vy.atan2(vx);
                if theta.abs() < 1e-18 {
                    continue;
                }
                let (ct, st) = (theta.cos(), theta.sin());
                let rotate = |m: &mut [f64; 16]| {
                    for r in 0..n {
                        let mp = m[r * n + pi];
                        let mq = m[r * n + qi];
                        m[r * n + pi] = ct * mp + st * mq;
                        m[r * n + qi] = -st * mp + ct * mq;
                    }
                    for cc in 0..n {
                        let mp = m[pi * n + cc];
                        let mq = m[qi * n + cc];
                        m[pi * n + cc] = ct * mp + st * mq;
                        m[qi * n + cc] = -st * mp + ct * mq;
                    }
                };
                rotate(&mut fw);
                rotate(&mut gw);
                for r in 0..n {
                    let pp = p_arr[r * n + pi];
                    let pq = p_arr[r * n + qi];
                    p_arr[r * n + pi] = ct * pp + st * pq;
                    p_arr[r * n + qi] = -st * pp + ct * pq;
                }
            }
        }
    }
    p_arr
}

fn det4_real(m: &[f64; 16]) -> f64 {
    let cm = ComplexMatrix::from_real(4, m);
    cm.det().re
}

/// Split a 4x4 tensor product of single-qubit unitaries into its factors,
/// with `m = m0 ⊗ m1` exactly (any phase freedom lands on `m0`).
fn factor_tensor_product(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix), KakError> {
    // Pick the 2x2 block with the largest norm; its determinant is
    // m0[i,j]^2 up to det(m1) = 1 normalization.
    let mut best = (0usize, 0usize);
    let mut best_norm = -1.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut nrm = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    nrm += m.get(2 * i + k, 2 * j + l).norm_sqr();
                }
            }
            if nrm > best_norm {
                best_norm = nrm;
                best = (i, j);
            }
        }
    }
    let (bi, bj) = best;
    let block = ComplexMatrix::new(
        2,
        vec![
            m.get(2 * bi, 2 * bj),
            m.get(2 * bi, 2 * bj + 1),
            m.get(2 * bi + 1, 2 * bj),
            m.get(2 * bi + 1, 2 * bj + 1),
        ],
    );
    let det = block.det();
    if det.norm() < 1e-18 {
        return Err(KakError::Numerical(
            "tensor-product block is singular".into(),
        ));
    }
    let root = det.sqrt();
    let m1 = block.scale(c(1.0, 0.0) / root);

    let m1d = m1.dagger();
    let mut m0 = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            let sub = ComplexMatrix::new(
                2,
                vec![
                    m.get(2 * i, 2 * j),
                    m.get(2 * i, 2 * j + 1),
                    m.get(2 * i + 1, 2 * j),
                    m.get(2 * i + 1, 2 * j + 1),
                ],
            );
            // tr(sub * m1^dagger) / 2 recovers the coefficient of m1.
            m0.set(i, j, sub.matmul(&m1d).trace() / c(2.0, 0.0));
        }
    }
    let rebuilt = kron2(&m0, &m1);
    let err = rebuilt.max_abs_diff(m);
    if err > 1e-8 {
        return Err(KakError::Numerical(format!(
            "matrix is not a tensor product of single-qubit unitaries (residual {err:.3e})"
        )));
    }
    Ok((m0, m1))
}

/// Working state during Weyl-chamber canonicalization. The invariant
/// `U = e^{i phase} (a1 ⊗ a2) · Can(t) · (a3 ⊗ a4)` holds after every move.
struct RawDecomposition {
    a1: ComplexMatrix,
    a2: ComplexMatrix,
    a3: ComplexMatrix,
    a4: ComplexMatrix,
    t: [f64; 3],
    phase: f64,
}

fn pauli(axis: usize) -> ComplexMatrix {
    match axis {
        0 => pauli_x(),
        1 => pauli_y(),
        2 => pauli_z(),
        _ => unreachable!(),
    }
}

impl RawDecomposition {
    /// `t[k] -= n * pi/2`, folding `i^n (P^n ⊗ P^n)` into the left locals.
    fn shift(&mut self, k: usize, n: i64) {
        if n == 0 {
            return;
        }
        self.t[k] -= n as f64 * FRAC_PI_2;
        self.phase += n as f64 * FRAC_PI_2;
        if n.rem_euclid(2) == 1 {
            let p = pauli(k);
            self.a1 = self.a1.matmul(&p);
            self.a2 = self.a2.matmul(&p);
        }
    }

    /// Negate `t[j]` and `t[k]` by conjugating the core with `Q ⊗ I`,
    /// `Q` being the Pauli on the remaining axis.
    fn flip(&mut self, j: usize, k: usize) {
        let q = pauli(3 - j - k);
        self.t[j] = -self.t[j];
        self.t[k] = -self.t[k];
        self.a1 = self.a1.matmul(&q);
        self.a3 = q.matmul(&self.a3);
    }

    /// Swap `t[j]` and `t[k]` by conjugating with `C ⊗ C` for a Clifford
    /// `C` exchanging the two axes.
    fn swap_axes(&mut self, j: usize, k: usize) {
        let cmat = match (j.min(k), j.max(k)) {
            (0, 1) => ComplexMatrix::new(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]),
            (0, 2) => hadamard(),
            (1, 2) => rx(FRAC_PI_2),
            _ => unreachable!(),
        };
        let cd = cmat.dagger();
        self.t.swap(j, k);
        self.a1 = self.a1.matmul(&cd);
        self.a2 = self.a2.matmul(&cd);
        self.a3 = cmat.matmul(&self.a3);
        self.a4 = cmat.matmul(&self.a4);
    }

    fn canonicalize(&mut self) {
        // Shift every coordinate into [-pi/4, pi/4).
        for k in 0..3 {
            let n = ((self.t[k] + FRAC_PI_4) / FRAC_PI_2).floor() as i64;
            self.shift(k, n);
        }
        // Sort by magnitude, descending.
        if self.t[0].abs() < self.t[1].abs() {
            self.swap_axes(0, 1);
        }
        if self.t[1].abs() < self.t[2].abs() {
            self.swap_axes(1, 2);
        }
        if self.t[0].abs() < self.t[1].abs() {
            self.swap_axes(0, 1);
        }
        // Push all negativity into the last coordinate.
        if self.t[0] < 0.0 && self.t[1] < 0.0 {
            self.flip(0, 1);
        } else if self.t[0] < 0.0 && self.t[2] < 0.0 {
            self.flip(0, 2);
        } else if self.t[1] < 0.0 && self.t[2] < 0.0 {
            self.flip(1, 2);
        }
        if self.t[0] < 0.0 {
            self.flip(0, 2);
        } else if self.t[1] < 0.0 {
            self.flip(1, 2);
        }
        // On the a = pi/4 face, (a, b, c) and (a, b, -c) are the same class;
        // pick the c >= 0 representative.
        if self.t[0] > FRAC_PI_4 - 1e-10 && self.t[2] < -1e-15 {
            self.shift(0, 1);
            self.flip(0, 2);
        }
        self.phase = self.phase.rem_euclid(2.0 * PI);
    }
}

/// Cartan KAK decomposition of a 4x4 unitary.
pub fn kak_decompose(u: &ComplexMatrix) -> Result<KakDecomposition, KakError> {
    if u.dim() != 4 {
        return Err(KakError::WrongDim(u.dim()));
    }
    let unitarity = u
        .dagger()
        .matmul(u)
        .max_abs_diff(&ComplexMatrix::identity(4));
    if unitarity > 1e-10 {
        return Err(KakError::NotUnitary(unitarity));
    }

    // Normalize into SU(4), tracking the removed phase.
    let det = u.det();
    let phi0 = det.arg() / 4.0;
    let u_su = u.scale(Complex64::from_polar(1.0, -phi0));

    let bm = magic_basis();
    let v = bm.dagger().matmul(&u_su).matmul(&bm);
    let m = v.transpose().matmul(&v);

    let mut f = [0.0f64; 16];
    let mut g = [0.0f64; 16];
    for i in 0..4 {
        for j in 0..4 {
            f[i * 4 + j] = m.get(i, j).re;
            g[i * 4 + j] = m.get(i, j).im;
        }
    }
    let mut p = joint_diagonalize(&f, &g);

    // Eigenphases d_j = f_j + i g_j = e^{2 i theta_j}.
    let diag_of = |w: &[f64; 16], p: &[f64; 16], j: usize| -> f64 {
        let mut s = 0.0;
        for r in 0..4 {
            for cc in 0..4 {
                s += p[r * 4 + j] * w[r * 4 + cc] * p[cc * 4 + j];
            }
        }
        s
    };
    let mut thetas = [0.0f64; 4];
    for j in 0..4 {
        let fj = diag_of(&f, &p, j);
        let gj = diag_of(&g, &p, j);
        thetas[j] = gj.atan2(fj) / 2.0;
    }

    // Deterministic slot order: sort eigenpairs by theta, descending.
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| thetas[j].partial_cmp(&thetas[i]).unwrap().then(i.cmp(&j)));
    let mut p_sorted = [0.0f64; 16];
    let mut th_sorted = [0.0f64; 4];
    for (new, &old) in order.iter().enumerate() {
        th_sorted[new] = thetas[old];
        for r in 0..4 {
            p_sorted[r * 4 + new] = p[r * 4 + old];
        }
    }
    p = p_sorted;
    thetas = th_sorted;

    // Force det(P) = +1 so the orthogonal factors stay in SO(4).
    if det4_real(&p) < 0.0 {
        for r in 0..4 {
            p[r * 4 + 3] = -p[r * 4 + 3];
        }
    }

    // The eigenphase sum must vanish mod 2*pi for the diagonal factor to
    // sit in SU(4); move one branch by pi if needed.
    let s: f64 = thetas.iter().sum();
    if (s / PI).round() as i64 % 2 != 0 {
        let mut jmax = 0;
        for j in 1..4 {
            if thetas[j].abs() > thetas[jmax].abs() {
                jmax = j;
            }
        }
        thetas[jmax] -= PI * thetas[jmax].signum();
    }

    let p_mat = ComplexMatrix::from_real(4, &p);
    let r_mat = p_mat.transpose();
    let mut a_inv = ComplexMatrix::zeros(4);
    for j in 0..4 {
        a_inv.set(j, j, Complex64::from_polar(1.0, -thetas[j]));
    }
    let l_mat = v.matmul(&p_mat).matmul(&a_inv);
    // L is unitary with L^T L = I, hence real orthogonal.
    let im_norm: f64 = l_mat
        .entries()
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    if im_norm > 1e-8 {
        return Err(KakError::Numerical(format!(
            "left orthogonal factor has imaginary residue {im_norm:.3e}"
        )));
    }
    let mut l_real = [0.0f64; 16];
    for i in 0..4 {
        for j in 0..4 {
            l_real[i * 4 + j] = l_mat.get(i, j).re;
        }
    }
    let l_mat = ComplexMatrix::from_real(4, &l_real);

    // Interaction coefficients from the eigenphases.
    let a = (thetas[0] + thetas[1]) / 2.0;
    let b = (thetas[1] + thetas[3]) / 2.0;
    let co = (thetas[0] + thetas[3]) / 2.0;

    // Map the orthogonal factors back to local unitaries.
    let kl = bm.matmul(&l_mat).matmul(&bm.dagger());
    let kr = bm.matmul(&r_mat).matmul(&bm.dagger());
    let (a1, a2) = factor_tensor_product(&kl)?;
    let (a3, a4) = factor_tensor_product(&kr)?;

    let mut raw = RawDecomposition {
        a1,
        a2,
        a3,
        a4,
        t: [a, b, co],
        phase: phi0,
    };
    raw.canonicalize();

    Ok(KakDecomposition {
        a1: raw.a1,
        a2: raw.a2,
        a3: raw.a3,
        a4: raw.a4,
        canonical_params: (raw.t[0], raw.t[1], raw.t[2]),
        global_phase: raw.phase,
    })
}

impl KakDecomposition {
    /// Rebuild the original unitary from the factors.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (a, b, co) = self.canonical_params;
        let core = canonical_matrix(a, b, co);
        kron2(&self.a1, &self.a2)
            .matmul(&core)
            .matmul(&kron2(&self.a3, &self.a4))
            .scale(Complex64::from_polar(1.0, self.global_phase))
    }
}

/// ZYZ Euler angles: `u = e^{i phase} Rz(theta1) Ry(theta2) Rz(theta3)`.
pub fn euler_zyz(u: &ComplexMatrix) -> (f64, f64, f64, f64) {
    assert_eq!(u.dim(), 2, "expected a single-qubit unitary");
    let det = u.det();
    let phase = det.arg() / 2.0;
    let su = u.scale(Complex64::from_polar(1.0, -phase));
    let alpha = su.get(0, 0);
    let beta = su.get(1, 0);
    let theta2 = 2.0 * beta.norm().atan2(alpha.norm());
    let (theta1, theta3) = if beta.norm() < 1e-12 {
        (-2.0 * alpha.arg(), 0.0)
    } else if alpha.norm() < 1e-12 {
        (2.0 * beta.arg(), 0.0)
    } else {
        (-alpha.arg() + beta.arg(), -alpha.arg() - beta.arg())
    };
    (theta1, theta2, theta3, phase)
}

// ---------------------------------------------------------------------------
// Circuit synthesis
// ---------------------------------------------------------------------------

/// Axis of a middle rotation in the core template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RotAxis {
    X,
    Y,
    Z,
}

fn rot_gate(axis: RotAxis, qubit: usize, angle: f64) -> Gate {
    match axis {
        RotAxis::X => Gate::Rx { qubit, angle },
        RotAxis::Y => Gate::Ry { qubit, angle },
        RotAxis::Z => Gate::Rz { qubit, angle },
    }
}

/// Shape of the three-CNOT core template: CNOT wiring for each of the
/// three entanglers, two middle rotations between the first pair, one
/// between the second. The corner locals absorb everything else, so the
/// full synthesis uses 12 + 3 = 15 rotations.
#[derive(Debug, Clone, Copy)]
struct TemplateShape {
    dirs: [(usize, usize); 3],
    mid1: [(RotAxis, usize); 2],
    mid2: (RotAxis, usize),
}

fn template_gates(shape: &TemplateShape, theta: [f64; 3]) -> Vec<Gate> {
    vec![
        Gate::Cnot { control: shape.dirs[0].0, target: shape.dirs[0].1 },
        rot_gate(shape.mid1[0].0, shape.mid1[0].1, theta[0]),
        rot_gate(shape.mid1[1].0, shape.mid1[1].1, theta[1]),
        Gate::Cnot { control: shape.dirs[1].0, target: shape.dirs[1].1 },
        rot_gate(shape.mid2.0, shape.mid2.1, theta[2]),
        Gate::Cnot { control: shape.dirs[2].0, target: shape.dirs[2].1 },
    ]
}

fn template_unitary(shape: &TemplateShape, theta: [f64; 3]) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(4);
    for gate in template_gates(shape, theta) {
        u = gate.embedded().matmul(&u);
    }
    u
}

/// Affine map from interaction coefficients to template angles,
/// calibrated once at run time against the decomposer itself. The
/// template's canonical coordinates are an affine function of its angles;
/// probing at one interior point plus finite differences recovers the map
/// exactly, and the validation targets (chamber corners included) confirm
/// it before use.
struct TemplateFit {
    shape: TemplateShape,
    theta0: [f64; 3],
    abc0: [f64; 3],
    jinv: [[f64; 3]; 3],
}

impl TemplateFit {
    fn angles_for(&self, abc: [f64; 3]) -> [f64; 3] {
        let d = [
            abc[0] - self.abc0[0],
            abc[1] - self.abc0[1],
            abc[2] - self.abc0[2],
        ];
        let mut th = self.theta0;
        for i in 0..3 {
            for j in 0..3 {
                th[i] += self.jinv[i][j] * d[j];
            }
        }
        th
    }
}

fn canonical_of_template(shape: &TemplateShape, theta: [f64; 3]) -> Option<[f64; 3]> {
    let d = kak_decompose(&template_unitary(shape, theta)).ok()?;
    Some([
        d.canonical_params.0,
        d.canonical_params.1,
        d.canonical_params.2,
    ])
}

fn invert3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-9 {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let a = m[(j + 1) % 3][(i + 1) % 3] * m[(j + 2) % 3][(i + 2) % 3];
            let b = m[(j + 1) % 3][(i + 2) % 3] * m[(j + 2) % 3][(i + 1) % 3];
            out[i][j] = (a - b) * inv_det;
        }
    }
    Some(out)
}

fn candidate_shapes() -> Vec<TemplateShape> {
    use RotAxis::{X, Y, Z};
    // The first shape calibrates with an exactly affine angle-to-class map
    // (middle rotations on the wires where they change the interaction
    // content); the rest are fallbacks.
    let mut shapes = vec![TemplateShape {
        dirs: [(0, 1), (1, 0), (0, 1)],
        mid1: [(Z, 1), (Y, 0)],
        mid2: (Y, 0),
    }];
    let dir_combos = [
        [(1, 0), (0, 1), (1, 0)],
        [(0, 1), (1, 0), (0, 1)],
        [(0, 1), (1, 0), (1, 0)],
        [(1, 0), (0, 1), (0, 1)],
    ];
    let mid_combos = [
        ([(Z, 0), (Y, 1)], (Y, 1)),
        ([(Z, 1), (Y, 0)], (Y, 0)),
        ([(Z, 0), (Y, 1)], (Y, 0)),
        ([(Z, 1), (Y, 0)], (Y, 1)),
        ([(X, 0), (Z, 1)], (Y, 1)),
        ([(X, 0), (Z, 1)], (Y, 0)),
        ([(Y, 0), (Z, 1)], (Y, 1)),
        ([(Z, 0), (X, 1)], (Y, 0)),
    ];
    for dirs in dir_combos {
        for (mid1, mid2) in mid_combos {
            shapes.push(TemplateShape { dirs, mid1, mid2 });
        }
    }
    shapes
}

fn try_fit_shape(shape: &TemplateShape) -> Option<TemplateFit> {
    // Canonical representatives across the chamber, corners included.
    // (On the a = pi/4 face only c >= 0 is canonical.)
    let validation: [[f64; 3]; 10] = [
        [0.0, 0.0, 0.0],
        [FRAC_PI_4, 0.0, 0.0],
        [FRAC_PI_4, FRAC_PI_4, FRAC_PI_4],
        [FRAC_PI_4, FRAC_PI_4, 0.0],
        [FRAC_PI_4, 0.3, 0.2],
        [0.7, 0.5, -0.3],
        [0.6, 0.2, 0.1],
        [0.3, 0.3, 0.3],
        [0.4, 0.2, -0.2],
        [0.2, 0.2, -0.2],
    ];
    let bases: [[f64; 3]; 6] = [
        [0.9, 0.8, 1.3],
        [1.1, 0.7, 0.9],
        [0.7, 1.2, 0.8],
        [-0.9, 0.8, 1.3],
        [0.9, -0.8, 1.3],
        [2.0, 1.1, 0.6],
    ];
    'base: for theta0 in bases {
        let abc0 = canonical_of_template(shape, theta0)?;
        // Keep clear of every chamber wall so the finite differences stay
        // on a single fold branch.
        let margin = (FRAC_PI_4 - abc0[0])
            .min(abc0[0] - abc0[1])
            .min(abc0[1] - abc0[2].abs())
            .min(abc0[2].abs());
        if margin < 0.03 {
            continue;
        }
        let h = 1e-5;
        let mut jac = [[0.0; 3]; 3];
        for col in 0..3 {
            let mut tp = theta0;
            let mut tm = theta0;
            tp[col] += h;
            tm[col] -= h;
            let fp = canonical_of_template(shape, tp)?;
            let fm = canonical_of_template(shape, tm)?;
            for row in 0..3 {
                jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        let jinv = match invert3(jac) {
            Some(ji) => ji,
            None => continue,
        };
        let fit = TemplateFit {
            shape: *shape,
            theta0,
            abc0,
            jinv,
        };
        for target in validation {
            let th = fit.angles_for(target);
            let got = match canonical_of_template(shape, th) {
                Some(gg) => gg,
                None => continue 'base,
            };
            let err = (0..3).map(|i| (got[i] - target[i]).abs()).fold(0.0, f64::max);
            if err > 1e-9 {
                continue 'base;
            }
        }
        return Some(fit);
    }
    None
}

fn fit_template() -> Option<TemplateFit> {
    candidate_shapes().iter().find_map(try_fit_shape)
}

fn template_fit() -> &'static TemplateFit {
    static FIT: OnceLock<Option<TemplateFit>> = OnceLock::new();
    FIT.get_or_init(fit_template)
        .as_ref()
        .expect("three-CNOT core template calibration failed")
}

/// Synthesize the decomposition into a circuit of at most 3 CNOTs and 15
/// rotations from {Ry, Rz}, equal to the decomposed unitary up to a global
/// phase. Gate durations are stamped from `times`.
pub fn kak_to_circuit_with_times(d: &KakDecomposition, times: GateTimes) -> Circuit {
    let abc = [
        d.canonical_params.0,
        d.canonical_params.1,
        d.canonical_params.2,
    ];
    let fit = template_fit();
    let theta = fit.angles_for(abc);
    let t_unitary = template_unitary(&fit.shape, theta);
    let td = kak_decompose(&t_unitary)
        .expect("template unitary decomposes");
    let t_abc = [
        td.canonical_params.0,
        td.canonical_params.1,
        td.canonical_params.2,
    ];
    let class_err = (0..3)
        .map(|i| (t_abc[i] - abc[i]).abs())
        .fold(0.0, f64::max);
    assert!(
        class_err < 1e-8,
        "template interaction class deviates by {class_err:.3e}"
    );

    // U = e^{i dphi} (A1 T1† ⊗ A2 T2†) · T · (T3† A3 ⊗ T4† A4).
    let pre0 = td.a3.dagger().matmul(&d.a3);
    let pre1 = td.a4.dagger().matmul(&d.a4);
    let post0 = d.a1.matmul(&td.a1.dagger());
    let post1 = d.a2.matmul(&td.a2.dagger());

    let mut gates: Vec<Gate> = Vec::with_capacity(18);
    let push_local = |gates: &mut Vec<Gate>, u: &ComplexMatrix, qubit: usize| {
        let (t1, t2, t3, _) = euler_zyz(u);
        // Time order: rightmost factor of Rz(t1) Ry(t2) Rz(t3) acts first.
        gates.push(Gate::Rz { qubit, angle: t3 });
        gates.push(Gate::Ry { qubit, angle: t2 });
        gates.push(Gate::Rz { qubit, angle: t1 });
    };
    push_local(&mut gates, &pre0, 0);
    push_local(&mut gates, &pre1, 1);
    gates.extend(template_gates(&fit.shape, theta));
    push_local(&mut gates, &post0, 0);
    push_local(&mut gates, &post1, 1);

    Circuit {
        ops: gates.into_iter().map(|g| times.stamp(g)).collect(),
        meta: None,
    }
}

/// [`kak_to_circuit_with_times`] with the default gate durations.
pub fn kak_to_circuit(d: &KakDecomposition) -> Circuit {
    kak_to_circuit_with_times(d, GateTimes::default())
}
