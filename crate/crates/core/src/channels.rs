//! Echo-channel builders and the density-matrix simulation engine.
//!
//! All builders produce circuits whose noiseless evaluation is the identity
//! up to a global phase: repeated CNOT pairs, Haar-random two-qubit
//! unitaries followed by their compiled inverses, and CNOT pairs twirled by
//! random single-qubit rotations with their adjoints.
//!
//! Noise insertion order per gate: ideal unitary, depolarizing on the
//! gate's support, thermal relaxation on both qubits for the gate
//! duration, then (after CNOTs, if configured) the coherent-error unitary.



use crate::gates::{embed_single_qubit, haar_su2, haar_u4, Gate, GateOp, GateTimes, RngStream, Support};
use crate::kak::{euler_zyz, kak_decompose, kak_to_circuit_with_times};
use crate::linalg::{ComplexMatrix, DensityMatrix};
use crate::noise::{
    apply_kraus, coherent_error_unitary, depolarizing_kraus, readout_confusion, CoherentAttach,
    NoiseModel,
};

/// Which echo channel a circuit implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    CnotEcho,
    RandomEcho,
    TwirledU,
    TwirledAxis,
}

/// Twirl flavor: full Haar-random single-qubit unitaries, or single-axis
/// x/y rotations (fewer gates per correction).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwirlMode {
    GeneralUnitary,
    SingleAxis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitMeta {
    pub kind: ChannelKind,
    pub steps: usize,
    pub seed: u64,
}

/// Ordered list of gates on qubits {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub ops: Vec<GateOp>,
    pub meta: Option<CircuitMeta>,
}

impl Circuit {
    /// Total unitary of the circuit (gates applied in list order).
    pub fn unitary(&self) -> ComplexMatrix {
        let mut u = ComplexMatrix::identity(4);
        for op in &self.ops {
            u = op.gate.embedded().matmul(&u);
        }
        u
    }

    pub fn cnot_count(&self) -> usize {
        self.ops.iter().filter(|op| op.gate.is_cnot()).count()
    }

    /// Number of single-qubit gates (rotations and fixed 1q gates).
    pub fn rotation_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op.gate.support(), Support::Single(_)))
            .count()
    }

    pub fn total_duration(&self) -> f64 {
        self.ops.iter().map(|op| op.duration).sum()
    }
}

/// `2 n_steps` CNOTs with qubit 0 as control; one step is a CNOT pair.
pub fn build_cnot_echo(n_steps: usize, times: GateTimes) -> Circuit {
    build_cnot_echo_with_control(n_steps, 0, times)
}

/// CNOT echo with an explicit control-qubit choice.
pub fn build_cnot_echo_with_control(n_steps: usize, control: usize, times: GateTimes) -> Circuit {
    assert!(control < 2);
    let target = 1 - control;
    let ops = (0..2 * n_steps)
        .map(|_| times.stamp(Gate::Cnot { control, target }))
        .collect();
    Circuit {
        ops,
        meta: Some(CircuitMeta {
            kind: ChannelKind::CnotEcho,
            steps: n_steps,
            seed: 0,
        }),
    }
}

/// How the inverse block of the random echo is compiled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InverseCompilation {
    /// Decompose the adjoint independently, as a transpiler would.
    #[default]
    Kak,
    /// Reverse and invert the forward gate list.
    ReverseGates,
}

/// Echo of `n_steps` Haar-random two-qubit unitaries, each applied and then
/// undone: the step `k` block is the compiled `U_k` followed by the
/// compiled `U_k^dagger`. Every compiled block uses at most 3 CNOTs, so
/// the circuit holds exactly `6 n_steps` CNOTs.
pub fn build_random_echo(n_steps: usize, rng: &RngStream, times: GateTimes) -> Circuit {
    build_random_echo_with(n_steps, rng, times, InverseCompilation::Kak)
}

pub fn build_random_echo_with(
    n_steps: usize,
    rng: &RngStream,
    times: GateTimes,
    inverse: InverseCompilation,
) -> Circuit {
    let mut ops = Vec::new();
    for k in 0..n_steps {
        let mut step_rng = rng.child(k as u64);
        let u = haar_u4(&mut step_rng);
        let forward = kak_to_circuit_with_times(
            &kak_decompose(&u).expect("Haar sample is unitary"),
            times,
        );
        let backward = match inverse {
            InverseCompilation::Kak => kak_to_circuit_with_times(
                &kak_decompose(&u.dagger()).expect("adjoint is unitary"),
                times,
            ),
            InverseCompilation::ReverseGates => invert_gate_list(&forward, times),
        };
        ops.extend(forward.ops);
        ops.extend(backward.ops);
    }
    Circuit {
        ops,
        meta: Some(CircuitMeta {
            kind: ChannelKind::RandomEcho,
            steps: n_steps,
            seed: rng.seed(),
        }),
    }
}

fn invert_gate_list(circuit: &Circuit, times: GateTimes) -> Circuit {
    let ops = circuit
        .ops
        .iter()
        .rev()
        .map(|op| {
            let gate = match &op.gate {
                Gate::Rx { qubit, angle } => Gate::Rx { qubit: *qubit, angle: -angle },
                Gate::Ry { qubit, angle } => Gate::Ry { qubit: *qubit, angle: -angle },
                Gate::Rz { qubit, angle } => Gate::Rz { qubit: *qubit, angle: -angle },
                Gate::H { qubit } => Gate::H { qubit: *qubit },
                Gate::X { qubit } => Gate::X { qubit: *qubit },
                Gate::Cnot { control, target } => Gate::Cnot { control: *control, target: *target },
                Gate::Unitary1q { qubit, matrix } => Gate::Unitary1q {
                    qubit: *qubit,
                    matrix: matrix.dagger(),
                },
                Gate::Unitary2q { matrix } => Gate::Unitary2q { matrix: matrix.dagger() },
            };
            times.stamp(gate)
        })
        .collect();
    Circuit { ops, meta: None }
}

/// Twirled CNOT echo: each step wraps a CNOT pair in random single-qubit
/// rotations and their adjoints, so every step block is the identity in
/// the noiseless case.
///
/// `GeneralUnitary` draws Haar-random unitaries and emits them as ZYZ
/// rotation triples (6 rotations per side per step); `SingleAxis` draws a
/// single Rx or Ry per qubit, which costs fewer gates.
pub fn build_twirled_cnot_echo(
    n_steps: usize,
    mode: TwirlMode,
    rng: &RngStream,
    times: GateTimes,
) -> Circuit {
    let mut ops = Vec::new();
    for k in 0..n_steps {
        let mut step_rng = rng.child(k as u64);
        match mode {
            TwirlMode::GeneralUnitary => {
                let va = haar_su2(&mut step_rng);
                let vb = haar_su2(&mut step_rng);
                push_zyz(&mut ops, &va, 0, times);
                push_zyz(&mut ops, &vb, 1, times);
                ops.push(times.stamp(Gate::Cnot { control: 0, target: 1 }));
                ops.push(times.stamp(Gate::Cnot { control: 0, target: 1 }));
                push_zyz(&mut ops, &va.dagger(), 0, times);
                push_zyz(&mut ops, &vb.dagger(), 1, times);
            }
            TwirlMode::SingleAxis => {
                let axis_rotation = |step_rng: &mut RngStream, qubit: usize| {
                    let angle = step_rng.uniform(0.0, 2.0 * std::f64::consts::PI);
                    let use_x = step_rng.gen_bool(0.5);
                    let gate = if use_x {
                        Gate::Rx { qubit, angle }
                    } else {
                        Gate::Ry { qubit, angle }
                    };
                    let inverse = if use_x {
                        Gate::Rx { qubit, angle: -angle }
                    } else {
                        Gate::Ry { qubit, angle: -angle }
                    };
                    (gate, inverse)
                };
                let (ga, ga_inv) = axis_rotation(&mut step_rng, 0);
                let (gb, gb_inv) = axis_rotation(&mut step_rng, 1);
                ops.push(times.stamp(ga));
                ops.push(times.stamp(gb));
                ops.push(times.stamp(Gate::Cnot { control: 0, target: 1 }));
                ops.push(times.stamp(Gate::Cnot { control: 0, target: 1 }));
                ops.push(times.stamp(ga_inv));
                ops.push(times.stamp(gb_inv));
            }
        }
    }
    Circuit {
        ops,
        meta: Some(CircuitMeta {
            kind: match mode {
                TwirlMode::GeneralUnitary => ChannelKind::TwirledU,
                TwirlMode::SingleAxis => ChannelKind::TwirledAxis,
            },
            steps: n_steps,
            seed: rng.seed(),
        }),
    }
}

fn push_zyz(ops: &mut Vec<GateOp>, u: &ComplexMatrix, qubit: usize, times: GateTimes) {
    let (t1, t2, t3, _) = euler_zyz(u);
    ops.push(times.stamp(Gate::Rz { qubit, angle: t3 }));
    ops.push(times.stamp(Gate::Ry { qubit, angle: t2 }));
    ops.push(times.stamp(Gate::Rz { qubit, angle: t1 }));
}

/// Run a circuit on a two-qubit state, optionally under a noise model.
pub fn simulate(circuit: &Circuit, input: &DensityMatrix, noise: Option<&NoiseModel>) -> DensityMatrix {
    assert_eq!(input.dim(), 4, "simulation state must be two-qubit");
    let mut rho = input.clone();
    for op in &circuit.ops {
        rho = rho.evolve(&op.gate.embedded());
        let Some(nm) = noise else { continue };

        match op.gate.support() {
            Support::Single(q) => {
                if nm.depol_1q > 0.0 {
                    rho = apply_embedded_1q_kraus(&rho, &depol_ops(nm.depol_1q, 1), q);
                }
            }
            Support::Both => {
                if nm.depol_2q > 0.0 {
                    let kraus = depolarizing_kraus(nm.depol_2q, 2).expect("valid probability");
                    rho = apply_kraus(&rho, &kraus).expect("matching dims");
                }
            }
        }

        if op.duration > 0.0 {
            for q in 0..2 {
                let kraus = crate::noise::thermal_relaxation_kraus(nm.t1[q], nm.t2[q], op.duration)
                    .expect("validated noise model");
                let ops: Vec<ComplexMatrix> = kraus.operators().to_vec();
                rho = apply_embedded_1q_kraus(&rho, &ops, q);
            }
        }

        if let Gate::Cnot { control, target } = op.gate {
            if let Some(ce) = &nm.coherent_error {
                let e = coherent_error_unitary(ce);
                let qubits: &[usize] = match ce.attach {
                    CoherentAttach::AfterCnotControl => &[control],
                    CoherentAttach::AfterCnotTarget => &[target],
                    CoherentAttach::AfterCnotBoth => &[0, 1],
                };
                for &q in qubits {
                    rho = rho.evolve(&embed_single_qubit(&e, q));
                }
            }
        }
    }
    rho
}

fn depol_ops(p: f64, nqubits: usize) -> Vec<ComplexMatrix> {
    depolarizing_kraus(p, nqubits)
        .expect("valid probability")
        .operators()
        .to_vec()
}

fn apply_embedded_1q_kraus(rho: &DensityMatrix, kraus_1q: &[ComplexMatrix], qubit: usize) -> DensityMatrix {
    let mut out = ComplexMatrix::zeros(4);
    for k in kraus_1q {
        let ke = embed_single_qubit(k, qubit);
        out = out.add(&ke.matmul(rho.matrix()).matmul(&ke.dagger()));
    }
    DensityMatrix::from_matrix_unchecked(out)
}

/// Measurement axis for the polarization of qubit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementAxis {
    X,
    Y,
    Z,
}

impl MeasurementAxis {
    pub const ALL: [MeasurementAxis; 3] = [MeasurementAxis::X, MeasurementAxis::Y, MeasurementAxis::Z];
}

/// Exact expectation values or finite shot sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureMode {
    Exact,
    Shots(u64),
}

/// Polarization of qubit 0 along an axis: reduce to qubit 0, form the
/// outcome distribution along the axis, pass it through the readout
/// confusion if noise is present, and either return `p+ - p-` exactly or
/// estimate it from binomial shot counts.
pub fn measure_polarization(
    rho: &DensityMatrix,
    axis: MeasurementAxis,
    mode: MeasureMode,
    noise: Option<&NoiseModel>,
    rng: &mut RngStream,
) -> f64 {
    let reduced = rho.trace_out_ancilla().expect("two-qubit state");
    let r = reduced.bloch().expect("single-qubit state");
    let polarization = match axis {
        MeasurementAxis::X => r.x,
        MeasurementAxis::Y => r.y,
        MeasurementAxis::Z => r.z,
    };
    let mut p_plus = ((1.0 + polarization) / 2.0).clamp(0.0, 1.0);
    if let Some(nm) = noise {
        let confused = readout_confusion([p_plus, 1.0 - p_plus], nm.readout_p01[0], nm.readout_p10[0])
            .expect("valid distribution");
        p_plus = confused[0];
    }
    match mode {
        MeasureMode::Exact => 2.0 * p_plus - 1.0,
        MeasureMode::Shots(shots) => {
            assert!(shots >= 1, "need at least one shot");
            let n_plus = rng.binomial(shots, p_plus);
            (2.0 * n_plus as f64 - shots as f64) / shots as f64
        }
    }
}
