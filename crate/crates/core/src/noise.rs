//! Incoherent noise channels (thermal relaxation, depolarizing, readout
//! error), coherent-error injection, and noise-model configuration files.
//!
//! Gate error rates map to depolarizing channels appended after the ideal
//! gate, with thermal relaxation applied to both qubits for the gate
//! duration. Readout error acts classically on measurement outcome
//! distributions. The optional coherent error is a fixed small unitary
//! rotation attached after CNOT gates; it is an explicitly labeled
//! injection knob, not a hardware claim.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, DensityMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("failed to read noise config: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse noise config: {0}")]
    Parse(String),
    #[error("invalid noise model: field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("Kraus set is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("dimension mismatch: state is {state}x{state}, Kraus operators are {kraus}x{kraus}")]
    DimensionMismatch { state: usize, kraus: usize },
}

/// Where the injected coherent-error unitary attaches after a CNOT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherentAttach {
    AfterCnotControl,
    AfterCnotTarget,
    AfterCnotBoth,
}

/// Coherent-error injection: `exp(-i epsilon (axis . sigma) / 2)` applied
/// after CNOTs per the attach mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentError {
    pub epsilon: f64,
    pub axis: [f64; 3],
    pub attach: CoherentAttach,
}

/// Noise parameters for the two-qubit simulation. Times are in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub t1: [f64; 2],
    pub t2: [f64; 2],
    pub gate_time_1q: f64,
    pub gate_time_2q: f64,
    pub depol_1q: f64,
    pub depol_2q: f64,
    pub readout_p01: [f64; 2],
    pub readout_p10: [f64; 2],
    pub coherent_error: Option<CoherentError>,
}

impl NoiseModel {
    /// A no-op model: effectively infinite coherence times and zero error
    /// probabilities. Useful as the base for pure coherent-error injection.
    pub fn noiseless() -> Self {
        let times = crate::gates::GateTimes::default();
        Self {
            t1: [1e9; 2],
            t2: [1e9; 2],
            gate_time_1q: times.single,
            gate_time_2q: times.cnot,
            depol_1q: 0.0,
            depol_2q: 0.0,
            readout_p01: [0.0; 2],
            readout_p10: [0.0; 2],
            coherent_error: None,
        }
    }

    /// Gate durations carried by this model, for stamping circuits.
    pub fn gate_times(&self) -> crate::gates::GateTimes {
        crate::gates::GateTimes {
            single: self.gate_time_1q,
            cnot: self.gate_time_2q,
        }
    }

    /// Check physicality: `t2 <= 2 t1` per qubit, probabilities in [0, 1],
    /// unit coherent axis.
    pub fn validate(&self) -> Result<(), NoiseError> {
        for q in 0..2 {
            if self.t1[q] <= 0.0 {
                return Err(NoiseError::Invalid {
                    field: format!("t1_us[{q}]"),
                    reason: "must be positive".into(),
                });
            }
            if self.t2[q] <= 0.0 {
                return Err(NoiseError::Invalid {
                    field: format!("t2_us[{q}]"),
                    reason: "must be positive".into(),
                });
            }
            if self.t2[q] > 2.0 * self.t1[q] + 1e-15 {
                return Err(NoiseError::Invalid {
                    field: format!("t2_us[{q}]"),
                    reason: format!(
                        "t2 = {} exceeds 2*t1 = {} (unphysical)",
                        self.t2[q],
                        2.0 * self.t1[q]
                    ),
                });
            }
        }
        for (name, p) in [("depol_1q", self.depol_1q), ("depol_2q", self.depol_2q)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(NoiseError::Invalid {
                    field: name.into(),
                    reason: format!("probability {p} outside [0, 1]"),
                });
            }
        }
        for q in 0..2 {
            for (name, p) in [
                (format!("readout_p01[{q}]"), self.readout_p01[q]),
                (format!("readout_p10[{q}]"), self.readout_p10[q]),
            ] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(NoiseError::Invalid {
                        field: name,
                        reason: format!("probability {p} outside [0, 1]"),
                    });
                }
            }
        }
        if let Some(ce) = &self.coherent_error {
            if ce.epsilon < 0.0 {
                return Err(NoiseError::Invalid {
                    field: "coherent_error.epsilon_rad".into(),
                    reason: "must be non-negative".into(),
                });
            }
            let norm =
                (ce.axis[0].powi(2) + ce.axis[1].powi(2) + ce.axis[2].powi(2)).sqrt();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(NoiseError::Invalid {
                    field: "coherent_error.axis".into(),
                    reason: format!("axis norm {norm} is not 1"),
                });
            }
        }
        Ok(())
    }
}

/// A set of Kraus operators with `sum K_i^dagger K_i = I` within 1e-10.
#[derive(Debug, Clone)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self, NoiseError> {
        assert!(!operators.is_empty(), "a Kraus set needs an operator");
        let dim = operators[0].dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for k in &operators {
            assert_eq!(k.dim(), dim, "mixed dimensions in Kraus set");
            sum = sum.add(&k.dagger().matmul(k));
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if dev > 1e-10 {
            return Err(NoiseError::NotTracePreserving(dev));
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }
}

/// Apply a Kraus set: `rho -> sum K_i rho K_i^dagger`.
pub fn apply_kraus(rho: &DensityMatrix, kraus: &KrausSet) -> Result<DensityMatrix, NoiseError> {
    if rho.dim() != kraus.dim() {
        return Err(NoiseError::DimensionMismatch {
            state: rho.dim(),
            kraus: kraus.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(rho.dim());
    for k in kraus.operators() {
        out = out.add(&k.matmul(rho.matrix()).matmul(&k.dagger()));
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Combined amplitude-damping and pure-dephasing channel for an idle (or
/// gate-long) interval. Zero temperature: the fixed point is `|0><0|`.
///
/// The damping parameter is `gamma = 1 - exp(-duration/t1)` and the pure
/// dephasing rate is `1/t_phi = 1/t2 - 1/(2 t1)`, so that off-diagonals
/// decay by exactly `exp(-duration/t2)` overall.
pub fn thermal_relaxation_kraus(t1: f64, t2: f64, duration: f64) -> Result<KrausSet, NoiseError> {
    if t2 > 2.0 * t1 + 1e-15 {
        return Err(NoiseError::Invalid {
            field: "t2".into(),
            reason: format!("t2 = {t2} exceeds 2*t1 = {} (unphysical)", 2.0 * t1),
        });
    }
    if duration < 0.0 {
        return Err(NoiseError::Invalid {
            field: "duration".into(),
            reason: "must be non-negative".into(),
        });
    }
    let gamma = 1.0 - (-duration / t1).exp();
    let inv_t_phi = 1.0 / t2 - 1.0 / (2.0 * t1);
    // Phase-flip probability giving off-diagonal factor exp(-duration/t_phi).
    let p_flip = (1.0 - (-duration * inv_t_phi.max(0.0)).exp()) / 2.0;

    let damp = [
        ComplexMatrix::new(
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)],
        ),
        ComplexMatrix::new(
            2,
            vec![c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ),
    ];
    let flip = [
        ComplexMatrix::identity(2).scale(c((1.0 - p_flip).sqrt(), 0.0)),
        ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).scale(c(p_flip.sqrt(), 0.0)),
    ];

    let mut ops = Vec::new();
    for f in &flip {
        for d in &damp {
            let k = f.matmul(d);
            if k.frobenius_norm() > 1e-15 {
                ops.push(k);
            }
        }
    }
    KrausSet::new(ops)
}

/// Depolarizing channel `rho -> (1 - p) rho + p I / 2^n tr(rho)`.
pub fn depolarizing_kraus(p: f64, nqubits: usize) -> Result<KrausSet, NoiseError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NoiseError::Invalid {
            field: "p".into(),
            reason: format!("probability {p} outside [0, 1]"),
        });
    }
    assert!(nqubits == 1 || nqubits == 2, "1 or 2 qubits only");
    let paulis_1q = [
        ComplexMatrix::identity(2),
        crate::gates::pauli_x(),
        crate::gates::pauli_y(),
        crate::gates::pauli_z(),
    ];
    let d = 4.0f64.powi(nqubits as i32);
    let mut ops = Vec::new();
    let id_weight = (1.0 - p + p / d).sqrt();
    let pauli_weight = (p / d).sqrt();
    if nqubits == 1 {
        for (i, sigma) in paulis_1q.iter().enumerate() {
            let w = if i == 0 { id_weight } else { pauli_weight };
            if w > 1e-15 {
                ops.push(sigma.scale(c(w, 0.0)));
            }
        }
    } else {
        for (i, s1) in paulis_1q.iter().enumerate() {
            for (j, s2) in paulis_1q.iter().enumerate() {
                let w = if i == 0 && j == 0 { id_weight } else { pauli_weight };
                if w > 1e-15 {
                    ops.push(s1.kron(s2).scale(c(w, 0.0)));
                }
            }
        }
    }
    KrausSet::new(ops)
}

/// The coherent-error unitary `exp(-i epsilon (axis . sigma) / 2)`.
pub fn coherent_error_unitary(cfg: &CoherentError) -> ComplexMatrix {
    let [nx, ny, nz] = cfg.axis;
    let half = cfg.epsilon / 2.0;
    let (cos, sin) = (half.cos(), half.sin());
    // cos(e/2) I - i sin(e/2) (n . sigma)
    ComplexMatrix::new(
        2,
        vec![
            c(cos, -sin * nz),
            c(-sin * ny, -sin * nx),
            c(sin * ny, -sin * nx),
            c(cos, sin * nz),
        ],
    )
}

/// Push a single-qubit outcome distribution `(p0, p1)` through the
/// classical readout confusion matrix.
///
/// `p01` is P(read 1 | prepared 0) and `p10` is P(read 0 | prepared 1).
pub fn readout_confusion(
    probabilities: [f64; 2],
    p01: f64,
    p10: f64,
) -> Result<[f64; 2], NoiseError> {
    let total = probabilities[0] + probabilities[1];
    if (total - 1.0).abs() > 1e-9 || probabilities.iter().any(|p| *p < -1e-12) {
        return Err(NoiseError::Invalid {
            field: "probabilities".into(),
            reason: format!("not a distribution: {probabilities:?}"),
        });
    }
    let [p0, p1] = probabilities;
    Ok([
        (1.0 - p01) * p0 + p10 * p1,
        p01 * p0 + (1.0 - p10) * p1,
    ])
}

// ---------------------------------------------------------------------------
// Configuration file
// ---------------------------------------------------------------------------

fn default_gate_time_1q_ns() -> f64 {
    35.0
}
fn default_gate_time_2q_ns() -> f64 {
    300.0
}
fn default_readout() -> Vec<f64> {
    vec![0.0, 0.0]
}

#[derive(Debug, Serialize, Deserialize)]
struct CoherentErrorConfig {
    epsilon_rad: f64,
    axis: [f64; 3],
    #[serde(default = "default_attach")]
    attach: CoherentAttach,
}

fn default_attach() -> CoherentAttach {
    CoherentAttach::AfterCnotBoth
}

/// On-disk schema. Units are embedded in the field names (microseconds and
/// nanoseconds); the loader converts to seconds.
#[derive(Debug, Serialize, Deserialize)]
struct NoiseModelConfig {
    t1_us: Vec<f64>,
    t2_us: Vec<f64>,
    #[serde(default = "default_gate_time_1q_ns")]
    gate_time_1q_ns: f64,
    #[serde(default = "default_gate_time_2q_ns")]
    gate_time_2q_ns: f64,
    #[serde(default)]
    depol_1q: f64,
    #[serde(default)]
    depol_2q: f64,
    #[serde(default = "default_readout")]
    readout_p01: Vec<f64>,
    #[serde(default = "default_readout")]
    readout_p10: Vec<f64>,
    #[serde(default)]
    coherent_error: Option<CoherentErrorConfig>,
}

fn per_qubit(field: &str, values: &[f64]) -> Result<[f64; 2], NoiseError> {
    match values {
        [single] => Ok([*single, *single]),
        [a, b] => Ok([*a, *b]),
        other => Err(NoiseError::Invalid {
            field: field.into(),
            reason: format!("expected 1 or 2 per-qubit entries, got {}", other.len()),
        }),
    }
}

/// Parse a noise-model config from TOML text.
pub fn parse_noise_model(text: &str) -> Result<NoiseModel, NoiseError> {
    let cfg: NoiseModelConfig =
        toml::from_str(text).map_err(|e| NoiseError::Parse(e.to_string()))?;
    let t1 = per_qubit("t1_us", &cfg.t1_us)?;
    let t2 = per_qubit("t2_us", &cfg.t2_us)?;
    let model = NoiseModel {
        t1: [t1[0] * 1e-6, t1[1] * 1e-6],
        t2: [t2[0] * 1e-6, t2[1] * 1e-6],
        gate_time_1q: cfg.gate_time_1q_ns * 1e-9,
        gate_time_2q: cfg.gate_time_2q_ns * 1e-9,
        depol_1q: cfg.depol_1q,
        depol_2q: cfg.depol_2q,
        readout_p01: per_qubit("readout_p01", &cfg.readout_p01)?,
        readout_p10: per_qubit("readout_p10", &cfg.readout_p10)?,
        coherent_error: cfg.coherent_error.map(|ce| CoherentError {
            epsilon: ce.epsilon_rad,
            axis: ce.axis,
            attach: ce.attach,
        }),
    };
    model.validate()?;
    Ok(model)
}

/// Load and validate a noise model from a TOML file.
pub fn load_noise_model<P: AsRef<Path>>(path: P) -> Result<NoiseModel, NoiseError> {
    let text = std::fs::read_to_string(path)?;
    parse_noise_model(&text)
}
