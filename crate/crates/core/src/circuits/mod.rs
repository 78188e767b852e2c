//! Gate-level circuit IR with dense verification, text I/O, compilers for the
//! phase separator and complete mixer, and W-state preparation.

mod compile;
mod lower;
mod text;
mod wstate;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, re, CMatrix, DenseUnitary, UNITARY_TOL};
use crate::par::{self, Mode};
use crate::statesim::StateVector;

pub use compile::{
    compile_complete_mixer, fused_xy_swap_matrix, layout_permutation, pauli_zz_terms, swap_network_for_terms,
    swap_network_phase_separator,
    CompiledMixer, CompiledPhaseSeparator, IsingTerms,
};
pub use lower::{lower, zyz_decompose};
pub use text::{eval_angle, parse_circuit};
pub use wstate::{
    biased_hadamard_wprep, equal_population_time, gh_for_amplitudes, ring_transfer_fidelity,
    ring_transfer_fidelity_dense, wstate_recursive_circuit, wstate_reference_listing,
    wstate_sequential_circuit, PhaseReport, REFERENCE_LISTING,
};

pub const MAX_UNITARY_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    X,
    Ry(f64),
    Rz(f64),
    Phase(f64),
    Cnot,
    Swap,
    /// exp(−iθ Z⊗Z).
    ZzPhase(f64),
    /// exp(−iθ(XX + YY)/2).
    Xy(f64),
    /// Xy(θ)·SWAP.
    XyFused(f64),
    /// C†XC with C = [[u, −v*], [v, u*]].
    GeneralizedHadamard { u: Complex64, v: Complex64 },
    /// Acts with the inner gate when the first target is |1⟩.
    Controlled(Box<GateKind>),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::X | GateKind::Ry(_) | GateKind::Rz(_) | GateKind::Phase(_) => 1,
            GateKind::GeneralizedHadamard { .. } => 1,
            GateKind::Cnot | GateKind::Swap | GateKind::ZzPhase(_) | GateKind::Xy(_) | GateKind::XyFused(_) => 2,
            GateKind::Controlled(inner) => 1 + inner.arity(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            GateKind::X => "X".into(),
            GateKind::Ry(_) => "RY".into(),
            GateKind::Rz(_) => "RZ".into(),
            GateKind::Phase(_) => "PHASE".into(),
            GateKind::Cnot => "CNOT".into(),
            GateKind::Swap => "SWAP".into(),
            GateKind::ZzPhase(_) => "ZZ".into(),
            GateKind::Xy(_) => "XY".into(),
            GateKind::XyFused(_) => "XYSWAP".into(),
            GateKind::GeneralizedHadamard { .. } => "GH".into(),
            GateKind::Controlled(inner) => format!("CONTROLLED {}", inner.name()),
        }
    }

    fn parameters(&self) -> Vec<f64> {
        match self {
            GateKind::Ry(t) | GateKind::Rz(t) | GateKind::Phase(t) => vec![*t],
            GateKind::ZzPhase(t) | GateKind::Xy(t) | GateKind::XyFused(t) => vec![*t],
            GateKind::GeneralizedHadamard { u, v } => vec![u.re, u.im, v.re, v.im],
            GateKind::Controlled(inner) => inner.parameters(),
            _ => vec![],
        }
    }

    /// Dense matrix; for multi-qubit gates the first target is the most significant bit.
    pub fn matrix(&self) -> CMatrix {
        let z = c(0.0, 0.0);
        let one = re(1.0);
        match self {
            GateKind::X => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
            GateKind::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                CMatrix::from_row_slice(2, 2, &[re(co), re(-s), re(s), re(co)])
            }
            GateKind::Rz(t) => CMatrix::from_row_slice(
                2,
                2,
                &[Complex64::from_polar(1.0, -t / 2.0), z, z, Complex64::from_polar(1.0, t / 2.0)],
            ),
            GateKind::Phase(t) => CMatrix::from_row_slice(2, 2, &[one, z, z, Complex64::from_polar(1.0, *t)]),
            GateKind::Cnot => permutation_matrix(&[0, 1, 3, 2]),
            GateKind::Swap => permutation_matrix(&[0, 2, 1, 3]),
            GateKind::ZzPhase(t) => {
                let (minus, plus) = (Complex64::from_polar(1.0, -t), Complex64::from_polar(1.0, *t));
                CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![minus, plus, plus, minus]))
            }
            GateKind::Xy(t) => {
                let (s, co) = t.sin_cos();
                let mut m = CMatrix::identity(4, 4);
                m[(1, 1)] = re(co);
                m[(2, 2)] = re(co);
                m[(1, 2)] = c(0.0, -s);
                m[(2, 1)] = c(0.0, -s);
                m
            }
            GateKind::XyFused(t) => GateKind::Xy(*t).matrix() * GateKind::Swap.matrix(),
            GateKind::GeneralizedHadamard { u, v } => {
                let d = u.conj() * v + u * v.conj();
                CMatrix::from_row_slice(2, 2, &[d, u.conj().powu(2) - v.conj().powu(2), u * u - v * v, -d])
            }
            GateKind::Controlled(inner) => {
                let m = inner.matrix();
                let k = m.nrows();
                let mut out = CMatrix::identity(2 * k, 2 * k);
                out.view_mut((k, k), (k, k)).copy_from(&m);
                out
            }
        }
    }
}

fn permutation_matrix(images: &[usize]) -> CMatrix {
    let n = images.len();
    CMatrix::from_fn(n, n, |r, col| if images[col] == r { re(1.0) } else { c(0.0, 0.0) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubits: usize) -> Self {
        Circuit {
            qubits,
            gates: Vec::new(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after validating arity, targets and parameters.
    pub fn push(&mut self, kind: GateKind, targets: &[usize]) -> Result<()> {
        if kind.arity() != targets.len() {
            return Err(Error::arg(format!(
                "{} acts on {} qubits, got targets {targets:?}",
                kind.name(),
                kind.arity()
            )));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.qubits {
                return Err(Error::arg(format!("target {t} out of range for {} qubits", self.qubits)));
            }
            if targets[..i].contains(&t) {
                return Err(Error::arg(format!("repeated target {t}")));
            }
        }
        if kind.parameters().iter().any(|p| !p.is_finite()) {
            return Err(Error::arg(format!("non-finite parameter in {}", kind.name())));
        }
        if let GateKind::GeneralizedHadamard { .. } = innermost(&kind) {
            let dev = crate::linalg::unitarity_deviation(&innermost(&kind).matrix());
            if dev > UNITARY_TOL {
                return Err(Error::NotUnitary(dev));
            }
        }
        self.gates.push(Gate {
            kind,
            targets: targets.to_vec(),
        });
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.qubits > self.qubits {
            return Err(Error::arg("appended circuit has more qubits"));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Greedy ASAP layering: each gate goes one layer after the latest gate
    /// sharing a qubit with it. Returns gate indices per layer.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        let mut front = vec![0usize; self.qubits];
        let mut layers: Vec<Vec<usize>> = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            let layer = g.targets.iter().map(|&q| front[q]).max().unwrap_or(0);
            if layer == layers.len() {
                layers.push(Vec::new());
            }
            layers[layer].push(i);
            for &q in &g.targets {
                front[q] = layer + 1;
            }
        }
        layers
    }

    pub fn depth(&self) -> usize {
        self.layers().len()
    }

    /// Gate counts keyed by name.
    pub fn gate_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.gates {
            *counts.entry(g.kind.name()).or_insert(0) += 1;
        }
        counts
    }

    /// CNOT count after lowering to {CNOT, RZ, RY, X}.
    pub fn cnot_count(&self) -> Result<usize> {
        Ok(lower(self)?.gate_counts().get("CNOT").copied().unwrap_or(0))
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.space().qubits() != self.qubits {
            return Err(Error::SpaceMismatch {
                expected: format!("{} qubits", self.qubits),
                actual: format!("{} qubits", state.space().qubits()),
            });
        }
        for g in &self.gates {
            state.apply_gate(&g.kind.matrix(), &g.targets)?;
        }
        Ok(())
    }

    /// Runs the circuit on |0…0⟩.
    pub fn simulate(&self) -> Result<StateVector> {
        let mut state = StateVector::zero_register(self.qubits)?;
        self.apply(&mut state)?;
        Ok(state)
    }

    pub fn to_text(&self) -> String {
        text::write_circuit(self)
    }
}

fn innermost(kind: &GateKind) -> &GateKind {
    match kind {
        GateKind::Controlled(inner) => innermost(inner),
        other => other,
    }
}

/// Dense unitary of the whole circuit, built column by column.
pub fn circuit_to_unitary(circuit: &Circuit) -> Result<DenseUnitary> {
    circuit_to_unitary_with(circuit, Mode::default())
}

pub fn circuit_to_unitary_with(circuit: &Circuit, mode: Mode) -> Result<DenseUnitary> {
    let q = circuit.qubits;
    if q > MAX_UNITARY_QUBITS {
        return Err(Error::resource(format!(
            "dense unitary of {q} qubits exceeds the cap of {MAX_UNITARY_QUBITS}"
        )));
    }
    let dim = 1usize << q;
    let space = crate::encoding::SpaceDescriptor::full_binary(q, 1)?;
    let columns = par::try_map(mode, (0..dim).collect(), |col| {
        let mut state = StateVector::basis(space, col)?;
        circuit.apply(&mut state)?;
        Ok::<_, Error>(state.amplitudes().to_vec())
    })?;
    let m = CMatrix::from_fn(dim, dim, |r, col| columns[col][r]);
    DenseUnitary::new(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConnectivityKind {
    AllToAll,
    Line,
    Ring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Connectivity {
    pub kind: ConnectivityKind,
    pub qubits: usize,
}

impl Connectivity {
    pub fn new(kind: ConnectivityKind, qubits: usize) -> Self {
        Connectivity { kind, qubits }
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        if a >= self.qubits || b >= self.qubits || a == b {
            return false;
        }
        let gap = a.abs_diff(b);
        match self.kind {
            ConnectivityKind::AllToAll => true,
            ConnectivityKind::Line => gap == 1,
            ConnectivityKind::Ring => gap == 1 || gap == self.qubits - 1,
        }
    }

    /// Checks that every multi-qubit gate acts on pairwise adjacent qubits.
    pub fn supports(&self, circuit: &Circuit) -> bool {
        circuit.gates().iter().all(|g| {
            g.targets
                .iter()
                .enumerate()
                .all(|(i, &a)| g.targets[i + 1..].iter().all(|&b| self.adjacent(a, b)))
        })
    }
}
