//! Compilers: SWAP-network phase separator and partitioned complete mixer.

use std::collections::BTreeMap;

use super::{circuit_to_unitary, Circuit, Connectivity, ConnectivityKind, GateKind};
use crate::encoding::{build_phase_separator_diagonal, ColoringProblem, DiagonalOperator, SpaceKind};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DenseUnitary};
use crate::mixers::binary_partition_pairs;

/// Xy(θ)·SWAP: corners 1, middle block [[−i·sinθ, cosθ], [cosθ, −i·sinθ]].
pub fn fused_xy_swap_matrix(theta: f64) -> DenseUnitary {
    DenseUnitary::new(GateKind::XyFused(theta).matrix()).expect("fused gate is unitary")
}

/// A diagonal written as constant + Σ h_q Z_q + Σ J_ab Z_a Z_b.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingTerms {
    pub qubits: usize,
    pub constant: f64,
    pub fields: Vec<f64>,
    pub couplings: BTreeMap<(usize, usize), f64>,
}

/// Walsh–Hadamard expansion of a diagonal into Z-strings; fails if any term
/// beyond two-body exceeds 1e-9.
pub fn pauli_zz_terms(diag: &DiagonalOperator) -> Result<IsingTerms> {
    let space = diag.space();
    space.ensure_kind(SpaceKind::FullBinary)?;
    let q = space.qubits();
    let mut coeffs = diag.values().to_vec();
    let mut half = 1;
    while half < coeffs.len() {
        for block in (0..coeffs.len()).step_by(2 * half) {
            for i in block..block + half {
                let (a, b) = (coeffs[i], coeffs[i + half]);
                coeffs[i] = a + b;
                coeffs[i + half] = a - b;
            }
        }
        half *= 2;
    }
    let norm = coeffs.len() as f64;
    coeffs.iter_mut().for_each(|x| *x /= norm);
    let mut terms = IsingTerms {
        qubits: q,
        constant: coeffs[0],
        fields: vec![0.0; q],
        couplings: BTreeMap::new(),
    };
    for (mask, &value) in coeffs.iter().enumerate().skip(1) {
        if value.abs() < 1e-12 {
            continue;
        }
        let bits: Vec<usize> = (0..q).filter(|&b| mask >> b & 1 == 1).collect();
        match bits.as_slice() {
            [a] => terms.fields[*a] = value,
            [a, b] => {
                terms.couplings.insert((*a, *b), value);
            }
            _ if value.abs() < 1e-9 => {}
            _ => {
                return Err(Error::Compile(format!(
                    "diagonal has a {}-body Z term; only one- and two-body terms compile",
                    bits.len()
                )))
            }
        }
    }
    Ok(terms)
}

#[derive(Debug, Clone)]
pub struct CompiledPhaseSeparator {
    pub circuit: Circuit,
    /// Logical pairs met in each transposition layer.
    pub swap_layers: Vec<Vec<(usize, usize)>>,
    /// Logical qubit held by each physical position at the end.
    pub final_order: Vec<usize>,
}

impl CompiledPhaseSeparator {
    pub fn unitary(&self) -> Result<DenseUnitary> {
        circuit_to_unitary(&self.circuit)
    }
}

/// exp(−iγH_PS) on a line by odd–even transposition: every pair of logical
/// qubits becomes adjacent exactly once, where a fused SWAP+ZZ applies their
/// coupling. The final layout is the reversal of the initial one.
pub fn swap_network_phase_separator(
    problem: &ColoringProblem,
    alpha: f64,
    gamma: f64,
    conn: Connectivity,
) -> Result<CompiledPhaseSeparator> {
    let diag = build_phase_separator_diagonal(problem, alpha, SpaceKind::FullBinary)?;
    swap_network_for_terms(&pauli_zz_terms(&diag)?, gamma, conn)
}

pub fn swap_network_for_terms(terms: &IsingTerms, gamma: f64, conn: Connectivity) -> Result<CompiledPhaseSeparator> {
    let q = terms.qubits;
    if conn.kind != ConnectivityKind::Line || conn.qubits != q {
        return Err(Error::Compile(format!(
            "the swap network needs a line of {q} qubits, got {:?} with {} qubits",
            conn.kind, conn.qubits
        )));
    }
    let mut circuit = Circuit::new(q);
    for (qubit, &h) in terms.fields.iter().enumerate() {
        if h != 0.0 {
            circuit.push(GateKind::Rz(2.0 * gamma * h), &[qubit])?;
        }
    }
    let mut at: Vec<usize> = (0..q).collect();
    let mut swap_layers = Vec::with_capacity(q);
    for layer in 0..q {
        let mut met = Vec::new();
        for i in (layer % 2..q.saturating_sub(1)).step_by(2) {
            let (la, lb) = (at[i], at[i + 1]);
            let key = (la.min(lb), la.max(lb));
            match terms.couplings.get(&key) {
                Some(&j) => {
                    // SWAP·exp(−iθZZ): CX(a,b), RZ_b(2θ), CX(b,a), CX(a,b)
                    circuit.push(GateKind::Cnot, &[i, i + 1])?;
                    circuit.push(GateKind::Rz(2.0 * gamma * j), &[i + 1])?;
                    circuit.push(GateKind::Cnot, &[i + 1, i])?;
                    circuit.push(GateKind::Cnot, &[i, i + 1])?;
                }
                None => circuit.push(GateKind::Swap, &[i, i + 1])?,
            }
            at.swap(i, i + 1);
            met.push(key);
        }
        swap_layers.push(met);
    }
    Ok(CompiledPhaseSeparator {
        circuit,
        swap_layers,
        final_order: at,
    })
}

/// Permutation unitary that moves logical qubit `order[p]` to physical position `p`.
pub fn layout_permutation(order: &[usize]) -> CMatrix {
    let q = order.len();
    let dim = 1usize << q;
    let image = |b: usize| (0..q).fold(0, |acc, p| acc | (b >> order[p] & 1) << p);
    CMatrix::from_fn(dim, dim, |r, col| {
        if image(col) == r {
            crate::linalg::re(1.0)
        } else {
            crate::linalg::c(0.0, 0.0)
        }
    })
}

#[derive(Debug, Clone)]
pub struct CompiledMixer {
    pub circuit: Circuit,
    /// Logical color held by each physical qubit at the end.
    pub final_order: Vec<usize>,
    /// Partition masks in the order they are applied.
    pub mask_order: Vec<usize>,
}

impl CompiledMixer {
    /// κ×κ action on the single-excitation subspace in logical labels.
    pub fn restricted_action(&self) -> Result<CMatrix> {
        let u = circuit_to_unitary(&self.circuit)?;
        let kappa = self.final_order.len();
        let mut position = vec![0; kappa];
        for (p, &l) in self.final_order.iter().enumerate() {
            position[l] = p;
        }
        Ok(CMatrix::from_fn(kappa, kappa, |a, b| u.matrix()[(1 << position[a], 1 << b)]))
    }
}

/// Complete-graph XY mixer exp(−iβΣ_pairs(XX+YY)) on one κ-qubit register,
/// as κ−1 layers of pair exponentials following the binary-flip partitions.
/// Supported: all-to-all for κ a power of two, and a ring of four qubits.
pub fn compile_complete_mixer(kappa: usize, beta: f64, conn: Connectivity) -> Result<CompiledMixer> {
    let unsupported = || {
        Error::Compile(format!(
            "no complete-mixer schedule for κ = {kappa} on {:?}; supported: AllToAll with κ a power of two, Ring with κ = 4",
            conn.kind
        ))
    };
    if conn.qubits != kappa {
        return Err(Error::Compile(format!("connectivity has {} qubits, κ = {kappa}", conn.qubits)));
    }
    let partitions = binary_partition_pairs(kappa).map_err(|_| unsupported())?;
    let theta = 2.0 * beta;
    let mut circuit = Circuit::new(kappa);
    match conn.kind {
        ConnectivityKind::AllToAll => {
            for pairs in &partitions {
                for &(a, b) in pairs {
                    circuit.push(GateKind::Xy(theta), &[a, b])?;
                }
            }
            Ok(CompiledMixer {
                circuit,
                final_order: (0..kappa).collect(),
                mask_order: (1..kappa).collect(),
            })
        }
        ConnectivityKind::Ring if kappa == 4 => {
            // masks 1 and 3 are ring-adjacent; fusing a SWAP into the (1,2)
            // exchange of mask 3 brings mask 2's pairs onto ring edges
            circuit.push(GateKind::Xy(theta), &[0, 1])?;
            circuit.push(GateKind::Xy(theta), &[2, 3])?;
            circuit.push(GateKind::Xy(theta), &[0, 3])?;
            circuit.push(GateKind::XyFused(theta), &[1, 2])?;
            circuit.push(GateKind::Xy(theta), &[0, 1])?;
            circuit.push(GateKind::Xy(theta), &[2, 3])?;
            Ok(CompiledMixer {
                circuit,
                final_order: vec![0, 2, 1, 3],
                mask_order: vec![1, 3, 2],
            })
        }
        _ => Err(unsupported()),
    }
}
