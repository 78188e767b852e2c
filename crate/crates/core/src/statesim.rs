//! Complex state vectors over the full binary or the feasible space.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{one_hot_bits, ColoringProblem, DiagonalOperator, SpaceDescriptor, SpaceKind};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DenseUnitary};

pub use crate::linalg::expm_hermitian;

pub const NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    WState,
    ClassicalColoring(Vec<usize>),
    PlusAll,
    BasisString(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: SpaceDescriptor,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(space: SpaceDescriptor, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != space.dimension {
            return Err(Error::SpaceMismatch {
                expected: format!("{} amplitudes", space.dimension),
                actual: format!("{} amplitudes", amps.len()),
            });
        }
        let state = StateVector { space, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::arg(format!("state norm² is {norm}, expected 1")));
        }
        Ok(state)
    }

    pub fn basis(space: SpaceDescriptor, index: usize) -> Result<Self> {
        if index >= space.dimension {
            return Err(Error::arg(format!("basis index {index} ≥ dimension {}", space.dimension)));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); space.dimension];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { space, amps })
    }

    /// |0…0⟩ on a bare register of `qubits` qubits.
    pub fn zero_register(qubits: usize) -> Result<Self> {
        StateVector::basis(SpaceDescriptor::full_binary(qubits, 1)?, 0)
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.space.ensure_same(&other.space)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// |⟨self|other⟩|², insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// a_i ← e^{−iγ·d_i}·a_i.
    pub fn apply_diagonal_phase(&mut self, diag: &DiagonalOperator, gamma: f64) -> Result<()> {
        self.space.ensure_same(diag.space())?;
        for (a, &d) in self.amps.iter_mut().zip(diag.values()) {
            *a *= Complex64::from_polar(1.0, -gamma * d);
        }
        Ok(())
    }

    /// Applies a κ×κ unitary to the color digit of node `v` in the feasible space.
    pub fn apply_node_unitary(&mut self, v: usize, u: &DenseUnitary) -> Result<()> {
        self.space.ensure_kind(SpaceKind::Feasible)?;
        let kappa = self.space.kappa;
        if u.dim() != kappa {
            return Err(Error::arg(format!("node unitary is {0}×{0}, expected κ = {kappa}", u.dim())));
        }
        if v >= self.space.n {
            return Err(Error::arg(format!("node {v} out of range")));
        }
        let m = u.matrix();
        let row_major: Vec<Complex64> = (0..kappa * kappa).map(|k| m[(k / kappa, k % kappa)]).collect();
        self.apply_node_matrix_unchecked(v, &row_major);
        Ok(())
    }

    /// Strided κ×κ transform on digit `v` without validation; `u` is row-major.
    pub(crate) fn apply_node_matrix_unchecked(&mut self, v: usize, u: &[Complex64]) {
        let (n, kappa) = (self.space.n, self.space.kappa);
        let stride = kappa.pow((n - 1 - v) as u32);
        let block = stride * kappa;
        let mut gathered = vec![Complex64::new(0.0, 0.0); kappa];
        for base in (0..self.amps.len()).step_by(block) {
            for inner in base..base + stride {
                for (c, g) in gathered.iter_mut().enumerate() {
                    *g = self.amps[inner + c * stride];
                }
                for r in 0..kappa {
                    let row = &u[r * kappa..(r + 1) * kappa];
                    self.amps[inner + r * stride] = row.iter().zip(&gathered).map(|(x, y)| x * y).sum();
                }
            }
        }
    }

    /// Applies a 2^k×2^k matrix to `targets` in the full binary space. The
    /// first target is the most significant bit of the matrix index.
    pub fn apply_gate(&mut self, matrix: &CMatrix, targets: &[usize]) -> Result<()> {
        self.space.ensure_kind(SpaceKind::FullBinary)?;
        let qubits = self.space.qubits();
        let k = targets.len();
        if matrix.nrows() != 1 << k || matrix.ncols() != 1 << k {
            return Err(Error::arg(format!(
                "{}×{} matrix does not act on {k} qubits",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= qubits {
                return Err(Error::arg(format!("target {t} out of range for {qubits} qubits")));
            }
            if targets[..i].contains(&t) {
                return Err(Error::arg(format!("repeated target {t}")));
            }
        }
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|j| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|&(pos, _)| j >> (k - 1 - pos) & 1 == 1)
                    .map(|(_, &t)| 1 << t)
                    .sum()
            })
            .collect();
        let tmask: usize = targets.iter().map(|&t| 1 << t).sum();
        let dim = 1 << k;
        let mut gathered = vec![Complex64::new(0.0, 0.0); dim];
        for base in 0..self.amps.len() {
            if base & tmask != 0 {
                continue;
            }
            for (g, &off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amps[base + off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                self.amps[base + off] = (0..dim).map(|c| matrix[(r, c)] * gathered[c]).sum();
            }
        }
        Ok(())
    }

    /// Applies a dense operator on the whole space.
    pub fn apply_dense(&mut self, u: &DenseUnitary) -> Result<()> {
        if u.dim() != self.amps.len() {
            return Err(Error::arg(format!("operator dimension {} ≠ state dimension {}", u.dim(), self.amps.len())));
        }
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        self.amps = (u.matrix() * v).as_slice().to_vec();
        Ok(())
    }

    /// Projects onto Hamming weight `w` and renormalizes.
    pub fn postselect_hamming_weight(&self, w: usize) -> Result<(f64, StateVector)> {
        self.space.ensure_kind(SpaceKind::FullBinary)?;
        if w > self.space.qubits() {
            return Err(Error::arg(format!("weight {w} exceeds {} qubits", self.space.qubits())));
        }
        let mut amps = self.amps.clone();
        let mut prob = 0.0;
        for (i, a) in amps.iter_mut().enumerate() {
            if i.count_ones() as usize == w {
                prob += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if prob <= 1e-300 {
            return Err(Error::ZeroProbability);
        }
        let scale = prob.sqrt().recip();
        amps.iter_mut().for_each(|a| *a *= scale);
        Ok((prob, StateVector { space: self.space, amps }))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Born-rule samples as (basis index → count), ordered by index.
    pub fn sample<R: Rng>(&self, rng: &mut R, shots: usize) -> BTreeMap<usize, usize> {
        let dist = WeightedIndex::new(self.probabilities()).expect("normalized state");
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(dist.sample(rng)).or_insert(0) += 1;
        }
        counts
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,re,im")?;
        for (i, a) in self.amps.iter().enumerate() {
            writeln!(out, "{i},{},{}", a.re, a.im)?;
        }
        Ok(())
    }
}

/// Prepares an initial state of `problem` in the requested space.
pub fn init_state(problem: &ColoringProblem, kind: &InitKind, space: SpaceKind) -> Result<StateVector> {
    let desc = problem.space(space)?;
    let (n, kappa) = (problem.n(), problem.kappa());
    let zero = Complex64::new(0.0, 0.0);
    match (kind, space) {
        (InitKind::WState, SpaceKind::Feasible) => {
            let a = Complex64::new((desc.dimension as f64).sqrt().recip(), 0.0);
            Ok(StateVector { space: desc, amps: vec![a; desc.dimension] })
        }
        (InitKind::WState, SpaceKind::FullBinary) => {
            let feasible = kappa.pow(n as u32);
            let a = Complex64::new((feasible as f64).sqrt().recip(), 0.0);
            let mut amps = vec![zero; desc.dimension];
            for i in 0..feasible {
                let colors = crate::encoding::decode_feasible(i, n, kappa);
                amps[one_hot_bits(&colors, kappa) as usize] = a;
            }
            Ok(StateVector { space: desc, amps })
        }
        (InitKind::ClassicalColoring(colors), _) => {
            if colors.len() != n || colors.iter().any(|&c| c >= kappa) {
                return Err(Error::arg(format!("coloring {colors:?} invalid for n = {n}, κ = {kappa}")));
            }
            let index = match space {
                SpaceKind::Feasible => crate::encoding::feasible_index(colors, kappa),
                SpaceKind::FullBinary => one_hot_bits(colors, kappa) as usize,
            };
            StateVector::basis(desc, index)
        }
        (InitKind::PlusAll, SpaceKind::FullBinary) => {
            let a = Complex64::new((desc.dimension as f64).sqrt().recip(), 0.0);
            Ok(StateVector { space: desc, amps: vec![a; desc.dimension] })
        }
        (InitKind::BasisString(bits), SpaceKind::FullBinary) => StateVector::basis(desc, *bits as usize),
        (kind, space) => Err(Error::SpaceMismatch {
            expected: "full_binary space for this initial state".into(),
            actual: format!("{kind:?} in {space:?}"),
        }),
    }
}

/// |W_n⟩ on a bare n-qubit register: uniform over single-excitation strings.
pub fn w_state(n: usize) -> Result<StateVector> {
    let space = SpaceDescriptor::full_binary(n, 1)?;
    let a = Complex64::new((n as f64).sqrt().recip(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); space.dimension];
    for q in 0..n {
        amps[1 << q] = a;
    }
    StateVector::new(space, amps)
}
