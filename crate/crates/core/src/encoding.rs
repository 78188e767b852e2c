//! One-hot encoding of κ-colorings and the diagonal Hamiltonians built on it.
//!
//! Qubit `(v, c)` is flat index `v·κ + c`, bit 0 least significant. Feasible
//! basis states are indexed in base κ with node 0 as the most significant digit.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{max_colorable_subgraph, Graph};
use crate::par::{self, Mode};

pub const MAX_FULL_QUBITS: usize = 26;
pub const MAX_FEASIBLE_DIM: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    FullBinary,
    Feasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceDescriptor {
    pub kind: SpaceKind,
    pub n: usize,
    pub kappa: usize,
    pub dimension: usize,
}

impl SpaceDescriptor {
    pub fn new(kind: SpaceKind, n: usize, kappa: usize) -> Result<Self> {
        match kind {
            SpaceKind::FullBinary => Self::full_binary(n, kappa),
            SpaceKind::Feasible => Self::feasible(n, kappa),
        }
    }

    pub fn full_binary(n: usize, kappa: usize) -> Result<Self> {
        let qubits = n * kappa;
        if qubits > MAX_FULL_QUBITS {
            return Err(Error::resource(format!(
                "{qubits} qubits exceed the full-binary cap of {MAX_FULL_QUBITS}"
            )));
        }
        Ok(SpaceDescriptor {
            kind: SpaceKind::FullBinary,
            n,
            kappa,
            dimension: 1 << qubits,
        })
    }

    pub fn feasible(n: usize, kappa: usize) -> Result<Self> {
        let dimension = kappa
            .checked_pow(n as u32)
            .filter(|&d| d <= MAX_FEASIBLE_DIM)
            .ok_or_else(|| {
                Error::resource(format!(
                    "feasible dimension {kappa}^{n} exceeds the cap of {MAX_FEASIBLE_DIM}"
                ))
            })?;
        Ok(SpaceDescriptor {
            kind: SpaceKind::Feasible,
            n,
            kappa,
            dimension,
        })
    }

    pub fn qubits(&self) -> usize {
        self.n * self.kappa
    }

    pub fn ensure_same(&self, other: &SpaceDescriptor) -> Result<()> {
        if self != other {
            return Err(Error::SpaceMismatch {
                expected: format!("{self:?}"),
                actual: format!("{other:?}"),
            });
        }
        Ok(())
    }

    pub fn ensure_kind(&self, kind: SpaceKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::SpaceMismatch {
                expected: format!("{kind:?}"),
                actual: format!("{:?}", self.kind),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ColoringProblem {
    graph: Graph,
    kappa: usize,
    c_max: usize,
}

impl ColoringProblem {
    /// Builds the problem and solves it exactly for `c_max`.
    pub fn new(graph: Graph, kappa: usize) -> Result<Self> {
        if kappa < 2 {
            return Err(Error::arg(format!("κ must be at least 2, got {kappa}")));
        }
        let c_max = max_colorable_subgraph(&graph, kappa)?;
        Ok(ColoringProblem {
            graph,
            kappa,
            c_max,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    pub fn c_max(&self) -> usize {
        self.c_max
    }

    pub fn num_qubits(&self) -> usize {
        self.n() * self.kappa
    }

    pub fn qubit(&self, v: usize, c: usize) -> usize {
        v * self.kappa + c
    }

    pub fn space(&self, kind: SpaceKind) -> Result<SpaceDescriptor> {
        SpaceDescriptor::new(kind, self.n(), self.kappa)
    }

    /// Number of properly colored edges.
    pub fn cost_value(&self, assignment: &[usize]) -> usize {
        cost_value(self, assignment)
    }
}

/// Number of properly colored edges: m minus the monochromatic ones.
pub fn cost_value(problem: &ColoringProblem, assignment: &[usize]) -> usize {
    assert_eq!(assignment.len(), problem.n(), "assignment length");
    problem
        .graph
        .edges()
        .iter()
        .filter(|&&(a, b)| assignment[a] != assignment[b])
        .count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    space: SpaceDescriptor,
    values: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(space: SpaceDescriptor, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.dimension {
            return Err(Error::SpaceMismatch {
                expected: format!("{} values", space.dimension),
                actual: format!("{} values", values.len()),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("non-finite diagonal entry at index {bad}")));
        }
        Ok(DiagonalOperator { space, values })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `a·self + b` entrywise.
    pub fn affine(&self, a: f64, b: f64) -> DiagonalOperator {
        DiagonalOperator {
            space: self.space,
            values: self.values.iter().map(|&x| a * x + b).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i},{v}")?;
        }
        Ok(())
    }
}

/// Base-κ index of an assignment, node 0 most significant.
pub fn feasible_index(assignment: &[usize], kappa: usize) -> usize {
    assignment.iter().fold(0, |acc, &c| {
        assert!(c < kappa, "color {c} out of range for κ = {kappa}");
        acc * kappa + c
    })
}

/// Inverse of [`feasible_index`].
pub fn decode_feasible(mut index: usize, n: usize, kappa: usize) -> Vec<usize> {
    let mut colors = vec![0; n];
    for c in colors.iter_mut().rev() {
        *c = index % kappa;
        index /= kappa;
    }
    colors
}

/// Full-binary basis index of the one-hot encoding of `assignment`.
pub fn one_hot_bits(assignment: &[usize], kappa: usize) -> u64 {
    assignment.iter().enumerate().fold(0u64, |bits, (v, &c)| {
        assert!(c < kappa, "color {c} out of range for κ = {kappa}");
        bits | 1 << (v * kappa + c)
    })
}

/// Decodes a one-hot bit-string back to colors.
pub fn assignment_from_bits(bits: u64, n: usize, kappa: usize) -> Result<Vec<usize>> {
    let mask = (1u64 << kappa) - 1;
    if n * kappa < 64 && bits >> (n * kappa) != 0 {
        return Err(Error::Encoding(format!("bits beyond {} qubits are set", n * kappa)));
    }
    (0..n)
        .map(|v| {
            let register = bits >> (v * kappa) & mask;
            if register.count_ones() != 1 {
                return Err(Error::Encoding(format!(
                    "node {v} register {} is not one-hot",
                    format_register(register, kappa)
                )));
            }
            Ok(register.trailing_zeros() as usize)
        })
        .collect()
}

fn format_register(register: u64, kappa: usize) -> String {
    (0..kappa)
        .map(|c| if register >> c & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Renders qubits node by node, color 0 first, registers separated by `|`.
pub fn format_bits(bits: u64, n: usize, kappa: usize) -> String {
    let mask = (1u64 << kappa) - 1;
    (0..n)
        .map(|v| format_register(bits >> (v * kappa) & mask, kappa))
        .collect::<Vec<_>>()
        .join("|")
}

/// Inverse of [`format_bits`]; `|` separators are optional.
pub fn parse_bits(text: &str, n: usize, kappa: usize) -> Result<u64> {
    let digits: Vec<char> = text.chars().filter(|&ch| ch != '|').collect();
    if digits.len() != n * kappa {
        return Err(Error::Encoding(format!(
            "expected {} bits, found {}",
            n * kappa,
            digits.len()
        )));
    }
    digits.iter().enumerate().try_fold(0u64, |bits, (q, &ch)| match ch {
        '0' => Ok(bits),
        '1' => Ok(bits | 1 << q),
        other => Err(Error::Encoding(format!("invalid bit character '{other}'"))),
    })
}

/// f_C over either space. In the full binary space this is the polynomial
/// m − Σ_c Σ_(u,v) x_uc·x_vc evaluated on the bit occupations.
pub fn build_cost_diagonal(problem: &ColoringProblem, kind: SpaceKind) -> Result<DiagonalOperator> {
    let space = problem.space(kind)?;
    let (n, kappa, m) = (problem.n(), problem.kappa(), problem.m() as f64);
    let edges = problem.graph().edges();
    let values = match kind {
        SpaceKind::Feasible => par::map_range(Mode::default(), space.dimension, |i| {
            let colors = decode_feasible(i, n, kappa);
            edges.iter().filter(|&&(a, b)| colors[a] != colors[b]).count() as f64
        }),
        SpaceKind::FullBinary => {
            let mask = (1u64 << kappa) - 1;
            par::map_range(Mode::default(), space.dimension, |b| {
                let b = b as u64;
                let clashes: u32 = edges
                    .iter()
                    .map(|&(u, v)| (b >> (u * kappa) & b >> (v * kappa) & mask).count_ones())
                    .sum();
                m - clashes as f64
            })
        }
    };
    DiagonalOperator::new(space, values)
}

/// f_pen = Σ_v (1 − Σ_c x_vc)² over the full binary space.
pub fn build_penalty_diagonal(problem: &ColoringProblem) -> Result<DiagonalOperator> {
    let space = problem.space(SpaceKind::FullBinary)?;
    let (n, kappa) = (problem.n(), problem.kappa());
    let mask = (1u64 << kappa) - 1;
    let values = par::map_range(Mode::default(), space.dimension, |b| {
        (0..n)
            .map(|v| {
                let occupied = ((b as u64) >> (v * kappa) & mask).count_ones() as f64;
                (1.0 - occupied).powi(2)
            })
            .sum()
    });
    DiagonalOperator::new(space, values)
}

/// Units in which the penalty weight α is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyUnits {
    /// H_PS = H'_C − α·f_pen: α weighs the penalty against the 4×-scaled cost.
    #[default]
    Scaled,
    /// H_PS = H'_C − 4α·f_pen: α weighs the penalty against f_C itself.
    Unscaled,
}

impl PenaltyUnits {
    pub fn factor(self) -> f64 {
        match self {
            PenaltyUnits::Scaled => 1.0,
            PenaltyUnits::Unscaled => 4.0,
        }
    }
}

/// H_PS = H'_C − α·f_pen with H'_C = 4·f_C − (4 − κ)m. The penalty vanishes
/// on the feasible space, so α is ignored there.
pub fn build_phase_separator_diagonal(
    problem: &ColoringProblem,
    alpha: f64,
    kind: SpaceKind,
) -> Result<DiagonalOperator> {
    build_phase_separator_diagonal_in(problem, alpha, PenaltyUnits::Scaled, kind)
}

pub fn build_phase_separator_diagonal_in(
    problem: &ColoringProblem,
    alpha: f64,
    units: PenaltyUnits,
    kind: SpaceKind,
) -> Result<DiagonalOperator> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::arg(format!("penalty weight must be finite and ≥ 0, got {alpha}")));
    }
    let shift = -((4.0 - problem.kappa() as f64) * problem.m() as f64);
    let scaled = build_cost_diagonal(problem, kind)?.affine(4.0, shift);
    if kind == SpaceKind::Feasible || alpha == 0.0 {
        return Ok(scaled);
    }
    let weight = alpha * units.factor();
    let penalty = build_penalty_diagonal(problem)?;
    let values = scaled
        .values
        .iter()
        .zip(&penalty.values)
        .map(|(c, p)| c - weight * p)
        .collect();
    DiagonalOperator::new(scaled.space, values)
}

/// Fraction of the full binary space that is feasible: (κ / 2^κ)ⁿ.
pub fn feasible_fraction(kappa: usize, n: usize) -> f64 {
    (kappa as f64 / 2f64.powi(kappa as i32)).powi(n as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn problem(g: Graph, kappa: usize) -> ColoringProblem {
        ColoringProblem::new(g, kappa).unwrap()
    }

    #[test]
    fn cost_examples() {
        let tri3 = problem(Graph::complete(3), 3);
        assert_eq!(cost_value(&tri3, &[0, 1, 2]), 3);
        assert_eq!(cost_value(&tri3, &[0, 0, 0]), 0);
        let tri2 = problem(Graph::complete(3), 2);
        assert_eq!(cost_value(&tri2, &[0, 0, 1]), 2);
        assert_eq!(tri2.c_max(), 2);
        assert!(ColoringProblem::new(Graph::complete(3), 1).is_err());
    }

    #[test]
    fn feasible_cost_diagonal() {
        let tri3 = problem(Graph::complete(3), 3);
        let diag = build_cost_diagonal(&tri3, SpaceKind::Feasible).unwrap();
        assert_eq!(diag.values()[feasible_index(&[0, 1, 2], 3)], 3.0);
        let edge = problem(Graph::complete(2), 2);
        let diag = build_cost_diagonal(&edge, SpaceKind::Feasible).unwrap();
        assert_eq!(diag.values(), &[0.0, 1.0, 1.0, 0.0]);
    }

    /// Pauli-form H_C = ((4 − κ)m + H'_C)/4 with H'_C = Σ d_v Σ_c z_vc − Σ_c Σ_edges z_uc z_vc.
    fn pauli_cost(problem: &ColoringProblem, bits: u64) -> f64 {
        let z = |q: usize| if bits >> q & 1 == 1 { -1.0 } else { 1.0 };
        let kappa = problem.kappa();
        let g = problem.graph();
        let mut h = 0.0;
        for v in 0..g.n() {
            for c in 0..kappa {
                h += g.degrees()[v] as f64 * z(v * kappa + c);
            }
        }
        for &(u, v) in g.edges() {
            for c in 0..kappa {
                h -= z(u * kappa + c) * z(v * kappa + c);
            }
        }
        ((4.0 - kappa as f64) * g.m() as f64 + h) / 4.0
    }

    /// Pauli-form penalty plus the constant n(1 − κ/2)² + nκ/4 it drops.
    fn pauli_penalty(problem: &ColoringProblem, bits: u64) -> f64 {
        let z = |q: usize| if bits >> q & 1 == 1 { -1.0 } else { 1.0 };
        let k = problem.kappa();
        let mut h = 0.0;
        for v in 0..problem.n() {
            let mut single = 0.0;
            let mut pairs = 0.0;
            for c in 0..k {
                single += z(v * k + c);
                for d in c + 1..k {
                    pairs += z(v * k + c) * z(v * k + d);
                }
            }
            h += 0.5 * ((2.0 - k as f64) * single + pairs);
        }
        let kf = k as f64;
        h + problem.n() as f64 * ((1.0 - kf / 2.0).powi(2) + kf / 4.0)
    }

    #[test]
    fn full_binary_matches_pauli_forms() {
        for (g, kappa) in [(Graph::complete(3), 3), (Graph::path(3), 2), (Graph::cycle(4).unwrap(), 3)] {
            let p = problem(g, kappa);
            let cost = build_cost_diagonal(&p, SpaceKind::FullBinary).unwrap();
            let pen = build_penalty_diagonal(&p).unwrap();
            for b in 0..cost.len() {
                assert!((cost.values()[b] - pauli_cost(&p, b as u64)).abs() < 1e-12);
                assert!((pen.values()[b] - pauli_penalty(&p, b as u64)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_binary_restriction_equals_feasible() {
        let p = problem(Graph::prism(), 2);
        let full = build_cost_diagonal(&p, SpaceKind::FullBinary).unwrap();
        let feas = build_cost_diagonal(&p, SpaceKind::Feasible).unwrap();
        for i in 0..feas.len() {
            let bits = one_hot_bits(&decode_feasible(i, p.n(), 2), 2);
            assert_eq!(full.values()[bits as usize], feas.values()[i]);
        }
    }

    #[test]
    fn penalty_examples() {
        let single = problem(Graph::empty(1), 3);
        let pen = build_penalty_diagonal(&single).unwrap();
        assert_eq!(pen.values()[0b000], 1.0);
        assert_eq!(pen.values()[0b111], 4.0);
        assert_eq!(pen.values()[0b010], 0.0);
    }

    #[test]
    fn penalty_zero_iff_one_hot() {
        for (n, kappa) in [(3, 4), (4, 3), (6, 2), (2, 6)] {
            let p = problem(Graph::empty(n), kappa);
            let pen = build_penalty_diagonal(&p).unwrap();
            for (b, &v) in pen.values().iter().enumerate() {
                let one_hot = assignment_from_bits(b as u64, n, kappa).is_ok();
                assert_eq!(v == 0.0, one_hot, "bits {b:b}");
            }
        }
    }

    #[test]
    fn phase_separator_definition() {
        let p = problem(Graph::complete(3), 3);
        let ps = build_phase_separator_diagonal(&p, 0.0, SpaceKind::FullBinary).unwrap();
        let cost = build_cost_diagonal(&p, SpaceKind::FullBinary).unwrap();
        for (a, c) in ps.values().iter().zip(cost.values()) {
            assert_eq!(*a, 4.0 * c - 3.0);
        }
        let f0 = build_phase_separator_diagonal(&p, 0.0, SpaceKind::Feasible).unwrap();
        let f5 = build_phase_separator_diagonal(&p, 5.0, SpaceKind::Feasible).unwrap();
        assert_eq!(f0, f5);
        let unscaled =
            build_phase_separator_diagonal_in(&p, 1.0, PenaltyUnits::Unscaled, SpaceKind::FullBinary).unwrap();
        let scaled4 = build_phase_separator_diagonal(&p, 4.0, SpaceKind::FullBinary).unwrap();
        assert_eq!(unscaled, scaled4);
        assert!(build_phase_separator_diagonal(&p, -1.0, SpaceKind::FullBinary).is_err());
    }

    fn separation_gap(ps: &DiagonalOperator, n: usize, kappa: usize) -> (f64, f64) {
        let (mut worst_feasible, mut best_infeasible) = (f64::INFINITY, f64::NEG_INFINITY);
        for (b, &v) in ps.values().iter().enumerate() {
            if assignment_from_bits(b as u64, n, kappa).is_ok() {
                worst_feasible = worst_feasible.min(v);
            } else {
                best_infeasible = best_infeasible.max(v);
            }
        }
        (best_infeasible, worst_feasible)
    }

    #[test]
    fn large_penalty_separates_feasible_states() {
        let p = problem(Graph::complete(3), 3);
        // α = κm measured against f_C separates the spaces
        let ps = build_phase_separator_diagonal_in(&p, 9.0, PenaltyUnits::Unscaled, SpaceKind::FullBinary).unwrap();
        assert_eq!(ps.len(), 512);
        let (infeasible, feasible) = separation_gap(&ps, 3, 3);
        assert!(infeasible < feasible, "{infeasible} vs {feasible}");
        // against the 4×-scaled cost the same α is too weak
        let ps = build_phase_separator_diagonal(&p, 9.0, SpaceKind::FullBinary).unwrap();
        let (infeasible, feasible) = separation_gap(&ps, 3, 3);
        assert!(infeasible >= feasible);
        let ps = build_phase_separator_diagonal(&p, 36.0, SpaceKind::FullBinary).unwrap();
        let (infeasible, feasible) = separation_gap(&ps, 3, 3);
        assert!(infeasible < feasible);
    }

    #[test]
    fn fraction_examples() {
        assert_eq!(feasible_fraction(2, 1), 0.5);
        assert_eq!(feasible_fraction(3, 4), 0.019775390625);
        assert_eq!(feasible_fraction(1, 5), 0.03125);
    }

    #[test]
    fn bit_string_examples() {
        assert_eq!(format_bits(one_hot_bits(&[0, 2], 3), 2, 3), "100|001");
        assert_eq!(format_bits(one_hot_bits(&decode_feasible(0, 3, 2), 2), 3, 2), "10|10|10");
        assert_eq!(parse_bits("100|001", 2, 3).unwrap(), one_hot_bits(&[0, 2], 3));
        assert!(matches!(assignment_from_bits(0b110, 1, 3), Err(Error::Encoding(_))));
        assert!(matches!(assignment_from_bits(0, 1, 3), Err(Error::Encoding(_))));
    }

    #[test]
    fn exhaustive_round_trip() {
        let (n, kappa) = (3usize, 4usize);
        for i in 0..kappa.pow(n as u32) {
            let colors = decode_feasible(i, n, kappa);
            assert_eq!(feasible_index(&colors, kappa), i);
            let bits = one_hot_bits(&colors, kappa);
            assert_eq!(assignment_from_bits(bits, n, kappa).unwrap(), colors);
        }
    }

    #[test]
    fn feasible_maximum_is_c_max() {
        for g in [Graph::prism(), Graph::envelope(), Graph::complete(4)] {
            for kappa in 2..=3 {
                let p = problem(g.clone(), kappa);
                let diag = build_cost_diagonal(&p, SpaceKind::Feasible).unwrap();
                let best = diag.values().iter().cloned().fold(f64::MIN, f64::max);
                assert_eq!(best, p.c_max() as f64);
                assert!(diag.values().iter().all(|&v| v >= 0.0 && v <= p.m() as f64 && v.fract() == 0.0));
            }
        }
    }

    #[test]
    fn caps() {
        assert!(matches!(SpaceDescriptor::full_binary(9, 3), Err(Error::Resource(_))));
        assert!(SpaceDescriptor::feasible(7, 4).is_ok());
        assert!(matches!(SpaceDescriptor::feasible(13, 4), Err(Error::Resource(_))));
    }

    #[test]
    fn csv_export() {
        let p = problem(Graph::complete(2), 2);
        let diag = build_cost_diagonal(&p, SpaceKind::Feasible).unwrap();
        let mut out = Vec::new();
        diag.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "index,value\n0,0\n1,1\n2,1\n3,0\n");
    }

    proptest! {
        #[test]
        fn index_bits_round_trip(n in 1u32..6, kappa in 2usize..6, seed in any::<u64>()) {
            let n = n as usize;
            let dim = kappa.pow(n as u32);
            let i = (seed % dim as u64) as usize;
            let colors = decode_feasible(i, n, kappa);
            prop_assert_eq!(feasible_index(&colors, kappa), i);
            let bits = one_hot_bits(&colors, kappa);
            prop_assert_eq!(assignment_from_bits(bits, n, kappa).unwrap(), colors.clone());
            prop_assert_eq!(parse_bits(&format_bits(bits, n, kappa), n, kappa).unwrap(), bits);
        }
    }
}
