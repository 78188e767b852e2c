//! W-state preparation circuits and ring state transfer.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{parse_circuit, Circuit, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian_scaled, re};
use crate::mixers::{ring_energies, ring_pairs, RestrictedMixerMatrix};
use crate::statesim::StateVector;

/// Three-qubit W-state program, transcribed line for line.
pub const REFERENCE_LISTING: &str = "RY(acos(-1/3)) 2
PHASE(-pi/2) 2
RY(pi/4) 1
CNOT 2 1
RY(-pi/4) 1
RZ(pi/2) 1
CNOT 2 1
RZ(pi/2) 1
CNOT 1 0
CNOT 2 1
X 2
";

/// n+1 qubits with the ancilla on qubit 0. Each step moves amplitude
/// sinθ_j with sinθ_j = 1/√(n+1−j) from the "not yet placed" branch onto
/// register qubit j, leaving |1⟩ on the ancilla.
pub fn wstate_sequential_circuit(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::arg("W state needs n >= 1"));
    }
    let mut circuit = Circuit::new(n + 1);
    for j in 1..=n {
        let theta = (1.0 / ((n + 1 - j) as f64).sqrt()).asin();
        circuit.push(GateKind::Cnot, &[0, j])?;
        circuit.push(GateKind::X, &[j])?;
        circuit.push(GateKind::Controlled(Box::new(GateKind::Ry(2.0 * theta))), &[j, 0])?;
        circuit.push(GateKind::X, &[j])?;
        circuit.push(GateKind::Cnot, &[0, j])?;
    }
    Ok(circuit)
}

/// Generalized Hadamard with u = cosφ, v = sinφ sending |0⟩ to a|0⟩ + b|1⟩
/// for real non-negative a, b with a² + b² = 1.
pub fn gh_for_amplitudes(a: f64, b: f64) -> GateKind {
    let phi = a.atan2(b) / 2.0;
    GateKind::GeneralizedHadamard {
        u: re(phi.cos()),
        v: re(phi.sin()),
    }
}

/// n qubits, no ancilla: the inverse of peeling one excitation at a time off
/// W_n. 3n−5 CNOTs after lowering.
pub fn wstate_recursive_circuit(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::arg("recursive W state needs n >= 2"));
    }
    let level = |k: usize| {
        let rest = (n - k) as f64;
        gh_for_amplitudes(rest.sqrt().recip(), ((rest - 1.0) / rest).sqrt())
    };
    let mut circuit = Circuit::new(n);
    circuit.push(level(0), &[0])?;
    for k in 1..n - 1 {
        circuit.push(GateKind::Controlled(Box::new(level(k))), &[k - 1, k])?;
    }
    circuit.push(GateKind::Cnot, &[n - 2, n - 1])?;
    for k in (1..n - 1).rev() {
        circuit.push(GateKind::Cnot, &[k - 1, k])?;
    }
    circuit.push(GateKind::X, &[0])?;
    Ok(circuit)
}

pub fn wstate_reference_listing() -> Circuit {
    parse_circuit(REFERENCE_LISTING).expect("reference listing parses")
}

/// Amplitude structure of a state against W_n.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseReport {
    /// |⟨W_n|ψ⟩|², insensitive to global phase.
    pub fidelity: f64,
    /// Probability of the string with the single excitation on qubit q.
    pub probabilities: Vec<f64>,
    /// Phase of each weight-1 amplitude relative to qubit 0's.
    pub relative_phases: Vec<f64>,
    /// Probability outside the weight-1 strings.
    pub leakage: f64,
}

impl PhaseReport {
    pub fn of(state: &StateVector) -> PhaseReport {
        let amps = state.amplitudes();
        let n = state.space().qubits();
        let weight_one: Vec<Complex64> = (0..n).map(|q| amps[1 << q]).collect();
        let overlap: Complex64 = weight_one.iter().sum::<Complex64>() / (n as f64).sqrt();
        let probabilities: Vec<f64> = weight_one.iter().map(|a| a.norm_sqr()).collect();
        let reference = weight_one[0].arg();
        let relative_phases = weight_one
            .iter()
            .map(|a| {
                let d = a.arg() - reference;
                (d + PI).rem_euclid(2.0 * PI) - PI
            })
            .collect();
        PhaseReport {
            fidelity: overlap.norm_sqr(),
            leakage: (state.norm_sqr() - probabilities.iter().sum::<f64>()).max(0.0),
            probabilities,
            relative_phases,
        }
    }
}

/// n rotations RY(2θ) with cosθ = √(1−1/n) and the probability
/// (1−1/n)^(n−1) that measuring the Hamming weight returns 1.
pub fn biased_hadamard_wprep(n: usize) -> Result<(Circuit, f64)> {
    if n == 0 {
        return Err(Error::arg("W state needs n >= 1"));
    }
    let p = 1.0 / n as f64;
    let theta = (1.0 - p).sqrt().acos();
    let mut circuit = Circuit::new(n);
    for q in 0..n {
        circuit.push(GateKind::Ry(2.0 * theta), &[q])?;
    }
    let prob = if n == 1 { 1.0 } else { (1.0 - p).powi(n as i32 - 1) };
    Ok((circuit, prob))
}

fn check_site(m: usize, site: usize) -> Result<()> {
    if m < 2 || site == 0 || site > m {
        return Err(Error::arg(format!("need m >= 2 and 1 <= site <= m, got m = {m}, site = {site}")));
    }
    Ok(())
}

/// Probability of finding an excitation started on site 1 at `site` after
/// time t under the ring hopping Hamiltonian.
pub fn ring_transfer_fidelity(m: usize, site: usize, t: f64) -> Result<f64> {
    check_site(m, site)?;
    let omega = 2.0 * PI / m as f64;
    let amp: Complex64 = ring_energies(m)
        .iter()
        .enumerate()
        .map(|(k, &e)| Complex64::from_polar(1.0, (site - 1) as f64 * k as f64 * omega - t * e))
        .sum::<Complex64>()
        / m as f64;
    Ok(amp.norm_sqr())
}

/// Same quantity from the dense exponential of the hopping matrix.
pub fn ring_transfer_fidelity_dense(m: usize, site: usize, t: f64) -> Result<f64> {
    check_site(m, site)?;
    let h = RestrictedMixerMatrix::from_pairs(m, &ring_pairs(m)).complex();
    let u = expm_hermitian_scaled(&h, t)?;
    Ok(u.matrix()[(site - 1, 0)].norm_sqr())
}

fn population_deviation(m: usize, t: f64) -> f64 {
    (1..=m)
        .map(|c| (ring_transfer_fidelity(m, c, t).expect("valid site") - 1.0 / m as f64).abs())
        .fold(0.0, f64::max)
}

/// Time in (0, t_max] minimizing max_c |F_c − 1/m|: a uniform grid of
/// `steps` points, then golden-section refinement around the best point.
pub fn equal_population_time(m: usize, t_max: f64, steps: usize) -> Result<(f64, f64)> {
    check_site(m, 1)?;
    if !(t_max > 0.0) || steps < 2 {
        return Err(Error::arg("need t_max > 0 and at least two grid steps"));
    }
    let dt = t_max / steps as f64;
    let (best_t, _) = (1..=steps)
        .map(|i| {
            let t = i as f64 * dt;
            (t, population_deviation(m, t))
        })
        .fold((0.0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = ((best_t - dt).max(0.0), (best_t + dt).min(t_max));
    for _ in 0..200 {
        let a = hi - ratio * (hi - lo);
        let b = lo + ratio * (hi - lo);
        if population_deviation(m, a) < population_deviation(m, b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let t = 0.5 * (lo + hi);
    let candidates = [(t, population_deviation(m, t)), (best_t, population_deviation(m, best_t))];
    let best = if candidates[0].1 <= candidates[1].1 { candidates[0] } else { candidates[1] };
    Ok(best)
}
