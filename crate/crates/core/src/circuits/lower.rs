//! Lowering to the {CNOT, RZ, RY, X} basis, exact up to a global phase.
//! Used for gate counting; the primitive IR remains the verified form.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Euler angles with U = e^{iα}·RZ(β)·RY(γ)·RZ(δ), returned as (α, β, γ, δ).
pub fn zyz_decompose(u: &CMatrix) -> (f64, f64, f64, f64) {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let alpha = det.arg() / 2.0;
    let v = u * Complex64::from_polar(1.0, -alpha);
    let (a, b) = (v[(0, 0)], v[(1, 0)]);
    let gamma = 2.0 * b.norm().atan2(a.norm());
    // a = e^{−i(β+δ)/2}cos(γ/2), b = e^{i(β−δ)/2}sin(γ/2)
    let sum = if a.norm() > 1e-12 { -2.0 * a.arg() } else { 0.0 };
    let diff = if b.norm() > 1e-12 { 2.0 * b.arg() } else { 0.0 };
    (alpha, (sum + diff) / 2.0, gamma, (sum - diff) / 2.0)
}

struct Lowering {
    out: Circuit,
}

impl Lowering {
    fn gate(&mut self, kind: GateKind, targets: &[usize]) -> Result<()> {
        self.out.push(kind, targets)
    }

    fn cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.gate(GateKind::Cnot, &[control, target])
    }

    /// Single-qubit unitary; the global phase is dropped.
    fn single(&mut self, m: &CMatrix, q: usize) -> Result<()> {
        let (_, beta, gamma, delta) = zyz_decompose(m);
        self.gate(GateKind::Rz(delta), &[q])?;
        self.gate(GateKind::Ry(gamma), &[q])?;
        self.gate(GateKind::Rz(beta), &[q])
    }

    fn zz(&mut self, theta: f64, a: usize, b: usize) -> Result<()> {
        self.cx(a, b)?;
        self.gate(GateKind::Rz(2.0 * theta), &[b])?;
        self.cx(a, b)
    }

    /// exp(−iφ XX) via Y-rotations mapping Z to X on both qubits.
    fn xx(&mut self, phi: f64, a: usize, b: usize) -> Result<()> {
        for q in [a, b] {
            self.gate(GateKind::Ry(-FRAC_PI_2), &[q])?;
        }
        self.zz(phi, a, b)?;
        for q in [a, b] {
            self.gate(GateKind::Ry(FRAC_PI_2), &[q])?;
        }
        Ok(())
    }

    /// exp(−iφ YY) by conjugating the XX form with S = RZ(π/2) up to phase.
    fn yy(&mut self, phi: f64, a: usize, b: usize) -> Result<()> {
        for q in [a, b] {
            self.gate(GateKind::Rz(-FRAC_PI_2), &[q])?;
        }
        self.xx(phi, a, b)?;
        for q in [a, b] {
            self.gate(GateKind::Rz(FRAC_PI_2), &[q])?;
        }
        Ok(())
    }

    fn lower(&mut self, kind: &GateKind, t: &[usize]) -> Result<()> {
        match kind {
            GateKind::X | GateKind::Ry(_) | GateKind::Rz(_) | GateKind::Cnot => self.gate(kind.clone(), t),
            GateKind::Phase(theta) => self.gate(GateKind::Rz(*theta), t),
            GateKind::GeneralizedHadamard { .. } => self.single(&kind.matrix(), t[0]),
            GateKind::Swap => {
                self.cx(t[0], t[1])?;
                self.cx(t[1], t[0])?;
                self.cx(t[0], t[1])
            }
            GateKind::ZzPhase(theta) => self.zz(*theta, t[0], t[1]),
            GateKind::Xy(theta) => {
                self.xx(theta / 2.0, t[0], t[1])?;
                self.yy(theta / 2.0, t[0], t[1])
            }
            GateKind::XyFused(theta) => {
                self.lower(&GateKind::Swap, t)?;
                self.lower(&GateKind::Xy(*theta), t)
            }
            GateKind::Controlled(inner) => match inner.as_ref() {
                GateKind::X => self.cx(t[0], t[1]),
                single if single.arity() == 1 => {
                    // C-U = (phase α on the control)·A·X·B·X·C with ABC = I
                    let (alpha, beta, gamma, delta) = zyz_decompose(&single.matrix());
                    let (c, q) = (t[0], t[1]);
                    self.gate(GateKind::Rz((delta - beta) / 2.0), &[q])?;
                    self.cx(c, q)?;
                    self.gate(GateKind::Rz(-(delta + beta) / 2.0), &[q])?;
                    self.gate(GateKind::Ry(-gamma / 2.0), &[q])?;
                    self.cx(c, q)?;
                    self.gate(GateKind::Ry(gamma / 2.0), &[q])?;
                    self.gate(GateKind::Rz(beta), &[q])?;
                    self.gate(GateKind::Rz(alpha), &[c])
                }
                other => Err(Error::Compile(format!(
                    "lowering of CONTROLLED {} is not supported; only single-qubit targets are",
                    other.name()
                ))),
            },
        }
    }
}

/// Rewrites a circuit over {CNOT, RZ, RY, X}.
pub fn lower(circuit: &Circuit) -> Result<Circuit> {
    let mut l = Lowering {
        out: Circuit::new(circuit.qubit_count()),
    };
    for g in circuit.gates() {
        l.lower(&g.kind, &g.targets)?;
    }
    Ok(l.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::circuit_to_unitary;
    use crate::linalg::{c, max_abs_diff_up_to_phase};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(kind: GateKind) {
        let n = kind.arity();
        let targets: Vec<usize> = (0..n).rev().collect();
        let mut circ = Circuit::new(n);
        circ.push(kind.clone(), &targets).unwrap();
        let lowered = lower(&circ).unwrap();
        for g in lowered.gates() {
            assert!(matches!(g.kind, GateKind::X | GateKind::Ry(_) | GateKind::Rz(_) | GateKind::Cnot));
        }
        let a = circuit_to_unitary(&circ).unwrap();
        let b = circuit_to_unitary(&lowered).unwrap();
        assert!(max_abs_diff_up_to_phase(a.matrix(), b.matrix()) < 1e-10, "{kind:?}");
    }

    #[test]
    fn zyz_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (a, b, g, d) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.0..3.0), rng.gen_range(-3.0..3.0));
            let u = GateKind::Rz(b).matrix() * GateKind::Ry(g).matrix() * GateKind::Rz(d).matrix() * Complex64::from_polar(1.0, a);
            let (a2, b2, g2, d2) = zyz_decompose(&u);
            let v = GateKind::Rz(b2).matrix() * GateKind::Ry(g2).matrix() * GateKind::Rz(d2).matrix() * Complex64::from_polar(1.0, a2);
            assert!((u - v).norm() < 1e-10);
        }
        let x = GateKind::X.matrix();
        let (a, b, g, d) = zyz_decompose(&x);
        let v = GateKind::Rz(b).matrix() * GateKind::Ry(g).matrix() * GateKind::Rz(d).matrix() * Complex64::from_polar(1.0, a);
        assert!((x - v).norm() < 1e-10);
    }

    #[test]
    fn lowering_is_exact_up_to_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let t = rng.gen_range(-3.0..3.0);
            for kind in [
                GateKind::Phase(t),
                GateKind::Swap,
                GateKind::ZzPhase(t),
                GateKind::Xy(t),
                GateKind::XyFused(t),
                GateKind::Controlled(Box::new(GateKind::Ry(t))),
                GateKind::Controlled(Box::new(GateKind::Phase(t))),
                GateKind::Controlled(Box::new(GateKind::GeneralizedHadamard {
                    u: c(t.cos(), 0.0),
                    v: c(t.sin(), 0.0),
                })),
                GateKind::Controlled(Box::new(GateKind::X)),
            ] {
                check(kind);
            }
        }
    }

    #[test]
    fn unsupported_controlled_gate() {
        let mut circ = Circuit::new(3);
        circ.push(GateKind::Controlled(Box::new(GateKind::Swap)), &[0, 1, 2]).unwrap();
        assert!(matches!(lower(&circ), Err(Error::Compile(_))));
    }
}
