//! Dense complex matrices used as verification oracles and small operators.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const UNITARY_TOL: f64 = 1e-9;
pub const HERMITIAN_TOL: f64 = 1e-9;
pub const MAX_EXPM_DIM: usize = 4096;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A square matrix known to be unitary within [`UNITARY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary(CMatrix);

impl DenseUnitary {
    pub fn new(m: CMatrix) -> Result<Self> {
        let dev = unitarity_deviation(&m);
        if dev > UNITARY_TOL || !m.is_square() {
            return Err(Error::NotUnitary(dev));
        }
        Ok(DenseUnitary(m))
    }

    pub fn identity(dim: usize) -> Self {
        DenseUnitary(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        DenseUnitary(self.0.adjoint())
    }

    /// Matrix product `self * rhs` (rhs acts first).
    pub fn compose(&self, rhs: &DenseUnitary) -> Self {
        DenseUnitary(&self.0 * &rhs.0)
    }
}

/// Largest entrywise deviation of `m† m` from the identity.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let prod = m.adjoint() * m;
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((prod[(i, j)] - target).norm());
        }
    }
    dev
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Entrywise distance after removing the best global phase of `b` relative to `a`.
pub fn max_abs_diff_up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `exp(-i H)` for Hermitian `H` via eigendecomposition.
pub fn expm_hermitian(h: &CMatrix) -> Result<DenseUnitary> {
    expm_hermitian_scaled(h, 1.0)
}

/// `exp(-i t H)` for Hermitian `H` via eigendecomposition.
pub fn expm_hermitian_scaled(h: &CMatrix, t: f64) -> Result<DenseUnitary> {
    let dev = hermiticity_deviation(h);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let n = h.nrows();
    if n > MAX_EXPM_DIM {
        return Err(Error::resource(format!(
            "matrix exponential of dimension {n} exceeds {MAX_EXPM_DIM}"
        )));
    }
    // symmetrize away round-off before the eigensolver
    let sym = (h + h.adjoint()).scale(0.5);
    let scale = 1.0 + sym.norm();
    let eig = [1e-15, 1e-13].iter().find_map(|&eps| {
        let eig = SymmetricEigen::try_new(sym.clone(), eps, 0)?;
        let rebuilt = &eig.eigenvectors
            * CMatrix::from_diagonal(&eig.eigenvalues.map(re))
            * eig.eigenvectors.adjoint();
        ((rebuilt - &sym).norm() <= 1e-12 * scale).then_some(eig)
    });
    let u = match eig {
        Some(eig) => {
            let v = &eig.eigenvectors;
            let mut scaled = v.clone();
            for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, -t * lambda);
                for row in 0..n {
                    scaled[(row, k)] *= phase;
                }
            }
            scaled * v.adjoint()
        }
        // Padé scaling and squaring when no eigensolver tolerance reproduces H
        None => sym.map(|z| z * c(0.0, -t)).exp(),
    };
    DenseUnitary::new(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn element(self, row: usize, col: usize) -> Complex64 {
        match (self, row, col) {
            (Pauli::I, r, c) if r == c => re(1.0),
            (Pauli::X, r, c) if r != c => re(1.0),
            (Pauli::Y, 0, 1) => c(0.0, -1.0),
            (Pauli::Y, 1, 0) => c(0.0, 1.0),
            (Pauli::Z, 0, 0) => re(1.0),
            (Pauli::Z, 1, 1) => re(-1.0),
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

/// Dense Pauli string on `qubits` qubits; qubit `q` is bit `q` of the basis index.
pub fn pauli_string(qubits: usize, ops: &[(usize, Pauli)]) -> CMatrix {
    let dim = 1usize << qubits;
    let mut per_qubit = vec![Pauli::I; qubits];
    for &(q, p) in ops {
        per_qubit[q] = p;
    }
    CMatrix::from_fn(dim, dim, |row, col| {
        let mut acc = re(1.0);
        for (q, p) in per_qubit.iter().enumerate() {
            acc *= p.element((row >> q) & 1, (col >> q) & 1);
            if acc == Complex64::new(0.0, 0.0) {
                break;
            }
        }
        acc
    })
}

/// `X_a X_b + Y_a Y_b` on `qubits` qubits.
pub fn xy_pair(qubits: usize, a: usize, b: usize) -> CMatrix {
    pauli_string(qubits, &[(a, Pauli::X), (b, Pauli::X)])
        + pauli_string(qubits, &[(a, Pauli::Y), (b, Pauli::Y)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_zero_is_identity() {
        let u = expm_hermitian(&CMatrix::zeros(4, 4)).unwrap();
        assert!(max_abs_diff(u.matrix(), &CMatrix::identity(4, 4)) < 1e-14);
    }

    #[test]
    fn expm_of_pauli_z() {
        let beta = 0.37;
        let z = pauli_string(1, &[(0, Pauli::Z)]);
        let u = expm_hermitian_scaled(&z, beta).unwrap();
        assert!((u.matrix()[(0, 0)] - Complex64::from_polar(1.0, -beta)).norm() < 1e-12);
        assert!((u.matrix()[(1, 1)] - Complex64::from_polar(1.0, beta)).norm() < 1e-12);
        assert!(u.matrix()[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn expm_xy_pair_single_excitation_block() {
        // hand diagonalization: on {|01>,|10>} XX+YY = 2 sigma_x
        let beta = 0.61;
        let u = expm_hermitian_scaled(&xy_pair(2, 0, 1), beta).unwrap();
        let m = u.matrix();
        let (cs, sn) = ((2.0 * beta).cos(), (2.0 * beta).sin());
        assert!((m[(1, 1)] - re(cs)).norm() < 1e-12);
        assert!((m[(2, 2)] - re(cs)).norm() < 1e-12);
        assert!((m[(1, 2)] - c(0.0, -sn)).norm() < 1e-12);
        assert!((m[(2, 1)] - c(0.0, -sn)).norm() < 1e-12);
        assert!((m[(0, 0)] - re(1.0)).norm() < 1e-12);
        assert!((m[(3, 3)] - re(1.0)).norm() < 1e-12);
        // series expansion cross-check
        let h = xy_pair(2, 0, 1);
        let mut term = CMatrix::identity(4, 4);
        let mut series = CMatrix::identity(4, 4);
        for k in 1..40 {
            term = &term * &h * c(0.0, -beta / k as f64);
            series += &term;
        }
        assert!(max_abs_diff(&series, m) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = re(1.0);
        assert!(matches!(expm_hermitian(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn phase_insensitive_distance() {
        let a = CMatrix::identity(3, 3);
        let b = a.map(|x| x * c(0.0, 1.0));
        assert!(max_abs_diff(&a, &b) > 0.5);
        assert!(max_abs_diff_up_to_phase(&a, &b) < 1e-15);
    }

    #[test]
    fn expm_of_highly_degenerate_hamiltonian() {
        // the complete XY Hamiltonian on four qubits splits into weight blocks
        // with repeated eigenvalues; compare against the Padé exponential
        let h = (0..4)
            .flat_map(|a| (a + 1..4).map(move |b| (a, b)))
            .fold(CMatrix::zeros(16, 16), |acc, (a, b)| acc + xy_pair(4, a, b));
        let t = 0.613;
        let u = expm_hermitian_scaled(&h, t).unwrap();
        let pade = h.map(|z| z * c(0.0, -t)).exp();
        assert!(max_abs_diff(u.matrix(), &pade) < 1e-12);
    }
}
