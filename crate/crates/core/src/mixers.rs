//! XY and X mixers: restricted κ×κ forms on one node's color register, their
//! partitioned variants, and full-binary embeddings.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::SpaceKind;
use crate::error::{Error, Result};
use crate::linalg::{c, expm_hermitian_scaled, re, spectral_norm, xy_pair, CMatrix, DenseUnitary};
use crate::statesim::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixerFamily {
    X,
    XyRing,
    XyComplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixerMode {
    #[default]
    Simultaneous,
    ParityPartitioned,
    BinaryPartitioned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct MixerSpec {
    pub family: MixerFamily,
    pub mode: MixerMode,
    pub kappa: usize,
}

impl MixerSpec {
    pub fn new(family: MixerFamily, mode: MixerMode, kappa: usize) -> Result<Self> {
        if kappa < 2 {
            return Err(Error::arg(format!("κ must be at least 2, got {kappa}")));
        }
        match (family, mode) {
            (_, MixerMode::Simultaneous) => {}
            (MixerFamily::XyRing, MixerMode::ParityPartitioned) => {
                parity_partitions(kappa)?;
            }
            (MixerFamily::XyComplete, MixerMode::BinaryPartitioned) => {
                binary_partition_pairs(kappa)?;
            }
            _ => {
                return Err(Error::arg(format!(
                    "mode {mode:?} is not available for the {family:?} mixer"
                )))
            }
        }
        Ok(MixerSpec {
            family,
            mode,
            kappa,
        })
    }

    pub fn ring(kappa: usize) -> Result<Self> {
        MixerSpec::new(MixerFamily::XyRing, MixerMode::Simultaneous, kappa)
    }

    pub fn complete(kappa: usize) -> Result<Self> {
        MixerSpec::new(MixerFamily::XyComplete, MixerMode::Simultaneous, kappa)
    }

    pub fn x(kappa: usize) -> Result<Self> {
        MixerSpec::new(MixerFamily::X, MixerMode::Simultaneous, kappa)
    }

    /// The X mixer leaves the feasible space, so it needs the full binary space.
    pub fn check_space(&self, kind: SpaceKind) -> Result<()> {
        if self.family == MixerFamily::X && kind != SpaceKind::FullBinary {
            return Err(Error::SpaceMismatch {
                expected: "full_binary space for the X mixer".into(),
                actual: format!("{kind:?}"),
            });
        }
        Ok(())
    }
}

/// Hopping matrix on one node's single-excitation subspace: 2 per coupled pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedMixerMatrix {
    pub kappa: usize,
    pub h: DMatrix<f64>,
}

impl RestrictedMixerMatrix {
    pub fn from_pairs(kappa: usize, pairs: &[(usize, usize)]) -> Self {
        let mut h = DMatrix::zeros(kappa, kappa);
        for &(a, b) in pairs {
            h[(a, b)] = 2.0;
            h[(b, a)] = 2.0;
        }
        RestrictedMixerMatrix { kappa, h }
    }

    pub fn complex(&self) -> CMatrix {
        self.h.map(re)
    }
}

/// Coupled color pairs of the ring C_κ; for κ = 2 the single pair appears once.
pub fn ring_pairs(kappa: usize) -> Vec<(usize, usize)> {
    match kappa {
        0 | 1 => vec![],
        2 => vec![(0, 1)],
        _ => (0..kappa).map(|c| (c, (c + 1) % kappa)).collect(),
    }
}

pub fn complete_pairs(kappa: usize) -> Vec<(usize, usize)> {
    (0..kappa).flat_map(|a| (a + 1..kappa).map(move |b| (a, b))).collect()
}

pub fn restricted_hamiltonian(family: MixerFamily, kappa: usize) -> Result<RestrictedMixerMatrix> {
    if kappa < 2 {
        return Err(Error::arg(format!("κ must be at least 2, got {kappa}")));
    }
    match family {
        MixerFamily::XyRing => Ok(RestrictedMixerMatrix::from_pairs(kappa, &ring_pairs(kappa))),
        MixerFamily::XyComplete => Ok(RestrictedMixerMatrix::from_pairs(kappa, &complete_pairs(kappa))),
        MixerFamily::X => Err(Error::arg("the X mixer has no single-excitation restriction")),
    }
}

/// Eigenvalues of the restricted ring Hamiltonian in DFT order:
/// λ_k = Σ_j H_0j cos(2πjk/κ), i.e. 4cos(2πk/κ) for κ ≥ 3 and ±2 for κ = 2.
pub fn ring_energies(kappa: usize) -> Vec<f64> {
    let h = RestrictedMixerMatrix::from_pairs(kappa, &ring_pairs(kappa)).h;
    (0..kappa)
        .map(|k| {
            (0..kappa)
                .map(|j| h[(0, j)] * (2.0 * PI * (j * k) as f64 / kappa as f64).cos())
                .sum()
        })
        .collect()
}

/// exp(−iβH_ring) through the DFT diagonalization of the circulant hopping matrix.
pub fn ring_mixer_unitary(kappa: usize, beta: f64) -> Result<DenseUnitary> {
    if kappa < 2 {
        return Err(Error::arg(format!("κ must be at least 2, got {kappa}")));
    }
    let phases: Vec<Complex64> = ring_energies(kappa)
        .into_iter()
        .map(|e| Complex64::from_polar(1.0, -beta * e))
        .collect();
    let omega = 2.0 * PI / kappa as f64;
    let m = CMatrix::from_fn(kappa, kappa, |a, b| {
        let shift = a as f64 - b as f64;
        phases
            .iter()
            .enumerate()
            .map(|(k, p)| p * Complex64::from_polar(1.0, omega * k as f64 * shift))
            .sum::<Complex64>()
            / kappa as f64
    });
    DenseUnitary::new(m)
}

/// Closed form from the two eigenspaces of 2(J − I).
pub fn complete_mixer_unitary(kappa: usize, beta: f64) -> Result<DenseUnitary> {
    if kappa < 2 {
        return Err(Error::arg(format!("κ must be at least 2, got {kappa}")));
    }
    let k = kappa as f64;
    let uniform = Complex64::from_polar(1.0, -2.0 * beta * (k - 1.0));
    let rest = Complex64::from_polar(1.0, 2.0 * beta);
    let m = CMatrix::from_fn(kappa, kappa, |a, b| {
        let proj = 1.0 / k;
        let ident = if a == b { 1.0 } else { 0.0 };
        uniform * proj + rest * (ident - proj)
    });
    DenseUnitary::new(m)
}

/// Odd pairs {(0,1),(2,3),…} and even pairs {(1,2),…,(κ−1,0)}; κ must be even.
/// For κ = 2 the even set is empty since its only pair already sits in the odd set.
pub fn parity_partitions(kappa: usize) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    if kappa < 2 || kappa % 2 == 1 {
        return Err(Error::arg(format!(
            "parity partitioning splits the ring into two matchings and needs an even κ, got {kappa}"
        )));
    }
    let odd = (0..kappa).step_by(2).map(|c| (c, c + 1)).collect();
    let even = if kappa == 2 {
        vec![]
    } else {
        (1..kappa).step_by(2).map(|c| (c, (c + 1) % kappa)).collect()
    };
    Ok((odd, even))
}

/// exp(−iβ·Σ_pairs 2σ^x) for a matching: a product of disjoint 2×2 rotations.
pub fn matching_unitary(kappa: usize, pairs: &[(usize, usize)], beta: f64) -> Result<DenseUnitary> {
    let mut seen = vec![false; kappa];
    let mut m = CMatrix::identity(kappa, kappa);
    let (cos, sin) = ((2.0 * beta).cos(), (2.0 * beta).sin());
    for &(a, b) in pairs {
        if a >= kappa || b >= kappa || a == b || seen[a] || seen[b] {
            return Err(Error::arg(format!("pairs {pairs:?} do not form a matching on {kappa} colors")));
        }
        seen[a] = true;
        seen[b] = true;
        m[(a, a)] = re(cos);
        m[(b, b)] = re(cos);
        m[(a, b)] = c(0.0, -sin);
        m[(b, a)] = c(0.0, -sin);
    }
    DenseUnitary::new(m)
}

/// exp(−iβH_even)·exp(−iβH_odd): the odd matching acts first.
pub fn partitioned_ring_unitary(kappa: usize, beta: f64) -> Result<DenseUnitary> {
    let (odd, even) = parity_partitions(kappa)?;
    let u_odd = matching_unitary(kappa, &odd, beta)?;
    let u_even = matching_unitary(kappa, &even, beta)?;
    Ok(u_even.compose(&u_odd))
}

/// Pairings c ↔ c⊕t for t = 1…κ−1, each listed with c < c⊕t.
pub fn binary_partition_pairs(kappa: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if kappa < 2 || !kappa.is_power_of_two() {
        return Err(Error::arg(format!("binary partitions need κ a power of two, got {kappa}")));
    }
    Ok((1..kappa)
        .map(|t| (0..kappa).filter(|&c| c < c ^ t).map(|c| (c, c ^ t)).collect())
        .collect())
}

/// Product of the per-mask exponentials in ascending mask order.
pub fn partitioned_complete_unitary(kappa: usize, beta: f64) -> Result<DenseUnitary> {
    let order: Vec<usize> = (1..kappa).collect();
    partitioned_complete_unitary_ordered(kappa, beta, &order)
}

/// Product of the per-mask exponentials, applying masks in the given order.
pub fn partitioned_complete_unitary_ordered(kappa: usize, beta: f64, masks: &[usize]) -> Result<DenseUnitary> {
    let partitions = binary_partition_pairs(kappa)?;
    let mut u = DenseUnitary::identity(kappa);
    for &t in masks {
        if t == 0 || t >= kappa {
            return Err(Error::arg(format!("mask {t} out of range for κ = {kappa}")));
        }
        u = matching_unitary(kappa, &partitions[t - 1], beta)?.compose(&u);
    }
    Ok(u)
}

/// Spectral norm of [H_even, H_odd] on the single-excitation subspace.
pub fn parity_commutator_check(kappa: usize) -> Result<f64> {
    if kappa < 4 {
        return Err(Error::arg(format!("commutator check needs an even κ ≥ 4, got {kappa}")));
    }
    let (odd, even) = parity_partitions(kappa)?;
    let h_odd = RestrictedMixerMatrix::from_pairs(kappa, &odd).complex();
    let h_even = RestrictedMixerMatrix::from_pairs(kappa, &even).complex();
    Ok(spectral_norm(&(&h_even * &h_odd - &h_odd * &h_even)))
}

/// Σ_pairs (X_a X_b + Y_a Y_b) on a κ-qubit register.
pub fn full_pair_hamiltonian(kappa: usize, pairs: &[(usize, usize)]) -> CMatrix {
    let dim = 1 << kappa;
    pairs
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, &(a, b)| acc + xy_pair(kappa, a, b))
}

/// The ordered factors of a mixer as lists of coupled pairs; factor 0 acts first.
pub fn mixer_factors(spec: &MixerSpec) -> Result<Vec<Vec<(usize, usize)>>> {
    let kappa = spec.kappa;
    match (spec.family, spec.mode) {
        (MixerFamily::X, _) => Err(Error::arg("the X mixer is not built from XY pairs")),
        (MixerFamily::XyRing, MixerMode::Simultaneous) => Ok(vec![ring_pairs(kappa)]),
        (MixerFamily::XyComplete, MixerMode::Simultaneous) => Ok(vec![complete_pairs(kappa)]),
        (MixerFamily::XyRing, MixerMode::ParityPartitioned) => {
            let (odd, even) = parity_partitions(kappa)?;
            Ok(vec![odd, even])
        }
        (MixerFamily::XyComplete, MixerMode::BinaryPartitioned) => binary_partition_pairs(kappa),
        (family, mode) => Err(Error::arg(format!("mode {mode:?} is not available for {family:?}"))),
    }
}

/// κ×κ node unitary on the feasible space.
pub fn restricted_node_unitary(spec: &MixerSpec, beta: f64) -> Result<DenseUnitary> {
    let kappa = spec.kappa;
    match (spec.family, spec.mode) {
        (MixerFamily::XyRing, MixerMode::Simultaneous) => ring_mixer_unitary(kappa, beta),
        (MixerFamily::XyComplete, MixerMode::Simultaneous) => complete_mixer_unitary(kappa, beta),
        (MixerFamily::XyRing, MixerMode::ParityPartitioned) => partitioned_ring_unitary(kappa, beta),
        (MixerFamily::XyComplete, MixerMode::BinaryPartitioned) => partitioned_complete_unitary(kappa, beta),
        _ => Err(Error::SpaceMismatch {
            expected: "an XY mixer".into(),
            actual: format!("{spec:?} in the feasible space"),
        }),
    }
}

/// 2^κ×2^κ node unitary on one color register, built from dense Pauli exponentials.
pub fn full_node_unitary(spec: &MixerSpec, beta: f64) -> Result<DenseUnitary> {
    let kappa = spec.kappa;
    let dim = 1 << kappa;
    let mut u = DenseUnitary::identity(dim);
    for pairs in mixer_factors(spec)? {
        let factor = expm_hermitian_scaled(&full_pair_hamiltonian(kappa, &pairs), beta)?;
        u = factor.compose(&u);
    }
    Ok(u)
}

/// ⊗_q exp(−iβσ^x_q) on the full binary space.
pub fn x_mixer_apply(state: &mut StateVector, beta: f64) -> Result<()> {
    state.space().ensure_kind(SpaceKind::FullBinary)?;
    let (cos, sin) = (beta.cos(), beta.sin());
    let rx = CMatrix::from_row_slice(2, 2, &[re(cos), c(0.0, -sin), c(0.0, -sin), re(cos)]);
    for q in 0..state.space().qubits() {
        state.apply_gate(&rx, &[q])?;
    }
    Ok(())
}

/// Applies one mixing layer to every node.
pub fn apply_mixer(state: &mut StateVector, spec: &MixerSpec, beta: f64) -> Result<()> {
    let space = *state.space();
    spec.check_space(space.kind)?;
    if space.kappa != spec.kappa {
        return Err(Error::SpaceMismatch {
            expected: format!("κ = {}", spec.kappa),
            actual: format!("κ = {}", space.kappa),
        });
    }
    match space.kind {
        SpaceKind::FullBinary if spec.family == MixerFamily::X => x_mixer_apply(state, beta),
        SpaceKind::FullBinary => {
            let u = full_node_unitary(spec, beta)?;
            let kappa = spec.kappa;
            for v in 0..space.n {
                let targets: Vec<usize> = (0..kappa).rev().map(|c| v * kappa + c).collect();
                state.apply_gate(u.matrix(), &targets)?;
            }
            Ok(())
        }
        SpaceKind::Feasible => {
            let u = restricted_node_unitary(spec, beta)?;
            let kappa = spec.kappa;
            let row_major: Vec<Complex64> = (0..kappa * kappa).map(|k| u.matrix()[(k / kappa, k % kappa)]).collect();
            for v in 0..space.n {
                state.apply_node_matrix_unchecked(v, &row_major);
            }
            Ok(())
        }
    }
}

/// Color permutations σ with U σ = σ U for the node unitary at generic β.
/// Candidates are the dihedral group of the ring or all of S_κ for the complete mixer.
pub fn color_symmetries(spec: &MixerSpec) -> Result<Vec<Vec<usize>>> {
    let kappa = spec.kappa;
    let candidates: Vec<Vec<usize>> = match spec.family {
        MixerFamily::XyRing => (0..kappa)
            .flat_map(|shift| {
                [
                    (0..kappa).map(|c| (c + shift) % kappa).collect::<Vec<_>>(),
                    (0..kappa).map(|c| (shift + kappa - c) % kappa).collect(),
                ]
            })
            .collect(),
        _ => crate::graphs::permutations(kappa),
    };
    let probes = [0.3127, 1.1093];
    let unitaries: Vec<DenseUnitary> = probes
        .iter()
        .map(|&b| match spec.family {
            MixerFamily::X => Ok(DenseUnitary::identity(kappa)),
            _ => restricted_node_unitary(spec, b),
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Vec<usize>> = candidates
        .into_iter()
        .filter(|perm| {
            unitaries.iter().all(|u| {
                let m = u.matrix();
                (0..kappa).all(|a| (0..kappa).all(|b| (m[(perm[a], perm[b])] - m[(a, b)]).norm() < 1e-10))
            })
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, pauli_string, Pauli};
    use crate::statesim::StateVector;
    use crate::encoding::SpaceDescriptor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn oracle(family: MixerFamily, kappa: usize, beta: f64) -> DenseUnitary {
        let h = restricted_hamiltonian(family, kappa).unwrap().complex();
        expm_hermitian_scaled(&h, beta).unwrap()
    }

    /// Restriction of a 2^κ operator to the weight-1 strings, color c ↔ bit c.
    fn restrict(m: &CMatrix, kappa: usize) -> CMatrix {
        CMatrix::from_fn(kappa, kappa, |a, b| m[(1 << a, 1 << b)])
    }

    #[test]
    fn restricted_examples() {
        let ring2 = restricted_hamiltonian(MixerFamily::XyRing, 2).unwrap();
        assert_eq!(ring2.h, DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]));
        let comp3 = restricted_hamiltonian(MixerFamily::XyComplete, 3).unwrap();
        let mut eig: Vec<f64> = comp3.h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert!((eig[0] + 2.0).abs() < 1e-12 && (eig[1] + 2.0).abs() < 1e-12 && (eig[2] - 4.0).abs() < 1e-12);
        assert!(restricted_hamiltonian(MixerFamily::X, 3).is_err());
    }

    #[test]
    fn restriction_of_pauli_hamiltonian() {
        for kappa in 2..=4 {
            for family in [MixerFamily::XyRing, MixerFamily::XyComplete] {
                let pairs = if family == MixerFamily::XyRing { ring_pairs(kappa) } else { complete_pairs(kappa) };
                // ½ Σ over ordered pairs equals the unordered sum
                let ordered: CMatrix = pairs
                    .iter()
                    .flat_map(|&(a, b)| [(a, b), (b, a)])
                    .map(|(a, b)| xy_pair(kappa, a, b) * re(0.5))
                    .fold(CMatrix::zeros(1 << kappa, 1 << kappa), |acc, m| acc + m);
                let restricted = restricted_hamiltonian(family, kappa).unwrap().complex();
                assert!(max_abs_diff(&restrict(&ordered, kappa), &restricted) < 1e-14);
            }
        }
    }

    #[test]
    fn ring_energy_scale() {
        for kappa in 3..=8 {
            let energies = ring_energies(kappa);
            for (k, e) in energies.iter().enumerate() {
                assert!((e - 4.0 * (2.0 * PI * k as f64 / kappa as f64).cos()).abs() < 1e-12);
            }
        }
        assert_eq!(ring_energies(2), vec![2.0, -2.0]);
    }

    #[test]
    fn ring_unitary_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kappa in 2..=8 {
            for _ in 0..5 {
                let beta = rng.gen_range(-PI..PI);
                let fast = ring_mixer_unitary(kappa, beta).unwrap();
                assert!(max_abs_diff(fast.matrix(), oracle(MixerFamily::XyRing, kappa, beta).matrix()) < 1e-10);
            }
        }
        assert!(max_abs_diff(ring_mixer_unitary(5, 0.0).unwrap().matrix(), &CMatrix::identity(5, 5)) < 1e-14);
        let beta = 0.41;
        let two = ring_mixer_unitary(2, beta).unwrap();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[re((2.0 * beta).cos()), c(0.0, -(2.0 * beta).sin()), c(0.0, -(2.0 * beta).sin()), re((2.0 * beta).cos())],
        );
        assert!(max_abs_diff(two.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn complete_unitary_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kappa in 2..=8 {
            let beta = rng.gen_range(-PI..PI);
            let fast = complete_mixer_unitary(kappa, beta).unwrap();
            assert!(max_abs_diff(fast.matrix(), oracle(MixerFamily::XyComplete, kappa, beta).matrix()) < 1e-10);
        }
        let u = complete_mixer_unitary(3, 0.7).unwrap();
        let uniform = nalgebra::DVector::from_element(3, re(1.0 / 3f64.sqrt()));
        let image = u.matrix() * &uniform;
        let phase = image[0] / uniform[0];
        assert!((phase.norm() - 1.0).abs() < 1e-14);
        assert!((image - uniform * phase).norm() < 1e-14);
    }

    #[test]
    fn parity_examples() {
        let (odd, even) = parity_partitions(4).unwrap();
        assert_eq!(odd, vec![(0, 1), (2, 3)]);
        assert_eq!(even, vec![(1, 2), (3, 0)]);
        let (odd, even) = parity_partitions(6).unwrap();
        assert_eq!((odd.len(), even.len()), (3, 3));
        for set in [&odd, &even] {
            let mut colors: Vec<usize> = set.iter().flat_map(|&(a, b)| [a, b]).collect();
            colors.sort();
            assert_eq!(colors, (0..6).collect::<Vec<_>>());
        }
        let err = parity_partitions(5).unwrap_err();
        assert!(err.to_string().contains("even"));
        assert_eq!(parity_partitions(2).unwrap(), (vec![(0, 1)], vec![]));
    }

    #[test]
    fn partitioned_ring_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let beta = rng.gen_range(-PI..PI);
            let part = partitioned_ring_unitary(4, beta).unwrap();
            assert!(max_abs_diff(part.matrix(), ring_mixer_unitary(4, beta).unwrap().matrix()) < 1e-10);
        }
        let diff = partitioned_ring_unitary(6, 0.7).unwrap().into_matrix() - ring_mixer_unitary(6, 0.7).unwrap().into_matrix();
        assert!(spectral_norm(&diff) > 1e-3);
        assert!(max_abs_diff(partitioned_ring_unitary(6, 0.0).unwrap().matrix(), &CMatrix::identity(6, 6)) < 1e-15);
        let two = partitioned_ring_unitary(2, 0.3).unwrap();
        assert!(max_abs_diff(two.matrix(), ring_mixer_unitary(2, 0.3).unwrap().matrix()) < 1e-14);
    }

    #[test]
    fn binary_partition_examples() {
        let four = binary_partition_pairs(4).unwrap();
        assert_eq!(four, vec![vec![(0, 1), (2, 3)], vec![(0, 2), (1, 3)], vec![(0, 3), (1, 2)]]);
        let eight = binary_partition_pairs(8).unwrap();
        assert_eq!(eight[2], vec![(0, 3), (1, 2), (4, 7), (5, 6)]);
        assert_eq!(binary_partition_pairs(2).unwrap(), vec![vec![(0, 1)]]);
        assert!(binary_partition_pairs(6).is_err());
        for kappa in [2, 4, 8, 16] {
            let mut all: Vec<(usize, usize)> = binary_partition_pairs(kappa).unwrap().concat();
            all.sort();
            assert_eq!(all, complete_pairs(kappa));
        }
    }

    #[test]
    fn partitioned_complete_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for kappa in [2, 4, 8] {
            for _ in 0..20 {
                let beta = rng.gen_range(-PI..PI);
                let part = partitioned_complete_unitary(kappa, beta).unwrap();
                assert!(max_abs_diff(part.matrix(), complete_mixer_unitary(kappa, beta).unwrap().matrix()) < 1e-9);
            }
        }
        let beta = 0.83;
        let forward = partitioned_complete_unitary_ordered(8, beta, &[1, 2, 3, 4, 5, 6, 7]).unwrap();
        let shuffled = partitioned_complete_unitary_ordered(8, beta, &[5, 2, 7, 1, 4, 6, 3]).unwrap();
        assert!(max_abs_diff(forward.matrix(), shuffled.matrix()) < 1e-9);
        assert!(max_abs_diff(partitioned_complete_unitary(8, 0.0).unwrap().matrix(), &CMatrix::identity(8, 8)) < 1e-15);
    }

    #[test]
    fn x_mixer_examples() {
        let space = SpaceDescriptor::full_binary(1, 3).unwrap();
        let start = StateVector::basis(space, 0).unwrap();
        let mut same = start.clone();
        x_mixer_apply(&mut same, 0.0).unwrap();
        assert_eq!(same, start);
        let mut flipped = start.clone();
        x_mixer_apply(&mut flipped, PI / 2.0).unwrap();
        let expected = c(0.0, -1.0).powu(3);
        assert!((flipped.amplitudes()[0b111] - expected).norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut amps: Vec<Complex64> = (0..8).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let state = StateVector::new(space, amps).unwrap();
        let beta = 0.77;
        let hx = (0..3).fold(CMatrix::zeros(8, 8), |acc, q| acc + pauli_string(3, &[(q, Pauli::X)]));
        let u = expm_hermitian_scaled(&hx, beta).unwrap();
        let mut dense = state.clone();
        dense.apply_dense(&u).unwrap();
        let mut fast = state;
        x_mixer_apply(&mut fast, beta).unwrap();
        let diff = fast.amplitudes().iter().zip(dense.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn commutator_norms() {
        assert!(parity_commutator_check(4).unwrap() < 1e-12);
        for kappa in (6..=16).step_by(2) {
            let norm = parity_commutator_check(kappa).unwrap();
            let closed = (1..kappa).map(|j| (4.0 * PI * j as f64 / kappa as f64).sin().abs()).fold(0.0, f64::max) * 8.0;
            assert!(norm > 1e-3, "κ = {kappa}");
            assert!(norm <= 8.0 + 1e-9);
            assert!((norm - closed).abs() < 1e-9, "κ = {kappa}: {norm} vs {closed}");
        }
    }

    #[test]
    fn dense_pair_commutator_identity() {
        // qubits j−1, j, j+1 = 0, 1, 2 inside a 4-qubit register
        let a = xy_pair(4, 0, 1);
        let b = xy_pair(4, 1, 2);
        let comm = &a * &b - &b * &a;
        let rhs = (pauli_string(4, &[(0, Pauli::X), (1, Pauli::Z), (2, Pauli::Y)])
            - pauli_string(4, &[(0, Pauli::Y), (1, Pauli::Z), (2, Pauli::X)]))
            * c(0.0, 2.0);
        assert!(max_abs_diff(&comm, &rhs) < 1e-14);
    }

    #[test]
    fn restricted_parity_matchings_are_permutations() {
        for kappa in (2..=12).step_by(2) {
            let (odd, even) = parity_partitions(kappa).unwrap();
            let h_odd = RestrictedMixerMatrix::from_pairs(kappa, &odd).h;
            let h_even = RestrictedMixerMatrix::from_pairs(kappa, &even).h;
            let is_perm = |h: &DMatrix<f64>| (0..kappa).all(|r| (0..kappa).map(|c| h[(r, c)]).sum::<f64>() == 2.0);
            assert!(is_perm(&h_odd));
            if kappa > 2 {
                assert!(is_perm(&h_even));
            }
            let comm = &h_even * &h_odd - &h_odd * &h_even;
            assert_eq!(comm.abs().max() == 0.0, kappa <= 4, "κ = {kappa}");
        }
    }

    fn all_specs(kappa: usize) -> Vec<MixerSpec> {
        let mut specs = vec![MixerSpec::ring(kappa).unwrap(), MixerSpec::complete(kappa).unwrap()];
        if kappa % 2 == 0 {
            specs.push(MixerSpec::new(MixerFamily::XyRing, MixerMode::ParityPartitioned, kappa).unwrap());
        }
        if kappa.is_power_of_two() {
            specs.push(MixerSpec::new(MixerFamily::XyComplete, MixerMode::BinaryPartitioned, kappa).unwrap());
        }
        specs
    }

    #[test]
    fn full_node_unitaries_preserve_weight_and_restrict() {
        for kappa in 2..=4 {
            let z_tot = (0..kappa).fold(CMatrix::zeros(1 << kappa, 1 << kappa), |acc, q| {
                acc + pauli_string(kappa, &[(q, Pauli::Z)])
            });
            let h = full_pair_hamiltonian(kappa, &complete_pairs(kappa));
            assert!((&h * &z_tot - &z_tot * &h).norm() < 1e-14);
            for spec in all_specs(kappa) {
                let u = full_node_unitary(&spec, 0.613).unwrap();
                let m = u.matrix();
                for r in 0..1usize << kappa {
                    for col in 0..1usize << kappa {
                        if r.count_ones() != col.count_ones() {
                            assert!(m[(r, col)].norm() < 1e-12, "{spec:?} {}", m[(r, col)].norm());
                        }
                    }
                }
                let restricted = restricted_node_unitary(&spec, 0.613).unwrap();
                assert!(max_abs_diff(&restrict(m, kappa), restricted.matrix()) < 1e-10, "{spec:?}");
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(MixerSpec::new(MixerFamily::XyComplete, MixerMode::ParityPartitioned, 4).is_err());
        assert!(MixerSpec::new(MixerFamily::XyComplete, MixerMode::BinaryPartitioned, 6).is_err());
        assert!(MixerSpec::new(MixerFamily::XyRing, MixerMode::ParityPartitioned, 3).is_err());
        assert!(MixerSpec::new(MixerFamily::X, MixerMode::BinaryPartitioned, 4).is_err());
        assert!(MixerSpec::x(3).unwrap().check_space(SpaceKind::Feasible).is_err());
        assert!(MixerSpec::ring(1).is_err());
    }

    #[test]
    fn symmetry_groups() {
        assert_eq!(color_symmetries(&MixerSpec::ring(5).unwrap()).unwrap().len(), 10);
        assert_eq!(color_symmetries(&MixerSpec::complete(4).unwrap()).unwrap().len(), 24);
        assert_eq!(color_symmetries(&MixerSpec::ring(3).unwrap()).unwrap().len(), 6);
    }
}
