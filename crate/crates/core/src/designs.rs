//! Unitary ensembles, moment operators, frame potentials and design distances.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::{clifford_group, pauli_group, phase_key};
use crate::haar::{permutation_vector, Permutation};
use crate::linalg::{kron, operator_norm, orthonormalize, ComplexMatrix, C64, ONE};

/// Largest moment-operator dimension handled densely.
pub const DENSE_CAP: usize = 4096;

#[derive(Clone, Debug)]
pub enum UnitaryEnsemble {
    /// Weighted finite set; weights sum to one.
    Finite {
        dim: usize,
        members: Vec<(ComplexMatrix, f64)>,
    },
    /// The Haar measure on `U(dim)`.
    Haar { dim: usize },
}

impl UnitaryEnsemble {
    pub fn finite(members: Vec<(ComplexMatrix, f64)>) -> Result<Self> {
        let dim = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?
            .0
            .dim();
        for (u, w) in &members {
            if u.dim() != dim {
                return Err(Error::DimensionMismatch(
                    "ensemble members of different sizes".into(),
                ));
            }
            if !u.is_unitary(1e-12) {
                return Err(Error::InvalidArgument(
                    "ensemble member is not unitary".into(),
                ));
            }
            if *w < 0.0 {
                return Err(Error::InvalidArgument(format!("negative weight {w}")));
            }
        }
        let total: f64 = members.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}")));
        }
        Ok(Self::Finite { dim, members })
    }

    pub fn uniform(unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        let w = 1.0 / unitaries.len().max(1) as f64;
        Self::finite(unitaries.into_iter().map(|u| (u, w)).collect())
    }

    pub fn point(u: ComplexMatrix) -> Result<Self> {
        Self::finite(vec![(u, 1.0)])
    }

    pub fn clifford(n: usize) -> Result<Self> {
        let g = clifford_group(n)?;
        let w = 1.0 / g.len() as f64;
        Ok(Self::Finite {
            dim: 1 << n,
            members: g
                .elements()
                .iter()
                .map(|e| (e.unitary.clone(), w))
                .collect(),
        })
    }

    pub fn pauli(n: usize) -> Self {
        let ps = pauli_group(n);
        let w = 1.0 / ps.len() as f64;
        Self::Finite {
            dim: 1 << n,
            members: ps.iter().map(|p| (p.matrix(), w)).collect(),
        }
    }

    pub fn haar(dim: usize) -> Self {
        Self::Haar { dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Finite { dim, .. } | Self::Haar { dim } => *dim,
        }
    }

    pub fn members(&self) -> Option<&[(ComplexMatrix, f64)]> {
        match self {
            Self::Finite { members, .. } => Some(members),
            Self::Haar { .. } => None,
        }
    }

    /// Distribution of `U V` with `U ~ self`, `V ~ other`. Members equal up
    /// to global phase are merged, which leaves every moment unchanged.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        match (self, other) {
            (Self::Finite { members: a, .. }, Self::Finite { members: b, .. }) => {
                let mut index: HashMap<_, usize> = HashMap::new();
                let mut out: Vec<(ComplexMatrix, f64)> = Vec::new();
                for (u, wu) in a {
                    for (v, wv) in b {
                        let uv = u.matmul(v);
                        let key = phase_key(&uv);
                        match index.get(&key) {
                            Some(&k) => out[k].1 += wu * wv,
                            None => {
                                index.insert(key, out.len());
                                out.push((uv, wu * wv));
                            }
                        }
                    }
                }
                Ok(Self::Finite {
                    dim: self.dim(),
                    members: out,
                })
            }
            _ => Ok(Self::Haar { dim: self.dim() }),
        }
    }

    /// `k`-fold self-convolution.
    pub fn power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Self::point(ComplexMatrix::identity(self.dim()));
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.convolve(self)?;
        }
        Ok(acc)
    }
}

/// `E_ν[U^{⊗t} ⊗ conj(U)^{⊗t}]` on `dim^{2t}`.
#[derive(Clone, Debug)]
pub struct MomentOperator {
    pub t: usize,
    pub dim: usize,
    pub matrix: ComplexMatrix,
}

fn moment_size(dim: usize, t: usize) -> Result<usize> {
    match dim.checked_pow(2 * t as u32) {
        Some(s) if s <= DENSE_CAP => Ok(s),
        _ => Err(Error::ResourceCap(format!(
            "moment operator for dim {dim}, t {t} exceeds {DENSE_CAP} rows; use the matrix-free walk Hamiltonian"
        ))),
    }
}

pub fn moment_operator(ensemble: &UnitaryEnsemble, t: usize) -> Result<MomentOperator> {
    let dim = ensemble.dim();
    let size = moment_size(dim, t)?;
    let matrix = match ensemble {
        UnitaryEnsemble::Haar { .. } => return haar_moment_operator(dim, t),
        UnitaryEnsemble::Finite { members, .. } => members
            .par_iter()
            .map(|(u, w)| {
                let ut = u.kron_pow(t);
                kron(&ut, &ut.conj()).scale_real(*w)
            })
            .reduce(
                || ComplexMatrix::zeros(size),
                |mut a, b| {
                    a.add_scaled(&b, ONE);
                    a
                },
            ),
    };
    Ok(MomentOperator { t, dim, matrix })
}

/// Haar moment projector `Σ_{π,σ} (G⁻¹)_{πσ} |v_π⟩⟨v_σ|` with
/// `v_π = vec(V(π))` and `G_{πσ} = dim^{cycles(π⁻¹σ)}`.
pub fn haar_moment_operator(dim: usize, t: usize) -> Result<MomentOperator> {
    if t > dim {
        return Err(Error::InvalidArgument(format!(
            "permutation operators are linearly dependent for t = {t} > dim = {dim}; average over an exact design ensemble instead"
        )));
    }
    let size = moment_size(dim, t)?;
    let perms = Permutation::all(t);
    let m = perms.len();
    let gram = DMatrix::from_fn(m, m, |a, b| {
        (dim as f64).powi(perms[a].inverse().compose(&perms[b]).cycles() as i32)
    });
    let ginv = gram
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("singular permutation Gram matrix".into()))?;
    let vs: Vec<Vec<C64>> = perms
        .iter()
        .map(|p| permutation_vector(t, dim, p))
        .collect::<Result<_>>()?;
    let mut matrix = ComplexMatrix::zeros(size);
    for a in 0..m {
        for b in 0..m {
            let c = ginv[(a, b)];
            if c == 0.0 {
                continue;
            }
            matrix.add_scaled(&ComplexMatrix::outer(&vs[a], &vs[b])?, C64::new(c, 0.0));
        }
    }
    Ok(MomentOperator { t, dim, matrix })
}

/// Orthonormal basis of the Haar-fixed space `span{vec(V(π))}`, valid for
/// any `t` (including `t > dim`, where the permutation vectors are dependent).
pub fn haar_fixed_basis(dim: usize, t: usize) -> Result<Vec<Vec<C64>>> {
    dim.checked_pow(2 * t as u32)
        .filter(|&l| l <= 1 << 24)
        .ok_or_else(|| {
            Error::ResourceCap(format!(
                "fixed-space vectors for dim {dim}, t {t} are too long"
            ))
        })?;
    let vs: Vec<Vec<C64>> = Permutation::all(t)
        .iter()
        .map(|p| permutation_vector(t, dim, p))
        .collect::<Result<_>>()?;
    Ok(orthonormalize(&vs, 1e-9))
}

/// Haar moment projector built from the orthonormal fixed basis.
pub fn haar_projector_span(dim: usize, t: usize) -> Result<MomentOperator> {
    let size = moment_size(dim, t)?;
    let mut matrix = ComplexMatrix::zeros(size);
    for q in haar_fixed_basis(dim, t)? {
        matrix.add_scaled(&ComplexMatrix::outer(&q, &q)?, ONE);
    }
    Ok(MomentOperator { t, dim, matrix })
}

fn haar_reference(dim: usize, t: usize) -> Result<MomentOperator> {
    if t <= dim {
        haar_moment_operator(dim, t)
    } else {
        haar_projector_span(dim, t)
    }
}

/// `‖M_ν − M_Haar‖_∞`.
pub fn design_distance(ensemble: &UnitaryEnsemble, t: usize) -> Result<f64> {
    if let UnitaryEnsemble::Haar { dim } = ensemble {
        moment_size(*dim, t)?;
        return Ok(0.0);
    }
    let m = moment_operator(ensemble, t)?;
    let h = haar_reference(ensemble.dim(), t)?;
    Ok(operator_norm(&(&m.matrix - &h.matrix)))
}

/// `Σ_ij w_i w_j |tr(U_i† U_j)|^{2t}`.
pub fn frame_potential(ensemble: &UnitaryEnsemble, t: usize) -> Result<f64> {
    let UnitaryEnsemble::Finite { members, .. } = ensemble else {
        return Err(Error::InvalidArgument(
            "the Haar frame potential is the trace of the Haar moment projector".into(),
        ));
    };
    let adjoints: Vec<ComplexMatrix> = members.iter().map(|(u, _)| u.adjoint()).collect();
    Ok((0..members.len())
        .into_par_iter()
        .map(|i| {
            members
                .iter()
                .map(|(uj, wj)| {
                    let tr = adjoints[i].matmul(uj).trace();
                    members[i].1 * wj * tr.norm_sqr().powi(t as i32)
                })
                .sum::<f64>()
        })
        .sum())
}

/// `tr(M_Haar)`, the number of independent permutation operators.
pub fn haar_frame_potential(dim: usize, t: usize) -> Result<f64> {
    Ok(haar_fixed_basis(dim, t)?.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{sample_haar_unitary, RngStream};
    use crate::linalg::hermitian_eigenvalues;

    #[test]
    fn point_mass_moment() {
        let e = UnitaryEnsemble::point(ComplexMatrix::identity(2)).unwrap();
        for t in 1..=2 {
            let m = moment_operator(&e, t).unwrap();
            assert_eq!(m.matrix, ComplexMatrix::identity(1 << (2 * t)));
        }
        assert!(design_distance(&e, 1).unwrap() > 0.5);
        assert!((frame_potential(&e, 1).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn haar_projector_properties() {
        for dim in [2, 3, 4] {
            for t in [1, 2] {
                let m = haar_moment_operator(dim, t).unwrap().matrix;
                assert!(m.matmul(&m).max_abs_diff(&m) < 1e-10);
                assert!(m.is_hermitian(1e-12));
                let span = haar_projector_span(dim, t).unwrap().matrix;
                assert!(span.max_abs_diff(&m) < 1e-10);
            }
        }
        // t = 1: projector onto vec(I)/√d
        let m = haar_moment_operator(3, 1).unwrap().matrix;
        let phi: Vec<C64> = ComplexMatrix::identity(3)
            .into_vec()
            .into_iter()
            .map(|z| z / 3f64.sqrt())
            .collect();
        assert!(m.max_abs_diff(&ComplexMatrix::outer(&phi, &phi).unwrap()) < 1e-12);

        let m = haar_moment_operator(2, 2).unwrap().matrix;
        assert!((m.trace().re - 2.0).abs() < 1e-12);
        let eig = hermitian_eigenvalues(&m).unwrap();
        assert_eq!(eig.iter().filter(|&&v| (v - 1.0).abs() < 1e-9).count(), 2);
        assert!(haar_moment_operator(2, 3).is_err());
    }

    #[test]
    fn pauli_is_one_design() {
        let d = design_distance(&UnitaryEnsemble::pauli(1), 1).unwrap();
        assert!(d < 1e-12);
        let m = moment_operator(&UnitaryEnsemble::pauli(1), 1)
            .unwrap()
            .matrix;
        assert!(m.max_abs_diff(&haar_moment_operator(2, 1).unwrap().matrix) < 1e-12);
        assert!(design_distance(&UnitaryEnsemble::pauli(1), 2).unwrap() > 0.1);
    }

    #[test]
    fn clifford_is_two_design() {
        let c1 = UnitaryEnsemble::clifford(1).unwrap();
        for t in [1, 2] {
            assert!(design_distance(&c1, t).unwrap() <= 1e-10);
            let fp = frame_potential(&c1, t).unwrap();
            assert!((fp - haar_frame_potential(2, t).unwrap()).abs() < 1e-10);
        }
        assert!((frame_potential(&c1, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((frame_potential(&c1, 2).unwrap() - 2.0).abs() < 1e-12);
        let d4 = design_distance(&c1, 4).unwrap();
        eprintln!("single-qubit Clifford, t = 4: design distance {d4:.6e}");
        assert!(d4.is_finite());
    }

    #[test]
    fn frame_potential_bounds_haar_value() {
        let mut rng = RngStream::new(51, 0);
        let random =
            UnitaryEnsemble::uniform((0..5).map(|_| sample_haar_unitary(2, &mut rng)).collect())
                .unwrap();
        for (ens, t) in [
            (UnitaryEnsemble::pauli(1), 1),
            (UnitaryEnsemble::pauli(1), 2),
            (UnitaryEnsemble::clifford(1).unwrap(), 3),
            (random.clone(), 1),
            (random, 2),
        ] {
            let fp = frame_potential(&ens, t).unwrap();
            let haar = haar_frame_potential(2, t).unwrap();
            assert!(fp >= haar - 1e-10);
            let is_design = design_distance(&ens, t).unwrap() <= 1e-10;
            assert_eq!(is_design, (fp - haar).abs() <= 1e-10);
        }
        assert!(frame_potential(&UnitaryEnsemble::haar(2), 1).is_err());
    }

    #[test]
    fn convolution_is_submultiplicative() {
        let mut rng = RngStream::new(52, 0);
        let mut us: Vec<ComplexMatrix> = (0..3).map(|_| sample_haar_unitary(2, &mut rng)).collect();
        let inverses: Vec<ComplexMatrix> = us.iter().map(|u| u.adjoint()).collect();
        us.extend(inverses);
        let ens = UnitaryEnsemble::uniform(us).unwrap();
        for t in [1, 2] {
            let g = design_distance(&ens, t).unwrap();
            for k in [2, 3] {
                let gk = design_distance(&ens.power(k).unwrap(), t).unwrap();
                assert!(
                    gk <= g.powi(k as i32) + 1e-9,
                    "t={t} k={k}: {gk} vs {g}^{k}"
                );
            }
            // closed under inverses → Hermitian moment operator
            assert!(moment_operator(&ens, t).unwrap().matrix.is_hermitian(1e-12));
        }
    }

    #[test]
    fn caps_and_validation() {
        assert!(matches!(
            moment_operator(&UnitaryEnsemble::pauli(2), 4),
            Err(Error::ResourceCap(_))
        ));
        let bad = ComplexMatrix::diag(&[ONE, C64::new(2.0, 0.0)]);
        assert!(UnitaryEnsemble::point(bad).is_err());
        assert!(UnitaryEnsemble::finite(vec![(ComplexMatrix::identity(2), 0.5)]).is_err());
        assert_eq!(design_distance(&UnitaryEnsemble::haar(2), 2).unwrap(), 0.0);
    }
}
