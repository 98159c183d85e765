//! Linear maps on operators: channels, twirls, fidelities and the diamond norm.
//!
//! A map on `D×D` matrices is stored as its transfer matrix `T` acting on
//! row-major vectorizations, `vec(Λ(ρ)) = T vec(ρ)` with `vec(ρ)[i·D+j] = ρ_ij`.
//! Under this convention `ρ ↦ AρB` has `T = A ⊗ Bᵀ`.

use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;

use crate::designs::{haar_fixed_basis, UnitaryEnsemble};
use crate::error::{Error, Result};
use crate::groups::pauli_group;
use crate::haar::{sample_haar_state, sample_haar_unitary, RngStream};
use crate::linalg::{
    hermitian_eigs, inner, kron, permute_legs, trace_norm, ComplexMatrix, C64, ONE, ZERO,
};

/// Tolerance for the CP and TP flags.
pub const FLAG_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Channel {
    dim: usize,
    kraus: Option<Vec<ComplexMatrix>>,
    transfer: ComplexMatrix,
    analysis_only: bool,
    cp: OnceLock<bool>,
    tp: bool,
}

impl Channel {
    /// A general linear map from its transfer matrix.
    pub fn from_transfer(dim: usize, transfer: ComplexMatrix) -> Result<Self> {
        if transfer.dim() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "transfer matrix of size {} for operators of dimension {dim}",
                transfer.dim()
            )));
        }
        let tp = is_trace_preserving(dim, &transfer);
        Ok(Self {
            dim,
            kraus: None,
            transfer,
            analysis_only: false,
            cp: OnceLock::new(),
            tp,
        })
    }

    fn known_cp(dim: usize, kraus: Option<Vec<ComplexMatrix>>, transfer: ComplexMatrix) -> Self {
        let tp = is_trace_preserving(dim, &transfer);
        let cp = OnceLock::new();
        let _ = cp.set(true);
        Self {
            dim,
            kraus,
            transfer,
            analysis_only: false,
            cp,
            tp,
        }
    }

    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Kraus list".into()))?
            .dim();
        if kraus.iter().any(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "Kraus operators of different sizes".into(),
            ));
        }
        let mut transfer = ComplexMatrix::zeros(dim * dim);
        for k in &kraus {
            transfer.add_scaled(&kron(k, &k.conj()), ONE);
        }
        Ok(Self::known_cp(dim, Some(kraus), transfer))
    }

    pub fn identity(dim: usize) -> Self {
        Self::known_cp(
            dim,
            Some(vec![ComplexMatrix::identity(dim)]),
            ComplexMatrix::identity(dim * dim),
        )
    }

    pub fn unitary(u: &ComplexMatrix) -> Self {
        Self::known_cp(u.dim(), Some(vec![u.clone()]), kron(u, &u.conj()))
    }

    /// `ρ ↦ (1−w)ρ + w tr(ρ) I/D`.
    pub fn depolarizing(dim: usize, w: f64) -> Result<Self> {
        let max_w = (dim * dim) as f64 / (dim * dim - 1).max(1) as f64;
        if !(0.0..=max_w).contains(&w) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing weight {w} outside [0, {max_w}]"
            )));
        }
        let mut transfer = ComplexMatrix::identity(dim * dim).scale_real(1.0 - w);
        let id = ComplexMatrix::identity(dim).into_vec();
        transfer.add_scaled(
            &ComplexMatrix::outer(&id, &id)?,
            C64::new(w / dim as f64, 0.0),
        );
        Ok(Self::known_cp(dim, None, transfer))
    }

    /// Qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!(
                "damping {gamma} outside [0, 1]"
            )));
        }
        let k0 = ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()])?;
        let k1 = ComplexMatrix::from_real(2, &[0.0, gamma.sqrt(), 0.0, 0.0])?;
        Self::from_kraus(vec![k0, k1])
    }

    /// Random CPTP map with `rank` Kraus operators cut from a Haar isometry.
    pub fn random_cptp<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Self {
        let big = sample_haar_unitary(dim * rank, rng);
        let kraus = (0..rank)
            .map(|k| ComplexMatrix::from_fn(dim, |i, j| big[(k * dim + i, j)]))
            .collect();
        Self::from_kraus(kraus).expect("isometry blocks are square")
    }

    /// `ρ ↦ AρB`. Not completely positive in general, so flagged analysis-only.
    pub fn from_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                a.dim(),
                b.dim()
            )));
        }
        let mut ch = Self::from_transfer(a.dim(), kron(a, &b.transpose()))?;
        ch.analysis_only = true;
        Ok(ch)
    }

    /// `self − other` as an analysis-only map.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let mut ch = Self::from_transfer(self.dim, &self.transfer - &other.transfer)?;
        ch.analysis_only = true;
        Ok(ch)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let transfer = self.transfer.matmul(&other.transfer);
        let both_cp = self.cp.get() == Some(&true) && other.cp.get() == Some(&true);
        let kraus = match (&self.kraus, &other.kraus) {
            (Some(a), Some(b)) if a.len() * b.len() <= 64 => Some(
                a.iter()
                    .flat_map(|ka| b.iter().map(move |kb| ka.matmul(kb)))
                    .collect(),
            ),
            _ => None,
        };
        let mut ch = if both_cp {
            Self::known_cp(self.dim, kraus, transfer)
        } else {
            Self::from_transfer(self.dim, transfer)?
        };
        ch.analysis_only = self.analysis_only || other.analysis_only;
        Ok(ch)
    }

    /// `self ⊗ other` on the composite system.
    pub fn tensor(&self, other: &Self) -> Self {
        let (d1, d2) = (self.dim, other.dim);
        let big = kron(&self.transfer, &other.transfer);
        // legs (a1,b1,a2,b2) → (a1,a2,b1,b2) on both sides
        let dims = [d1, d1, d2, d2];
        let order = [0, 2, 1, 3];
        let transfer = crate::linalg::permute_matrix_legs(&big, &dims, &order);
        let both_cp = self.cp.get() == Some(&true) && other.cp.get() == Some(&true);
        let mut ch = if both_cp {
            Self::known_cp(d1 * d2, None, transfer)
        } else {
            Self::from_transfer(d1 * d2, transfer).expect("dimensions agree by construction")
        };
        ch.analysis_only = self.analysis_only || other.analysis_only;
        ch
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut ch = Self::from_transfer(self.dim, self.transfer.scale_real(s)).expect("same size");
        ch.analysis_only = true;
        ch
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn transfer(&self) -> &ComplexMatrix {
        &self.transfer
    }

    pub fn kraus(&self) -> Option<&[ComplexMatrix]> {
        self.kraus.as_deref()
    }

    pub fn is_analysis_only(&self) -> bool {
        self.analysis_only
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.tp
    }

    /// Choi matrix PSD within [`FLAG_TOL`]; computed once on demand.
    pub fn is_completely_positive(&self) -> bool {
        *self.cp.get_or_init(|| {
            let j = self.choi();
            let scale = j.max_abs().max(1.0);
            if j.hermitian_deviation() > FLAG_TOL * scale {
                return false;
            }
            match hermitian_eigs(&j) {
                Ok((vals, _)) => vals.first().is_none_or(|&v| v >= -FLAG_TOL * scale),
                Err(_) => false,
            }
        })
    }

    pub fn is_cptp(&self) -> bool {
        !self.analysis_only && self.tp && self.is_completely_positive()
    }

    pub fn require_cptp(&self) -> Result<()> {
        if self.analysis_only {
            return Err(Error::NotCptp("map is flagged analysis-only".into()));
        }
        if !self.tp {
            return Err(Error::NotCptp("map is not trace preserving".into()));
        }
        if !self.is_completely_positive() {
            return Err(Error::NotCptp(
                "Choi matrix is not positive semidefinite".into(),
            ));
        }
        Ok(())
    }

    /// Choi matrix `J = Σ_ij Λ(|i⟩⟨j|) ⊗ |i⟩⟨j|` (output leg first).
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim;
        ComplexMatrix::from_fn(d * d, |r, c| {
            let (a, i) = (r / d, r % d);
            let (b, j) = (c / d, c % d);
            self.transfer[(a * d + b, i * d + j)]
        })
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} for a map on dimension {}",
                rho.dim(),
                self.dim
            )));
        }
        ComplexMatrix::from_vec(self.dim, self.transfer.mul_vec(rho.as_slice()))
    }

    /// The Hilbert–Schmidt adjoint map.
    pub fn adjoint(&self) -> Self {
        let mut ch = Self::from_transfer(self.dim, self.transfer.adjoint()).expect("same size");
        ch.analysis_only = self.analysis_only;
        ch
    }
}

fn is_trace_preserving(dim: usize, transfer: &ComplexMatrix) -> bool {
    // ⟨vec(I)| T = ⟨vec(I)|
    let scale = transfer.max_abs().max(1.0);
    (0..dim * dim).all(|col| {
        let s: C64 = (0..dim).map(|a| transfer[(a * dim + a, col)]).sum();
        let target = if col / dim == col % dim { ONE } else { ZERO };
        (s - target).norm() <= FLAG_TOL * scale
    })
}

/// The ν-twirl `ρ ↦ E_ν U^{⊗t} Λ(U^{†⊗t} ρ U^{⊗t}) U^{†⊗t}` of a map on the
/// t-copy space.
pub fn twirl(lambda: &Channel, ensemble: &UnitaryEnsemble, t: usize) -> Result<Channel> {
    let de = ensemble.dim();
    if t == 0 || de.checked_pow(t as u32) != Some(lambda.dim) {
        return Err(Error::DimensionMismatch(format!(
            "map on dimension {} cannot be twirled by {t} copies of a {de}-dimensional ensemble",
            lambda.dim
        )));
    }
    let transfer = match ensemble {
        UnitaryEnsemble::Finite { members, .. } => members
            .par_iter()
            .map(|(u, w)| {
                let wt = u.kron_pow(t);
                let tw = kron(&wt, &wt.conj());
                tw.matmul(&lambda.transfer)
                    .matmul(&tw.adjoint())
                    .scale_real(*w)
            })
            .reduce(
                || ComplexMatrix::zeros(lambda.dim * lambda.dim),
                |mut a, b| {
                    a.add_scaled(&b, ONE);
                    a
                },
            ),
        UnitaryEnsemble::Haar { .. } if t == 1 => haar_twirl_transfer(&lambda.transfer, de),
        UnitaryEnsemble::Haar { .. } => haar_twirl_moments(&lambda.transfer, de, t)?,
    };
    let mut out = if lambda.cp.get() == Some(&true) {
        Channel::known_cp(lambda.dim, None, transfer)
    } else {
        Channel::from_transfer(lambda.dim, transfer)?
    };
    out.analysis_only = lambda.analysis_only;
    Ok(out)
}

/// Haar twirl over `U(dim)` of a map on `dim`: `α·id + β·tr(·)I`, fixed by
/// `tr T` and `tr Λ(I)`.
fn haar_twirl_transfer(transfer: &ComplexMatrix, dim: usize) -> ComplexMatrix {
    let d = dim as f64;
    let tr = transfer.trace();
    let id = ComplexMatrix::identity(dim).into_vec();
    let tr_lambda_id: C64 = (0..dim * dim)
        .map(|r| id[r].conj() * transfer.mul_vec(&id)[r])
        .sum();
    // tr T = α D² + β D, tr Λ(I) = α D + β D²
    let det = d * d * (d * d - 1.0);
    let (alpha, beta) = if dim == 1 {
        (tr, ZERO)
    } else {
        (
            (tr * d * d - tr_lambda_id * d) / det,
            (tr_lambda_id * d * d - tr * d) / det,
        )
    };
    let mut out = ComplexMatrix::identity(dim * dim).scale(alpha);
    out.add_scaled(&ComplexMatrix::outer(&id, &id).expect("same length"), beta);
    out
}

/// Haar twirl with `U^{⊗t}` through the order-2t fixed space.
fn haar_twirl_moments(transfer: &ComplexMatrix, dim: usize, t: usize) -> Result<ComplexMatrix> {
    // vec(T) has legs (a, b, i, j), each a t-copy index; the twirl acts as
    // W ⊗ W̄ ⊗ W̄ ⊗ W, which becomes U^{⊗2t} ⊗ Ū^{⊗2t} in the order (a, j, b, i)
    let big = dim.pow(t as u32);
    let dims = vec![dim; 4 * t];
    let leg = |block: usize| (block * t..(block + 1) * t).collect::<Vec<_>>();
    let order: Vec<usize> = [leg(0), leg(3), leg(1), leg(2)].concat();
    let mut inverse_order = vec![0; order.len()];
    for (k, &o) in order.iter().enumerate() {
        inverse_order[o] = k;
    }
    let x = permute_legs(transfer.as_slice(), &dims, &order);
    let basis = haar_fixed_basis(dim, 2 * t)?;
    let mut y = vec![ZERO; x.len()];
    for q in &basis {
        let c = inner(q, &x);
        for (yk, qk) in y.iter_mut().zip(q) {
            *yk += c * qk;
        }
    }
    ComplexMatrix::from_vec(big * big, permute_legs(&y, &dims, &inverse_order))
}

/// Closed-form Haar twirl over `U(N)` of `ρ ↦ AρB`:
/// `(N trA trB − tr(AB))/(N(N²−1)) ρ + (N tr(AB) − trA trB)/(N(N²−1)) tr(ρ) I`.
pub fn schur_twirl_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Channel> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let n = a.dim() as f64;
    if a.dim() < 2 {
        return Err(Error::InvalidArgument(
            "closed form needs dimension at least 2".into(),
        ));
    }
    let (ta, tb, tab) = (a.trace(), b.trace(), a.matmul(b).trace());
    let denom = n * (n * n - 1.0);
    let coef_rho = (ta * tb * n - tab) / denom;
    let coef_id = (tab * n - ta * tb) / denom;
    let dim = a.dim();
    let id = ComplexMatrix::identity(dim).into_vec();
    let mut transfer = ComplexMatrix::identity(dim * dim).scale(coef_rho);
    transfer.add_scaled(&ComplexMatrix::outer(&id, &id)?, coef_id);
    let mut ch = Channel::from_transfer(dim, transfer)?;
    ch.analysis_only = true;
    Ok(ch)
}

/// Pauli transfer matrix `R_ij = tr(P_i Λ(P_j)) / D`, Paulis in the order of
/// [`pauli_group`].
pub fn pauli_transfer_matrix(lambda: &Channel) -> Result<ComplexMatrix> {
    let n = qubit_count(lambda.dim)?;
    let paulis: Vec<ComplexMatrix> = pauli_group(n).iter().map(|p| p.matrix()).collect();
    let images: Vec<ComplexMatrix> = paulis
        .iter()
        .map(|p| lambda.apply(p))
        .collect::<Result<_>>()?;
    let d = lambda.dim as f64;
    Ok(ComplexMatrix::from_fn(paulis.len(), |i, j| {
        paulis[i].matmul(&images[j]).trace() / d
    }))
}

fn qubit_count(dim: usize) -> Result<usize> {
    if dim.is_power_of_two() && dim >= 2 {
        Ok(dim.trailing_zeros() as usize)
    } else {
        Err(Error::DimensionMismatch(format!(
            "dimension {dim} is not a power of two"
        )))
    }
}

/// `(1/4^n) Σ_P P Λ(P ρ P) P`.
pub fn pauli_twirl(lambda: &Channel, n: usize) -> Result<Channel> {
    if qubit_count(lambda.dim)? != n {
        return Err(Error::DimensionMismatch(format!(
            "map on dimension {} is not an {n}-qubit map",
            lambda.dim
        )));
    }
    let paulis = pauli_group(n);
    let mut transfer = ComplexMatrix::zeros(lambda.dim * lambda.dim);
    for p in &paulis {
        let m = p.matrix();
        let tp = kron(&m, &m.conj());
        transfer.add_scaled(&tp.matmul(&lambda.transfer).matmul(&tp), ONE);
    }
    let transfer = transfer.scale_real(1.0 / paulis.len() as f64);
    let mut out = if lambda.cp.get() == Some(&true) {
        Channel::known_cp(lambda.dim, None, transfer)
    } else {
        Channel::from_transfer(lambda.dim, transfer)?
    };
    out.analysis_only = lambda.analysis_only;
    Ok(out)
}

/// `p = (tr T − 1)/(D² − 1)`.
pub fn depolarizing_parameter(lambda: &Channel) -> f64 {
    let d2 = (lambda.dim * lambda.dim) as f64;
    (lambda.transfer.trace().re - 1.0) / (d2 - 1.0)
}

/// `⟨Φ|(Λ⊗I)(|Φ⟩⟨Φ|)|Φ⟩`.
pub fn entanglement_fidelity(lambda: &Channel) -> Result<f64> {
    lambda.require_cptp()?;
    let d = lambda.dim;
    let j = lambda.choi();
    let mut s = ZERO;
    for i in 0..d {
        for k in 0..d {
            s += j[(i * d + i, k * d + k)];
        }
    }
    Ok(s.re / (d * d) as f64)
}

/// `(D F_e + 1)/(D + 1)`.
pub fn avg_gate_fidelity(lambda: &Channel) -> Result<f64> {
    let d = lambda.dim as f64;
    Ok((d * entanglement_fidelity(lambda)? + 1.0) / (d + 1.0))
}

/// Monte Carlo mean of `⟨ψ|Λ(|ψ⟩⟨ψ|)|ψ⟩` over Haar states: `(mean, stderr)`.
pub fn avg_gate_fidelity_mc(lambda: &Channel, samples: usize, seed: u64) -> Result<(f64, f64)> {
    lambda.require_cptp()?;
    const BATCH: usize = 500;
    let batches = samples.div_ceil(BATCH);
    let values: Vec<f64> = (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = RngStream::new(seed, b as u64);
            let count = BATCH.min(samples - b * BATCH);
            (0..count)
                .map(|_| {
                    let psi = sample_haar_state(lambda.dim, &mut rng);
                    let rho = ComplexMatrix::outer(&psi, &psi).expect("same length");
                    let out = lambda.apply(&rho).expect("dimensions agree");
                    inner(&psi, &out.mul_vec(&psi)).re
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(mean_and_stderr(&values))
}

pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Settings of the alternating diamond-norm maximization.
#[derive(Clone, Copy, Debug)]
pub struct DiamondOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for DiamondOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            tolerance: 1e-12,
            random_starts: 4,
            seed: 0x5eed,
        }
    }
}

/// `sup_x ‖(Δ⊗I)(|x⟩⟨x|)‖₁` over unit `x` on system ⊗ ancilla.
pub fn diamond_norm(delta: &Channel) -> Result<f64> {
    diamond_norm_with(delta, DiamondOptions::default())
}

pub fn diamond_norm_with(delta: &Channel, opts: DiamondOptions) -> Result<f64> {
    let d = delta.dim;
    let j = delta.choi();
    let scale = j.max_abs().max(1.0);
    let dev = j.hermitian_deviation();
    if dev > 1e-10 * scale {
        return Err(Error::NotHermiticityPreserving { deviation: dev });
    }
    let upper = trace_norm(&j);
    if upper <= 1e-14 {
        return Ok(0.0);
    }

    let mut starts = Vec::with_capacity(opts.random_starts + 1);
    let s = 1.0 / (d as f64).sqrt();
    starts.push(
        (0..d * d)
            .map(|k| {
                if k / d == k % d {
                    C64::new(s, 0.0)
                } else {
                    ZERO
                }
            })
            .collect::<Vec<_>>(),
    );
    let mut rng = RngStream::new(opts.seed, 0);
    for _ in 0..opts.random_starts {
        starts.push(sample_haar_state(d * d, &mut rng));
    }

    let mut best = 0.0f64;
    let mut converged = false;
    for x0 in starts {
        match alternate(&delta.transfer, d, x0, opts) {
            Ok(v) => {
                best = best.max(v);
                converged = true;
            }
            Err(v) => best = best.max(v),
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: opts.max_iterations,
            lower: best,
            upper,
        });
    }
    Ok(best.min(upper))
}

/// One alternating run from `x`; `Err` carries the value reached at the cap.
fn alternate(
    transfer: &ComplexMatrix,
    d: usize,
    mut x: Vec<C64>,
    opts: DiamondOptions,
) -> std::result::Result<f64, f64> {
    let mut value = f64::NEG_INFINITY;
    for _ in 0..opts.max_iterations {
        let y = extend_apply(transfer, d, &x);
        let Ok((vals, vecs)) = hermitian_eigs(&y) else {
            return Err(value.max(0.0));
        };
        let new_value: f64 = vals.iter().map(|v| v.abs()).sum();
        // W = sign(Y)
        let signs: Vec<C64> = vals.iter().map(|&v| C64::new(v.signum(), 0.0)).collect();
        let w = vecs
            .matmul(&ComplexMatrix::diag(&signs))
            .matmul(&vecs.adjoint());
        let z = extend_adjoint(transfer, d, &w);
        let Ok((zvals, zvecs)) = hermitian_eigs(&z) else {
            return Err(new_value);
        };
        let top = zvals.len() - 1;
        x = (0..d * d).map(|r| zvecs[(r, top)]).collect();
        if (new_value - value).abs() <= opts.tolerance * new_value.max(1.0) {
            return Ok(new_value.max(value));
        }
        value = new_value.max(value);
    }
    Err(value)
}

/// `(Δ⊗I)(|x⟩⟨x|)` with `x` on legs (system, ancilla).
fn extend_apply(transfer: &ComplexMatrix, d: usize, x: &[C64]) -> ComplexMatrix {
    // Y_{(a,k),(b,l)} = Σ_ij T_{(a,b),(i,j)} x_{(i,k)} conj(x_{(j,l)})
    let rho = ComplexMatrix::outer(x, x).expect("same length");
    let mut y = ComplexMatrix::zeros(d * d);
    for a in 0..d {
        for b in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let t = transfer[(a * d + b, i * d + j)];
                    if t == ZERO {
                        continue;
                    }
                    for k in 0..d {
                        for l in 0..d {
                            y.as_mut_slice()[(a * d + k) * d * d + b * d + l] +=
                                t * rho[(i * d + k, j * d + l)];
                        }
                    }
                }
            }
        }
    }
    y
}

/// `(Δ†⊗I)(W)`.
fn extend_adjoint(transfer: &ComplexMatrix, d: usize, w: &ComplexMatrix) -> ComplexMatrix {
    // Z_{(i,k),(j,l)} = Σ_ab conj(T_{(a,b),(i,j)}) W_{(a,k),(b,l)}
    let mut z = ComplexMatrix::zeros(d * d);
    for a in 0..d {
        for b in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let t = transfer[(a * d + b, i * d + j)].conj();
                    if t == ZERO {
                        continue;
                    }
                    for k in 0..d {
                        for l in 0..d {
                            z.as_mut_slice()[(i * d + k) * d * d + j * d + l] +=
                                t * w[(a * d + k, b * d + l)];
                        }
                    }
                }
            }
        }
    }
    z
}

/// `ε(Λ) = ½‖Λ − id‖_◇`.
pub fn worst_case_error_rate(lambda: &Channel) -> Result<f64> {
    Ok(0.5 * diamond_norm(&lambda.difference(&Channel::identity(lambda.dim))?)?)
}
