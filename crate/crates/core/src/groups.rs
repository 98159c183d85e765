//! Pauli and Clifford groups on one and two qubits.

use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{kron_all, pauli, ComplexMatrix, C64, I, ONE};

/// A Pauli operator mod phase in symplectic form. Bit `k` of the masks
/// refers to qubit `k`, and qubit 0 is the leftmost tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliElement {
    pub n: usize,
    pub x_bits: u64,
    pub z_bits: u64,
}

impl PauliElement {
    pub fn new(n: usize, x_bits: u64, z_bits: u64) -> Self {
        assert!(n <= 32, "at most 32 qubits");
        let mask = (1u64 << n) - 1;
        Self {
            n,
            x_bits: x_bits & mask,
            z_bits: z_bits & mask,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, 0, 0)
    }

    /// Single-qubit factor on qubit `k`: one of 'I', 'X', 'Y', 'Z'.
    pub fn label_at(&self, k: usize) -> char {
        match ((self.x_bits >> k) & 1, (self.z_bits >> k) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        }
    }

    pub fn label(&self) -> String {
        (0..self.n).map(|k| self.label_at(k)).collect()
    }

    /// Product mod phase.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self::new(
            self.n,
            self.x_bits ^ other.x_bits,
            self.z_bits ^ other.z_bits,
        )
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        let s =
            (self.x_bits & other.z_bits).count_ones() + (self.z_bits & other.x_bits).count_ones();
        s.is_multiple_of(2)
    }

    /// Hermitian matrix realization (Y = iXZ on each factor).
    pub fn matrix(&self) -> ComplexMatrix {
        assert!(self.n <= 5, "matrix realization is limited to 5 qubits");
        let factors: Vec<ComplexMatrix> = (0..self.n)
            .map(|k| match self.label_at(k) {
                'I' => ComplexMatrix::identity(2),
                'X' => pauli::x(),
                'Y' => pauli::y(),
                _ => pauli::z(),
            })
            .collect();
        kron_all(&factors)
    }
}

/// All `4^n` Pauli operators mod phase.
pub fn pauli_group(n: usize) -> Vec<PauliElement> {
    let size = 1u64 << n;
    let mut out = Vec::with_capacity((size * size) as usize);
    for x in 0..size {
        for z in 0..size {
            out.push(PauliElement::new(n, x, z));
        }
    }
    out
}

/// Multiplies `m` by the global phase that makes its first nonzero entry
/// (row-major) positive real.
pub fn normalize_phase(m: &ComplexMatrix) -> ComplexMatrix {
    let scale = m.max_abs().max(1.0);
    match m.as_slice().iter().find(|z| z.norm() > 1e-8 * scale) {
        Some(z) => m.scale(z.conj() / z.norm()),
        None => m.clone(),
    }
}

pub(crate) type Key = Vec<(i64, i64)>;

pub(crate) fn phase_key(m: &ComplexMatrix) -> Key {
    normalize_phase(m)
        .as_slice()
        .iter()
        .map(|z| ((z.re * 1e7).round() as i64, (z.im * 1e7).round() as i64))
        .collect()
}

#[derive(Clone, Debug)]
pub struct CliffordElement {
    pub n: usize,
    pub unitary: ComplexMatrix,
    pub index: usize,
}

impl CliffordElement {
    /// `C P C†` as a Pauli and a phase in {±1, ±i}, or `None` if the
    /// result is not a phased Pauli.
    pub fn conjugate_pauli(&self, p: &PauliElement) -> Option<(PauliElement, C64)> {
        let image = p.matrix().conjugate_by(&self.unitary);
        identify_pauli(self.n, &image)
    }

    pub fn normalizes_paulis(&self) -> bool {
        pauli_group(self.n)
            .iter()
            .all(|p| self.conjugate_pauli(p).is_some())
    }
}

/// Recognizes `m = phase · P` for a Pauli `P`.
pub fn identify_pauli(n: usize, m: &ComplexMatrix) -> Option<(PauliElement, C64)> {
    let dim = 1usize << n;
    if m.dim() != dim {
        return None;
    }
    for p in pauli_group(n) {
        let pm = p.matrix();
        let phase = pm.matmul(m).trace() / dim as f64;
        if (phase.norm() - 1.0).abs() > 1e-9 {
            continue;
        }
        if pm.scale(phase).max_abs_diff(m) < 1e-9 {
            let allowed = [ONE, -ONE, I, -I];
            if allowed.iter().any(|a| (a - phase).norm() < 1e-9) {
                return Some((p, phase));
            }
        }
    }
    None
}

/// The Clifford group mod phase with lookup tables.
#[derive(Debug)]
pub struct CliffordGroup {
    n: usize,
    elements: Vec<CliffordElement>,
    lookup: HashMap<Key, usize>,
    inverses: Vec<usize>,
}

impl CliffordGroup {
    fn generate(n: usize) -> Self {
        let dim = 1usize << n;
        let h = ComplexMatrix::from_real(2, &[1.0, 1.0, 1.0, -1.0])
            .unwrap()
            .scale_real(std::f64::consts::FRAC_1_SQRT_2);
        let s = ComplexMatrix::diag(&[ONE, I]);
        let mut gens = Vec::new();
        for k in 0..n {
            for g in [&h, &s] {
                let factors: Vec<ComplexMatrix> = (0..n)
                    .map(|j| {
                        if j == k {
                            g.clone()
                        } else {
                            ComplexMatrix::identity(2)
                        }
                    })
                    .collect();
                gens.push(kron_all(&factors));
            }
        }
        if n == 2 {
            gens.push(
                ComplexMatrix::from_real(
                    4,
                    &[
                        1.0, 0.0, 0.0, 0.0, //
                        0.0, 1.0, 0.0, 0.0, //
                        0.0, 0.0, 0.0, 1.0, //
                        0.0, 0.0, 1.0, 0.0,
                    ],
                )
                .unwrap(),
            );
        }

        let mut elements = Vec::new();
        let mut lookup = HashMap::new();
        let mut queue = VecDeque::new();
        let id = ComplexMatrix::identity(dim);
        lookup.insert(phase_key(&id), 0);
        elements.push(CliffordElement {
            n,
            unitary: id,
            index: 0,
        });
        queue.push_back(0);
        while let Some(idx) = queue.pop_front() {
            for g in &gens {
                let next = normalize_phase(&g.matmul(&elements[idx].unitary));
                let key = phase_key(&next);
                if lookup.contains_key(&key) {
                    continue;
                }
                let index = elements.len();
                lookup.insert(key, index);
                elements.push(CliffordElement {
                    n,
                    unitary: next,
                    index,
                });
                queue.push_back(index);
            }
        }

        let inverses = elements
            .iter()
            .map(|e| lookup[&phase_key(&e.unitary.adjoint())])
            .collect();
        Self {
            n,
            elements,
            lookup,
            inverses,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn get(&self, index: usize) -> &CliffordElement {
        &self.elements[index]
    }

    /// Index of the element equal to `m` up to global phase.
    pub fn index_of(&self, m: &ComplexMatrix) -> Option<usize> {
        self.lookup.get(&phase_key(m)).copied()
    }

    pub fn inverse_index(&self, index: usize) -> usize {
        self.inverses[index]
    }

    /// Index of `elements[a] · elements[b]`.
    pub fn product_index(&self, a: usize, b: usize) -> usize {
        let m = self.elements[a].unitary.matmul(&self.elements[b].unitary);
        self.index_of(&m)
            .expect("Clifford group is closed under multiplication")
    }
}

static ONE_QUBIT: OnceLock<CliffordGroup> = OnceLock::new();
static TWO_QUBIT: OnceLock<CliffordGroup> = OnceLock::new();

/// The Clifford group on `n ∈ {1, 2}` qubits mod global phase, built once.
pub fn clifford_group(n: usize) -> Result<&'static CliffordGroup> {
    match n {
        1 => Ok(ONE_QUBIT.get_or_init(|| CliffordGroup::generate(1))),
        2 => Ok(TWO_QUBIT.get_or_init(|| CliffordGroup::generate(2))),
        _ => Err(Error::UnsupportedSize(format!(
            "Clifford enumeration is available for 1 or 2 qubits, not {n}"
        ))),
    }
}

/// A uniformly random Clifford element.
pub fn uniform_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CliffordElement> {
    let group = clifford_group(n)?;
    Ok(group.get(rng.random_range(0..group.len())).clone())
}
