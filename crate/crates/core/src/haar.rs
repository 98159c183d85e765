//! Haar-random unitaries, permutation operators and exact Haar moments.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE};

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed of stream `index` under `master_seed`.
pub fn stream_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_mul(0xD1B5_4A32_D192_ED03)))
}

/// A reproducible random stream identified by `(master_seed, index)`.
///
/// Every `(seed, index)` pair maps to its own ChaCha8 generator, so work can
/// be scheduled in any order across threads without changing results.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, index: u64) -> Self {
        Self {
            master_seed,
            index,
            rng: ChaCha8Rng::seed_from_u64(stream_seed(master_seed, index)),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// A child stream keyed by this stream's identity and `sub`.
    pub fn substream(&self, sub: u64) -> Self {
        Self::new(stream_seed(self.master_seed, self.index), sub)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary of dimension `dim`.
///
/// Gram–Schmidt on the columns of a complex Ginibre matrix is the QR
/// decomposition with a positive real diagonal in R, which is exactly the
/// phase fix that makes Q Haar distributed.
pub fn sample_haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    assert!(dim >= 1, "dimension must be positive");
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        for _ in 0..2 {
            for q in &cols {
                let c: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // a degenerate draw has probability zero; redraw if it happens
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// Haar-random pure state (first column of a Haar unitary).
pub fn sample_haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// A permutation of `{0, …, t−1}`, stored as `k ↦ self[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &k in &map {
            if k >= map.len() || seen[k] {
                return Err(Error::InvalidPermutation(format!(
                    "{map:?} is not a bijection"
                )));
            }
            seen[k] = true;
        }
        Ok(Self(map))
    }

    pub fn identity(t: usize) -> Self {
        Self((0..t).collect())
    }

    /// Transposition of positions `a` and `b`.
    pub fn swap(t: usize, a: usize, b: usize) -> Result<Self> {
        if a >= t || b >= t {
            return Err(Error::InvalidPermutation(format!(
                "swap({a}, {b}) outside 0..{t}"
            )));
        }
        let mut map: Vec<usize> = (0..t).collect();
        map.swap(a, b);
        Ok(Self(map))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.0[k]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `(self ∘ other)(k) = self(other(k))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(
            self.len(),
            other.len(),
            "composing permutations of different degree"
        );
        Self(other.0.iter().map(|&k| self.0[k]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (k, &v) in self.0.iter().enumerate() {
            inv[v] = k;
        }
        Self(inv)
    }

    pub fn cycles(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.0[k];
            }
        }
        count
    }

    /// All `t!` permutations in lexicographic order (identity first).
    pub fn all(t: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..t).collect();
        loop {
            out.push(Self(cur.clone()));
            // next lexicographic permutation
            let Some(i) = (0..t.saturating_sub(1))
                .rev()
                .find(|&i| cur[i] < cur[i + 1])
            else {
                break;
            };
            let j = (i + 1..t).rev().find(|&j| cur[j] > cur[i]).unwrap();
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }
}

/// `V(π)` on `(C^dim)^{⊗t}`: tensor factor `k` is moved to position `π(k)`,
/// so that `V(π) V(σ) = V(π ∘ σ)`.
pub fn permutation_operator(t: usize, dim: usize, pi: &Permutation) -> Result<ComplexMatrix> {
    if pi.len() != t {
        return Err(Error::InvalidPermutation(format!(
            "permutation of degree {} used on {t} tensor factors",
            pi.len()
        )));
    }
    let total = dim.pow(t as u32);
    let dims = vec![dim; t];
    let mut m = ComplexMatrix::zeros(total);
    let mut digits = vec![0; t];
    let mut image = vec![0; t];
    for col in 0..total {
        crate::linalg::split_index(col, &dims, &mut digits);
        for k in 0..t {
            image[pi.apply(k)] = digits[k];
        }
        let row = crate::linalg::join_index(&image, &dims);
        m[(row, col)] = ONE;
    }
    Ok(m)
}

/// `vec(V(π))`, the (unnormalized) fixed vector of `U^{⊗t} ⊗ conj(U)^{⊗t}`.
pub fn permutation_vector(t: usize, dim: usize, pi: &Permutation) -> Result<Vec<C64>> {
    permutation_operator(t, dim, pi).map(ComplexMatrix::into_vec)
}

/// `|ψ_{π,d}⟩ = (V_d(π) ⊗ I)|Φ_d⟩^{⊗t}`, legs ordered as the t "left"
/// factors followed by the t "right" factors.
#[derive(Clone, Debug)]
pub struct PermutationState {
    t: usize,
    dim: usize,
    pi: Permutation,
    vector: Vec<C64>,
}

impl PermutationState {
    pub fn new(t: usize, dim: usize, pi: Permutation) -> Result<Self> {
        let scale = (dim as f64).powi(t as i32).sqrt().recip();
        let vector = permutation_vector(t, dim, &pi)?
            .into_iter()
            .map(|z| z * scale)
            .collect();
        Ok(Self { t, dim, pi, vector })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn permutation(&self) -> &Permutation {
        &self.pi
    }

    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        crate::linalg::inner(&self.vector, &other.vector)
    }
}

fn falling_product(dim: usize, t: usize) -> BigUint {
    // dim (dim + 1) … (dim + t − 1)
    (0..t).fold(BigUint::one(), |acc, k| acc * BigUint::from(dim + k))
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Exact Haar average `E|c_1|^{2t_1} ⋯ |c_k|^{2t_k}` over uniformly random
/// unit vectors in `C^dim`.
pub fn haar_monomial_average(k: usize, t_parts: &[usize], dim: usize) -> Result<BigRational> {
    if k != t_parts.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} but {} exponents given",
            t_parts.len()
        )));
    }
    if t_parts.contains(&0) {
        return Err(Error::InvalidArgument("exponents must be positive".into()));
    }
    if dim < k {
        return Err(Error::InvalidArgument(format!(
            "a {k}-body monomial needs dimension at least {k}, got {dim}"
        )));
    }
    let t: usize = t_parts.iter().sum();
    let numer = t_parts
        .iter()
        .fold(BigUint::one(), |acc, &tj| acc * factorial(tj));
    Ok(BigRational::new(
        BigInt::from(numer),
        BigInt::from(falling_product(dim, t)),
    ))
}

/// `Σ_π |⟨ψ_{σ,d}|ψ_{π,d}⟩|^n = d^n (d^n + 1) ⋯ (d^n + t − 1) / d^{tn}`.
pub fn perm_overlap_sum(n: usize, t: usize, d: usize) -> Result<BigRational> {
    if n == 0 || t == 0 || d == 0 {
        return Err(Error::InvalidArgument("n, t and d must be positive".into()));
    }
    let big_d = d
        .checked_pow(n as u32)
        .ok_or_else(|| Error::ResourceCap(format!("{d}^{n} overflows")))?;
    let denom = BigUint::from(big_d).pow(t as u32);
    Ok(BigRational::new(
        BigInt::from(falling_product(big_d, t)),
        BigInt::from(denom),
    ))
}

/// Dimension of the symmetric subspace of `(C^dim)^{⊗t}`, `binom(dim+t−1, t)`.
pub fn sym_subspace_dim(dim: usize, t: usize) -> BigUint {
    falling_product(dim, t) / factorial(t)
}

/// Monte Carlo estimate of a Haar monomial average from `samples` Haar
/// unitaries, reading the state as the first column `U_{i0}`. Returns
/// `(mean, standard error)`. Reproducible for a given seed regardless of
/// thread count.
pub fn haar_monomial_estimate(
    t_parts: &[usize],
    dim: usize,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    const BATCH: usize = 1000;
    let batches = samples.div_ceil(BATCH);
    let (sum, sum_sq) = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = RngStream::new(seed, b as u64);
            let count = BATCH.min(samples - b * BATCH);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..count {
                let u = sample_haar_unitary(dim, &mut rng);
                let x: f64 = t_parts
                    .iter()
                    .enumerate()
                    .map(|(i, &tj)| u[(i, 0)].norm_sqr().powi(tj as i32))
                    .product();
                s += x;
                s2 += x * x;
            }
            (s, s2)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The symmetrizer `(1/t!) Σ_π V(π)`.
pub fn symmetrizer(t: usize, dim: usize) -> Result<ComplexMatrix> {
    let perms = Permutation::all(t);
    let mut acc = ComplexMatrix::zeros(dim.pow(t as u32));
    for pi in &perms {
        acc.add_scaled(&permutation_operator(t, dim, pi)?, ONE);
    }
    Ok(acc.scale_real(1.0 / perms.len() as f64))
}
