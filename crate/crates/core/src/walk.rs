//! The local random walk on `n` sites and its Hamiltonian
//! `H = (1/n) Σ_i (I − P_{i,i+1})` with periodic boundary.
//!
//! Vectors live on `d^{2tn}` in site-major order: each site carries its t
//! `U` legs followed by its t `Ū` legs, so one site has local dimension
//! `L = d^{2t}`. Every quantity here is real.

use rand::Rng;
use rayon::prelude::*;

use crate::designs::{haar_moment_operator, DENSE_CAP};
use crate::error::{Error, Result};
use crate::haar::{permutation_vector, sample_haar_unitary, Permutation, RngStream};
use crate::linalg::{
    kron, permute_legs, permute_matrix_legs, real_symmetric_eigenvalues, ComplexMatrix,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkConfig {
    pub n: usize,
    pub d: usize,
    pub t: usize,
}

impl WalkConfig {
    pub fn new(n: usize, d: usize, t: usize) -> Result<Self> {
        if n < 2 || d < 2 || t < 1 {
            return Err(Error::InvalidArgument(format!(
                "walk needs n ≥ 2, d ≥ 2, t ≥ 1 (got n={n}, d={d}, t={t})"
            )));
        }
        Ok(Self { n, d, t })
    }

    /// `L = d^{2t}`.
    pub fn local_dim(&self) -> usize {
        self.d.pow(2 * self.t as u32)
    }

    pub fn vector_len(&self) -> Result<usize> {
        self.local_dim()
            .checked_pow(self.n as u32)
            .ok_or_else(|| Error::ResourceCap("walk vector length overflows".into()))
    }

    /// Neighbouring pairs `(i, i+1 mod n)`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n).map(|i| (i, (i + 1) % self.n)).collect()
    }
}

/// Leg order taking copy-major `(half, copy, site)` to site-major
/// `(site, half, copy)`; use with [`permute_legs`].
pub fn copy_to_site_order(n: usize, t: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(2 * t * n);
    for s in 0..n {
        for h in 0..2 {
            for c in 0..t {
                order.push(h * t * n + c * n + s);
            }
        }
    }
    order
}

/// Inverse of [`copy_to_site_order`].
pub fn site_to_copy_order(n: usize, t: usize) -> Vec<usize> {
    let fwd = copy_to_site_order(n, t);
    let mut inv = vec![0; fwd.len()];
    for (k, &o) in fwd.iter().enumerate() {
        inv[o] = k;
    }
    inv
}

/// Embeds a two-site gate on sites `(i, j)` of `n` sites of dimension `d`.
pub fn embed_pair(
    gate: &ComplexMatrix,
    i: usize,
    j: usize,
    n: usize,
    d: usize,
) -> Result<ComplexMatrix> {
    if gate.dim() != d * d || i >= n || j >= n || i == j {
        return Err(Error::DimensionMismatch(format!(
            "cannot place a {}-dimensional gate on sites ({i}, {j}) of {n} sites of dimension {d}",
            gate.dim()
        )));
    }
    let rest = d.pow(n as u32 - 2);
    let big = kron(gate, &ComplexMatrix::identity(rest));
    // current site order: i, j, then the others ascending
    let mut current = vec![i, j];
    current.extend((0..n).filter(|&s| s != i && s != j));
    let mut order = vec![0; n];
    for (pos, &site) in current.iter().enumerate() {
        order[site] = pos;
    }
    Ok(permute_matrix_legs(&big, &vec![d; n], &order))
}

/// One walk step's gate: a uniformly chosen site `i` and a Haar unitary on
/// `U(d²)` embedded on `(i, i+1 mod n)`.
pub fn sample_local_gate<R: Rng + ?Sized>(
    config: &WalkConfig,
    rng: &mut R,
) -> Result<(usize, ComplexMatrix)> {
    let i = rng.random_range(0..config.n);
    let u = sample_haar_unitary(config.d * config.d, rng);
    let j = (i + 1) % config.n;
    Ok((i, embed_pair(&u, i, j, config.n, config.d)?))
}

/// `state ↦ U_{i,i+1} · state`.
pub fn walk_step<R: Rng + ?Sized>(
    config: &WalkConfig,
    state: &ComplexMatrix,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let dim = config.d.pow(config.n as u32);
    if state.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} on {dim}",
            state.dim()
        )));
    }
    let (_, gate) = sample_local_gate(config, rng)?;
    Ok(gate.matmul(state))
}

/// Real Gram–Schmidt with a second pass; drops dependent vectors.
pub fn orthonormalize_real(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let norm0 = norm(v);
        if norm0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nw = norm(&w);
        if nw > tol * norm0 {
            w.iter_mut().for_each(|x| *x /= nw);
            basis.push(w);
        }
    }
    basis
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `vec(V_d(π))` for every `π`, as real site vectors of length `d^{2t}`.
fn site_vectors(d: usize, t: usize) -> Result<Vec<Vec<f64>>> {
    Permutation::all(t)
        .iter()
        .map(|p| Ok(permutation_vector(t, d, p)?.iter().map(|z| z.re).collect()))
        .collect()
}

fn real_kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

#[derive(Clone, Debug)]
pub struct WalkHamiltonian {
    config: WalkConfig,
    /// Orthonormal basis of the range of the pair projector, length `L²`.
    pair_basis: Vec<Vec<f64>>,
}

pub fn walk_hamiltonian(config: WalkConfig) -> Result<WalkHamiltonian> {
    let l = config.local_dim();
    if l * l > DENSE_CAP {
        return Err(Error::ResourceCap(format!(
            "pair projector of dimension {} exceeds {DENSE_CAP}",
            l * l
        )));
    }
    config.vector_len()?;
    let u: Vec<Vec<f64>> = site_vectors(config.d, config.t)?
        .iter()
        .map(|v| real_kron(v, v))
        .collect();
    Ok(WalkHamiltonian {
        config,
        pair_basis: orthonormalize_real(&u, 1e-9),
    })
}

impl WalkHamiltonian {
    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.vector_len().expect("checked at construction")
    }

    /// Rank of each pair projector.
    pub fn pair_rank(&self) -> usize {
        self.pair_basis.len()
    }

    /// `P_{i,j} x`.
    pub fn apply_projector(&self, (i, j): (usize, usize), x: &[f64]) -> Vec<f64> {
        let n = self.config.n;
        let l = self.config.local_dim();
        let stride = |s: usize| l.pow((n - 1 - s) as u32);
        let (si, sj) = (stride(i), stride(j));
        let others: Vec<usize> = (0..n).filter(|&s| s != i && s != j).collect();
        let mut y = vec![0.0; x.len()];
        let mut block = vec![0.0; l * l];
        let mut digits = vec![0usize; others.len()];
        let bases = l.pow(others.len() as u32);
        for r in 0..bases {
            let mut rem = r;
            for k in (0..others.len()).rev() {
                digits[k] = rem % l;
                rem /= l;
            }
            let base: usize = others
                .iter()
                .zip(&digits)
                .map(|(&s, &dg)| dg * stride(s))
                .sum();
            for a in 0..l {
                for b in 0..l {
                    block[a * l + b] = x[base + a * si + b * sj];
                }
            }
            for q in &self.pair_basis {
                let c = dot(q, &block);
                if c == 0.0 {
                    continue;
                }
                for a in 0..l {
                    for b in 0..l {
                        y[base + a * si + b * sj] += c * q[a * l + b];
                    }
                }
            }
        }
        y
    }

    /// `H x`, matrix-free; pair terms are evaluated in parallel.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.config.n as f64;
        let projected: Vec<Vec<f64>> = self
            .config
            .pairs()
            .into_par_iter()
            .map(|p| self.apply_projector(p, x))
            .collect();
        let mut y = x.to_vec();
        for p in &projected {
            y.iter_mut().zip(p).for_each(|(a, b)| *a -= b / n);
        }
        y
    }

    /// Analytic ground vectors `w_π = vec(V_d(π))^{⊗n}` (unnormalized).
    pub fn ground_vectors(&self) -> Result<Vec<Vec<f64>>> {
        Ok(site_vectors(self.config.d, self.config.t)?
            .iter()
            .map(|v| (1..self.config.n).fold(v.clone(), |acc, _| real_kron(&acc, v)))
            .collect())
    }

    /// Orthonormalized ground basis.
    pub fn ground_basis(&self) -> Result<Vec<Vec<f64>>> {
        Ok(orthonormalize_real(&self.ground_vectors()?, 1e-9))
    }

    /// Dense `H` (row-major) from the Haar moment projector on `U(d²)`,
    /// without going through the matrix-free path.
    pub fn dense_matrix(&self) -> Result<Vec<f64>> {
        let WalkConfig { n, d, t } = self.config;
        let dim = self.dim();
        if dim > DENSE_CAP {
            return Err(Error::ResourceCap(format!(
                "dense Hamiltonian of dimension {dim} exceeds {DENSE_CAP}"
            )));
        }
        let l = self.config.local_dim();
        let p_copy = haar_moment_operator(d * d, t)?.matrix;
        let order = copy_to_site_order(2, t);
        let p_site = permute_matrix_legs(&p_copy, &vec![d; 4 * t], &order);
        let mut h = vec![0.0; dim * dim];
        for k in 0..dim {
            h[k * dim + k] = 1.0;
        }
        let stride = |s: usize| l.pow((n - 1 - s) as u32);
        for (i, j) in self.config.pairs() {
            let others: Vec<usize> = (0..n).filter(|&s| s != i && s != j).collect();
            for r in 0..l.pow(others.len() as u32) {
                let mut rem = r;
                let mut base = 0;
                for &s in others.iter().rev() {
                    base += (rem % l) * stride(s);
                    rem /= l;
                }
                for row in 0..l * l {
                    let ro = base + (row / l) * stride(i) + (row % l) * stride(j);
                    for col in 0..l * l {
                        let v = p_site[(row, col)].re;
                        if v != 0.0 {
                            let co = base + (col / l) * stride(i) + (col % l) * stride(j);
                            h[ro * dim + co] -= v / n as f64;
                        }
                    }
                }
            }
        }
        Ok(h)
    }
}

/// Ascending spectrum of the dense Hamiltonian.
pub fn dense_spectrum(h: &WalkHamiltonian) -> Result<Vec<f64>> {
    real_symmetric_eigenvalues(h.dim(), &h.dense_matrix()?)
}

/// Smallest eigenvalue above `1e-8` of the dense Hamiltonian.
pub fn dense_spectral_gap(h: &WalkHamiltonian) -> Result<f64> {
    dense_spectrum(h)?
        .into_iter()
        .find(|&v| v > 1e-8)
        .ok_or_else(|| Error::InvalidArgument("Hamiltonian has no nonzero eigenvalue".into()))
}

#[derive(Clone, Copy, Debug)]
pub struct GapOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub window: usize,
    pub seed: u64,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            tolerance: 1e-10,
            window: 50,
            seed: 0x6a9,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SpectralGap {
    pub gap: f64,
    pub iterations: usize,
    /// `‖H x − Δ x‖` at the returned vector.
    pub residual: f64,
}

/// Smallest nonzero eigenvalue of `H` by power iteration on `I − H`,
/// deflating the analytic ground space.
pub fn spectral_gap(h: &WalkHamiltonian) -> Result<SpectralGap> {
    spectral_gap_with(h, GapOptions::default())
}

pub fn spectral_gap_with(h: &WalkHamiltonian, opts: GapOptions) -> Result<SpectralGap> {
    let ground = h.ground_basis()?;
    let deflate = |v: &mut Vec<f64>| {
        for q in &ground {
            let c = dot(q, v);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    };
    let mut rng = RngStream::new(opts.seed, 0);
    let mut x: Vec<f64> = (0..h.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    deflate(&mut x);
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut history: Vec<f64> = Vec::new();
    for k in 1..=opts.max_iterations {
        let hx = h.apply(&x);
        let mut y: Vec<f64> = x.iter().zip(&hx).map(|(a, b)| a - b).collect();
        deflate(&mut y);
        let mu = dot(&x, &y);
        let ny = norm(&y);
        if ny < 1e-300 {
            // I − H vanishes off the ground space
            return Ok(SpectralGap {
                gap: 1.0,
                iterations: k,
                residual: 0.0,
            });
        }
        history.push(mu);
        if k > opts.window {
            let old = history[k - 1 - opts.window];
            if (mu - old).abs() <= opts.tolerance * mu.abs().max(f64::MIN_POSITIVE) {
                let gap = 1.0 - mu;
                let residual = norm(
                    &hx.iter()
                        .zip(&x)
                        .map(|(a, b)| a - gap * b)
                        .collect::<Vec<_>>(),
                );
                return Ok(SpectralGap {
                    gap,
                    iterations: k,
                    residual,
                });
            }
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    let mu = *history.last().unwrap_or(&0.0);
    let hx = h.apply(&x);
    let residual = norm(
        &hx.iter()
            .zip(&x)
            .map(|(a, b)| a - (1.0 - mu) * b)
            .collect::<Vec<_>>(),
    );
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        lower: (1.0 - mu - residual).max(0.0),
        upper: 1.0 - mu,
    })
}

/// `‖M^k − M_Haar‖_∞ = (1 − Δ)^k` for `k` walk steps, where `M = I − H` is
/// the one-step moment operator.
pub fn walk_design_distance(config: WalkConfig, steps: usize) -> Result<f64> {
    let gap = spectral_gap(&walk_hamiltonian(config)?)?.gap;
    Ok((1.0 - gap).max(0.0).powi(steps as i32))
}

/// Walk-averaged moment operator from `samples` single steps, in site-major
/// order on `d^{2tn}`.
pub fn sampled_step_moment(
    config: &WalkConfig,
    samples: usize,
    seed: u64,
) -> Result<ComplexMatrix> {
    let dim = config.vector_len()?;
    if dim > DENSE_CAP {
        return Err(Error::ResourceCap(format!(
            "dense moment of dimension {dim} exceeds {DENSE_CAP}"
        )));
    }
    let order = copy_to_site_order(config.n, config.t);
    let legs = vec![config.d; 2 * config.t * config.n];
    let chunks = samples.div_ceil(1000);
    let acc = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<ComplexMatrix> {
            let mut rng = RngStream::new(seed, c as u64);
            let mut acc = ComplexMatrix::zeros(dim);
            for _ in 0..1000.min(samples - c * 1000) {
                let (_, g) = sample_local_gate(config, &mut rng)?;
                let gt = g.kron_pow(config.t);
                acc.add_scaled(&kron(&gt, &gt.conj()), crate::linalg::ONE);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(ComplexMatrix::zeros(dim), |mut a, b| {
            a.add_scaled(&b, crate::linalg::ONE);
            a
        });
    let mean = acc.scale_real(1.0 / samples as f64);
    Ok(permute_matrix_legs(&mean, &legs, &order))
}

/// Copy-major vector to site-major.
pub fn to_site_major<T: Copy>(v: &[T], config: &WalkConfig) -> Vec<T> {
    permute_legs(
        v,
        &vec![config.d; 2 * config.t * config.n],
        &copy_to_site_order(config.n, config.t),
    )
}

/// Site-major vector to copy-major.
pub fn to_copy_major<T: Copy>(v: &[T], config: &WalkConfig) -> Vec<T> {
    permute_legs(
        v,
        &vec![config.d; 2 * config.t * config.n],
        &site_to_copy_order(config.n, config.t),
    )
}
