//! Randomized benchmarking and twirled K-round circuits.
//!
//! Noise follows every gate, the inversion gate included, so a sequence of
//! length `r` applies `Λ∘C_inv∘Λ∘C_r∘⋯∘Λ∘C_1`.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rayon::prelude::*;

use crate::channels::{mean_and_stderr, twirl, Channel};
use crate::designs::UnitaryEnsemble;
use crate::error::{Error, Result};
use crate::groups::{clifford_group, CliffordElement};
use crate::haar::{sample_haar_unitary, stream_seed, RngStream};
use crate::linalg::{hermitian_eigenvalues, inner, ComplexMatrix, ONE};
use crate::walk::{sample_local_gate, WalkConfig};

#[derive(Clone, Debug)]
pub enum NoiseModel {
    /// The same channel after every gate.
    Independent(Channel),
    /// One channel per Clifford element, indexed like the enumerated group.
    PerGate(Vec<Channel>),
}

/// Where sequence gates come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateSource {
    /// Uniform elements of the enumerated Clifford group (n ≤ 2).
    Clifford,
    /// Each gate is `steps` steps of the local random walk on qubits.
    Walk { steps: usize },
}

#[derive(Clone, Debug)]
pub struct RBConfig {
    pub n: usize,
    pub lengths: Vec<usize>,
    pub sequences: usize,
    pub noise: NoiseModel,
    pub rho: ComplexMatrix,
    pub e_op: ComplexMatrix,
    pub source: GateSource,
    pub seed: u64,
}

impl RBConfig {
    /// Config with `ρ = E = |0⟩⟨0|` and Clifford gates.
    pub fn new(
        n: usize,
        lengths: Vec<usize>,
        sequences: usize,
        noise: NoiseModel,
        seed: u64,
    ) -> Self {
        let dim = 1 << n;
        Self {
            n,
            lengths,
            sequences,
            noise,
            rho: ComplexMatrix::basis_projector(dim, 0),
            e_op: ComplexMatrix::basis_projector(dim, 0),
            source: GateSource::Clifford,
            seed,
        }
    }

    /// `E = (1 − 2b)|0⟩⟨0| + b I`.
    pub fn with_spam_bias(mut self, b: f64) -> Self {
        let dim = 1 << self.n;
        let mut e = ComplexMatrix::basis_projector(dim, 0).scale_real(1.0 - 2.0 * b);
        e.add_scaled(&ComplexMatrix::identity(dim), ONE.scale(b));
        self.e_op = e;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let dim = 1usize << self.n;
        if self.sequences == 0 {
            return Err(Error::InvalidArgument("no sequences requested".into()));
        }
        if self.lengths.is_empty() || self.lengths[0] == 0 {
            return Err(Error::InvalidArgument(
                "lengths must be positive and non-empty".into(),
            ));
        }
        if self.lengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "lengths must be strictly increasing".into(),
            ));
        }
        if self.rho.dim() != dim || self.e_op.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "state or effect not of dimension {dim}"
            )));
        }
        let ev = hermitian_eigenvalues(&self.e_op)?;
        if ev[0] < -1e-12 || ev[ev.len() - 1] > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(
                "measurement operator must satisfy 0 ≤ E ≤ I".into(),
            ));
        }
        match (&self.noise, self.source) {
            (NoiseModel::Independent(ch), _) => {
                check_noise_dim(ch, dim)?;
                ch.require_cptp()?;
            }
            (NoiseModel::PerGate(chs), GateSource::Clifford) => {
                let group = clifford_group(self.n)?;
                if chs.len() != group.len() {
                    return Err(Error::InvalidArgument(format!(
                        "{} per-gate channels for a group of {}",
                        chs.len(),
                        group.len()
                    )));
                }
                for ch in chs {
                    check_noise_dim(ch, dim)?;
                    ch.require_cptp()?;
                }
            }
            (NoiseModel::PerGate(_), GateSource::Walk { .. }) => {
                return Err(Error::InvalidArgument(
                    "per-gate noise needs Clifford gates".into(),
                ));
            }
        }
        match self.source {
            GateSource::Clifford => {
                clifford_group(self.n)?;
            }
            GateSource::Walk { steps } => {
                WalkConfig::new(self.n, 2, 1)?;
                if steps == 0 {
                    return Err(Error::InvalidArgument(
                        "walk gates need at least one step".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn check_noise_dim(ch: &Channel, dim: usize) -> Result<()> {
    if ch.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "noise on {} for a register of {dim}",
            ch.dim()
        )));
    }
    Ok(())
}

/// `length` uniform Clifford elements followed by the inversion element.
pub fn generate_sequence<R: Rng + ?Sized>(
    length: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<CliffordElement>> {
    let group = clifford_group(n)?;
    let mut seq = Vec::with_capacity(length + 1);
    let mut acc = 0;
    for _ in 0..length {
        let k = rng.random_range(0..group.len());
        acc = group.product_index(k, acc);
        seq.push(group.get(k).clone());
    }
    seq.push(group.get(group.inverse_index(acc)).clone());
    Ok(seq)
}

/// `length` walk gates on `n` qubits followed by the adjoint of their product.
pub fn generate_walk_sequence<R: Rng + ?Sized>(
    length: usize,
    n: usize,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<ComplexMatrix>> {
    let config = WalkConfig::new(n, 2, 1)?;
    let dim = 1 << n;
    let mut seq = Vec::with_capacity(length + 1);
    let mut acc = ComplexMatrix::identity(dim);
    for _ in 0..length {
        let mut g = ComplexMatrix::identity(dim);
        for _ in 0..steps {
            let (_, step) = sample_local_gate(&config, rng)?;
            g = step.matmul(&g);
        }
        acc = g.matmul(&acc);
        seq.push(g);
    }
    seq.push(acc.adjoint());
    Ok(seq)
}

fn survival_with<'a>(
    seq: &[ComplexMatrix],
    noise: impl Fn(usize) -> &'a Channel,
    rho: &ComplexMatrix,
    e_op: &ComplexMatrix,
) -> Result<f64> {
    let mut state = rho.clone();
    for (k, g) in seq.iter().enumerate() {
        state = noise(k).apply(&state.conjugate_by(g))?;
    }
    let p = e_op.matmul(&state).trace().re;
    Ok(p.clamp(0.0, 1.0))
}

/// `tr(E · Λ∘C_{r+1}∘⋯∘Λ∘C_1(ρ))` for gate-independent noise.
pub fn survival_probability(
    seq: &[ComplexMatrix],
    noise: &Channel,
    rho: &ComplexMatrix,
    e_op: &ComplexMatrix,
) -> Result<f64> {
    noise.require_cptp()?;
    if rho.dim() != noise.dim()
        || e_op.dim() != noise.dim()
        || seq.iter().any(|g| g.dim() != noise.dim())
    {
        return Err(Error::DimensionMismatch(
            "sequence, noise, state and effect disagree".into(),
        ));
    }
    survival_with(seq, |_| noise, rho, e_op)
}

/// Survival with noise depending on the Clifford element just applied.
pub fn survival_probability_gate_dependent(
    seq: &[CliffordElement],
    noise: &[Channel],
    rho: &ComplexMatrix,
    e_op: &ComplexMatrix,
) -> Result<f64> {
    for ch in noise {
        ch.require_cptp()?;
    }
    let gates: Vec<ComplexMatrix> = seq.iter().map(|c| c.unitary.clone()).collect();
    let index: Vec<usize> = seq.iter().map(|c| c.index).collect();
    if index.iter().any(|&i| i >= noise.len()) {
        return Err(Error::InvalidArgument(
            "gate index without a noise channel".into(),
        ));
    }
    survival_with(&gates, |k| &noise[index[k]], rho, e_op)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayPoint {
    pub length: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Mean survival and standard error at each length. Sequence `s` at length
/// `r` draws from its own stream, so results do not depend on scheduling.
pub fn run_rb(config: &RBConfig) -> Result<Vec<DecayPoint>> {
    config.validate()?;
    config
        .lengths
        .iter()
        .map(|&length| {
            let values = (0..config.sequences)
                .into_par_iter()
                .map(|s| {
                    let mut rng = RngStream::new(stream_seed(config.seed, length as u64), s as u64);
                    one_sequence(config, length, &mut rng)
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mean, stderr) = mean_and_stderr(&values);
            Ok(DecayPoint {
                length,
                mean,
                stderr,
            })
        })
        .collect()
}

fn one_sequence(config: &RBConfig, length: usize, rng: &mut RngStream) -> Result<f64> {
    match (config.source, &config.noise) {
        (GateSource::Clifford, NoiseModel::Independent(ch)) => {
            let seq: Vec<ComplexMatrix> = generate_sequence(length, config.n, rng)?
                .into_iter()
                .map(|c| c.unitary)
                .collect();
            survival_with(&seq, |_| ch, &config.rho, &config.e_op)
        }
        (GateSource::Clifford, NoiseModel::PerGate(chs)) => {
            let seq = generate_sequence(length, config.n, rng)?;
            survival_probability_gate_dependent(&seq, chs, &config.rho, &config.e_op)
        }
        (GateSource::Walk { steps }, NoiseModel::Independent(ch)) => {
            let seq = generate_walk_sequence(length, config.n, steps, rng)?;
            survival_with(&seq, |_| ch, &config.rho, &config.e_op)
        }
        (GateSource::Walk { .. }, NoiseModel::PerGate(_)) => Err(Error::InvalidArgument(
            "per-gate noise needs Clifford gates".into(),
        )),
    }
}

/// Exact Clifford-averaged survival `tr(E Λ((T_ν Λ)^r(ρ)))`, where `T_ν` is
/// the Clifford twirl.
pub fn exact_average_survival(
    length: usize,
    n: usize,
    noise: &Channel,
    rho: &ComplexMatrix,
    e_op: &ComplexMatrix,
) -> Result<f64> {
    let twirled = twirl(noise, &UnitaryEnsemble::clifford(n)?, 1)?;
    let mut state = rho.clone();
    for _ in 0..length {
        state = twirled.apply(&state)?;
    }
    Ok(e_op.matmul(&noise.apply(&state)?).trace().re)
}

/// Fitted `A p^r + B`.
#[derive(Clone, Debug)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    /// Sum of squared residuals.
    pub residual: f64,
    /// `(D − 1)(1 − p)/D`.
    pub error_rate: f64,
    /// Parameter covariance in the order `(A, B, p)`, scaled by the
    /// residual variance; `None` when singular or without spare points.
    pub covariance: Option<[[f64; 3]; 3]>,
    pub iterations: usize,
}

impl DecayFit {
    pub fn eval(&self, r: f64) -> f64 {
        self.a * self.p.powf(r) + self.b
    }
}

fn linear_ab(lengths: &[f64], y: &[f64], p: f64) -> (f64, f64, f64) {
    // least squares for (A, B) at fixed p
    let m = lengths.len() as f64;
    let x: Vec<f64> = lengths.iter().map(|&r| p.powf(r)).collect();
    let sx: f64 = x.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = m * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return (0.0, sy / m, f64::INFINITY);
    }
    let a = (m * sxy - sx * sy) / det;
    let b = (sy - a * sx) / m;
    let res = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (a * xi + b - yi).powi(2))
        .sum();
    (a, b, res)
}

fn sse(lengths: &[f64], y: &[f64], th: &Vector3<f64>) -> f64 {
    lengths
        .iter()
        .zip(y)
        .map(|(&r, &yi)| (th[0] * th[2].powf(r) + th[1] - yi).powi(2))
        .sum()
}

/// Least-squares fit of `A p^r + B`; the starting point is the best point of
/// a grid over `p` with `(A, B)` solved exactly, refined by damped
/// Gauss-Newton steps.
pub fn fit_decay(lengths: &[usize], means: &[f64], dim: usize) -> Result<DecayFit> {
    if lengths.len() != means.len() {
        return Err(Error::DimensionMismatch(
            "lengths and means differ in count".into(),
        ));
    }
    let mut distinct = lengths.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::FitFailed(format!(
            "need 3 distinct lengths, got {}",
            distinct.len()
        )));
    }
    let spread = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - means.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread.is_nan() || spread <= 1e-12 {
        return Err(Error::FitFailed(
            "data are constant, decay rate is indeterminate".into(),
        ));
    }
    let r: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let y = means;

    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    for k in 1..4000 {
        let p = 1.0 - (k as f64 / 4000.0).powi(3);
        let (a, b, res) = linear_ab(&r, y, p);
        if res < best.0 {
            best = (res, a, b, p);
        }
    }
    let mut th = Vector3::new(best.1, best.2, best.3);
    let mut cost = sse(&r, y, &th);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let jacobian = |th: &Vector3<f64>| -> Vec<Vector3<f64>> {
        r.iter()
            .map(|&ri| {
                let pr = th[2].powf(ri);
                let dp = if ri == 0.0 {
                    0.0
                } else {
                    th[0] * ri * th[2].powf(ri - 1.0)
                };
                Vector3::new(pr, 1.0, dp)
            })
            .collect()
    };
    for it in 0..500 {
        iterations = it + 1;
        let jac = jacobian(&th);
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (j, (&ri, &yi)) in jac.iter().zip(r.iter().zip(y)) {
            let resid = th[0] * th[2].powf(ri) + th[1] - yi;
            jtj += j * j.transpose();
            jtr += j * resid;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for d in 0..3 {
                damped[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let mut cand = th + step;
            cand[2] = cand[2].clamp(1e-9, 1.0);
            let c = sse(&r, y, &cand);
            if c <= cost {
                let rel = (cost - c) / cost.max(1e-300);
                th = cand;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-15 && step.norm() > 1e-14 * th.norm();
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if !th.iter().all(|v| v.is_finite()) || !(th[2] > 0.0 && th[2] <= 1.0) {
        return Err(Error::FitFailed(format!(
            "fit left the admissible region: A={}, B={}, p={}",
            th[0], th[1], th[2]
        )));
    }
    let jac = jacobian(&th);
    let jtj: Matrix3<f64> = jac.iter().map(|j| j * j.transpose()).sum();
    let dof = r.len() as f64 - 3.0;
    let covariance = if dof > 0.0 {
        jtj.try_inverse().map(|inv| {
            let c = inv * (cost / dof);
            [
                [c[(0, 0)], c[(0, 1)], c[(0, 2)]],
                [c[(1, 0)], c[(1, 1)], c[(1, 2)]],
                [c[(2, 0)], c[(2, 1)], c[(2, 2)]],
            ]
        })
    } else {
        None
    };
    let d = dim as f64;
    Ok(DecayFit {
        a: th[0],
        b: th[1],
        p: th[2],
        residual: cost,
        error_rate: (d - 1.0) * (1.0 - th[2]) / d,
        covariance,
        iterations,
    })
}

/// Noise of one circuit round.
#[derive(Clone, Debug)]
pub enum RoundNoise {
    /// `Λ_k` after both gates.
    Independent(Channel),
    /// `Λ(G^{nC})` after the non-Clifford gate and `Λ(G^C)` after the
    /// Clifford gate.
    Dependent {
        clifford: Channel,
        non_clifford: Channel,
    },
}

#[derive(Clone, Debug)]
pub struct Round {
    pub clifford: CliffordElement,
    pub non_clifford: ComplexMatrix,
    pub noise: RoundNoise,
}

/// K rounds of `G^{nC}` then `G^C` on `n` qubits.
#[derive(Clone, Debug)]
pub struct CircuitSpec {
    n: usize,
    rounds: Vec<Round>,
}

impl CircuitSpec {
    pub fn new(n: usize, rounds: Vec<Round>) -> Result<Self> {
        let dim = 1usize << n;
        if rounds.is_empty() {
            return Err(Error::InvalidArgument("circuit has no rounds".into()));
        }
        let dependent = matches!(rounds[0].noise, RoundNoise::Dependent { .. });
        for (k, round) in rounds.iter().enumerate() {
            if round.clifford.unitary.dim() != dim || round.non_clifford.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "round {k}: gate not on {n} qubits"
                )));
            }
            if !round.clifford.unitary.is_unitary(1e-10) || !round.non_clifford.is_unitary(1e-10) {
                return Err(Error::InvalidArgument(format!(
                    "round {k}: gate is not unitary"
                )));
            }
            let chans: Vec<&Channel> = match &round.noise {
                RoundNoise::Independent(ch) => vec![ch],
                RoundNoise::Dependent {
                    clifford,
                    non_clifford,
                } => vec![clifford, non_clifford],
            };
            if matches!(round.noise, RoundNoise::Dependent { .. }) != dependent {
                return Err(Error::InvalidArgument(
                    "rounds mix gate-dependent and independent noise".into(),
                ));
            }
            for ch in chans {
                check_noise_dim(ch, dim)?;
                ch.require_cptp()?;
            }
        }
        Ok(Self { n, rounds })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn is_gate_dependent(&self) -> bool {
        matches!(self.rounds[0].noise, RoundNoise::Dependent { .. })
    }

    /// `Π_k G_k^C G_k^{nC}`, latest round on the left.
    pub fn ideal_unitary(&self) -> ComplexMatrix {
        self.rounds
            .iter()
            .fold(ComplexMatrix::identity(self.dim()), |acc, r| {
                r.clifford.unitary.matmul(&r.non_clifford).matmul(&acc)
            })
    }

    /// `Π_k G_k^C`.
    pub fn clifford_product(&self) -> ComplexMatrix {
        self.rounds
            .iter()
            .fold(ComplexMatrix::identity(self.dim()), |acc, r| {
                r.clifford.unitary.matmul(&acc)
            })
    }

    /// `Π_k G_k^{nC}`.
    pub fn non_clifford_product(&self) -> ComplexMatrix {
        self.rounds
            .iter()
            .fold(ComplexMatrix::identity(self.dim()), |acc, r| {
                r.non_clifford.matmul(&acc)
            })
    }

    /// Noise of round `k` as one channel: `Λ_k`, or `Λ(G^C)∘Λ(G^{nC})`.
    pub fn round_noise(&self, k: usize) -> Result<Channel> {
        match &self.rounds[k].noise {
            RoundNoise::Independent(ch) => Ok(ch.clone()),
            RoundNoise::Dependent {
                clifford,
                non_clifford,
            } => clifford.compose(non_clifford),
        }
    }

    /// The circuit with each round averaged over `ensemble` (`t` copies).
    /// Gate-independent rounds become `G^C ∘ T_ν(Λ_k) ∘ G^{nC}`; gate-dependent
    /// rounds become `T_ν(G^C ∘ Λ(G^C) ∘ Λ(G^{nC}) ∘ G^{nC})`.
    pub fn twirled_channel(&self, ensemble: &UnitaryEnsemble, t: usize) -> Result<Channel> {
        let mut total = Channel::identity(self.dim());
        for round in &self.rounds {
            let gc = Channel::unitary(&round.clifford.unitary);
            let gn = Channel::unitary(&round.non_clifford);
            let step = match &round.noise {
                RoundNoise::Independent(ch) => {
                    gc.compose(&twirl(ch, ensemble, t)?)?.compose(&gn)?
                }
                RoundNoise::Dependent {
                    clifford,
                    non_clifford,
                } => {
                    let raw = gc.compose(clifford)?.compose(non_clifford)?.compose(&gn)?;
                    twirl(&raw, ensemble, t)?
                }
            };
            total = step.compose(&total)?;
        }
        Ok(total)
    }
}

/// `⟨ψ|C(|0⟩⟨0|)|ψ⟩` with `|ψ⟩ = Π G |0⟩`, for the exactly twirled circuit.
pub fn circuit_fidelity_exact(
    circuit: &CircuitSpec,
    ensemble: &UnitaryEnsemble,
    t: usize,
) -> Result<f64> {
    let dim = circuit.dim();
    let psi: Vec<_> = (0..dim).map(|i| circuit.ideal_unitary()[(i, 0)]).collect();
    let out = circuit
        .twirled_channel(ensemble, t)?
        .apply(&ComplexMatrix::basis_projector(dim, 0))?;
    Ok(inner(&psi, &out.mul_vec(&psi)).re)
}

fn sample_member<R: Rng + ?Sized>(ensemble: &UnitaryEnsemble, rng: &mut R) -> ComplexMatrix {
    match ensemble {
        UnitaryEnsemble::Haar { dim } => sample_haar_unitary(*dim, rng),
        UnitaryEnsemble::Finite { members, .. } => {
            let mut u: f64 = rng.random();
            for (m, w) in members {
                if u < *w {
                    return m.clone();
                }
                u -= w;
            }
            members[members.len() - 1].0.clone()
        }
    }
}

/// Monte Carlo estimate of the ν-twirled circuit fidelity with input `|0⟩`:
/// each sample draws one `U_k ~ ν` per round. Returns `(mean, stderr)`.
pub fn simulate_circuit_fidelity(
    circuit: &CircuitSpec,
    ensemble: &UnitaryEnsemble,
    t: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let dim = circuit.dim();
    if t == 0 || ensemble.dim().checked_pow(t as u32) != Some(dim) {
        return Err(Error::DimensionMismatch(format!(
            "{t} copies of a {}-dimensional ensemble do not act on dimension {dim}",
            ensemble.dim()
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("no samples requested".into()));
    }
    let ideal = circuit.ideal_unitary();
    let psi: Vec<_> = (0..dim).map(|i| ideal[(i, 0)]).collect();
    let rho0 = ComplexMatrix::basis_projector(dim, 0);
    let values = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let mut rng = RngStream::new(seed, s as u64);
            let mut rho = rho0.clone();
            for round in circuit.rounds() {
                let w = sample_member(ensemble, &mut rng).kron_pow(t);
                let wd = w.adjoint();
                match &round.noise {
                    RoundNoise::Independent(ch) => {
                        rho = rho.conjugate_by(&round.non_clifford);
                        rho = ch.apply(&rho.conjugate_by(&wd))?.conjugate_by(&w);
                        rho = rho.conjugate_by(&round.clifford.unitary);
                    }
                    RoundNoise::Dependent {
                        clifford,
                        non_clifford,
                    } => {
                        let x = rho.conjugate_by(&wd).conjugate_by(&round.non_clifford);
                        let x = clifford.apply(&non_clifford.apply(&x)?)?;
                        rho = x.conjugate_by(&round.clifford.unitary).conjugate_by(&w);
                    }
                }
            }
            Ok(inner(&psi, &rho.mul_vec(&psi)).re)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_and_stderr(&values))
}
