//! Closed-form bounds: the walk contraction factor, sequence sizes, diamond
//! and Wasserstein bounds, gap lower bounds, and the circuit fidelity and
//! difference bounds.
//!
//! Every value is a pure function of its parameters. [`BoundReport`] keeps
//! the scalar inputs so the value can be recomputed with [`BoundReport::recompute`].

use crate::channels::{diamond_norm, twirl, Channel};
use crate::designs::UnitaryEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, trace_norm, ComplexMatrix};
use crate::rb::CircuitSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    ShrinkFactor,
    MinSequenceSize,
    DiamondThm2,
    DiamondThm3,
    Wasserstein,
    Lemma4Conversion,
    Nachtergaele,
    Lemma7Gap,
    FidelityThm4,
    DifferenceThm5Basic,
    DifferenceThm5Improved,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub formula: Formula,
    /// Named scalar inputs, in the order the formula consumes them.
    pub params: Vec<(&'static str, f64)>,
    pub value: f64,
}

impl BoundReport {
    fn new(formula: Formula, params: Vec<(&'static str, f64)>) -> Result<Self> {
        let value = evaluate(formula, &params)?;
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{formula:?} is not finite for {params:?}"
            )));
        }
        Ok(Self {
            formula,
            params,
            value,
        })
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
    }

    /// Re-evaluates the tagged formula from the stored parameters.
    pub fn recompute(&self) -> Result<f64> {
        evaluate(self.formula, &self.params)
    }
}

fn evaluate(formula: Formula, p: &[(&'static str, f64)]) -> Result<f64> {
    let v = |k: usize| p[k].1;
    let u = |k: usize| p[k].1 as usize;
    Ok(match formula {
        Formula::ShrinkFactor => shrink_factor_c(u(0), u(1)),
        Formula::MinSequenceSize => min_sequence_size(u(0), u(1), u(2)) as f64,
        Formula::DiamondThm2 => diamond_bound_thm2(u(0), u(1), u(2), p[3].1 as u64),
        Formula::DiamondThm3 => diamond_bound_thm3(u(0), u(1))?,
        Formula::Wasserstein => wasserstein_bound(u(0), u(1), v(2)),
        Formula::Lemma4Conversion => lemma4_conversion(v(0), u(1), u(2), u(3)),
        Formula::Nachtergaele => nachtergaele_bound(v(0), v(1), u(2))?,
        Formula::Lemma7Gap => lemma7_gap_bound(u(0), u(1), v(2))?.1,
        Formula::FidelityThm4 => thm4_value(v(0), v(1), v(2), v(3), v(4)),
        Formula::DifferenceThm5Basic | Formula::DifferenceThm5Improved => {
            let k = u(1);
            let terms = &p[2..];
            if terms.len() != 3 * k {
                return Err(Error::InvalidArgument("malformed round parameters".into()));
            }
            let rounds: Vec<RoundTerms> = (0..k)
                .map(|i| RoundTerms {
                    diamond: terms[3 * i].1,
                    gate_term: terms[3 * i + 1].1,
                    eps: terms[3 * i + 2].1,
                })
                .collect();
            if formula == Formula::DifferenceThm5Basic {
                thm5_basic(v(0), &rounds)
            } else {
                thm5_improved(v(0), &rounds)
            }
        }
    })
}

/// `C = 1 − 1/(e^n (d²+1)^{n−1})`.
pub fn shrink_factor_c(n: usize, d: usize) -> f64 {
    1.0 - shrink_gap(n, d)
}

/// `1 − C = e^{−n} (d²+1)^{1−n}`, kept separate so `ln C` stays accurate
/// once `C` rounds to one.
pub fn shrink_gap(n: usize, d: usize) -> f64 {
    let base = (d * d + 1) as f64;
    (-(n as f64)).exp() / base.powi(n as i32 - 1)
}

fn ln_c(n: usize, d: usize) -> f64 {
    (-shrink_gap(n, d)).ln_1p()
}

/// `r = ⌈n ln(1/(2t)) / ln C⌉`; both logarithms are negative.
pub fn min_sequence_size(n: usize, d: usize, t: usize) -> u64 {
    let num = n as f64 * (1.0 / (2.0 * t as f64)).ln();
    (num / ln_c(n, d)).ceil() as u64
}

/// `(2t)^{1/(nr)} C^{1/n²}`.
pub fn diamond_bound_thm2(n: usize, d: usize, t: usize, r: u64) -> f64 {
    let nf = n as f64;
    ((2.0 * t as f64).ln() / (nf * r as f64) + ln_c(n, d) / (nf * nf)).exp()
}

/// `1 − 1/(e²(d²+1)[2t(t−1)]³ ⌈0.8 log_d[2t(t−1)] + 1⌉² + 1)`.
pub fn diamond_bound_thm3(d: usize, t: usize) -> Result<f64> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!(
            "the bound needs t ≥ 2, got t={t}"
        )));
    }
    let df = d as f64;
    let m = 2.0 * (t * (t - 1)) as f64;
    let ceil = (0.8 * m.ln() / df.ln() + 1.0).ceil();
    let denom = std::f64::consts::E.powi(2) * (df * df + 1.0) * m.powi(3) * ceil * ceil + 1.0;
    Ok(1.0 - 1.0 / denom)
}

/// `C^{r/n} √2 d^{(n+1)/2}`.
pub fn wasserstein_bound(n: usize, d: usize, r: f64) -> f64 {
    let nf = n as f64;
    (r / nf * ln_c(n, d)).exp() * std::f64::consts::SQRT_2 * (d as f64).powf((nf + 1.0) / 2.0)
}

/// `√2 t w / d^{n/2}`.
pub fn lemma4_conversion(w: f64, d: usize, n: usize, t: usize) -> f64 {
    std::f64::consts::SQRT_2 * t as f64 * w / (d as f64).powf(n as f64 / 2.0)
}

/// `Δ_l (1 − ε_l √l)² / (l − 1)`.
pub fn nachtergaele_bound(delta_l: f64, eps_l: f64, l: usize) -> Result<f64> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!(
            "block length must be at least 2, got {l}"
        )));
    }
    let sl = (l as f64).sqrt();
    if eps_l < 0.0 || eps_l > 1.0 / sl {
        return Err(Error::HypothesisViolated(format!(
            "ε_l = {eps_l} exceeds 1/√l = {}",
            1.0 / sl
        )));
    }
    Ok(delta_l * (1.0 - eps_l * sl).powi(2) / (l as f64 - 1.0))
}

/// Block length `l = ⌈0.8(log_d(4τ) + 2)⌉` and the gap bound
/// `Δ_base / (4⌈0.8(log_d(4τ) + 1)⌉)` with `τ = t(t−1)/2`.
pub fn lemma7_gap_bound(d: usize, t: usize, delta_base: f64) -> Result<(usize, f64)> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!(
            "the bound needs t ≥ 2, got t={t}"
        )));
    }
    let tau = (t * (t - 1)) as f64 / 2.0;
    let log = (4.0 * tau).ln() / (d as f64).ln();
    let l = (0.8 * (log + 2.0)).ceil() as usize;
    let divisor = 4.0 * (0.8 * (log + 1.0)).ceil();
    Ok((l, delta_base / divisor))
}

pub fn shrink_factor_report(n: usize, d: usize) -> Result<BoundReport> {
    BoundReport::new(
        Formula::ShrinkFactor,
        vec![("n", n as f64), ("d", d as f64)],
    )
}

pub fn min_sequence_report(n: usize, d: usize, t: usize) -> Result<BoundReport> {
    BoundReport::new(
        Formula::MinSequenceSize,
        vec![("n", n as f64), ("d", d as f64), ("t", t as f64)],
    )
}

pub fn thm2_report(n: usize, d: usize, t: usize, r: u64) -> Result<BoundReport> {
    BoundReport::new(
        Formula::DiamondThm2,
        vec![
            ("n", n as f64),
            ("d", d as f64),
            ("t", t as f64),
            ("r", r as f64),
        ],
    )
}

pub fn thm3_report(d: usize, t: usize) -> Result<BoundReport> {
    BoundReport::new(Formula::DiamondThm3, vec![("d", d as f64), ("t", t as f64)])
}

/// `‖ΠG‖₁ (tr T + D)/(D² + D) + 2 F_g Σε`.
fn thm4_value(norm: f64, twirled_trace: f64, dim: f64, fg: f64, eps_sum: f64) -> f64 {
    norm * (twirled_trace + dim) / (dim * dim + dim) + 2.0 * fg * eps_sum
}

/// `|⟨ψ|G|ψ⟩|`, the gate fidelity of `G` at the pure state `ψ`.
pub fn gate_fidelity(psi: &[crate::linalg::C64], g: &ComplexMatrix) -> f64 {
    crate::linalg::inner(psi, &g.mul_vec(psi)).norm()
}

fn zero_state(dim: usize) -> Vec<crate::linalg::C64> {
    (0..dim)
        .map(|i| {
            if i == 0 {
                crate::linalg::ONE
            } else {
                crate::linalg::ZERO
            }
        })
        .collect()
}

/// `tr Π_j T_Haar(Λ_j)` for the per-round noise of a circuit.
pub fn haar_twirled_trace(circuit: &CircuitSpec) -> Result<f64> {
    let haar = UnitaryEnsemble::haar(circuit.dim());
    let mut total = Channel::identity(circuit.dim());
    for k in 0..circuit.len() {
        total = twirl(&circuit.round_noise(k)?, &haar, 1)?.compose(&total)?;
    }
    Ok(total.transfer().trace().re)
}

/// Fidelity bound for a gate-independent circuit. `eps_list[j]` is the
/// design error of round `j` and `twirled_traces` is `tr Π_j Δ_Haar,j`.
pub fn fidelity_bound_thm4(
    circuit: &CircuitSpec,
    eps_list: &[f64],
    twirled_traces: f64,
) -> Result<BoundReport> {
    if circuit.is_gate_dependent() {
        return Err(Error::InvalidArgument(
            "gate-dependent circuit; use the difference bound".into(),
        ));
    }
    if eps_list.len() != circuit.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} design errors for {} rounds",
            eps_list.len(),
            circuit.len()
        )));
    }
    let g = circuit.ideal_unitary();
    let dim = circuit.dim();
    BoundReport::new(
        Formula::FidelityThm4,
        vec![
            ("gate_trace_norm", trace_norm(&g)),
            ("twirled_trace", twirled_traces),
            ("dim", dim as f64),
            ("gate_fidelity", gate_fidelity(&zero_state(dim), &g)),
            ("eps_sum", eps_list.iter().sum()),
        ],
    )
}

struct RoundTerms {
    /// `‖Λ(G^C)Λ(G^{nC}) − Λ_k‖◇`.
    diamond: f64,
    /// `1 − F_g(ψ, G^{nC}) / ‖G^{nC}‖`.
    gate_term: f64,
    eps: f64,
}

fn thm5_basic(prefactor: f64, rounds: &[RoundTerms]) -> f64 {
    prefactor
        * rounds
            .iter()
            .map(|r| r.diamond + r.gate_term + 2.0 * r.eps)
            .sum::<f64>()
}

fn thm5_improved(prefactor: f64, rounds: &[RoundTerms]) -> f64 {
    let mut s = 0.0;
    for (k, r) in rounds.iter().enumerate() {
        let prev = if k == 0 { 0.0 } else { rounds[k - 1].eps };
        s += r.diamond + 2.0 * prev * r.diamond + (r.gate_term + 2.0 * r.eps) * (2.0 * prev + 2.0);
    }
    prefactor * s
}

/// Basic and improved bounds on `‖C_GD − C_GI‖◇`. The gate-dependent
/// circuit supplies the gates; both circuits must share them.
pub fn difference_bound_thm5(
    gd: &CircuitSpec,
    gi: &CircuitSpec,
    eps_list: &[f64],
) -> Result<(BoundReport, BoundReport)> {
    if gd.len() != gi.len() || eps_list.len() != gd.len() {
        return Err(Error::DimensionMismatch(format!(
            "round counts differ: {} gate-dependent, {} gate-independent, {} design errors",
            gd.len(),
            gi.len(),
            eps_list.len()
        )));
    }
    if !gd.is_gate_dependent() || gi.is_gate_dependent() {
        return Err(Error::InvalidArgument(
            "expected a gate-dependent and a gate-independent circuit".into(),
        ));
    }
    for (a, b) in gd.rounds().iter().zip(gi.rounds()) {
        if a.clifford.unitary.max_abs_diff(&b.clifford.unitary) > 1e-10
            || a.non_clifford.max_abs_diff(&b.non_clifford) > 1e-10
        {
            return Err(Error::InvalidArgument(
                "circuits do not share their gates".into(),
            ));
        }
    }
    let psi = zero_state(gd.dim());
    let prefactor = trace_norm(&gd.clifford_product()) * trace_norm(&gd.non_clifford_product());
    let mut params = vec![("prefactor", prefactor), ("rounds", gd.len() as f64)];
    for (k, &eps) in eps_list.iter().enumerate() {
        let diamond = diamond_norm(&gd.round_noise(k)?.difference(&gi.round_noise(k)?)?)?;
        let gnc = &gd.rounds()[k].non_clifford;
        let gate_term = 1.0 - gate_fidelity(&psi, gnc) / operator_norm(gnc);
        params.push(("diamond", diamond));
        params.push(("gate_term", gate_term));
        params.push(("eps", eps));
    }
    let basic = BoundReport::new(Formula::DifferenceThm5Basic, params.clone())?;
    let improved = BoundReport::new(Formula::DifferenceThm5Improved, params)?;
    Ok((basic, improved))
}

/// One row of the sequence-size sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig1Row {
    pub n: usize,
    pub d: usize,
    pub t: usize,
    pub r_min: u64,
}

/// `min_sequence_size` over `ns × ts`, sorted by `(n, t)`.
pub fn fig1_sweep(ns: &[usize], d: usize, ts: &[usize]) -> Vec<Fig1Row> {
    let mut rows: Vec<Fig1Row> = ns
        .iter()
        .flat_map(|&n| {
            ts.iter().map(move |&t| Fig1Row {
                n,
                d,
                t,
                r_min: min_sequence_size(n, d, t),
            })
        })
        .collect();
    rows.sort_by_key(|r| (r.n, r.t));
    rows
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig2Row {
    pub t: usize,
    pub d: usize,
    pub one_minus_bound: f64,
}

/// `1 − diamond_bound_thm3(d, t)` for each `t`, sorted by `t`.
pub fn fig2_sweep(d: usize, ts: &[usize]) -> Result<Vec<Fig2Row>> {
    let mut rows = ts
        .iter()
        .map(|&t| {
            Ok(Fig2Row {
                t,
                d,
                one_minus_bound: 1.0 - diamond_bound_thm3(d, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.t);
    Ok(rows)
}
