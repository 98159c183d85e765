//! Reference computations used to check `tdesign` by independent routes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use tdesign::haar::{Permutation, PermutationState};
use tdesign::linalg::{kron, pauli, trace_norm, ComplexMatrix, C64};

/// Fixed-point decimal arithmetic with `DIGITS` fractional digits.
pub mod fixed {
    use super::*;

    pub const DIGITS: u32 = 60;

    pub fn scale() -> BigInt {
        BigInt::from(10).pow(DIGITS)
    }

    fn mul(a: &BigInt, b: &BigInt) -> BigInt {
        a * b / scale()
    }

    fn e() -> BigInt {
        let s = scale();
        let mut term = s.clone();
        let mut sum = s.clone();
        for k in 1..80u32 {
            term /= k;
            sum += &term;
        }
        sum
    }

    /// `ln y` for integer `y ≥ 1` via `2 atanh((y−1)/(y+1))`.
    fn ln_int(y: u64) -> BigInt {
        let s = scale();
        let z = BigInt::from(y - 1) * &s / BigInt::from(y + 1);
        let z2 = mul(&z, &z);
        let mut power = z.clone();
        let mut sum = BigInt::zero();
        let mut k = 0u32;
        while !power.is_zero() {
            sum += &power / BigInt::from(2 * k + 1);
            power = mul(&power, &z2);
            k += 1;
        }
        sum * 2
    }

    /// `1 − C = 1/(e^n (d²+1)^{n−1})` in fixed point.
    fn shrink_gap(n: u32, d: u64) -> BigInt {
        let en = (1..n).fold(e(), |acc, _| mul(&acc, &e()));
        let base = BigInt::from(d * d + 1).pow(n - 1);
        scale() * scale() / (en * base)
    }

    /// `−ln C` in fixed point.
    fn neg_ln_c(n: u32, d: u64) -> BigInt {
        let g = shrink_gap(n, d);
        let mut power = g.clone();
        let mut sum = BigInt::zero();
        let mut k = 1u32;
        while !power.is_zero() {
            sum += &power / BigInt::from(k);
            power = mul(&power, &g);
            k += 1;
        }
        sum
    }

    /// `C` rounded to `f64`.
    pub fn shrink_factor(n: u32, d: u64) -> f64 {
        let v = scale() - shrink_gap(n, d);
        to_f64(&v)
    }

    /// `⌈n ln(2t) / (−ln C)⌉`.
    pub fn min_sequence_size(n: u32, d: u64, t: u64) -> BigInt {
        let num = BigInt::from(n) * ln_int(2 * t) * scale();
        let den = neg_ln_c(n, d);
        let q = num / den;
        let s = scale();
        (q + &s - BigInt::one()) / s
    }

    fn to_f64(v: &BigInt) -> f64 {
        let r = BigRational::new(v.clone(), scale());
        num_traits::ToPrimitive::to_f64(&r).unwrap_or(f64::NAN)
    }
}

/// `Σ_π |⟨ψ_σ|ψ_π⟩|^n` at `σ = id`, exactly from cycle counts and
/// numerically from explicit permutation states.
pub fn overlap_sum_brute(n: usize, t: usize, d: usize) -> (BigRational, f64) {
    let mut exact = BigRational::zero();
    let mut numeric = 0.0;
    let id = PermutationState::new(t, d, Permutation::identity(t)).expect("valid");
    for pi in Permutation::all(t) {
        let c = pi.cycles();
        // ⟨ψ_id|ψ_π⟩ = d^{c − t}
        let one = BigRational::new(BigInt::from(d).pow(c as u32), BigInt::from(d).pow(t as u32));
        exact += (0..n).fold(BigRational::one(), |acc, _| acc * &one);
        let state = PermutationState::new(t, d, pi).expect("valid");
        numeric += id.overlap(&state).norm().powi(n as i32);
    }
    (exact, numeric)
}

fn sqrt_qubit_state(x: f64, y: f64, z: f64) -> ComplexMatrix {
    let half = |v: f64| C64::new(v / 2.0, 0.0);
    let mut sigma = ComplexMatrix::identity(2).scale(half(1.0));
    sigma.add_scaled(&pauli::x(), half(x));
    sigma.add_scaled(&pauli::y(), half(y));
    sigma.add_scaled(&pauli::z(), half(z));
    let r2 = x * x + y * y + z * z;
    let det = ((1.0 - r2) / 4.0).max(0.0).sqrt();
    // √σ = (σ + √det I)/√(tr σ + 2√det)
    let mut root = sigma;
    root.add_scaled(&ComplexMatrix::identity(2), C64::new(det, 0.0));
    root.scale_real(1.0 / (1.0 + 2.0 * det).sqrt())
}

fn bloch_objective(choi: &ComplexMatrix, p: [f64; 3]) -> f64 {
    let root = kron(
        &ComplexMatrix::identity(2),
        &sqrt_qubit_state(p[0], p[1], p[2]),
    );
    trace_norm(&root.matmul(choi).matmul(&root))
}

fn project_ball(mut p: [f64; 3]) -> [f64; 3] {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if r > 1.0 {
        p.iter_mut().for_each(|v| *v /= r);
    }
    p
}

/// Qubit diamond norm as `max_σ ‖(I⊗√σ) J (I⊗√σ)‖₁` over the Bloch ball:
/// a spherical grid followed by compass search. `choi` has the output leg
/// first and is unnormalized.
pub fn qubit_diamond_by_grid(choi: &ComplexMatrix) -> f64 {
    assert_eq!(choi.dim(), 4, "qubit maps only");
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    let (nr, nt, np) = (8, 16, 32);
    for ir in 0..=nr {
        let r = ir as f64 / nr as f64;
        for it in 0..=nt {
            let th = std::f64::consts::PI * it as f64 / nt as f64;
            for ip in 0..np {
                let ph = 2.0 * std::f64::consts::PI * ip as f64 / np as f64;
                let p = [
                    r * th.sin() * ph.cos(),
                    r * th.sin() * ph.sin(),
                    r * th.cos(),
                ];
                let v = bloch_objective(choi, p);
                if v > best.0 {
                    best = (v, p);
                }
            }
        }
    }
    let mut step = 0.1;
    while step > 1e-9 {
        let mut moved = false;
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut q = best.1;
                q[axis] += sign * step;
                let q = project_ball(q);
                let v = bloch_objective(choi, q);
                if v > best.0 + 1e-15 {
                    best = (v, q);
                    moved = true;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    best.0
}
