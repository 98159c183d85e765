//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::Rng;
use tdesign::bounds::{
    diamond_bound_thm3, difference_bound_thm5, fidelity_bound_thm4, haar_twirled_trace,
    lemma7_gap_bound, min_sequence_size, nachtergaele_bound,
};
use tdesign::channels::{diamond_norm, schur_twirl_pair, twirl, Channel};
use tdesign::designs::{design_distance, frame_potential, haar_frame_potential, UnitaryEnsemble};
use tdesign::groups::clifford_group;
use tdesign::haar::{
    haar_monomial_average, haar_monomial_estimate, perm_overlap_sum, rational_to_f64,
    sample_haar_unitary, RngStream,
};
use tdesign::linalg::{hermitian_eigs, trace_norm, ComplexMatrix, C64};
use tdesign::rb::{
    fit_decay, run_rb, simulate_circuit_fidelity, CircuitSpec, NoiseModel, RBConfig, Round,
    RoundNoise,
};
use tdesign::walk::{dense_spectrum, spectral_gap, walk_hamiltonian, WalkConfig, WalkHamiltonian};
use tdesign_validation::{fixed, overlap_sum_brute, qubit_diamond_by_grid};

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_matrix(dim: usize, rng: &mut RngStream) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// `exp(−i s H)` for a random Hermitian `H` with unit operator norm.
fn unitary_error(dim: usize, s: f64, rng: &mut RngStream) -> ComplexMatrix {
    let a = random_matrix(dim, rng);
    let mut h = a.clone();
    h.add_scaled(&a.adjoint(), C64::new(1.0, 0.0));
    let (vals, vecs) = hermitian_eigs(&h).unwrap();
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let phases: Vec<C64> = vals
        .iter()
        .map(|v| C64::from_polar(1.0, -s * v / top))
        .collect();
    vecs.matmul(&ComplexMatrix::diag(&phases))
        .matmul(&vecs.adjoint())
}

fn criterion_1() -> Outcome {
    let ens = UnitaryEnsemble::clifford(1).unwrap();
    let mut worst_dist = 0.0f64;
    let mut worst_fp = 0.0f64;
    for t in [1, 2] {
        worst_dist = worst_dist.max(design_distance(&ens, t).unwrap());
        let fp = frame_potential(&ens, t).unwrap();
        worst_fp = worst_fp.max((fp - haar_frame_potential(2, t).unwrap()).abs());
    }
    outcome(
        worst_dist <= 1e-10 && worst_fp <= 1e-10,
        format!("max design distance {worst_dist:.2e}, max frame-potential gap {worst_fp:.2e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = RngStream::new(2, 0);
    let mut worst = 0.0f64;
    for t in [1usize, 2] {
        let ens = UnitaryEnsemble::clifford(t).unwrap();
        let dim = 1 << t;
        for _ in 0..20 {
            let a = random_matrix(dim, &mut rng);
            let b = random_matrix(dim, &mut rng);
            let pair = Channel::from_pair(&a, &b).unwrap();
            let group = twirl(&pair, &ens, 1).unwrap();
            let closed = schur_twirl_pair(&a, &b).unwrap();
            worst = worst.max(group.transfer().max_abs_diff(closed.transfer()));
        }
    }
    outcome(
        worst <= 1e-9,
        format!("max entrywise deviation {worst:.2e} over 40 pairs"),
    )
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut worst_z = 0.0f64;
    for dim in [2usize, 4] {
        for t in [1usize, 2, 3] {
            let exact = rational_to_f64(&haar_monomial_average(1, &[t], dim).unwrap());
            let (mean, se) = haar_monomial_estimate(&[t], dim, 100_000, 30 + (dim * 10 + t) as u64);
            let z = if se > 0.0 {
                (mean - exact).abs() / se
            } else if mean == exact {
                0.0
            } else {
                f64::INFINITY
            };
            worst_z = worst_z.max(z);
            ok &= z <= 3.0;
        }
    }
    let mut worst_num = 0.0f64;
    let mut exact_ok = true;
    for (d, n) in [(2usize, 1usize), (2, 2), (3, 1), (4, 1)] {
        for t in 1..=3 {
            let closed = perm_overlap_sum(n, t, d).unwrap();
            let (brute, numeric) = overlap_sum_brute(n, t, d);
            exact_ok &= closed == brute;
            worst_num = worst_num.max((numeric - rational_to_f64(&closed)).abs());
        }
    }
    ok &= exact_ok && worst_num <= 1e-10;
    outcome(
        ok,
        format!("max |z| {worst_z:.2}, overlap sums exact: {exact_ok}, numeric deviation {worst_num:.2e}"),
    )
}

fn frustration_residual(h: &WalkHamiltonian) -> f64 {
    let mut worst = 0.0f64;
    for w in h.ground_basis().unwrap() {
        for pair in h.config().pairs() {
            let pw = h.apply_projector(pair, &w);
            let r = pw
                .iter()
                .zip(&w)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
    }
    worst
}

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for t in [1usize, 2] {
        let h = walk_hamiltonian(WalkConfig::new(3, 2, t).unwrap()).unwrap();
        let spectrum = dense_spectrum(&h).unwrap();
        let dense_gap = spectrum.iter().copied().find(|&v| v > 1e-8).unwrap();
        let free = spectral_gap(&h).unwrap();
        let diff = (free.gap - dense_gap).abs();
        let lmin = spectrum[0].abs();
        let fr = frustration_residual(&h);
        ok &= diff <= 1e-8 && lmin <= 1e-10 && fr <= 1e-9;
        notes.push(format!(
            "n=3 t={t}: |Δ_mf − Δ_dense| {diff:.1e}, λ_min {lmin:.1e}, residual {fr:.1e}"
        ));
    }
    let mut gaps = std::collections::BTreeMap::new();
    for t in [1usize, 2] {
        for n in 2..=4 {
            let h = walk_hamiltonian(WalkConfig::new(n, 2, t).unwrap()).unwrap();
            let g = spectral_gap(&h).unwrap().gap;
            ok &= frustration_residual(&h) <= 1e-9;
            gaps.insert((n, t), g);
        }
    }
    for t in [1usize, 2] {
        // block length from lemma7_gap_bound for t ≥ 2, the smallest chain for t = 1
        let l = if t >= 2 {
            lemma7_gap_bound(2, t, 1.0).unwrap().0
        } else {
            2
        };
        let base = gaps[&(l, t)];
        let nach = nachtergaele_bound(base, 1.0 / (2.0 * (l as f64).sqrt()), l).unwrap();
        let lem = if t >= 2 {
            Some(lemma7_gap_bound(2, t, base).unwrap().1)
        } else {
            None
        };
        for n in 2..=4 {
            let g = gaps[&(n, t)];
            ok &= g >= nach && lem.is_none_or(|b| g >= b);
            notes.push(format!(
                "Δ(n={n},t={t}) {g:.6} vs bounds {nach:.6}{}",
                lem.map(|b| format!("/{b:.6}")).unwrap_or_default()
            ));
        }
    }
    outcome(ok, notes.join("; "))
}

fn criterion_5a() -> Outcome {
    let mut ok = true;
    for t in [2usize, 4] {
        let rs: Vec<u64> = (2..=12).map(|n| min_sequence_size(n, 2, t)).collect();
        ok &= rs.windows(2).all(|w| w[1] > w[0]);
    }
    outcome(
        ok,
        "r strictly increasing in n over 2..=12 for t = 2 and t = 4",
    )
}

fn criterion_5b() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=12 {
        let r2 = min_sequence_size(n, 2, 2) as f64;
        let r4 = min_sequence_size(n, 2, 4) as f64;
        worst = worst.max((r4 - r2).abs() / r2);
    }
    outcome(
        worst < 0.10,
        format!(
            "max relative change between t=2 and t=4 is {:.1}%",
            100.0 * worst
        ),
    )
}

fn criterion_5c() -> Outcome {
    let r = min_sequence_size(2, 2, 2);
    let oracle = fixed::min_sequence_size(2, 2, 2);
    let mut agree = true;
    for n in 2..=12u32 {
        for t in [2u64, 4] {
            agree &= BigInt::from(min_sequence_size(n as usize, 2, t as usize))
                == fixed::min_sequence_size(n, 2, t);
        }
    }
    outcome(
        r == 102 && oracle == BigInt::from(102) && agree,
        format!("r(2,2,2) = {r}, high-precision {oracle}, full sweep agrees: {agree}"),
    )
}

fn criterion_6() -> Outcome {
    let values: Vec<f64> = (2..=40)
        .map(|t| diamond_bound_thm3(2, t).unwrap())
        .collect();
    let gaps: Vec<f64> = values.iter().map(|v| 1.0 - v).collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let inside = values.iter().chain(&gaps).all(|&v| v > 0.0 && v < 1.0);
    outcome(
        decreasing && inside,
        format!(
            "1 − bound from {:.3e} to {:.3e}",
            gaps[0],
            gaps[gaps.len() - 1]
        ),
    )
}

fn criterion_7() -> Outcome {
    let lengths = vec![2, 4, 8, 16, 32, 64];
    let noise = NoiseModel::Independent(Channel::depolarizing(2, 0.01).unwrap());
    let plain = RBConfig::new(1, lengths.clone(), 100, noise.clone(), 7);
    let biased = RBConfig::new(1, lengths.clone(), 100, noise, 7).with_spam_bias(0.05);
    let fit = |cfg: &RBConfig| {
        let data = run_rb(cfg).unwrap();
        let means: Vec<f64> = data.iter().map(|p| p.mean).collect();
        fit_decay(&lengths, &means, 2).unwrap()
    };
    let f0 = fit(&plain);
    let f1 = fit(&biased);
    let shift = (f1.a - f0.a).hypot(f1.b - f0.b);
    let ok = (f0.p - 0.99).abs() <= 0.005 && (f1.p - 0.99).abs() <= 0.005 && shift >= 0.01;
    outcome(
        ok,
        format!(
            "p_fit {:.5} plain, {:.5} biased; (A,B) shift {shift:.4}",
            f0.p, f1.p
        ),
    )
}

fn random_noise(dim: usize, rng: &mut RngStream) -> Channel {
    if rng.random_bool(0.5) {
        Channel::depolarizing(dim, rng.random_range(0.0..0.3)).unwrap()
    } else {
        Channel::unitary(&unitary_error(dim, rng.random_range(0.0..0.5), rng))
    }
}

fn design_error(noise: &Channel, ens: &UnitaryEnsemble) -> f64 {
    let finite = twirl(noise, ens, 1).unwrap();
    let haar = twirl(noise, &UnitaryEnsemble::haar(noise.dim()), 1).unwrap();
    0.5 * diamond_norm(&finite.difference(&haar).unwrap()).unwrap()
}

fn criterion_8() -> Outcome {
    let mut rng = RngStream::new(8, 0);
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    for inst in 0..200 {
        let n = 1 + inst % 2;
        let dim = 1 << n;
        let k = rng.random_range(1..=4);
        let group = clifford_group(n).unwrap();
        let ens = UnitaryEnsemble::clifford(n).unwrap();
        let rounds: Vec<Round> = (0..k)
            .map(|_| Round {
                clifford: group.get(rng.random_range(0..group.len())).clone(),
                non_clifford: if rng.random_bool(0.25) {
                    ComplexMatrix::identity(dim)
                } else {
                    sample_haar_unitary(dim, &mut rng)
                },
                noise: RoundNoise::Independent(random_noise(dim, &mut rng)),
            })
            .collect();
        let circuit = CircuitSpec::new(n, rounds).unwrap();
        let eps: Vec<f64> = (0..k)
            .map(|j| design_error(&circuit.round_noise(j).unwrap(), &ens))
            .collect();
        let bound =
            fidelity_bound_thm4(&circuit, &eps, haar_twirled_trace(&circuit).unwrap()).unwrap();
        let (mean, se) =
            simulate_circuit_fidelity(&circuit, &ens, 1, 200, 1000 + inst as u64).unwrap();
        let slack = bound.value + 3.0 * se - mean;
        min_slack = min_slack.min(slack);
        if slack < 0.0 {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in 200 instances, min slack {min_slack:.4}"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = RngStream::new(9, 0);
    let group = clifford_group(1).unwrap();
    let ens = UnitaryEnsemble::clifford(1).unwrap();
    let mut violations = 0;
    let mut improved_below = 0;
    let mut worst_ratio = 0.0f64;
    for _ in 0..50 {
        let k = rng.random_range(1..=3);
        let mut gd = Vec::new();
        let mut gi = Vec::new();
        for _ in 0..k {
            let clifford = group.get(rng.random_range(0..group.len())).clone();
            let non_clifford = sample_haar_unitary(2, &mut rng);
            gd.push(Round {
                clifford: clifford.clone(),
                non_clifford: non_clifford.clone(),
                noise: RoundNoise::Dependent {
                    clifford: Channel::random_cptp(2, 2, &mut rng),
                    non_clifford: Channel::random_cptp(2, 2, &mut rng),
                },
            });
            gi.push(Round {
                clifford,
                non_clifford,
                noise: RoundNoise::Independent(Channel::random_cptp(2, 2, &mut rng)),
            });
        }
        let gd = CircuitSpec::new(1, gd).unwrap();
        let gi = CircuitSpec::new(1, gi).unwrap();
        let eps: Vec<f64> = (0..k)
            .map(|j| design_error(&gi.round_noise(j).unwrap(), &ens))
            .collect();
        let (basic, improved) = difference_bound_thm5(&gd, &gi, &eps).unwrap();
        let actual = diamond_norm(
            &gd.twirled_channel(&ens, 1)
                .unwrap()
                .difference(&gi.twirled_channel(&ens, 1).unwrap())
                .unwrap(),
        )
        .unwrap();
        if actual > basic.value {
            violations += 1;
        }
        if improved.value <= basic.value {
            improved_below += 1;
        }
        worst_ratio = worst_ratio.max(actual / basic.value);
    }
    outcome(
        violations == 0,
        format!(
            "{violations} violations in 50 instances, max actual/basic {worst_ratio:.3}; improved ≤ basic in {improved_below}/50"
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = RngStream::new(10, 0);
    let mut envelope_ok = true;
    for i in 0..100 {
        let dim = if i % 2 == 0 { 2 } else { 4 };
        let a = Channel::random_cptp(dim, 1 + i % 3, &mut rng);
        let b = Channel::random_cptp(dim, 1 + (i / 2) % 3, &mut rng);
        let delta = a.difference(&b).unwrap();
        let j1 = trace_norm(&delta.choi());
        let v = diamond_norm(&delta).unwrap();
        envelope_ok &= v >= j1 / dim as f64 - 1e-9 && v <= j1 + 1e-9;
    }
    let zero = Channel::from_transfer(2, ComplexMatrix::zeros(4)).unwrap();
    let zero_ok = diamond_norm(&zero).unwrap() == 0.0;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let a = Channel::random_cptp(2, 2, &mut rng);
        let b = Channel::random_cptp(2, 1, &mut rng);
        let delta = a.difference(&b).unwrap();
        worst =
            worst.max((diamond_norm(&delta).unwrap() - qubit_diamond_by_grid(&delta.choi())).abs());
    }
    outcome(
        envelope_ok && zero_ok && worst <= 1e-4,
        format!(
            "envelope holds: {envelope_ok}, zero map: {zero_ok}, max grid deviation {worst:.2e}"
        ),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1", criterion_1, Duration::from_secs(10)),
        ("2", criterion_2, Duration::from_secs(30)),
        ("3", criterion_3, Duration::from_secs(120)),
        ("4", criterion_4, Duration::from_secs(600)),
        ("5a", criterion_5a, Duration::from_secs(1)),
        ("5b", criterion_5b, Duration::from_secs(1)),
        ("5c", criterion_5c, Duration::from_secs(1)),
        ("6", criterion_6, Duration::from_secs(1)),
        ("7", criterion_7, Duration::from_secs(120)),
        ("8", criterion_8, Duration::from_secs(600)),
        ("9", criterion_9, Duration::from_secs(600)),
        ("10", criterion_10, Duration::from_secs(600)),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = Vec::new();
    for (id, run, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= limit;
        println!(
            "{} criterion {id}: {} [{:.2}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!(
            "acceptance: {} failed ({})",
            failed.len(),
            failed.join(", ")
        );
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
