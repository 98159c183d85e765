use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use tdesign::bounds::{
    diamond_bound_thm3, difference_bound_thm5, fidelity_bound_thm4, fig1_sweep, fig2_sweep,
    haar_twirled_trace, lemma7_gap_bound, nachtergaele_bound,
};
use tdesign::channels::{diamond_norm, schur_twirl_pair, twirl, Channel};
use tdesign::designs::{design_distance, frame_potential, haar_frame_potential, UnitaryEnsemble};
use tdesign::groups::clifford_group;
use tdesign::haar::{
    haar_monomial_average, haar_monomial_estimate, rational_to_f64, sample_haar_unitary,
    stream_seed, RngStream,
};
use tdesign::linalg::{ComplexMatrix, C64};
use tdesign::rb::{fit_decay, run_rb, simulate_circuit_fidelity, CircuitSpec, Round, RoundNoise};
use tdesign::walk::{spectral_gap, walk_design_distance, walk_hamiltonian, WalkConfig};

use crate::output::{num, opt, Artifacts, Table};
use crate::{
    parse_range, BoundsArgs, CircuitBoundArgs, Cli, CliError, DesignDistanceArgs, HaarCheckArgs,
    RbSimArgs, RbSimConfig, SpectralGapArgs, TwirlCheckArgs,
};

type Out = Result<Artifacts, CliError>;

fn artifacts(cli: &Cli, name: &str) -> Artifacts {
    Artifacts::new(&cli.out_dir, name, cli.seed)
}

pub fn haar_check(cli: &Cli, a: &HaarCheckArgs) -> Out {
    let dims = parse_range(&a.dim)?;
    let ts = parse_range(&a.t)?;
    if a.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let mut table = Table::new(
        "haar_check.csv",
        &["dim", "t", "exact", "estimate", "stderr", "z"],
    );
    for &dim in &dims {
        for &t in &ts {
            let exact = rational_to_f64(&haar_monomial_average(1, &[t], dim)?);
            let seed = stream_seed(cli.seed, ((dim as u64) << 32) | t as u64);
            let (mean, se) = haar_monomial_estimate(&[t], dim, a.samples, seed);
            let z = if se > 0.0 { (mean - exact) / se } else { 0.0 };
            table.push(vec![
                dim.to_string(),
                t.to_string(),
                num(exact),
                num(mean),
                num(se),
                num(z),
            ]);
        }
    }
    let mut out = artifacts(cli, "haar-check");
    out.param("dim", &a.dim);
    out.param("t", &a.t);
    out.param("samples", a.samples);
    out.table(table);
    Ok(out)
}

pub fn design_distance_cmd(cli: &Cli, a: &DesignDistanceArgs) -> Out {
    let ens = match a.group.as_str() {
        "clifford1" => UnitaryEnsemble::clifford(1)?,
        "clifford2" => UnitaryEnsemble::clifford(2)?,
        "pauli1" => UnitaryEnsemble::pauli(1),
        "pauli2" => UnitaryEnsemble::pauli(2),
        other => return Err(CliError::Usage(format!("unknown group '{other}'"))),
    };
    let dim = ens.dim();
    let mut table = Table::new(
        "design_distance.csv",
        &[
            "t",
            "dim",
            "ensemble",
            "distance",
            "frame_potential",
            "haar_value",
        ],
    );
    for t in parse_range(&a.t)? {
        table.push(vec![
            t.to_string(),
            dim.to_string(),
            a.group.clone(),
            num(design_distance(&ens, t)?),
            num(frame_potential(&ens, t)?),
            num(haar_frame_potential(dim, t)?),
        ]);
    }
    let mut out = artifacts(cli, "design-distance");
    out.param("group", &a.group);
    out.param("t", &a.t);
    out.table(table);
    Ok(out)
}

/// Measured gaps keyed by `(n, t)` at fixed `d`, computed on demand.
struct GapCache {
    d: usize,
    gaps: BTreeMap<(usize, usize), (f64, usize)>,
}

impl GapCache {
    fn new(d: usize) -> Self {
        Self {
            d,
            gaps: BTreeMap::new(),
        }
    }

    fn get(&mut self, n: usize, t: usize) -> Result<(f64, usize), CliError> {
        if let Some(&v) = self.gaps.get(&(n, t)) {
            return Ok(v);
        }
        let g = spectral_gap(&walk_hamiltonian(WalkConfig::new(n, self.d, t)?)?)?;
        self.gaps.insert((n, t), (g.gap, g.iterations));
        Ok((g.gap, g.iterations))
    }

    /// Block length for the local gap bounds: `lemma7_gap_bound`'s `l` for `t ≥ 2`,
    /// the shortest chain otherwise.
    fn block_length(&self, t: usize) -> Result<usize, CliError> {
        Ok(if t >= 2 {
            lemma7_gap_bound(self.d, t, 1.0)?.0
        } else {
            2
        })
    }

    fn lemma7(&mut self, t: usize) -> Result<Option<f64>, CliError> {
        if t < 2 {
            return Ok(None);
        }
        let l = self.block_length(t)?;
        let base = self.get(l, t)?.0;
        Ok(Some(lemma7_gap_bound(self.d, t, base)?.1))
    }

    fn nachtergaele(&mut self, t: usize) -> Result<(usize, f64), CliError> {
        let l = self.block_length(t)?;
        let base = self.get(l, t)?.0;
        Ok((
            l,
            nachtergaele_bound(base, 1.0 / (2.0 * (l as f64).sqrt()), l)?,
        ))
    }
}

pub fn spectral_gap_cmd(cli: &Cli, a: &SpectralGapArgs) -> Out {
    let ns = parse_range(&a.n)?;
    let ts = parse_range(&a.t)?;
    let mut cache = GapCache::new(a.d);
    let mut table = Table::new(
        "spectral_gap.csv",
        &[
            "n",
            "d",
            "t",
            "gap",
            "lemma7_bound",
            "thm3_bound",
            "iterations",
        ],
    );
    for &n in &ns {
        for &t in &ts {
            let (gap, iterations) = cache.get(n, t)?;
            let lemma7 = cache.lemma7(t)?;
            let thm3 = if t >= 2 {
                Some(diamond_bound_thm3(a.d, t)?)
            } else {
                None
            };
            table.push(vec![
                n.to_string(),
                a.d.to_string(),
                t.to_string(),
                num(gap),
                opt(lemma7),
                opt(thm3),
                iterations.to_string(),
            ]);
        }
    }
    let mut out = artifacts(cli, "spectral-gap");
    out.param("n", &a.n);
    out.param("d", a.d);
    out.param("t", &a.t);
    out.table(table);
    Ok(out)
}

pub fn rb_sim(cli: &Cli, a: &RbSimArgs) -> Out {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", a.config.display())))?;
    let cfg = RbSimConfig::parse(&text)?;
    let rb = cfg.to_rb_config(cli.seed)?;
    let points = run_rb(&rb)?;
    let mut decay = Table::new("decay.csv", &["length", "mean", "stderr"]);
    for p in &points {
        decay.push(vec![p.length.to_string(), num(p.mean), num(p.stderr)]);
    }
    let means: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let fit = fit_decay(&rb.lengths, &means, 1 << rb.n)?;
    let mut fit_table = Table::new("fit.csv", &["A", "B", "p", "error_rate", "residual"]);
    fit_table.push(vec![
        num(fit.a),
        num(fit.b),
        num(fit.p),
        num(fit.error_rate),
        num(fit.residual),
    ]);

    let mut out = Artifacts::new(&cli.out_dir, "rb-sim", rb.seed);
    out.param("config", a.config.display());
    out.param("n", cfg.n);
    out.param("lengths", format!("{:?}", cfg.lengths));
    out.param("num_sequences", cfg.num_sequences);
    out.param("noise.kind", &cfg.noise.kind);
    out.param("noise.param", num(cfg.noise.param));
    out.param("spam.bias", num(cfg.spam.as_ref().map_or(0.0, |s| s.bias)));
    if cfg.uses_walk() {
        out.param("walk_steps", cfg.steps());
        // second-moment quality of one walk gate; skipped where the moment space is too large
        if let Ok(dist) =
            WalkConfig::new(cfg.n, 2, 2).and_then(|c| walk_design_distance(c, cfg.steps()))
        {
            out.param("walk_design_distance", num(dist));
        }
    }
    out.table(decay);
    out.table(fit_table);
    Ok(out)
}

pub fn bounds(cli: &Cli, a: &BoundsArgs) -> Out {
    if !(a.fig1 || a.fig2 || a.gaps) {
        return Err(CliError::Usage(
            "choose at least one of --fig1, --fig2, --gaps".into(),
        ));
    }
    let mut out = artifacts(cli, "bounds");
    out.param("d", a.d);
    if let Some(n) = &a.n {
        out.param("n", n);
    }
    if let Some(t) = &a.t {
        out.param("t", t);
    }
    let range_or = |s: &Option<String>, default: &str| parse_range(s.as_deref().unwrap_or(default));
    if a.fig1 {
        let mut table = Table::new("fig1.csv", &["n", "d", "t", "r_min"]);
        for row in fig1_sweep(&range_or(&a.n, "2..12")?, a.d, &range_or(&a.t, "2,4")?) {
            table.push(vec![
                row.n.to_string(),
                row.d.to_string(),
                row.t.to_string(),
                row.r_min.to_string(),
            ]);
        }
        out.param("fig1", true);
        out.table(table);
    }
    if a.fig2 {
        let mut table = Table::new("fig2.csv", &["t", "d", "one_minus_bound"]);
        for row in fig2_sweep(a.d, &range_or(&a.t, "2..40")?)? {
            table.push(vec![
                row.t.to_string(),
                row.d.to_string(),
                num(row.one_minus_bound),
            ]);
        }
        out.param("fig2", true);
        out.table(table);
    }
    if a.gaps {
        let mut cache = GapCache::new(a.d);
        let mut table = Table::new(
            "gaps.csv",
            &[
                "n",
                "d",
                "t",
                "measured_gap",
                "block_length",
                "nachtergaele_bound",
                "lemma7_bound",
            ],
        );
        for n in range_or(&a.n, "2..4")? {
            for t in range_or(&a.t, "1..2")? {
                let gap = cache.get(n, t)?.0;
                let (l, nach) = cache.nachtergaele(t)?;
                let lemma7 = cache.lemma7(t)?;
                table.push(vec![
                    n.to_string(),
                    a.d.to_string(),
                    t.to_string(),
                    num(gap),
                    l.to_string(),
                    num(nach),
                    opt(lemma7),
                ]);
            }
        }
        out.param("gaps", true);
        out.table(table);
    }
    Ok(out)
}

fn random_matrix(dim: usize, rng: &mut RngStream) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn twirl_check(cli: &Cli, a: &TwirlCheckArgs) -> Out {
    let mut table = Table::new("twirl_check.csv", &["n", "t", "pair", "max_abs_diff"]);
    for t in parse_range(&a.t)? {
        let qubits = a.n * t;
        if qubits == 0 || qubits > 2 {
            return Err(CliError::Usage(format!(
                "twirl check needs 1 ≤ n·t ≤ 2, got n={} t={t}",
                a.n
            )));
        }
        // t copies of n qubits are twirled by the Clifford group on n·t qubits
        let ens = UnitaryEnsemble::clifford(qubits)?;
        let dim = 1 << qubits;
        let mut rng = RngStream::new(cli.seed, t as u64);
        for pair in 0..a.pairs {
            let x = random_matrix(dim, &mut rng);
            let y = random_matrix(dim, &mut rng);
            let group = twirl(&Channel::from_pair(&x, &y)?, &ens, 1)?;
            let closed = schur_twirl_pair(&x, &y)?;
            table.push(vec![
                a.n.to_string(),
                t.to_string(),
                pair.to_string(),
                num(group.transfer().max_abs_diff(closed.transfer())),
            ]);
        }
    }
    let mut out = artifacts(cli, "twirl-check");
    out.param("n", a.n);
    out.param("t", &a.t);
    out.param("pairs", a.pairs);
    out.table(table);
    Ok(out)
}

/// `(1 − s) id + s Λ` with `Λ` a random rank-2 channel and `s < 0.3`.
fn random_noise(dim: usize, rng: &mut RngStream) -> Result<Channel, CliError> {
    let s = rng.random_range(0.0..0.3);
    let mut transfer = Channel::identity(dim).transfer().scale_real(1.0 - s);
    transfer.add_scaled(
        Channel::random_cptp(dim, 2, rng).transfer(),
        C64::new(s, 0.0),
    );
    Ok(Channel::from_transfer(dim, transfer)?)
}

/// Half the diamond distance between the Clifford and Haar twirls.
fn design_error(noise: &Channel, ens: &UnitaryEnsemble) -> Result<f64, CliError> {
    let finite = twirl(noise, ens, 1)?;
    let haar = twirl(noise, &UnitaryEnsemble::haar(noise.dim()), 1)?;
    Ok(0.5 * diamond_norm(&finite.difference(&haar)?)?)
}

fn random_rounds(
    n: usize,
    rounds: usize,
    dependent: bool,
    rng: &mut RngStream,
) -> Result<(Vec<Round>, Vec<Round>), CliError> {
    let group = clifford_group(n)?;
    let dim = 1 << n;
    let mut gd = Vec::new();
    let mut gi = Vec::new();
    for _ in 0..rounds {
        let clifford = group.get(rng.random_range(0..group.len())).clone();
        let non_clifford = sample_haar_unitary(dim, rng);
        if dependent {
            gd.push(Round {
                clifford: clifford.clone(),
                non_clifford: non_clifford.clone(),
                noise: RoundNoise::Dependent {
                    clifford: random_noise(dim, rng)?,
                    non_clifford: random_noise(dim, rng)?,
                },
            });
        }
        gi.push(Round {
            clifford,
            non_clifford,
            noise: RoundNoise::Independent(random_noise(dim, rng)?),
        });
    }
    Ok((gd, gi))
}

pub fn circuit_bound(cli: &Cli, a: &CircuitBoundArgs) -> Out {
    if a.rounds == 0 || a.instances == 0 {
        return Err(CliError::Usage(
            "--rounds and --instances must be positive".into(),
        ));
    }
    let ens = UnitaryEnsemble::clifford(a.n)?;
    let rows: Vec<Vec<String>> = (0..a.instances)
        .into_par_iter()
        .map(|inst| -> Result<Vec<String>, CliError> {
            let mut rng = RngStream::new(cli.seed, inst as u64);
            let (gd, gi) = random_rounds(a.n, a.rounds, a.gate_dependent, &mut rng)?;
            let gi = CircuitSpec::new(a.n, gi)?;
            let eps = (0..gi.len())
                .map(|k| design_error(&gi.round_noise(k)?, &ens))
                .collect::<Result<Vec<_>, _>>()?;
            let head = vec![inst.to_string(), a.n.to_string(), a.rounds.to_string()];
            if a.gate_dependent {
                let gd = CircuitSpec::new(a.n, gd)?;
                let (basic, improved) = difference_bound_thm5(&gd, &gi, &eps)?;
                let actual = diamond_norm(
                    &gd.twirled_channel(&ens, 1)?
                        .difference(&gi.twirled_channel(&ens, 1)?)?,
                )?;
                Ok([
                    head,
                    vec![num(actual), num(basic.value), num(improved.value)],
                ]
                .concat())
            } else {
                let bound = fidelity_bound_thm4(&gi, &eps, haar_twirled_trace(&gi)?)?;
                let (mean, se) = simulate_circuit_fidelity(
                    &gi,
                    &ens,
                    1,
                    a.samples,
                    stream_seed(cli.seed, inst as u64),
                )?;
                Ok([
                    head,
                    vec![
                        num(mean),
                        num(se),
                        num(bound.value),
                        num(bound.value + 3.0 * se - mean),
                    ],
                ]
                .concat())
            }
        })
        .collect::<Result<_, _>>()?;
    let mut table = if a.gate_dependent {
        Table::new(
            "difference.csv",
            &["instance", "n", "rounds", "actual", "basic", "improved"],
        )
    } else {
        Table::new(
            "circuit_bound.csv",
            &[
                "instance", "n", "rounds", "fidelity", "stderr", "bound", "slack",
            ],
        )
    };
    for row in rows {
        table.push(row);
    }
    let mut out = artifacts(cli, "circuit-bound");
    out.param("n", a.n);
    out.param("rounds", a.rounds);
    out.param("instances", a.instances);
    out.param("samples", a.samples);
    out.param("gate_dependent", a.gate_dependent);
    out.table(table);
    Ok(out)
}
