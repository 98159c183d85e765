use std::fs;
use std::path::Path;
use std::process::Command;

use tdesign::walk::{dense_spectral_gap, walk_hamiltonian, WalkConfig};
use tdesign_cli::run_cli;

fn run(dir: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["tdesign", "--out-dir", dir.to_str().unwrap()];
    argv.extend_from_slice(args);
    run_cli(argv)
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn fig1_sweep_has_one_row_per_n() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(
            dir.path(),
            &["bounds", "--fig1", "--n", "2..12", "--d", "2", "--t", "2"]
        ),
        0
    );
    let (header, rows) = read_csv(&dir.path().join("fig1.csv"));
    assert_eq!(header, ["n", "d", "t", "r_min"]);
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0][3], "102");
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("subcommand=bounds\n"));
    assert!(manifest.contains("output=fig1.csv\n"));
}

#[test]
fn single_qubit_clifford_is_a_two_design() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(
            dir.path(),
            &["design-distance", "--group", "clifford1", "--t", "2"]
        ),
        0
    );
    let (header, rows) = read_csv(&dir.path().join("design_distance.csv"));
    let d: f64 = rows[0][column(&header, "distance")].parse().unwrap();
    assert!(d <= 1e-10, "{d}");
}

#[test]
fn pauli_group_is_not_a_two_design() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(
            dir.path(),
            &["design-distance", "--group", "pauli1", "--t", "1..2"]
        ),
        0
    );
    let (header, rows) = read_csv(&dir.path().join("design_distance.csv"));
    let d: Vec<f64> = rows
        .iter()
        .map(|r| r[column(&header, "distance")].parse().unwrap())
        .collect();
    assert!(d[0] <= 1e-10 && d[1] > 0.1, "{d:?}");
}

#[test]
fn spectral_gap_matches_dense_eigensolver() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(
            dir.path(),
            &["spectral-gap", "--n", "3", "--d", "2", "--t", "1"]
        ),
        0
    );
    let (header, rows) = read_csv(&dir.path().join("spectral_gap.csv"));
    let gap: f64 = rows[0][column(&header, "gap")].parse().unwrap();
    let dense =
        dense_spectral_gap(&walk_hamiltonian(WalkConfig::new(3, 2, 1).unwrap()).unwrap()).unwrap();
    assert!((gap - dense).abs() <= 1e-8, "{gap} vs {dense}");
}

#[test]
fn rb_sim_recovers_depolarizing_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("rb.toml");
    fs::write(
        &config,
        "n = 1\nlengths = [2, 4, 8, 16, 32]\nnum_sequences = 30\nseed = 3\n\n[noise]\nkind = \"depolarizing\"\nparam = 0.97\n\n[spam]\nbias = 0.02\n",
    )
    .unwrap();
    assert_eq!(
        run(
            dir.path(),
            &["rb-sim", "--config", config.to_str().unwrap()]
        ),
        0
    );
    let (_, decay) = read_csv(&dir.path().join("decay.csv"));
    assert_eq!(decay.len(), 5);
    let (header, fit) = read_csv(&dir.path().join("fit.csv"));
    let p: f64 = fit[0][column(&header, "p")].parse().unwrap();
    assert!((p - 0.97).abs() < 1e-6, "{p}");
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("seed=3\n"));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("rb.toml");
    fs::write(
        &config,
        "n = 1\nlengths = [2]\nnum_sequences = 0\nnoise.kind = \"none\"\n",
    )
    .unwrap();
    assert_eq!(
        run(
            dir.path(),
            &["rb-sim", "--config", config.to_str().unwrap()]
        ),
        2
    );
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tdesign"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let unknown = binary(&["bounds", "--no-such-flag"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));

    let numerical = binary(&[
        "--out-dir",
        out_dir,
        "spectral-gap",
        "--n",
        "40",
        "--t",
        "3",
    ]);
    assert_eq!(numerical.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&numerical.stderr);
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.starts_with("error: numerical:"));

    let missing = binary(&[
        "--out-dir",
        out_dir,
        "rb-sim",
        "--config",
        "/does/not/exist.toml",
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "circuit-bound",
        "--instances",
        "6",
        "--samples",
        "50",
        "--seed",
        "11",
    ];
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let mut full = vec![
            "--out-dir",
            dir.path().to_str().unwrap(),
            "--threads",
            threads,
        ];
        full.extend_from_slice(&args);
        assert!(binary(&full).status.success());
    }
    let x = fs::read(a.path().join("circuit_bound.csv")).unwrap();
    let y = fs::read(b.path().join("circuit_bound.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert_eq!(
            run(
                dir.path(),
                &[
                    "--seed",
                    "5",
                    "haar-check",
                    "--dim",
                    "2",
                    "--t",
                    "1..2",
                    "--samples",
                    "2000"
                ]
            ),
            0
        );
    }
    let x = fs::read(a.path().join("haar_check.csv")).unwrap();
    let y = fs::read(b.path().join("haar_check.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn gate_dependent_difference_stays_below_basic_bound() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(
            dir.path(),
            &[
                "circuit-bound",
                "--gate-dependent",
                "--instances",
                "4",
                "--rounds",
                "2"
            ]
        ),
        0
    );
    let (header, rows) = read_csv(&dir.path().join("difference.csv"));
    for row in rows {
        let actual: f64 = row[column(&header, "actual")].parse().unwrap();
        let basic: f64 = row[column(&header, "basic")].parse().unwrap();
        assert!(actual <= basic);
    }
}

#[test]
fn twirl_check_rejects_large_registers() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["twirl-check", "--n", "2", "--t", "2"]), 2);
    assert_eq!(
        run(
            dir.path(),
            &["twirl-check", "--n", "1", "--t", "1..2", "--pairs", "2"]
        ),
        0
    );
    let (header, rows) = read_csv(&dir.path().join("twirl_check.csv"));
    assert_eq!(rows.len(), 4);
    for row in rows {
        let d: f64 = row[column(&header, "max_abs_diff")].parse().unwrap();
        assert!(d <= 1e-9);
    }
}
