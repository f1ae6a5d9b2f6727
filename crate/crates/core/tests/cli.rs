mod common;

use std::fs;
use std::path::Path;

use common::{cli_ok, run_cli};
use tempfile::TempDir;
use triplet_kernels::synth::Dataset;
use triplet_kernels::KernelMatrix;

fn kernel_file(path: &Path) -> KernelMatrix {
    KernelMatrix::read_from(std::io::BufReader::new(fs::File::open(path).unwrap())).unwrap()
}

fn meta(path: &Path) -> String {
    fs::read_to_string(format!("{}.meta", path.display())).unwrap()
}

fn meta_value(path: &Path, key: &str) -> String {
    meta(path)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
        .unwrap_or_else(|| panic!("{key} missing from sidecar"))
}

#[test]
fn gen_writes_expected_line_counts() {
    let dir = TempDir::new().unwrap();
    cli_ok(dir.path(), &["gen", "--n", "12", "--fraction", "1", "--seed", "2"]);
    let data = fs::read_to_string(dir.path().join("dataset.csv")).unwrap();
    assert_eq!(data.lines().count(), 13);
    let trip = fs::read_to_string(dir.path().join("triplets.csv")).unwrap();
    assert_eq!(trip.lines().count(), 12 * 11 * 10 / 2);
    let sidecar = meta(&dir.path().join("triplets.csv"));
    assert!(sidecar.contains("fraction=1\n") && sidecar.contains("stddev=1\n") && sidecar.contains("seed=2\n"));
}

#[test]
fn default_dataset_has_300_points() {
    let dir = TempDir::new().unwrap();
    cli_ok(dir.path(), &["gen", "--fraction", "0.001"]);
    let data = Dataset::read_from(std::io::BufReader::new(fs::File::open(dir.path().join("dataset.csv")).unwrap())).unwrap();
    assert_eq!(data.len(), 300);
    assert_eq!(data.classes(), 3);
}

#[test]
fn config_file_and_flag_override() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.cfg"), "# small run\nn = 9\nfraction=0.5\nseed=4\n").unwrap();
    cli_ok(dir.path(), &["gen", "--config", "run.cfg", "--seed", "5"]);
    let sidecar = meta(&dir.path().join("dataset.csv"));
    assert!(sidecar.contains("n=9\n") && sidecar.contains("seed=5\n"));

    fs::write(dir.path().join("bad.cfg"), "colour=blue\n").unwrap();
    let out = run_cli(dir.path(), &["gen", "--config", "bad.cfg"]);
    assert!(!out.status.success());
}

#[test]
fn k3_is_the_sum_of_k1_and_k2() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    cli_ok(d, &["gen", "--n", "20", "--fraction", "0.6", "--errprob", "0.1"]);
    cli_ok(d, &["kernel", "--triplets", "triplets.csv", "--kernel", "k1", "--out", "k1.csv"]);
    cli_ok(d, &["kernel", "--triplets", "triplets.csv", "--kernel", "k2", "--out", "k2.csv"]);
    cli_ok(d, &["kernel", "--triplets", "triplets.csv", "--kernel", "k3", "--out", "k3.csv"]);
    let (k1, k2, k3) = (kernel_file(&d.join("k1.csv")), kernel_file(&d.join("k2.csv")), kernel_file(&d.join("k3.csv")));
    for i in 0..20 {
        for j in 0..20 {
            assert!((k1.get(i, j) + k2.get(i, j) - k3.get(i, j)).abs() < 1e-12);
        }
    }
    assert_eq!(meta_value(&d.join("k3.csv"), "mu1"), "1");
    assert_eq!(meta_value(&d.join("k1.csv"), "kernel"), "k1");
}

#[test]
fn dominance_fix_reduces_diagonal_by_reported_lambda() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    cli_ok(d, &["gen", "--n", "25", "--fraction", "0.3"]);
    cli_ok(d, &["kernel", "--triplets", "triplets.csv", "--kernel", "k2", "--out", "raw.csv"]);
    cli_ok(d, &["kernel", "--triplets", "triplets.csv", "--kernel", "k2", "--dominance-fix", "--out", "fixed.csv"]);
    let lambda: f64 = meta_value(&d.join("fixed.csv"), "lambda_min").parse().unwrap();
    assert!(lambda > 0.0);
    let (raw, fixed) = (kernel_file(&d.join("raw.csv")), kernel_file(&d.join("fixed.csv")));
    for i in 0..25 {
        for j in 0..25 {
            let shift = if i == j { lambda } else { 0.0 };
            assert!((raw.get(i, j) - shift - fixed.get(i, j)).abs() < 1e-12);
        }
    }
}

#[test]
fn tau_kernel_from_dataset() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    cli_ok(d, &["gen", "--n", "8", "--fraction", "1"]);
    cli_ok(d, &["kernel", "--kernel", "tau", "--dataset", "dataset.csv", "--out", "tau.csv"]);
    let tau = kernel_file(&d.join("tau.csv"));
    assert_eq!(tau.diagonal(), vec![1.0; 8]);
}

#[test]
fn methods_on_a_generated_kernel() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    cli_ok(d, &["gen", "--n", "45", "--fraction", "0.5", "--seed", "8"]);
    cli_ok(d, &["kernel", "--triplets", "triplets.csv", "--kernel", "k3", "--dominance-fix"]);
    cli_ok(d, &["cluster", "--labels", "dataset.csv"]);
    cli_ok(d, &["pca", "--p", "2"]);
    cli_ok(d, &["linkage"]);
    let purity: f64 = meta_value(&d.join("clusters.csv"), "purity").parse().unwrap();
    assert!(purity > 0.9);
    let pca = fs::read_to_string(d.join("pca.csv")).unwrap();
    assert_eq!(pca.lines().count(), 45);
    assert!(pca.lines().all(|l| l.split(',').count() == 3));
    let merges = fs::read_to_string(d.join("dendrogram.csv")).unwrap();
    assert_eq!(merges.lines().count(), 44);
}

#[test]
fn errors_are_single_machine_readable_lines() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();

    let out = run_cli(d, &["kernel", "--triplets", "missing.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error kind=Io message="));

    fs::write(d.join("few.csv"), "0,1,2\n1,0,2\n").unwrap();
    let out = run_cli(d, &["kernel", "--triplets", "few.csv"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error kind=MissingAnchor") && err.contains("[2]"), "{err}");

    let out = run_cli(d, &["kernel", "--triplets", "few.csv", "--kernel", "k1", "--mu1", "2"]);
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error kind=InvalidParameter"));

    fs::write(d.join("bad.csv"), "2\n1,3\n3,1\n").unwrap();
    let out = run_cli(d, &["cluster", "--kernel", "bad.csv", "--k", "2"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error kind=NotPsd") && err.contains("dominance fix"), "{err}");

    let out = run_cli(d, &["gen", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().count(), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let run = || {
        let dir = TempDir::new().unwrap();
        let d = dir.path();
        cli_ok(d, &["gen", "--n", "30", "--fraction", "0.4", "--errprob", "0.2", "--seed", "3"]);
        cli_ok(d, &["kernel", "--triplets", "triplets.csv", "--kernel", "k3", "--dominance-fix"]);
        cli_ok(d, &["cluster", "--seed", "3"]);
        let mut names: Vec<_> = fs::read_dir(d).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        names.iter().map(|p| fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}
