use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use prevalence_cli::dataset::read_dataset;
use prevalence_cli::joint_file::JointFile;
use prevalence_core::EstimateReport;

fn prevalence(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prevalence"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = prevalence(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn simulate(dir: &Path, preset: &str, n: usize, seed: u64) -> String {
    let out = path(dir, &format!("{preset}-{seed}.csv"));
    ok(&[
        "simulate",
        "--preset",
        preset,
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        &out,
    ]);
    out
}

/// The `NN.NN%` figures of a line, in order.
fn percentages(line: &str) -> Vec<f64> {
    line.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == '%'))
        .filter_map(|w| w.strip_suffix('%'))
        .map(|w| w.parse::<f64>().unwrap() / 100.0)
        .collect()
}

fn read_report(path: &str) -> EstimateReport {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_labeled_preset_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "base.csv");
    let stdout = ok(&[
        "simulate",
        "--preset",
        "intrinsic-strong-base",
        "--n",
        "20000",
        "--seed",
        "1",
        "--out",
        &out,
    ]);
    assert!(stdout.contains("n=20000"), "{stdout}");
    let items = read_dataset(Path::new(&out)).unwrap();
    assert_eq!(items.len(), 20_000);
    let positives = items
        .iter()
        .filter(|i| i.label.unwrap().is_positive())
        .count() as f64
        / 20_000.0;
    assert!((positives - 0.20).abs() < 0.015);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = path(dir.path(), "a.csv");
    let b = path(dir.path(), "b.csv");
    for out in [&a, &b] {
        ok(&[
            "simulate",
            "--preset",
            "extrinsic-weak-target",
            "--n",
            "500",
            "--seed",
            "42",
            "--out",
            out,
        ]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn simulate_rejects_zero_items() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "none.csv");
    let result = prevalence(&[
        "simulate",
        "--preset",
        "intrinsic-strong-base",
        "--n",
        "0",
        "--out",
        &out,
    ]);
    assert!(!result.status.success());
    assert!(!Path::new(&out).exists());
}

#[test]
fn simulate_rejects_preset_with_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "x.csv");
    let result = prevalence(&[
        "simulate",
        "--preset",
        "intrinsic-strong-base",
        "--prev",
        "0.3",
        "--n",
        "10",
        "--out",
        &out,
    ]);
    assert!(!result.status.success());
    assert!(String::from_utf8_lossy(&result.stderr).contains("conflicts"));
}

#[test]
fn simulate_accepts_explicit_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "x.csv");
    ok(&[
        "simulate",
        "--generator",
        "extrinsic",
        "--w",
        "25",
        "--b",
        "-15",
        "--alpha1",
        "10",
        "--beta1",
        "2",
        "--alpha2",
        "2",
        "--beta2",
        "5",
        "--lambda",
        "0.2",
        "--n",
        "100",
        "--seed",
        "3",
        "--out",
        &out,
    ]);
    assert_eq!(read_dataset(Path::new(&out)).unwrap().len(), 100);
}

#[test]
fn omitted_seed_is_announced() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "x.csv");
    let result = prevalence(&[
        "simulate",
        "--preset",
        "intrinsic-weak-base",
        "--n",
        "10",
        "--out",
        &out,
    ]);
    assert!(result.status.success());
    assert!(String::from_utf8_lossy(&result.stderr).contains("seed: "));
}

#[test]
fn calibrate_reports_base_prevalence_with_interval() {
    let dir = tempfile::tempdir().unwrap();
    let base = simulate(dir.path(), "intrinsic-strong-base", 20_000, 1);
    let joint = path(dir.path(), "joint.json");
    let stdout = ok(&[
        "calibrate",
        "--base",
        &base,
        "--reps",
        "200",
        "--seed",
        "2",
        "--out",
        &joint,
    ]);
    let line = stdout.lines().find(|l| l.starts_with("bootstrap")).unwrap();
    let [point, low, high] = percentages(line)[..] else {
        panic!("{line}")
    };
    assert!((point - 0.204).abs() < 0.01, "{line}");
    assert!(low < point && point < high && high - low < 0.03, "{line}");

    let file = JointFile::read(Path::new(&joint)).unwrap();
    let record = file.calibration.unwrap();
    assert_eq!(record.fitter, "platt");
    assert_eq!(record.sample.len(), 2000);
    let sample = read_dataset(&PathBuf::from(&joint).with_extension("sample.csv")).unwrap();
    assert_eq!(sample, record.sample);
}

#[test]
fn single_bin_binned_fit_gives_sample_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let base = simulate(dir.path(), "intrinsic-strong-base", 5000, 1);
    let joint = path(dir.path(), "joint.json");
    let sample = path(dir.path(), "sample.csv");
    ok(&[
        "calibrate",
        "--base",
        &base,
        "--fitter",
        "binned",
        "--bins",
        "1",
        "--reps",
        "0",
        "--seed",
        "2",
        "--out",
        &joint,
        "--sample-out",
        &sample,
    ]);
    let items = read_dataset(Path::new(&sample)).unwrap();
    let fraction = items
        .iter()
        .filter(|i| i.label.unwrap().is_positive())
        .count() as f64
        / items.len() as f64;
    let file = JointFile::read(Path::new(&joint)).unwrap();
    assert!((file.joint.prevalence() - fraction).abs() < 1e-12);
}

#[test]
fn calibrate_uses_prelabeled_sample() {
    let dir = tempfile::tempdir().unwrap();
    let base = simulate(dir.path(), "intrinsic-strong-base", 5000, 1);
    let sample = path(dir.path(), "labels.csv");
    let text = fs::read_to_string(&base).unwrap();
    fs::write(
        &sample,
        text.lines().take(801).collect::<Vec<_>>().join("\n"),
    )
    .unwrap();
    let unlabeled: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                format!("{l}\n")
            } else {
                format!("{},NA\n", l.rsplit_once(',').unwrap().0)
            }
        })
        .collect();
    let base_unlabeled = path(dir.path(), "unlabeled.csv");
    fs::write(&base_unlabeled, unlabeled).unwrap();
    let joint = path(dir.path(), "joint.json");
    ok(&[
        "calibrate",
        "--base",
        &base_unlabeled,
        "--sample",
        &sample,
        "--reps",
        "50",
        "--seed",
        "1",
        "--out",
        &joint,
    ]);
    let file = JointFile::read(Path::new(&joint)).unwrap();
    assert_eq!(file.calibration.unwrap().sample.len(), 800);
    assert!((file.joint.prevalence() - 0.20).abs() < 0.03);
}

#[test]
fn calibrate_names_missing_label_column() {
    let dir = tempfile::tempdir().unwrap();
    let base = simulate(dir.path(), "intrinsic-strong-base", 500, 1);
    let sample = path(dir.path(), "bad.csv");
    fs::write(&sample, "id,score\n1,0.5\n").unwrap();
    let joint = path(dir.path(), "joint.json");
    let result = prevalence(&[
        "calibrate",
        "--base",
        &base,
        "--sample",
        &sample,
        "--out",
        &joint,
    ]);
    assert!(!result.status.success());
    assert!(String::from_utf8_lossy(&result.stderr).contains("`label`"));
}

#[test]
fn calibrate_rejects_unknown_fitter() {
    let dir = tempfile::tempdir().unwrap();
    let base = simulate(dir.path(), "intrinsic-strong-base", 500, 1);
    let result = prevalence(&[
        "calibrate",
        "--base",
        &base,
        "--fitter",
        "spline",
        "--out",
        &path(dir.path(), "j"),
    ]);
    assert!(!result.status.success());
}

fn calibrated(dir: &Path, scenario: &str, fitter: &str) -> String {
    let base = simulate(dir, &format!("{scenario}-base"), 20_000, 1);
    let joint = path(dir, &format!("{scenario}-{fitter}.json"));
    ok(&[
        "calibrate",
        "--base",
        &base,
        "--fitter",
        fitter,
        "--reps",
        "0",
        "--seed",
        "2",
        "--out",
        &joint,
    ]);
    joint
}

#[test]
fn extrapolate_mixture_to_intrinsic_target() {
    let dir = tempfile::tempdir().unwrap();
    let joint = calibrated(dir.path(), "intrinsic-strong", "platt");
    let target = simulate(dir.path(), "intrinsic-strong-target", 20_000, 3);
    let report_path = path(dir.path(), "report.json");
    let stdout = ok(&[
        "extrapolate",
        "--joint",
        &joint,
        "--target",
        &target,
        "--technique",
        "mixture",
        "--reps",
        "100",
        "--seed",
        "4",
        "--out",
        &report_path,
    ]);
    assert!(stdout.contains("mixture"));
    let report = read_report(&report_path);
    assert_eq!(report.replicates, 100);
    assert!((report.point - 0.602).abs() < 0.015, "{report:?}");
    assert!(report.ci_low <= report.point && report.point <= report.ci_high);
}

#[test]
fn extrapolate_cpcc_to_extrinsic_target() {
    let dir = tempfile::tempdir().unwrap();
    let joint = calibrated(dir.path(), "extrinsic-strong", "platt");
    let target = simulate(dir.path(), "extrinsic-strong-target", 20_000, 3);
    let report_path = path(dir.path(), "report.json");
    ok(&[
        "extrapolate",
        "--joint",
        &joint,
        "--target",
        &target,
        "--technique",
        "cpcc",
        "--reps",
        "100",
        "--seed",
        "4",
        "--out",
        &report_path,
    ]);
    let report = read_report(&report_path);
    assert!((report.point - 0.582).abs() < 0.015, "{report:?}");
}

#[test]
fn adjusted_count_on_base_reproduces_base_prevalence() {
    let dir = tempfile::tempdir().unwrap();
    let base = simulate(dir.path(), "intrinsic-strong-base", 20_000, 1);
    let joint = path(dir.path(), "joint.json");
    ok(&[
        "calibrate",
        "--base",
        &base,
        "--reps",
        "0",
        "--seed",
        "2",
        "--out",
        &joint,
    ]);
    let report_path = path(dir.path(), "report.json");
    ok(&[
        "extrapolate",
        "--joint",
        &joint,
        "--target",
        &base,
        "--technique",
        "acc",
        "--threshold",
        "0.5",
        "--reps",
        "0",
        "--out",
        &report_path,
    ]);
    let report = read_report(&report_path);
    let file = JointFile::read(Path::new(&joint)).unwrap();
    assert!((report.point - file.joint.prevalence()).abs() < 1e-9);
}

#[test]
fn extrapolate_rejects_empty_target() {
    let dir = tempfile::tempdir().unwrap();
    let joint = calibrated(dir.path(), "intrinsic-strong", "platt");
    let target = path(dir.path(), "empty.csv");
    fs::write(&target, "id,score,label\n").unwrap();
    let result = prevalence(&[
        "extrapolate",
        "--joint",
        &joint,
        "--target",
        &target,
        "--out",
        &path(dir.path(), "r"),
    ]);
    assert!(!result.status.success());
}

#[test]
fn experiment_smoke_run_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = path(dir.path(), "tables");
    let result = prevalence(&[
        "experiment",
        "--out-dir",
        &out_dir,
        "--reps",
        "2",
        "--seed",
        "1",
        "--n",
        "2000",
    ]);
    assert!(String::from_utf8_lossy(&result.stdout).contains("criterion 1"));
    for table in ["table1.csv", "table2.csv"] {
        let text = fs::read_to_string(Path::new(&out_dir).join(table)).unwrap();
        assert_eq!(text.lines().count(), 5);
    }
}

fn write_manifest(dir: &Path, joint: &str, targets: &[String], techniques: &str) -> String {
    let periods: Vec<String> = targets
        .iter()
        .enumerate()
        .map(|(i, t)| format!(r#"{{"label":"week{}","target":"{}"}}"#, i + 1, t))
        .collect();
    let manifest = path(dir, "manifest.json");
    fs::write(
        &manifest,
        format!(
            r#"{{"base":"{joint}","periods":[{}],"techniques":[{techniques}]}}"#,
            periods.join(",")
        ),
    )
    .unwrap();
    manifest
}

fn series_rows(csv: &str) -> Vec<(String, String, f64)> {
    fs::read_to_string(csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn series_emits_one_row_per_period_and_technique() {
    let dir = tempfile::tempdir().unwrap();
    let joint = calibrated(dir.path(), "intrinsic-strong", "platt");
    let targets: Vec<String> = (0..3)
        .map(|i| simulate(dir.path(), "intrinsic-strong-target", 2000, 10 + i))
        .collect();
    let manifest = write_manifest(dir.path(), &joint, &targets, r#""mixture","pcc""#);
    let out = path(dir.path(), "series.csv");
    ok(&[
        "series",
        "--manifest",
        &manifest,
        "--reps",
        "20",
        "--seed",
        "1",
        "--out",
        &out,
    ]);
    let rows = series_rows(&out);
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[1].1, "pcc");
}

#[test]
fn series_with_unshifted_targets_agrees_with_base() {
    let dir = tempfile::tempdir().unwrap();
    let base = simulate(dir.path(), "intrinsic-strong-base", 20_000, 1);
    let joint = path(dir.path(), "joint.json");
    ok(&[
        "calibrate",
        "--base",
        &base,
        "--reps",
        "0",
        "--seed",
        "2",
        "--out",
        &joint,
    ]);
    let base_prevalence = JointFile::read(Path::new(&joint))
        .unwrap()
        .joint
        .prevalence();
    let manifest = write_manifest(dir.path(), &joint, &[base.clone(), base.clone()], "");
    let out = path(dir.path(), "series.csv");
    ok(&[
        "series",
        "--manifest",
        &manifest,
        "--techniques",
        "cpcc,mixture,median_sweep,acc",
        "--reps",
        "100",
        "--seed",
        "3",
        "--out",
        &out,
    ]);
    for (period, technique, point) in series_rows(&out) {
        assert!(
            (point - base_prevalence).abs() < 0.02,
            "{period} {technique}: {point} vs {base_prevalence}"
        );
    }
}

#[test]
fn series_tracks_rising_prevalence() {
    let dir = tempfile::tempdir().unwrap();
    let joint = calibrated(dir.path(), "intrinsic-strong", "platt");
    let truths = [0.2, 0.3, 0.4, 0.5];
    let targets: Vec<String> = truths
        .iter()
        .enumerate()
        .map(|(i, prev)| {
            let out = path(dir.path(), &format!("week{i}.csv"));
            ok(&[
                "simulate",
                "--generator",
                "intrinsic",
                "--alpha-pos",
                "10",
                "--beta-pos",
                "2",
                "--alpha-neg",
                "2",
                "--beta-neg",
                "5",
                "--prev",
                &prev.to_string(),
                "--n",
                "20000",
                "--seed",
                &(50 + i).to_string(),
                "--out",
                &out,
            ]);
            out
        })
        .collect();
    let manifest = write_manifest(dir.path(), &joint, &targets, r#""mixture""#);
    let out = path(dir.path(), "series.csv");
    ok(&[
        "series",
        "--manifest",
        &manifest,
        "--reps",
        "100",
        "--seed",
        "1",
        "--out",
        &out,
    ]);
    let points: Vec<f64> = series_rows(&out).into_iter().map(|r| r.2).collect();
    assert!(points.windows(2).all(|w| w[0] < w[1]), "{points:?}");
    for (p, truth) in points.iter().zip(truths) {
        assert!((p - truth).abs() <= 0.02, "{points:?}");
    }
}

#[test]
fn series_names_the_unreadable_period() {
    let dir = tempfile::tempdir().unwrap();
    let joint = calibrated(dir.path(), "intrinsic-strong", "platt");
    let manifest = write_manifest(
        dir.path(),
        &joint,
        &["missing.csv".to_string()],
        r#""cpcc""#,
    );
    let result = prevalence(&[
        "series",
        "--manifest",
        &manifest,
        "--out",
        &path(dir.path(), "s.csv"),
    ]);
    assert!(!result.status.success());
    assert!(String::from_utf8_lossy(&result.stderr).contains("week1"));
}
