use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ghpsnr::core::PointCloud;
use ghpsnr::ply::{save_ply, Encoding};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn ghpsnr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghpsnr")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_cloud(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n).map(|_| [0; 3].map(|_| r.random_range(0.0..1023.0f64))).collect();
    let c = PointCloud::new(name, pts).unwrap().with_precision_bits(Some(10));
    let path = dir.join(format!("{name}.ply"));
    save_ply(&c, &path, Encoding::BinaryLittleEndian).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compare_with_itself_is_infinite() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_cloud(dir.path(), "a", 500, 1);
    let v = json(&ghpsnr(&["compare", s(&a), s(&a)]));
    assert_eq!(v["signal_peak"], 1023.0);
    assert_eq!(v["results"][0]["label"], "D1");
    assert!(v["results"][0]["psnr_db"].is_null());
}

#[test]
fn plane_without_normals_estimates_them() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_cloud(dir.path(), "a", 400, 2);
    let b = write_cloud(dir.path(), "b", 380, 3);
    let v = json(&ghpsnr(&["compare", s(&a), s(&b), "--kind", "p2pl"]));
    let est = v["estimated_normals"].as_array().unwrap();
    assert_eq!(est.len(), 2);
    assert!(est.iter().all(|e| e["k"] == 12));
    assert_eq!(v["results"][0]["label"], "D2");
    assert!(v["results"][0]["psnr_db"].as_f64().unwrap().is_finite());
}

#[test]
fn grid_has_full_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_cloud(dir.path(), "a", 300, 4);
    let b = write_cloud(dir.path(), "b", 310, 5);
    let csv = dir.path().join("grid.csv");
    let v = json(&ghpsnr(&["compare", s(&a), s(&b), "--grid", "--csv", s(&csv)]));
    assert_eq!(v["results"].as_array().unwrap().len(), 2 * (15 * 4 + 1));
    let rows = std::fs::read_to_string(&csv).unwrap().lines().count();
    assert_eq!(rows, 1 + 122);
}

#[test]
fn gh_flags_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_cloud(dir.path(), "a", 200, 6);
    let b = write_cloud(dir.path(), "b", 200, 7);
    let v = json(&ghpsnr(&["compare", s(&a), s(&b), "--reduction", "gh", "--per", "98", "--pooling", "avg"]));
    assert_eq!(v["results"][0]["per"], 98.0);
    assert_eq!(v["results"][0]["pooling"], "avg");

    assert_eq!(ghpsnr(&["compare", s(&a), s(&b), "--reduction", "gh"]).status.code(), Some(1));
    assert_eq!(ghpsnr(&["compare", s(&a), s(&b), "--per", "0"]).status.code(), Some(1));
    assert_eq!(ghpsnr(&["bogus"]).status.code(), Some(1));
    let missing = ghpsnr(&["compare", "/no/such.ply", s(&b)]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(missing.stdout.is_empty());

    // no precision comment and no --peak
    let c = PointCloud::new("np", vec![[0.0; 3], [1.0, 1.0, 1.0]]).unwrap();
    let np = dir.path().join("np.ply");
    save_ply(&c, &np, Encoding::Ascii).unwrap();
    assert_eq!(ghpsnr(&["compare", s(&np), s(&np)]).status.code(), Some(1));
    assert!(ghpsnr(&["compare", s(&np), s(&np), "--peak", "1"]).status.success());

    let bad = dir.path().join("bad.ply");
    std::fs::write(&bad, "ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\nend_header\n").unwrap();
    assert_eq!(ghpsnr(&["compare", s(&bad), s(&a)]).status.code(), Some(3));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_cloud(dir.path(), "a", 300, 8);
    let b = write_cloud(dir.path(), "b", 300, 9);
    let first = ghpsnr(&["compare", s(&a), s(&b), "--grid"]);
    let second = ghpsnr(&["compare", s(&a), s(&b), "--grid"]);
    assert_eq!(first.stdout, second.stdout);
    let stamped = json(&ghpsnr(&["compare", s(&a), s(&b), "--timestamp"]));
    assert!(stamped["timestamp"].as_u64().is_some());
}

#[test]
fn distort_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_cloud(dir.path(), "a", 3000, 10);
    let out = dir.path().join("pruned.ply");
    assert!(ghpsnr(&["distort", s(&a), s(&out), "--octree-depth", "4"]).status.success());
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("pruned.ply.json")).unwrap()).unwrap();
    assert_eq!(manifest["distortion"]["kind"], "octree_prune");
    assert_eq!(manifest["distortion"]["depth"], 4);
    let v = json(&ghpsnr(&["compare", s(&a), s(&out)]));
    let psnr = v["results"][0]["psnr_db"].as_f64().unwrap();
    assert!(psnr.is_finite() && psnr > 0.0);
}

#[test]
fn distort_is_deterministic_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_cloud(dir.path(), "a", 1000, 11);
    let (o1, o2) = (dir.path().join("o1.ply"), dir.path().join("o2.ply"));
    for o in [&o1, &o2] {
        let st = ghpsnr(&["distort", s(&a), s(o), "--jitter-sigma", "0.5", "--seed", "42"]);
        assert!(st.status.success());
    }
    assert_eq!(std::fs::read(&o1).unwrap(), std::fs::read(&o2).unwrap());

    let o3 = dir.path().join("o3.ply");
    let zero = ghpsnr(&["distort", s(&a), s(&o3), "--outlier-fraction", "0", "--outlier-magnitude", "5"]);
    assert_eq!(zero.status.code(), Some(1));
    assert!(!o3.exists());
    let both = ghpsnr(&["distort", s(&a), s(&o3), "--octree-depth", "3", "--jitter-sigma", "1"]);
    assert_eq!(both.status.code(), Some(1));
}

fn profile_rows(out: &Output) -> Vec<(String, f64, f64)> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_reader(&out.stdout[..]);
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].parse().unwrap(), r[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn profile_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_cloud(dir.path(), "a", 2000, 12);
    let rows = profile_rows(&ghpsnr(&["profile", s(&a), s(&a)]));
    assert_eq!(rows.len(), 2 * 15);
    assert!(rows.iter().all(|r| r.2 == 0.0));

    let o = dir.path().join("o.ply");
    assert!(ghpsnr(&["distort", s(&a), s(&o), "--outlier-fraction", "0.001", "--outlier-magnitude", "5000", "--seed", "3"]).status.success());
    let rows = profile_rows(&ghpsnr(&["profile", s(&a), s(&o), "--direction", "ba", "--per-list", "50,90,99,100"]));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2].2, 0.0);
    assert!(rows[3].2 > 3000.0 * 3000.0);
}

#[test]
fn heatmap_command_writes_colored_ply() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_cloud(dir.path(), "a", 500, 13);
    let b = write_cloud(dir.path(), "b", 450, 14);
    let h = dir.path().join("h.ply");
    assert!(ghpsnr(&["heatmap", s(&a), s(&b), s(&h), "--encoding", "ascii"]).status.success());
    let t = ghpsnr::ply::read_vertex_table(std::io::BufReader::new(std::fs::File::open(&h).unwrap())).unwrap();
    assert_eq!(t.rows.len(), 450);
    assert!(t.header.property("red").is_some() && t.header.property("error").is_some());
}

#[test]
fn correlate_reports_and_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(15);
    let mut text = String::from("stimulus_id,mos,perfect,noisy,shuffled\n");
    let mos: Vec<f64> = (0..54).map(|i| 1.0 + 4.0 * f64::from(i) / 53.0).collect();
    let mut shuffled = mos.clone();
    use rand::seq::SliceRandom;
    shuffled.shuffle(&mut r);
    for (i, m) in mos.iter().enumerate() {
        let noisy = m * 10.0 + 20.0 + r.random_range(-2.0..2.0);
        text.push_str(&format!("s{i},{m},{},{noisy},{}\n", m * 10.0 + 20.0, shuffled[i] * 10.0 + 20.0));
    }
    let csv = dir.path().join("mos.csv");
    std::fs::write(&csv, text).unwrap();

    let fits = dir.path().join("fits");
    let v = json(&ghpsnr(&["correlate", s(&csv), "--rank", "--fit-csv-dir", s(&fits)]));
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    let perfect = reports.iter().find(|r| r["metric_label"] == "perfect").unwrap();
    assert!((perfect["plcc_fitted"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let ranking: Vec<&str> = v["ranking"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    let pos = |l| ranking.iter().position(|x| *x == l).unwrap();
    assert!(pos("noisy") < pos("shuffled"));
    assert!(fits.join("noisy.csv").exists());

    let missing = ghpsnr(&["correlate", s(&csv), "--metric", "d1"]);
    assert_eq!(missing.status.code(), Some(3));
    let err = String::from_utf8_lossy(&missing.stderr);
    assert!(err.contains("noisy") && err.contains("perfect") && err.contains("shuffled"), "{err}");
}
