use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn redist(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redist"))
        .args(args)
        .current_dir(dir)
        .env_remove("REDIST_DATA_ROOT")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "run.log" {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

const SMALL: &str = r#"{"seed": 4, "search": {"count": 32}, "bootstrap": {"replicates": 200}}"#;

fn setup() -> tempfile::TempDir {
    let t = tempfile::tempdir().unwrap();
    std::fs::write(t.path().join("c.json"), SMALL).unwrap();
    t
}

/// Runs every artifact-producing command into `out`.
fn all_commands(dir: &Path, out: &str) {
    let ok = |args: &[&str]| {
        let o = redist(dir, args);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
    };
    ok(&["flops", "resnet-10gf", "--out", &format!("{out}/flops"), "--svg"]);
    ok(&["anchor-stats", "--synthetic", "30", "--policy", "sr", "--seed", "3", "--epochs", "2", "--raw", "--out", &format!("{out}/anchors")]);
    ok(&["search", "step1", "--config", "c.json", "--out", out]);
    ok(&["search", "step2", "--config", "c.json", "--out", out]);
    ok(&["bootstrap", &format!("{out}/step2/population.jsonl"), "--replicates", "100", "--out", &format!("{out}/boot")]);
    ok(&["report", &format!("{out}/step1")]);
    ok(&["report", &format!("{out}/step2")]);
}

#[test]
fn every_command_is_deterministic() {
    let t = setup();
    all_commands(t.path(), "a");
    all_commands(t.path(), "b");
    let (a, b) = (files(&t.path().join("a")), files(&t.path().join("b")));
    assert!(a.len() >= 20, "{} files", a.len());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.0, y.0);
        assert!(x.1 == y.1, "{} differs between runs", x.0.display());
    }
    let svg = String::from_utf8(std::fs::read(t.path().join("a/flops/flops.svg")).unwrap()).unwrap();
    assert!(svg.contains(redist_core::svg::GENERATOR));
}

#[test]
fn step1_report_has_one_plot_per_component_with_every_point() {
    let t = setup();
    assert_eq!(code(&redist(t.path(), &["search", "step1", "--config", "c.json", "--out", "r"])), 0);
    assert_eq!(code(&redist(t.path(), &["report", "r/step1"])), 0);
    let report = t.path().join("r/step1/report");
    for c in ["stem", "c2", "c3", "c4", "c5", "shallow", "deep"] {
        let svg = std::fs::read_to_string(report.join(format!("{c}.svg"))).unwrap();
        assert_eq!(svg.matches("<circle").count(), 32, "{c}");
        assert!(svg.contains("published"), "{c}");
    }
    let svgs = std::fs::read_dir(&report).unwrap().filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "svg").count();
    assert_eq!(svgs, 7);
    assert!(std::fs::read_to_string(report.join("report.md")).unwrap().contains("## Ranges"));
}

#[test]
fn flops_baseline_total() {
    let t = setup();
    let o = redist(t.path(), &["flops", "resnet-2.5gf", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let g = v["breakdown"]["total_macs"].as_u64().unwrap() as f64 / 1e9;
    assert!((g / 2.57 - 1.0).abs() <= 0.05, "{g}");
}

#[test]
fn flops_of_arch_file() {
    let t = setup();
    let arch = r#"{"backbone":{"block":"basic","stages":[[1,8],[1,8],[1,8],[1,8]]},"neck":{"n":8},"head":{"h":8,"m":1}}"#;
    std::fs::write(t.path().join("a.json"), arch).unwrap();
    let o = redist(t.path(), &["flops", "a.json", "--input", "64x64", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(t.path().join("o/breakdown.csv")).unwrap();
    assert!(csv.starts_with("component,macs,params,ratio\n"));
}

#[test]
fn usage_and_config_errors_exit_1() {
    let t = setup();
    std::fs::write(t.path().join("bad.json"), "{\"backbone\": ").unwrap();
    std::fs::write(t.path().join("unknown.json"), r#"{"serch": {}}"#).unwrap();
    for args in [
        vec!["flops", "bad.json"],
        vec!["search", "step1", "--config", "unknown.json"],
        vec!["--no-such-flag"],
        vec!["flops"],
        vec!["anchor-stats", "--synthetic", "3", "--policy", "huge"],
        vec!["bootstrap", "x.jsonl", "--components", "tail"],
    ] {
        let o = redist(t.path(), &args);
        assert_eq!(code(&o), 1, "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    let o = redist(t.path(), &["search", "step1", "--config", "unknown.json"]);
    assert!(stderr(&o).contains("serch"), "{}", stderr(&o));
}

#[test]
fn data_errors_exit_2() {
    let t = setup();
    std::fs::write(t.path().join("gt.txt"), "0--a/x.jpg\n1\n1 2 3 4 0 0 0 0 0 0\n").unwrap();
    std::fs::write(t.path().join("broken.txt"), "0--a/x.jpg\nmany\n").unwrap();
    for args in [
        vec!["scale-stats", "--gt", "missing.txt"],
        vec!["scale-stats", "--gt", "gt.txt", "--images", "no-such-dir"],
        vec!["scale-stats", "--gt", "broken.txt"],
        vec!["search", "step2", "--out", "nothing"],
        vec!["report", "."],
        vec!["bootstrap", "missing.jsonl"],
    ] {
        let o = redist(t.path(), &args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
    let o = redist(t.path(), &["scale-stats", "--gt", "gt.txt", "--images", "no-such-dir"]);
    assert!(stderr(&o).contains("0--a/x.jpg"));
}

#[test]
fn missing_scores_are_listed() {
    let t = setup();
    assert_eq!(code(&redist(t.path(), &["search", "step1", "--config", "c.json", "--out", "r"])), 0);
    let pop = std::fs::read_to_string(t.path().join("r/step1/population.jsonl")).unwrap();
    let ids: Vec<String> = pop
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"].as_str().unwrap().to_string())
        .collect();
    let mut csv = "arch_id,ap\n".to_string();
    for id in &ids[..30] {
        csv.push_str(&format!("{id},0.5\n"));
    }
    std::fs::write(t.path().join("scores.csv"), csv).unwrap();
    let o = redist(t.path(), &["search", "step1", "--config", "c.json", "--out", "s", "--scores", "scores.csv"]);
    assert_eq!(code(&o), 2);
    for id in &ids[30..] {
        assert!(stderr(&o).contains(id.as_str()), "{}", stderr(&o));
    }
}

#[test]
fn scale_stats_with_sizes_csv_and_data_root() {
    let t = setup();
    let root = t.path().join("data");
    std::fs::create_dir_all(&root).unwrap();
    std::fs::write(root.join("gt.txt"), "a.jpg\n2\n0 0 10 10 0 0 0 0 0 0\n0 0 40 40 0 0 0 0 0 0\n").unwrap();
    std::fs::write(root.join("sizes.csv"), "path,width,height\na.jpg,640,480\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_redist"))
        .args(["scale-stats", "--gt", "gt.txt", "--sizes", "sizes.csv", "--thresholds", "32,16,8", "--out", "out"])
        .current_dir(t.path())
        .env("REDIST_DATA_ROOT", &root)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("scale < 32: 0.5000"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(t.path().join("out/cdf.csv")).unwrap();
    assert_eq!(csv, "threshold,fraction\n32,0.5\n16,0.5\n8,0\n");
}

#[test]
fn full_curve_csv() {
    let t = setup();
    std::fs::write(t.path().join("gt.txt"), "a.jpg\n1\n0 0 10 10 0 0 0 0 0 0\n").unwrap();
    std::fs::write(t.path().join("s.csv"), "path,width,height\na.jpg,640,480\n").unwrap();
    let o = redist(t.path(), &["scale-stats", "--gt", "gt.txt", "--sizes", "s.csv", "--full", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(t.path().join("o/cdf.csv")).unwrap();
    assert_eq!(csv.lines().count(), 641);
    assert!(csv.contains("\n10,0\n11,1\n"));
}

#[test]
fn zero_epochs_zero_histogram() {
    let t = setup();
    let o = redist(t.path(), &["anchor-stats", "--synthetic", "5", "--epochs", "0", "--out", "z"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(t.path().join("z/stats.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0")), "{csv}");
}

#[test]
fn threads_option_is_accepted() {
    let t = setup();
    let o = redist(t.path(), &["--threads", "1", "anchor-stats", "--synthetic", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&redist(t.path(), &["--threads", "0", "flops", "resnet-10gf"])), 1);
}
