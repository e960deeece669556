use std::path::Path;

use redist_core::config::{EvaluatorConfig, RunConfig};
use redist_core::flops::component_ratios;
use redist_core::pipeline::*;
use redist_core::Error;

fn small(seed: u64) -> RunConfig {
    let mut cfg = RunConfig {
        seed,
        ..Default::default()
    };
    cfg.search.count = 64;
    cfg.bootstrap.replicates = 200;
    cfg
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    ["config.json", "population.jsonl", "ranges.json", "ranges.csv", "best.json"]
        .iter()
        .map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap()))
        .collect()
}

#[test]
fn step2_population_respects_step1_ranges() {
    let ev = SyntheticSurrogate::default();
    let cfg = small(8);
    let s1 = run_step1(&cfg, &ev).unwrap();
    let s2 = run_step2(&cfg, &s1, &ev).unwrap();
    let ranges = s1.backbone_ranges().unwrap();
    assert_eq!(s2.manifest.backbone_ranges, Some(ranges));
    for s in &s2.population {
        let r = component_ratios(&s.flops).unwrap();
        for (i, (lo, hi)) in ranges.stages.iter().enumerate() {
            assert!(*lo <= r.stages[i] && r.stages[i] <= *hi, "{}: stage {i} {} not in [{lo}, {hi}]", s.id, r.stages[i]);
        }
        assert!(cfg.regime.contains(s.flops.total_macs));
    }
    for s in &s1.population {
        assert_eq!(s.arch.neck, cfg.search.step1_neck);
        assert_eq!((s.arch.head.h, s.arch.head.m), (cfg.search.step1_head.h, cfg.search.step1_head.m));
    }
}

#[test]
fn step2_requires_a_step1_run() {
    let ev = SyntheticSurrogate::default();
    let base = run_baseline(&small(1), &ev).unwrap();
    assert!(run_step2(&small(1), &base, &ev).is_err());
}

#[test]
fn run_dirs_are_byte_identical_across_reruns() {
    let ev = SyntheticSurrogate::default();
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = small(21);
    write_run_dir(&run_step1(&cfg, &ev).unwrap(), &a).unwrap();
    write_run_dir(&run_step1(&cfg, &ev).unwrap(), &b).unwrap();
    assert_eq!(read_all(&a), read_all(&b));

    let back = read_run_dir(&a).unwrap();
    let c = tmp.path().join("c");
    write_run_dir(&back, &c).unwrap();
    assert_eq!(read_all(&a), read_all(&c));
    assert!(a.join("run.log").is_file());
}

#[test]
fn missing_run_dir_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(read_run_dir(tmp.path()).is_err());
}

#[test]
fn csv_scores_missing_ids_are_listed() {
    let ev = SyntheticSurrogate::default();
    let mut cfg = small(2);
    cfg.search.count = 8;
    let rec = run_step1(&cfg, &ev).unwrap();
    let mut csv = String::from("arch_id,ap\n");
    for s in &rec.population[..5] {
        csv.push_str(&format!("{},{}\n", s.id, s.ap.unwrap()));
    }
    let lookup = CsvLookup::from_reader(csv.as_bytes(), "scores.csv").unwrap();
    match run_step1(&cfg, &lookup) {
        Err(Error::Unscored(ids)) => {
            let want: Vec<String> = rec.population[5..].iter().map(|s| s.id.to_string()).collect();
            assert_eq!(ids, want);
        }
        other => panic!("expected unscored error, got {:?}", other.map(|r| r.population.len())),
    }
}

#[test]
fn csv_scores_reproduce_surrogate_run() {
    let ev = SyntheticSurrogate::default();
    let cfg = small(3);
    let rec = run_step1(&cfg, &ev).unwrap();
    let mut csv = String::from("arch_id,ap\n");
    for s in &rec.population {
        csv.push_str(&format!("{},{}\n", s.id, s.ap.unwrap()));
    }
    let lookup = CsvLookup::from_reader(csv.as_bytes(), "scores.csv").unwrap();
    let again = run_step1(&cfg, &lookup).unwrap();
    assert_eq!(again.ranges, rec.ranges);
    assert_eq!(again.best, rec.best);
}

#[test]
fn constant_evaluator_flags_every_range_degenerate() {
    let mut cfg = small(4);
    cfg.evaluator = EvaluatorConfig::Constant { ap: 0.5 };
    let ev = evaluator_from_config(&cfg.evaluator).unwrap();
    let rec = run_step1(&cfg, ev.as_ref()).unwrap();
    assert!(rec.ranges.iter().all(|r| r.degenerate));
}

#[test]
fn noisy_surrogate_is_seeded() {
    let ev = |seed| {
        SyntheticSurrogate::new(redist_core::config::SurrogateParams {
            noise_sigma: 0.02,
            noise_seed: seed,
            ..Default::default()
        })
    };
    let cfg = small(5);
    let a = run_step1(&cfg, &ev(1)).unwrap();
    let b = run_step1(&cfg, &ev(1)).unwrap();
    let c = run_step1(&cfg, &ev(2)).unwrap();
    assert_eq!(a.population, b.population);
    assert_ne!(a.population, c.population);
}
