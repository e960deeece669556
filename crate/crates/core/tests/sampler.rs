use redist_core::arch::{BlockKind, HeadConfig, NeckConfig};
use redist_core::flops::component_ratios;
use redist_core::rng::substream;
use redist_core::search::*;
use redist_core::Error;

fn chi_square(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

#[test]
fn first_stage_depth_is_uniform() {
    let spec = SearchSpaceSpec::default();
    let mut rng = substream(11, 0);
    let mut counts = [0u64; 24];
    for _ in 0..48_000 {
        let b = sample_backbone(&mut rng, &spec, BlockKind::Basic);
        counts[b.stages[0].depth as usize - 1] += 1;
    }
    // 23 degrees of freedom, 0.1% critical value
    let x2 = chi_square(&counts);
    assert!(x2 < 49.73, "chi-square {x2:.1}");
}

#[test]
fn head_width_is_uniform() {
    let spec = SearchSpaceSpec::default();
    let mut rng = substream(12, 0);
    let mut counts = [0u64; 32];
    for _ in 0..64_000 {
        let (_, h) = sample_neck_head(&mut rng, &spec, false);
        counts[(h.h / 8 - 1) as usize] += 1;
    }
    // 31 degrees of freedom, 0.1% critical value
    let x2 = chi_square(&counts);
    assert!(x2 < 61.10, "chi-square {x2:.1}");
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn chain_and_rejection_agree_on_a_loose_band() {
    let mut req = PopulationRequest::new(FlopRegime::new(2.5, 0.5).unwrap(), 600);
    let stats = |req: &PopulationRequest, seed| {
        let pop = generate_population(seed, req).unwrap();
        assert_eq!(pop.len(), 600);
        let pick = |f: &dyn Fn(&ArchSample) -> f64| pop.iter().map(f).collect::<Vec<_>>();
        [
            pick(&|s| s.flops.gmacs()),
            pick(&|s| component_ratios(&s.flops).unwrap().backbone),
            pick(&|s| component_ratios(&s.flops).unwrap().shallow),
            pick(&|s| s.arch.head.h as f64),
        ]
    };
    req.sampler.kind = SamplerKind::Rejection;
    let exact = stats(&req, 1);
    req.sampler.kind = SamplerKind::Chain;
    let chain = stats(&req, 2);
    for (name, (a, b)) in ["gmacs", "backbone", "shallow", "head.h"].iter().zip(exact.iter().zip(&chain)) {
        let ((ma, sa), (mb, sb)) = (mean_and_se(a), mean_and_se(b));
        let z = (ma - mb) / (sa * sa + sb * sb).sqrt();
        assert!(z.abs() < 4.0, "{name}: rejection {ma:.4} vs chain {mb:.4} (z = {z:.2})");
    }
}

#[test]
fn every_sample_is_admitted_and_distinct() {
    let mut req = PopulationRequest::new(FlopRegime::new(2.5, 0.05).unwrap(), 200);
    req.fixed_neck_head = Some((NeckConfig { n: 32 }, HeadConfig { h: 96, m: 2, depthwise: false }));
    let pop = generate_population(5, &req).unwrap();
    assert_eq!(pop.len(), 200);
    let ids: std::collections::HashSet<_> = pop.iter().map(|s| &s.id).collect();
    assert_eq!(ids.len(), 200);
    for s in &pop {
        assert!(req.admits(&s.arch));
        assert_eq!(s.id, s.arch.id());
        assert!(req.regime.contains(s.flops.total_macs));
    }
}

#[test]
fn population_is_seed_deterministic() {
    let req = PopulationRequest::new(FlopRegime::new(2.5, 0.05).unwrap(), 64);
    let write = |seed| {
        let mut buf = Vec::new();
        write_population(&generate_population(seed, &req).unwrap(), &mut buf).unwrap();
        buf
    };
    assert_eq!(write(3), write(3));
    assert_ne!(write(3), write(4));
    let back = read_population(&write(3)[..]).unwrap();
    assert_eq!(back, generate_population(3, &req).unwrap());
}

#[test]
fn infeasible_regime_hits_attempt_cap() {
    for kind in [SamplerKind::Chain, SamplerKind::Rejection] {
        let mut req = PopulationRequest::new(FlopRegime::new(0.001, 0.01).unwrap(), 4);
        req.sampler.kind = kind;
        req.sampler.attempts_per_sample = 500;
        match generate_population(0, &req) {
            Err(Error::AttemptCap { accepted, requested, rate, .. }) => {
                assert_eq!(accepted, 0);
                assert_eq!(requested, 4);
                assert_eq!(rate, 0.0);
            }
            other => panic!("{kind:?}: expected attempt cap, got {:?}", other.map(|p| p.len())),
        }
    }
}
