//! Random architecture sampling inside a flop regime.
//!
//! The search space draws stage depths uniformly from `1..=d_max`, stage
//! widths as independent uniform multiples of `w_step` in `[w_step, w_max]`
//! sorted ascending, and neck / head channels and head depth uniformly.
//! A population is a draw from that distribution conditioned on the total
//! multiply-adds lying inside the regime band (and, for the second search
//! step, on the backbone stage ratios lying inside given intervals).
//!
//! Two samplers target the same conditional distribution:
//!
//! * [`SamplerKind::Rejection`] draws independent proposals and keeps the
//!   feasible ones. Exact, but a 2.5 GMAC band of +-5% accepts only about one
//!   proposal in 10^4, and adding stage-ratio intervals pushes that below
//!   10^-6.
//! * [`SamplerKind::Chain`] (default) runs Metropolis chains over the same
//!   coordinates. Each move redraws a random subset of coordinates from
//!   their search-space marginals (a redrawn width is re-sorted into the
//!   tuple), which is symmetric with respect to the search-space measure, so
//!   accepting exactly the feasible proposals leaves the conditional
//!   distribution invariant. Chains start from a feasible point found by
//!   greedy descent on a constraint-violation score.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::arch::{ArchId, BackboneConfig, BlockKind, DetectorArch, HeadConfig, NeckConfig, Stage};
use crate::error::{Error, Result};
use crate::flops::{component_ratios, detector_flops_unchecked, ComponentRatios, FlopsBreakdown, InputSize};
use crate::rng::{substream, Rng};

/// How the backbone block type is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockPolicy {
    /// Depthwise up to 1 GMAC, basic residual up to 15 GMAC, bottleneck above.
    #[default]
    ByRegime,
    Basic,
    Bottleneck,
    Depthwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSpaceSpec {
    pub d_max: u32,
    pub w_max: u32,
    pub w_step: u32,
    pub n_max: u32,
    pub h_max: u32,
    pub m_max: u32,
    pub monotone_widths: bool,
    pub block: BlockPolicy,
}

impl Default for SearchSpaceSpec {
    fn default() -> Self {
        SearchSpaceSpec {
            d_max: 24,
            w_max: 512,
            w_step: 8,
            n_max: 256,
            h_max: 256,
            m_max: 6,
            monotone_widths: true,
            block: BlockPolicy::ByRegime,
        }
    }
}

impl SearchSpaceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("search space: {m}")));
        if self.d_max == 0 || self.m_max == 0 {
            return bad("d_max and m_max must be positive");
        }
        if self.w_step == 0 || !self.w_step.is_multiple_of(8) {
            return bad("w_step must be a positive multiple of 8");
        }
        for (name, v) in [("w_max", self.w_max), ("n_max", self.n_max), ("h_max", self.h_max)] {
            if v < self.w_step || v % self.w_step != 0 {
                return bad(&format!("{name} must be a positive multiple of w_step"));
            }
        }
        Ok(())
    }

    pub fn block_for(&self, regime: &FlopRegime) -> BlockKind {
        match self.block {
            BlockPolicy::ByRegime if regime.target_gmacs <= 1.0 => BlockKind::Depthwise,
            BlockPolicy::ByRegime if regime.target_gmacs <= 15.0 => BlockKind::Basic,
            BlockPolicy::ByRegime => BlockKind::Bottleneck,
            BlockPolicy::Basic => BlockKind::Basic,
            BlockPolicy::Bottleneck => BlockKind::Bottleneck,
            BlockPolicy::Depthwise => BlockKind::Depthwise,
        }
    }

    fn draw_channels(&self, rng: &mut Rng, max: u32) -> u32 {
        rng.random_range(1..=max / self.w_step) * self.w_step
    }

    fn draw_width(&self, rng: &mut Rng) -> u32 {
        self.draw_channels(rng, self.w_max)
    }

    fn draw_depth(&self, rng: &mut Rng) -> u32 {
        rng.random_range(1..=self.d_max)
    }

    fn draw_head_depth(&self, rng: &mut Rng) -> u32 {
        rng.random_range(1..=self.m_max)
    }

    /// Whether `arch` lies inside this search space.
    pub fn contains(&self, arch: &DetectorArch) -> bool {
        let b = &arch.backbone;
        let monotone = b.stages.windows(2).all(|p| p[0].width <= p[1].width);
        b.stages.iter().all(|s| {
            (1..=self.d_max).contains(&s.depth)
                && (self.w_step..=self.w_max).contains(&s.width)
                && s.width % self.w_step == 0
        }) && (!self.monotone_widths || monotone)
            && (self.w_step..=self.n_max).contains(&arch.neck.n)
            && arch.neck.n.is_multiple_of(self.w_step)
            && (self.w_step..=self.h_max).contains(&arch.head.h)
            && arch.head.h.is_multiple_of(self.w_step)
            && (1..=self.m_max).contains(&arch.head.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlopRegime {
    pub target_gmacs: f64,
    /// Relative half-width of the accepted band.
    #[serde(default = "FlopRegime::default_band")]
    pub band: f64,
}

impl FlopRegime {
    pub fn default_band() -> f64 {
        0.05
    }

    pub fn new(target_gmacs: f64, band: f64) -> Result<Self> {
        let r = FlopRegime { target_gmacs, band };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_gmacs > 0.0 && self.target_gmacs.is_finite()) {
            return Err(Error::InvalidArgument("regime target must be positive".into()));
        }
        if !(self.band > 0.0 && self.band < 1.0) {
            return Err(Error::InvalidArgument("regime band must be in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn target_macs(&self) -> f64 {
        self.target_gmacs * 1e9
    }

    pub fn contains(&self, macs: u64) -> bool {
        (macs as f64 - self.target_macs()).abs() <= self.band * self.target_macs()
    }

    /// Relative distance outside the band, zero inside.
    fn violation(&self, macs: u64) -> f64 {
        ((macs as f64 / self.target_macs() - 1.0).abs() - self.band).max(0.0)
    }
}

/// Intervals for the stem, C2..C5, shallow (stem+C2+C3) and deep (C4+C5)
/// shares of backbone multiply-adds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackboneRanges {
    pub stages: [(f64, f64); 5],
    #[serde(default = "BackboneRanges::unit")]
    pub shallow: (f64, f64),
    #[serde(default = "BackboneRanges::unit")]
    pub deep: (f64, f64),
}

impl BackboneRanges {
    fn unit() -> (f64, f64) {
        (0.0, 1.0)
    }

    /// Stage intervals only; shallow and deep unconstrained.
    pub fn from_stages(stages: [(f64, f64); 5]) -> Self {
        BackboneRanges {
            stages,
            shallow: Self::unit(),
            deep: Self::unit(),
        }
    }

    pub fn contains(&self, ratios: &ComponentRatios) -> bool {
        self.violation(ratios) == 0.0
    }

    fn violation(&self, r: &ComponentRatios) -> f64 {
        let outside = |(lo, hi): (f64, f64), x: f64| (lo - x).max(x - hi).max(0.0);
        self.stages.iter().zip(&r.stages).map(|(&iv, &x)| outside(iv, x)).sum::<f64>()
            + outside(self.shallow, r.shallow)
            + outside(self.deep, r.deep)
    }
}

/// A sampled architecture with its accounting and optional score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchSample {
    pub id: ArchId,
    pub arch: DetectorArch,
    pub flops: FlopsBreakdown,
    #[serde(default)]
    pub ap: Option<f64>,
}

impl ArchSample {
    pub fn new(arch: DetectorArch, input: InputSize) -> Result<Self> {
        arch.validate()?;
        Ok(ArchSample {
            id: arch.id(),
            flops: detector_flops_unchecked(&arch, input),
            arch,
            ap: None,
        })
    }
}

pub fn write_population<W: Write>(samples: &[ArchSample], mut out: W) -> Result<()> {
    for s in samples {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n").map_err(|e| Error::io("<population>", e))?;
    }
    Ok(())
}

pub fn read_population<R: BufRead>(input: R) -> Result<Vec<ArchSample>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<population>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let s: ArchSample = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(s);
    }
    Ok(out)
}

pub fn sample_backbone(rng: &mut Rng, spec: &SearchSpaceSpec, block: BlockKind) -> BackboneConfig {
    let depths: [u32; 4] = std::array::from_fn(|_| spec.draw_depth(rng));
    let mut widths: [u32; 4] = std::array::from_fn(|_| spec.draw_width(rng));
    if spec.monotone_widths {
        widths.sort_unstable();
    }
    BackboneConfig {
        block,
        stages: std::array::from_fn(|i| Stage::new(depths[i], widths[i])),
    }
}

pub fn sample_neck_head(rng: &mut Rng, spec: &SearchSpaceSpec, depthwise: bool) -> (NeckConfig, HeadConfig) {
    let n = spec.draw_channels(rng, spec.n_max);
    let h = spec.draw_channels(rng, spec.h_max);
    let m = spec.draw_head_depth(rng);
    (NeckConfig { n }, HeadConfig { h, m, depthwise })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    #[default]
    Chain,
    Rejection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    /// Independent chains; samples are merged in chain order.
    pub chains: u32,
    pub burn_in: u32,
    /// Steps between collected states.
    pub thin: u32,
    /// Attempt budget per requested sample.
    pub attempts_per_sample: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            kind: SamplerKind::Chain,
            chains: 8,
            burn_in: 1000,
            thin: 200,
            attempts_per_sample: 10_000,
        }
    }
}

/// Everything that defines a population draw.
#[derive(Debug, Clone)]
pub struct PopulationRequest {
    pub spec: SearchSpaceSpec,
    pub regime: FlopRegime,
    pub count: usize,
    pub input: InputSize,
    /// Step 1: neck and head held constant.
    pub fixed_neck_head: Option<(NeckConfig, HeadConfig)>,
    /// Step 2: backbone stage ratios must fall inside these intervals.
    pub backbone_ranges: Option<BackboneRanges>,
    pub sampler: SamplerConfig,
}

impl PopulationRequest {
    pub fn new(regime: FlopRegime, count: usize) -> Self {
        PopulationRequest {
            spec: SearchSpaceSpec::default(),
            regime,
            count,
            input: InputSize::VGA,
            fixed_neck_head: None,
            backbone_ranges: None,
            sampler: SamplerConfig::default(),
        }
    }

    fn block(&self) -> BlockKind {
        self.spec.block_for(&self.regime)
    }

    fn head_depthwise(&self) -> bool {
        self.block() == BlockKind::Depthwise
    }

    fn budget(&self) -> u64 {
        self.sampler.attempts_per_sample.saturating_mul(self.count as u64)
    }

    fn evaluate(&self, arch: &DetectorArch) -> (FlopsBreakdown, f64) {
        let flops = detector_flops_unchecked(arch, self.input);
        let mut v = self.regime.violation(flops.total_macs);
        if let Some(ranges) = &self.backbone_ranges {
            match component_ratios(&flops) {
                Ok(r) => v += ranges.violation(&r),
                Err(_) => v += 1.0,
            }
        }
        (flops, v)
    }

    /// Whether `sample` satisfies every constraint of this request,
    /// recomputed from its architecture.
    pub fn admits(&self, arch: &DetectorArch) -> bool {
        if arch.validate().is_err() || !self.spec.contains(arch) || arch.backbone.block != self.block() {
            return false;
        }
        if let Some((n, h)) = self.fixed_neck_head {
            if arch.neck != n || arch.head != h {
                return false;
            }
        }
        self.evaluate(arch).1 == 0.0
    }
}

/// Draws `request.count` distinct in-regime architectures.
pub fn generate_population(seed: u64, request: &PopulationRequest) -> Result<Vec<ArchSample>> {
    request.spec.validate()?;
    request.regime.validate()?;
    if request.count == 0 {
        return Ok(Vec::new());
    }
    if let Some((n, h)) = &request.fixed_neck_head {
        let probe = DetectorArch {
            backbone: sample_backbone(&mut substream(0, 0), &request.spec, request.block()),
            neck: *n,
            head: *h,
        };
        probe.validate()?;
    }
    match request.sampler.kind {
        SamplerKind::Rejection => rejection_population(seed, request),
        SamplerKind::Chain => chain_population(seed, request),
    }
}

/// Coordinates of one point in the search space.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    depths: [u32; 4],
    widths: [u32; 4],
    n: u32,
    h: u32,
    m: u32,
}

impl Point {
    fn random(rng: &mut Rng, req: &PopulationRequest) -> Self {
        let b = sample_backbone(rng, &req.spec, req.block());
        let (n, h, m) = match &req.fixed_neck_head {
            Some((neck, head)) => (neck.n, head.h, head.m),
            None => {
                let (neck, head) = sample_neck_head(rng, &req.spec, req.head_depthwise());
                (neck.n, head.h, head.m)
            }
        };
        Point {
            depths: b.depths(),
            widths: b.widths(),
            n,
            h,
            m,
        }
    }

    fn arch(&self, req: &PopulationRequest) -> DetectorArch {
        let depthwise = match &req.fixed_neck_head {
            Some((_, head)) => head.depthwise,
            None => req.head_depthwise(),
        };
        DetectorArch {
            backbone: BackboneConfig {
                block: req.block(),
                stages: std::array::from_fn(|i| Stage::new(self.depths[i], self.widths[i])),
            },
            neck: NeckConfig { n: self.n },
            head: HeadConfig {
                h: self.h,
                m: self.m,
                depthwise,
            },
        }
    }

    /// Redraws coordinate `k` from its search-space marginal:
    /// 0..4 depths, 4..8 widths, 8 n, 9 h, 10 m.
    fn redraw(&mut self, k: usize, rng: &mut Rng, spec: &SearchSpaceSpec) {
        match k {
            0..=3 => self.depths[k] = spec.draw_depth(rng),
            4..=7 => {
                self.widths[k - 4] = spec.draw_width(rng);
                if spec.monotone_widths {
                    self.widths.sort_unstable();
                }
            }
            8 => self.n = spec.draw_channels(rng, spec.n_max),
            9 => self.h = spec.draw_channels(rng, spec.h_max),
            _ => self.m = spec.draw_head_depth(rng),
        }
    }
}

/// Symmetric proposal: redraw one, two, or all free coordinates.
fn propose(p: &Point, rng: &mut Rng, req: &PopulationRequest) -> Point {
    let free = if req.fixed_neck_head.is_some() { 8 } else { 11 };
    let mut q = *p;
    let u: f64 = rng.random();
    if u < 0.5 {
        q.redraw(rng.random_range(0..free), rng, &req.spec);
    } else if u < 0.85 {
        let a = rng.random_range(0..free);
        let mut b = rng.random_range(0..free - 1);
        if b >= a {
            b += 1;
        }
        q.redraw(a, rng, &req.spec);
        q.redraw(b, rng, &req.spec);
    } else {
        for k in 0..free {
            q.redraw(k, rng, &req.spec);
        }
    }
    q
}

struct ChainOutput {
    samples: Vec<ArchSample>,
    attempts: u64,
    feasible: u64,
}

fn run_chain(seed: u64, chain: u64, want: usize, budget: u64, req: &PopulationRequest) -> ChainOutput {
    let mut rng = substream(seed, chain);
    let mut out = ChainOutput {
        samples: Vec::with_capacity(want),
        attempts: 0,
        feasible: 0,
    };

    // Greedy descent to a feasible start; restart when stuck.
    const RESTART_AFTER: u64 = 2_000;
    let mut current = Point::random(&mut rng, req);
    let mut score = req.evaluate(&current.arch(req)).1;
    let mut since_improvement = 0;
    out.attempts += 1;
    while score > 0.0 {
        if out.attempts >= budget {
            return out;
        }
        out.attempts += 1;
        let cand = if since_improvement >= RESTART_AFTER {
            since_improvement = 0;
            Point::random(&mut rng, req)
        } else {
            propose(&current, &mut rng, req)
        };
        let s = req.evaluate(&cand.arch(req)).1;
        if s < score {
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
        if s <= score {
            current = cand;
            score = s;
        }
    }

    let mut seen = HashSet::new();
    let mut step: u64 = 0;
    let burn_in = req.sampler.burn_in as u64;
    let thin = req.sampler.thin.max(1) as u64;
    while out.samples.len() < want && out.attempts < budget {
        out.attempts += 1;
        step += 1;
        let cand = propose(&current, &mut rng, req);
        if req.evaluate(&cand.arch(req)).1 == 0.0 {
            out.feasible += 1;
            current = cand;
        }
        if step > burn_in && (step - burn_in).is_multiple_of(thin) {
            let arch = current.arch(req);
            let id = arch.id();
            if seen.insert(id.clone()) {
                out.samples.push(ArchSample {
                    id,
                    flops: detector_flops_unchecked(&arch, req.input),
                    arch,
                    ap: None,
                });
            }
        }
    }
    out
}

fn chain_population(seed: u64, req: &PopulationRequest) -> Result<Vec<ArchSample>> {
    let chains = req.sampler.chains.max(1) as u64;
    let per_chain = req.count.div_ceil(chains as usize);
    let budget = req.budget();
    let mut attempts = 0u64;
    let mut feasible = 0u64;
    let mut seen = HashSet::new();
    let mut population = Vec::with_capacity(req.count);
    let mut next_chain = 0u64;

    while population.len() < req.count {
        let remaining = budget.saturating_sub(attempts);
        if remaining == 0 {
            return Err(Error::AttemptCap {
                attempts,
                accepted: population.len(),
                requested: req.count,
                rate: feasible as f64 / attempts.max(1) as f64,
            });
        }
        let batch: Vec<u64> = (next_chain..next_chain + chains).collect();
        next_chain += chains;
        let chain_budget = (remaining / chains).max(1);
        let run = |&c: &u64| run_chain(seed, c, per_chain, chain_budget, req);

        #[cfg(feature = "parallel")]
        let outputs: Vec<ChainOutput> = {
            use rayon::prelude::*;
            batch.par_iter().map(run).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let outputs: Vec<ChainOutput> = batch.iter().map(run).collect();

        for o in outputs {
            attempts += o.attempts;
            feasible += o.feasible;
            for s in o.samples {
                if population.len() < req.count && seen.insert(s.id.clone()) {
                    population.push(s);
                }
            }
        }
    }
    Ok(population)
}

fn rejection_population(seed: u64, req: &PopulationRequest) -> Result<Vec<ArchSample>> {
    let mut rng = substream(seed, 0);
    let budget = req.budget();
    let mut seen = HashSet::new();
    let mut population = Vec::with_capacity(req.count);
    let mut attempts = 0u64;
    let mut feasible = 0u64;
    while population.len() < req.count {
        if attempts >= budget {
            return Err(Error::AttemptCap {
                attempts,
                accepted: population.len(),
                requested: req.count,
                rate: feasible as f64 / attempts.max(1) as f64,
            });
        }
        attempts += 1;
        let arch = Point::random(&mut rng, req).arch(req);
        let (flops, v) = req.evaluate(&arch);
        if v > 0.0 {
            continue;
        }
        feasible += 1;
        let id = arch.id();
        if seen.insert(id.clone()) {
            population.push(ArchSample {
                id,
                arch,
                flops,
                ap: None,
            });
        }
    }
    Ok(population)
}
