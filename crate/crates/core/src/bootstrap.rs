//! Empirical bootstrap of the computation ratio at which the best models sit.
//!
//! Each replicate draws a subsample with replacement from the scored
//! population and records the ratio of its highest-scoring member. The
//! reported range is a pair of type-7 (linear interpolation) quantiles of
//! those recorded ratios.

use std::io::Write;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flops::{component_ratios, ComponentRatios};
use crate::rng::{mix, substream};
use crate::search::ArchSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub x: f64,
    pub ap: f64,
    pub sample_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapParams {
    pub replicates: u32,
    pub subsample_frac: f64,
    pub confidence: f64,
}

impl Default for BootstrapParams {
    fn default() -> Self {
        BootstrapParams {
            replicates: 1000,
            subsample_frac: 0.25,
            confidence: 0.95,
        }
    }
}

impl BootstrapParams {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("bootstrap needs at least one replicate".into()));
        }
        if !(self.subsample_frac > 0.0 && self.subsample_frac <= 1.0) {
            return Err(Error::InvalidArgument("subsample_frac must be in (0, 1]".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidArgument("confidence must be in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapRange {
    pub component: String,
    pub low: f64,
    pub high: f64,
    pub confidence: f64,
    pub replicates: u32,
    pub subsample_frac: f64,
    /// Population size the replicates were drawn from.
    pub n: usize,
    /// Every pair had the same score, so "best" carried no information.
    pub degenerate: bool,
}

impl BootstrapRange {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// Type-7 quantile of an ascending-sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Ratios of the best member of each replicate, in replicate order.
pub fn bootstrap_replicates(pairs: &[ScoredPair], seed: u64, params: &BootstrapParams) -> Result<Vec<f64>> {
    params.validate()?;
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("bootstrap over an empty population".into()));
    }
    for p in pairs {
        if !(0.0..=1.0).contains(&p.x) || !p.ap.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "pair {} has x={} ap={}; need x in [0,1] and finite ap",
                p.sample_id, p.x, p.ap
            )));
        }
    }
    let n = pairs.len();
    let draws = ((params.subsample_frac * n as f64).ceil() as usize).max(1);
    let better = |a: &ScoredPair, b: &ScoredPair| a.ap > b.ap || (a.ap == b.ap && a.sample_id < b.sample_id);
    Ok((0..params.replicates as u64)
        .map(|r| {
            let mut rng = substream(seed, r);
            let mut best = &pairs[rng.random_range(0..n)];
            for _ in 1..draws {
                let cand = &pairs[rng.random_range(0..n)];
                if better(cand, best) {
                    best = cand;
                }
            }
            best.x
        })
        .collect())
}

pub fn empirical_bootstrap(pairs: &[ScoredPair], seed: u64, params: &BootstrapParams) -> Result<BootstrapRange> {
    let mut xs = bootstrap_replicates(pairs, seed, params)?;
    xs.sort_by(f64::total_cmp);
    let alpha = (1.0 - params.confidence) / 2.0;
    let first = pairs[0].ap;
    Ok(BootstrapRange {
        component: "x".into(),
        low: quantile_sorted(&xs, alpha),
        high: quantile_sorted(&xs, 1.0 - alpha),
        confidence: params.confidence,
        replicates: params.replicates,
        subsample_frac: params.subsample_frac,
        n: pairs.len(),
        degenerate: pairs.iter().all(|p| p.ap == first),
    })
}

/// A ratio that can be read off a [`ComponentRatios`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioComponent {
    Stem,
    C2,
    C3,
    C4,
    C5,
    Shallow,
    Deep,
    Backbone,
    Neck,
    Head,
}

impl RatioComponent {
    pub const ALL: [RatioComponent; 10] = [
        RatioComponent::Stem,
        RatioComponent::C2,
        RatioComponent::C3,
        RatioComponent::C4,
        RatioComponent::C5,
        RatioComponent::Shallow,
        RatioComponent::Deep,
        RatioComponent::Backbone,
        RatioComponent::Neck,
        RatioComponent::Head,
    ];
    /// Components reported after the backbone-only step.
    pub const BACKBONE_STEP: [RatioComponent; 7] = [
        RatioComponent::Stem,
        RatioComponent::C2,
        RatioComponent::C3,
        RatioComponent::C4,
        RatioComponent::C5,
        RatioComponent::Shallow,
        RatioComponent::Deep,
    ];
    /// Components reported after the whole-detector step.
    pub const DETECTOR_STEP: [RatioComponent; 3] =
        [RatioComponent::Backbone, RatioComponent::Neck, RatioComponent::Head];

    pub fn name(&self) -> &'static str {
        match self {
            RatioComponent::Stem => "stem",
            RatioComponent::C2 => "C2",
            RatioComponent::C3 => "C3",
            RatioComponent::C4 => "C4",
            RatioComponent::C5 => "C5",
            RatioComponent::Shallow => "shallow",
            RatioComponent::Deep => "deep",
            RatioComponent::Backbone => "backbone",
            RatioComponent::Neck => "neck",
            RatioComponent::Head => "head",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(name))
    }

    /// Stage entries are shares of the backbone; backbone, neck and head are
    /// shares of the whole detector.
    pub fn extract(&self, r: &ComponentRatios) -> f64 {
        match self {
            RatioComponent::Stem => r.stages[0],
            RatioComponent::C2 => r.stages[1],
            RatioComponent::C3 => r.stages[2],
            RatioComponent::C4 => r.stages[3],
            RatioComponent::C5 => r.stages[4],
            RatioComponent::Shallow => r.shallow,
            RatioComponent::Deep => r.deep,
            RatioComponent::Backbone => r.backbone,
            RatioComponent::Neck => r.neck,
            RatioComponent::Head => r.head,
        }
    }

    fn index(&self) -> u64 {
        Self::ALL.iter().position(|c| c == self).unwrap() as u64
    }
}

impl std::fmt::Display for RatioComponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `(x, ap)` pairs for one component over a scored population.
pub fn scored_pairs(population: &[ArchSample], component: RatioComponent) -> Result<Vec<ScoredPair>> {
    let unscored: Vec<String> = population
        .iter()
        .filter(|s| s.ap.is_none())
        .map(|s| s.id.to_string())
        .collect();
    if !unscored.is_empty() {
        return Err(Error::Unscored(unscored));
    }
    population
        .iter()
        .map(|s| {
            Ok(ScoredPair {
                x: component.extract(&component_ratios(&s.flops)?),
                ap: s.ap.unwrap_or_default(),
                sample_id: s.id.to_string(),
            })
        })
        .collect()
}

/// One bootstrap range per requested component. Each component uses its own
/// stream derived from `seed`, so a range does not depend on which other
/// components were requested alongside it.
pub fn range_report(
    population: &[ArchSample],
    components: &[RatioComponent],
    seed: u64,
    params: &BootstrapParams,
) -> Result<Vec<BootstrapRange>> {
    components
        .iter()
        .map(|&c| {
            let pairs = scored_pairs(population, c)?;
            let mut range = empirical_bootstrap(&pairs, mix(seed, c.index()), params)?;
            range.component = c.name().to_string();
            Ok(range)
        })
        .collect()
}

pub fn write_ranges_csv<W: Write>(ranges: &[BootstrapRange], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["component", "low", "high", "B", "confidence"])?;
    for r in ranges {
        w.write_record([
            r.component.clone(),
            r.low.to_string(),
            r.high.to_string(),
            r.replicates.to_string(),
            r.confidence.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<ranges.csv>", e))?;
    Ok(())
}
