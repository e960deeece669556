//! The two-step computation-redistribution search.
//!
//! Step 1 samples backbones with the neck and head held fixed, scores them,
//! and bootstraps the stage-ratio ranges of the best models. Step 2 samples
//! whole detectors whose backbone stage ratios fall inside those ranges and
//! bootstraps the backbone / neck / head split. Scores come from an
//! [`Evaluator`]; nothing here trains a network.
//!
//! A run directory holds `config.json`, `population.jsonl`, `ranges.json`,
//! `ranges.csv`, `best.json`, a `report/` directory and `run.log`. Only the
//! log carries wall-clock times, so every other file is a pure function of
//! the configuration and seed.

use std::collections::HashMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
use std::time::{SystemTime, UNIX_EPOCH};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::arch::ArchId;
use crate::bootstrap::{range_report, write_ranges_csv, BootstrapRange, RatioComponent};
use crate::config::{EvaluatorConfig, RunConfig, SurrogateParams};
use crate::error::{Error, Result};
use crate::flops::component_ratios;
use crate::rng::{mix, substream};
use crate::search::{
    generate_population, read_population, write_population, ArchSample, BackboneRanges, PopulationRequest,
};

/// Scores an architecture; `None` when the evaluator has no score for it.
pub trait Evaluator: Sync {
    fn score(&self, sample: &ArchSample) -> Option<f64>;
    fn describe(&self) -> String;
}

/// Externally measured scores keyed by arch id.
#[derive(Debug, Clone, Default)]
pub struct CsvLookup {
    scores: HashMap<ArchId, f64>,
    source: String,
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    arch_id: String,
    ap: f64,
}

impl CsvLookup {
    /// Reads `arch_id,ap` rows (with header).
    pub fn from_reader<R: std::io::Read>(input: R, source: &str) -> Result<Self> {
        let mut scores = HashMap::new();
        let mut rdr = csv::Reader::from_reader(input);
        for (i, row) in rdr.deserialize::<ScoreRow>().enumerate() {
            let row = row?;
            if !(0.0..=1.0).contains(&row.ap) {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("ap {} outside [0, 1]", row.ap),
                });
            }
            scores.insert(ArchId(row.arch_id), row.ap);
        }
        Ok(CsvLookup {
            scores,
            source: source.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(f, &path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

impl Evaluator for CsvLookup {
    fn score(&self, sample: &ArchSample) -> Option<f64> {
        self.scores.get(&sample.id).copied()
    }

    fn describe(&self) -> String {
        format!("csv:{}", self.source)
    }
}

/// Smooth unimodal function of the shallow-stage share of the backbone and
/// the backbone share of the detector, plus optional seeded noise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SyntheticSurrogate {
    pub params: SurrogateParams,
}

impl SyntheticSurrogate {
    pub fn new(params: SurrogateParams) -> Self {
        SyntheticSurrogate { params }
    }

    /// Noise-free surrogate value at the given ratios.
    pub fn noiseless(&self, shallow: f64, backbone: f64) -> f64 {
        let p = &self.params;
        let zs = (shallow - p.shallow_opt) / p.shallow_width;
        let zb = (backbone - p.backbone_opt) / p.backbone_width;
        (p.peak * (-0.5 * (zs * zs + zb * zb)).exp()).clamp(0.0, 1.0)
    }
}

fn id_hash(id: &ArchId) -> u64 {
    u64::from_str_radix(id.as_str().get(..16).unwrap_or("0"), 16).unwrap_or(0)
}

impl Evaluator for SyntheticSurrogate {
    fn score(&self, sample: &ArchSample) -> Option<f64> {
        let r = component_ratios(&sample.flops).ok()?;
        let base = self.noiseless(r.shallow, r.backbone);
        if self.params.noise_sigma <= 0.0 {
            return Some(base);
        }
        let mut rng = substream(mix(self.params.noise_seed, id_hash(&sample.id)), 0);
        let noise = Normal::new(0.0, self.params.noise_sigma).ok()?.sample(&mut rng);
        Some((base + noise).clamp(0.0, 1.0))
    }

    fn describe(&self) -> String {
        "surrogate".into()
    }
}

/// The same score for every architecture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantStub(pub f64);

impl Evaluator for ConstantStub {
    fn score(&self, _: &ArchSample) -> Option<f64> {
        Some(self.0)
    }

    fn describe(&self) -> String {
        format!("constant:{}", self.0)
    }
}

pub fn evaluator_from_config(cfg: &EvaluatorConfig) -> Result<Box<dyn Evaluator>> {
    Ok(match cfg {
        EvaluatorConfig::Surrogate(p) => Box::new(SyntheticSurrogate::new(*p)),
        EvaluatorConfig::Csv { path } => Box::new(CsvLookup::load(path)?),
        EvaluatorConfig::Constant { ap } => {
            if !(0.0..=1.0).contains(ap) {
                return Err(Error::InvalidArgument(format!("constant ap {ap} outside [0, 1]")));
            }
            Box::new(ConstantStub(*ap))
        }
    })
}

/// Attaches scores in place, keeping population order. Fails listing every
/// id the evaluator could not score.
pub fn score_population(population: &mut [ArchSample], evaluator: &dyn Evaluator) -> Result<()> {
    #[cfg(feature = "parallel")]
    let scores: Vec<Option<f64>> = {
        use rayon::prelude::*;
        population.par_iter().map(|s| evaluator.score(s)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let scores: Vec<Option<f64>> = population.iter().map(|s| evaluator.score(s)).collect();

    let missing: Vec<String> = population
        .iter()
        .zip(&scores)
        .filter(|(_, s)| s.is_none())
        .map(|(p, _)| p.id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Unscored(missing));
    }
    for (p, s) in population.iter_mut().zip(scores) {
        p.ap = s;
    }
    Ok(())
}

/// Highest ap; ties to lower total multiply-adds, then lower id.
pub fn select_best(population: &[ArchSample]) -> Option<&ArchSample> {
    population.iter().filter(|s| s.ap.is_some()).min_by(|a, b| {
        b.ap.unwrap()
            .total_cmp(&a.ap.unwrap())
            .then(a.flops.total_macs.cmp(&b.flops.total_macs))
            .then(a.id.cmp(&b.id))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Step1,
    Step2,
    /// Unconstrained whole-detector sampling, for comparison with step 2.
    Baseline,
}

impl Step {
    pub fn label(&self) -> &'static str {
        match self {
            Step::Step1 => "step1",
            Step::Step2 => "step2",
            Step::Baseline => "baseline",
        }
    }

    fn stream(&self) -> u64 {
        match self {
            Step::Step1 => 1,
            Step::Step2 => 2,
            Step::Baseline => 3,
        }
    }

    pub fn components(&self) -> &'static [RatioComponent] {
        match self {
            Step::Step1 => &RatioComponent::BACKBONE_STEP,
            Step::Step2 | Step::Baseline => &RatioComponent::DETECTOR_STEP,
        }
    }
}

/// Contents of `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub step: Step,
    pub seed: u64,
    pub evaluator: String,
    /// Stage-ratio intervals the population was constrained to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backbone_ranges: Option<BackboneRanges>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub manifest: RunManifest,
    pub population: Vec<ArchSample>,
    pub ranges: Vec<BootstrapRange>,
    pub best: ArchSample,
    /// Seconds since the Unix epoch; written to `run.log` only.
    pub started: u64,
    pub finished: u64,
}

impl RunRecord {
    pub fn step(&self) -> Step {
        self.manifest.step
    }

    pub fn range(&self, component: RatioComponent) -> Option<&BootstrapRange> {
        self.ranges.iter().find(|r| r.component == component.name())
    }

    /// Stem, C2..C5, shallow and deep ranges of a step-1 run.
    pub fn backbone_ranges(&self) -> Result<BackboneRanges> {
        let get = |c: RatioComponent| {
            self.range(c)
                .map(|r| (r.low, r.high))
                .ok_or_else(|| Error::InvalidArgument(format!("run has no {c} range; is it a step-1 run?")))
        };
        Ok(BackboneRanges {
            stages: [
                get(RatioComponent::Stem)?,
                get(RatioComponent::C2)?,
                get(RatioComponent::C3)?,
                get(RatioComponent::C4)?,
                get(RatioComponent::C5)?,
            ],
            shallow: get(RatioComponent::Shallow)?,
            deep: get(RatioComponent::Deep)?,
        })
    }

    pub fn best(&self) -> &ArchSample {
        &self.best
    }
}

/// Zero on targets without a clock (browser wasm).
#[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
fn now() -> u64 {
    0
}

#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn run_step(
    step: Step,
    config: &RunConfig,
    evaluator: &dyn Evaluator,
    backbone_ranges: Option<BackboneRanges>,
) -> Result<RunRecord> {
    config.validate()?;
    let started = now();
    let mut request = PopulationRequest::new(config.regime, config.search.count);
    request.spec = config.search_space;
    request.sampler = config.sampler;
    request.input = config.search.input_size()?;
    request.backbone_ranges = backbone_ranges;
    if step == Step::Step1 {
        let mut head = config.search.step1_head;
        head.depthwise = config.search_space.block_for(&config.regime) == crate::arch::BlockKind::Depthwise;
        request.fixed_neck_head = Some((config.search.step1_neck, head));
    }

    let seed = mix(config.seed, step.stream());
    log::info!("{}: sampling {} architectures", step.label(), request.count);
    let mut population = generate_population(seed, &request)?;
    score_population(&mut population, evaluator)?;
    let ranges = range_report(&population, step.components(), mix(seed, 0xb007), &config.bootstrap)?;
    let best = select_best(&population).expect("scored non-empty population").clone();
    Ok(RunRecord {
        manifest: RunManifest {
            step,
            seed: config.seed,
            evaluator: evaluator.describe(),
            backbone_ranges,
            config: config.clone(),
        },
        population,
        ranges,
        best,
        started,
        finished: now(),
    })
}

/// Backbone-only search with the neck and head fixed.
pub fn run_step1(config: &RunConfig, evaluator: &dyn Evaluator) -> Result<RunRecord> {
    run_step(Step::Step1, config, evaluator, None)
}

/// Whole-detector search constrained to the step-1 stage-ratio ranges.
pub fn run_step2(config: &RunConfig, step1: &RunRecord, evaluator: &dyn Evaluator) -> Result<RunRecord> {
    if step1.step() != Step::Step1 {
        return Err(Error::InvalidArgument(format!(
            "step 2 needs a step-1 run, got {}",
            step1.step().label()
        )));
    }
    run_step(Step::Step2, config, evaluator, Some(step1.backbone_ranges()?))
}

/// Whole-detector sampling without backbone constraints.
pub fn run_baseline(config: &RunConfig, evaluator: &dyn Evaluator) -> Result<RunRecord> {
    run_step(Step::Baseline, config, evaluator, None)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn pretty<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

/// Writes the run directory. Existing artifacts are replaced.
pub fn write_run_dir(record: &RunRecord, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("report")).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join("config.json"), &pretty(&record.manifest)?)?;
    let pop_path = dir.join("population.jsonl");
    let f = fs::File::create(&pop_path).map_err(|e| Error::io(&pop_path, e))?;
    let mut w = BufWriter::new(f);
    write_population(&record.population, &mut w)?;
    w.flush().map_err(|e| Error::io(&pop_path, e))?;
    write_file(&dir.join("ranges.json"), &pretty(&record.ranges)?)?;
    let mut csv = Vec::new();
    write_ranges_csv(&record.ranges, &mut csv)?;
    write_file(&dir.join("ranges.csv"), &csv)?;
    write_file(&dir.join("best.json"), &pretty(&record.best)?)?;
    let log = format!(
        "step={}\nseed={}\nstarted={}\nfinished={}\nsamples={}\n",
        record.step().label(),
        record.manifest.seed,
        record.started,
        record.finished,
        record.population.len()
    );
    write_file(&dir.join("run.log"), log.as_bytes())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: format!("{}: {}", path.display(), e.path()),
        message: e.inner().to_string(),
    })
}

pub fn read_run_dir(dir: &Path) -> Result<RunRecord> {
    let manifest_path = dir.join("config.json");
    if !manifest_path.is_file() {
        return Err(Error::io(
            &manifest_path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a run directory"),
        ));
    }
    let manifest: RunManifest = read_json(&manifest_path)?;
    let pop_path = dir.join("population.jsonl");
    let f = fs::File::open(&pop_path).map_err(|e| Error::io(&pop_path, e))?;
    let population = read_population(BufReader::new(f))?;
    let ranges: Vec<BootstrapRange> = read_json(&dir.join("ranges.json"))?;
    let best: ArchSample = read_json(&dir.join("best.json"))?;
    Ok(RunRecord {
        manifest,
        population,
        ranges,
        best,
        started: 0,
        finished: 0,
    })
}

/// Default directory for a step under `base`.
pub fn step_dir(base: &Path, step: Step) -> PathBuf {
    base.join(step.label())
}
