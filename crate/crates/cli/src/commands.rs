use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use redist_core::anchors::{epoch_positive_stats, face_scale_cdf, write_cdf_csv, ANCHOR_SCALES};
use redist_core::arch::{baselines, DetectorArch};
use redist_core::bootstrap::{range_report, write_ranges_csv, RatioComponent};
use redist_core::config::{EvaluatorConfig, RunConfig};
use redist_core::flops::{
    component_ratios, detector_flops, layer_listing, write_layer_csv, Component, FlopsBreakdown, InputSize,
};
use redist_core::pipeline::{
    evaluator_from_config, read_run_dir, run_baseline, run_step1, run_step2, step_dir, write_run_dir, Step,
};
use redist_core::search::read_population;
use redist_core::svg;
use redist_core::synthetic::{synthetic_dataset, SyntheticConfig};
use redist_core::widerface::{parse_widerface_gt, resolve_dimensions, DimensionSource, FaceDataset, FacePolicy};

use crate::{AnchorStatsArgs, BootstrapArgs, DatasetArgs, FlopsArgs, ScaleStatsArgs, SearchArgs};

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn load_arch(spec: &str) -> Result<DetectorArch> {
    if let Some(a) = baselines::by_name(spec) {
        return Ok(a);
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path).with_context(|| format!("reading architecture {spec}"))?;
    DetectorArch::from_json(&text).with_context(|| format!("in {spec}"))
}

fn breakdown_csv(b: &FlopsBreakdown) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "component,macs,params,ratio")?;
    for c in Component::ALL {
        writeln!(out, "{},{},{},{}", c.name(), b.macs[c], b.params[c], b.ratios[c])?;
    }
    writeln!(out, "total,{},{},1", b.total_macs, b.total_params)?;
    Ok(out)
}

pub fn flops(args: FlopsArgs) -> Result<()> {
    let arch = load_arch(&args.arch)?;
    let input: InputSize = args.input.parse()?;
    let b = detector_flops(&arch, input)?;
    let ratios = component_ratios(&b)?;
    if args.json {
        let doc = serde_json::json!({ "id": arch.id().to_string(), "breakdown": b, "ratios": ratios });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("{} at {}x{}", arch.id(), input.width, input.height);
        println!("{:<10} {:>14} {:>12} {:>8}", "component", "GMACs", "params(M)", "share");
        for c in Component::ALL {
            println!(
                "{:<10} {:>14.4} {:>12.4} {:>7.2}%",
                c.name(),
                b.macs[c] as f64 / 1e9,
                b.params[c] as f64 / 1e6,
                b.ratios[c] * 100.0
            );
        }
        println!("{:<10} {:>14.4} {:>12.4} {:>7.2}%", "total", b.gmacs(), b.mparams(), 100.0);
        println!(
            "backbone {:.1}% / neck {:.1}% / head {:.1}%; shallow {:.1}% / deep {:.1}% of backbone",
            ratios.backbone * 100.0,
            ratios.neck * 100.0,
            ratios.head * 100.0,
            ratios.shallow * 100.0,
            ratios.deep * 100.0
        );
    }
    if let Some(out) = &args.out {
        write(&out.join("breakdown.csv"), breakdown_csv(&b)?)?;
        let mut layers = Vec::new();
        write_layer_csv(&layer_listing(&arch, input)?, &mut layers)?;
        write(&out.join("layers.csv"), layers)?;
        if args.svg {
            let segments = [
                ("backbone", b.macs.backbone() as f64),
                ("neck", b.macs.neck as f64),
                ("head", b.macs.head as f64),
            ];
            write(
                &out.join("flops.svg"),
                svg::stacked_bar(&format!("Computation distribution, {:.2} GMACs", b.gmacs()), &segments),
            )?;
        }
    }
    Ok(())
}

fn load_dataset(args: &DatasetArgs) -> Result<(FaceDataset, FacePolicy)> {
    let cfg = load_config(args.config.as_deref())?;
    let mut ds = cfg.dataset;
    if let Some(r) = &args.data_root {
        ds.root = Some(r.clone());
    }
    ds.gt_file = args.gt.clone().or(ds.gt_file);
    ds.image_root = args.images.clone().or(ds.image_root);
    ds.sizes_csv = args.sizes.clone().or(ds.sizes_csv);
    ds.keep_invalid |= args.keep_invalid;

    let gt = ds
        .gt_file
        .as_ref()
        .ok_or_else(|| anyhow!("no annotation file: pass --gt or set dataset.gt_file"))?;
    let gt = ds.resolve(gt);
    let text = fs::read_to_string(&gt)
        .map_err(|e| redist_core::Error::Io { path: gt.clone(), source: e })?;
    let split = gt.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
    let data = parse_widerface_gt(&text, &split).with_context(|| format!("in {}", gt.display()))?;
    let resolve = |p: &Option<PathBuf>| p.as_ref().map(|p| ds.resolve(p));
    let source = DimensionSource {
        sizes_csv: resolve(&ds.sizes_csv),
        image_root: resolve(&ds.image_root),
    };
    if source.sizes_csv.is_none() && source.image_root.is_none() {
        log::warn!("neither --images nor --sizes given; every image will be unresolved");
    }
    let data = resolve_dimensions(data, &source)?;
    let policy = FacePolicy {
        drop_invalid: !ds.keep_invalid,
        ..FacePolicy::default()
    };
    Ok((data, policy))
}

pub fn scale_stats(args: ScaleStatsArgs) -> Result<()> {
    let (data, policy) = load_dataset(&args.data)?;
    let thresholds: &[f64] = if args.full { &[] } else { &args.thresholds };
    let cdf = face_scale_cdf(&data, &policy, args.long_edge, thresholds)?;
    if args.full {
        println!("{} thresholds computed", cdf.len());
    } else {
        for (t, f) in &cdf {
            println!("scale < {t}: {f:.4}");
        }
    }
    if let Some(out) = &args.out {
        let mut csv = Vec::new();
        write_cdf_csv(&cdf, &mut csv)?;
        write(&out.join("cdf.csv"), csv)?;
        write(
            &out.join("cdf.svg"),
            svg::line("Cumulative face scale distribution", "scale (px)", "fraction", &cdf),
        )?;
    }
    Ok(())
}

pub fn anchor_stats(args: AnchorStatsArgs) -> Result<()> {
    let cfg = load_config(args.data.config.as_deref())?;
    let mut crop = cfg.crop.clone();
    if let Some(p) = &args.policy {
        crop.policy = p.clone();
    }
    let policy = redist_core::anchors::CropPolicy::by_name(&crop.policy)
        .map(|_| crop.policy())
        .ok_or_else(|| anyhow!("unknown crop policy {:?}; expected baseline or sr", crop.policy))?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let epochs = args.epochs.unwrap_or(crop.epochs);
    let raw = args.raw || crop.raw_counts;

    let (data, faces) = match args.synthetic {
        Some(n) => (
            synthetic_dataset(&SyntheticConfig { images: n, ..Default::default() }, seed)?,
            FacePolicy::default(),
        ),
        None => load_dataset(&args.data)?,
    };
    let stats = epoch_positive_stats(&data, &policy, &faces, seed, epochs, raw)?;
    println!(
        "{} images x {} epoch(s), {} faces on canvas, {} positives",
        stats.images,
        stats.epochs,
        stats.gt_faces,
        stats.positives()
    );
    for (side, n) in &stats.histogram {
        println!("anchor {side:>3}: {n}");
    }
    if let Some(out) = &args.out {
        let mut csv = Vec::new();
        stats.write_csv(&mut csv)?;
        write(&out.join("stats.csv"), csv)?;
        write(&out.join("stats.json"), serde_json::to_vec_pretty(&stats)?)?;
        let labels: Vec<String> = ANCHOR_SCALES.iter().map(u32::to_string).collect();
        let counts: Vec<f64> = ANCHOR_SCALES.iter().map(|s| stats.histogram[s] as f64).collect();
        write(
            &out.join("positives.svg"),
            svg::bars("Positive anchors per scale", "positives", &labels, &[(crop.policy.as_str(), counts)]),
        )?;
    }
    Ok(())
}

pub fn search(step: Step, args: SearchArgs, step1_dir: Option<PathBuf>) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(c) = args.count {
        cfg.search.count = c;
    }
    if let Some(p) = &args.scores {
        cfg.evaluator = EvaluatorConfig::Csv { path: p.clone() };
    }
    cfg.validate()?;
    let base = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs"));
    let evaluator = evaluator_from_config(&cfg.evaluator)?;

    let record = match step {
        Step::Step1 => run_step1(&cfg, evaluator.as_ref())?,
        Step::Baseline => run_baseline(&cfg, evaluator.as_ref())?,
        Step::Step2 => {
            let dir = step1_dir.unwrap_or_else(|| step_dir(&base, Step::Step1));
            let step1 = read_run_dir(&dir).with_context(|| format!("loading step-1 run {}", dir.display()))?;
            run_step2(&cfg, &step1, evaluator.as_ref())?
        }
    };
    let dir = step_dir(&base, step);
    write_run_dir(&record, &dir)?;
    println!("{}: {} architectures -> {}", step.label(), record.population.len(), dir.display());
    for r in &record.ranges {
        println!(
            "  {:<9} [{:.4}, {:.4}]{}",
            r.component,
            r.low,
            r.high,
            if r.degenerate { " (degenerate)" } else { "" }
        );
    }
    println!("  best {} ap {:.4}", record.best.id, record.best.ap.unwrap_or_default());
    Ok(())
}

pub fn bootstrap(args: BootstrapArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let mut params = cfg.bootstrap;
    if let Some(b) = args.replicates {
        params.replicates = b;
    }
    if let Some(f) = args.subsample_frac {
        params.subsample_frac = f;
    }
    if let Some(c) = args.confidence {
        params.confidence = c;
    }
    let components: Vec<RatioComponent> = if args.components.is_empty() {
        RatioComponent::ALL.to_vec()
    } else {
        args.components
            .iter()
            .map(|n| RatioComponent::from_name(n).ok_or_else(|| anyhow!("unknown component {n:?}")))
            .collect::<Result<_>>()?
    };
    let f = fs::File::open(&args.population).map_err(|e| redist_core::Error::Io {
        path: args.population.clone(),
        source: e,
    })?;
    let population = read_population(std::io::BufReader::new(f))?;
    if population.is_empty() {
        bail!(redist_core::Error::Parse {
            line: 0,
            message: format!("{} holds no architectures", args.population.display()),
        });
    }
    let ranges = range_report(&population, &components, args.seed.unwrap_or(cfg.seed), &params)?;
    let mut csv = Vec::new();
    write_ranges_csv(&ranges, &mut csv)?;
    match &args.out {
        Some(out) => {
            write(&out.join("ranges.csv"), &csv)?;
            let mut json = serde_json::to_vec_pretty(&ranges)?;
            json.push(b'\n');
            write(&out.join("ranges.json"), json)?;
            println!("{} ranges -> {}", ranges.len(), out.display());
        }
        None => std::io::stdout().write_all(&csv)?,
    }
    Ok(())
}
