//! Browser bindings: flop breakdowns, positive-anchor histograms under both
//! crop policies, and a surrogate-scored bootstrap range. Every export
//! returns a JSON string; SVG plots are embedded as strings.

use redist_core::anchors::{epoch_positive_stats, CropPolicy, ANCHOR_SCALES};
use redist_core::arch::{baselines, DetectorArch};
use redist_core::bootstrap::RatioComponent;
use redist_core::config::{RunConfig, SurrogateParams};
use redist_core::flops::{component_ratios, detector_flops, Component, InputSize};
use redist_core::pipeline::{run_baseline, run_step1, SyntheticSurrogate};
use redist_core::reference;
use redist_core::svg::{self, Band};
use redist_core::synthetic::{synthetic_dataset, SyntheticConfig};
use redist_core::widerface::FacePolicy;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn baseline_names() -> String {
    json!(baselines::NAMES).to_string()
}

/// `arch` is a baseline name or architecture JSON; `input` is `"WxH"`.
#[wasm_bindgen]
pub fn flops_report(arch: &str, input: &str) -> Result<String, JsError> {
    let arch = match baselines::by_name(arch.trim()) {
        Some(a) => a,
        None if arch.trim_start().starts_with('{') => DetectorArch::from_json(arch).map_err(js)?,
        None => return Err(js(format!("unknown baseline {:?}", arch.trim()))),
    };
    let input: InputSize = input.parse().map_err(js)?;
    let b = detector_flops(&arch, input).map_err(js)?;
    let r = component_ratios(&b).map_err(js)?;
    let rows: Vec<_> = Component::ALL
        .iter()
        .map(|&c| json!({ "component": c.name(), "macs": b.macs[c], "params": b.params[c], "ratio": b.ratios[c] }))
        .collect();
    let bar = svg::stacked_bar(
        &format!("{:.3} GMACs, {:.3} M params", b.gmacs(), b.mparams()),
        &[
            ("backbone", b.macs.backbone() as f64),
            ("neck", b.macs.neck as f64),
            ("head", b.macs.head as f64),
        ],
    );
    Ok(json!({
        "id": arch.id().to_string(),
        "arch": arch,
        "gmacs": b.gmacs(),
        "mparams": b.mparams(),
        "rows": rows,
        "shallow": r.shallow,
        "deep": r.deep,
        "svg": bar,
    })
    .to_string())
}

/// Positive anchors per scale for one epoch over a synthetic dataset,
/// baseline crop range against the enlarged one.
#[wasm_bindgen]
pub fn anchor_stats_demo(images: u32, seed: u64) -> Result<String, JsError> {
    let cfg = SyntheticConfig {
        images: images.clamp(1, 2000) as usize,
        ..Default::default()
    };
    let data = synthetic_dataset(&cfg, seed).map_err(js)?;
    let faces = FacePolicy::default();
    let count = |p: &CropPolicy| -> Result<Vec<f64>, JsError> {
        let s = epoch_positive_stats(&data, p, &faces, seed, 1, false).map_err(js)?;
        Ok(ANCHOR_SCALES.iter().map(|k| s.histogram[k] as f64).collect())
    };
    let base = count(&CropPolicy::baseline())?;
    let sr = count(&CropPolicy::sample_redistribution())?;
    let labels: Vec<String> = ANCHOR_SCALES.iter().map(u32::to_string).collect();
    let chart = svg::bars(
        "Positive anchors per scale, one epoch",
        "positives",
        &labels,
        &[("baseline", base.clone()), ("sr", sr.clone())],
    );
    Ok(json!({ "scales": ANCHOR_SCALES, "baseline": base, "sr": sr, "svg": chart }).to_string())
}

/// Samples a surrogate-scored population and bootstraps the range of one
/// component. Stage components come from the backbone-only search,
/// backbone/neck/head from whole-detector sampling.
#[wasm_bindgen]
pub fn bootstrap_demo(component: &str, count: u32, seed: u64, noise_sigma: f64) -> Result<String, JsError> {
    let c = RatioComponent::from_name(component).ok_or_else(|| js(format!("unknown component {component:?}")))?;
    let mut cfg = RunConfig {
        seed,
        ..Default::default()
    };
    cfg.search.count = count.clamp(8, 1000) as usize;
    let ev = SyntheticSurrogate::new(SurrogateParams {
        noise_sigma: noise_sigma.max(0.0),
        noise_seed: seed,
        ..Default::default()
    });
    let record = if RatioComponent::BACKBONE_STEP.contains(&c) {
        run_step1(&cfg, &ev)
    } else {
        run_baseline(&cfg, &ev)
    }
    .map_err(js)?;
    let range = record.range(c).ok_or_else(|| js("component not analysed"))?.clone();
    let points = record
        .population
        .iter()
        .map(|s| Ok((c.extract(&component_ratios(&s.flops)?), s.ap.unwrap_or_default())))
        .collect::<redist_core::Result<Vec<_>>>()
        .map_err(js)?;
    let label = format!("bootstrap [{:.3}, {:.3}]", range.low, range.high);
    let mut bands = vec![Band {
        low: range.low,
        high: range.high,
        label: &label,
        color: "#1f77b4",
    }];
    let published = reference::lookup(c);
    let plabel = published.map(|p| format!("published [{:.2}, {:.2}]", p.low, p.high));
    if let (Some(p), Some(l)) = (published, plabel.as_deref()) {
        bands.push(Band {
            low: p.low,
            high: p.high,
            label: l,
            color: "#ff7f0e",
        });
    }
    let plot = svg::scatter(
        &format!("{} vs surrogate score, n = {}", c.name(), points.len()),
        &format!("{} computation ratio", c.name()),
        "score",
        &points,
        &bands,
    );
    Ok(json!({
        "component": c.name(),
        "range": range,
        "best": { "id": record.best.id.to_string(), "score": record.best.ap, "gmacs": record.best.flops.gmacs() },
        "svg": plot,
    })
    .to_string())
}
