//! Markdown summary plus one ratio-vs-score scatter per analysed component.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use redist_core::bootstrap::RatioComponent;
use redist_core::flops::component_ratios;
use redist_core::pipeline::{read_run_dir, RunRecord};
use redist_core::reference;
use redist_core::svg::{self, Band};

const FRONTIER_ROWS: usize = 15;

fn pct(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

pub fn run(run_dir: &Path, out: Option<&Path>) -> Result<()> {
    let record = read_run_dir(run_dir)?;
    let out = out.map_or_else(|| run_dir.join("report"), Path::to_path_buf);
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    let components = record.step().components();
    for &c in components {
        let file = out.join(format!("{}.svg", c.name().to_ascii_lowercase()));
        fs::write(&file, scatter(&record, c)?).with_context(|| format!("writing {}", file.display()))?;
    }
    let md = markdown(&record)?;
    fs::write(out.join("report.md"), md).with_context(|| format!("writing {}", out.display()))?;
    println!("{} plots and report.md -> {}", components.len(), out.display());
    Ok(())
}

fn scatter(record: &RunRecord, c: RatioComponent) -> Result<String> {
    let points = record
        .population
        .iter()
        .map(|s| Ok((c.extract(&component_ratios(&s.flops)?), s.ap.unwrap_or_default())))
        .collect::<Result<Vec<_>>>()?;
    let mut bands = Vec::new();
    let local = record.range(c).map(|r| (format!("bootstrap [{}, {}]", pct(r.low), pct(r.high)), r));
    if let Some((label, r)) = &local {
        bands.push((r.low, r.high, label.clone(), "#1f77b4"));
    }
    if let Some(p) = reference::lookup(c) {
        bands.push((p.low, p.high, format!("published [{}, {}]", pct(p.low), pct(p.high)), "#ff7f0e"));
    }
    let bands: Vec<Band<'_>> = bands
        .iter()
        .map(|(low, high, label, color)| Band {
            low: *low,
            high: *high,
            label,
            color,
        })
        .collect();
    Ok(svg::scatter(
        &format!("{} ({}, n = {})", c.name(), record.step().label(), points.len()),
        &format!("{} computation ratio", c.name()),
        "score",
        &points,
        &bands,
    ))
}

fn markdown(record: &RunRecord) -> Result<String> {
    let m = &record.manifest;
    let cfg = &m.config;
    let mut s = String::new();
    writeln!(s, "# {} run\n", record.step().label())?;
    writeln!(s, "- seed: {}", m.seed)?;
    writeln!(s, "- evaluator: {}", m.evaluator)?;
    writeln!(
        s,
        "- regime: {} GMACs +/- {}% at {}",
        cfg.regime.target_gmacs,
        cfg.regime.band * 100.0,
        cfg.search.input
    )?;
    writeln!(s, "- population: {}", record.population.len())?;
    writeln!(
        s,
        "- bootstrap: B = {}, subsample {}, confidence {}\n",
        cfg.bootstrap.replicates, cfg.bootstrap.subsample_frac, cfg.bootstrap.confidence
    )?;
    if let Some(r) = &m.backbone_ranges {
        writeln!(s, "Backbone constrained to stem/C2..C5 ranges {:?}, shallow {:?}, deep {:?}.\n", r.stages, r.shallow, r.deep)?;
    }

    writeln!(s, "## Ranges\n")?;
    writeln!(s, "| component | low | high | published | plot |")?;
    writeln!(s, "|---|---|---|---|---|")?;
    for r in &record.ranges {
        let c = RatioComponent::from_name(&r.component);
        let published = c
            .and_then(reference::lookup)
            .map_or("-".to_string(), |p| format!("{} - {}", pct(p.low), pct(p.high)));
        writeln!(
            s,
            "| {}{} | {} | {} | {} | ![{0}]({}.svg) |",
            r.component,
            if r.degenerate { " (degenerate)" } else { "" },
            pct(r.low),
            pct(r.high),
            published,
            r.component.to_ascii_lowercase()
        )?;
    }
    writeln!(
        s,
        "\nPublished ranges come from measured detector scores and are shown for comparison only.\n"
    )?;

    let best = &record.best;
    let br = component_ratios(&best.flops)?;
    writeln!(s, "## Best architecture\n")?;
    writeln!(s, "- id: `{}`, score {:.4}, {:.3} GMACs", best.id, best.ap.unwrap_or_default(), best.flops.gmacs())?;
    writeln!(
        s,
        "- backbone {} / neck {} / head {}; shallow {} / deep {}",
        pct(br.backbone),
        pct(br.neck),
        pct(br.head),
        pct(br.shallow),
        pct(br.deep)
    )?;
    writeln!(s, "- `{}`\n", best.arch.to_canonical_json())?;

    writeln!(s, "## In-range frontier\n")?;
    let mut inside: Vec<_> = record
        .population
        .iter()
        .filter(|smp| {
            component_ratios(&smp.flops).is_ok_and(|r| {
                record.ranges.iter().all(|range| {
                    RatioComponent::from_name(&range.component).is_none_or(|c| range.contains(c.extract(&r)))
                })
            })
        })
        .collect();
    inside.sort_by(|a, b| {
        b.ap.unwrap_or_default()
            .total_cmp(&a.ap.unwrap_or_default())
            .then_with(|| a.id.cmp(&b.id))
    });
    writeln!(
        s,
        "{} of {} architectures lie inside every range; top {} by score:\n",
        inside.len(),
        record.population.len(),
        inside.len().min(FRONTIER_ROWS)
    )?;
    writeln!(s, "| id | score | GMACs | depths | widths | neck | head |")?;
    writeln!(s, "|---|---|---|---|---|---|---|")?;
    for smp in inside.iter().take(FRONTIER_ROWS) {
        let a = &smp.arch;
        writeln!(
            s,
            "| `{}` | {:.4} | {:.3} | {:?} | {:?} | {} | {}x{} |",
            smp.id,
            smp.ap.unwrap_or_default(),
            smp.flops.gmacs(),
            a.backbone.depths(),
            a.backbone.widths(),
            a.neck.n,
            a.head.m,
            a.head.h
        )?;
    }
    Ok(s)
}
