//! Brute-force reference implementations shared by the integration tests.

#![allow(dead_code)]

use rand::Rng as _;
use redist_core::anchors::{Anchor, BBox};
use redist_core::rng::Rng;

pub fn oracle_iou(a: &BBox, b: &BBox) -> f64 {
    let (ax1, ay1, ax2, ay2) = (a.x, a.y, a.x + a.w, a.y + a.h);
    let (bx1, by1, bx2, by2) = (b.x, b.y, b.x + b.w, b.y + b.h);
    let w = (ax2.min(bx2) - ax1.max(bx1)).max(0.0);
    let h = (ay2.min(by2) - ay1.max(by1)).max(0.0);
    let union = a.w.max(0.0) * a.h.max(0.0) + b.w.max(0.0) * b.h.max(0.0) - w * h;
    if union <= 0.0 {
        0.0
    } else {
        w * h / union
    }
}

fn anchor_box(a: &Anchor) -> BBox {
    let s = a.side as f64;
    BBox::new(a.cx - s / 2.0, a.cy - s / 2.0, s, s)
}

/// Full sort per level, explicit two-pass statistics, exhaustive conflict
/// scan.
pub fn oracle_atss(anchors: &[Anchor], gts: &[BBox], k: usize) -> Vec<Vec<usize>> {
    let mut strides: Vec<u32> = anchors.iter().map(|a| a.stride).collect();
    strides.sort();
    strides.dedup();

    let per_gt: Vec<Vec<(usize, f64)>> = gts
        .iter()
        .map(|gt| {
            let gx = gt.x + gt.w / 2.0;
            let gy = gt.y + gt.h / 2.0;
            let mut pool = Vec::new();
            for &s in &strides {
                let mut level: Vec<(f64, usize)> = anchors
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.stride == s)
                    .map(|(i, a)| ((a.cx - gx).powi(2) + (a.cy - gy).powi(2), i))
                    .collect();
                level.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                pool.extend(level.iter().take(k).map(|&(_, i)| i));
            }
            pool.sort();
            if pool.is_empty() {
                return Vec::new();
            }
            let ious: Vec<f64> = pool.iter().map(|&i| oracle_iou(&anchor_box(&anchors[i]), gt)).collect();
            let n = ious.len() as f64;
            let mut sum = 0.0;
            for v in &ious {
                sum += v;
            }
            let mean = sum / n;
            let thr = if ious.len() < 2 {
                mean
            } else {
                let mut ss = 0.0;
                for v in &ious {
                    ss += (v - mean) * (v - mean);
                }
                mean + (ss / (n - 1.0)).sqrt()
            };
            pool.iter()
                .zip(&ious)
                .filter(|&(&i, &v)| {
                    let a = &anchors[i];
                    v >= thr && a.cx > gt.x && a.cx < gt.x + gt.w && a.cy > gt.y && a.cy < gt.y + gt.h
                })
                .map(|(&i, &v)| (i, v))
                .collect()
        })
        .collect();

    let mut out = vec![Vec::new(); gts.len()];
    for a in 0..anchors.len() {
        let mut best: Option<(usize, f64)> = None;
        for (g, list) in per_gt.iter().enumerate() {
            if let Some(&(_, v)) = list.iter().find(|(i, _)| *i == a) {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((g, v));
                }
            }
        }
        if let Some((g, _)) = best {
            out[g].push(a);
        }
    }
    out
}

/// A random small ATSS instance on a 128 x 128 canvas.
pub fn random_instance(rng: &mut Rng) -> (Vec<Anchor>, Vec<BBox>, usize) {
    let n_anchors = rng.random_range(1..=50);
    let anchors = (0..n_anchors)
        .map(|_| {
            let stride = [8u32, 16, 32][rng.random_range(0..3)];
            let cells = 128 / stride;
            Anchor {
                cx: (rng.random_range(0..cells) as f64 + 0.5) * stride as f64,
                cy: (rng.random_range(0..cells) as f64 + 0.5) * stride as f64,
                side: stride * [2, 4][rng.random_range(0..2)],
                stride,
            }
        })
        .collect();
    let n_gts = rng.random_range(0..=5);
    let gts = (0..n_gts)
        .map(|_| {
            let w = rng.random_range(4.0..80.0);
            let h = rng.random_range(4.0..80.0);
            BBox::new(rng.random_range(-10.0..120.0), rng.random_range(-10.0..120.0), w, h)
        })
        .collect();
    (anchors, gts, rng.random_range(1..=9))
}
