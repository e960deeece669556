//! Training-time geometry: face-scale statistics, square-crop augmentation,
//! anchor tiling and ATSS positive assignment.
//!
//! Boxes are `(x, y, w, h)` with `(x, y)` the top-left corner, in pixels.
//!
//! Crop rule used throughout:
//!
//! * a scale `c` is drawn uniformly from the policy's choices and the crop
//!   side is `s = floor(c * min(W, H))`;
//! * along each axis of length `L` the integer origin is uniform on
//!   `[0, L - s]` when `s <= L` (crop inside the image) and on `[L - s, 0]`
//!   otherwise (image inside the crop);
//! * a face is kept when its center lies in `[ox, ox + s) x [oy, oy + s)`;
//!   kept faces are clipped to the crop, translated, and scaled by
//!   `output_size / s`.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::arch::{ANCHOR_SIDES, STRIDES};
use crate::error::{Error, Result};
use crate::rng::{substream, Rng};
use crate::widerface::{FaceDataset, FacePolicy, ImageAnnotation};

/// Side of the square training canvas.
pub const CANVAS: u32 = 640;
/// ATSS candidates per pyramid level.
pub const ATSS_TOPK: usize = 9;
/// Positive-anchor histogram keys.
pub const ANCHOR_SCALES: [u32; 6] = [16, 32, 64, 128, 256, 512];
/// Geometric edges of the ground-truth scale histogram.
pub const SCALE_EDGES: [f64; 8] = [4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0];

pub const CROP_RULE: &str = "side=floor(choice*min(W,H)); origin uniform per axis on [0,L-s] or [L-s,0]; \
keep faces with center in [o,o+s); clip to crop; scale by output/side";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        BBox { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// `sqrt(w * h)`.
    pub fn scale(&self) -> f64 {
        self.area().sqrt()
    }

    /// Whether `(px, py)` lies strictly inside the box.
    pub fn strictly_contains(&self, px: f64, py: f64) -> bool {
        px > self.x && px < self.x + self.w && py > self.y && py < self.y + self.h
    }
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = ((a.x + a.w).min(b.x + b.w) - a.x.max(b.x)).max(0.0);
    let ih = ((a.y + a.h).min(b.y + b.h) - a.y.max(b.y)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub cx: f64,
    pub cy: f64,
    pub side: u32,
    pub stride: u32,
}

impl Anchor {
    pub fn bbox(&self) -> BBox {
        let s = self.side as f64;
        BBox::new(self.cx - s / 2.0, self.cy - s / 2.0, s, s)
    }
}

/// Anchors over a `size x size` canvas: strides 8, 16, 32 in that order,
/// locations row-major, the two sides of a level innermost.
pub fn tile_anchors_for(size: u32) -> Result<Vec<Anchor>> {
    if size == 0 || !size.is_multiple_of(32) {
        return Err(Error::InvalidArgument(format!("canvas size {size} must be a positive multiple of 32")));
    }
    let mut out = Vec::new();
    for (level, &stride) in STRIDES.iter().enumerate() {
        let cells = size / stride;
        for row in 0..cells {
            for col in 0..cells {
                for &side in &ANCHOR_SIDES[level] {
                    out.push(Anchor {
                        cx: (col as f64 + 0.5) * stride as f64,
                        cy: (row as f64 + 0.5) * stride as f64,
                        side,
                        stride,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The 16,800 anchors of the 640 x 640 training canvas.
pub fn tile_anchors() -> Vec<Anchor> {
    tile_anchors_for(CANVAS).expect("640 is a multiple of 32")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CropPolicy {
    pub scale_choices: Vec<f64>,
    #[serde(default = "CropPolicy::default_output")]
    pub output_size: u32,
}

impl CropPolicy {
    fn default_output() -> u32 {
        CANVAS
    }

    pub fn baseline() -> Self {
        CropPolicy {
            scale_choices: vec![0.3, 0.45, 0.6, 0.8, 1.0],
            output_size: CANVAS,
        }
    }

    /// Baseline choices extended to twice the short edge.
    pub fn sample_redistribution() -> Self {
        CropPolicy {
            scale_choices: vec![0.3, 0.45, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0],
            output_size: CANVAS,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "baseline" => Some(Self::baseline()),
            "sr" => Some(Self::sample_redistribution()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale_choices.is_empty() || self.scale_choices.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidArgument("crop scale choices must be positive".into()));
        }
        if self.output_size == 0 {
            return Err(Error::InvalidArgument("crop output size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropWindow {
    pub x: i64,
    pub y: i64,
    pub side: i64,
}

fn origin(rng: &mut Rng, len: i64, side: i64) -> i64 {
    if side <= len {
        rng.random_range(0..=len - side)
    } else {
        rng.random_range(len - side..=0)
    }
}

pub fn sample_crop_window(rng: &mut Rng, width: u32, height: u32, policy: &CropPolicy) -> CropWindow {
    let choice = policy.scale_choices[rng.random_range(0..policy.scale_choices.len())];
    let side = ((choice * width.min(height) as f64).floor() as i64).max(1);
    let x = origin(rng, width as i64, side);
    let y = origin(rng, height as i64, side);
    CropWindow { x, y, side }
}

/// Applies a crop window to image-space faces, returning canvas boxes.
pub fn apply_crop<'a>(window: CropWindow, faces: impl IntoIterator<Item = &'a BBox>, output_size: u32) -> Vec<BBox> {
    let (x0, y0, s) = (window.x as f64, window.y as f64, window.side as f64);
    let (x1, y1) = (x0 + s, y0 + s);
    let k = output_size as f64 / s;
    faces
        .into_iter()
        .filter(|f| {
            let (cx, cy) = f.center();
            cx >= x0 && cx < x1 && cy >= y0 && cy < y1
        })
        .map(|f| {
            let l = f.x.max(x0);
            let t = f.y.max(y0);
            let r = (f.x + f.w).min(x1);
            let b = (f.y + f.h).min(y1);
            BBox::new((l - x0) * k, (t - y0) * k, (r - l) * k, (b - t) * k)
        })
        .collect()
}

fn face_boxes(image: &ImageAnnotation, faces: &FacePolicy) -> Vec<BBox> {
    image
        .faces_with(faces)
        .map(|f| BBox::new(f.x as f64, f.y as f64, f.w as f64, f.h as f64))
        .collect()
}

fn require_dims(image: &ImageAnnotation) -> Result<(u32, u32)> {
    image
        .dims()
        .ok_or_else(|| Error::Unresolved(vec![image.relative_path.clone()]))
}

/// One random square crop of `image`, returning the kept faces on the
/// output canvas.
pub fn simulate_crop(image: &ImageAnnotation, rng: &mut Rng, policy: &CropPolicy, faces: &FacePolicy) -> Result<Vec<BBox>> {
    policy.validate()?;
    let (w, h) = require_dims(image)?;
    let window = sample_crop_window(rng, w, h, policy);
    Ok(apply_crop(window, &face_boxes(image, faces), policy.output_size))
}

/// Per-gt ATSS positives before cross-gt conflict resolution.
///
/// For each gt, the `k` anchors per stride level whose centers are nearest
/// to the gt center (ties to the lower anchor index) form the candidate
/// pool; the IoU threshold is the mean plus the sample standard deviation of
/// the pooled IoUs; candidates at or above the threshold whose centers lie
/// strictly inside the gt are positive. Each returned list is ascending.
pub fn atss_candidates(anchors: &[Anchor], gts: &[BBox], k: usize) -> Vec<Vec<usize>> {
    let mut strides: Vec<u32> = anchors.iter().map(|a| a.stride).collect();
    strides.sort_unstable();
    strides.dedup();
    let levels: Vec<Vec<usize>> = strides
        .iter()
        .map(|&s| (0..anchors.len()).filter(|&i| anchors[i].stride == s).collect())
        .collect();
    let boxes: Vec<BBox> = anchors.iter().map(Anchor::bbox).collect();

    let mut keyed: Vec<(f64, usize)> = Vec::new();
    gts.iter()
        .map(|gt| {
            let (gx, gy) = gt.center();
            let mut pool: Vec<usize> = Vec::with_capacity(k * levels.len());
            for level in &levels {
                keyed.clear();
                keyed.extend(level.iter().map(|&i| {
                    let (dx, dy) = (anchors[i].cx - gx, anchors[i].cy - gy);
                    (dx * dx + dy * dy, i)
                }));
                let take = k.min(keyed.len());
                if take == 0 {
                    continue;
                }
                let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if take < keyed.len() {
                    keyed.select_nth_unstable_by(take - 1, cmp);
                }
                pool.extend(keyed[..take].iter().map(|&(_, i)| i));
            }
            pool.sort_unstable();
            if pool.is_empty() {
                return Vec::new();
            }
            let ious: Vec<f64> = pool.iter().map(|&i| iou(&boxes[i], gt)).collect();
            let threshold = mean_plus_std(&ious);
            pool.iter()
                .zip(&ious)
                .filter(|&(&i, &v)| v >= threshold && gt.strictly_contains(anchors[i].cx, anchors[i].cy))
                .map(|(&i, _)| i)
                .collect()
        })
        .collect()
}

/// Mean plus sample (n - 1) standard deviation, summed in slice order.
pub fn mean_plus_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return mean;
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    mean + var.sqrt()
}

/// ATSS assignment: per-gt positive anchor indices (ascending). An anchor
/// that qualifies for several gts goes to the one it overlaps most, ties to
/// the lower gt index.
pub fn atss_assign(anchors: &[Anchor], gts: &[BBox], k: usize) -> Vec<Vec<usize>> {
    resolve_conflicts(anchors, gts, atss_candidates(anchors, gts, k))
}

fn resolve_conflicts(anchors: &[Anchor], gts: &[BBox], candidates: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut owner: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for (g, list) in candidates.iter().enumerate() {
        for &a in list {
            let v = iou(&anchors[a].bbox(), &gts[g]);
            match owner.get(&a) {
                Some(&(_, best)) if best >= v => {}
                _ => {
                    owner.insert(a, (g, v));
                }
            }
        }
    }
    let mut out = vec![Vec::new(); gts.len()];
    for (a, (g, _)) in owner {
        out[g].push(a);
    }
    out
}

/// Fraction of faces with scale below each threshold after resizing every
/// image so its long edge equals `long_edge`. An empty threshold list
/// yields the curve over integer thresholds `1..=long_edge`.
pub fn face_scale_cdf(
    dataset: &FaceDataset,
    faces: &FacePolicy,
    long_edge: u32,
    thresholds: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let unresolved: Vec<String> = dataset
        .images
        .iter()
        .filter(|i| i.dims().is_none())
        .map(|i| i.relative_path.clone())
        .collect();
    if !unresolved.is_empty() {
        return Err(Error::Unresolved(unresolved));
    }
    let mut scales: Vec<f64> = Vec::new();
    for img in &dataset.images {
        let (w, h) = img.dims().expect("checked above");
        let k = long_edge as f64 / w.max(h) as f64;
        scales.extend(
            img.faces_with(faces)
                .map(|f| ((f.w.max(0) as f64 * k) * (f.h.max(0) as f64 * k)).sqrt()),
        );
    }
    if scales.is_empty() {
        return Err(Error::InvalidArgument("no faces to compute a scale distribution over".into()));
    }
    scales.sort_by(f64::total_cmp);
    let grid: Vec<f64>;
    let ts = if thresholds.is_empty() {
        grid = (1..=long_edge).map(f64::from).collect();
        &grid[..]
    } else {
        thresholds
    };
    let n = scales.len() as f64;
    Ok(ts
        .iter()
        .map(|&t| (t, scales.partition_point(|&s| s < t) as f64 / n))
        .collect())
}

pub fn write_cdf_csv<W: Write>(cdf: &[(f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "fraction"])?;
    for (t, f) in cdf {
        w.write_record([t.to_string(), f.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<cdf.csv>", e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleBin {
    /// Inclusive lower edge; 0 for the first bin.
    pub low: u32,
    /// Exclusive upper edge; absent for the last bin.
    pub high: Option<u32>,
    pub count: u64,
}

fn empty_gt_histogram() -> Vec<ScaleBin> {
    let mut edges = vec![0u32];
    edges.extend(SCALE_EDGES.iter().map(|&e| e as u32));
    (0..edges.len())
        .map(|i| ScaleBin {
            low: edges[i],
            high: edges.get(i + 1).copied(),
            count: 0,
        })
        .collect()
}

fn scale_bin(scale: f64) -> usize {
    SCALE_EDGES.iter().take_while(|&&e| scale >= e).count()
}

fn empty_anchor_histogram() -> BTreeMap<u32, u64> {
    ANCHOR_SCALES.iter().map(|&s| (s, 0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchStats {
    pub policy: CropPolicy,
    pub seed: u64,
    pub epochs: u32,
    pub images: usize,
    pub gt_faces: u64,
    /// Positive anchors per anchor side, after cross-gt deduplication.
    pub histogram: BTreeMap<u32, u64>,
    /// Positives per anchor side before deduplication, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_histogram: Option<BTreeMap<u32, u64>>,
    /// Ground-truth faces on the canvas, binned by `sqrt(w * h)`.
    pub gt_histogram: Vec<ScaleBin>,
    pub crop_rule: String,
}

impl MatchStats {
    fn empty(policy: &CropPolicy, seed: u64, epochs: u32, images: usize, raw: bool) -> Self {
        MatchStats {
            policy: policy.clone(),
            seed,
            epochs,
            images,
            gt_faces: 0,
            histogram: empty_anchor_histogram(),
            raw_histogram: raw.then(empty_anchor_histogram),
            gt_histogram: empty_gt_histogram(),
            crop_rule: CROP_RULE.to_string(),
        }
    }

    fn add(&mut self, other: &Tally) {
        self.gt_faces += other.gt_faces;
        for (i, s) in ANCHOR_SCALES.iter().enumerate() {
            *self.histogram.get_mut(s).unwrap() += other.positives[i];
            if let Some(raw) = &mut self.raw_histogram {
                *raw.get_mut(s).unwrap() += other.raw[i];
            }
        }
        for (bin, c) in self.gt_histogram.iter_mut().zip(&other.gt_bins) {
            bin.count += c;
        }
    }

    pub fn positives(&self) -> u64 {
        self.histogram.values().sum()
    }

    /// Rows `kind,key,count` for the anchor and ground-truth histograms.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["histogram", "bin", "count"])?;
        for (s, c) in &self.histogram {
            w.write_record(["positive", &s.to_string(), &c.to_string()])?;
        }
        if let Some(raw) = &self.raw_histogram {
            for (s, c) in raw {
                w.write_record(["raw_positive", &s.to_string(), &c.to_string()])?;
            }
        }
        for b in &self.gt_histogram {
            let label = match b.high {
                Some(h) => format!("{}-{}", b.low, h),
                None => format!("{}+", b.low),
            };
            w.write_record(["gt", &label, &b.count.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<stats.csv>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    gt_faces: u64,
    positives: [u64; 6],
    raw: [u64; 6],
    gt_bins: [u64; SCALE_EDGES.len() + 1],
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.gt_faces += other.gt_faces;
        for i in 0..6 {
            self.positives[i] += other.positives[i];
            self.raw[i] += other.raw[i];
        }
        for (a, b) in self.gt_bins.iter_mut().zip(other.gt_bins) {
            *a += b;
        }
        self
    }
}

fn side_index(side: u32) -> usize {
    ANCHOR_SCALES.iter().position(|&s| s == side).expect("tiled anchor side")
}

fn tally_image(
    anchors: &[Anchor],
    image: &ImageAnnotation,
    rng: &mut Rng,
    policy: &CropPolicy,
    faces: &FacePolicy,
    raw: bool,
) -> Result<Tally> {
    let gts = simulate_crop(image, rng, policy, faces)?;
    let mut t = Tally {
        gt_faces: gts.len() as u64,
        ..Tally::default()
    };
    for g in &gts {
        t.gt_bins[scale_bin(g.scale())] += 1;
    }
    let candidates = atss_candidates(anchors, &gts, ATSS_TOPK);
    if raw {
        for &a in candidates.iter().flatten() {
            t.raw[side_index(anchors[a].side)] += 1;
        }
    }
    for &a in resolve_conflicts(anchors, &gts, candidates).iter().flatten() {
        t.positives[side_index(anchors[a].side)] += 1;
    }
    Ok(t)
}

/// Positive-anchor statistics over `epochs` passes of one crop per image.
/// Image `i` in epoch `e` draws its crop from stream `e * N + i` of `seed`.
pub fn epoch_positive_stats(
    dataset: &FaceDataset,
    policy: &CropPolicy,
    faces: &FacePolicy,
    seed: u64,
    epochs: u32,
    raw: bool,
) -> Result<MatchStats> {
    policy.validate()?;
    let n = dataset.images.len();
    let mut stats = MatchStats::empty(policy, seed, epochs, n, raw);
    if n == 0 || epochs == 0 {
        return Ok(stats);
    }
    let anchors = tile_anchors_for(policy.output_size)?;
    let jobs = (0..epochs as u64).flat_map(|e| (0..n).map(move |i| (e, i)));
    let run = |(e, i): (u64, usize)| {
        let mut rng = substream(seed, e * n as u64 + i as u64);
        tally_image(&anchors, &dataset.images[i], &mut rng, policy, faces, raw)
    };

    #[cfg(feature = "parallel")]
    let total = {
        use rayon::prelude::*;
        let jobs: Vec<(u64, usize)> = jobs.collect();
        jobs.into_par_iter()
            .map(run)
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?
    };
    #[cfg(not(feature = "parallel"))]
    let total = jobs
        .map(run)
        .try_fold(Tally::default(), |a, b| b.map(|b| a.merge(b)))?;

    stats.add(&total);
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_examples() {
        let a = BBox::new(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &BBox::new(5.0, 5.0, 1.0, 1.0)), 0.0);
        assert!((iou(&a, &BBox::new(1.0, 1.0, 2.0, 2.0)) - 1.0 / 7.0).abs() < 1e-12);
        let z = BBox::new(1.0, 1.0, 0.0, 0.0);
        assert_eq!(iou(&z, &z), 0.0);
    }

    #[test]
    fn tiling() {
        let a = tile_anchors();
        assert_eq!(a.len(), 16_800);
        assert!(a.iter().filter(|x| x.stride == 8).all(|x| x.side == 16 || x.side == 32));
        let first16 = a.iter().find(|x| x.stride == 16).unwrap();
        assert_eq!((first16.cx, first16.cy), (8.0, 8.0));
    }

    #[test]
    fn exact_anchor_match_is_positive() {
        let anchors = tile_anchors();
        let target = 2 * (10 * 80 + 10) + 1; // stride 8, row 10, col 10, side 32
        let gt = anchors[target].bbox();
        let out = atss_assign(&anchors, &[gt], ATSS_TOPK);
        assert!(out[0].contains(&target));
    }

    #[test]
    fn tiny_off_grid_face_gets_nothing() {
        let anchors = tile_anchors();
        let out = atss_assign(&anchors, &[BBox::new(1.0, 1.0, 2.0, 2.0)], ATSS_TOPK);
        assert!(out[0].is_empty());
    }

    #[test]
    fn identity_and_superset_crops() {
        let img = ImageAnnotation {
            relative_path: "a.jpg".into(),
            width: Some(640),
            height: Some(640),
            faces: vec![crate::widerface::FaceBox::new(10, 20, 30, 40)],
        };
        let mut rng = substream(0, 0);
        let one = CropPolicy {
            scale_choices: vec![1.0],
            output_size: 640,
        };
        let out = simulate_crop(&img, &mut rng, &one, &FacePolicy::default()).unwrap();
        assert_eq!(out, vec![BBox::new(10.0, 20.0, 30.0, 40.0)]);
        let two = CropPolicy {
            scale_choices: vec![2.0],
            output_size: 640,
        };
        for _ in 0..50 {
            let out = simulate_crop(&img, &mut rng, &two, &FacePolicy::default()).unwrap();
            assert_eq!(out.len(), 1);
            assert_eq!((out[0].w, out[0].h), (15.0, 20.0));
        }
    }

    #[test]
    fn cdf_single_face() {
        let ds = FaceDataset {
            images: vec![ImageAnnotation {
                relative_path: "a.jpg".into(),
                width: Some(640),
                height: Some(640),
                faces: vec![crate::widerface::FaceBox::new(0, 0, 100, 100)],
            }],
            split_label: "t".into(),
        };
        let cdf = face_scale_cdf(&ds, &FacePolicy::default(), 640, &[100.0, 101.0]).unwrap();
        assert_eq!(cdf, vec![(100.0, 0.0), (101.0, 1.0)]);
        let full = face_scale_cdf(&ds, &FacePolicy::default(), 640, &[]).unwrap();
        assert_eq!(full.len(), 640);
    }

    #[test]
    fn zero_epochs_is_empty() {
        let ds = FaceDataset::default();
        let s = epoch_positive_stats(&ds, &CropPolicy::baseline(), &FacePolicy::default(), 1, 0, false).unwrap();
        assert_eq!(s.positives(), 0);
        assert_eq!(s.histogram.len(), 6);
    }

    #[test]
    fn scale_bins() {
        assert_eq!(scale_bin(3.9), 0);
        assert_eq!(scale_bin(4.0), 1);
        assert_eq!(scale_bin(31.0), 3);
        assert_eq!(scale_bin(600.0), 8);
    }
}
