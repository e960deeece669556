//! Analytic multiply-add and parameter accounting.
//!
//! Every convolution is counted as
//! `out_h * out_w * out_ch * (in_ch / groups) * k^2` multiply-adds; bias, normalization and activation cost is excluded.
//! Parameters are conv weights plus two affine parameters per output channel
//! of every normalized conv (prediction convs carry no normalization).
//!
//! Layer layout:
//!
//! * stem: ResNet-D deep stem, 3x3/s2 `3 -> w/2`, 3x3 `w/2 -> w/2`,
//!   3x3 `w/2 -> w` at stride 2, where `w` is the stem width. Depthwise
//!   backbones replace the two stride-1 convs by depthwise + pointwise pairs.
//! * stages C2..C5 at strides 4..32; the first block of every stage
//!   downsamples by 2 (the 3x3 conv carries the stride) and owns a 1x1
//!   projection shortcut.
//! * neck: 1x1 laterals on C3..C5, 3x3 top-down fusion at strides 16 and 8,
//!   3x3/s2 bottom-up transfer plus 3x3 fusion at strides 16 and 32.
//! * head, per level: `m` stacked 3x3 convs (`n -> h`, then `h -> h`) and
//!   3x3 classification / box predictors with `A` and `4A` outputs. Weights
//!   are shared across levels, so parameters are counted once.

use std::fmt;
use std::io::Write;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::arch::{BackboneConfig, BlockKind, DetectorArch, HeadConfig, STRIDES};
use crate::error::{Error, Result};

pub const ANCHORS_PER_LOCATION: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Stem,
    C2,
    C3,
    C4,
    C5,
    Neck,
    Head,
}

impl Component {
    pub const ALL: [Component; 7] = [
        Component::Stem,
        Component::C2,
        Component::C3,
        Component::C4,
        Component::C5,
        Component::Neck,
        Component::Head,
    ];
    pub const BACKBONE: [Component; 5] = [
        Component::Stem,
        Component::C2,
        Component::C3,
        Component::C4,
        Component::C5,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Component::Stem => "stem",
            Component::C2 => "c2",
            Component::C3 => "c3",
            Component::C4 => "c4",
            Component::C5 => "c5",
            Component::Neck => "neck",
            Component::Head => "head",
        }
    }

    fn stage(i: usize) -> Component {
        Component::BACKBONE[i + 1]
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One value per [`Component`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerComponent<T> {
    pub stem: T,
    pub c2: T,
    pub c3: T,
    pub c4: T,
    pub c5: T,
    pub neck: T,
    pub head: T,
}

impl<T> Index<Component> for PerComponent<T> {
    type Output = T;
    fn index(&self, c: Component) -> &T {
        match c {
            Component::Stem => &self.stem,
            Component::C2 => &self.c2,
            Component::C3 => &self.c3,
            Component::C4 => &self.c4,
            Component::C5 => &self.c5,
            Component::Neck => &self.neck,
            Component::Head => &self.head,
        }
    }
}

impl<T> IndexMut<Component> for PerComponent<T> {
    fn index_mut(&mut self, c: Component) -> &mut T {
        match c {
            Component::Stem => &mut self.stem,
            Component::C2 => &mut self.c2,
            Component::C3 => &mut self.c3,
            Component::C4 => &mut self.c4,
            Component::C5 => &mut self.c5,
            Component::Neck => &mut self.neck,
            Component::Head => &mut self.head,
        }
    }
}

impl PerComponent<u64> {
    pub fn total(&self) -> u64 {
        Component::ALL.iter().map(|&c| self[c]).sum()
    }

    pub fn backbone(&self) -> u64 {
        Component::BACKBONE.iter().map(|&c| self[c]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputSize {
    pub width: u32,
    pub height: u32,
}

impl InputSize {
    pub const VGA: InputSize = InputSize {
        width: 640,
        height: 480,
    };

    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 || !width.is_multiple_of(32) || !height.is_multiple_of(32) {
            return Err(Error::InvalidArgument(format!(
                "input {width}x{height} must be a positive multiple of 32 in both dimensions"
            )));
        }
        Ok(InputSize { width, height })
    }

    fn at(&self, stride: u32) -> (u32, u32) {
        (self.height / stride, self.width / stride)
    }
}

impl std::str::FromStr for InputSize {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::InvalidArgument(format!("input size {s:?} is not WxH")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidArgument(format!("input size {s:?} is not WxH")))
        };
        InputSize::new(parse(w)?, parse(h)?)
    }
}

/// A single convolution layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conv {
    pub in_ch: u32,
    pub out_ch: u32,
    pub kernel: u32,
    pub stride: u32,
    pub groups: u32,
    pub out_h: u32,
    pub out_w: u32,
    pub norm: bool,
}

impl Conv {
    fn new(in_ch: u32, out_ch: u32, kernel: u32, stride: u32, (out_h, out_w): (u32, u32)) -> Self {
        Conv {
            in_ch,
            out_ch,
            kernel,
            stride,
            groups: 1,
            out_h,
            out_w,
            norm: true,
        }
    }

    fn depthwise(ch: u32, stride: u32, out: (u32, u32)) -> Self {
        Conv {
            groups: ch,
            ..Conv::new(ch, ch, 3, stride, out)
        }
    }

    fn predictor(mut self) -> Self {
        self.norm = false;
        self
    }

    pub fn macs(&self) -> u64 {
        self.out_h as u64
            * self.out_w as u64
            * self.out_ch as u64
            * (self.in_ch / self.groups) as u64
            * (self.kernel * self.kernel) as u64
    }

    pub fn params(&self) -> u64 {
        let weights = self.out_ch as u64 * (self.in_ch / self.groups) as u64 * (self.kernel * self.kernel) as u64;
        weights + if self.norm { 2 * self.out_ch as u64 } else { 0 }
    }
}

/// Multiply-adds of one convolution.
pub fn conv_macs(in_ch: u32, out_ch: u32, kernel: u32, out_h: u32, out_w: u32, groups: u32) -> Result<u64> {
    if [in_ch, out_ch, kernel, out_h, out_w, groups].contains(&0) {
        return Err(Error::InvalidArgument("convolution dimensions must be positive".into()));
    }
    if !in_ch.is_multiple_of(groups) || !out_ch.is_multiple_of(groups) {
        return Err(Error::InvalidArgument(format!(
            "channels {in_ch}->{out_ch} not divisible by groups {groups}"
        )));
    }
    Ok(Conv {
        groups,
        ..Conv::new(in_ch, out_ch, kernel, 1, (out_h, out_w))
    }
    .macs())
}

/// Human-readable layer name, built lazily.
#[derive(Debug, Clone, Copy)]
pub struct LayerTag {
    pub prefix: &'static str,
    pub block: Option<u32>,
    pub role: &'static str,
}

impl fmt::Display for LayerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.block {
            Some(b) => write!(f, "{}.{}.{}", self.prefix, b, self.role),
            None => write!(f, "{}.{}", self.prefix, self.role),
        }
    }
}

/// A visited layer. `shared` marks a head copy whose weights are already
/// counted on the first level.
#[derive(Debug, Clone, Copy)]
pub struct Visit {
    pub component: Component,
    pub tag: LayerTag,
    pub conv: Conv,
    pub shared: bool,
}

impl Visit {
    pub fn params(&self) -> u64 {
        if self.shared {
            0
        } else {
            self.conv.params()
        }
    }
}

const STAGE_PREFIX: [&str; 4] = ["c2", "c3", "c4", "c5"];

fn tag(prefix: &'static str, block: Option<u32>, role: &'static str) -> LayerTag {
    LayerTag { prefix, block, role }
}

pub fn walk_backbone(cfg: &BackboneConfig, input: InputSize, f: &mut dyn FnMut(Visit)) {
    let mut emit = |component, tag, conv| {
        f(Visit {
            component,
            tag,
            conv,
            shared: false,
        })
    };
    let stem = cfg.stem_width();
    let half = (stem / 2).max(1);
    let s2 = input.at(2);
    emit(Component::Stem, tag("stem", Some(0), "conv"), Conv::new(3, half, 3, 2, s2));
    for (i, (cin, cout)) in [(half, half), (half, stem)].into_iter().enumerate() {
        let b = Some(i as u32 + 1);
        if cfg.block == BlockKind::Depthwise {
            emit(Component::Stem, tag("stem", b, "dw"), Conv::depthwise(cin, 1, s2));
            emit(Component::Stem, tag("stem", b, "pw"), Conv::new(cin, cout, 1, 1, s2));
        } else {
            emit(Component::Stem, tag("stem", b, "conv"), Conv::new(cin, cout, 3, 1, s2));
        }
    }

    let mut cin = stem;
    for (i, stage) in cfg.stages.iter().enumerate() {
        let component = Component::stage(i);
        let prefix = STAGE_PREFIX[i];
        let out = input.at(1 << (i + 2));
        let w = stage.width;
        for b in 0..stage.depth {
            let s = if b == 0 { 2 } else { 1 };
            let blk = Some(b);
            match cfg.block {
                BlockKind::Basic => {
                    emit(component, tag(prefix, blk, "conv1"), Conv::new(cin, w, 3, s, out));
                    emit(component, tag(prefix, blk, "conv2"), Conv::new(w, w, 3, 1, out));
                }
                BlockKind::Bottleneck => {
                    let mid = cfg.block_width(i);
                    let reduce_at = (out.0 * s, out.1 * s);
                    emit(component, tag(prefix, blk, "conv1"), Conv::new(cin, mid, 1, 1, reduce_at));
                    emit(component, tag(prefix, blk, "conv2"), Conv::new(mid, mid, 3, s, out));
                    emit(component, tag(prefix, blk, "conv3"), Conv::new(mid, w, 1, 1, out));
                }
                BlockKind::Depthwise => {
                    emit(component, tag(prefix, blk, "dw"), Conv::depthwise(cin, s, out));
                    emit(component, tag(prefix, blk, "pw"), Conv::new(cin, w, 1, 1, out));
                }
            }
            if b == 0 && cfg.block != BlockKind::Depthwise {
                emit(component, tag(prefix, blk, "proj"), Conv::new(cin, w, 1, s, out));
            }
            cin = w;
        }
    }
}

/// `widths` are the output widths of C3, C4 and C5.
pub fn walk_neck(n: u32, widths: [u32; 3], input: InputSize, f: &mut dyn FnMut(Visit)) {
    let mut emit = |tag, conv| {
        f(Visit {
            component: Component::Neck,
            tag,
            conv,
            shared: false,
        })
    };
    const LATERAL: [&str; 3] = ["lateral_s8", "lateral_s16", "lateral_s32"];
    for (k, &w) in widths.iter().enumerate() {
        emit(tag("neck", None, LATERAL[k]), Conv::new(w, n, 1, 1, input.at(STRIDES[k])));
    }
    emit(tag("neck", None, "topdown_s16"), Conv::new(n, n, 3, 1, input.at(16)));
    emit(tag("neck", None, "topdown_s8"), Conv::new(n, n, 3, 1, input.at(8)));
    for (stride, down, fuse) in [(16, "down_s16", "bottomup_s16"), (32, "down_s32", "bottomup_s32")] {
        emit(tag("neck", None, down), Conv::new(n, n, 3, 2, input.at(stride)));
        emit(tag("neck", None, fuse), Conv::new(n, n, 3, 1, input.at(stride)));
    }
}

pub fn walk_head(
    head: &HeadConfig,
    n: u32,
    num_levels: usize,
    anchors_per_loc: u32,
    input: InputSize,
    f: &mut dyn FnMut(Visit),
) {
    const PREFIX: [&str; 6] = ["head_s8", "head_s16", "head_s32", "head_s64", "head_s128", "head_s256"];
    for (level, &prefix) in PREFIX.iter().enumerate().take(num_levels) {
        let out = input.at(8 << level);
        let shared = level > 0;
        let mut emit = |tag, conv| {
            f(Visit {
                component: Component::Head,
                tag,
                conv,
                shared,
            })
        };
        let mut cin = n;
        for j in 0..head.m {
            let b = Some(j);
            if head.depthwise {
                emit(tag(prefix, b, "dw"), Conv::depthwise(cin, 1, out));
                emit(tag(prefix, b, "pw"), Conv::new(cin, head.h, 1, 1, out));
            } else {
                emit(tag(prefix, b, "conv"), Conv::new(cin, head.h, 3, 1, out));
            }
            cin = head.h;
        }
        let predictors = [
            ("cls", "cls_dw", "cls_pw", anchors_per_loc),
            ("box", "box_dw", "box_pw", 4 * anchors_per_loc),
        ];
        for (role, dw_role, pw_role, outputs) in predictors {
            if head.depthwise {
                emit(tag(prefix, None, dw_role), Conv::depthwise(head.h, 1, out).predictor());
                emit(tag(prefix, None, pw_role), Conv::new(head.h, outputs, 1, 1, out).predictor());
            } else {
                emit(tag(prefix, None, role), Conv::new(head.h, outputs, 3, 1, out).predictor());
            }
        }
    }
}

/// Visits every layer of the detector in forward order.
pub fn walk_detector(arch: &DetectorArch, input: InputSize, f: &mut dyn FnMut(Visit)) {
    walk_backbone(&arch.backbone, input, f);
    let w = arch.backbone.widths();
    walk_neck(arch.neck.n, [w[1], w[2], w[3]], input, f);
    walk_head(&arch.head, arch.neck.n, STRIDES.len(), ANCHORS_PER_LOCATION, input, f);
}

/// Multiply-adds and parameters of a (partial) network.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Fragment {
    pub macs: PerComponent<u64>,
    pub params: PerComponent<u64>,
}

impl Fragment {
    fn collect(walk: impl FnOnce(&mut dyn FnMut(Visit))) -> Self {
        let mut frag = Fragment::default();
        walk(&mut |v: Visit| {
            frag.macs[v.component] += v.conv.macs();
            frag.params[v.component] += v.params();
        });
        frag
    }
}

pub fn backbone_flops(cfg: &BackboneConfig, input: InputSize) -> Result<Fragment> {
    cfg.validate()?;
    Ok(Fragment::collect(|f| walk_backbone(cfg, input, f)))
}

pub fn neck_flops(n: u32, widths: [u32; 3], input: InputSize) -> Result<Fragment> {
    if n < 8 || !n.is_multiple_of(8) {
        return Err(Error::arch("neck.n", format!("{n} must be a positive multiple of 8")));
    }
    if widths.contains(&0) {
        return Err(Error::InvalidArgument("neck input widths must be positive".into()));
    }
    Ok(Fragment::collect(|f| walk_neck(n, widths, input, f)))
}

pub fn head_flops(
    head: &HeadConfig,
    n: u32,
    num_levels: usize,
    anchors_per_loc: u32,
    input: InputSize,
) -> Result<Fragment> {
    if head.h < 8 || !head.h.is_multiple_of(8) {
        return Err(Error::arch("head.h", format!("{} must be a positive multiple of 8", head.h)));
    }
    if head.m == 0 {
        return Err(Error::arch("head.m", "must be at least 1"));
    }
    if num_levels == 0 || num_levels > 6 || anchors_per_loc == 0 || n == 0 {
        return Err(Error::InvalidArgument("head needs 1..=6 levels, anchors and input channels".into()));
    }
    Ok(Fragment::collect(|f| walk_head(head, n, num_levels, anchors_per_loc, input, f)))
}

/// Full per-component accounting of a detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlopsBreakdown {
    pub input: InputSize,
    pub macs: PerComponent<u64>,
    pub params: PerComponent<u64>,
    pub total_macs: u64,
    pub total_params: u64,
    /// Each component's share of `total_macs`.
    pub ratios: PerComponent<f64>,
}

impl FlopsBreakdown {
    fn from_fragment(input: InputSize, frag: Fragment) -> Self {
        let total = frag.macs.total();
        let mut ratios = PerComponent::<f64>::default();
        if total > 0 {
            for c in Component::ALL {
                ratios[c] = frag.macs[c] as f64 / total as f64;
            }
        }
        FlopsBreakdown {
            input,
            macs: frag.macs,
            params: frag.params,
            total_macs: total,
            total_params: frag.params.total(),
            ratios,
        }
    }

    pub fn gmacs(&self) -> f64 {
        self.total_macs as f64 / 1e9
    }

    pub fn mparams(&self) -> f64 {
        self.total_params as f64 / 1e6
    }
}

pub fn detector_flops(arch: &DetectorArch, input: InputSize) -> Result<FlopsBreakdown> {
    arch.validate()?;
    Ok(detector_flops_unchecked(arch, input))
}

pub(crate) fn detector_flops_unchecked(arch: &DetectorArch, input: InputSize) -> FlopsBreakdown {
    FlopsBreakdown::from_fragment(input, Fragment::collect(|f| walk_detector(arch, input, f)))
}

/// Per-component parameter counts.
pub fn params_count(arch: &DetectorArch) -> Result<PerComponent<u64>> {
    // parameters do not depend on the input size
    Ok(detector_flops(arch, InputSize::VGA)?.params)
}

/// Computation ratios grouped the way the search analyses them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentRatios {
    /// Share of total for backbone / neck / head.
    pub backbone: f64,
    pub neck: f64,
    pub head: f64,
    /// Share of the backbone for stem, C2..C5.
    pub stages: [f64; 5],
    /// stem + C2 + C3 share of the backbone.
    pub shallow: f64,
    /// C4 + C5 share of the backbone.
    pub deep: f64,
}

pub fn component_ratios(b: &FlopsBreakdown) -> Result<ComponentRatios> {
    let total = b.macs.total();
    let backbone = b.macs.backbone();
    if total == 0 || backbone == 0 {
        return Err(Error::InvalidArgument("component ratios need non-zero macs".into()));
    }
    let stage = Component::BACKBONE.map(|c| b.macs[c] as f64 / backbone as f64);
    let shallow_macs = b.macs.stem + b.macs.c2 + b.macs.c3;
    let deep_macs = b.macs.c4 + b.macs.c5;
    let t = total as f64;
    Ok(ComponentRatios {
        backbone: backbone as f64 / t,
        neck: b.macs.neck as f64 / t,
        head: b.macs.head as f64 / t,
        stages: stage,
        shallow: shallow_macs as f64 / backbone as f64,
        deep: deep_macs as f64 / backbone as f64,
    })
}

/// One row of the debug layer listing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerRecord {
    pub layer_name: String,
    pub in_ch: u32,
    pub out_ch: u32,
    pub kernel: u32,
    pub stride: u32,
    pub out_h: u32,
    pub out_w: u32,
    pub macs: u64,
    pub params: u64,
}

pub fn layer_listing(arch: &DetectorArch, input: InputSize) -> Result<Vec<LayerRecord>> {
    arch.validate()?;
    let mut rows = Vec::new();
    walk_detector(arch, input, &mut |v| {
        rows.push(LayerRecord {
            layer_name: v.tag.to_string(),
            in_ch: v.conv.in_ch,
            out_ch: v.conv.out_ch,
            kernel: v.conv.kernel,
            stride: v.conv.stride,
            out_h: v.conv.out_h,
            out_w: v.conv.out_w,
            macs: v.conv.macs(),
            params: v.params(),
        })
    });
    Ok(rows)
}

pub fn write_layer_csv<W: Write>(rows: &[LayerRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<layer csv>", e))?;
    Ok(())
}
