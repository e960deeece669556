//! Published reference values, shipped so reports can show them next to
//! locally computed results.
//!
//! The ranges were estimated from 320 detectors trained on WIDER FACE for
//! 80 epochs each. They cannot be recomputed here without those measured
//! APs, so nothing in this crate checks against them; the report renderer
//! only displays them.

use crate::bootstrap::RatioComponent;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRange {
    pub component: RatioComponent,
    pub low: f64,
    pub high: f64,
}

const fn r(component: RatioComponent, low: f64, high: f64) -> ReferenceRange {
    ReferenceRange { component, low, high }
}

/// Backbone-only search at 2.5 GFlops. Stage shares are of the backbone.
pub const STEP1_RANGES: [ReferenceRange; 7] = [
    r(RatioComponent::Stem, 0.10, 0.20),
    r(RatioComponent::C2, 0.24, 0.39),
    r(RatioComponent::C3, 0.26, 0.47),
    r(RatioComponent::C4, 0.04, 0.15),
    r(RatioComponent::C5, 0.01, 0.16),
    r(RatioComponent::Shallow, 0.72, 0.91),
    r(RatioComponent::Deep, 0.09, 0.28),
];

/// Whole-detector search at 2.5 GFlops. Shares are of the detector.
pub const STEP2_RANGES: [ReferenceRange; 3] = [
    r(RatioComponent::Backbone, 0.67, 0.88),
    r(RatioComponent::Neck, 0.01, 0.07),
    r(RatioComponent::Head, 0.10, 0.26),
];

pub fn lookup(component: RatioComponent) -> Option<ReferenceRange> {
    STEP1_RANGES
        .iter()
        .chain(STEP2_RANGES.iter())
        .find(|x| x.component == component)
        .copied()
}

/// Face-scale fractions on the validation split at VGA resolution.
pub const VAL_SCALE_CDF: [(f64, f64); 3] = [(32.0, 0.7893), (16.0, 0.5185), (8.0, 0.1336)];

/// Positive anchors per side within one training epoch, baseline crop
/// policy versus the enlarged range.
pub const EPOCH_POSITIVES: [(u32, f64, f64); 2] = [(16, 72_300.0, 118_300.0), (32, 95_900.0, 115_100.0)];

/// Published multiply-adds (G) and parameters (M) of the baseline detectors.
pub const BASELINE_COST: [(&str, f64, f64); 4] = [
    ("resnet-2.5gf", 2.57, 1.62),
    ("resnet-10gf", 10.18, 6.85),
    ("resnet-34gf", 34.16, 24.81),
    ("mobilenet-0.5gf", 0.507, 0.37),
];
