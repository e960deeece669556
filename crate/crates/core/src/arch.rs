//! Detector architecture descriptors.
//!
//! A detector is a backbone (stem plus four stages C2..C5 at strides
//! 4/8/16/32), a path-aggregation neck over C3..C5 with `n` channels, and a
//! head of `m` stacked 3x3 convolutions with `h` channels shared across the
//! three pyramid levels.
//!
//! Structural invariants are checked here. The sampling limits
//! (`d <= 24`, `w <= 512`, ...) belong to [`crate::search::SearchSpaceSpec`],
//! so hand-written baselines such as a full-width ResNet-50 stay expressible.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Feature strides carrying anchors.
pub const STRIDES: [u32; 3] = [8, 16, 32];
/// Anchor sides tiled at each stride in [`STRIDES`].
pub const ANCHOR_SIDES: [[u32; 2]; 3] = [[16, 32], [64, 128], [256, 512]];
pub const ANCHOR_RATIO: f64 = 1.0;
pub const BOTTLENECK_EXPANSION: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// Two 3x3 convolutions.
    Basic,
    /// 1x1 reduce, 3x3, 1x1 expand with expansion ratio 4.
    Bottleneck,
    /// 3x3 depthwise followed by 1x1 pointwise.
    Depthwise,
}

impl BlockKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlockKind::Basic => "basic",
            BlockKind::Bottleneck => "bottleneck",
            BlockKind::Depthwise => "depthwise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(u32, u32)", into = "(u32, u32)")]
pub struct Stage {
    pub depth: u32,
    pub width: u32,
}

impl Stage {
    pub const fn new(depth: u32, width: u32) -> Self {
        Stage { depth, width }
    }
}

impl From<(u32, u32)> for Stage {
    fn from((depth, width): (u32, u32)) -> Self {
        Stage { depth, width }
    }
}

impl From<Stage> for (u32, u32) {
    fn from(s: Stage) -> Self {
        (s.depth, s.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackboneConfig {
    pub block: BlockKind,
    pub stages: [Stage; 4],
}

impl BackboneConfig {
    pub fn widths(&self) -> [u32; 4] {
        self.stages.map(|s| s.width)
    }

    pub fn depths(&self) -> [u32; 4] {
        self.stages.map(|s| s.depth)
    }

    /// Channels leaving the stem: the block width of the first C2 block,
    /// i.e. `w1` for basic/depthwise blocks and `w1 / 4` for bottlenecks.
    pub fn stem_width(&self) -> u32 {
        self.block_width(0)
    }

    /// Internal width of the blocks in stage `i` (the 3x3 conv width).
    pub fn block_width(&self, i: usize) -> u32 {
        match self.block {
            BlockKind::Bottleneck => self.stages[i].width / BOTTLENECK_EXPANSION,
            _ => self.stages[i].width,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.stages.iter().enumerate() {
            let field = |f: &str| format!("backbone.stages[{i}].{f}");
            if s.depth == 0 {
                return Err(Error::arch(field("depth"), "must be at least 1"));
            }
            if self.block == BlockKind::Bottleneck && s.width % BOTTLENECK_EXPANSION != 0 {
                return Err(Error::arch(
                    field("width"),
                    format!("{} is not divisible by the bottleneck expansion 4", s.width),
                ));
            }
            if s.width < 8 || s.width % 8 != 0 {
                return Err(Error::arch(
                    field("width"),
                    format!("{} must be a positive multiple of 8", s.width),
                ));
            }
            if i > 0 && s.width < self.stages[i - 1].width {
                return Err(Error::arch(
                    field("width"),
                    format!(
                        "{} is narrower than the previous stage ({})",
                        s.width,
                        self.stages[i - 1].width
                    ),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeckConfig {
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadConfig {
    pub h: u32,
    pub m: u32,
    #[serde(default)]
    pub depthwise: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorArch {
    pub backbone: BackboneConfig,
    pub neck: NeckConfig,
    pub head: HeadConfig,
}

fn check_channels(field: &str, v: u32) -> Result<()> {
    if v < 8 || !v.is_multiple_of(8) {
        return Err(Error::arch(field, format!("{v} must be a positive multiple of 8")));
    }
    Ok(())
}

impl DetectorArch {
    pub fn validate(&self) -> Result<()> {
        self.backbone.validate()?;
        check_channels("neck.n", self.neck.n)?;
        check_channels("head.h", self.head.h)?;
        if self.head.m == 0 {
            return Err(Error::arch("head.m", "must be at least 1"));
        }
        Ok(())
    }

    /// Parses and validates the arch JSON schema, reporting the field path on
    /// schema violations.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let arch: DetectorArch = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config {
                path,
                message: e.into_inner().to_string(),
            }
        })?;
        arch.validate()?;
        Ok(arch)
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("arch serialization is infallible")
    }

    pub fn id(&self) -> ArchId {
        let digest = Sha256::digest(self.to_canonical_json().as_bytes());
        ArchId(hex::encode(&digest[..8]))
    }
}

/// Content hash of the canonical arch JSON.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArchId(pub String);

impl fmt::Display for ArchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl ArchId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Hand-designed baselines for the four compute regimes.
pub mod baselines {
    use super::*;

    const fn stages(d: [u32; 4], w: [u32; 4]) -> [Stage; 4] {
        [
            Stage::new(d[0], w[0]),
            Stage::new(d[1], w[1]),
            Stage::new(d[2], w[2]),
            Stage::new(d[3], w[3]),
        ]
    }

    const RESNET34_DEPTHS: [u32; 4] = [3, 4, 6, 3];

    /// ResNet34 x0.25, neck 48, head [96, 96].
    pub fn resnet_2_5gf() -> DetectorArch {
        DetectorArch {
            backbone: BackboneConfig {
                block: BlockKind::Basic,
                stages: stages(RESNET34_DEPTHS, [16, 32, 64, 128]),
            },
            neck: NeckConfig { n: 48 },
            head: HeadConfig { h: 96, m: 2, depthwise: false },
        }
    }

    /// ResNet34 x0.5, neck 128, head [160, 160].
    pub fn resnet_10gf() -> DetectorArch {
        DetectorArch {
            backbone: BackboneConfig {
                block: BlockKind::Basic,
                stages: stages(RESNET34_DEPTHS, [32, 64, 128, 256]),
            },
            neck: NeckConfig { n: 128 },
            head: HeadConfig { h: 160, m: 2, depthwise: false },
        }
    }

    /// ResNet-50, neck 128, head [256, 256].
    pub fn resnet_34gf() -> DetectorArch {
        DetectorArch {
            backbone: BackboneConfig {
                block: BlockKind::Bottleneck,
                stages: stages([3, 4, 6, 3], [256, 512, 1024, 2048]),
            },
            neck: NeckConfig { n: 128 },
            head: HeadConfig { h: 256, m: 2, depthwise: false },
        }
    }

    /// MobileNetV1 x0.25 (strides 4..32 at 32/64/128/256 channels), neck 32,
    /// depthwise head [80, 80].
    pub fn mobilenet_0_5gf() -> DetectorArch {
        DetectorArch {
            backbone: BackboneConfig {
                block: BlockKind::Depthwise,
                stages: stages([2, 2, 6, 2], [32, 64, 128, 256]),
            },
            neck: NeckConfig { n: 32 },
            head: HeadConfig { h: 80, m: 2, depthwise: true },
        }
    }

    pub const NAMES: [&str; 4] = ["resnet-2.5gf", "resnet-10gf", "resnet-34gf", "mobilenet-0.5gf"];

    pub fn by_name(name: &str) -> Option<DetectorArch> {
        match name.to_ascii_lowercase().as_str() {
            "resnet-2.5gf" => Some(resnet_2_5gf()),
            "resnet-10gf" => Some(resnet_10gf()),
            "resnet-34gf" => Some(resnet_34gf()),
            "mobilenet-0.5gf" => Some(mobilenet_0_5gf()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_schema_round_trip() {
        let arch = baselines::resnet_2_5gf();
        let json = arch.to_canonical_json();
        assert_eq!(
            json,
            r#"{"backbone":{"block":"basic","stages":[[3,16],[4,32],[6,64],[3,128]]},"neck":{"n":48},"head":{"h":96,"m":2,"depthwise":false}}"#
        );
        assert_eq!(DetectorArch::from_json(&json).unwrap(), arch);
    }

    #[test]
    fn ids_are_content_hashes() {
        let a = baselines::resnet_2_5gf();
        let mut b = a;
        assert_eq!(a.id(), b.id());
        b.head.m = 3;
        assert_ne!(a.id(), b.id());
        assert_eq!(a.id().as_str().len(), 16);
    }

    #[test]
    fn schema_errors_carry_field_path() {
        let text = r#"{"backbone":{"block":"basic","stages":[[3,16],[4,32],[6,64],[3,128]]},"neck":{"n":48},"head":{"h":96,"m":2,"extra":1}}"#;
        match DetectorArch::from_json(text) {
            Err(Error::Config { path, .. }) => assert!(path.starts_with("head"), "{path}"),
            other => panic!("unexpected {other:?}"),
        }
        let text = r#"{"backbone":{"block":"basic","stages":[[3,16],[4,32],[6,64]]},"neck":{"n":48},"head":{"h":96,"m":2}}"#;
        assert!(matches!(DetectorArch::from_json(text), Err(Error::Config { .. })));
    }

    #[test]
    fn invariant_violations() {
        let mut a = baselines::resnet_2_5gf();
        a.backbone.stages[2].width = 24;
        assert!(matches!(a.validate(), Err(Error::InvalidArch { field, .. }) if field == "backbone.stages[2].width"));
        let mut a = baselines::resnet_2_5gf();
        a.backbone.stages[0].depth = 0;
        assert!(a.validate().is_err());
        let mut a = baselines::resnet_2_5gf();
        a.neck.n = 12;
        assert!(a.validate().is_err());
        let mut a = baselines::resnet_2_5gf();
        a.head.m = 0;
        assert!(a.validate().is_err());
    }

    #[test]
    fn bottleneck_width_guard() {
        let mut a = baselines::resnet_34gf();
        a.backbone.stages[0].width = 250;
        match a.validate() {
            Err(Error::InvalidArch { reason, .. }) => assert!(reason.contains("bottleneck"), "{reason}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stem_width_follows_block_width() {
        assert_eq!(baselines::resnet_2_5gf().backbone.stem_width(), 16);
        assert_eq!(baselines::resnet_34gf().backbone.stem_width(), 64);
    }
}
