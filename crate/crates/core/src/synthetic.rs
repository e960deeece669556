//! Seeded WIDER-like synthetic annotations for tests and demos.
//!
//! Face sides are log-normal with a small median so that, like the real
//! data, most faces fall below 32 px once images are resized to VGA.

use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::widerface::{FaceBox, FaceDataset, ImageAnnotation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub images: usize,
    /// Mean faces per image (at least one face per image).
    pub mean_faces: f64,
    /// Median face width in original-image pixels.
    pub median_side: f64,
    /// Standard deviation of `ln(width)`.
    pub sigma_log: f64,
    pub width: u32,
    pub min_height: u32,
    pub max_height: u32,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            images: 500,
            mean_faces: 12.0,
            median_side: 25.0,
            sigma_log: 0.9,
            width: 1024,
            min_height: 600,
            max_height: 1400,
        }
    }
}

pub fn synthetic_dataset(config: &SyntheticConfig, seed: u64) -> Result<FaceDataset> {
    if !(config.mean_faces >= 1.0 && config.median_side > 0.0 && config.sigma_log >= 0.0)
        || config.width < 16
        || config.min_height < 16
        || config.min_height > config.max_height
    {
        return Err(Error::InvalidArgument("invalid synthetic dataset parameters".into()));
    }
    let sides = LogNormal::new(config.median_side.ln(), config.sigma_log)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let extra = (config.mean_faces > 1.0)
        .then(|| Poisson::new(config.mean_faces - 1.0))
        .transpose()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let images = (0..config.images)
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let w = config.width;
            let h = rng.random_range(config.min_height..=config.max_height);
            let count = 1 + extra.map_or(0, |p| p.sample(&mut rng) as usize);
            let faces = (0..count)
                .map(|_| {
                    let fw = (sides.sample(&mut rng).round() as i32).clamp(1, w as i32 / 2);
                    let aspect = rng.random_range(1.0..1.5);
                    let fh = ((fw as f64 * aspect).round() as i32).clamp(1, h as i32 / 2);
                    let x = rng.random_range(0..=w as i32 - fw);
                    let y = rng.random_range(0..=h as i32 - fh);
                    FaceBox::new(x, y, fw, fh)
                })
                .collect();
            ImageAnnotation {
                relative_path: format!("synthetic/{i:05}.jpg"),
                width: Some(w),
                height: Some(h),
                faces,
            }
        })
        .collect();
    Ok(FaceDataset {
        images,
        split_label: "synthetic".into(),
    })
}
