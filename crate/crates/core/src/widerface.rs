//! WIDER FACE `bbx_gt` annotation parsing, dimension resolution and export.
//!
//! A ground-truth file is a sequence of records:
//!
//! ```text
//! 0--Parade/0_Parade_marchingband_1_849.jpg
//! 1
//! 449 330 122 149 0 0 0 0 0 0
//! ```
//!
//! i.e. a relative image path, a face count, and one line of ten integers per
//! face (`x y w h blur expression illumination invalid occlusion pose`). A
//! record with count 0 is still followed by one all-zero face line.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgsize::{self, HeaderError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FaceBox {
    pub x: i32,
    pub y: i32,
    pub w: i32,
    pub h: i32,
    pub blur: u8,
    pub expression: u8,
    pub illumination: u8,
    pub invalid: u8,
    pub occlusion: u8,
    pub pose: u8,
}

impl FaceBox {
    pub fn new(x: i32, y: i32, w: i32, h: i32) -> Self {
        FaceBox {
            x,
            y,
            w,
            h,
            ..Default::default()
        }
    }

    fn fields(&self) -> [i32; 10] {
        [
            self.x,
            self.y,
            self.w,
            self.h,
            self.blur as i32,
            self.expression as i32,
            self.illumination as i32,
            self.invalid as i32,
            self.occlusion as i32,
            self.pose as i32,
        ]
    }

    fn from_fields(f: [i32; 10]) -> Self {
        let code = |v: i32| v.clamp(0, u8::MAX as i32) as u8;
        FaceBox {
            x: f[0],
            y: f[1],
            w: f[2],
            h: f[3],
            blur: code(f[4]),
            expression: code(f[5]),
            illumination: code(f[6]),
            invalid: code(f[7]),
            occlusion: code(f[8]),
            pose: code(f[9]),
        }
    }

    /// Names of attribute codes outside the documented ranges.
    pub fn out_of_range_attributes(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        let checks = [
            ("blur", self.blur, 2),
            ("expression", self.expression, 1),
            ("illumination", self.illumination, 1),
            ("invalid", self.invalid, 1),
            ("occlusion", self.occlusion, 2),
            ("pose", self.pose, 1),
        ];
        for (name, v, max) in checks {
            if v > max {
                bad.push(name);
            }
        }
        bad
    }

    pub fn is_degenerate(&self) -> bool {
        self.w <= 0 || self.h <= 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageAnnotation {
    pub relative_path: String,
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub faces: Vec<FaceBox>,
}

impl ImageAnnotation {
    pub fn dims(&self) -> Option<(u32, u32)> {
        Some((self.width?, self.height?))
    }

    pub fn faces_with<'a>(&'a self, policy: &'a FacePolicy) -> impl Iterator<Item = &'a FaceBox> {
        self.faces.iter().filter(move |f| policy.keeps(f))
    }
}

/// Which faces downstream statistics consume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacePolicy {
    pub drop_invalid: bool,
    pub drop_degenerate: bool,
}

impl Default for FacePolicy {
    fn default() -> Self {
        FacePolicy {
            drop_invalid: true,
            drop_degenerate: true,
        }
    }
}

impl FacePolicy {
    pub const UNFILTERED: FacePolicy = FacePolicy {
        drop_invalid: false,
        drop_degenerate: false,
    };

    pub fn keeps(&self, face: &FaceBox) -> bool {
        !(self.drop_invalid && face.invalid == 1) && !(self.drop_degenerate && face.is_degenerate())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FaceDataset {
    pub images: Vec<ImageAnnotation>,
    pub split_label: String,
}

impl FaceDataset {
    pub fn face_count(&self) -> usize {
        self.images.iter().map(|i| i.faces.len()).sum()
    }

    pub fn is_resolved(&self) -> bool {
        self.images.iter().all(|i| i.dims().is_some())
    }

    /// Serializes back to `bbx_gt` text.
    pub fn to_bbx_gt(&self) -> String {
        let mut out = String::new();
        for img in &self.images {
            let _ = writeln!(out, "{}", img.relative_path);
            let _ = writeln!(out, "{}", img.faces.len());
            if img.faces.is_empty() {
                out.push_str("0 0 0 0 0 0 0 0 0 0\n");
            }
            for face in &img.faces {
                let f = face.fields();
                let line: Vec<String> = f.iter().map(i32::to_string).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let images = self
            .images
            .iter()
            .map(|img| JsonImage {
                path: img.relative_path.clone(),
                width: img.width,
                height: img.height,
                faces: img.faces.iter().map(FaceBox::fields).collect(),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&JsonDataset {
            split: self.split_label.clone(),
            images,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: JsonDataset = serde_json::from_str(text)?;
        Ok(FaceDataset {
            split_label: parsed.split,
            images: parsed
                .images
                .into_iter()
                .map(|img| ImageAnnotation {
                    relative_path: img.path,
                    width: img.width,
                    height: img.height,
                    faces: img.faces.into_iter().map(FaceBox::from_fields).collect(),
                })
                .collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDataset {
    #[serde(default)]
    split: String,
    images: Vec<JsonImage>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonImage {
    path: String,
    width: Option<u32>,
    height: Option<u32>,
    faces: Vec<[i32; 10]>,
}

/// Parses a WIDER FACE `bbx_gt` file.
pub fn parse_widerface_gt(text: &str, split_label: &str) -> Result<FaceDataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .peekable();
    let mut images = Vec::new();
    let mut seen = HashSet::new();
    let mut warned = 0usize;

    loop {
        // skip blank separator lines
        while matches!(lines.peek(), Some((_, l)) if l.is_empty()) {
            lines.next();
        }
        let Some((path_line, path)) = lines.next() else {
            break;
        };
        if !seen.insert(path.to_string()) {
            return Err(Error::Parse {
                line: path_line,
                message: format!("duplicate image path {path}"),
            });
        }
        let (count_line, count_text) = lines.next().ok_or_else(|| Error::Parse {
            line: path_line,
            message: format!("record {path} truncated before face count"),
        })?;
        let count: usize = count_text.parse().map_err(|_| Error::Parse {
            line: count_line,
            message: format!("malformed face count {count_text:?}"),
        })?;
        let face_lines = count.max(1);
        let mut faces = Vec::with_capacity(count);
        for _ in 0..face_lines {
            let (line_no, text) = lines.next().ok_or_else(|| Error::Parse {
                line: count_line,
                message: format!("record {path} truncated: expected {face_lines} face line(s)"),
            })?;
            let face = parse_face_line(line_no, text)?;
            if count == 0 {
                continue;
            }
            let bad = face.out_of_range_attributes();
            if !bad.is_empty() {
                warned += 1;
                log::debug!("line {line_no}: attribute(s) out of range: {}", bad.join(", "));
            }
            faces.push(face);
        }
        images.push(ImageAnnotation {
            relative_path: path.to_string(),
            width: None,
            height: None,
            faces,
        });
    }
    if warned > 0 {
        log::warn!("{warned} face(s) carry attribute codes outside the documented ranges");
    }
    Ok(FaceDataset {
        images,
        split_label: split_label.to_string(),
    })
}

fn parse_face_line(line: usize, text: &str) -> Result<FaceBox> {
    let mut fields = [0i32; 10];
    let mut n = 0;
    for tok in text.split_whitespace() {
        if n == 10 {
            n += 1;
            break;
        }
        fields[n] = tok.parse().map_err(|_| Error::Parse {
            line,
            message: format!("non-integer face field {tok:?}"),
        })?;
        n += 1;
    }
    if n != 10 {
        let got = text.split_whitespace().count();
        return Err(Error::Parse {
            line,
            message: format!("face line has {got} fields, expected 10"),
        });
    }
    Ok(FaceBox::from_fields(fields))
}

/// Where image dimensions come from.
#[derive(Debug, Clone, Default)]
pub struct DimensionSource {
    pub sizes_csv: Option<PathBuf>,
    pub image_root: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct SizeRow {
    path: String,
    width: u32,
    height: u32,
}

pub fn read_sizes_csv(path: &Path) -> Result<HashMap<String, (u32, u32)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = HashMap::new();
    for row in reader.deserialize() {
        let row: SizeRow = row?;
        if row.width == 0 || row.height == 0 {
            return Err(Error::InvalidArgument(format!(
                "{}: zero dimension for {}",
                path.display(),
                row.path
            )));
        }
        out.insert(row.path, (row.width, row.height));
    }
    Ok(out)
}

pub fn write_sizes_csv(dataset: &FaceDataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["path", "width", "height"])?;
    for img in &dataset.images {
        if let Some((w, h)) = img.dims() {
            writer.write_record([img.relative_path.clone(), w.to_string(), h.to_string()])?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads dimensions of one image file from its header, reading more of the
/// file only when the header does not fit in the first block.
pub fn probe_image(path: &Path) -> Result<(u32, u32)> {
    const FIRST_BLOCK: u64 = 64 * 1024;
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::new();
    (&mut file)
        .take(FIRST_BLOCK)
        .read_to_end(&mut buf)
        .map_err(|e| Error::io(path, e))?;
    match imgsize::read_image_dims(&buf) {
        Err(HeaderError::Truncated(_)) if buf.len() as u64 == FIRST_BLOCK => {
            file.read_to_end(&mut buf).map_err(|e| Error::io(path, e))?;
            Ok(imgsize::read_image_dims(&buf)?)
        }
        other => Ok(other?),
    }
}

/// Fills in width/height for every image. CSV rows take precedence over
/// probing files under `image_root`. Fails listing every unresolved path.
pub fn resolve_dimensions(mut dataset: FaceDataset, source: &DimensionSource) -> Result<FaceDataset> {
    let sizes = match &source.sizes_csv {
        Some(p) => read_sizes_csv(p)?,
        None => HashMap::new(),
    };
    let lookup = |img: &ImageAnnotation| -> std::result::Result<(u32, u32), String> {
        if let Some(&dims) = sizes.get(&img.relative_path) {
            return Ok(dims);
        }
        if let Some(dims) = img.dims() {
            return Ok(dims);
        }
        match &source.image_root {
            Some(root) => probe_image(&root.join(&img.relative_path)).map_err(|e| {
                log::debug!("{}: {e}", img.relative_path);
                img.relative_path.clone()
            }),
            None => Err(img.relative_path.clone()),
        }
    };

    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        dataset.images.par_iter().map(lookup).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = dataset.images.iter().map(lookup).collect();

    let mut missing = Vec::new();
    for (img, res) in dataset.images.iter_mut().zip(results) {
        match res {
            Ok((w, h)) => {
                img.width = Some(w);
                img.height = Some(h);
            }
            Err(path) => missing.push(path),
        }
    }
    if missing.is_empty() {
        Ok(dataset)
    } else {
        Err(Error::Unresolved(missing))
    }
}
