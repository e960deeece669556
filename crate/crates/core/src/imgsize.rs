//! Image dimensions from JPEG / PNG headers without decoding pixels.

use thiserror::Error;

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeaderError {
    #[error("unknown image format (magic bytes {0:02x?})")]
    UnknownFormat(Vec<u8>),
    #[error("truncated {0} header")]
    Truncated(&'static str),
    #[error("no SOF marker before start of scan")]
    SofNotFound,
    #[error("malformed {0} header: {1}")]
    Malformed(&'static str, &'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Jpeg,
    Png,
}

pub fn sniff(bytes: &[u8]) -> Option<ImageFormat> {
    if bytes.starts_with(&[0xff, 0xd8]) {
        Some(ImageFormat::Jpeg)
    } else if bytes.starts_with(&PNG_SIGNATURE) {
        Some(ImageFormat::Png)
    } else {
        None
    }
}

/// Returns `(width, height)` read from the image header.
pub fn read_image_dims(bytes: &[u8]) -> Result<(u32, u32), HeaderError> {
    match sniff(bytes) {
        Some(ImageFormat::Png) => png_dims(bytes),
        Some(ImageFormat::Jpeg) => jpeg_dims(bytes),
        None => Err(HeaderError::UnknownFormat(
            bytes.iter().take(8).copied().collect(),
        )),
    }
}

fn be_u16(b: &[u8]) -> u16 {
    u16::from_be_bytes([b[0], b[1]])
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

fn png_dims(bytes: &[u8]) -> Result<(u32, u32), HeaderError> {
    // signature(8) length(4) "IHDR"(4) width(4) height(4)
    let ihdr = bytes.get(8..24).ok_or(HeaderError::Truncated("PNG"))?;
    if &ihdr[4..8] != b"IHDR" {
        return Err(HeaderError::Malformed("PNG", "first chunk is not IHDR"));
    }
    let (w, h) = (be_u32(&ihdr[8..12]), be_u32(&ihdr[12..16]));
    if w == 0 || h == 0 {
        return Err(HeaderError::Malformed("PNG", "zero dimension"));
    }
    Ok((w, h))
}

/// Start-of-frame markers carrying frame dimensions. 0xC4 (DHT), 0xC8 (JPG)
/// and 0xCC (DAC) share the range but are not frame headers.
fn is_sof(marker: u8) -> bool {
    matches!(marker, 0xc0..=0xcf) && !matches!(marker, 0xc4 | 0xc8 | 0xcc)
}

fn jpeg_dims(bytes: &[u8]) -> Result<(u32, u32), HeaderError> {
    let mut pos = 2;
    loop {
        // Markers may be preceded by any number of 0xFF fill bytes.
        while bytes.get(pos) == Some(&0xff) && bytes.get(pos + 1) == Some(&0xff) {
            pos += 1;
        }
        let prefix = *bytes.get(pos).ok_or(HeaderError::Truncated("JPEG"))?;
        let marker = *bytes.get(pos + 1).ok_or(HeaderError::Truncated("JPEG"))?;
        if prefix != 0xff {
            return Err(HeaderError::Malformed("JPEG", "expected marker"));
        }
        pos += 2;
        match marker {
            // standalone markers: TEM, RSTn, SOI
            0x01 | 0xd0..=0xd8 => continue,
            0xd9 | 0xda => return Err(HeaderError::SofNotFound),
            _ => {}
        }
        let len = bytes
            .get(pos..pos + 2)
            .map(be_u16)
            .ok_or(HeaderError::Truncated("JPEG"))? as usize;
        if len < 2 {
            return Err(HeaderError::Malformed("JPEG", "segment length < 2"));
        }
        if is_sof(marker) {
            // length(2) precision(1) height(2) width(2)
            let frame = bytes
                .get(pos + 2..pos + 7)
                .ok_or(HeaderError::Truncated("JPEG"))?;
            let h = be_u16(&frame[1..3]) as u32;
            let w = be_u16(&frame[3..5]) as u32;
            if w == 0 || h == 0 {
                return Err(HeaderError::Malformed("JPEG", "zero dimension in SOF"));
            }
            return Ok((w, h));
        }
        pos += len;
    }
}
