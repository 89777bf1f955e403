//! 16-bit single-channel depth PNGs.

use std::io::{Cursor, Write};
use std::path::Path;

use super::{create_file, read_file, IoError};
use crate::geometry::CameraIntrinsics;
use crate::vote_map::DepthFrame;

/// Depth in millimetres, row-major; zero marks a missing reading.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: u32,
    pub height: u32,
    pub depth: Vec<f64>,
}

impl DepthImage {
    pub fn into_frame(self, intrinsics: CameraIntrinsics) -> Result<DepthFrame, IoError> {
        if intrinsics.width != self.width || intrinsics.height != self.height {
            return Err(IoError::DepthFormat(format!(
                "{}x{} image does not match {}x{} intrinsics",
                self.width, self.height, intrinsics.width, intrinsics.height
            )));
        }
        Ok(DepthFrame::new(intrinsics, self.depth)?)
    }
}

/// Decodes a 16-bit grayscale PNG; raw values are multiplied by `scale`
/// (mm per unit).
pub fn decode_depth_png16(bytes: &[u8], scale: f64) -> Result<DepthImage, IoError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(IoError::Core(crate::error::Error::param("depth_scale", "must be positive")));
    }
    let bad = |e: png::DecodingError| IoError::DepthFormat(e.to_string());
    let mut reader = png::Decoder::new(Cursor::new(bytes)).read_info().map_err(bad)?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Sixteen {
        return Err(IoError::DepthFormat(format!(
            "expected 16-bit grayscale, found {:?} at {:?} bits",
            info.color_type, info.bit_depth
        )));
    }
    let (width, height) = (info.width, info.height);
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| IoError::DepthFormat("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(bad)?;
    let data = &buf[..frame.buffer_size()];
    let depth = data
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale)
        .collect::<Vec<_>>();
    if depth.len() != width as usize * height as usize {
        return Err(IoError::DepthFormat("pixel count does not match dimensions".into()));
    }
    Ok(DepthImage { width, height, depth })
}

pub fn load_depth_png16(path: impl AsRef<Path>, scale: f64) -> Result<DepthImage, IoError> {
    decode_depth_png16(&read_file(path.as_ref())?, scale)
}

/// Encodes depth divided by `scale` and rounded; values outside the
/// 16-bit range are rejected.
pub fn encode_depth_png16(w: impl Write, image: &DepthImage, scale: f64) -> Result<(), IoError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(IoError::Core(crate::error::Error::param("depth_scale", "must be positive")));
    }
    if image.depth.len() != image.width as usize * image.height as usize {
        return Err(IoError::DepthFormat("pixel count does not match dimensions".into()));
    }
    let mut data = Vec::with_capacity(image.depth.len() * 2);
    for d in &image.depth {
        let raw = (d / scale).round();
        if !(0.0..=u16::MAX as f64).contains(&raw) {
            return Err(IoError::DepthFormat(format!("depth {d} does not fit 16 bits at scale {scale}")));
        }
        data.extend_from_slice(&(raw as u16).to_be_bytes());
    }
    let bad = |e: png::EncodingError| IoError::DepthFormat(e.to_string());
    let mut enc = png::Encoder::new(w, image.width, image.height);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Sixteen);
    let mut writer = enc.write_header().map_err(bad)?;
    writer.write_image_data(&data).map_err(bad)?;
    writer.finish().map_err(bad)?;
    Ok(())
}

pub fn save_depth_png16(path: impl AsRef<Path>, image: &DepthImage, scale: f64) -> Result<(), IoError> {
    let mut f = create_file(path.as_ref())?;
    encode_depth_png16(&mut f, image, scale)?;
    f.flush()?;
    Ok(())
}
