//! Byte-level codecs for `depth.f32`, `lidar.bin` and the PNG images.

use std::io::Cursor;
use std::path::Path;

use super::{DepthMap, FrameError, LidarPoint, LidarScan};

pub const DEPTH_MAGIC: &[u8; 4] = b"DPF1";
const DEPTH_HEADER_LEN: usize = 12;
const LIDAR_RECORD_LEN: usize = 16;

pub fn encode_depth(d: &DepthMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(DEPTH_HEADER_LEN + 4 * d.data.len());
    out.extend_from_slice(DEPTH_MAGIC);
    out.extend_from_slice(&d.width.to_le_bytes());
    out.extend_from_slice(&d.height.to_le_bytes());
    for v in &d.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a depth file. `path` is only used in error messages.
pub fn decode_depth(bytes: &[u8], path: &Path) -> Result<DepthMap, FrameError> {
    if bytes.len() < DEPTH_HEADER_LEN {
        return Err(FrameError::malformed(path, format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != DEPTH_MAGIC {
        return Err(FrameError::malformed(path, format!("bad magic {:?}", &bytes[..4])));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let expected = (width as u64) * (height as u64) * 4 + DEPTH_HEADER_LEN as u64;
    if width == 0 || height == 0 || bytes.len() as u64 != expected {
        return Err(FrameError::malformed(
            path,
            format!("{width}x{height} header needs {expected} bytes, file has {}", bytes.len()),
        ));
    }
    let data: Vec<f32> = bytes[DEPTH_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(i) = data.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        let (x, y) = (i as u32 % width, i as u32 / width);
        return Err(FrameError::invariant(path, format!("depth at pixel ({x}, {y}) is {}", data[i])));
    }
    Ok(DepthMap { width, height, data })
}

pub fn encode_lidar(scan: &LidarScan) -> Vec<u8> {
    let mut out = Vec::with_capacity(scan.points.len() * LIDAR_RECORD_LEN);
    for p in &scan.points {
        for v in [p.x, p.y, p.z, p.intensity] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_lidar(bytes: &[u8], path: &Path) -> Result<LidarScan, FrameError> {
    if !bytes.len().is_multiple_of(LIDAR_RECORD_LEN) {
        return Err(FrameError::malformed(
            path,
            format!("{} bytes is not a whole number of 16-byte points", bytes.len()),
        ));
    }
    let f = |c: &[u8]| f32::from_le_bytes(c.try_into().unwrap());
    let points: Vec<LidarPoint> = bytes
        .chunks_exact(LIDAR_RECORD_LEN)
        .map(|c| LidarPoint {
            x: f(&c[0..4]),
            y: f(&c[4..8]),
            z: f(&c[8..12]),
            intensity: f(&c[12..16]),
        })
        .collect();
    if let Some(i) = points.iter().position(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite())) {
        return Err(FrameError::invariant(path, format!("point {i} has non-finite coordinates")));
    }
    Ok(LidarScan { points })
}

pub(crate) struct PngImage {
    pub width: u32,
    pub height: u32,
    pub color: png::ColorType,
    pub data: Vec<u8>,
}

fn png_reader<'a>(bytes: &'a [u8], path: &Path) -> Result<png::Reader<Cursor<&'a [u8]>>, FrameError> {
    png::Decoder::new(Cursor::new(bytes))
        .read_info()
        .map_err(|e| FrameError::malformed(path, format!("png: {e}")))
}

fn check_8bit(info: &png::Info, path: &Path) -> Result<(), FrameError> {
    if info.bit_depth != png::BitDepth::Eight {
        return Err(FrameError::malformed(path, format!("expected 8-bit png, got {:?}", info.bit_depth)));
    }
    Ok(())
}

/// Header-only read: dimensions and color type.
pub(crate) fn read_png_header(bytes: &[u8], path: &Path) -> Result<(u32, u32, png::ColorType), FrameError> {
    let reader = png_reader(bytes, path)?;
    let info = reader.info();
    check_8bit(info, path)?;
    Ok((info.width, info.height, info.color_type))
}

pub(crate) fn decode_png(bytes: &[u8], path: &Path) -> Result<PngImage, FrameError> {
    let mut reader = png_reader(bytes, path)?;
    check_8bit(reader.info(), path)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| FrameError::malformed(path, "png too large"))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| FrameError::malformed(path, format!("png: {e}")))?;
    buf.truncate(info.buffer_size());
    Ok(PngImage { width: info.width, height: info.height, color: info.color_type, data: buf })
}

pub(crate) fn encode_png(width: u32, height: u32, color: png::ColorType, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().expect("png header to memory");
        w.write_image_data(data).expect("png data to memory");
    }
    out
}
