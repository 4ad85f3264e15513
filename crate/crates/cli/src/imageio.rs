//! PNG and binary PPM input, PNG output with fixed encoder settings.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use ocrforge_core::{AlphaMask, RasterImage};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}: not a PNG or binary PPM file")]
    UnknownFormat(PathBuf),
    #[error("{path}: {reason}")]
    Decode { path: PathBuf, reason: String },
    #[error("{path}: mask is {actual:?}, expected {expected:?}")]
    MaskSize { path: PathBuf, expected: (u32, u32), actual: (u32, u32) },
}

/// Encode with fixed compression and filter so equal pixels give equal bytes.
pub fn encode_png(img: &RasterImage) -> Vec<u8> {
    encode_raw(img.width(), img.height(), png::ColorType::Rgb, img.pixels())
}

pub fn encode_mask_png(mask: &AlphaMask) -> Vec<u8> {
    encode_raw(mask.width(), mask.height(), png::ColorType::Grayscale, mask.values())
}

fn encode_raw(w: u32, h: u32, color: png::ColorType, data: &[u8]) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut buf, w, h);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Fast);
        enc.set_filter(png::Filter::Up);
        let mut writer = enc.write_header().expect("in-memory PNG header");
        writer.write_image_data(data).expect("in-memory PNG body");
    }
    buf
}

pub fn write_png(path: &Path, img: &RasterImage) -> Result<(), ImageIoError> {
    fs::write(path, encode_png(img)).map_err(|source| ImageIoError::Io { path: path.to_path_buf(), source })
}

struct Decoded {
    width: u32,
    height: u32,
    channels: usize,
    data: Vec<u8>,
}

fn decode_png(path: &Path, bytes: Vec<u8>) -> Result<Decoded, ImageIoError> {
    let bad = |e: png::DecodingError| ImageIoError::Decode { path: path.to_path_buf(), reason: e.to_string() };
    let mut dec = png::Decoder::new(Cursor::new(bytes));
    dec.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = dec.read_info().map_err(bad)?;
    let size = reader.output_buffer_size().ok_or_else(|| ImageIoError::Decode {
        path: path.to_path_buf(),
        reason: "image too large".into(),
    })?;
    let mut data = vec![0; size];
    let info = reader.next_frame(&mut data).map_err(bad)?;
    data.truncate(info.buffer_size());
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => {
            return Err(ImageIoError::Decode { path: path.to_path_buf(), reason: "unexpanded palette".into() })
        }
    };
    Ok(Decoded { width: info.width, height: info.height, channels, data })
}

fn ppm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

fn decode_ppm(path: &Path, bytes: &[u8]) -> Result<Decoded, ImageIoError> {
    let bad = |reason: &str| ImageIoError::Decode { path: path.to_path_buf(), reason: reason.into() };
    let mut pos = 2;
    let mut num = || -> Result<u32, ImageIoError> {
        let t = ppm_token(bytes, &mut pos).ok_or_else(|| bad("truncated header"))?;
        std::str::from_utf8(t).ok().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad header number"))
    };
    let (w, h, maxval) = (num()?, num()?, num()?);
    if maxval != 255 {
        return Err(bad("only 8-bit PPM is supported"));
    }
    // exactly one whitespace byte separates the header from the raster
    let start = pos + 1;
    let len = w as usize * h as usize * 3;
    let data = bytes.get(start..start + len).ok_or_else(|| bad("truncated raster"))?.to_vec();
    Ok(Decoded { width: w, height: h, channels: 3, data })
}

fn decode_any(path: &Path) -> Result<Decoded, ImageIoError> {
    let bytes = fs::read(path).map_err(|source| ImageIoError::Io { path: path.to_path_buf(), source })?;
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(path, bytes)
    } else if bytes.starts_with(b"P6") {
        decode_ppm(path, &bytes)
    } else {
        Err(ImageIoError::UnknownFormat(path.to_path_buf()))
    }
}

/// Read an RGB image from PNG (gray, RGB or RGBA; alpha dropped) or P6 PPM.
pub fn read_image(path: &Path) -> Result<RasterImage, ImageIoError> {
    let d = decode_any(path)?;
    let mut rgb = Vec::with_capacity(d.width as usize * d.height as usize * 3);
    for px in d.data.chunks_exact(d.channels) {
        match d.channels {
            1 | 2 => rgb.extend_from_slice(&[px[0], px[0], px[0]]),
            _ => rgb.extend_from_slice(&px[..3]),
        }
    }
    RasterImage::from_raw(d.width, d.height, rgb)
        .map_err(|e| ImageIoError::Decode { path: path.to_path_buf(), reason: e.to_string() })
}

/// Read an 8-bit grayscale mask PNG (255 = text). Colour inputs use their
/// first channel.
pub fn read_mask(path: &Path, expected: (u32, u32)) -> Result<AlphaMask, ImageIoError> {
    let d = decode_any(path)?;
    if (d.width, d.height) != expected {
        return Err(ImageIoError::MaskSize { path: path.to_path_buf(), expected, actual: (d.width, d.height) });
    }
    let values = d.data.chunks_exact(d.channels).map(|px| px[0]).collect();
    AlphaMask::from_raw(d.width, d.height, values)
        .map_err(|e| ImageIoError::Decode { path: path.to_path_buf(), reason: e.to_string() })
}
