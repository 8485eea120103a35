//! File formats for depth images, occlusion masks, and overlays.
//!
//! Depth goes to disk as 16-bit single-channel PNG in millimeters with 0 as
//! the invalid sentinel, matching common RGB-D sensor recordings. A plain
//! text format (`.txt`) keeps full f64 precision for fixtures. Masks are
//! 8-bit single-channel PNG with one code point per label.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::depth::{depth_is_valid, DepthImage};
use crate::occlusion::{OcclusionLabel, OcclusionMask};

#[derive(Debug, Error)]
pub enum ImgIoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: png: {source}")]
    PngDecode {
        path: String,
        source: png::DecodingError,
    },
    #[error("{path}: png: {source}")]
    PngEncode {
        path: String,
        source: png::EncodingError,
    },
    #[error("{path}: expected {expected}, found {found}")]
    Format {
        path: String,
        expected: String,
        found: String,
    },
    #[error("unsupported image extension '{0}' (use .png or .txt)")]
    UnsupportedExtension(String),
    #[error("{path}: mask byte {value} at pixel {index} is not a known label")]
    BadMaskValue {
        path: String,
        value: u8,
        index: usize,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ImgIoError + '_ {
    move |source| ImgIoError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Millimeter value stored for a depth sample; valid depths clamp into
/// `[1, 65535]` so they cannot collide with the invalid 0.
fn depth_to_mm(d: f64) -> u16 {
    if !depth_is_valid(d) {
        return 0;
    }
    let mm = (d * 1000.0).round();
    mm.clamp(1.0, 65535.0) as u16
}

/// Writes a depth image as 16-bit grayscale PNG in millimeters.
pub fn save_depth_png(img: &DepthImage, path: &Path) -> Result<(), ImgIoError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), img.width(), img.height());
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Sixteen);
    let mut writer = enc.write_header().map_err(|source| ImgIoError::PngEncode {
        path: path.display().to_string(),
        source,
    })?;
    let mut bytes = Vec::with_capacity(img.data().len() * 2);
    for &d in img.data() {
        bytes.extend_from_slice(&depth_to_mm(d).to_be_bytes());
    }
    writer
        .write_image_data(&bytes)
        .map_err(|source| ImgIoError::PngEncode {
            path: path.display().to_string(),
            source,
        })
}

fn decode_png(path: &Path) -> Result<(png::OutputInfo, Vec<u8>), ImgIoError> {
    let file = File::open(path).map_err(io_err(path))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder
        .read_info()
        .map_err(|source| ImgIoError::PngDecode {
            path: path.display().to_string(),
            source,
        })?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|source| ImgIoError::PngDecode {
            path: path.display().to_string(),
            source,
        })?;
    buf.truncate(info.buffer_size());
    Ok((info, buf))
}

/// Reads a 16-bit grayscale millimeter PNG back to metric depth.
pub fn load_depth_png(path: &Path) -> Result<DepthImage, ImgIoError> {
    let (info, buf) = decode_png(path)?;
    if info.bit_depth != png::BitDepth::Sixteen || info.color_type != png::ColorType::Grayscale {
        return Err(ImgIoError::Format {
            path: path.display().to_string(),
            expected: "16-bit grayscale".into(),
            found: format!("{:?} {:?}", info.bit_depth, info.color_type),
        });
    }
    let mut data = Vec::with_capacity(buf.len() / 2);
    for chunk in buf.chunks_exact(2) {
        let mm = u16::from_be_bytes([chunk[0], chunk[1]]);
        data.push(mm as f64 / 1000.0);
    }
    DepthImage::from_data(info.width, info.height, data).map_err(|e| ImgIoError::Format {
        path: path.display().to_string(),
        expected: "consistent dimensions".into(),
        found: e.to_string(),
    })
}

/// Writes the lossless text format: `width height` on the first line, then
/// one row of space-separated f64 values per line.
pub fn save_depth_text(img: &DepthImage, path: &Path) -> Result<(), ImgIoError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{} {}", img.width(), img.height())?;
        for y in 0..img.height() {
            let mut line = String::new();
            for x in 0..img.width() {
                if x > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("{}", img.get(x, y)));
            }
            writeln!(w, "{line}")?;
        }
        w.flush()
    };
    emit().map_err(io_err(path))
}

/// Reads the text format written by [`save_depth_text`].
pub fn load_depth_text(path: &Path) -> Result<DepthImage, ImgIoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |found: String| ImgIoError::Format {
        path: path.display().to_string(),
        expected: "'width height' header then rows of f64".into(),
        found,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let dims: Vec<u32> = header
        .split_whitespace()
        .map(|t| t.parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad(header.to_string()))?;
    let [width, height] = dims.as_slice() else {
        return Err(bad(header.to_string()));
    };
    let mut data = Vec::with_capacity(*width as usize * *height as usize);
    for line in lines {
        for tok in line.split_whitespace() {
            data.push(tok.parse::<f64>().map_err(|_| bad(tok.to_string()))?);
        }
    }
    DepthImage::from_data(*width, *height, data)
        .map_err(|e| bad(e.to_string()))
}

/// Saves by extension: `.png` millimeter PNG, `.txt` lossless text.
pub fn save_depth(img: &DepthImage, path: &Path) -> Result<(), ImgIoError> {
    match extension(path)?.as_str() {
        "png" => save_depth_png(img, path),
        "txt" => save_depth_text(img, path),
        other => Err(ImgIoError::UnsupportedExtension(other.to_string())),
    }
}

/// Loads by extension, the inverse of [`save_depth`].
pub fn load_depth(path: &Path) -> Result<DepthImage, ImgIoError> {
    match extension(path)?.as_str() {
        "png" => load_depth_png(path),
        "txt" => load_depth_text(path),
        other => Err(ImgIoError::UnsupportedExtension(other.to_string())),
    }
}

fn extension(path: &Path) -> Result<String, ImgIoError> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .ok_or_else(|| ImgIoError::UnsupportedExtension(path.display().to_string()))
}

/// Writes an occlusion mask as 8-bit grayscale PNG using the fixed codes
/// 0 = NoRobot, 64 = Visible, 128 = Unknown, 255 = Occluded.
pub fn save_mask_png(mask: &OcclusionMask, path: &Path) -> Result<(), ImgIoError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), mask.width(), mask.height());
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(|source| ImgIoError::PngEncode {
        path: path.display().to_string(),
        source,
    })?;
    let bytes: Vec<u8> = mask.labels().iter().map(|l| l.code()).collect();
    writer
        .write_image_data(&bytes)
        .map_err(|source| ImgIoError::PngEncode {
            path: path.display().to_string(),
            source,
        })
}

/// Reads a mask PNG written by [`save_mask_png`]; unknown byte values are
/// rejected rather than guessed at.
pub fn load_mask_png(path: &Path) -> Result<OcclusionMask, ImgIoError> {
    let (info, buf) = decode_png(path)?;
    if info.bit_depth != png::BitDepth::Eight || info.color_type != png::ColorType::Grayscale {
        return Err(ImgIoError::Format {
            path: path.display().to_string(),
            expected: "8-bit grayscale".into(),
            found: format!("{:?} {:?}", info.bit_depth, info.color_type),
        });
    }
    let mut labels = Vec::with_capacity(buf.len());
    for (index, &value) in buf.iter().enumerate() {
        let label = OcclusionLabel::from_code(value).ok_or(ImgIoError::BadMaskValue {
            path: path.display().to_string(),
            value,
            index,
        })?;
        labels.push(label);
    }
    OcclusionMask::from_labels(info.width, info.height, labels).map_err(|e| ImgIoError::Format {
        path: path.display().to_string(),
        expected: "consistent dimensions".into(),
        found: e.to_string(),
    })
}

/// Plain 8-bit RGB image used for overlays.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB triples.
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(&rgb);
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Grayscale visualization of a depth image (near bright, far dark),
    /// used as the overlay base when no color stream exists.
    pub fn from_depth(img: &DepthImage, far: f64) -> Self {
        let mut data = Vec::with_capacity(img.data().len() * 3);
        for &d in img.data() {
            let g = if depth_is_valid(d) {
                let t = (1.0 - (d / far).clamp(0.0, 1.0)) * 220.0 + 35.0;
                t as u8
            } else {
                0
            };
            data.extend_from_slice(&[g, g, g]);
        }
        Self {
            width: img.width(),
            height: img.height(),
            data,
        }
    }
}

/// Writes an RGB image as 8-bit PNG.
pub fn save_rgb_png(img: &RgbImage, path: &Path) -> Result<(), ImgIoError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), img.width, img.height);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(|source| ImgIoError::PngEncode {
        path: path.display().to_string(),
        source,
    })?;
    writer
        .write_image_data(&img.data)
        .map_err(|source| ImgIoError::PngEncode {
            path: path.display().to_string(),
            source,
        })
}
