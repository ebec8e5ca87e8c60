//! Netpbm reading and writing, and PNG export.
//!
//! PBM stores 1 for black, the inverse of [`Bitmap`].

use thiserror::Error;

use super::Bitmap;

/// Gray levels below this fraction of the maximum count as ink.
pub const GRAY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbmFormat {
    /// `P1`, ASCII.
    Plain,
    /// `P4`, packed bits.
    Raw,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("image format error: {0}")]
pub struct ImageFormatError(pub String);

fn err(msg: impl Into<String>) -> ImageFormatError {
    ImageFormatError(msg.into())
}

pub fn write_pbm(bitmap: &Bitmap, format: PbmFormat) -> Vec<u8> {
    let (w, h) = (bitmap.width(), bitmap.height());
    let magic = match format {
        PbmFormat::Plain => "P1",
        PbmFormat::Raw => "P4",
    };
    let mut out = format!("{magic}\n{w} {h}\n").into_bytes();
    for row in bitmap.bits().chunks(w) {
        match format {
            PbmFormat::Plain => {
                out.extend(row.iter().map(|b| if *b == 0 { b'1' } else { b'0' }));
                out.push(b'\n');
            }
            PbmFormat::Raw => {
                for chunk in row.chunks(8) {
                    let byte = chunk.iter().enumerate().fold(0u8, |acc, (i, b)| acc | (((*b == 0) as u8) << (7 - i)));
                    out.push(byte);
                }
            }
        }
    }
    out
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, ImageFormatError> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(format!("bad {what}")))
    }
}

/// Read a PBM image (`P1` or `P4`).
pub fn read_pbm(data: &[u8]) -> Result<Bitmap, ImageFormatError> {
    match data.get(..2) {
        Some(b"P1") | Some(b"P4") => read_image(data, GRAY_THRESHOLD),
        _ => Err(err(format!("not a PBM header: {:?}", String::from_utf8_lossy(&data[..data.len().min(2)])))),
    }
}

/// Read a PBM or PGM image (`P1`, `P2`, `P4`, `P5`); gray levels are
/// binarized at `threshold` of the maximum value.
pub fn read_image(data: &[u8], threshold: f64) -> Result<Bitmap, ImageFormatError> {
    let magic = data.get(..2).ok_or_else(|| err("truncated header"))?;
    let magic = match magic {
        b"P1" | b"P2" | b"P4" | b"P5" => magic[1],
        _ => return Err(err(format!("unsupported magic {:?}", String::from_utf8_lossy(magic)))),
    };
    let mut h = Header { data, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    if width == 0 || height == 0 {
        return Err(err("zero dimension"));
    }
    let maxval = if matches!(magic, b'2' | b'5') { h.number("maxval")? } else { 1 };
    if maxval == 0 || maxval > 65535 {
        return Err(err("bad maxval"));
    }
    let n = width.checked_mul(height).ok_or_else(|| err("image too large"))?;
    let ink = |v: usize| (v as f64) < threshold * maxval as f64;

    let bits: Vec<u8> = match magic {
        b'1' => {
            let mut bits = Vec::with_capacity(n);
            while bits.len() < n {
                h.skip_space();
                match data.get(h.pos) {
                    Some(b'0') => bits.push(1),
                    Some(b'1') => bits.push(0),
                    Some(c) => return Err(err(format!("unexpected byte {c:#x} in raster"))),
                    None => return Err(err("truncated raster")),
                }
                h.pos += 1;
            }
            bits
        }
        b'2' => (0..n)
            .map(|_| h.number("sample").map(|v| if ink(v) { 0 } else { 1 }))
            .collect::<Result<_, _>>()?,
        b'4' => {
            let raster = &data[(h.pos + 1).min(data.len())..];
            let stride = width.div_ceil(8);
            if raster.len() < stride * height {
                return Err(err("truncated raster"));
            }
            let mut bits = Vec::with_capacity(n);
            for y in 0..height {
                for x in 0..width {
                    let byte = raster[y * stride + x / 8];
                    bits.push(if byte & (0x80 >> (x % 8)) != 0 { 0 } else { 1 });
                }
            }
            bits
        }
        _ => {
            let raster = &data[(h.pos + 1).min(data.len())..];
            let size = if maxval > 255 { 2 } else { 1 };
            if raster.len() < n * size {
                return Err(err("truncated raster"));
            }
            raster[..n * size]
                .chunks(size)
                .map(|c| {
                    let v = c.iter().fold(0usize, |acc, b| acc << 8 | *b as usize);
                    if ink(v) { 0 } else { 1 }
                })
                .collect()
        }
    };
    Bitmap::from_bits(width, height, bits).map_err(|e| err(e.to_string()))
}

/// 8-bit grayscale PNG.
pub fn to_png(bitmap: &Bitmap) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, bitmap.width() as u32, bitmap.height() as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let pixels: Vec<u8> = bitmap.bits().iter().map(|b| b * 255).collect();
        // writing to a Vec cannot fail and the dimensions come from a valid bitmap
        let mut writer = encoder.write_header().expect("png header");
        writer.write_image_data(&pixels).expect("png data");
    }
    out
}
