use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitmapError {
    #[error("bitmap must be at least 1x1, got {0}x{1}")]
    Empty(usize, usize),
    #[error("expected {expected} pixels, got {found}")]
    Length { expected: usize, found: usize },
    #[error("pixel values must be 0 or 1")]
    Value,
}

/// Binary image, row-major, one byte per pixel: 0 is black (ink), 1 white.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBitmap")]
pub struct Bitmap {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

#[derive(Deserialize)]
struct RawBitmap {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl TryFrom<RawBitmap> for Bitmap {
    type Error = BitmapError;
    fn try_from(raw: RawBitmap) -> Result<Self, BitmapError> {
        Bitmap::from_bits(raw.width, raw.height, raw.bits)
    }
}

/// Tight bounding box of the ink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InkBox {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Bitmap {
    /// All-white bitmap. Zero dimensions are raised to 1.
    pub fn white(width: usize, height: usize) -> Self {
        let (width, height) = (width.max(1), height.max(1));
        Bitmap { width, height, bits: vec![1; width * height] }
    }

    pub fn black(width: usize, height: usize) -> Self {
        let mut b = Bitmap::white(width, height);
        b.bits.fill(0);
        b
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<u8>) -> Result<Self, BitmapError> {
        if width == 0 || height == 0 {
            return Err(BitmapError::Empty(width, height));
        }
        if bits.len() != width * height {
            return Err(BitmapError::Length { expected: width * height, found: bits.len() });
        }
        if bits.iter().any(|b| *b > 1) {
            return Err(BitmapError::Value);
        }
        Ok(Bitmap { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.bits[y * self.width + x]
    }

    pub fn is_ink(&self, x: usize, y: usize) -> bool {
        self.get(x, y) == 0
    }

    pub fn set_ink(&mut self, x: usize, y: usize, ink: bool) {
        self.bits[y * self.width + x] = if ink { 0 } else { 1 };
    }

    pub fn ink_box(&self) -> Option<InkBox> {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.is_ink(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        (x0 != usize::MAX).then(|| InkBox { x: x0, y: y0, width: x1 - x0 + 1, height: y1 - y0 + 1 })
    }

    pub fn crop(&self, b: InkBox) -> Bitmap {
        let mut out = Bitmap::white(b.width, b.height);
        for y in 0..b.height {
            let src = (b.y + y) * self.width + b.x;
            out.bits[y * b.width..(y + 1) * b.width].copy_from_slice(&self.bits[src..src + b.width]);
        }
        out
    }

    /// Every pixel becomes a `factor` x `factor` block.
    pub fn scaled(&self, factor: usize) -> Bitmap {
        let factor = factor.max(1);
        if factor == 1 {
            return self.clone();
        }
        let mut out = Bitmap::white(self.width * factor, self.height * factor);
        for y in 0..out.height {
            for x in 0..out.width {
                out.bits[y * out.width + x] = self.get(x / factor, y / factor);
            }
        }
        out
    }

    pub fn padded(&self, pad: usize) -> Bitmap {
        if pad == 0 {
            return self.clone();
        }
        let mut out = Bitmap::white(self.width + 2 * pad, self.height + 2 * pad);
        for y in 0..self.height {
            let dst = (y + pad) * out.width + pad;
            out.bits[dst..dst + self.width].copy_from_slice(&self.bits[y * self.width..(y + 1) * self.width]);
        }
        out
    }

    /// Nearest-neighbour resize.
    pub fn resized(&self, width: usize, height: usize) -> Bitmap {
        let mut out = Bitmap::white(width, height);
        for y in 0..out.height {
            let sy = y * self.height / out.height;
            for x in 0..out.width {
                out.bits[y * out.width + x] = self.get(x * self.width / out.width, sy);
            }
        }
        out
    }
}
