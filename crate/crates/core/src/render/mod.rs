//! Deterministic bitmap rendering of LaTeX formulas with an embedded font.

mod bitmap;
pub mod font;
mod layout;
mod pbm;

use std::process::Command;

use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bitmap::{Bitmap, BitmapError, InkBox};
pub use layout::{layout, LayoutBox, SCRIPT_RATIO, SUBSCRIPT_DROP, SUPERSCRIPT_RAISE};
pub use pbm::{read_image, read_pbm, to_png, write_pbm, ImageFormatError, PbmFormat, GRAY_THRESHOLD};

use crate::latex::{canonical_tree, parse, tokenize, CanonConfig, ParseError};

pub const AUGMENT_SCALES: [usize; 3] = [1, 2, 3];
pub const AUGMENT_MAX_PADDING: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("no glyph for {0}")]
    UnsupportedGlyph(String),
    #[error("external renderer: {0}")]
    External(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    pub scale: usize,
    /// White border in pixels on every side, applied after scaling.
    pub padding: usize,
    pub seed: u64,
    /// Draw scale and padding from the seeded generator instead.
    pub augment: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { scale: 1, padding: 2, seed: 0, augment: false }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

impl RenderOptions {
    /// Scale and padding actually used for `latex`.
    pub fn resolve(&self, latex: &str) -> (usize, usize) {
        if !self.augment {
            return (self.scale.max(1), self.padding);
        }
        let mut rng = Pcg32::seed_from_u64(self.seed ^ fnv1a(latex));
        let scale = AUGMENT_SCALES[rng.random_range(0..AUGMENT_SCALES.len())];
        let padding = rng.random_range(0..=AUGMENT_MAX_PADDING);
        (scale, padding)
    }
}

pub(crate) fn layout_canvas(latex: &str) -> Result<layout::Canvas, RenderError> {
    let parsed = parse(&tokenize(latex))?;
    let tree = canonical_tree(parsed.node, CanonConfig::default());
    layout::layout_node(&tree)
}

/// Render a formula. Identical inputs and options give identical bitmaps.
pub fn render(latex: &str, options: &RenderOptions) -> Result<Bitmap, RenderError> {
    let laid = layout(latex)?;
    let (scale, padding) = options.resolve(latex);
    Ok(laid.bitmap.scaled(scale).padded(padding))
}

/// Render through an external program: it receives the formula as its last
/// argument and must write a PBM image to standard output.
pub fn render_external(program: &str, args: &[String], latex: &str) -> Result<Bitmap, RenderError> {
    let output = Command::new(program)
        .args(args)
        .arg(latex)
        .output()
        .map_err(|e| RenderError::External(format!("{program}: {e}")))?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        return Err(RenderError::External(format!("{program} exited with {}: {}", output.status, stderr.trim())));
    }
    read_image(&output.stdout, GRAY_THRESHOLD).map_err(|e| RenderError::External(e.to_string()))
}
