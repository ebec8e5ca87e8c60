//! Image similarity over column codes, and candidate re-ranking by it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edit::Candidate;
use crate::miner::similarity_by;
use crate::render::{render, Bitmap, RenderError, RenderOptions, GRAY_THRESHOLD};

pub const TARGET_HEIGHT: usize = 64;
/// Candidates considered per image, the beam width of the recognizer.
pub const MAX_CANDIDATES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VisualError {
    #[error("column encoding needs height {expected}, got {found}")]
    HeightMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimilarityOptions {
    pub drop_blank_columns: bool,
    pub binarize_threshold: f64,
}

impl SimilarityOptions {
    /// Settings for scoring a finished transcription.
    pub fn evaluation() -> Self {
        SimilarityOptions { drop_blank_columns: true, binarize_threshold: GRAY_THRESHOLD }
    }

    /// Settings for choosing among candidates.
    pub fn rerank() -> Self {
        SimilarityOptions { drop_blank_columns: false, binarize_threshold: GRAY_THRESHOLD }
    }
}

impl Default for SimilarityOptions {
    fn default() -> Self {
        SimilarityOptions::evaluation()
    }
}

/// One code per column; bit 63 is the top row, a set bit is white.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnCodes {
    pub codes: Vec<u64>,
}

/// Crop to the ink and resize to [`TARGET_HEIGHT`] rows, keeping the
/// aspect ratio. A blank image becomes a single white column.
pub fn crop_resize(bitmap: &Bitmap) -> Bitmap {
    let Some(ink) = bitmap.ink_box() else {
        return Bitmap::white(1, TARGET_HEIGHT);
    };
    let cropped = bitmap.crop(ink);
    let width = ((ink.width * TARGET_HEIGHT) as f64 / ink.height as f64).round().max(1.0) as usize;
    cropped.resized(width, TARGET_HEIGHT)
}

pub fn column_encode(bitmap: &Bitmap, options: &SimilarityOptions) -> Result<ColumnCodes, VisualError> {
    if bitmap.height() != TARGET_HEIGHT {
        return Err(VisualError::HeightMismatch { expected: TARGET_HEIGHT, found: bitmap.height() });
    }
    let codes = (0..bitmap.width())
        .map(|x| (0..TARGET_HEIGHT).fold(0u64, |code, y| code << 1 | bitmap.get(x, y) as u64))
        .filter(|code| !(options.drop_blank_columns && *code == u64::MAX))
        .collect();
    Ok(ColumnCodes { codes })
}

fn codes_of(bitmap: &Bitmap, options: &SimilarityOptions) -> Vec<u64> {
    column_encode(&crop_resize(bitmap), options).map(|c| c.codes).unwrap_or_default()
}

fn similarity_of_codes(a: &[u64], b: &[u64]) -> f64 {
    similarity_by(a, b)
}

/// `1 - dist / max(len)` over the column codes of both images.
pub fn image_similarity(a: &Bitmap, b: &Bitmap, options: &SimilarityOptions) -> f64 {
    similarity_of_codes(&codes_of(a, options), &codes_of(b, options))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub candidate: Candidate,
    pub rendered: Option<Bitmap>,
    /// -1 when the candidate could not be rendered.
    pub similarity: f64,
}

/// Render every candidate, score it against `original` and sort by
/// similarity, best first. The sort is stable, so ties and failures keep
/// the incoming order.
pub fn rerank(original: &Bitmap, candidates: &[Candidate]) -> Vec<RankedCandidate> {
    let options = RenderOptions::default();
    rerank_with(original, candidates, &SimilarityOptions::rerank(), |latex| render(latex, &options))
}

pub fn rerank_with<F>(original: &Bitmap, candidates: &[Candidate], options: &SimilarityOptions, renderer: F) -> Vec<RankedCandidate>
where
    F: Fn(&str) -> Result<Bitmap, RenderError> + Sync,
{
    let reference = codes_of(original, options);
    let mut ranked: Vec<RankedCandidate> = candidates
        .par_iter()
        .map(|c| match renderer(&c.text) {
            Ok(bitmap) => RankedCandidate {
                similarity: similarity_of_codes(&reference, &codes_of(&bitmap, options)),
                candidate: c.clone(),
                rendered: Some(bitmap),
            },
            Err(_) => RankedCandidate { candidate: c.clone(), rendered: None, similarity: -1.0 },
        })
        .collect();
    ranked.sort_by(|a, b| b.similarity.total_cmp(&a.similarity));
    ranked
}
