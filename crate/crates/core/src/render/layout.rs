//! Box layout of a formula tree at scale 1.

use super::font::{self, Glyph, BASELINE, GLYPH_HEIGHT, GLYPH_WIDTH};
use super::{Bitmap, RenderError};
use crate::latex::{FormulaNode, Token, TokenKind};

pub const SCRIPT_RATIO: f64 = 0.7;
pub const SUPERSCRIPT_RAISE: f64 = 0.4;
pub const SUBSCRIPT_DROP: f64 = 0.25;

const SPACE_WIDTH: usize = 4;
const QUAD_WIDTH: usize = 16;
const RADICAL_WIDTH: usize = 7;

/// A laid-out formula. `baseline` counts rows from the top. The box can be
/// zero columns wide; its bitmap is then a single white column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutBox {
    pub width: usize,
    pub height: usize,
    pub baseline: usize,
    pub bitmap: Bitmap,
}

/// Ink canvas used while laying out; allows zero width.
#[derive(Debug, Clone)]
pub(crate) struct Canvas {
    pub w: usize,
    pub h: usize,
    pub baseline: usize,
    pub ink: Vec<bool>,
}

impl Canvas {
    fn blank(w: usize, h: usize, baseline: usize) -> Self {
        Canvas { w, h, baseline, ink: vec![false; w * h] }
    }

    fn strut(w: usize) -> Self {
        Canvas::blank(w, GLYPH_HEIGHT, BASELINE)
    }

    fn get(&self, x: usize, y: usize) -> bool {
        self.ink[y * self.w + x]
    }

    fn set(&mut self, x: usize, y: usize) {
        if x < self.w && y < self.h {
            self.ink[y * self.w + x] = true;
        }
    }

    fn blit(&mut self, src: &Canvas, x0: usize, y0: usize) {
        for y in 0..src.h {
            for x in 0..src.w {
                if src.get(x, y) {
                    self.set(x0 + x, y0 + y);
                }
            }
        }
    }

    fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64)) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            if x >= 0 && y >= 0 {
                self.set(x as usize, y as usize);
            }
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    fn glyphs(glyphs: &[Glyph]) -> Self {
        let mut c = Canvas::strut(glyphs.len() * GLYPH_WIDTH);
        for (i, g) in glyphs.iter().enumerate() {
            for (y, row) in g.iter().enumerate() {
                for x in 0..GLYPH_WIDTH {
                    if row & (1 << x) != 0 {
                        c.set(i * GLYPH_WIDTH + x, y);
                    }
                }
            }
        }
        c
    }

    /// Shrink by `ratio`; every target pixel is inked if any source pixel
    /// mapping to it is, so thin strokes survive.
    fn shrink(&self, ratio: f64) -> Self {
        let scaled = |v: usize| (v as f64 * ratio).round() as usize;
        let w = if self.w == 0 { 0 } else { scaled(self.w).max(1) };
        let h = scaled(self.h).max(1);
        let mut out = Canvas::blank(w, h, scaled(self.baseline).min(h));
        for y in 0..self.h {
            for x in 0..self.w {
                if self.get(x, y) {
                    out.set((x * w / self.w).min(w.saturating_sub(1)), (y * h / self.h).min(h - 1));
                }
            }
        }
        out
    }

    fn into_box(self) -> LayoutBox {
        let bitmap = if self.w == 0 {
            Bitmap::white(1, self.h.max(1))
        } else {
            let mut b = Bitmap::white(self.w, self.h);
            for y in 0..self.h {
                for x in 0..self.w {
                    if self.get(x, y) {
                        b.set_ink(x, y, true);
                    }
                }
            }
            b
        };
        LayoutBox { width: self.w, height: self.h, baseline: self.baseline, bitmap }
    }
}

fn row(items: Vec<Canvas>) -> Canvas {
    if items.is_empty() {
        return Canvas::strut(0);
    }
    let ascent = items.iter().map(|c| c.baseline).max().unwrap_or(0);
    let descent = items.iter().map(|c| c.h - c.baseline).max().unwrap_or(0);
    let mut out = Canvas::blank(items.iter().map(|c| c.w).sum(), ascent + descent, ascent);
    let mut x = 0;
    for c in &items {
        out.blit(c, x, ascent - c.baseline);
        x += c.w;
    }
    out
}

fn script(base: Canvas, sub: Option<Canvas>, sup: Option<Canvas>) -> Canvas {
    let raise = (SUPERSCRIPT_RAISE * base.h as f64).round() as i64;
    let drop = (SUBSCRIPT_DROP * base.h as f64).round() as i64;
    let sup = sup.map(|c| c.shrink(SCRIPT_RATIO));
    let sub = sub.map(|c| c.shrink(SCRIPT_RATIO));
    // vertical positions relative to the base baseline, as (top, canvas)
    let mut placed: Vec<(i64, &Canvas)> = vec![(-(base.baseline as i64), &base)];
    if let Some(c) = &sup {
        placed.push((-raise - c.baseline as i64, c));
    }
    if let Some(c) = &sub {
        placed.push((drop - c.baseline as i64, c));
    }
    let top = placed.iter().map(|(t, _)| *t).min().unwrap_or(0);
    let bottom = placed.iter().map(|(t, c)| t + c.h as i64).max().unwrap_or(0);
    let script_w = sup.iter().chain(sub.iter()).map(|c| c.w).max().unwrap_or(0);
    let mut out = Canvas::blank(base.w + script_w, (bottom - top) as usize, (-top) as usize);
    for (i, (t, c)) in placed.iter().enumerate() {
        let x = if i == 0 { 0 } else { base.w };
        out.blit(c, x, (t - top) as usize);
    }
    out
}

fn frac(num: Canvas, den: Canvas) -> Canvas {
    let w = num.w.max(den.w) + 2;
    let rule = num.h + 1;
    let mut out = Canvas::blank(w, num.h + 3 + den.h, rule);
    out.blit(&num, (w - num.w) / 2, 0);
    out.blit(&den, (w - den.w) / 2, rule + 2);
    for x in 0..w {
        out.set(x, rule);
    }
    out
}

fn sqrt(radicand: Canvas, index: Option<Canvas>) -> Canvas {
    let index = index.map(|c| c.shrink(SCRIPT_RATIO));
    let h = radicand.h + 2;
    let knee = (h as f64 * 0.6).round() as usize;
    let shift = index.as_ref().map_or(0, |c| c.w.saturating_sub(2));
    let extra_top = index.as_ref().map_or(0, |c| (c.h + 1).saturating_sub(knee));
    let w = shift + RADICAL_WIDTH + radicand.w + 1;
    let mut out = Canvas::blank(w, h + extra_top, radicand.baseline + 2 + extra_top);
    let (x0, y0) = (shift as i64, extra_top as i64);
    let bottom = y0 + h as i64 - 1;
    out.line((x0, y0 + knee as i64), (x0 + 2, bottom));
    out.line((x0 + 2, bottom), (x0 + RADICAL_WIDTH as i64 - 1, y0));
    for x in shift + RADICAL_WIDTH - 1..w {
        out.set(x, extra_top);
    }
    out.blit(&radicand, shift + RADICAL_WIDTH, extra_top + 2);
    if let Some(c) = &index {
        let y = (extra_top + knee).saturating_sub(c.h + 1);
        out.blit(c, 0, y);
    }
    out
}

fn atom(token: &Token) -> Result<Canvas, RenderError> {
    let unsupported = || RenderError::UnsupportedGlyph(token.text.clone());
    match token.kind {
        TokenKind::Whitespace => Ok(Canvas::strut(0)),
        TokenKind::Other if token.text.is_empty() => Ok(Canvas::strut(0)),
        TokenKind::Command => {
            let name = token.command_name().unwrap_or_default();
            match name {
                "quad" => Ok(Canvas::strut(QUAD_WIDTH)),
                "qquad" => Ok(Canvas::strut(2 * QUAD_WIDTH)),
                _ => font::command_glyphs(name).map(|g| Canvas::glyphs(&g)).ok_or_else(unsupported),
            }
        }
        TokenKind::Other => match token.text.as_str() {
            r"\," | r"\;" | r"\:" | r"\ " => Ok(Canvas::strut(SPACE_WIDTH)),
            r"\{" | r"\}" | r"\$" | r"\|" => {
                let c = token.text.chars().nth(1).unwrap_or_default();
                font::char_glyph(c).map(|g| Canvas::glyphs(&[g])).ok_or_else(unsupported)
            }
            _ => glyph_run(&token.text).ok_or_else(unsupported),
        },
        _ => glyph_run(&token.text).ok_or_else(unsupported),
    }
}

fn glyph_run(text: &str) -> Option<Canvas> {
    let glyphs: Option<Vec<Glyph>> = text.chars().map(font::char_glyph).collect();
    glyphs.map(|g| Canvas::glyphs(&g))
}

pub(crate) fn layout_node(node: &FormulaNode) -> Result<Canvas, RenderError> {
    Ok(match node {
        FormulaNode::Atom(t) => atom(t)?,
        FormulaNode::Row(items) => row(items.iter().map(layout_node).collect::<Result<_, _>>()?),
        FormulaNode::Group(inner) => layout_node(inner)?,
        FormulaNode::Frac(n, d) => frac(layout_node(n)?, layout_node(d)?),
        FormulaNode::Sqrt { radicand, index } => {
            let index = index.as_deref().map(layout_node).transpose()?;
            sqrt(layout_node(radicand)?, index)
        }
        FormulaNode::Script { base, sub, sup, .. } => {
            let sub = sub.as_deref().map(layout_node).transpose()?;
            let sup = sup.as_deref().map(layout_node).transpose()?;
            script(layout_node(base)?, sub, sup)
        }
        FormulaNode::Cmd { name, .. } => return Err(RenderError::UnsupportedGlyph(format!("\\{name}"))),
    })
}

/// Lay out a formula given as LaTeX source (without delimiters).
pub fn layout(latex: &str) -> Result<LayoutBox, RenderError> {
    Ok(super::layout_canvas(latex)?.into_box())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ink_rows(b: &LayoutBox) -> Vec<usize> {
        (0..b.height).filter(|&y| (0..b.bitmap.width()).any(|x| b.bitmap.is_ink(x, y))).collect()
    }

    #[test]
    fn single_glyph_box() {
        let b = layout("a").unwrap();
        assert_eq!((b.width, b.height, b.baseline), (GLYPH_WIDTH, GLYPH_HEIGHT, BASELINE));
    }

    #[test]
    fn fraction_rule_on_baseline() {
        let b = layout(r"\frac{a}{b}").unwrap();
        assert!((0..b.width).all(|x| b.bitmap.is_ink(x, b.baseline)));
    }

    #[test]
    fn superscript_is_taller() {
        let sup = ink_rows(&layout("x^2").unwrap()).len();
        let flat = ink_rows(&layout("x2").unwrap()).len();
        assert!(sup > flat);
    }

    #[test]
    fn scripts_are_smaller() {
        let b = layout("x_2").unwrap();
        assert!(b.width < 2 * GLYPH_WIDTH);
        assert!(b.height > GLYPH_HEIGHT);
    }

    #[test]
    fn sqrt_with_index() {
        let plain = layout(r"\sqrt{x}").unwrap();
        let indexed = layout(r"\sqrt[3]{x}").unwrap();
        assert!(indexed.width > plain.width);
        assert_eq!(plain.height, GLYPH_HEIGHT + 2);
    }

    #[test]
    fn unsupported() {
        assert_eq!(layout(r"\gamma").unwrap_err(), RenderError::UnsupportedGlyph(r"\gamma".into()));
        assert!(matches!(layout(r"\mathbb{R}"), Err(RenderError::UnsupportedGlyph(_))));
        assert!(matches!(layout("x'"), Err(RenderError::UnsupportedGlyph(_))));
    }

    #[test]
    fn over_and_labels() {
        let over = layout(r"a \over b").unwrap();
        let frac = layout(r"\frac{a}{b}").unwrap();
        assert_eq!(over, frac);
        assert_eq!(layout(r"x \label{eq}").unwrap(), layout("x").unwrap());
    }

    #[test]
    fn empty_formula() {
        let b = layout("").unwrap();
        assert_eq!(b.width, 0);
        assert_eq!(b.bitmap.width(), 1);
    }
}
