//! Embedded 8x16 glyphs: the 8x8 legacy font with every row doubled, plus a
//! few hand-drawn math symbols.

use std::sync::OnceLock;

use font8x8::legacy::{BASIC_LEGACY, GREEK_LEGACY};

pub const GLYPH_WIDTH: usize = 8;
pub const GLYPH_HEIGHT: usize = 16;
/// Rows above the baseline; the two rows below hold descenders.
pub const BASELINE: usize = 14;

/// 16 rows, bit `i` of a row is column `i` from the left.
pub type Glyph = [u8; GLYPH_HEIGHT];

const ASCII_SYMBOLS: &str = "+-=*/()[]{}|<>,.!?^_$";

fn doubled(rows: [u8; 8]) -> Glyph {
    let mut g = [0u8; GLYPH_HEIGHT];
    for (i, r) in rows.iter().enumerate() {
        g[2 * i] = *r;
        g[2 * i + 1] = *r;
    }
    g
}

fn drawn(art: [&str; GLYPH_HEIGHT]) -> Glyph {
    let mut g = [0u8; GLYPH_HEIGHT];
    for (row, line) in art.iter().enumerate() {
        for (col, c) in line.bytes().enumerate() {
            if c == b'#' {
                g[row] |= 1 << col;
            }
        }
    }
    g
}

const INFTY: [&str; GLYPH_HEIGHT] = [
    "........", "........", "........", "........", "........", "........", "........", ".##..##.",
    "#..##..#", "#..##..#", "#..##..#", ".##..##.", "........", "........", "........", "........",
];

const INTEGRAL: [&str; GLYPH_HEIGHT] = [
    ".....##.", "....#..#", "....#...", "....#...", "....#...", "...#....", "...#....", "...#....",
    "...#....", "...#....", "...#....", "..#.....", "..#.....", "#.#.....", ".#......", "........",
];

const CDOT: [&str; GLYPH_HEIGHT] = [
    "........", "........", "........", "........", "........", "........", "........", "........",
    "...##...", "...##...", "........", "........", "........", "........", "........", "........",
];

const RIGHTARROW: [&str; GLYPH_HEIGHT] = [
    "........", "........", "........", "........", "........", "........", "........", ".....#..",
    "......#.", "########", "......#.", ".....#..", "........", "........", "........", "........",
];

fn greek(codepoint: u32) -> Glyph {
    doubled(GREEK_LEGACY[(codepoint - 0x390) as usize])
}

/// Glyph for a single character of the supported set.
pub fn char_glyph(c: char) -> Option<Glyph> {
    let c = if c == '−' { '-' } else { c };
    if c.is_ascii_alphanumeric() || ASCII_SYMBOLS.contains(c) {
        Some(doubled(BASIC_LEGACY[c as usize]))
    } else {
        None
    }
}

/// Glyphs of a command without arguments (`sin` is three letters).
pub fn command_glyphs(name: &str) -> Option<Vec<Glyph>> {
    static TABLE: OnceLock<Vec<(&'static str, Vec<Glyph>)>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let word = |w: &str| w.chars().filter_map(char_glyph).collect::<Vec<_>>();
        vec![
            ("sum", vec![greek(0x3A3)]),
            ("int", vec![drawn(INTEGRAL)]),
            ("sin", word("sin")),
            ("cos", word("cos")),
            ("log", word("log")),
            ("cdot", vec![drawn(CDOT)]),
            ("pi", vec![greek(0x3C0)]),
            ("theta", vec![greek(0x3B8)]),
            ("alpha", vec![greek(0x3B1)]),
            ("beta", vec![greek(0x3B2)]),
            ("infty", vec![drawn(INFTY)]),
            ("rightarrow", vec![drawn(RIGHTARROW)]),
        ]
    });
    table.iter().find(|(n, _)| *n == name).map(|(_, g)| g.clone())
}

/// Every supported symbol, as it would be written in LaTeX.
pub fn supported_symbols() -> Vec<String> {
    let mut out: Vec<String> = ('a'..='z').chain('A'..='Z').chain('0'..='9').map(String::from).collect();
    out.extend(ASCII_SYMBOLS.chars().map(String::from));
    for name in ["sum", "int", "sin", "cos", "log", "cdot", "pi", "theta", "alpha", "beta", "infty", "rightarrow"] {
        out.push(format!("\\{name}"));
    }
    out
}
