//! C interface to latexedit.
//!
//! Every fallible function returns an [`LeStatus`] and writes its result
//! through an out-pointer. On failure a message is available from
//! [`le_last_error`] on the same thread. Strings and byte buffers returned
//! by this library must be released with [`le_string_free`] and
//! [`le_bytes_free`]; handles with their own `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use latexedit::edit::{read_rules, suggest_edits, EditRule};
use latexedit::latex::{canonicalize, CanonConfig};
use latexedit::metrics::{bleu, MAX_ORDER};
use latexedit::miner::{levenshtein, text_similarity};
use latexedit::render::{read_pbm, render, write_pbm, Bitmap, PbmFormat, RenderError, RenderOptions};
use latexedit::visual::{image_similarity, SimilarityOptions};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    UnsupportedGlyph = 4,
    Io = 5,
    FormatError = 6,
    InvalidArgument = 7,
    Panic = 8,
}

/// Mined rewrite rules.
pub struct LeRules {
    rules: Vec<EditRule>,
}

/// A binary image; 0 is ink (black), 1 is background (white).
pub struct LeBitmap {
    bitmap: Bitmap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(LeStatus, String);

type FfiResult<T> = Result<T, Failure>;

fn guard<F>(f: F) -> LeStatus
where
    F: FnOnce() -> FfiResult<()>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LeStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("panic inside latexedit".into());
            LeStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure(LeStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(LeStatus::InvalidUtf8, format!("{name}: {e}")))
}

fn out_ptr<T>(p: *mut T, name: &str) -> FfiResult<()> {
    if p.is_null() {
        Err(Failure(LeStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn give_bytes(bytes: Vec<u8>, out: *mut *mut u8, out_len: *mut usize) {
    let boxed = bytes.into_boxed_slice();
    let len = boxed.len();
    // SAFETY: both pointers were checked by the caller
    unsafe {
        *out_len = len;
        *out = Box::into_raw(boxed) as *mut u8;
    }
}

/// Message of the last failure on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn le_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn le_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn le_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `data` and `len` must come from the same call into this library.
#[no_mangle]
pub unsafe extern "C" fn le_bytes_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}

/// Canonical form of a formula.
///
/// # Safety
/// `input` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_canonicalize(input: *const c_char, out: *mut *mut c_char) -> LeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let input = text(input, "input")?;
        let canonical = canonicalize(input, CanonConfig::default()).map_err(|e| Failure(LeStatus::ParseError, e.to_string()))?;
        *out = c_string(canonical);
        Ok(())
    })
}

/// Character edit distance.
///
/// # Safety
/// `a` and `b` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_levenshtein(a: *const c_char, b: *const c_char, out: *mut usize) -> LeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = levenshtein(text(a, "a")?, text(b, "b")?);
        Ok(())
    })
}

/// # Safety
/// `a` and `b` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_text_similarity(a: *const c_char, b: *const c_char, out: *mut f64) -> LeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = text_similarity(text(a, "a")?, text(b, "b")?);
        Ok(())
    })
}

/// Corpus BLEU; hypotheses and references are newline-separated sentences
/// of whitespace-separated tokens, one per line.
///
/// # Safety
/// Both inputs must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_bleu(hypotheses: *const c_char, references: *const c_char, out: *mut f64) -> LeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let split = |s: &str| -> Vec<Vec<String>> {
            s.lines().map(|l| l.split_whitespace().map(str::to_string).collect()).collect()
        };
        let h = split(text(hypotheses, "hypotheses")?);
        let r = split(text(references, "references")?);
        *out = bleu(&h, &r, MAX_ORDER).map_err(|e| Failure(LeStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}

/// Load rules from a JSON-lines file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_rules_load(path: *const c_char, out: *mut *mut LeRules) -> LeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let path = text(path, "path")?;
        let file = std::fs::File::open(path).map_err(|e| Failure(LeStatus::Io, format!("{path}: {e}")))?;
        let rules = read_rules(BufReader::new(file)).map_err(|e| Failure(LeStatus::FormatError, e.to_string()))?;
        *out = Box::into_raw(Box::new(LeRules { rules }));
        Ok(())
    })
}

/// Parse rules from JSON-lines text.
///
/// # Safety
/// `jsonl` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_rules_parse(jsonl: *const c_char, out: *mut *mut LeRules) -> LeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let rules = read_rules(text(jsonl, "jsonl")?.as_bytes()).map_err(|e| Failure(LeStatus::FormatError, e.to_string()))?;
        *out = Box::into_raw(Box::new(LeRules { rules }));
        Ok(())
    })
}

/// Number of rules, or 0 for a null handle.
///
/// # Safety
/// `rules` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn le_rules_len(rules: *const LeRules) -> usize {
    rules.as_ref().map_or(0, |r| r.rules.len())
}

/// # Safety
/// `rules` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn le_rules_free(rules: *mut LeRules) {
    if !rules.is_null() {
        drop(Box::from_raw(rules));
    }
}

/// Suggestions for a post body as a JSON array.
///
/// # Safety
/// `rules` must be a live handle, `body` a NUL-terminated string and
/// `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn le_suggest(rules: *const LeRules, body: *const c_char, out_json: *mut *mut c_char) -> LeStatus {
    guard(|| {
        out_ptr(out_json, "out_json")?;
        let rules = rules.as_ref().ok_or_else(|| Failure(LeStatus::NullArgument, "rules is null".into()))?;
        let body = text(body, "body")?;
        let output = suggest_edits(body, &rules.rules, None).map_err(|e| Failure(LeStatus::Io, e.to_string()))?;
        let json = serde_json::to_string(&output.suggestions).map_err(|e| Failure(LeStatus::FormatError, e.to_string()))?;
        *out_json = c_string(json);
        Ok(())
    })
}

/// Render a formula. `augment` draws scale and padding from `seed`.
///
/// # Safety
/// `latex` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_render(
    latex: *const c_char,
    scale: u32,
    padding: u32,
    seed: u64,
    augment: bool,
    out: *mut *mut LeBitmap,
) -> LeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let latex = text(latex, "latex")?;
        if scale == 0 {
            return Err(Failure(LeStatus::InvalidArgument, "scale must be positive".into()));
        }
        let options = RenderOptions { scale: scale as usize, padding: padding as usize, seed, augment };
        let bitmap = render(latex, &options).map_err(|e| match e {
            RenderError::UnsupportedGlyph(_) => Failure(LeStatus::UnsupportedGlyph, e.to_string()),
            _ => Failure(LeStatus::ParseError, e.to_string()),
        })?;
        *out = Box::into_raw(Box::new(LeBitmap { bitmap }));
        Ok(())
    })
}

/// Read a PBM (`P1` or `P4`) image.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_bitmap_from_pbm(data: *const u8, len: usize, out: *mut *mut LeBitmap) -> LeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        if data.is_null() {
            return Err(Failure(LeStatus::NullArgument, "data is null".into()));
        }
        let bytes = std::slice::from_raw_parts(data, len);
        let bitmap = read_pbm(bytes).map_err(|e| Failure(LeStatus::FormatError, e.to_string()))?;
        *out = Box::into_raw(Box::new(LeBitmap { bitmap }));
        Ok(())
    })
}

/// Encode as PBM, packed `P4` when `raw` is set and plain `P1` otherwise.
///
/// # Safety
/// `bitmap` must be a live handle; `out` and `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_bitmap_to_pbm(bitmap: *const LeBitmap, raw: bool, out: *mut *mut u8, out_len: *mut usize) -> LeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        out_ptr(out_len, "out_len")?;
        let b = bitmap.as_ref().ok_or_else(|| Failure(LeStatus::NullArgument, "bitmap is null".into()))?;
        give_bytes(write_pbm(&b.bitmap, if raw { PbmFormat::Raw } else { PbmFormat::Plain }), out, out_len);
        Ok(())
    })
}

/// # Safety
/// `bitmap` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn le_bitmap_width(bitmap: *const LeBitmap) -> usize {
    bitmap.as_ref().map_or(0, |b| b.bitmap.width())
}

/// # Safety
/// `bitmap` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn le_bitmap_height(bitmap: *const LeBitmap) -> usize {
    bitmap.as_ref().map_or(0, |b| b.bitmap.height())
}

/// Row-major pixels, `width * height` bytes owned by the handle.
///
/// # Safety
/// `bitmap` must be a live handle or null. The pointer is valid while the
/// handle lives.
#[no_mangle]
pub unsafe extern "C" fn le_bitmap_pixels(bitmap: *const LeBitmap) -> *const u8 {
    bitmap.as_ref().map_or(ptr::null(), |b| b.bitmap.bits().as_ptr())
}

/// # Safety
/// `bitmap` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn le_bitmap_free(bitmap: *mut LeBitmap) {
    if !bitmap.is_null() {
        drop(Box::from_raw(bitmap));
    }
}

/// Column-code similarity of two images in [0, 1].
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_image_similarity(
    a: *const LeBitmap,
    b: *const LeBitmap,
    drop_blank_columns: bool,
    out: *mut f64,
) -> LeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let (a, b) = match (a.as_ref(), b.as_ref()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Failure(LeStatus::NullArgument, "bitmap is null".into())),
        };
        let options = SimilarityOptions { drop_blank_columns, ..Default::default() };
        *out = image_similarity(&a.bitmap, &b.bitmap, &options);
        Ok(())
    })
}
