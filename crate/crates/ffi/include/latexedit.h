#ifndef LATEXEDIT_H
#define LATEXEDIT_H

/* Generated by cbindgen from the latexedit-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LeStatus {
  LE_STATUS_OK = 0,
  LE_STATUS_NULL_ARGUMENT = 1,
  LE_STATUS_INVALID_UTF8 = 2,
  LE_STATUS_PARSE_ERROR = 3,
  LE_STATUS_UNSUPPORTED_GLYPH = 4,
  LE_STATUS_IO = 5,
  LE_STATUS_FORMAT_ERROR = 6,
  LE_STATUS_INVALID_ARGUMENT = 7,
  LE_STATUS_PANIC = 8,
} LeStatus;

// A binary image; 0 is ink (black), 1 is background (white).
typedef struct LeBitmap LeBitmap;

// Mined rewrite rules.
typedef struct LeRules LeRules;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the
// next call into this library on the same thread.
const char *le_last_error(void);

// Library version as a static string.
const char *le_version(void);

// # Safety
// `s` must come from this library or be null.
void le_string_free(char *s);

// # Safety
// `data` and `len` must come from the same call into this library.
void le_bytes_free(uint8_t *data, size_t len);

// Canonical form of a formula.
//
// # Safety
// `input` must be a NUL-terminated string; `out` must be writable.
enum LeStatus le_canonicalize(const char *input, char **out);

// Character edit distance.
//
// # Safety
// `a` and `b` must be NUL-terminated strings; `out` must be writable.
enum LeStatus le_levenshtein(const char *a, const char *b, size_t *out);

// # Safety
// `a` and `b` must be NUL-terminated strings; `out` must be writable.
enum LeStatus le_text_similarity(const char *a, const char *b, double *out);

// Corpus BLEU; hypotheses and references are newline-separated sentences
// of whitespace-separated tokens, one per line.
//
// # Safety
// Both inputs must be NUL-terminated strings; `out` must be writable.
enum LeStatus le_bleu(const char *hypotheses, const char *references, double *out);

// Load rules from a JSON-lines file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum LeStatus le_rules_load(const char *path, struct LeRules **out);

// Parse rules from JSON-lines text.
//
// # Safety
// `jsonl` must be a NUL-terminated string; `out` must be writable.
enum LeStatus le_rules_parse(const char *jsonl, struct LeRules **out);

// Number of rules, or 0 for a null handle.
//
// # Safety
// `rules` must be a live handle or null.
size_t le_rules_len(const struct LeRules *rules);

// # Safety
// `rules` must come from this library or be null.
void le_rules_free(struct LeRules *rules);

// Suggestions for a post body as a JSON array.
//
// # Safety
// `rules` must be a live handle, `body` a NUL-terminated string and
// `out_json` writable.
enum LeStatus le_suggest(const struct LeRules *rules, const char *body, char **out_json);

// Render a formula. `augment` draws scale and padding from `seed`.
//
// # Safety
// `latex` must be a NUL-terminated string; `out` must be writable.
enum LeStatus le_render(const char *latex,
                        uint32_t scale,
                        uint32_t padding,
                        uint64_t seed,
                        bool augment,
                        struct LeBitmap **out);

// Read a PBM (`P1` or `P4`) image.
//
// # Safety
// `data` must point to `len` readable bytes; `out` must be writable.
enum LeStatus le_bitmap_from_pbm(const uint8_t *data, size_t len, struct LeBitmap **out);

// Encode as PBM, packed `P4` when `raw` is set and plain `P1` otherwise.
//
// # Safety
// `bitmap` must be a live handle; `out` and `out_len` must be writable.
enum LeStatus le_bitmap_to_pbm(const struct LeBitmap *bitmap,
                               bool raw,
                               uint8_t **out,
                               size_t *out_len);

// # Safety
// `bitmap` must be a live handle or null.
size_t le_bitmap_width(const struct LeBitmap *bitmap);

// # Safety
// `bitmap` must be a live handle or null.
size_t le_bitmap_height(const struct LeBitmap *bitmap);

// Row-major pixels, `width * height` bytes owned by the handle.
//
// # Safety
// `bitmap` must be a live handle or null. The pointer is valid while the
// handle lives.
const uint8_t *le_bitmap_pixels(const struct LeBitmap *bitmap);

// # Safety
// `bitmap` must come from this library or be null.
void le_bitmap_free(struct LeBitmap *bitmap);

// Column-code similarity of two images in [0, 1].
//
// # Safety
// Both handles must be live; `out` must be writable.
enum LeStatus le_image_similarity(const struct LeBitmap *a,
                                  const struct LeBitmap *b,
                                  bool drop_blank_columns,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LATEXEDIT_H */
