//! Reader for the Stack Exchange `PostHistory.xml` dump table.
//!
//! The dump holds one `<row .../>` element per line inside `<posthistory>`.
//! Rows are parsed one line at a time so that a malformed row is skipped and
//! counted instead of aborting the whole stream.

use std::collections::BTreeMap;
use std::io::BufRead;

use quick_xml::events::Event;
use quick_xml::{Reader, XmlVersion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const INITIAL_BODY: u32 = 2;
pub const EDIT_BODY: u32 = 5;
pub const ROLLBACK_BODY: u32 = 8;

/// One body version of a post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRevision {
    pub post_id: u64,
    /// 1-based and contiguous per post.
    pub revision_index: u32,
    pub body: String,
    pub comment: Option<String>,
    pub is_question: bool,
    pub is_rollback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

/// A `<row>` element with the attributes the miner cares about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryRow {
    pub id: u64,
    pub post_id: u64,
    pub type_id: u32,
    pub revision_guid: Option<String>,
    pub text: Option<String>,
    pub comment: Option<String>,
    pub post_type_id: Option<u32>,
}

/// Result of reading a dump: the revisions plus what was skipped.
#[derive(Debug, Default, Clone)]
pub struct DumpParse {
    pub revisions: Vec<PostRevision>,
    pub errors: Vec<FormatError>,
    pub rows_seen: usize,
    pub rows_skipped_type: usize,
}

impl DumpParse {
    /// Plain-text diagnostics log.
    pub fn diagnostics(&self) -> String {
        let mut out = String::new();
        for e in &self.errors {
            out.push_str(&format!("skipped row: {e}\n"));
        }
        out.push_str(&format!("rows read: {}\n", self.rows_seen));
        out.push_str(&format!("rows with other history types: {}\n", self.rows_skipped_type));
        out.push_str(&format!("malformed rows: {}\n", self.errors.len()));
        out.push_str(&format!("body revisions: {}\n", self.revisions.len()));
        out
    }
}

/// Parse a single line holding a `<row .../>` element.
pub fn parse_row(line: &str, line_no: usize) -> Result<HistoryRow, FormatError> {
    let err = |message: String| FormatError { line: line_no, message };
    let mut reader = Reader::from_str(line);
    let start = match reader.read_event() {
        Ok(Event::Empty(e)) if e.name().as_ref() == "row" => e,
        Ok(Event::Start(e)) if e.name().as_ref() == "row" => {
            return Err(err("row element is not self-closing".into()))
        }
        Ok(other) => return Err(err(format!("expected <row/>, found {other:?}"))),
        Err(e) => return Err(err(e.to_string())),
    };

    let mut attrs: BTreeMap<String, String> = BTreeMap::new();
    for attr in start.attributes() {
        let attr = attr.map_err(|e| err(e.to_string()))?;
        let key = attr.key.as_ref().to_string();
        let value = attr.normalized_value(XmlVersion::Implicit1_0).map_err(|e| err(e.to_string()))?;
        attrs.insert(key, value.replace("\r\n", "\n"));
    }
    let number = |name: &str| -> Result<u64, FormatError> {
        let raw = attrs.get(name).ok_or_else(|| err(format!("missing attribute {name}")))?;
        raw.trim().parse().map_err(|_| err(format!("attribute {name} is not a number: {raw:?}")))
    };
    Ok(HistoryRow {
        id: number("Id")?,
        post_id: number("PostId")?,
        type_id: number("PostHistoryTypeId")? as u32,
        revision_guid: attrs.get("RevisionGUID").cloned(),
        text: attrs.get("Text").cloned(),
        comment: attrs.get("Comment").cloned(),
        post_type_id: attrs.get("PostTypeId").and_then(|v| v.trim().parse().ok()),
    })
}

/// Read every row of a dump. Body rows (initial, edit, rollback) become
/// [`PostRevision`]s ordered by post and then by row id.
///
/// Rollback rows whose text is the GUID of an earlier revision of the same
/// post are resolved to that revision's body.
pub fn parse_dump<R: BufRead>(input: R) -> std::io::Result<DumpParse> {
    let mut result = DumpParse::default();
    let mut rows: Vec<HistoryRow> = Vec::new();

    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if !trimmed.starts_with("<row") {
            continue;
        }
        result.rows_seen += 1;
        match parse_row(trimmed, i + 1) {
            Ok(row) if matches!(row.type_id, INITIAL_BODY | EDIT_BODY | ROLLBACK_BODY) => rows.push(row),
            Ok(_) => result.rows_skipped_type += 1,
            Err(e) => result.errors.push(e),
        }
    }

    rows.sort_by_key(|r| (r.post_id, r.id));
    let mut bodies_by_guid: BTreeMap<(u64, String), String> = BTreeMap::new();
    let mut current_post = None;
    let mut index = 0u32;
    for row in rows {
        if current_post != Some(row.post_id) {
            current_post = Some(row.post_id);
            index = 0;
        }
        let text = row.text.unwrap_or_default();
        let is_rollback = row.type_id == ROLLBACK_BODY;
        let body = if is_rollback {
            bodies_by_guid
                .get(&(row.post_id, text.trim().to_string()))
                .cloned()
                .unwrap_or(text)
        } else {
            text
        };
        if let Some(guid) = row.revision_guid {
            bodies_by_guid.insert((row.post_id, guid), body.clone());
        }
        index += 1;
        result.revisions.push(PostRevision {
            post_id: row.post_id,
            revision_index: index,
            body,
            comment: row.comment,
            is_question: row.post_type_id == Some(1),
            is_rollback,
        });
    }
    Ok(result)
}
