//! Review session state and the local HTTP service around it.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use similar::{DiffTag, TextDiff};
use thiserror::Error;
use tokio::sync::RwLock;

use crate::edit::{apply_suggestions, suggest_edits, EditRule, Suggestion};
use crate::markup::math_regions;
use crate::render::{render, to_png, RenderOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject,
    Amend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub post_id: u64,
    pub sentence_index: usize,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amended_text: Option<String>,
    pub decided_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionPost {
    pub post_id: u64,
    pub body: String,
    pub suggestions: Vec<Suggestion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub posts: Vec<SessionPost>,
    pub decisions: Vec<Decision>,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportedPost {
    pub post_id: u64,
    pub body: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecisionError {
    #[error("no post {0}")]
    UnknownPost(u64),
    #[error("post {0} has no suggestion for sentence {1}")]
    UnknownSuggestion(u64, usize),
    #[error("sentence {1} of post {0} already has a decision")]
    AlreadyDecided(u64, usize),
    #[error("amended_text is required for Amend and only allowed there")]
    AmendText,
    #[error("decision is for post {found}, not {expected}")]
    PostMismatch { expected: u64, found: u64 },
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
}

impl Session {
    /// Build a session, computing every post's suggestions up front.
    pub fn create(posts: Vec<(u64, String)>, rules: &[EditRule], created_at: DateTime<Utc>) -> Session {
        let posts: Vec<SessionPost> = posts
            .into_iter()
            .map(|(post_id, body)| {
                // the rules engine has no adapter and cannot fail
                let suggestions = suggest_edits(&body, rules, None).map(|o| o.suggestions).unwrap_or_default();
                SessionPost { post_id, body, suggestions }
            })
            .collect();
        let mut hash: u64 = 0xcbf29ce484222325;
        for p in &posts {
            for b in p.post_id.to_le_bytes().iter().chain(p.body.as_bytes()) {
                hash = (hash ^ *b as u64).wrapping_mul(0x100000001b3);
            }
        }
        let session_id = format!("{:016x}-{}", hash, created_at.timestamp());
        Session { session_id, posts, decisions: Vec::new(), created_at }
    }

    pub fn load(path: &Path) -> Result<Session, SessionError> {
        let text = fs::read_to_string(path).map_err(|source| SessionError::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| SessionError::Json { path: path.into(), source })
    }

    /// Write to a temporary file, sync it and rename it over `path`, so a
    /// crash leaves either the old or the new session on disk.
    pub fn save(&self, path: &Path) -> Result<(), SessionError> {
        let io = |source| SessionError::Io { path: path.into(), source };
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let json = serde_json::to_vec_pretty(self).map_err(|source| SessionError::Json { path: path.into(), source })?;
        let mut file = File::create(&tmp).map_err(io)?;
        file.write_all(&json).map_err(io)?;
        file.sync_all().map_err(io)?;
        drop(file);
        fs::rename(&tmp, path).map_err(io)?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            // directory fsync is not supported everywhere
            let _ = File::open(dir).and_then(|d| d.sync_all());
        }
        Ok(())
    }

    pub fn post(&self, post_id: u64) -> Option<&SessionPost> {
        self.posts.iter().find(|p| p.post_id == post_id)
    }

    pub fn decision_for(&self, post_id: u64, sentence_index: usize) -> Option<&Decision> {
        self.decisions.iter().find(|d| d.post_id == post_id && d.sentence_index == sentence_index)
    }

    /// Record a decision. Each suggestion takes exactly one.
    pub fn decide(&mut self, decision: Decision) -> Result<(), DecisionError> {
        let post = self.post(decision.post_id).ok_or(DecisionError::UnknownPost(decision.post_id))?;
        if !post.suggestions.iter().any(|s| s.sentence_index == decision.sentence_index) {
            return Err(DecisionError::UnknownSuggestion(decision.post_id, decision.sentence_index));
        }
        if (decision.verdict == Verdict::Amend) != decision.amended_text.is_some() {
            return Err(DecisionError::AmendText);
        }
        if self.decision_for(decision.post_id, decision.sentence_index).is_some() {
            return Err(DecisionError::AlreadyDecided(decision.post_id, decision.sentence_index));
        }
        self.decisions.push(decision);
        Ok(())
    }

    /// Post bodies with accepted and amended suggestions applied.
    pub fn export(&self) -> Vec<ExportedPost> {
        self.posts
            .iter()
            .map(|post| {
                let body = apply_suggestions(&post.body, &post.suggestions, |s| {
                    let d = self.decision_for(post.post_id, s.sentence_index)?;
                    match d.verdict {
                        Verdict::Accept => Some(s.suggested.as_str()),
                        Verdict::Amend => d.amended_text.as_deref(),
                        Verdict::Reject => None,
                    }
                });
                ExportedPost { post_id: post.post_id, body }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanKind {
    Equal,
    Delete,
    Insert,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffSpan {
    pub kind: SpanKind,
    pub text: String,
}

/// Character-level edit script from `original` to `suggested`.
pub fn diff_spans(original: &str, suggested: &str) -> Vec<DiffSpan> {
    let old: Vec<char> = original.chars().collect();
    let new: Vec<char> = suggested.chars().collect();
    let diff = TextDiff::from_chars(original, suggested);
    let mut spans = Vec::new();
    for op in diff.ops() {
        let (tag, o, n) = op.as_tag_tuple();
        let text = |chars: &[char], r: std::ops::Range<usize>| chars[r].iter().collect::<String>();
        match tag {
            DiffTag::Equal => spans.push(DiffSpan { kind: SpanKind::Equal, text: text(&old, o) }),
            DiffTag::Delete => spans.push(DiffSpan { kind: SpanKind::Delete, text: text(&old, o) }),
            DiffTag::Insert => spans.push(DiffSpan { kind: SpanKind::Insert, text: text(&new, n) }),
            DiffTag::Replace => {
                spans.push(DiffSpan { kind: SpanKind::Delete, text: text(&old, o) });
                spans.push(DiffSpan { kind: SpanKind::Insert, text: text(&new, n) });
            }
        }
    }
    spans
}

pub struct AppState {
    session: RwLock<Session>,
    path: PathBuf,
}

impl AppState {
    pub fn new(session: Session, path: PathBuf) -> Arc<AppState> {
        Arc::new(AppState { session: RwLock::new(session), path })
    }
}

#[derive(Debug, Serialize)]
struct PostSummary {
    post_id: u64,
    suggestion_count: usize,
    decided_count: usize,
}

#[derive(Debug, Serialize)]
struct SuggestionView<'a> {
    #[serde(flatten)]
    suggestion: &'a Suggestion,
    diff: Vec<DiffSpan>,
    decision: Option<&'a Decision>,
}

#[derive(Debug, Deserialize)]
struct DecisionRequest {
    post_id: Option<u64>,
    sentence_index: usize,
    verdict: Verdict,
    #[serde(default)]
    amended_text: Option<String>,
    #[serde(default)]
    decided_at: Option<DateTime<Utc>>,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

impl From<DecisionError> for ApiError {
    fn from(e: DecisionError) -> Self {
        let status = match e {
            DecisionError::UnknownPost(_) | DecisionError::UnknownSuggestion(..) => StatusCode::NOT_FOUND,
            DecisionError::AlreadyDecided(..) => StatusCode::CONFLICT,
            DecisionError::AmendText | DecisionError::PostMismatch { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError(status, e.to_string())
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

async fn list_posts(State(state): State<Arc<AppState>>) -> Json<Vec<PostSummary>> {
    let session = state.session.read().await;
    Json(
        session
            .posts
            .iter()
            .map(|p| PostSummary {
                post_id: p.post_id,
                suggestion_count: p.suggestions.len(),
                decided_count: session.decisions.iter().filter(|d| d.post_id == p.post_id).count(),
            })
            .collect(),
    )
}

async fn list_suggestions(State(state): State<Arc<AppState>>, UrlPath(post_id): UrlPath<u64>) -> Result<Response, ApiError> {
    let session = state.session.read().await;
    let post = session.post(post_id).ok_or_else(|| ApiError::from(DecisionError::UnknownPost(post_id)))?;
    let views: Vec<SuggestionView> = post
        .suggestions
        .iter()
        .map(|s| SuggestionView {
            suggestion: s,
            diff: diff_spans(&s.original, &s.suggested),
            decision: session.decision_for(post_id, s.sentence_index),
        })
        .collect();
    Ok(Json(views).into_response())
}

async fn post_decision(
    State(state): State<Arc<AppState>>,
    UrlPath(post_id): UrlPath<u64>,
    Json(req): Json<DecisionRequest>,
) -> Result<(StatusCode, Json<Decision>), ApiError> {
    if let Some(found) = req.post_id.filter(|id| *id != post_id) {
        return Err(DecisionError::PostMismatch { expected: post_id, found }.into());
    }
    let decision = Decision {
        post_id,
        sentence_index: req.sentence_index,
        verdict: req.verdict,
        amended_text: req.amended_text,
        decided_at: req.decided_at.unwrap_or_else(Utc::now),
    };
    // the write lock serializes decisions; the file is on disk before we answer
    let mut session = state.session.write().await;
    let mut next = session.clone();
    next.decide(decision.clone())?;
    next.save(&state.path).map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    *session = next;
    Ok((StatusCode::CREATED, Json(decision)))
}

async fn export(State(state): State<Arc<AppState>>) -> Json<Vec<ExportedPost>> {
    Json(state.session.read().await.export())
}

async fn preview(
    State(state): State<Arc<AppState>>,
    UrlPath((post_id, sentence_index)): UrlPath<(u64, usize)>,
) -> Result<Response, ApiError> {
    let session = state.session.read().await;
    let suggestion = session
        .post(post_id)
        .and_then(|p| p.suggestions.iter().find(|s| s.sentence_index == sentence_index))
        .ok_or_else(|| ApiError::from(DecisionError::UnknownSuggestion(post_id, sentence_index)))?;
    let text = &suggestion.suggested;
    let formula = math_regions(text)
        .into_iter()
        .find(|r| r.closed && !text[r.inner.clone()].trim().is_empty())
        .map(|r| text[r.inner].to_string())
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, "suggestion has no formula".into()))?;
    let bitmap = render(&formula, &RenderOptions::default())
        .map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], to_png(&bitmap)).into_response())
}

/// All API routes; static files from `ui_dir` are served at the root.
pub fn router(state: Arc<AppState>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/posts", get(list_posts))
        .route("/api/posts/{id}/suggestions", get(list_suggestions))
        .route("/api/posts/{id}/decisions", axum::routing::post(post_decision))
        .route("/api/posts/{id}/preview/{sentence_index}", get(preview))
        .route("/api/export", get(export))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}
