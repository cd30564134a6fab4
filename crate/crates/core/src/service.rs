//! JSON-over-HTTP API for a loaded layered grammar.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use serde_json::json;

use crate::ast::serialize_tree;
use crate::embedding::LayeredGrammar;
use crate::translate::{analyze, translate_with, TranslateError, TranslateOptions, TranslationResult};

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TranslateRequest {
    text: String,
    from: String,
    to: String,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    full_trees: bool,
}

#[derive(Debug, Deserialize)]
struct ParseRequest {
    text: String,
    lang: String,
    #[serde(default)]
    k: Option<usize>,
}

/// The exact JSON text of a translation, shared by the CLI and the service.
pub fn translation_json(result: &TranslationResult) -> String {
    serde_json::to_string(result).expect("translation results serialize")
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json; charset=utf-8")], body).into_response()
}

fn error_response(status: StatusCode, message: impl Into<String>) -> Response {
    json_response(status, json!({ "error": message.into() }).to_string())
}

fn status_for(e: &TranslateError) -> StatusCode {
    match e {
        TranslateError::InputTooLong => StatusCode::PAYLOAD_TOO_LARGE,
        TranslateError::UnknownLanguage(_) | TranslateError::EmptyInput | TranslateError::Parse(_) => {
            StatusCode::BAD_REQUEST
        }
        TranslateError::NoParse => StatusCode::UNPROCESSABLE_ENTITY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn options(k: Option<usize>, full_trees: bool) -> Result<TranslateOptions, Box<Response>> {
    let k = k.unwrap_or(5);
    if k == 0 {
        return Err(Box::new(error_response(StatusCode::BAD_REQUEST, "k must be at least 1")));
    }
    Ok(TranslateOptions {
        k,
        full_trees,
        ..Default::default()
    })
}

async fn health() -> Response {
    json_response(StatusCode::OK, json!({ "status": "ok" }).to_string())
}

async fn languages(State(lg): State<Arc<LayeredGrammar>>) -> Response {
    let langs: Vec<&str> = lg.languages().collect();
    json_response(StatusCode::OK, json!({ "languages": langs }).to_string())
}

async fn translate_handler(State(lg): State<Arc<LayeredGrammar>>, body: Bytes) -> Response {
    let req: TranslateRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, format!("malformed request: {e}")),
    };
    let opts = match options(req.k, req.full_trees) {
        Ok(o) => o,
        Err(r) => return *r,
    };
    let result = tokio::task::spawn_blocking(move || translate_with(&lg, &req.text, &req.from, &req.to, &opts)).await;
    match result {
        Ok(Ok(r)) => json_response(StatusCode::OK, translation_json(&r)),
        Ok(Err(e)) => error_response(status_for(&e), e.to_string()),
        Err(e) => error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn parse_handler(State(lg): State<Arc<LayeredGrammar>>, body: Bytes) -> Response {
    let req: ParseRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, format!("malformed request: {e}")),
    };
    let opts = match options(req.k, false) {
        Ok(o) => o,
        Err(r) => return *r,
    };
    let result = tokio::task::spawn_blocking(move || analyze(&lg, &req.lang, &req.text, &opts)).await;
    match result {
        Ok(Ok(a)) => {
            let trees: Vec<_> = a
                .trees
                .iter()
                .map(|t| json!({ "tree": serialize_tree(&t.tree), "cost": t.cost }))
                .collect();
            let stats = json!({ "goals": a.stats.goals, "edges": a.stats.edges, "spans": a.stats.spans });
            json_response(StatusCode::OK, json!({ "trees": trees, "stats": stats }).to_string())
        }
        Ok(Err(e)) => error_response(status_for(&e), e.to_string()),
        Err(e) => error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

pub fn router(grammar: Arc<LayeredGrammar>) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/languages", get(languages))
        .route("/v1/translate", post(translate_handler))
        .route("/v1/parse", post(parse_handler))
        .with_state(grammar)
}

/// Compiles every language up front, then serves until the process exits.
pub async fn serve(grammar: Arc<LayeredGrammar>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    serve_on(grammar, listener).await
}

pub async fn serve_on(grammar: Arc<LayeredGrammar>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    for l in grammar.languages() {
        if let Some(Err(e)) = grammar.parsing_grammar(l) {
            return Err(std::io::Error::other(e.to_string()));
        }
    }
    axum::serve(listener, router(grammar)).await
}
