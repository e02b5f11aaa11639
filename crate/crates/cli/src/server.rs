//! HTTP and WebSocket service over chart bundles and live sessions.
//!
//! Routes:
//!
//! - `GET /api/bundles`
//! - `GET /api/bundle/{id}/charts`
//! - `GET /api/bundle/{id}/chart/{chart}?format=json|tsv|svg`
//! - `POST /api/sessions` with `{"chart": id, "bundle": optional id}` or `{"session": <session file>}`
//! - `GET /api/session/{id}` (the session file)
//! - `GET /api/session/{id}/page/{r}` (chart JSON of page `r`)
//! - `POST /api/session/{id}/events` (one event; answers with its delta)
//! - `POST /api/session/{id}/import` with `{"from": session id, "r": r, "source": class}`
//! - `GET /api/session/{id}/export?format=json|tsv|svg|session&page=r`
//! - `GET /api/session/{id}/ws` (deltas in order, one JSON message each)
//!
//! Each session has a single writer; readers take the latest snapshot.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::{broadcast, Mutex};

use novikov::chart::Chart;
use novikov::novikov_ss::{ClassRef, Delta, Event, Session, SessionFile, SsError};
use novikov::pipeline::{render_chart, ChartBundle, ChartRecord, ExportError, ExportFormat, PipelineError, MANIFEST};

struct Slot {
    chart: Option<String>,
    bundle: Option<String>,
    writer: Mutex<()>,
    snapshot: RwLock<Arc<Session>>,
    tx: broadcast::Sender<Arc<str>>,
}

impl Slot {
    fn snapshot(&self) -> Arc<Session> {
        self.snapshot.read().unwrap().clone()
    }
}

#[derive(Default)]
pub struct AppState {
    bundles: BTreeMap<String, Arc<ChartBundle>>,
    sessions: RwLock<BTreeMap<String, Arc<Slot>>>,
    next: AtomicU64,
}

impl AppState {
    pub fn new(bundles: BTreeMap<String, Arc<ChartBundle>>) -> AppState {
        AppState { bundles, ..Default::default() }
    }

    pub fn bundles(&self) -> &BTreeMap<String, Arc<ChartBundle>> {
        &self.bundles
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions.read().unwrap().get(id).cloned().ok_or_else(|| ApiError::not_found(format!("session {id}")))
    }

    fn open(&self, session: Session, chart: Option<String>, bundle: Option<String>) -> (String, Arc<Slot>) {
        let id = format!("s{}", self.next.fetch_add(1, Ordering::SeqCst) + 1);
        let mut session = session;
        session.id = id.clone();
        let (tx, _) = broadcast::channel(1024);
        let slot = Arc::new(Slot { chart, bundle, writer: Mutex::new(()), snapshot: RwLock::new(Arc::new(session)), tx });
        self.sessions.write().unwrap().insert(id.clone(), slot.clone());
        (id, slot)
    }
}

/// Bundles in `dir` itself and in its immediate subdirectories, keyed by
/// directory name. Every file is checked against its manifest hash.
pub fn discover_bundles(dir: &Path) -> Result<BTreeMap<String, Arc<ChartBundle>>, PipelineError> {
    let mut out = BTreeMap::new();
    let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "bundle".into());
    if dir.join(MANIFEST).is_file() {
        out.insert(name(dir), Arc::new(ChartBundle::load(dir)?));
    }
    if let Ok(entries) = fs::read_dir(dir) {
        let mut subs: Vec<_> = entries.filter_map(|e| e.ok()).map(|e| e.path()).filter(|p| p.join(MANIFEST).is_file()).collect();
        subs.sort();
        for p in subs {
            out.insert(name(&p), Arc::new(ChartBundle::load(&p)?));
        }
    }
    Ok(out)
}

pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn not_found(what: String) -> ApiError {
        ApiError { status: StatusCode::NOT_FOUND, body: json!({"error": "not_found", "what": what}) }
    }

    fn bad_request(msg: String) -> ApiError {
        ApiError { status: StatusCode::BAD_REQUEST, body: json!({"error": "bad_request", "msg": msg}) }
    }

    fn internal(msg: String) -> ApiError {
        ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, body: json!({"error": "internal", "msg": msg}) }
    }
}

impl From<SsError> for ApiError {
    fn from(e: SsError) -> ApiError {
        let status = match e {
            SsError::ContradictionDetected { .. } => StatusCode::CONFLICT,
            SsError::Format { .. } => StatusCode::BAD_REQUEST,
            SsError::Cobar { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let mut body = serde_json::to_value(&e).expect("errors serialize");
        body["message"] = Value::String(e.to_string());
        ApiError { status, body }
    }
}

impl From<ExportError> for ApiError {
    fn from(e: ExportError) -> ApiError {
        match e {
            ExportError::Session(e) => e.into(),
            e => ApiError { status: StatusCode::BAD_REQUEST, body: serde_json::to_value(&e).expect("errors serialize") },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/bundles", get(list_bundles))
        .route("/api/bundle/{id}/charts", get(list_charts))
        .route("/api/bundle/{id}/chart/{chart}", get(bundle_chart))
        .route("/api/sessions", post(create_session))
        .route("/api/session/{id}", get(session_file))
        .route("/api/session/{id}/page/{r}", get(page))
        .route("/api/session/{id}/events", post(post_event))
        .route("/api/session/{id}/import", post(import))
        .route("/api/session/{id}/export", get(export))
        .route("/api/session/{id}/ws", get(ws))
        .with_state(state)
}

#[derive(Serialize)]
struct BundleInfo<'a> {
    id: &'a str,
    config_hash: &'a str,
    engine_version: &'a str,
    source: &'a str,
    prime: u32,
    s_max: u32,
    t_max: u32,
    chow_max: u32,
    charts: usize,
    failed_layers: Vec<u32>,
    hash: String,
}

async fn list_bundles(State(st): State<Arc<AppState>>) -> Json<Value> {
    let list: Vec<Value> = st
        .bundles
        .iter()
        .map(|(id, b)| {
            let m = &b.manifest;
            serde_json::to_value(BundleInfo {
                id,
                config_hash: &m.config_hash,
                engine_version: &m.engine_version,
                source: &m.source,
                prime: m.prime,
                s_max: m.s_max,
                t_max: m.t_max,
                chow_max: m.chow_max,
                charts: m.charts().count(),
                failed_layers: m.layers.iter().filter(|l| l.failed()).map(|l| l.chow).collect(),
                hash: b.hash(),
            })
            .expect("serializes")
        })
        .collect();
    Json(Value::Array(list))
}

#[derive(Serialize)]
struct ChartListing<'a> {
    chow: u32,
    layer: &'a str,
    name: &'a str,
    shift: (i32, i32),
    #[serde(flatten)]
    record: &'a ChartRecord,
}

fn bundle(st: &AppState, id: &str) -> ApiResult<Arc<ChartBundle>> {
    st.bundles.get(id).cloned().ok_or_else(|| ApiError::not_found(format!("bundle {id}")))
}

async fn list_charts(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let b = bundle(&st, &id)?;
    let mut out = Vec::new();
    for l in &b.manifest.layers {
        for s in &l.summands {
            for c in &s.charts {
                out.push(serde_json::to_value(ChartListing { chow: l.chow, layer: &l.description, name: &s.name, shift: s.shift, record: c }).expect("serializes"));
            }
        }
    }
    Ok(Json(Value::Array(out)))
}

#[derive(Deserialize)]
struct FormatQuery {
    format: Option<String>,
    page: Option<u32>,
}

fn respond(format: ExportFormat, body: String) -> Response {
    ([(header::CONTENT_TYPE, format.mime())], body).into_response()
}

async fn bundle_chart(
    State(st): State<Arc<AppState>>,
    UrlPath((id, chart)): UrlPath<(String, String)>,
    Query(q): Query<FormatQuery>,
) -> ApiResult<Response> {
    let b = bundle(&st, &id)?;
    let rec = b.manifest.chart(&chart).ok_or_else(|| ApiError::not_found(format!("chart {chart}")))?;
    let text = b.text(&rec.chart_file).ok_or_else(|| ApiError::internal(format!("{} is missing", rec.chart_file)))?;
    let c = Chart::from_json(text).map_err(|e| ApiError::internal(e.to_string()))?;
    let format: ExportFormat = q.format.as_deref().unwrap_or("json").parse()?;
    Ok(respond(format, render_chart(&c, format)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    chart: Option<String>,
    bundle: Option<String>,
    session: Option<SessionFile>,
}

#[derive(Serialize)]
struct SessionInfo {
    id: String,
    chart: Option<String>,
    bundle: Option<String>,
    first_page: u32,
    last_page: u32,
    seq: usize,
}

fn info(id: &str, slot: &Slot) -> SessionInfo {
    let s = slot.snapshot();
    SessionInfo { id: id.into(), chart: slot.chart.clone(), bundle: slot.bundle.clone(), first_page: s.first_page(), last_page: s.last_page(), seq: s.log().len() }
}

async fn create_session(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult<(StatusCode, Json<SessionInfo>)> {
    let req: CreateSession = parse_body(&body)?;
    let (session, chart, bundle_id) = match (req.session, req.chart) {
        (Some(file), None) => {
            let s = tokio::task::spawn_blocking(move || Session::from_file(file)).await.map_err(|e| ApiError::internal(e.to_string()))??;
            (s, None, None)
        }
        (None, Some(chart)) => {
            let candidates: Vec<(String, Arc<ChartBundle>)> = match &req.bundle {
                Some(b) => vec![(b.clone(), bundle(&st, b)?)],
                None => st.bundles.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            };
            let (bid, b) = candidates
                .into_iter()
                .find(|(_, b)| b.manifest.chart(&chart).is_some())
                .ok_or_else(|| ApiError::not_found(format!("chart {chart}")))?;
            let c = chart.clone();
            let s = tokio::task::spawn_blocking(move || b.session(&c).expect("chart listed in the manifest"))
                .await
                .map_err(|e| ApiError::internal(e.to_string()))??;
            (s, Some(chart), Some(bid))
        }
        _ => return Err(ApiError::bad_request("give exactly one of \"chart\" and \"session\"".into())),
    };
    let (id, slot) = st.open(session, chart, bundle_id);
    Ok((StatusCode::CREATED, Json(info(&id, &slot))))
}

async fn session_file(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<SessionFile>> {
    Ok(Json(st.slot(&id)?.snapshot().to_file()))
}

async fn page(State(st): State<Arc<AppState>>, UrlPath((id, r)): UrlPath<(String, u32)>) -> ApiResult<Json<Chart>> {
    let s = st.slot(&id)?.snapshot();
    Ok(Json(s.chart(r)?))
}

/// Applies `f` to a copy of the session under the writer lock, then
/// publishes the new snapshot and broadcasts the delta before releasing it.
async fn mutate<F>(slot: Arc<Slot>, f: F) -> ApiResult<Delta>
where
    F: FnOnce(&mut Session) -> Result<Delta, SsError> + Send + 'static,
{
    let _guard = slot.writer.lock().await;
    let mut s = (*slot.snapshot()).clone();
    let (s, delta) = tokio::task::spawn_blocking(move || f(&mut s).map(|d| (s, d))).await.map_err(|e| ApiError::internal(e.to_string()))??;
    *slot.snapshot.write().unwrap() = Arc::new(s);
    let msg: Arc<str> = serde_json::to_string(&delta).expect("deltas serialize").into();
    let _ = slot.tx.send(msg);
    Ok(delta)
}

async fn post_event(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Json<Delta>> {
    let event: Event = parse_body(&body)?;
    if matches!(event, Event::ImportDifferential { .. }) {
        return Err(ApiError::bad_request("imports go through /import".into()));
    }
    let slot = st.slot(&id)?;
    Ok(Json(mutate(slot, move |s| s.apply(event)).await?))
}

#[derive(Deserialize)]
struct ImportRequest {
    from: String,
    r: u32,
    source: ClassRef,
}

async fn import(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Json<Delta>> {
    let req: ImportRequest = parse_body(&body)?;
    let other = st.slot(&req.from)?.snapshot();
    let slot = st.slot(&id)?;
    Ok(Json(mutate(slot, move |s| s.import_from(&other, req.r, req.source)).await?))
}

async fn export(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, Query(q): Query<FormatQuery>) -> ApiResult<Response> {
    let s = st.slot(&id)?.snapshot();
    let fmt = q.format.as_deref().unwrap_or("json");
    if fmt == "session" {
        return Ok(([(header::CONTENT_TYPE, "application/json")], s.save()).into_response());
    }
    let format: ExportFormat = fmt.parse()?;
    let chart = s.chart(q.page.unwrap_or_else(|| s.last_page()))?;
    Ok(respond(format, render_chart(&chart, format)))
}

async fn ws(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, up: WebSocketUpgrade) -> ApiResult<Response> {
    let slot = st.slot(&id)?;
    let rx = slot.tx.subscribe();
    let hello = json!({"type": "hello", "session": id, "seq": slot.snapshot().log().len()}).to_string();
    Ok(up.on_upgrade(move |socket| forward(socket, rx, hello)))
}

async fn forward(mut socket: WebSocket, mut rx: broadcast::Receiver<Arc<str>>, hello: String) {
    if socket.send(Message::Text(hello.into())).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            msg = rx.recv() => match msg {
                Ok(m) => {
                    if socket.send(Message::Text(m.as_ref().into())).await.is_err() {
                        return;
                    }
                }
                // the client sees the gap in sequence numbers and refetches
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

pub async fn serve(state: Arc<AppState>, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
