use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use futures_util::StreamExt;
use http_body_util::BodyExt;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;
use tower::ServiceExt;

use novikov::bp_hopf::{cached, HopfKind};
use novikov::chart::Chart;
use novikov::comodules::{unit_comodule, Field};
use novikov::novikov_ss::{ext_session, Event, Session};
use novikov::pipeline::{run_pipeline, DefinitionChoice, LayerSource, PipelineConfig};
use novikov_cli::server::{discover_bundles, router, AppState};

#[derive(Deserialize)]
struct Transcript {
    s_max: u32,
    t_max: u32,
    events: Vec<Event>,
    conflict: Event,
}

fn transcript() -> Transcript {
    serde_json::from_str(include_str!("../../core/tests/golden/transcript.json")).unwrap()
}

fn steenrod_session(s_max: u32, t_max: u32) -> Session {
    let h = cached(HopfKind::DualSteenrod, 2, t_max).unwrap();
    ext_session(&unit_comodule(&h), s_max, t_max).unwrap()
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, text) = call(app, method, uri, body).await;
    (status, serde_json::from_str(&text).unwrap_or_else(|e| panic!("{uri}: {e}: {text}")))
}

async fn upload(app: &Router, s: &Session) -> String {
    let (status, v) = call_json(app, "POST", "/api/sessions", Some(json!({"session": s.to_file()}))).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

fn empty_app() -> Router {
    router(Arc::new(AppState::new(BTreeMap::new())))
}

fn h4_to_h0h3sq() -> Value {
    json!({"type": "assert_differential", "r": 2,
           "source": {"s": 1, "t": 16, "coords": [1]},
           "target": {"s": 3, "t": 17, "coords": [1]}})
}

#[tokio::test]
async fn golden_transcript_matches_the_engine() {
    let tr = transcript();
    let app = empty_app();
    let mut direct = steenrod_session(tr.s_max, tr.t_max);
    let id = upload(&app, &direct).await;
    for (i, e) in tr.events.iter().enumerate() {
        let (status, delta) = call_json(&app, "POST", &format!("/api/session/{id}/events"), Some(serde_json::to_value(e).unwrap())).await;
        assert_eq!(status, StatusCode::OK, "event {i}: {delta}");
        let want = direct.apply(e.clone()).unwrap();
        assert_eq!(delta, serde_json::to_value(&want).unwrap(), "event {i}");
    }
    for r in 2..=direct.last_page() + 1 {
        let (status, chart) = call_json(&app, "GET", &format!("/api/session/{id}/page/{r}"), None).await;
        assert_eq!(status, StatusCode::OK);
        let mut want = direct.chart(r).unwrap();
        want.title = Chart::from_json(&chart.to_string()).unwrap().title;
        assert_eq!(Chart::from_json(&chart.to_string()).unwrap(), want, "page {r}");
    }

    // the conflicting assertion is refused with its chain and changes nothing
    let (_, before) = call(&app, "GET", &format!("/api/session/{id}/export?format=session"), None).await;
    let (status, err) = call_json(&app, "POST", &format!("/api/session/{id}/events"), Some(serde_json::to_value(&tr.conflict).unwrap())).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["error"], "contradiction_detected");
    assert!(!err["chain"].as_array().unwrap().is_empty(), "{err}");
    let (_, after) = call(&app, "GET", &format!("/api/session/{id}/export?format=session"), None).await;
    assert_eq!(before, after);
    let reloaded = Session::load(&after).unwrap();
    assert_eq!(reloaded.tables(), direct.tables());
}

#[tokio::test]
async fn undo_restores_the_previous_snapshot() {
    let app = empty_app();
    let id = upload(&app, &steenrod_session(4, 18)).await;
    let (_, e2_before) = call_json(&app, "GET", &format!("/api/session/{id}/page/3"), None).await;
    let (status, delta) = call_json(&app, "POST", &format!("/api/session/{id}/events"), Some(h4_to_h0h3sq())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(delta["seq"], 1);
    assert_eq!(delta["changes"].as_array().unwrap().len(), 2);
    let (_, e3) = call_json(&app, "GET", &format!("/api/session/{id}/page/3"), None).await;
    assert_ne!(e3, e2_before);
    let (status, _) = call_json(&app, "POST", &format!("/api/session/{id}/events"), Some(json!({"type": "undo"}))).await;
    assert_eq!(status, StatusCode::OK);
    let (_, e3) = call_json(&app, "GET", &format!("/api/session/{id}/page/3"), None).await;
    assert_eq!(e3, e2_before);
    let (status, err) = call_json(&app, "POST", &format!("/api/session/{id}/events"), Some(json!({"type": "undo"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{err}");
    let (status, info) = call_json(&app, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(info["events"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn import_between_sessions() {
    let app = empty_app();
    let left = upload(&app, &steenrod_session(4, 18)).await;
    let right = upload(&app, &steenrod_session(4, 18)).await;
    call_json(&app, "POST", &format!("/api/session/{left}/events"), Some(h4_to_h0h3sq())).await;
    let req = json!({"from": left, "r": 2, "source": {"s": 1, "t": 16, "coords": [1]}});
    let (status, delta) = call_json(&app, "POST", &format!("/api/session/{right}/import"), Some(req)).await;
    assert_eq!(status, StatusCode::OK, "{delta}");
    assert_eq!(delta["event"]["type"], "import_differential");
    let (_, chart) = call_json(&app, "GET", &format!("/api/session/{right}/page/2"), None).await;
    let chart = Chart::from_json(&chart.to_string()).unwrap();
    let edge = chart.edges.iter().find(|e| e.source.s == 1 && e.source.t == 16).unwrap();
    assert_eq!(edge.provenance, format!("pulled-from:{left}"));

    // nothing to pull from an untouched session
    let req = json!({"from": right, "r": 2, "source": {"s": 1, "t": 8, "coords": [1]}});
    let (status, _) = call_json(&app, "POST", &format!("/api/session/{left}/import"), Some(req)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    // imports cannot be smuggled through /events
    let ev = json!({"type": "import_differential", "from": left, "r": 2, "source": {"s": 1, "t": 16, "coords": [1]}});
    let (status, _) = call_json(&app, "POST", &format!("/api/session/{right}/events"), Some(ev)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn bad_requests() {
    let app = empty_app();
    let (status, v) = call_json(&app, "GET", "/api/session/s9/page/2", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "not_found");
    let (status, _) = call_json(&app, "POST", "/api/sessions", Some(json!({"chart": "nope"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call_json(&app, "POST", "/api/sessions", Some(json!({}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/api/sessions", Some(json!("garbage"))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let mut file = steenrod_session(2, 6).to_file();
    file.format = "something-else".into();
    let (status, _) = call_json(&app, "POST", "/api/sessions", Some(json!({"session": file}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let id = upload(&app, &steenrod_session(2, 6)).await;
    let (status, v) = call_json(&app, "GET", &format!("/api/session/{id}/export?format=pdf"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v, json!({"error": "unsupported_format", "format": "pdf"}));
    let bad = json!({"type": "assert_differential", "r": 2, "source": {"s": 1, "t": 3, "coords": [1]}});
    let (status, _) = call_json(&app, "POST", &format!("/api/session/{id}/events"), Some(bad)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn bundles_charts_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        prime: 2,
        s_max: 2,
        t_max: 8,
        chow_max: 2,
        source: LayerSource::Preset(Field::R),
        out: dir.path().join("real"),
        definition: DefinitionChoice::Iadic,
        serve: false,
        port: 0,
    };
    let built = run_pipeline(&cfg).unwrap();
    let app = router(Arc::new(AppState::new(discover_bundles(dir.path()).unwrap())));

    let (_, list) = call_json(&app, "GET", "/api/bundles", None).await;
    assert_eq!(list[0]["id"], "real");
    assert_eq!(list[0]["charts"], 3);
    assert_eq!(list[0]["hash"], built.hash());
    let (_, charts) = call_json(&app, "GET", "/api/bundle/real/charts", None).await;
    let ids: Vec<&str> = charts.as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["chow0.0-iadic", "chow1.0-iadic", "chow2.0-iadic"]);
    assert_eq!(charts[1]["name"], "BP/(2)");

    let (status, svg) = call(&app, "GET", "/api/bundle/real/chart/chow1.0-iadic?format=svg", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(svg.starts_with("<svg"));
    let (_, chart) = call_json(&app, "GET", "/api/bundle/real/chart/chow0.0-iadic", None).await;
    let chart = Chart::from_json(&chart.to_string()).unwrap();
    assert_eq!(chart.source.as_deref(), Some("comodules/chow0.0.comodule"));
    let (status, _) = call(&app, "GET", "/api/bundle/real/chart/chow9.0-iadic", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, info) = call_json(&app, "POST", "/api/sessions", Some(json!({"chart": "chow0.0-iadic"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(info["bundle"], "real");
    let id = info["id"].as_str().unwrap();
    let (status, tsv) = call(&app, "GET", &format!("/api/session/{id}/export?format=tsv&page=1"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(tsv.starts_with("s\tt\tw\tdim\n"));
    assert!(tsv.lines().any(|l| l == "1\t2\t1\t1"));
    let (_, json_export) = call_json(&app, "GET", &format!("/api/session/{id}/export"), None).await;
    let mut from_bundle = chart.clone();
    from_bundle.source = None;
    let mut exported = Chart::from_json(&json_export.to_string()).unwrap();
    exported.title = from_bundle.title.clone();
    assert_eq!(exported.nodes, from_bundle.nodes);
}

async fn next_json<S>(ws: &mut S) -> Value
where
    S: StreamExt<Item = Result<Message, tokio_tungstenite::tungstenite::Error>> + Unpin,
{
    loop {
        let msg = tokio::time::timeout(std::time::Duration::from_secs(30), ws.next()).await.expect("message in time").unwrap().unwrap();
        if let Message::Text(t) = msg {
            return serde_json::from_str(t.as_str()).unwrap();
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn websocket_clients_see_the_same_deltas() {
    let app = empty_app();
    let id = upload(&app, &steenrod_session(4, 18)).await;
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let served = app.clone();
    let server = tokio::spawn(async move { axum::serve(listener, served).await });

    let url = format!("ws://{addr}/api/session/{id}/ws");
    let (mut a, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    let (mut b, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    for ws in [&mut a, &mut b] {
        let hello = next_json(ws).await;
        assert_eq!(hello, json!({"type": "hello", "session": id, "seq": 0}));
    }

    let http = |body: Value| {
        let app = app.clone();
        let id = id.clone();
        async move { call_json(&app, "POST", &format!("/api/session/{id}/events"), Some(body)).await }
    };
    let (_, d1) = http(h4_to_h0h3sq()).await;
    let (_, d2) = http(json!({"type": "undo"})).await;
    let (status, _) = http(json!({"type": "undo"})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (_, d3) = http(json!({"type": "redo"})).await;

    for ws in [&mut a, &mut b] {
        let got = vec![next_json(ws).await, next_json(ws).await, next_json(ws).await];
        assert_eq!(got, vec![d1.clone(), d2.clone(), d3.clone()]);
        assert_eq!(got.iter().map(|d| d["seq"].as_u64().unwrap()).collect::<Vec<_>>(), vec![1, 2, 3]);
    }
    a.close(None).await.unwrap();
    let (_, d4) = http(json!({"type": "undo"})).await;
    assert_eq!(next_json(&mut b).await, d4);
    server.abort();
}
