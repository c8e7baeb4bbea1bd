use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use adaptsel_core::config::AdapterConfig;
use adaptsel_core::scene::PointerState;
use adaptsel_core::simulator::{
    generate_environment, run_trial, EnvKind, EnvironmentSpec, TrajectoryParams, TrialMode,
};
use adaptsel_core::techniques::Technique;
use adaptsel_core::trace::{read_trace, Trace};
use adaptsel_service::{SceneCatalog, ServiceOptions, PROTOCOL_VERSION};
use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

struct Server {
    addr: SocketAddr,
    _static: tempfile::TempDir,
    traces: tempfile::TempDir,
}

async fn start() -> Server {
    let static_dir = tempfile::tempdir().unwrap();
    std::fs::write(static_dir.path().join("index.html"), "<html>sandbox</html>").unwrap();
    let traces = tempfile::tempdir().unwrap();
    let options = ServiceOptions {
        catalog: SceneCatalog::bundled(),
        default_scene: "sparse".into(),
        config: AdapterConfig::study(),
        static_dir: static_dir.path().to_path_buf(),
        trace_dir: Some(traces.path().to_path_buf()),
    };
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(adaptsel_service::serve(listener, options));
    Server {
        addr,
        _static: static_dir,
        traces,
    }
}

struct Client {
    ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
    session: Value,
}

impl Client {
    async fn open(addr: SocketAddr, query: &str) -> Self {
        let (mut ws, _) = connect_async(format!("ws://{addr}/ws{query}"))
            .await
            .unwrap();
        let session = recv(&mut ws).await;
        assert_eq!(session["type"], "session");
        assert_eq!(session["v"], PROTOCOL_VERSION);
        Self { ws, session }
    }

    async fn send_text(&mut self, text: String) -> Value {
        self.ws.send(Message::text(text)).await.unwrap();
        recv(&mut self.ws).await
    }

    async fn send(&mut self, body: Value) -> Value {
        let mut body = body;
        body["v"] = json!(PROTOCOL_VERSION);
        self.send_text(body.to_string()).await
    }

    async fn pointer(&mut self, p: &PointerState) -> Value {
        let mut body = serde_json::to_value(p).unwrap();
        body["type"] = json!("pointer_update");
        self.send(body).await
    }

    async fn close(mut self) {
        self.ws.close(None).await.unwrap();
        while self.ws.next().await.is_some() {}
    }
}

async fn recv(ws: &mut WebSocketStream<MaybeTlsStream<TcpStream>>) -> Value {
    loop {
        match ws.next().await.expect("stream open").unwrap() {
            Message::Text(t) => return serde_json::from_str(t.as_str()).unwrap(),
            Message::Ping(_) | Message::Pong(_) => continue,
            other => panic!("unexpected {other:?}"),
        }
    }
}

/// Pointer stream of a simulated adaptive trial in the bundled scene.
fn recorded_pointers(kind: EnvKind) -> (Vec<PointerState>, Trace) {
    let spec = EnvironmentSpec::new(kind, 2.5, 1);
    let env = generate_environment(&spec).unwrap();
    let (_, trace) = run_trial(
        &env.scene,
        env.target,
        &spec.center(),
        TrialMode::Adaptive,
        &TrajectoryParams::default(),
        &AdapterConfig::study(),
        1,
    );
    (
        trace.frames.iter().map(|f| f.pointer.clone()).collect(),
        trace,
    )
}

async fn http_get(addr: SocketAddr, path: &str) -> (u16, String) {
    let mut stream = TcpStream::connect(addr).await.unwrap();
    let request = format!("GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n");
    stream.write_all(request.as_bytes()).await.unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).await.unwrap();
    let status = response[9..12].parse().unwrap();
    let body = response
        .split_once("\r\n\r\n")
        .map_or("", |(_, b)| b)
        .to_string();
    (status, body)
}

async fn wait_for(path: &Path) -> PathBuf {
    for _ in 0..200 {
        if path.is_file() {
            tokio::time::sleep(Duration::from_millis(20)).await;
            return path.to_path_buf();
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("{} never appeared", path.display());
}

fn strip_volatile(mut frame: Value) -> Value {
    frame.as_object_mut().unwrap().remove("frame");
    frame
}

#[tokio::test]
async fn sessions_get_distinct_ids() {
    let server = start().await;
    let a = Client::open(server.addr, "").await;
    let b = Client::open(server.addr, "?scene=dense").await;
    assert_ne!(a.session["session_id"], b.session["session_id"]);
    assert_eq!(a.session["scene"], "sparse");
    assert_eq!(b.session["scene"], "dense");
    assert_eq!(a.session["config_hash"], AdapterConfig::study().hash());
}

#[tokio::test]
async fn unknown_scene_or_preset_is_refused() {
    let server = start().await;
    assert!(connect_async(format!("ws://{}/ws?scene=moon", server.addr))
        .await
        .is_err());
    assert!(
        connect_async(format!("ws://{}/ws?preset=fast", server.addr))
            .await
            .is_err()
    );
}

#[tokio::test]
async fn repeated_pointer_reaches_a_fixed_point() {
    let server = start().await;
    let (pointers, _) = recorded_pointers(EnvKind::Sparse);
    let mut client = Client::open(server.addr, "").await;
    let mut p = pointers[pointers.len() / 2].clone();
    let mut last = Value::Null;
    for i in 0..100 {
        p.timestamp = i as f64 / 90.0;
        last = client.pointer(&p).await;
        assert_eq!(last["type"], "frame");
    }
    p.timestamp = 100.0 / 90.0;
    let next = client.pointer(&p).await;
    let mut a = strip_volatile(last);
    let mut b = strip_volatile(next);
    a.as_object_mut().unwrap().remove("t");
    b.as_object_mut().unwrap().remove("t");
    assert_eq!(a, b);
    assert_eq!(b["switched"], false);
}

#[tokio::test]
async fn malformed_messages_get_an_error_and_the_session_survives() {
    let server = start().await;
    let (pointers, _) = recorded_pointers(EnvKind::Sparse);
    let mut client = Client::open(server.addr, "").await;
    let bad = [
        "{not json".to_string(),
        json!({"v": 1, "type": "teleport"}).to_string(),
        json!({"type": "reset"}).to_string(),
        json!({"v": 99, "type": "reset"}).to_string(),
        json!({"v": 1, "type": "pointer_update", "controller_position": [0, 0]}).to_string(),
    ];
    for text in bad {
        let reply = client.send_text(text.clone()).await;
        assert_eq!(reply["type"], "error", "{text}");
        assert!(reply["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
    let frame = client.pointer(&pointers[0]).await;
    assert_eq!(frame["type"], "frame");
    assert_eq!(frame["frame"], 0);
}

#[tokio::test]
async fn zero_weights_are_rejected() {
    let server = start().await;
    let mut client = Client::open(server.addr, "").await;
    let zero = json!({"speed": 0.0, "accuracy": 0.0, "comfort": 0.0, "familiarity": 0.0});
    let reply = client
        .send(json!({"type": "set_weights", "weights": zero}))
        .await;
    assert_eq!(reply["type"], "error");
    let ok = json!({"speed": 1.0, "accuracy": 1.0, "comfort": 0.0, "familiarity": 0.0});
    let reply = client
        .send(json!({"type": "set_weights", "weights": ok}))
        .await;
    assert_eq!(reply["type"], "session");
    assert_eq!(reply["weights"], ok);
    assert_eq!(reply["preset"], Value::Null);
    assert_ne!(reply["config_hash"], client.session["config_hash"]);
}

#[tokio::test]
async fn reset_matches_a_fresh_session() {
    let server = start().await;
    let (pointers, _) = recorded_pointers(EnvKind::Dense);
    let mut used = Client::open(server.addr, "?scene=dense").await;
    for p in &pointers {
        used.pointer(p).await;
    }
    let after_reset = used.send(json!({"type": "reset"})).await;
    let mut fresh = Client::open(server.addr, "?scene=dense").await;
    let mut a = after_reset;
    let mut b = fresh.session.clone();
    a.as_object_mut().unwrap().remove("session_id");
    b.as_object_mut().unwrap().remove("session_id");
    assert_eq!(a, b);
    for p in &pointers {
        assert_eq!(used.pointer(p).await, fresh.pointer(p).await);
    }
}

#[tokio::test]
async fn interleaved_sessions_match_serial_ones() {
    let server = start().await;
    let (sparse, _) = recorded_pointers(EnvKind::Sparse);
    let (dense, _) = recorded_pointers(EnvKind::Dense);

    let mut serial = Vec::new();
    for (query, pointers) in [("?scene=sparse", &sparse), ("?scene=dense", &dense)] {
        let mut c = Client::open(server.addr, query).await;
        let mut frames = Vec::new();
        for p in pointers {
            frames.push(c.pointer(p).await);
        }
        serial.push(frames);
    }

    let mut a = Client::open(server.addr, "?scene=sparse").await;
    let mut b = Client::open(server.addr, "?scene=dense").await;
    let (mut fa, mut fb) = (Vec::new(), Vec::new());
    for i in 0..sparse.len().max(dense.len()) {
        if let Some(p) = sparse.get(i) {
            fa.push(a.pointer(p).await);
        }
        if let Some(p) = dense.get(i) {
            fb.push(b.pointer(p).await);
        }
    }
    assert_eq!(fa, serial[0]);
    assert_eq!(fb, serial[1]);
}

#[tokio::test]
async fn broadcast_switches_mirror_the_trace() {
    let server = start().await;
    let (pointers, recorded) = recorded_pointers(EnvKind::Dense);
    let mut client = Client::open(server.addr, "?scene=dense").await;
    let id = client.session["session_id"].as_u64().unwrap();
    let mut frames = Vec::new();
    for p in &pointers {
        frames.push(client.pointer(p).await);
    }
    client.close().await;

    let path = wait_for(&server.traces.path().join(format!("session-{id}.jsonl"))).await;
    let saved = read_trace(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap();
    assert_eq!(saved.frames.len(), frames.len());
    for (broadcast, frame) in frames.iter().zip(&saved.frames) {
        assert_eq!(broadcast["frame"], frame.frame);
        assert_eq!(broadcast["switched"], frame.switched);
        assert_eq!(broadcast["optimal"], json!(frame.optimal));
    }
    let switched = |t: &Trace| {
        t.frames
            .iter()
            .filter(|f| f.switched)
            .map(|f| f.frame)
            .collect::<Vec<_>>()
    };
    assert_eq!(switched(&saved), switched(&recorded));
}

#[tokio::test]
async fn dense_sweep_converges_to_raycursor() {
    let server = start().await;
    let (pointers, _) = recorded_pointers(EnvKind::Dense);
    let mut client = Client::open(server.addr, "?scene=dense").await;
    assert_eq!(client.session["technique"], json!(Technique::StickyRay));
    let mut last = Value::Null;
    for p in &pointers {
        last = client.pointer(p).await;
    }
    assert_eq!(last["technique"], json!(Technique::RayCursor));
    assert!(last["cursor_depth"].is_number());
    assert!(last["regions"].as_array().is_some_and(|r| !r.is_empty()));
}

#[tokio::test]
async fn load_scene_switches_the_catalog_entry() {
    let server = start().await;
    let mut client = Client::open(server.addr, "").await;
    let reply = client
        .send(json!({"type": "load_scene", "name": "flat"}))
        .await;
    assert_eq!(reply["type"], "session");
    assert_eq!(reply["scene"], "flat");
    let reply = client
        .send(json!({"type": "load_scene", "name": "moon"}))
        .await;
    assert_eq!(reply["type"], "error");
}

#[tokio::test]
async fn http_routes() {
    let server = start().await;
    let (status, body) = http_get(server.addr, "/health").await;
    assert_eq!(status, 200);
    let health: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(health["v"], PROTOCOL_VERSION);
    assert_eq!(health["config_hash"], AdapterConfig::study().hash());
    assert!(health["build"].as_str().is_some_and(|b| !b.is_empty()));

    let (status, body) = http_get(server.addr, "/scenes").await;
    assert_eq!(status, 200);
    let scenes: Value = serde_json::from_str(&body).unwrap();
    let names: Vec<_> = scenes["scenes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap().to_string())
        .collect();
    for kind in ["sparse", "dense", "flat", "deep"] {
        assert!(names.iter().any(|n| n == kind), "{kind}");
    }

    let (status, body) = http_get(server.addr, "/index.html").await;
    assert_eq!(status, 200);
    assert!(body.contains("sandbox"));
    let (status, _) = http_get(server.addr, "/missing.js").await;
    assert_eq!(status, 404);
}
