use std::net::SocketAddr;
use std::num::NonZeroUsize;
use std::path::Path;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use cpg_core::scenario::Scenario;
use cpg_service::{start, ServiceConfig};
use futures_util::{SinkExt, StreamExt};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};
use tower::ServiceExt;

const WAIT: Duration = Duration::from_secs(10);

fn rehab() -> Scenario {
    Scenario::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/rehab.json"))
        .unwrap()
}

async fn spawn(config: ServiceConfig) -> (Router, SocketAddr) {
    let app = start(&rehab(), config).unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let served = app.clone();
    tokio::spawn(async move { axum::serve(listener, served).await });
    (app, addr)
}

async fn get_json(app: &Router, path: &str) -> Value {
    let res = app
        .clone()
        .oneshot(Request::get(path).body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    serde_json::from_slice(&bytes).unwrap()
}

struct Client(WebSocketStream<MaybeTlsStream<TcpStream>>);

impl Client {
    async fn connect(addr: SocketAddr) -> Self {
        let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws"))
            .await
            .unwrap();
        Client(ws)
    }

    async fn send(&mut self, v: Value) {
        self.0.send(Message::text(v.to_string())).await.unwrap();
    }

    async fn send_raw(&mut self, text: &str) {
        self.0.send(Message::text(text)).await.unwrap();
    }

    /// Next JSON message, or `None` once the server closes the socket.
    async fn next(&mut self) -> Option<Value> {
        loop {
            match tokio::time::timeout(WAIT, self.0.next())
                .await
                .expect("timed out waiting for a message")
            {
                Some(Ok(Message::Text(t))) => {
                    return Some(serde_json::from_str(t.as_str()).unwrap())
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return None,
                Some(Ok(_)) => continue,
            }
        }
    }

    async fn next_state(&mut self) -> Value {
        loop {
            let m = self.next().await.expect("socket closed");
            if m["type"] == "state" {
                return m;
            }
        }
    }

    /// Skips state messages until the reply to `seq`; returns it with the
    /// states seen on the way.
    async fn reply(&mut self, seq: u64) -> (Value, Vec<Value>) {
        let mut states = Vec::new();
        loop {
            let m = self.next().await.expect("socket closed");
            if m["type"] == "state" {
                states.push(m);
            } else if m["seq"] == json!(seq) {
                return (m, states);
            }
        }
    }
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[tokio::test(flavor = "multi_thread")]
async fn health_and_manifest() {
    let (app, _) = spawn(ServiceConfig::default()).await;
    let health = get_json(&app, "/health").await;
    assert_eq!(health["status"], "ok");
    assert_eq!(health["motion"], "horizontal_circle");

    let manifest = get_json(&app, "/motions").await;
    assert_eq!(manifest["step"], json!(0.001));
    assert_eq!(manifest["decimation"], json!(10));
    let motions = manifest["motions"].as_array().unwrap();
    let ids: Vec<&str> = motions.iter().map(|m| m["id"].as_str().unwrap()).collect();
    assert_eq!(
        ids,
        [
            "horizontal_circle",
            "vertical_circle",
            "vertical_circle_centre"
        ]
    );
    let circle = &motions[0];
    assert_eq!(circle["period"], json!(10.0));
    assert_eq!(circle["trajectory"]["components"][0]["cos"], json!([30.0]));
    assert_eq!(circle["trajectory"]["components"][1]["dc"], json!(45.0));
    assert!(circle["min_period"].as_f64().unwrap() < 10.0);
}

#[tokio::test(flavor = "multi_thread")]
async fn idle_connection_streams_decimated_states() {
    let (_, addr) = spawn(ServiceConfig::default()).await;
    let mut c = Client::connect(addr).await;
    let first = c.next_state().await;
    for key in [
        "t", "phi", "y", "ydot", "f", "motion", "period", "v3", "dphi", "gamma",
    ] {
        assert!(!first[key].is_null(), "missing {key}");
    }
    let started = std::time::Instant::now();
    let mut prev = first["t"].as_f64().unwrap();
    let mut count = 0;
    while started.elapsed() < Duration::from_secs(1) {
        let t = c.next_state().await["t"].as_f64().unwrap();
        assert!(
            (t - prev - 0.01).abs() < 1e-9,
            "states {prev} -> {t} are not 10 steps apart"
        );
        prev = t;
        count += 1;
    }
    // Real-time pacing at h = 1e-3 and decimation 10 gives about 100 per second.
    assert!((50..=150).contains(&count), "{count} states in one second");
}

#[tokio::test(flavor = "multi_thread")]
async fn switching_motion_is_continuous() {
    let (_, addr) = spawn(ServiceConfig::default()).await;
    let mut c = Client::connect(addr).await;
    let mut states = vec![c.next_state().await];
    c.send(json!({"type": "set_motion", "id": "vertical_circle", "period": 7, "seq": 1}))
        .await;
    let (reply, seen) = c.reply(1).await;
    assert_eq!(reply, json!({"type": "ack", "seq": 1}));
    states.extend(seen);
    let mut after = c.next_state().await;
    while after["motion"] != "vertical_circle" {
        states.push(after);
        after = c.next_state().await;
    }
    assert_eq!(after["period"], json!(7.0));
    states.push(after);
    for _ in 0..20 {
        states.push(c.next_state().await);
    }
    for w in states.windows(2) {
        let dt = w[1]["t"].as_f64().unwrap() - w[0]["t"].as_f64().unwrap();
        for (a, b) in floats(&w[0]["y"]).iter().zip(floats(&w[1]["y"])) {
            assert!(
                (b - a).abs() < 40.0 * dt,
                "jump {} over {dt} s",
                (b - a).abs()
            );
        }
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn gamma_controls_the_phase_rate() {
    let (_, addr) = spawn(ServiceConfig::default()).await;
    let mut c = Client::connect(addr).await;
    c.send(json!({"type": "set_gamma", "value": 0, "seq": 1}))
        .await;
    assert_eq!(c.reply(1).await.0["type"], "ack");
    let s = c.next_state().await;
    assert_eq!(s["gamma"], json!(0.0));
    assert_eq!(s["dphi"], json!(1.0));

    c.send(json!({"type": "set_gamma", "value": 10, "seq": 2}))
        .await;
    assert_eq!(c.reply(2).await.0["type"], "ack");
    let s = c.next_state().await;
    assert_eq!(s["gamma"], json!(10.0));
    assert_ne!(s["dphi"], json!(1.0));
}

#[tokio::test(flavor = "multi_thread")]
async fn bad_commands_get_err_replies() {
    let (_, addr) = spawn(ServiceConfig::default()).await;
    let mut c = Client::connect(addr).await;
    c.send(json!({"type": "set_motion", "id": "backflip", "seq": 1}))
        .await;
    let (r, _) = c.reply(1).await;
    assert_eq!(r["type"], "err");
    assert!(r["reason"].as_str().unwrap().contains("backflip"));

    c.send(json!({"type": "set_motion", "id": "horizontal_circle", "period": 0.5, "seq": 2}))
        .await;
    assert_eq!(c.reply(2).await.0["type"], "err");

    // Frames without a seq are numbered by arrival: this is the third.
    c.send_raw("{\"type\": ").await;
    let (r, _) = c.reply(3).await;
    assert_eq!(r["type"], "err");
    assert!(r["reason"].as_str().unwrap().contains("malformed"));

    c.send(json!({"type": "reset", "y0": [0.0], "ydot0": [0.0], "phi0": 0, "seq": 4}))
        .await;
    assert_eq!(c.reply(4).await.0["type"], "err");

    let s = c.next_state().await;
    assert_eq!(s["motion"], "horizontal_circle");
}

#[tokio::test(flavor = "multi_thread")]
async fn pause_resume_and_reset() {
    let (app, addr) = spawn(ServiceConfig::default()).await;
    let mut c = Client::connect(addr).await;
    c.send(json!({"type": "pause", "seq": 1})).await;
    let (r, seen) = c.reply(1).await;
    assert_eq!(r["type"], "ack");
    let t_paused = seen.last().map_or(0.0, |s| s["t"].as_f64().unwrap());
    tokio::time::sleep(Duration::from_millis(300)).await;
    let health = get_json(&app, "/health").await;
    assert_eq!(health["paused"], json!(true));
    assert!(health["t"].as_f64().unwrap() - t_paused < 0.011);

    c.send(json!({"type": "reset", "y0": [20.0, -30.0], "ydot0": [0.0, 0.0], "phi0": 0, "seq": 2}))
        .await;
    assert_eq!(c.reply(2).await.0["type"], "ack");
    c.send(json!({"type": "resume", "seq": 3})).await;
    let (r, seen) = c.reply(3).await;
    assert_eq!(r["type"], "ack");
    assert!(seen.is_empty(), "states arrived while paused");
    let s = c.next_state().await;
    let y = floats(&s["y"]);
    assert!(
        (y[0] - 20.0).abs() < 1.0 && (y[1] + 30.0).abs() < 1.0,
        "{y:?}"
    );
}

#[tokio::test(flavor = "multi_thread")]
async fn subscribers_see_identical_snapshots() {
    let (_, addr) = spawn(ServiceConfig::default()).await;
    let mut a = Client::connect(addr).await;
    let mut b = Client::connect(addr).await;
    let sa: Vec<Value> = {
        let mut v = Vec::new();
        for _ in 0..30 {
            v.push(a.next_state().await);
        }
        v
    };
    let mut matched = 0;
    for _ in 0..60 {
        let s = b.next_state().await;
        if let Some(other) = sa.iter().find(|x| x["t"] == s["t"]) {
            assert_eq!(other, &s);
            matched += 1;
        }
    }
    assert!(matched >= 10, "only {matched} snapshots overlapped");
}

#[tokio::test(flavor = "multi_thread")]
async fn slow_subscriber_is_dropped() {
    let config = ServiceConfig {
        decimation: NonZeroUsize::new(1).unwrap(),
        subscriber_buffer: 64,
        time_scale: 10.0,
    };
    let (app, addr) = spawn(config).await;
    let mut slow = Client::connect(addr).await;
    let t0 = get_json(&app, "/health").await["t"].as_f64().unwrap();
    // Never reading lets the socket buffers fill, after which the
    // subscriber falls behind the broadcast and is cut off.
    tokio::time::sleep(Duration::from_secs(3)).await;
    let health = get_json(&app, "/health").await;
    assert!(
        health["t"].as_f64().unwrap() > t0 + 10.0,
        "stepping stalled: {health}"
    );
    let mut closed = false;
    for _ in 0..10_000_000 {
        if slow.next().await.is_none() {
            closed = true;
            break;
        }
    }
    assert!(closed, "slow subscriber was never dropped");
    assert_eq!(get_json(&app, "/health").await["subscribers"], json!(0));
}
