//! HTTP and WebSocket front end plus the real-time stepping loop.

use std::num::NonZeroUsize;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, Utf8Bytes, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use cpg_core::scenario::Scenario;
use cpg_core::CpgError;
use serde::Serialize;
use serde_json::{json, Value};
use tokio::sync::{broadcast, mpsc, oneshot, watch};

use crate::engine::{Engine, DEFAULT_DECIMATION};
use crate::wire::{parse_command, WireMessage};

#[derive(Debug, Clone, Copy)]
pub struct ServiceConfig {
    /// Emit a state message every this many steps.
    pub decimation: NonZeroUsize,
    /// Messages a subscriber may fall behind before it is dropped.
    pub subscriber_buffer: usize,
    /// Simulated seconds per wall-clock second.
    pub time_scale: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            decimation: DEFAULT_DECIMATION,
            subscriber_buffer: 256,
            time_scale: 1.0,
        }
    }
}

/// Largest simulated lag the loop will catch up on before re-anchoring to
/// the wall clock.
const MAX_CATCH_UP: Duration = Duration::from_millis(250);
const IDLE_SLEEP: Duration = Duration::from_millis(1);
const MAILBOX: usize = 64;

struct Pending {
    message: WireMessage,
    reply: oneshot::Sender<Result<(), String>>,
}

#[derive(Debug, Clone, Serialize)]
struct Health {
    status: &'static str,
    t: f64,
    paused: bool,
    motion: String,
    subscribers: usize,
}

#[derive(Clone)]
struct AppState {
    mailbox: mpsc::Sender<Pending>,
    snapshots: broadcast::Sender<Utf8Bytes>,
    health: watch::Receiver<Health>,
    manifest: Arc<Value>,
}

/// Library manifest served at `/motions`.
pub fn manifest(scenario: &Scenario, config: &ServiceConfig) -> Value {
    let motions: Vec<Value> = scenario
        .library
        .iter()
        .map(|(id, e)| {
            json!({
                "id": id,
                "class": e.class(),
                "period": e.nominal.period(),
                "min_period": e.min_period,
                "trajectory": e.nominal,
                "feasibility": e.feasibility,
            })
        })
        .collect();
    json!({
        "limits": scenario.limits(),
        "step": scenario.integrator.step(),
        "decimation": config.decimation.get(),
        "motions": motions,
    })
}

/// Builds the router and starts the stepping loop on its own thread. The
/// loop stops once the router and every connection are dropped.
pub fn start(scenario: &Scenario, config: ServiceConfig) -> Result<Router, CpgError> {
    if !(config.time_scale.is_finite() && config.time_scale > 0.0) {
        return Err(CpgError::Scenario(format!(
            "time scale must be positive, got {}",
            config.time_scale
        )));
    }
    let engine = Engine::new(scenario.runtime(None)?, config.decimation);
    let (mailbox, inbox) = mpsc::channel(MAILBOX);
    let (snapshots, _) = broadcast::channel(config.subscriber_buffer.max(1));
    let (health_tx, health) = watch::channel(health_of(&engine, 0));
    let state = AppState {
        mailbox,
        snapshots: snapshots.clone(),
        health,
        manifest: Arc::new(manifest(scenario, &config)),
    };
    thread::Builder::new()
        .name("cpg-step".into())
        .spawn(move || stepping_loop(engine, inbox, snapshots, health_tx, config.time_scale))
        .map_err(|e| CpgError::Scenario(format!("cannot start stepping thread: {e}")))?;
    Ok(Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/motions", get(motions))
        .route("/health", get(health_route))
        .with_state(state))
}

/// Loads `scenario_path` and serves it on `bind` until the process ends.
pub async fn serve(
    scenario_path: &std::path::Path,
    bind: &str,
    config: ServiceConfig,
) -> std::io::Result<()> {
    let scenario = Scenario::load(scenario_path).map_err(std::io::Error::other)?;
    let app = start(&scenario, config).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(bind).await?;
    log::info!(
        "serving {} on {}",
        scenario_path.display(),
        listener.local_addr()?
    );
    axum::serve(listener, app).await
}

fn health_of(engine: &Engine, subscribers: usize) -> Health {
    let rt = engine.runtime();
    Health {
        status: "ok",
        t: rt.t(),
        paused: engine.is_paused(),
        motion: rt.active_motion().to_owned(),
        subscribers,
    }
}

fn encode(msg: &WireMessage) -> Utf8Bytes {
    serde_json::to_string(msg)
        .expect("wire messages serialize")
        .into()
}

fn stepping_loop(
    mut engine: Engine,
    mut inbox: mpsc::Receiver<Pending>,
    snapshots: broadcast::Sender<Utf8Bytes>,
    health: watch::Sender<Health>,
    time_scale: f64,
) {
    let h = engine.step_size();
    let mut anchor = (Instant::now(), engine.runtime().t());
    loop {
        // Drained before every step, so a command lands between two steps.
        let mut drain = |engine: &mut Engine| -> bool {
            loop {
                match inbox.try_recv() {
                    Ok(p) => {
                        let _ = p.reply.send(engine.apply(&p.message));
                    }
                    Err(mpsc::error::TryRecvError::Empty) => return true,
                    Err(mpsc::error::TryRecvError::Disconnected) => return false,
                }
            }
        };
        if !drain(&mut engine) {
            log::info!("stepping loop stopped");
            return;
        }
        let lag = anchor.0.elapsed().as_secs_f64() * time_scale - (engine.runtime().t() - anchor.1);
        if engine.is_paused() || lag > MAX_CATCH_UP.as_secs_f64() * time_scale {
            anchor = (Instant::now(), engine.runtime().t());
        } else {
            let due = (lag / h + 0.5).floor().max(0.0) as usize;
            for _ in 0..due {
                if !drain(&mut engine) || engine.is_paused() {
                    break;
                }
                match engine.step() {
                    Ok(Some(s)) => {
                        let _ = snapshots.send(encode(&WireMessage::State(s)));
                    }
                    Ok(None) => {}
                    Err(e) => {
                        log::error!("t={}: {e}; pausing", engine.runtime().t());
                        let _ = engine.apply(&WireMessage::Pause);
                        let _ = snapshots.send(encode(&WireMessage::Err {
                            seq: None,
                            reason: e.to_string(),
                        }));
                    }
                }
            }
        }
        health.send_replace(health_of(&engine, snapshots.receiver_count()));
        thread::sleep(IDLE_SLEEP);
    }
}

async fn motions(State(state): State<AppState>) -> Json<Value> {
    Json((*state.manifest).clone())
}

async fn health_route(State(state): State<AppState>) -> Json<Health> {
    Json(state.health.borrow().clone())
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| session(socket, state))
}

/// One subscriber: forwards snapshots, relays commands to the mailbox and
/// answers each with an ack or err.
async fn session(mut socket: WebSocket, state: AppState) {
    let mut snapshots = state.snapshots.subscribe();
    let (replies_tx, mut replies) = mpsc::unbounded_channel::<WireMessage>();
    let mut received = 0u64;
    loop {
        let outgoing = tokio::select! {
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    received += 1;
                    match parse_command(text.as_str(), received) {
                        Ok((seq, message)) => {
                            submit(&state.mailbox, seq, message, replies_tx.clone()).await;
                            continue;
                        }
                        Err((seq, reason)) => encode(&WireMessage::Err { seq: Some(seq), reason }),
                    }
                }
                Some(Ok(Message::Binary(_))) => {
                    received += 1;
                    encode(&WireMessage::Err { seq: Some(received), reason: "expected a UTF-8 text frame".into() })
                }
                Some(Ok(Message::Close(_))) | None => return,
                Some(Ok(_)) => continue,
                Some(Err(e)) => {
                    log::debug!("websocket receive failed: {e}");
                    return;
                }
            },
            snapshot = snapshots.recv() => match snapshot {
                Ok(text) => text,
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    log::warn!("dropping subscriber {n} messages behind");
                    let _ = socket.send(Message::Close(None)).await;
                    return;
                }
                Err(broadcast::error::RecvError::Closed) => return,
            },
            Some(reply) = replies.recv() => encode(&reply),
        };
        if socket.send(Message::Text(outgoing)).await.is_err() {
            return;
        }
    }
}

/// Queues a command; the reply is forwarded once the loop has applied it.
async fn submit(
    mailbox: &mpsc::Sender<Pending>,
    seq: u64,
    message: WireMessage,
    replies: mpsc::UnboundedSender<WireMessage>,
) {
    let (reply, outcome) = oneshot::channel();
    let rejected = move |reason: &str| WireMessage::Err {
        seq: Some(seq),
        reason: reason.into(),
    };
    if mailbox.send(Pending { message, reply }).await.is_err() {
        let _ = replies.send(rejected("stepping loop stopped"));
        return;
    }
    tokio::spawn(async move {
        let msg = match outcome.await {
            Ok(Ok(())) => WireMessage::Ack { seq },
            Ok(Err(reason)) => rejected(&reason),
            Err(_) => rejected("stepping loop stopped"),
        };
        let _ = replies.send(msg);
    });
}
