//! JSON messages exchanged over `/ws`.

use serde::{Deserialize, Serialize};

/// Every message on the socket, tagged by `"type"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireMessage {
    State(StateSnapshot),
    SetMotion {
        id: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<f64>,
    },
    SetGamma {
        value: f64,
    },
    Reset {
        y0: Vec<f64>,
        ydot0: Vec<f64>,
        #[serde(default)]
        phi0: f64,
    },
    Pause,
    Resume,
    Ack {
        seq: u64,
    },
    Err {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seq: Option<u64>,
        reason: String,
    },
}

impl WireMessage {
    pub fn is_command(&self) -> bool {
        matches!(
            self,
            WireMessage::SetMotion { .. }
                | WireMessage::SetGamma { .. }
                | WireMessage::Reset { .. }
                | WireMessage::Pause
                | WireMessage::Resume
        )
    }
}

/// Outbound runtime snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub t: f64,
    pub phi: f64,
    pub y: Vec<f64>,
    pub ydot: Vec<f64>,
    pub f: Vec<f64>,
    pub motion: String,
    pub period: f64,
    pub v3: f64,
    pub dphi: f64,
    pub gamma: f64,
}

/// Inbound frame: a command plus an optional client sequence number.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Envelope {
    #[serde(default)]
    pub seq: Option<u64>,
    #[serde(flatten)]
    pub message: WireMessage,
}

/// Parses an inbound frame. Frames without `seq` are numbered by
/// `fallback`, the 1-based count of frames received on the connection.
/// Malformed frames still yield the best sequence number available so the
/// error reply can be matched.
pub fn parse_command(text: &str, fallback: u64) -> Result<(u64, WireMessage), (u64, String)> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| (fallback, format!("malformed JSON: {e}")))?;
    let seq = value
        .get("seq")
        .and_then(serde_json::Value::as_u64)
        .unwrap_or(fallback);
    let env: Envelope =
        serde_json::from_value(value).map_err(|e| (seq, format!("invalid message: {e}")))?;
    if !env.message.is_command() {
        return Err((seq, "not a command".into()));
    }
    Ok((seq, env.message))
}
