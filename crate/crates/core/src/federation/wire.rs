use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::linalg::rows;
use crate::{Error, Matrix, Result};

/// Upper bound on a single frame body.
pub const MAX_FRAME_BYTES: usize = 256 * 1024 * 1024;

/// Everything that crosses the wire between the server and the sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum WireMessage {
    Register {
        site_id: u32,
        n_i: usize,
    },
    CandidateBatch {
        round_id: u64,
        #[serde(with = "rows")]
        batch: Matrix,
    },
    DiscrepancyReply {
        round_id: u64,
        site_id: u32,
        phi: f64,
    },
    AcceptNotice {
        round_id: u64,
        accepted: bool,
    },
    SampleDelivery {
        #[serde(with = "rows")]
        samples: Matrix,
    },
    Shutdown,
}

impl WireMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            WireMessage::Register { .. } => "Register",
            WireMessage::CandidateBatch { .. } => "CandidateBatch",
            WireMessage::DiscrepancyReply { .. } => "DiscrepancyReply",
            WireMessage::AcceptNotice { .. } => "AcceptNotice",
            WireMessage::SampleDelivery { .. } => "SampleDelivery",
            WireMessage::Shutdown => "Shutdown",
        }
    }

    /// True for variants that carry a data matrix.
    pub fn has_matrix_payload(&self) -> bool {
        matches!(
            self,
            WireMessage::CandidateBatch { .. } | WireMessage::SampleDelivery { .. }
        )
    }
}

/// 4-byte big-endian length prefix followed by the UTF-8 JSON body.
pub fn encode_frame(msg: &WireMessage) -> Result<Vec<u8>> {
    let body = serde_json::to_vec(msg)?;
    if body.len() > MAX_FRAME_BYTES {
        return Err(Error::Transport(format!("frame of {} bytes is too large", body.len())));
    }
    let mut out = Vec::with_capacity(4 + body.len());
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
    Ok(out)
}

pub fn decode_frame(bytes: &[u8]) -> Result<WireMessage> {
    if bytes.len() < 4 {
        return Err(Error::Protocol(format!(
            "truncated frame header ({} bytes)",
            bytes.len()
        )));
    }
    let len = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
    let body = &bytes[4..];
    if body.len() != len {
        return Err(Error::Protocol(format!(
            "frame declares {len} body bytes, found {}",
            body.len()
        )));
    }
    decode_body(body)
}

fn decode_body(body: &[u8]) -> Result<WireMessage> {
    serde_json::from_slice(body).map_err(|e| Error::Protocol(format!("undecodable frame: {e}")))
}

pub fn write_frame<W: Write>(mut w: W, msg: &WireMessage) -> Result<()> {
    w.write_all(&encode_frame(msg)?)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame. Returns `Ok(None)` when the reader times out before the
/// first header byte arrives; once a frame has started it is read to the end.
pub fn read_frame<R: Read>(mut r: R) -> Result<Option<WireMessage>> {
    let mut header = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut header[got..]) {
            Ok(0) => {
                return Err(Error::Transport(if got == 0 {
                    "connection closed".into()
                } else {
                    "connection closed inside a frame header".into()
                }))
            }
            Ok(k) => got += k,
            Err(e) if is_timeout(&e) && got == 0 => return Ok(None),
            Err(e) if is_timeout(&e) || e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(Error::Transport(e.to_string())),
        }
    }
    let len = u32::from_be_bytes(header) as usize;
    if len > MAX_FRAME_BYTES {
        return Err(Error::Protocol(format!("frame length {len} exceeds limit")));
    }
    let mut body = vec![0u8; len];
    let mut filled = 0;
    while filled < len {
        match r.read(&mut body[filled..]) {
            Ok(0) => return Err(Error::Transport("connection closed inside a frame".into())),
            Ok(k) => filled += k,
            Err(e) if is_timeout(&e) || e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(Error::Transport(e.to_string())),
        }
    }
    decode_body(&body).map(Some)
}

fn is_timeout(e: &io::Error) -> bool {
    matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut)
}
