use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::wire::WireMessage;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    SiteToServer,
    ServerToSite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    pub direction: Direction,
    pub site_id: u32,
    pub message: WireMessage,
}

/// Every message the server sent or received, in order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MessageLog {
    pub entries: Vec<LogEntry>,
}

impl MessageLog {
    pub fn push(&mut self, direction: Direction, site_id: u32, message: WireMessage) {
        let seq = self.entries.len() as u64;
        self.entries.push(LogEntry {
            seq,
            direction,
            site_id,
            message,
        });
    }

    /// Writes one JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut entries = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            entries.push(serde_json::from_str(&line)?);
        }
        Ok(Self { entries })
    }

    /// Kinds of the site→server messages that carry a matrix; empty when
    /// the log respects the privacy vocabulary.
    pub fn outbound_data_violations(&self) -> Vec<&LogEntry> {
        self.entries
            .iter()
            .filter(|e| e.direction == Direction::SiteToServer)
            .filter(|e| {
                e.message.has_matrix_payload()
                    || !matches!(
                        e.message,
                        WireMessage::Register { .. } | WireMessage::DiscrepancyReply { .. }
                    )
            })
            .collect()
    }
}
