use log::debug;

use super::transport::Channel;
use super::wire::WireMessage;
use crate::discrepancy::{site_similarity, HistogramSpec};
use crate::linalg::select_rows;
use crate::moae::{init_moae, train_moae, MoaeArchitecture, MoaeModel, TrainConfig, TrainReport};
use crate::{Error, Matrix, Result, RngHandle};

/// A site's trained encoder and the encoded minority rows it compares against.
#[derive(Debug, Clone)]
pub struct SiteNode {
    pub site_id: u32,
    pub model: MoaeModel,
    pub encoded: Matrix,
    pub histogram: HistogramSpec,
    pub training: Option<TrainReport>,
}

/// What a site saw and said during one session.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SiteSessionLog {
    pub site_id: u32,
    /// Every message the site sent, in order.
    pub sent: Vec<WireMessage>,
    /// `(round id, φ)` for every answered candidate.
    pub replies: Vec<(u64, f64)>,
    pub notices: Vec<(u64, bool)>,
    pub delivered: Option<Matrix>,
}

impl SiteNode {
    /// Trains the moAE on all local rows, then encodes the minority rows.
    pub fn train(
        site_id: u32,
        x: &Matrix,
        y: &[u8],
        arch: MoaeArchitecture,
        train: &TrainConfig,
        histogram: HistogramSpec,
        rng: RngHandle,
    ) -> Result<Self> {
        let mut model = init_moae(arch, rng.child(0));
        let report = train_moae(&mut model, x, y, train, &mut rng.child(1).rng())?;
        debug!(
            "site {site_id}: moAE loss {:.4} -> {:.4}",
            report.initial_loss,
            report.loss_trace.last().copied().unwrap_or(report.initial_loss)
        );
        let minority: Vec<usize> = (0..y.len()).filter(|&i| y[i] == 1).collect();
        if minority.is_empty() {
            return Err(Error::InsufficientData(format!("site {site_id} has no minority rows")));
        }
        let encoded = model.encode(&select_rows(x, &minority))?;
        Ok(Self {
            site_id,
            model,
            encoded,
            histogram,
            training: Some(report),
        })
    }

    pub fn from_parts(site_id: u32, model: MoaeModel, encoded: Matrix, histogram: HistogramSpec) -> Self {
        Self {
            site_id,
            model,
            encoded,
            histogram,
            training: None,
        }
    }

    pub fn n_minority(&self) -> usize {
        self.encoded.nrows()
    }

    /// Registers, then answers candidate batches until `Shutdown`.
    pub fn serve<C: Channel + ?Sized>(&self, channel: &mut C) -> Result<SiteSessionLog> {
        let mut log = SiteSessionLog {
            site_id: self.site_id,
            ..SiteSessionLog::default()
        };
        let send = |ch: &mut C, log: &mut SiteSessionLog, msg: WireMessage| -> Result<()> {
            ch.send(&msg)?;
            log.sent.push(msg);
            Ok(())
        };
        send(
            channel,
            &mut log,
            WireMessage::Register {
                site_id: self.site_id,
                n_i: self.n_minority(),
            },
        )?;
        loop {
            let msg = channel
                .recv(None)?
                .ok_or_else(|| Error::Transport("server went silent".into()))?;
            match msg {
                WireMessage::CandidateBatch { round_id, batch } => {
                    if batch.shape() != self.encoded.shape() {
                        return Err(Error::Protocol(format!(
                            "site {}: batch of shape {:?}, expected {:?}",
                            self.site_id,
                            batch.shape(),
                            self.encoded.shape()
                        )));
                    }
                    let phi = site_similarity(&self.encoded, &batch, &self.histogram)?;
                    send(
                        channel,
                        &mut log,
                        WireMessage::DiscrepancyReply {
                            round_id,
                            site_id: self.site_id,
                            phi,
                        },
                    )?;
                    log.replies.push((round_id, phi));
                }
                WireMessage::AcceptNotice { round_id, accepted } => {
                    log.notices.push((round_id, accepted));
                }
                WireMessage::SampleDelivery { samples } => {
                    let d = self.encoded.ncols();
                    let samples = if samples.nrows() == 0 {
                        Matrix::zeros(0, d)
                    } else if samples.ncols() != d {
                        return Err(Error::Protocol(format!(
                            "delivered rows have {} columns, expected {d}",
                            samples.ncols()
                        )));
                    } else {
                        samples
                    };
                    log.delivered = Some(samples);
                }
                WireMessage::Shutdown => break,
                other => {
                    return Err(Error::Protocol(format!(
                        "site {} cannot handle {}",
                        self.site_id,
                        other.kind()
                    )))
                }
            }
        }
        Ok(log)
    }
}

/// Trains the site's encoder and serves one session over `channel`.
#[allow(clippy::too_many_arguments)]
pub fn run_site<C: Channel + ?Sized>(
    site_id: u32,
    x: &Matrix,
    y: &[u8],
    arch: MoaeArchitecture,
    train: &TrainConfig,
    histogram: HistogramSpec,
    channel: &mut C,
    rng: RngHandle,
) -> Result<(SiteNode, SiteSessionLog)> {
    let node = SiteNode::train(site_id, x, y, arch, train, histogram, rng)?;
    let log = node.serve(channel)?;
    Ok((node, log))
}
