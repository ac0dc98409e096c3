use std::collections::BTreeSet;
use std::time::Duration;

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use super::log::{Direction, MessageLog};
use super::transport::Channel;
use super::wire::WireMessage;
use super::{mean_discrepancy, posterior_oversample, split_rows, GmmPrior};
use crate::abc::{AbcResult, PROGRESS_EVERY};
use crate::gmm::{sample_gmm, GmmParams};
use crate::{Error, Matrix, Result, RngHandle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerConfig {
    pub prior: GmmPrior,
    pub epsilon: f64,
    /// Target number of accepted parameter sets (L).
    pub target_accepted: usize,
    pub max_trials: usize,
    /// Per-reply wait before a round is aborted; `None` waits forever.
    pub round_timeout: Option<Duration>,
    /// Extra attempts for a round whose replies did not all arrive.
    pub retries: u32,
}

impl ServerConfig {
    pub fn new(prior: GmmPrior, epsilon: f64, target_accepted: usize, max_trials: usize) -> Self {
        Self {
            prior,
            epsilon,
            target_accepted,
            max_trials,
            round_timeout: None,
            retries: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteRegistration {
    pub site_id: u32,
    pub n_i: usize,
}

/// Central server session with a fixed set of registered sites.
pub struct Server<C: Channel> {
    config: ServerConfig,
    /// Channels and registrations, sorted by site id.
    sites: Vec<(SiteRegistration, C)>,
    next_round: u64,
    aborted: BTreeSet<u64>,
    log: MessageLog,
}

impl<C: Channel> Server<C> {
    /// Waits for one `Register` per channel and orders sites by id.
    pub fn connect(config: ServerConfig, channels: Vec<C>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::Config("at least one site is required".into()));
        }
        let mut log = MessageLog::default();
        let mut sites = Vec::with_capacity(channels.len());
        for mut ch in channels {
            let msg = ch
                .recv(config.round_timeout)?
                .ok_or_else(|| Error::Transport("site did not register in time".into()))?;
            match msg {
                WireMessage::Register { site_id, n_i } => {
                    if n_i == 0 {
                        return Err(Error::Protocol(format!("site {site_id} registered no rows")));
                    }
                    sites.push((SiteRegistration { site_id, n_i }, ch));
                }
                other => return Err(Error::Protocol(format!("expected Register, got {}", other.kind()))),
            }
        }
        sites.sort_by_key(|(r, _)| r.site_id);
        if sites.windows(2).any(|w| w[0].0.site_id == w[1].0.site_id) {
            return Err(Error::Protocol("duplicate site id".into()));
        }
        // logged in site order so the log does not depend on arrival order
        for (r, _) in &sites {
            log.push(
                Direction::SiteToServer,
                r.site_id,
                WireMessage::Register {
                    site_id: r.site_id,
                    n_i: r.n_i,
                },
            );
        }
        info!(
            "server: {} sites registered, N = {}",
            sites.len(),
            sites.iter().map(|(r, _)| r.n_i).sum::<usize>()
        );
        Ok(Self {
            config,
            sites,
            next_round: 0,
            aborted: BTreeSet::new(),
            log,
        })
    }

    pub fn registrations(&self) -> Vec<SiteRegistration> {
        self.sites.iter().map(|(r, _)| *r).collect()
    }

    pub fn total_rows(&self) -> usize {
        self.sites.iter().map(|(r, _)| r.n_i).sum()
    }

    pub fn log(&self) -> &MessageLog {
        &self.log
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    fn send(&mut self, idx: usize, msg: WireMessage) -> Result<()> {
        let site_id = self.sites[idx].0.site_id;
        self.sites[idx].1.send(&msg)?;
        self.log.push(Direction::ServerToSite, site_id, msg);
        Ok(())
    }

    /// Candidate θ and its generated rows for one trial.
    pub fn candidate(&self, rng: RngHandle, trial: u64) -> Result<(GmmParams, Matrix)> {
        let mut r = rng.child(trial).rng();
        let theta = self.config.prior.sample(&mut r)?;
        let (rows, _) = sample_gmm(&theta, self.total_rows(), &mut r);
        Ok((theta, rows))
    }

    /// Sends each site its slice and collects the replies; returns the mean φ
    /// and the round id that produced it.
    fn evaluate(&mut self, generated: &Matrix) -> Result<(u64, f64)> {
        let sizes: Vec<usize> = self.sites.iter().map(|(r, _)| r.n_i).collect();
        let batches = split_rows(generated, &sizes)?;
        for attempt in 0..=self.config.retries {
            let round_id = self.next_round;
            self.next_round += 1;
            for (idx, batch) in batches.iter().enumerate() {
                self.send(
                    idx,
                    WireMessage::CandidateBatch {
                        round_id,
                        batch: batch.clone(),
                    },
                )?;
            }
            match self.collect(round_id)? {
                Some(phis) => return Ok((round_id, mean_discrepancy(&phis))),
                None => {
                    warn!("round {round_id} timed out (attempt {})", attempt + 1);
                    self.aborted.insert(round_id);
                }
            }
        }
        Err(Error::Transport(format!(
            "no complete set of replies after {} attempts",
            self.config.retries + 1
        )))
    }

    /// Replies of one round in registration order, or `None` on timeout.
    fn collect(&mut self, round_id: u64) -> Result<Option<Vec<f64>>> {
        let mut phis = Vec::with_capacity(self.sites.len());
        for idx in 0..self.sites.len() {
            let expected_site = self.sites[idx].0.site_id;
            loop {
                let Some(msg) = self.sites[idx].1.recv(self.config.round_timeout)? else {
                    return Ok(None);
                };
                self.log.push(Direction::SiteToServer, expected_site, msg.clone());
                match msg {
                    WireMessage::DiscrepancyReply {
                        round_id: r,
                        site_id,
                        phi,
                    } => {
                        if r != round_id && self.aborted.contains(&r) {
                            debug!("dropping late reply for aborted round {r}");
                            continue;
                        }
                        if r != round_id {
                            return Err(Error::Protocol(format!(
                                "reply for round {r} while waiting for round {round_id}"
                            )));
                        }
                        if site_id != expected_site {
                            return Err(Error::Protocol(format!(
                                "site {site_id} replied on the channel of site {expected_site}"
                            )));
                        }
                        if !(phi.is_finite() && phi >= 0.0) {
                            return Err(Error::Protocol(format!("invalid discrepancy {phi}")));
                        }
                        phis.push(phi);
                        break;
                    }
                    other => {
                        return Err(Error::Protocol(format!(
                            "unexpected {} from site {expected_site}",
                            other.kind()
                        )))
                    }
                }
            }
        }
        Ok(Some(phis))
    }

    /// Runs rejection rounds until `target` candidates are accepted at
    /// `epsilon` or `max_trials` is exhausted.
    pub fn infer_with(
        &mut self,
        epsilon: f64,
        target: usize,
        max_trials: usize,
        rng: RngHandle,
    ) -> Result<AbcResult<GmmParams>> {
        if epsilon.is_nan() || epsilon <= 0.0 || target == 0 || max_trials < target {
            return Err(Error::InvalidHyperparameter(format!(
                "need epsilon > 0 and max_trials >= target >= 1 (epsilon {epsilon}, target {target}, max {max_trials})"
            )));
        }
        let mut result = AbcResult::new(epsilon, target);
        for trial in 0..max_trials as u64 {
            let (theta, generated) = self.candidate(rng, trial)?;
            let (round_id, phi_bar) = self.evaluate(&generated)?;
            let accepted = result.record(trial, theta, phi_bar);
            for idx in 0..self.sites.len() {
                self.send(idx, WireMessage::AcceptNotice { round_id, accepted })?;
            }
            if result.trials % PROGRESS_EVERY == 0 {
                info!("server: {} trials, {} accepted", result.trials, result.accepted.len());
            }
            if result.accepted.len() >= target {
                result.complete = true;
                break;
            }
        }
        Ok(result)
    }

    pub fn infer(&mut self, rng: RngHandle) -> Result<AbcResult<GmmParams>> {
        let (eps, target, max) = (self.config.epsilon, self.config.target_accepted, self.config.max_trials);
        self.infer_with(eps, target, max, rng)
    }

    /// Generates `n_needed` posterior-predictive rows for a site and sends them.
    pub fn deliver(&mut self, site_id: u32, accepted: &[GmmParams], n_needed: usize, rng: RngHandle) -> Result<Matrix> {
        let idx = self
            .sites
            .iter()
            .position(|(r, _)| r.site_id == site_id)
            .ok_or_else(|| Error::Config(format!("unknown site {site_id}")))?;
        let samples = posterior_oversample(accepted, n_needed, &mut rng.rng())?;
        self.send(
            idx,
            WireMessage::SampleDelivery {
                samples: samples.clone(),
            },
        )?;
        Ok(samples)
    }

    /// Tells every site to stop and returns the message log.
    pub fn shutdown(mut self) -> Result<MessageLog> {
        for idx in 0..self.sites.len() {
            self.send(idx, WireMessage::Shutdown)?;
        }
        Ok(self.log)
    }
}

/// Registration, inference, and shutdown in one call.
pub fn run_server<C: Channel>(
    config: ServerConfig,
    channels: Vec<C>,
    rng: RngHandle,
) -> Result<(AbcResult<GmmParams>, MessageLog)> {
    let mut server = Server::connect(config, channels)?;
    let result = server.infer(rng)?;
    let log = server.shutdown()?;
    Ok((result, log))
}
