//! Rejection ABC: draw θ from the prior, simulate, summarize, and keep θ
//! whenever the discrepancy to the observed summary is strictly below ε.
//!
//! Every trial draws from its own stream `rng.child(trial)`, so a trial can be
//! replayed alone and runs with different ε share common random numbers.

use log::info;
use serde::{Deserialize, Serialize};

use crate::rng::StreamRng;
use crate::{Error, Result, RngHandle};

pub const DEFAULT_MAX_TRIALS: usize = 1_000_000;
pub const PROGRESS_EVERY: usize = 10_000;

pub type PriorFn<'a, T> = Box<dyn Fn(&mut StreamRng) -> Result<T> + 'a>;
pub type SimulatorFn<'a, T, X> = Box<dyn Fn(&T, &mut StreamRng) -> Result<X> + 'a>;
pub type SummaryFn<'a, X, S> = Box<dyn Fn(&X) -> Result<S> + 'a>;
pub type DiscrepancyFn<'a, S> = Box<dyn Fn(&S, &S) -> Result<f64> + 'a>;

pub struct AbcProblem<'a, T, X, S> {
    pub prior: PriorFn<'a, T>,
    pub simulator: SimulatorFn<'a, T, X>,
    pub summary: SummaryFn<'a, X, S>,
    /// Called as `discrepancy(simulated, observed)`.
    pub discrepancy: DiscrepancyFn<'a, S>,
    pub observed: S,
    pub epsilon: f64,
    /// Stop once this many parameters are accepted.
    pub target_accepted: usize,
    pub max_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcResult<T> {
    pub epsilon: f64,
    pub accepted: Vec<T>,
    /// Trial index of each accepted parameter, ascending.
    pub accepted_trials: Vec<u64>,
    pub trials: usize,
    pub acceptance_rate: f64,
    /// Discrepancy of every trial, in trial order.
    pub discrepancies: Vec<f64>,
    /// `false` when `max_trials` ran out before the target was reached.
    pub complete: bool,
}

impl<T> AbcResult<T> {
    pub fn new(epsilon: f64, target: usize) -> Self {
        Self {
            epsilon,
            accepted: Vec::new(),
            accepted_trials: Vec::new(),
            trials: 0,
            acceptance_rate: 0.0,
            discrepancies: Vec::new(),
            complete: target == 0,
        }
    }

    /// Records one trial; returns whether it was accepted.
    pub fn record(&mut self, trial: u64, theta: T, discrepancy: f64) -> bool {
        self.trials += 1;
        self.discrepancies.push(discrepancy);
        let accepted = discrepancy < self.epsilon;
        if accepted {
            self.accepted.push(theta);
            self.accepted_trials.push(trial);
        }
        self.acceptance_rate = self.accepted.len() as f64 / self.trials as f64;
        accepted
    }
}

impl<'a, T, X, S> AbcProblem<'a, T, X, S> {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidHyperparameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.target_accepted == 0 {
            return Err(Error::InvalidHyperparameter(
                "target accepted count must be >= 1".into(),
            ));
        }
        if self.max_trials < self.target_accepted {
            return Err(Error::InvalidHyperparameter(format!(
                "max trials {} below target {}",
                self.max_trials, self.target_accepted
            )));
        }
        Ok(())
    }

    /// Draws θ and its discrepancy for a single trial.
    pub fn run_trial(&self, rng: RngHandle, trial: u64) -> Result<(T, f64)> {
        let mut r = rng.child(trial).rng();
        let theta = (self.prior)(&mut r)?;
        let data = (self.simulator)(&theta, &mut r)?;
        let summary = (self.summary)(&data)?;
        let disc = (self.discrepancy)(&summary, &self.observed)?;
        Ok((theta, disc))
    }
}

pub fn abc_rejection<T, X, S>(problem: &AbcProblem<'_, T, X, S>, rng: RngHandle) -> Result<AbcResult<T>> {
    problem.validate()?;
    let mut result = AbcResult::new(problem.epsilon, problem.target_accepted);
    for trial in 0..problem.max_trials as u64 {
        let (theta, disc) = problem.run_trial(rng, trial)?;
        result.record(trial, theta, disc);
        if result.trials % PROGRESS_EVERY == 0 {
            info!(
                "ABC: {} trials, {} accepted (rate {:.4})",
                result.trials,
                result.accepted.len(),
                result.acceptance_rate
            );
        }
        if result.accepted.len() >= problem.target_accepted {
            result.complete = true;
            break;
        }
    }
    Ok(result)
}
