//! Seeded token game.
//!
//! At every step one transition is drawn uniformly from the enabled set. The
//! generator is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`), and
//! the drawn index is `next_u64() % n` over the enabled transitions in
//! ascending index order. Together these fix a trace for every
//! `(net, initial marking, seed, max_steps)`.

use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::net::{MarkedNet, Marking, NetError, TransitionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    Deadlock,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub before: Marking,
    pub transition: TransitionId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub seed: u64,
    pub steps: Vec<Step>,
    pub final_marking: Marking,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulateError {
    #[error("max_steps must be positive")]
    ZeroSteps,
    #[error("at least one seed is required")]
    NoSeeds,
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Runs the token game from the initial marking until deadlock or
/// `max_steps` firings.
pub fn random_run(mn: &MarkedNet, seed: u64, max_steps: usize) -> Result<Trace, SimulateError> {
    if max_steps == 0 {
        return Err(SimulateError::ZeroSteps);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = mn.initial.clone();
    let mut steps = Vec::new();
    loop {
        let enabled = mn.net.enabled_set(&current)?;
        if enabled.is_empty() {
            return Ok(Trace {
                seed,
                steps,
                final_marking: current,
                stop_reason: StopReason::Deadlock,
            });
        }
        if steps.len() == max_steps {
            return Ok(Trace {
                seed,
                steps,
                final_marking: current,
                stop_reason: StopReason::MaxSteps,
            });
        }
        let pick = (rng.next_u64() % enabled.len() as u64) as usize;
        let t = enabled[pick];
        let next = mn.net.fire(&current, t)?;
        steps.push(Step {
            before: std::mem::replace(&mut current, next),
            transition: t,
        });
    }
}

impl Trace {
    /// One `transition-name | marking-vector` line per step; the marking is
    /// the one the transition fired from. A last line `| final-marking`
    /// closes the trace.
    pub fn to_text(&self, mn: &MarkedNet) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let _ = writeln!(
                out,
                "{} | {}",
                mn.net.transition_name(step.transition),
                step.before
            );
        }
        let _ = writeln!(out, "| {}", self.final_marking);
        out
    }

    /// Re-fires the recorded transitions from the net's initial marking.
    pub fn replay(&self, mn: &MarkedNet) -> Result<Marking, NetError> {
        let mut m = mn.initial.clone();
        for step in &self.steps {
            m = mn.net.fire(&m, step.transition)?;
        }
        Ok(m)
    }
}

/// Aggregate over several seeded runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seeds: Vec<u64>,
    pub step_counts: Vec<usize>,
    pub stop_reasons: Vec<StopReason>,
    /// Fraction of runs ending with one token on `Adhesive`; `None` when the
    /// net has no such place.
    pub goal_fraction: Option<f64>,
    /// Largest concurrency degree seen at any marking along any trace.
    pub max_concurrency: usize,
}

pub const GOAL_PLACE: &str = "Adhesive";

pub fn run_statistics(
    mn: &MarkedNet,
    seeds: &[u64],
    max_steps: usize,
) -> Result<RunSummary, SimulateError> {
    if seeds.is_empty() {
        return Err(SimulateError::NoSeeds);
    }
    let goal = mn.net.place_by_name(GOAL_PLACE);
    let mut step_counts = Vec::with_capacity(seeds.len());
    let mut stop_reasons = Vec::with_capacity(seeds.len());
    let mut reached = 0usize;
    let mut max_concurrency = 0;
    for &seed in seeds {
        let trace = random_run(mn, seed, max_steps)?;
        for m in trace
            .steps
            .iter()
            .map(|s| &s.before)
            .chain(std::iter::once(&trace.final_marking))
        {
            max_concurrency = max_concurrency.max(mn.net.max_concurrency_degree(m)?);
        }
        if let Some(g) = goal {
            if trace.final_marking.get(g) == 1 {
                reached += 1;
            }
        }
        step_counts.push(trace.steps.len());
        stop_reasons.push(trace.stop_reason);
    }
    Ok(RunSummary {
        seeds: seeds.to_vec(),
        step_counts,
        stop_reasons,
        goal_fraction: goal.map(|_| reached as f64 / seeds.len() as f64),
        max_concurrency,
    })
}
