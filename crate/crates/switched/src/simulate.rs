//! Exact trajectory propagation.
//!
//! Switched linear dynamics are piecewise LTI, so trajectories are computed
//! from matrix exponentials segment by segment instead of by generic ODE
//! stepping: across a segment `(i, tau)` the state advances by
//! `exp(A_i tau)`. There is no discretization error beyond the exponential
//! itself. Exponentials are memoized per `(index, duration)`, so periodic
//! signals cost one exponential per distinct segment shape.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{induced_norm, matrix_exp, vec_norm, Matrix};
use crate::model::{
    hybrid_segments, ContinuousSignal, DiscreteSignal, HybridSignal, HybridStep, HybridSystem,
    Role, SwitchedSystem,
};

/// What a sample marks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    /// Periodic sampling instant (or the initial state).
    Sample,
    /// Structural boundary of the switching signal.
    Switch,
    /// State at an integer time before the jump map is applied.
    PreJump,
    /// State just after a jump map.
    PostJump,
}

impl Event {
    pub fn label(self) -> &'static str {
        match self {
            Event::Sample => "sample",
            Event::Switch => "switch",
            Event::PreJump => "pre_jump",
            Event::PostJump => "post_jump",
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    /// Euclidean norm of `x`, the same norm family as the flow norms.
    pub norm: f64,
    pub event: Event,
}

/// Which dynamics produced a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Continuous,
    Discrete,
    Hybrid,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    /// Samples in time order. Strictly increasing in `t`, except that a
    /// jump emits a pre/post pair sharing its instant.
    pub samples: Vec<Sample>,
    /// Structural boundary times: segment ends and jump instants.
    pub switch_times: Vec<f64>,
}

impl Trajectory {
    pub fn initial(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories are never empty")
    }

    /// End-to-end slope of `ln(norm(x(t)))`, an estimate of the decay rate
    /// per unit time. `None` when the trajectory hits zero or spans no
    /// time.
    pub fn log_norm_slope(&self) -> Option<f64> {
        let first = self.initial();
        let last = self.last();
        let span = last.t - first.t;
        if span <= 0.0 || first.norm <= 0.0 || last.norm <= 0.0 {
            return None;
        }
        Some((last.norm.ln() - first.norm.ln()) / span)
    }
}

fn check_state(system_dim: usize, x0: &[f64]) -> Result<()> {
    if x0.len() != system_dim {
        return Err(Error::DimensionMismatch { expected: system_dim, got: x0.len() });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("initial state must be finite".into()));
    }
    Ok(())
}

/// Memoized `exp(A_index * tau)` lookups.
struct ExpCache<'a> {
    system: &'a SwitchedSystem,
    cache: HashMap<(usize, u64), Matrix>,
}

impl<'a> ExpCache<'a> {
    fn new(system: &'a SwitchedSystem) -> Self {
        Self { system, cache: HashMap::new() }
    }

    fn advance(&mut self, index: usize, duration: f64, x: &[f64]) -> Result<Vec<f64>> {
        let key = (index, duration.to_bits());
        if !self.cache.contains_key(&key) {
            let m = matrix_exp(self.system.matrix(index)?, duration)?;
            self.cache.insert(key, m);
        }
        Ok(self.cache[&key].apply(x))
    }
}

fn push_sample(samples: &mut Vec<Sample>, t: f64, x: &[f64], event: Event) {
    samples.push(Sample { t, x: x.to_vec(), norm: vec_norm(x), event });
}

/// Propagates `x' = A_{sigma(t)} x` over `[0, horizon]`.
///
/// Samples are emitted at the initial time, at every multiple of
/// `sample_step` (measured on a global clock, so sampling times are
/// signal-independent), at every segment boundary, and at the horizon.
pub fn simulate_continuous(
    system: &SwitchedSystem,
    signal: &ContinuousSignal,
    x0: &[f64],
    horizon: f64,
    sample_step: f64,
) -> Result<Trajectory> {
    if system.role() != Role::Continuous {
        return Err(Error::InvalidInput("simulate_continuous needs a continuous system".into()));
    }
    check_state(system.dim(), x0)?;
    if !(sample_step > 0.0 && sample_step.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "sample step must be positive and finite, got {sample_step}"
        )));
    }
    let run = signal.segments_up_to(horizon)?;
    if signal.max_index() > system.len() {
        return Err(Error::InvalidInput(format!(
            "signal references subsystem {} but the system has {}",
            signal.max_index(),
            system.len()
        )));
    }

    let mut cache = ExpCache::new(system);
    let mut samples = Vec::new();
    let mut switch_times = Vec::new();
    let mut x = x0.to_vec();
    let mut seg_start = 0.0f64;
    // Index of the next global sampling instant k * sample_step.
    let mut k: u64 = 1;
    push_sample(&mut samples, 0.0, &x, Event::Sample);

    let last = run.segments.len() - 1;
    for (pos, seg) in run.segments.iter().enumerate() {
        let seg_end = seg_start + seg.duration;
        loop {
            let ts = k as f64 * sample_step;
            if ts >= seg_end || ts > horizon {
                break;
            }
            let xs = cache.advance(seg.index, ts - seg_start, &x)?;
            push_sample(&mut samples, ts, &xs, Event::Sample);
            k += 1;
        }
        x = cache.advance(seg.index, seg.duration, &x)?;
        if pos == last {
            // The final segment may be cut by the horizon; only a completed
            // segment end is a switching boundary.
            let event = if run.last_partial { Event::Sample } else { Event::Switch };
            if !run.last_partial {
                switch_times.push(horizon);
            }
            push_sample(&mut samples, horizon, &x, event);
        } else {
            switch_times.push(seg_end);
            push_sample(&mut samples, seg_end, &x, Event::Switch);
            while k as f64 * sample_step <= seg_end {
                k += 1;
            }
        }
        seg_start = seg_end;
    }
    Ok(Trajectory { kind: TrajectoryKind::Continuous, samples, switch_times })
}

/// Iterates `x(j+1) = A_{sigma(j)} x(j)` for `steps` steps, one sample per
/// integer time.
pub fn simulate_discrete(
    system: &SwitchedSystem,
    signal: &DiscreteSignal,
    x0: &[f64],
    steps: usize,
) -> Result<Trajectory> {
    if system.role() != Role::Discrete {
        return Err(Error::InvalidInput("simulate_discrete needs a discrete system".into()));
    }
    check_state(system.dim(), x0)?;
    if steps == 0 {
        return Err(Error::InvalidInput("step count must be positive".into()));
    }

    let mut samples = Vec::with_capacity(steps + 1);
    let mut switch_times = Vec::new();
    let mut x = x0.to_vec();
    push_sample(&mut samples, 0.0, &x, Event::Sample);
    let mut prev = signal.at(0)?;
    for j in 0..steps {
        let index = signal.at(j)?;
        if index > system.len() {
            return Err(Error::InvalidInput(format!(
                "signal references subsystem {index} but the system has {}",
                system.len()
            )));
        }
        x = system.matrix(index)?.apply(&x);
        let t = (j + 1) as f64;
        // The sample at time j+1 marks a switch when the generator for the
        // next step differs from the one just applied.
        let next = if j + 1 < steps { signal.at(j + 1)? } else { index };
        let event = if next != prev { Event::Switch } else { Event::Sample };
        if next != prev {
            switch_times.push(t);
        }
        prev = next;
        push_sample(&mut samples, t, &x, event);
    }
    Ok(Trajectory { kind: TrajectoryKind::Discrete, samples, switch_times })
}

/// Propagates a hybrid system to an integer horizon: continuous flow within
/// unit intervals, jump maps at integer times. Both the pre-jump and
/// post-jump states are sampled at each jump instant, tagged apart.
pub fn simulate_hybrid(
    hsys: &HybridSystem,
    hsignal: &HybridSignal,
    x0: &[f64],
    horizon: usize,
    sample_step: f64,
) -> Result<Trajectory> {
    check_state(hsys.dim(), x0)?;
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be a positive integer".into()));
    }
    if !(sample_step > 0.0 && sample_step.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "sample step must be positive and finite, got {sample_step}"
        )));
    }
    let steps = hybrid_segments(hsignal, horizon as f64)?;

    let mut cache = ExpCache::new(hsys.flow());
    let mut samples = Vec::new();
    let mut switch_times = Vec::new();
    let mut x = x0.to_vec();
    let mut clock = 0.0f64;
    let mut k: u64 = 1;
    push_sample(&mut samples, 0.0, &x, Event::Sample);

    for (pos, step) in steps.iter().enumerate() {
        match *step {
            HybridStep::Flow { index, duration } => {
                if index > hsys.flow().len() {
                    return Err(Error::InvalidInput(format!(
                        "flow signal references subsystem {index} but the family has {}",
                        hsys.flow().len()
                    )));
                }
                let seg_end = clock + duration;
                loop {
                    let ts = k as f64 * sample_step;
                    if ts >= seg_end {
                        break;
                    }
                    let xs = cache.advance(index, ts - clock, &x)?;
                    push_sample(&mut samples, ts, &xs, Event::Sample);
                    k += 1;
                }
                x = cache.advance(index, duration, &x)?;
                // A flow stretch ending right before a jump carries the
                // pre-jump tag; other boundaries are plain switches.
                let jump_next =
                    matches!(steps.get(pos + 1), Some(HybridStep::Jump { .. }));
                let event = if jump_next { Event::PreJump } else { Event::Switch };
                push_sample(&mut samples, seg_end, &x, event);
                switch_times.push(seg_end);
                while k as f64 * sample_step <= seg_end {
                    k += 1;
                }
                clock = seg_end;
            }
            HybridStep::Jump { index } => {
                let a = hsys.jump().matrix(index)?;
                x = a.apply(&x);
                push_sample(&mut samples, clock, &x, Event::PostJump);
            }
        }
    }
    switch_times.dedup();
    Ok(Trajectory { kind: TrajectoryKind::Hybrid, samples, switch_times })
}

/// Outcome of checking a trajectory against the product-of-norms bound.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BoundCheck {
    pub holds: bool,
    /// Largest observed `norm(x(t)) / (product of flow norms * norm(x0))`
    /// over the switch times.
    pub max_ratio: f64,
}

/// Relative slack allowed when comparing against the norm bound.
const BOUND_SLACK: f64 = 1e-8;

/// Checks `norm(x(t)) <= prod_j norm(exp(A_{i_j} tau_j)) * norm(x0)` at
/// every switch time of a continuous trajectory. The bound is a theorem;
/// a violation beyond rounding slack indicates a numerical bug.
pub fn verify_bound(
    trajectory: &Trajectory,
    system: &SwitchedSystem,
    signal: &ContinuousSignal,
) -> Result<BoundCheck> {
    if trajectory.kind != TrajectoryKind::Continuous {
        return Err(Error::InvalidPairing(
            "the norm bound applies to continuous trajectories".into(),
        ));
    }
    if system.role() != Role::Continuous {
        return Err(Error::InvalidInput("verify_bound needs a continuous system".into()));
    }
    let switch_samples: Vec<&Sample> =
        trajectory.samples.iter().filter(|s| s.event == Event::Switch).collect();
    if switch_samples.len() != trajectory.switch_times.len() {
        return Err(Error::InvalidPairing(
            "trajectory switch tags do not match its switch times".into(),
        ));
    }
    let horizon = trajectory.last().t;
    let run = signal.segments_up_to(horizon)?;
    let completed = run.segments.len() - usize::from(run.last_partial);
    if completed != switch_samples.len() {
        return Err(Error::InvalidPairing(format!(
            "signal has {completed} switch times up to t = {horizon}, trajectory has {}",
            switch_samples.len()
        )));
    }
    if trajectory.initial().x.len() != system.dim() {
        return Err(Error::InvalidPairing("trajectory dimension does not match system".into()));
    }

    let x0_norm = trajectory.initial().norm;
    if x0_norm == 0.0 {
        // The zero trajectory satisfies the bound everywhere.
        return Ok(BoundCheck { holds: true, max_ratio: 0.0 });
    }

    let mut cache: HashMap<(usize, u64), f64> = HashMap::new();
    let mut log_product = x0_norm.ln();
    let mut boundary = 0.0f64;
    let mut max_ratio = f64::NEG_INFINITY;
    for (seg, sample) in run.segments[..completed].iter().zip(&switch_samples) {
        boundary += seg.duration;
        if (sample.t - boundary).abs() > 1e-9 * boundary.max(1.0) {
            return Err(Error::InvalidPairing(format!(
                "switch time {} does not match signal boundary {boundary}",
                sample.t
            )));
        }
        let key = (seg.index, seg.duration.to_bits());
        if !cache.contains_key(&key) {
            let norm = induced_norm(&matrix_exp(system.matrix(seg.index)?, seg.duration)?)?;
            cache.insert(key, norm.ln());
        }
        log_product += cache[&key];
        let log_ratio = if sample.norm == 0.0 {
            f64::NEG_INFINITY
        } else {
            sample.norm.ln() - log_product
        };
        max_ratio = max_ratio.max(log_ratio.exp());
    }
    Ok(BoundCheck { holds: max_ratio <= 1.0 + BOUND_SLACK, max_ratio })
}
