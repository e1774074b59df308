//! Switching statistics: activation counts, occupancy, and time-weighted
//! geometric means of flow norms.
//!
//! For subsystem `i` active over periods of lengths `t_i1, ..., t_in` with
//! total active time `m_i`, the quantity tracked is
//! `log_geo_mean = sum_j ln(norm(exp(A_i t_ij))) / m_i` taken over completed
//! periods. Its long-run extremes `c_i` (limsup of the geometric mean) and
//! the occupancy fractions `mu_i = liminf m_i(t)/t`, `nu_i = limsup m_i(t)/t`
//! are what the stability certificates consume. Signals with a periodic
//! tail yield these exactly; finite signals only support windowed empirical
//! estimates.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{induced_norm, matrix_exp};
use crate::model::{ContinuousSignal, DiscreteSignal, Role, SwitchedSystem};

/// Fraction of trailing switch samples used by empirical estimators.
pub const DEFAULT_EMPIRICAL_WINDOW: f64 = 0.5;

/// Memoized `ln(norm(exp(A_i tau)))` lookups keyed by `(index, tau)`, so
/// periodic signals cost one exponential per distinct segment shape.
struct LogNormCache<'a> {
    system: &'a SwitchedSystem,
    cache: HashMap<(usize, u64), f64>,
}

impl<'a> LogNormCache<'a> {
    fn new(system: &'a SwitchedSystem) -> Self {
        Self { system, cache: HashMap::new() }
    }

    fn log_norm(&mut self, index: usize, duration: f64) -> Result<f64> {
        if let Some(&v) = self.cache.get(&(index, duration.to_bits())) {
            return Ok(v);
        }
        let a = self.system.matrix(index)?;
        let v = induced_norm(&matrix_exp(a, duration)?)?.ln();
        self.cache.insert((index, duration.to_bits()), v);
        Ok(v)
    }
}

/// Per-subsystem switching record at a fixed time.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SubsystemStats {
    /// 1-based subsystem index.
    pub index: usize,
    /// Activation period durations in order, the last one possibly still in
    /// progress.
    pub periods: Vec<f64>,
    /// The final entry of `periods` is cut short by the observation time.
    pub last_is_partial: bool,
    /// Total active duration including any in-progress period.
    pub total_duration: f64,
    /// Active duration over completed periods only.
    pub completed_duration: f64,
    /// Sum of `ln(norm(exp(A_i t_ij)))` over completed periods.
    pub log_norm_sum: f64,
}

impl SubsystemStats {
    fn empty(index: usize) -> Self {
        Self {
            index,
            periods: Vec::new(),
            last_is_partial: false,
            total_duration: 0.0,
            completed_duration: 0.0,
            log_norm_sum: 0.0,
        }
    }

    /// Number of completed-or-underway activation periods.
    pub fn activation_count(&self) -> usize {
        self.periods.len()
    }

    /// Time-weighted log geometric mean over completed periods, undefined
    /// until the first period completes.
    pub fn log_geo_mean(&self) -> Option<f64> {
        (self.completed_duration > 0.0).then(|| self.log_norm_sum / self.completed_duration)
    }

    pub fn geo_mean(&self) -> Option<f64> {
        self.log_geo_mean().map(f64::exp)
    }
}

/// Switching statistics of a whole family at a fixed time.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SwitchStats {
    pub t: f64,
    /// One record per subsystem, in index order.
    pub per_subsystem: Vec<SubsystemStats>,
}

/// Accumulates activation periods and flow norms over `[0, t]`.
pub fn accumulate(
    system: &SwitchedSystem,
    signal: &ContinuousSignal,
    t: f64,
) -> Result<SwitchStats> {
    if system.role() != Role::Continuous {
        return Err(Error::InvalidInput("accumulate needs a continuous system".into()));
    }
    let run = signal.segments_up_to(t)?;
    let mut cache = LogNormCache::new(system);
    let mut per_subsystem: Vec<SubsystemStats> =
        (1..=system.len()).map(SubsystemStats::empty).collect();

    let last = run.segments.len().saturating_sub(1);
    for (pos, seg) in run.segments.iter().enumerate() {
        let entry = per_subsystem
            .get_mut(seg.index - 1)
            .ok_or_else(|| Error::InvalidInput(format!(
                "signal references subsystem {} but the system has {}",
                seg.index,
                system.len()
            )))?;
        entry.periods.push(seg.duration);
        entry.total_duration += seg.duration;
        if pos == last && run.last_partial {
            entry.last_is_partial = true;
        } else {
            entry.completed_duration += seg.duration;
            entry.log_norm_sum += cache.log_norm(seg.index, seg.duration)?;
        }
    }
    Ok(SwitchStats { t, per_subsystem })
}

/// Long-run statistics of one subsystem.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct AsymptoticEntry {
    /// 1-based subsystem index.
    pub index: usize,
    /// Limsup of the time-weighted geometric mean, `None` when the
    /// subsystem never completes a period.
    pub c: Option<f64>,
    /// `max(c, 1)`, the growth factor charged to non-stabilizing entries.
    pub d: Option<f64>,
    /// Lower occupancy fraction (liminf of `m_i(t)/t`).
    pub mu: f64,
    /// Upper occupancy fraction (limsup of `m_i(t)/t`).
    pub nu: f64,
    /// Zero asymptotic occupancy: the subsystem can be excluded from
    /// certificates without affecting the outcome.
    pub dropped: bool,
}

/// Long-run statistics of a family under one signal.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Asymptotics {
    pub entries: Vec<AsymptoticEntry>,
    /// True when derived from a periodic tail rather than estimated from a
    /// finite window.
    pub exact: bool,
}

/// Exact long-run statistics from the periodic tail. The prefix washes out
/// of every asymptotic quantity, so only the tail enters.
pub fn asymptotics(system: &SwitchedSystem, signal: &ContinuousSignal) -> Result<Asymptotics> {
    if system.role() != Role::Continuous {
        return Err(Error::InvalidInput("asymptotics needs a continuous system".into()));
    }
    if !signal.is_periodic() {
        return Err(Error::InvalidInput(
            "exact asymptotics need a periodic tail; use empirical_asymptotics for finite signals"
                .into(),
        ));
    }
    let period = signal.period().expect("periodic signal has a period");
    let mut cache = LogNormCache::new(system);
    let mut entries = Vec::with_capacity(system.len());
    for index in 1..=system.len() {
        let mut duration = 0.0;
        let mut log_sum = 0.0;
        for seg in signal.tail().iter().filter(|s| s.index == index) {
            duration += seg.duration;
            log_sum += cache.log_norm(index, seg.duration)?;
        }
        if duration > 0.0 {
            let c = (log_sum / duration).exp();
            entries.push(AsymptoticEntry {
                index,
                c: Some(c),
                d: Some(c.max(1.0)),
                mu: duration / period,
                nu: duration / period,
                dropped: false,
            });
        } else {
            entries.push(AsymptoticEntry {
                index,
                c: None,
                d: None,
                mu: 0.0,
                nu: 0.0,
                dropped: true,
            });
        }
    }
    if signal.tail().iter().any(|s| s.index > system.len()) {
        return Err(Error::InvalidInput(format!(
            "signal references subsystem {} but the system has {}",
            signal.max_index(),
            system.len()
        )));
    }
    Ok(Asymptotics { entries, exact: true })
}

/// Windowed empirical estimates of the long-run statistics.
///
/// Running values are sampled at every switch time up to `horizon`; the
/// limsup/liminf are estimated as extremes over the trailing
/// `window_fraction` of those samples. The estimates are advisory: they
/// carry `exact = false` and can never certify stability.
pub fn empirical_asymptotics(
    system: &SwitchedSystem,
    signal: &ContinuousSignal,
    horizon: f64,
    window_fraction: f64,
) -> Result<Asymptotics> {
    if system.role() != Role::Continuous {
        return Err(Error::InvalidInput("asymptotics needs a continuous system".into()));
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "window fraction must lie in (0, 1], got {window_fraction}"
        )));
    }
    let run = signal.segments_up_to(horizon)?;
    let completed = run.segments.len() - usize::from(run.last_partial);
    if completed == 0 {
        return Err(Error::InsufficientData(
            "no switching period completes before the horizon".into(),
        ));
    }

    let n = system.len();
    let mut cache = LogNormCache::new(system);
    let mut duration = vec![0.0f64; n];
    let mut log_sum = vec![0.0f64; n];
    // Per index: samples of the running geometric mean and occupancy
    // fraction, one row per switch time.
    let mut geo_samples: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(completed); n];
    let mut frac_samples: Vec<Vec<f64>> = vec![Vec::with_capacity(completed); n];
    let mut clock = 0.0;
    for seg in &run.segments[..completed] {
        let slot = seg.index.checked_sub(1).filter(|&i| i < n).ok_or_else(|| {
            Error::InvalidInput(format!(
                "signal references subsystem {} but the system has {n}",
                seg.index
            ))
        })?;
        clock += seg.duration;
        duration[slot] += seg.duration;
        log_sum[slot] += cache.log_norm(seg.index, seg.duration)?;
        for i in 0..n {
            geo_samples[i].push((duration[i] > 0.0).then(|| log_sum[i] / duration[i]));
            frac_samples[i].push(duration[i] / clock);
        }
    }

    let start = completed - ((completed as f64 * window_fraction).ceil() as usize).clamp(1, completed);
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let window_geo = geo_samples[i][start..].iter().flatten();
        let c = window_geo.copied().fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        });
        let mu = frac_samples[i][start..].iter().copied().fold(f64::INFINITY, f64::min);
        let nu = frac_samples[i][start..].iter().copied().fold(0.0f64, f64::max);
        entries.push(AsymptoticEntry {
            index: i + 1,
            c: c.map(f64::exp),
            d: c.map(|v| v.exp().max(1.0)),
            mu,
            nu,
            dropped: c.is_none() && nu == 0.0,
        });
    }
    Ok(Asymptotics { entries, exact: false })
}

/// Step counts per subsystem over an initial stretch of a discrete signal.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DiscreteStats {
    pub steps: usize,
    /// Activations per subsystem over the first `steps` steps.
    pub counts: Vec<usize>,
    /// `counts / steps`.
    pub fractions: Vec<f64>,
}

/// Counts subsystem activations over steps `0..steps`.
pub fn accumulate_discrete(
    system: &SwitchedSystem,
    signal: &DiscreteSignal,
    steps: usize,
) -> Result<DiscreteStats> {
    if system.role() != Role::Discrete {
        return Err(Error::InvalidInput("accumulate_discrete needs a discrete system".into()));
    }
    if steps == 0 {
        return Err(Error::InvalidInput("step count must be positive".into()));
    }
    let n = system.len();
    let mut counts = vec![0usize; n];
    for step in 0..steps {
        let index = signal.at(step)?;
        let slot = index.checked_sub(1).filter(|&i| i < n).ok_or_else(|| {
            Error::InvalidInput(format!(
                "signal references subsystem {index} but the system has {n}"
            ))
        })?;
        counts[slot] += 1;
    }
    let fractions = counts.iter().map(|&c| c as f64 / steps as f64).collect();
    Ok(DiscreteStats { steps, counts, fractions })
}

/// Long-run per-step activation fractions of a discrete signal.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DiscreteOccupancy {
    /// Liminf of the running fraction, per subsystem.
    pub mu: Vec<f64>,
    /// Limsup of the running fraction, per subsystem.
    pub nu: Vec<f64>,
    pub exact: bool,
}

/// Exact activation fractions from the periodic tail of a discrete signal.
pub fn discrete_occupancy(n: usize, signal: &DiscreteSignal) -> Result<DiscreteOccupancy> {
    if !signal.is_periodic() {
        return Err(Error::InvalidInput(
            "exact occupancy needs a periodic tail; use empirical_discrete_occupancy".into(),
        ));
    }
    if signal.max_index() > n {
        return Err(Error::InvalidInput(format!(
            "signal references subsystem {} but the system has {n}",
            signal.max_index()
        )));
    }
    let mut counts = vec![0usize; n];
    for &i in signal.tail() {
        counts[i - 1] += 1;
    }
    let fractions: Vec<f64> =
        counts.iter().map(|&c| c as f64 / signal.tail().len() as f64).collect();
    Ok(DiscreteOccupancy { mu: fractions.clone(), nu: fractions, exact: true })
}

/// Windowed empirical activation fractions over `steps` steps.
pub fn empirical_discrete_occupancy(
    n: usize,
    signal: &DiscreteSignal,
    steps: usize,
    window_fraction: f64,
) -> Result<DiscreteOccupancy> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "window fraction must lie in (0, 1], got {window_fraction}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidInput("step count must be positive".into()));
    }
    let mut counts = vec![0usize; n];
    let mut mu = vec![f64::INFINITY; n];
    let mut nu = vec![0.0f64; n];
    let start = steps - ((steps as f64 * window_fraction).ceil() as usize).clamp(1, steps);
    for step in 0..steps {
        let index = signal.at(step)?;
        let slot = index.checked_sub(1).filter(|&i| i < n).ok_or_else(|| {
            Error::InvalidInput(format!(
                "signal references subsystem {index} but the system has {n}"
            ))
        })?;
        counts[slot] += 1;
        if step >= start {
            for i in 0..n {
                let frac = counts[i] as f64 / (step + 1) as f64;
                mu[i] = mu[i].min(frac);
                nu[i] = nu[i].max(frac);
            }
        }
    }
    Ok(DiscreteOccupancy { mu, nu, exact: false })
}
