//! Switched systems and the switching signals that drive them.
//!
//! A continuous signal is a finite prefix of segments followed by an
//! optional periodic tail, so it is eventually periodic. Signals are
//! right-continuous: at a switch time the incoming subsystem is already
//! active. Hybrid signals pair a continuous signal (flows) with a discrete
//! one (jumps applied at integer times).

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// How the matrices of a family act on the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Flow generators: the state follows `x' = A x` while active.
    Continuous,
    /// Jump maps: the state is multiplied by `A` per step.
    Discrete,
}

/// Finite family of square matrices of a common dimension, indexed from 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchedSystem {
    matrices: Vec<Matrix>,
    role: Role,
}

impl SwitchedSystem {
    pub fn continuous(matrices: Vec<Matrix>) -> Result<Self> {
        Self::new(matrices, Role::Continuous)
    }

    pub fn discrete(matrices: Vec<Matrix>) -> Result<Self> {
        Self::new(matrices, Role::Discrete)
    }

    pub fn new(matrices: Vec<Matrix>, role: Role) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::InvalidInput("a system needs at least one subsystem".into()));
        };
        let dim = first.dim();
        for (i, m) in matrices.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::InvalidInput(format!(
                    "subsystem {} has dimension {}, expected {}",
                    i + 1,
                    m.dim(),
                    dim
                )));
            }
        }
        Ok(Self { matrices, role })
    }

    /// State dimension shared by all subsystems.
    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    /// Number of subsystems.
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Subsystem matrix by 1-based index.
    pub fn matrix(&self, index: usize) -> Result<&Matrix> {
        if index == 0 || index > self.matrices.len() {
            return Err(Error::InvalidInput(format!(
                "subsystem index {index} out of range 1..={}",
                self.matrices.len()
            )));
        }
        Ok(&self.matrices[index - 1])
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    /// Same family with one matrix appended, as when a damping subsystem is
    /// added at index `len() + 1`.
    pub fn with_appended(&self, extra: Matrix) -> Result<Self> {
        if extra.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: extra.dim() });
        }
        let mut matrices = self.matrices.clone();
        matrices.push(extra);
        Self::new(matrices, self.role)
    }
}

/// One activation period: subsystem `index` stays active for `duration`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Segment {
    /// 1-based subsystem index.
    pub index: usize,
    pub duration: f64,
}

impl Segment {
    pub fn new(index: usize, duration: f64) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidInput("subsystem indices start at 1".into()));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidInput(format!(
                "segment duration must be positive and finite, got {duration}"
            )));
        }
        Ok(Self { index, duration })
    }
}

fn build_segments(raw: &[(usize, f64)]) -> Result<Vec<Segment>> {
    raw.iter().map(|&(i, d)| Segment::new(i, d)).collect()
}

/// Eventually periodic switching signal on the half line.
///
/// The prefix plays once from `t = 0`; afterwards the tail repeats forever.
/// An empty tail makes the signal finite with horizon equal to the prefix
/// duration.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ContinuousSignal {
    prefix: Vec<Segment>,
    tail: Vec<Segment>,
}

/// Completed-and-current activation periods of a signal up to some time.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentRun {
    pub segments: Vec<Segment>,
    /// True when the cut time falls strictly inside the final segment.
    pub last_partial: bool,
}

impl ContinuousSignal {
    pub fn new(prefix: Vec<Segment>, tail: Vec<Segment>) -> Result<Self> {
        if prefix.is_empty() && tail.is_empty() {
            return Err(Error::InvalidInput("signal must contain at least one segment".into()));
        }
        Ok(Self { prefix, tail })
    }

    /// Builds a signal from `(index, duration)` pairs.
    pub fn from_pairs(prefix: &[(usize, f64)], tail: &[(usize, f64)]) -> Result<Self> {
        Self::new(build_segments(prefix)?, build_segments(tail)?)
    }

    /// Purely periodic signal: empty prefix.
    pub fn periodic(tail: &[(usize, f64)]) -> Result<Self> {
        Self::from_pairs(&[], tail)
    }

    pub fn prefix(&self) -> &[Segment] {
        &self.prefix
    }

    pub fn tail(&self) -> &[Segment] {
        &self.tail
    }

    pub fn is_periodic(&self) -> bool {
        !self.tail.is_empty()
    }

    /// Total prefix duration; the tail starts here.
    pub fn prefix_duration(&self) -> f64 {
        self.prefix.iter().map(|s| s.duration).sum()
    }

    /// Tail period, `None` for finite signals.
    pub fn period(&self) -> Option<f64> {
        self.is_periodic().then(|| self.tail.iter().map(|s| s.duration).sum())
    }

    /// End of a finite signal, `None` when the signal covers `[0, inf)`.
    pub fn horizon(&self) -> Option<f64> {
        (!self.is_periodic()).then(|| self.prefix_duration())
    }

    /// Largest subsystem index referenced anywhere in the signal.
    pub fn max_index(&self) -> usize {
        self.prefix
            .iter()
            .chain(&self.tail)
            .map(|s| s.index)
            .max()
            .unwrap_or(0)
    }

    /// Prefix segments followed by the tail repeated forever.
    pub fn iter_segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.prefix.iter().copied().chain(self.tail.iter().cycle().copied())
    }

    /// Active subsystem at time `t`, right-continuous at switch times.
    pub fn active_index(&self, t: f64) -> Result<usize> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidInput(format!("time must be nonnegative, got {t}")));
        }
        let mut consumed = 0.0;
        for seg in &self.prefix {
            if t < consumed + seg.duration {
                return Ok(seg.index);
            }
            consumed += seg.duration;
        }
        let Some(period) = self.period() else {
            return Err(Error::OutOfHorizon { t, horizon: consumed });
        };
        let mut r = (t - consumed).rem_euclid(period);
        for seg in &self.tail {
            if r < seg.duration {
                return Ok(seg.index);
            }
            r -= seg.duration;
        }
        // Only reachable when rounding pushed r to the period boundary.
        Ok(self.tail[0].index)
    }

    /// Activation periods on `[0, t]`, in order, the last one cut at `t` if
    /// `t` falls inside it. Consecutive periods keep their identity even
    /// when they activate the same subsystem, so the run mirrors the
    /// structure of the signal rather than the coarser switch pattern.
    pub fn segments_up_to(&self, t: f64) -> Result<SegmentRun> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidInput(format!("time must be positive, got {t}")));
        }
        let mut segments = Vec::new();
        let mut consumed = 0.0;
        for seg in self.iter_segments() {
            if consumed >= t {
                break;
            }
            let end = consumed + seg.duration;
            if end <= t {
                segments.push(seg);
                consumed = end;
            } else {
                segments.push(Segment { index: seg.index, duration: t - consumed });
                return Ok(SegmentRun { segments, last_partial: true });
            }
        }
        if consumed < t {
            return Err(Error::OutOfHorizon { t, horizon: consumed });
        }
        Ok(SegmentRun { segments, last_partial: false })
    }
}

/// Switching sequence for discrete steps: prefix then optional periodic
/// tail, mirroring [`ContinuousSignal`].
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DiscreteSignal {
    prefix: Vec<usize>,
    tail: Vec<usize>,
}

impl DiscreteSignal {
    pub fn new(prefix: Vec<usize>, tail: Vec<usize>) -> Result<Self> {
        if prefix.is_empty() && tail.is_empty() {
            return Err(Error::InvalidInput("signal must contain at least one step".into()));
        }
        if prefix.iter().chain(&tail).any(|&i| i == 0) {
            return Err(Error::InvalidInput("subsystem indices start at 1".into()));
        }
        Ok(Self { prefix, tail })
    }

    pub fn periodic(tail: &[usize]) -> Result<Self> {
        Self::new(Vec::new(), tail.to_vec())
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn tail(&self) -> &[usize] {
        &self.tail
    }

    pub fn is_periodic(&self) -> bool {
        !self.tail.is_empty()
    }

    /// Number of defined steps, `None` when periodic.
    pub fn horizon_steps(&self) -> Option<usize> {
        (!self.is_periodic()).then(|| self.prefix.len())
    }

    pub fn max_index(&self) -> usize {
        self.prefix.iter().chain(&self.tail).copied().max().unwrap_or(0)
    }

    /// Subsystem applied on step `step` (0-based).
    pub fn at(&self, step: usize) -> Result<usize> {
        if step < self.prefix.len() {
            return Ok(self.prefix[step]);
        }
        if self.tail.is_empty() {
            return Err(Error::OutOfHorizon {
                t: step as f64,
                horizon: self.prefix.len() as f64,
            });
        }
        Ok(self.tail[(step - self.prefix.len()) % self.tail.len()])
    }
}

/// Flow family plus jump family of matching dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridSystem {
    flow: SwitchedSystem,
    jump: SwitchedSystem,
}

impl HybridSystem {
    pub fn new(flow: SwitchedSystem, jump: SwitchedSystem) -> Result<Self> {
        if flow.role() != Role::Continuous || jump.role() != Role::Discrete {
            return Err(Error::InvalidInput(
                "hybrid systems pair a continuous flow family with a discrete jump family".into(),
            ));
        }
        if flow.dim() != jump.dim() {
            return Err(Error::DimensionMismatch { expected: flow.dim(), got: jump.dim() });
        }
        Ok(Self { flow, jump })
    }

    pub fn flow(&self) -> &SwitchedSystem {
        &self.flow
    }

    pub fn jump(&self) -> &SwitchedSystem {
        &self.jump
    }

    pub fn dim(&self) -> usize {
        self.flow.dim()
    }
}

/// Flow signal plus the jump choices applied at integer times: the jump
/// selected by step `n` of `sigma2` fires at time `n + 1`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HybridSignal {
    pub sigma1: ContinuousSignal,
    pub sigma2: DiscreteSignal,
}

impl HybridSignal {
    pub fn new(sigma1: ContinuousSignal, sigma2: DiscreteSignal) -> Self {
        Self { sigma1, sigma2 }
    }
}

/// One entry of an interleaved hybrid schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HybridStep {
    /// Run flow subsystem `index` for `duration`.
    Flow { index: usize, duration: f64 },
    /// Apply jump matrix `index` instantaneously.
    Jump { index: usize },
}

/// Snap tolerance when aligning flow segments to integer jump times.
const INTEGER_SNAP: f64 = 1e-9;

/// Interleaves flow segments with the jumps that fire at integer times,
/// covering `(0, t]`. Flow segments are split at integer boundaries; a jump
/// at time `k` appears after all flow up to `k`, including at `t` itself
/// when `t` is an integer.
pub fn hybrid_segments(signal: &HybridSignal, t: f64) -> Result<Vec<HybridStep>> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidInput(format!("time must be positive, got {t}")));
    }
    if let Some(h) = signal.sigma1.horizon() {
        if t > h + INTEGER_SNAP {
            return Err(Error::OutOfHorizon { t, horizon: h });
        }
    }

    let mut steps = Vec::new();
    let mut pos = 0.0;
    let mut jumps_done = 0usize;
    'outer: for seg in signal.sigma1.iter_segments() {
        let mut remaining = seg.duration.min(t - pos);
        while remaining > INTEGER_SNAP {
            let next_int = pos.floor() + 1.0;
            let room = next_int - pos;
            if remaining < room - INTEGER_SNAP {
                steps.push(HybridStep::Flow { index: seg.index, duration: remaining });
                pos += remaining;
                break;
            }
            let piece = remaining.min(room);
            steps.push(HybridStep::Flow { index: seg.index, duration: piece });
            remaining -= piece;
            if (pos + piece - next_int).abs() <= INTEGER_SNAP && next_int <= t + INTEGER_SNAP {
                pos = next_int;
                steps.push(HybridStep::Jump { index: signal.sigma2.at(jumps_done)? });
                jumps_done += 1;
            } else {
                pos += piece;
            }
        }
        if pos >= t - INTEGER_SNAP {
            break 'outer;
        }
    }
    Ok(steps)
}

/// Severity of a validation finding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

/// Outcome of checking a signal against a system.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.iter().all(|f| f.severity != Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    fn error(&mut self, message: String) {
        self.findings.push(Finding { severity: Severity::Error, message });
    }

    fn warn(&mut self, message: String) {
        self.findings.push(Finding { severity: Severity::Warning, message });
    }

    fn merge(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
    }
}

/// Checks a continuous signal against a system: index ranges are errors;
/// violations of the everything-switches-forever hypothesis (finite signal,
/// or a subsystem missing from the tail) are warnings because such
/// subsystems can be dropped from the asymptotic analysis.
pub fn validate(system: &SwitchedSystem, signal: &ContinuousSignal) -> ValidationReport {
    let mut report = ValidationReport::default();
    if system.role() != Role::Continuous {
        report.error("continuous signals need a continuous system".into());
    }
    let n = system.len();
    for (pos, seg) in signal.prefix().iter().enumerate() {
        if seg.index > n {
            report.error(format!(
                "prefix segment {}: subsystem index {} out of range 1..={n}",
                pos + 1,
                seg.index
            ));
        }
    }
    for (pos, seg) in signal.tail().iter().enumerate() {
        if seg.index > n {
            report.error(format!(
                "tail segment {}: subsystem index {} out of range 1..={n}",
                pos + 1,
                seg.index
            ));
        }
    }
    if signal.is_periodic() {
        for i in 1..=n {
            if !signal.tail().iter().any(|s| s.index == i) {
                report.warn(format!(
                    "subsystem {i} does not appear in the periodic tail and is dropped from asymptotic statistics"
                ));
            }
        }
    } else {
        report.warn(
            "signal is finite, so asymptotic statistics are empirical estimates only".into(),
        );
    }
    report
}

/// Discrete counterpart of [`validate`].
pub fn validate_discrete(system: &SwitchedSystem, signal: &DiscreteSignal) -> ValidationReport {
    let mut report = ValidationReport::default();
    if system.role() != Role::Discrete {
        report.error("discrete signals need a discrete system".into());
    }
    let n = system.len();
    for (pos, &i) in signal.prefix().iter().enumerate() {
        if i > n {
            report.error(format!("prefix step {}: subsystem index {i} out of range 1..={n}", pos + 1));
        }
    }
    for (pos, &i) in signal.tail().iter().enumerate() {
        if i > n {
            report.error(format!("tail step {}: subsystem index {i} out of range 1..={n}", pos + 1));
        }
    }
    if signal.is_periodic() {
        for i in 1..=n {
            if !signal.tail().iter().any(|&j| j == i) {
                report.warn(format!(
                    "subsystem {i} does not appear in the periodic tail and is dropped from asymptotic statistics"
                ));
            }
        }
    } else {
        report.warn(
            "signal is finite, so asymptotic statistics are empirical estimates only".into(),
        );
    }
    report
}

/// Validates both halves of a hybrid pair.
pub fn validate_hybrid(system: &HybridSystem, signal: &HybridSignal) -> ValidationReport {
    let mut report = validate(system.flow(), &signal.sigma1);
    report.merge(validate_discrete(system.jump(), &signal.sigma2));
    report
}

/// Draws `count` segments with i.i.d. indices and i.i.d. durations uniform
/// on `durations`. `weights`, when given, biases the index choice and must
/// have length `n`.
pub fn random_segments(
    rng: &mut impl Rng,
    n: usize,
    count: usize,
    durations: (f64, f64),
    weights: Option<&[f64]>,
) -> Result<Vec<Segment>> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one subsystem".into()));
    }
    let (lo, hi) = durations;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi) {
        return Err(Error::InvalidInput(format!(
            "duration range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
        )));
    }
    let weighted = match weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::InvalidInput(format!(
                    "expected {n} weights, got {}",
                    w.len()
                )));
            }
            Some(
                rand::distributions::WeightedIndex::new(w)
                    .map_err(|e| Error::InvalidInput(format!("bad weights: {e}")))?,
            )
        }
        None => None,
    };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let index = match &weighted {
            Some(w) => rng.sample(w) + 1,
            None => rng.gen_range(1..=n),
        };
        let duration = if lo == hi { lo } else { rng.gen_range(lo..hi) };
        out.push(Segment::new(index, duration)?);
    }
    Ok(out)
}

/// Random purely periodic signal with `tail_len` segments.
pub fn random_periodic_signal(
    rng: &mut impl Rng,
    n: usize,
    tail_len: usize,
    durations: (f64, f64),
) -> Result<ContinuousSignal> {
    if tail_len == 0 {
        return Err(Error::InvalidInput("periodic tail needs at least one segment".into()));
    }
    ContinuousSignal::new(Vec::new(), random_segments(rng, n, tail_len, durations, None)?)
}
