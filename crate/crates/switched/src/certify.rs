//! Sufficient stability conditions for switched systems.
//!
//! The central quantity is the log margin
//! `L = sum_{i in S} mu_i ln c_i + sum_{i not in S} nu_i ln d_i`
//! over a stabilizing set `S` whose members all satisfy `c_i < 1`.
//! `L < 0` certifies asymptotic stability with per-unit-time decay factor
//! `kappa = e^L`. The conditions are sufficient only: `not-certified` never
//! asserts instability. Only exact (periodic-tail) statistics can certify;
//! empirical estimates yield advisory margins.

use crate::error::{Error, Result};
use crate::linalg::induced_norm;
use crate::model::{HybridSignal, HybridSystem, Role, SwitchedSystem};
use crate::stats::{
    asymptotics, discrete_occupancy, empirical_asymptotics, empirical_discrete_occupancy,
    Asymptotics, DiscreteOccupancy, DEFAULT_EMPIRICAL_WINDOW,
};

/// Slack for boundedness checks at the `c = 1` boundary, so norm-1 jump
/// families (rotations, permutations) are not rejected over rounding.
const BOUNDED_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedStable,
    NotCertified,
}

/// Per-subsystem data as it entered the margin.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CertificateEntry {
    /// 1-based subsystem index.
    pub index: usize,
    /// Member of the stabilizing set.
    pub stabilizing: bool,
    /// Geometric mean of flow norms, or the induced norm in discrete mode.
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub mu: f64,
    pub nu: f64,
    /// Zero asymptotic occupancy; excluded from the margin.
    pub dropped: bool,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Certificate {
    pub mode: Role,
    /// 1-based indices of the stabilizing set, ascending.
    pub stabilizing_set: Vec<usize>,
    pub entries: Vec<CertificateEntry>,
    /// The margin `L`; negative certifies (in exact mode).
    pub log_margin: f64,
    /// Same sum with `ln c` in place of `ln d` for non-stabilizing entries.
    /// Informational: a tighter but not boundary-safe variant.
    pub proof_variant_log_margin: f64,
    /// Per-unit-time decay bound `e^L`, present when `L < 0`. The transient
    /// constant in front of the decay is not bounded here.
    pub kappa: Option<f64>,
    pub exact: bool,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn certified(&self) -> bool {
        self.verdict == Verdict::CertifiedStable
    }
}

fn build_certificate(
    mode: Role,
    asym: &Asymptotics,
    requested: Option<&[usize]>,
) -> Result<Certificate> {
    let n = asym.entries.len();
    for entry in &asym.entries {
        if entry.c.is_none() && !entry.dropped {
            return Err(Error::InsufficientData(format!(
                "subsystem {} has occupancy but never completes a period",
                entry.index
            )));
        }
    }

    let stabilizing_set: Vec<usize> = match requested {
        Some(set) => {
            let mut sorted = set.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != set.len() {
                return Err(Error::InvalidSet("stabilizing set repeats an index".into()));
            }
            for &i in &sorted {
                if i == 0 || i > n {
                    return Err(Error::InvalidSet(format!(
                        "stabilizing set index {i} outside 1..={n}"
                    )));
                }
                match asym.entries[i - 1].c {
                    Some(c) if c < 1.0 => {}
                    Some(c) => {
                        return Err(Error::InvalidSet(format!(
                            "subsystem {i} has c = {c} >= 1 and cannot stabilize"
                        )))
                    }
                    None => {
                        return Err(Error::InvalidSet(format!(
                            "subsystem {i} never runs; it cannot stabilize"
                        )))
                    }
                }
            }
            sorted
        }
        // Default set: every subsystem with c < 1. Moving such an index out
        // of S trades mu ln c <= 0 for nu ln 1 = 0, so this choice
        // minimizes L.
        None => asym
            .entries
            .iter()
            .filter(|e| e.c.is_some_and(|c| c < 1.0))
            .map(|e| e.index)
            .collect(),
    };

    let mut log_margin = 0.0;
    let mut proof_variant = 0.0;
    let mut entries = Vec::with_capacity(n);
    for e in &asym.entries {
        let stabilizing = stabilizing_set.contains(&e.index);
        if let (Some(c), Some(d)) = (e.c, e.d) {
            if stabilizing {
                log_margin += e.mu * c.ln();
                proof_variant += e.mu * c.ln();
            } else {
                log_margin += e.nu * d.ln();
                proof_variant += e.nu * c.ln();
            }
        }
        entries.push(CertificateEntry {
            index: e.index,
            stabilizing,
            c: e.c,
            d: e.d,
            mu: e.mu,
            nu: e.nu,
            dropped: e.dropped,
        });
    }

    let verdict = if log_margin < 0.0 && asym.exact {
        Verdict::CertifiedStable
    } else {
        Verdict::NotCertified
    };
    Ok(Certificate {
        mode,
        stabilizing_set,
        entries,
        log_margin,
        proof_variant_log_margin: proof_variant,
        kappa: (log_margin < 0.0).then(|| log_margin.exp()),
        exact: asym.exact,
        verdict,
    })
}

/// Certifies a continuous switched system from its long-run statistics.
///
/// With `stabilizing_set` omitted the margin-minimizing default
/// `S = {i : c_i < 1}` is used. Subsystems with zero asymptotic occupancy
/// are excluded from the margin; callers should surface their `dropped`
/// flags as warnings.
pub fn certify_continuous(
    asym: &Asymptotics,
    stabilizing_set: Option<&[usize]>,
) -> Result<Certificate> {
    build_certificate(Role::Continuous, asym, stabilizing_set)
}

/// Certifies a discrete switched system from activation fractions.
///
/// Induced norms stand in for the geometric means and the partition is
/// forced: `S = {i : norm(A_i) < 1}`.
pub fn certify_discrete(
    system: &SwitchedSystem,
    occupancy: &DiscreteOccupancy,
) -> Result<Certificate> {
    if system.role() != Role::Discrete {
        return Err(Error::InvalidInput("certify_discrete needs a discrete system".into()));
    }
    if occupancy.mu.len() != system.len() || occupancy.nu.len() != system.len() {
        return Err(Error::InvalidInput(format!(
            "occupancy covers {} subsystems, system has {}",
            occupancy.mu.len(),
            system.len()
        )));
    }
    let mut entries = Vec::with_capacity(system.len());
    for (i, a) in system.matrices().iter().enumerate() {
        let norm = induced_norm(a)?;
        entries.push(crate::stats::AsymptoticEntry {
            index: i + 1,
            c: Some(norm),
            d: Some(norm.max(1.0)),
            mu: occupancy.mu[i],
            nu: occupancy.nu[i],
            dropped: occupancy.nu[i] == 0.0,
        });
    }
    let asym = Asymptotics { entries, exact: occupancy.exact };
    build_certificate(Role::Discrete, &asym, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HybridCombination {
    /// Both the flow and the jump part certify on their own.
    BothDecay,
    /// One part certifies and the other is bounded (all its norms at 1 or
    /// below).
    OneBoundedOneDecays,
    None,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HybridCertificate {
    pub flow_certificate: Certificate,
    pub jump_certificate: Certificate,
    pub combination: HybridCombination,
    pub verdict: Verdict,
    /// Advisory decay factor per unit time, from the certified parts.
    pub kappa: Option<f64>,
}

impl HybridCertificate {
    pub fn certified(&self) -> bool {
        self.verdict == Verdict::CertifiedStable
    }
}

/// True when every subsystem that keeps running has norms at 1 or below,
/// proving products of its factors stay bounded. Claimed only from exact
/// statistics.
fn bounded(cert: &Certificate) -> bool {
    cert.exact
        && cert.log_margin <= BOUNDED_SLACK
        && cert
            .entries
            .iter()
            .filter(|e| !e.dropped)
            .all(|e| e.c.is_some_and(|c| c <= 1.0 + BOUNDED_SLACK))
}

/// Certifies a hybrid system by combining the flow and jump conditions.
///
/// The flow runs under `sigma1` and the jump family fires at integer times
/// under `sigma2`; the two halves are certified independently and combined:
/// both certified, or one certified with the other bounded.
pub fn certify_hybrid(hsys: &HybridSystem, hsignal: &HybridSignal) -> Result<HybridCertificate> {
    let flow_asym = if hsignal.sigma1.is_periodic() {
        asymptotics(hsys.flow(), &hsignal.sigma1)?
    } else {
        let horizon = hsignal.sigma1.horizon().expect("finite signal has a horizon");
        empirical_asymptotics(hsys.flow(), &hsignal.sigma1, horizon, DEFAULT_EMPIRICAL_WINDOW)?
    };
    let flow_certificate = certify_continuous(&flow_asym, None)?;

    let occupancy = if hsignal.sigma2.is_periodic() {
        discrete_occupancy(hsys.jump().len(), &hsignal.sigma2)?
    } else {
        let steps = hsignal.sigma2.horizon_steps().expect("finite signal has a horizon");
        empirical_discrete_occupancy(
            hsys.jump().len(),
            &hsignal.sigma2,
            steps,
            DEFAULT_EMPIRICAL_WINDOW,
        )?
    };
    let jump_certificate = certify_discrete(hsys.jump(), &occupancy)?;

    let combination = if flow_certificate.certified() && jump_certificate.certified() {
        HybridCombination::BothDecay
    } else if flow_certificate.certified() && bounded(&jump_certificate) {
        HybridCombination::OneBoundedOneDecays
    } else if jump_certificate.certified() && bounded(&flow_certificate) {
        HybridCombination::OneBoundedOneDecays
    } else {
        HybridCombination::None
    };

    let kappa = match combination {
        HybridCombination::BothDecay => Some(
            flow_certificate.kappa.unwrap_or(1.0) * jump_certificate.kappa.unwrap_or(1.0),
        ),
        HybridCombination::OneBoundedOneDecays => {
            if flow_certificate.certified() {
                flow_certificate.kappa
            } else {
                jump_certificate.kappa
            }
        }
        HybridCombination::None => None,
    };
    let verdict = if combination == HybridCombination::None {
        Verdict::NotCertified
    } else {
        Verdict::CertifiedStable
    };
    Ok(HybridCertificate { flow_certificate, jump_certificate, combination, verdict, kappa })
}

/// Outcome of the ratio-based sufficient condition.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SConditionReport {
    pub s: f64,
    /// The product `prod_stable c_i * (prod_bad c_j)^s`.
    pub product: f64,
    pub product_ok: bool,
    /// `(stable index, bad index, mu ratio)` triples where the occupancy
    /// ratio fails to exceed `1/s`.
    pub ratio_failures: Vec<(usize, usize, f64)>,
    /// Indices outside both sets whose `c` exceeds 1: the condition says
    /// nothing about them.
    pub uncovered_unstable: Vec<usize>,
    pub holds: bool,
    pub exact: bool,
}

/// Tests the ratio condition: the stable product beats the bad product
/// raised to `s`, and every stable subsystem runs more than `1/s` times as
/// long as every bad one.
pub fn certify_s_condition(
    asym: &Asymptotics,
    stable_set: &[usize],
    bad_set: &[usize],
    s: f64,
) -> Result<SConditionReport> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("s must be positive and finite, got {s}")));
    }
    let n = asym.entries.len();
    let check_range = |set: &[usize]| -> Result<()> {
        for &i in set {
            if i == 0 || i > n {
                return Err(Error::InvalidSet(format!("index {i} outside 1..={n}")));
            }
        }
        Ok(())
    };
    check_range(stable_set)?;
    check_range(bad_set)?;
    if stable_set.iter().any(|i| bad_set.contains(i)) {
        return Err(Error::InvalidSet("stable and bad sets overlap".into()));
    }

    let c_of = |i: usize| -> Result<Option<f64>> {
        let e = &asym.entries[i - 1];
        match e.c {
            Some(c) => Ok(Some(c)),
            None if e.dropped => Ok(None),
            None => Err(Error::InsufficientData(format!(
                "subsystem {i} has occupancy but never completes a period"
            ))),
        }
    };

    let mut log_product = 0.0;
    for &i in stable_set {
        match c_of(i)? {
            Some(c) if c < 1.0 => log_product += c.ln(),
            Some(c) => {
                return Err(Error::InvalidSet(format!(
                    "stable set member {i} has c = {c} >= 1"
                )))
            }
            None => {
                return Err(Error::InvalidSet(format!(
                    "stable set member {i} never runs"
                )))
            }
        }
    }
    for &j in bad_set {
        if let Some(c) = c_of(j)? {
            log_product += s * c.ln();
        }
    }
    let product = log_product.exp();
    let product_ok = log_product < 0.0;

    let mut ratio_failures = Vec::new();
    for &i in stable_set {
        for &j in bad_set {
            let mu_j = asym.entries[j - 1].mu;
            // A bad subsystem with zero occupancy is asymptotically unused;
            // the ratio clause holds vacuously.
            if mu_j == 0.0 {
                continue;
            }
            let ratio = asym.entries[i - 1].mu / mu_j;
            if ratio <= 1.0 / s {
                ratio_failures.push((i, j, ratio));
            }
        }
    }

    let uncovered_unstable = asym
        .entries
        .iter()
        .filter(|e| {
            !stable_set.contains(&e.index)
                && !bad_set.contains(&e.index)
                && e.c.is_some_and(|c| c > 1.0)
        })
        .map(|e| e.index)
        .collect();

    let holds = product_ok && ratio_failures.is_empty();
    Ok(SConditionReport {
        s,
        product,
        product_ok,
        ratio_failures,
        uncovered_unstable,
        holds,
        exact: asym.exact,
    })
}
