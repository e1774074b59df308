//! Subcommand implementations: load a document, call into the library,
//! print either a human summary or the machine report.
//!
//! Exit codes follow one contract everywhere: 0 certified/success, 1
//! not-certified/infeasible, 2 usage/parse/numerical error. The caller in
//! `main` maps `Error::Infeasible` to 1 and every other error to 2; the
//! functions here return the code for non-error outcomes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use switched::certify::{
    self, Certificate, HybridCertificate, HybridCombination, SConditionReport, Verdict,
};
use switched::design::{self, DwellOptions, DwellPlan, StabilizerPlan};
use switched::linalg::{self, Matrix, SpectralSummary};
use switched::model::{self, Role, Severity, SwitchedSystem, ValidationReport};
use switched::simulate::{self, BoundCheck, Trajectory};
use switched::stats;

use crate::document::{Content, Document};
use crate::report::{digest, fmt_full, fmt_num, RunReport};

struct Loaded {
    digest: String,
    doc: Document,
}

fn load(path: &Path) -> anyhow::Result<Loaded> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let text = String::from_utf8(bytes)
        .with_context(|| format!("{} is not valid UTF-8", path.display()))?;
    let doc = Document::parse(&text)?;
    Ok(Loaded { digest: digest(text.as_bytes()), doc })
}

fn validation(doc: &Document) -> ValidationReport {
    match &doc.content {
        Content::Continuous { system, signal } => model::validate(system, signal),
        Content::Discrete { system, signal } => model::validate_discrete(system, signal),
        Content::Hybrid { system, signal } => model::validate_hybrid(system, signal),
    }
}

/// Fails on error findings, passes warnings through for the report.
fn gate(report: ValidationReport) -> anyhow::Result<Vec<String>> {
    let mut warnings = Vec::new();
    let mut errors = Vec::new();
    for finding in report.findings {
        match finding.severity {
            Severity::Warning => warnings.push(finding.message),
            Severity::Error => errors.push(finding.message),
        }
    }
    if !errors.is_empty() {
        bail!("invalid document: {}", errors.join("; "));
    }
    Ok(warnings)
}

/// (dimension, subsystem count, fully periodic signal)
fn describe(content: &Content) -> (usize, usize, bool) {
    match content {
        Content::Continuous { system, signal } => {
            (system.dim(), system.len(), signal.is_periodic())
        }
        Content::Discrete { system, signal } => (system.dim(), system.len(), signal.is_periodic()),
        Content::Hybrid { system, signal } => (
            system.dim(),
            system.flow().len() + system.jump().len(),
            signal.sigma1.is_periodic() && signal.sigma2.is_periodic(),
        ),
    }
}

fn emit<P: Serialize>(
    json: bool,
    command: &str,
    digest: String,
    parameters: serde_json::Value,
    payload: P,
    warnings: Vec<String>,
    human: impl FnOnce(&P),
) {
    if json {
        let report = RunReport::new(command, digest, parameters, payload, warnings);
        println!("{}", report.to_json());
    } else {
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        human(&payload);
    }
}

const EMPIRICAL_WARNING: &str =
    "advisory only: empirical estimates never certify; certification needs a periodic signal";

// ---------------------------------------------------------------- validate

pub fn cmd_validate(path: &Path, json: bool) -> anyhow::Result<u8> {
    let loaded = load(path)?;
    let findings = validation(&loaded.doc);
    let usable = findings.is_valid();
    let (dimension, subsystems, periodic) = describe(&loaded.doc.content);

    #[derive(Serialize)]
    struct Payload {
        mode: &'static str,
        dimension: usize,
        subsystems: usize,
        periodic: bool,
        usable: bool,
        findings: ValidationReport,
    }
    let payload = Payload {
        mode: loaded.doc.content.mode(),
        dimension,
        subsystems,
        periodic,
        usable,
        findings,
    };

    if json {
        let report = RunReport::new("validate", loaded.digest, json!({}), payload, Vec::new());
        println!("{}", report.to_json());
        return Ok(if usable { 0 } else { 2 });
    }
    println!("mode: {}", payload.mode);
    println!("dimension: {dimension}, subsystems: {subsystems}");
    println!("signal: {}", if periodic { "periodic" } else { "finite" });
    for finding in &payload.findings.findings {
        let label = match finding.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        println!("{label}: {}", finding.message);
    }
    println!("{}", if usable { "document is usable" } else { "document has errors" });
    Ok(if usable { 0 } else { 2 })
}

// ----------------------------------------------------------------- certify

pub fn cmd_certify(
    path: &Path,
    set: Option<&str>,
    s_ratio: Option<f64>,
    json: bool,
) -> anyhow::Result<u8> {
    let loaded = load(path)?;
    let mut warnings = gate(validation(&loaded.doc))?;
    let parameters = json!({ "set": set, "s_ratio": s_ratio });

    match &loaded.doc.content {
        Content::Continuous { system, signal } => {
            let requested = set.map(parse_indices).transpose()?;
            let asym = if signal.is_periodic() {
                stats::asymptotics(system, signal)?
            } else {
                warnings.push(EMPIRICAL_WARNING.into());
                let horizon = signal.horizon().expect("finite signal has a horizon");
                stats::empirical_asymptotics(
                    system,
                    signal,
                    horizon,
                    stats::DEFAULT_EMPIRICAL_WINDOW,
                )?
            };
            let certificate = certify::certify_continuous(&asym, requested.as_deref())?;
            let s_condition = match s_ratio {
                Some(s) => {
                    let bad: Vec<usize> = certificate
                        .entries
                        .iter()
                        .filter(|e| !e.dropped && !e.stabilizing)
                        .map(|e| e.index)
                        .collect();
                    Some(certify::certify_s_condition(
                        &asym,
                        &certificate.stabilizing_set,
                        &bad,
                        s,
                    )?)
                }
                None => None,
            };

            let mut code = if certificate.certified() { 0 } else { 1 };
            if let Some(sc) = &s_condition {
                if sc.holds && sc.exact {
                    code = 0;
                }
            }

            #[derive(Serialize)]
            struct Payload {
                certificate: Certificate,
                #[serde(skip_serializing_if = "Option::is_none")]
                s_condition: Option<SConditionReport>,
            }
            let payload = Payload { certificate, s_condition };
            emit(json, "certify", loaded.digest, parameters, payload, warnings, |p| {
                print_certificate(&p.certificate);
                if let Some(sc) = &p.s_condition {
                    print_s_condition(sc);
                }
            });
            Ok(code)
        }
        Content::Discrete { system, signal } => {
            if set.is_some() {
                bail!(
                    "--set applies to continuous documents; in discrete mode the \
                     stabilizing set is forced to the subsystems with norm below one"
                );
            }
            if s_ratio.is_some() {
                bail!("--s-ratio applies to continuous documents");
            }
            let occupancy = if signal.is_periodic() {
                stats::discrete_occupancy(system.len(), signal)?
            } else {
                warnings.push(EMPIRICAL_WARNING.into());
                let steps = signal.horizon_steps().expect("finite signal has a horizon");
                stats::empirical_discrete_occupancy(
                    system.len(),
                    signal,
                    steps,
                    stats::DEFAULT_EMPIRICAL_WINDOW,
                )?
            };
            let certificate = certify::certify_discrete(system, &occupancy)?;
            let code = if certificate.certified() { 0 } else { 1 };

            #[derive(Serialize)]
            struct Payload {
                certificate: Certificate,
            }
            let payload = Payload { certificate };
            emit(json, "certify", loaded.digest, parameters, payload, warnings, |p| {
                print_certificate(&p.certificate);
            });
            Ok(code)
        }
        Content::Hybrid { system, signal } => {
            if set.is_some() || s_ratio.is_some() {
                bail!("--set and --s-ratio apply to continuous documents");
            }
            if !(signal.sigma1.is_periodic() && signal.sigma2.is_periodic()) {
                warnings.push(EMPIRICAL_WARNING.into());
            }
            let certificate = certify::certify_hybrid(system, signal)?;
            let code = if certificate.verdict == Verdict::CertifiedStable { 0 } else { 1 };

            #[derive(Serialize)]
            struct Payload {
                certificate: HybridCertificate,
            }
            let payload = Payload { certificate };
            emit(json, "certify", loaded.digest, parameters, payload, warnings, |p| {
                print_hybrid_certificate(&p.certificate);
            });
            Ok(code)
        }
    }
}

// ---------------------------------------------------------------- simulate

pub struct SimulateOpts {
    pub x0: Option<String>,
    pub horizon: Option<f64>,
    pub step: Option<f64>,
    pub out: Option<PathBuf>,
    pub verify_bound: bool,
    pub random_signal: Option<usize>,
}

pub fn cmd_simulate(
    path: &Path,
    opts: &SimulateOpts,
    json: bool,
    seed: u64,
) -> anyhow::Result<u8> {
    let loaded = load(path)?;
    let warnings = gate(validation(&loaded.doc))?;
    let (dimension, _, _) = describe(&loaded.doc.content);
    let x0 = match &opts.x0 {
        Some(text) => parse_vector(text)?,
        None => vec![1.0; dimension],
    };

    let (trajectory, bound, horizon, step) = match &loaded.doc.content {
        Content::Continuous { system, signal } => {
            let signal = match opts.random_signal {
                Some(count) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    model::random_periodic_signal(&mut rng, system.len(), count, (0.05, 1.0))?
                }
                None => signal.clone(),
            };
            let horizon = match opts.horizon.or_else(|| signal.horizon()) {
                Some(h) => h,
                None => bail!("the signal is periodic; pass --horizon"),
            };
            let step = opts.step.unwrap_or(horizon / 100.0);
            let trajectory = simulate::simulate_continuous(system, &signal, &x0, horizon, step)?;
            let bound = if opts.verify_bound {
                Some(simulate::verify_bound(&trajectory, system, &signal)?)
            } else {
                None
            };
            (trajectory, bound, horizon, Some(step))
        }
        Content::Discrete { system, signal } => {
            reject_continuous_only_flags(opts)?;
            if opts.step.is_some() {
                bail!("--step applies to continuous and hybrid documents; discrete time advances in unit steps");
            }
            let horizon = match opts.horizon.or_else(|| signal.horizon_steps().map(|s| s as f64))
            {
                Some(h) => h,
                None => bail!("the sequence is periodic; pass --horizon"),
            };
            let steps = integral_steps(horizon)?;
            (simulate::simulate_discrete(system, signal, &x0, steps)?, None, horizon, None)
        }
        Content::Hybrid { system, signal } => {
            reject_continuous_only_flags(opts)?;
            let horizon = match opts.horizon.or_else(|| signal.sigma1.horizon()) {
                Some(h) => h,
                None => bail!("the signal is periodic; pass --horizon"),
            };
            let steps = integral_steps(horizon)?;
            let step = opts.step.unwrap_or(steps as f64 / 100.0);
            let trajectory = simulate::simulate_hybrid(system, signal, &x0, steps, step)?;
            (trajectory, None, horizon, Some(step))
        }
    };

    #[derive(Serialize)]
    struct Summary {
        samples: usize,
        switches: usize,
        initial_norm: f64,
        final_t: f64,
        final_norm: f64,
        log_norm_slope: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        bound: Option<BoundCheck>,
    }
    let summary = Summary {
        samples: trajectory.samples.len(),
        switches: trajectory.switch_times.len(),
        initial_norm: trajectory.initial().norm,
        final_t: trajectory.last().t,
        final_norm: trajectory.last().norm,
        log_norm_slope: trajectory.log_norm_slope(),
        bound,
    };
    // A violated theorem bound is a numerical soundness failure, not a
    // stability verdict.
    let code = match &summary.bound {
        Some(b) if !b.holds => 2,
        _ => 0,
    };

    if let Some(out) = &opts.out {
        let mut file = fs::File::create(out)
            .with_context(|| format!("cannot create {}", out.display()))?;
        write_csv(&mut file, &trajectory)?;
    }

    let parameters = json!({
        "x0": x0,
        "horizon": horizon,
        "step": step,
        "verify_bound": opts.verify_bound,
        "random_signal": opts.random_signal,
        "seed": seed,
        "out": opts.out.as_ref().map(|p| p.display().to_string()),
    });

    #[derive(Serialize)]
    struct Payload {
        summary: Summary,
        #[serde(skip_serializing_if = "Option::is_none")]
        csv_path: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        trajectory: Option<Trajectory>,
    }

    if json {
        let payload = Payload {
            summary,
            csv_path: opts.out.as_ref().map(|p| p.display().to_string()),
            trajectory: if opts.out.is_none() { Some(trajectory) } else { None },
        };
        let report = RunReport::new("simulate", loaded.digest, parameters, payload, warnings);
        println!("{}", report.to_json());
        return Ok(code);
    }

    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if opts.out.is_some() {
        print_summary(&mut std::io::stdout(), &summary)?;
    } else {
        // CSV on stdout so it pipes cleanly; the summary goes to stderr.
        write_csv(&mut std::io::stdout().lock(), &trajectory)?;
        print_summary(&mut std::io::stderr(), &summary)?;
    }
    return Ok(code);

    fn print_summary(w: &mut impl Write, s: &Summary) -> anyhow::Result<()> {
        writeln!(w, "samples: {} ({} switches)", s.samples, s.switches)?;
        writeln!(w, "final norm at t = {}: {}", fmt_num(s.final_t), fmt_num(s.final_norm))?;
        match s.log_norm_slope {
            Some(v) => writeln!(w, "log-norm slope: {}", fmt_num(v))?,
            None => writeln!(w, "log-norm slope: undefined")?,
        }
        if let Some(b) = &s.bound {
            writeln!(
                w,
                "switch-time norm bound: {} (max ratio {})",
                if b.holds { "holds" } else { "VIOLATED" },
                fmt_num(b.max_ratio)
            )?;
        }
        Ok(())
    }
}

fn reject_continuous_only_flags(opts: &SimulateOpts) -> anyhow::Result<()> {
    if opts.verify_bound {
        bail!("--verify-bound applies to continuous documents only");
    }
    if opts.random_signal.is_some() {
        bail!("--random-signal applies to continuous documents only");
    }
    Ok(())
}

fn integral_steps(horizon: f64) -> anyhow::Result<usize> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        bail!("horizon must be positive, got {horizon}");
    }
    let rounded = horizon.round();
    if (horizon - rounded).abs() > 1e-9 {
        bail!("this mode advances in unit steps; the horizon must be an integer, got {horizon}");
    }
    Ok(rounded as usize)
}

fn write_csv(w: &mut impl Write, trajectory: &Trajectory) -> anyhow::Result<()> {
    let m = trajectory.samples.first().map_or(0, |s| s.x.len());
    write!(w, "t")?;
    for j in 1..=m {
        write!(w, ",x_{j}")?;
    }
    writeln!(w, ",norm,event")?;
    for s in &trajectory.samples {
        write!(w, "{}", fmt_full(s.t))?;
        for v in &s.x {
            write!(w, ",{}", fmt_full(*v))?;
        }
        writeln!(w, ",{},{}", fmt_full(s.norm), s.event.label())?;
    }
    Ok(())
}

// ------------------------------------------------------------------ design

pub struct StabilizerOpts {
    pub a0: String,
    pub lambda: f64,
    pub scan_bound: Option<f64>,
    pub emit: Option<PathBuf>,
}

pub fn cmd_design_stabilizer(
    path: &Path,
    opts: &StabilizerOpts,
    json: bool,
) -> anyhow::Result<u8> {
    let loaded = load(path)?;
    let warnings = gate(validation(&loaded.doc))?;
    let Content::Continuous { system, signal } = &loaded.doc.content else {
        bail!("design stabilizer applies to continuous documents");
    };
    let a0 = parse_matrix(&opts.a0)?;
    let designed = design::stabilize(system, signal, &a0, opts.lambda, opts.scan_bound)?;

    let emitted = write_emitted(&opts.emit, &loaded.doc, designed.system.clone(), designed.signal.clone())?;
    let parameters = json!({
        "a0": a0.rows(),
        "lambda": opts.lambda,
        "scan_bound": opts.scan_bound,
        "emit": emitted,
    });

    #[derive(Serialize)]
    struct Payload {
        plan: StabilizerPlan,
        certificate: Certificate,
        #[serde(skip_serializing_if = "Option::is_none")]
        emitted: Option<String>,
    }
    let payload = Payload { plan: designed.plan, certificate: designed.certificate, emitted };
    emit(json, "design stabilizer", loaded.digest, parameters, payload, warnings, |p| {
        println!("stabilizer plan:");
        println!("  damping subsystem: {} (appended)", p.plan.damping_index);
        println!("  t0 = {}, lambda = {}", fmt_num(p.plan.t0), fmt_num(p.plan.lambda));
        println!("  base growth factor c = {}", fmt_num(p.plan.c));
        println!(
            "  duty cycle n = {} (damping fraction {})",
            p.plan.n,
            fmt_num(p.plan.damping_fraction)
        );
        println!(
            "  combined margin lambda^(1/n) c = {}",
            fmt_num(p.plan.combined_margin)
        );
        println!("repaired signal certificate:");
        print_certificate(&p.certificate);
        if let Some(path) = &p.emitted {
            println!("emitted: {path}");
        }
    });
    Ok(0)
}

pub struct DwellArgs {
    pub stable: Option<String>,
    pub bad_dwell: Vec<String>,
    pub margin: f64,
    pub emit: Option<PathBuf>,
}

pub fn cmd_design_dwell(path: &Path, args: &DwellArgs, json: bool) -> anyhow::Result<u8> {
    let loaded = load(path)?;
    let warnings = gate(validation(&loaded.doc))?;
    let Content::Continuous { system, .. } = &loaded.doc.content else {
        bail!("design dwell applies to continuous documents");
    };
    let bad: Vec<(usize, f64)> = args
        .bad_dwell
        .iter()
        .map(|s| parse_dwell_pair(s))
        .collect::<anyhow::Result<_>>()?;
    let stable: Vec<usize> = match &args.stable {
        Some(text) => parse_indices(text)?,
        None => {
            let mut out = Vec::new();
            for i in 1..=system.len() {
                if bad.iter().any(|(j, _)| *j == i) {
                    continue;
                }
                if linalg::spectral_summary(system.matrix(i)?)?.hurwitz {
                    out.push(i);
                }
            }
            out
        }
    };
    let options = DwellOptions { margin: args.margin, ..DwellOptions::default() };
    let plan = design::dwell_time_design(system, &stable, &bad, &options)?;
    let cyclic = plan.cyclic_signal();
    let certificate = certify::certify_continuous(&stats::asymptotics(system, &cyclic)?, None)?;

    let emitted = write_emitted(&args.emit, &loaded.doc, system.clone(), cyclic)?;
    let parameters = json!({
        "stable": stable,
        "bad_dwell": bad,
        "margin": args.margin,
        "emit": emitted,
    });

    #[derive(Serialize)]
    struct Payload {
        plan: DwellPlan,
        certificate: Certificate,
        #[serde(skip_serializing_if = "Option::is_none")]
        emitted: Option<String>,
    }
    let payload = Payload { plan, certificate, emitted };
    emit(json, "design dwell", loaded.digest, parameters, payload, warnings, |p| {
        println!(
            "dwell plan (scale = {}, margin = {}):",
            fmt_num(p.plan.scale),
            fmt_num(p.plan.margin)
        );
        println!(
            "{:>6}  {:<7}{:>12}{:>12}{:>12}{:>12}",
            "index", "role", "dwell", "k", "alpha", "horizon"
        );
        for e in &p.plan.entries {
            println!(
                "{:>6}  {:<7}{:>12}{:>12}{:>12}{:>12}",
                e.index,
                if e.stable { "stable" } else { "bad" },
                fmt_num(e.dwell),
                fmt_num(e.k),
                fmt_num(e.alpha),
                fmt_num(e.horizon)
            );
        }
        println!("cycle log margin = {}", fmt_num(p.plan.cycle_log_margin));
        println!("cycle certificate:");
        print_certificate(&p.certificate);
        if let Some(path) = &p.emitted {
            println!("emitted: {path}");
        }
    });
    Ok(0)
}

/// Writes a continuous document with the designed signal; metadata carries
/// over from the input.
fn write_emitted(
    emit: &Option<PathBuf>,
    original: &Document,
    system: SwitchedSystem,
    signal: switched::model::ContinuousSignal,
) -> anyhow::Result<Option<String>> {
    let Some(out) = emit else { return Ok(None) };
    let doc = Document {
        metadata: original.metadata.clone(),
        content: Content::Continuous { system, signal },
    };
    fs::write(out, doc.canonical())
        .with_context(|| format!("cannot write {}", out.display()))?;
    Ok(Some(out.display().to_string()))
}

// ------------------------------------------------------------------- norms

#[derive(Serialize)]
struct NormEntry {
    group: &'static str,
    index: usize,
    norm: f64,
    spectrum: SpectralSummary,
}

fn collect_norms(
    system: &SwitchedSystem,
    group: &'static str,
    entries: &mut Vec<NormEntry>,
    warnings: &mut Vec<String>,
) -> anyhow::Result<()> {
    for index in 1..=system.len() {
        let a = system.matrix(index)?;
        let norm = linalg::induced_norm(a)?;
        let spectrum = linalg::spectral_summary(a)?;
        if spectrum.marginal {
            warnings.push(format!(
                "{group} {index} has an eigenvalue within 1e-10 of the stability boundary; \
                 the hurwitz/schur flags are not strict there"
            ));
        }
        entries.push(NormEntry { group, index, norm, spectrum });
    }
    Ok(())
}

pub fn cmd_norms(path: &Path, json: bool) -> anyhow::Result<u8> {
    let loaded = load(path)?;
    let mut warnings = gate(validation(&loaded.doc))?;

    let mut entries = Vec::new();
    match &loaded.doc.content {
        Content::Continuous { system, .. } | Content::Discrete { system, .. } => {
            collect_norms(system, "subsystem", &mut entries, &mut warnings)?;
        }
        Content::Hybrid { system, .. } => {
            collect_norms(system.flow(), "flow", &mut entries, &mut warnings)?;
            collect_norms(system.jump(), "jump", &mut entries, &mut warnings)?;
        }
    }

    #[derive(Serialize)]
    struct Payload {
        entries: Vec<NormEntry>,
    }
    let payload = Payload { entries };
    emit(json, "norms", loaded.digest, json!({}), payload, warnings, |p| {
        for e in &p.entries {
            let mut flags = String::new();
            if e.spectrum.hurwitz {
                flags.push_str(", hurwitz");
            }
            if e.spectrum.schur {
                flags.push_str(", schur");
            }
            println!(
                "{} {}: norm = {}, abscissa = {}, radius = {}{}",
                e.group,
                e.index,
                fmt_num(e.norm),
                fmt_num(e.spectrum.abscissa),
                fmt_num(e.spectrum.radius),
                flags
            );
            println!("  eigenvalues: {}", eig_list(&e.spectrum.eigenvalues));
        }
    });
    Ok(0)
}

fn eig_list(eigs: &[[f64; 2]]) -> String {
    let parts: Vec<String> = eigs
        .iter()
        .map(|z| {
            if z[1] == 0.0 {
                fmt_num(z[0])
            } else {
                let sign = if z[1] < 0.0 { "-" } else { "+" };
                format!("{} {} {}i", fmt_num(z[0]), sign, fmt_num(z[1].abs()))
            }
        })
        .collect();
    parts.join(", ")
}

// ---------------------------------------------------------------- printing

fn role_label(role: Role) -> &'static str {
    match role {
        Role::Continuous => "continuous",
        Role::Discrete => "discrete",
    }
}

fn verdict_label(verdict: Verdict) -> &'static str {
    match verdict {
        Verdict::CertifiedStable => "certified-stable",
        Verdict::NotCertified => "not-certified",
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_else(|| "-".into())
}

fn print_certificate(cert: &Certificate) {
    println!(
        "mode: {}, statistics: {}",
        role_label(cert.mode),
        if cert.exact { "exact" } else { "empirical" }
    );
    let c_head = match cert.mode {
        Role::Continuous => "c",
        Role::Discrete => "norm",
    };
    println!(
        "{:>6}  {:<12}{:>12}{:>12}{:>12}{:>12}",
        "index", "role", c_head, "d", "mu", "nu"
    );
    for e in &cert.entries {
        let role = if e.dropped {
            "dropped"
        } else if e.stabilizing {
            "stabilizing"
        } else {
            "-"
        };
        println!(
            "{:>6}  {:<12}{:>12}{:>12}{:>12}{:>12}",
            e.index,
            role,
            opt_num(e.c),
            opt_num(e.d),
            fmt_num(e.mu),
            fmt_num(e.nu)
        );
    }
    let set: Vec<String> = cert.stabilizing_set.iter().map(|i| i.to_string()).collect();
    println!("stabilizing set: {{{}}}", set.join(", "));
    println!("log margin L = {}", fmt_num(cert.log_margin));
    match cert.kappa {
        Some(kappa) => println!("kappa = {}", fmt_num(kappa)),
        None => println!("kappa: undefined (L >= 0)"),
    }
    println!("verdict: {}", verdict_label(cert.verdict));
}

fn print_hybrid_certificate(cert: &HybridCertificate) {
    println!("flow:");
    print_certificate(&cert.flow_certificate);
    println!();
    println!("jump:");
    print_certificate(&cert.jump_certificate);
    println!();
    let combination = match cert.combination {
        HybridCombination::BothDecay => "both parts decay",
        HybridCombination::OneBoundedOneDecays => "one part bounded, the other decays",
        HybridCombination::None => "none",
    };
    println!("combination: {combination}");
    match cert.kappa {
        Some(kappa) => println!("kappa = {}", fmt_num(kappa)),
        None => println!("kappa: undefined"),
    }
    println!("verdict: {}", verdict_label(cert.verdict));
}

fn print_s_condition(sc: &SConditionReport) {
    println!(
        "s-condition (s = {}): {}",
        fmt_num(sc.s),
        if sc.holds { "holds" } else { "fails" }
    );
    println!(
        "  weighted product = {} ({})",
        fmt_num(sc.product),
        if sc.product_ok { "below 1" } else { "not below 1" }
    );
    if sc.ratio_failures.is_empty() {
        println!("  occupancy ratios: all above 1/s");
    } else {
        for (i, j, ratio) in &sc.ratio_failures {
            println!(
                "  occupancy ratio mu_{i}/mu_{j} = {} is not above 1/s",
                fmt_num(*ratio)
            );
        }
    }
    for index in &sc.uncovered_unstable {
        println!("  note: subsystem {index} grows (c > 1) but sits outside both sets");
    }
}

// ----------------------------------------------------------------- parsing

fn parse_indices(text: &str) -> anyhow::Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().with_context(|| format!("bad index {t:?}")))
        .collect()
}

fn parse_vector(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad number {t:?}")))
        .collect()
}

/// Rows separated by ';', entries by ','.
fn parse_matrix(text: &str) -> anyhow::Result<Matrix> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|row| parse_vector(row))
        .collect::<anyhow::Result<_>>()?;
    Ok(Matrix::from_rows(&rows)?)
}

fn parse_dwell_pair(text: &str) -> anyhow::Result<(usize, f64)> {
    let (index, duration) = text
        .split_once('=')
        .with_context(|| format!("expected index=duration, got {text:?}"))?;
    let index = index.trim().parse::<usize>().with_context(|| format!("bad index {index:?}"))?;
    let duration = duration
        .trim()
        .parse::<f64>()
        .with_context(|| format!("bad duration {duration:?}"))?;
    Ok((index, duration))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_parsing_reads_rows_and_entries() {
        let m = parse_matrix("-1, 0; 0, -2").unwrap();
        assert_eq!(m.rows(), vec![vec![-1.0, 0.0], vec![0.0, -2.0]]);
        assert!(parse_matrix("1,2;3").is_err());
    }

    #[test]
    fn dwell_pairs_split_on_equals() {
        assert_eq!(parse_dwell_pair("2=1.5").unwrap(), (2, 1.5));
        assert!(parse_dwell_pair("2:1.5").is_err());
        assert!(parse_dwell_pair("x=1").is_err());
    }

    #[test]
    fn integral_horizons_tolerate_rounding_noise() {
        assert_eq!(integral_steps(3.0).unwrap(), 3);
        assert_eq!(integral_steps(3.0 + 1e-12).unwrap(), 3);
        assert!(integral_steps(3.5).is_err());
        assert!(integral_steps(0.0).is_err());
    }
}
