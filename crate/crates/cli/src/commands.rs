use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use memzoo_core::classify::{k_extension_feasibility, signalling_witness, ExtensionOutcome, SignallingWitness};
use memzoo_core::process::{build_cm_conditional, validate_causality};
use memzoo_core::random::{self, rng};
use memzoo_core::spectral::psd_eigen;
use memzoo_core::{
    classify, examples, ClassificationReport, LabeledOperator, ProcessClass, ProcessTensor, SolverAdapter,
    SpaceLabel, Tolerances,
};
use serde::Serialize;

use crate::args::{BuildArgs, BuildName, ClassifyArgs, RoundtripArgs};
use crate::error::{CliError, CliResult};
use crate::file::ProcessFile;
use crate::report;

pub fn read_file(path: &Path) -> CliResult<ProcessFile> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ProcessFile::parse(&text)
}

fn write_text(path: Option<&PathBuf>, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

/// A unit-trace PSD operator read from a process file.
fn read_state(path: &Path, tol: &Tolerances) -> CliResult<LabeledOperator> {
    let op = read_file(path)?.to_operator()?;
    psd_eigen(&op, tol).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    if (op.trace().re - 1.0).abs() > 1e-9 || op.trace().im.abs() > 1e-9 {
        return Err(CliError::Invalid(format!("{}: state has trace {}", path.display(), op.trace())));
    }
    Ok(op)
}

/// Moves a single-wire state onto `target`.
fn onto_wire(state: LabeledOperator, target: SpaceLabel, path: &Path) -> CliResult<LabeledOperator> {
    match state.labels() {
        [l] if l.dim == target.dim => Ok(state.relabel(*l, target)?),
        _ => Err(CliError::Invalid(format!(
            "{}: expected a single-wire state of dimension {} for {target}",
            path.display(),
            target.dim
        ))),
    }
}

fn initial_state(path: Option<&PathBuf>, dim: usize, tol: &Tolerances) -> CliResult<LabeledOperator> {
    let target = SpaceLabel::sys_in(1, dim);
    match path {
        Some(p) => onto_wire(read_state(p, tol)?, target, p),
        None => Ok(LabeledOperator::basis_projector(target, 0)?),
    }
}

fn check_params(times: usize, dim: usize) -> CliResult<()> {
    if times < 2 {
        return Err(CliError::Usage("--times must be at least 2".into()));
    }
    if dim < 1 {
        return Err(CliError::Usage("--dim must be at least 1".into()));
    }
    Ok(())
}

fn random_member(class: ProcessClass, times: usize, dim: usize, seed: u64) -> CliResult<ProcessTensor> {
    use ProcessClass::*;
    let mut g = rng(seed);
    let p = match class {
        Memoryless => random::random_memoryless(&mut g, times, dim)?,
        MixedMemoryless => random::random_mm(&mut g, times, dim, 3)?.2,
        ClassicalMemory => random::random_cm_circuit(&mut g, times, dim, 2, 2)?.build()?,
        Separable => build_cm_conditional(&random::random_tree(&mut g, times, dim, 2)?)?,
        NonSignalling => {
            let ins: Vec<SpaceLabel> = (1..=times as u32).rev().map(|t| SpaceLabel::sys_in(t, dim)).collect();
            let rank = ins.iter().map(|l| l.dim).product();
            let state = random::random_state(&mut g, ins, rank);
            examples::common_cause(&state, &vec![dim; times - 1])?
        }
        Quantum => random::random_qm(&mut g, times, dim, dim)?,
    };
    Ok(p)
}

pub fn build(args: &BuildArgs, out: &mut dyn Write) -> CliResult<()> {
    let tol = Tolerances::default();
    let mut meta = BTreeMap::new();
    let (name, hint, p) = match &args.name {
        BuildName::Fig3 { state } => {
            let rho = initial_state(state.as_ref(), 2, &tol)?;
            ("fig3", ProcessClass::ClassicalMemory, examples::fig3_with(&rho)?)
        }
        BuildName::Guerin => ("guerin", ProcessClass::Separable, examples::guerin()?),
        BuildName::CommonCause { state, output_dims } => {
            let rho = read_state(state, &tol)?;
            let n = rho.labels().len();
            let dims = match output_dims {
                Some(d) => d.clone(),
                None => (1..n as u32)
                    .map(|t| rho.labels().iter().find(|l| l.time == t).map_or(0, |l| l.dim))
                    .collect(),
            };
            let list: Vec<String> = dims.iter().map(usize::to_string).collect();
            meta.insert("output_dims".into(), list.join(","));
            ("common_cause", ProcessClass::NonSignalling, examples::common_cause(&rho, &dims)?)
        }
        BuildName::TrivialIdentity { times, dim, state } => {
            check_params(*times, *dim)?;
            let rho = initial_state(state.as_ref(), *dim, &tol)?;
            meta.insert("times".into(), times.to_string());
            meta.insert("dim".into(), dim.to_string());
            ("trivial_identity", ProcessClass::Memoryless, examples::trivial_identity(*times, &rho)?)
        }
        BuildName::Random { class, times, dim, seed } => {
            check_params(*times, *dim)?;
            let class = ProcessClass::from(*class);
            meta.insert("times".into(), times.to_string());
            meta.insert("dim".into(), dim.to_string());
            meta.insert("seed".into(), seed.to_string());
            ("random", class, random_member(class, *times, *dim, *seed)?)
        }
    };
    let causality = validate_causality(&p, &tol)?;
    if !causality.passed {
        return Err(CliError::Invalid(format!(
            "built process violates causality (residual {:e})",
            causality.max_residual
        )));
    }
    meta.insert("name".into(), name.into());
    meta.insert("class_hint".into(), hint.short().into());
    let file = ProcessFile::from_operator(p.op(), meta);
    write_text(args.output.as_ref(), &file.render(), out)
}

#[derive(Debug, Serialize)]
pub struct ProbeResult {
    pub from_time: usize,
    pub distance: f64,
    pub fixed: Vec<SpaceLabel>,
}

#[derive(Debug, Serialize)]
pub struct ExtensionResult {
    pub copies: usize,
    pub copied: Vec<SpaceLabel>,
    pub backend: Option<String>,
    pub outcome: ExtensionOutcome,
}

#[derive(Debug, Serialize)]
pub struct ClassifyOutput {
    pub metadata: BTreeMap<String, String>,
    pub report: ClassificationReport,
    pub probe: Option<ProbeResult>,
    pub extension: Option<ExtensionResult>,
}

fn tolerances(arg: Option<f64>) -> CliResult<Tolerances> {
    match arg {
        None => Ok(Tolerances::default()),
        Some(t) if t.is_finite() && t > 0.0 => Ok(Tolerances::with_base(t)),
        Some(t) => Err(CliError::Usage(format!("tolerance must be a positive finite number, got {t}"))),
    }
}

fn run_probe(p: &ProcessTensor, args: &ClassifyArgs, tol: &Tolerances) -> CliResult<Option<ProbeResult>> {
    if args.probe.is_empty() {
        if !args.fixed.is_empty() {
            return Err(CliError::Usage("--fixed needs --probe".into()));
        }
        return Ok(None);
    }
    if args.probe.len() != 2 {
        return Err(CliError::Usage("--probe must be given exactly twice".into()));
    }
    let j = args.probe_time;
    if j == 0 || j >= p.n_times() {
        return Err(CliError::Usage(format!("--probe-time must lie in 1..{}", p.n_times())));
    }
    let target = p.output(j);
    let probes = args
        .probe
        .iter()
        .map(|f| onto_wire(read_state(f, tol)?, target, f))
        .collect::<CliResult<Vec<_>>>()?;
    let mut fixed = Vec::new();
    for f in &args.fixed {
        let s = read_state(f, tol)?;
        let wire = match s.labels() {
            [l] if (l.time as usize) < p.n_times() && l.time as usize != j => p.output(l.time as usize),
            _ => {
                return Err(CliError::Invalid(format!(
                    "{}: a fixed state must live on one output wire other than the probe",
                    f.display()
                )))
            }
        };
        fixed.push(onto_wire(s, wire, f)?);
    }
    let w: SignallingWitness = signalling_witness(p, j, (&probes[0], &probes[1]), &fixed)?;
    Ok(Some(ProbeResult {
        from_time: w.from_time,
        distance: w.distance,
        fixed: fixed.iter().map(|f| f.labels()[0]).collect(),
    }))
}

/// Returns the exit code: 0 for a valid process, 2 when the causality
/// chain fails.
pub fn classify_cmd(args: &ClassifyArgs, out: &mut dyn Write) -> CliResult<i32> {
    let tol = tolerances(args.tolerance)?;
    let file = read_file(&args.file)?;
    let side = file.side()?;
    if side > args.max_dim {
        return Err(CliError::DimensionOverflow {
            side,
            limit: args.max_dim,
        });
    }
    let op = file.to_operator()?;
    if op.labels().iter().any(|l| l.role != memzoo_core::Role::System) {
        return Err(CliError::Invalid("process files may only carry system wires".into()));
    }
    let p = ProcessTensor::from_operator(op)?;
    psd_eigen(p.op(), &tol)?;
    let hint = if args.no_hint {
        None
    } else if let Some(h) = args.hint {
        Some(ProcessClass::from(h))
    } else {
        file.metadata.get("class_hint").and_then(|s| ProcessClass::parse(s))
    };
    let report = classify(&p, hint, &tol)?;
    let probe = run_probe(&p, args, &tol)?;
    let extension = match args.extension {
        None => None,
        Some(k) => {
            let adapter = SolverAdapter::with_default_backend();
            let copied = vec![p.input(1)];
            let outcome = k_extension_feasibility(&p, &copied, k, &adapter, &tol)?;
            Some(ExtensionResult {
                copies: k,
                copied,
                backend: adapter.backend_name().map(str::to_string),
                outcome,
            })
        }
    };
    let code = if report.causality.passed { 0 } else { 2 };
    let output = ClassifyOutput {
        metadata: file.metadata,
        report,
        probe,
        extension,
    };
    let text = if args.json {
        let mut s = serde_json::to_string_pretty(&output).map_err(|e| CliError::Invalid(e.to_string()))?;
        s.push('\n');
        s
    } else {
        report::text(&output)
    };
    write_text(None, &text, out)?;
    Ok(code)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundtripStatus {
    /// Output bytes equal the input bytes.
    Identical,
    /// Labels were canonical; only the layout changed.
    Reformatted,
    /// Labels were permuted into canonical order.
    Reordered,
}

impl RoundtripStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RoundtripStatus::Identical => "identical",
            RoundtripStatus::Reformatted => "reformatted",
            RoundtripStatus::Reordered => "reordered",
        }
    }
}

pub fn roundtrip(args: &RoundtripArgs, out: &mut dyn Write) -> CliResult<RoundtripStatus> {
    let text = fs::read_to_string(&args.file).map_err(|source| CliError::Io {
        path: args.file.display().to_string(),
        source,
    })?;
    let file = ProcessFile::parse(&text)?;
    let canonical = file.canonicalized()?;
    let rendered = canonical.render();
    let status = if !file.is_canonical() {
        RoundtripStatus::Reordered
    } else if rendered == text {
        RoundtripStatus::Identical
    } else {
        RoundtripStatus::Reformatted
    };
    write_text(args.output.as_ref(), &rendered, out)?;
    Ok(status)
}
