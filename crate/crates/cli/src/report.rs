use std::fmt::Write as _;

use memzoo_core::classify::ExtensionOutcome;
use memzoo_core::ProcessClass;

use crate::commands::ClassifyOutput;

fn wires(ls: &[memzoo_core::SpaceLabel]) -> String {
    let v: Vec<String> = ls.iter().map(ToString::to_string).collect();
    v.join(" ")
}

fn status(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

/// Human-readable classification report.
pub fn text(o: &ClassifyOutput) -> String {
    let r = &o.report;
    let mut s = String::new();
    if let Some(name) = o.metadata.get("name") {
        let _ = writeln!(s, "process: {name}");
    }
    let _ = writeln!(s, "times: {}  dims: {:?}", r.n_times, r.dims);
    if let Some(h) = r.hint {
        let _ = writeln!(s, "construction hint: {h}");
    }
    let _ = writeln!(
        s,
        "causality: {} (max residual {:.3e}, reduced initial trace {:.12})",
        status(r.causality.passed),
        r.causality.max_residual,
        r.causality.final_scalar
    );
    let _ = writeln!(s, "non-signalling: {}", status(r.nonsignalling.passed));
    for (k, res) in &r.nonsignalling.residuals {
        let _ = writeln!(s, "  k = {k}: residual {res:.6e}");
    }
    let _ = writeln!(
        s,
        "partial transpose: {} on factor cuts (min eigenvalue {:.6e})",
        status(r.ppt.passed),
        r.ppt.min_certifying
    );
    let width = r.ppt.cuts.iter().map(|c| wires(&c.side).chars().count()).max().unwrap_or(0);
    for c in &r.ppt.cuts {
        let _ = writeln!(
            s,
            "  [{:<width$}] {:>14.6e}  {}{}",
            wires(&c.side),
            c.min_eigenvalue,
            if c.certifying { "factor cut" } else { "diagnostic" },
            if c.negative { ", negative" } else { "" }
        );
    }
    s.push_str("verdicts:\n");
    for c in ProcessClass::ALL {
        let _ = writeln!(s, "  {:<4} {}", c.short(), r.verdict(c));
    }
    s.push_str("witnesses:\n");
    for (k, v) in &r.witnesses {
        let _ = writeln!(s, "  {k:<30} {v:.9e}");
    }
    if let Some(p) = &o.probe {
        let fixed = if p.fixed.is_empty() {
            "maximally mixed elsewhere".to_string()
        } else {
            format!("fixed on {}", wires(&p.fixed))
        };
        let _ = writeln!(s, "probe at {}^o ({fixed}): trace distance {:.9}", p.from_time, p.distance);
    }
    if let Some(e) = &o.extension {
        let outcome = match &e.outcome {
            ExtensionOutcome::Feasible => "feasible".to_string(),
            ExtensionOutcome::Infeasible => "infeasible (entangled across the cut)".to_string(),
            ExtensionOutcome::SolverLimit(m) => format!("undecided: {m}"),
        };
        let _ = writeln!(
            s,
            "{}-copy extension of [{}] via {}: {outcome}",
            e.copies,
            wires(&e.copied),
            e.backend.as_deref().unwrap_or("-")
        );
    }
    if !r.notes.is_empty() {
        s.push_str("notes:\n");
        for n in &r.notes {
            let _ = writeln!(s, "  - {n}");
        }
    }
    s
}
