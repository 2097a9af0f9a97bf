use num_complex::Complex64;
use serde::Serialize;

use crate::choi::{link_product, pure_state};
use crate::error::{Error, Result};
use crate::label::SpaceLabel;
use crate::operator::{LabeledOperator, ONE, ZERO};
use crate::process::{memoryless_marginal_product, ProcessTensor};
use crate::spectral::{relative_entropy_tol, trace_norm};
use crate::tolerance::Tolerances;

/// Per-time residuals of the non-signalling condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonsignallingReport {
    /// `(k, ‖tr_{k^i} C − 1_{k−1^o}/d ⊗ tr_{k^i k−1^o} C‖_tr)` for `k = N … 2`.
    pub residuals: Vec<(usize, f64)>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl NonsignallingReport {
    pub fn residual(&self, k: usize) -> Option<f64> {
        self.residuals.iter().find(|(t, _)| *t == k).map(|(_, r)| *r)
    }
}

pub fn check_nonsignalling(p: &ProcessTensor, tol: &Tolerances) -> Result<NonsignallingReport> {
    let c = p.op();
    let mut residuals = Vec::with_capacity(p.n_times() - 1);
    for k in (2..=p.n_times()).rev() {
        let (ki, ko) = (p.input(k), p.output(k - 1));
        let lhs = c.partial_trace(&[ki])?;
        let rest = c.partial_trace(&[ki, ko])?;
        let rhs = LabeledOperator::identity(vec![ko])?
            .scale(1.0 / ko.dim as f64)
            .tensor_product(&rest)?;
        residuals.push((k, trace_norm(&lhs.sub(&rhs)?)));
    }
    let max_residual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(NonsignallingReport {
        residuals,
        max_residual,
        tolerance: tol.nonsignalling,
        passed: max_residual <= tol.nonsignalling,
    })
}

/// States whose span is every operator on `label`: the basis states and
/// `(|0⟩ + |k⟩)/√2`, `(|0⟩ + i|k⟩)/√2` for `k ≥ 1`.
pub fn spanning_states(label: SpaceLabel) -> Result<Vec<LabeledOperator>> {
    let d = label.dim;
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        out.push(LabeledOperator::basis_projector(label, k)?);
    }
    for k in 1..d {
        for phase in [ONE, Complex64::new(0.0, 1.0)] {
            let mut amps = vec![ZERO; d];
            amps[0] = ONE;
            amps[k] = phase;
            out.push(pure_state(vec![label], &amps)?);
        }
    }
    Ok(out)
}

/// Output states at the final time for two probes fed in at `j^o`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignallingWitness {
    pub from_time: usize,
    pub states: (LabeledOperator, LabeledOperator),
    /// `½‖ρ − ρ′‖_tr`.
    pub distance: f64,
}

fn check_unit_state(s: &LabeledOperator, what: &str) -> Result<()> {
    if (s.trace() - ONE).norm() > 1e-9 {
        return Err(Error::NotAState(format!("{what} has trace {}", s.trace())));
    }
    Ok(())
}

/// Discards every input except `N^i`, feeds the `fixed` states (default
/// maximally mixed) into the other output wires and each probe into `j^o`.
/// A positive distance for `j < N−1` shows signalling across a
/// trace-and-prepare operation, which no mixed memoryless process allows.
pub fn signalling_witness(
    p: &ProcessTensor,
    j: usize,
    probes: (&LabeledOperator, &LabeledOperator),
    fixed: &[LabeledOperator],
) -> Result<SignallingWitness> {
    let n = p.n_times();
    if j == 0 || j >= n {
        return Err(Error::InvalidTime(format!("probe time {j} must lie in 1..{n}")));
    }
    let target = p.output(j);
    for (s, name) in [(probes.0, "first probe"), (probes.1, "second probe")] {
        if s.labels() != [target] {
            return Err(Error::DimensionMismatch(format!("{name} must live on {target}")));
        }
        check_unit_state(s, name)?;
    }
    let others: Vec<SpaceLabel> = (1..n).filter(|&k| k != j).map(|k| p.output(k)).collect();
    for (idx, f) in fixed.iter().enumerate() {
        let ok = matches!(f.labels(), [l] if others.contains(l))
            && !fixed[..idx].iter().any(|g| g.labels() == f.labels());
        if !ok {
            return Err(Error::DimensionMismatch(
                "fixed inputs must be distinct single-wire states on output wires other than the probe".into(),
            ));
        }
        check_unit_state(f, "fixed input")?;
    }
    let feeds = others
        .iter()
        .map(|w| match fixed.iter().find(|f| f.contains(w)) {
            Some(f) => Ok(f.clone()),
            None => LabeledOperator::maximally_mixed(vec![*w]),
        })
        .collect::<Result<Vec<_>>>()?;
    let discard: Vec<SpaceLabel> = (1..n).map(|k| p.input(k)).collect();
    let mut base = p.op().partial_trace(&discard)?;
    for f in &feeds {
        base = link_product(&base, f)?;
    }
    let a = link_product(&base, probes.0)?;
    let b = link_product(&base, probes.1)?;
    let distance = 0.5 * trace_norm(&a.sub(&b)?);
    Ok(SignallingWitness {
        from_time: j,
        states: (a, b),
        distance,
    })
}

/// Largest witness distance over spanning probe pairs at every `j ≤ N−2`.
/// Every other output is maximally mixed, or one of them at a time runs
/// through its spanning states.
pub fn max_signalling_distance(p: &ProcessTensor) -> Result<f64> {
    let n = p.n_times();
    let mut best: f64 = 0.0;
    for j in 1..n.saturating_sub(1) {
        let probes = spanning_states(p.output(j))?;
        let mut settings = vec![Vec::new()];
        for k in (1..n).filter(|&k| k != j) {
            settings.extend(spanning_states(p.output(k))?.into_iter().map(|s| vec![s]));
        }
        for fixed in &settings {
            for other in &probes[1..] {
                best = best.max(signalling_witness(p, j, (&probes[0], other), fixed)?.distance);
            }
        }
    }
    Ok(best)
}

/// `‖C − C̃‖_tr` against the product of marginals.
pub fn memoryless_distance(p: &ProcessTensor) -> Result<f64> {
    let m = memoryless_marginal_product(p)?;
    Ok(trace_norm(&p.op().sub(m.op())?))
}

/// `S(C/t ‖ C̃/t)` in bits with `t = tr C`, the trace shared by a process
/// and its marginal product.
pub fn memory_measure(p: &ProcessTensor, tol: &Tolerances) -> Result<f64> {
    let m = memoryless_marginal_product(p)?;
    let t = p.expected_trace();
    let s = relative_entropy_tol(&p.op().scale(1.0 / t), &m.op().scale(1.0 / t), tol)?;
    Ok(s.max(0.0))
}

/// Outcome of [`memoryless_on_average_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemorylessOnAverage {
    pub time: usize,
    /// Largest dependence on earlier output wires, over the sampled states.
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Inserts `σ_{j^o} ⊗ 1_{j^i}` for a spanning set of `σ`, discards the
/// earlier inputs and measures how much the remainder still depends on the
/// earlier output wires.
pub fn memoryless_on_average_check(p: &ProcessTensor, j: usize, tol: &Tolerances) -> Result<MemorylessOnAverage> {
    let n = p.n_times();
    if j <= 1 || j >= n {
        return Err(Error::InvalidTime(format!("break time {j} must satisfy 1 < j < {n}")));
    }
    let past_inputs: Vec<SpaceLabel> = (1..j).map(|k| p.input(k)).collect();
    let past_outputs: Vec<SpaceLabel> = (1..j).map(|k| p.output(k)).collect();
    let d_past: usize = past_outputs.iter().map(|l| l.dim).product();
    let discarded = p.op().partial_trace(&[p.input(j)])?.partial_trace(&past_inputs)?;
    let mut max_residual: f64 = 0.0;
    for sigma in spanning_states(p.output(j))? {
        let r = link_product(&discarded, &sigma)?;
        let averaged = LabeledOperator::identity(past_outputs.clone())?
            .scale(1.0 / d_past as f64)
            .tensor_product(&r.partial_trace(&past_outputs)?)?;
        max_residual = max_residual.max(trace_norm(&r.sub(&averaged)?));
    }
    Ok(MemorylessOnAverage {
        time: j,
        max_residual,
        tolerance: tol.signalling,
        passed: max_residual <= tol.signalling,
    })
}
