use serde::Serialize;

use crate::error::Result;
use crate::operator::LabeledOperator;
use crate::spectral::trace_norm;
use crate::tolerance::Tolerances;

use super::ProcessTensor;

/// Outcome of checking the causality chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalityReport {
    /// `(k, ‖tr_{k^i} C_{k:1} − 1_{k−1^o} ⊗ C_{k−1:1}‖_tr)` for `k = N, …, 2`.
    pub residuals: Vec<(usize, f64)>,
    pub max_residual: f64,
    /// `tr C_{1:1}`, which must equal one.
    pub final_scalar: f64,
    /// Reduced processes `C_{N:1}, C_{N−1:1}, …, C_{1:1}`.
    #[serde(skip)]
    pub chain: Vec<LabeledOperator>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Walks the chain `C_{k−1:1} = tr_{k^i k−1^o}[C_{k:1}] / d_{k−1^o}` from
/// `k = N` down to 2 and records each residual.
pub fn validate_causality(p: &ProcessTensor, tol: &Tolerances) -> Result<CausalityReport> {
    let mut c = p.op().clone();
    let mut chain = vec![c.clone()];
    let mut residuals = Vec::with_capacity(p.n_times() - 1);
    for k in (2..=p.n_times()).rev() {
        let out = p.output(k - 1);
        let reduced = c.partial_trace(&[p.input(k)])?;
        let next = reduced.partial_trace(&[out])?.scale(1.0 / out.dim as f64);
        let expect = LabeledOperator::identity(vec![out])?.tensor_product(&next)?;
        residuals.push((k, trace_norm(&reduced.sub(&expect)?)));
        chain.push(next.clone());
        c = next;
    }
    let final_scalar = c.trace().re;
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.1));
    let passed = max_residual <= tol.causality
        && (final_scalar - 1.0).abs() <= tol.causality
        && c.trace().im.abs() <= tol.causality;
    Ok(CausalityReport {
        residuals,
        max_residual,
        final_scalar,
        chain,
        tolerance: tol.causality,
        passed,
    })
}
