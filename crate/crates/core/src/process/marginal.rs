use crate::error::Result;
use crate::operator::LabeledOperator;

use super::ProcessTensor;

/// Product of the single-gap marginals of `p`:
/// `L̃_{k^i k−1^o} = tr_{rest}[C] / Π_{j≠k−1} d_{j^o}` and
/// `ρ̃_{1^i} = tr_{rest}[C] / Π_j d_{j^o}`.
///
/// Each `L̃` is trace-correct for a valid process, and `C̃ = C` exactly when
/// `p` is memoryless.
pub fn memoryless_marginal_product(p: &ProcessTensor) -> Result<ProcessTensor> {
    let total = p.expected_trace();
    let mut op = LabeledOperator::scalar(crate::operator::ONE);
    for k in (2..=p.n_times()).rev() {
        let out = p.output(k - 1);
        let l = p.op().reduce_to(&[p.input(k), out])?;
        op = op.tensor_product(&l.scale(out.dim as f64 / total))?;
    }
    let rho = p.op().reduce_to(&[p.input(1)])?.scale(1.0 / total);
    ProcessTensor::from_operator(op.tensor_product(&rho)?)
}
