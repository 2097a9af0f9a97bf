//! Multi-time process tensors and their constructors.

mod build;
mod causality;
mod circuit;
mod marginal;
mod tree;

use std::cmp::Reverse;

pub use build::{build_cm_conditional, build_memoryless_product, build_mm, build_sep, convex_combine_cm};
pub(crate) use build::check_weights;
pub use causality::{validate_causality, CausalityReport};
pub use circuit::{
    build_cm_dilated, build_memoryless_dilated, build_qm, cm_dilated_to_conditional, gap_unitary,
    initial_state_labels, CmCircuit, Ebc,
};
pub use marginal::memoryless_marginal_product;
pub use tree::{ConditionalInstrumentTree, Instrument, StateEnsemble};

use crate::error::{Error, Result};
use crate::label::{Port, SpaceLabel};
use crate::operator::LabeledOperator;
use crate::spectral::psd_eigen;
use crate::tolerance::Tolerances;

/// Choi operator of an `N`-time process on wires
/// `N^i, N−1^o, N−1^i, …, 1^o, 1^i`, stored in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessTensor {
    op: LabeledOperator,
    n_times: usize,
}

/// Sorts labels into the canonical process order.
pub fn canonical_order(labels: &[SpaceLabel]) -> Vec<SpaceLabel> {
    let mut v = labels.to_vec();
    v.sort_by_key(|l| (Reverse(l.time), Reverse(l.port)));
    v
}

impl ProcessTensor {
    /// Checks the wire structure (one input per time `1..=N`, one output per
    /// time `1..N`) and brings the operator into canonical order. Positivity
    /// and causality are not checked; see [`validate_causality`].
    pub fn from_operator(op: LabeledOperator) -> Result<Self> {
        let labels = op.labels();
        let n = labels.iter().map(|l| l.time).max().unwrap_or(0) as usize;
        if n < 2 {
            return Err(Error::InvalidProcess("a process needs at least two times".into()));
        }
        for t in 1..=n as u32 {
            let count = |port| labels.iter().filter(|l| l.time == t && l.port == port).count();
            let outputs = if t as usize == n { 0 } else { 1 };
            if count(Port::Input) != 1 || count(Port::Output) != outputs {
                return Err(Error::InvalidProcess(format!(
                    "time {t} must carry one input and {outputs} output wire(s)"
                )));
            }
        }
        let order = canonical_order(labels);
        Ok(Self {
            op: op.permute(&order)?,
            n_times: n,
        })
    }

    /// [`from_operator`](Self::from_operator) plus positivity and causality.
    pub fn new_validated(op: LabeledOperator, tol: &Tolerances) -> Result<Self> {
        let p = Self::from_operator(op)?;
        p.check(tol)?;
        Ok(p)
    }

    pub(crate) fn check(&self, tol: &Tolerances) -> Result<()> {
        psd_eigen(&self.op, tol)?;
        let report = validate_causality(self, tol)?;
        if !report.passed {
            return Err(Error::NotCausal {
                residual: report.max_residual.max((report.final_scalar - 1.0).abs()),
            });
        }
        Ok(())
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn into_op(self) -> LabeledOperator {
        self.op
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn labels(&self) -> &[SpaceLabel] {
        self.op.labels()
    }

    /// Input wire `k^i`, for `1 ≤ k ≤ N`.
    pub fn input(&self, k: usize) -> SpaceLabel {
        self.wire(k, Port::Input)
    }

    /// Output wire `k^o`, for `1 ≤ k < N`.
    pub fn output(&self, k: usize) -> SpaceLabel {
        self.wire(k, Port::Output)
    }

    fn wire(&self, k: usize, port: Port) -> SpaceLabel {
        *self
            .labels()
            .iter()
            .find(|l| l.time as usize == k && l.port == port)
            .unwrap_or_else(|| panic!("process has no wire at time {k} ({port:?})"))
    }

    pub fn inputs(&self) -> Vec<SpaceLabel> {
        (1..=self.n_times).map(|k| self.input(k)).collect()
    }

    pub fn outputs(&self) -> Vec<SpaceLabel> {
        (1..self.n_times).map(|k| self.output(k)).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.labels().iter().map(|l| l.dim).collect()
    }

    /// `Π_{j<N} d_{j^o}`, the trace of any valid process on these wires.
    pub fn expected_trace(&self) -> f64 {
        self.outputs().iter().map(|l| l.dim as f64).product()
    }

    /// Whether `other` lives on the same wires.
    pub fn same_wires(&self, other: &Self) -> bool {
        self.labels() == other.labels()
    }
}
