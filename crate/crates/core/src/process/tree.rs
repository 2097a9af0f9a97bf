use std::collections::BTreeMap;

use crate::choi::ChoiChannel;
use crate::error::{Error, Result};
use crate::label::{Port, SpaceLabel};
use crate::operator::LabeledOperator;
use crate::spectral::{psd_eigen, trace_norm};
use crate::tolerance::Tolerances;

/// CP maps on shared wires whose sum is trace preserving.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    ops: Vec<ChoiChannel>,
}

impl Instrument {
    pub fn new(ops: Vec<ChoiChannel>, tol: &Tolerances) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidInstrument("no elements".into()))?;
        let (ins, outs) = (first.inputs().to_vec(), first.outputs().to_vec());
        let mut order = ins.clone();
        order.extend_from_slice(&outs);
        let mut aligned = Vec::with_capacity(ops.len());
        for (x, op) in ops.iter().enumerate() {
            if op.inputs() != ins.as_slice() || op.outputs() != outs.as_slice() {
                return Err(Error::InvalidInstrument(format!("element {x} acts on different wires")));
            }
            psd_eigen(op.op(), tol).map_err(|e| Error::InvalidInstrument(format!("element {x}: {e}")))?;
            let op = ChoiChannel::new(op.op().aligned_to(&order)?, ins.clone(), outs.clone())?;
            aligned.push(op);
        }
        let inst = Self { ops: aligned };
        let r = inst.sum()?.tp_residual()?;
        if r > tol.channel {
            return Err(Error::InvalidInstrument(format!(
                "elements sum to a map with trace-preservation residual {r:e}"
            )));
        }
        Ok(inst)
    }

    pub fn ops(&self) -> &[ChoiChannel] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn inputs(&self) -> &[SpaceLabel] {
        self.ops[0].inputs()
    }

    pub fn outputs(&self) -> &[SpaceLabel] {
        self.ops[0].outputs()
    }

    /// The averaged channel `Σ_x L_x`.
    pub fn sum(&self) -> Result<ChoiChannel> {
        let total = LabeledOperator::weighted_sum(self.ops.iter().map(|o| (1.0, o.op())))?
            .expect("instrument is non-empty");
        ChoiChannel::new(total, self.inputs().to_vec(), self.outputs().to_vec())
    }
}

/// Subnormalized states with total trace one.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEnsemble {
    members: Vec<LabeledOperator>,
}

impl StateEnsemble {
    pub fn new(members: Vec<LabeledOperator>, tol: &Tolerances) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::NotAState("empty ensemble".into()))?;
        let labels = first.labels().to_vec();
        let mut total = 0.0;
        let mut aligned = Vec::with_capacity(members.len());
        for (x, m) in members.iter().enumerate() {
            let m = m.aligned_to(&labels)?;
            psd_eigen(&m, tol).map_err(|e| Error::NotAState(format!("member {x}: {e}")))?;
            total += m.trace().re;
            aligned.push(m);
        }
        if (total - 1.0).abs() > tol.channel {
            return Err(Error::NotAState(format!("ensemble has total trace {total}")));
        }
        Ok(Self { members: aligned })
    }

    pub fn members(&self) -> &[LabeledOperator] {
        &self.members
    }

    pub fn labels(&self) -> &[SpaceLabel] {
        self.members[0].labels()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub(crate) fn from_members_unchecked(members: Vec<LabeledOperator>) -> Self {
        Self { members }
    }
}

/// Conditional instruments indexed by measurement history.
///
/// Histories are stored oldest outcome first: `[x_1, …, x_j]`. The root
/// ensemble prepares `ρ^{(x_1)}` on `1^i`; the instrument stored under a
/// history of length `j` maps `j^o → j+1^i` with outcome `x_{j+1}`; final
/// channels under histories of length `N−1` map `N−1^o → N^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalInstrumentTree {
    n_times: usize,
    root: StateEnsemble,
    instruments: BTreeMap<Vec<usize>, Instrument>,
    finals: BTreeMap<Vec<usize>, ChoiChannel>,
}

fn bad(msg: String) -> Error {
    Error::InvalidInstrument(msg)
}

impl ConditionalInstrumentTree {
    pub fn new(
        root: StateEnsemble,
        instruments: BTreeMap<Vec<usize>, Instrument>,
        finals: BTreeMap<Vec<usize>, ChoiChannel>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n_times = finals
            .keys()
            .map(|h| h.len() + 1)
            .max()
            .ok_or_else(|| bad("tree has no final channels".into()))?;
        if n_times < 2 {
            return Err(bad("final channels need a non-empty history".into()));
        }
        if !matches!(root.labels(), [l] if l.time == 1 && l.port == Port::Input) {
            return Err(bad("root ensemble must live on the single wire 1^i".into()));
        }

        let mut level: Vec<Vec<usize>> = (0..root.len()).map(|x| vec![x]).collect();
        let mut wires: Vec<(Vec<SpaceLabel>, Vec<SpaceLabel>)> = Vec::new();
        let mut seen_instruments = 0;
        for j in 1..n_times - 1 {
            let mut next = Vec::new();
            for h in &level {
                let inst = instruments
                    .get(h)
                    .ok_or_else(|| bad(format!("no instrument for history {h:?}")))?;
                seen_instruments += 1;
                check_gap(inst.inputs(), inst.outputs(), j, &mut wires)?;
                for x in 0..inst.len() {
                    let mut c = h.clone();
                    c.push(x);
                    next.push(c);
                }
            }
            level = next;
        }
        if seen_instruments != instruments.len() {
            return Err(bad("instrument stored under an unreachable history".into()));
        }
        for h in &level {
            let f = finals
                .get(h)
                .ok_or_else(|| bad(format!("no final channel for history {h:?}")))?;
            check_gap(f.inputs(), f.outputs(), n_times - 1, &mut wires)?;
            f.check_cptp(tol)
                .map_err(|e| bad(format!("final channel for history {h:?}: {e}")))?;
        }
        if level.len() != finals.len() {
            return Err(bad("final channel stored under an unreachable history".into()));
        }
        Ok(Self {
            n_times,
            root,
            instruments,
            finals,
        })
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn root(&self) -> &StateEnsemble {
        &self.root
    }

    pub fn instruments(&self) -> &BTreeMap<Vec<usize>, Instrument> {
        &self.instruments
    }

    pub fn finals(&self) -> &BTreeMap<Vec<usize>, ChoiChannel> {
        &self.finals
    }

    /// Number of complete histories `x_{N−1:1}`.
    pub fn n_branches(&self) -> usize {
        self.finals.len()
    }

    /// All wires in canonical process order.
    pub fn wires(&self) -> Vec<SpaceLabel> {
        let (h, f) = self.finals.iter().next().expect("tree has final channels");
        let mut out = f.outputs().to_vec();
        out.extend_from_slice(f.inputs());
        for j in (1..h.len()).rev() {
            let inst = &self.instruments[&h[..j].to_vec()];
            out.extend_from_slice(inst.outputs());
            out.extend_from_slice(inst.inputs());
        }
        out.extend_from_slice(self.root.labels());
        out
    }

    pub(crate) fn from_parts_unchecked(
        n_times: usize,
        root: StateEnsemble,
        instruments: BTreeMap<Vec<usize>, Instrument>,
        finals: BTreeMap<Vec<usize>, ChoiChannel>,
    ) -> Self {
        Self {
            n_times,
            root,
            instruments,
            finals,
        }
    }
}

/// Checks that a slice maps `j^o → j+1^i` and agrees with earlier slices at
/// the same gap.
fn check_gap(
    ins: &[SpaceLabel],
    outs: &[SpaceLabel],
    j: usize,
    wires: &mut Vec<(Vec<SpaceLabel>, Vec<SpaceLabel>)>,
) -> Result<()> {
    let ok = matches!(ins, [l] if l.time as usize == j && l.port == Port::Output)
        && matches!(outs, [l] if l.time as usize == j + 1 && l.port == Port::Input);
    if !ok {
        return Err(bad(format!("slice at gap {j} must map {j}^o to {}^i", j + 1)));
    }
    match wires.get(j - 1) {
        Some((i, o)) if i.as_slice() != ins || o.as_slice() != outs => Err(Error::DimensionMismatch(
            format!("slices at gap {j} act on different wires"),
        )),
        Some(_) => Ok(()),
        None => {
            wires.push((ins.to_vec(), outs.to_vec()));
            Ok(())
        }
    }
}

/// `‖a − b‖_tr` for operators on the same wires.
pub(crate) fn distance(a: &LabeledOperator, b: &LabeledOperator) -> Result<f64> {
    Ok(trace_norm(&a.sub(b)?))
}
