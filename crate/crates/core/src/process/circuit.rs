//! Processes given as system-environment circuits.
//!
//! Wire convention: the initial state lives on `S1^i ⊗ E1^i`; at gap `j` an
//! environment channel maps `E j^i → E j^o`, then the unitary maps
//! `S j^o ⊗ E j^o → S j+1^i ⊗ E j+1^i`. The last environment wire `E N^i`
//! is traced out.

use std::collections::BTreeMap;

use crate::choi::{choi_ebc, choi_identity, choi_unitary, link_product, ChoiChannel, Povm};
use crate::error::{Error, Result};
use crate::label::{Port, Role, SpaceLabel};
use crate::operator::{CMatrix, LabeledOperator, ONE};
use crate::spectral::psd_eigen;
use crate::tolerance::Tolerances;

use super::tree::{ConditionalInstrumentTree, Instrument, StateEnsemble};
use super::ProcessTensor;

/// Measure-and-prepare channel that keeps its decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Ebc {
    states: Vec<LabeledOperator>,
    povm: Povm,
    channel: ChoiChannel,
}

impl Ebc {
    pub fn new(states: Vec<LabeledOperator>, povm: Povm) -> Result<Self> {
        let channel = choi_ebc(&states, &povm)?;
        Ok(Self { states, povm, channel })
    }

    /// Single-outcome EBC: discard the input and prepare `sigma`.
    pub fn trace_and_prepare(sigma: LabeledOperator, inputs: Vec<SpaceLabel>) -> Result<Self> {
        Self::new(vec![sigma], Povm::trivial(inputs)?)
    }

    pub fn states(&self) -> &[LabeledOperator] {
        &self.states
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn channel(&self) -> &ChoiChannel {
        &self.channel
    }
}

/// System-environment circuit with entanglement-breaking environment
/// channels.
#[derive(Debug, Clone)]
pub struct CmCircuit {
    pub initial: LabeledOperator,
    pub unitaries: Vec<ChoiChannel>,
    pub ebcs: Vec<Ebc>,
}

impl CmCircuit {
    pub fn build(&self) -> Result<ProcessTensor> {
        build_cm_dilated(&self.initial, &self.unitaries, &self.ebcs)
    }

    pub fn to_conditional(&self) -> Result<ConditionalInstrumentTree> {
        cm_dilated_to_conditional(&self.initial, &self.unitaries, &self.ebcs)
    }
}

/// `[S1^i, E1^i]`.
pub fn initial_state_labels(d_sys: usize, d_env: usize) -> Vec<SpaceLabel> {
    vec![SpaceLabel::sys_in(1, d_sys), SpaceLabel::env_in(1, d_env)]
}

/// Unitary `u` on `S ⊗ E` (system factor first) for gap `j`, from
/// `S j^o ⊗ E j^o` to `S j+1^i ⊗ E j+1^i`. Dimensions are `(before, after)`.
pub fn gap_unitary(j: u32, u: &CMatrix, sys: (usize, usize), env: (usize, usize)) -> Result<ChoiChannel> {
    choi_unitary(
        u,
        &[SpaceLabel::sys_out(j, sys.0), SpaceLabel::env_out(j, env.0)],
        &[SpaceLabel::sys_in(j + 1, sys.1), SpaceLabel::env_in(j + 1, env.1)],
    )
}

fn find(labels: &[SpaceLabel], time: usize, port: Port, role: Role) -> Option<SpaceLabel> {
    labels
        .iter()
        .find(|l| l.time as usize == time && l.port == port && l.role == role)
        .copied()
}

fn mismatch(msg: String) -> Error {
    Error::DimensionMismatch(msg)
}

/// Environment wires `(E j^i, E j^o)` for each gap, after checking that the
/// initial state and unitaries chain.
fn check_circuit(initial: &LabeledOperator, unitaries: &[ChoiChannel], tol: &Tolerances) -> Result<Vec<(SpaceLabel, SpaceLabel)>> {
    if unitaries.is_empty() {
        return Err(Error::InvalidProcess("a circuit needs at least one unitary".into()));
    }
    let il = initial.labels();
    let e1 = match (find(il, 1, Port::Input, Role::System), find(il, 1, Port::Input, Role::Environment)) {
        (Some(_), Some(e)) if il.len() == 2 => e,
        _ => return Err(mismatch("initial state must live on S1^i and E1^i".into())),
    };
    psd_eigen(initial, tol).map_err(|e| Error::NotAState(e.to_string()))?;
    if (initial.trace() - ONE).norm() > tol.channel {
        return Err(Error::NotAState(format!("initial state has trace {}", initial.trace())));
    }
    let mut env_in = e1;
    let mut gaps = Vec::with_capacity(unitaries.len());
    for (idx, u) in unitaries.iter().enumerate() {
        let j = idx + 1;
        let eo = match (
            find(u.inputs(), j, Port::Output, Role::System),
            find(u.inputs(), j, Port::Output, Role::Environment),
        ) {
            (Some(_), Some(e)) if u.inputs().len() == 2 => e,
            _ => return Err(mismatch(format!("unitary {j} must act on S{j}^o and E{j}^o"))),
        };
        let next_e = match (
            find(u.outputs(), j + 1, Port::Input, Role::System),
            find(u.outputs(), j + 1, Port::Input, Role::Environment),
        ) {
            (Some(_), Some(e)) if u.outputs().len() == 2 => e,
            _ => return Err(mismatch(format!("unitary {j} must output S{}^i and E{}^i", j + 1, j + 1))),
        };
        check_unitary_choi(u, tol)?;
        gaps.push((env_in, eo));
        env_in = next_e;
    }
    Ok(gaps)
}

/// A Choi operator is that of a unitary iff it is CPTP, unital and rank one
/// with equal input and output dimensions.
fn check_unitary_choi(u: &ChoiChannel, tol: &Tolerances) -> Result<()> {
    let din: usize = u.inputs().iter().map(|l| l.dim).product();
    let dout: usize = u.outputs().iter().map(|l| l.dim).product();
    if din != dout {
        return Err(mismatch(format!("unitary maps dimension {din} to {dout}")));
    }
    let e = psd_eigen(u.op(), tol).map_err(|_| Error::NotUnitary { deviation: f64::NAN })?;
    let tail: f64 = e.values[..e.values.len() - 1].iter().map(|v| v.abs()).sum();
    let tp = u.tp_residual()?;
    let unital = {
        let r = u.op().partial_trace(u.inputs())?;
        crate::spectral::trace_norm(&r.sub(&LabeledOperator::identity(r.labels().to_vec())?)?)
    };
    let deviation = tail.max(tp).max(unital);
    if deviation > tol.channel * din as f64 {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

fn env_channel_matches(ch: &ChoiChannel, gap: (SpaceLabel, SpaceLabel), j: usize) -> Result<()> {
    if ch.inputs() != [gap.0] || ch.outputs() != [gap.1] {
        return Err(mismatch(format!(
            "environment channel {j} must map {} to {}",
            gap.0, gap.1
        )));
    }
    Ok(())
}

fn assemble(
    initial: &LabeledOperator,
    unitaries: &[ChoiChannel],
    env: &[ChoiChannel],
    tol: &Tolerances,
) -> Result<ProcessTensor> {
    let mut acc = initial.clone();
    for (g, u) in env.iter().zip(unitaries) {
        acc = link_product(&acc, g.op())?;
        acc = link_product(&acc, u.op())?;
    }
    let last = find(acc.labels(), unitaries.len() + 1, Port::Input, Role::Environment)
        .expect("last unitary outputs an environment wire");
    let op = acc.partial_trace(&[last])?;
    ProcessTensor::new_validated(op, tol)
}

/// Environment carried coherently by identity channels between unitaries.
pub fn build_qm(initial: &LabeledOperator, unitaries: &[ChoiChannel]) -> Result<ProcessTensor> {
    let tol = Tolerances::default();
    let gaps = check_circuit(initial, unitaries, &tol)?;
    let env = gaps
        .iter()
        .map(|&(i, o)| choi_identity(i, o))
        .collect::<Result<Vec<_>>>()?;
    assemble(initial, unitaries, &env, &tol)
}

/// Environment discarded and re-prepared in `env_preps[j−1]` (a state on
/// `E j^o`) at every gap `j = 1, …, N−1`.
pub fn build_memoryless_dilated(
    initial: &LabeledOperator,
    unitaries: &[ChoiChannel],
    env_preps: &[LabeledOperator],
) -> Result<ProcessTensor> {
    let tol = Tolerances::default();
    let gaps = check_circuit(initial, unitaries, &tol)?;
    if env_preps.len() != gaps.len() {
        return Err(Error::LengthMismatch(format!(
            "{} environment preparations for {} gaps",
            env_preps.len(),
            gaps.len()
        )));
    }
    let env = gaps
        .iter()
        .zip(env_preps)
        .enumerate()
        .map(|(j, (&(i, o), s))| {
            if s.labels() != [o] {
                return Err(mismatch(format!("preparation {} must live on {o}", j + 1)));
            }
            crate::choi::choi_trace_and_prepare(s, &[i])
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(initial, unitaries, &env, &tol)
}

/// Environment passed through an entanglement-breaking channel at every gap.
pub fn build_cm_dilated(initial: &LabeledOperator, unitaries: &[ChoiChannel], ebcs: &[Ebc]) -> Result<ProcessTensor> {
    let tol = Tolerances::default();
    let gaps = check_circuit(initial, unitaries, &tol)?;
    check_ebcs(&gaps, ebcs)?;
    let env: Vec<ChoiChannel> = ebcs.iter().map(|e| e.channel().clone()).collect();
    assemble(initial, unitaries, &env, &tol)
}

fn check_ebcs(gaps: &[(SpaceLabel, SpaceLabel)], ebcs: &[Ebc]) -> Result<()> {
    if ebcs.len() != gaps.len() {
        return Err(Error::LengthMismatch(format!(
            "{} entanglement-breaking channels for {} gaps",
            ebcs.len(),
            gaps.len()
        )));
    }
    for (j, (e, &g)) in ebcs.iter().zip(gaps).enumerate() {
        env_channel_matches(e.channel(), g, j + 1)?;
    }
    Ok(())
}

/// Splits a classical-memory circuit into conditional instruments on the
/// system: `ρ^{(x_1)} = M^{(x_1)} ⋆ ρ_SE`,
/// `L^{(x_{j+1}|x_{j:1})} = M^{(x_{j+1})} ⋆ U_j ⋆ σ^{(x_j)}` and final channels
/// `1_E ⋆ U_{N−1} ⋆ σ^{(x_{N−1})}`.
pub fn cm_dilated_to_conditional(
    initial: &LabeledOperator,
    unitaries: &[ChoiChannel],
    ebcs: &[Ebc],
) -> Result<ConditionalInstrumentTree> {
    let tol = Tolerances::default();
    let gaps = check_circuit(initial, unitaries, &tol)?;
    check_ebcs(&gaps, ebcs)?;
    let n = unitaries.len() + 1;

    let root = StateEnsemble::new(
        ebcs[0]
            .povm()
            .elements()
            .iter()
            .map(|m| link_product(&m.transpose(), initial))
            .collect::<Result<Vec<_>>>()?,
        &tol,
    )?;

    // slices[j−1][x_j][x_{j+1}] for gaps j = 1..N−2 depend only on (x_j, x_{j+1}).
    let mut slices: Vec<Vec<Instrument>> = Vec::with_capacity(n.saturating_sub(2));
    for j in 1..n - 1 {
        let u = &unitaries[j - 1];
        let s_in = find(u.inputs(), j, Port::Output, Role::System).expect("checked");
        let s_out = find(u.outputs(), j + 1, Port::Input, Role::System).expect("checked");
        let per_prev = ebcs[j - 1]
            .states()
            .iter()
            .map(|sigma| {
                let prepared = link_product(sigma, u.op())?;
                let ops = ebcs[j]
                    .povm()
                    .elements()
                    .iter()
                    .map(|m| {
                        let op = link_product(&prepared, &m.transpose())?;
                        ChoiChannel::new(op, vec![s_in], vec![s_out])
                    })
                    .collect::<Result<Vec<_>>>()?;
                Instrument::new(ops, &tol)
            })
            .collect::<Result<Vec<_>>>()?;
        slices.push(per_prev);
    }

    let u = &unitaries[n - 2];
    let s_in = find(u.inputs(), n - 1, Port::Output, Role::System).expect("checked");
    let s_out = find(u.outputs(), n, Port::Input, Role::System).expect("checked");
    let e_last = find(u.outputs(), n, Port::Input, Role::Environment).expect("checked");
    let final_by_prev = ebcs[n - 2]
        .states()
        .iter()
        .map(|sigma| {
            let op = link_product(sigma, u.op())?.partial_trace(&[e_last])?;
            ChoiChannel::new(op, vec![s_in], vec![s_out])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut instruments = BTreeMap::new();
    let mut finals = BTreeMap::new();
    let mut level: Vec<Vec<usize>> = (0..root.len()).map(|x| vec![x]).collect();
    for slice in &slices {
        let mut next = Vec::new();
        for h in level {
            let inst = slice[*h.last().expect("non-empty history")].clone();
            for x in 0..inst.len() {
                let mut c = h.clone();
                c.push(x);
                next.push(c);
            }
            instruments.insert(h, inst);
        }
        level = next;
    }
    for h in level {
        let f = final_by_prev[*h.last().expect("non-empty history")].clone();
        finals.insert(h, f);
    }
    ConditionalInstrumentTree::new(root, instruments, finals, &tol)
}
