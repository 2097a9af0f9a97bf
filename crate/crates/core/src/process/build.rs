use std::collections::BTreeMap;

use crate::choi::ChoiChannel;
use crate::error::{Error, Result};
use crate::label::Port;
use crate::operator::{LabeledOperator, ONE};
use crate::spectral::psd_eigen;
use crate::tolerance::Tolerances;

use super::marginal::memoryless_marginal_product;
use super::tree::{distance, ConditionalInstrumentTree, Instrument, StateEnsemble};
use super::ProcessTensor;

fn check_rho1(rho: &LabeledOperator, tol: &Tolerances) -> Result<()> {
    if !matches!(rho.labels(), [l] if l.time == 1 && l.port == Port::Input) {
        return Err(Error::InvalidProcess("initial state must live on the single wire 1^i".into()));
    }
    psd_eigen(rho, tol).map_err(|e| Error::NotAState(e.to_string()))?;
    if (rho.trace() - ONE).norm() > tol.channel {
        return Err(Error::NotAState(format!("trace is {}", rho.trace())));
    }
    Ok(())
}

fn check_gap_channel(ch: &ChoiChannel, j: usize) -> Result<()> {
    let ok = matches!(ch.inputs(), [l] if l.time as usize == j && l.port == Port::Output)
        && matches!(ch.outputs(), [l] if l.time as usize == j + 1 && l.port == Port::Input);
    if !ok {
        return Err(Error::InvalidProcess(format!(
            "channel {j} must map {j}^o to {}^i",
            j + 1
        )));
    }
    Ok(())
}

/// `L_{N^i:N−1^o} ⊗ … ⊗ L_{2^i:1^o} ⊗ ρ_{1^i}`; `channels[j−1]` maps
/// `j^o → j+1^i`.
pub fn build_memoryless_product(channels: &[ChoiChannel], rho1: &LabeledOperator) -> Result<ProcessTensor> {
    let tol = Tolerances::default();
    if channels.is_empty() {
        return Err(Error::InvalidProcess("a process needs at least one channel".into()));
    }
    check_rho1(rho1, &tol)?;
    let mut op = rho1.clone();
    for (idx, ch) in channels.iter().enumerate() {
        check_gap_channel(ch, idx + 1)?;
        ch.check_cptp(&tol)?;
        op = ch.op().tensor_product(&op)?;
    }
    ProcessTensor::new_validated(op, &tol)
}

pub(crate) fn check_weights(weights: &[f64], n: usize, tol: &Tolerances) -> Result<()> {
    if weights.len() != n {
        return Err(Error::LengthMismatch(format!("{} weights for {n} terms", weights.len())));
    }
    if weights.is_empty() {
        return Err(Error::BadWeights("no weights".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::BadWeights("weights must be finite and nonnegative".into()));
    }
    let s: f64 = weights.iter().sum();
    if (s - 1.0).abs() > tol.channel {
        return Err(Error::BadWeights(format!("weights sum to {s}")));
    }
    Ok(())
}

/// `Σ_x p_x C^{(x)}` over memoryless components.
pub fn build_mm(weights: &[f64], components: &[ProcessTensor]) -> Result<ProcessTensor> {
    let tol = Tolerances::default();
    check_weights(weights, components.len(), &tol)?;
    let first = &components[0];
    for (index, c) in components.iter().enumerate() {
        if !c.same_wires(first) {
            return Err(Error::DimensionMismatch(format!(
                "component {index} lives on different wires"
            )));
        }
        let marginal = memoryless_marginal_product(c)?;
        let d = distance(c.op(), marginal.op())?;
        if d > tol.memoryless {
            return Err(Error::ComponentNotMemoryless { index, distance: d });
        }
    }
    let op = LabeledOperator::weighted_sum(weights.iter().copied().zip(components.iter().map(|c| c.op())))?
        .expect("at least one component");
    ProcessTensor::new_validated(op, &tol)
}

/// `Σ_x p_x L_N^{(x)} ⊗ … ⊗ L_2^{(x)} ⊗ ρ^{(x)}` with positive factors;
/// `channel_factors[x][j−1]` lives on `{j+1^i, j^o}` and `rho_factors[x]`
/// on `1^i`. Causality of the sum is checked afterwards.
pub fn build_sep(
    weights: &[f64],
    channel_factors: &[Vec<LabeledOperator>],
    rho_factors: &[LabeledOperator],
) -> Result<ProcessTensor> {
    let tol = Tolerances::default();
    check_weights(weights, channel_factors.len(), &tol)?;
    if rho_factors.len() != weights.len() {
        return Err(Error::LengthMismatch(format!(
            "{} initial factors for {} terms",
            rho_factors.len(),
            weights.len()
        )));
    }
    let mut terms = Vec::with_capacity(weights.len());
    for (x, (factors, rho)) in channel_factors.iter().zip(rho_factors).enumerate() {
        if factors.is_empty() {
            return Err(Error::InvalidProcess(format!("term {x} has no channel factors")));
        }
        if !matches!(rho.labels(), [l] if l.time == 1 && l.port == Port::Input) {
            return Err(Error::InvalidProcess(format!("initial factor {x} must live on 1^i")));
        }
        psd_eigen(rho, &tol)?;
        let mut op = rho.clone();
        for (idx, f) in factors.iter().enumerate() {
            let j = idx + 1;
            let ok = f.labels().len() == 2
                && f.labels().iter().any(|l| l.time as usize == j && l.port == Port::Output)
                && f.labels().iter().any(|l| l.time as usize == j + 1 && l.port == Port::Input);
            if !ok {
                return Err(Error::InvalidProcess(format!(
                    "factor {j} of term {x} must live on {}^i and {j}^o",
                    j + 1
                )));
            }
            psd_eigen(f, &tol)?;
            op = f.tensor_product(&op)?;
        }
        terms.push(ProcessTensor::from_operator(op)?);
    }
    let first = &terms[0];
    if terms.iter().any(|t| !t.same_wires(first)) {
        return Err(Error::DimensionMismatch("terms live on different wires".into()));
    }
    let op = LabeledOperator::weighted_sum(weights.iter().copied().zip(terms.iter().map(|t| t.op())))?
        .expect("at least one term");
    let p = ProcessTensor::from_operator(op)?;
    psd_eigen(p.op(), &tol)?;
    let report = super::validate_causality(&p, &tol)?;
    if !report.passed {
        return Err(Error::NotCausal {
            residual: report.max_residual.max((report.final_scalar - 1.0).abs()),
        });
    }
    Ok(p)
}

/// `Σ_{x_{N−1:1}} L^{(x_{N−1:1})} ⊗ L^{(x_{N−1}|x_{N−2:1})} ⊗ … ⊗ ρ^{(x_1)}`.
pub fn build_cm_conditional(tree: &ConditionalInstrumentTree) -> Result<ProcessTensor> {
    let tol = Tolerances::default();
    // Partial products for each history prefix, newest wires first.
    let mut level: Vec<(Vec<usize>, LabeledOperator)> = tree
        .root()
        .members()
        .iter()
        .enumerate()
        .map(|(x, r)| (vec![x], r.clone()))
        .collect();
    for _ in 1..tree.n_times() - 1 {
        let mut next = Vec::new();
        for (h, acc) in level {
            let inst = tree
                .instruments()
                .get(&h)
                .ok_or_else(|| Error::InvalidInstrument(format!("no instrument for history {h:?}")))?;
            for (x, l) in inst.ops().iter().enumerate() {
                let mut c = h.clone();
                c.push(x);
                next.push((c, l.op().tensor_product(&acc)?));
            }
        }
        level = next;
    }
    let mut total: Option<LabeledOperator> = None;
    for (h, acc) in level {
        let f = tree
            .finals()
            .get(&h)
            .ok_or_else(|| Error::InvalidInstrument(format!("no final channel for history {h:?}")))?;
        let term = f.op().tensor_product(&acc)?;
        total = Some(match total {
            None => term,
            Some(t) => t.add(&term)?,
        });
    }
    let op = total.ok_or_else(|| Error::InvalidInstrument("tree has no branches".into()))?;
    ProcessTensor::new_validated(op, &tol)
}

/// Tree realizing `q·A + (1−q)·B`: the root ensembles are scaled by `q` and
/// `1−q` and B's histories are shifted past A's first outcomes. A side with
/// zero weight is dropped.
pub fn convex_combine_cm(
    q: f64,
    a: &ConditionalInstrumentTree,
    b: &ConditionalInstrumentTree,
) -> Result<ConditionalInstrumentTree> {
    if !(0.0..=1.0).contains(&q) || !q.is_finite() {
        return Err(Error::BadWeights(format!("mixing weight {q} is outside [0, 1]")));
    }
    if a.n_times() != b.n_times() || a.wires() != b.wires() {
        return Err(Error::DimensionMismatch("trees act on different wires".into()));
    }
    let mut members = Vec::new();
    let mut instruments: BTreeMap<Vec<usize>, Instrument> = BTreeMap::new();
    let mut finals: BTreeMap<Vec<usize>, ChoiChannel> = BTreeMap::new();
    for (tree, w) in [(a, q), (b, 1.0 - q)] {
        if w == 0.0 {
            continue;
        }
        let offset = members.len();
        let shift = |h: &Vec<usize>| {
            let mut h = h.clone();
            h[0] += offset;
            h
        };
        members.extend(tree.root().members().iter().map(|m| m.scale(w)));
        instruments.extend(tree.instruments().iter().map(|(h, i)| (shift(h), i.clone())));
        finals.extend(tree.finals().iter().map(|(h, f)| (shift(h), f.clone())));
    }
    Ok(ConditionalInstrumentTree::from_parts_unchecked(
        a.n_times(),
        StateEnsemble::from_members_unchecked(members),
        instruments,
        finals,
    ))
}
