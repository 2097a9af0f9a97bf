//! Seeded random instances: Haar unitaries, states, channels, POVMs and
//! processes of each class.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::choi::{ChoiChannel, Povm};
use crate::error::Result;
use crate::label::{total_dim, SpaceLabel};
use crate::operator::{CMatrix, LabeledOperator};
use crate::process::{
    build_memoryless_product, CmCircuit, build_mm, build_qm, gap_unitary, initial_state_labels,
    ConditionalInstrumentTree, Ebc, Instrument, ProcessTensor, StateEnsemble,
};
use crate::spectral::pseudo_inverse_sqrt;
use crate::tolerance::Tolerances;

pub use rand_chacha::ChaCha8Rng;

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phases of
/// `R`'s diagonal absorbed.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d, d).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random density operator `G G† / tr(G G†)` with `G` of size `d × rank`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, labels: Vec<SpaceLabel>, rank: usize) -> LabeledOperator {
    let d = total_dim(&labels);
    let g = ginibre(rng, d, rank.max(1));
    let m = &g * g.adjoint();
    let t = m.trace().re;
    LabeledOperator::new(labels, m.unscale(t)).expect("labels match dimension")
}

/// Random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, labels: Vec<SpaceLabel>) -> LabeledOperator {
    random_state(rng, labels, 1)
}

/// Random CPTP map: a random positive operator `X` on `in ⊗ out`
/// normalized as `(T^{−1/2} ⊗ 1) X (T^{−1/2} ⊗ 1)` with `T = tr_out X`.
pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    inputs: &[SpaceLabel],
    outputs: &[SpaceLabel],
    kraus_rank: usize,
) -> Result<ChoiChannel> {
    let ops = random_instrument_ops(rng, inputs, outputs, 1, kraus_rank)?;
    Ok(ops.into_iter().next().expect("one element"))
}

fn random_instrument_ops<R: Rng + ?Sized>(
    rng: &mut R,
    inputs: &[SpaceLabel],
    outputs: &[SpaceLabel],
    outcomes: usize,
    kraus_rank: usize,
) -> Result<Vec<ChoiChannel>> {
    let mut labels = inputs.to_vec();
    labels.extend_from_slice(outputs);
    // Enough rank for `tr_out` of the sum to be invertible.
    let rank = kraus_rank.max(total_dim(inputs).div_ceil(total_dim(outputs) * outcomes.max(1)));
    let xs: Vec<LabeledOperator> = (0..outcomes)
        .map(|_| random_state(rng, labels.clone(), rank))
        .collect();
    let total = LabeledOperator::weighted_sum(xs.iter().map(|x| (1.0, x)))?.expect("non-empty");
    let t = total.partial_trace(outputs)?;
    let s = pseudo_inverse_sqrt(&t)?;
    xs.iter()
        .map(|x| ChoiChannel::new(x.conjugate_by(&s)?, inputs.to_vec(), outputs.to_vec()))
        .collect()
}

/// Random instrument with `outcomes` elements.
pub fn random_instrument<R: Rng + ?Sized>(
    rng: &mut R,
    inputs: &[SpaceLabel],
    outputs: &[SpaceLabel],
    outcomes: usize,
) -> Result<Instrument> {
    let ops = random_instrument_ops(rng, inputs, outputs, outcomes, 2)?;
    Instrument::new(ops, &Tolerances::default())
}

/// Random POVM `S^{−1/2} G_x S^{−1/2}` with `S = Σ G_x`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, labels: Vec<SpaceLabel>, outcomes: usize) -> Result<Povm> {
    let rank = total_dim(&labels).div_ceil(outcomes.max(1));
    let gs: Vec<LabeledOperator> = (0..outcomes)
        .map(|_| random_state(rng, labels.clone(), rank))
        .collect();
    let total = LabeledOperator::weighted_sum(gs.iter().map(|g| (1.0, g)))?.expect("non-empty");
    let s = pseudo_inverse_sqrt(&total)?;
    let elements = gs.iter().map(|g| g.conjugate_by(&s)).collect::<Result<Vec<_>>>()?;
    Povm::new(elements, &Tolerances::default())
}

/// Random measure-and-prepare channel with pure prepared states.
pub fn random_ebc<R: Rng + ?Sized>(rng: &mut R, input: SpaceLabel, output: SpaceLabel, outcomes: usize) -> Result<Ebc> {
    let povm = random_povm(rng, vec![input], outcomes)?;
    let states = (0..outcomes).map(|_| random_pure_state(rng, vec![output])).collect();
    Ebc::new(states, povm)
}

fn sys_wires(n: usize, d: usize) -> (Vec<SpaceLabel>, Vec<SpaceLabel>) {
    let ins = (1..=n as u32).map(|t| SpaceLabel::sys_in(t, d)).collect();
    let outs = (1..n as u32).map(|t| SpaceLabel::sys_out(t, d)).collect();
    (ins, outs)
}

/// Product of random channels and a random initial state.
pub fn random_memoryless<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Result<ProcessTensor> {
    let (ins, outs) = sys_wires(n, d);
    let rank = rng.random_range(1..=d);
    let rho = random_state(rng, vec![ins[0]], rank);
    let channels = (0..n - 1)
        .map(|j| {
            let k = rng.random_range(1..=d * d);
            random_channel(rng, &[outs[j]], &[ins[j + 1]], k)
        })
        .collect::<Result<Vec<_>>>()?;
    build_memoryless_product(&channels, &rho)
}

/// Random mixture of `components` memoryless processes.
pub fn random_mm<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, components: usize) -> Result<(Vec<f64>, Vec<ProcessTensor>, ProcessTensor)> {
    let comps = (0..components)
        .map(|_| random_memoryless(rng, n, d))
        .collect::<Result<Vec<_>>>()?;
    let weights = random_weights(rng, components);
    let p = build_mm(&weights, &comps)?;
    Ok((weights, comps, p))
}

/// Random probability vector.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / s).collect()
}

/// Random initial state and unitaries on `d_sys ⊗ d_env` for `n` times.
pub fn random_circuit_parts<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    d_sys: usize,
    d_env: usize,
) -> Result<(LabeledOperator, Vec<ChoiChannel>)> {
    let initial = random_state(rng, initial_state_labels(d_sys, d_env), 2);
    let unitaries = (1..n as u32)
        .map(|j| gap_unitary(j, &haar_unitary(rng, d_sys * d_env), (d_sys, d_sys), (d_env, d_env)))
        .collect::<Result<Vec<_>>>()?;
    Ok((initial, unitaries))
}

pub fn random_cm_circuit<R: Rng + ?Sized>(rng: &mut R, n: usize, d_sys: usize, d_env: usize, outcomes: usize) -> Result<CmCircuit> {
    let (initial, unitaries) = random_circuit_parts(rng, n, d_sys, d_env)?;
    let ebcs = (1..n as u32)
        .map(|j| random_ebc(rng, SpaceLabel::env_in(j, d_env), SpaceLabel::env_out(j, d_env), outcomes))
        .collect::<Result<Vec<_>>>()?;
    Ok(CmCircuit { initial, unitaries, ebcs })
}

/// Random process with a coherently propagating environment.
pub fn random_qm<R: Rng + ?Sized>(rng: &mut R, n: usize, d_sys: usize, d_env: usize) -> Result<ProcessTensor> {
    let (initial, unitaries) = random_circuit_parts(rng, n, d_sys, d_env)?;
    build_qm(&initial, &unitaries)
}

/// Random conditional-instrument tree with `outcomes` branches per step.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, outcomes: usize) -> Result<ConditionalInstrumentTree> {
    let tol = Tolerances::default();
    let (ins, outs) = sys_wires(n, d);
    let weights = random_weights(rng, outcomes);
    let members = weights
        .iter()
        .map(|&w| random_state(rng, vec![ins[0]], 2).scale(w))
        .collect();
    let root = StateEnsemble::new(members, &tol)?;
    let mut instruments = BTreeMap::new();
    let mut level: Vec<Vec<usize>> = (0..outcomes).map(|x| vec![x]).collect();
    for j in 1..n - 1 {
        let mut next = Vec::new();
        for h in level {
            let inst = random_instrument(rng, &[outs[j - 1]], &[ins[j]], outcomes)?;
            for x in 0..outcomes {
                let mut c = h.clone();
                c.push(x);
                next.push(c);
            }
            instruments.insert(h, inst);
        }
        level = next;
    }
    let mut finals = BTreeMap::new();
    for h in level {
        let k = rng.random_range(1..=d * d);
        finals.insert(h, random_channel(rng, &[outs[n - 2]], &[ins[n - 1]], k)?);
    }
    ConditionalInstrumentTree::new(root, instruments, finals, &tol)
}

/// Separable decomposition `(weights, channel factors, initial factors)` read
/// off a conditional-instrument tree; each branch becomes one term.
pub type SepDecomposition = (Vec<f64>, Vec<Vec<LabeledOperator>>, Vec<LabeledOperator>);

pub fn sep_decomposition_of_tree(tree: &ConditionalInstrumentTree) -> SepDecomposition {
    let b = tree.n_branches() as f64;
    let mut weights = Vec::new();
    let mut channels = Vec::new();
    let mut rhos = Vec::new();
    for (h, f) in tree.finals() {
        let mut factors = Vec::with_capacity(h.len());
        for j in 1..h.len() {
            factors.push(tree.instruments()[&h[..j].to_vec()].ops()[h[j]].op().clone());
        }
        factors.push(f.op().clone());
        weights.push(1.0 / b);
        channels.push(factors);
        rhos.push(tree.root().members()[h[0]].scale(b));
    }
    (weights, channels, rhos)
}
