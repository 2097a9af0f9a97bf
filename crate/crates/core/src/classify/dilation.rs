use crate::choi::{link_product, ChoiChannel};
use crate::error::{Error, Result};
use crate::label::{Port, SpaceLabel};
use crate::operator::{CVector, LabeledOperator, ONE};
use crate::process::{build_memoryless_product, build_mm, check_weights, ProcessTensor};
use crate::spectral::{hermitian_eigen, pseudo_inverse_sqrt_tol, rank, sqrt_psd, trace_norm};
use crate::tolerance::Tolerances;

/// Environment wire carried from the first to the second time in the
/// two-time dilations.
pub fn dilation_environment(dim: usize) -> SpaceLabel {
    SpaceLabel::env_out(1, dim)
}

/// Pure initial state `ξ` on `1^i ⊗ E` and channel `η` from `E ⊗ 1^o` to
/// `2^i` with `ξ ⋆ η = C`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDilation {
    pub xi: LabeledOperator,
    pub eta: ChoiChannel,
    /// `‖ξ ⋆ η − C‖_tr`.
    pub residual: f64,
    pub tp_residual: f64,
    /// The reduced initial state was singular; `η` was completed with a
    /// maximally mixed output on the kernel.
    pub rank_deficient: bool,
    /// Minimum eigenvalue of `η` transposed on `E`.
    pub eta_ppt_min_eigenvalue: f64,
}

pub fn two_time_canonical_dilation(p: &ProcessTensor, tol: &Tolerances) -> Result<CanonicalDilation> {
    if p.n_times() != 2 {
        return Err(Error::InvalidTime(format!(
            "the canonical dilation needs two times, got {}",
            p.n_times()
        )));
    }
    let (i2, o1, i1) = (p.input(2), p.output(1), p.input(1));
    let c = p.op();
    let rho = c.reduce_to(&[i1])?.scale(1.0 / o1.dim as f64);
    let d = i1.dim;
    let e = dilation_environment(d);

    let root = sqrt_psd(&rho, tol)?;
    // (√ρ ⊗ 1) Σ_k |k⟩|k⟩ has amplitude √ρ[r, k] at |r⟩|k⟩.
    let w = CVector::from_iterator(d * d, (0..d).flat_map(|r| (0..d).map(move |k| (r, k))).map(|(r, k)| root.matrix()[(r, k)]));
    let xi = LabeledOperator::projector(vec![i1, e], &w)?;

    let inv = pseudo_inverse_sqrt_tol(&rho, tol)?;
    let mut eta = c.conjugate_by(&inv)?;
    let rank_deficient = rank(&rho, tol)? < d;
    if rank_deficient {
        let support = rho.conjugate_by(&inv)?;
        let kernel = LabeledOperator::identity(vec![i1])?.sub(&support)?;
        let fill = LabeledOperator::maximally_mixed(vec![i2])?
            .tensor_product(&LabeledOperator::identity(vec![o1])?)?
            .tensor_product(&kernel)?;
        eta = eta.add(&fill)?;
    }
    let eta = ChoiChannel::new(eta.relabel(i1, e)?, vec![e, o1], vec![i2])?;
    let tp_residual = eta.tp_residual()?;
    let rebuilt = link_product(&xi, eta.op())?;
    let residual = trace_norm(&rebuilt.sub(c)?);
    let eta_ppt_min_eigenvalue = hermitian_eigen(&eta.op().partial_transpose(&[e])?)?.min();
    Ok(CanonicalDilation {
        xi,
        eta,
        residual,
        tp_residual,
        rank_deficient,
        eta_ppt_min_eigenvalue,
    })
}

/// Two-time mixed memoryless decomposition `Σ_x p_x L^{(x)} ⊗ ρ^{(x)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MmDecomposition {
    pub weights: Vec<f64>,
    pub states: Vec<LabeledOperator>,
    pub channels: Vec<ChoiChannel>,
}

impl MmDecomposition {
    pub fn process(&self) -> Result<ProcessTensor> {
        let comps = self
            .channels
            .iter()
            .zip(&self.states)
            .map(|(l, r)| build_memoryless_product(std::slice::from_ref(l), r))
            .collect::<Result<Vec<_>>>()?;
        build_mm(&self.weights, &comps)
    }
}

/// One term `p_x ρ_E^{(x)} ⊗ ρ^{(x)}` of a separable initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct SepStateTerm {
    pub weight: f64,
    pub env: LabeledOperator,
    pub system: LabeledOperator,
}

/// Separable initial state on `E ⊗ 1^i`, its decomposition and a dilation
/// channel `D` from `E ⊗ 1^o` to `2^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSepDilation {
    pub state: LabeledOperator,
    pub terms: Vec<SepStateTerm>,
    pub dilation: ChoiChannel,
}

impl InitialSepDilation {
    /// `ρ^SEP ⋆ D`.
    pub fn process(&self) -> Result<ProcessTensor> {
        ProcessTensor::new_validated(link_product(&self.state, self.dilation.op())?, &Tolerances::default())
    }
}

fn unit_state(s: &LabeledOperator, tol: &Tolerances, what: String) -> Result<()> {
    crate::spectral::psd_eigen(s, tol).map_err(|e| Error::NotAState(format!("{what}: {e}")))?;
    if (s.trace() - ONE).norm() > tol.channel {
        return Err(Error::NotAState(format!("{what} has trace {}", s.trace())));
    }
    Ok(())
}

/// `ρ^SEP = Σ_x p_x |x⟩⟨x|_E ⊗ ρ^{(x)}` and `D = Σ_x |x⟩⟨x|_E ⊗ L^{(x)}`
/// with a flag register `E` of dimension equal to the number of terms.
pub fn mm_to_initial_sep(
    weights: &[f64],
    channels: &[ChoiChannel],
    states: &[LabeledOperator],
) -> Result<InitialSepDilation> {
    let tol = Tolerances::default();
    check_weights(weights, channels.len(), &tol)?;
    if states.len() != weights.len() {
        return Err(Error::LengthMismatch(format!("{} states for {} weights", states.len(), weights.len())));
    }
    let (ins, outs) = (channels[0].inputs().to_vec(), channels[0].outputs().to_vec());
    let gap_ok = matches!(ins.as_slice(), [l] if l.time == 1 && l.port == Port::Output)
        && matches!(outs.as_slice(), [l] if l.time == 2 && l.port == Port::Input);
    if !gap_ok {
        return Err(Error::InvalidProcess("channels must map 1^o to 2^i".into()));
    }
    let e = dilation_environment(weights.len());
    let mut order = ins.clone();
    order.extend_from_slice(&outs);
    let mut state: Option<LabeledOperator> = None;
    let mut dilation: Option<LabeledOperator> = None;
    let mut terms = Vec::with_capacity(weights.len());
    for (x, ((&w, l), r)) in weights.iter().zip(channels).zip(states).enumerate() {
        if l.inputs() != ins.as_slice() || l.outputs() != outs.as_slice() {
            return Err(Error::DimensionMismatch(format!("channel {x} acts on different wires")));
        }
        l.check_cptp(&tol)?;
        if !matches!(r.labels(), [lab] if lab.time == 1 && lab.port == Port::Input) {
            return Err(Error::InvalidProcess(format!("state {x} must live on 1^i")));
        }
        unit_state(r, &tol, format!("state {x}"))?;
        let flag = LabeledOperator::basis_projector(e, x)?;
        let s = flag.tensor_product(r)?.scale(w);
        let dterm = flag.tensor_product(&l.op().aligned_to(&order)?)?;
        state = Some(match state {
            None => s,
            Some(acc) => acc.add(&s)?,
        });
        dilation = Some(match dilation {
            None => dterm,
            Some(acc) => acc.add(&dterm)?,
        });
        terms.push(SepStateTerm {
            weight: w,
            env: flag,
            system: r.clone(),
        });
    }
    let mut d_inputs = vec![e];
    d_inputs.extend_from_slice(&ins);
    Ok(InitialSepDilation {
        state: state.expect("non-empty"),
        terms,
        dilation: ChoiChannel::new(dilation.expect("non-empty"), d_inputs, outs)?,
    })
}

/// `L^{(x)} = ρ_E^{(x)} ⋆ D` for each term of the separable initial state.
pub fn initial_sep_to_mm(terms: &[SepStateTerm], dilation: &ChoiChannel) -> Result<MmDecomposition> {
    let tol = Tolerances::default();
    let weights: Vec<f64> = terms.iter().map(|t| t.weight).collect();
    check_weights(&weights, terms.len(), &tol)?;
    let mut states = Vec::with_capacity(terms.len());
    let mut channels = Vec::with_capacity(terms.len());
    for (x, t) in terms.iter().enumerate() {
        if t.env.labels().iter().any(|l| !dilation.inputs().contains(l)) {
            return Err(Error::DimensionMismatch(format!(
                "environment state {x} does not live on inputs of the dilation"
            )));
        }
        unit_state(&t.env, &tol, format!("environment state {x}"))?;
        unit_state(&t.system, &tol, format!("system state {x}"))?;
        let ins: Vec<SpaceLabel> = dilation
            .inputs()
            .iter()
            .copied()
            .filter(|l| !t.env.contains(l))
            .collect();
        let op = link_product(&t.env, dilation.op())?;
        let l = ChoiChannel::new(op, ins, dilation.outputs().to_vec())?;
        l.check_cptp(&tol).map_err(|e| Error::NotCptpSlice {
            index: x,
            reason: e.to_string(),
        })?;
        states.push(t.system.clone());
        channels.push(l);
    }
    Ok(MmDecomposition {
        weights,
        states,
        channels,
    })
}
