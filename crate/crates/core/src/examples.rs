//! Named processes: the SWAP/dephasing/CNOT circuit, the Guérin process,
//! common-cause processes and the identity relay.

use num_complex::Complex64;

use crate::choi::{choi_identity, pure_state, Povm};
use crate::error::{Error, Result};
use crate::label::{Port, SpaceLabel};
use crate::operator::{CMatrix, LabeledOperator, ONE, ZERO};
use crate::process::{
    build_memoryless_product, build_sep, gap_unitary, CmCircuit, Ebc, ProcessTensor,
};
use crate::random::SepDecomposition;
use crate::tolerance::Tolerances;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn permutation_unitary(images: &[usize]) -> CMatrix {
    let d = images.len();
    let mut u = CMatrix::from_element(d, d, ZERO);
    for (from, &to) in images.iter().enumerate() {
        u[(to, from)] = ONE;
    }
    u
}

/// Two-qubit system-environment circuit: the environment starts in `|0⟩`, is
/// refreshed to `|0⟩`, swapped with the system, dephased by a
/// computational-basis measure-and-prepare channel and finally used as the
/// control of a CNOT on the system. `rho_s` is the initial system state.
pub fn fig3_circuit(rho_s: &LabeledOperator) -> Result<CmCircuit> {
    let s1 = SpaceLabel::sys_in(1, 2);
    if rho_s.labels() != [s1] {
        return Err(Error::DimensionMismatch("system state must be a qubit on 1^i".into()));
    }
    let e0 = LabeledOperator::basis_projector(SpaceLabel::env_in(1, 2), 0)?;
    let initial = rho_s.tensor_product(&e0)?;
    let swap = permutation_unitary(&[0, 2, 1, 3]);
    // |s e⟩ ↦ |s⊕e, e⟩ with index 2s + e.
    let cnot = permutation_unitary(&[0, 3, 2, 1]);
    let unitaries = vec![
        gap_unitary(1, &swap, (2, 2), (2, 2))?,
        gap_unitary(2, &cnot, (2, 2), (2, 2))?,
    ];
    let refresh = Ebc::trace_and_prepare(
        LabeledOperator::basis_projector(SpaceLabel::env_out(1, 2), 0)?,
        vec![SpaceLabel::env_in(1, 2)],
    )?;
    let e2o = SpaceLabel::env_out(2, 2);
    let dephase = Ebc::new(
        vec![
            LabeledOperator::basis_projector(e2o, 0)?,
            LabeledOperator::basis_projector(e2o, 1)?,
        ],
        Povm::computational(SpaceLabel::env_in(2, 2)),
    )?;
    Ok(CmCircuit {
        initial,
        unitaries,
        ebcs: vec![refresh, dephase],
    })
}

/// The process of [`fig3_circuit`] with `ρ_S = |0⟩⟨0|`:
/// `Σ_x X^x_{3^i 2^o} ⊗ |0⟩⟨0|_{2^i} ⊗ |x⟩⟨x|_{1^o} ⊗ ρ_{1^i}`.
pub fn fig3() -> Result<ProcessTensor> {
    fig3_with(&LabeledOperator::basis_projector(SpaceLabel::sys_in(1, 2), 0)?)
}

pub fn fig3_with(rho_s: &LabeledOperator) -> Result<ProcessTensor> {
    fig3_circuit(rho_s)?.build()
}

fn guerin_labels() -> Vec<SpaceLabel> {
    vec![SpaceLabel::sys_in(2, 2), SpaceLabel::sys_out(1, 2), SpaceLabel::sys_in(1, 2)]
}

fn guerin_kets() -> [[[Complex64; 2]; 3]; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero = [c(1.0), c(0.0)];
    let one = [c(0.0), c(1.0)];
    let plus = [c(h), c(h)];
    let minus = [c(h), c(-h)];
    [
        [zero, zero, zero],
        [one, zero, one],
        [plus, one, plus],
        [minus, one, minus],
    ]
}

/// `½(|000⟩⟨000| + |101⟩⟨101| + |+1+⟩⟨+1+| + |−1−⟩⟨−1−|)` on
/// `2^i, 1^o, 1^i`.
pub fn guerin() -> Result<ProcessTensor> {
    let labels = guerin_labels();
    let mut terms = Vec::new();
    for [a, b, k] in guerin_kets() {
        let mut amps = Vec::with_capacity(8);
        for x in a {
            for y in b {
                amps.extend(k.iter().map(|&z| x * y * z));
            }
        }
        terms.push(pure_state(labels.clone(), &amps)?);
    }
    let op = LabeledOperator::weighted_sum(terms.iter().map(|t| (0.5, t)))?.expect("four terms");
    ProcessTensor::new_validated(op, &Tolerances::default())
}

/// Separable decomposition of [`guerin`] with four equally weighted product
/// terms `L = |a⟩⟨a| ⊗ |b⟩⟨b|` on `2^i 1^o` and `ρ = 2|c⟩⟨c|` on `1^i`.
pub fn guerin_sep_factors() -> Result<SepDecomposition> {
    let [i2, o1, i1] = [guerin_labels()[0], guerin_labels()[1], guerin_labels()[2]];
    let mut weights = Vec::new();
    let mut channels = Vec::new();
    let mut rhos = Vec::new();
    for [a, b, k] in guerin_kets() {
        let l = pure_state(vec![i2], &a)?.tensor_product(&pure_state(vec![o1], &b)?)?;
        weights.push(0.25);
        channels.push(vec![l]);
        rhos.push(pure_state(vec![i1], &k)?.scale(2.0));
    }
    Ok((weights, channels, rhos))
}

/// [`guerin`] assembled from [`guerin_sep_factors`].
pub fn guerin_from_factors() -> Result<ProcessTensor> {
    let (w, ch, rho) = guerin_sep_factors()?;
    build_sep(&w, &ch, &rho)
}

/// `ρ_{N^i … 1^i} ⊗ 1_{N−1^o … 1^o}`. The state must live on input wires
/// `1^i … N^i`; `output_dims[j−1]` is the dimension of `j^o`.
pub fn common_cause(state: &LabeledOperator, output_dims: &[usize]) -> Result<ProcessTensor> {
    let n = state.labels().len();
    let ok = state.labels().iter().all(|l| l.port == Port::Input)
        && (1..=n as u32).all(|t| state.labels().iter().any(|l| l.time == t));
    if n < 2 || !ok {
        return Err(Error::InvalidProcess(
            "common-cause state must live on input wires 1^i … N^i".into(),
        ));
    }
    if output_dims.len() != n - 1 {
        return Err(Error::LengthMismatch(format!(
            "{} output dimensions for {n} times",
            output_dims.len()
        )));
    }
    let outs: Vec<SpaceLabel> = output_dims
        .iter()
        .enumerate()
        .map(|(j, &d)| SpaceLabel::sys_out(j as u32 + 1, d))
        .collect();
    let op = state.tensor_product(&LabeledOperator::identity(outs)?)?;
    ProcessTensor::new_validated(op, &Tolerances::default())
}

fn ghz_state(n: usize) -> Result<LabeledOperator> {
    let labels: Vec<SpaceLabel> = (1..=n as u32).rev().map(|t| SpaceLabel::sys_in(t, 2)).collect();
    let mut amps = vec![ZERO; 1 << n];
    amps[0] = ONE;
    amps[(1 << n) - 1] = ONE;
    pure_state(labels, &amps)
}

/// `Φ⁺/2` on `2^i 1^i` with an identity on `1^o`.
pub fn bell_common_cause() -> Result<ProcessTensor> {
    common_cause(&ghz_state(2)?, &[2])
}

/// GHZ state on qubit inputs `1^i … N^i` with identities on the outputs.
pub fn ghz_common_cause(n: usize) -> Result<ProcessTensor> {
    if n < 2 {
        return Err(Error::InvalidProcess("a process needs at least two times".into()));
    }
    common_cause(&ghz_state(n)?, &vec![2; n - 1])
}

/// Identity channels between consecutive times after the initial state
/// `rho1` on `1^i`, which also fixes the wire dimension.
pub fn trivial_identity(n: usize, rho1: &LabeledOperator) -> Result<ProcessTensor> {
    let d = match rho1.labels() {
        [l] => l.dim,
        _ => return Err(Error::InvalidProcess("initial state must live on 1^i".into())),
    };
    if n < 2 {
        return Err(Error::InvalidProcess("a process needs at least two times".into()));
    }
    let channels = (1..n as u32)
        .map(|j| choi_identity(SpaceLabel::sys_out(j, d), SpaceLabel::sys_in(j + 1, d)))
        .collect::<Result<Vec<_>>>()?;
    build_memoryless_product(&channels, rho1)
}
