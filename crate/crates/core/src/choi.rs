//! Choi operators of elementary maps and the link product.
//!
//! A map `K` from wires `in` to wires `out` is stored as
//! `Σ_{ij} |i⟩⟨j|_in ⊗ K(|i⟩⟨j|)_out`. Linking a state `ρ` on `in` with the
//! Choi operator returns `K(ρ)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::label::{total_dim, SpaceLabel};
use crate::operator::{offsets, CMatrix, CVector, LabeledOperator, ONE, ZERO};
use crate::spectral::{psd_eigen, trace_norm};
use crate::tolerance::Tolerances;

/// Choi operator together with its input and output wires.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiChannel {
    op: LabeledOperator,
    input_labels: Vec<SpaceLabel>,
    output_labels: Vec<SpaceLabel>,
}

impl ChoiChannel {
    /// Wraps `op`, which must be defined on exactly `inputs ∪ outputs`.
    pub fn new(op: LabeledOperator, inputs: Vec<SpaceLabel>, outputs: Vec<SpaceLabel>) -> Result<Self> {
        let n = inputs.len() + outputs.len();
        if op.labels().len() != n
            || inputs.iter().chain(&outputs).any(|l| !op.contains(l))
        {
            return Err(Error::LabelMismatch);
        }
        Ok(Self {
            op,
            input_labels: inputs,
            output_labels: outputs,
        })
    }

    /// Like [`new`](Self::new), additionally checking complete positivity and
    /// trace preservation.
    pub fn new_cptp(
        op: LabeledOperator,
        inputs: Vec<SpaceLabel>,
        outputs: Vec<SpaceLabel>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let c = Self::new(op, inputs, outputs)?;
        c.check_cptp(tol)?;
        Ok(c)
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn into_op(self) -> LabeledOperator {
        self.op
    }

    pub fn inputs(&self) -> &[SpaceLabel] {
        &self.input_labels
    }

    pub fn outputs(&self) -> &[SpaceLabel] {
        &self.output_labels
    }

    /// `‖tr_out K − 1_in‖_tr`.
    pub fn tp_residual(&self) -> Result<f64> {
        let reduced = self.op.partial_trace(&self.output_labels)?;
        let id = LabeledOperator::identity(reduced.labels().to_vec())?;
        Ok(trace_norm(&reduced.sub(&id)?))
    }

    pub fn check_cptp(&self, tol: &Tolerances) -> Result<()> {
        psd_eigen(&self.op, tol).map_err(|e| Error::NotCptp(e.to_string()))?;
        let r = self.tp_residual()?;
        if r > tol.channel {
            return Err(Error::NotCptp(format!(
                "trace-preservation residual {r:e}"
            )));
        }
        Ok(())
    }

    pub fn is_cptp(&self, tol: &Tolerances) -> bool {
        self.check_cptp(tol).is_ok()
    }

    /// Apply the map to an operator on (a superset of) the input wires.
    pub fn apply(&self, rho: &LabeledOperator) -> Result<LabeledOperator> {
        link_product(&self.op, rho)
    }

    /// Rename one wire of the channel.
    pub fn relabel(&self, from: SpaceLabel, to: SpaceLabel) -> Result<Self> {
        let swap = |ls: &[SpaceLabel]| ls.iter().map(|&l| if l == from { to } else { l }).collect();
        Ok(Self {
            op: self.op.relabel(from, to)?,
            input_labels: swap(&self.input_labels),
            output_labels: swap(&self.output_labels),
        })
    }
}

/// Physical measurement effects `M_x ⪰ 0` with `Σ M_x = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<LabeledOperator>,
}

impl Povm {
    pub fn new(elements: Vec<LabeledOperator>, tol: &Tolerances) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let labels = first.labels().to_vec();
        let mut total = LabeledOperator::zeros(labels.clone())?;
        for (x, m) in elements.iter().enumerate() {
            let m = m
                .aligned_to(&labels)
                .map_err(|_| Error::InvalidPovm(format!("element {x} is on different wires")))?;
            psd_eigen(&m, tol).map_err(|e| Error::InvalidPovm(format!("element {x}: {e}")))?;
            total = total.add(&m)?;
        }
        let r = trace_norm(&total.sub(&LabeledOperator::identity(labels.clone())?)?);
        if r > tol.channel {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {r:e}"
            )));
        }
        let elements = elements
            .into_iter()
            .map(|m| m.aligned_to(&labels))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { elements })
    }

    /// Projective measurement in the computational basis of `label`.
    pub fn computational(label: SpaceLabel) -> Self {
        let elements = (0..label.dim)
            .map(|k| LabeledOperator::basis_projector(label, k).expect("index in range"))
            .collect();
        Self { elements }
    }

    /// The single-outcome POVM `{1}`.
    pub fn trivial(labels: Vec<SpaceLabel>) -> Result<Self> {
        Ok(Self {
            elements: vec![LabeledOperator::identity(labels)?],
        })
    }

    pub fn elements(&self) -> &[LabeledOperator] {
        &self.elements
    }

    pub fn labels(&self) -> &[SpaceLabel] {
        self.elements[0].labels()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn check_dims(a: SpaceLabel, b: SpaceLabel) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(format!(
            "{a} and {b} have different dimensions"
        )));
    }
    Ok(())
}

/// Unnormalized maximally entangled operator `Σ |i⟩⟨j| ⊗ |i⟩⟨j|`.
pub fn choi_identity(label_in: SpaceLabel, label_out: SpaceLabel) -> Result<ChoiChannel> {
    check_dims(label_in, label_out)?;
    let d = label_in.dim;
    let mut v = CVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = ONE;
    }
    let op = LabeledOperator::projector(vec![label_in, label_out], &v)?;
    ChoiChannel::new(op, vec![label_in], vec![label_out])
}

/// `|U⟩⟩⟨⟨U|` for a unitary from `inputs` to `outputs`.
pub fn choi_unitary(u: &CMatrix, inputs: &[SpaceLabel], outputs: &[SpaceLabel]) -> Result<ChoiChannel> {
    let (din, dout) = (total_dim(inputs), total_dim(outputs));
    if u.nrows() != dout || u.ncols() != din || din != dout {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{} but wires have dimensions {din} -> {dout}",
            u.nrows(),
            u.ncols()
        )));
    }
    let deviation = (u.adjoint() * u - CMatrix::identity(din, din)).norm();
    if deviation > 1e-9 {
        return Err(Error::NotUnitary { deviation });
    }
    let mut v = CVector::zeros(din * dout);
    for i in 0..din {
        for k in 0..dout {
            v[i * dout + k] = u[(k, i)];
        }
    }
    let mut labels = inputs.to_vec();
    labels.extend_from_slice(outputs);
    let op = LabeledOperator::projector(labels, &v)?;
    ChoiChannel::new(op, inputs.to_vec(), outputs.to_vec())
}

/// The trace map: identity operator on its input wires.
pub fn choi_trace_map(inputs: &[SpaceLabel]) -> Result<ChoiChannel> {
    ChoiChannel::new(LabeledOperator::identity(inputs.to_vec())?, inputs.to_vec(), Vec::new())
}

fn check_state(sigma: &LabeledOperator, tol: &Tolerances) -> Result<()> {
    psd_eigen(sigma, tol).map_err(|e| Error::NotAState(e.to_string()))?;
    let t = sigma.trace();
    if (t - ONE).norm() > tol.channel {
        return Err(Error::NotAState(format!("trace is {t}")));
    }
    Ok(())
}

/// Discard the input and prepare `sigma`: Choi `1_in ⊗ σ`.
pub fn choi_trace_and_prepare(sigma: &LabeledOperator, inputs: &[SpaceLabel]) -> Result<ChoiChannel> {
    check_state(sigma, &Tolerances::default())?;
    let op = LabeledOperator::identity(inputs.to_vec())?.tensor_product(sigma)?;
    ChoiChannel::new(op, inputs.to_vec(), sigma.labels().to_vec())
}

/// Measure-and-prepare channel `ρ ↦ Σ_x tr(M_x ρ) σ_x`, with Choi
/// `Σ_x M_xᵀ ⊗ σ_x`.
pub fn choi_ebc(states: &[LabeledOperator], povm: &Povm) -> Result<ChoiChannel> {
    if states.len() != povm.len() {
        return Err(Error::LengthMismatch(format!(
            "{} states for {} POVM outcomes",
            states.len(),
            povm.len()
        )));
    }
    let tol = Tolerances::default();
    let out_labels = states[0].labels().to_vec();
    let mut acc: Option<LabeledOperator> = None;
    for (s, m) in states.iter().zip(povm.elements()) {
        let s = s.aligned_to(&out_labels)?;
        check_state(&s, &tol)?;
        let term = m.transpose().tensor_product(&s)?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    let op = acc.expect("POVM has at least one element");
    ChoiChannel::new(op, povm.labels().to_vec(), out_labels)
}

/// Link product `A ⋆ B = tr_s[(A^{T_s} ⊗ 1)(1 ⊗ B)]` over the wires `s`
/// shared by both operands. Result labels are A's unshared labels followed by
/// B's unshared labels.
pub fn link_product(a: &LabeledOperator, b: &LabeledOperator) -> Result<LabeledOperator> {
    let shared: Vec<SpaceLabel> = a.labels().iter().filter(|l| b.contains(l)).copied().collect();
    if shared.is_empty() {
        return a.tensor_product(b);
    }
    let a_pos_s = a.positions(&shared)?;
    let b_pos_s = b.positions(&shared)?;
    let a_pos_u: Vec<usize> = (0..a.labels().len()).filter(|i| !a_pos_s.contains(i)).collect();
    let b_pos_u: Vec<usize> = (0..b.labels().len()).filter(|i| !b_pos_s.contains(i)).collect();

    let (sa, sb) = (a.strides(), b.strides());
    let au = offsets(a.labels(), &sa, &a_pos_u);
    let as_ = offsets(a.labels(), &sa, &a_pos_s);
    let bu = offsets(b.labels(), &sb, &b_pos_u);
    let bs = offsets(b.labels(), &sb, &b_pos_s);
    let (na, ns, nb) = (au.len(), as_.len(), bu.len());

    let am = a.matrix();
    let bm = b.matrix();
    // A'[(i,j),(t,s)] = A[(i,t),(j,s)],  B'[(t,s),(k,l)] = B[(t,k),(s,l)]
    let ap = CMatrix::from_fn(na * na, ns * ns, |r, c| {
        let (i, j) = (r / na, r % na);
        let (t, s) = (c / ns, c % ns);
        am[(au[i] + as_[t], au[j] + as_[s])]
    });
    let bp = CMatrix::from_fn(ns * ns, nb * nb, |r, c| {
        let (t, s) = (r / ns, r % ns);
        let (k, l) = (c / nb, c % nb);
        bm[(bs[t] + bu[k], bs[s] + bu[l])]
    });
    let rp = ap * bp;
    let m = CMatrix::from_fn(na * nb, na * nb, |r, c| {
        let (i, k) = (r / nb, r % nb);
        let (j, l) = (c / nb, c % nb);
        rp[(i * na + j, k * nb + l)]
    });
    let mut labels: Vec<SpaceLabel> = a_pos_u.iter().map(|&p| a.labels()[p]).collect();
    labels.extend(b_pos_u.iter().map(|&p| b.labels()[p]));
    LabeledOperator::new(labels, m)
}

/// Left fold of [`link_product`] over `ops`.
pub fn link_all<'a, I>(ops: I) -> Result<LabeledOperator>
where
    I: IntoIterator<Item = &'a LabeledOperator>,
{
    let mut acc = LabeledOperator::scalar(ONE);
    for op in ops {
        acc = link_product(&acc, op)?;
    }
    Ok(acc)
}

/// Ket `|k⟩` on a single wire.
pub fn basis_ket(dim: usize, k: usize) -> CVector {
    let mut v = CVector::from_element(dim, ZERO);
    v[k] = ONE;
    v
}

/// Pure state `|ψ⟩⟨ψ|` on `labels` from unnormalized amplitudes.
pub fn pure_state(labels: Vec<SpaceLabel>, amplitudes: &[Complex64]) -> Result<LabeledOperator> {
    let v = CVector::from_column_slice(amplitudes);
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::NotAState("zero vector".into()));
    }
    LabeledOperator::projector(labels, &v.unscale(n))
}
