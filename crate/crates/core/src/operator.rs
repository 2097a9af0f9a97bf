//! Dense operators whose row and column index factorizes over an ordered list
//! of [`SpaceLabel`]s.
//!
//! Indices are mixed-radix over the labels in list order with the leftmost
//! label most significant, which is the Kronecker-product convention: for
//! labels `[A, B]` the flat index of `(a, b)` is `a * dim(B) + b`.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::label::{total_dim, SpaceLabel};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    labels: Vec<SpaceLabel>,
    matrix: CMatrix,
}

impl LabeledOperator {
    pub fn new(labels: Vec<SpaceLabel>, matrix: CMatrix) -> Result<Self> {
        check_labels(&labels)?;
        let side = total_dim(&labels);
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(Error::ShapeMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: side,
            });
        }
        Ok(Self { labels, matrix })
    }

    /// A 1x1 operator with no labels.
    pub fn scalar(value: Complex64) -> Self {
        Self {
            labels: Vec::new(),
            matrix: CMatrix::from_element(1, 1, value),
        }
    }

    pub fn identity(labels: Vec<SpaceLabel>) -> Result<Self> {
        let d = total_dim(&labels);
        Self::new(labels, CMatrix::identity(d, d))
    }

    pub fn zeros(labels: Vec<SpaceLabel>) -> Result<Self> {
        let d = total_dim(&labels);
        Self::new(labels, CMatrix::zeros(d, d))
    }

    /// `|v><v|` for a vector indexed by `labels`.
    pub fn projector(labels: Vec<SpaceLabel>, v: &CVector) -> Result<Self> {
        let m = v * v.adjoint();
        Self::new(labels, m)
    }

    /// Computational-basis projector `|k><k|` on a single wire.
    pub fn basis_projector(label: SpaceLabel, k: usize) -> Result<Self> {
        if k >= label.dim {
            return Err(Error::DimensionMismatch(format!(
                "basis index {k} out of range for {label}"
            )));
        }
        let mut m = CMatrix::zeros(label.dim, label.dim);
        m[(k, k)] = ONE;
        Self::new(vec![label], m)
    }

    /// Maximally mixed state `1/d` on `labels`.
    pub fn maximally_mixed(labels: Vec<SpaceLabel>) -> Result<Self> {
        let d = total_dim(&labels);
        Self::new(
            labels,
            CMatrix::identity(d, d).scale(1.0 / d as f64),
        )
    }

    pub fn labels(&self) -> &[SpaceLabel] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn contains(&self, label: &SpaceLabel) -> bool {
        self.labels.contains(label)
    }

    /// Value of a 1x1 operator.
    pub fn as_scalar(&self) -> Option<Complex64> {
        (self.dim() == 1 && self.labels.iter().all(|l| l.dim == 1)).then(|| self.matrix[(0, 0)])
    }

    pub fn adjoint(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `‖a − a†‖_F`.
    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            labels: self.labels.clone(),
            matrix: self.matrix.scale(factor),
        }
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        Self {
            labels: self.labels.clone(),
            matrix: &self.matrix * factor,
        }
    }

    /// Entrywise sum after bringing `other` into this operator's label order.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let other = other.aligned_to(&self.labels)?;
        Ok(Self {
            labels: self.labels.clone(),
            matrix: &self.matrix + other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let other = other.aligned_to(&self.labels)?;
        Ok(Self {
            labels: self.labels.clone(),
            matrix: &self.matrix - other.matrix,
        })
    }

    /// Weighted sum `Σ w_k a_k` of operators sharing a label set; the result
    /// uses the label order of the first term.
    pub fn weighted_sum<'a, I>(terms: I) -> Result<Option<Self>>
    where
        I: IntoIterator<Item = (f64, &'a Self)>,
    {
        let mut acc: Option<Self> = None;
        for (w, op) in terms {
            acc = Some(match acc {
                None => op.scale(w),
                Some(a) => {
                    let b = op.aligned_to(&a.labels)?;
                    Self {
                        matrix: a.matrix + b.matrix.scale(w),
                        labels: a.labels,
                    }
                }
            });
        }
        Ok(acc)
    }

    /// Kronecker product; labels are `a.labels ++ b.labels`.
    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        for l in &other.labels {
            if self.labels.contains(l) {
                return Err(Error::DuplicateLabel(*l));
            }
        }
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Self {
            labels,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Tensor product of a sequence of operators, left to right.
    pub fn tensor_all<'a, I>(ops: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Self>,
    {
        let mut acc = Self::scalar(ONE);
        for op in ops {
            acc = acc.tensor_product(op)?;
        }
        Ok(acc)
    }

    /// Trace out the wires in `over`; remaining labels keep their order.
    pub fn partial_trace(&self, over: &[SpaceLabel]) -> Result<Self> {
        let traced = self.positions(over)?;
        let kept: Vec<usize> = (0..self.labels.len())
            .filter(|i| !traced.contains(i))
            .collect();
        let strides = self.strides();
        let kept_off = offsets(&self.labels, &strides, &kept);
        let traced_off = offsets(&self.labels, &strides, &traced);
        let n = kept_off.len();
        let m = CMatrix::from_fn(n, n, |i, j| {
            traced_off
                .iter()
                .map(|t| self.matrix[(kept_off[i] + t, kept_off[j] + t)])
                .sum()
        });
        Ok(Self {
            labels: kept.iter().map(|&i| self.labels[i]).collect(),
            matrix: m,
        })
    }

    /// Trace out every wire except those in `keep`, returning them in the
    /// order they appear on `self`.
    pub fn reduce_to(&self, keep: &[SpaceLabel]) -> Result<Self> {
        self.positions(keep)?;
        let over: Vec<SpaceLabel> = self
            .labels
            .iter()
            .filter(|l| !keep.contains(l))
            .copied()
            .collect();
        self.partial_trace(&over)
    }

    /// Transpose only the tensor factors in `over`.
    pub fn partial_transpose(&self, over: &[SpaceLabel]) -> Result<Self> {
        let pos = self.positions(over)?;
        let strides = self.strides();
        let d = self.dim();
        // Contribution of the transposed digits to each flat index.
        let part: Vec<usize> = (0..d)
            .map(|r| {
                pos.iter()
                    .map(|&p| ((r / strides[p]) % self.labels[p].dim) * strides[p])
                    .sum()
            })
            .collect();
        let m = CMatrix::from_fn(d, d, |r, c| {
            let r2 = r - part[r] + part[c];
            let c2 = c - part[c] + part[r];
            self.matrix[(r2, c2)]
        });
        Ok(Self {
            labels: self.labels.clone(),
            matrix: m,
        })
    }

    pub fn transpose(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            matrix: self.matrix.transpose(),
        }
    }

    /// Re-index the same operator with labels in `order`.
    pub fn permute(&self, order: &[SpaceLabel]) -> Result<Self> {
        if order.len() != self.labels.len() {
            return Err(Error::BadPermutation);
        }
        let mut pos = Vec::with_capacity(order.len());
        for l in order {
            match self.labels.iter().position(|x| x == l) {
                Some(p) if !pos.contains(&p) => pos.push(p),
                _ => return Err(Error::BadPermutation),
            }
        }
        if pos.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let strides = self.strides();
        let map = offsets(&self.labels, &strides, &pos);
        let d = self.dim();
        let m = CMatrix::from_fn(d, d, |r, c| self.matrix[(map[r], map[c])]);
        Ok(Self {
            labels: order.to_vec(),
            matrix: m,
        })
    }

    /// Like [`permute`](Self::permute) but reports a [`Error::LabelMismatch`]
    /// when the label sets differ.
    pub fn aligned_to(&self, order: &[SpaceLabel]) -> Result<Self> {
        if order.len() != self.labels.len() || order.iter().any(|l| !self.labels.contains(l)) {
            return Err(Error::LabelMismatch);
        }
        self.permute(order)
    }

    /// Rename wire `from` to `to`. Dimensions must agree and `to` must not
    /// already be present.
    pub fn relabel(&self, from: SpaceLabel, to: SpaceLabel) -> Result<Self> {
        if from.dim != to.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot relabel {from} as {to}"
            )));
        }
        let p = self.positions(&[from])?[0];
        if from != to && self.labels.contains(&to) {
            return Err(Error::DuplicateLabel(to));
        }
        let mut labels = self.labels.clone();
        labels[p] = to;
        Ok(Self {
            labels,
            matrix: self.matrix.clone(),
        })
    }

    /// Apply `local` (an operator on a subset of the wires) as
    /// `(local ⊗ 1) self (local ⊗ 1)†`.
    pub fn conjugate_by(&self, local: &Self) -> Result<Self> {
        let rest: Vec<SpaceLabel> = self
            .labels
            .iter()
            .filter(|l| !local.labels.contains(l))
            .copied()
            .collect();
        let full = local
            .tensor_product(&Self::identity(rest)?)?
            .aligned_to(&self.labels)?;
        Ok(Self {
            labels: self.labels.clone(),
            matrix: &full.matrix * &self.matrix * full.matrix.adjoint(),
        })
    }

    pub(crate) fn positions(&self, subset: &[SpaceLabel]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(subset.len());
        for l in subset {
            let p = self
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or(Error::LabelNotFound(*l))?;
            if out.contains(&p) {
                return Err(Error::DuplicateLabel(*l));
            }
            out.push(p);
        }
        Ok(out)
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        strides_of(&self.labels)
    }
}

fn check_labels(labels: &[SpaceLabel]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !l.is_valid() {
            return Err(Error::InvalidLabel(*l));
        }
        if !seen.insert(*l) {
            return Err(Error::DuplicateLabel(*l));
        }
    }
    Ok(())
}

pub(crate) fn strides_of(labels: &[SpaceLabel]) -> Vec<usize> {
    let mut strides = vec![1; labels.len()];
    for i in (0..labels.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * labels[i + 1].dim;
    }
    strides
}

/// Flat offsets of every digit combination of the labels at `positions`,
/// enumerated mixed-radix in the given order (first position most
/// significant) and measured with the full operator's `strides`.
pub(crate) fn offsets(labels: &[SpaceLabel], strides: &[usize], positions: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &p in positions {
        let d = labels[p].dim;
        let s = strides[p];
        let mut next = Vec::with_capacity(out.len() * d);
        for &base in &out {
            for k in 0..d {
                next.push(base + k * s);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::SpaceLabel;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sz(label: SpaceLabel) -> LabeledOperator {
        LabeledOperator::new(
            vec![label],
            CMatrix::from_row_slice(2, 2, &[c(1.0), ZERO, ZERO, c(-1.0)]),
        )
        .unwrap()
    }

    fn bell(a: SpaceLabel, b: SpaceLabel) -> LabeledOperator {
        let mut m = CMatrix::zeros(4, 4);
        for &(r, col) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[(r, col)] = ONE;
        }
        LabeledOperator::new(vec![a, b], m).unwrap()
    }

    // Independent digit-loop oracle for the mixed-radix convention.
    fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
        let mut out = vec![0; dims.len()];
        for i in (0..dims.len()).rev() {
            out[i] = idx % dims[i];
            idx /= dims[i];
        }
        out
    }

    fn undigits(ds: &[usize], dims: &[usize]) -> usize {
        ds.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
    }

    fn sample(labels: Vec<SpaceLabel>, seed: u64) -> LabeledOperator {
        let d = total_dim(&labels);
        let mut s = seed;
        let m = CMatrix::from_fn(d, d, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 33) as f64) / (1u64 << 31) as f64 - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 33) as f64) / (1u64 << 31) as f64 - 0.5;
            Complex64::new(a, b)
        });
        LabeledOperator::new(labels, m).unwrap()
    }

    #[test]
    fn construction_rejects_bad_shapes_and_duplicates() {
        let a = SpaceLabel::sys_in(1, 2);
        assert!(matches!(
            LabeledOperator::new(vec![a], CMatrix::zeros(3, 3)),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            LabeledOperator::new(vec![a, a], CMatrix::zeros(4, 4)),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(matches!(
            LabeledOperator::new(vec![a.with_dim(0)], CMatrix::zeros(0, 0)),
            Err(Error::InvalidLabel(_))
        ));
    }

    #[test]
    fn tensor_with_scalar_is_identity_case() {
        let a = sample(vec![SpaceLabel::sys_in(1, 3)], 1);
        let s = LabeledOperator::scalar(ONE);
        assert_eq!(s.tensor_product(&a).unwrap(), a);
    }

    #[test]
    fn sigma_z_tensor_sigma_z() {
        let a = sz(SpaceLabel::sys_in(1, 2));
        let b = sz(SpaceLabel::sys_out(1, 2));
        let t = a.tensor_product(&b).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| t.matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(t.labels(), &[SpaceLabel::sys_in(1, 2), SpaceLabel::sys_out(1, 2)]);
    }

    #[test]
    fn tensor_product_index_loop_oracle() {
        let a = sample(vec![SpaceLabel::sys_in(1, 2)], 7);
        let b = sample(vec![SpaceLabel::sys_out(1, 3)], 11);
        let t = a.tensor_product(&b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    for l in 0..3 {
                        let expect = a.matrix()[(i, j)] * b.matrix()[(k, l)];
                        assert_eq!(t.matrix()[(i * 3 + k, j * 3 + l)], expect);
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_product_rejects_overlap() {
        let a = sz(SpaceLabel::sys_in(1, 2));
        assert!(matches!(a.tensor_product(&a), Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn partial_trace_all_is_trace() {
        let a = sample(vec![SpaceLabel::sys_in(1, 2), SpaceLabel::sys_out(1, 3)], 3);
        let t = a.partial_trace(a.labels()).unwrap();
        assert!(t.labels().is_empty());
        assert!((t.matrix()[(0, 0)] - a.trace()).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = sample(vec![SpaceLabel::sys_in(1, 2)], 5);
        let b = sample(vec![SpaceLabel::sys_out(1, 3), SpaceLabel::sys_in(2, 2)], 9);
        let ab = a.tensor_product(&b).unwrap();
        let r = ab.partial_trace(b.labels()).unwrap();
        let expect = a.scale_complex(b.trace());
        assert!((r.matrix() - expect.matrix()).norm() < 1e-13);
    }

    #[test]
    fn partial_trace_of_bell_is_identity() {
        let (x, y) = (SpaceLabel::sys_in(1, 2), SpaceLabel::sys_out(1, 2));
        let phi = bell(x, y);
        for (over, keep) in [(y, x), (x, y)] {
            let r = phi.partial_trace(&[over]).unwrap();
            assert_eq!(r.labels(), &[keep]);
            assert_eq!(r.matrix(), &CMatrix::identity(2, 2));
        }
    }

    #[test]
    fn partial_trace_unknown_label() {
        let a = sz(SpaceLabel::sys_in(1, 2));
        assert!(matches!(
            a.partial_trace(&[SpaceLabel::sys_in(2, 2)]),
            Err(Error::LabelNotFound(_))
        ));
    }

    #[test]
    fn partial_trace_digit_oracle() {
        let labels = vec![
            SpaceLabel::sys_in(1, 2),
            SpaceLabel::sys_out(1, 3),
            SpaceLabel::sys_in(2, 2),
        ];
        let dims = [2, 3, 2];
        let a = sample(labels.clone(), 21);
        let r = a.partial_trace(&[labels[1]]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let (di, dj) = (digits(i, &[2, 2]), digits(j, &[2, 2]));
                let mut s = ZERO;
                for t in 0..3 {
                    let ri = undigits(&[di[0], t, di[1]], &dims);
                    let rj = undigits(&[dj[0], t, dj[1]], &dims);
                    s += a.matrix()[(ri, rj)];
                }
                assert!((r.matrix()[(i, j)] - s).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn partial_transpose_edge_cases() {
        let labels = vec![SpaceLabel::sys_in(1, 2), SpaceLabel::sys_out(1, 3)];
        let a = sample(labels.clone(), 13);
        assert_eq!(a.partial_transpose(&[]).unwrap(), a);
        assert_eq!(a.partial_transpose(&labels).unwrap().matrix(), &a.matrix().transpose());
        let once = a.partial_transpose(&[labels[1]]).unwrap();
        assert_eq!(once.partial_transpose(&[labels[1]]).unwrap(), a);
    }

    #[test]
    fn partial_transpose_of_bell_is_swap() {
        let (x, y) = (SpaceLabel::sys_in(1, 2), SpaceLabel::sys_out(1, 2));
        let pt = bell(x, y).partial_transpose(&[y]).unwrap();
        let mut swap = CMatrix::zeros(4, 4);
        for &(r, col) in &[(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(r, col)] = ONE;
        }
        assert_eq!(pt.matrix(), &swap);
    }

    #[test]
    fn partial_transpose_digit_oracle() {
        let labels = vec![
            SpaceLabel::sys_in(1, 2),
            SpaceLabel::sys_out(1, 3),
            SpaceLabel::sys_in(2, 2),
        ];
        let dims = [2, 3, 2];
        let a = sample(labels.clone(), 33);
        let pt = a.partial_transpose(&[labels[1]]).unwrap();
        for r in 0..12 {
            for col in 0..12 {
                let (mut dr, mut dc) = (digits(r, &dims), digits(col, &dims));
                std::mem::swap(&mut dr[1], &mut dc[1]);
                let expect = a.matrix()[(undigits(&dr, &dims), undigits(&dc, &dims))];
                assert_eq!(pt.matrix()[(r, col)], expect);
            }
        }
    }

    #[test]
    fn permute_swaps_tensor_factors() {
        let a = sample(vec![SpaceLabel::sys_in(1, 2)], 1);
        let b = sample(vec![SpaceLabel::sys_out(1, 3)], 2);
        let ab = a.tensor_product(&b).unwrap();
        let ba = b.tensor_product(&a).unwrap();
        let p = ab.permute(ba.labels()).unwrap();
        assert_eq!(p, ba);
        assert_eq!(ab.permute(ab.labels()).unwrap(), ab);
    }

    #[test]
    fn permute_and_back_is_bit_exact() {
        let labels = vec![
            SpaceLabel::sys_in(1, 2),
            SpaceLabel::sys_out(1, 3),
            SpaceLabel::sys_in(2, 2),
        ];
        let a = sample(labels.clone(), 77);
        let order = vec![labels[2], labels[0], labels[1]];
        let back = a.permute(&order).unwrap().permute(&labels).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn permute_rejects_non_permutations() {
        let labels = vec![SpaceLabel::sys_in(1, 2), SpaceLabel::sys_out(1, 2)];
        let a = sample(labels.clone(), 4);
        assert_eq!(a.permute(&[labels[0]]), Err(Error::BadPermutation));
        assert_eq!(a.permute(&[labels[0], labels[0]]), Err(Error::BadPermutation));
        assert_eq!(
            a.permute(&[labels[0], SpaceLabel::sys_in(3, 2)]),
            Err(Error::BadPermutation)
        );
    }

    #[test]
    fn relabel_checks() {
        let (x, y) = (SpaceLabel::sys_in(1, 2), SpaceLabel::sys_out(1, 2));
        let phi = bell(x, y);
        let e = SpaceLabel::env_in(1, 2);
        assert_eq!(phi.relabel(x, e).unwrap().labels(), &[e, y]);
        assert!(phi.relabel(x, y).is_err());
        assert!(phi.relabel(x, e.with_dim(3)).is_err());
    }
}
