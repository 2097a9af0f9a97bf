//! Spectral functions of Hermitian labeled operators.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{CMatrix, LabeledOperator};
use crate::tolerance::Tolerances;

/// Eigendecomposition `a = V diag(values) V†` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(f(v), 0.0)).collect();
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= d[j];
        }
        &scaled * self.vectors.adjoint()
    }

    /// Eigenvalues at or below `cutoff · max|λ|` count as zero.
    pub fn threshold(&self, cutoff: f64) -> f64 {
        cutoff * self.max_abs()
    }
}

/// Eigendecomposition of a Hermitian operator, using the default
/// hermiticity tolerance.
pub fn hermitian_eigen(a: &LabeledOperator) -> Result<Eigen> {
    hermitian_eigen_tol(a, Tolerances::default().hermiticity)
}

/// Eigendecomposition; rejects inputs with `‖a − a†‖_F > tol · ‖a‖_F`.
pub fn hermitian_eigen_tol(a: &LabeledOperator, tol: f64) -> Result<Eigen> {
    eigen_matrix(a.matrix(), tol)
}

pub(crate) fn eigen_matrix(m: &CMatrix, tol: f64) -> Result<Eigen> {
    let norm = m.norm();
    let deviation = (m - m.adjoint()).norm();
    if deviation > tol * norm {
        return Err(Error::NotHermitian { deviation });
    }
    let h = (m + m.adjoint()).scale(0.5);
    if h.nrows() == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: h,
        });
    }
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(Eigen { values, vectors })
}

pub fn min_eigenvalue(a: &LabeledOperator) -> Result<f64> {
    Ok(hermitian_eigen(a)?.min())
}

/// Checks `min λ ≥ −tol · max|λ|` and returns the decomposition.
pub fn psd_eigen(a: &LabeledOperator, tol: &Tolerances) -> Result<Eigen> {
    let e = hermitian_eigen_tol(a, tol.hermiticity)?;
    if e.min() < -tol.psd * e.max_abs() {
        return Err(Error::NotPsd {
            min_eigenvalue: e.min(),
        });
    }
    Ok(e)
}

pub fn is_psd(a: &LabeledOperator, tol: &Tolerances) -> bool {
    psd_eigen(a, tol).is_ok()
}

/// Sum of singular values.
pub fn trace_norm(a: &LabeledOperator) -> f64 {
    trace_norm_matrix(a.matrix())
}

pub(crate) fn trace_norm_matrix(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    if (m - m.adjoint()).norm() <= 1e-12 * norm {
        if let Ok(e) = eigen_matrix(m, 1e-12) {
            return e.values.iter().map(|v| v.abs()).sum();
        }
    }
    m.clone().singular_values().iter().sum()
}

/// `tr[a (log₂ a − log₂ b)]`, or `+∞` when the support of `a` is not
/// contained in the support of `b`.
pub fn relative_entropy(a: &LabeledOperator, b: &LabeledOperator) -> Result<f64> {
    relative_entropy_tol(a, b, &Tolerances::default())
}

pub fn relative_entropy_tol(a: &LabeledOperator, b: &LabeledOperator, tol: &Tolerances) -> Result<f64> {
    let b = b.aligned_to(a.labels())?;
    let ea = psd_eigen(a, tol)?;
    let eb = psd_eigen(&b, tol)?;
    let cut_a = ea.threshold(tol.spectral_cutoff);
    let cut_b = eb.threshold(tol.spectral_cutoff);
    // overlaps[(i, j)] = |<a_i|b_j>|²
    let inner = ea.vectors.adjoint() * &eb.vectors;
    let mut s = 0.0;
    let mut leaked = 0.0;
    let mut mass = 0.0;
    for (i, &la) in ea.values.iter().enumerate() {
        if la <= cut_a {
            continue;
        }
        mass += la;
        s += la * la.log2();
        for (j, &lb) in eb.values.iter().enumerate() {
            let w = inner[(i, j)].norm_sqr();
            if lb <= cut_b {
                leaked += la * w;
            } else {
                s -= la * w * lb.log2();
            }
        }
    }
    if leaked > 1e-9 * mass.max(f64::MIN_POSITIVE) {
        return Ok(f64::INFINITY);
    }
    Ok(s)
}

/// `Σ_{λ > cutoff} λ^{−1/2} |v⟩⟨v|`.
pub fn pseudo_inverse_sqrt(a: &LabeledOperator) -> Result<LabeledOperator> {
    pseudo_inverse_sqrt_tol(a, &Tolerances::default())
}

pub fn pseudo_inverse_sqrt_tol(a: &LabeledOperator, tol: &Tolerances) -> Result<LabeledOperator> {
    let e = psd_eigen(a, tol)?;
    let cut = e.threshold(tol.spectral_cutoff);
    let m = e.apply(|v| if v > cut { 1.0 / v.sqrt() } else { 0.0 });
    LabeledOperator::new(a.labels().to_vec(), m)
}

/// Principal square root of a PSD operator; tiny negative eigenvalues are
/// clipped to zero.
pub fn sqrt_psd(a: &LabeledOperator, tol: &Tolerances) -> Result<LabeledOperator> {
    let e = psd_eigen(a, tol)?;
    let m = e.apply(|v| v.max(0.0).sqrt());
    LabeledOperator::new(a.labels().to_vec(), m)
}

/// Projector onto the eigenvectors with eigenvalue above the cutoff.
pub fn support_projector(a: &LabeledOperator, tol: &Tolerances) -> Result<LabeledOperator> {
    let e = psd_eigen(a, tol)?;
    let cut = e.threshold(tol.spectral_cutoff);
    let m = e.apply(|v| if v > cut { 1.0 } else { 0.0 });
    LabeledOperator::new(a.labels().to_vec(), m)
}

/// Number of eigenvalues above the cutoff.
pub fn rank(a: &LabeledOperator, tol: &Tolerances) -> Result<usize> {
    let e = psd_eigen(a, tol)?;
    let cut = e.threshold(tol.spectral_cutoff);
    Ok(e.values.iter().filter(|&&v| v > cut).count())
}
