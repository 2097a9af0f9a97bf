//! Semidefinite feasibility problems and a pluggable conic backend.

#[cfg(feature = "clarabel")]
mod clarabel_backend;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{CMatrix, ZERO};

#[cfg(feature = "clarabel")]
pub use clarabel_backend::ClarabelBackend;

/// Entry `value` at `(row, col)` of the coefficient matrix acting on block
/// `block`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: Complex64,
}

/// `Σ_b tr(F_b X_b) = target` with Hermitian `F_b` given entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coefficients: Vec<CoefficientEntry>,
    pub target: f64,
}

impl LinearConstraint {
    /// Dense Hermitian coefficient `f` on block `block`.
    pub fn dense(block: usize, f: &CMatrix, target: f64) -> Self {
        let mut coefficients = Vec::new();
        for r in 0..f.nrows() {
            for c in 0..f.ncols() {
                if f[(r, c)] != ZERO {
                    coefficients.push(CoefficientEntry {
                        block,
                        row: r,
                        col: c,
                        value: f[(r, c)],
                    });
                }
            }
        }
        Self { coefficients, target }
    }

    /// `tr(F X)`, real for Hermitian `F` and `X`.
    pub fn evaluate(&self, blocks: &[CMatrix]) -> f64 {
        self.coefficients
            .iter()
            .map(|e| (e.value * blocks[e.block][(e.col, e.row)]).re)
            .sum()
    }
}

/// Find Hermitian `X_b ⪰ 0` of the given sides satisfying every equality.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpFeasibility {
    pub variable_dims: Vec<usize>,
    pub equality_constraints: Vec<LinearConstraint>,
    pub description: String,
    /// Known upper bound on `Σ_b tr X_b` over feasible points, used to
    /// verify infeasibility certificates.
    pub trace_bound: Option<f64>,
}

impl SdpFeasibility {
    /// Checks block indices, bounds and Hermiticity of every coefficient.
    pub fn new(
        variable_dims: Vec<usize>,
        equality_constraints: Vec<LinearConstraint>,
        description: impl Into<String>,
        trace_bound: Option<f64>,
    ) -> Result<Self> {
        let p = Self {
            variable_dims,
            equality_constraints,
            description: description.into(),
            trace_bound,
        };
        for (i, c) in p.equality_constraints.iter().enumerate() {
            let f = p.coefficient_blocks(c)?;
            for (b, m) in f.iter().enumerate() {
                let dev = (m - m.adjoint()).norm();
                if dev > 1e-12 * m.norm().max(1.0) {
                    return Err(Error::DimensionMismatch(format!(
                        "coefficient of constraint {i} on block {b} is not Hermitian (deviation {dev:e})"
                    )));
                }
            }
        }
        Ok(p)
    }

    fn coefficient_blocks(&self, c: &LinearConstraint) -> Result<Vec<CMatrix>> {
        let mut f: Vec<CMatrix> = self.variable_dims.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        for e in &c.coefficients {
            let n = *self
                .variable_dims
                .get(e.block)
                .ok_or_else(|| Error::DimensionMismatch(format!("block {} does not exist", e.block)))?;
            if e.row >= n || e.col >= n {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({}, {}) outside block {} of side {n}",
                    e.row, e.col, e.block
                )));
            }
            f[e.block][(e.row, e.col)] += e.value;
        }
        Ok(f)
    }

    /// Largest `|tr(F X) − target|` over the constraints.
    pub fn constraint_residual(&self, blocks: &[CMatrix]) -> f64 {
        self.equality_constraints
            .iter()
            .map(|c| (c.evaluate(blocks) - c.target).abs())
            .fold(0.0, f64::max)
    }

    /// Independent check of a claimed feasible point: every block Hermitian,
    /// minimum eigenvalue at least `−10·tol` and constraint residual at most
    /// `10·tol`.
    pub fn verify_witness(&self, blocks: &[CMatrix], tol: f64) -> bool {
        if blocks.len() != self.variable_dims.len() {
            return false;
        }
        let psd = blocks.iter().zip(&self.variable_dims).all(|(x, &n)| {
            x.nrows() == n
                && x.ncols() == n
                && (x - x.adjoint()).norm() <= 10.0 * tol
                && crate::spectral::eigen_matrix(x, 1.0).map(|e| e.min() >= -10.0 * tol).unwrap_or(false)
        });
        psd && self.constraint_residual(blocks) <= 10.0 * tol
    }

    /// Independent check of a Farkas certificate: `W = Σ_i y_i F_i ⪰ 0` and
    /// `Σ_i y_i target_i < 0`. With a trace bound `T`, small negative
    /// eigenvalues are accepted as long as `Σ y_i t_i + T·max(0, −λ_min(W)) < 0`.
    pub fn verify_certificate(&self, y: &[f64], tol: f64) -> bool {
        if y.len() != self.equality_constraints.len() {
            return false;
        }
        let mut w: Vec<CMatrix> = self.variable_dims.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        let mut gap = 0.0;
        for (c, &yi) in self.equality_constraints.iter().zip(y) {
            gap += yi * c.target;
            for e in &c.coefficients {
                w[e.block][(e.row, e.col)] += e.value * yi;
            }
        }
        let scale = w.iter().map(|m| m.norm()).fold(0.0, f64::max).max(gap.abs());
        if scale.is_nan() || scale <= 0.0 || gap >= -tol * scale {
            return false;
        }
        let mut min_eig = f64::INFINITY;
        for m in &w {
            let h = (m + m.adjoint()).scale(0.5);
            match crate::spectral::eigen_matrix(&h, 1.0) {
                Ok(e) if !e.values.is_empty() => min_eig = min_eig.min(e.min()),
                Ok(_) => {}
                Err(_) => return false,
            }
        }
        let negative = (-min_eig).max(0.0);
        match self.trace_bound {
            Some(t) => gap + t * negative < 0.0,
            None => negative <= tol * scale,
        }
    }
}

/// Outcome of a feasibility solve.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityResult {
    /// Blocks satisfying the constraints.
    Feasible(Vec<CMatrix>),
    /// Multipliers `y` of a Farkas certificate, one per constraint.
    Infeasible(Vec<f64>),
    /// The backend stopped without a conclusion.
    Unknown(String),
}

/// A conic optimization backend able to decide [`SdpFeasibility`] problems.
pub trait ConicBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, problem: &SdpFeasibility, tol: f64) -> Result<FeasibilityResult>;
}

/// Registration point for a backend. Holds no state besides the backend.
#[derive(Clone, Default)]
pub struct SolverAdapter {
    backend: Option<Arc<dyn ConicBackend>>,
}

impl fmt::Debug for SolverAdapter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolverAdapter")
            .field("backend", &self.backend.as_ref().map(|b| b.name()))
            .finish()
    }
}

impl SolverAdapter {
    /// An adapter without a backend; every solve fails with
    /// [`Error::SolverUnavailable`].
    pub fn none() -> Self {
        Self { backend: None }
    }

    pub fn with_backend(backend: Arc<dyn ConicBackend>) -> Self {
        Self { backend: Some(backend) }
    }

    /// The bundled backend when compiled in, otherwise none.
    pub fn with_default_backend() -> Self {
        #[cfg(feature = "clarabel")]
        {
            Self::with_backend(Arc::new(ClarabelBackend::default()))
        }
        #[cfg(not(feature = "clarabel"))]
        {
            Self::none()
        }
    }

    pub fn register(&mut self, backend: Arc<dyn ConicBackend>) {
        self.backend = Some(backend);
    }

    pub fn is_available(&self) -> bool {
        self.backend.is_some()
    }

    pub fn backend_name(&self) -> Option<&str> {
        self.backend.as_deref().map(|b| b.name())
    }

    /// Solves `problem`; a feasible answer is re-validated before it is
    /// returned and a witness that fails validation is a
    /// [`Error::NumericalFailure`]. Certificates are returned unchecked; see
    /// [`SdpFeasibility::verify_certificate`].
    pub fn solve_feasibility(&self, problem: &SdpFeasibility, tol: f64) -> Result<FeasibilityResult> {
        let backend = self.backend.as_ref().ok_or(Error::SolverUnavailable)?;
        let out = backend.solve(problem, tol)?;
        if let FeasibilityResult::Feasible(blocks) = &out {
            if !problem.verify_witness(blocks, tol) {
                return Err(Error::NumericalFailure(format!(
                    "{} returned a point violating the constraints (residual {:e})",
                    backend.name(),
                    problem.constraint_residual(blocks)
                )));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_problem(target: f64) -> SdpFeasibility {
        let c = LinearConstraint::dense(0, &CMatrix::identity(2, 2), target);
        SdpFeasibility::new(vec![2], vec![c], "trace", Some(target.abs())).unwrap()
    }

    #[test]
    fn no_backend_is_an_error() {
        let r = SolverAdapter::none().solve_feasibility(&trace_problem(1.0), 1e-7);
        assert_eq!(r, Err(Error::SolverUnavailable));
    }

    #[test]
    fn witness_and_certificate_checks() {
        let p = trace_problem(1.0);
        assert!(p.verify_witness(&[CMatrix::identity(2, 2).scale(0.5)], 1e-9));
        assert!(!p.verify_witness(&[CMatrix::identity(2, 2)], 1e-9));
        let q = trace_problem(-1.0);
        assert!(q.verify_certificate(&[1.0], 1e-9));
        assert!(!q.verify_certificate(&[-1.0], 1e-9));
        assert!(!p.verify_certificate(&[1.0], 1e-9));
    }

    #[test]
    fn non_hermitian_coefficients_are_rejected() {
        let mut f = CMatrix::zeros(2, 2);
        f[(0, 1)] = Complex64::new(1.0, 0.0);
        let c = LinearConstraint::dense(0, &f, 0.0);
        assert!(SdpFeasibility::new(vec![2], vec![c], "bad", None).is_err());
    }

    #[cfg(feature = "clarabel")]
    #[test]
    fn clarabel_trace_examples() {
        let a = SolverAdapter::with_default_backend();
        match a.solve_feasibility(&trace_problem(1.0), 1e-7).unwrap() {
            FeasibilityResult::Feasible(x) => {
                assert!((x[0].trace().re - 1.0).abs() < 1e-6);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
        let q = trace_problem(-1.0);
        match a.solve_feasibility(&q, 1e-7).unwrap() {
            FeasibilityResult::Infeasible(y) => assert!(q.verify_certificate(&y, 1e-7)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    /// Marginal constraints `tr_B X = ρ` lifted as `F ⊗ 1`.
    #[cfg(feature = "clarabel")]
    #[test]
    fn clarabel_lifted_marginals() {
        let a = SolverAdapter::with_default_backend();
        let mut g = crate::random::rng(3);
        let (d, rest) = (8, 2);
        let x = crate::random::ginibre(&mut g, d, d);
        let rho = &x * x.adjoint();
        let rho = rho.scale(1.0 / rho.trace().re);
        let mut cs = Vec::new();
        for r in 0..d {
            for c in 0..d {
                let mut f = CMatrix::zeros(d, d);
                f[(r, c)] += Complex64::new(0.5, 0.0);
                f[(c, r)] += Complex64::new(0.5, 0.0);
                let mut h = CMatrix::zeros(d, d);
                h[(r, c)] += Complex64::new(0.0, 0.5);
                h[(c, r)] -= Complex64::new(0.0, 0.5);
                for f in [f, h] {
                    if f.norm() == 0.0 {
                        continue;
                    }
                    let target = (&f * &rho).trace().re;
                    let lifted = f.kronecker(&CMatrix::identity(rest, rest));
                    cs.push(LinearConstraint::dense(0, &lifted, target));
                }
            }
        }
        let p = SdpFeasibility::new(vec![d * rest], cs, "lifted", Some(1.0)).unwrap();
        match a.solve_feasibility(&p, 1e-7).unwrap() {
            FeasibilityResult::Feasible(x) => assert!((x[0].trace().re - 1.0).abs() < 1e-6),
            other => panic!("expected feasible, got {other:?}"),
        }
    }
}
