use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{ConicBackend, FeasibilityResult, SdpFeasibility};
use crate::error::{Error, Result};
use crate::operator::CMatrix;

/// Interior-point backend. Hermitian blocks enter the PSD cone through the
/// real embedding `[[Re X, −Im X], [Im X, Re X]]`.
#[derive(Debug, Clone)]
pub struct ClarabelBackend {
    pub max_iter: u32,
}

impl Default for ClarabelBackend {
    fn default() -> Self {
        Self { max_iter: 200 }
    }
}

/// Real coordinates of the Hermitian blocks: the diagonal, then `Re` and
/// `Im` of each entry above it.
struct Layout {
    offsets: Vec<usize>,
    dims: Vec<usize>,
    total: usize,
}

impl Layout {
    fn new(dims: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(dims.len());
        let mut total = 0;
        for &n in dims {
            offsets.push(total);
            total += n * n;
        }
        Self {
            offsets,
            dims: dims.to_vec(),
            total,
        }
    }

    fn diag(&self, b: usize, r: usize) -> usize {
        self.offsets[b] + r
    }

    /// Index of `Re X_rc` for `r < c`; `Im X_rc` follows it.
    fn upper(&self, b: usize, r: usize, c: usize) -> usize {
        let n = self.dims[b];
        let before = r * n - r * (r + 1) / 2;
        self.offsets[b] + n + 2 * (before + (c - r - 1))
    }

    /// Adds `Re(f · X_cr)` to `row`.
    fn add_entry(&self, row: &mut [f64], b: usize, r: usize, c: usize, f: Complex64) {
        if r == c {
            row[self.diag(b, r)] += f.re;
        } else if c < r {
            let k = self.upper(b, c, r);
            row[k] += f.re;
            row[k + 1] -= f.im;
        } else {
            let k = self.upper(b, r, c);
            row[k] += f.re;
            row[k + 1] += f.im;
        }
    }

    /// Entry `(rr, cc)`, `rr ≤ cc`, of the real embedding of block `b` as a
    /// signed coordinate.
    fn embedded(&self, b: usize, rr: usize, cc: usize) -> Option<(usize, f64)> {
        let n = self.dims[b];
        let re = |r: usize, c: usize| {
            if r == c {
                Some((self.diag(b, r), 1.0))
            } else {
                Some((self.upper(b, r.min(c), r.max(c)), 1.0))
            }
        };
        match (rr < n, cc < n) {
            (true, true) => re(rr, cc),
            (false, false) => re(rr - n, cc - n),
            (true, false) => {
                // −Im X_{rr, c'}
                let c = cc - n;
                if rr == c {
                    None
                } else if rr < c {
                    Some((self.upper(b, rr, c) + 1, -1.0))
                } else {
                    Some((self.upper(b, c, rr) + 1, 1.0))
                }
            }
            (false, true) => unreachable!("upper triangle only"),
        }
    }

    fn blocks(&self, x: &[f64]) -> Vec<CMatrix> {
        self.dims
            .iter()
            .enumerate()
            .map(|(b, &n)| {
                let mut m = CMatrix::zeros(n, n);
                for r in 0..n {
                    m[(r, r)] = Complex64::new(x[self.diag(b, r)], 0.0);
                    for c in r + 1..n {
                        let k = self.upper(b, r, c);
                        let v = Complex64::new(x[k], x[k + 1]);
                        m[(r, c)] = v;
                        m[(c, r)] = v.conj();
                    }
                }
                m
            })
            .collect()
    }
}

impl ConicBackend for ClarabelBackend {
    fn name(&self) -> &str {
        "clarabel"
    }

    fn solve(&self, problem: &SdpFeasibility, tol: f64) -> Result<FeasibilityResult> {
        let layout = Layout::new(&problem.variable_dims);
        let nv = layout.total;
        let m = problem.equality_constraints.len();
        let mut g = DMatrix::<f64>::zeros(m, nv);
        let mut h = DVector::<f64>::zeros(m);
        for (i, c) in problem.equality_constraints.iter().enumerate() {
            let mut row = vec![0.0; nv];
            for e in &c.coefficients {
                layout.add_entry(&mut row, e.block, e.row, e.col, e.value);
            }
            for (k, v) in row.into_iter().enumerate() {
                g[(i, k)] = v;
            }
            h[i] = c.target;
        }

        // Replace the equalities by an orthonormal, independent system
        // `Vᵣᵀ x = Σᵣ⁻¹ Uᵣᵀ h`; multipliers map back through `Uᵣ Σᵣ⁻¹`.
        let (u_r, sigma_r, vt_r) = if m == 0 {
            (DMatrix::zeros(0, 0), DVector::zeros(0), DMatrix::zeros(0, nv))
        } else {
            let svd = g.clone().svd(true, true);
            let u = svd.u.ok_or_else(|| Error::NumericalFailure("SVD failed".into()))?;
            let vt = svd.v_t.ok_or_else(|| Error::NumericalFailure("SVD failed".into()))?;
            let smax = svd.singular_values.max();
            let keep: Vec<usize> = (0..svd.singular_values.len())
                .filter(|&i| svd.singular_values[i] > 1e-10 * smax.max(f64::MIN_POSITIVE))
                .collect();
            (
                u.select_columns(&keep),
                DVector::from_iterator(keep.len(), keep.iter().map(|&i| svd.singular_values[i])),
                vt.select_rows(&keep),
            )
        };
        let r = sigma_r.len();
        let projected = if r == 0 { DVector::zeros(m) } else { &u_r * (u_r.transpose() * &h) };
        let outside = &h - projected;
        if outside.norm() > 1e-9 * h.norm().max(1.0) {
            return Ok(FeasibilityResult::Infeasible((-outside).iter().copied().collect()));
        }
        let h_r: DVector<f64> = if r == 0 {
            DVector::zeros(0)
        } else {
            (u_r.transpose() * &h).component_div(&sigma_r)
        };

        // Maximise λ subject to X_b − λ·1 ⪰ 0 and λ ≤ 1; strictly feasible and
        // bounded, and a negative optimum comes with a Farkas certificate.
        let lam = nv;
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut b = Vec::new();
        for i in 0..r {
            for k in 0..nv {
                let v = vt_r[(i, k)];
                if v != 0.0 {
                    rows.push(i);
                    cols.push(k);
                    vals.push(v);
                }
            }
            b.push(h_r[i]);
        }
        let mut cones = Vec::new();
        if r > 0 {
            cones.push(SupportedConeT::ZeroConeT(r));
        }
        rows.push(r);
        cols.push(lam);
        vals.push(1.0);
        b.push(1.0);
        cones.push(SupportedConeT::NonnegativeConeT(1));
        let mut row = r + 1;
        for (blk, &n) in problem.variable_dims.iter().enumerate() {
            let side = 2 * n;
            for cc in 0..side {
                for rr in 0..=cc {
                    if let Some((k, sign)) = layout.embedded(blk, rr, cc) {
                        let scale = if rr == cc { 1.0 } else { std::f64::consts::SQRT_2 };
                        rows.push(row);
                        cols.push(k);
                        vals.push(-sign * scale);
                    }
                    if rr == cc {
                        rows.push(row);
                        cols.push(lam);
                        vals.push(1.0);
                    }
                    b.push(0.0);
                    row += 1;
                }
            }
            cones.push(SupportedConeT::PSDTriangleConeT(side));
        }
        let a = CscMatrix::new_from_triplets(row, nv + 1, rows, cols, vals);
        let p = CscMatrix::zeros((nv + 1, nv + 1));
        let mut q = vec![0.0; nv + 1];
        q[lam] = -1.0;
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .static_regularization_constant(1e-6)
            .max_iter(self.max_iter)
            .tol_feas(tol.min(1e-8))
            .tol_gap_abs(tol.min(1e-8))
            .tol_gap_rel(tol.min(1e-8))
            .build()
            .map_err(|e| Error::NumericalFailure(format!("solver settings: {e:?}")))?;
        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings);
        solver.solve();
        let sol = &solver.solution;
        if !matches!(sol.status, SolverStatus::Solved | SolverStatus::AlmostSolved) {
            return Ok(FeasibilityResult::Unknown(format!("{:?}", sol.status)));
        }
        if sol.x[lam] >= -tol {
            return Ok(FeasibilityResult::Feasible(layout.blocks(&sol.x[..nv])));
        }
        // The dual optimum is W = Σ y_i F_i ⪰ 0 with Σ y_i h_i = λ* < 0.
        let z_eq = DVector::from_iterator(r, sol.z[..r].iter().copied());
        let y = if r == 0 {
            DVector::zeros(m)
        } else {
            &u_r * z_eq.component_div(&sigma_r)
        };
        Ok(FeasibilityResult::Infeasible(y.iter().copied().collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_round_trip() {
        let layout = Layout::new(&[3, 2]);
        assert_eq!(layout.total, 13);
        let x: Vec<f64> = (0..13).map(|i| i as f64 + 1.0).collect();
        let blocks = layout.blocks(&x);
        for (b, m) in blocks.iter().enumerate() {
            assert!((m - m.adjoint()).norm() < 1e-15);
            // add_entry with f reads Re(f · X_cr).
            let n = m.nrows();
            for r in 0..n {
                for c in 0..n {
                    let mut row = vec![0.0; 13];
                    let one = Complex64::new(1.0, 0.0);
                    layout.add_entry(&mut row, b, r, c, one);
                    let got: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
                    assert!((got - m[(c, r)].re).abs() < 1e-12);
                    let mut row = vec![0.0; 13];
                    layout.add_entry(&mut row, b, r, c, Complex64::new(0.0, 1.0));
                    let got: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
                    assert!((got - (Complex64::new(0.0, 1.0) * m[(c, r)]).re).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn embedding_matches_real_form() {
        let layout = Layout::new(&[3]);
        let x: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
        let m = &layout.blocks(&x)[0];
        for cc in 0..6 {
            for rr in 0..=cc {
                let want = match (rr < 3, cc < 3) {
                    (true, true) => m[(rr, cc)].re,
                    (false, false) => m[(rr - 3, cc - 3)].re,
                    _ => -m[(rr, cc - 3)].im,
                };
                let got = layout.embedded(0, rr, cc).map_or(0.0, |(k, s)| s * x[k]);
                assert!((got - want).abs() < 1e-12, "({rr},{cc})");
            }
        }
    }
}
