use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::label::{total_dim, SpaceLabel};
use crate::process::ProcessTensor;
use crate::solver::{CoefficientEntry, FeasibilityResult, LinearConstraint, SdpFeasibility, SolverAdapter};
use crate::spectral::psd_eigen;
use crate::tolerance::Tolerances;

/// Largest extended side handed to the backend.
const MAX_EXTENSION_SIDE: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionOutcome {
    /// A symmetric extension exists; separability is not decided.
    Feasible,
    /// No symmetric extension exists, with a verified certificate: the
    /// process is entangled across the cut.
    Infeasible,
    /// The backend stopped without a verdict.
    SolverLimit(String),
}

fn entry(row: usize, col: usize, value: Complex64) -> CoefficientEntry {
    CoefficientEntry {
        block: 0,
        row,
        col,
        value,
    }
}

/// Hermitian functionals reading `Re X_rc` and `−Im X_rc` (`r ≠ c`) or
/// `X_rr`.
fn readouts(r: usize, c: usize) -> Vec<Vec<CoefficientEntry>> {
    let half = Complex64::new(0.5, 0.0);
    let ihalf = Complex64::new(0.0, 0.5);
    if r == c {
        return vec![vec![entry(r, r, Complex64::new(1.0, 0.0))]];
    }
    vec![
        vec![entry(c, r, half), entry(r, c, half)],
        vec![entry(c, r, ihalf), entry(r, c, -ihalf)],
    ]
}

/// Whether `ρ = C / tr C` has a state on `A ⊗ B^{⊗k}` that is invariant
/// under permutations of the `B` copies and reduces to `ρ` on `A ⊗ B₁`.
/// `copied` lists the wires of `B`. For `k = 1` the answer is read off
/// directly from positivity of `ρ`.
pub fn k_extension_feasibility(
    p: &ProcessTensor,
    copied: &[SpaceLabel],
    k: usize,
    adapter: &SolverAdapter,
    tol: &Tolerances,
) -> Result<ExtensionOutcome> {
    if !adapter.is_available() {
        return Err(Error::SolverUnavailable);
    }
    if k == 0 {
        return Err(Error::DimensionMismatch("extension level must be at least 1".into()));
    }
    let labels = p.labels();
    if copied.is_empty()
        || copied.len() >= labels.len()
        || copied.iter().any(|l| !labels.contains(l))
        || (1..copied.len()).any(|i| copied[..i].contains(&copied[i]))
    {
        return Err(Error::DimensionMismatch(
            "the copied side must be a proper, non-empty subset of the process wires".into(),
        ));
    }
    let mut order: Vec<SpaceLabel> = labels.iter().copied().filter(|l| !copied.contains(l)).collect();
    order.extend_from_slice(copied);
    let rho = p.op().permute(&order)?.scale(1.0 / p.expected_trace());
    if k == 1 {
        return Ok(match psd_eigen(&rho, tol) {
            Ok(_) => ExtensionOutcome::Feasible,
            Err(_) => ExtensionOutcome::Infeasible,
        });
    }
    let d_b = total_dim(copied);
    let d_ab = rho.dim();
    let d_a = d_ab / d_b;
    let rest = d_b.pow(k as u32 - 1);
    let n = d_ab * rest;
    if n > MAX_EXTENSION_SIDE {
        return Ok(ExtensionOutcome::SolverLimit(format!(
            "extended side {n} exceeds {MAX_EXTENSION_SIDE}"
        )));
    }

    let mut constraints = Vec::new();
    let m = rho.matrix();
    for r in 0..d_ab {
        for c in r..d_ab {
            for f in readouts(r, c) {
                let target: f64 = f.iter().map(|e| (e.value * m[(e.col, e.row)]).re).sum();
                let lifted = f
                    .iter()
                    .flat_map(|e| (0..rest).map(move |t| entry(e.row * rest + t, e.col * rest + t, e.value)))
                    .collect();
                constraints.push(LinearConstraint {
                    coefficients: lifted,
                    target,
                });
            }
        }
    }

    // Index of X is a·d_B^k + b_1·d_B^{k−1} + … + b_k.
    let digits = |x: usize| -> Vec<usize> {
        let mut v = vec![0; k + 1];
        let mut x = x;
        for slot in (1..=k).rev() {
            v[slot] = x % d_b;
            x /= d_b;
        }
        v[0] = x;
        v
    };
    let undigits = |v: &[usize]| v[1..].iter().fold(v[0], |acc, &b| acc * d_b + b);
    for swap in 2..=k {
        let perm: Vec<usize> = (0..n)
            .map(|x| {
                let mut v = digits(x);
                v.swap(1, swap);
                undigits(&v)
            })
            .collect();
        for r in 0..n {
            for c in r..n {
                let (pr, pc) = (perm[r], perm[c]);
                if (pr.min(pc), pr.max(pc)) <= (r, c) {
                    continue;
                }
                for (f, g) in readouts(r, c).into_iter().zip(readouts(pr, pc)) {
                    let mut coefficients = f;
                    coefficients.extend(g.into_iter().map(|e| CoefficientEntry { value: -e.value, ..e }));
                    constraints.push(LinearConstraint {
                        coefficients,
                        target: 0.0,
                    });
                }
            }
        }
    }
    let problem = SdpFeasibility::new(
        vec![n],
        constraints,
        format!("{k}-copy symmetric extension of a {d_a}x{d_b} cut"),
        Some(1.0),
    )?;
    match adapter.solve_feasibility(&problem, tol.sdp)? {
        FeasibilityResult::Feasible(_) => Ok(ExtensionOutcome::Feasible),
        FeasibilityResult::Infeasible(y) => {
            if problem.verify_certificate(&y, tol.sdp) {
                Ok(ExtensionOutcome::Infeasible)
            } else {
                Err(Error::NumericalFailure(
                    "infeasibility certificate failed independent verification".into(),
                ))
            }
        }
        FeasibilityResult::Unknown(status) => Ok(ExtensionOutcome::SolverLimit(status)),
    }
}
