use serde::Serialize;

use crate::error::Result;
use crate::label::SpaceLabel;
use crate::process::ProcessTensor;
use crate::spectral::hermitian_eigen;
use crate::tolerance::Tolerances;

/// Number of times up to which every grouping of channel wires is tried.
const FULL_ENUMERATION_TIMES: usize = 8;

/// Partial-transpose spectrum across one bipartition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PptCut {
    /// Wires on the transposed side; the other side holds `1^i`.
    pub side: Vec<SpaceLabel>,
    pub min_eigenvalue: f64,
    /// Whether the cut keeps every factor `{k+1^i, k^o}` and `{1^i}` of a
    /// separable decomposition on one side. Only such cuts can rule out
    /// separability; the remaining single-wire cuts are diagnostic.
    pub certifying: bool,
    pub negative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PptReport {
    pub wires: Vec<SpaceLabel>,
    pub cuts: Vec<PptCut>,
    /// Smallest eigenvalue over certifying cuts.
    pub min_certifying: f64,
    pub tolerance: f64,
    /// No certifying cut has a negative partial transpose.
    pub passed: bool,
}

impl PptReport {
    /// The cut with `side` on either side of the bipartition.
    pub fn cut(&self, side: &[SpaceLabel]) -> Option<&PptCut> {
        let sorted = |v: Vec<SpaceLabel>| {
            let mut v = v;
            v.sort();
            v
        };
        let want = sorted(side.to_vec());
        let other = sorted(self.wires.iter().copied().filter(|w| !side.contains(w)).collect());
        self.cuts.iter().find(|c| {
            let s = sorted(c.side.clone());
            s == want || s == other
        })
    }
}

fn groups(p: &ProcessTensor) -> Vec<Vec<SpaceLabel>> {
    let n = p.n_times();
    let mut g: Vec<Vec<SpaceLabel>> = (2..=n).rev().map(|k| vec![p.input(k), p.output(k - 1)]).collect();
    g.push(vec![p.input(1)]);
    g
}

fn group_subsets(n_groups: usize, n_times: usize) -> Vec<Vec<usize>> {
    // Subsets never contain the last group, which holds 1^i.
    let free = n_groups - 1;
    if n_times <= FULL_ENUMERATION_TIMES {
        return (1u32..(1 << free))
            .map(|mask| (0..free).filter(|i| mask & (1 << i) != 0).collect())
            .collect();
    }
    let mut out: Vec<Vec<usize>> = (0..free).map(|i| vec![i]).collect();
    out.extend((2..=free).map(|m| (0..m).collect()));
    out
}

/// Minimum eigenvalue of the partial transpose over every grouping of the
/// channel factors (all groupings up to eight times, single groups and
/// future/past splits beyond) and over every single wire.
pub fn ppt_bipartitions(p: &ProcessTensor, tol: &Tolerances) -> Result<PptReport> {
    let g = groups(p);
    let first = p.input(1);
    let mut sides: Vec<(Vec<SpaceLabel>, bool)> = group_subsets(g.len(), p.n_times())
        .into_iter()
        .map(|s| (s.iter().flat_map(|&i| g[i].iter().copied()).collect(), true))
        .collect();
    for &w in p.labels() {
        let side = if w == first {
            p.labels().iter().copied().filter(|l| *l != first).collect()
        } else {
            vec![w]
        };
        let mut key = side.clone();
        key.sort();
        let seen = sides.iter().any(|(s, _)| {
            let mut t = s.clone();
            t.sort();
            t == key
        });
        if !seen {
            sides.push((side, false));
        }
    }
    let mut cuts = Vec::with_capacity(sides.len());
    let mut min_certifying = f64::INFINITY;
    for (side, certifying) in sides {
        let eig = hermitian_eigen(&p.op().partial_transpose(&side)?)?;
        let min = eig.min();
        let negative = min < -tol.ppt * eig.max_abs().max(1.0);
        if certifying {
            min_certifying = min_certifying.min(min);
        }
        cuts.push(PptCut {
            side,
            min_eigenvalue: min,
            certifying,
            negative,
        });
    }
    let passed = !cuts.iter().any(|c| c.certifying && c.negative);
    Ok(PptReport {
        wires: p.labels().to_vec(),
        cuts,
        min_certifying,
        tolerance: tol.ppt,
        passed,
    })
}
