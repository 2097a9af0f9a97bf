use memzoo_core::classify::*;
use memzoo_core::examples;
use memzoo_core::random::{self, rng};
use memzoo_core::{
    choi_identity, choi_trace_and_prepare, hermitian_eigen, trace_norm, LabeledOperator, ProcessTensor,
    SolverAdapter, SpaceLabel, Tolerances,
};
use num_complex::Complex64;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn qubit(label: SpaceLabel, amps: [Complex64; 2]) -> LabeledOperator {
    memzoo_core::choi::pure_state(vec![label], &amps).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn x_conj(s: &LabeledOperator) -> LabeledOperator {
    let l = s.labels()[0];
    let mut x = memzoo_core::CMatrix::zeros(2, 2);
    x[(0, 1)] = c(1.0, 0.0);
    x[(1, 0)] = c(1.0, 0.0);
    s.conjugate_by(&LabeledOperator::new(vec![l], x).unwrap()).unwrap()
}

#[test]
fn fig3_signalling_probe_outputs() {
    let p = examples::fig3().unwrap();
    let (o1, o2, i3) = (p.output(1), p.output(2), p.input(3));
    let zero = LabeledOperator::basis_projector(o1, 0).unwrap();
    let one = LabeledOperator::basis_projector(o1, 1).unwrap();
    let s2 = vec![
        LabeledOperator::basis_projector(o2, 0).unwrap(),
        qubit(o2, [c(1.0, 0.0), c(1.0, 0.0)]),
        LabeledOperator::maximally_mixed(vec![o2]).unwrap(),
        qubit(o2, [c(0.6, 0.0), c(0.0, 0.8)]),
    ];
    for s in &s2 {
        let w = signalling_witness(&p, 1, (&zero, &one), std::slice::from_ref(s)).unwrap();
        let want_a = s.relabel(o2, i3).unwrap();
        let want_b = x_conj(&want_a);
        assert!(trace_norm(&w.states.0.sub(&want_a).unwrap()) < 1e-9);
        assert!(trace_norm(&w.states.1.sub(&want_b).unwrap()) < 1e-9);
        let expected = 0.5 * trace_norm(&want_a.sub(&want_b).unwrap());
        assert!((w.distance - expected).abs() < 1e-9);
    }
}

#[test]
fn fig3_nonsignalling_residuals() {
    let p = examples::fig3().unwrap();
    let r = check_nonsignalling(&p, &tol()).unwrap();
    assert!(!r.passed);
    assert!((r.residual(2).unwrap() - 4.0).abs() < 1e-9);
    assert!(max_signalling_distance(&p).unwrap() > 0.99);
}

#[test]
fn fig3_classification() {
    let p = examples::fig3().unwrap();
    let r = classify(&p, Some(ProcessClass::ClassicalMemory), &tol()).unwrap();
    assert_eq!(r.verdict(ProcessClass::Quantum), Verdict::Pass);
    assert_eq!(r.verdict(ProcessClass::NonSignalling), Verdict::Fail);
    assert_eq!(r.verdict(ProcessClass::MixedMemoryless), Verdict::Fail);
    assert_eq!(r.verdict(ProcessClass::ClassicalMemory), Verdict::PassByConstruction);
    assert_eq!(r.verdict(ProcessClass::Separable), Verdict::PassByConstruction);
    assert!(r.is_consistent());
}

#[test]
fn fig3_is_ppt_on_factor_cuts_only() {
    let p = examples::fig3().unwrap();
    let r = ppt_bipartitions(&p, &tol()).unwrap();
    assert!(r.passed);
    let single = r.cut(&[p.input(3)]).unwrap();
    assert!(!single.certifying && single.negative);
}

#[test]
fn bell_common_cause_measures() {
    let p = examples::bell_common_cause().unwrap();
    assert!((memory_measure(&p, &tol()).unwrap() - 2.0).abs() < 1e-6);
    let r = ppt_bipartitions(&p, &tol()).unwrap();
    assert!((r.min_certifying + 0.5).abs() < 1e-9);
    let rep = classify(&p, None, &tol()).unwrap();
    assert_eq!(rep.verdict(ProcessClass::NonSignalling), Verdict::Pass);
    assert_eq!(rep.verdict(ProcessClass::Separable), Verdict::Fail);
    assert_eq!(rep.verdict(ProcessClass::ClassicalMemory), Verdict::Fail);
    assert!(rep.witnesses["dilation_residual"] < 1e-8);
}

#[test]
fn ghz_is_nonsignalling_but_npt() {
    let p = examples::ghz_common_cause(3).unwrap();
    let r = classify(&p, None, &tol()).unwrap();
    assert_eq!(r.verdict(ProcessClass::NonSignalling), Verdict::Pass);
    assert_eq!(r.verdict(ProcessClass::Separable), Verdict::Fail);
    assert!(r.nonsignalling.max_residual <= 1e-9);
    let cut = r.ppt.cut(&[p.input(3)]).unwrap();
    assert!((cut.min_eigenvalue + 0.5).abs() < 1e-9);
    assert!(r.is_consistent());
}

#[test]
fn ghz_memoryless_on_average() {
    let p = examples::ghz_common_cause(3).unwrap();
    assert!(memoryless_on_average_check(&p, 2, &tol()).unwrap().passed);
    let f = examples::fig3().unwrap();
    assert!(!memoryless_on_average_check(&f, 2, &tol()).unwrap().passed);
}

#[test]
fn guerin_process_verdicts() {
    let p = examples::guerin().unwrap();
    let ppt = ppt_bipartitions(&p, &tol()).unwrap();
    assert!(ppt.cuts.iter().all(|c| !c.negative));
    let r = classify(&p, None, &tol()).unwrap();
    assert_eq!(r.known, Some(KnownProcess::Guerin));
    assert_eq!(r.verdict(ProcessClass::Separable), Verdict::PassByConstruction);
    assert_eq!(r.verdict(ProcessClass::ClassicalMemory), Verdict::Inconclusive);
    assert!(r.notes.iter().any(|n| n.contains("no classical-memory realisation")));
}

#[test]
fn identity_relay_is_memoryless() {
    let rho = LabeledOperator::basis_projector(SpaceLabel::sys_in(1, 2), 0).unwrap();
    let p = examples::trivial_identity(3, &rho).unwrap();
    let r = classify(&p, None, &tol()).unwrap();
    assert_eq!(r.verdict(ProcessClass::Memoryless), Verdict::Pass);
    assert!(r.witnesses["memory_measure"].abs() < 1e-9);
    assert!(ProcessClass::ALL.iter().all(|&c| r.verdict(c).is_pass()));
}

#[test]
fn canonical_dilation_reproduces_two_time_processes() {
    let mut g = rng(7);
    for p in [
        examples::bell_common_cause().unwrap(),
        examples::guerin().unwrap(),
        random::random_qm(&mut g, 2, 2, 2).unwrap(),
    ] {
        let d = two_time_canonical_dilation(&p, &tol()).unwrap();
        assert!(d.residual < 1e-8, "residual {}", d.residual);
        assert!(d.tp_residual < 1e-8);
        assert!(hermitian_eigen(&d.xi).unwrap().min() > -1e-10);
        assert!((d.xi.trace().re - 1.0).abs() < 1e-10);
    }
}

#[test]
fn canonical_dilation_of_pure_initial_state_is_completed() {
    let p = examples::fig3().unwrap();
    assert!(two_time_canonical_dilation(&p, &tol()).is_err());
    let rho = LabeledOperator::basis_projector(SpaceLabel::sys_in(1, 2), 0).unwrap();
    let p = examples::trivial_identity(2, &rho).unwrap();
    let d = two_time_canonical_dilation(&p, &tol()).unwrap();
    assert!(d.rank_deficient);
    assert!(d.residual < 1e-8 && d.tp_residual < 1e-8);
}

#[test]
fn mm_to_initial_sep_round_trip() {
    let (o1, i1, i2) = (SpaceLabel::sys_out(1, 2), SpaceLabel::sys_in(1, 2), SpaceLabel::sys_in(2, 2));
    let id = choi_identity(o1, i2).unwrap();
    let flip = choi_trace_and_prepare(&qubit(i2, [c(0.0, 0.0), c(1.0, 0.0)]), &[o1]).unwrap();
    let states = vec![
        qubit(i1, [c(1.0, 0.0), c(1.0, 0.0)]),
        LabeledOperator::maximally_mixed(vec![i1]).unwrap(),
    ];
    let weights = [0.3, 0.7];
    let channels = vec![id, flip];
    let sep = mm_to_initial_sep(&weights, &channels, &states).unwrap();
    let mm = MmDecomposition {
        weights: weights.to_vec(),
        states: states.clone(),
        channels: channels.clone(),
    };
    let direct = mm.process().unwrap();
    let via = sep.process().unwrap();
    assert!(trace_norm(&direct.op().sub(via.op()).unwrap()) < 1e-10);
    let back = initial_sep_to_mm(&sep.terms, &sep.dilation).unwrap();
    assert!(trace_norm(&back.process().unwrap().op().sub(direct.op()).unwrap()) < 1e-10);
    for (a, b) in back.channels.iter().zip(&channels) {
        assert!(trace_norm(&a.op().sub(b.op()).unwrap()) < 1e-10);
    }
}

#[test]
fn initial_sep_to_mm_rejects_non_channel_slices() {
    let (o1, i1, i2) = (SpaceLabel::sys_out(1, 2), SpaceLabel::sys_in(1, 2), SpaceLabel::sys_in(2, 2));
    let id = choi_identity(o1, i2).unwrap();
    let rho = LabeledOperator::maximally_mixed(vec![i1]).unwrap();
    let sep = mm_to_initial_sep(&[0.5, 0.5], &[id.clone(), id], &[rho.clone(), rho]).unwrap();
    let d = sep.dilation.op().scale(2.0);
    let dil = memzoo_core::ChoiChannel::new(d, sep.dilation.inputs().to_vec(), sep.dilation.outputs().to_vec()).unwrap();
    match initial_sep_to_mm(&sep.terms, &dil) {
        Err(memzoo_core::Error::NotCptpSlice { index, .. }) => assert_eq!(index, 0),
        other => panic!("expected a slice error, got {other:?}"),
    }
}

#[test]
fn extension_without_backend_is_unavailable() {
    let p = examples::bell_common_cause().unwrap();
    let r = k_extension_feasibility(&p, &[p.input(1)], 2, &SolverAdapter::none(), &tol());
    assert_eq!(r, Err(memzoo_core::Error::SolverUnavailable));
}

#[test]
fn one_copy_extension_is_positivity() {
    let p = examples::bell_common_cause().unwrap();
    let a = SolverAdapter::with_default_backend();
    if !a.is_available() {
        return;
    }
    let r = k_extension_feasibility(&p, &[p.input(1)], 1, &a, &tol()).unwrap();
    assert_eq!(r, ExtensionOutcome::Feasible);
}

#[cfg(feature = "clarabel")]
#[test]
fn bell_has_no_two_copy_extension() {
    let p = examples::bell_common_cause().unwrap();
    let a = SolverAdapter::with_default_backend();
    let r = k_extension_feasibility(&p, &[p.input(1)], 2, &a, &tol()).unwrap();
    assert_eq!(r, ExtensionOutcome::Infeasible);
}

#[cfg(feature = "clarabel")]
#[test]
fn guerin_has_a_two_copy_extension() {
    let p = examples::guerin().unwrap();
    let a = SolverAdapter::with_default_backend();
    let r = k_extension_feasibility(&p, &[p.input(1)], 2, &a, &tol()).unwrap();
    assert_eq!(r, ExtensionOutcome::Feasible);
}

#[test]
fn random_memoryless_processes_have_zero_memory() {
    let mut g = rng(11);
    for _ in 0..10 {
        let p: ProcessTensor = random::random_memoryless(&mut g, 3, 2).unwrap();
        let r = classify(&p, None, &tol()).unwrap();
        assert_eq!(r.verdict(ProcessClass::Memoryless), Verdict::Pass);
        assert!(r.witnesses["memory_measure"] <= 1e-9);
    }
}
