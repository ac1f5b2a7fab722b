use super::*;
use crate::model::Sign;

fn dimer(case: CaseLabel, sign: Sign) -> BranchSpec {
    let energy = (case == CaseLabel::SymmetricI).then_some(1.0);
    BranchSpec::new(Topology::Dimer, case, BranchSelector::Sign { sign }, 1.0, -2.0, 1.0, energy).unwrap()
}

fn trimer_root(case: CaseLabel, anchor_gamma: f64, index: usize) -> BranchSpec {
    let energy = (case == CaseLabel::SymmetricI).then_some(1.0);
    BranchSpec::new(
        Topology::Trimer,
        case,
        BranchSelector::Root { anchor_gamma, index },
        1.0,
        -1.0,
        1.0,
        energy,
    )
    .unwrap()
}

fn trimer_asym(energy: Sign, index: usize, mirrored: bool) -> BranchSpec {
    BranchSpec::new(
        Topology::Trimer,
        CaseLabel::AsymmetricII,
        BranchSelector::Mirror {
            anchor_gamma: 3.0,
            energy,
            index,
            mirrored,
        },
        1.0,
        -1.0,
        1.0,
        None,
    )
    .unwrap()
}

fn terminated(end: CurveEnd) -> (f64, f64) {
    match end {
        CurveEnd::Terminated { gamma, width } => (gamma, width),
        CurveEnd::Boundary => panic!("expected a termination"),
    }
}

fn assert_well_formed(curve: &BranchCurve) {
    for w in curve.points.windows(2) {
        assert!(w[1].gamma > w[0].gamma, "gammas not increasing in {}", curve.label());
    }
    assert!(curve.is_continuous(), "branch hop in {}", curve.label());
}

#[test]
fn lattice_closes_on_the_upper_end() {
    let nodes = lattice(0.0, 1.0, 0.3);
    assert_eq!(nodes, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
    assert_eq!(lattice(0.0, 1.0, 0.5), vec![0.0, 0.5, 1.0]);
}

#[test]
fn dimer_symmetric_branches_terminate_at_the_golden_ratio() {
    let golden = 0.5 * (1.0 + 5f64.sqrt());
    for sign in [Sign::Plus, Sign::Minus] {
        let curve = sweep_branch(&dimer(CaseLabel::SymmetricI, sign), (0.0, 2.0), DEFAULT_STEP).unwrap();
        assert_eq!(curve.lower, CurveEnd::Boundary);
        let (g, width) = terminated(curve.upper);
        assert!((g - golden).abs() < 1e-4, "{g}");
        assert!(width <= 1e-6);
        assert_well_formed(&curve);
        assert!(curve.skipped.is_empty());
    }
}

#[test]
fn dimer_special_branch_terminates_at_twice_the_coupling() {
    for sign in [Sign::Plus, Sign::Minus] {
        let curve = sweep_branch(&dimer(CaseLabel::SpecialIII, sign), (0.0, 3.0), DEFAULT_STEP).unwrap();
        let (g, width) = terminated(curve.upper);
        assert!((g - 2.0).abs() <= 1e-6, "{g}");
        assert!(width <= 1e-6);
        assert!(curve.events.iter().any(|e| e.kind == EventKind::Termination));
    }
}

#[test]
fn empty_branch_is_an_error() {
    let err = sweep_branch(&dimer(CaseLabel::AsymmetricII, Sign::Plus), (0.0, 0.5), DEFAULT_STEP).unwrap_err();
    assert!(matches!(err, OligomerError::EmptyBranch { .. }));
    let err = sweep_branch(&dimer(CaseLabel::AsymmetricII, Sign::Plus), (0.0, 0.5), 0.0).unwrap_err();
    assert!(matches!(err, OligomerError::InvalidInput(_)));
}

#[test]
fn dimer_pitchfork_on_the_special_branch() {
    let curves: Vec<BranchCurve> = [
        dimer(CaseLabel::SpecialIII, Sign::Plus),
        dimer(CaseLabel::SpecialIII, Sign::Minus),
        dimer(CaseLabel::AsymmetricII, Sign::Plus),
        dimer(CaseLabel::AsymmetricII, Sign::Minus),
    ]
    .iter()
    .map(|s| sweep_branch(s, (0.0, 3.0), DEFAULT_STEP).unwrap())
    .collect();
    let events = detect_events(&curves);
    let pf: Vec<&Event> = events.iter().filter(|e| e.kind == EventKind::Pitchfork).collect();
    assert_eq!(pf.len(), 1, "{events:#?}");
    let pf = pf[0];
    assert!((pf.gamma_located - 2.0 / 5f64.sqrt()).abs() < 1e-4);
    assert!(pf.refinement_width <= 1e-6);
    assert!((pf.energy.unwrap() - 4.0 / 5f64.sqrt()).abs() < 1e-6);
    assert!(pf.participants.contains(&"dimer_special-III_plus".to_string()));
    assert!(pf.participants.contains(&"dimer_asym-II_plus".to_string()));
    assert!(pf.participants.contains(&"dimer_asym-II_minus".to_string()));

    // the parent loses stability at the same point
    let parent = &curves[0];
    let change = parent
        .events
        .iter()
        .find(|e| e.kind == EventKind::StabilityChange)
        .expect("stability change on the parent");
    assert!((change.gamma_located - pf.gamma_located).abs() < 1e-3);
    assert!(change.refinement_width <= 1e-6);

    // exactly at the pitchfork the asymmetric state is the symmetric one
    let p = curves[2].spec.params(pf.gamma_located);
    let asym = dimer_asymmetric(&p, Sign::Plus).unwrap().unwrap();
    let sym = dimer_special_symmetric(&p, Sign::Plus).unwrap().unwrap();
    assert!(state_distance(&asym, &sym) < 1e-6);
}

#[test]
fn dimer_symmetric_pair_meets_in_a_saddle_node() {
    let curves: Vec<BranchCurve> = [Sign::Plus, Sign::Minus]
        .iter()
        .map(|&s| sweep_branch(&dimer(CaseLabel::SymmetricI, s), (0.0, 2.0), DEFAULT_STEP).unwrap())
        .collect();
    let events = detect_events(&curves);
    let sn: Vec<&Event> = events.iter().filter(|e| e.kind == EventKind::SaddleNode).collect();
    assert_eq!(sn.len(), 1);
    assert!((sn[0].gamma_located - 0.5 * (1.0 + 5f64.sqrt())).abs() < 1e-4);
}

#[test]
fn trimer_asymmetric_pair_emerges_near_two() {
    for index in [0, 1] {
        let curve = sweep_branch(&trimer_asym(Sign::Plus, index, false), (1.5, 3.5), DEFAULT_STEP).unwrap();
        let (g, width) = terminated(curve.lower);
        assert!((g - 2.0).abs() < 0.02, "{g}");
        assert!(width <= 1e-6);
        assert_eq!(curve.upper, CurveEnd::Boundary);
        assert_well_formed(&curve);
        assert!(curve.events.iter().any(|e| e.kind == EventKind::Emergence));
    }
}

#[test]
fn trimer_symmetric_saddle_node() {
    let curves: Vec<BranchCurve> = (0..3)
        .map(|i| sweep_branch(&trimer_root(CaseLabel::SymmetricI, 1.5, i), (1.0, 3.0), DEFAULT_STEP).unwrap())
        .collect();
    let events = detect_events(&curves);
    let sn: Vec<&Event> = events.iter().filter(|e| e.kind == EventKind::SaddleNode).collect();
    assert_eq!(sn.len(), 1, "{events:#?}");
    assert!((sn[0].gamma_located - 2.59).abs() < 0.02, "{}", sn[0].gamma_located);
    for c in &curves {
        assert_well_formed(c);
    }
}

#[test]
fn trimer_special_blue_branch_loses_stability_at_the_pitchfork() {
    let blue = sweep_branch(&trimer_root(CaseLabel::SpecialIII, 0.5, 0), (0.05, 2.3), DEFAULT_STEP).unwrap();
    let changes: Vec<&Event> = blue.events.iter().filter(|e| e.kind == EventKind::StabilityChange).collect();
    assert!(!changes.is_empty());
    assert!(changes.iter().any(|e| (e.gamma_located - 2.05).abs() < 0.02), "{changes:#?}");

    let red = sweep_branch(&trimer_asym(Sign::Minus, 0, false), (1.5, 3.5), DEFAULT_STEP).unwrap();
    let events = detect_events(&[blue, red]);
    let pf = events.iter().find(|e| e.kind == EventKind::Pitchfork).expect("pitchfork");
    assert!((pf.gamma_located - 2.05).abs() < 0.02);
    assert_eq!(pf.participants.len(), 2, "{pf:?}");
}

#[test]
fn analytic_points_at_the_reference_constants() {
    let pts = analytic_critical_points(1.0, -2.0, 1.0, Some(1.0));
    assert!((pts["dimer_caseI_saddle"] - 1.618_033_988_749_895).abs() < 1e-12);
    assert!((pts["dimer_pitchfork"] - 0.894_427_190_999_916).abs() < 1e-12);
    assert!((pts["dimer_pitchfork_energy"] - 1.788_854_381_999_832).abs() < 1e-12);
    assert_eq!(pts["dimer_caseIII_termination"], 2.0);
    assert_eq!(pts["trimer_zero_amplitude"], 1.0);
    assert_eq!(pts["linear_PT_dimer"], 1.0);
    assert!((pts["linear_PT_trimer"] - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn analytic_points_omit_undefined_entries() {
    let pts = analytic_critical_points(1.0, -1.0, 0.0, Some(2.0));
    assert!(!pts.contains_key("trimer_zero_amplitude"));
    assert!(!pts.contains_key("dimer_pitchfork"));
    let pts = analytic_critical_points(1.0, 0.0, 1.0, None);
    assert!(!pts.contains_key("dimer_caseI_saddle"));
    assert!(pts.contains_key("dimer_caseIII_termination"));
}

#[test]
fn saddle_formula_matches_the_discriminant() {
    use crate::branches::dimer::symmetric_discriminant;
    for (rho_r, rho_im, e) in [(-2.0, 1.0, 1.0), (-1.0, 0.5, 0.3), (1.5, 1.0, -0.5)] {
        let pts = analytic_critical_points(1.0, rho_r, rho_im, Some(e));
        if let Some(&g) = pts.get("dimer_caseI_saddle") {
            let p = crate::model::Params::dimer(1.0, g, rho_r, rho_im).unwrap();
            assert!(symmetric_discriminant(&p, e).abs() < 1e-9);
        }
    }
}

#[test]
fn single_point_matches_the_sweep() {
    let spec = trimer_asym(Sign::Minus, 0, false);
    let curve = sweep_branch(&spec, (2.5, 3.5), DEFAULT_STEP).unwrap();
    let p = point_at(&spec, 2.5).unwrap();
    assert!(state_distance(&p.solution, &curve.points[0].solution) < 1e-9);
    assert_eq!(p.stable(), curve.points[0].stable());
    let d = point_at(&dimer(CaseLabel::AsymmetricII, Sign::Minus), 1.5).unwrap();
    assert!(!d.stable());
    assert!(matches!(
        point_at(&dimer(CaseLabel::AsymmetricII, Sign::Minus), 0.5),
        Err(OligomerError::EmptyBranch { .. })
    ));
}
