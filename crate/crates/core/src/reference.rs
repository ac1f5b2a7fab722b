//! The reference parameter sets and the lookup from each branch to the
//! colour/marker used for it in the published bifurcation diagrams.
//!
//! Branch identity is the [`BranchSpec`]; the colours are only labels. For
//! the trimer, colours were matched to branches by their stability
//! signature and amplitude ordering at the anchor `gamma`.

use serde::Serialize;

use crate::branches::{BranchSelector, BranchSpec};
use crate::model::{CaseLabel, Sign, Topology};

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceBranch {
    pub spec: BranchSpec,
    /// Figure label, e.g. `"red diamonds"`; mirror images that are not
    /// drawn are labelled `"mirror of ..."`.
    pub color: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceSet {
    pub name: &'static str,
    pub topology: Topology,
    pub epsilon: f64,
    pub rho_r: f64,
    pub rho_im: f64,
    /// Free propagation constant of the symmetric family.
    pub energy: Option<f64>,
    pub gamma_range: (f64, f64),
    /// `gamma` at which the time evolutions are shown.
    pub dynamics_gamma: f64,
    pub branches: Vec<ReferenceBranch>,
}

fn spec(
    topology: Topology,
    case: CaseLabel,
    selector: BranchSelector,
    (epsilon, rho_r, rho_im): (f64, f64, f64),
    energy: Option<f64>,
) -> BranchSpec {
    BranchSpec::new(topology, case, selector, epsilon, rho_r, rho_im, energy).expect("reference specs are valid")
}

const DIMER: (f64, f64, f64) = (1.0, -2.0, 1.0);
const TRIMER: (f64, f64, f64) = (1.0, -1.0, 1.0);
const LINEAR_TRIMER: (f64, f64, f64) = (1.0, -1.0, 0.0);

/// Dimer at `eps = 1, rho_r = -2, rho_im = 1, E = 1`: the five drawn
/// branches, plus the `-` special root when `special_minus` is set.
pub fn dimer_set(special_minus: bool) -> ReferenceSet {
    let sign = |sign| BranchSelector::Sign { sign };
    let d = |case, s, energy| spec(Topology::Dimer, case, sign(s), DIMER, energy);
    let mut branches = vec![
        ReferenceBranch { spec: d(CaseLabel::SymmetricI, Sign::Minus, Some(1.0)), color: "blue stars" },
        ReferenceBranch { spec: d(CaseLabel::SymmetricI, Sign::Plus, Some(1.0)), color: "red diamonds" },
        ReferenceBranch { spec: d(CaseLabel::SpecialIII, Sign::Plus, None), color: "black squares" },
        ReferenceBranch { spec: d(CaseLabel::AsymmetricII, Sign::Plus, None), color: "green circles" },
        ReferenceBranch { spec: d(CaseLabel::AsymmetricII, Sign::Minus, None), color: "magenta crosses" },
    ];
    if special_minus {
        branches.push(ReferenceBranch {
            spec: d(CaseLabel::SpecialIII, Sign::Minus, None),
            color: "undrawn (special, - energy root)",
        });
    }
    ReferenceSet {
        name: "dimer",
        topology: Topology::Dimer,
        epsilon: DIMER.0,
        rho_r: DIMER.1,
        rho_im: DIMER.2,
        energy: Some(1.0),
        gamma_range: (0.0, 3.0),
        dynamics_gamma: 1.5,
        branches,
    }
}

fn root(case: CaseLabel, anchor_gamma: f64, index: usize, constants: (f64, f64, f64), energy: Option<f64>) -> BranchSpec {
    spec(Topology::Trimer, case, BranchSelector::Root { anchor_gamma, index }, constants, energy)
}

/// Symmetric trimer states at `E = 1`; roots ordered by amplitude at
/// `gamma = 1.5`.
pub fn trimer_symmetric_set() -> ReferenceSet {
    let r = |index| root(CaseLabel::SymmetricI, 1.5, index, TRIMER, Some(1.0));
    ReferenceSet {
        name: "trimer-symmetric",
        topology: Topology::Trimer,
        epsilon: TRIMER.0,
        rho_r: TRIMER.1,
        rho_im: TRIMER.2,
        energy: Some(1.0),
        gamma_range: (0.0, 3.0),
        dynamics_gamma: 1.5,
        branches: vec![
            ReferenceBranch { spec: r(0), color: "blue stars" },
            ReferenceBranch { spec: r(1), color: "red diamonds" },
            ReferenceBranch { spec: r(2), color: "black squares" },
        ],
    }
}

/// Asymmetric trimer states, anchored at `gamma = 3`. The stable branch
/// with large `A` is the mirror image of the first `+` root.
pub fn trimer_asymmetric_set() -> ReferenceSet {
    let m = |energy, index, mirrored| {
        spec(
            Topology::Trimer,
            CaseLabel::AsymmetricII,
            BranchSelector::Mirror {
                anchor_gamma: 3.0,
                energy,
                index,
                mirrored,
            },
            TRIMER,
            None,
        )
    };
    ReferenceSet {
        name: "trimer-asymmetric",
        topology: Topology::Trimer,
        epsilon: TRIMER.0,
        rho_r: TRIMER.1,
        rho_im: TRIMER.2,
        energy: None,
        gamma_range: (1.5, 5.0),
        dynamics_gamma: 3.0,
        branches: vec![
            ReferenceBranch { spec: m(Sign::Plus, 0, true), color: "blue stars" },
            ReferenceBranch { spec: m(Sign::Minus, 0, false), color: "red diamonds" },
            ReferenceBranch { spec: m(Sign::Plus, 1, false), color: "black squares" },
            ReferenceBranch { spec: m(Sign::Plus, 0, false), color: "mirror of blue stars" },
            ReferenceBranch { spec: m(Sign::Minus, 0, true), color: "mirror of red diamonds" },
            ReferenceBranch { spec: m(Sign::Plus, 1, true), color: "mirror of black squares" },
        ],
    }
}

/// Special symmetric trimer states, ordered by `E` at `gamma = 0.5`. The
/// two low-`gamma` branches share their stability signature, so which of
/// them is drawn red and which black is a convention.
pub fn trimer_special_set() -> ReferenceSet {
    let r = |index| root(CaseLabel::SpecialIII, 0.5, index, TRIMER, None);
    ReferenceSet {
        name: "trimer-special",
        topology: Topology::Trimer,
        epsilon: TRIMER.0,
        rho_r: TRIMER.1,
        rho_im: TRIMER.2,
        energy: None,
        gamma_range: (0.05, 2.5),
        dynamics_gamma: 0.5,
        branches: vec![
            ReferenceBranch { spec: r(0), color: "blue stars" },
            ReferenceBranch { spec: r(1), color: "green circles" },
            ReferenceBranch { spec: r(2), color: "red diamonds" },
            ReferenceBranch { spec: r(3), color: "black squares" },
        ],
    }
}

/// Trimer without nonlinear gain/loss at `E = 1`, anchored at
/// `gamma = 1.02` where all three symmetric branches coexist.
pub fn linear_trimer_set() -> ReferenceSet {
    let r = |index| root(CaseLabel::SymmetricI, 1.02, index, LINEAR_TRIMER, Some(1.0));
    ReferenceSet {
        name: "linear-trimer",
        topology: Topology::Trimer,
        epsilon: LINEAR_TRIMER.0,
        rho_r: LINEAR_TRIMER.1,
        rho_im: LINEAR_TRIMER.2,
        energy: Some(1.0),
        gamma_range: (0.5, 2.0),
        dynamics_gamma: 1.02,
        branches: vec![
            ReferenceBranch { spec: r(0), color: "solid (emerges from zero amplitude)" },
            ReferenceBranch { spec: r(1), color: "dashed" },
            ReferenceBranch { spec: r(2), color: "dash-dotted" },
        ],
    }
}

/// The four sets with nonlinear gain/loss.
pub fn nonlinear_sets() -> Vec<ReferenceSet> {
    vec![dimer_set(false), trimer_symmetric_set(), trimer_asymmetric_set(), trimer_special_set()]
}

impl ReferenceSet {
    pub fn branch(&self, color: &str) -> Option<&ReferenceBranch> {
        self.branches.iter().find(|b| b.color == color)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branches::trimer::enumerate;
    use crate::linearization::analyze;

    #[test]
    fn every_reference_spec_validates() {
        for set in nonlinear_sets().into_iter().chain([dimer_set(true), linear_trimer_set()]) {
            for b in &set.branches {
                b.spec.validate().unwrap();
                assert_eq!(b.spec.topology, set.topology);
            }
        }
        assert_eq!(dimer_set(false).branches.len(), 5);
        assert_eq!(dimer_set(true).branches.len(), 6);
    }

    #[test]
    fn trimer_asymmetric_colours_follow_the_amplitude_description() {
        let set = trimer_asymmetric_set();
        let params = set.branches[0].spec.params(3.0);
        let roots = |sign| enumerate(crate::branches::Reduction::Asymmetric(sign), &params).unwrap();
        // blue: large A, small B and C; and dynamically stable
        let blue = roots(Sign::Plus)[0].1.mirror();
        let a = blue.amplitudes();
        assert!(a[0] > a[1] && a[0] > a[2]);
        assert!(analyze(&blue, &params).unwrap().max_real() <= 1e-7);
        // red and black: small A
        for sol in [&roots(Sign::Minus)[0].1, &roots(Sign::Plus)[1].1] {
            let a = sol.amplitudes();
            assert!(a[0] < a[1] && a[0] < a[2]);
            assert!(analyze(sol, &params).unwrap().max_real() > 0.1);
        }
    }
}
