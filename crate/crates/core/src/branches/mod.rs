//! Stationary-solution families of the dimer and trimer and the branch
//! specifications used to follow them in `gamma`.

pub mod dimer;
pub mod newton;
pub mod trimer;

use serde::{Deserialize, Serialize};

pub use dimer::{dimer_asymmetric, dimer_special_symmetric, dimer_symmetric};
pub use newton::newton_refine;
pub use trimer::{trimer_asymmetric, trimer_special_symmetric, trimer_symmetric, Reduction};

use crate::error::{OligomerError, Result};
use crate::model::{CaseLabel, Params, Sign, Topology};

/// How a single branch is picked out of its family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BranchSelector {
    /// Dimer closed forms: the sign in front of the surd (amplitude for the
    /// symmetric and asymmetric families, energy for the special one).
    Sign { sign: Sign },
    /// Trimer symmetric/special: position in the root enumeration at
    /// `anchor_gamma`.
    Root { anchor_gamma: f64, index: usize },
    /// Trimer asymmetric: energy root, position among the `A < C` roots at
    /// `anchor_gamma`, and whether the mirror image is followed.
    Mirror {
        anchor_gamma: f64,
        energy: Sign,
        index: usize,
        mirrored: bool,
    },
}

/// A branch identity that survives a sweep in `gamma`: everything except
/// `gamma` (and, for the sum-rule families, `E`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub topology: Topology,
    pub case: CaseLabel,
    pub selector: BranchSelector,
    pub epsilon: f64,
    pub rho_r: f64,
    pub rho_im: f64,
    /// Present exactly for the symmetric family.
    pub energy: Option<f64>,
}

impl BranchSpec {
    pub fn new(
        topology: Topology,
        case: CaseLabel,
        selector: BranchSelector,
        epsilon: f64,
        rho_r: f64,
        rho_im: f64,
        energy: Option<f64>,
    ) -> Result<Self> {
        let spec = Self {
            topology,
            case,
            selector,
            epsilon,
            rho_r,
            rho_im,
            energy,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.case.energy_is_determined(), self.energy) {
            (true, Some(_)) => return Err(OligomerError::EnergyDetermined { case: self.case.as_str() }),
            (false, None) => {
                return Err(OligomerError::InvalidInput(
                    "the symmetric family needs a free propagation constant E".into(),
                ))
            }
            _ => {}
        }
        let ok = match (self.topology, self.selector) {
            (Topology::Dimer, BranchSelector::Sign { .. }) => true,
            (Topology::Trimer, BranchSelector::Root { .. }) => self.case != CaseLabel::AsymmetricII,
            (Topology::Trimer, BranchSelector::Mirror { .. }) => self.case == CaseLabel::AsymmetricII,
            _ => false,
        };
        if !ok {
            return Err(OligomerError::InvalidInput(format!(
                "selector {:?} does not fit a {} {} branch",
                self.selector, self.topology, self.case
            )));
        }
        // reuse the parameter checks
        Params::new(self.topology, self.epsilon, 0.0, self.rho_r, self.rho_im)?;
        if let Some(e) = self.energy {
            if !e.is_finite() {
                return Err(OligomerError::InvalidInput(format!("E must be finite, got {e}")));
            }
        }
        Ok(())
    }

    pub fn params(&self, gamma: f64) -> Params {
        Params {
            topology: self.topology,
            epsilon: self.epsilon,
            gamma,
            rho_r: self.rho_r,
            rho_im: self.rho_im,
            energy: self.energy,
        }
    }

    /// Scalar reduction followed for a trimer branch.
    pub fn reduction(&self) -> Option<Reduction> {
        match (self.topology, self.case, self.selector) {
            (Topology::Trimer, CaseLabel::SymmetricI, _) => Some(Reduction::Symmetric),
            (Topology::Trimer, CaseLabel::SpecialIII, _) => Some(Reduction::Special),
            (Topology::Trimer, CaseLabel::AsymmetricII, BranchSelector::Mirror { energy, .. }) => {
                Some(Reduction::Asymmetric(energy))
            }
            _ => None,
        }
    }

    /// Short file-name friendly label, e.g. `dimer_sym-I_plus` or
    /// `trimer_asym-II_minus_0_mirror`.
    pub fn label(&self) -> String {
        let word = |s: Sign| match s {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        };
        let tail = match self.selector {
            BranchSelector::Sign { sign } => word(sign).to_string(),
            BranchSelector::Root { index, .. } => format!("root{index}"),
            BranchSelector::Mirror {
                energy,
                index,
                mirrored,
                ..
            } => format!("{}_root{index}{}", word(energy), if mirrored { "_mirror" } else { "" }),
        };
        format!("{}_{}_{}", self.topology, self.case, tail)
    }
}
