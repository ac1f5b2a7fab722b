//! Run configuration read from a TOML file.
//!
//! ```toml
//! [params]
//! topology = "dimer"
//! epsilon = 1.0
//! rho_r = -2.0
//! rho_im = 1.0
//! E = 1.0
//! gamma_range = [0.0, 3.0]
//!
//! [command]
//! name = "sweep"
//!
//! [output]
//! directory = "out"
//! formats = ["csv", "json"]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::branches::{BranchSelector, BranchSpec};
use crate::dynamics::{Controls, DEFAULT_PERTURBATION, DEFAULT_SEED};
use crate::error::{OligomerError, Result};
use crate::model::{CaseLabel, Params, Sign, Topology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Sweep,
    Spectrum,
    Evolve,
    Critical,
    Validate,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Sweep => "sweep",
            CommandName::Spectrum => "spectrum",
            CommandName::Evolve => "evolve",
            CommandName::Critical => "critical",
            CommandName::Validate => "validate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub topology: Topology,
    pub epsilon: f64,
    pub rho_r: f64,
    pub rho_im: f64,
    /// Single `gamma` for `spectrum` and `evolve`.
    pub gamma: Option<f64>,
    /// Sweep range for `sweep`.
    pub gamma_range: Option<[f64; 2]>,
    /// Free propagation constant; only the symmetric family takes one.
    #[serde(rename = "E")]
    pub energy: Option<f64>,
}

/// Branch selection. Omitted fields widen the selection for `sweep` and
/// must be given for `spectrum` and `evolve`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandBlock {
    pub name: Option<CommandName>,
    pub case: Option<CaseLabel>,
    /// Dimer: sign in front of the surd.
    pub sign: Option<Sign>,
    /// Trimer: root position at `anchor_gamma`.
    pub root: Option<usize>,
    /// Trimer: where roots are enumerated; defaults to `gamma` or the
    /// middle of `gamma_range`.
    pub anchor_gamma: Option<f64>,
    /// Trimer asymmetric: energy root.
    pub energy_root: Option<Sign>,
    /// Trimer asymmetric: follow the mirror image.
    pub mirrored: Option<bool>,
    /// Dimer sweep: also sweep the `-` special root.
    #[serde(default)]
    pub special_minus: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub blow_up_threshold: f64,
    pub output_dt: f64,
    pub min_step: f64,
    pub seed: u64,
    pub perturbation: f64,
    pub t_end: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let c = Controls::default();
        Self {
            step: crate::continuation::DEFAULT_STEP,
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            blow_up_threshold: c.blow_up_threshold,
            output_dt: c.output_dt,
            min_step: c.min_step,
            seed: DEFAULT_SEED,
            perturbation: DEFAULT_PERTURBATION,
            t_end: 200.0,
        }
    }
}

impl Numerics {
    pub fn controls(&self) -> Controls {
        Controls {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            blow_up_threshold: self.blow_up_threshold,
            output_dt: self.output_dt,
            min_step: self.min_step,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: Option<ParamsBlock>,
    #[serde(default)]
    pub command: CommandBlock,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputBlock,
}

fn config_err(msg: impl Into<String>) -> OligomerError {
    OligomerError::Config(msg.into())
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be finite, got {v}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks everything `command` needs before any work starts.
    pub fn validate(&self, command: CommandName) -> Result<()> {
        if let Some(name) = self.command.name {
            if name != command {
                return Err(config_err(format!(
                    "config is for `{}` but `{}` was requested",
                    name.as_str(),
                    command.as_str()
                )));
            }
        }
        let n = &self.numerics;
        for (name, v) in [
            ("step", n.step),
            ("rel_tol", n.rel_tol),
            ("abs_tol", n.abs_tol),
            ("blow_up_threshold", n.blow_up_threshold),
            ("output_dt", n.output_dt),
            ("min_step", n.min_step),
            ("t_end", n.t_end),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(config_err(format!("numerics.{name} must be positive and finite, got {v}")));
            }
        }
        if !(n.perturbation.is_finite() && n.perturbation >= 0.0) {
            return Err(config_err(format!("numerics.perturbation must be >= 0, got {}", n.perturbation)));
        }
        if self.output.formats.is_empty() {
            return Err(config_err("output.formats must not be empty"));
        }
        if command == CommandName::Validate {
            return Ok(());
        }

        let p = self.params()?;
        for (name, v) in [("epsilon", p.epsilon), ("rho_r", p.rho_r), ("rho_im", p.rho_im)] {
            finite(name, v)?;
        }
        if let Some(e) = p.energy {
            finite("E", e)?;
        }
        if let Some(case) = self.command.case {
            if case.energy_is_determined() && p.energy.is_some() {
                return Err(OligomerError::EnergyDetermined { case: case.as_str() });
            }
        }
        if let Some(a) = self.command.anchor_gamma {
            finite("anchor_gamma", a)?;
        }
        Params::new(p.topology, p.epsilon, 0.0, p.rho_r, p.rho_im)?;
        match command {
            CommandName::Sweep => {
                let [lo, hi] = p.gamma_range.ok_or_else(|| config_err("sweep needs params.gamma_range"))?;
                finite("gamma_range[0]", lo)?;
                finite("gamma_range[1]", hi)?;
                if !(lo < hi) {
                    return Err(config_err(format!("gamma_range needs min < max, got [{lo}, {hi}]")));
                }
            }
            CommandName::Spectrum | CommandName::Evolve => {
                let g = p.gamma.ok_or_else(|| config_err("spectrum and evolve need params.gamma"))?;
                finite("gamma", g)?;
                self.single_spec()?;
            }
            CommandName::Critical | CommandName::Validate => {}
        }
        Ok(())
    }

    pub fn params(&self) -> Result<&ParamsBlock> {
        self.params.as_ref().ok_or_else(|| config_err("missing [params] block"))
    }

    fn spec(&self, case: CaseLabel, selector: BranchSelector) -> Result<BranchSpec> {
        let p = self.params()?;
        let energy = if case.energy_is_determined() { None } else { p.energy };
        BranchSpec::new(p.topology, case, selector, p.epsilon, p.rho_r, p.rho_im, energy)
    }

    fn anchor(&self) -> Result<f64> {
        let p = self.params()?;
        match (self.command.anchor_gamma, p.gamma, p.gamma_range) {
            (Some(a), _, _) => Ok(a),
            (None, Some(g), _) => Ok(g),
            (None, None, Some([lo, hi])) => Ok(0.5 * (lo + hi)),
            _ => Err(config_err("cannot place the trimer anchor: give anchor_gamma, gamma or gamma_range")),
        }
    }

    /// The one branch `spectrum` and `evolve` act on.
    pub fn single_spec(&self) -> Result<BranchSpec> {
        let p = self.params()?;
        let c = &self.command;
        let case = c.case.ok_or_else(|| config_err("command.case is required"))?;
        if case == CaseLabel::SymmetricI && p.energy.is_none() {
            return Err(config_err("the symmetric family needs params.E"));
        }
        let selector = match p.topology {
            Topology::Dimer => BranchSelector::Sign {
                sign: c.sign.ok_or_else(|| config_err("command.sign is required for a dimer branch"))?,
            },
            Topology::Trimer => {
                let index = c.root.ok_or_else(|| config_err("command.root is required for a trimer branch"))?;
                let anchor_gamma = self.anchor()?;
                if case == CaseLabel::AsymmetricII {
                    BranchSelector::Mirror {
                        anchor_gamma,
                        energy: c.energy_root.ok_or_else(|| config_err("command.energy_root is required"))?,
                        index,
                        mirrored: c.mirrored.unwrap_or(false),
                    }
                } else {
                    BranchSelector::Root { anchor_gamma, index }
                }
            }
        };
        self.spec(case, selector)
    }

    /// Every branch selected for `sweep`, in a fixed order. Trimer roots
    /// are enumerated at the anchor; families absent there are skipped.
    pub fn sweep_specs(&self) -> Result<Vec<BranchSpec>> {
        let p = self.params()?;
        let c = &self.command;
        let cases: Vec<CaseLabel> = match c.case {
            Some(CaseLabel::SymmetricI) if p.energy.is_none() => {
                return Err(config_err("the symmetric family needs params.E"))
            }
            Some(case) => vec![case],
            None => [CaseLabel::SymmetricI, CaseLabel::SpecialIII, CaseLabel::AsymmetricII]
                .into_iter()
                .filter(|k| *k != CaseLabel::SymmetricI || p.energy.is_some())
                .collect(),
        };
        let mut specs = Vec::new();
        for case in cases {
            match p.topology {
                Topology::Dimer => {
                    let signs: Vec<Sign> = match (c.sign, case) {
                        (Some(s), _) => vec![s],
                        (None, CaseLabel::SymmetricI) => vec![Sign::Minus, Sign::Plus],
                        (None, CaseLabel::SpecialIII) if !c.special_minus => vec![Sign::Plus],
                        (None, _) => vec![Sign::Plus, Sign::Minus],
                    };
                    for sign in signs {
                        specs.push(self.spec(case, BranchSelector::Sign { sign })?);
                    }
                }
                Topology::Trimer => specs.extend(self.trimer_specs(case)?),
            }
        }
        if specs.is_empty() {
            return Err(OligomerError::EmptyBranch {
                branch: "no branch selected".into(),
                lo: p.gamma_range.map_or(f64::NAN, |r| r[0]),
                hi: p.gamma_range.map_or(f64::NAN, |r| r[1]),
            });
        }
        Ok(specs)
    }

    fn trimer_specs(&self, case: CaseLabel) -> Result<Vec<BranchSpec>> {
        use crate::branches::trimer::enumerate;
        use crate::branches::Reduction;
        let c = &self.command;
        let anchor_gamma = self.anchor()?;
        let pick = |n: usize| -> Vec<usize> {
            match c.root {
                Some(i) => (i < n).then_some(i).into_iter().collect(),
                None => (0..n).collect(),
            }
        };
        let mut specs = Vec::new();
        if case == CaseLabel::AsymmetricII {
            let energies = c.energy_root.map_or(vec![Sign::Plus, Sign::Minus], |s| vec![s]);
            let mirrors = c.mirrored.map_or(vec![false, true], |m| vec![m]);
            for energy in energies {
                let probe = self.spec(case, BranchSelector::Mirror { anchor_gamma, energy, index: 0, mirrored: false })?;
                let n = enumerate(Reduction::Asymmetric(energy), &probe.params(anchor_gamma))?.len();
                for index in pick(n) {
                    for &mirrored in &mirrors {
                        specs.push(self.spec(case, BranchSelector::Mirror { anchor_gamma, energy, index, mirrored })?);
                    }
                }
            }
        } else {
            let probe = self.spec(case, BranchSelector::Root { anchor_gamma, index: 0 })?;
            let red = probe.reduction().expect("trimer reduction");
            let n = enumerate(red, &probe.params(anchor_gamma))?.len();
            for index in pick(n) {
                specs.push(self.spec(case, BranchSelector::Root { anchor_gamma, index })?);
            }
        }
        Ok(specs)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIMER: &str = r#"
[params]
topology = "dimer"
epsilon = 1.0
rho_r = -2.0
rho_im = 1.0
E = 1.0
gamma_range = [0.0, 3.0]
"#;

    #[test]
    fn dimer_sweep_selects_the_five_drawn_branches() {
        let cfg = RunConfig::parse(DIMER).unwrap();
        cfg.validate(CommandName::Sweep).unwrap();
        let labels: Vec<String> = cfg.sweep_specs().unwrap().iter().map(|s| s.label()).collect();
        assert_eq!(
            labels,
            [
                "dimer_sym-I_minus",
                "dimer_sym-I_plus",
                "dimer_special-III_plus",
                "dimer_asym-II_plus",
                "dimer_asym-II_minus"
            ]
        );
        let mut cfg = cfg;
        cfg.command.special_minus = true;
        assert_eq!(cfg.sweep_specs().unwrap().len(), 6);
    }

    #[test]
    fn energy_for_a_determined_case_is_rejected() {
        let text = format!("{DIMER}\n[command]\ncase = \"asym-II\"\nsign = \"-\"\n");
        let err = RunConfig::parse(&text).unwrap().validate(CommandName::Sweep).unwrap_err();
        assert_eq!(err.kind(), "energy-determined");
        assert!(err.to_string().contains("asym-II"));
    }

    #[test]
    fn malformed_configs_are_rejected() {
        let bad_range = DIMER.replace("[0.0, 3.0]", "[3.0, 0.0]");
        assert!(RunConfig::parse(&bad_range).unwrap().validate(CommandName::Sweep).is_err());
        let unknown = format!("{DIMER}\n[numerics]\nstepp = 0.1\n");
        assert_eq!(RunConfig::parse(&unknown).unwrap_err().kind(), "config");
        let nan = DIMER.replace("epsilon = 1.0", "epsilon = nan");
        assert!(RunConfig::parse(&nan).unwrap().validate(CommandName::Critical).is_err());
        let no_gamma = RunConfig::parse(DIMER).unwrap();
        assert!(no_gamma.validate(CommandName::Spectrum).is_err());
        let wrong_name = format!("{DIMER}\n[command]\nname = \"evolve\"\n");
        assert!(RunConfig::parse(&wrong_name).unwrap().validate(CommandName::Sweep).is_err());
        assert!(RunConfig::parse("[command]\nname = \"validate\"\n").unwrap().validate(CommandName::Validate).is_ok());
    }

    #[test]
    fn trimer_sweep_enumerates_at_the_anchor() {
        let text = r#"
[params]
topology = "trimer"
epsilon = 1.0
rho_r = -1.0
rho_im = 1.0
gamma_range = [1.5, 5.0]

[command]
case = "asym-II"
anchor_gamma = 3.0
"#;
        let cfg = RunConfig::parse(text).unwrap();
        cfg.validate(CommandName::Sweep).unwrap();
        assert_eq!(cfg.sweep_specs().unwrap().len(), 6);
    }
}
