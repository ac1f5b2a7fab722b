//! Model constants, state vectors and the evolution equations of the
//! gain/loss dimer and trimer.
//!
//! Both systems are written as `i du_j/dt = N_j(u)` where `N` collects the
//! coupling, the Kerr term with its nonlinear gain/loss part, and the linear
//! gain/loss. For the dimer
//!
//! ```text
//! N_u = -eps v + (rho_r - i rho_im)|u|^2 u + i gamma u
//! N_v = -eps u + (rho_r + i rho_im)|v|^2 v - i gamma v
//! ```
//!
//! and for the trimer the outer sites have the same form while the middle
//! site is inert with a fixed focusing coefficient:
//! `N_v = -eps (u + w) - |v|^2 v`. Note that this coefficient is `-1`
//! regardless of `rho_r`; the two coincide for the parameter sets with
//! `rho_r = -1`.
//!
//! A stationary state `u_j(t) = a_j e^{iEt}` satisfies `E a_j + N_j(a) = 0`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OligomerError, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Dimer,
    Trimer,
}

impl Topology {
    pub fn sites(self) -> usize {
        match self {
            Topology::Dimer => 2,
            Topology::Trimer => 3,
        }
    }

    /// Index of the site whose phase is pinned to zero.
    pub fn gauge_site(self) -> usize {
        match self {
            Topology::Dimer => 0,
            Topology::Trimer => 1,
        }
    }

    /// Index of the site with nonlinear gain and linear loss.
    pub fn last_site(self) -> usize {
        self.sites() - 1
    }

    pub fn role(self, site: usize) -> SiteRole {
        if site == 0 {
            SiteRole::NonlinearLossLinearGain
        } else if site == self.last_site() {
            SiteRole::NonlinearGainLinearLoss
        } else {
            SiteRole::Inert
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Dimer => "dimer",
            Topology::Trimer => "trimer",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteRole {
    NonlinearLossLinearGain,
    Inert,
    NonlinearGainLinearLoss,
}

/// The model constants. `energy` is the propagation constant `E`; it is an
/// input only for the symmetric family, the other families determine it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub topology: Topology,
    pub epsilon: f64,
    pub gamma: f64,
    pub rho_r: f64,
    pub rho_im: f64,
    pub energy: Option<f64>,
}

impl Params {
    pub fn new(topology: Topology, epsilon: f64, gamma: f64, rho_r: f64, rho_im: f64) -> Result<Self> {
        let p = Self {
            topology,
            epsilon,
            gamma,
            rho_r,
            rho_im,
            energy: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn dimer(epsilon: f64, gamma: f64, rho_r: f64, rho_im: f64) -> Result<Self> {
        Self::new(Topology::Dimer, epsilon, gamma, rho_r, rho_im)
    }

    pub fn trimer(epsilon: f64, gamma: f64, rho_r: f64, rho_im: f64) -> Result<Self> {
        Self::new(Topology::Trimer, epsilon, gamma, rho_r, rho_im)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("epsilon", self.epsilon),
            ("gamma", self.gamma),
            ("rho_r", self.rho_r),
            ("rho_im", self.rho_im),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(OligomerError::InvalidInput(format!("{name} must be finite, got {v}")));
            }
        }
        if let Some(e) = self.energy {
            if !e.is_finite() {
                return Err(OligomerError::InvalidInput(format!("E must be finite, got {e}")));
            }
        }
        if self.epsilon <= 0.0 {
            return Err(OligomerError::InvalidInput(format!(
                "coupling epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = Some(energy);
        self
    }

    pub fn without_energy(mut self) -> Self {
        self.energy = None;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn require_energy(&self) -> Result<f64> {
        self.energy
            .ok_or_else(|| OligomerError::InvalidInput("the symmetric family needs a free propagation constant E".into()))
    }

    /// `(rho_r - i rho_im, rho_r + i rho_im)`: nonlinear coefficients of the
    /// first and last site.
    fn kerr(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.rho_r, -self.rho_im),
            Complex64::new(self.rho_r, self.rho_im),
        )
    }

    /// Splits `N(u) = L u + diag(K_j |u_j|^2) u` into the linear matrix `L`
    /// (row-major) and the on-site cubic coefficients `K`.
    pub fn operator_parts(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let (k_first, k_last) = self.kerr();
        let eps = Complex64::new(-self.epsilon, 0.0);
        let g = I * self.gamma;
        let z = Complex64::new(0.0, 0.0);
        match self.topology {
            Topology::Dimer => (vec![g, eps, eps, -g], vec![k_first, k_last]),
            Topology::Trimer => (
                vec![g, eps, z, eps, z, eps, z, eps, -g],
                vec![k_first, Complex64::new(-1.0, 0.0), k_last],
            ),
        }
    }

    /// Evaluates `N(u)` from `i du/dt = N(u)` into `out`.
    pub fn operator_into(&self, sites: &[Complex64], out: &mut [Complex64]) {
        let (k_first, k_last) = self.kerr();
        let eps = self.epsilon;
        let g = self.gamma;
        match self.topology {
            Topology::Dimer => {
                let (u, v) = (sites[0], sites[1]);
                out[0] = -eps * v + k_first * u.norm_sqr() * u + I * g * u;
                out[1] = -eps * u + k_last * v.norm_sqr() * v - I * g * v;
            }
            Topology::Trimer => {
                let (u, v, w) = (sites[0], sites[1], sites[2]);
                out[0] = -eps * v + k_first * u.norm_sqr() * u + I * g * u;
                out[1] = -eps * (u + w) - v.norm_sqr() * v;
                out[2] = -eps * v + k_last * w.norm_sqr() * w - I * g * w;
            }
        }
    }

    /// `du/dt = -i N(u)` without allocation.
    pub fn rhs_into(&self, sites: &[Complex64], out: &mut [Complex64]) {
        self.operator_into(sites, out);
        for z in out.iter_mut() {
            *z *= -I;
        }
    }
}

/// Complex site amplitudes `(u, v[, w])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub topology: Topology,
    pub sites: Vec<Complex64>,
}

impl StateVector {
    pub fn new(topology: Topology, sites: Vec<Complex64>) -> Result<Self> {
        if sites.len() != topology.sites() {
            return Err(OligomerError::InvalidInput(format!(
                "{topology} state needs {} sites, got {}",
                topology.sites(),
                sites.len()
            )));
        }
        Ok(Self { topology, sites })
    }

    pub fn zeros(topology: Topology) -> Self {
        Self {
            topology,
            sites: vec![Complex64::new(0.0, 0.0); topology.sites()],
        }
    }

    pub fn role(&self, site: usize) -> SiteRole {
        self.topology.role(site)
    }

    pub fn site_powers(&self) -> Vec<f64> {
        self.sites.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.sites.iter().map(|z| z.norm()).collect()
    }
}

/// Time derivative of every site.
pub fn evaluate_rhs(state: &StateVector, params: &Params) -> Result<Vec<Complex64>> {
    if state.topology != params.topology || state.sites.len() != params.topology.sites() {
        return Err(OligomerError::InvalidInput(format!(
            "state has {} sites but the parameters describe a {}",
            state.sites.len(),
            params.topology
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); state.sites.len()];
    params.rhs_into(&state.sites, &mut out);
    Ok(out)
}

pub fn total_power(state: &StateVector) -> f64 {
    state.sites.iter().map(|z| z.norm_sqr()).sum()
}

/// Rate of change of the total power implied by the dimer equations:
/// `2 gamma (|u|^2 - |v|^2) - 2 rho_im (|u|^4 - |v|^4)`. For the trimer the
/// inert middle site does not contribute.
pub fn power_balance(state: &StateVector, params: &Params) -> f64 {
    let first = state.sites[0].norm_sqr();
    let last = state.sites[state.topology.last_site()].norm_sqr();
    2.0 * params.gamma * (first - last) - 2.0 * params.rho_im * (first * first - last * last)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Equal outer amplitudes, sum rule not satisfied.
    #[serde(rename = "sym-I")]
    SymmetricI,
    /// Sum rule `A^2 + C^2 = gamma/rho_im` with unequal outer amplitudes.
    #[serde(rename = "asym-II")]
    AsymmetricII,
    /// Equal outer amplitudes on the sum rule.
    #[serde(rename = "special-III")]
    SpecialIII,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::SymmetricI => "sym-I",
            CaseLabel::AsymmetricII => "asym-II",
            CaseLabel::SpecialIII => "special-III",
        }
    }

    /// Whether `E` follows from the other constants for this family.
    pub fn energy_is_determined(self) -> bool {
        !matches!(self, CaseLabel::SymmetricI)
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// Which root of a family a solution came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SignChoice {
    /// Sign in front of the surd for the outer amplitude (dimer I and II).
    Amplitude { sign: Sign },
    /// Root of the energy quadratic (dimer III).
    Energy { sign: Sign },
    /// Trimer II: root of the energy quadratic and whether the solution is
    /// the mirror image (`A > C`) of the enumerated root with `A < C`.
    Mirror { energy: Sign, mirrored: bool },
    /// Roots identified only by their position in the deterministic
    /// enumeration order (trimer I and III).
    Ordinal,
}

impl fmt::Display for SignChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignChoice::Amplitude { sign } => write!(f, "amp{}", sign.symbol()),
            SignChoice::Energy { sign } => write!(f, "energy{}", sign.symbol()),
            SignChoice::Mirror { energy, mirrored } => {
                write!(f, "energy{}{}", energy.symbol(), if *mirrored { "-mirror" } else { "" })
            }
            SignChoice::Ordinal => f.write_str("ordinal"),
        }
    }
}

/// A stationary state `a_j e^{iEt}` stored as complex amplitudes with the
/// gauge site real and non-negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarySolution {
    pub topology: Topology,
    pub sites: Vec<Complex64>,
    pub energy: f64,
    pub case: CaseLabel,
    pub sign: SignChoice,
    /// Position within the enumeration of `(case, sign)` roots.
    pub root_index: usize,
    /// Set for degenerate double roots at termination points.
    pub critical: bool,
}

impl StationarySolution {
    pub fn from_polar(
        topology: Topology,
        amplitudes: &[f64],
        phases: &[f64],
        energy: f64,
        case: CaseLabel,
        sign: SignChoice,
    ) -> Self {
        let sites = amplitudes
            .iter()
            .zip(phases)
            .map(|(&r, &phi)| Complex64::from_polar(r, phi))
            .collect();
        Self {
            topology,
            sites,
            energy,
            case,
            sign,
            root_index: 0,
            critical: false,
        }
    }

    pub fn zero(topology: Topology, energy: f64, case: CaseLabel, sign: SignChoice) -> Self {
        let n = topology.sites();
        Self::from_polar(topology, &vec![0.0; n], &vec![0.0; n], energy, case, sign)
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.sites.iter().map(|z| z.norm()).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.sites.iter().map(|z| if z.norm() == 0.0 { 0.0 } else { z.arg() }).collect()
    }

    pub fn state(&self) -> StateVector {
        StateVector {
            topology: self.topology,
            sites: self.sites.clone(),
        }
    }

    /// Stable identifier built from the family, the root selection and the
    /// enumeration index.
    pub fn id(&self) -> String {
        format!("{}/{}/{}/{}", self.topology, self.case, self.sign, self.root_index)
    }

    /// The mirror image `A <-> C` with the phase relations reflected about
    /// the gauge site (trimer) or the first site (dimer).
    pub fn mirror(&self) -> Self {
        let mut sites: Vec<Complex64> = self.sites.iter().rev().map(|z| z.conj()).collect();
        if self.topology == Topology::Dimer {
            // re-gauge so the first site is real again
            let phase = sites[0].arg();
            let rot = Complex64::from_polar(1.0, -phase);
            for z in &mut sites {
                *z *= rot;
            }
        }
        let sign = match self.sign {
            SignChoice::Mirror { energy, mirrored } => SignChoice::Mirror {
                energy,
                mirrored: !mirrored,
            },
            SignChoice::Amplitude { sign } if self.case == CaseLabel::AsymmetricII => {
                SignChoice::Amplitude { sign: sign.flip() }
            }
            other => other,
        };
        Self {
            sites,
            sign,
            ..self.clone()
        }
    }

    /// Rotates so the gauge site is real and non-negative.
    pub fn regauge(&mut self) {
        let g = self.sites[self.topology.gauge_site()];
        if g.norm() > 0.0 {
            let rot = Complex64::from_polar(1.0, -g.arg());
            for z in &mut self.sites {
                *z *= rot;
            }
            let gs = self.topology.gauge_site();
            self.sites[gs] = Complex64::new(self.sites[gs].norm(), 0.0);
        }
    }
}

/// Complex stationary equations `E a_j + N_j(a)` evaluated at the solution.
pub fn stationary_equations(sol: &StationarySolution, params: &Params) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); sol.sites.len()];
    params.operator_into(&sol.sites, &mut out);
    for (o, a) in out.iter_mut().zip(&sol.sites) {
        *o += sol.energy * a;
    }
    out
}

/// Max-norm over the real and imaginary parts of the stationary equations,
/// using the solution's own `E`. Infinite when the topologies disagree.
pub fn stationary_residual(sol: &StationarySolution, params: &Params) -> f64 {
    if sol.topology != params.topology || sol.sites.len() != params.topology.sites() {
        return f64::INFINITY;
    }
    stationary_equations(sol, params)
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max)
}

/// Factorized condition from the imaginary parts: dimer
/// `(A^2 - B^2)[rho_im (A^2 + B^2) - gamma]`, trimer
/// `(A^2 - C^2)[gamma - rho_im (A^2 + C^2)]`.
pub fn factorized_condition(sol: &StationarySolution, params: &Params) -> f64 {
    let first = sol.sites[0].norm_sqr();
    let last = sol.sites[sol.topology.last_site()].norm_sqr();
    match sol.topology {
        Topology::Dimer => (first - last) * (params.rho_im * (first + last) - params.gamma),
        Topology::Trimer => (first - last) * (params.gamma - params.rho_im * (first + last)),
    }
}
