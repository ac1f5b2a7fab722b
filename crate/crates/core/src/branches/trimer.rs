//! Stationary states of the trimer, found by reducing each family to one
//! real scalar equation, scanning it for sign changes and polishing the
//! reconstructed states with Newton.
//!
//! With the middle site real (`b = B`), the outer equations give
//! `B^2 = A^2 [(E + rho_r A^2)^2 + (gamma - rho_im A^2)^2] / eps^2` (and the
//! same with `C`), and the real part of the middle equation becomes
//!
//! ```text
//! B^4 - E B^2 + E (A^2 + C^2) + rho_r (A^4 + C^4) = 0.
//! ```
//!
//! * symmetric (`A = C`, `E` free): scalar unknown `A`;
//! * asymmetric (`A^2 + C^2 = S = gamma/rho_im`): equating the two `B^2`
//!   expressions fixes `E = -rho_r S ± sqrt(q A^2 C^2)`; scalar unknown
//!   `A^2 / S` on `(0, 1/2)`, the other half being the mirror images;
//! * special symmetric (`A^2 = C^2 = S/2`): scalar unknown `E`.

use num_complex::Complex64;

use crate::branches::newton::newton_refine;
use crate::error::{OligomerError, Result};
use crate::model::{stationary_residual, CaseLabel, Params, Sign, SignChoice, StationarySolution, Topology};
use crate::roots::{scan_roots, Poly, ScannedRoot};

/// Grid nodes used to enumerate the roots of a reduced equation.
pub const SCAN_NODES: usize = 2000;
const TRIG_CHECK: f64 = 1e-9;
const ACCEPT_RESIDUAL: f64 = 1e-10;
/// Lower end of the asymmetric scan; `A = 0` is a spurious root of the
/// reduced equation (the phase relations divide by `B`).
const ASYM_FLOOR: f64 = 1e-9;
/// Roots closer than this to the symmetric point belong to the special family.
const ASYM_SEPARATION: f64 = 1e-7;

/// One of the three scalar reductions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reduction {
    Symmetric,
    Asymmetric(Sign),
    Special,
}

fn q(params: &Params) -> f64 {
    params.rho_r * params.rho_r + params.rho_im * params.rho_im
}

/// `B^2` implied by an outer amplitude squared `x` at energy `e`.
fn middle_power(params: &Params, x: f64, e: f64) -> f64 {
    let re = e + params.rho_r * x;
    let im = params.gamma - params.rho_im * x;
    x * (re * re + im * im) / (params.epsilon * params.epsilon)
}

impl Reduction {
    pub fn case(self) -> CaseLabel {
        match self {
            Reduction::Symmetric => CaseLabel::SymmetricI,
            Reduction::Asymmetric(_) => CaseLabel::AsymmetricII,
            Reduction::Special => CaseLabel::SpecialIII,
        }
    }

    /// Polynomial in `x = A^2` whose positive roots are the symmetric
    /// states: `x p(x)^2 - E p(x) + 2E + 2 rho_r x` with
    /// `p(x) = B^2 / A^2`.
    fn symmetric_poly(params: &Params, e: f64) -> Poly {
        let e2 = params.epsilon * params.epsilon;
        let p = Poly::new(vec![
            (e * e + params.gamma * params.gamma) / e2,
            2.0 * (e * params.rho_r - params.gamma * params.rho_im) / e2,
            q(params) / e2,
        ]);
        let x = Poly::new(vec![0.0, 1.0]);
        x.mul(&p)
            .mul(&p)
            .add(&p.scale(-e))
            .add(&Poly::new(vec![2.0 * e, 2.0 * params.rho_r]))
    }

    /// Quartic in `E` whose real roots are the special symmetric states.
    fn special_poly(params: &Params) -> Poly {
        let s = params.gamma / params.rho_im;
        let x = 0.5 * s;
        let c = x / (params.epsilon * params.epsilon);
        let y = Poly::new(vec![
            c * (params.rho_r * params.rho_r * x * x + 0.25 * params.gamma * params.gamma),
            c * 2.0 * params.rho_r * x,
            c,
        ]);
        y.mul(&y)
            .add(&y.mul(&Poly::new(vec![0.0, -1.0])))
            .add(&Poly::new(vec![0.5 * params.rho_r * s * s, s]))
    }

    /// Interval of the reduced coordinate that contains every root.
    pub fn domain(self, params: &Params) -> Result<(f64, f64)> {
        match self {
            Reduction::Symmetric => {
                let e = params.require_energy()?;
                let bound = Self::symmetric_poly(params, e).root_bound();
                Ok((0.0, bound.sqrt() * 1.01 + 1e-3))
            }
            Reduction::Asymmetric(_) => Ok((ASYM_FLOOR, 0.5)),
            Reduction::Special => {
                let b = Self::special_poly(params).root_bound() * 1.01 + 1e-3;
                Ok((-b, b))
            }
        }
    }

    /// The reduced scalar equation at coordinate `s`.
    pub fn residual(self, params: &Params, s: f64) -> f64 {
        match self {
            Reduction::Symmetric => {
                let e = params.energy.unwrap_or(f64::NAN);
                let x = s * s;
                // B^2 / A^2
                let re = e + params.rho_r * x;
                let im = params.gamma - params.rho_im * x;
                let p = (re * re + im * im) / (params.epsilon * params.epsilon);
                x * p * p - e * p + 2.0 * e + 2.0 * params.rho_r * x
            }
            Reduction::Asymmetric(_) => {
                let (x_a, x_c, e) = self.asymmetric_coords(params, s);
                let y = middle_power(params, x_a, e);
                y * y - e * y + e * (x_a + x_c) + params.rho_r * (x_a * x_a + x_c * x_c)
            }
            Reduction::Special => {
                let x = 0.5 * params.gamma / params.rho_im;
                let y = middle_power(params, x, s);
                y * y - s * y + s * 2.0 * x + 2.0 * params.rho_r * x * x
            }
        }
    }

    /// `(A^2, C^2, E)` at scaled coordinate `u = A^2 / S`.
    fn asymmetric_coords(self, params: &Params, u: f64) -> (f64, f64, f64) {
        let sigma = match self {
            Reduction::Asymmetric(s) => s.value(),
            _ => 0.0,
        };
        let s = params.gamma / params.rho_im;
        let x_a = u * s;
        let x_c = s - x_a;
        let e = -params.rho_r * s + sigma * (q(params) * (x_a * x_c).max(0.0)).sqrt();
        (x_a, x_c, e)
    }

    /// Outer powers and energy encoded by coordinate `s`.
    pub fn coords(self, params: &Params, s: f64) -> (f64, f64, f64) {
        match self {
            Reduction::Symmetric => (s * s, s * s, params.energy.unwrap_or(f64::NAN)),
            Reduction::Asymmetric(_) => self.asymmetric_coords(params, s),
            Reduction::Special => {
                let x = 0.5 * params.gamma / params.rho_im;
                (x, x, s)
            }
        }
    }

    /// Reconstructs the (unrefined) state at coordinate `s`; `None` when the
    /// phase relations are inconsistent or the middle site vanishes.
    pub fn build(self, params: &Params, s: f64, mirrored: bool) -> Option<StationarySolution> {
        let (x_a, x_c, e) = self.coords(params, s);
        if x_a < 0.0 || x_c < 0.0 || !e.is_finite() {
            return None;
        }
        let y = middle_power(params, x_a, e);
        if !(y > 0.0) {
            return None;
        }
        let (amp_a, amp_b, amp_c) = (x_a.sqrt(), y.sqrt(), x_c.sqrt());
        let eb = params.epsilon * amp_b;
        let sin_a = (params.gamma * amp_a - params.rho_im * amp_a * x_a) / eb;
        let cos_a = (e * amp_a + params.rho_r * amp_a * x_a) / eb;
        let sin_c = -(params.gamma * amp_c - params.rho_im * amp_c * x_c) / eb;
        let cos_c = (e * amp_c + params.rho_r * amp_c * x_c) / eb;
        if (sin_a * sin_a + cos_a * cos_a - 1.0).abs() > TRIG_CHECK
            || (sin_c * sin_c + cos_c * cos_c - 1.0).abs() > TRIG_CHECK
        {
            return None;
        }
        let sign = match self {
            Reduction::Asymmetric(energy) => SignChoice::Mirror {
                energy,
                mirrored: false,
            },
            _ => SignChoice::Ordinal,
        };
        let sol = StationarySolution {
            topology: Topology::Trimer,
            sites: vec![
                Complex64::from_polar(amp_a, -sin_a.atan2(cos_a)),
                Complex64::new(amp_b, 0.0),
                Complex64::from_polar(amp_c, -sin_c.atan2(cos_c)),
            ],
            energy: e,
            case: self.case(),
            sign,
            root_index: 0,
            critical: false,
        };
        Some(if mirrored { sol.mirror() } else { sol })
    }

    /// Characteristic magnitude of the reduced equation, used to judge
    /// tangential near-roots.
    fn scale(self, params: &Params, s: f64) -> f64 {
        let (x_a, x_c, e) = self.coords(params, s);
        let y = middle_power(params, x_a, e);
        1.0 + y * y + (e * y).abs() + (e * (x_a + x_c)).abs() + params.rho_r.abs() * (x_a * x_a + x_c * x_c)
    }

    /// Enumerates the roots of the reduced equation on its domain.
    pub fn scan(self, params: &Params, nodes: usize) -> Result<Vec<ScannedRoot>> {
        let (lo, hi) = self.domain(params)?;
        let touch = 1e-13 * self.scale(params, 0.5 * (lo + hi)).max(1.0);
        let mut roots = scan_roots(|s| self.residual(params, s), lo, hi, nodes, touch);
        if let Reduction::Asymmetric(_) = self {
            let sep = ASYM_SEPARATION;
            roots.retain(|r| r.x < 0.5 - sep);
        }
        Ok(roots)
    }

    /// Builds and polishes the state at a root; `None` when reconstruction
    /// fails or the polished residual is not certified.
    pub fn certify(self, params: &Params, root: &ScannedRoot, mirrored: bool) -> Option<StationarySolution> {
        let guess = self.build(params, root.x, false)?;
        let mut sol = match newton_refine(&guess, params) {
            Ok(s) => s,
            Err(_) if stationary_residual(&guess, params) <= ACCEPT_RESIDUAL => guess,
            Err(_) => return None,
        };
        if stationary_residual(&sol, params) > ACCEPT_RESIDUAL {
            return None;
        }
        sol.critical = root.double;
        Some(if mirrored { sol.mirror() } else { sol })
    }
}

fn check_trimer(params: &Params) -> Result<()> {
    if params.topology != Topology::Trimer {
        return Err(OligomerError::InvalidInput(format!(
            "expected trimer parameters, got {}",
            params.topology
        )));
    }
    params.validate()
}

fn sum_rule_preconditions(params: &Params, case: CaseLabel) -> Result<()> {
    check_trimer(params)?;
    if params.energy.is_some() {
        return Err(OligomerError::EnergyDetermined { case: case.as_str() });
    }
    if params.gamma * params.rho_im > 0.0 {
        Ok(())
    } else {
        Err(OligomerError::InvalidRegime(format!(
            "the sum-rule families need gamma * rho_im > 0 (gamma = {}, rho_im = {})",
            params.gamma, params.rho_im
        )))
    }
}

/// Roots of `red` at `params` that reconstruct to certified states, paired
/// with their reduced coordinate and numbered in scan order.
pub fn enumerate(red: Reduction, params: &Params) -> Result<Vec<(f64, StationarySolution)>> {
    let mut out: Vec<(f64, StationarySolution)> = Vec::new();
    for root in red.scan(params, SCAN_NODES)? {
        let keep = match red {
            Reduction::Symmetric => root.x > 0.0,
            Reduction::Asymmetric(_) => true,
            Reduction::Special => {
                let scale = 1.0 + root.x * root.x + (params.gamma / params.rho_im).powi(2);
                special_discriminant(params, root.x) >= -1e-10 * scale
            }
        };
        if !keep {
            continue;
        }
        if let Some(mut sol) = red.certify(params, &root, false) {
            sol.root_index = out.len();
            out.push((root.x, sol));
        }
    }
    Ok(out)
}

/// Symmetric states `A = C` at the free propagation constant, ordered by
/// increasing outer amplitude.
pub fn trimer_symmetric(params: &Params) -> Result<Vec<StationarySolution>> {
    check_trimer(params)?;
    params.require_energy()?;
    Ok(enumerate(Reduction::Symmetric, params)?.into_iter().map(|(_, s)| s).collect())
}

/// Asymmetric states on the sum rule. For each energy root (`+` first) the
/// roots with `A < C` are listed by increasing `A`, each followed by its
/// mirror image.
pub fn trimer_asymmetric(params: &Params) -> Result<Vec<StationarySolution>> {
    sum_rule_preconditions(params, CaseLabel::AsymmetricII)?;
    let mut out = Vec::new();
    for sigma in [Sign::Plus, Sign::Minus] {
        for (_, sol) in enumerate(Reduction::Asymmetric(sigma), params)? {
            let mirror = sol.mirror();
            out.push(sol);
            out.push(mirror);
        }
    }
    Ok(out)
}

/// `E^2 - 4 E gamma/rho_im - 2 rho_r gamma^2/rho_im^2`: the middle-site
/// quadratic must have a real root.
pub fn special_discriminant(params: &Params, e: f64) -> f64 {
    let s = params.gamma / params.rho_im;
    e * e - 4.0 * e * s - 2.0 * params.rho_r * s * s
}

/// Special symmetric states `A^2 = C^2 = gamma/(2 rho_im)`, ordered by
/// increasing `E`.
pub fn trimer_special_symmetric(params: &Params) -> Result<Vec<StationarySolution>> {
    sum_rule_preconditions(params, CaseLabel::SpecialIII)?;
    Ok(enumerate(Reduction::Special, params)?.into_iter().map(|(_, s)| s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::factorized_condition;
    use proptest::prelude::*;

    fn reference(gamma: f64) -> Params {
        Params::trimer(1.0, gamma, -1.0, 1.0).unwrap()
    }

    #[test]
    fn symmetric_counts() {
        let at = |g: f64| trimer_symmetric(&reference(g).with_energy(1.0)).unwrap();
        assert_eq!(at(1.5).len(), 3);
        assert_eq!(at(2.7).len(), 1);
        for s in at(1.5) {
            assert!(stationary_residual(&s, &reference(1.5).with_energy(1.0)) <= 1e-10);
            let a = s.amplitudes();
            assert!((a[0] - a[2]).abs() < 1e-10);
            assert!(s.sites[1].im == 0.0 && s.sites[1].re > 0.0);
        }
    }

    #[test]
    fn symmetric_matches_polynomial_oracle() {
        // independent oracle: companion-free check that r(x) vanishes at
        // every returned A^2 and changes sign nowhere else on a dense grid
        let p = reference(1.5).with_energy(1.0);
        let sols = trimer_symmetric(&p).unwrap();
        let r = |x: f64| {
            let pp = ((1.0 - x).powi(2) + (1.5 - x).powi(2)) / 1.0;
            x * pp * pp - pp + 2.0 - 2.0 * x
        };
        let mut changes = 0;
        let n = 200_000;
        for i in 0..n {
            let (x0, x1) = (6.0 * i as f64 / n as f64, 6.0 * (i + 1) as f64 / n as f64);
            if r(x0) * r(x1) < 0.0 {
                changes += 1;
            }
        }
        assert_eq!(changes, sols.len());
        for s in &sols {
            assert!(r(s.amplitudes()[0].powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn asymmetric_counts_and_mirrors() {
        let sols = trimer_asymmetric(&reference(3.0)).unwrap();
        assert_eq!(sols.len(), 6);
        for s in &sols {
            assert!(stationary_residual(s, &reference(3.0)) <= 1e-10);
            assert!(factorized_condition(s, &reference(3.0)).abs() <= 1e-10);
            let m = s.mirror();
            assert!(sols.iter().any(|o| o.sites.iter().zip(&m.sites).all(|(a, b)| (a - b).norm() < 1e-9)));
        }
        assert!(trimer_asymmetric(&reference(1.5)).unwrap().is_empty());
    }

    #[test]
    fn asymmetric_requires_gain_product() {
        let p = Params::trimer(1.0, 3.0, -1.0, 0.0).unwrap();
        assert!(matches!(trimer_asymmetric(&p), Err(OligomerError::InvalidRegime(_))));
        assert!(matches!(
            trimer_special_symmetric(&reference(1.0).with_energy(2.0)),
            Err(OligomerError::EnergyDetermined { .. })
        ));
    }

    #[test]
    fn special_counts() {
        assert_eq!(trimer_special_symmetric(&reference(0.5)).unwrap().len(), 4);
        assert_eq!(trimer_special_symmetric(&reference(1.0)).unwrap().len(), 2);
        assert_eq!(trimer_special_symmetric(&reference(2.5)).unwrap().len(), 0);
        let sols = trimer_special_symmetric(&reference(0.5)).unwrap();
        for w in sols.windows(2) {
            assert!(w[0].energy < w[1].energy);
        }
        for s in &sols {
            assert!(stationary_residual(s, &reference(0.5)) <= 1e-10);
            assert!(special_discriminant(&reference(0.5), s.energy) >= 0.0);
        }
    }

    #[test]
    fn special_quartic_matches_direct_evaluation() {
        let p = reference(0.7);
        let poly = Reduction::special_poly(&p);
        for e in [-2.0, -0.3, 0.0, 1.1, 3.7] {
            let direct = Reduction::Special.residual(&p, e);
            assert!((poly.eval(e) - direct).abs() < 1e-12 * (1.0 + direct.abs()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn every_symmetric_root_is_certified(g in 0.0f64..3.0, e in -2.0f64..3.0) {
            let p = reference(g).with_energy(e);
            for s in trimer_symmetric(&p).unwrap() {
                prop_assert!(stationary_residual(&s, &p) <= 1e-10);
                let a = s.amplitudes();
                prop_assert!((a[0] - a[2]).abs() <= 1e-10);
            }
        }

        #[test]
        fn asymmetric_sum_rule_holds(g in 0.5f64..6.0) {
            let p = reference(g);
            for s in trimer_asymmetric(&p).unwrap() {
                let a = s.amplitudes();
                prop_assert!((a[0] * a[0] + a[2] * a[2] - g).abs() <= 1e-10);
                prop_assert!((a[0] - a[2]).abs() > 1e-6);
                prop_assert!(stationary_residual(&s, &p) <= 1e-10);
            }
        }
    }
}
