//! Closed-form stationary states of the dimer.
//!
//! With `a = A` real and `b = B e^{i phi}`, the first stationary equation
//! gives `eps b = a (E + rho_r A^2 + i(gamma - rho_im A^2))`, so once `A^2`
//! and `E` are known the second site follows directly. The families differ
//! only in how `A^2` and `E` are fixed.

use num_complex::Complex64;

use crate::error::{OligomerError, Result};
use crate::model::{CaseLabel, Params, Sign, SignChoice, StationarySolution, Topology};

/// Slack for discriminants that should be zero at a termination point.
const DEGENERATE: f64 = 1e-13;
/// Tolerance of the `sin^2 + cos^2 = 1` consistency check.
const TRIG_CHECK: f64 = 1e-9;

fn check_dimer(params: &Params) -> Result<()> {
    if params.topology != Topology::Dimer {
        return Err(OligomerError::InvalidInput(format!(
            "expected dimer parameters, got {}",
            params.topology
        )));
    }
    params.validate()
}

fn require_gain_product(params: &Params) -> Result<()> {
    if params.gamma * params.rho_im > 0.0 {
        Ok(())
    } else {
        Err(OligomerError::InvalidRegime(format!(
            "the sum-rule families need gamma * rho_im > 0 (gamma = {}, rho_im = {})",
            params.gamma, params.rho_im
        )))
    }
}

fn forbid_energy(params: &Params, case: CaseLabel) -> Result<()> {
    if params.energy.is_some() {
        Err(OligomerError::EnergyDetermined { case: case.as_str() })
    } else {
        Ok(())
    }
}

/// Builds `(A, B e^{i phi})` from `A^2`, `B^2` and `E`, checking that the
/// phase relations implied by the first site are consistent.
fn assemble(params: &Params, x_a: f64, x_b: f64, energy: f64, case: CaseLabel, sign: SignChoice) -> Option<StationarySolution> {
    let (amp_a, amp_b) = (x_a.max(0.0).sqrt(), x_b.max(0.0).sqrt());
    let (cos, sin) = if amp_b > 0.0 {
        (
            amp_a * (energy + params.rho_r * x_a) / (params.epsilon * amp_b),
            amp_a * (params.gamma - params.rho_im * x_a) / (params.epsilon * amp_b),
        )
    } else if amp_a == 0.0 {
        // trivial root: the phase is immaterial
        (1.0, 0.0)
    } else {
        return None;
    };
    if amp_a > 0.0 && (sin * sin + cos * cos - 1.0).abs() > TRIG_CHECK {
        return None;
    }
    let phi = sin.atan2(cos);
    Some(StationarySolution {
        topology: Topology::Dimer,
        sites: vec![Complex64::new(amp_a, 0.0), Complex64::from_polar(amp_b, phi)],
        energy,
        case,
        sign,
        root_index: 0,
        critical: false,
    })
}

/// `q = rho_r^2 + rho_im^2`.
fn kerr_modulus_sq(params: &Params) -> f64 {
    params.rho_r * params.rho_r + params.rho_im * params.rho_im
}

/// Discriminant of the biquadratic for the symmetric family:
/// `(E rho_r - gamma rho_im)^2 - q (gamma^2 + E^2 - eps^2)`.
pub fn symmetric_discriminant(params: &Params, energy: f64) -> f64 {
    let b = energy * params.rho_r - params.gamma * params.rho_im;
    b * b - kerr_modulus_sq(params) * (params.gamma * params.gamma + energy * energy - params.epsilon * params.epsilon)
}

/// Symmetric states `A = B` at a free propagation constant. `sign` selects
/// the root `A^2 = (-b ± sqrt(disc)) / q`; `None` when the discriminant or
/// `A^2` is negative.
pub fn dimer_symmetric(params: &Params, sign: Sign) -> Result<Option<StationarySolution>> {
    check_dimer(params)?;
    let energy = params.require_energy()?;
    let q = kerr_modulus_sq(params);
    if q == 0.0 {
        return Err(OligomerError::InvalidRegime(
            "without Kerr terms the symmetric amplitude is undetermined".into(),
        ));
    }
    let b = energy * params.rho_r - params.gamma * params.rho_im;
    let mut disc = symmetric_discriminant(params, energy);
    let scale = (b * b).max(q * (params.gamma.powi(2) + energy.powi(2) + params.epsilon.powi(2)));
    let mut critical = false;
    if disc < 0.0 {
        if disc < -DEGENERATE * scale {
            return Ok(None);
        }
        disc = 0.0;
        critical = true;
    }
    let mut x = (-b + sign.value() * disc.sqrt()) / q;
    if x < 0.0 {
        if x < -DEGENERATE * (b.abs() / q).max(1.0) {
            return Ok(None);
        }
        x = 0.0;
    }
    let sol = assemble(params, x, x, energy, CaseLabel::SymmetricI, SignChoice::Amplitude { sign });
    Ok(sol.map(|mut s| {
        s.critical = critical;
        s
    }))
}

/// Half-width of the asymmetric amplitude split:
/// `gamma^2/(4 rho_im^2) - eps^2/q`, zero at the pitchfork.
pub fn asymmetric_discriminant(params: &Params) -> f64 {
    let half = params.gamma / (2.0 * params.rho_im);
    half * half - params.epsilon * params.epsilon / kerr_modulus_sq(params)
}

/// Asymmetric states on the sum rule `A^2 + B^2 = gamma/rho_im`, with
/// `E = -gamma rho_r / rho_im`. `sign` is the sign in front of the surd in
/// `A^2`; `B^2` takes the opposite one.
pub fn dimer_asymmetric(params: &Params, sign: Sign) -> Result<Option<StationarySolution>> {
    check_dimer(params)?;
    forbid_energy(params, CaseLabel::AsymmetricII)?;
    require_gain_product(params)?;
    let half = params.gamma / (2.0 * params.rho_im);
    let mut disc = asymmetric_discriminant(params);
    let mut critical = false;
    if disc < 0.0 {
        if disc < -DEGENERATE * half * half.max(1.0) {
            return Ok(None);
        }
        disc = 0.0;
        critical = true;
    }
    let root = disc.sqrt();
    let x_a = half + sign.value() * root;
    let x_b = half - sign.value() * root;
    let energy = -params.gamma * params.rho_r / params.rho_im;
    let sol = assemble(
        params,
        x_a,
        x_b,
        energy,
        CaseLabel::AsymmetricII,
        SignChoice::Amplitude { sign },
    );
    Ok(sol.map(|mut s| {
        s.critical = critical || disc == 0.0;
        s
    }))
}

/// Equal amplitudes on the sum rule: `A = B = sqrt(gamma/(2 rho_im))`,
/// `sin(phi) = gamma/(2 eps)`, and `E = ±eps cos(phi) - gamma rho_r/(2 rho_im)`.
pub fn dimer_special_symmetric(params: &Params, energy_sign: Sign) -> Result<Option<StationarySolution>> {
    check_dimer(params)?;
    forbid_energy(params, CaseLabel::SpecialIII)?;
    require_gain_product(params)?;
    let sin = params.gamma / (2.0 * params.epsilon);
    let mut cos_sq = 1.0 - sin * sin;
    let mut critical = false;
    if cos_sq < 0.0 {
        if cos_sq < -DEGENERATE {
            return Ok(None);
        }
        cos_sq = 0.0;
    }
    if cos_sq == 0.0 {
        critical = true;
    }
    let cos = energy_sign.value() * cos_sq.sqrt();
    let x = params.gamma / (2.0 * params.rho_im);
    let energy = params.epsilon * cos - params.rho_r * x;
    let amp = x.sqrt();
    Ok(Some(StationarySolution {
        topology: Topology::Dimer,
        sites: vec![Complex64::new(amp, 0.0), Complex64::from_polar(amp, sin.atan2(cos))],
        energy,
        case: CaseLabel::SpecialIII,
        sign: SignChoice::Energy { sign: energy_sign },
        root_index: 0,
        critical,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{factorized_condition, stationary_residual};
    use proptest::prelude::*;

    fn reference(gamma: f64) -> Params {
        Params::dimer(1.0, gamma, -2.0, 1.0).unwrap()
    }

    #[test]
    fn symmetric_plus_root_at_zero_gain() {
        let p = reference(0.0).with_energy(1.0);
        let s = dimer_symmetric(&p, Sign::Plus).unwrap().unwrap();
        let amps = s.amplitudes();
        assert!((amps[0].powi(2) - 0.8).abs() < 1e-14);
        assert!((amps[1].powi(2) - 0.8).abs() < 1e-14);
        assert!(stationary_residual(&s, &p) < 1e-14);
    }

    #[test]
    fn symmetric_minus_root_is_trivial_at_zero_gain() {
        let p = reference(0.0).with_energy(1.0);
        let s = dimer_symmetric(&p, Sign::Minus).unwrap().unwrap();
        assert!(s.amplitudes().iter().all(|&a| a < 1e-7));
        assert!(stationary_residual(&s, &p) < 1e-14);
    }

    #[test]
    fn symmetric_branch_absent_past_termination() {
        let p = reference(1.7).with_energy(1.0);
        assert!(dimer_symmetric(&p, Sign::Plus).unwrap().is_none());
        assert!(dimer_symmetric(&p, Sign::Minus).unwrap().is_none());
    }

    #[test]
    fn asymmetric_plus_at_gamma_one_and_a_half() {
        let p = reference(1.5);
        let s = dimer_asymmetric(&p, Sign::Plus).unwrap().unwrap();
        let a = s.amplitudes();
        assert!((a[0].powi(2) - 1.35208).abs() < 1e-5);
        assert!((a[1].powi(2) - 0.14792).abs() < 1e-5);
        assert!((s.energy - 3.0).abs() < 1e-14);
        let dphi = s.phases()[1] - s.phases()[0];
        assert!((dphi.cos() - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!(stationary_residual(&s, &p) < 1e-13);
    }

    #[test]
    fn asymmetric_is_born_degenerate_at_pitchfork() {
        let g = 2.0 / 5f64.sqrt();
        let s = dimer_asymmetric(&reference(g), Sign::Plus).unwrap().unwrap();
        let a = s.amplitudes();
        assert!((a[0].powi(2) - g / 2.0).abs() < 1e-7);
        assert!((a[1].powi(2) - g / 2.0).abs() < 1e-7);
    }

    #[test]
    fn asymmetric_absent_below_pitchfork() {
        assert!(dimer_asymmetric(&reference(0.5), Sign::Plus).unwrap().is_none());
    }

    #[test]
    fn asymmetric_rejects_energy_and_bad_regime() {
        let p = reference(1.5).with_energy(1.0);
        assert!(matches!(
            dimer_asymmetric(&p, Sign::Plus),
            Err(OligomerError::EnergyDetermined { .. })
        ));
        let p = Params::dimer(1.0, 1.5, -2.0, -1.0).unwrap();
        assert!(matches!(
            dimer_asymmetric(&p, Sign::Plus),
            Err(OligomerError::InvalidRegime(_))
        ));
        assert!(matches!(
            dimer_special_symmetric(&p, Sign::Plus),
            Err(OligomerError::InvalidRegime(_))
        ));
    }

    #[test]
    fn special_symmetric_values() {
        let p = reference(1.5);
        let s = dimer_special_symmetric(&p, Sign::Plus).unwrap().unwrap();
        let a = s.amplitudes();
        assert!((a[0] - 0.86603).abs() < 1e-5 && (a[1] - 0.86603).abs() < 1e-5);
        assert!(((s.phases()[1] - s.phases()[0]).sin() - 0.75).abs() < 1e-14);
        assert!((s.energy - 2.16144).abs() < 1e-5);
        assert!(stationary_residual(&s, &p) < 1e-12);

        let g = 2.0 / 5f64.sqrt();
        let s = dimer_special_symmetric(&reference(g), Sign::Plus).unwrap().unwrap();
        assert!((s.energy - 1.78885).abs() < 1e-5);

        assert!(dimer_special_symmetric(&reference(2.1), Sign::Plus).unwrap().is_none());
        assert!(dimer_special_symmetric(&reference(2.0), Sign::Minus).unwrap().unwrap().critical);
    }

    #[test]
    fn residual_grows_off_the_special_state() {
        let p = reference(1.5);
        let mut s = dimer_special_symmetric(&p, Sign::Plus).unwrap().unwrap();
        // hand-built oracle: E = (2 cos + 3)/2 with cos = sqrt(1 - 0.75^2)
        let cos = (1.0f64 - 0.5625).sqrt();
        assert!((s.energy - (2.0 * cos + 3.0) / 2.0).abs() < 1e-14);
        s.sites[0] += Complex64::new(0.01, 0.0);
        assert!(stationary_residual(&s, &p) > 1e-3);
    }

    #[test]
    fn pitchfork_birth_matches_special_state() {
        let g = 2.0 / 5f64.sqrt();
        let asym = dimer_asymmetric(&reference(g), Sign::Plus).unwrap().unwrap();
        let special = dimer_special_symmetric(&reference(g), Sign::Plus).unwrap().unwrap();
        for (a, b) in asym.sites.iter().zip(&special.sites) {
            assert!((a - b).norm() < 1e-8);
        }
        assert!((asym.energy - special.energy).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn asymmetric_signs_swap_amplitudes(g in 0.9f64..6.0, rr in -3.0f64..3.0, ri in 0.2f64..2.0) {
            let p = Params::dimer(1.0, g, rr, ri).unwrap();
            let plus = dimer_asymmetric(&p, Sign::Plus).unwrap();
            let minus = dimer_asymmetric(&p, Sign::Minus).unwrap();
            prop_assert_eq!(plus.is_some(), minus.is_some());
            if let (Some(pl), Some(mi)) = (plus, minus) {
                let (a, b) = (pl.amplitudes(), mi.amplitudes());
                prop_assert!((a[0] - b[1]).abs() < 1e-12 && (a[1] - b[0]).abs() < 1e-12);
                prop_assert!(stationary_residual(&pl, &p) < 1e-10);
                prop_assert!(stationary_residual(&mi, &p) < 1e-10);
                prop_assert!(factorized_condition(&pl, &p).abs() < 1e-10);
                let x = a[0] * a[0] + a[1] * a[1];
                prop_assert!((x - g / ri).abs() < 1e-10);
            }
        }

        #[test]
        fn symmetric_roots_are_stationary(g in 0.0f64..2.0, e in -3.0f64..3.0, rr in -3.0f64..3.0, ri in -2.0f64..2.0) {
            prop_assume!(rr.abs() + ri.abs() > 0.1);
            let p = Params::dimer(1.0, g, rr, ri).unwrap().with_energy(e);
            for sign in [Sign::Plus, Sign::Minus] {
                if let Some(s) = dimer_symmetric(&p, sign).unwrap() {
                    let amps = s.amplitudes();
                    prop_assert!((amps[0] - amps[1]).abs() < 1e-10);
                    prop_assert!(stationary_residual(&s, &p) < 1e-10 * (1.0 + amps[0].powi(3)));
                    prop_assert!(factorized_condition(&s, &p).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn special_states_are_stationary(g in 0.01f64..2.0, rr in -3.0f64..3.0, ri in 0.2f64..2.0) {
            let p = Params::dimer(1.0, g, rr, ri).unwrap();
            for sign in [Sign::Plus, Sign::Minus] {
                let s = dimer_special_symmetric(&p, sign).unwrap().unwrap();
                prop_assert!(stationary_residual(&s, &p) < 1e-10);
                let a = s.amplitudes();
                prop_assert!((a[0] * a[0] + a[1] * a[1] - g / ri).abs() < 1e-10);
            }
        }
    }
}
