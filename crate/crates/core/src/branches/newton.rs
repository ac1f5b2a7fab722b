//! Damped Gauss–Newton polish of stationary states on the full complex
//! equations `E a_j + N_j(a) = 0`, written in Cartesian unknowns.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{OligomerError, Result};
use crate::model::{stationary_residual, CaseLabel, Params, StationarySolution};

const MAX_ITERATIONS: usize = 50;
const TARGET: f64 = 1e-12;
/// Accepted when Newton stalls at round-off level above `TARGET`.
const STALL_ACCEPT: f64 = 1e-10;
const BASIN: f64 = 0.1;
const MAX_CONDITION: f64 = 1e14;

/// Refines `guess` in place of the closed-form or scanned estimate. The
/// gauge site's imaginary part is pinned by an appended row.
///
/// Only the asymmetric family carries `E` as an extra unknown. Special
/// symmetric states also lie on the symmetric family, which is a curve in
/// `(a, E)`; freeing `E` there would make the Jacobian rank deficient, so
/// they are polished at their determined `E` like symmetric states.
pub fn newton_refine(guess: &StationarySolution, params: &Params) -> Result<StationarySolution> {
    if guess.topology != params.topology || guess.sites.len() != params.topology.sites() {
        return Err(OligomerError::InvalidInput(format!(
            "cannot refine a {} state with {} parameters",
            guess.topology, params.topology
        )));
    }
    let mut sol = guess.clone();
    sol.regauge();
    let mut res = stationary_residual(&sol, params);
    if res <= TARGET {
        return Ok(sol);
    }
    if !(res < BASIN) {
        return Err(OligomerError::NoConvergence {
            iterations: 0,
            residual: res,
        });
    }

    let free_energy = guess.case == CaseLabel::AsymmetricII;
    let n = sol.sites.len();
    let gauge = params.topology.gauge_site();
    let (lin, kerr) = params.operator_parts();

    for it in 0..MAX_ITERATIONS {
        let (f, jac) = system(&sol, &lin, &kerr, gauge, free_energy);
        let svd = jac.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if condition > MAX_CONDITION {
            if res <= STALL_ACCEPT {
                return Ok(sol);
            }
            return Err(OligomerError::SingularJacobian { condition });
        }
        let step = svd
            .solve(&(-&f), 0.0)
            .map_err(|e| OligomerError::NumericalFailure(e.to_string()))?;

        // backtracking on the Euclidean residual norm
        let f_norm = f.norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = apply_step(&sol, &step, lambda, n, free_energy);
            let (ft, _) = system(&trial, &lin, &kerr, gauge, free_energy);
            if ft.norm() < f_norm || ft.norm() == 0.0 {
                accepted = Some(trial);
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some(next) => {
                sol = next;
                res = stationary_residual(&sol, params);
                if res <= TARGET {
                    sol.regauge();
                    return Ok(sol);
                }
            }
            None => {
                // no descent possible: round-off floor reached
                if res <= STALL_ACCEPT {
                    return Ok(sol);
                }
                return Err(OligomerError::NoConvergence {
                    iterations: it + 1,
                    residual: res,
                });
            }
        }
    }
    if res <= STALL_ACCEPT {
        return Ok(sol);
    }
    Err(OligomerError::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: res,
    })
}

fn apply_step(sol: &StationarySolution, step: &DVector<f64>, lambda: f64, n: usize, free_energy: bool) -> StationarySolution {
    let mut out = sol.clone();
    for j in 0..n {
        out.sites[j] += Complex64::new(step[2 * j], step[2 * j + 1]) * lambda;
    }
    if free_energy {
        out.energy += lambda * step[2 * n];
    }
    out
}

/// Residual vector and Jacobian of the real system. Columns are
/// `(Re a_0, Im a_0, ..., [E])`, rows `(Re F_0, Im F_0, ..., Im a_gauge)`.
fn system(
    sol: &StationarySolution,
    lin: &[Complex64],
    kerr: &[Complex64],
    gauge: usize,
    free_energy: bool,
) -> (DVector<f64>, DMatrix<f64>) {
    let n = sol.sites.len();
    let cols = 2 * n + usize::from(free_energy);
    let mut f = DVector::zeros(2 * n + 1);
    let mut jac = DMatrix::zeros(2 * n + 1, cols);
    let a = &sol.sites;
    let e = sol.energy;
    for j in 0..n {
        let mut fj = e * a[j] + kerr[j] * a[j].norm_sqr() * a[j];
        for m in 0..n {
            fj += lin[j * n + m] * a[m];
            // d/dRe a_m and d/dIm a_m of the linear part
            let mut dre = lin[j * n + m];
            let mut dim = Complex64::i() * lin[j * n + m];
            if m == j {
                dre += e + kerr[j] * (2.0 * a[j].norm_sqr() + a[j] * a[j]);
                dim += Complex64::i() * (e + kerr[j] * (2.0 * a[j].norm_sqr() - a[j] * a[j]));
            }
            jac[(2 * j, 2 * m)] = dre.re;
            jac[(2 * j + 1, 2 * m)] = dre.im;
            jac[(2 * j, 2 * m + 1)] = dim.re;
            jac[(2 * j + 1, 2 * m + 1)] = dim.im;
        }
        f[2 * j] = fj.re;
        f[2 * j + 1] = fj.im;
        if free_energy {
            jac[(2 * j, 2 * n)] = a[j].re;
            jac[(2 * j + 1, 2 * n)] = a[j].im;
        }
    }
    f[2 * n] = a[gauge].im;
    jac[(2 * n, 2 * gauge + 1)] = 1.0;
    (f, jac)
}
