//! Linearization about stationary states and certified eigenvalues.
//!
//! Writing `u_j = (a_j + w_j) e^{iEt}` and keeping terms linear in `w`,
//!
//! ```text
//! i w_t = (E + L + D) w + G conj(w),   D = diag(2 K_j |a_j|^2),  G = diag(K_j a_j^2)
//! ```
//!
//! where `N(u) = L u + K_j |u_j|^2 u_j`. With `w = p e^{lambda t}` and
//! `conj(w) = P e^{lambda t}` the amplitudes `X = (p_1, -P_1, p_2, -P_2, ...)`
//! solve `M X = i lambda X`. The global phase rotation gives the exact null
//! vector `X_0 = (a_1, conj(a_1), ...)`, which sits in a Jordan block; it is
//! deflated before the eigenvalue solve so both zero eigenvalues come out at
//! round-off level.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OligomerError, Result};
use crate::model::{stationary_residual, Params, Sign, StationarySolution, Topology};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Residual bound for the stationary state a matrix is built around.
const BUILD_RESIDUAL: f64 = 1e-8;
/// Per-eigenpair certificate relative to the Frobenius norm of `M`.
pub const CERTIFICATE: f64 = 1e-9;
/// Default tolerance for stability decisions and the zero mode.
pub const DEFAULT_TOL: f64 = 1e-7;

/// Linearization eigenvalues `lambda` with eigenvector certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// `||M v - i lambda v||` for unit `v`.
    pub residuals: Vec<f64>,
    /// Unit eigenvectors of `M` in the `(p, -P, ...)` basis.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub matrix_norm: f64,
    pub solution_id: String,
}

impl Spectrum {
    pub fn max_real(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the eigenvalue with the largest real part (the first one,
    /// given the ordering).
    pub fn dominant(&self) -> usize {
        0
    }
}

fn build_matrix(sol: &StationarySolution, params: &Params, topology: Topology) -> Result<DMatrix<Complex64>> {
    if sol.topology != topology || params.topology != topology || sol.sites.len() != topology.sites() {
        return Err(OligomerError::InvalidInput(format!(
            "expected a {topology} state and parameters, got a {} state with {} parameters",
            sol.topology, params.topology
        )));
    }
    let res = stationary_residual(sol, params);
    if !(res <= BUILD_RESIDUAL) {
        return Err(OligomerError::InvalidInput(format!(
            "linearization needs a stationary state (residual {res:e} > {BUILD_RESIDUAL:e})"
        )));
    }
    Ok(linear_matrix(&sol.sites, sol.energy, params))
}

/// The `2N x 2N` matrix without any checks on the state.
pub(crate) fn linear_matrix(a: &[Complex64], energy: f64, params: &Params) -> DMatrix<Complex64> {
    let n = a.len();
    let (lin, kerr) = params.operator_parts();
    let mut m = DMatrix::from_element(2 * n, 2 * n, ZERO);
    for j in 0..n {
        for k in 0..n {
            let l = lin[j * n + k];
            m[(2 * j, 2 * k)] = l;
            m[(2 * j + 1, 2 * k + 1)] = -l.conj();
        }
        let d = kerr[j] * 2.0 * a[j].norm_sqr();
        let g = kerr[j] * a[j] * a[j];
        m[(2 * j, 2 * j)] += energy + d;
        m[(2 * j + 1, 2 * j + 1)] -= energy + d.conj();
        m[(2 * j, 2 * j + 1)] = -g;
        m[(2 * j + 1, 2 * j)] = g.conj();
    }
    m
}

/// `4 x 4` matrix in the basis `(p, -P, q, -Q)`.
pub fn build_dimer_matrix(sol: &StationarySolution, params: &Params) -> Result<DMatrix<Complex64>> {
    build_matrix(sol, params, Topology::Dimer)
}

/// `6 x 6` matrix in the basis `(p, -P, q, -Q, r, -R)`.
pub fn build_trimer_matrix(sol: &StationarySolution, params: &Params) -> Result<DMatrix<Complex64>> {
    build_matrix(sol, params, Topology::Trimer)
}

/// Phase-rotation null vector `(a_1, conj(a_1), ...)`.
pub fn phase_mode(sites: &[Complex64]) -> DVector<Complex64> {
    DVector::from_iterator(2 * sites.len(), sites.iter().flat_map(|a| [*a, a.conj()]))
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues of `M` (not yet mapped to `lambda`) from a complex Schur form.
fn schur_values(m: DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m, 1e-15, 10_000)
        .ok_or_else(|| OligomerError::NumericalFailure("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Householder reflector `H` (Hermitian, unitary) with `H v = alpha e_1`.
fn householder(v: &DVector<Complex64>) -> DMatrix<Complex64> {
    let n = v.len();
    let v = v / Complex64::new(v.norm(), 0.0);
    let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { Complex64::new(1.0, 0.0) };
    let mut w = v.clone();
    w[0] += phase;
    let wn = w.norm();
    let w = w / Complex64::new(wn, 0.0);
    DMatrix::identity(n, n) - (&w * w.adjoint()) * Complex64::new(2.0, 0.0)
}

/// Unit eigenvector for eigenvalue `mu` of `m` by shifted inverse iteration.
fn eigenvector(m: &DMatrix<Complex64>, mu: Complex64, norm: f64) -> (Vec<Complex64>, f64) {
    let n = m.nrows();
    let mut best: (Vec<Complex64>, f64) = (vec![ZERO; n], f64::INFINITY);
    for (attempt, shift) in [1e-14, 1e-12, 1e-10].iter().enumerate() {
        let sigma = mu + Complex64::new(shift * norm.max(1e-300), 0.5 * shift * norm.max(1e-300));
        let shifted = m - DMatrix::identity(n, n) * sigma;
        let lu = shifted.lu();
        // deterministic, generic starting vector
        let mut x = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.3 - 0.07 * (i + attempt) as f64));
        for _ in 0..4 {
            let Some(y) = lu.solve(&x) else { break };
            let yn = y.norm();
            if !(yn.is_finite() && yn > 0.0) {
                break;
            }
            x = y / Complex64::new(yn, 0.0);
            let r = (m * &x - &x * mu).norm();
            if r < best.1 {
                best = (x.iter().copied().collect(), r);
            }
        }
        if best.1 <= CERTIFICATE * norm * 1e-3 {
            break;
        }
    }
    best
}

fn assemble(m: &DMatrix<Complex64>, mus: Vec<Complex64>, id: String) -> Result<Spectrum> {
    let norm = frobenius(m);
    let mut pairs = Vec::with_capacity(mus.len());
    for mu in mus {
        let (v, r) = eigenvector(m, mu, norm);
        if !(r <= CERTIFICATE * norm.max(f64::MIN_POSITIVE)) && norm > 0.0 {
            return Err(OligomerError::NumericalFailure(format!(
                "eigenpair certificate {r:e} exceeds {:e}",
                CERTIFICATE * norm
            )));
        }
        // M X = i lambda X  =>  lambda = -i mu
        pairs.push((-I * mu, r, v));
    }
    pairs.sort_by(|x, y| order_key(y.0).partial_cmp(&order_key(x.0)).unwrap_or(std::cmp::Ordering::Equal));
    Ok(Spectrum {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        residuals: pairs.iter().map(|p| p.1).collect(),
        eigenvectors: pairs.into_iter().map(|p| p.2).collect(),
        matrix_norm: norm,
        solution_id: id,
    })
}

/// Sort key: real part quantised so round-off does not reorder conjugate
/// pairs, then the imaginary part.
fn order_key(l: Complex64) -> (f64, f64) {
    ((l.re * 1e9).round(), l.im)
}

/// All eigenvalues `lambda` of `M X = i lambda X`, each with a certified
/// eigenvector, ordered by decreasing real and then imaginary part.
pub fn eigenvalues(matrix: &DMatrix<Complex64>) -> Result<Spectrum> {
    let n = matrix.nrows();
    if n != matrix.ncols() || !(n == 4 || n == 6) {
        return Err(OligomerError::InvalidInput(format!(
            "expected a 4x4 or 6x6 matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(OligomerError::InvalidInput("matrix has non-finite entries".into()));
    }
    assemble(matrix, schur_values(matrix.clone())?, String::new())
}

/// Eigenvalues of `M` given one exact eigenvector `v` with eigenvalue 0:
/// `{0}` together with the spectrum of the deflated trailing block.
pub(crate) fn deflated_values(m: &DMatrix<Complex64>, v: &DVector<Complex64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let h = householder(v);
    let b = &h * m * &h;
    let tail = b.view((1, 1), (n - 1, n - 1)).into_owned();
    let mut mus = vec![ZERO];
    mus.extend(schur_values(tail)?);
    Ok(mus)
}

/// Builds the linearization about `sol` and returns its certified spectrum.
pub fn analyze(sol: &StationarySolution, params: &Params) -> Result<Spectrum> {
    let m = build_matrix(sol, params, sol.topology)?;
    let x0 = phase_mode(&sol.sites);
    let mus = if x0.norm() > 1e-8 {
        deflated_values(&m, &x0)?
    } else {
        schur_values(m.clone())?
    };
    assemble(&m, mus, sol.id())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstabilityKind {
    RealPair,
    ComplexQuartet,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stability {
    pub stable: bool,
    pub kind: Option<InstabilityKind>,
}

/// Stable iff `max Re lambda <= tol`. Unstable eigenvalues with
/// `|Im lambda| <= tol` count as real, the others as complex; both present
/// gives `Mixed`.
pub fn classify_stability(spec: &Spectrum, tol: f64) -> Stability {
    let tol = if tol > 0.0 { tol } else { DEFAULT_TOL };
    let unstable: Vec<&Complex64> = spec.eigenvalues.iter().filter(|l| l.re > tol).collect();
    if unstable.is_empty() {
        return Stability { stable: true, kind: None };
    }
    let real = unstable.iter().any(|l| l.im.abs() <= tol);
    let complex = unstable.iter().any(|l| l.im.abs() > tol);
    let kind = match (real, complex) {
        (true, true) => InstabilityKind::Mixed,
        (true, false) => InstabilityKind::RealPair,
        _ => InstabilityKind::ComplexQuartet,
    };
    Stability {
        stable: false,
        kind: Some(kind),
    }
}

/// Nonzero eigenvalue pair `±2i sqrt(2(eps^2 - gamma^2) ∓ E sqrt(eps^2 - gamma^2))`
/// of the symmetric states of the dimer without nonlinear gain/loss.
/// `formula_sign` is the sign in front of `E`. For a defocusing-free Kerr
/// term (`rho_r < 0`) the `-` pair belongs to the smaller-amplitude
/// symmetric root and the `+` pair to the larger one.
pub fn linear_pt_dimer_spectrum(params: &Params, formula_sign: Sign) -> Result<[Complex64; 2]> {
    if params.topology != Topology::Dimer || params.rho_im != 0.0 {
        return Err(OligomerError::InvalidRegime(
            "the closed-form spectrum needs a dimer with rho_im = 0".into(),
        ));
    }
    if params.gamma.abs() > params.epsilon {
        return Err(OligomerError::InvalidRegime(format!(
            "gamma = {} exceeds the linear threshold eps = {}",
            params.gamma, params.epsilon
        )));
    }
    let e = params.require_energy()?;
    let r = (params.epsilon * params.epsilon - params.gamma * params.gamma).sqrt();
    let inner = Complex64::new(2.0 * r * r + formula_sign.value() * e * r, 0.0);
    let lam = 2.0 * I * inner.sqrt();
    Ok([lam, -lam])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branches::{dimer_asymmetric, dimer_symmetric, trimer_symmetric};
    use crate::model::{CaseLabel, SignChoice};

    fn close_sets(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        let mut used = vec![false; b.len()];
        a.len() == b.len()
            && a.iter().all(|x| {
                let best = b
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !used[*i])
                    .min_by(|p, q| (p.1 - x).norm().partial_cmp(&(q.1 - x).norm()).unwrap());
                match best {
                    Some((i, y)) if (y - x).norm() <= tol => {
                        used[i] = true;
                        true
                    }
                    _ => false,
                }
            })
    }

    #[test]
    fn diagonal_matrix() {
        let d = [I, -I, 2.0 * I, -2.0 * I];
        let m = DMatrix::from_fn(4, 4, |i, j| if i == j { d[i] } else { ZERO });
        let s = eigenvalues(&m).unwrap();
        let want = [2.0, 1.0, -1.0, -2.0];
        for (l, w) in s.eigenvalues.iter().zip(want) {
            assert!((l - Complex64::new(w, 0.0)).norm() < 1e-14);
        }
        for r in &s.residuals {
            assert!(*r <= CERTIFICATE * s.matrix_norm);
        }
    }

    #[test]
    fn zero_state_of_linear_coupler() {
        let p = Params::dimer(1.0, 0.0, -2.0, 1.0).unwrap();
        let e = 0.7;
        let z = StationarySolution::zero(Topology::Dimer, e, CaseLabel::SymmetricI, SignChoice::Ordinal);
        let s = analyze(&z, &p).unwrap();
        let want: Vec<Complex64> = [e + 1.0, e - 1.0, -(e + 1.0), -(e - 1.0)]
            .iter()
            .map(|w| Complex64::new(0.0, *w))
            .collect();
        assert!(close_sets(&s.eigenvalues, &want, 1e-12));
    }

    #[test]
    fn zero_state_of_linear_trimer() {
        let p = Params::trimer(1.0, 0.0, -1.0, 1.0).unwrap();
        let e = 1.3;
        let z = StationarySolution::zero(Topology::Trimer, e, CaseLabel::SymmetricI, SignChoice::Ordinal);
        let s = analyze(&z, &p).unwrap();
        let r2 = 2f64.sqrt();
        let want: Vec<Complex64> = [e, -e, e + r2, -(e + r2), e - r2, -(e - r2)]
            .iter()
            .map(|w| Complex64::new(0.0, *w))
            .collect();
        assert!(close_sets(&s.eigenvalues, &want, 1e-12));
    }

    #[test]
    fn asymmetric_mirror_spectra_are_negatives() {
        let p = Params::dimer(1.0, 1.5, -2.0, 1.0).unwrap();
        let plus = analyze(&dimer_asymmetric(&p, Sign::Plus).unwrap().unwrap(), &p).unwrap();
        let minus = analyze(&dimer_asymmetric(&p, Sign::Minus).unwrap().unwrap(), &p).unwrap();
        let neg: Vec<Complex64> = minus.eigenvalues.iter().map(|l| -l).collect();
        assert!(close_sets(&plus.eigenvalues, &neg, 1e-8));
        assert!(classify_stability(&plus, DEFAULT_TOL).stable);
        assert!(!classify_stability(&minus, DEFAULT_TOL).stable);
    }

    #[test]
    fn spectrum_has_zero_mode_and_conjugate_closure() {
        let p = Params::trimer(1.0, 1.5, -1.0, 1.0).unwrap().with_energy(1.0);
        for sol in trimer_symmetric(&p).unwrap() {
            let s = analyze(&sol, &p).unwrap();
            assert!(s.eigenvalues.iter().any(|l| l.norm() <= 1e-7));
            for l in &s.eigenvalues {
                assert!(s.eigenvalues.iter().any(|m| (m - l.conj()).norm() <= 1e-7));
            }
        }
    }

    #[test]
    fn symmetric_state_matrix_pt_relation() {
        // Rotated so that b = conj(a), a symmetric state is PT invariant and
        // the site swap maps M to conj(M); composing with the (p, -P)
        // exchange reverses the basis and maps M to -M.
        let p = Params::dimer(1.0, 0.6, -2.0, 1.0).unwrap().with_energy(1.0);
        let mut sol = dimer_symmetric(&p, Sign::Plus).unwrap().unwrap();
        let rot = Complex64::from_polar(1.0, -0.5 * sol.sites[1].arg());
        for z in &mut sol.sites {
            *z *= rot;
        }
        assert!((sol.sites[1] - sol.sites[0].conj()).norm() < 1e-14);
        let m = build_dimer_matrix(&sol, &p).unwrap();
        let swap = [2, 3, 0, 1];
        let rev = [3, 2, 1, 0];
        for i in 0..4 {
            for j in 0..4 {
                assert!((m[(swap[i], swap[j])] - m[(i, j)].conj()).norm() < 1e-10);
                assert!((m[(rev[i], rev[j])] + m[(i, j)]).norm() < 1e-10);
            }
        }
        let s = analyze(&sol, &p).unwrap();
        for l in &s.eigenvalues {
            assert!(s.eigenvalues.iter().any(|m| (m + l).norm() <= 1e-7));
        }
    }

    #[test]
    fn classification_rules() {
        let mk = |v: &[Complex64]| Spectrum {
            eigenvalues: v.to_vec(),
            residuals: vec![0.0; v.len()],
            eigenvectors: vec![],
            matrix_norm: 1.0,
            solution_id: String::new(),
        };
        let c = Complex64::new;
        assert!(classify_stability(&mk(&[c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]), 1e-7).stable);
        let s = classify_stability(&mk(&[c(0.5, 0.0), c(-0.5, 0.0)]), 1e-7);
        assert_eq!(s.kind, Some(InstabilityKind::RealPair));
        let s = classify_stability(&mk(&[c(0.5, 1.0), c(0.5, -1.0)]), 1e-7);
        assert_eq!(s.kind, Some(InstabilityKind::ComplexQuartet));
        let s = classify_stability(&mk(&[c(0.5, 1.0), c(0.2, 0.0)]), 1e-7);
        assert_eq!(s.kind, Some(InstabilityKind::Mixed));
    }

    #[test]
    fn linear_pt_formula_values() {
        let p = Params::dimer(1.0, 0.0, -1.0, 0.0).unwrap().with_energy(1.0);
        let [l, _] = linear_pt_dimer_spectrum(&p, Sign::Minus).unwrap();
        assert!((l - Complex64::new(0.0, 2.0)).norm() < 1e-14);
        let [l, _] = linear_pt_dimer_spectrum(&p, Sign::Plus).unwrap();
        assert!((l.im - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        let g = 3f64.sqrt() / 2.0;
        let [l, _] = linear_pt_dimer_spectrum(&p.with_gamma(g), Sign::Minus).unwrap();
        assert!(l.norm() < 1e-7);
        assert!(matches!(
            linear_pt_dimer_spectrum(&p.with_gamma(1.2), Sign::Minus),
            Err(OligomerError::InvalidRegime(_))
        ));
    }

    #[test]
    fn linear_pt_formula_matches_numerics() {
        for g in [0.0, 0.3, 0.6, 0.9] {
            let p = Params::dimer(1.0, g, -1.0, 0.0).unwrap().with_energy(1.0);
            for sign in [Sign::Plus, Sign::Minus] {
                let sol = dimer_symmetric(&p, sign).unwrap().unwrap();
                let s = analyze(&sol, &p).unwrap();
                let [l, m] = linear_pt_dimer_spectrum(&p, sign).unwrap();
                let want = [l, m, ZERO, ZERO];
                assert!(close_sets(&s.eigenvalues, &want, 1e-8), "{g} {sign:?} {:?}", s.eigenvalues);
            }
        }
    }

    #[test]
    fn topology_mismatch_is_rejected() {
        let p = Params::trimer(1.0, 0.5, -1.0, 1.0).unwrap();
        let z = StationarySolution::zero(Topology::Trimer, 1.0, CaseLabel::SymmetricI, SignChoice::Ordinal);
        assert!(build_dimer_matrix(&z, &p).is_err());
        assert!(build_trimer_matrix(&z, &p).is_ok());
    }
}
