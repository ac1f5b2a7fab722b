//! Natural-parameter tracking of one root of a trimer reduction in `gamma`.

use crate::branches::{BranchSelector, BranchSpec, Reduction};
use crate::model::{Params, StationarySolution};
use crate::roots::{scan_roots, ScannedRoot};

/// Smallest `gamma` step before a branch is declared terminated.
pub const MIN_STEP: f64 = 1e-7;
const WINDOW_NODES: usize = 64;
const FD_STEP: f64 = 1e-7;

/// Where tracking stopped short of its target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Termination {
    pub last_gamma: f64,
    pub last_s: f64,
    pub fail_gamma: f64,
}

pub struct Tracker<'a> {
    pub spec: &'a BranchSpec,
    pub red: Reduction,
}

impl<'a> Tracker<'a> {
    pub fn new(spec: &'a BranchSpec) -> Option<Self> {
        spec.reduction().map(|red| Self { spec, red })
    }

    fn params(&self, gamma: f64) -> Params {
        self.spec.params(gamma)
    }

    pub fn residual(&self, gamma: f64, s: f64) -> f64 {
        self.red.residual(&self.params(gamma), s)
    }

    fn bounds(&self) -> (f64, f64) {
        match self.red {
            Reduction::Symmetric => (0.0, f64::INFINITY),
            Reduction::Asymmetric(_) => (1e-9, 0.5),
            Reduction::Special => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn min_window(&self, s: f64) -> f64 {
        1e-4 * (1.0 + s.abs())
    }

    /// Tangent `ds/dgamma` from the implicit function theorem.
    fn slope(&self, gamma: f64, s: f64) -> f64 {
        let hs = FD_STEP * (1.0 + s.abs());
        let (lo, hi) = self.bounds();
        let (s0, s1) = ((s - hs).max(lo), (s + hs).min(hi));
        let r_s = (self.residual(gamma, s1) - self.residual(gamma, s0)) / (s1 - s0);
        let hg = FD_STEP * (1.0 + gamma.abs());
        let r_g = (self.residual(gamma + hg, s) - self.residual(gamma - hg, s)) / (2.0 * hg);
        let m = -r_g / r_s;
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    /// Root of the reduction at `gamma` nearest to `pred`, searched in a
    /// window that also covers the current coordinate.
    fn locate(&self, gamma: f64, current: f64, pred: f64) -> Option<f64> {
        let (lo, hi) = self.bounds();
        let w = (0.5 * (pred - current).abs()).max(self.min_window(current));
        let a = (current.min(pred) - w).max(lo);
        let b = (current.max(pred) + w).min(hi);
        if !(b > a) {
            return None;
        }
        let roots = scan_roots(|s| self.residual(gamma, s), a, b, WINDOW_NODES, 0.0);
        roots
            .into_iter()
            .map(|r| r.x)
            .filter(|&x| x >= lo && x <= hi)
            .min_by(|x, y| (x - pred).abs().partial_cmp(&(y - pred).abs()).unwrap())
    }

    /// Follows the root from `(gamma, s)` through `targets` (monotone in one
    /// direction), returning the coordinate at every target reached.
    pub fn track(&self, start: (f64, f64), targets: &[f64], max_step: f64) -> (Vec<(f64, f64)>, Option<Termination>) {
        let (mut gc, mut sc) = start;
        let mut out = Vec::with_capacity(targets.len());
        let mut h = max_step;
        for &target in targets {
            while gc != target {
                let dir = (target - gc).signum();
                let dist = (target - gc).abs();
                let step = h.min(dist);
                let g_next = if step == dist { target } else { gc + dir * step };
                let pred = sc + self.slope(gc, sc) * (g_next - gc);
                match self.locate(g_next, sc, pred) {
                    Some(s_next) if self.red.build(&self.params(g_next), s_next, false).is_some() => {
                        gc = g_next;
                        sc = s_next;
                        h = (2.0 * h).min(max_step);
                    }
                    _ => {
                        if step <= MIN_STEP {
                            return (
                                out,
                                Some(Termination {
                                    last_gamma: gc,
                                    last_s: sc,
                                    fail_gamma: g_next,
                                }),
                            );
                        }
                        h = 0.5 * step;
                    }
                }
            }
            out.push((target, sc));
        }
        (out, None)
    }

    /// Coordinate at `target` reached by tracking from `(gamma, s)`.
    pub fn follow(&self, from: (f64, f64), target: f64, max_step: f64) -> Option<f64> {
        match self.track(from, &[target], max_step) {
            (pts, None) => pts.last().map(|p| p.1),
            _ => None,
        }
    }

    /// Locates the fold `R = dR/ds = 0` near a termination by Newton in
    /// `(s, gamma)`; `None` if it does not converge close to the bracket.
    pub fn refine_fold(&self, t: &Termination) -> Option<(f64, f64)> {
        let (mut s, mut g) = (t.last_s, t.last_gamma);
        let d = |g: f64, s: f64| {
            let h = 1e-4 * (1.0 + s.abs());
            (self.residual(g, s + h) - self.residual(g, s - h)) / (2.0 * h)
        };
        for _ in 0..40 {
            let f1 = self.residual(g, s);
            let f2 = d(g, s);
            let hs = 1e-5 * (1.0 + s.abs());
            let hg = 1e-5 * (1.0 + g.abs());
            let j11 = (self.residual(g, s + hs) - self.residual(g, s - hs)) / (2.0 * hs);
            let j12 = (self.residual(g + hg, s) - self.residual(g - hg, s)) / (2.0 * hg);
            let j21 = (d(g, s + hs) - d(g, s - hs)) / (2.0 * hs);
            let j22 = (d(g + hg, s) - d(g - hg, s)) / (2.0 * hg);
            let det = j11 * j22 - j12 * j21;
            if !(det.abs() > 0.0) || !det.is_finite() {
                return None;
            }
            let ds = -(f1 * j22 - f2 * j12) / det;
            let dg = -(j11 * f2 - j21 * f1) / det;
            s += ds;
            g += dg;
            let (lo, hi) = self.bounds();
            if !(s.is_finite() && g.is_finite()) {
                return None;
            }
            // folds of the even reductions sit on the domain edge (A = 0, u = 1/2)
            s = s.clamp(lo.min(0.0), hi);
            if ds.abs() <= 1e-13 * (1.0 + s.abs()) && dg.abs() <= 1e-13 * (1.0 + g.abs()) {
                break;
            }
        }
        let span = (t.fail_gamma - t.last_gamma).abs();
        let inside = (g - t.last_gamma).abs() <= 10.0 * span + 1e-6 && (s - t.last_s).abs() <= 1e-2 * (1.0 + s.abs());
        inside.then_some((g, s))
    }

    pub fn mirrored(&self) -> bool {
        matches!(self.spec.selector, BranchSelector::Mirror { mirrored: true, .. })
    }

    pub fn index(&self) -> usize {
        match self.spec.selector {
            BranchSelector::Root { index, .. } | BranchSelector::Mirror { index, .. } => index,
            BranchSelector::Sign { .. } => 0,
        }
    }

    /// Certified state at a tracked coordinate.
    pub fn solution(&self, gamma: f64, s: f64, critical: bool) -> Option<StationarySolution> {
        let params = self.params(gamma);
        let root = ScannedRoot { x: s, double: critical };
        let mut sol = self.red.certify(&params, &root, self.mirrored())?;
        sol.root_index = self.index();
        Some(sol)
    }

    /// The reduced coordinate of a state on this branch.
    pub fn coordinate(&self, sol: &StationarySolution) -> f64 {
        match self.red {
            Reduction::Symmetric => sol.sites[0].norm(),
            Reduction::Asymmetric(_) => {
                // u = A^2 / (A^2 + C^2) of the unmirrored state
                let (first, last) = (sol.sites[0].norm_sqr(), sol.sites[2].norm_sqr());
                if self.mirrored() {
                    last / (first + last)
                } else {
                    first / (first + last)
                }
            }
            Reduction::Special => sol.energy,
        }
    }
}
