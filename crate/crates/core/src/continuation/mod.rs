//! Natural-parameter continuation of branches in `gamma`, bifurcation event
//! detection, and the closed-form critical points.
//!
//! Dimer branches are evaluated from their closed forms at every node, with
//! existence boundaries bisected. Trimer branches are anchored at one
//! `gamma` by root enumeration and then tracked node to node along their
//! scalar reduction; a root that cannot be continued marks a termination.

mod tracker;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use tracker::{Termination, Tracker, MIN_STEP};

use crate::branches::dimer::asymmetric_discriminant;
use crate::branches::trimer::enumerate;
use crate::branches::{dimer_asymmetric, dimer_special_symmetric, dimer_symmetric, BranchSelector, BranchSpec, Reduction};
use crate::error::{OligomerError, Result};
use crate::linearization::{analyze, classify_stability, Spectrum, Stability, DEFAULT_TOL};
use crate::model::{CaseLabel, StationarySolution, Topology};
use crate::roots::{bisect, bisect_predicate};

/// Default continuation step in `gamma`.
pub const DEFAULT_STEP: f64 = 0.005;
/// Bracket width for stability-change events.
const EVENT_WIDTH: f64 = 1e-7;
/// Bracket width for closed-form existence boundaries.
const BOUNDARY_WIDTH: f64 = 1e-12;
/// Ends this close in `gamma` and state are one saddle-node.
const COALESCE: f64 = 1e-4;
/// Relative amplitude split below which an asymmetric end is a pitchfork.
const PITCHFORK_GAP: f64 = 1e-2;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchPoint {
    pub gamma: f64,
    pub solution: StationarySolution,
    pub spectrum: Spectrum,
    pub stability: Stability,
    /// Reduced coordinate for trimer branches.
    pub coordinate: Option<f64>,
}

impl BranchPoint {
    pub fn stable(&self) -> bool {
        self.stability.stable
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurveEnd {
    /// The branch reaches the end of the requested range.
    Boundary,
    /// The branch stops inside the range; `gamma` is the bracket midpoint
    /// (or the refined fold) and `width` the bracket width.
    Terminated { gamma: f64, width: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Emergence,
    Termination,
    SaddleNode,
    Pitchfork,
    StabilityChange,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub gamma_located: f64,
    pub refinement_width: f64,
    /// Branch labels.
    pub participants: Vec<String>,
    /// Propagation constant at the event, where it is meaningful.
    pub energy: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchCurve {
    pub spec: BranchSpec,
    pub points: Vec<BranchPoint>,
    pub events: Vec<Event>,
    pub lower: CurveEnd,
    pub upper: CurveEnd,
    /// Nodes where the state was found but its spectrum could not be
    /// certified; they are left out of `points`.
    pub skipped: Vec<f64>,
}

impl BranchCurve {
    pub fn label(&self) -> String {
        self.spec.label()
    }

    pub fn gamma_range(&self) -> (f64, f64) {
        (self.points[0].gamma, self.points[self.points.len() - 1].gamma)
    }

    /// No branch hopping: every amplitude jump between adjacent points is
    /// at most ten times the larger of its neighbouring jumps (the local
    /// secant estimate), up to an absolute floor.
    pub fn is_continuous(&self) -> bool {
        let amp = |p: &BranchPoint| p.solution.amplitudes().into_iter().fold(0.0, f64::max);
        let jumps: Vec<f64> = self.points.windows(2).map(|w| (amp(&w[1]) - amp(&w[0])).abs()).collect();
        (0..jumps.len()).all(|k| {
            let left = if k > 0 { jumps[k - 1] } else { 0.0 };
            let right = jumps.get(k + 1).copied().unwrap_or(0.0);
            jumps.len() < 2 || jumps[k] <= 10.0 * left.max(right) + 1e-6
        })
    }

    /// Point nearest to `gamma`.
    pub fn nearest(&self, gamma: f64) -> &BranchPoint {
        self.points
            .iter()
            .min_by(|a, b| (a.gamma - gamma).abs().total_cmp(&(b.gamma - gamma).abs()))
            .expect("curves are never empty")
    }

    /// Linear interpolation of `E` and the first outer amplitude at `gamma`;
    /// `None` outside the covered range.
    fn interpolate(&self, gamma: f64) -> Option<(f64, f64)> {
        let k = self.points.windows(2).position(|w| w[0].gamma <= gamma && gamma <= w[1].gamma)?;
        let (p, q) = (&self.points[k], &self.points[k + 1]);
        let t = if q.gamma > p.gamma { (gamma - p.gamma) / (q.gamma - p.gamma) } else { 0.0 };
        let lerp = |a: f64, b: f64| a + t * (b - a);
        Some((
            lerp(p.solution.energy, q.solution.energy),
            lerp(p.solution.sites[0].norm(), q.solution.sites[0].norm()),
        ))
    }
}

/// Closed-form dimer state on `spec` at `gamma`; `None` where it does not
/// exist (including regimes the family excludes).
fn dimer_state(spec: &BranchSpec, gamma: f64) -> Option<StationarySolution> {
    let BranchSelector::Sign { sign } = spec.selector else {
        return None;
    };
    let params = spec.params(gamma);
    let sol = match spec.case {
        CaseLabel::SymmetricI => dimer_symmetric(&params, sign),
        CaseLabel::AsymmetricII => dimer_asymmetric(&params, sign),
        CaseLabel::SpecialIII => dimer_special_symmetric(&params, sign),
    };
    sol.ok().flatten()
}

/// Lattice `lo, lo + step, ...` closed by `hi`.
fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).floor() as usize;
    let mut nodes: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).filter(|&g| g < hi).collect();
    nodes.push(hi);
    nodes
}

struct RawPoint {
    gamma: f64,
    coordinate: Option<f64>,
    solution: StationarySolution,
}

/// Follows `spec` across `gamma_range` with nodes `step` apart, attaching
/// spectra, stability and the curve's own events (ends and stability
/// changes).
pub fn sweep_branch(spec: &BranchSpec, gamma_range: (f64, f64), step: f64) -> Result<BranchCurve> {
    let (lo, hi) = gamma_range;
    if !(step > 0.0 && step.is_finite()) {
        return Err(OligomerError::InvalidInput(format!("step must be positive, got {step}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(OligomerError::InvalidInput(format!("gamma range needs min < max, got [{lo}, {hi}]")));
    }
    spec.validate()?;
    let nodes = lattice(lo, hi, step);
    let (raw, lower, upper) = match spec.topology {
        Topology::Dimer => sweep_dimer(spec, &nodes)?,
        Topology::Trimer => sweep_trimer(spec, &nodes, step)?,
    };
    if raw.is_empty() {
        return Err(OligomerError::EmptyBranch { branch: spec.label(), lo, hi });
    }

    let params = |g: f64| spec.params(g);
    let analyzed: Vec<std::result::Result<BranchPoint, f64>> = raw
        .into_par_iter()
        .map(|r| match analyze(&r.solution, &params(r.gamma)) {
            Ok(spectrum) => Ok(BranchPoint {
                gamma: r.gamma,
                stability: classify_stability(&spectrum, DEFAULT_TOL),
                spectrum,
                solution: r.solution,
                coordinate: r.coordinate,
            }),
            Err(_) if r.solution.critical => Err(f64::NAN),
            Err(_) => Err(r.gamma),
        })
        .collect();
    let mut points = Vec::with_capacity(analyzed.len());
    let mut skipped = Vec::new();
    for a in analyzed {
        match a {
            Ok(p) => points.push(p),
            Err(g) if g.is_nan() => {}
            Err(g) => skipped.push(g),
        }
    }
    if points.is_empty() {
        return Err(OligomerError::EmptyBranch { branch: spec.label(), lo, hi });
    }

    let mut curve = BranchCurve {
        spec: *spec,
        points,
        events: Vec::new(),
        lower,
        upper,
        skipped,
    };
    curve.events = curve_events(&curve, step);
    Ok(curve)
}

/// The state of `spec` at a single `gamma`, with its spectrum. Trimer
/// branches are tracked there from their anchor.
pub fn point_at(spec: &BranchSpec, gamma: f64) -> Result<BranchPoint> {
    spec.validate()?;
    if !gamma.is_finite() {
        return Err(OligomerError::InvalidInput(format!("gamma must be finite, got {gamma}")));
    }
    let missing = || OligomerError::EmptyBranch {
        branch: spec.label(),
        lo: gamma,
        hi: gamma,
    };
    let (solution, coordinate) = match spec.topology {
        Topology::Dimer => (dimer_state(spec, gamma).ok_or_else(missing)?, None),
        Topology::Trimer => {
            let tracker =
                Tracker::new(spec).ok_or_else(|| OligomerError::InvalidInput(format!("{} has no reduction", spec.label())))?;
            let anchor = match spec.selector {
                BranchSelector::Root { anchor_gamma, .. } | BranchSelector::Mirror { anchor_gamma, .. } => anchor_gamma,
                BranchSelector::Sign { .. } => unreachable!("validated selector"),
            };
            let roots = enumerate(tracker.red, &spec.params(anchor))?;
            let &(s0, _) = roots.get(tracker.index()).ok_or_else(missing)?;
            let s = tracker.follow((anchor, s0), gamma, DEFAULT_STEP).ok_or_else(missing)?;
            (tracker.solution(gamma, s, false).ok_or_else(missing)?, Some(s))
        }
    };
    let spectrum = analyze(&solution, &spec.params(gamma))?;
    Ok(BranchPoint {
        gamma,
        stability: classify_stability(&spectrum, DEFAULT_TOL),
        spectrum,
        solution,
        coordinate,
    })
}

type Swept = (Vec<RawPoint>, CurveEnd, CurveEnd);

fn sweep_dimer(spec: &BranchSpec, nodes: &[f64]) -> Result<Swept> {
    let states: Vec<Option<StationarySolution>> = nodes.par_iter().map(|&g| dimer_state(spec, g)).collect();
    let Some(first) = states.iter().position(Option::is_some) else {
        return Ok((Vec::new(), CurveEnd::Boundary, CurveEnd::Boundary));
    };
    // the first contiguous run of existence
    let last = first + states[first..].iter().take_while(|s| s.is_some()).count() - 1;
    let exists = |g: f64| dimer_state(spec, g).is_some();
    let boundary = |inside: f64, outside: f64| {
        let (t, f) = bisect_predicate(exists, inside, outside, BOUNDARY_WIDTH);
        let mut sol = dimer_state(spec, t).expect("bisection keeps the inside end");
        sol.critical = true;
        let end = CurveEnd::Terminated {
            gamma: 0.5 * (t + f),
            width: (f - t).abs(),
        };
        (RawPoint { gamma: t, coordinate: None, solution: sol }, end)
    };

    let mut raw = Vec::new();
    let mut lower = CurveEnd::Boundary;
    let mut upper = CurveEnd::Boundary;
    if first > 0 {
        let (p, end) = boundary(nodes[first], nodes[first - 1]);
        lower = end;
        raw.push(p);
    }
    for (k, s) in states.into_iter().enumerate().take(last + 1).skip(first) {
        raw.push(RawPoint {
            gamma: nodes[k],
            coordinate: None,
            solution: s.expect("inside the run"),
        });
    }
    if last + 1 < nodes.len() {
        let (p, end) = boundary(nodes[last], nodes[last + 1]);
        upper = end;
        raw.push(p);
    }
    dedup(&mut raw);
    Ok((raw, lower, upper))
}

fn sweep_trimer(spec: &BranchSpec, nodes: &[f64], step: f64) -> Result<Swept> {
    let tracker = Tracker::new(spec).ok_or_else(|| OligomerError::InvalidInput(format!("{} has no reduction", spec.label())))?;
    let anchor = match spec.selector {
        BranchSelector::Root { anchor_gamma, .. } | BranchSelector::Mirror { anchor_gamma, .. } => anchor_gamma,
        BranchSelector::Sign { .. } => unreachable!("validated selector"),
    };
    let roots = enumerate(tracker.red, &spec.params(anchor))?;
    let Some(&(s0, _)) = roots.get(tracker.index()) else {
        return Err(OligomerError::EmptyBranch {
            branch: format!("{} (only {} roots at the anchor {anchor})", spec.label(), roots.len()),
            lo: nodes[0],
            hi: nodes[nodes.len() - 1],
        });
    };

    let up: Vec<f64> = nodes.iter().copied().filter(|&g| g >= anchor).collect();
    let down: Vec<f64> = nodes.iter().rev().copied().filter(|&g| g < anchor).collect();
    let max_step = step.max(MIN_STEP);
    let ((up_pts, up_term), (down_pts, down_term)) = rayon::join(
        || tracker.track((anchor, s0), &up, max_step),
        || tracker.track((anchor, s0), &down, max_step),
    );

    let mut coords: Vec<(f64, f64, bool)> = down_pts
        .into_iter()
        .rev()
        .chain(up_pts)
        .map(|(g, s)| (g, s, false))
        .collect();
    let mut end_of = |term: Option<Termination>| match term {
        None => CurveEnd::Boundary,
        Some(t) => {
            let (a, b) = (t.last_gamma.min(t.fail_gamma), t.last_gamma.max(t.fail_gamma));
            let fold = tracker
                .refine_fold(&t)
                .filter(|&(g, _)| g >= a - 1e-6 && g <= b + 1e-6);
            match fold {
                Some((g, s)) if tracker.solution(g, s, true).is_some() => {
                    coords.push((g, s, true));
                    CurveEnd::Terminated {
                        gamma: g,
                        width: b - a,
                    }
                }
                _ => {
                    coords.push((t.last_gamma, t.last_s, false));
                    CurveEnd::Terminated {
                        gamma: 0.5 * (a + b),
                        width: b - a,
                    }
                }
            }
        }
    };
    let lower = end_of(down_term);
    let upper = end_of(up_term);
    // anchors beyond the range that terminate before reaching it
    if coords.iter().all(|c| c.0 < nodes[0] || c.0 > nodes[nodes.len() - 1]) {
        return Ok((Vec::new(), lower, upper));
    }

    let mut raw: Vec<RawPoint> = coords
        .into_par_iter()
        .filter_map(|(g, s, critical)| {
            tracker.solution(g, s, critical).map(|solution| RawPoint {
                gamma: g,
                coordinate: Some(s),
                solution,
            })
        })
        .collect();
    raw.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));
    dedup(&mut raw);
    Ok((raw, lower, upper))
}

/// Keeps gammas strictly increasing, preferring regular over critical
/// points at coincident nodes.
fn dedup(raw: &mut Vec<RawPoint>) {
    raw.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.solution.critical.cmp(&b.solution.critical)));
    raw.dedup_by(|b, a| (b.gamma - a.gamma).abs() <= 1e-12);
}

/// State on the curve at `gamma`, continued from the point `from`.
fn state_near(curve: &BranchCurve, from: &BranchPoint, gamma: f64, step: f64) -> Option<StationarySolution> {
    match curve.spec.topology {
        Topology::Dimer => dimer_state(&curve.spec, gamma),
        Topology::Trimer => {
            let tracker = Tracker::new(&curve.spec)?;
            let s = tracker.follow((from.gamma, from.coordinate?), gamma, step)?;
            tracker.solution(gamma, s, false)
        }
    }
}

fn curve_events(curve: &BranchCurve, step: f64) -> Vec<Event> {
    let label = curve.label();
    let mut events = Vec::new();
    let end_event = |end: CurveEnd, kind: EventKind, p: &BranchPoint| match end {
        CurveEnd::Boundary => None,
        CurveEnd::Terminated { gamma, width } => Some(Event {
            kind,
            gamma_located: gamma,
            refinement_width: width,
            participants: vec![label.clone()],
            energy: Some(p.solution.energy),
        }),
    };
    events.extend(end_event(curve.lower, EventKind::Emergence, &curve.points[0]));
    events.extend(end_event(curve.upper, EventKind::Termination, &curve.points[curve.points.len() - 1]));

    let regular: Vec<&BranchPoint> = curve.points.iter().filter(|p| !p.solution.critical).collect();
    let changes: Vec<(&BranchPoint, &BranchPoint)> = regular
        .windows(2)
        .filter(|w| w[0].stable() != w[1].stable())
        .map(|w| (w[0], w[1]))
        .collect();
    let located: Vec<Event> = changes
        .par_iter()
        .map(|&(p, q)| {
            let params = |g: f64| curve.spec.params(g);
            let same = |g: f64| {
                state_near(curve, p, g, step)
                    .and_then(|s| analyze(&s, &params(g)).ok())
                    .map(|sp| classify_stability(&sp, DEFAULT_TOL).stable == p.stable())
                    .unwrap_or(false)
            };
            let (t, f) = bisect_predicate(same, p.gamma, q.gamma, EVENT_WIDTH);
            let energy = state_near(curve, p, t, step).map(|s| s.energy);
            Event {
                kind: EventKind::StabilityChange,
                gamma_located: 0.5 * (t + f),
                refinement_width: (f - t).abs(),
                participants: vec![label.clone()],
                energy,
            }
        })
        .collect();
    events.extend(located);
    events.sort_by(|a, b| a.gamma_located.total_cmp(&b.gamma_located));
    events
}

fn end_point(curve: &BranchCurve, upper: bool) -> Option<(&BranchPoint, f64, f64)> {
    let (end, p) = if upper {
        (curve.upper, &curve.points[curve.points.len() - 1])
    } else {
        (curve.lower, &curve.points[0])
    };
    match end {
        CurveEnd::Terminated { gamma, width } => Some((p, gamma, width)),
        CurveEnd::Boundary => None,
    }
}

/// Distance between two states (sites after gauge fixing, plus `E`).
fn state_distance(a: &StationarySolution, b: &StationarySolution) -> f64 {
    let mut a = a.clone();
    let mut b = b.clone();
    a.regauge();
    b.regauge();
    a.sites
        .iter()
        .zip(&b.sites)
        .map(|(x, y)| (x - y).norm())
        .fold((a.energy - b.energy).abs(), f64::max)
}

/// Relative split of the outer powers.
fn outer_gap(sol: &StationarySolution) -> f64 {
    let first = sol.sites[0].norm_sqr();
    let last = sol.sites[sol.topology.last_site()].norm_sqr();
    (first - last).abs() / (first + last).max(f64::MIN_POSITIVE)
}

/// Pitchfork location on an asymmetric curve ending near the symmetric
/// point, refined on the defining scalar, with the energy there.
fn pitchfork_at(curve: &BranchCurve, gamma: f64) -> (f64, f64, f64) {
    let spec = &curve.spec;
    let scalar = |g: f64| -> f64 {
        let params = spec.params(g);
        match spec.reduction() {
            None => asymmetric_discriminant(&params),
            Some(red) => {
                let (_, _, e) = red.coords(&params, 0.5);
                Reduction::Special.residual(&params, e)
            }
        }
    };
    let energy = |g: f64| -> f64 {
        let params = spec.params(g);
        match spec.reduction() {
            None => -g * spec.rho_r / spec.rho_im,
            Some(red) => red.coords(&params, 0.5).2,
        }
    };
    let mut half = 1e-4;
    while half < 0.05 {
        let (a, b) = (gamma - half, gamma + half);
        if scalar(a) * scalar(b) <= 0.0 {
            let g = bisect(scalar, a, b, BOUNDARY_WIDTH);
            return (g, BOUNDARY_WIDTH, energy(g));
        }
        half *= 4.0;
    }
    (gamma, 0.0, energy(gamma))
}

/// Events involving several curves (saddle-nodes where two ends coalesce,
/// pitchforks where an asymmetric pair meets a symmetric parent) together
/// with every curve's own events, ordered by `gamma`.
pub fn detect_events(curves: &[BranchCurve]) -> Vec<Event> {
    let mut events: Vec<Event> = curves.iter().flat_map(|c| c.events.iter().cloned()).collect();
    let same_model = |a: &BranchSpec, b: &BranchSpec| {
        a.topology == b.topology && a.epsilon == b.epsilon && a.rho_r == b.rho_r && a.rho_im == b.rho_im
    };

    // pitchforks
    let mut pitchforks: Vec<Event> = Vec::new();
    let mut pitchfork_ends: Vec<(usize, bool)> = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        if c.spec.case != CaseLabel::AsymmetricII {
            continue;
        }
        for upper in [false, true] {
            let Some((p, gamma, _)) = end_point(c, upper) else { continue };
            if outer_gap(&p.solution) > PITCHFORK_GAP {
                continue;
            }
            pitchfork_ends.push((i, upper));
            let (g, width, energy) = pitchfork_at(c, gamma);
            let parent = curves
                .iter()
                .filter(|d| d.spec.case != CaseLabel::AsymmetricII && same_model(&d.spec, &c.spec))
                .filter_map(|d| {
                    let (e, amp) = d.interpolate(g)?;
                    let miss = (e - energy).abs().max((amp - p.solution.sites[0].norm()).abs());
                    (miss < 1e-2).then_some((miss, d.label()))
                })
                .min_by(|a, b| a.0.total_cmp(&b.0));
            let mut participants = vec![c.label()];
            participants.extend(parent.map(|p| p.1));
            match pitchforks.iter_mut().find(|e| (e.gamma_located - g).abs() <= 1e-6) {
                Some(e) => {
                    for l in participants {
                        if !e.participants.contains(&l) {
                            e.participants.push(l);
                        }
                    }
                }
                None => pitchforks.push(Event {
                    kind: EventKind::Pitchfork,
                    gamma_located: g,
                    refinement_width: width,
                    participants,
                    energy: Some(energy),
                }),
            }
        }
    }
    events.extend(pitchforks);

    // saddle-nodes
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            let (a, b) = (&curves[i], &curves[j]);
            if !same_model(&a.spec, &b.spec) {
                continue;
            }
            for upper in [false, true] {
                if pitchfork_ends.contains(&(i, upper)) || pitchfork_ends.contains(&(j, upper)) {
                    continue;
                }
                let (Some((pa, ga, wa)), Some((pb, gb, wb))) = (end_point(a, upper), end_point(b, upper)) else {
                    continue;
                };
                let zero = |s: &StationarySolution| s.sites.iter().all(|z| z.norm() < 1e-3);
                if zero(&pa.solution) || zero(&pb.solution) {
                    continue;
                }
                if (ga - gb).abs() > COALESCE || state_distance(&pa.solution, &pb.solution) > COALESCE {
                    continue;
                }
                events.push(Event {
                    kind: EventKind::SaddleNode,
                    gamma_located: 0.5 * (ga + gb),
                    refinement_width: wa.max(wb).max((ga - gb).abs()),
                    participants: vec![a.label(), b.label()],
                    energy: Some(0.5 * (pa.solution.energy + pb.solution.energy)),
                });
            }
        }
    }
    events.sort_by(|a, b| a.gamma_located.total_cmp(&b.gamma_located).then(a.kind.cmp(&b.kind)));
    events
}

/// Closed-form critical values of `gamma` (and the energy at the dimer
/// pitchfork) for the model constants of `spec`. Entries that are not real
/// or not defined are omitted; `energy` enters the symmetric-family ones.
pub fn analytic_critical_points(epsilon: f64, rho_r: f64, rho_im: f64, energy: Option<f64>) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let q = rho_r * rho_r + rho_im * rho_im;
    if let Some(e) = energy {
        // (rho_r gamma + rho_im E)^2 = q eps^2
        if rho_r != 0.0 {
            let root = epsilon * q.sqrt();
            let saddle = [(root - rho_im * e) / rho_r, (-root - rho_im * e) / rho_r]
                .into_iter()
                .filter(|g| *g >= 0.0)
                .min_by(f64::total_cmp);
            if let Some(g) = saddle {
                out.insert("dimer_caseI_saddle".into(), g);
            }
        }
        let zero = 2.0 * epsilon * epsilon - e * e;
        if zero >= 0.0 {
            out.insert("trimer_zero_amplitude".into(), zero.sqrt());
        }
    }
    if rho_im != 0.0 && q > 0.0 {
        let g = 2.0 * epsilon * rho_im / q.sqrt();
        out.insert("dimer_pitchfork".into(), g);
        out.insert("dimer_pitchfork_energy".into(), -g * rho_r / rho_im);
        out.insert("dimer_caseIII_termination".into(), 2.0 * epsilon);
    }
    out.insert("linear_PT_dimer".into(), epsilon);
    out.insert("linear_PT_trimer".into(), std::f64::consts::SQRT_2 * epsilon);
    out
}

#[cfg(test)]
mod tests;
