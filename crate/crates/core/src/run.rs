//! Command execution behind the binary. Every output is rendered in memory
//! first and written in one pass, so a failing run leaves nothing behind.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::branches::{
    dimer_asymmetric, dimer_special_symmetric, dimer_symmetric, trimer_asymmetric, trimer_special_symmetric,
    trimer_symmetric,
};
use crate::config::{CommandName, Format, RunConfig};
use crate::continuation::{analytic_critical_points, detect_events, point_at, sweep_branch, BranchCurve, CurveEnd};
use crate::dynamics::{classify_outcome, integrate, perturb};
use crate::error::{OligomerError, Result};
use crate::model::{Params, Sign, StationarySolution, Topology};
use crate::tables::{branch_table, emit_csv, emit_json, spectrum_table, trajectory_table, Table};
use crate::validation;

pub const EXIT_OK: i32 = 0;
/// Some built-in checks failed (`validate` only).
pub const EXIT_CHECKS_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub outputs: Vec<Output>,
    /// Lines for the terminal.
    pub summary: Vec<String>,
    pub exit_code: i32,
}

pub fn exit_code(err: &OligomerError) -> i32 {
    match err {
        OligomerError::InvalidInput(_)
        | OligomerError::InvalidRegime(_)
        | OligomerError::EnergyDetermined { .. }
        | OligomerError::Config(_)
        | OligomerError::SchemaViolation(_)
        | OligomerError::Io(_) => EXIT_CONFIG,
        OligomerError::NoConvergence { .. }
        | OligomerError::SingularJacobian { .. }
        | OligomerError::NumericalFailure(_)
        | OligomerError::EmptyBranch { .. }
        | OligomerError::StepUnderflow { .. } => EXIT_NUMERICAL,
    }
}

/// Machine-readable error report.
pub fn error_json(err: &OligomerError) -> String {
    json!({
        "error": { "kind": err.kind(), "message": err.to_string() },
        "exit_code": exit_code(err),
    })
    .to_string()
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| OligomerError::Io(e.to_string()))
}

fn tabular(cfg: &RunConfig, stem: &str, table: &Table, out: &mut Vec<Output>) -> Result<()> {
    if cfg.wants(Format::Csv) {
        out.push(Output {
            name: format!("{stem}.csv"),
            contents: emit_csv(table)?,
        });
    }
    if cfg.wants(Format::Json) {
        out.push(Output {
            name: format!("{stem}.json"),
            contents: emit_json(table)?,
        });
    }
    Ok(())
}

pub fn execute(command: CommandName, cfg: &RunConfig) -> Result<Report> {
    cfg.validate(command)?;
    match command {
        CommandName::Sweep => sweep(cfg),
        CommandName::Spectrum => spectrum(cfg),
        CommandName::Evolve => evolve(cfg),
        CommandName::Critical => critical(cfg),
        CommandName::Validate => validate(),
    }
}

fn end_json(end: &CurveEnd) -> serde_json::Value {
    serde_json::to_value(end).unwrap_or(serde_json::Value::Null)
}

fn sweep(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.params()?;
    let [lo, hi] = p.gamma_range.expect("validated");
    let specs = cfg.sweep_specs()?;
    let swept: Vec<Result<BranchCurve>> = specs
        .par_iter()
        .map(|s| sweep_branch(s, (lo, hi), cfg.numerics.step))
        .collect();
    let mut curves = Vec::new();
    let mut empty = Vec::new();
    for (spec, r) in specs.iter().zip(swept) {
        match r {
            Ok(c) => curves.push(c),
            Err(OligomerError::EmptyBranch { .. }) => empty.push(spec.label()),
            Err(e) => return Err(e),
        }
    }
    if curves.is_empty() {
        return Err(OligomerError::EmptyBranch {
            branch: empty.join(", "),
            lo,
            hi,
        });
    }
    let events = detect_events(&curves);
    let mut outputs = Vec::new();
    let mut summary = Vec::new();
    for c in &curves {
        tabular(cfg, &c.label(), &branch_table(c), &mut outputs)?;
        let (a, b) = c.gamma_range();
        summary.push(format!("{}: {} points on [{a:.6}, {b:.6}]", c.label(), c.points.len()));
    }
    let branches: Vec<serde_json::Value> = curves
        .iter()
        .map(|c| {
            json!({
                "label": c.label(),
                "spec": c.spec,
                "points": c.points.len(),
                "lower": end_json(&c.lower),
                "upper": end_json(&c.upper),
                "skipped": c.skipped,
            })
        })
        .collect();
    for e in &events {
        summary.push(format!("{:?} at gamma {:.6}: {}", e.kind, e.gamma_located, e.participants.join(", ")));
    }
    outputs.push(Output {
        name: "events.json".into(),
        contents: to_json(&json!({ "branches": branches, "empty": empty, "events": events }))?,
    });
    Ok(Report {
        outputs,
        summary,
        exit_code: EXIT_OK,
    })
}

fn spectrum(cfg: &RunConfig) -> Result<Report> {
    let gamma = cfg.params()?.gamma.expect("validated");
    let spec = cfg.single_spec()?;
    let point = point_at(&spec, gamma)?;
    let mut outputs = Vec::new();
    if cfg.wants(Format::Csv) {
        outputs.push(Output {
            name: "spectrum.csv".into(),
            contents: emit_csv(&spectrum_table(&point.spectrum))?,
        });
    }
    if cfg.wants(Format::Json) {
        let sites: Vec<[f64; 2]> = point.solution.sites.iter().map(|z| [z.re, z.im]).collect();
        let eigenvalues: Vec<[f64; 2]> = point.spectrum.eigenvalues.iter().map(|l| [l.re, l.im]).collect();
        outputs.push(Output {
            name: "spectrum.json".into(),
            contents: to_json(&json!({
                "branch": spec.label(),
                "gamma": gamma,
                "solution": { "id": point.solution.id(), "E": point.solution.energy, "sites": sites },
                "eigenvalues": eigenvalues,
                "residuals": point.spectrum.residuals,
                "max_Re_lambda": point.spectrum.max_real(),
                "stability": point.stability,
            }))?,
        });
    }
    let summary = vec![format!(
        "{} at gamma {gamma}: max Re lambda = {:.6e}, {}",
        spec.label(),
        point.spectrum.max_real(),
        if point.stable() { "stable" } else { "unstable" }
    )];
    Ok(Report {
        outputs,
        summary,
        exit_code: EXIT_OK,
    })
}

/// Every stationary state of the model at `params.gamma` that the closed
/// forms and root enumerations produce.
pub fn catalog(params: &Params) -> Vec<StationarySolution> {
    let mut out = Vec::new();
    let free = params.without_energy();
    match params.topology {
        Topology::Dimer => {
            for sign in [Sign::Plus, Sign::Minus] {
                if params.energy.is_some() {
                    out.extend(dimer_symmetric(params, sign).ok().flatten());
                }
                out.extend(dimer_asymmetric(&free, sign).ok().flatten());
                out.extend(dimer_special_symmetric(&free, sign).ok().flatten());
            }
        }
        Topology::Trimer => {
            if params.energy.is_some() {
                out.extend(trimer_symmetric(params).unwrap_or_default());
            }
            out.extend(trimer_asymmetric(&free).unwrap_or_default());
            out.extend(trimer_special_symmetric(&free).unwrap_or_default());
        }
    }
    out
}

fn evolve(cfg: &RunConfig) -> Result<Report> {
    let gamma = cfg.params()?.gamma.expect("validated");
    let spec = cfg.single_spec()?;
    let n = &cfg.numerics;
    let point = point_at(&spec, gamma)?;
    let params = spec.params(gamma);
    let start = perturb(&point.solution, n.perturbation, n.seed)?;
    let mut traj = integrate(&start, &params, n.t_end, &n.controls())?;
    let mut known = catalog(&params);
    if !known.iter().any(|s| s.id() == point.solution.id()) {
        known.push(point.solution.clone());
    }
    let outcome = classify_outcome(&traj, &known);
    traj.outcome = Some(outcome.clone());
    let mut outputs = Vec::new();
    tabular(cfg, "trajectory", &trajectory_table(&traj), &mut outputs)?;
    outputs.push(Output {
        name: "outcome.json".into(),
        contents: to_json(&json!({
            "branch": spec.label(),
            "initial_id": point.solution.id(),
            "gamma": gamma,
            "seed": n.seed,
            "perturbation": n.perturbation,
            "t_end": n.t_end,
            "samples": traj.times.len(),
            "blow_up_time": traj.blow_up_time,
            "blow_up_site": traj.blow_up_site,
            "outcome": outcome,
        }))?,
    });
    let summary = vec![format!(
        "{} at gamma {gamma}, seed {}: {:?}{}",
        spec.label(),
        n.seed,
        outcome.kind,
        outcome.target_id.as_ref().map(|t| format!(" -> {t}")).unwrap_or_default()
    )];
    Ok(Report {
        outputs,
        summary,
        exit_code: EXIT_OK,
    })
}

fn critical(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.params()?;
    let points = analytic_critical_points(p.epsilon, p.rho_r, p.rho_im, p.energy);
    let summary = points.iter().map(|(k, v)| format!("{k} = {v:.6}")).collect();
    Ok(Report {
        outputs: vec![Output {
            name: "critical.json".into(),
            contents: to_json(&points)?,
        }],
        summary,
        exit_code: EXIT_OK,
    })
}

fn validate() -> Result<Report> {
    let checks = validation::run_all();
    let summary = checks
        .iter()
        .map(|c| format!("{} [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.detail))
        .collect();
    let all = checks.iter().all(|c| c.passed);
    Ok(Report {
        outputs: vec![Output {
            name: "validation.json".into(),
            contents: to_json(&checks)?,
        }],
        summary,
        exit_code: if all { EXIT_OK } else { EXIT_CHECKS_FAILED },
    })
}

/// Writes every output under `dir`; on failure the files already written
/// (and `dir`, if this call created it) are removed again.
pub fn write_outputs(dir: &Path, outputs: &[Output]) -> Result<Vec<PathBuf>> {
    let created = !dir.exists();
    let io = |e: std::io::Error, p: &Path| OligomerError::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    let mut written = Vec::new();
    for o in outputs {
        let path = dir.join(&o.name);
        if let Err(e) = std::fs::write(&path, &o.contents) {
            for w in &written {
                let _ = std::fs::remove_file(w);
            }
            let _ = std::fs::remove_file(&path);
            if created {
                let _ = std::fs::remove_dir(dir);
            }
            return Err(io(e, &path));
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(exit_code(&OligomerError::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&OligomerError::EnergyDetermined { case: "asym-II" }), EXIT_CONFIG);
        assert_eq!(exit_code(&OligomerError::StepUnderflow { t: 1.0, h: 1e-15 }), EXIT_NUMERICAL);
        let v: serde_json::Value = serde_json::from_str(&error_json(&OligomerError::NumericalFailure("x".into()))).unwrap();
        assert_eq!(v["error"]["kind"], "numerical-failure");
        assert_eq!(v["exit_code"], 3);
    }

    #[test]
    fn failed_write_leaves_nothing_behind() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("fresh");
        let outputs = vec![
            Output {
                name: "a.csv".into(),
                contents: "x\n".into(),
            },
            Output {
                name: "missing/b.csv".into(),
                contents: "y\n".into(),
            },
        ];
        assert!(write_outputs(&dir, &outputs).is_err());
        assert!(!dir.exists());
    }

    #[test]
    fn dimer_catalog_at_the_dynamics_point() {
        let p = Params::dimer(1.0, 1.5, -2.0, 1.0).unwrap().with_energy(1.0);
        let ids: Vec<String> = catalog(&p).iter().map(|s| s.id()).collect();
        // two symmetric, two asymmetric, two special
        assert_eq!(ids.len(), 6, "{ids:?}");
        assert!(ids.iter().all(|id| id.starts_with("dimer/")));
    }
}
