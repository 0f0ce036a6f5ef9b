//! The subcommands: each one resolves its inputs, calls into the core and
//! writes a manifest plus plot-ready data files to the output directory.

use crate::config::{ConfigError, InitSpec, RunConfig};
use crate::manifest::RunManifest;
use crate::output::{num, write_atomic, write_csv, write_snapshot};
use ibnls_core::dichotomy::{classify, DichotomyError};
use ibnls_core::evolution::{detect_blowup, evolve, EvolutionError};
use ibnls_core::functionals::{evaluate, gaussian};
use ibnls_core::ground_state::{solve_ground_state, GroundState, GroundStateError};
use ibnls_core::inequality::{
    check_gn, check_hardy, check_strauss, compact_embedding_probe, counterexample_growth, random_samples, ProbeSequence,
};
use ibnls_core::params::{validate_regime, RegimeReport};
use ibnls_core::virial::{blowup_functional_bound, build_cutoff, verify_virial, CutoffProfile, VirialReport};
use ibnls_core::{DerivedExponents, ModelParams, RadialField, RadialGrid, Theorem};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GroundState,
    Evolve,
    Classify,
    Virial,
    VerifyInequalities,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GroundState => "groundstate",
            Command::Evolve => "evolve",
            Command::Classify => "classify",
            Command::Virial => "virial",
            Command::VerifyInequalities => "verify-inequalities",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("parameters outside the required regime; violated: {}", .0.violations().join(", "))]
    Regime(Box<RegimeReport>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Regime(_) => 3,
            RunError::Numerical(_) => 4,
            RunError::Io(_) => 1,
        }
    }
}

impl From<GroundStateError> for RunError {
    fn from(e: GroundStateError) -> Self {
        match e {
            GroundStateError::Regime(r) => RunError::Regime(r),
            other => RunError::Numerical(other.to_string()),
        }
    }
}

impl From<EvolutionError> for RunError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::BadConfig(m) => RunError::Config(ConfigError::new("dt", m)),
            other => RunError::Numerical(other.to_string()),
        }
    }
}

/// Runs `command` and writes its manifest to `out/manifest.json`.
pub fn run(command: Command, config: &RunConfig, out: &Path) -> Result<RunManifest, RunError> {
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let mut manifest = RunManifest::new(command.name(), config.clone());
    let (outputs, files) = match command {
        Command::GroundState => ground_state_cmd(config, out)?,
        Command::Evolve => evolve_cmd(config, out)?,
        Command::Classify => classify_cmd(config)?,
        Command::Virial => virial_cmd(config, out)?,
        Command::VerifyInequalities => inequalities_cmd(config, out)?,
        Command::Sweep => sweep_cmd(config, out)?,
    };
    manifest.outputs = outputs;
    manifest.files = files;
    manifest.wall_clock_s = start.elapsed().as_secs_f64();
    write_atomic(&out.join("manifest.json"), manifest.to_json().as_bytes())?;
    Ok(manifest)
}

type Produced = (serde_json::Value, Vec<String>);

fn to_value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("report types are serializable")
}

fn grid(config: &RunConfig, p: &ModelParams) -> Result<Arc<RadialGrid>, RunError> {
    RadialGrid::new(p.n, config.r_max, config.m).map_err(|e| ConfigError::new("M", e.to_string()).into())
}

fn require(p: &ModelParams, theorem: Theorem) -> Result<RegimeReport, RunError> {
    let report = validate_regime(p, theorem);
    if report.passed() {
        Ok(report)
    } else {
        Err(RunError::Regime(Box::new(report)))
    }
}

#[derive(Serialize)]
struct GroundStateSummary {
    c_opt: f64,
    mass: f64,
    kinetic: f64,
    potential: f64,
    residual_euler: f64,
    residual_pohozaev: (f64, f64),
    residual_identity: f64,
    c_from_mass: f64,
    iterations: usize,
    exponents: DerivedExponents,
    advisories: Vec<String>,
}

fn solve(config: &RunConfig, p: &ModelParams) -> Result<(GroundState, GroundStateSummary), RunError> {
    let regime = require(p, Theorem::Gn)?;
    let gs = solve_ground_state(p, &grid(config, p)?, None, &config.ground_state)?;
    let summary = GroundStateSummary {
        c_opt: gs.c_opt,
        mass: gs.mass_z,
        kinetic: gs.kinetic_z,
        potential: gs.potential_z,
        residual_euler: gs.residual_euler,
        residual_pohozaev: gs.residual_pohozaev,
        residual_identity: gs.residual_identity,
        c_from_mass: gs.c_from_mass,
        iterations: gs.iterations,
        exponents: p.exponents(),
        advisories: regime.advisories,
    };
    Ok((gs, summary))
}

fn ground_state_cmd(config: &RunConfig, out: &Path) -> Result<Produced, RunError> {
    let p = config.params()?;
    let (gs, summary) = solve(config, &p)?;
    write_snapshot(&out.join("zeta.txt"), &gs.zeta, p.b, p.q, 0.0)?;
    Ok((to_value(&summary), vec!["zeta.txt".into()]))
}

/// Initial datum and, when it was needed, the ground state it came from.
fn initial(config: &RunConfig, p: &ModelParams) -> Result<(RadialField, Option<GroundStateSummary>), RunError> {
    match &config.init {
        InitSpec::Gaussian { amplitude, width } => {
            let zero = RadialField::zeros(grid(config, p)?);
            Ok((gaussian(&zero, *amplitude, *width), None))
        }
        InitSpec::ScaledZeta(l) => {
            let (gs, summary) = solve(config, p)?;
            Ok((ibnls_core::ground_state::scaled_ground_state(&gs, *l), Some(summary)))
        }
        InitSpec::Snapshot(path) => {
            let file =
                std::fs::File::open(path).map_err(|e| ConfigError::new("init", format!("{}: {e}", path.display())))?;
            let (v, _, _, _) = RadialField::read_snapshot(std::io::BufReader::new(file))
                .map_err(|e| ConfigError::new("init", e.to_string()))?;
            if v.grid.dim() != p.n {
                return Err(ConfigError::new(
                    "init",
                    format!("snapshot has N = {}, run has N = {}", v.grid.dim(), p.n),
                )
                .into());
            }
            Ok((v, None))
        }
    }
}

fn basic_regime(p: &ModelParams) -> Result<(), RunError> {
    let report = validate_regime(p, Theorem::Gn);
    let basic = report
        .constraints
        .iter()
        .filter(|c| c.name == "q > 1" || c.name == "b >= 0")
        .all(|c| c.passed);
    if basic {
        Ok(())
    } else {
        Err(RunError::Regime(Box::new(report)))
    }
}

fn evolve_cmd(config: &RunConfig, out: &Path) -> Result<Produced, RunError> {
    let p = config.params()?;
    basic_regime(&p)?;
    let (v0, gs) = initial(config, &p)?;
    let traj = evolve(&v0, &config.evolution, &p)?;
    let rows: Vec<Vec<String>> = (0..traj.times.len())
        .map(|i| {
            vec![
                num(traj.times[i]),
                num(traj.mass_series[i]),
                num(traj.energy_series[i]),
                num(traj.kinetic_series[i]),
            ]
        })
        .collect();
    write_csv(&out.join("series.csv"), &["t", "mass", "energy", "kinetic"], &rows)?;
    write_snapshot(&out.join("initial.txt"), &v0, p.b, p.q, 0.0)?;
    let last = traj.snapshots.last().unwrap_or(&v0);
    write_snapshot(&out.join("final.txt"), last, p.b, p.q, traj.t_stop)?;
    let outputs = json!({
        "termination": traj.terminated,
        "failure": traj.failure,
        "t_stop": traj.t_stop,
        "mass_drift": traj.mass_drift(),
        "energy_drift": traj.energy_drift(),
        "blowup": detect_blowup(&traj, &config.evolution),
        "initial": evaluate(&v0, &p),
        "final": evaluate(last, &p),
        "ground_state": gs.as_ref().map(to_value),
    });
    Ok((
        outputs,
        vec!["series.csv".into(), "initial.txt".into(), "final.txt".into()],
    ))
}

fn classify_cmd(config: &RunConfig) -> Result<Produced, RunError> {
    let p = config.params()?;
    let (gs, summary) = solve(config, &p)?;
    let v0 = match &config.init {
        InitSpec::ScaledZeta(l) => ibnls_core::ground_state::scaled_ground_state(&gs, *l),
        _ => initial(config, &p)?.0,
    };
    let report = classify(&v0, &gs, &p, config.tol).map_err(|e| match e {
        DichotomyError::CriticalIndex(_) => RunError::Regime(Box::new(validate_regime(&p, Theorem::DichotomyBlowup))),
    })?;
    Ok((
        json!({ "dichotomy": report, "ground_state": to_value(&summary) }),
        Vec::new(),
    ))
}

#[derive(Serialize)]
struct VirialSummary {
    radius: Option<f64>,
    max_mismatch: f64,
    max_abs_mismatch: f64,
    rhs_scale: f64,
}

fn summarize(rep: &VirialReport, chi: &CutoffProfile) -> VirialSummary {
    VirialSummary {
        radius: chi.radius,
        max_mismatch: rep.max_mismatch,
        max_abs_mismatch: rep.max_abs_mismatch,
        rhs_scale: rep.rhs_scale,
    }
}

fn virial_cmd(config: &RunConfig, out: &Path) -> Result<Produced, RunError> {
    let p = config.params()?;
    basic_regime(&p)?;
    let (v0, _) = initial(config, &p)?;
    let mut profiles = vec![CutoffProfile::pure(&v0.grid)];
    if config.radius > 0.0 {
        profiles.push(build_cutoff(config.radius, &v0.grid).map_err(|e| ConfigError::new("radius", e.to_string()))?);
    }
    let traj = evolve(&v0, &config.evolution, &p)?;
    let reports: Vec<VirialReport> = profiles.iter().map(|chi| verify_virial(&traj, chi, &p)).collect();
    let mut header = vec!["t".to_string(), "kinetic".to_string()];
    for chi in &profiles {
        let tag = chi.radius.map_or("pure".to_string(), |r| format!("R{r}"));
        header.extend(["M", "dMdt_fd", "rhs"].iter().map(|c| format!("{c}_{tag}")));
    }
    let rows: Vec<Vec<String>> = (0..traj.times.len())
        .map(|i| {
            let mut row = vec![num(traj.times[i]), num(traj.kinetic_series[i])];
            for r in &reports {
                row.extend([num(r.morawetz[i]), num(r.dmdt_fd[i]), num(r.rhs[i])]);
            }
            row
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&out.join("virial.csv"), &header_refs, &rows)?;
    let bound = (config.radius > 0.0).then(|| {
        let b = blowup_functional_bound(&traj, &profiles[1]);
        json!({
            "lower_ratio": b.lower_ratio,
            "decreasing_from": b.decreasing_from,
            "decreasing_fraction": b.decreasing_fraction,
            "final_negative": b.final_negative,
            "max_abs": b.max_abs,
        })
    });
    let summaries: Vec<VirialSummary> = reports.iter().zip(&profiles).map(|(r, c)| summarize(r, c)).collect();
    let outputs = json!({
        "termination": traj.terminated,
        "t_stop": traj.t_stop,
        "virial": summaries,
        "cutoff_bound": bound,
    });
    Ok((outputs, vec!["virial.csv".into()]))
}

/// Translation radii `4, 8, 16, …` that keep a unit bump inside the grid.
fn probe_radii(r_max: f64) -> Vec<f64> {
    std::iter::successors(Some(4.0), |n| Some(n * 2.0))
        .take_while(|n| n + 1.0 < r_max)
        .collect()
}

fn inequalities_cmd(config: &RunConfig, out: &Path) -> Result<Produced, RunError> {
    let p = config.params()?;
    basic_regime(&p)?;
    let g = grid(config, &p)?;
    let samples = random_samples(&g, config.samples, config.seed);
    let gs = match validate_regime(&p, Theorem::Gn) {
        r if r.passed() => Some(solve_ground_state(&p, &g, None, &config.ground_state)?),
        _ => None,
    };
    let hardy_order = (p.n >= 3).then_some(1.0);
    let mut rows = Vec::with_capacity(samples.len());
    let (mut gn_max, mut strauss_max, mut hardy_max) = (f64::NAN, 0.0f64, f64::NAN);
    for (i, v) in samples.iter().enumerate() {
        let gn = gs.as_ref().map(|gs| check_gn(v, gs, &p));
        let strauss = check_strauss(v, 0.75)
            .map_err(|e| RunError::Numerical(e.to_string()))?
            .bound_ratio;
        let hardy = hardy_order
            .map(|s| check_hardy(v, s, 2.0))
            .transpose()
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        gn_max = gn.map_or(gn_max, |x| x.max(gn_max));
        strauss_max = strauss_max.max(strauss);
        hardy_max = hardy.map_or(hardy_max, |x| x.max(hardy_max));
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        rows.push(vec![i.to_string(), opt(gn), num(strauss), opt(hardy)]);
    }
    write_csv(
        &out.join("samples.csv"),
        &["sample", "gn_ratio", "strauss_ratio", "hardy_ratio"],
        &rows,
    )?;
    let ns = probe_radii(config.r_max);
    let growth = (ns.len() >= 2)
        .then(|| counterexample_growth(&p, &g, &ns))
        .transpose()
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let embedding = (ns.len() >= 2)
        .then(|| compact_embedding_probe(&p, &g, &ns, 0.1, ProbeSequence::Translated))
        .map(|r| r.map_or_else(|e| json!({ "skipped": e.to_string() }), |r| to_value(&r)));
    let finite = |x: f64| x.is_finite().then_some(x);
    let outputs = json!({
        "gn": gs.as_ref().map(|gs| json!({ "c_opt": gs.c_opt, "max_ratio": gn_max, "saturation": check_gn(&gs.zeta, gs, &p) })),
        "strauss_order": 0.75,
        "strauss_max_ratio": strauss_max,
        "hardy_order": hardy_order,
        "hardy_max_ratio": finite(hardy_max),
        "counterexample": growth,
        "compact_embedding": embedding,
    });
    Ok((outputs, vec!["samples.csv".into()]))
}

/// One row of the sweep summary.
#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    n: usize,
    b: f64,
    q: f64,
    status: &'static str,
    reason: String,
    c_opt: Option<f64>,
    exponents: DerivedExponents,
}

fn sweep_cmd(config: &RunConfig, out: &Path) -> Result<Produced, RunError> {
    let points = config.points();
    if points.len() > config.max_points {
        return Err(ConfigError::new(
            "max_points",
            format!("sweep has {} points, cap is {}", points.len(), config.max_points),
        )
        .into());
    }
    let rows: Vec<SweepRow> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = SweepRow {
                n: p.n,
                b: p.b,
                q: p.q,
                status: "ok",
                reason: String::new(),
                c_opt: None,
                exponents: p.exponents(),
            };
            let report = validate_regime(p, Theorem::Gn);
            if !report.passed() {
                row.status = "skipped";
                row.reason = format!("violated: {}", report.violations().join("; "));
                return row;
            }
            match run(Command::GroundState, &config.at(*p), &out.join(format!("point_{i:04}"))) {
                Ok(m) => row.c_opt = m.outputs["c_opt"].as_f64(),
                Err(e) => {
                    row.status = "failed";
                    row.reason = e.to_string();
                }
            }
            row
        })
        .collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                r.n.to_string(),
                num(r.b),
                num(r.q),
                r.status.to_string(),
                r.reason.clone(),
                r.c_opt.map(num).unwrap_or_default(),
                num(r.exponents.d),
                num(r.exponents.e),
                num(r.exponents.s_c),
            ]
        })
        .collect();
    write_csv(
        &out.join("summary.csv"),
        &["point", "N", "b", "q", "status", "reason", "C_opt", "D", "E", "s_c"],
        &table,
    )?;
    let c: Vec<f64> = rows.iter().filter_map(|r| r.c_opt).collect();
    let max_jump = c
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / w[0].abs())
        .fold(0.0f64, f64::max);
    let count = |s: &str| rows.iter().filter(|r| r.status == s).count();
    let outputs = json!({
        "points": rows.len(),
        "ok": count("ok"),
        "skipped": count("skipped"),
        "failed": count("failed"),
        "max_adjacent_c_opt_jump": max_jump,
        "rows": rows,
    });
    let mut files = vec!["summary.csv".to_string()];
    files.extend(
        rows.iter()
            .enumerate()
            .filter(|(_, r)| r.status == "ok")
            .map(|(i, _)| format!("point_{i:04}/manifest.json")),
    );
    Ok((outputs, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Config(ConfigError::new("q", "x")).exit_code(), 2);
        let r = validate_regime(&ModelParams::new(2, 1.0, 0.5), Theorem::Gn);
        assert_eq!(RunError::Regime(Box::new(r)).exit_code(), 3);
        assert_eq!(RunError::Numerical("x".into()).exit_code(), 4);
    }

    #[test]
    fn probe_radii_fit_the_grid() {
        assert_eq!(probe_radii(30.0), vec![4.0, 8.0, 16.0]);
        assert_eq!(probe_radii(34.0), vec![4.0, 8.0, 16.0, 32.0]);
        assert!(probe_radii(4.5).is_empty());
    }

    #[test]
    fn regime_violation_is_reported_before_solving() {
        let mut c = RunConfig::default();
        c.set("q", "1.5").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let err = run(Command::GroundState, &c, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
