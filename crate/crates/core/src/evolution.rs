//! Time integration of `i∂_t v = Δ²v − |x|^b |v|^{q-1} v` in radial symmetry.
//!
//! Strang splitting: the nonlinear flow is an exact phase rotation and the
//! linear flow `e^{-i t Δ²}` is applied in the eigenbasis of the discrete
//! Laplacian, so both substeps are unitary.

use crate::functionals::{energy_from, kinetic, mass, potential};
use crate::grid::{RadialField, RadialGrid, SpectralBasis};
use crate::params::ModelParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Monitors and snapshots are recorded every `snapshot_stride` steps.
    pub snapshot_stride: usize,
    /// Blow-up needs `‖Δv(t)‖² ≥ blowup_factor ‖Δv(0)‖²`.
    pub blowup_factor: f64,
    /// The focusing scale must stay above `resolution_guard · Δr`.
    pub resolution_guard: f64,
    /// Relative energy drift that counts as a step failure.
    pub energy_guard: f64,
    /// Damp the outer tenth of the domain.
    pub absorbing_layer: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_final: 1.0,
            snapshot_stride: 10,
            blowup_factor: 10.0,
            resolution_guard: 4.0,
            energy_guard: 0.05,
            absorbing_layer: false,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("invalid evolution config: {0}")]
    BadConfig(String),
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Completed,
    BlowupDetected,
    StepFailure,
}

/// Sampled solution with its monitors.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<RadialField>,
    pub mass_series: Vec<f64>,
    pub energy_series: Vec<f64>,
    pub kinetic_series: Vec<f64>,
    pub terminated: Termination,
    /// Reason for a step failure.
    pub failure: Option<String>,
    pub t_stop: f64,
    /// Grid spacing `Δr`.
    pub spacing: f64,
}

impl Trajectory {
    /// `max |M(t) − M(0)| / M(0)` divided by the elapsed time.
    pub fn mass_drift(&self) -> f64 {
        drift(&self.mass_series) / self.t_stop
    }

    /// `max |E(t) − E(0)| / |E(0)|` divided by the elapsed time.
    pub fn energy_drift(&self) -> f64 {
        drift(&self.energy_series) / self.t_stop
    }
}

fn drift(series: &[f64]) -> f64 {
    let Some(&first) = series.first() else {
        return 0.0;
    };
    let scale = first.abs();
    if scale == 0.0 {
        return 0.0;
    }
    series.iter().fold(0.0f64, |a, x| a.max((x - first).abs())) / scale
}

/// Reusable split-step propagator for a fixed time step (which may be negative).
pub struct Propagator {
    basis: Arc<SpectralBasis>,
    rho: Arc<Vec<f64>>,
    phases: Vec<Complex64>,
    mask: Option<Vec<f64>>,
    half_dt: f64,
    q: f64,
    nonlinear: bool,
}

impl Propagator {
    pub fn new(grid: &Arc<RadialGrid>, p: &ModelParams, dt: f64) -> Self {
        let basis = grid.basis();
        let phases = basis
            .lambda
            .iter()
            .map(|l| Complex64::from_polar(1.0, -dt * l * l))
            .collect();
        Self {
            basis,
            rho: grid.potential_factor(p.b),
            phases,
            mask: None,
            half_dt: dt / 2.0,
            q: p.q,
            nonlinear: true,
        }
    }

    /// Linear flow only.
    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    /// Quadratic damping ramp on the outer tenth of `[0, R_max]`.
    pub fn with_absorbing_layer(mut self, grid: &RadialGrid) -> Self {
        let r0 = 0.9 * grid.r_max();
        let width = grid.r_max() - r0;
        let strength = 50.0 * self.half_dt.abs();
        self.mask = Some(
            grid.nodes()
                .iter()
                .map(|&r| {
                    let s = ((r - r0) / width).max(0.0);
                    (-strength * s * s).exp()
                })
                .collect(),
        );
        self
    }

    fn rotate(&self, v: &mut [Complex64]) {
        if !self.nonlinear {
            return;
        }
        for (x, r) in v.iter_mut().zip(self.rho.iter()) {
            let theta = self.half_dt * r * x.norm().powf(self.q - 1.0);
            *x *= Complex64::from_polar(1.0, theta);
        }
    }

    /// One Strang step in place.
    pub fn step(&self, v: &mut [Complex64]) {
        self.rotate(v);
        self.basis.apply_complex(v, &self.phases);
        self.rotate(v);
        if let Some(mask) = &self.mask {
            for (x, m) in v.iter_mut().zip(mask) {
                *x *= m;
            }
        }
    }
}

/// One Strang step of size `dt`.
pub fn step(v: &RadialField, dt: f64, p: &ModelParams) -> Result<RadialField, EvolutionError> {
    let mut out = v.clone();
    Propagator::new(&v.grid, p, dt).step(&mut out.values);
    match out.first_non_finite() {
        Some(i) => Err(EvolutionError::NonFinite(i)),
        None => Ok(out),
    }
}

fn validate(cfg: &EvolutionConfig) -> Result<(), EvolutionError> {
    let bad = |s: &str| Err(EvolutionError::BadConfig(s.to_string()));
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return bad("dt must be positive");
    }
    if !(cfg.t_final > 0.0 && cfg.t_final.is_finite()) {
        return bad("t_final must be positive");
    }
    if cfg.snapshot_stride == 0 {
        return bad("snapshot_stride must be at least 1");
    }
    if cfg.blowup_factor.is_nan() || cfg.blowup_factor <= 1.0 {
        return bad("blowup_factor must exceed 1");
    }
    if cfg.energy_guard.is_nan() || cfg.energy_guard <= 0.0 {
        return bad("energy_guard must be positive");
    }
    Ok(())
}

/// `(‖v‖ / ‖Δv‖)^{1/2}` from mass and kinetic energy.
pub fn focusing_scale(mass: f64, kinetic: f64) -> f64 {
    (mass / kinetic).powf(0.25)
}

/// Integrates from `v0` up to `t_final`, stopping early on blow-up or failure.
pub fn evolve(v0: &RadialField, cfg: &EvolutionConfig, p: &ModelParams) -> Result<Trajectory, EvolutionError> {
    validate(cfg)?;
    let grid = v0.grid.clone();
    let mut prop = Propagator::new(&grid, p, cfg.dt);
    if cfg.absorbing_layer {
        prop = prop.with_absorbing_layer(&grid);
    }
    let steps = (cfg.t_final / cfg.dt).round() as usize;
    let mut traj = Trajectory {
        times: Vec::new(),
        snapshots: Vec::new(),
        mass_series: Vec::new(),
        energy_series: Vec::new(),
        kinetic_series: Vec::new(),
        terminated: Termination::Completed,
        failure: None,
        t_stop: 0.0,
        spacing: grid.spacing(),
    };
    let mut v = v0.clone();
    let guard = cfg.resolution_guard * grid.spacing();
    for n in 0..=steps {
        if n > 0 {
            prop.step(&mut v.values);
        }
        if n % cfg.snapshot_stride != 0 && n != steps {
            continue;
        }
        let t = n as f64 * cfg.dt;
        if let Some(i) = v.first_non_finite() {
            traj.terminated = Termination::StepFailure;
            traj.failure = Some(format!("non-finite value at node {i}"));
            break;
        }
        let (m, k) = (mass(&v), kinetic(&v));
        let e = energy_from(k, potential(&v, p), p);
        traj.times.push(t);
        traj.snapshots.push(v.clone());
        traj.mass_series.push(m);
        traj.energy_series.push(e);
        traj.kinetic_series.push(k);
        traj.t_stop = t;
        let (m0, e0, k0) = (traj.mass_series[0], traj.energy_series[0], traj.kinetic_series[0]);
        if e0 != 0.0 && ((e - e0) / e0).abs() > cfg.energy_guard {
            traj.terminated = Termination::StepFailure;
            traj.failure = Some(format!("energy drift {:e} at t = {t}", ((e - e0) / e0).abs()));
            break;
        }
        if m0 > 0.0 && focusing_scale(m, k) < guard {
            traj.terminated = Termination::StepFailure;
            traj.failure = Some(format!("solution under-resolved at t = {t}"));
            break;
        }
        if k0 > 0.0 && k >= cfg.blowup_factor * k0 {
            traj.terminated = Termination::BlowupDetected;
            break;
        }
    }
    Ok(traj)
}

/// Outcome of the blow-up monitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub flagged: bool,
    pub t_detect: Option<f64>,
    /// Least-squares slope of `ln ‖Δv‖²` against `t` up to detection.
    pub growth_exponent: f64,
    /// Largest `‖Δv(t)‖² / ‖Δv(0)‖²`.
    pub max_growth: f64,
    /// Smallest focusing scale divided by `Δr`.
    pub min_scale: f64,
}

/// Flags the first sample with `‖Δv‖² ≥ blowup_factor ‖Δv(0)‖²` whose focusing
/// scale is still at least `resolution_guard · Δr`.
pub fn detect_blowup(traj: &Trajectory, cfg: &EvolutionConfig) -> BlowupReport {
    let k = &traj.kinetic_series;
    let mut report = BlowupReport {
        flagged: false,
        t_detect: None,
        growth_exponent: 0.0,
        max_growth: 1.0,
        min_scale: f64::INFINITY,
    };
    let Some(&k0) = k.first() else {
        return report;
    };
    let mut end = k.len();
    for (i, (&ki, &mi)) in k.iter().zip(&traj.mass_series).enumerate() {
        let growth = ki / k0;
        let scale = focusing_scale(mi, ki) / traj.spacing;
        report.max_growth = report.max_growth.max(growth);
        report.min_scale = report.min_scale.min(scale);
        if !report.flagged && growth >= cfg.blowup_factor && scale >= cfg.resolution_guard {
            report.flagged = true;
            report.t_detect = Some(traj.times[i]);
            end = i + 1;
        }
    }
    report.growth_exponent = log_slope(&traj.times[..end], &k[..end]);
    report
}

/// Least-squares slope of `ln y` against `x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, y)| **y > 0.0)
        .map(|(x, y)| (*x, y.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::gaussian;

    fn field(m: usize, a: f64) -> RadialField {
        let g = RadialGrid::new(3, 12.0, m).unwrap();
        gaussian(&RadialField::zeros(g), a, 1.0)
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let v = RadialField::zeros(RadialGrid::new(2, 10.0, 64).unwrap());
        let w = step(&v, 1e-3, &ModelParams::new(2, 1.0, 3.0)).unwrap();
        assert!(w.values.iter().all(|x| *x == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn linear_flow_is_unitary() {
        let v = field(128, 1.0);
        let p = ModelParams::new(3, 1.0, 3.0);
        let prop = Propagator::new(&v.grid, &p, 1e-2).linear();
        let mut w = v.clone();
        for _ in 0..50 {
            prop.step(&mut w.values);
        }
        assert!((mass(&w) / mass(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversal_recovers_data() {
        let v = field(128, 1.0);
        let p = ModelParams::new(3, 1.0, 3.0);
        let fwd = Propagator::new(&v.grid, &p, 1e-3);
        let back = Propagator::new(&v.grid, &p, -1e-3);
        let mut w = v.clone();
        for _ in 0..100 {
            fwd.step(&mut w.values);
        }
        for _ in 0..100 {
            back.step(&mut w.values);
        }
        let err = w
            .values
            .iter()
            .zip(&v.values)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn bad_config_is_rejected() {
        let v = field(64, 1.0);
        let p = ModelParams::new(3, 1.0, 3.0);
        let cfg = EvolutionConfig {
            dt: -1.0,
            ..Default::default()
        };
        assert!(matches!(evolve(&v, &cfg, &p), Err(EvolutionError::BadConfig(_))));
    }

    fn synthetic(kinetic: impl Fn(f64) -> f64) -> Trajectory {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        Trajectory {
            kinetic_series: times.iter().map(|&t| kinetic(t)).collect(),
            mass_series: vec![1.0; times.len()],
            energy_series: vec![1.0; times.len()],
            snapshots: Vec::new(),
            terminated: Termination::Completed,
            failure: None,
            t_stop: 10.0,
            spacing: 1e-6,
            times,
        }
    }

    #[test]
    fn constant_kinetic_is_not_blowup() {
        let r = detect_blowup(&synthetic(|_| 3.0), &EvolutionConfig::default());
        assert!(!r.flagged);
        assert!(r.growth_exponent.abs() < 1e-12);
    }

    #[test]
    fn doubling_kinetic_is_flagged_with_log_two_rate() {
        let cfg = EvolutionConfig {
            blowup_factor: 4.0,
            ..Default::default()
        };
        let r = detect_blowup(&synthetic(|t| 2f64.powf(t)), &cfg);
        assert!(r.flagged);
        assert!((r.t_detect.unwrap() - 2.0).abs() < 1e-9);
        assert!((r.growth_exponent - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn unresolved_growth_is_not_flagged() {
        let cfg = EvolutionConfig {
            blowup_factor: 4.0,
            ..Default::default()
        };
        let mut traj = synthetic(|t| 2f64.powf(t));
        traj.spacing = 1.0;
        assert!(!detect_blowup(&traj, &cfg).flagged);
    }

    #[test]
    fn small_gaussian_conserves_mass_and_energy() {
        let p = ModelParams::new(3, 1.0, 3.0);
        let g = RadialGrid::new(3, 15.0, 256).unwrap();
        let v0 = RadialField::from_fn(g, |r| Complex64::new(0.01 * (-r * r).exp(), 0.0));
        let traj = evolve(&v0, &EvolutionConfig::default(), &p).unwrap();
        assert_eq!(traj.terminated, Termination::Completed);
        assert!(traj.mass_drift() < 1e-10, "{}", traj.mass_drift());
        assert!(traj.energy_drift() < 1e-7, "{}", traj.energy_drift());
    }
}
