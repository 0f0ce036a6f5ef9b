//! Ground state `ζ + Δ²ζ = |x|^b |ζ|^{q-1} ζ` and the sharp constant `C_opt`.
//!
//! The profile is found by a Petviashvili iteration on the ground-state
//! equation. The resolvent `(1 + Δ²)⁻¹` is applied in the Laplacian
//! eigenbasis. The normalized minimizer `φ` (with `‖φ‖ = ‖Δφ‖ = 1`) is
//! obtained from `ζ` by an exact two-parameter rescaling.

use crate::functionals::{self, evaluate, rescale_exact, FunctionalError};
use crate::grid::{GridError, RadialField, RadialGrid};
use crate::params::{validate_regime, ModelParams, RegimeReport, Theorem};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateConfig {
    /// Relative discrete L² residual of the ground-state equation.
    pub tol_euler: f64,
    /// Relative tolerance on both Pohozaev identities.
    pub tol_pohozaev: f64,
    pub max_iter: usize,
    /// Stop once the relative profile change falls below this.
    pub tol_profile: f64,
}

impl Default for GroundStateConfig {
    fn default() -> Self {
        Self {
            tol_euler: 1e-6,
            tol_pohozaev: 1e-5,
            max_iter: 5000,
            tol_profile: 1e-13,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GroundStateError {
    #[error("parameters outside the ground-state regime: {0:?}")]
    Regime(Box<RegimeReport>),
    #[error("D and E must be positive, got D = {d}, E = {e}")]
    Degenerate { d: f64, e: f64 },
    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    NoConvergence {
        iterations: usize,
        last_change: f64,
        weinstein_history: Vec<f64>,
    },
    #[error("iteration diverged at step {0}")]
    Diverged(usize),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Certified ground state.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub zeta: RadialField,
    pub c_opt: f64,
    pub mass_z: f64,
    pub kinetic_z: f64,
    pub potential_z: f64,
    /// `‖Δ²ζ + ζ - |x|^b|ζ|^{q-1}ζ‖ / ‖ζ‖`.
    pub residual_euler: f64,
    /// Relative residuals of `P = (1+q)/E M` and `P = (1+q)/D ‖Δζ‖²`.
    pub residual_pohozaev: (f64, f64),
    /// Relative residual of `‖Δζ‖² + ‖ζ‖² = P`.
    pub residual_identity: f64,
    /// `C_opt` evaluated from `‖ζ‖` by the closed-form expression.
    pub c_from_mass: f64,
    pub iterations: usize,
}

/// Normalized minimizer of the Weinstein quotient.
#[derive(Debug, Clone)]
pub struct Minimizer {
    /// `‖φ‖ = ‖Δφ‖ = 1`; lives on a dilated copy of the working grid.
    pub phi: RadialField,
    pub c_opt: f64,
    pub iterations: usize,
    /// Weinstein quotient of the iterates.
    pub weinstein_history: Vec<f64>,
}

/// `ρ|z|^{q-1}z` for a real profile.
fn nonlinearity(z: &[f64], rho: &[f64], q: f64) -> Vec<f64> {
    z.iter().zip(rho).map(|(x, r)| r * x.abs().powf(q - 1.0) * x).collect()
}

fn dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum()
}

/// Solves the ground-state equation on `grid` starting from `init` (default `e^{-r²}`).
/// Returns the real profile and the iteration count.
fn petviashvili(
    p: &ModelParams,
    grid: &Arc<RadialGrid>,
    init: Option<&[f64]>,
    cfg: &GroundStateConfig,
) -> Result<(Vec<f64>, usize, Vec<f64>), GroundStateError> {
    let basis = grid.basis();
    let rho = grid.potential_factor(p.b);
    let w = grid.weights();
    let gamma = p.q / (p.q - 1.0);
    let mut z: Vec<f64> = match init {
        Some(v) => v.iter().map(|x| x.abs()).collect(),
        None => grid.nodes().iter().map(|r| (-r * r).exp()).collect(),
    };
    let mut history = Vec::new();
    let mut damping = 1.0;
    let mut last_change = f64::INFINITY;
    let mut rising = 0;
    for it in 1..=cfg.max_iter {
        let nz = nonlinearity(&z, &rho, p.q);
        let bz = grid.bilaplacian(&z);
        let lin: f64 = dot(w, &bz, &z) + dot(w, &z, &z);
        let s = lin / dot(w, &nz, &z);
        if !s.is_finite() || s <= 0.0 {
            return Err(GroundStateError::Diverged(it));
        }
        let y = basis.apply_real(&nz, |l| 1.0 / (1.0 + l * l));
        let factor = s.powf(gamma);
        let next: Vec<f64> = z
            .iter()
            .zip(&y)
            .map(|(zo, yn)| (1.0 - damping) * zo + damping * factor * yn)
            .collect();
        let zmax = next.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let change = next.iter().zip(&z).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())) / zmax;
        z = next;
        if !zmax.is_finite() || zmax == 0.0 {
            return Err(GroundStateError::Diverged(it));
        }
        let f = evaluate(&RadialField::from_real(grid.clone(), &z), p);
        history.push(f.weinstein);
        if change < cfg.tol_profile {
            return Ok((z, it, history));
        }
        // Cycling: the change keeps growing, so mix with the previous iterate.
        if change > last_change {
            rising += 1;
            if rising > 20 && damping == 1.0 {
                damping = 0.5;
            }
        } else {
            rising = 0;
        }
        last_change = change;
    }
    Err(GroundStateError::NoConvergence {
        iterations: cfg.max_iter,
        last_change,
        weinstein_history: history,
    })
}

/// Relative residuals of the two Pohozaev identities.
pub fn pohozaev_residuals(mass: f64, kinetic: f64, potential: f64, p: &ModelParams) -> (f64, f64) {
    let ex = p.exponents();
    let a = (potential - (1.0 + p.q) / ex.e * mass) / potential;
    let b = (potential - (1.0 + p.q) / ex.d * kinetic) / potential;
    (a, b)
}

/// `C_opt = (1+q)/E (E/D)^{D/2} ‖ζ‖^{-(q-1)}`.
pub fn c_opt_from_mass(mass: f64, p: &ModelParams) -> f64 {
    let ex = p.exponents();
    (1.0 + p.q) / ex.e * (ex.e / ex.d).powf(ex.d / 2.0) * mass.sqrt().powf(-(p.q - 1.0))
}

fn check_regime(p: &ModelParams) -> Result<(), GroundStateError> {
    let report = validate_regime(p, Theorem::Gn);
    if !report.passed() {
        return Err(GroundStateError::Regime(Box::new(report)));
    }
    let ex = p.exponents();
    if !(ex.d > 0.0 && ex.e > 0.0) {
        return Err(GroundStateError::Degenerate { d: ex.d, e: ex.e });
    }
    Ok(())
}

/// `(ν, κ)` with `‖κ v(ν·)‖ = ‖Δ(κ v(ν·))‖ = 1`.
pub fn normalizing_scaling(mass: f64, kinetic: f64, n: usize) -> (f64, f64) {
    let (m, k) = (mass.sqrt(), kinetic.sqrt());
    let nf = n as f64;
    let nu = (m / k).sqrt();
    let kappa = m.powf(nf / 4.0 - 1.0) / k.powf(nf / 4.0);
    (nu, kappa)
}

/// Closed-form `(ν, κ)` with `φ = κ ζ(ν ·)` relating the ground state `ζ` to the
/// normalized minimizer `φ`.
pub fn ground_state_scaling(c_opt: f64, p: &ModelParams) -> (f64, f64) {
    let ex = p.exponents();
    let nu = (ex.e / ex.d).powf(0.25);
    let kappa = ((ex.e / ex.d).powf(p.b / 4.0) * ex.e * c_opt / (1.0 + p.q)).powf(1.0 / (p.q - 1.0));
    (nu, kappa)
}

/// Minimizes the Weinstein quotient: solves the ground-state equation on `grid`
/// and rescales the solution to `‖φ‖ = ‖Δφ‖ = 1`.
pub fn minimize_weinstein(
    p: &ModelParams,
    grid: &Arc<RadialGrid>,
    init: Option<&[f64]>,
    cfg: &GroundStateConfig,
) -> Result<Minimizer, GroundStateError> {
    check_regime(p)?;
    let (z, iterations, weinstein_history) = petviashvili(p, grid, init, cfg)?;
    let zeta = RadialField::from_real(grid.clone(), &z);
    let f = evaluate(&zeta, p);
    let (nu, kappa) = normalizing_scaling(f.mass, f.kinetic, p.n);
    let phi = rescale_exact(&zeta, kappa, nu)?;
    let c_opt = 1.0 / functionals::weinstein(&phi, p)?;
    Ok(Minimizer {
        phi,
        c_opt,
        iterations,
        weinstein_history,
    })
}

fn certify(zeta: RadialField, c_opt: f64, iterations: usize, p: &ModelParams) -> GroundState {
    let f = evaluate(&zeta, p);
    let g = &zeta.grid;
    let z = zeta.real_part();
    let rho = g.potential_factor(p.b);
    let bz = g.bilaplacian(&z);
    let nz = nonlinearity(&z, &rho, p.q);
    let res: Vec<f64> = bz.iter().zip(&z).zip(&nz).map(|((b, z), n)| b + z - n).collect();
    let residual_euler = (g.norm_sq(&res) / f.mass).sqrt();
    GroundState {
        c_opt,
        mass_z: f.mass,
        kinetic_z: f.kinetic,
        potential_z: f.potential,
        residual_euler,
        residual_pohozaev: pohozaev_residuals(f.mass, f.kinetic, f.potential, p),
        residual_identity: (f.kinetic + f.mass - f.potential) / f.potential,
        c_from_mass: c_opt_from_mass(f.mass, p),
        iterations,
        zeta,
    }
}

/// Inverts `φ = κ ζ(ν ·)` with the closed-form constants, on the matching dilated grid.
pub fn ground_state_from_minimizer(min: &Minimizer, p: &ModelParams) -> Result<GroundState, GroundStateError> {
    check_regime(p)?;
    let (nu, kappa) = ground_state_scaling(min.c_opt, p);
    let zeta = rescale_exact(&min.phi, 1.0 / kappa, 1.0 / nu)?;
    Ok(certify(zeta, min.c_opt, min.iterations, p))
}

/// Ground state on `grid` with certification against `cfg`.
pub fn solve_ground_state(
    p: &ModelParams,
    grid: &Arc<RadialGrid>,
    init: Option<&[f64]>,
    cfg: &GroundStateConfig,
) -> Result<GroundState, GroundStateError> {
    check_regime(p)?;
    let (z, iterations, _) = petviashvili(p, grid, init, cfg)?;
    let zeta = RadialField::from_real(grid.clone(), &z);
    let c_opt = 1.0 / functionals::weinstein(&zeta, p)?;
    let gs = certify(zeta, c_opt, iterations, p);
    let (a, b) = gs.residual_pohozaev;
    if gs.residual_euler > cfg.tol_euler || a.abs() > cfg.tol_pohozaev || b.abs() > cfg.tol_pohozaev {
        return Err(GroundStateError::Certification(format!(
            "euler {:e}, pohozaev ({a:e}, {b:e})",
            gs.residual_euler
        )));
    }
    Ok(gs)
}

/// `λ ζ` as a field.
pub fn scaled_ground_state(gs: &GroundState, lambda: f64) -> RadialField {
    gs.zeta.scaled(Complex64::new(lambda, 0.0))
}
