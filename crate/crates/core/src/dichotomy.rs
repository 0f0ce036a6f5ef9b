//! Threshold comparisons against the ground state that decide between global
//! existence and blow-up, and their invariance along the flow.

use crate::evolution::Trajectory;
use crate::functionals::{evaluate, kinetic, mass};
use crate::grid::RadialField;
use crate::ground_state::GroundState;
use crate::params::{Exponent, ModelParams};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Global,
    GlobalUniformBound,
    Blowup,
    InfiniteTimeBlowup,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    /// `E(v0)^{s_c} M(v0)^{2−s_c}`.
    pub lhs_energy_mass: f64,
    /// `E(ζ)^{s_c} M(ζ)^{2−s_c}`.
    pub rhs_energy_mass: f64,
    /// `‖Δv0‖^{s_c} ‖v0‖^{2−s_c}`.
    pub lhs_grad_mass: f64,
    /// `‖Δζ‖^{s_c} ‖ζ‖^{2−s_c}`.
    pub rhs_grad_mass: f64,
    pub s_c: f64,
    pub classification: Classification,
    pub note: Option<String>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DichotomyError {
    #[error("critical index s_c = {0} outside [0, 2]")]
    CriticalIndex(f64),
}

/// `x^s` with `x^0 = 1`, extended to `x < 0` as `−|x|^s`.
pub fn signed_pow(x: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        x.signum() * x.abs().powf(s)
    }
}

/// Ordering of `a` against `b` with a relative tolerance band counted as equality.
pub fn compare(a: f64, b: f64, tol: f64) -> Ordering {
    if (a - b).abs() <= tol * a.abs().max(b.abs()) {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

fn threshold(energy: f64, mass: f64, kinetic: f64, s_c: f64) -> (f64, f64) {
    (
        signed_pow(energy, s_c) * mass.powf(1.0 - s_c / 2.0),
        kinetic.powf(s_c / 2.0) * mass.powf(1.0 - s_c / 2.0),
    )
}

/// Compares `v0` with the ground state; equalities within relative `tol` are indeterminate.
pub fn classify(
    v0: &RadialField,
    gs: &GroundState,
    p: &ModelParams,
    tol: f64,
) -> Result<DichotomyReport, DichotomyError> {
    let ex = p.exponents();
    let s_c = ex.s_c;
    if !(0.0..=2.0).contains(&s_c) {
        return Err(DichotomyError::CriticalIndex(s_c));
    }
    let f = evaluate(v0, p);
    let ez = crate::functionals::energy_from(gs.kinetic_z, gs.potential_z, p);
    let (lhs_em, lhs_gm) = threshold(f.energy, f.mass, f.kinetic, s_c);
    let (rhs_em, rhs_gm) = threshold(ez, gs.mass_z, gs.kinetic_z, s_c);
    let fractional = s_c.fract() != 0.0;
    let note = (f.energy < 0.0 && fractional)
        .then(|| "negative energy with fractional s_c: E^s_c taken as -|E|^s_c".to_string());
    let q_m = p.q == ex.q_m;
    let q_e = matches!(ex.q_e, Exponent::Finite(x) if x == p.q);
    let below_e = ex.q_e.exceeds(p.q);
    let classification = match (compare(lhs_em, rhs_em, tol), compare(lhs_gm, rhs_gm, tol)) {
        (Ordering::Less, Ordering::Less) if below_e => Classification::Global,
        (Ordering::Less, Ordering::Less) if q_e => Classification::GlobalUniformBound,
        (Ordering::Less, Ordering::Greater) if q_m => Classification::InfiniteTimeBlowup,
        (Ordering::Less, Ordering::Greater) if p.q > ex.q_m && p.q <= 9.0 => Classification::Blowup,
        _ => Classification::Indeterminate,
    };
    Ok(DichotomyReport {
        lhs_energy_mass: lhs_em,
        rhs_energy_mass: rhs_em,
        lhs_grad_mass: lhs_gm,
        rhs_grad_mass: rhs_gm,
        s_c,
        classification,
        note,
    })
}

/// Position of a quantity relative to its ground-state threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Below,
    At,
    Above,
}

impl From<Ordering> for Side {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Side::Below,
            Ordering::Equal => Side::At,
            Ordering::Greater => Side::Above,
        }
    }
}

/// Persistence of the gradient-mass comparison along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    /// `‖Δv(t)‖^{s_c} ‖v0‖^{2−s_c}` per snapshot.
    pub grad_mass: Vec<f64>,
    pub threshold: f64,
    /// Side of the threshold at `t = 0`.
    pub initial_side: Side,
    pub first_violation: Option<f64>,
    /// `(M(ζ)/M(v0))^{(2−s_c)/(2s_c)} ‖Δζ‖`, for `s_c > 0`.
    pub uniform_bound: Option<f64>,
    /// Whether `‖Δv(t)‖` stays below `uniform_bound` at every snapshot.
    pub bound_holds: bool,
    /// `max_t |q(t) − q(0)| / q(0)` for the gradient-mass quantity.
    pub max_variation: f64,
}

pub fn check_flow_invariance(traj: &Trajectory, gs: &GroundState, p: &ModelParams) -> FlowReport {
    let s_c = p.exponents().s_c;
    let m0 = traj.mass_series.first().copied().unwrap_or(0.0);
    let (_, threshold_value) = threshold(0.0, gs.mass_z, gs.kinetic_z, s_c);
    let grad_mass: Vec<f64> = traj
        .kinetic_series
        .iter()
        .map(|&k| k.powf(s_c / 2.0) * m0.powf(1.0 - s_c / 2.0))
        .collect();
    let side = |x: f64| Side::from(x.partial_cmp(&threshold_value).unwrap_or(Ordering::Equal));
    let initial_side = grad_mass.first().map_or(Side::At, |&x| side(x));
    let first_violation = grad_mass
        .iter()
        .zip(&traj.times)
        .find(|(x, _)| side(**x) != initial_side)
        .map(|(_, t)| *t);
    let uniform_bound = (s_c > 0.0).then(|| (gs.mass_z / m0).powf((2.0 - s_c) / (2.0 * s_c)) * gs.kinetic_z.sqrt());
    let bound_holds = uniform_bound.is_none_or(|b| traj.kinetic_series.iter().all(|k| k.sqrt() <= b));
    let g0 = grad_mass.first().copied().unwrap_or(0.0);
    let max_variation = grad_mass.iter().fold(0.0f64, |a, x| a.max((x - g0).abs())) / g0;
    FlowReport {
        grad_mass,
        threshold: threshold_value,
        initial_side,
        first_violation,
        uniform_bound,
        bound_holds,
        max_variation,
    }
}

/// `‖Δv‖^{s_c} ‖v‖^{2−s_c}` of a single field.
pub fn grad_mass(v: &RadialField, p: &ModelParams) -> f64 {
    let s_c = p.exponents().s_c;
    threshold(0.0, mass(v), kinetic(v), s_c).1
}
