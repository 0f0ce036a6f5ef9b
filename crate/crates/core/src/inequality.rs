//! Numerical checks of the functional inequalities behind the theory:
//! Gagliardo–Nirenberg with the weight `|x|^b`, radial Strauss decay, Hardy,
//! the growth of the Weinstein quotient below the admissible range, and the
//! decay that makes the radial embedding compact.

use crate::evolution::log_slope;
use crate::functionals::{gradient, kinetic, mass, potential, weinstein_from};
use crate::grid::{GridError, RadialField, RadialGrid};
use crate::ground_state::GroundState;
use crate::params::ModelParams;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum InequalityError {
    #[error("order s = {s} outside {range}")]
    Order { s: f64, range: &'static str },
    #[error("only the L² form of the Hardy estimate is supported, got exponent {0}")]
    UnsupportedExponent(f64),
    #[error("bump support [{n}, {}] exceeds R_max = {r_max}", n + 1.0)]
    Support { n: f64, r_max: f64 },
    #[error("parameters outside the compactness window: 1 + q - 2b/(N-1) = {0}")]
    Window(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// `∫|v|^{1+q}|x|^b / (C ‖v‖^E ‖Δv‖^D)`; at most one when `C` is the sharp constant.
pub fn gn_ratio(v: &RadialField, c_opt: f64, p: &ModelParams) -> f64 {
    1.0 / (c_opt * weinstein_from(mass(v), kinetic(v), potential(v, p), p))
}

/// [`gn_ratio`] against the sharp constant of `gs`.
pub fn check_gn(v: &RadialField, gs: &GroundState, p: &ModelParams) -> f64 {
    gn_ratio(v, gs.c_opt, p)
}

/// Left side and normalized ratio of a decay estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    pub lhs: f64,
    pub bound_ratio: f64,
}

/// `max r^a |v(r)|`, refined between nodes on the interpolant by golden-section search.
fn weighted_sup(v: &RadialField, exponent: f64) -> f64 {
    let nodes = v.grid.nodes();
    let f = |r: f64| r.powf(exponent) * v.grid.interpolate(&v.values, r).norm();
    let (best, top) = nodes
        .iter()
        .zip(&v.values)
        .map(|(r, x)| r.powf(exponent) * x.norm())
        .enumerate()
        .fold((0, 0.0f64), |a, (i, x)| if x > a.1 { (i, x) } else { a });
    if top == 0.0 {
        return 0.0;
    }
    let h = v.grid.spacing();
    let (mut a, mut b) = ((nodes[best] - h).max(0.0), (nodes[best] + h).min(v.grid.r_max()));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let (c, d) = (b - phi * (b - a), a + phi * (b - a));
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    top.max(f((a + b) / 2.0))
}

/// `max r^{(N−2s)/2}|v|` against `‖v‖^{1−s} ‖∇v‖^s`, for `1/2 ≤ s < 1`.
pub fn check_strauss(v: &RadialField, s: f64) -> Result<DecayCheck, InequalityError> {
    if !(0.5..1.0).contains(&s) {
        return Err(InequalityError::Order { s, range: "[1/2, 1)" });
    }
    let n = v.grid.dim() as f64;
    let lhs = weighted_sup(v, (n - 2.0 * s) / 2.0);
    let rhs = mass(v).sqrt().powf(1.0 - s) * gradient(v).sqrt().powf(s);
    Ok(DecayCheck {
        lhs,
        bound_ratio: ratio(lhs, rhs),
    })
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// `‖(−Δ)^{s/2} v‖²` through the eigenbasis of the discrete Laplacian.
pub fn fractional_norm_sq(v: &RadialField, s: f64) -> f64 {
    let basis = v.grid.basis();
    let f = |l: f64| (-l).max(0.0).powf(s);
    let re: Vec<f64> = v.values.iter().map(|x| x.re).collect();
    let im: Vec<f64> = v.values.iter().map(|x| x.im).collect();
    let yr = basis.apply_real(&re, f);
    let yi = basis.apply_real(&im, f);
    let w = v.grid.weights();
    (0..w.len()).map(|i| w[i] * (re[i] * yr[i] + im[i] * yi[i])).sum()
}

/// `max r^{(N−2s)/2}|v|` against `‖|∇|^s v‖`, for `1/2 < s < N/2`.
pub fn check_strauss_fractional(v: &RadialField, s: f64) -> Result<DecayCheck, InequalityError> {
    let n = v.grid.dim() as f64;
    if !(s > 0.5 && s < n / 2.0) {
        return Err(InequalityError::Order { s, range: "(1/2, N/2)" });
    }
    let lhs = weighted_sup(v, (n - 2.0 * s) / 2.0);
    Ok(DecayCheck {
        lhs,
        bound_ratio: ratio(lhs, fractional_norm_sq(v, s).sqrt()),
    })
}

/// `‖|x|^{−s} v‖ / ‖|∇|^s v‖` for `0 < s < N/2`; only `r_exp = 2` is supported.
pub fn check_hardy(v: &RadialField, s: f64, r_exp: f64) -> Result<f64, InequalityError> {
    if r_exp != 2.0 {
        return Err(InequalityError::UnsupportedExponent(r_exp));
    }
    let n = v.grid.dim() as f64;
    if !(s > 0.0 && s < n / 2.0) {
        return Err(InequalityError::Order { s, range: "(0, N/2)" });
    }
    let f: Vec<f64> = v
        .grid
        .nodes()
        .iter()
        .zip(&v.values)
        .map(|(r, x)| x.norm_sqr() * r.powf(-2.0 * s))
        .collect();
    let lhs = v.grid.sum(&f).sqrt();
    Ok(ratio(lhs, fractional_norm_sq(v, s).sqrt()))
}

/// Smooth bump `(16 t(1−t))^4` on `[0, 1]`, zero outside.
pub fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (16.0 * t * (1.0 - t)).powi(4)
    }
}

/// Radial bump supported in `[n, n+1]`, scaled by `amplitude`.
pub fn shell_bump(grid: &Arc<RadialGrid>, n: f64, amplitude: f64) -> Result<RadialField, InequalityError> {
    if n + 1.0 > grid.r_max() {
        return Err(InequalityError::Support { n, r_max: grid.r_max() });
    }
    Ok(RadialField::from_fn(grid.clone(), |r| {
        Complex64::new(amplitude * bump(r - n), 0.0)
    }))
}

/// Weinstein-quotient scan over translated bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub ns: Vec<f64>,
    /// `∫|ξ_n|^{1+q}|x|^b / (‖ξ_n‖^E ‖Δξ_n‖^D)`.
    pub quotients: Vec<f64>,
    pub slope: f64,
    /// `(N−1)(1−q)/2 + b`.
    pub expected: f64,
}

/// Log–log slope of the inverse Weinstein quotient along `ξ(· − n)`.
pub fn counterexample_growth(
    p: &ModelParams,
    grid: &Arc<RadialGrid>,
    ns: &[f64],
) -> Result<GrowthReport, InequalityError> {
    let mut quotients = Vec::with_capacity(ns.len());
    for &n in ns {
        let v = shell_bump(grid, n, 1.0)?;
        quotients.push(1.0 / weinstein_from(mass(&v), kinetic(&v), potential(&v, p), p));
    }
    let logs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    Ok(GrowthReport {
        slope: log_slope(&logs, &quotients),
        expected: (p.n as f64 - 1.0) * (1.0 - p.q) / 2.0 + p.b,
        ns: ns.to_vec(),
        quotients,
    })
}

/// Sequences fed to [`compact_embedding_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeSequence {
    /// `n^{−(N−1)/2} ξ(· − n)`: bounded in `H²`, weakly null.
    Translated,
    /// `ξ(· − n_0)` at the first radius: not weakly null.
    Fixed,
    /// `ξ(· − n_0) / n`.
    Vanishing,
}

/// Split of `∫|u|^{1+q}|x|^b` over `|x| < δ`, `δ ≤ |x| ≤ 1/δ` and `|x| > 1/δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub ns: Vec<f64>,
    pub total: Vec<f64>,
    pub inner: Vec<f64>,
    pub middle: Vec<f64>,
    pub outer: Vec<f64>,
    /// `‖u_n‖² + ‖Δu_n‖²`.
    pub h2_norm_sq: Vec<f64>,
    /// `−d ln(total) / d ln n`.
    pub decay_exponent: f64,
    /// `(q−1)(N−1)/2 − b`.
    pub expected_exponent: f64,
}

/// Weighted `L^{1+q}` norms of a bounded radial sequence moving outward.
pub fn compact_embedding_probe(
    p: &ModelParams,
    grid: &Arc<RadialGrid>,
    ns: &[f64],
    delta: f64,
    sequence: ProbeSequence,
) -> Result<EmbeddingReport, InequalityError> {
    let nf = p.n as f64;
    let window = 1.0 + p.q - 2.0 * p.b / (nf - 1.0);
    let upper = if p.n > 4 { 2.0 + 8.0 / (nf - 4.0) } else { f64::INFINITY };
    if !(window > 2.0 && window < upper) {
        return Err(InequalityError::Window(window));
    }
    let rho = grid.potential_factor(p.b);
    let w = grid.weights();
    let mut rep = EmbeddingReport {
        ns: ns.to_vec(),
        total: Vec::new(),
        inner: Vec::new(),
        middle: Vec::new(),
        outer: Vec::new(),
        h2_norm_sq: Vec::new(),
        decay_exponent: 0.0,
        expected_exponent: (p.q - 1.0) * (nf - 1.0) / 2.0 - p.b,
    };
    for &n in ns {
        let u = match sequence {
            ProbeSequence::Translated => shell_bump(grid, n, n.powf(-(nf - 1.0) / 2.0))?,
            ProbeSequence::Fixed => shell_bump(grid, ns[0], 1.0)?,
            ProbeSequence::Vanishing => shell_bump(grid, ns[0], 1.0 / n)?,
        };
        let mut parts = [0.0; 3];
        for (i, &r) in grid.nodes().iter().enumerate() {
            let x = w[i] * rho[i] * u.values[i].norm().powf(1.0 + p.q);
            let k = if r < delta {
                0
            } else if r <= 1.0 / delta {
                1
            } else {
                2
            };
            parts[k] += x;
        }
        rep.inner.push(parts[0]);
        rep.middle.push(parts[1]);
        rep.outer.push(parts[2]);
        rep.total.push(parts.iter().sum());
        rep.h2_norm_sq.push(mass(&u) + kinetic(&u));
    }
    let logs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    rep.decay_exponent = -log_slope(&logs, &rep.total);
    Ok(rep)
}

/// Seeded family of smooth radial fields: sums of one to four even Gaussian
/// pairs `a (e^{−(r−c)²/w²} + e^{−(r+c)²/w²})` with complex amplitudes.
pub fn random_samples(grid: &Arc<RadialGrid>, count: usize, seed: u64) -> Vec<RadialField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = grid.r_max() / 4.0;
    (0..count)
        .map(|_| {
            let terms: Vec<(Complex64, f64, f64)> = (0..rng.gen_range(1..=4))
                .map(|_| {
                    let a = Complex64::from_polar(rng.gen_range(0.1..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
                    let w = rng.gen_range(0.3..3.0_f64).min(reach / 3.0);
                    let c = rng.gen_range(0.0..(reach - 3.0 * w).max(0.0) + f64::EPSILON);
                    (a, c, w)
                })
                .collect();
            RadialField::from_fn(grid.clone(), |r| {
                terms
                    .iter()
                    .map(|(a, c, w)| {
                        let e = (-((r - c) / w).powi(2)).exp() + (-((r + c) / w).powi(2)).exp();
                        a * e
                    })
                    .sum()
            })
        })
        .collect()
}
