//! Localized virial (Morawetz) functional and its time derivative.
//!
//! `M_χ(v) = 2∫ ∇χ · Im(∇v v̄) dx` with a radial weight `χ`. The weight is
//! either `|x|²` or the cutoff `χ_R = R² χ(·/R)`, where `χ(s) = s²` for
//! `s ≤ 1`, `χ` is constant for `s ≥ 10`, and `χ′(s)/s = 2(1 − S((s−1)/9))`
//! with `S` the degree-13 smoothstep, so `χ` is `C⁶`.

use crate::evolution::Trajectory;
use crate::grid::{RadialField, RadialGrid};
use crate::params::ModelParams;
use serde::{Deserialize, Serialize};

/// Highest radial derivative of `χ` that is tabulated.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CutoffError {
    #[error("cutoff radius {radius} needs 10R <= R_max = {r_max}")]
    TooWide { radius: f64, r_max: f64 },
    #[error("cutoff radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("constraint `{constraint}` violated at r = {r}: {value:e}")]
    Violated {
        constraint: &'static str,
        r: f64,
        value: f64,
    },
}

/// Values of `χ` and the combinations entering the virial identity at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    /// `χ^{(k)}(r)` for `k = 0..=6`.
    pub d: [f64; MAX_ORDER + 1],
    /// `χ′(r) / r`.
    pub g: f64,
    /// `Δχ`.
    pub lap: f64,
    /// `∂_r² Δχ`.
    pub lap_rr: f64,
    /// `Δ²χ`.
    pub bilap: f64,
    /// `Δ³χ`.
    pub trilap: f64,
}

fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |a, &x| a * t + x)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &x)| k as f64 * x).collect()
}

fn poly_integral(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend(c.iter().enumerate().map(|(k, &x)| x / (k + 1) as f64));
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64)
}

/// Unit-scale cutoff in the variable `t = (s − 1)/9` on the bridge `1 ≤ s ≤ 10`.
#[derive(Debug, Clone)]
struct UnitCutoff {
    /// `g^{(k)}` as polynomials in `t` for `k = 0..=5`, already in the `s` variable.
    g: Vec<Vec<f64>>,
    /// `χ − 1` on the bridge.
    chi: Vec<f64>,
    /// Value of `χ` for `s ≥ 10`.
    plateau: f64,
}

impl UnitCutoff {
    fn new() -> Self {
        // S′(t) = t⁶(1−t)⁶ / B(7, 7).
        let mut bump = vec![0.0; 13];
        for j in 0..=6u64 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            bump[6 + j as usize] = sign * binomial(6, j) * 12012.0;
        }
        let s = poly_integral(&bump);
        let mut g0: Vec<f64> = s.iter().map(|x| -2.0 * x).collect();
        g0[0] += 2.0;
        let mut g = vec![g0];
        for k in 1..=5 {
            let d: Vec<f64> = poly_deriv(&g[k - 1]).iter().map(|x| x / 9.0).collect();
            g.push(d);
        }
        // χ(s) − 1 = ∫_1^s τ g(τ) dτ = 9 ∫_0^t (1 + 9u) g(u) du.
        let integrand: Vec<f64> = poly_mul(&[9.0, 81.0], &g[0]);
        let chi = poly_integral(&integrand);
        let plateau = 1.0 + poly_eval(&chi, 1.0);
        Self { g, chi, plateau }
    }

    /// `[g, g′, …, g⁽⁵⁾]` at `s`.
    fn g_derivs(&self, s: f64) -> [f64; 6] {
        let mut out = [0.0; 6];
        if s <= 1.0 {
            out[0] = 2.0;
        } else if s < 10.0 {
            let t = (s - 1.0) / 9.0;
            for (o, p) in out.iter_mut().zip(&self.g).skip(2) {
                *o = poly_eval(p, t);
            }
            // Symmetric and factored forms keep the sign conditions exact to rounding.
            let step = if t <= 0.5 {
                self.smoothstep(t)
            } else {
                1.0 - self.smoothstep(1.0 - t)
            };
            out[0] = 2.0 * (1.0 - step);
            out[1] = -2.0 / 9.0 * 12012.0 * (t * (1.0 - t)).powi(6);
        }
        out
    }

    fn smoothstep(&self, t: f64) -> f64 {
        1.0 - poly_eval(&self.g[0], t) / 2.0
    }

    fn chi(&self, s: f64) -> f64 {
        if s <= 1.0 {
            s * s
        } else if s < 10.0 {
            1.0 + poly_eval(&self.chi, (s - 1.0) / 9.0)
        } else {
            self.plateau
        }
    }

    fn jet(&self, s: f64, n: usize) -> Jet {
        let g = self.g_derivs(s);
        let nf = n as f64;
        let mut d = [0.0; MAX_ORDER + 1];
        d[0] = self.chi(s);
        // χ^{(k)} = (s g)^{(k−1)} = s g^{(k−1)} + (k−1) g^{(k−2)}.
        d[1] = s * g[0];
        for k in 2..=MAX_ORDER {
            d[k] = s * g[k - 1] + (k - 1) as f64 * g[k - 2];
        }
        let lap = nf * g[0] + s * g[1];
        let lap_rr = (nf + 2.0) * g[2] + s * g[3];
        let c = nf * nf - 1.0;
        // Terms with g′ vanish identically near the axis, so the divisions are safe there.
        let (a1, a2, a3) = if s <= 1.0 {
            (0.0, 0.0, 0.0)
        } else {
            (
                g[1] / s,
                (g[2] - g[1] / s) / s,
                (g[3] - 2.0 * g[2] / s + 2.0 * g[1] / (s * s)) / s,
            )
        };
        let bilap = (2.0 * nf + 1.0) * g[2] + s * g[3] + c * a1;
        let bilap_r = (2.0 * nf + 2.0) * g[3] + s * g[4] + c * a2;
        let bilap_rr = (2.0 * nf + 3.0) * g[4] + s * g[5] + c * a3;
        let trilap = bilap_rr + if s <= 1.0 { 0.0 } else { (nf - 1.0) * bilap_r / s };
        Jet {
            d,
            g: g[0],
            lap,
            lap_rr,
            bilap,
            trilap,
        }
    }
}

/// Radial weight `χ` tabulated on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutoffProfile {
    /// Localization radius `R`; `None` for the pure weight `|x|²`.
    pub radius: Option<f64>,
    pub chi: Vec<f64>,
    /// `χ′`.
    pub d1: Vec<f64>,
    /// `χ″`.
    pub d2: Vec<f64>,
    /// `χ′ / r`.
    pub g: Vec<f64>,
    pub lap_rr: Vec<f64>,
    pub bilap: Vec<f64>,
    pub trilap: Vec<f64>,
    /// `max_r |χ^{(k)}(r)| R^{k−2}` for `k = 0..=6`.
    pub derivative_constants: Vec<f64>,
}

fn jet_at(radius: Option<f64>, unit: &UnitCutoff, r: f64, n: usize) -> Jet {
    match radius {
        None => {
            let mut d = [0.0; MAX_ORDER + 1];
            d[0] = r * r;
            d[1] = 2.0 * r;
            d[2] = 2.0;
            Jet {
                d,
                g: 2.0,
                lap: 2.0 * n as f64,
                lap_rr: 0.0,
                bilap: 0.0,
                trilap: 0.0,
            }
        }
        Some(rc) => {
            let u = unit.jet(r / rc, n);
            let mut d = u.d;
            for (k, x) in d.iter_mut().enumerate() {
                *x *= rc.powi(2 - k as i32);
            }
            Jet {
                d,
                g: u.g,
                lap: u.lap,
                lap_rr: u.lap_rr / (rc * rc),
                bilap: u.bilap / (rc * rc),
                trilap: u.trilap / rc.powi(4),
            }
        }
    }
}

impl CutoffProfile {
    /// `χ = |x|²` on the whole grid.
    pub fn pure(grid: &RadialGrid) -> Self {
        Self::tabulate(None, grid)
    }

    fn tabulate(radius: Option<f64>, grid: &RadialGrid) -> Self {
        let unit = UnitCutoff::new();
        let n = grid.dim();
        let jets: Vec<Jet> = grid.nodes().iter().map(|&r| jet_at(radius, &unit, r, n)).collect();
        let col = |f: fn(&Jet) -> f64| jets.iter().map(f).collect::<Vec<f64>>();
        let derivative_constants = (0..=MAX_ORDER)
            .map(|k| {
                let scale = radius.map_or(1.0, |rc| rc.powi(k as i32 - 2));
                jets.iter().fold(0.0f64, |a, j| a.max(j.d[k].abs())) * scale
            })
            .collect();
        Self {
            radius,
            chi: col(|j| j.d[0]),
            d1: col(|j| j.d[1]),
            d2: col(|j| j.d[2]),
            g: col(|j| j.g),
            lap_rr: col(|j| j.lap_rr),
            bilap: col(|j| j.bilap),
            trilap: col(|j| j.trilap),
            derivative_constants,
        }
    }

    /// `max |∇χ| = max |χ′|`.
    pub fn grad_sup(&self) -> f64 {
        self.d1.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }
}

/// The cutoff `χ_R` and its jet at an arbitrary radius.
pub fn cutoff_jet(radius: f64, r: f64, n: usize) -> Jet {
    jet_at(Some(radius), &UnitCutoff::new(), r, n)
}

/// Builds `χ_R` on `grid` and certifies it node by node.
pub fn build_cutoff(radius: f64, grid: &RadialGrid) -> Result<CutoffProfile, CutoffError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CutoffError::BadRadius(radius));
    }
    if 10.0 * radius > grid.r_max() {
        return Err(CutoffError::TooWide {
            radius,
            r_max: grid.r_max(),
        });
    }
    let prof = CutoffProfile::tabulate(Some(radius), grid);
    certify_cutoff(&prof, grid)?;
    Ok(prof)
}

/// Checks `χ″ = χ′/r = 2` on `r ≤ R` and `max{χ′/r − 2, χ″ − χ′/r} ≤ 1e−12` everywhere.
pub fn certify_cutoff(prof: &CutoffProfile, grid: &RadialGrid) -> Result<(), CutoffError> {
    let radius = prof.radius.unwrap_or(f64::INFINITY);
    for (i, &r) in grid.nodes().iter().enumerate() {
        let (g, d2) = (prof.g[i], prof.d2[i]);
        if r <= radius && (g != 2.0 || d2 != 2.0) {
            return Err(CutoffError::Violated {
                constraint: "chi'' = chi'/r = 2 on the ball",
                r,
                value: (g - 2.0).abs().max((d2 - 2.0).abs()),
            });
        }
        let worst = (g - 2.0).max(d2 - g);
        if worst > 1e-12 {
            return Err(CutoffError::Violated {
                constraint: "max(chi'/r - 2, chi'' - chi'/r) <= 0",
                r,
                value: worst,
            });
        }
    }
    Ok(())
}

/// `M_χ(v) = 2∫ χ′ Im(∂_r v v̄) dx`.
pub fn morawetz(v: &RadialField, chi: &CutoffProfile) -> f64 {
    let vr = v.grid.derivative(&v.values);
    let f: Vec<f64> = chi
        .d1
        .iter()
        .zip(vr.iter().zip(&v.values))
        .map(|(c, (d, x))| 2.0 * c * (d * x.conj()).im)
        .collect();
    v.grid.sum(&f)
}

/// `d/dt M_χ` along the flow, evaluated from the profile alone.
///
/// The radial form of the identity is
/// `−2∫ [2(Δχ)″|v_r|² − ½Δ³χ|v|² + Δ²χ|v_r|² − 4(χ″|v_rr|² + (N−1)(χ′/r)|v_r/r|²)
///  + (q−1)/(1+q) (χ″ + (N−1−2b/(q−1)) χ′/r) |x|^b |v|^{1+q}] dx`.
pub fn morawetz_rhs(v: &RadialField, chi: &CutoffProfile, p: &ModelParams) -> f64 {
    let grid = &v.grid;
    let vr = grid.derivative(&v.values);
    let vrr = grid.second_derivative(&v.values);
    let rho = grid.potential_factor(p.b);
    let nf = grid.dim() as f64;
    let pot_coef = (p.q - 1.0) / (1.0 + p.q);
    let shift = nf - 1.0 - 2.0 * p.b / (p.q - 1.0);
    let f: Vec<f64> = (0..grid.len())
        .map(|i| {
            let r = grid.nodes()[i];
            let a = v.values[i].norm_sqr();
            let b = vr[i].norm_sqr();
            let c = vrr[i].norm_sqr();
            let hess = chi.d2[i] * c + (nf - 1.0) * chi.g[i] * b / (r * r);
            let pot = pot_coef * (chi.d2[i] + shift * chi.g[i]) * rho[i] * a.powf((1.0 + p.q) / 2.0);
            -2.0 * (2.0 * chi.lap_rr[i] * b - 0.5 * chi.trilap[i] * a + chi.bilap[i] * b - 4.0 * hess + pot)
        })
        .collect();
    grid.sum(&f)
}

/// Finite-difference check of the virial identity along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialReport {
    pub times: Vec<f64>,
    pub morawetz: Vec<f64>,
    /// Centered difference of `M_χ` (NaN at the endpoints).
    pub dmdt_fd: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `|dM/dt − rhs| / max_t |rhs|` (NaN at the endpoints).
    pub mismatch: Vec<f64>,
    pub max_mismatch: f64,
    pub max_abs_mismatch: f64,
    pub rhs_scale: f64,
}

pub fn verify_virial(traj: &Trajectory, chi: &CutoffProfile, p: &ModelParams) -> VirialReport {
    let t = &traj.times;
    let m: Vec<f64> = traj.snapshots.iter().map(|v| morawetz(v, chi)).collect();
    let rhs: Vec<f64> = traj.snapshots.iter().map(|v| morawetz_rhs(v, chi, p)).collect();
    let n = t.len();
    let mut fd = vec![f64::NAN; n];
    for i in 1..n.saturating_sub(1) {
        fd[i] = (m[i + 1] - m[i - 1]) / (t[i + 1] - t[i - 1]);
    }
    let rhs_scale = rhs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let abs: Vec<f64> = fd.iter().zip(&rhs).map(|(f, r)| (f - r).abs()).collect();
    let max_abs_mismatch = abs.iter().filter(|x| x.is_finite()).fold(0.0f64, |a, x| a.max(*x));
    let mismatch: Vec<f64> = abs.iter().map(|x| x / rhs_scale).collect();
    let max_mismatch = if rhs_scale > 0.0 {
        max_abs_mismatch / rhs_scale
    } else {
        max_abs_mismatch
    };
    VirialReport {
        times: t.clone(),
        morawetz: m,
        dmdt_fd: fd,
        rhs,
        mismatch,
        max_mismatch,
        max_abs_mismatch,
        rhs_scale,
    }
}

/// Behaviour of `M_R` along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub morawetz: Vec<f64>,
    /// `max_t (−M_R(t)) / (‖∇χ_R‖_∞ ‖v0‖^{3/2} ‖Δv(t)‖^{1/2})`, the empirical constant.
    pub lower_ratio: f64,
    /// Earliest time after which `M_R` decreases strictly up to the end of the run.
    pub decreasing_from: Option<f64>,
    /// Fraction of the run during which `M_R` strictly decreases at the end.
    pub decreasing_fraction: f64,
    pub final_negative: bool,
    pub max_abs: f64,
}

pub fn blowup_functional_bound(traj: &Trajectory, chi: &CutoffProfile) -> BoundReport {
    let m: Vec<f64> = traj.snapshots.iter().map(|v| morawetz(v, chi)).collect();
    let mass0 = traj.mass_series.first().copied().unwrap_or(0.0);
    let grad = chi.grad_sup();
    let lower_ratio = m
        .iter()
        .zip(&traj.kinetic_series)
        .map(|(x, k)| {
            let bound = grad * mass0.powf(0.75) * k.powf(0.25);
            if bound > 0.0 {
                -x / bound
            } else {
                0.0
            }
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let mut start = m.len().saturating_sub(1);
    while start > 0 && m[start - 1] > m[start] {
        start -= 1;
    }
    let decreasing = m.len() > 1 && start + 1 < m.len();
    let span = traj.t_stop - traj.times.first().copied().unwrap_or(0.0);
    BoundReport {
        lower_ratio,
        decreasing_from: decreasing.then(|| traj.times[start]),
        decreasing_fraction: if decreasing && span > 0.0 {
            (traj.t_stop - traj.times[start]) / span
        } else {
            0.0
        },
        final_negative: m.last().is_some_and(|x| *x < 0.0),
        max_abs: m.iter().fold(0.0f64, |a, x| a.max(x.abs())),
        morawetz: m,
    }
}
