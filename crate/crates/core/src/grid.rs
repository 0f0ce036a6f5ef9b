//! Radial grid on `(0, R_max]`: quadrature, derivative stencils and the
//! radial Laplacian, with fields stored as complex node values.
//!
//! Nodes sit at `r_i = (i - 1/2) h`. Radial derivatives live on the staggered
//! points `ρ_j = j h`, and the Laplacian is the flux form
//! `L = -W⁻¹ Gᵀ W' G`. Here `G` is a staggered first derivative of order `p`,
//! `W` holds the node weights and `W'` the staggered weights. The field is
//! continued evenly across the axis and oddly across `R_max`, i.e. Dirichlet
//! at `R_max`. `L` is symmetric and non-positive in the `W` inner product.

use crate::special::{hurwitz_zeta_half, sphere_area};
use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64;
use std::io::{BufRead, Write};
use std::ops::{AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 5 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("domain radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("dimension must be at least 1")]
    BadDimension,
    #[error("unsupported stencil order {0} (use 2, 4, 6 or 8)")]
    BadOrder(usize),
    #[error("non-finite integrand at node {node} (r = {r})")]
    NonFinite { node: usize, r: f64 },
    #[error("snapshot parse error: {0}")]
    Snapshot(String),
}

/// Values that the stencils act on.
pub trait Scalar:
    Copy + Default + AddAssign + Mul<f64, Output = Self> + Neg<Output = Self> + Sub<Output = Self>
{
}
impl Scalar for f64 {}
impl Scalar for Complex64 {}

/// Half-stencil of the staggered first derivative, `f'(0) ≈ Σ c_m (f((m-½)h) - f(-(m-½)h))/h`.
fn staggered_coefficients(order: usize) -> Result<&'static [f64], GridError> {
    match order {
        2 => Ok(&[1.0]),
        4 => Ok(&[9.0 / 8.0, -1.0 / 24.0]),
        6 => Ok(&[75.0 / 64.0, -25.0 / 384.0, 3.0 / 640.0]),
        8 => Ok(&[1225.0 / 1024.0, -245.0 / 3072.0, 49.0 / 5120.0, -5.0 / 7168.0]),
        _ => Err(GridError::BadOrder(order)),
    }
}

/// Central first-derivative coefficients for offsets `1..=p/2`.
fn central_first(order: usize) -> &'static [f64] {
    match order {
        2 => &[0.5],
        4 => &[2.0 / 3.0, -1.0 / 12.0],
        6 => &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        _ => &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
    }
}

/// Central second-derivative coefficients for offsets `0..=p/2`.
fn central_second(order: usize) -> &'static [f64] {
    match order {
        2 => &[-2.0, 1.0],
        4 => &[-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
        6 => &[-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
        _ => &[-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0],
    }
}

/// Sparse row-major matrix.
#[derive(Debug, Clone)]
struct Rows {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Rows {
    fn apply<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        self.rows
            .iter()
            .map(|row| {
                let mut acc = T::default();
                for &(j, c) in row {
                    acc += v[j] * c;
                }
                acc
            })
            .collect()
    }

    fn apply_transpose<T: Scalar>(&self, v: &[T], n: usize) -> Vec<T> {
        let mut out = vec![T::default(); n];
        for (row, &x) in self.rows.iter().zip(v) {
            for &(j, c) in row {
                out[j] += x * c;
            }
        }
        out
    }
}

/// Map a (possibly ghost) node index to a stored index and a sign:
/// even reflection across the axis, odd reflection across `R_max`.
fn fold(idx: i64, m: usize) -> Option<(usize, f64)> {
    let m = m as i64;
    if idx < 0 {
        let k = -idx - 1;
        (k < m).then_some((k as usize, 1.0))
    } else if idx >= m {
        let k = 2 * m - 1 - idx;
        (k >= 0).then_some((k as usize, -1.0))
    } else {
        Some((idx as usize, 1.0))
    }
}

fn push_folded(row: &mut Vec<(usize, f64)>, idx: i64, c: f64, m: usize) {
    if let Some((k, s)) = fold(idx, m) {
        if let Some(e) = row.iter_mut().find(|e| e.0 == k) {
            e.1 += s * c;
        } else {
            row.push((k, s * c));
        }
    }
}

/// Midpoint weights for `∫_0^R r^β φ(r) dr` with `φ` even and smooth, corrected at
/// the axis using the Navot expansion of the midpoint rule.
pub fn axis_corrected_weights(beta: f64, h: f64, m: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..m).map(|i| h * ((i as f64 + 0.5) * h).powf(beta)).collect();
    let npts = 4.min(m);
    // Inverse Vandermonde in x = r² over the first nodes: row k/2 extracts φ^{(k)}(0)/k!.
    let x: Vec<f64> = (0..npts).map(|i| ((i as f64 + 0.5) * h).powi(2)).collect();
    let vander = Mat::<f64>::from_fn(npts, npts, |i, j| x[i].powi(j as i32));
    let lu = vander.partial_piv_lu();
    let inv = lu.inverse();
    for k in (0..=4).step_by(2) {
        let c = hurwitz_zeta_half(-beta - k as f64) * h.powf(beta + k as f64 + 1.0);
        if c == 0.0 || k / 2 >= npts {
            continue;
        }
        for i in 0..npts {
            w[i] -= c * inv[(k / 2, i)];
        }
    }
    w
}

/// Eigendecomposition of the symmetrized Laplacian `W^{1/2} L W^{-1/2} = Q Λ Qᵀ`.
pub struct SpectralBasis {
    /// Eigenvalues of the Laplacian (all non-positive), ascending.
    pub lambda: Vec<f64>,
    q: Mat<f64>,
    sqrt_w: Vec<f64>,
}

impl SpectralBasis {
    /// `f(L) x` for real `x`.
    pub fn apply_real(&self, x: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let m = x.len();
        let xs = Mat::<f64>::from_fn(m, 1, |i, _| x[i] * self.sqrt_w[i]);
        let mut c = self.q.transpose() * &xs;
        for (i, &l) in self.lambda.iter().enumerate() {
            c[(i, 0)] *= f(l);
        }
        let y = &self.q * &c;
        (0..m).map(|i| y[(i, 0)] / self.sqrt_w[i]).collect()
    }

    /// `v ← Σ_k φ_k P_k v`, with `φ_k` a complex multiplier per eigenvalue.
    pub fn apply_complex(&self, v: &mut [Complex64], phases: &[Complex64]) {
        let m = v.len();
        let xs = Mat::<f64>::from_fn(m, 2, |i, j| {
            let s = self.sqrt_w[i];
            if j == 0 {
                v[i].re * s
            } else {
                v[i].im * s
            }
        });
        let mut c = self.q.transpose() * &xs;
        for (k, ph) in phases.iter().enumerate() {
            let z = Complex64::new(c[(k, 0)], c[(k, 1)]) * ph;
            c[(k, 0)] = z.re;
            c[(k, 1)] = z.im;
        }
        let y = &self.q * &c;
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = Complex64::new(y[(i, 0)], y[(i, 1)]) / self.sqrt_w[i];
        }
    }
}

/// Discretized radial coordinate in `N` dimensions.
pub struct RadialGrid {
    n: usize,
    r_max: f64,
    m: usize,
    order: usize,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    stag_weights: Vec<f64>,
    grad: Rows,
    d1: Rows,
    d2: Rows,
    potential_cache: Mutex<Vec<(f64, Arc<Vec<f64>>)>>,
    basis: OnceLock<Arc<SpectralBasis>>,
}

impl std::fmt::Debug for RadialGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialGrid")
            .field("n", &self.n)
            .field("r_max", &self.r_max)
            .field("m", &self.m)
            .field("order", &self.order)
            .finish()
    }
}

pub const DEFAULT_ORDER: usize = 6;

impl RadialGrid {
    /// Grid with the default sixth-order stencils.
    pub fn new(n: usize, r_max: f64, m: usize) -> Result<Arc<Self>, GridError> {
        Self::with_order(n, r_max, m, DEFAULT_ORDER)
    }

    pub fn with_order(n: usize, r_max: f64, m: usize, order: usize) -> Result<Arc<Self>, GridError> {
        if n == 0 {
            return Err(GridError::BadDimension);
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(GridError::BadRadius(r_max));
        }
        if m < 5 {
            return Err(GridError::TooFewNodes(m));
        }
        let coeffs = staggered_coefficients(order)?;
        let h = r_max / m as f64;
        let omega = sphere_area(n);
        let nodes: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * h).collect();

        // Staggered derivative: row j-1 evaluates at ρ_j = j h, j = 1..M.
        let mut grad_rows = Vec::with_capacity(m);
        for j in 1..=m as i64 {
            let mut row = Vec::with_capacity(2 * coeffs.len());
            for (k, &c) in coeffs.iter().enumerate() {
                let k = k as i64 + 1;
                push_folded(&mut row, j + k - 1, c / h, m);
                push_folded(&mut row, j - k, -c / h, m);
            }
            grad_rows.push(row);
        }
        let grad = Rows { rows: grad_rows };

        let mut stag_weights: Vec<f64> = (1..=m).map(|j| omega * (j as f64 * h).powi(n as i32 - 1) * h).collect();
        stag_weights[m - 1] *= 0.5;

        let mut weights: Vec<f64> = axis_corrected_weights(n as f64 - 1.0, h, m)
            .into_iter()
            .map(|w| omega * w)
            .collect();
        if n.is_multiple_of(2) {
            // Even dimensions: the reflected flux has a kink at the axis. Fix the
            // first node weights so that L r² = 2N holds exactly there.
            let r2: Vec<f64> = nodes.iter().map(|r| r * r).collect();
            let flux: Vec<f64> = grad.apply(&r2).iter().zip(&stag_weights).map(|(g, w)| g * w).collect();
            let a_r2 = grad.apply_transpose(&flux, m);
            for i in 0..(order / 2 + 1).min(m) {
                weights[i] = -a_r2[i] / (2.0 * n as f64);
            }
        }
        // Put the ball-volume deficit of the rule on the outermost node.
        let volume = omega * r_max.powi(n as i32) / n as f64;
        let total: f64 = weights.iter().sum();
        weights[m - 1] += volume - total;

        let half = order / 2;
        let c1 = central_first(order);
        let c2 = central_second(order);
        let mut d1_rows = Vec::with_capacity(m);
        let mut d2_rows = Vec::with_capacity(m);
        for i in 0..m as i64 {
            let mut r1 = Vec::new();
            let mut r2 = Vec::new();
            push_folded(&mut r2, i, c2[0] / (h * h), m);
            for k in 1..=half as i64 {
                let a = c1[k as usize - 1] / h;
                push_folded(&mut r1, i + k, a, m);
                push_folded(&mut r1, i - k, -a, m);
                let b = c2[k as usize] / (h * h);
                push_folded(&mut r2, i + k, b, m);
                push_folded(&mut r2, i - k, b, m);
            }
            d1_rows.push(r1);
            d2_rows.push(r2);
        }

        Ok(Arc::new(Self {
            n,
            r_max,
            m,
            order,
            h,
            nodes,
            weights,
            stag_weights,
            grad,
            d1: Rows { rows: d1_rows },
            d2: Rows { rows: d2_rows },
            potential_cache: Mutex::new(Vec::new()),
            basis: OnceLock::new(),
        }))
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn len(&self) -> usize {
        self.m
    }
    pub fn is_empty(&self) -> bool {
        self.m == 0
    }
    pub fn order(&self) -> usize {
        self.order
    }
    /// Node spacing `Δr`.
    pub fn spacing(&self) -> f64 {
        self.h
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i f_i`, rejecting non-finite integrands.
    pub fn integrate(&self, f: &[f64]) -> Result<f64, GridError> {
        if let Some(node) = f.iter().position(|x| !x.is_finite()) {
            return Err(GridError::NonFinite {
                node,
                r: self.nodes[node],
            });
        }
        Ok(self.sum(f))
    }

    /// `Σ w_i f_i` without checks.
    pub fn sum(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, x)| w * x).sum()
    }

    /// `⟨u, v⟩ = Σ w_i u_i conj(v_i)`.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        self.weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| a * b.conj() * *w)
            .sum()
    }

    /// `Σ w_i |v_i|²`.
    pub fn norm_sq<T: Copy + Into<Complex64>>(&self, v: &[T]) -> f64 {
        self.weights.iter().zip(v).map(|(w, &x)| w * x.into().norm_sqr()).sum()
    }

    /// Weight factors `ρ_i ≈ r_i^b` such that `Σ w_i ρ_i f(r_i)` is the corrected
    /// quadrature of `∫ |x|^b f dx` for smooth even `f`.
    pub fn potential_factor(&self, b: f64) -> Arc<Vec<f64>> {
        let mut cache = self.potential_cache.lock().expect("potential cache poisoned");
        if let Some((_, v)) = cache.iter().find(|(bb, _)| bb.to_bits() == b.to_bits()) {
            return v.clone();
        }
        let omega = sphere_area(self.n);
        let wb = axis_corrected_weights(self.n as f64 - 1.0 + b, self.h, self.m);
        let rho: Vec<f64> = (0..self.m)
            .map(|i| {
                if i == self.m - 1 {
                    // The outer correction above is not part of the rule for |x|^b.
                    self.nodes[i].powf(b)
                } else {
                    omega * wb[i] / self.weights[i]
                }
            })
            .collect();
        let rho = Arc::new(rho);
        cache.push((b, rho.clone()));
        rho
    }

    /// Radial derivative on the staggered points `ρ_j = j h`.
    pub fn staggered_gradient<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        self.grad.apply(v)
    }

    /// `∂_r v` at the nodes (central, order `p`).
    pub fn derivative<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        self.d1.apply(v)
    }

    /// `∂_r² v` at the nodes (central, order `p`).
    pub fn second_derivative<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        self.d2.apply(v)
    }

    /// `Δv = ∂_r² v + (N-1)/r ∂_r v` in flux form.
    pub fn laplacian<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        let flux: Vec<T> = self
            .grad
            .apply(v)
            .into_iter()
            .zip(&self.stag_weights)
            .map(|(g, &w)| g * w)
            .collect();
        self.grad
            .apply_transpose(&flux, self.m)
            .into_iter()
            .zip(&self.weights)
            .map(|(x, &w)| -(x * (1.0 / w)))
            .collect()
    }

    /// `Δ²v`, the square of the Laplacian matrix.
    pub fn bilaplacian<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        self.laplacian(&self.laplacian(v))
    }

    /// `‖∇v‖² = ∫ |∂_r v|² dx` on the staggered points.
    pub fn grad_norm_sq<T: Copy + Into<Complex64> + Scalar>(&self, v: &[T]) -> f64 {
        self.grad
            .apply(v)
            .into_iter()
            .zip(&self.stag_weights)
            .map(|(g, w)| w * g.into().norm_sqr())
            .sum()
    }

    /// Dense `M × M` matrix of the Laplacian.
    pub fn laplacian_matrix(&self) -> Mat<f64> {
        let mut a = Mat::<f64>::zeros(self.m, self.m);
        let mut e = vec![0.0; self.m];
        for j in 0..self.m {
            e[j] = 1.0;
            let col = self.laplacian(&e);
            for i in 0..self.m {
                a[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        a
    }

    /// Eigenbasis of the Laplacian, computed once per grid.
    pub fn basis(&self) -> Arc<SpectralBasis> {
        self.basis
            .get_or_init(|| {
                let m = self.m;
                let sqrt_w: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
                // B = diag(√W') G diag(W^{-1/2}), symmetrized Laplacian = -BᵀB.
                let mut bmat = Mat::<f64>::zeros(m, m);
                for (j, row) in self.grad.rows.iter().enumerate() {
                    let s = self.stag_weights[j].sqrt();
                    for &(k, c) in row {
                        bmat[(j, k)] += s * c / sqrt_w[k];
                    }
                }
                let ls = -(bmat.transpose() * &bmat);
                let eig = ls
                    .self_adjoint_eigen(faer::Side::Lower)
                    .expect("symmetric eigendecomposition failed");
                let s = eig.S();
                let lambda: Vec<f64> = (0..m).map(|i| s[i].min(0.0)).collect();
                Arc::new(SpectralBasis {
                    lambda,
                    q: eig.U().to_owned(),
                    sqrt_w,
                })
            })
            .clone()
    }

    /// Grid dilated by `1/ν` (radius `R_max/ν`, same node count and stencil).
    pub fn dilated(&self, nu: f64) -> Result<Arc<Self>, GridError> {
        Self::with_order(self.n, self.r_max / nu, self.m, self.order)
    }

    /// Sample `v(x)` at position `x ≥ 0` by degree-7 Lagrange interpolation using
    /// the even/odd continuation; zero beyond `R_max`.
    pub fn interpolate<T: Scalar>(&self, v: &[T], x: f64) -> T {
        if x > self.r_max {
            return T::default();
        }
        const HALF: i64 = 4;
        let s = x / self.h - 0.5;
        let base = s.floor() as i64;
        let mut acc = T::default();
        let t = s - base as f64;
        for a in (1 - HALF)..=HALF {
            // Lagrange basis on integer offsets 1-HALF..=HALF evaluated at t.
            let mut l = 1.0;
            for b in (1 - HALF)..=HALF {
                if b != a {
                    l *= (t - b as f64) / (a - b) as f64;
                }
            }
            if let Some((k, sign)) = fold(base + a, self.m) {
                acc += v[k] * (l * sign);
            }
        }
        acc
    }
}

/// Complex radial profile on a grid.
#[derive(Debug, Clone)]
pub struct RadialField {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Self {
        assert_eq!(grid.len(), values.len(), "field length must match the grid");
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let m = grid.len();
        Self::new(grid, vec![Complex64::default(); m])
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn from_real(grid: Arc<RadialGrid>, values: &[f64]) -> Self {
        let values = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(grid, values)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::new(self.grid.clone(), self.values.iter().map(|v| v * c).collect())
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Index of the first non-finite value.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite())
    }

    pub fn laplacian(&self) -> Self {
        Self::new(self.grid.clone(), self.grid.laplacian(&self.values))
    }

    pub fn bilaplacian(&self) -> Self {
        Self::new(self.grid.clone(), self.grid.bilaplacian(&self.values))
    }

    /// Writes the snapshot text format: header `N b q R_max M t`, then `r Re Im` rows.
    pub fn write_snapshot<W: Write>(&self, mut out: W, b: f64, q: f64, t: f64) -> std::io::Result<()> {
        let g = &self.grid;
        writeln!(
            out,
            "{} {:.16e} {:.16e} {:.16e} {} {:.16e}",
            g.dim(),
            b,
            q,
            g.r_max(),
            g.len(),
            t
        )?;
        for (r, v) in g.nodes().iter().zip(&self.values) {
            writeln!(out, "{:.16e} {:.16e} {:.16e}", r, v.re, v.im)?;
        }
        Ok(())
    }

    /// Reads a snapshot; returns `(field, b, q, t)`.
    pub fn read_snapshot<R: BufRead>(input: R) -> Result<(Self, f64, f64, f64), GridError> {
        let bad = |s: &str| GridError::Snapshot(s.to_string());
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("empty file"))?
            .map_err(|e| bad(&e.to_string()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 6 {
            return Err(bad("header must be `N b q R_max M t`"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number `{s}`")));
        let n: usize = h[0].parse().map_err(|_| bad("bad N"))?;
        let (b, q, r_max) = (num(h[1])?, num(h[2])?, num(h[3])?);
        let m: usize = h[4].parse().map_err(|_| bad("bad M"))?;
        let t = num(h[5])?;
        let grid = RadialGrid::new(n, r_max, m)?;
        let mut values = Vec::with_capacity(m);
        for line in lines {
            let line = line.map_err(|e| bad(&e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 3 {
                return Err(bad("rows must be `r Re Im`"));
            }
            values.push(Complex64::new(num(cols[1])?, num(cols[2])?));
        }
        if values.len() != m {
            return Err(bad(&format!("expected {m} rows, found {}", values.len())));
        }
        Ok((Self::new(grid, values), b, q, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn staggered_coefficients_are_consistent() {
        for p in [2, 4, 6, 8] {
            let c = staggered_coefficients(p).unwrap();
            for k in 0..c.len() {
                let s: f64 = c
                    .iter()
                    .enumerate()
                    .map(|(m, cm)| cm * (2.0 * m as f64 + 1.0).powi(2 * k as i32 + 1) / 2f64.powi(2 * k as i32))
                    .sum();
                let want = if k == 0 { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-14, "p={p} k={k} s={s}");
            }
        }
    }

    #[test]
    fn ball_volume_and_positive_weights() {
        for n in 1..=6 {
            let g = RadialGrid::new(n, 2.0, 256).unwrap();
            assert!(g.weights().iter().all(|&w| w > 0.0), "N={n}");
            let vol = sphere_area(n) * 2f64.powi(n as i32) / n as f64;
            let s = g.integrate(&vec![1.0; 256]).unwrap();
            assert!((s / vol - 1.0).abs() < 1e-12, "N={n}");
        }
        let g = RadialGrid::new(3, 2.0, 256).unwrap();
        assert!((g.integrate(&vec![1.0; 256]).unwrap() - 33.510_321_638_291_124).abs() < 1e-10);
    }

    #[test]
    fn integrate_reports_first_bad_node() {
        let g = RadialGrid::new(2, 1.0, 16).unwrap();
        let mut f = vec![1.0; 16];
        f[5] = f64::NAN;
        assert!(matches!(g.integrate(&f), Err(GridError::NonFinite { node: 5, .. })));
    }

    #[test]
    fn laplacian_of_quadratic_near_axis_is_exact_in_even_dimensions() {
        for n in [2, 4] {
            let g = RadialGrid::new(n, 30.0, 512).unwrap();
            let v: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
            let l = g.laplacian(&v);
            for (i, x) in l.iter().take(20).enumerate() {
                assert!((x - 2.0 * n as f64).abs() < 1e-9, "N={n} i={i} {x}");
            }
        }
    }

    #[test]
    fn laplacian_of_r_squared_in_three_dimensions() {
        let g = RadialGrid::new(3, 30.0, 512).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        let l = g.laplacian(&v);
        for x in l.iter().take(100) {
            assert!((x - 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn interpolation_reproduces_smooth_profile() {
        let g = RadialGrid::new(3, 20.0, 512).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        for x in [0.0, 0.013, 0.5, 1.234, 3.0] {
            let y = g.interpolate(&v, x);
            assert!((y - (-x * x).exp()).abs() < 1e-9, "x={x}");
        }
        assert_eq!(g.interpolate(&v, 21.0), 0.0);
    }

    #[test]
    fn gaussian_norms() {
        let g = RadialGrid::new(2, 12.0, 1024).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| (-2.0 * r * r).exp()).collect();
        let s = g.integrate(&f).unwrap();
        assert!((s - PI / 2.0).abs() < 1e-8, "{:e}", s - PI / 2.0);
        let v: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        let k = g.grad_norm_sq(&v);
        assert!((k - PI).abs() < 1e-8, "{:e}", k - PI);
    }
}
