//! Mass, kinetic energy, potential, energy, Weinstein quotient and action, plus
//! the two-parameter scaling `v ↦ κ v(ν ·)`.

use crate::grid::{GridError, RadialField};
use crate::params::ModelParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// All functionals of one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValues {
    pub mass: f64,
    /// `‖Δv‖²`.
    pub kinetic: f64,
    /// `∫ |v|^{1+q} |x|^b dx`.
    pub potential: f64,
    pub energy: f64,
    /// `‖v‖^E ‖Δv‖^D / potential`, infinite when the potential vanishes.
    pub weinstein: f64,
    pub action: f64,
}

/// `∫ |v|² dx`.
pub fn mass(v: &RadialField) -> f64 {
    v.grid.norm_sq(&v.values)
}

/// `‖Δv‖²`.
pub fn kinetic(v: &RadialField) -> f64 {
    v.grid.norm_sq(&v.grid.laplacian(&v.values))
}

/// `‖∇v‖²`.
pub fn gradient(v: &RadialField) -> f64 {
    v.grid.grad_norm_sq(&v.values)
}

/// `∫ |v|^{1+q} |x|^b dx`.
pub fn potential(v: &RadialField, p: &ModelParams) -> f64 {
    let rho = v.grid.potential_factor(p.b);
    v.grid
        .weights()
        .iter()
        .zip(rho.iter())
        .zip(&v.values)
        .map(|((w, r), x)| w * r * x.norm().powf(1.0 + p.q))
        .sum()
}

/// `‖Δv‖² - 2/(1+q) ∫ |v|^{1+q} |x|^b dx`.
pub fn energy(v: &RadialField, p: &ModelParams) -> f64 {
    energy_from(kinetic(v), potential(v, p), p)
}

pub fn energy_from(kinetic: f64, potential: f64, p: &ModelParams) -> f64 {
    kinetic - 2.0 / (1.0 + p.q) * potential
}

/// Weinstein quotient from its three ingredients.
pub fn weinstein_from(mass: f64, kinetic: f64, potential: f64, p: &ModelParams) -> f64 {
    if potential == 0.0 {
        return f64::INFINITY;
    }
    let ex = p.exponents();
    mass.powf(ex.e / 2.0) * kinetic.powf(ex.d / 2.0) / potential
}

/// `K(v) = ‖v‖^E ‖Δv‖^D / ∫ |v|^{1+q}|x|^b dx`; errors on the zero field.
pub fn weinstein(v: &RadialField, p: &ModelParams) -> Result<f64, FunctionalError> {
    let m = mass(v);
    if m == 0.0 {
        return Err(FunctionalError::ZeroField);
    }
    Ok(weinstein_from(m, kinetic(v), potential(v, p), p))
}

/// `S(v) = ‖Δv‖² + ‖v‖² - 2/(1+q) ∫ |v|^{1+q}|x|^b dx`.
pub fn action(v: &RadialField, p: &ModelParams) -> f64 {
    kinetic(v) + mass(v) - 2.0 / (1.0 + p.q) * potential(v, p)
}

pub fn evaluate(v: &RadialField, p: &ModelParams) -> FunctionalValues {
    let mass = mass(v);
    let kinetic = kinetic(v);
    let potential = potential(v, p);
    FunctionalValues {
        mass,
        kinetic,
        potential,
        energy: energy_from(kinetic, potential, p),
        weinstein: weinstein_from(mass, kinetic, potential, p),
        action: kinetic + mass - 2.0 / (1.0 + p.q) * potential,
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("Weinstein quotient of the zero field")]
    ZeroField,
    #[error("scaling parameters must be positive, got kappa = {0}, nu = {1}")]
    BadScaling(f64, f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// `κ v(ν r_i)` on the same grid, by Lagrange interpolation; zero beyond `R_max/ν`.
pub fn rescale(v: &RadialField, kappa: f64, nu: f64) -> Result<RadialField, FunctionalError> {
    if !(kappa > 0.0 && nu > 0.0) {
        return Err(FunctionalError::BadScaling(kappa, nu));
    }
    let g = &v.grid;
    let values = g
        .nodes()
        .iter()
        .map(|&r| g.interpolate(&v.values, nu * r) * kappa)
        .collect();
    Ok(RadialField::new(g.clone(), values))
}

/// `κ v(ν ·)` represented exactly: the grid is dilated to radius `R_max/ν` and
/// the node values are multiplied by `κ`.
pub fn rescale_exact(v: &RadialField, kappa: f64, nu: f64) -> Result<RadialField, FunctionalError> {
    if !(kappa > 0.0 && nu > 0.0) {
        return Err(FunctionalError::BadScaling(kappa, nu));
    }
    let grid = v.grid.dilated(nu)?;
    let values = v.values.iter().map(|x| x * kappa).collect();
    Ok(RadialField::new(grid, values))
}

/// Real Gaussian `a e^{-r²/s²}` on the grid of `like`.
pub fn gaussian(like: &RadialField, a: f64, s: f64) -> RadialField {
    RadialField::from_fn(like.grid.clone(), |r| {
        Complex64::new(a * (-(r * r) / (s * s)).exp(), 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use std::f64::consts::PI;

    fn gauss(n: usize, r_max: f64, m: usize) -> RadialField {
        let g = RadialGrid::new(n, r_max, m).unwrap();
        RadialField::from_fn(g, |r| Complex64::new((-r * r).exp(), 0.0))
    }

    #[test]
    fn zero_field() {
        let g = RadialGrid::new(2, 10.0, 64).unwrap();
        let z = RadialField::zeros(g);
        let p = ModelParams::new(2, 1.0, 3.0);
        assert_eq!(mass(&z), 0.0);
        assert_eq!(potential(&z, &p), 0.0);
        assert_eq!(energy(&z, &p), 0.0);
        assert_eq!(action(&z, &p), 0.0);
        assert_eq!(weinstein(&z, &p), Err(FunctionalError::ZeroField));
    }

    #[test]
    fn gaussian_mass_in_the_plane() {
        let v = gauss(2, 12.0, 1024);
        assert!((mass(&v) - PI / 2.0).abs() < 1e-8);
    }

    #[test]
    fn small_data_has_positive_energy() {
        let v = gauss(3, 12.0, 256).scaled(Complex64::new(0.01, 0.0));
        assert!(energy(&v, &ModelParams::new(3, 1.0, 3.0)) > 0.0);
    }

    #[test]
    fn weinstein_is_infinite_without_potential() {
        let p = ModelParams::new(2, 1.0, 4.0);
        assert_eq!(weinstein_from(1.0, 1.0, 0.0, &p), f64::INFINITY);
    }

    #[test]
    fn homogeneous_potential_is_plain_norm() {
        let v = gauss(3, 12.0, 512);
        let p = ModelParams::new(3, 0.0, 3.0);
        let direct: f64 = v
            .grid
            .weights()
            .iter()
            .zip(&v.values)
            .map(|(w, x)| w * x.norm().powi(4))
            .sum();
        assert!((potential(&v, &p) / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_rescale_obeys_laws_to_rounding() {
        let v = gauss(3, 20.0, 512);
        let p = ModelParams::new(3, 0.5, 3.0);
        let (kappa, nu) = (1.3, 0.7);
        let w = rescale_exact(&v, kappa, nu).unwrap();
        let n = 3.0;
        assert!((mass(&w) / (kappa * kappa * nu.powf(-n) * mass(&v)) - 1.0).abs() < 1e-12);
        let kin = kappa * kappa * nu.powf(4.0 - n) * kinetic(&v);
        assert!((kinetic(&w) / kin - 1.0).abs() < 1e-12);
        let pot = kappa.powf(1.0 + p.q) * nu.powf(-n - p.b) * potential(&v, &p);
        assert!((potential(&w, &p) / pot - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_rescale() {
        let v = gauss(2, 10.0, 128);
        let w = rescale(&v, 1.0, 1.0).unwrap();
        for (a, b) in v.values.iter().zip(&w.values) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
