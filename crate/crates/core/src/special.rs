//! Special functions not covered by `statrs`: Riemann and half-shifted Hurwitz zeta.

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Bernoulli numbers `B_2, B_4, ..., B_20`.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta for `s > 0` by Euler–Maclaurin summation.
fn zeta_positive(s: f64) -> f64 {
    const N0: usize = 24;
    let n0 = N0 as f64;
    let mut sum: f64 = (1..N0).map(|n| (n as f64).powf(-s)).sum();
    sum += n0.powf(1.0 - s) / (s - 1.0) + 0.5 * n0.powf(-s);
    // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * n0^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut power = n0.powf(-s - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * power;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        let k = 2.0 * j as f64 + 2.0;
        rising *= (s + k - 1.0) * (s + k);
        fact *= (k + 1.0) * (k + 2.0);
        power /= n0 * n0;
    }
    sum
}

/// Riemann zeta function for real `s != 1`.
pub fn riemann_zeta(s: f64) -> f64 {
    if s > 0.0 {
        return zeta_positive(s);
    }
    if s == 0.0 {
        return -0.5;
    }
    if s.fract() == 0.0 && (s as i64) % 2 == 0 {
        return 0.0;
    }
    let t = 1.0 - s;
    2f64.powf(s) * PI.powf(s - 1.0) * (PI * s / 2.0).sin() * gamma(t) * zeta_positive(t)
}

/// Hurwitz zeta `ζ(s, 1/2) = (2^s - 1) ζ(s)`.
pub fn hurwitz_zeta_half(s: f64) -> f64 {
    if s == 1.0 {
        return f64::INFINITY;
    }
    (2f64.powf(s) - 1.0) * riemann_zeta(s)
}

/// Surface area of the unit sphere in `R^N`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((riemann_zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((riemann_zeta(3.0) - 1.202_056_903_159_594_3).abs() < 1e-15);
        assert!((riemann_zeta(-1.0) + 1.0 / 12.0).abs() < 1e-15);
        assert!((riemann_zeta(-3.0) - 1.0 / 120.0).abs() < 1e-15);
        assert_eq!(riemann_zeta(-2.0), 0.0);
        assert!((riemann_zeta(-0.5) + 0.207_886_224_977_355).abs() < 1e-14);
        assert!((riemann_zeta(0.7) + 2.778_388_445_553_7).abs() < 1e-12);
        // ζ(-1, 1/2) = 1/24
        assert!((hurwitz_zeta_half(-1.0) - 1.0 / 24.0).abs() < 1e-15);
        assert!((riemann_zeta(-3.5) - 0.004_441_011_335_479_43).abs() < 1e-15);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }
}
