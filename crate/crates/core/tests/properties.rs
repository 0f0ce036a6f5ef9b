//! Randomized invariants across modules.

use ibnls_core::dichotomy::{compare, signed_pow};
use ibnls_core::evolution::Propagator;
use ibnls_core::functionals::{gaussian, kinetic, mass, potential, rescale_exact, weinstein};
use ibnls_core::ground_state::{solve_ground_state, GroundState, GroundStateConfig};
use ibnls_core::inequality::{check_gn, random_samples};
use ibnls_core::virial::build_cutoff;
use ibnls_core::{ModelParams, RadialField, RadialGrid};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ground_state() -> &'static GroundState {
    static GS: OnceLock<GroundState> = OnceLock::new();
    GS.get_or_init(|| {
        let p = ModelParams::new(2, 1.0, 4.0);
        let g = RadialGrid::new(2, 25.0, 512).unwrap();
        solve_ground_state(&p, &g, None, &GroundStateConfig::default()).unwrap()
    })
}

fn params() -> impl Strategy<Value = ModelParams> {
    (2usize..=9, 0.0f64..4.0, 0.01f64..1.0).prop_map(|(n, b, t)| {
        let p = ModelParams::new(n, b, 2.0);
        let lo = p.lower_power();
        let hi = p.exponents().q_e.finite().unwrap_or(lo + 20.0);
        ModelParams::new(n, b, lo + t * (hi - lo))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponent_identities(p in params()) {
        let ex = p.exponents();
        prop_assert!((ex.d + ex.e - (1.0 + p.q)).abs() <= 1e-12 * (1.0 + p.q));
        let scale = ex.s_c.abs().max(1.0) * (p.q - 1.0);
        prop_assert!((ex.s_c * (p.q - 1.0) - 2.0 * (ex.d - 2.0)).abs() <= 1e-12 * scale);
        prop_assert!(ex.d > 0.0 && ex.e > 0.0);
    }

    #[test]
    fn exact_rescale_laws(n in 2usize..6, b in 0.0f64..3.0, kappa in 0.5f64..2.0, nu in 0.5f64..2.0) {
        let p = ModelParams::new(n, b, p_q(n, b));
        let g = RadialGrid::new(n, 20.0, 256).unwrap();
        let v = gaussian(&RadialField::zeros(g), 1.3, 1.7);
        let w = rescale_exact(&v, kappa, nu).unwrap();
        let nf = n as f64;
        prop_assert!(rel(mass(&w), kappa * kappa * nu.powf(-nf) * mass(&v)) < 1e-10);
        prop_assert!(rel(kinetic(&w), kappa * kappa * nu.powf(4.0 - nf) * kinetic(&v)) < 1e-10);
        prop_assert!(rel(potential(&w, &p), kappa.powf(1.0 + p.q) * nu.powf(-nf - b) * potential(&v, &p)) < 1e-10);
        prop_assert!(rel(weinstein(&w, &p).unwrap(), weinstein(&v, &p).unwrap()) < 1e-10);
    }

    #[test]
    fn gagliardo_nirenberg_ratio_at_most_one(seed in any::<u64>()) {
        let gs = ground_state();
        let p = ModelParams::new(2, 1.0, 4.0);
        for v in random_samples(&gs.zeta.grid, 5, seed) {
            prop_assert!(check_gn(&v, gs, &p) <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn split_step_conserves_mass(seed in any::<u64>(), dt in 1e-5f64..1e-2) {
        let p = ModelParams::new(3, 1.0, 3.0);
        let g = RadialGrid::new(3, 15.0, 128).unwrap();
        let mut v = random_samples(&g, 1, seed).pop().unwrap();
        let m0 = mass(&v);
        let prop = Propagator::new(&g, &p, dt);
        for _ in 0..20 {
            prop.step(&mut v.values);
        }
        prop_assert!(rel(mass(&v), m0) < 1e-12);
    }

    #[test]
    fn linear_flow_preserves_kinetic(seed in any::<u64>(), dt in 1e-4f64..1e-1) {
        let p = ModelParams::new(2, 1.0, 3.0);
        let g = RadialGrid::new(2, 15.0, 128).unwrap();
        let mut v = random_samples(&g, 1, seed).pop().unwrap();
        let k0 = kinetic(&v);
        let prop = Propagator::new(&g, &p, dt).linear();
        for _ in 0..10 {
            prop.step(&mut v.values);
        }
        prop_assert!(rel(kinetic(&v), k0) < 1e-10);
    }

    #[test]
    fn snapshot_round_trip(n in 1usize..8, r_max in 1.0f64..50.0, vals in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 8..40)) {
        let g = RadialGrid::new(n, r_max, vals.len()).unwrap();
        let v = RadialField::new(g, vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect());
        let mut text = Vec::new();
        v.write_snapshot(&mut text, 0.5, 3.0, 0.25).unwrap();
        let (back, b, q, t) = RadialField::read_snapshot(text.as_slice()).unwrap();
        prop_assert_eq!((b, q, t), (0.5, 3.0, 0.25));
        prop_assert_eq!(back.values, v.values);
        prop_assert_eq!(back.grid.r_max(), r_max);
    }

    #[test]
    fn signed_power_is_odd(x in 1e-6f64..1e6, s in 0.01f64..2.0) {
        prop_assert_eq!(signed_pow(-x, s), -signed_pow(x, s));
        prop_assert!(signed_pow(x, s) > 0.0);
    }

    #[test]
    fn comparison_is_antisymmetric(a in -1e3f64..1e3, b in -1e3f64..1e3, tol in 0.0f64..1e-3) {
        prop_assert_eq!(compare(a, b, tol), compare(b, a, tol).reverse());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cutoffs_certify(n in 2usize..6, radius in 1.0f64..8.0) {
        let g = RadialGrid::new(n, 10.0 * radius, 512).unwrap();
        prop_assert!(build_cutoff(radius, &g).is_ok());
    }
}

/// A power inside the Gagliardo–Nirenberg window for `(n, b)`.
fn p_q(n: usize, b: f64) -> f64 {
    ModelParams::new(n, b, 2.0).lower_power() + 0.5
}
