//! Acceptance criteria, run in sequence with one PASS/FAIL line each.

use ibnls_core::dichotomy::{check_flow_invariance, classify, Classification, Side};
use ibnls_core::evolution::{detect_blowup, evolve, EvolutionConfig, Termination};
use ibnls_core::functionals::{evaluate, kinetic, mass, potential, rescale, weinstein};
use ibnls_core::ground_state::{
    ground_state_from_minimizer, minimize_weinstein, scaled_ground_state, solve_ground_state, GroundState,
    GroundStateConfig,
};
use ibnls_core::inequality::{check_gn, compact_embedding_probe, counterexample_growth, random_samples, ProbeSequence};
use ibnls_core::virial::{blowup_functional_bound, build_cutoff, verify_virial, CutoffProfile};
use ibnls_core::{Exponent, ModelParams, RadialGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: usize, name: &str, budget_s: f64, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let secs = start.elapsed().as_secs_f64();
    let pass = out.pass && secs < budget_s;
    println!(
        "{} criterion {id:>2} ({name}): {} [{secs:.1} s of {budget_s} s]",
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    pass
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ground_state(p: &ModelParams, r_max: f64, m: usize) -> GroundState {
    let grid = RadialGrid::new(p.n, r_max, m).unwrap();
    solve_ground_state(p, &grid, None, &GroundStateConfig::default()).unwrap()
}

fn exponent_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.gen_range(2..=9usize);
        let b = rng.gen_range(0.0..4.0);
        let probe = ModelParams::new(n, b, 2.0);
        let lower = probe.lower_power();
        let upper = probe.exponents().q_e.finite().unwrap_or(lower + 20.0);
        let q = rng.gen_range(lower..upper);
        let ex = ModelParams::new(n, b, q).exponents();
        let nf = n as f64;
        worst = worst.max(rel(ex.d + ex.e, 1.0 + q));
        // Compared against the size of the summands, which is where rounding lives.
        let scale = nf * (q - 1.0) / 2.0 + 4.0 + b;
        worst = worst.max((ex.s_c * (q - 1.0) - 2.0 * (ex.d - 2.0)).abs() / scale);
    }
    let mut exact = true;
    for n in 2..=9usize {
        for &b in &[0.0, 0.5, 1.0, 2.5] {
            let qm = ModelParams::new(n, b, 0.0).exponents().q_m;
            exact &= ModelParams::new(n, b, qm).exponents().d == 2.0;
            if let Exponent::Finite(qe) = ModelParams::new(n, b, 0.0).exponents().q_e {
                exact &= ModelParams::new(n, b, qe).exponents().e == 0.0;
            }
        }
    }
    outcome(
        worst < 1e-12 && exact,
        format!("max rel error {worst:.2e}, critical values exact: {exact}"),
    )
}

fn certification(p: ModelParams) -> Outcome {
    let grid = RadialGrid::new(p.n, 30.0, 1024).unwrap();
    let cfg = GroundStateConfig::default();
    let gs = solve_ground_state(&p, &grid, None, &cfg).unwrap();
    let (a, b) = gs.residual_pohozaev;
    let c19 = rel(gs.c_from_mass, gs.c_opt);
    let min = minimize_weinstein(&p, &grid, None, &cfg).unwrap();
    let from_min = ground_state_from_minimizer(&min, &p).unwrap();
    let c19_min = rel(from_min.c_from_mass, min.c_opt);
    let pass = gs.residual_euler < 1e-6
        && a.abs() < 1e-5
        && b.abs() < 1e-5
        && gs.residual_identity.abs() < 1e-6
        && c19 < 1e-6
        && from_min.residual_euler < 1e-6
        && c19_min < 1e-6;
    outcome(
        pass,
        format!(
            "N={} b={} q={}: euler {:.1e}, pohozaev ({a:.1e}, {b:.1e}), identity {:.1e}, C_opt {:.10} vs mass formula {c19:.1e} (via minimizer {c19_min:.1e})",
            p.n, p.b, p.q, gs.residual_euler, gs.residual_identity, gs.c_opt
        ),
    )
}

fn gn_inequality() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut saturation: f64 = 0.0;
    for (i, p) in [ModelParams::new(2, 1.0, 4.0), ModelParams::new(3, 0.5, 3.0)]
        .iter()
        .enumerate()
    {
        let gs = ground_state(p, 30.0, 1024);
        saturation = saturation.max((check_gn(&gs.zeta, &gs, p) - 1.0).abs());
        for v in random_samples(&gs.zeta.grid, 500, 100 + i as u64) {
            worst = worst.max(check_gn(&v, &gs, p));
        }
    }
    outcome(
        worst <= 1.0 + 1e-6 && saturation < 1e-6,
        format!("max sample ratio {worst:.6}, saturation error {saturation:.1e}"),
    )
}

fn scaling_laws() -> Outcome {
    let p = ModelParams::new(3, 0.5, 3.0);
    let gs = ground_state(&p, 60.0, 1536);
    let v = &gs.zeta;
    let f = evaluate(v, &p);
    let k0 = weinstein(v, &p).unwrap();
    let nf = p.n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = [0.0f64; 4];
    for _ in 0..100 {
        let kappa = rng.gen_range(0.5..2.0);
        let nu = rng.gen_range(0.5..2.0);
        let w = rescale(v, kappa, nu).unwrap();
        let errs = [
            rel(mass(&w), kappa * kappa * nu.powf(-nf) * f.mass),
            rel(kinetic(&w), kappa * kappa * nu.powf(4.0 - nf) * f.kinetic),
            rel(
                potential(&w, &p),
                kappa.powf(1.0 + p.q) * nu.powf(-nf - p.b) * f.potential,
            ),
            rel(weinstein(&w, &p).unwrap(), k0),
        ];
        for (a, e) in worst.iter_mut().zip(errs) {
            *a = a.max(e);
        }
    }
    outcome(
        worst.iter().all(|e| *e < 1e-6),
        format!(
            "mass {:.1e}, kinetic {:.1e}, potential {:.1e}, Weinstein {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn conservation() -> Outcome {
    let p = ModelParams::new(3, 1.0, 5.0);
    let gs = ground_state(&p, 30.0, 1024);
    let v0 = scaled_ground_state(&gs, 0.5);
    let cfg = EvolutionConfig {
        dt: 1e-4,
        t_final: 1.0,
        ..Default::default()
    };
    let coarse = evolve(&v0, &cfg, &p).unwrap();
    let fine = evolve(
        &v0,
        &EvolutionConfig {
            dt: 5e-5,
            snapshot_stride: 20,
            ..cfg
        },
        &p,
    )
    .unwrap();
    let (m, e) = (coarse.mass_drift(), coarse.energy_drift());
    let factor = e / fine.energy_drift();
    let done = coarse.terminated == Termination::Completed && fine.terminated == Termination::Completed;
    outcome(
        done && m < 1e-9 && e < 1e-6 && factor >= 3.5,
        format!("0.5 zeta, N=3 b=1 q=5: mass drift {m:.1e}/unit time, energy drift {e:.1e}/unit time, halving dt reduces it {factor:.2}x"),
    )
}

fn standing_wave_run(p: ModelParams) -> (bool, f64, f64) {
    let gs = ground_state(&p, 30.0, 1024);
    let cfg = EvolutionConfig {
        dt: 1e-4,
        t_final: 1.0,
        snapshot_stride: 100,
        ..Default::default()
    };
    let traj = evolve(&gs.zeta, &cfg, &p).unwrap();
    let peak = gs.zeta.values.iter().fold(0.0f64, |a, x| a.max(x.norm()));
    let mut deviation: f64 = 0.0;
    for (t, v) in traj.times.iter().zip(&traj.snapshots) {
        let phase = Complex64::from_polar(1.0, *t);
        for (a, z) in v.values.iter().zip(&gs.zeta.values) {
            deviation = deviation.max((a - phase * z).norm() / peak);
        }
    }
    let k0 = traj.kinetic_series[0];
    let kin = traj.kinetic_series.iter().fold(0.0f64, |a, k| a.max(rel(*k, k0)));
    (traj.terminated == Termination::Completed, deviation, kin)
}

fn standing_wave() -> Outcome {
    let (done, deviation, kin) = standing_wave_run(ModelParams::new(3, 0.5, 3.0));
    let (_, dev2, kin2) = standing_wave_run(ModelParams::new(2, 1.0, 4.0));
    outcome(
        done && deviation < 1e-3 && kin < 1e-4,
        format!(
            "N=3 b=0.5 q=3: max deviation from e^(it) zeta {deviation:.1e}, kinetic variation {kin:.1e} \
             (informational, N=2 b=1 q=4: {dev2:.1e}, {kin2:.1e}; even-N axis resonance at dt=1e-4)"
        ),
    )
}

fn virial_identity() -> Outcome {
    let p = ModelParams::new(3, 1.0, 5.0);
    let gs = ground_state(&p, 40.0, 1024);
    let grid = gs.zeta.grid.clone();
    let v0 = scaled_ground_state(&gs, 1.2);
    let cfg = EvolutionConfig {
        dt: 2e-5,
        t_final: 0.12,
        snapshot_stride: 50,
        ..Default::default()
    };
    let traj = evolve(&v0, &cfg, &p).unwrap();
    let pure = verify_virial(&traj, &CutoffProfile::pure(&grid), &p);
    let cut = verify_virial(&traj, &build_cutoff(4.0, &grid).unwrap(), &p);
    let wide = RadialGrid::new(p.n, 80.0, 2048).unwrap();
    let certified = [2.0, 4.0, 8.0].iter().all(|&r| build_cutoff(r, &wide).is_ok());
    let k_growth = traj.kinetic_series.last().unwrap() / traj.kinetic_series[0];
    outcome(
        pure.max_mismatch < 1e-2 && cut.max_mismatch < 1e-2 && certified,
        format!(
            "1.2 zeta to t={}, kinetic x{k_growth:.2}: mismatch pure {:.1e}, R=4 {:.1e}; cutoffs R=2,4,8 certified: {certified}",
            traj.t_stop, pure.max_mismatch, cut.max_mismatch
        ),
    )
}

fn dichotomy() -> Outcome {
    let p = ModelParams::new(3, 1.0, 5.0);
    let gs = ground_state(&p, 30.0, 1024);
    let grid = gs.zeta.grid.clone();
    let small = scaled_ground_state(&gs, 0.5);
    let rep_small = classify(&small, &gs, &p, 1e-8).unwrap();
    let cfg = EvolutionConfig {
        dt: 1e-4,
        t_final: 1.0,
        ..Default::default()
    };
    let traj = evolve(&small, &cfg, &p).unwrap();
    let flow = check_flow_invariance(&traj, &gs, &p);
    let global_ok = rep_small.classification == Classification::Global
        && traj.terminated == Termination::Completed
        && flow.initial_side == Side::Below
        && flow.first_violation.is_none()
        && flow.bound_holds;

    let large = scaled_ground_state(&gs, 1.2);
    let rep_large = classify(&large, &gs, &p, 1e-8).unwrap();
    let bcfg = EvolutionConfig {
        dt: 1e-5,
        t_final: 0.5,
        snapshot_stride: 100,
        ..Default::default()
    };
    let btraj = evolve(&large, &bcfg, &p).unwrap();
    let report = detect_blowup(&btraj, &bcfg);
    let bound = blowup_functional_bound(&btraj, &build_cutoff(2.0, &grid).unwrap());
    let growth = btraj.kinetic_series.iter().fold(0.0f64, |a, k| a.max(*k)) / btraj.kinetic_series[0];
    let blowup_ok = rep_large.classification == Classification::Blowup
        && btraj.terminated == Termination::BlowupDetected
        && report.flagged
        && growth >= 10.0
        && bound.decreasing_fraction > 0.5
        && bound.final_negative;
    outcome(
        global_ok && blowup_ok,
        format!(
            "0.5 zeta: {:?}, {:?}, uniform H2 bound holds: {}; 1.2 zeta: {:?}, {:?} at t={:.4}, kinetic x{growth:.1}, M_R decreasing on the last {:.0}% of the run",
            rep_small.classification,
            traj.terminated,
            flow.bound_holds,
            rep_large.classification,
            btraj.terminated,
            btraj.t_stop,
            100.0 * bound.decreasing_fraction
        ),
    )
}

fn counterexample() -> Outcome {
    let grid = RadialGrid::new(2, 34.0, 4096).unwrap();
    let ns = [4.0, 8.0, 16.0, 32.0];
    let below = counterexample_growth(&ModelParams::new(2, 2.0, 2.0), &grid, &ns).unwrap();
    let left = counterexample_growth(&ModelParams::new(2, 2.0, 4.5), &grid, &ns).unwrap();
    let right = counterexample_growth(&ModelParams::new(2, 2.0, 5.5), &grid, &ns).unwrap();
    let within = rel(below.slope, below.expected) < 0.1;
    outcome(
        within && below.slope > 0.0 && left.slope > 0.0 && right.slope < 0.0,
        format!(
            "N=2 b=2 q=2: slope {:.4} (expected {}); q=4.5: {:.4}, q=5.5: {:.4}",
            below.slope, below.expected, left.slope, right.slope
        ),
    )
}

fn compact_embedding() -> Outcome {
    let p = ModelParams::new(3, 1.0, 5.0);
    let grid: Arc<RadialGrid> = RadialGrid::new(3, 34.0, 4096).unwrap();
    let ns = [4.0, 8.0, 16.0, 32.0];
    let rep = compact_embedding_probe(&p, &grid, &ns, 0.1, ProbeSequence::Translated).unwrap();
    let bounded = rep.h2_norm_sq.iter().fold(0.0f64, |a, x| a.max(*x)) / rep.h2_norm_sq[0] < 2.0;
    outcome(
        rel(rep.decay_exponent, rep.expected_exponent) < 0.15 && bounded,
        format!(
            "N=3 b=1 q=5: decay exponent {:.4} (expected {}), H2 norms bounded: {bounded}",
            rep.decay_exponent, rep.expected_exponent
        ),
    )
}

#[test]
fn acceptance() {
    let results = [
        run(1, "exponent identities", 1.0, exponent_identities),
        run(2, "ground state N=2 b=1 q=4", 60.0, || {
            certification(ModelParams::new(2, 1.0, 4.0))
        }),
        run(2, "ground state N=3 b=0.5 q=3", 60.0, || {
            certification(ModelParams::new(3, 0.5, 3.0))
        }),
        run(3, "Gagliardo-Nirenberg", 30.0, gn_inequality),
        run(4, "scaling laws", 10.0, scaling_laws),
        run(5, "conservation", 120.0, conservation),
        run(6, "standing wave", 120.0, standing_wave),
        run(7, "virial identity", 60.0, virial_identity),
        run(8, "dichotomy", 300.0, dichotomy),
        run(9, "counterexample divergence", 30.0, counterexample),
        run(10, "compact embedding", 30.0, compact_embedding),
    ];
    assert!(results.iter().all(|x| *x), "some acceptance criteria failed");
}
