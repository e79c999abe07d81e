//! Shooting-set dichotomy on the frozen flat background: the f equation
//! with ρ ≡ ρ₀ and A ≡ A₀ everywhere, f″ = (f²−1)f/r² + 0.16·f for the
//! reference couplings. Oracle: a test-local single-field collocation
//! solver (finite differences + Newton) that never touches the shooting
//! path.

use std::sync::Arc;

use dyon_core::grid::RadialGrid;
use dyon_core::profile::{flat_background, FieldId, FieldProfile};
use dyon_core::shooting::{auto_bracket, bisect, shoot, Classification, ShootOptions};
use dyon_core::{DerivedConstants, Parameters};

fn acceptance_params() -> Parameters {
    Parameters {
        g: 1.0,
        g_prime: 1.0,
        lambda: 2.0,
        mu: 1.0,
        kappa_param: 1.0,
        m: 1.0,
        a0: 0.3,
        b0: 0.3,
    }
}

fn setup(r_max: f64, n: usize) -> (DerivedConstants, FieldProfile) {
    let consts = acceptance_params().derive().unwrap();
    let grid = RadialGrid::log_uniform(1e-3, r_max, n);
    let frozen = flat_background(
        &consts,
        grid,
        [0.0, consts.rho0, consts.params.a0, consts.params.a0, 0.0, consts.sigma0],
    );
    (consts, frozen)
}

/// Test-local oracle: solves f″ = (f²−1)f/r² + q·f on [r0, rm] with
/// f′(r0) = 2(f(r0)−1)/r0 and f(rm) = f_far by Newton on central
/// differences. Returns the solved profile on its own log grid.
fn collocation_profile(r0: f64, rm: f64, n: usize, q: f64, f_far: f64) -> (Vec<f64>, Vec<f64>) {
    let grid = RadialGrid::log_uniform(r0, rm, n);
    let r = grid.points().to_vec();
    let mut f: Vec<f64> = r.iter().map(|&ri| 1.0 / (1.0 + (0.63 * ri).powi(2))).collect();
    for _ in 0..200 {
        // Residual and tridiagonal Jacobian.
        let mut res = vec![0.0; n];
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        {
            let h0 = r[1] - r[0];
            // One-sided derivative row: f'(r0) - 2(f0-1)/r0 = 0 (2-pt).
            res[0] = (f[1] - f[0]) / h0 - 2.0 * (f[0] - 1.0) / r[0];
            diag[0] = -1.0 / h0 - 2.0 / r[0];
            upper[0] = 1.0 / h0;
        }
        for i in 1..n - 1 {
            let hl = r[i] - r[i - 1];
            let hr = r[i + 1] - r[i];
            let w_m = 2.0 / (hl * (hl + hr));
            let w_c = -2.0 / (hl * hr);
            let w_p = 2.0 / (hr * (hl + hr));
            let fi = f[i];
            let nonlin = (fi * fi - 1.0) * fi / (r[i] * r[i]) + q * fi;
            res[i] = w_m * f[i - 1] + w_c * fi + w_p * f[i + 1] - nonlin;
            lower[i] = w_m;
            diag[i] = w_c - (3.0 * fi * fi - 1.0) / (r[i] * r[i]) - q;
            upper[i] = w_p;
        }
        res[n - 1] = f[n - 1] - f_far;
        diag[n - 1] = 1.0;
        // Thomas algorithm.
        let mut c = upper.clone();
        let mut d = res.clone();
        c[0] = upper[0] / diag[0];
        d[0] = res[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - lower[i] * c[i - 1];
            c[i] = upper[i] / m;
            d[i] = (res[i] - lower[i] * d[i - 1]) / m;
        }
        let mut delta = vec![0.0; n];
        delta[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            delta[i] = d[i] - c[i] * delta[i + 1];
        }
        let step: f64 = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            f[i] -= delta[i];
        }
        if step < 1e-13 {
            break;
        }
    }
    (r, f)
}

#[test]
fn large_negative_c_lands_in_set2() {
    let (consts, frozen) = setup(25.0, 400);
    let opts = ShootOptions::default();
    let out = shoot(FieldId::F, -1e6, &frozen, &consts, 25.0, &opts, &[]).unwrap();
    assert_eq!(out.classification, Classification::Set2);
}

#[test]
fn small_negative_c_lands_in_set1() {
    let (consts, frozen) = setup(25.0, 400);
    let opts = ShootOptions::default();
    let out = shoot(FieldId::F, -1e-6, &frozen, &consts, 25.0, &opts, &[]).unwrap();
    assert_eq!(out.classification, Classification::Set1);
}

#[test]
fn event_exclusivity() {
    // A single trajectory reports exactly one classification with one event
    // radius; SET1/SET2 must carry a radius strictly inside the domain.
    let (consts, frozen) = setup(25.0, 400);
    let opts = ShootOptions::default();
    for c in [-30.0, -3.0, -1.0, -0.3, -0.01] {
        let out = shoot(FieldId::F, c, &frozen, &consts, 25.0, &opts, &[]).unwrap();
        match out.classification {
            Classification::Set1 | Classification::Set2 => {
                assert!(out.event_radius < 25.0, "C={c}: event at {}", out.event_radius);
            }
            Classification::Set3Candidate => {
                assert_eq!(out.event_radius, 25.0);
            }
        }
    }
}

#[test]
fn set2_event_radius_nonincreasing_in_c_magnitude() {
    let (consts, frozen) = setup(25.0, 400);
    let opts = ShootOptions::default();
    let mut last = f64::INFINITY;
    for c in [-2.0, -4.0, -8.0, -16.0, -32.0, -64.0] {
        let out = shoot(FieldId::F, c, &frozen, &consts, 25.0, &opts, &[]).unwrap();
        assert_eq!(out.classification, Classification::Set2, "C={c}");
        assert!(
            out.event_radius <= last + 1e-9,
            "event radius grew: {} -> {} at C={c}",
            last,
            out.event_radius
        );
        last = out.event_radius;
    }
}

#[test]
fn bisection_finds_connecting_orbit_and_matches_oracle() {
    let (consts, frozen) = setup(25.0, 400);
    let opts = ShootOptions::default();
    let (lo, hi) = auto_bracket(FieldId::F, &frozen, &consts, 25.0, &opts).unwrap();
    let result = bisect(FieldId::F, lo, hi, &frozen, &consts, 25.0, &opts).unwrap();
    println!("bracket ({lo}, {hi}) -> C* = {:.12}", result.param_star);
    println!(
        "iterations {}, outcome {:?} at r={}",
        result.iterations, result.outcome_star.classification, result.outcome_star.event_radius
    );

    // Bracket width halves every iteration.
    for w in result.history.windows(2) {
        let (w0, w1) = (w[0].1 - w[0].0, w[1].1 - w[1].0);
        assert!((w1 - 0.5 * w0).abs() < 1e-12 * w0.max(1e-300), "widths {w0} {w1}");
    }

    // The trajectory stays in the SET3 band: -1 < ψ < 0, ψ′ ≤ tol, up to
    // the departure tail.
    let mut f_prev = 1.0;
    for &(r, v, _) in &result.outcome_star.trajectory {
        if r > 0.8 * result.outcome_star.event_radius {
            break;
        }
        assert!(v > -1e-8 && v <= 1.0 + 1e-12, "f({r}) = {v}");
        assert!(v <= f_prev + 1e-9, "f not decreasing at r={r}");
        f_prev = v;
    }

    // Independent oracle on the same frozen background: the connecting
    // profiles must agree pointwise (the series and naive-Robin origin
    // parameterizations label the orbit differently, so parameters are
    // compared through the profiles they produce).
    let q = 0.25 * consts.rho0 * consts.rho0 - 0.09;
    assert!((q - 0.16).abs() < 1e-15);
    let useful: Vec<&(f64, f64, f64)> = result
        .outcome_star
        .trajectory
        .iter()
        .take_while(|&&(r, _, _)| r <= 15.0)
        .collect();
    let &&(r_far, f_far, _) = useful.last().unwrap();
    let (orc_r, orc_f) = collocation_profile(1e-3, r_far, 8000, q, f_far);
    let mut sup_gap = 0.0f64;
    let mut at = 0.0;
    for (j, &ro) in orc_r.iter().enumerate() {
        // Interpolate the shooting trajectory linearly between samples.
        let traj = &result.outcome_star.trajectory;
        let i = traj.partition_point(|&(r, _, _)| r < ro).min(traj.len() - 1);
        if i == 0 || traj[i].0 > r_far {
            continue;
        }
        let (ra, va, _) = traj[i - 1];
        let (rb, vb, _) = traj[i];
        let v = va + (vb - va) * (ro - ra) / (rb - ra);
        let gap = (v - orc_f[j]).abs();
        if gap > sup_gap {
            sup_gap = gap;
            at = ro;
        }
    }
    println!("sup |f_shoot - f_oracle| = {sup_gap:.3e} at r = {at:.3}");
    assert!(sup_gap < 2e-4, "profiles disagree: {sup_gap:e} at r = {at}");
    // Regression pin for the series-parameter connecting value.
    assert!(
        (result.param_star - (-0.5758307787)).abs() < 1e-4,
        "series C* drifted: {}",
        result.param_star
    );
}

#[test]
fn disjoint_brackets_agree_on_c_star() {
    let (consts, frozen) = setup(25.0, 400);
    // The set boundary itself can only be localized to ~1e-11 in C at this
    // domain size (the marginal trajectory's f' maximum is tangent to
    // zero); probe the bisection-agreement property at a tolerance where
    // bisection, not that fuzz, is the limiter.
    let mut opts = ShootOptions::default();
    opts.bisect_tol_rel = 1e-10;
    let r1 = bisect(FieldId::F, -50.0, -1e-6, &frozen, &consts, 25.0, &opts).unwrap();
    // A second bracket with different endpoints on each side.
    let r2 = bisect(
        FieldId::F,
        1.25 * r1.param_star,
        0.6 * r1.param_star,
        &frozen,
        &consts,
        25.0,
        &opts,
    )
    .unwrap();
    let tol = opts.bisect_tol_rel * r1.param_star.abs().max(1.0);
    let gap = (r1.param_star - r2.param_star).abs();
    println!("disjoint-bracket agreement: {gap:e} (10 tol = {:e})", 10.0 * tol);
    assert!(gap <= 10.0 * tol, "disagreement {gap:e}");
}

#[test]
fn identical_classification_endpoints_rejected() {
    let (consts, frozen) = setup(25.0, 400);
    let opts = ShootOptions::default();
    let err = bisect(FieldId::F, -1e-6, -1e-5, &frozen, &consts, 25.0, &opts);
    assert!(matches!(err, Err(dyon_core::ShootError::InvalidBracket { .. })));
}

#[test]
fn sigma_dichotomy_oscillation_vs_blowup() {
    // Frozen background with h(0) = 1 decaying to 0 (the hypotheses the σ
    // solve assumes of its input): small D oscillates ((rσ)' < 0 fires),
    // large D blows up.
    let consts = acceptance_params().derive().unwrap();
    let grid = RadialGrid::log_uniform(1e-3, 25.0, 400);
    let frozen = dyon_core::profile::initial_guess(&consts, grid);
    let opts = ShootOptions::default();
    let small = shoot(FieldId::Sigma, 1e-3, &frozen, &consts, 25.0, &opts, &[]).unwrap();
    assert_eq!(small.classification, Classification::Set1);
    let large = shoot(FieldId::Sigma, 1e3, &frozen, &consts, 25.0, &opts, &[]).unwrap();
    assert_eq!(large.classification, Classification::Set2);
}

#[test]
fn b_zero_boundary_data_bracket_collapses() {
    // A0 = B0 = 0 with frozen A ≡ 0, h ≡ 0: B ≡ 0 is the exact solution.
    let params = Parameters { a0: 0.0, b0: 0.0, ..acceptance_params() };
    let consts = params.derive().unwrap();
    let grid = RadialGrid::log_uniform(1e-3, 25.0, 400);
    let frozen = flat_background(&consts, grid.clone(), [0.0, consts.rho0, 0.0, 0.0, 0.0, consts.sigma0]);
    let solve = dyon_core::shooting::solve_field(
        FieldId::B,
        &frozen,
        &consts,
        25.0,
        &ShootOptions::default(),
        None,
    )
    .unwrap();
    assert_eq!(solve.param, 0.0);
    assert!(solve.values.iter().all(|&v| v == 0.0));
}

#[test]
fn full_f_solve_with_tail_stays_in_band() {
    let (consts, frozen) = setup(25.0, 800);
    let solve = dyon_core::shooting::solve_field(
        FieldId::F,
        &frozen,
        &consts,
        25.0,
        &ShootOptions::default(),
        None,
    )
    .unwrap();
    println!(
        "C* = {:.10}, graft at {:?}, event {:?} @ {}",
        solve.param,
        solve.graft_radius,
        solve.outcome.classification,
        solve.outcome.event_radius
    );
    let grid: &Arc<RadialGrid> = frozen.grid();
    for (i, &r) in grid.points().iter().enumerate() {
        let v = solve.values[i];
        assert!(v > -1e-9 && v <= 1.0 + 1e-9, "f({r}) = {v}");
    }
    // Tail decays at roughly kappa: check the last decade slope.
    let n = grid.len();
    let (r1, v1) = (grid.points()[n - 60], solve.values[n - 60]);
    let (r2, v2) = (grid.points()[n - 1], solve.values[n - 1]);
    let rate = -(v2.abs().ln() - v1.abs().ln()) / (r2 - r1);
    println!("tail rate {rate:.4} (kappa = {})", consts.kappa_decay);
    assert!((rate - consts.kappa_decay).abs() < 0.1 * consts.kappa_decay);
}
