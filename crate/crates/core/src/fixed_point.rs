//! Outer fixed-point iteration: re-solve the six fields in the lemma
//! dependency order against the latest frozen mix, then damp toward the
//! previous iterate, until successive map displacements are small in the
//! weighted sup norm with weight r^{−α}(1 + r^α).

use std::sync::Arc;

use crate::error::{GridMismatch, ShootError, SolveError};
use crate::grid::RadialGrid;
use crate::params::{DerivedConstants, Parameters};
use crate::profile::{initial_guess, FieldId, FieldProfile, ShootParams};
use crate::shooting::{solve_field, ShootOptions};

/// Solve order: f, B, σ from the old triple; h̃, ρ̃, Ã against the fresh
/// B, σ, f, ρ̃ as the lemma chain prescribes.
pub const SOLVE_ORDER: [FieldId; 6] = [
    FieldId::F,
    FieldId::B,
    FieldId::Sigma,
    FieldId::H,
    FieldId::Rho,
    FieldId::A,
];

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Weight exponent; defaults to k/2 when None.
    pub alpha: Option<f64>,
    /// Stop once the weighted norm of the map displacement is below this.
    pub fp_tol: f64,
    pub max_iters: usize,
    /// new = damping·solved + (1 − damping)·old.
    pub damping: f64,
    pub n_grid: usize,
    pub r_start: Option<f64>,
    pub r_max: Option<f64>,
    pub shoot: ShootOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        // The outer iteration needs the per-field solve map smooth to below
        // fp_tol: event-localization noise in a shot is amplified by
        // e^{+rate·r_graft} through the tail matching, so the inner
        // tolerances run tighter than a standalone shot requires.
        let mut shoot = ShootOptions::default();
        shoot.ode.rtol = 1e-12;
        shoot.ode.atol = 1e-14;
        shoot.bisect_tol_rel = 3e-14;
        Self {
            alpha: None,
            fp_tol: 1e-8,
            max_iters: 200,
            damping: 0.7,
            n_grid: 2000,
            r_start: None,
            r_max: None,
            shoot,
        }
    }
}

/// One outer iteration's record.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IterationRecord {
    /// Weighted-norm displacement of the Schauder triple (ρ, A, Φ).
    pub residual: f64,
    /// Per-field sup displacement, in `FieldId::index` order.
    pub sup_residuals: [f64; 6],
    /// Accepted shooting parameters (C, F, a, b, E, D).
    pub shoot_params: ShootParams,
}

/// Full iteration history of one solve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FixedPointTrace {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub norm_alpha: f64,
    /// min over the outer half-domain of ¼g²ρ² − ½(¼g²ρ₀² + A₀²); the
    /// far-field membership condition checked with g₀ read as g.
    pub far_field_margin: f64,
}

impl FixedPointTrace {
    pub fn last_residual(&self) -> Option<f64> {
        self.iterations.last().map(|it| it.residual)
    }
}

/// A converged (or best-effort) profile plus its trace.
#[derive(Debug, Clone)]
pub struct DyonSolution {
    pub profile: FieldProfile,
    pub trace: FixedPointTrace,
    pub consts: DerivedConstants,
}

/// Sup over the grid of r^{−α}(1+r^α)(|δρ| + |δA| + |δΦ|).
pub fn weighted_norm(
    delta_rho: &[f64],
    delta_a: &[f64],
    delta_phi: &[f64],
    grid: &RadialGrid,
    alpha: f64,
) -> Result<f64, GridMismatch> {
    let n = grid.len();
    if delta_rho.len() != n || delta_a.len() != n || delta_phi.len() != n {
        return Err(GridMismatch {
            left: n,
            right: delta_rho.len().min(delta_a.len()).min(delta_phi.len()),
        });
    }
    let mut sup = 0.0f64;
    for (i, &r) in grid.points().iter().enumerate() {
        let w = 1.0 + r.powf(-alpha);
        let s = w * (delta_rho[i].abs() + delta_a[i].abs() + delta_phi[i].abs());
        sup = sup.max(s);
    }
    Ok(sup)
}

/// Sample-wise conditions every iterate must satisfy (the qualitative
/// bounds the lemma chain assumes of its input triple), checked with
/// slack `tol`: the strict contract uses a round-off-level tolerance,
/// while the iteration loop allows the small transient excursions a
/// Gauss–Seidel sweep produces on non-converged inputs.
pub fn check_profile_invariants(
    profile: &FieldProfile,
    consts: &DerivedConstants,
    tol: f64,
) -> Vec<String> {
    let p = &consts.params;
    let rho_cap_sq = consts.rho0 * consts.rho0 + p.a0 * p.a0 / (2.0 * p.lambda);
    let mut out = Vec::new();
    let f = profile.values(FieldId::F);
    let h = profile.values(FieldId::H);
    let rho = profile.values(FieldId::Rho);
    let a = profile.values(FieldId::A);
    let b = profile.values(FieldId::B);
    let mut worst_fh = 0.0f64;
    let mut worst_rho = 0.0f64;
    let mut worst_a = 0.0f64;
    let mut worst_b = 0.0f64;
    let mut worst_ba = 0.0f64;
    for i in 0..profile.grid().len() {
        worst_fh = worst_fh
            .max(-f[i])
            .max(f[i] - 1.0)
            .max(-h[i])
            .max(h[i] - 1.0);
        worst_rho = worst_rho.max(rho[i] * rho[i] - rho_cap_sq);
        worst_a = worst_a.max(a[i] - p.a0);
        worst_b = worst_b.max(b[i] - p.a0);
        worst_ba = worst_ba.max(a[i] - b[i]);
    }
    if worst_fh > tol {
        out.push(format!("f/h outside [0,1] by {worst_fh:e}"));
    }
    if worst_rho > tol {
        out.push(format!("rho^2 above rho0^2 + A0^2/(2 lambda) by {worst_rho:e}"));
    }
    if worst_a > tol {
        out.push(format!("A above A0 by {worst_a:e}"));
    }
    if worst_b > tol {
        out.push(format!("B above A0 by {worst_b:e}"));
    }
    if worst_ba > tol {
        out.push(format!("B below A by {worst_ba:e}"));
    }
    out
}

/// One application of the map F: re-solves the six fields in dependency
/// order against the input profile, without damping.
pub fn schauder_step(
    profile: &FieldProfile,
    consts: &DerivedConstants,
    opts: &SolverOptions,
) -> Result<FieldProfile, SolveError> {
    let mut warm = [None; 6];
    let mut prev = [None; 6];
    schauder_step_warm(profile, consts, opts, &mut warm, &mut prev, 0, 1e-7)
}

fn schauder_step_warm(
    profile: &FieldProfile,
    consts: &DerivedConstants,
    opts: &SolverOptions,
    warm: &mut [Option<(f64, f64)>; 6],
    prev_params: &mut [Option<f64>; 6],
    iteration: usize,
    invariant_tol: f64,
) -> Result<FieldProfile, SolveError> {
    let violations = check_profile_invariants(profile, consts, invariant_tol);
    if !violations.is_empty() {
        return Err(SolveError::ProfileInvariant(violations));
    }
    let r_max = profile.grid().r_max();
    let mut work = profile.clone();
    for field in SOLVE_ORDER {
        let idx = field.index();
        let solve = solve_field(field, &work, consts, r_max, &opts.shoot, warm[idx])
            .map_err(|source| SolveError::FieldSolve { iteration, source })?;
        // Warm bracket sized by how far the parameter actually moved.
        let tol_abs = opts.shoot.bisect_tol_rel * solve.param.abs().max(1.0);
        let moved = prev_params[idx].map_or(f64::INFINITY, |p| (solve.param - p).abs());
        let delta = (4.0 * moved)
            .max(100.0 * tol_abs)
            .min(0.25 * solve.param.abs().max(1e-6));
        prev_params[idx] = Some(solve.param);
        warm[idx] = Some((solve.param - delta, solve.param + delta));
        work = work.with_field(field, solve.values, solve.derivs, solve.param);
    }
    Ok(work)
}

/// Shared driver: iterate the damped map from `start` until the weighted
/// displacement of the triple (ρ, A, Φ = h − 1) drops below fp_tol.
pub fn solve_dyon_from(
    params: &Parameters,
    opts: &SolverOptions,
    start: Option<FieldProfile>,
) -> Result<DyonSolution, SolveError> {
    let validation = params.validate();
    if !validation.is_ok() {
        return Err(SolveError::InvalidParameters(validation.violations));
    }
    let consts = match opts.alpha {
        Some(a) => params.derive_with_alpha(a)?,
        None => params.derive()?,
    };
    let r_start = opts.r_start.unwrap_or_else(|| consts.default_r_start());
    let r_max = opts.r_max.unwrap_or_else(|| consts.default_r_max());
    let grid = RadialGrid::log_uniform(r_start, r_max, opts.n_grid);
    let mut profile = match start {
        Some(p) => resample(&p, &grid),
        None => initial_guess(&consts, grid.clone()),
    };

    let mut trace = FixedPointTrace {
        iterations: Vec::new(),
        converged: false,
        norm_alpha: consts.alpha,
        far_field_margin: f64::NAN,
    };
    let mut warm: [Option<(f64, f64)>; 6] = [None; 6];
    let mut prev_params: [Option<f64>; 6] = [None; 6];
    let mut solved_last: Option<FieldProfile> = None;

    for iteration in 0..opts.max_iters {
        let solved =
            schauder_step_warm(&profile, &consts, opts, &mut warm, &mut prev_params, iteration, 0.05)?;
        // Realign the electric pair's shared Coulomb constant to the value
        // the coupled system pins; half-steps keep the feedback through the
        // charge integral contractive.
        let delta_c = charge_constant(&solved, &consts) - measured_charge(&solved, &consts);
        let solved = align_charge(&solved, &consts, 0.5 * delta_c);
        let residual = triple_displacement(&solved, &profile, &consts)?;
        let sup_residuals = sup_displacements(&solved, &profile);
        trace.iterations.push(IterationRecord {
            residual,
            sup_residuals,
            shoot_params: *solved.shoot_params(),
        });
        if residual < opts.fp_tol {
            trace.converged = true;
            trace.far_field_margin = far_field_margin(&solved, &consts);
            return Ok(DyonSolution { profile: solved, trace, consts });
        }
        // Damping guards the large early transients; once the iterate is
        // close the map contracts with a slow positive mode (the electric
        // potentials' shared far-field constant), where blending toward the
        // old iterate only stretches the approach.
        let theta = if residual < 1e-2 { 1.0 } else { opts.damping };
        profile = solved.blend(&profile, theta);
        solved_last = Some(solved);
    }
    let profile = solved_last.unwrap_or(profile);
    trace.far_field_margin = far_field_margin(&profile, &consts);
    Err(SolveError::NotConverged(Box::new(DyonSolution {
        profile,
        trace,
        consts,
    })))
}

/// Solves the six-field boundary-value problem from the built-in initial
/// guess. On NotConverged the error carries the best-effort solution.
pub fn solve_dyon(params: &Parameters, opts: &SolverOptions) -> Result<DyonSolution, SolveError> {
    solve_dyon_from(params, opts, None)
}

/// The electric potentials' shared Coulomb coefficient c (A ≈ A₀ − c/r,
/// B likewise) as the coupled equations determine it: adding g′²·(A-eq)
/// to g²·(B-eq) cancels the (A−B) couplings, and integrating twice gives
/// c = 2∫(g′² f² A + g² h² B) dr / (g² + g′²).
pub fn charge_constant(profile: &FieldProfile, consts: &DerivedConstants) -> f64 {
    let p = &consts.params;
    let g2 = p.g * p.g;
    let gp2 = p.g_prime * p.g_prime;
    let r = profile.grid().points();
    let f = profile.values(FieldId::F);
    let h = profile.values(FieldId::H);
    let a = profile.values(FieldId::A);
    let b = profile.values(FieldId::B);
    let mut acc = 0.0;
    for i in 0..r.len() - 1 {
        let val = |j: usize| gp2 * f[j] * f[j] * a[j] + g2 * h[j] * h[j] * b[j];
        acc += 0.5 * (val(i) + val(i + 1)) * (r[i + 1] - r[i]);
    }
    // The series region below the first node contributes O(r_start²).
    2.0 * acc / (g2 + gp2)
}

/// Measured far-field Coulomb coefficient of the profile, read off the
/// last node (where the exponential parts of the tails are gone).
fn measured_charge(profile: &FieldProfile, consts: &DerivedConstants) -> f64 {
    let p = &consts.params;
    let rm = profile.grid().r_max();
    let n = profile.grid().len();
    let a = profile.values(FieldId::A)[n - 1];
    let b = profile.values(FieldId::B)[n - 1];
    rm * (0.5 * (p.a0 - a) + 0.5 * (p.b0 - b))
}

/// Shifts both electric potentials along the family direction
/// X → X − Δc·s(r)/r with s = r²/(r² + r_c²), realigning their shared
/// far-field constant. The per-field solves copy the partner's constant
/// (B − A decays, so r(B−A) → 0 forces c_B = c_A identically), which
/// makes c a neutral direction of the sweep; this step supplies the one
/// scalar condition the coupled system imposes on it.
fn align_charge(profile: &FieldProfile, consts: &DerivedConstants, delta_c: f64) -> FieldProfile {
    let r_core = 3.0 / consts.nu;
    let grid = profile.grid().clone();
    let mut values: [Vec<f64>; 6] = std::array::from_fn(|i| {
        profile.values(FieldId::ALL[i]).to_vec()
    });
    let mut derivs: [Vec<f64>; 6] = std::array::from_fn(|i| {
        profile.derivs(FieldId::ALL[i]).to_vec()
    });
    for field in [FieldId::A, FieldId::B] {
        let i = field.index();
        for (j, &r) in grid.points().iter().enumerate() {
            let d = r * r + r_core * r_core;
            // s/r and its derivative.
            let sr = r / d;
            let dsr = (r_core * r_core - r * r) / (d * d);
            values[i][j] -= delta_c * sr;
            derivs[i][j] -= delta_c * dsr;
        }
    }
    let params = *profile.shoot_params();
    FieldProfile::new(grid, values, derivs, params)
}

fn triple_displacement(
    new: &FieldProfile,
    old: &FieldProfile,
    consts: &DerivedConstants,
) -> Result<f64, SolveError> {
    let d = |f: FieldId| -> Vec<f64> {
        new.values(f)
            .iter()
            .zip(old.values(f))
            .map(|(a, b)| a - b)
            .collect()
    };
    // δΦ = δh since Φ = h − 1.
    weighted_norm(
        &d(FieldId::Rho),
        &d(FieldId::A),
        &d(FieldId::H),
        new.grid(),
        consts.alpha,
    )
    .map_err(|e| SolveError::ProfileInvariant(vec![e.to_string()]))
}

fn sup_displacements(new: &FieldProfile, old: &FieldProfile) -> [f64; 6] {
    let mut out = [0.0; 6];
    for field in FieldId::ALL {
        let i = field.index();
        out[i] = new
            .values(field)
            .iter()
            .zip(old.values(field))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    }
    out
}

fn far_field_margin(profile: &FieldProfile, consts: &DerivedConstants) -> f64 {
    let p = &consts.params;
    let need = 0.5 * (0.25 * p.g * p.g * consts.rho0 * consts.rho0 + p.a0 * p.a0);
    let grid = profile.grid();
    let half = 0.5 * grid.r_max();
    let rho = profile.values(FieldId::Rho);
    let mut margin = f64::INFINITY;
    for (i, &r) in grid.points().iter().enumerate() {
        if r >= half {
            margin = margin.min(0.25 * p.g * p.g * rho[i] * rho[i] - need);
        }
    }
    margin
}

/// Transfers a profile onto a new grid by interpolation (series form below
/// the old grid's start, clamped tail above its end).
fn resample(profile: &FieldProfile, grid: &Arc<RadialGrid>) -> FieldProfile {
    let old_max = profile.grid().r_max();
    FieldProfile::from_fn(grid.clone(), *profile.shoot_params(), |field, r| {
        profile
            .eval(field, r.min(old_max))
            .expect("resample radius inside source span")
    })
}

/// Convenience wrapper tagging failed field solves with their field.
pub fn is_bracket_failure(err: &SolveError) -> bool {
    matches!(
        err,
        SolveError::FieldSolve { source: ShootError::BracketNotFound { .. }, .. }
    )
}
