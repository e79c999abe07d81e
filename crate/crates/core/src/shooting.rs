//! Single-parameter shooting per field: integrate one equation from its
//! origin series, classify the trajectory into the lemma dichotomy sets,
//! bisect the free coefficient to the connecting orbit, and complete the
//! truncated tail.
//!
//! Set conventions (one free parameter each, all others frozen):
//!
//!   f  (C < 0): SET1 = f′ turns positive before f reaches 0,
//!               SET2 = f crosses 0 while still decreasing;
//!   h̃ (E < 0): same with h;
//!   B  (b > 0): SET1 = B dips below the frozen A, SET2 = B crosses B₀;
//!   Ã  (a > 0): SET1 = (rÃ)′ turns negative, SET2 = Ã crosses the frozen B;
//!   σ  (D > 0): SET1 = (rσ)′ turns negative, SET2 = rσ blows up
//!               (committed once σ passes the blow-up threshold);
//!   ρ̃ (F > 0): SET1 = (rρ̃)′ turns negative, SET2 = blow-up likewise.
//!
//! Small parameter magnitudes land in SET1, large in SET2; the connecting
//! value sits on the shared boundary and bisection converges to it.
//!
//! On a truncated domain the bisected trajectory still departs from the
//! connecting orbit once the bracket quantization, amplified like
//! e^{+rate·r}, reaches the orbit's size. Past a per-field graft radius the
//! profile is therefore continued by a backward (stable) integration of the
//! exact linearized equation with the frozen sources, matched in value at
//! the graft node. No closed-form decay exponent enters the continuation.

use crate::error::{RhsError, ShootError};
use crate::ode::{integrate, Crossing, Event, OdeOptions, Stop};
use crate::params::DerivedConstants;
use crate::profile::{FieldId, FieldProfile};
use crate::radial_system::{origin_series_eval, rhs_single, OriginSeries};

pub use crate::profile::FieldId as ShootField;

/// Which dichotomy set a trajectory landed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Set1,
    Set2,
    Set3Candidate,
}

/// Outcome of one shot.
#[derive(Debug, Clone)]
pub struct ShootOutcome {
    pub classification: Classification,
    /// Radius where the defining event fired; r_max for SET3 candidates.
    pub event_radius: f64,
    /// (r, value, derivative) samples on the shared grid up to the stop.
    pub trajectory: Vec<(f64, f64, f64)>,
    /// |value − far target| at the stopping radius.
    pub value_band_margin: f64,
    /// |derivative| at the stopping radius.
    pub deriv_band_margin: f64,
}

/// Result of a parameter bisection.
#[derive(Debug, Clone)]
pub struct BisectResult {
    pub param_lo: f64,
    pub param_hi: f64,
    pub param_star: f64,
    pub iterations: usize,
    pub outcome_star: ShootOutcome,
    /// Bracket after every iteration (lo, hi).
    pub history: Vec<(f64, f64)>,
    /// True when an endpoint already classified SET3 and was returned as is.
    pub endpoint_candidate: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    pub ode: OdeOptions,
    /// Relative bisection tolerance on the parameter.
    pub bisect_tol_rel: f64,
    /// Geometric bracket expansion cap.
    pub max_doublings: usize,
    /// Blow-up commit threshold, in units of the field cap.
    pub blowup_factor: f64,
    /// Graft once |field − target| falls below this fraction of the scale.
    pub graft_floor_rel: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            bisect_tol_rel: 1e-12,
            max_doublings: 60,
            blowup_factor: 3.0,
            graft_floor_rel: 1e-4,
        }
    }
}

/// Sign of the shooting parameter for each field.
fn param_sign(field: FieldId) -> f64 {
    match field {
        FieldId::F | FieldId::H => -1.0,
        _ => 1.0,
    }
}

/// Value cap whose crossing commits a blow-up classification.
fn blowup_cap(field: FieldId, consts: &DerivedConstants, factor: f64) -> f64 {
    match field {
        FieldId::Sigma => factor * consts.sigma0,
        FieldId::Rho => {
            let a0 = consts.params.a0;
            factor * (consts.rho0 * consts.rho0 + a0 * a0 / (2.0 * consts.params.lambda)).sqrt()
        }
        _ => f64::INFINITY,
    }
}

struct EventPair<'a> {
    set1: Event<'a>,
    set2: Event<'a>,
}

fn events_for<'a>(
    field: FieldId,
    frozen: &'a FieldProfile,
    consts: &'a DerivedConstants,
    opts: &ShootOptions,
) -> EventPair<'a> {
    let far = |f: FieldId, r: f64| frozen.eval(f, r).map(|(v, _)| v).unwrap_or(f64::NAN);
    match field {
        FieldId::F | FieldId::H => EventPair {
            // ψ′ becomes positive before ψ reaches −1 ⇔ f′ > 0 while f > 0.
            set1: Event::new(Crossing::Upward, |_r, y| y[1]),
            set2: Event::new(Crossing::Downward, |_r, y| y[0]),
        },
        FieldId::B => {
            let b0 = consts.params.b0;
            EventPair {
                set1: Event::new(Crossing::Downward, move |r, y| y[0] - far(FieldId::A, r)),
                set2: Event::new(Crossing::Upward, move |_r, y| y[0] - b0),
            }
        }
        FieldId::A => EventPair {
            set1: Event::new(Crossing::Downward, |r, y| y[0] + r * y[1]),
            set2: Event::new(Crossing::Upward, move |r, y| y[0] - far(FieldId::B, r)),
        },
        FieldId::Sigma | FieldId::Rho => {
            let cap = blowup_cap(field, consts, opts.blowup_factor);
            EventPair {
                set1: Event::new(Crossing::Downward, |r, y| y[0] + r * y[1]),
                set2: Event::new(Crossing::Upward, move |_r, y| y[0] - cap),
            }
        }
    }
}

/// Integrates one field from its origin series and classifies the
/// trajectory. `sample_grid` radii (ascending, within [r_start, r_max])
/// are filled via dense output for the final accepted shot; pass `&[]`
/// while classifying.
pub fn shoot(
    field: FieldId,
    shoot_param: f64,
    frozen: &FieldProfile,
    consts: &DerivedConstants,
    r_max: f64,
    opts: &ShootOptions,
    sample_grid: &[f64],
) -> Result<ShootOutcome, ShootError> {
    let r_start = frozen.grid().r_start();
    let series = OriginSeries { field, shoot_param, r_start };
    let (v0, d0) = origin_series_eval(&series, r_start, frozen, consts)?;
    let y0 = [v0, d0];
    let target = field.far_value(consts);

    let pair = events_for(field, frozen, consts, opts);
    // Fire immediately if the start state is already past an event.
    let pre = |ev: &Event<'_>| {
        let g = (ev.g)(r_start, &y0);
        match ev.crossing {
            Crossing::Upward => g > 0.0,
            Crossing::Downward => g < 0.0,
        }
    };
    let make = |class: Classification, r: f64, y: [f64; 2], traj: Vec<(f64, f64, f64)>| ShootOutcome {
        classification: class,
        event_radius: r,
        trajectory: traj,
        value_band_margin: (y[0] - target).abs(),
        deriv_band_margin: y[1].abs(),
    };
    if pre(&pair.set1) {
        return Ok(make(Classification::Set1, r_start, y0, vec![]));
    }
    if pre(&pair.set2) {
        return Ok(make(Classification::Set2, r_start, y0, vec![]));
    }

    let events = [pair.set1, pair.set2];
    let out = integrate(
        |r, y| rhs_single(field, r, y[0], y[1], frozen, consts),
        r_start,
        y0,
        r_max,
        &opts.ode,
        &events,
        sample_grid,
    )?;
    let trajectory: Vec<(f64, f64, f64)> =
        out.samples.iter().map(|&(r, y)| (r, y[0], y[1])).collect();
    match out.stop {
        Stop::ReachedEnd => Ok(make(
            Classification::Set3Candidate,
            r_max,
            out.y_final,
            trajectory,
        )),
        Stop::Event { index, r, y } => {
            let class = if index == 0 { Classification::Set1 } else { Classification::Set2 };
            Ok(make(class, r, y, trajectory))
        }
        Stop::StepUnderflow { r } => Err(ShootError::IntegratorStall { field, r }),
    }
}

/// Expands geometrically from |param| = 1 until a SET1 and a SET2
/// classification bracket the connecting value.
pub fn auto_bracket(
    field: FieldId,
    frozen: &FieldProfile,
    consts: &DerivedConstants,
    r_max: f64,
    opts: &ShootOptions,
) -> Result<(f64, f64), ShootError> {
    let sign = param_sign(field);
    let classify = |m: f64| shoot(field, sign * m, frozen, consts, r_max, opts, &[])
        .map(|o| o.classification);
    let mut m_small = 1.0;
    let mut m_large = 1.0;
    match classify(1.0)? {
        Classification::Set3Candidate => return Ok((sign, sign)),
        Classification::Set1 => {
            // Have the small side; grow for SET2.
            for _ in 0..opts.max_doublings {
                m_large *= 2.0;
                match classify(m_large)? {
                    Classification::Set2 => {
                        return Ok(order(sign * m_small, sign * m_large));
                    }
                    Classification::Set1 => m_small = m_large,
                    Classification::Set3Candidate => return Ok((sign * m_large, sign * m_large)),
                }
            }
            Err(ShootError::BracketNotFound { field, doublings: opts.max_doublings })
        }
        Classification::Set2 => {
            for _ in 0..opts.max_doublings {
                m_small *= 0.5;
                match classify(m_small)? {
                    Classification::Set1 => {
                        return Ok(order(sign * m_small, sign * m_large));
                    }
                    Classification::Set2 => m_large = m_small,
                    Classification::Set3Candidate => return Ok((sign * m_small, sign * m_small)),
                }
            }
            Err(ShootError::BracketNotFound { field, doublings: opts.max_doublings })
        }
    }
}

fn order(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Bisects the shooting parameter on the SET1/SET2 dichotomy.
///
/// The endpoints must classify on opposite sides; a SET3 candidate at an
/// endpoint short-circuits with that endpoint as the connecting value. The
/// final trajectory is sampled on the frozen profile's grid.
pub fn bisect(
    field: FieldId,
    bracket_lo: f64,
    bracket_hi: f64,
    frozen: &FieldProfile,
    consts: &DerivedConstants,
    r_max: f64,
    opts: &ShootOptions,
) -> Result<BisectResult, ShootError> {
    let grid_radii: Vec<f64> = frozen
        .grid()
        .points()
        .iter()
        .copied()
        .filter(|&r| r <= r_max)
        .collect();
    let final_shot = |p: f64| shoot(field, p, frozen, consts, r_max, opts, &grid_radii);

    let mut lo = bracket_lo;
    let mut hi = bracket_hi;
    let class_lo = shoot(field, lo, frozen, consts, r_max, opts, &[])?.classification;
    if class_lo == Classification::Set3Candidate {
        let outcome = final_shot(lo)?;
        return Ok(BisectResult {
            param_lo: lo,
            param_hi: lo,
            param_star: lo,
            iterations: 0,
            outcome_star: outcome,
            history: vec![],
            endpoint_candidate: true,
        });
    }
    if lo == hi {
        let outcome = final_shot(lo)?;
        return Ok(BisectResult {
            param_lo: lo,
            param_hi: hi,
            param_star: lo,
            iterations: 0,
            outcome_star: outcome,
            history: vec![],
            endpoint_candidate: true,
        });
    }
    let class_hi = shoot(field, hi, frozen, consts, r_max, opts, &[])?.classification;
    if class_hi == Classification::Set3Candidate {
        let outcome = final_shot(hi)?;
        return Ok(BisectResult {
            param_lo: hi,
            param_hi: hi,
            param_star: hi,
            iterations: 0,
            outcome_star: outcome,
            history: vec![],
            endpoint_candidate: true,
        });
    }
    if class_lo == class_hi {
        return Err(ShootError::InvalidBracket { field });
    }

    let mut history = Vec::new();
    let mut iterations = 0;
    // Tolerance follows the shrinking bracket so wide and tight starting
    // brackets converge to the same sharpness.
    while (hi - lo).abs() > opts.bisect_tol_rel * lo.abs().max(hi.abs()).max(1.0)
        && iterations < 200
    {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let class_mid = shoot(field, mid, frozen, consts, r_max, opts, &[])?.classification;
        // A mid-point SET3 candidate sits in the truncation-width interval
        // around the connecting value; lumping it with the lo side keeps the
        // bracket shrinking to a sharp, reproducible set boundary.
        if class_mid == class_lo || class_mid == Classification::Set3Candidate {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        history.push((lo, hi));
    }
    // Accept the lo-side endpoint, not the midpoint: the connecting value
    // sits between two different failure walls, and always landing on the
    // same side keeps the accepted orbit's event radius a smooth function
    // of the frozen inputs.
    let star = lo;
    let outcome = final_shot(star)?;
    Ok(BisectResult {
        param_lo: lo,
        param_hi: hi,
        param_star: star,
        iterations,
        outcome_star: outcome,
        history,
        endpoint_candidate: false,
    })
}

/// A completed single-field solve: accepted parameter plus the field
/// sampled on the full grid (trajectory up to the graft node, backward
/// linearized continuation beyond it).
#[derive(Debug, Clone)]
pub struct FieldSolve {
    pub param: f64,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub bracket: (f64, f64),
    pub outcome: ShootOutcome,
    /// First grid radius covered by the tail continuation, if any.
    pub graft_radius: Option<f64>,
}

/// Linearized tail model of one field about the vacuum, with the frozen
/// profile supplying coefficients and sources. Model variable m(r):
/// bare field for f and h, r·(field − target) for the rest.
struct TailModel<'a> {
    field: FieldId,
    frozen: &'a FieldProfile,
    consts: &'a DerivedConstants,
}

impl<'a> TailModel<'a> {
    fn q(&self, r: f64) -> Result<f64, RhsError> {
        let p = &self.consts.params;
        let c = self.consts;
        Ok(match self.field {
            FieldId::F => {
                let (rho, _) = self.frozen.eval(FieldId::Rho, r)?;
                let (a, _) = self.frozen.eval(FieldId::A, r)?;
                0.25 * p.g * p.g * rho * rho - a * a - 1.0 / (r * r)
            }
            FieldId::H => {
                let (sigma, _) = self.frozen.eval(FieldId::Sigma, r)?;
                let (b, _) = self.frozen.eval(FieldId::B, r)?;
                p.g_prime * p.g_prime * sigma * sigma - b * b - 1.0 / (r * r)
            }
            FieldId::Sigma => 2.0 * p.kappa_param * c.sigma0 * c.sigma0,
            FieldId::Rho => {
                let (f, _) = self.frozen.eval(FieldId::F, r)?;
                let (a, _) = self.frozen.eval(FieldId::A, r)?;
                let (b, _) = self.frozen.eval(FieldId::B, r)?;
                p.lambda * c.rho0 * c.rho0 + f * f / (2.0 * r * r) - 0.25 * (a - b) * (a - b)
            }
            FieldId::B => {
                let (rho, _) = self.frozen.eval(FieldId::Rho, r)?;
                let (h, _) = self.frozen.eval(FieldId::H, r)?;
                0.25 * p.g_prime * p.g_prime * rho * rho + 2.0 * h * h / (r * r)
            }
            FieldId::A => {
                let (rho, _) = self.frozen.eval(FieldId::Rho, r)?;
                let (f, _) = self.frozen.eval(FieldId::F, r)?;
                0.25 * p.g * p.g * rho * rho + 2.0 * f * f / (r * r)
            }
        })
    }

    fn src(&self, r: f64) -> Result<f64, RhsError> {
        let p = &self.consts.params;
        let c = self.consts;
        Ok(match self.field {
            FieldId::F | FieldId::H => 0.0,
            FieldId::Sigma => {
                let (h, _) = self.frozen.eval(FieldId::H, r)?;
                2.0 * h * h * c.sigma0 / r
            }
            FieldId::Rho => {
                let (f, _) = self.frozen.eval(FieldId::F, r)?;
                let (a, _) = self.frozen.eval(FieldId::A, r)?;
                let (b, _) = self.frozen.eval(FieldId::B, r)?;
                (f * f / (2.0 * r * r) - 0.25 * (a - b) * (a - b)) * r * c.rho0
            }
            FieldId::B => {
                let (rho, _) = self.frozen.eval(FieldId::Rho, r)?;
                let (h, _) = self.frozen.eval(FieldId::H, r)?;
                let (a, _) = self.frozen.eval(FieldId::A, r)?;
                let b0 = p.b0;
                2.0 * h * h * b0 / r + 0.25 * p.g_prime * p.g_prime * rho * rho * r * (b0 - a)
            }
            FieldId::A => {
                let (rho, _) = self.frozen.eval(FieldId::Rho, r)?;
                let (f, _) = self.frozen.eval(FieldId::F, r)?;
                let (b, _) = self.frozen.eval(FieldId::B, r)?;
                let a0 = p.a0;
                2.0 * f * f * a0 / r - 0.25 * p.g * p.g * rho * rho * r * (b - a0)
            }
        })
    }

    fn to_model(&self, r: f64, value: f64) -> f64 {
        match self.field {
            FieldId::F | FieldId::H => value,
            _ => r * (value - self.field.far_value(self.consts)),
        }
    }

    fn from_model(&self, r: f64, m: f64, m_prime: f64) -> (f64, f64) {
        match self.field {
            FieldId::F | FieldId::H => (m, m_prime),
            _ => {
                let target = self.field.far_value(self.consts);
                let value = target + m / r;
                (value, (m_prime - m / r) / r)
            }
        }
    }

    /// Seed for the particular solution at r_max: the frozen partner's
    /// algebraic tail for the electric potentials, zero otherwise.
    fn particular_seed(&self, r_max: f64) -> Result<(f64, f64), RhsError> {
        match self.field {
            FieldId::B => {
                let (a, da) = self.frozen.eval(FieldId::A, r_max)?;
                let a0 = self.consts.params.a0;
                Ok((r_max * (a - a0), (a - a0) + r_max * da))
            }
            FieldId::A => {
                let (b, db) = self.frozen.eval(FieldId::B, r_max)?;
                let b0 = self.consts.params.b0;
                Ok((r_max * (b - b0), (b - b0) + r_max * db))
            }
            _ => Ok((0.0, 0.0)),
        }
    }
}

/// Solves one field end to end against a frozen background: bracket,
/// bisect, final shot, tail continuation onto the full grid.
pub fn solve_field(
    field: FieldId,
    frozen: &FieldProfile,
    consts: &DerivedConstants,
    r_max: f64,
    opts: &ShootOptions,
    warm: Option<(f64, f64)>,
) -> Result<FieldSolve, ShootError> {
    let grid = frozen.grid().clone();
    let n = grid.len();

    // Zero boundary data with a vanished frozen partner: the zero field is
    // the exact (unique) solution and the homogeneous classification is
    // parameter-scale-invariant, so shooting is bypassed.
    if matches!(field, FieldId::A | FieldId::B) && field.far_value(consts) == 0.0 {
        let partner = if field == FieldId::A { FieldId::B } else { FieldId::A };
        let partner_sup = frozen
            .values(partner)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if partner_sup <= 1e-12 {
            return Ok(FieldSolve {
                param: 0.0,
                values: vec![0.0; n],
                derivs: vec![0.0; n],
                bracket: (0.0, 0.0),
                outcome: ShootOutcome {
                    classification: Classification::Set3Candidate,
                    event_radius: r_max,
                    trajectory: vec![],
                    value_band_margin: 0.0,
                    deriv_band_margin: 0.0,
                },
                graft_radius: None,
            });
        }
    }

    // Bracket: warm start from the previous outer iteration when possible.
    let bracket = match warm {
        Some((lo, hi)) if lo < hi => {
            let c_lo = shoot(field, lo, frozen, consts, r_max, opts, &[])?.classification;
            let c_hi = shoot(field, hi, frozen, consts, r_max, opts, &[])?.classification;
            let distinct = matches!(
                (c_lo, c_hi),
                (Classification::Set1, Classification::Set2)
                    | (Classification::Set2, Classification::Set1)
            );
            if distinct {
                (lo, hi)
            } else {
                auto_bracket(field, frozen, consts, r_max, opts)?
            }
        }
        _ => auto_bracket(field, frozen, consts, r_max, opts)?,
    };
    let bis = bisect(field, bracket.0, bracket.1, frozen, consts, r_max, opts)?;
    let outcome = bis.outcome_star.clone();

    // Re-integrate the accepted parameter with blow-up guards only: the
    // classification events truncate marginal trajectories (for instance
    // the electric potentials tangentially grazing their corridor floor)
    // that are numerically clean far beyond the graze.
    let r_start = grid.r_start();
    let series = OriginSeries { field, shoot_param: bis.param_star, r_start };
    let (v0, d0) = origin_series_eval(&series, r_start, frozen, consts)?;
    let target = field.far_value(consts);
    let scale = field.scale(consts);
    let guard_lo = target - opts.blowup_factor * scale - 1.0;
    let guard_hi = target + opts.blowup_factor * scale + 1.0;
    let guards = [
        Event::new(Crossing::Downward, move |_r, y: &[f64; 2]| y[0] - guard_lo),
        Event::new(Crossing::Upward, move |_r, y: &[f64; 2]| y[0] - guard_hi),
    ];
    let grid_radii: Vec<f64> = grid.points().to_vec();
    let run = integrate(
        |r, y| rhs_single(field, r, y[0], y[1], frozen, consts),
        r_start,
        [v0, d0],
        r_max,
        &opts.ode,
        &guards,
        &grid_radii,
    )?;
    if matches!(run.stop, Stop::StepUnderflow { .. }) && run.samples.len() < 2 {
        return Err(ShootError::IntegratorStall { field, r: run.r_final });
    }

    // Copy trajectory samples onto the grid arrays.
    let mut values = vec![f64::NAN; n];
    let mut derivs = vec![f64::NAN; n];
    let mut covered = 0usize;
    for &(r, y) in &run.samples {
        debug_assert!((grid.points()[covered] - r).abs() <= 1e-12 * r.max(1.0));
        values[covered] = y[0];
        derivs[covered] = y[1];
        covered += 1;
    }
    if covered == 0 {
        return Err(ShootError::TailNotAsymptotic { field });
    }

    // Choose the graft node. Exponential-tail fields graft at the floor
    // crossing, and in any case before the bracket-quantization deviation
    // (growing like e^{+rate·r} toward r_max) pollutes the samples; the
    // electric potentials' algebraic tails carry negligible deviation and
    // keep the full trajectory.
    let model = TailModel { field, frozen, consts };
    let floor = opts.graft_floor_rel * scale;
    let alg_tail = matches!(field, FieldId::A | FieldId::B);
    let mut idx_graft: Option<usize> = None;
    if !alg_tail {
        for (i, &r) in grid.points().iter().enumerate().take(covered) {
            let dev = (values[i] - target).abs();
            if dev <= floor && r > 10.0 * grid.r_start() {
                idx_graft = Some(i);
                break;
            }
        }
        // Two contamination bounds: bracket-quantization deviation grows
        // like e^{+rate·r} toward r_max, and integration round-off seeded
        // near the origin is amplified by e^{+rate·r} outright — the latter
        // matters for fields whose homogeneous rate exceeds their observed
        // (source-driven) decay, so the junction is also capped at ~8/rate.
        if let Ok(q_rm) = model.q(r_max) {
            if q_rm > 0.0 {
                let rate = q_rm.sqrt();
                let r_cut = (r_max - 4.6 / rate).min(8.0 / rate);
                if let Some(i_cut) = grid
                    .points()
                    .iter()
                    .take(covered)
                    .rposition(|&r| r <= r_cut)
                {
                    idx_graft = Some(idx_graft.map_or(i_cut, |i| i.min(i_cut)));
                }
            }
        }
        if covered < n && idx_graft.is_none() {
            return Err(ShootError::TailNotAsymptotic { field });
        }
    } else {
        // Electric potentials: their trajectories are clean until the
        // connecting corridor (A ≤ B ≤ A₀), pinched shut by non-converged
        // frozen inputs, forces a graze of a corridor wall at the event
        // radius and a runaway beyond it. The tail model is the exact
        // linear equation, so these fields are always continued from a
        // junction well before the graze; the junction is capped at a fixed
        // fraction of the domain so it stops moving once the graze radius
        // has retreated far enough, keeping the solve map smooth.
        let r_stop = if outcome.classification != Classification::Set3Candidate {
            outcome.event_radius
        } else {
            grid.points()[covered - 1]
        };
        let r_cut = (0.6 * r_stop).min(0.3 * r_max);
        let i_cut = grid
            .points()
            .iter()
            .take(covered)
            .rposition(|&r| r <= r_cut)
            .unwrap_or(0);
        idx_graft = Some(i_cut);
    }

    let graft_radius = match idx_graft {
        None => None, // clean SET3 trajectory, still above floor at r_max
        Some(ig) => {
            let r_g = grid.points()[ig];
            if ig == 0 || ig >= n - 1 {
                return Err(ShootError::TailNotAsymptotic { field });
            }
            let dev_g = (values[ig] - target).abs();
            if (!alg_tail && dev_g > 0.2 * scale) || model.q(r_g)? <= 0.0 {
                return Err(ShootError::TailNotAsymptotic { field });
            }
            // Backward companion solves on [r_g, r_max].
            let tail_radii: Vec<f64> = grid.points()[ig..].iter().rev().copied().collect();
            let q_rm = model.q(r_max)?;
            // Homogeneous decaying factor via (lnW, φ): φ′ = q − φ².
            let hom = integrate(
                |r, y| Ok(model.q(r)? - y[1] * y[1]),
                r_max,
                [0.0, -q_rm.sqrt()],
                r_g,
                &opts.ode,
                &[],
                &tail_radii,
            )?;
            // Particular response to the frozen sources.
            let seed = model.particular_seed(r_max)?;
            let part = integrate(
                |r, y| Ok(model.q(r)? * y[0] + model.src(r)?),
                r_max,
                [seed.0, seed.1],
                r_g,
                &opts.ode,
                &[],
                &tail_radii,
            )?;
            if hom.stop != Stop::ReachedEnd || part.stop != Stop::ReachedEnd {
                return Err(ShootError::TailNotAsymptotic { field });
            }
            // Samples arrived in descending r; index them back onto the grid.
            let m_tail = grid.len() - ig;
            if hom.samples.len() != m_tail || part.samples.len() != m_tail {
                return Err(ShootError::TailNotAsymptotic { field });
            }
            let ln_w_g = hom.samples.last().unwrap().1[0];
            let m_g = model.to_model(r_g, values[ig]);
            let p_g = part.samples.last().unwrap().1[0];
            let amp = m_g - p_g;
            for (js, &(r, yh)) in hom.samples.iter().enumerate() {
                let i = n - 1 - js;
                let (_, yp) = part.samples[js];
                let w = (yh[0] - ln_w_g).exp();
                let m = yp[0] + amp * w;
                let m_prime = yp[1] + amp * w * yh[1];
                let (v, d) = model.from_model(r, m, m_prime);
                values[i] = v;
                derivs[i] = d;
            }
            Some(r_g)
        }
    };

    // Any nodes past the stop radius that the tail did not cover (possible
    // only if the event fired with no graft index, which errors above).
    if values.iter().any(|v| v.is_nan()) {
        return Err(ShootError::TailNotAsymptotic { field });
    }

    Ok(FieldSolve {
        param: bis.param_star,
        values,
        derivs,
        bracket: (bis.param_lo, bis.param_hi),
        outcome,
        graft_radius,
    })
}
