//! Embedded Dormand–Prince 5(4) integrator for scalar second-order
//! equations written as (u, u′) systems.
//!
//! Supplies the two things the shooting layer needs beyond plain stepping:
//! dense output (the classic 4th-order DOPRI5 interpolant) so trajectories
//! can be sampled exactly at the shared grid radii, and event localization
//! on that interpolant so set-dichotomy events are placed to 1e-10 in r.
//! Integration direction may be forward or backward.

use crate::error::RhsError;

pub type State = [f64; 2];

/// Crossing direction an event is armed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// g goes from negative to positive.
    Upward,
    /// g goes from positive to negative.
    Downward,
}

pub struct Event<'a> {
    pub g: Box<dyn Fn(f64, &State) -> f64 + 'a>,
    pub crossing: Crossing,
}

impl<'a> Event<'a> {
    pub fn new(crossing: Crossing, g: impl Fn(f64, &State) -> f64 + 'a) -> Self {
        Self { g: Box::new(g), crossing }
    }

    fn fires(&self, g0: f64, g1: f64) -> bool {
        match self.crossing {
            Crossing::Upward => g0 <= 0.0 && g1 > 0.0,
            Crossing::Downward => g0 >= 0.0 && g1 < 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Event localization tolerance in r.
    pub event_rtol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 2_000_000,
            event_rtol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    ReachedEnd,
    Event { index: usize, r: f64, y: State },
    StepUnderflow { r: f64 },
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub stop: Stop,
    pub r_final: f64,
    pub y_final: State,
    pub accepted_steps: usize,
    /// Dense-output samples at the requested radii that were passed before
    /// stopping, paired one-to-one with the prefix of `sample_at`.
    pub samples: Vec<(f64, State)>,
}

// Dormand–Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order minus embedded 4th-order weights (error estimator).
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];
// Dense-output weights (Hairer, Nørsett & Wanner, DOPRI5).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step's interpolation data.
struct DenseSeg {
    r0: f64,
    h: f64,
    cont: [[f64; 5]; 2],
}

impl DenseSeg {
    fn build(r0: f64, h: f64, y0: &State, y1: &State, k: &[State; 7]) -> Self {
        let mut cont = [[0.0; 5]; 2];
        for j in 0..2 {
            let ydiff = y1[j] - y0[j];
            let bspl = h * k[0][j] - ydiff;
            let mut c5 = 0.0;
            for (i, d) in D.iter().enumerate() {
                c5 += d * k[i][j];
            }
            cont[j] = [y0[j], ydiff, bspl, ydiff - h * k[6][j] - bspl, h * c5];
        }
        Self { r0, h, cont }
    }

    fn eval(&self, r: f64) -> State {
        let theta = (r - self.r0) / self.h;
        let th1 = 1.0 - theta;
        let mut y = [0.0; 2];
        for j in 0..2 {
            let c = &self.cont[j];
            y[j] = c[0] + theta * (c[1] + th1 * (c[2] + theta * (c[3] + th1 * c[4])));
        }
        y
    }
}

/// Integrates u″ = rhs(r, u, u′) from (r0, y0) toward r_end.
///
/// `sample_at` must be sorted in the direction of integration; each radius
/// passed before the stopping point is filled via dense output. Events are
/// tested on every accepted step, localized by bisection/regula-falsi on
/// the interpolant; when several fire in one step the earliest (in the
/// direction of travel) wins.
pub fn integrate(
    mut rhs: impl FnMut(f64, &State) -> Result<f64, RhsError>,
    r0: f64,
    y0: State,
    r_end: f64,
    opts: &OdeOptions,
    events: &[Event<'_>],
    sample_at: &[f64],
) -> Result<Integration, RhsError> {
    let dir = if r_end >= r0 { 1.0 } else { -1.0 };
    let span = (r_end - r0).abs();
    let mut r = r0;
    let mut y = y0;
    let mut f_now = {
        let a = rhs(r, &y)?;
        [y[1], a]
    };
    let mut g_now: Vec<f64> = events.iter().map(|e| (e.g)(r, &y)).collect();
    let mut samples = Vec::with_capacity(sample_at.len());
    let mut next_sample = 0usize;
    // Record samples sitting exactly at the start.
    while next_sample < sample_at.len() && (sample_at[next_sample] - r) * dir <= 0.0 {
        samples.push((sample_at[next_sample], y));
        next_sample += 1;
    }

    let mut h = dir * (1e-4 * span).min(1e-2 * r0.abs().max(1e-6)).max(1e-13);
    let mut accepted = 0usize;
    let h_floor = span * 1e-15 + 1e-300;

    for _ in 0..opts.max_steps {
        if (r - r_end) * dir >= 0.0 {
            return Ok(Integration {
                stop: Stop::ReachedEnd,
                r_final: r,
                y_final: y,
                accepted_steps: accepted,
                samples,
            });
        }
        if (r + h - r_end) * dir > 0.0 {
            h = r_end - r;
        }
        // Stage evaluations.
        let mut k = [[0.0f64; 2]; 7];
        k[0] = f_now;
        let mut failed = false;
        for s in 0..6 {
            let mut ys = y;
            for j in 0..2 {
                let mut acc = 0.0;
                for (i, kk) in k.iter().enumerate().take(s + 1) {
                    acc += A[s][i] * kk[j];
                }
                ys[j] += h * acc;
            }
            let rs = r + C[s] * h;
            match rhs(rs, &ys) {
                Ok(a) => k[s + 1] = [ys[1], a],
                Err(RhsError::InterpolationOutOfRange { .. }) if s < 5 => {
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if failed {
            h *= 0.5;
            if h.abs() < h_floor {
                return Ok(Integration {
                    stop: Stop::StepUnderflow { r },
                    r_final: r,
                    y_final: y,
                    accepted_steps: accepted,
                    samples,
                });
            }
            continue;
        }
        // 5th-order solution is stage 7's argument (FSAL).
        let y_new = {
            let mut ys = y;
            for j in 0..2 {
                let mut acc = 0.0;
                for (i, kk) in k.iter().enumerate().take(6) {
                    acc += A[5][i] * kk[j];
                }
                ys[j] += h * acc;
            }
            ys
        };
        // Error estimate.
        let mut err_sq = 0.0;
        for j in 0..2 {
            let mut e = 0.0;
            for (i, kk) in k.iter().enumerate() {
                e += E[i] * kk[j];
            }
            e *= h;
            let sc = opts.atol + opts.rtol * y[j].abs().max(y_new[j].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / 2.0).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            if h.abs() < h_floor {
                return Ok(Integration {
                    stop: Stop::StepUnderflow { r },
                    r_final: r,
                    y_final: y,
                    accepted_steps: accepted,
                    samples,
                });
            }
            continue;
        }
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            if h.abs() < h_floor {
                return Ok(Integration {
                    stop: Stop::StepUnderflow { r },
                    r_final: r,
                    y_final: y,
                    accepted_steps: accepted,
                    samples,
                });
            }
            continue;
        }
        // Accepted.
        let r_new = r + h;
        let seg = DenseSeg::build(r, h, &y, &y_new, &k);
        let g_new: Vec<f64> = events.iter().map(|e| (e.g)(r_new, &y_new)).collect();

        // Event localization: earliest crossing in travel direction wins.
        let mut hit: Option<(usize, f64)> = None;
        for (idx, ev) in events.iter().enumerate() {
            if ev.fires(g_now[idx], g_new[idx]) {
                let r_ev = locate(ev, &seg, r, r_new, opts.event_rtol);
                if hit.map_or(true, |(_, best)| (r_ev - best) * dir < 0.0) {
                    hit = Some((idx, r_ev));
                }
            }
        }
        if let Some((idx, r_ev)) = hit {
            while next_sample < sample_at.len() && (sample_at[next_sample] - r_ev) * dir <= 0.0 {
                samples.push((sample_at[next_sample], seg.eval(sample_at[next_sample])));
                next_sample += 1;
            }
            let y_ev = seg.eval(r_ev);
            return Ok(Integration {
                stop: Stop::Event { index: idx, r: r_ev, y: y_ev },
                r_final: r_ev,
                y_final: y_ev,
                accepted_steps: accepted,
                samples,
            });
        }

        while next_sample < sample_at.len() && (sample_at[next_sample] - r_new) * dir <= 0.0 {
            samples.push((sample_at[next_sample], seg.eval(sample_at[next_sample])));
            next_sample += 1;
        }

        r = r_new;
        y = y_new;
        f_now = k[6];
        g_now = g_new;
        accepted += 1;
        h *= (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
    }
    Ok(Integration {
        stop: Stop::StepUnderflow { r },
        r_final: r,
        y_final: y,
        accepted_steps: accepted,
        samples,
    })
}

/// Illinois-style false position on the dense-output polynomial.
fn locate(ev: &Event<'_>, seg: &DenseSeg, r_lo: f64, r_hi: f64, rtol: f64) -> f64 {
    let mut a = r_lo;
    let mut b = r_hi;
    let mut ga = (ev.g)(a, &seg.eval(a));
    let mut gb = (ev.g)(b, &seg.eval(b));
    if ga == 0.0 {
        return a;
    }
    let tol = rtol * r_hi.abs().max(1.0);
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let denom = gb - ga;
        let mut m = if denom != 0.0 { b - gb * (b - a) / denom } else { 0.5 * (a + b) };
        // Keep strictly inside; fall back to bisection if stagnating.
        let lo = a.min(b);
        let hi = a.max(b);
        if !(m > lo && m < hi) {
            m = 0.5 * (a + b);
        }
        let gm = (ev.g)(m, &seg.eval(m));
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (gb > 0.0) {
            b = m;
            gb = gm;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = m;
            ga = gm;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    // Return the endpoint on the post-crossing side.
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_accuracy() {
        // u'' = -u, u(0) = 1, u'(0) = 0 -> u = cos r.
        let opts = OdeOptions::default();
        let out = integrate(
            |_r, _y| Ok(-_y[0]),
            0.0,
            [1.0, 0.0],
            10.0,
            &opts,
            &[],
            &[2.5, 5.0, 7.5],
        )
        .unwrap();
        assert_eq!(out.stop, Stop::ReachedEnd);
        assert!((out.y_final[0] - 10.0f64.cos()).abs() < 1e-8);
        assert!((out.y_final[1] + 10.0f64.sin()).abs() < 1e-8);
        for (r, y) in &out.samples {
            assert!((y[0] - r.cos()).abs() < 1e-8, "dense output at {r}");
            assert!((y[1] + r.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn event_localized_to_tolerance() {
        // cos r crosses zero downward at pi/2.
        let opts = OdeOptions::default();
        let ev = Event::new(Crossing::Downward, |_r, y: &State| y[0]);
        let out = integrate(|_r, y| Ok(-y[0]), 0.0, [1.0, 0.0], 10.0, &opts, &[ev], &[])
            .unwrap();
        match out.stop {
            Stop::Event { index, r, .. } => {
                assert_eq!(index, 0);
                assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-9, "r = {r}");
            }
            other => panic!("expected event, got {other:?}"),
        }
    }

    #[test]
    fn backward_integration() {
        // u'' = u integrated from 5 down to 0 with decaying data e^{-r}.
        let opts = OdeOptions::default();
        let y5 = [(-5.0f64).exp(), -(-5.0f64).exp()];
        let out = integrate(|_r, y| Ok(y[0]), 5.0, y5, 0.0, &opts, &[], &[4.0, 2.0, 1.0])
            .unwrap();
        assert_eq!(out.stop, Stop::ReachedEnd);
        assert!((out.y_final[0] - 1.0).abs() < 1e-8, "u(0) = {}", out.y_final[0]);
        for (r, y) in &out.samples {
            assert!((y[0] - (-r).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn earliest_event_wins() {
        let opts = OdeOptions::default();
        // Two events on u = cos r: u' crosses 0 downward at 0+ (no: u' = -sin r
        // starts at 0 going negative; armed upward it fires at pi).
        let e1 = Event::new(Crossing::Downward, |_r, y: &State| y[0]); // pi/2
        let e2 = Event::new(Crossing::Upward, |_r, y: &State| y[1]); // pi
        let out = integrate(|_r, y| Ok(-y[0]), 1e-9, [1.0, 0.0], 10.0, &opts, &[e1, e2], &[])
            .unwrap();
        match out.stop {
            Stop::Event { index, r, .. } => {
                assert_eq!(index, 0);
                assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
            }
            other => panic!("expected event, got {other:?}"),
        }
    }
}
