//! Independent cross-validation path: global second-order finite-difference
//! collocation of the six-field system with damped Newton, sharing nothing
//! with the shooting route but the equations themselves.
//!
//! Boundary rows impose the regular branch at r_start with the free series
//! coefficients eliminated (f′ = 2(f−1)/r, ρ′ = kρ/r, A′ = A/r, ...) and
//! the asymptotic behaviour at r_max (exponential Robin rows for f and h,
//! (r·(field − limit))′ = 0 for the rest).

use std::sync::Arc;

use crate::error::{GridMismatch, OracleError};
use crate::grid::RadialGrid;
use crate::linalg::Banded;
use crate::params::DerivedConstants;
use crate::profile::{FieldId, FieldProfile};

const NF: usize = 6;
const BAND: usize = 2 * NF;

#[derive(Debug, Clone, Copy)]
pub struct CollocationOptions {
    /// Convergence tolerance on the ∞-norm of the h²-scaled residual.
    pub tol: f64,
    pub max_newton: usize,
    pub max_backtracks: usize,
}

impl Default for CollocationOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_newton: 60, max_backtracks: 12 }
    }
}

/// Nonuniform three-point first/second derivative weights at an interior
/// node with spacings (hl, hr).
fn central_weights(hl: f64, hr: f64) -> ([f64; 3], [f64; 3]) {
    let d1 = [
        -hr / (hl * (hl + hr)),
        (hr - hl) / (hl * hr),
        hl / (hr * (hl + hr)),
    ];
    let d2 = [
        2.0 / (hl * (hl + hr)),
        -2.0 / (hl * hr),
        2.0 / (hr * (hl + hr)),
    ];
    (d1, d2)
}

/// One-sided three-point first derivative at the left end (nodes 0,1,2).
fn left_weights(h0: f64, h1: f64) -> [f64; 3] {
    [
        -(2.0 * h0 + h1) / (h0 * (h0 + h1)),
        (h0 + h1) / (h0 * h1),
        -h0 / (h1 * (h0 + h1)),
    ]
}

/// One-sided three-point first derivative at the right end (nodes n-3..n-1).
fn right_weights(g1: f64, g0: f64) -> [f64; 3] {
    // g1 = r_{n-2} - r_{n-3}, g0 = r_{n-1} - r_{n-2}; weights for
    // (u_{n-3}, u_{n-2}, u_{n-1}).
    [
        g0 / (g1 * (g0 + g1)),
        -(g0 + g1) / (g0 * g1),
        (2.0 * g0 + g1) / (g0 * (g0 + g1)),
    ]
}

struct System<'a> {
    grid: &'a RadialGrid,
    consts: &'a DerivedConstants,
}

impl<'a> System<'a> {
    fn n_unknowns(&self) -> usize {
        NF * self.grid.len()
    }

    /// Residual of the difference equations, interior rows scaled by
    /// hl·hr/2 so round-off does not swamp the tolerance on fine grids.
    fn residual(&self, x: &[f64], out: &mut [f64]) {
        let n = self.grid.len();
        let r = self.grid.points();
        let c = self.consts;
        let p = &c.params;
        let g2_4 = 0.25 * p.g * p.g;
        let gp2_4 = 0.25 * p.g_prime * p.g_prime;
        let at = |i: usize, f: usize| x[NF * i + f];

        // Left boundary rows.
        {
            let h0 = r[1] - r[0];
            let h1 = r[2] - r[1];
            let w = left_weights(h0, h1);
            let d = |f: usize| w[0] * at(0, f) + w[1] * at(1, f) + w[2] * at(2, f);
            let r0 = r[0];
            out[0] = r0 * d(0) - 2.0 * (at(0, 0) - 1.0);
            out[1] = r0 * d(1) - c.k_exp * at(0, 1);
            out[2] = r0 * d(2) - at(0, 2);
            out[3] = r0 * d(3) - at(0, 3);
            out[4] = r0 * d(4) - 2.0 * (at(0, 4) - 1.0);
            out[5] = r0 * d(5) - at(0, 5);
        }
        // Interior collocation rows.
        for i in 1..n - 1 {
            let hl = r[i] - r[i - 1];
            let hr = r[i + 1] - r[i];
            let (d1, d2) = central_weights(hl, hr);
            let scale = 0.5 * hl * hr;
            let ri = r[i];
            let ri2 = ri * ri;
            let val = |f: usize| at(i, f);
            let du = |f: usize| d1[0] * at(i - 1, f) + d1[1] * at(i, f) + d1[2] * at(i + 1, f);
            let ddu = |f: usize| d2[0] * at(i - 1, f) + d2[1] * at(i, f) + d2[2] * at(i + 1, f);
            let (f, rho, a, b, h, sigma) = (val(0), val(1), val(2), val(3), val(4), val(5));
            let row = NF * i;
            out[row] = scale
                * (ddu(0) - (f * f - 1.0) * f / ri2 - (g2_4 * rho * rho - a * a) * f);
            out[row + 1] = scale
                * (ddu(1) + 2.0 / ri * du(1) - f * f / (2.0 * ri2) * rho
                    + 0.25 * (a - b) * (a - b) * rho
                    - 0.5 * p.lambda * (rho * rho - c.rho0 * c.rho0) * rho);
            out[row + 2] = scale
                * (ddu(2) + 2.0 / ri * du(2) - 2.0 * f * f / ri2 * a
                    - g2_4 * rho * rho * (a - b));
            out[row + 3] = scale
                * (ddu(3) + 2.0 / ri * du(3) - 2.0 * h * h / ri2 * b
                    - gp2_4 * rho * rho * (b - a));
            out[row + 4] = scale
                * (ddu(4) - (h * h - 1.0) * h / ri2
                    - (p.g_prime * p.g_prime * sigma * sigma - b * b) * h);
            out[row + 5] = scale
                * (ddu(5) + 2.0 / ri * du(5) - 2.0 * h * h / ri2 * sigma
                    - p.kappa_param * (sigma * sigma - c.sigma0 * c.sigma0) * sigma);
        }
        // Right boundary rows.
        {
            let m = n - 1;
            let g1 = r[m - 1] - r[m - 2];
            let g0 = r[m] - r[m - 1];
            let w = right_weights(g1, g0);
            let d = |f: usize| w[0] * at(m - 2, f) + w[1] * at(m - 1, f) + w[2] * at(m, f);
            let rm = r[m];
            let row = NF * m;
            out[row] = d(0) + c.kappa_decay * at(m, 0);
            out[row + 1] = rm * d(1) + (at(m, 1) - c.rho0);
            out[row + 2] = rm * d(2) + (at(m, 2) - p.a0);
            out[row + 3] = rm * d(3) + (at(m, 3) - p.b0);
            out[row + 4] = d(4) + c.zeta * at(m, 4);
            out[row + 5] = rm * d(5) + (at(m, 5) - c.sigma0);
        }
    }

    /// Analytic Jacobian of `residual`, assembled banded.
    fn jacobian(&self, x: &[f64]) -> Banded {
        let n = self.grid.len();
        let r = self.grid.points();
        let c = self.consts;
        let p = &c.params;
        let g2 = p.g * p.g;
        let gp2 = p.g_prime * p.g_prime;
        let g2_4 = 0.25 * g2;
        let gp2_4 = 0.25 * gp2;
        let mut jac = Banded::new(self.n_unknowns(), BAND, BAND);
        let at = |i: usize, f: usize| x[NF * i + f];
        let col = |i: usize, f: usize| NF * i + f;

        {
            let h0 = r[1] - r[0];
            let h1 = r[2] - r[1];
            let w = left_weights(h0, h1);
            let r0 = r[0];
            for f in 0..NF {
                let row = f;
                for (k, wk) in w.iter().enumerate() {
                    jac.add(row, col(k, f), r0 * wk);
                }
                let diag = match f {
                    0 | 4 => -2.0,
                    1 => -c.k_exp,
                    _ => -1.0,
                };
                jac.add(row, col(0, f), diag);
            }
        }
        for i in 1..n - 1 {
            let hl = r[i] - r[i - 1];
            let hr = r[i + 1] - r[i];
            let (d1, d2) = central_weights(hl, hr);
            let scale = 0.5 * hl * hr;
            let ri = r[i];
            let ri2 = ri * ri;
            let (f, rho, a, b, h, sigma) =
                (at(i, 0), at(i, 1), at(i, 2), at(i, 3), at(i, 4), at(i, 5));
            let row = NF * i;
            // Stencil parts: second derivative for all, plus (2/r)·first
            // derivative for the fields written with the Laplacian.
            for (k, off) in [(0usize, i - 1), (1, i), (2, i + 1)] {
                let lap = d2[k] + 2.0 / ri * d1[k];
                jac.add(row, col(off, 0), scale * d2[k]);
                jac.add(row + 1, col(off, 1), scale * lap);
                jac.add(row + 2, col(off, 2), scale * lap);
                jac.add(row + 3, col(off, 3), scale * lap);
                jac.add(row + 4, col(off, 4), scale * d2[k]);
                jac.add(row + 5, col(off, 5), scale * lap);
            }
            // f row.
            jac.add(row, col(i, 0), scale * (-(3.0 * f * f - 1.0) / ri2 - (g2_4 * rho * rho - a * a)));
            jac.add(row, col(i, 1), scale * (-0.5 * g2 * rho * f));
            jac.add(row, col(i, 2), scale * (2.0 * a * f));
            // rho row.
            jac.add(row + 1, col(i, 1), scale * (-f * f / (2.0 * ri2) + 0.25 * (a - b) * (a - b)
                - 0.5 * p.lambda * (3.0 * rho * rho - c.rho0 * c.rho0)));
            jac.add(row + 1, col(i, 0), scale * (-f * rho / ri2));
            jac.add(row + 1, col(i, 2), scale * (0.5 * (a - b) * rho));
            jac.add(row + 1, col(i, 3), scale * (-0.5 * (a - b) * rho));
            // A row.
            jac.add(row + 2, col(i, 2), scale * (-2.0 * f * f / ri2 - g2_4 * rho * rho));
            jac.add(row + 2, col(i, 0), scale * (-4.0 * f * a / ri2));
            jac.add(row + 2, col(i, 1), scale * (-0.5 * g2 * rho * (a - b)));
            jac.add(row + 2, col(i, 3), scale * (g2_4 * rho * rho));
            // B row.
            jac.add(row + 3, col(i, 3), scale * (-2.0 * h * h / ri2 - gp2_4 * rho * rho));
            jac.add(row + 3, col(i, 4), scale * (-4.0 * h * b / ri2));
            jac.add(row + 3, col(i, 1), scale * (-0.5 * gp2 * rho * (b - a)));
            jac.add(row + 3, col(i, 2), scale * (gp2_4 * rho * rho));
            // h row.
            jac.add(row + 4, col(i, 4), scale * (-(3.0 * h * h - 1.0) / ri2 - (gp2 * sigma * sigma - b * b)));
            jac.add(row + 4, col(i, 5), scale * (-2.0 * gp2 * sigma * h));
            jac.add(row + 4, col(i, 3), scale * (2.0 * b * h));
            // sigma row.
            jac.add(row + 5, col(i, 5), scale * (-2.0 * h * h / ri2
                - p.kappa_param * (3.0 * sigma * sigma - c.sigma0 * c.sigma0)));
            jac.add(row + 5, col(i, 4), scale * (-4.0 * h * sigma / ri2));
        }
        {
            let m = n - 1;
            let g1 = r[m - 1] - r[m - 2];
            let g0 = r[m] - r[m - 1];
            let w = right_weights(g1, g0);
            let rm = r[m];
            for f in 0..NF {
                let row = NF * m + f;
                let mul = match f {
                    0 | 4 => 1.0,
                    _ => rm,
                };
                for (k, wk) in w.iter().enumerate() {
                    jac.add(row, col(m - 2 + k, f), mul * wk);
                }
                let diag = match f {
                    0 => c.kappa_decay,
                    4 => c.zeta,
                    _ => 1.0,
                };
                jac.add(row, col(m, f), diag);
            }
        }
        jac
    }
}

/// Report of one collocation solve.
#[derive(Debug, Clone)]
pub struct CollocationSolve {
    pub profile: FieldProfile,
    pub newton_iterations: usize,
    pub residual_history: Vec<f64>,
}

/// Solves the six-field boundary-value problem on the grid by damped
/// Newton on the finite-difference residual, starting from `initial`.
pub fn solve_collocation(
    consts: &DerivedConstants,
    grid: Arc<RadialGrid>,
    initial: &FieldProfile,
    opts: &CollocationOptions,
) -> Result<CollocationSolve, OracleError> {
    let n = grid.len();
    if n < 3 {
        return Err(OracleError::InvalidGrid);
    }
    let sys = System { grid: &grid, consts };
    let nu = sys.n_unknowns();
    let mut x = vec![0.0; nu];
    for (i, &r) in grid.points().iter().enumerate() {
        for field in FieldId::ALL {
            let (v, _) = initial
                .eval(field, r.min(initial.grid().r_max()))
                .map_err(|_| OracleError::InvalidGrid)?;
            x[NF * i + field.index()] = v;
        }
    }
    let mut res = vec![0.0; nu];
    let mut history = Vec::new();
    sys.residual(&x, &mut res);
    let mut norm = inf_norm(&res);
    history.push(norm);
    for it in 0..opts.max_newton {
        if norm < opts.tol {
            return Ok(finish(&sys, grid.clone(), x, it, history));
        }
        let jac = sys.jacobian(&x);
        let mut step = res.clone();
        jac.solve(&mut step).map_err(|row| OracleError::SingularJacobian {
            node: row / NF,
            field: row % NF,
        })?;
        // Armijo backtracking on the residual norm.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi - lambda * si).collect();
            let mut trial_res = vec![0.0; nu];
            sys.residual(&trial, &mut trial_res);
            let trial_norm = inf_norm(&trial_res);
            if trial_norm <= (1.0 - 1e-4 * lambda) * norm || trial_norm < opts.tol {
                x = trial;
                res = trial_res;
                norm = trial_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        history.push(norm);
        if !accepted {
            return Err(OracleError::NotConverged { residual: norm, iterations: it + 1 });
        }
    }
    if norm < opts.tol {
        let its = history.len() - 1;
        return Ok(finish(&sys, grid.clone(), x, its, history));
    }
    Err(OracleError::NotConverged { residual: norm, iterations: opts.max_newton })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn finish(
    sys: &System<'_>,
    grid: Arc<RadialGrid>,
    x: Vec<f64>,
    iterations: usize,
    history: Vec<f64>,
) -> CollocationSolve {
    let n = grid.len();
    let r = grid.points();
    let mut values: [Vec<f64>; 6] = Default::default();
    let mut derivs: [Vec<f64>; 6] = Default::default();
    for f in 0..NF {
        values[f] = (0..n).map(|i| x[NF * i + f]).collect();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let hl = r[i] - r[i - 1];
            let hr = r[i + 1] - r[i];
            let (d1, _) = central_weights(hl, hr);
            d[i] = d1[0] * values[f][i - 1] + d1[1] * values[f][i] + d1[2] * values[f][i + 1];
        }
        let w = left_weights(r[1] - r[0], r[2] - r[1]);
        d[0] = w[0] * values[f][0] + w[1] * values[f][1] + w[2] * values[f][2];
        let w = right_weights(r[n - 2] - r[n - 3], r[n - 1] - r[n - 2]);
        d[n - 1] = w[0] * values[f][n - 3] + w[1] * values[f][n - 2] + w[2] * values[f][n - 1];
        derivs[f] = d;
    }
    // Series coefficients read off the first node.
    let r0 = r[0];
    let shoot_params = [
        (values[0][0] - 1.0) / (r0 * r0),
        values[1][0] / r0.powf(sys.consts.k_exp),
        values[2][0] / r0,
        values[3][0] / r0,
        (values[4][0] - 1.0) / (r0 * r0),
        values[5][0] / r0,
    ];
    CollocationSolve {
        profile: FieldProfile::new(grid, values, derivs, shoot_params),
        newton_iterations: iterations,
        residual_history: history,
    }
}

/// Per-field sup-norm gaps between two profiles on the same grid, with the
/// radius where each gap is attained.
pub fn compare(a: &FieldProfile, b: &FieldProfile) -> Result<[(f64, f64); 6], GridMismatch> {
    a.sup_gaps(b)
}
