//! The six coupled radial field equations, their single-field (frozen
//! background) forms, and the origin series expansions that seed shooting.
//!
//! Explicit second-order form is used for integration; the (r·field)
//! comparison variables appear only where the monotonicity analysis needs
//! them. The origin series are the first Picard iterates of the integral
//! equations: leading term plus one pass of the integral with the leading
//! term substituted, with all other fields read from the frozen profile.

use crate::error::RhsError;
use crate::params::DerivedConstants;
use crate::profile::{FieldId, FieldProfile};

/// Radius guard: below this, 1/r² terms are meaningless in doubles.
pub const R_MIN_MACHINE: f64 = 1e-12;

/// One point of the six-field configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldState {
    pub r: f64,
    pub f: f64,
    pub rho: f64,
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub sigma: f64,
    pub f_prime: f64,
    pub rho_prime: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub h_prime: f64,
    pub sigma_prime: f64,
}

impl FieldState {
    /// The vacuum configuration at radius r: all fields at their r→∞
    /// boundary values with zero slope.
    pub fn vacuum(r: f64, consts: &DerivedConstants) -> Self {
        let far = consts.far_targets();
        Self {
            r,
            f: far[0],
            rho: far[1],
            a: far[2],
            b: far[3],
            h: far[4],
            sigma: far[5],
            f_prime: 0.0,
            rho_prime: 0.0,
            a_prime: 0.0,
            b_prime: 0.0,
            h_prime: 0.0,
            sigma_prime: 0.0,
        }
    }

    pub fn value(&self, field: FieldId) -> f64 {
        match field {
            FieldId::F => self.f,
            FieldId::Rho => self.rho,
            FieldId::A => self.a,
            FieldId::B => self.b,
            FieldId::H => self.h,
            FieldId::Sigma => self.sigma,
        }
    }

    pub fn prime(&self, field: FieldId) -> f64 {
        match field {
            FieldId::F => self.f_prime,
            FieldId::Rho => self.rho_prime,
            FieldId::A => self.a_prime,
            FieldId::B => self.b_prime,
            FieldId::H => self.h_prime,
            FieldId::Sigma => self.sigma_prime,
        }
    }
}

/// Second derivatives of the six fields, in [`FieldId::index`] order.
pub fn rhs_full(state: &FieldState, consts: &DerivedConstants) -> Result<[f64; 6], RhsError> {
    let r = state.r;
    if r <= R_MIN_MACHINE {
        return Err(RhsError::SingularRadius { r, r_min: R_MIN_MACHINE });
    }
    let p = &consts.params;
    let r2 = r * r;
    let (f, rho, a, b, h, sigma) = (state.f, state.rho, state.a, state.b, state.h, state.sigma);
    let g2_4 = 0.25 * p.g * p.g;
    let gp2_4 = 0.25 * p.g_prime * p.g_prime;
    let f2 = (f * f - 1.0) * f / r2 + (g2_4 * rho * rho - a * a) * f;
    let rho2 = -2.0 / r * state.rho_prime + f * f / (2.0 * r2) * rho
        - 0.25 * (a - b) * (a - b) * rho
        + 0.5 * p.lambda * (rho * rho - consts.rho0 * consts.rho0) * rho;
    let a2 = -2.0 / r * state.a_prime + 2.0 * f * f / r2 * a + g2_4 * rho * rho * (a - b);
    let b2 = -2.0 / r * state.b_prime + 2.0 * h * h / r2 * b + gp2_4 * rho * rho * (b - a);
    let h2 = (h * h - 1.0) * h / r2
        + (p.g_prime * p.g_prime * sigma * sigma - b * b) * h;
    let sigma2 = -2.0 / r * state.sigma_prime + 2.0 * h * h / r2 * sigma
        + p.kappa_param * (sigma * sigma - consts.sigma0 * consts.sigma0) * sigma;
    Ok([f2, rho2, a2, b2, h2, sigma2])
}

/// Second derivative of a single field with every other field frozen.
///
/// This is the per-lemma equation the shooting engine integrates: the
/// frozen profile supplies whichever mix of old and freshly solved fields
/// the iteration order prescribes.
pub fn rhs_single(
    field: FieldId,
    r: f64,
    u: f64,
    u_prime: f64,
    frozen: &FieldProfile,
    consts: &DerivedConstants,
) -> Result<f64, RhsError> {
    if r <= R_MIN_MACHINE {
        return Err(RhsError::SingularRadius { r, r_min: R_MIN_MACHINE });
    }
    let p = &consts.params;
    let r2 = r * r;
    let g2_4 = 0.25 * p.g * p.g;
    let gp2_4 = 0.25 * p.g_prime * p.g_prime;
    Ok(match field {
        FieldId::F => {
            let (rho, _) = frozen.eval(FieldId::Rho, r)?;
            let (a, _) = frozen.eval(FieldId::A, r)?;
            (u * u - 1.0) * u / r2 + (g2_4 * rho * rho - a * a) * u
        }
        FieldId::B => {
            let (h, _) = frozen.eval(FieldId::H, r)?;
            let (rho, _) = frozen.eval(FieldId::Rho, r)?;
            let (a, _) = frozen.eval(FieldId::A, r)?;
            -2.0 / r * u_prime + 2.0 * h * h / r2 * u + gp2_4 * rho * rho * (u - a)
        }
        FieldId::Sigma => {
            let (h, _) = frozen.eval(FieldId::H, r)?;
            -2.0 / r * u_prime + 2.0 * h * h / r2 * u
                + p.kappa_param * (u * u - consts.sigma0 * consts.sigma0) * u
        }
        FieldId::H => {
            let (sigma, _) = frozen.eval(FieldId::Sigma, r)?;
            let (b, _) = frozen.eval(FieldId::B, r)?;
            (u * u - 1.0) * u / r2
                + (p.g_prime * p.g_prime * sigma * sigma - b * b) * u
        }
        FieldId::Rho => {
            let (f, _) = frozen.eval(FieldId::F, r)?;
            let (a, _) = frozen.eval(FieldId::A, r)?;
            let (b, _) = frozen.eval(FieldId::B, r)?;
            -2.0 / r * u_prime + f * f / (2.0 * r2) * u - 0.25 * (a - b) * (a - b) * u
                + 0.5 * p.lambda * (u * u - consts.rho0 * consts.rho0) * u
        }
        FieldId::A => {
            let (f, _) = frozen.eval(FieldId::F, r)?;
            let (rho, _) = frozen.eval(FieldId::Rho, r)?;
            let (b, _) = frozen.eval(FieldId::B, r)?;
            -2.0 / r * u_prime + 2.0 * f * f / r2 * u + g2_4 * rho * rho * (u - b)
        }
    })
}

/// Origin expansion of one field with its free coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginSeries {
    pub field: FieldId,
    /// C for f, F for ρ, a for Ã, b for B, E for h̃, D for σ.
    pub shoot_param: f64,
    /// Hand-off radius where the series seeds the integrator.
    pub r_start: f64,
}

/// Value and derivative of the first-Picard origin series at radius r.
///
/// The integral kernels are the re-derived variation-of-parameters forms:
/// (1/3)(r²/s − s²/r) for the ψ″ − 2ψ/r² operators (f, h̃, H = rσ),
/// (1/3)(r − s³/r²) for B″ + (2/r)B′ − (2/r²)B, and
/// (1/√3)(r^{k+1} s^{−k} − r^{−k} s^{k+1}) for Q″ − Q/(2r²).
pub fn origin_series_eval(
    series: &OriginSeries,
    r: f64,
    frozen: &FieldProfile,
    consts: &DerivedConstants,
) -> Result<(f64, f64), RhsError> {
    let p = &consts.params;
    let c = series.shoot_param;
    let g2_4 = 0.25 * p.g * p.g;
    let gp2_4 = 0.25 * p.g_prime * p.g_prime;
    let k = consts.k_exp;
    match series.field {
        FieldId::F => {
            let integrand = |s: f64| -> Result<f64, RhsError> {
                let (rho, _) = frozen.eval(FieldId::Rho, s)?;
                let (a, _) = frozen.eval(FieldId::A, s)?;
                let psi = c * s * s;
                Ok((g2_4 * rho * rho - a * a) * (psi + 1.0)
                    + (3.0 * psi * psi + psi * psi * psi) / (s * s))
            };
            let val = quad(r, |s| Ok((r * r / s - s * s / r) * integrand(s)?))?;
            let der = quad(r, |s| Ok((2.0 * r / s + s * s / (r * r)) * integrand(s)?))?;
            Ok((1.0 + c * r * r + val / 3.0, 2.0 * c * r + der / 3.0))
        }
        FieldId::H => {
            let integrand = |s: f64| -> Result<f64, RhsError> {
                let (sigma, _) = frozen.eval(FieldId::Sigma, s)?;
                let (b, _) = frozen.eval(FieldId::B, s)?;
                let phi = c * s * s;
                Ok((p.g_prime * p.g_prime * sigma * sigma - b * b) * (phi + 1.0)
                    + (3.0 * phi * phi + phi * phi * phi) / (s * s))
            };
            let val = quad(r, |s| Ok((r * r / s - s * s / r) * integrand(s)?))?;
            let der = quad(r, |s| Ok((2.0 * r / s + s * s / (r * r)) * integrand(s)?))?;
            Ok((1.0 + c * r * r + val / 3.0, 2.0 * c * r + der / 3.0))
        }
        FieldId::B => {
            let integrand = |s: f64| -> Result<f64, RhsError> {
                let (h, _) = frozen.eval(FieldId::H, s)?;
                let (rho, _) = frozen.eval(FieldId::Rho, s)?;
                let (a, _) = frozen.eval(FieldId::A, s)?;
                Ok(2.0 * (h * h - 1.0) * (c * s) / (s * s) + gp2_4 * rho * rho * (c * s - a))
            };
            let val = quad(r, |s| Ok((r - s * s * s / (r * r)) * integrand(s)?))?;
            let der = quad(r, |s| {
                Ok((1.0 + 2.0 * s * s * s / (r * r * r)) * integrand(s)?)
            })?;
            Ok((c * r + val / 3.0, c + der / 3.0))
        }
        FieldId::A => {
            let integrand = |s: f64| -> Result<f64, RhsError> {
                let (f, _) = frozen.eval(FieldId::F, s)?;
                let (rho, _) = frozen.eval(FieldId::Rho, s)?;
                let (b, _) = frozen.eval(FieldId::B, s)?;
                Ok(2.0 * (f * f - 1.0) * (c * s) / (s * s) - g2_4 * rho * rho * (b - c * s))
            };
            let val = quad(r, |s| Ok((r - s * s * s / (r * r)) * integrand(s)?))?;
            let der = quad(r, |s| {
                Ok((1.0 + 2.0 * s * s * s / (r * r * r)) * integrand(s)?)
            })?;
            Ok((c * r + val / 3.0, c + der / 3.0))
        }
        FieldId::Sigma => {
            // H = rσ: H″ − 2H/r² = H[κ(σ² − σ₀²) + 2(h̄² − 1)/r²].
            let integrand = |s: f64| -> Result<f64, RhsError> {
                let (h, _) = frozen.eval(FieldId::H, s)?;
                let h0 = c * s * s;
                let sig = c * s;
                Ok(h0
                    * (p.kappa_param * (sig * sig - consts.sigma0 * consts.sigma0)
                        + 2.0 * (h * h - 1.0) / (s * s)))
            };
            let hv = c * r * r + quad(r, |s| Ok((r * r / s - s * s / r) * integrand(s)?))? / 3.0;
            let hd =
                2.0 * c * r + quad(r, |s| Ok((2.0 * r / s + s * s / (r * r)) * integrand(s)?))? / 3.0;
            let sigma = hv / r;
            Ok((sigma, (hd - sigma) / r))
        }
        FieldId::Rho => {
            // Q = rρ̃: Q″ − Q/(2r²) = Q·T with the frozen background in T.
            let integrand = |s: f64| -> Result<f64, RhsError> {
                let (f, _) = frozen.eval(FieldId::F, s)?;
                let (a, _) = frozen.eval(FieldId::A, s)?;
                let (b, _) = frozen.eval(FieldId::B, s)?;
                let q0 = c * s.powf(k + 1.0);
                let rho = c * s.powf(k);
                let t = -0.25 * (a - b) * (a - b)
                    + 0.5 * p.lambda * (rho * rho - consts.rho0 * consts.rho0)
                    + (f * f - 1.0) / (2.0 * s * s);
                Ok(q0 * t)
            };
            let sqrt3 = 3.0f64.sqrt();
            let qv = c * r.powf(k + 1.0)
                + quad(r, |s| {
                    Ok((r.powf(k + 1.0) * s.powf(-k) - r.powf(-k) * s.powf(k + 1.0))
                        * integrand(s)?)
                })? / sqrt3;
            let qd = (k + 1.0) * c * r.powf(k)
                + quad(r, |s| {
                    Ok(((k + 1.0) * r.powf(k) * s.powf(-k)
                        + k * r.powf(-k - 1.0) * s.powf(k + 1.0))
                        * integrand(s)?)
                })? / sqrt3;
            let rho = qv / r;
            Ok((rho, (qd - rho) / r))
        }
    }
}

/// ∫₀^r f(s) ds with the substitution s = r·u⁴, which regularizes the
/// fractional-power endpoint behaviour of the ρ-coupled integrands.
fn quad(r: f64, mut f: impl FnMut(f64) -> Result<f64, RhsError>) -> Result<f64, RhsError> {
    let (nodes, weights) = gauss_legendre_64();
    let mut acc = 0.0;
    for (&u, &w) in nodes.iter().zip(weights.iter()) {
        let u3 = u * u * u;
        let s = r * u3 * u;
        acc += w * f(s)? * 4.0 * r * u3;
    }
    Ok(acc)
}

/// 64-point Gauss–Legendre rule on [0, 1], computed once by Newton
/// iteration on the Legendre recurrence.
fn gauss_legendre_64() -> (&'static [f64; 64], &'static [f64; 64]) {
    use std::sync::OnceLock;
    static RULE: OnceLock<([f64; 64], [f64; 64])> = OnceLock::new();
    let rule = RULE.get_or_init(|| {
        const N: usize = 64;
        let mut nodes = [0.0; N];
        let mut weights = [0.0; N];
        for i in 0..N {
            // Chebyshev-style initial guess on [-1, 1].
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (pn, dpn) = legendre(N, x);
                let dx = pn / dpn;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dpn) = legendre(N, x);
            // Map from [-1, 1] to [0, 1].
            nodes[N - 1 - i] = 0.5 * (x + 1.0);
            weights[N - 1 - i] = 1.0 / ((1.0 - x * x) * dpn * dpn);
        }
        (nodes, weights)
    });
    (&rule.0, &rule.1)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = pj;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::params::Parameters;
    use crate::profile::flat_background;

    fn consts() -> DerivedConstants {
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
        .derive()
        .unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (n, w) = gauss_legendre_64();
        // x^5 on [0,1] -> 1/6; x^0 -> 1.
        let s5: f64 = n.iter().zip(w.iter()).map(|(&x, &w)| w * x.powi(5)).sum();
        let s0: f64 = w.iter().sum();
        assert!((s5 - 1.0 / 6.0).abs() < 1e-14);
        assert!((s0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quad_handles_fractional_powers() {
        // ∫₀^r s^{-0.27} ds = r^{0.73}/0.73.
        let r = 0.37;
        let got = quad(r, |s| Ok(s.powf(-0.27))).unwrap();
        assert!((got - r.powf(0.73) / 0.73).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn vacuum_is_a_fixed_point() {
        let c = consts();
        for r in [0.5, 1.0, 7.3, 42.0] {
            let state = FieldState::vacuum(r, &c);
            let dd = rhs_full(&state, &c).unwrap();
            for (i, v) in dd.iter().enumerate() {
                assert!(v.abs() < 1e-14, "field {i} second derivative {v} at r={r}");
            }
        }
    }

    #[test]
    fn f_equation_hand_values() {
        let c = consts();
        // f = 1, rho = A = 0 at r = 1: both terms vanish.
        let mut s = FieldState::vacuum(1.0, &c);
        s.f = 1.0;
        s.rho = 0.0;
        s.a = 0.0;
        s.b = 0.0;
        s.h = 0.0;
        s.sigma = 0.0;
        let dd = rhs_full(&s, &c).unwrap();
        assert!(dd[0].abs() < 1e-15);
        // f = 0.5, rho = 1, A = 0.2, g = 1 at r = 2:
        // f'' = (0.25-1)(0.5)/4 + (0.25-0.04)(0.5) = 0.01125.
        let mut s = FieldState::vacuum(2.0, &c);
        s.f = 0.5;
        s.rho = 1.0;
        s.a = 0.2;
        let dd = rhs_full(&s, &c).unwrap();
        assert!((dd[0] - 0.01125).abs() < 1e-15, "got {}", dd[0]);
    }

    #[test]
    fn singular_radius_guard() {
        let c = consts();
        let s = FieldState::vacuum(1e-13, &c);
        assert!(matches!(
            rhs_full(&s, &c),
            Err(RhsError::SingularRadius { .. })
        ));
    }

    #[test]
    fn rhs_single_f_hand_value() {
        let c = consts();
        let grid = RadialGrid::log_uniform(1e-3, 10.0, 200);
        // Frozen rho(1) = 0.8, A(1) = 0.1; f = 0.9 at r = 1:
        // f'' = (0.81-1)(0.9) + (0.16-0.01)(0.9) = -0.036.
        let frozen = flat_background(&c, grid, [1.0, 0.8, 0.1, 0.0, 1.0, 0.0]);
        let got = rhs_single(FieldId::F, 1.0, 0.9, 0.0, &frozen, &c).unwrap();
        assert!((got + 0.036).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn rhs_single_vacuum_sigma() {
        let c = consts();
        let grid = RadialGrid::log_uniform(1e-3, 10.0, 200);
        // h ≡ 0 frozen, σ = σ₀: right side of the σ equation vanishes.
        let frozen = flat_background(&c, grid, [0.0, c.rho0, 0.3, 0.3, 0.0, c.sigma0]);
        let got = rhs_single(FieldId::Sigma, 2.0, c.sigma0, 0.0, &frozen, &c).unwrap();
        assert!(got.abs() < 1e-14);
    }

    #[test]
    fn rhs_single_a_with_b_equal_a() {
        let c = consts();
        let grid = RadialGrid::log_uniform(1e-3, 10.0, 200);
        // With frozen B ≡ value of A and f ≡ 0, (rA)'' source vanishes:
        // in bare form A'' = -2A'/r when evaluated at matching values.
        let frozen = flat_background(&c, grid, [0.0, 1.0, 0.2, 0.2, 0.0, 1.0]);
        let got = rhs_single(FieldId::A, 1.5, 0.2, 0.0, &frozen, &c).unwrap();
        assert!(got.abs() < 1e-14, "got {got}");
    }

    #[test]
    fn swap_symmetry_of_a_and_b_equations() {
        // Eq (004) with (h², B, A) equals Eq (003) with (f², A, B) swapped in
        // when g = g'. Spot-check on pseudo-random states.
        let c = consts();
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let r = 0.3 + 3.0 * rnd();
            let (fv, hv) = (rnd(), rnd());
            let (av, bv) = (0.5 * rnd(), 0.5 * rnd());
            let rho = rnd() + 0.1;
            // A-equation with "f" := hv evaluated at (u = bv, frozen b := av).
            let mut s1 = FieldState::vacuum(r, &c);
            s1.f = hv;
            s1.rho = rho;
            s1.a = bv;
            s1.b = av;
            s1.a_prime = 0.17;
            let lhs = rhs_full(&s1, &c).unwrap()[2];
            // B-equation with h := hv at (u = bv, frozen a := av).
            let mut s2 = FieldState::vacuum(r, &c);
            s2.h = hv;
            s2.rho = rho;
            s2.b = bv;
            s2.a = av;
            s2.b_prime = 0.17;
            let rhs_v = rhs_full(&s2, &c).unwrap()[3];
            assert!((lhs - rhs_v).abs() < 1e-13, "swap mismatch at r={r}");
        }
    }

    #[test]
    fn f_series_limits() {
        let c = consts();
        let grid = RadialGrid::log_uniform(1e-3, 10.0, 200);
        let frozen = flat_background(&c, grid, [1.0, c.rho0, 0.3, 0.3, 1.0, c.sigma0]);
        let series = OriginSeries { field: FieldId::F, shoot_param: -0.5, r_start: 1e-3 };
        // f(0+) -> 1, f'(0+) -> 0.
        let (v, d) = origin_series_eval(&series, 1e-8, &frozen, &c).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(d.abs() < 1e-7);
    }

    #[test]
    fn sigma_series_leading() {
        let c = consts();
        let grid = RadialGrid::log_uniform(1e-3, 10.0, 200);
        let frozen = flat_background(&c, grid, [1.0, c.rho0, 0.3, 0.3, 1.0, c.sigma0]);
        let series = OriginSeries { field: FieldId::Sigma, shoot_param: 0.7, r_start: 1e-3 };
        let (v, d) = origin_series_eval(&series, 1e-6, &frozen, &c).unwrap();
        assert!((v - 0.7e-6).abs() < 1e-14);
        assert!((d - 0.7).abs() < 1e-7);
    }

    #[test]
    fn rho_series_leading() {
        let c = consts();
        let grid = RadialGrid::log_uniform(1e-3, 10.0, 200);
        let frozen = flat_background(&c, grid, [1.0, c.rho0, 0.3, 0.3, 1.0, c.sigma0]);
        let series = OriginSeries { field: FieldId::Rho, shoot_param: 1.0, r_start: 1e-3 };
        let (v, _) = origin_series_eval(&series, 1e-4, &frozen, &c).unwrap();
        // ρ̃ ≈ r^k ≈ 3.434e-2 at r = 1e-4.
        assert!((v - 3.434e-2).abs() < 2e-4, "got {v}");
    }

    #[test]
    fn series_residual_shrinks_at_promised_order() {
        // Substituting the series into the single-field equation must give a
        // residual that shrinks at least at the remainder order O(r^{2α})
        // relative. Radii are chosen large enough that the truncation term
        // dominates quadrature and differencing noise.
        let c = consts();
        let grid = RadialGrid::log_uniform(1e-5, 10.0, 400);
        let frozen = crate::profile::initial_guess(&c, grid);
        for (field, param) in [
            (FieldId::F, -0.4),
            (FieldId::Sigma, 0.8),
            (FieldId::B, 0.2),
            (FieldId::Rho, 0.9),
        ] {
            let series = OriginSeries { field, shoot_param: param, r_start: 0.1 };
            let rel_resid = |r: f64| -> f64 {
                let h = 1e-4 * r;
                let (_, dm) = origin_series_eval(&series, r - h, &frozen, &c).unwrap();
                let (v, d) = origin_series_eval(&series, r, &frozen, &c).unwrap();
                let (_, dp) = origin_series_eval(&series, r + h, &frozen, &c).unwrap();
                let u2 = (dp - dm) / (2.0 * h);
                let rhs = rhs_single(field, r, v, d, &frozen, &c).unwrap();
                (u2 - rhs).abs() / (rhs.abs() + v.abs() / (r * r) + 1e-30)
            };
            let res_big = rel_resid(0.08);
            let res_mid = rel_resid(0.04);
            let res_small = rel_resid(0.02);
            // 2^{-2α} ≈ 0.78 per halving; allow slack for the prefactor.
            assert!(
                res_mid < 0.9 * res_big + 1e-10 && res_small < 0.9 * res_mid + 1e-10,
                "{field:?}: residuals {res_big:e} -> {res_mid:e} -> {res_small:e}"
            );
        }
    }
}
