//! Gridded six-field configurations and their evaluation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::RhsError;
use crate::grid::{MonotoneCubic, RadialGrid};
use crate::params::DerivedConstants;

/// The six radial profile functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldId {
    /// SU(2) magnetic profile f, f(0) = 1, f(∞) = 0.
    F,
    /// Higgs modulus ρ, ρ(0) = 0, ρ(∞) = ρ₀.
    Rho,
    /// SU(2) electric potential A, A(0) = 0, A(∞) = A₀.
    A,
    /// Hypercharge electric potential B, B(0) = 0, B(∞) = B₀.
    B,
    /// Hypercharged vector profile h, h(0) = 1, h(∞) = 0.
    H,
    /// σ-sector scalar, σ(0) = 0, σ(∞) = σ₀.
    Sigma,
}

impl FieldId {
    pub const ALL: [FieldId; 6] = [
        FieldId::F,
        FieldId::Rho,
        FieldId::A,
        FieldId::B,
        FieldId::H,
        FieldId::Sigma,
    ];

    pub fn index(self) -> usize {
        match self {
            FieldId::F => 0,
            FieldId::Rho => 1,
            FieldId::A => 2,
            FieldId::B => 3,
            FieldId::H => 4,
            FieldId::Sigma => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldId::F => "f",
            FieldId::Rho => "rho",
            FieldId::A => "A",
            FieldId::B => "B",
            FieldId::H => "h",
            FieldId::Sigma => "sigma",
        }
    }

    /// Value at the origin.
    pub fn origin_value(self) -> f64 {
        match self {
            FieldId::F | FieldId::H => 1.0,
            _ => 0.0,
        }
    }

    /// Leading power of (field − origin value) as r → 0: f−1 ~ Cr²,
    /// h−1 ~ Er², A ~ ar, B ~ br, σ ~ Dr, ρ ~ Fr^k.
    pub fn origin_exponent(self, consts: &DerivedConstants) -> f64 {
        match self {
            FieldId::F | FieldId::H => 2.0,
            FieldId::Rho => consts.k_exp,
            FieldId::A | FieldId::B | FieldId::Sigma => 1.0,
        }
    }

    /// Boundary value at r = ∞.
    pub fn far_value(self, consts: &DerivedConstants) -> f64 {
        consts.far_targets()[self.index()]
    }

    /// Magnitude scale of the field, used for floors and tolerances.
    pub fn scale(self, consts: &DerivedConstants) -> f64 {
        match self {
            FieldId::F | FieldId::H => 1.0,
            FieldId::Rho => consts.rho0,
            FieldId::Sigma => consts.sigma0,
            FieldId::A | FieldId::B => consts.params.a0.max(consts.params.b0).max(1e-300),
        }
    }
}

/// The six accepted shooting parameters (C, F, a, b, E, D), indexed by
/// [`FieldId::index`]. They double as the origin-series coefficients used
/// to evaluate the profile below the first grid node.
pub type ShootParams = [f64; 6];

/// Six field values and derivatives sampled on a shared radial grid.
#[derive(Debug, Clone)]
pub struct FieldProfile {
    grid: Arc<RadialGrid>,
    values: [Vec<f64>; 6],
    derivs: [Vec<f64>; 6],
    shoot_params: ShootParams,
    interps: [MonotoneCubic; 6],
}

impl FieldProfile {
    pub fn new(
        grid: Arc<RadialGrid>,
        values: [Vec<f64>; 6],
        derivs: [Vec<f64>; 6],
        shoot_params: ShootParams,
    ) -> Self {
        let interps = std::array::from_fn(|i| {
            MonotoneCubic::new(grid.clone(), values[i].clone(), derivs[i].clone())
        });
        Self {
            grid,
            values,
            derivs,
            shoot_params,
            interps,
        }
    }

    /// Builds a profile from closures for value and derivative.
    pub fn from_fn(
        grid: Arc<RadialGrid>,
        shoot_params: ShootParams,
        mut eval: impl FnMut(FieldId, f64) -> (f64, f64),
    ) -> Self {
        let mut values: [Vec<f64>; 6] = Default::default();
        let mut derivs: [Vec<f64>; 6] = Default::default();
        for field in FieldId::ALL {
            let i = field.index();
            values[i] = Vec::with_capacity(grid.len());
            derivs[i] = Vec::with_capacity(grid.len());
            for &r in grid.points() {
                let (v, d) = eval(field, r);
                values[i].push(v);
                derivs[i].push(d);
            }
        }
        Self::new(grid, values, derivs, shoot_params)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self, field: FieldId) -> &[f64] {
        &self.values[field.index()]
    }

    pub fn derivs(&self, field: FieldId) -> &[f64] {
        &self.derivs[field.index()]
    }

    pub fn shoot_params(&self) -> &ShootParams {
        &self.shoot_params
    }

    pub fn shoot_param(&self, field: FieldId) -> f64 {
        self.shoot_params[field.index()]
    }

    /// Value and derivative at any radius in (0, r_max].
    ///
    /// Below the first grid node the stored series coefficient supplies the
    /// leading origin form (f = 1 + Cr², ρ = Fr^k, ...), so integrands that
    /// reach into (0, r_start) see the regular branch.
    pub fn eval(&self, field: FieldId, r: f64) -> Result<(f64, f64), RhsError> {
        let lo = self.grid.r_start();
        let hi = self.grid.r_max();
        if !(r > 0.0) || r > hi * (1.0 + 1e-12) {
            return Err(RhsError::InterpolationOutOfRange { r, lo, hi });
        }
        if r < lo {
            let p = self.shoot_params[field.index()];
            return Ok(match field {
                FieldId::F | FieldId::H => (1.0 + p * r * r, 2.0 * p * r),
                FieldId::A | FieldId::B | FieldId::Sigma => (p * r, p),
                FieldId::Rho => {
                    let k = crate::params::K_EXP;
                    (p * r.powf(k), p * k * r.powf(k - 1.0))
                }
            });
        }
        Ok(self.interps[field.index()].eval(r.min(hi)))
    }

    /// Replaces one field's samples, leaving the rest untouched.
    pub fn with_field(
        &self,
        field: FieldId,
        values: Vec<f64>,
        derivs: Vec<f64>,
        shoot_param: f64,
    ) -> Self {
        let i = field.index();
        let mut new_values = self.values.clone();
        let mut new_derivs = self.derivs.clone();
        let mut new_params = self.shoot_params;
        new_values[i] = values;
        new_derivs[i] = derivs;
        new_params[i] = shoot_param;
        Self::new(self.grid.clone(), new_values, new_derivs, new_params)
    }

    /// Convex blend θ·self + (1−θ)·other, used by damped iteration.
    /// Both profiles must share the grid.
    pub fn blend(&self, other: &FieldProfile, theta: f64) -> Self {
        assert_eq!(self.grid.len(), other.grid.len());
        let mut values: [Vec<f64>; 6] = Default::default();
        let mut derivs: [Vec<f64>; 6] = Default::default();
        let mut params = [0.0; 6];
        for i in 0..6 {
            values[i] = self.values[i]
                .iter()
                .zip(&other.values[i])
                .map(|(a, b)| theta * a + (1.0 - theta) * b)
                .collect();
            derivs[i] = self.derivs[i]
                .iter()
                .zip(&other.derivs[i])
                .map(|(a, b)| theta * a + (1.0 - theta) * b)
                .collect();
            params[i] = theta * self.shoot_params[i] + (1.0 - theta) * other.shoot_params[i];
        }
        Self::new(self.grid.clone(), values, derivs, params)
    }

    /// Per-field sup-norm gap to another profile on the same grid, and the
    /// radius where it is attained.
    pub fn sup_gaps(&self, other: &FieldProfile) -> Result<[(f64, f64); 6], crate::error::GridMismatch> {
        if self.grid.len() != other.grid.len() {
            return Err(crate::error::GridMismatch {
                left: self.grid.len(),
                right: other.grid.len(),
            });
        }
        let mut out = [(0.0, 0.0); 6];
        for field in FieldId::ALL {
            let i = field.index();
            let mut best = (0.0f64, self.grid.r_start());
            for (j, (&a, &b)) in self.values[i].iter().zip(&other.values[i]).enumerate() {
                let gap = (a - b).abs();
                if gap > best.0 {
                    best = (gap, self.grid.points()[j]);
                }
            }
            out[i] = best;
        }
        Ok(out)
    }
}

/// Smooth starting profile for the fixed-point iteration.
///
/// f = sech(κr), h = sech(ζr); ρ = ρ₀ tanh(μr); σ = σ₀ tanh(ξr);
/// A = B = A₀·r/(r + 4/ν). Satisfies the boundary data and the
/// qualitative bounds. Two shape constraints matter for the electric
/// potentials' connecting corridor (A ≤ B ≤ A₀) to be nonempty from the
/// first iteration: the f/h tails must be exponentially thin (B₀ − b*
/// equals the integral of 2h²B/r plus the ρ² coupling, and an algebraic
/// h tail pushes it past B₀), and rA must be asymptotically linear
/// (A = A₀ + O(1/r)) — a concave (rA) floor like A₀·tanh forces r(B−A)
/// to stay large and again exhausts the budget.
pub fn initial_guess(consts: &DerivedConstants, grid: Arc<RadialGrid>) -> FieldProfile {
    let p = &consts.params;
    let r0 = grid.r_start();
    let core = 4.0 / consts.nu;
    let sech2 = |x: f64| {
        let c = x.cosh();
        1.0 / (c * c)
    };
    let sech_pair = |rate: f64, r: f64| {
        let v = 1.0 / (rate * r).cosh();
        (v, -rate * v * (rate * r).tanh())
    };
    let pot_pair = |amp: f64, r: f64| {
        (
            amp * r / (r + core),
            amp * core / ((r + core) * (r + core)),
        )
    };
    // Series coefficients consistent with the guess near r_start
    // (sech(x) = 1 - x²/2 + ...).
    let params: ShootParams = [
        -0.5 * consts.kappa_decay * consts.kappa_decay,
        consts.rho0 * (p.mu * r0).tanh() / r0.powf(consts.k_exp),
        p.a0 / (r0 + core),
        p.b0 / (r0 + core),
        -0.5 * consts.zeta * consts.zeta,
        consts.sigma0 * (consts.xi * r0).tanh() / r0,
    ];
    FieldProfile::from_fn(grid, params, |field, r| match field {
        FieldId::F => sech_pair(consts.kappa_decay, r),
        FieldId::H => sech_pair(consts.zeta, r),
        FieldId::Rho => (
            consts.rho0 * (p.mu * r).tanh(),
            consts.rho0 * p.mu * sech2(p.mu * r),
        ),
        FieldId::Sigma => (
            consts.sigma0 * (consts.xi * r).tanh(),
            consts.sigma0 * consts.xi * sech2(consts.xi * r),
        ),
        FieldId::A => pot_pair(p.a0, r),
        FieldId::B => pot_pair(p.b0, r),
    })
}

/// Constant-background profile (used for the frozen flat-background
/// shooting experiments): every field pinned to a given value with zero
/// derivative, except the series region below r_start is still the grid
/// floor value.
pub fn flat_background(
    consts: &DerivedConstants,
    grid: Arc<RadialGrid>,
    values: [f64; 6],
) -> FieldProfile {
    let r0 = grid.r_start();
    let params: ShootParams = [
        (values[0] - 1.0) / (r0 * r0),
        values[1] / r0.powf(consts.k_exp),
        values[2] / r0,
        values[3] / r0,
        (values[4] - 1.0) / (r0 * r0),
        values[5] / r0,
    ];
    FieldProfile::from_fn(grid, params, |field, _r| (values[field.index()], 0.0))
}
