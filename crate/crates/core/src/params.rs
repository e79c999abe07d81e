//! Physical couplings, admissibility checks and derived constants.
//!
//! Everything downstream (shooting targets, decay exponents, grid extents)
//! is computed here once, from the eight input couplings. The two
//! admissibility assumptions are
//!
//!   (H1)  (1/4) g² ρ₀² > A₀²   and   g′² σ₀² > B₀²
//!   (H2)  B₀ = A₀
//!
//! with ρ₀ = μ√(2/λ) and σ₀ = m/√κ. (H1) is exactly the condition that the
//! charged fields f and h see a positive mass-squared at the vacuum, i.e.
//! that the decay exponents below are real and positive.

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Indicial exponent of the ρ equation at the origin, k = (√3 − 1)/2.
///
/// The f²/(2r²) ≈ 1/(2r²) singular term forces ρ ~ F·r^k; k solves
/// k(k+1) = 1/2.
pub const K_EXP: f64 = 0.366_025_403_784_438_6;

/// The eight input couplings. Dimensionless; no unit handling anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    /// SU(2) gauge coupling g (> 0).
    pub g: f64,
    /// U(1) gauge coupling g′ (> 0).
    pub g_prime: f64,
    /// Higgs quartic coupling λ (> 0).
    pub lambda: f64,
    /// Higgs mass parameter μ (> 0).
    pub mu: f64,
    /// σ-sector quartic coupling (> 0). Named `kappa_param` to keep it
    /// apart from the decay exponent κ of the f field.
    pub kappa_param: f64,
    /// σ-sector mass parameter m (> 0).
    pub m: f64,
    /// Asymptotic value of the electric potential A (≥ 0).
    pub a0: f64,
    /// Asymptotic value of the hypercharge potential B (≥ 0).
    pub b0: f64,
}

/// One violated admissibility constraint. Violations are data, not faults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// A coupling that must be strictly positive is not.
    NonPositiveCoupling(&'static str),
    /// A boundary value that must be non-negative is not.
    NegativeBoundaryValue(&'static str),
    /// (H1), first clause: (1/4) g² ρ₀² ≤ A₀².
    H1ChargedW,
    /// (H1), second clause: g′² σ₀² ≤ B₀².
    H1ChargedX,
    /// (H2): B₀ ≠ A₀.
    H2,
    /// A field is not finite.
    NonFinite(&'static str),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonPositiveCoupling(name) => {
                write!(f, "coupling `{name}` must be strictly positive")
            }
            Violation::NegativeBoundaryValue(name) => {
                write!(f, "boundary value `{name}` must be non-negative")
            }
            Violation::H1ChargedW => write!(f, "(H1) violated: (1/4) g^2 rho0^2 <= A0^2"),
            Violation::H1ChargedX => write!(f, "(H1) violated: g'^2 sigma0^2 <= B0^2"),
            Violation::H2 => write!(f, "(H2) violated: B0 != A0"),
            Violation::NonFinite(name) => write!(f, "parameter `{name}` is not finite"),
        }
    }
}

/// Outcome of [`Parameters::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// All derived scales. Computed once by [`Parameters::derive`], immutable
/// afterwards; cheap to copy around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// ρ₀ = μ √(2/λ), the Higgs vacuum value.
    pub rho0: f64,
    /// σ₀ = m/√κ, the σ vacuum value.
    pub sigma0: f64,
    /// k = (√3 − 1)/2, origin exponent of ρ.
    pub k_exp: f64,
    /// κ = √((1/4) g² ρ₀² − A₀²), decay rate of f.
    pub kappa_decay: f64,
    /// ζ = √(g′² σ₀² − B₀²), decay rate of h (A₀ interchangeable under H2).
    pub zeta: f64,
    /// ν = (ρ₀/2) √(g² + g′²), rate of the coupled (A,B) difference mode.
    pub nu: f64,
    /// ν₀ = min{2κ, ν}, decay rate of r(B − A).
    pub nu0: f64,
    /// μ₀ = min{μ, √2 κ, ν/√2}; the ρ tail is r⁻¹ e^(−√2 μ₀ r)-bounded.
    pub mu0: f64,
    /// ξ = √κ_param · σ₀; the σ tail is r⁻¹ e^(−√2 ξ r)-bounded.
    pub xi: f64,
    /// Weight exponent of the fixed-point norm, 0 < α < k. Defaults to k/2.
    pub alpha: f64,
    /// Copy of the inputs that produced these constants.
    pub params: Parameters,
}

impl Parameters {
    /// Checks positivity, (H1) and (H2). Returns every violated constraint.
    pub fn validate(&self) -> ValidationResult {
        let mut violations = Vec::new();
        let named = [
            (self.g, "g"),
            (self.g_prime, "g_prime"),
            (self.lambda, "lambda"),
            (self.mu, "mu"),
            (self.kappa_param, "kappa_param"),
            (self.m, "m"),
            (self.a0, "a0"),
            (self.b0, "b0"),
        ];
        for (v, name) in named {
            if !v.is_finite() {
                violations.push(Violation::NonFinite(name));
            }
        }
        if !violations.is_empty() {
            return ValidationResult { violations };
        }
        for (v, name) in &named[..6] {
            if *v <= 0.0 {
                violations.push(Violation::NonPositiveCoupling(name));
            }
        }
        for (v, name) in &named[6..] {
            if *v < 0.0 {
                violations.push(Violation::NegativeBoundaryValue(name));
            }
        }
        if !violations.is_empty() {
            return ValidationResult { violations };
        }
        let rho0 = self.mu * (2.0 / self.lambda).sqrt();
        let sigma0 = self.m / self.kappa_param.sqrt();
        if 0.25 * self.g * self.g * rho0 * rho0 <= self.a0 * self.a0 {
            violations.push(Violation::H1ChargedW);
        }
        if self.g_prime * self.g_prime * sigma0 * sigma0 <= self.b0 * self.b0 {
            violations.push(Violation::H1ChargedX);
        }
        if self.b0 != self.a0 {
            violations.push(Violation::H2);
        }
        ValidationResult { violations }
    }

    /// Computes every derived constant with the default α = k/2.
    ///
    /// Fails with [`DomainError`] on a negative radicand, which cannot
    /// happen once `validate` passed.
    pub fn derive(&self) -> Result<DerivedConstants, DomainError> {
        self.derive_with_alpha(K_EXP / 2.0)
    }

    /// Same as [`Parameters::derive`] but with an explicit weight exponent.
    pub fn derive_with_alpha(&self, alpha: f64) -> Result<DerivedConstants, DomainError> {
        if !(alpha > 0.0 && alpha < K_EXP) {
            return Err(DomainError::AlphaOutOfRange { alpha });
        }
        let rho0 = self.mu * (2.0 / self.lambda).sqrt();
        let sigma0 = self.m / self.kappa_param.sqrt();
        let kappa_sq = 0.25 * self.g * self.g * rho0 * rho0 - self.a0 * self.a0;
        if kappa_sq <= 0.0 {
            return Err(DomainError::NegativeRadicand { name: "kappa_decay" });
        }
        let zeta_sq = self.g_prime * self.g_prime * sigma0 * sigma0 - self.b0 * self.b0;
        if zeta_sq <= 0.0 {
            return Err(DomainError::NegativeRadicand { name: "zeta" });
        }
        let kappa_decay = kappa_sq.sqrt();
        let zeta = zeta_sq.sqrt();
        let nu = 0.5 * rho0 * (self.g * self.g + self.g_prime * self.g_prime).sqrt();
        let nu0 = (2.0 * kappa_decay).min(nu);
        let mu0 = self
            .mu
            .min(std::f64::consts::SQRT_2 * kappa_decay)
            .min(nu / std::f64::consts::SQRT_2);
        let xi = self.kappa_param.sqrt() * sigma0;
        Ok(DerivedConstants {
            rho0,
            sigma0,
            k_exp: K_EXP,
            kappa_decay,
            zeta,
            nu,
            nu0,
            mu0,
            xi,
            alpha,
            params: *self,
        })
    }
}

impl DerivedConstants {
    /// Slowest decay rate among the exponential tails; sets the default
    /// domain truncation r_max = 40 / min-rate.
    pub fn min_rate(&self) -> f64 {
        self.kappa_decay
            .min(self.zeta)
            .min(self.nu0)
            .min(self.mu0)
            .min(self.xi)
    }

    /// Default truncation radius: every tail is at e⁻⁴⁰ scale there.
    pub fn default_r_max(&self) -> f64 {
        40.0 / self.min_rate()
    }

    /// Default series hand-off radius, 10⁻³ · min(1, 1/κ).
    pub fn default_r_start(&self) -> f64 {
        1e-3 * 1.0f64.min(1.0 / self.kappa_decay)
    }

    /// Boundary values of the six fields at infinity, in the order
    /// (f, ρ, A, B, h, σ).
    pub fn far_targets(&self) -> [f64; 6] {
        [
            0.0,
            self.rho0,
            self.params.a0,
            self.params.b0,
            0.0,
            self.sigma0,
        ]
    }
}
