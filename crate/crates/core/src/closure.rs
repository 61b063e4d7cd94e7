//! Pressure closure and linearisation coefficients.
//!
//! Given the fraction densities `R± = α±ρ±`, the phase densities follow from
//! the pressure relation `P⁺(ρ⁺) − P⁻(ρ⁻) = f(R⁻)` together with
//! `α⁺ + α⁻ = 1`. Eliminating `ρ⁻ = R⁻ρ⁺/(ρ⁺ − R⁺)` leaves one scalar
//! equation in `ρ⁺ ∈ (R⁺, ∞)` whose residual is strictly increasing, so a
//! bracketed Newton iteration always finds the unique root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-12;
const STEP_TOL: f64 = 1e-13;
/// Iteration cap of the cold-start closure solve.
pub const MAX_ITER: usize = 200;
/// Iteration cap used by warm-started pointwise solves.
pub const MAX_ITER_WARM: usize = 50;

/// Barotropic laws `P±(ρ) = ρ^γ̄±` (amplitudes fixed to one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLaw {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

impl PhaseLaw {
    pub fn new(gamma_plus: f64, gamma_minus: f64) -> Result<Self> {
        let law = Self {
            gamma_plus,
            gamma_minus,
        };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("gamma_plus", self.gamma_plus), ("gamma_minus", self.gamma_minus)] {
            if !g.is_finite() || g < 1.0 {
                return Err(Error::InvalidLaw(format!("{name} = {g} must be finite and >= 1")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn pressure_plus(&self, rho: f64) -> f64 {
        rho.powf(self.gamma_plus)
    }

    #[inline]
    pub fn pressure_minus(&self, rho: f64) -> f64 {
        rho.powf(self.gamma_minus)
    }

    /// Squared sound speed `s₊² = γ̄⁺ρ^(γ̄⁺−1)`.
    #[inline]
    pub fn sound2_plus(&self, rho: f64) -> f64 {
        self.gamma_plus * rho.powf(self.gamma_plus - 1.0)
    }

    #[inline]
    pub fn sound2_minus(&self, rho: f64) -> f64 {
        self.gamma_minus * rho.powf(self.gamma_minus - 1.0)
    }
}

/// Capillary pressure `f(s) = f1 + fp·(s−1) + c2·(s−1)² + c3·(s−1)³`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CapillaryLaw {
    pub f1: f64,
    pub fp: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default)]
    pub c3: f64,
}

impl CapillaryLaw {
    pub fn linear(f1: f64, fp: f64) -> Self {
        Self {
            f1,
            fp,
            c2: 0.0,
            c3: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.f1, self.fp, self.c2, self.c3].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidLaw("capillary coefficients must be finite".into()))
        }
    }

    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        let d = s - 1.0;
        self.f1 + d * (self.fp + d * (self.c2 + d * self.c3))
    }

    #[inline]
    pub fn slope(&self, s: f64) -> f64 {
        let d = s - 1.0;
        self.fp + d * (2.0 * self.c2 + 3.0 * self.c3 * d)
    }
}

/// Shear (`μ±`) and bulk (`λ±`) viscosities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viscosities {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl Viscosities {
    pub fn validate(&self) -> Result<()> {
        let all = [self.mu_plus, self.mu_minus, self.lambda_plus, self.lambda_minus];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidLaw("viscosities must be finite".into()));
        }
        if self.mu_plus <= 0.0 || self.mu_minus <= 0.0 {
            return Err(Error::InvalidLaw("shear viscosities must be positive".into()));
        }
        if self.mu_plus + self.lambda_plus <= 0.0 || self.mu_minus + self.lambda_minus <= 0.0 {
            return Err(Error::InvalidLaw("mu + lambda must be positive for both phases".into()));
        }
        Ok(())
    }
}

/// The complete set of physical laws of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Laws {
    pub phase: PhaseLaw,
    pub cap: CapillaryLaw,
    pub visc: Viscosities,
}

impl Laws {
    pub fn validate(&self) -> Result<()> {
        self.phase.validate()?;
        self.cap.validate()?;
        self.visc.validate()
    }

    /// Equilibrium closure at `R± = 1` and the coefficients derived from it.
    pub fn linearize(&self) -> Result<(LocalClosure, ModelCoefficients)> {
        self.validate()?;
        let eq = solve_equilibrium(&self.phase, &self.cap)?;
        let c = derive_coefficients(&eq, &self.visc, &self.cap)?;
        Ok((eq, c))
    }
}

/// Pointwise thermodynamic state at given fraction densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalClosure {
    pub r_plus: f64,
    pub r_minus: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub s2_plus: f64,
    pub s2_minus: f64,
    /// Coupling coefficient `𝒞² = s₋²s₊²/(α⁻ρ⁺s₊² + α⁺ρ⁻s₋²)`.
    pub c2: f64,
    /// `f(R⁻)`.
    pub fval: f64,
    /// `f′(R⁻)`.
    pub fprime: f64,
}

impl LocalClosure {
    fn denominator(&self) -> f64 {
        self.alpha_minus * self.rho_plus * self.s2_plus + self.alpha_plus * self.rho_minus * self.s2_minus
    }

    /// `∂α⁺/∂R⁺` at fixed `R⁻`.
    pub fn dalpha_plus_dr_plus(&self) -> f64 {
        self.alpha_minus * self.s2_plus / self.denominator()
    }

    /// `∂α⁺/∂R⁻` at fixed `R⁺`.
    pub fn dalpha_plus_dr_minus(&self) -> f64 {
        -self.alpha_plus * (self.s2_minus + self.alpha_minus * self.fprime) / self.denominator()
    }
}

/// Residual `φ(ρ⁺) = P⁺(ρ⁺) − P⁻(R⁻ρ⁺/(ρ⁺−R⁺)) − f(R⁻)`.
pub fn closure_residual(rho_plus: f64, r_plus: f64, r_minus: f64, phase: &PhaseLaw, cap: &CapillaryLaw) -> f64 {
    let rho_minus = r_minus * rho_plus / (rho_plus - r_plus);
    phase.pressure_plus(rho_plus) - phase.pressure_minus(rho_minus) - cap.value(r_minus)
}

/// `∂φ/∂ρ⁺ = s₊² + s₋²R⁻R⁺/(ρ⁺−R⁺)²`, positive on `(R⁺, ∞)`.
pub fn closure_residual_slope(rho_plus: f64, r_plus: f64, r_minus: f64, phase: &PhaseLaw) -> f64 {
    let gap = rho_plus - r_plus;
    let rho_minus = r_minus * rho_plus / gap;
    phase.sound2_plus(rho_plus) + phase.sound2_minus(rho_minus) * r_minus * r_plus / (gap * gap)
}

/// Closure at the equilibrium `R⁺ = R⁻ = 1`.
pub fn solve_equilibrium(phase: &PhaseLaw, cap: &CapillaryLaw) -> Result<LocalClosure> {
    phase.validate()?;
    cap.validate()?;
    closure_at(1.0, 1.0, phase, cap, None)
}

/// Closure at arbitrary positive masses, optionally warm-started from a
/// nearby root.
pub fn closure_at(
    r_plus: f64,
    r_minus: f64,
    phase: &PhaseLaw,
    cap: &CapillaryLaw,
    guess: Option<f64>,
) -> Result<LocalClosure> {
    let max_iter = if guess.is_some() { MAX_ITER_WARM } else { MAX_ITER };
    let rho_plus = solve_rho_plus(r_plus, r_minus, phase, cap, guess, max_iter)?;
    Ok(assemble(rho_plus, r_plus, r_minus, phase, cap))
}

fn assemble(rho_plus: f64, r_plus: f64, r_minus: f64, phase: &PhaseLaw, cap: &CapillaryLaw) -> LocalClosure {
    let rho_minus = r_minus * rho_plus / (rho_plus - r_plus);
    let alpha_plus = r_plus / rho_plus;
    let alpha_minus = r_minus / rho_minus;
    let s2_plus = phase.sound2_plus(rho_plus);
    let s2_minus = phase.sound2_minus(rho_minus);
    let c2 = s2_minus * s2_plus / (alpha_minus * rho_plus * s2_plus + alpha_plus * rho_minus * s2_minus);
    LocalClosure {
        r_plus,
        r_minus,
        rho_plus,
        rho_minus,
        alpha_plus,
        alpha_minus,
        s2_plus,
        s2_minus,
        c2,
        fval: cap.value(r_minus),
        fprime: cap.slope(r_minus),
    }
}

fn solve_rho_plus(
    r_plus: f64,
    r_minus: f64,
    phase: &PhaseLaw,
    cap: &CapillaryLaw,
    guess: Option<f64>,
    max_iter: usize,
) -> Result<f64> {
    if !(r_plus > 0.0) || !(r_minus > 0.0) {
        return Err(Error::NonPositiveMass { r_plus, r_minus });
    }
    let phi = |rho: f64| closure_residual(rho, r_plus, r_minus, phase, cap);

    let mut lo = r_plus * (1.0 + 1e-12);
    if phi(lo) >= 0.0 {
        return Err(Error::NoConvergence(format!(
            "residual is not negative at the lower bracket for R+ = {r_plus}, R- = {r_minus}"
        )));
    }
    let mut hi = f64::INFINITY;
    let mut x = match guess {
        Some(g) if g.is_finite() && g > lo => g,
        _ => 2.0 * r_plus,
    };

    for _ in 0..max_iter {
        let f = phi(x);
        if !f.is_finite() {
            return Err(Error::NoConvergence(format!("non-finite residual at rho+ = {x}")));
        }
        if f > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let step = f / closure_residual_slope(x, r_plus, r_minus, phase);
        if f.abs() < RESIDUAL_TOL && step.abs() < STEP_TOL {
            return Ok(x);
        }
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(lo) };
        }
        if next == x {
            // Bracket collapsed onto adjacent floats.
            if f.abs() < RESIDUAL_TOL {
                return Ok(x);
            }
            break;
        }
        x = next;
    }
    Err(Error::NoConvergence(format!(
        "closure did not converge within {max_iter} iterations for R+ = {r_plus}, R- = {r_minus}"
    )))
}

/// Linearisation coefficients of the reformulated system, in unscaled
/// (`alpha*`) and scaled (`beta*`) form, plus the derived rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCoefficients {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub nu1_plus: f64,
    pub nu1_minus: f64,
    pub nu2_plus: f64,
    pub nu2_minus: f64,
    pub nu_plus: f64,
    pub nu_minus: f64,
    /// `β₁²β₄² − β₁β₂β₃β₄`, the constant term of the characteristic quartic
    /// divided by `r⁴`. Evaluated from the closed form `−𝒞²f′(1)/ρ⁺` when the
    /// coefficients come from physical laws, so its sign is exactly that of
    /// `−f′(1)`.
    pub det_term: f64,
    pub theta: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
}

impl ModelCoefficients {
    /// Coefficients given directly in scaled form.
    pub fn from_direct(
        beta: [f64; 4],
        nu1_plus: f64,
        nu2_plus: f64,
        nu1_minus: f64,
        nu2_minus: f64,
    ) -> Result<Self> {
        let [b1, b2, b3, b4] = beta;
        if !beta.iter().all(|b| b.is_finite()) || b1 <= 0.0 || b4 <= 0.0 {
            return Err(Error::InvalidInput("beta1 and beta4 must be positive and all betas finite".into()));
        }
        let nus = [nu1_plus, nu2_plus, nu1_minus, nu2_minus];
        if !nus.iter().all(|v| v.is_finite()) || nu1_plus + nu2_plus <= 0.0 || nu1_minus + nu2_minus <= 0.0 {
            return Err(Error::InvalidInput("nu+ and nu- must be positive".into()));
        }
        let alpha1 = b1 * b1;
        let alpha4 = b4 * b4;
        let alpha2 = b2 * alpha4 / b1;
        let alpha3 = b3 * alpha1 / b4;
        let det_term = b1 * b1 * b4 * b4 - b1 * b2 * b3 * b4;
        Ok(Self::assemble(
            [alpha1, alpha2, alpha3, alpha4],
            beta,
            [nu1_plus, nu2_plus, nu1_minus, nu2_minus],
            det_term,
        ))
    }

    fn assemble(alpha: [f64; 4], beta: [f64; 4], nu: [f64; 4], det_term: f64) -> Self {
        let [b1, b2, b3, b4] = beta;
        let [nu1_plus, nu2_plus, nu1_minus, nu2_minus] = nu;
        let nu_plus = nu1_plus + nu2_plus;
        let nu_minus = nu1_minus + nu2_minus;
        let mixed = nu_plus * b4 * b4 + nu_minus * b1 * b1;
        let kappa1 = ((b1 * b1 - b4 * b4).powi(2) / 4.0 + b1 * b2 * b3 * b4).sqrt();
        let kappa2 = (b1 * b1 + b4 * b4) / 2.0;
        let kappa3 = (mixed * mixed - 4.0 * nu_plus * nu_minus * det_term).sqrt();
        let mut c = Self {
            alpha1: alpha[0],
            alpha2: alpha[1],
            alpha3: alpha[2],
            alpha4: alpha[3],
            beta1: b1,
            beta2: b2,
            beta3: b3,
            beta4: b4,
            beta_plus: (b1 / b2).sqrt(),
            beta_minus: (b4 / b3).sqrt(),
            nu1_plus,
            nu1_minus,
            nu2_plus,
            nu2_minus,
            nu_plus,
            nu_minus,
            det_term,
            theta: 0.0,
            kappa1,
            kappa2,
            kappa3,
        };
        c.theta = growth_rate(&c);
        c
    }

    /// `β₁β₄ < β₂β₃`, i.e. the characteristic quartic has a positive root.
    pub fn is_unstable(&self) -> bool {
        self.det_term < 0.0
    }

    /// `ν⁺β₄² + ν⁻β₁²`.
    pub fn mixed_damping(&self) -> f64 {
        self.nu_plus * self.beta4 * self.beta4 + self.nu_minus * self.beta1 * self.beta1
    }
}

/// Linearisation coefficients from the equilibrium closure.
pub fn derive_coefficients(eq: &LocalClosure, visc: &Viscosities, cap: &CapillaryLaw) -> Result<ModelCoefficients> {
    visc.validate()?;
    let fp = cap.slope(1.0);
    let c2 = eq.c2;
    let alpha1 = c2 * eq.rho_minus / eq.rho_plus;
    let alpha2 = c2 + c2 * eq.alpha_minus * fp / eq.s2_minus;
    let alpha3 = c2;
    let alpha4 = c2 * eq.rho_plus / eq.rho_minus - c2 * eq.alpha_plus * fp / eq.s2_plus;
    if !(alpha4 > 0.0) {
        return Err(Error::NegativeAlpha4(alpha4));
    }
    let b1 = alpha1.sqrt();
    let b4 = alpha4.sqrt();
    let b2 = alpha2 * b1 / alpha4;
    let b3 = alpha3 * b4 / alpha1;
    let nu = [
        visc.mu_plus / eq.rho_plus,
        (visc.mu_plus + visc.lambda_plus) / eq.rho_plus,
        visc.mu_minus / eq.rho_minus,
        (visc.mu_minus + visc.lambda_minus) / eq.rho_minus,
    ];
    let det_term = -c2 * fp / eq.rho_plus;
    Ok(ModelCoefficients::assemble(
        [alpha1, alpha2, alpha3, alpha4],
        [b1, b2, b3, b4],
        nu,
        det_term,
    ))
}

/// Largest real root of `ν⁺ν⁻s² + (ν⁺β₄²+ν⁻β₁²)s + (β₁²β₄²−β₁β₂β₃β₄) = 0`,
/// clamped at zero.
pub fn growth_rate(c: &ModelCoefficients) -> f64 {
    let d = c.det_term;
    if !(d < 0.0) {
        return 0.0;
    }
    let b = c.mixed_damping();
    let a = c.nu_plus * c.nu_minus;
    // Cancellation-free form of (√(b²−4ad) − b)/(2a).
    -2.0 * d / (b + (b * b - 4.0 * a * d).sqrt())
}

/// The coefficient functions of the nonlinear terms evaluated at one point.
///
/// The pressure couplings are differences of the local and equilibrium
/// linear coefficients; `h±`, `k±` are the viscous couplings through
/// `∇α±` divided by `R±`, and `l± = 1/ρ± − 1/ρ±(1,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingFunctions {
    pub g_plus: f64,
    pub g_minus: f64,
    pub gbar_plus: f64,
    pub gbar_minus: f64,
    pub h_plus: f64,
    pub h_minus: f64,
    pub k_plus: f64,
    pub k_minus: f64,
    pub l_plus: f64,
    pub l_minus: f64,
}

impl CouplingFunctions {
    pub fn at(local: &LocalClosure, eq: &LocalClosure, c: &ModelCoefficients) -> Self {
        let p = local;
        let g_plus = p.c2 * p.rho_minus / p.rho_plus - c.alpha1;
        let g_minus = p.c2 * p.rho_plus / p.rho_minus - p.fprime * p.c2 * p.alpha_plus / p.s2_plus - c.alpha4;
        let gbar_plus = p.c2 + p.fprime * p.c2 * p.alpha_minus / p.s2_minus - c.alpha2;
        let gbar_minus = p.c2 - c.alpha3;
        let da_dp = p.dalpha_plus_dr_plus();
        let da_dm = p.dalpha_plus_dr_minus();
        Self {
            g_plus,
            g_minus,
            gbar_plus,
            gbar_minus,
            h_plus: da_dp / p.r_plus,
            k_plus: da_dm / p.r_plus,
            h_minus: -da_dp / p.r_minus,
            k_minus: -da_dm / p.r_minus,
            l_plus: 1.0 / p.rho_plus - 1.0 / eq.rho_plus,
            l_minus: 1.0 / p.rho_minus - 1.0 / eq.rho_minus,
        }
    }
}
