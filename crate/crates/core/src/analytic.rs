//! Closed-form steady-state scattering amplitudes and the coupling design
//! rules built on them.
//!
//! Everything here works on linear-MHz rates: each expression is a ratio of
//! rates, so the 2π between linear and angular frequency cancels identically
//! and the results agree with the rad/ns dynamics without any conversion.
//!
//! The long-pulse limit of a single-photon drive reduces to a stationary
//! scattering problem: eliminate the atomic polarizations, solve the 2×2
//! linear system for the two mode amplitudes, and read off the transmission
//! and reflection amplitudes with input–output relations. [`lambda_scatter`]
//! is the one-pathway (Λ system) special case written in cooperativity form;
//! [`two_pathway_scatter`] keeps a second excited level in play and is exact
//! for any complex couplings and detunings of the two pathways.

use crate::error::{Error, Result};
use crate::params::SystemParams;
use num_complex::Complex64;

/// Inputs of the one-pathway (Λ) steady-state formulas. `g1` couples mode a
/// to the transition out of the occupied ground state, `g2` couples mode b to
/// the transition into the target ground state; both may be complex.
#[derive(Debug, Clone, Copy)]
pub struct LambdaInput {
    pub kappa_ex: f64,
    pub kappa_i: f64,
    pub delta_c: f64,
    pub g1: Complex64,
    pub g2: Complex64,
    pub gamma: f64,
    pub delta_a: f64,
}

/// A second scattering pathway through another excited level, with its own
/// width and detuning.
#[derive(Debug, Clone, Copy)]
pub struct SecondPathway {
    pub g1: Complex64,
    pub g2: Complex64,
    pub gamma: f64,
    pub delta_a: f64,
}

/// Steady-state output amplitudes of the two fiber ports for unit input.
#[derive(Debug, Clone, Copy)]
pub struct ScatterAmplitudes {
    pub t: Complex64,
    pub r: Complex64,
}

impl ScatterAmplitudes {
    /// Transmission probability |t|².
    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// Reflection probability |r|².
    pub fn reflection(&self) -> f64 {
        self.r.norm_sqr()
    }
}

impl LambdaInput {
    fn kappa_tilde(&self) -> Complex64 {
        Complex64::new(self.kappa_ex + self.kappa_i, self.delta_c)
    }

    fn gamma_tilde(&self) -> Complex64 {
        Complex64::new(self.gamma, self.delta_a)
    }
}

/// Transmission amplitude of the bare resonator (no atom):
/// t₀ = 1 − 2κ_ex/(κ + iδ_C).
pub fn empty_resonator_amplitude(kappa_ex: f64, kappa_i: f64, delta_c: f64) -> Complex64 {
    let kt = Complex64::new(kappa_ex + kappa_i, delta_c);
    1.0 - 2.0 * kappa_ex / kt
}

/// One-pathway steady-state amplitudes in cooperativity form.
///
/// With κ̃ = κ + iδ_C, γ̃ = γ + iδ_a, G² = |g₁|² + |g₂|² and the complex
/// cooperativity C = G²/(2κ̃γ̃):
///
///   t = (κ_ex/κ̃)·(2|g₁|²/G²)·2C/(1+2C) + t₀,
///   r = (κ_ex/κ̃)·(2 g₁g₂/G²)·2C/(1+2C).
///
/// The g₁g₂ product (not |g₁g₂|) carries the toggling phase into r.
pub fn lambda_scatter(inp: &LambdaInput) -> ScatterAmplitudes {
    let kt = inp.kappa_tilde();
    let t0 = 1.0 - 2.0 * inp.kappa_ex / kt;
    let g_sq = inp.g1.norm_sqr() + inp.g2.norm_sqr();
    if g_sq == 0.0 {
        return ScatterAmplitudes {
            t: t0,
            r: Complex64::new(0.0, 0.0),
        };
    }
    let c = g_sq / (2.0 * kt * inp.gamma_tilde());
    let lorentz = 2.0 * c / (1.0 + 2.0 * c);
    let front = inp.kappa_ex / kt * lorentz * 2.0 / g_sq;
    ScatterAmplitudes {
        t: front * inp.g1.norm_sqr() + t0,
        r: front * inp.g1 * inp.g2,
    }
}

/// Steady-state amplitudes with two scattering pathways, by adiabatic
/// elimination of both atomic polarizations. Exact for arbitrary complex
/// couplings; reduces to [`lambda_scatter`] when the second pathway is off.
pub fn two_pathway_scatter(inp: &LambdaInput, second: &SecondPathway) -> ScatterAmplitudes {
    let kt = inp.kappa_tilde();
    let gt = inp.gamma_tilde();
    let gtp = Complex64::new(second.gamma, second.delta_a);
    let a11 = kt + inp.g1.norm_sqr() / gt + second.g1.norm_sqr() / gtp;
    let a22 = kt + inp.g2.norm_sqr() / gt + second.g2.norm_sqr() / gtp;
    let a12 = inp.g1.conj() * inp.g2.conj() / gt + second.g1.conj() * second.g2.conj() / gtp;
    let a21 = inp.g1 * inp.g2 / gt + second.g1 * second.g2 / gtp;
    let det = a11 * a22 - a12 * a21;
    ScatterAmplitudes {
        t: 1.0 - 2.0 * inp.kappa_ex * a22 / det,
        r: 2.0 * inp.kappa_ex * a21 / det,
    }
}

/// Intrinsic cooperativity C_i = g²/(κ_i γ) of a symmetric Λ pathway
/// (g₁ = g₂ = g, so G² = 2g²).
pub fn intrinsic_cooperativity(g: f64, kappa_i: f64, gamma: f64) -> f64 {
    g * g / (kappa_i * gamma)
}

/// External coupling that nulls the resonant transmission of a symmetric,
/// resonant Λ system: κ_ex = κ_i √(1 + 2C_i).
pub fn critical_coupling(g: f64, kappa_i: f64, gamma: f64) -> f64 {
    kappa_i * (1.0 + 2.0 * intrinsic_cooperativity(g, kappa_i, gamma)).sqrt()
}

/// A resonator working point: external coupling and cavity detuning, MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint {
    pub kappa_ex: f64,
    pub delta_c: f64,
}

/// The design problem with a detuned parasitic pathway: a resonant symmetric
/// Λ system (coupling `g`, width `gamma`) plus an antisymmetrically-coupled
/// excited level (coupling `g_prime`, width `gamma_prime`) sitting at
/// detuning `delta_a_prime`.
#[derive(Debug, Clone, Copy)]
pub struct ImpuritySpec {
    pub g: f64,
    pub g_prime: f64,
    pub kappa_i: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    pub delta_a_prime: f64,
}

impl From<&SystemParams> for ImpuritySpec {
    fn from(p: &SystemParams) -> Self {
        ImpuritySpec {
            g: p.g_mag,
            g_prime: p.g_prime_ratio * p.g_mag,
            kappa_i: p.kappa_i,
            gamma: p.gamma,
            gamma_prime: p.gamma_prime,
            delta_a_prime: p.delta_a_prime,
        }
    }
}

/// Transmission amplitude of the antisymmetric-impurity configuration at a
/// candidate working point (the quantity the detuned optimum drives to zero).
pub fn impurity_t_amplitude(point: DesignPoint, spec: &ImpuritySpec) -> Complex64 {
    let g = Complex64::new(spec.g, 0.0);
    let gp = Complex64::new(spec.g_prime, 0.0);
    let inp = LambdaInput {
        kappa_ex: point.kappa_ex,
        kappa_i: spec.kappa_i,
        delta_c: point.delta_c,
        g1: g,
        g2: g,
        gamma: spec.gamma,
        delta_a: 0.0,
    };
    let second = SecondPathway {
        g1: gp,
        g2: -gp,
        gamma: spec.gamma_prime,
        delta_a: spec.delta_a_prime,
    };
    two_pathway_scatter(&inp, &second).t
}

/// First-order working point that compensates the light shift of the
/// detuned pathway. With C_i = g²/(κ_i γ) and C_i′ = g′²/(κ_i δ_a′):
///
///   δ_C  = κ_i C_i′ (1 + 2C_i)/(1 + C_i),
///   κ_ex = κ_i √[(1 + 2C_i′ γ′/δ_a′ + C_i′²/(1+C_i)²)(1 + 2C_i)].
///
/// Accurate to O(γ′/δ_a′); see [`detuned_optimum_exact`] for the true zero.
pub fn detuned_optimum_approx(spec: &ImpuritySpec) -> DesignPoint {
    let ci = intrinsic_cooperativity(spec.g, spec.kappa_i, spec.gamma);
    let cip = spec.g_prime * spec.g_prime / (spec.kappa_i * spec.delta_a_prime);
    let delta_c = spec.kappa_i * cip * (1.0 + 2.0 * ci) / (1.0 + ci);
    let kappa_ex = spec.kappa_i
        * ((1.0 + 2.0 * cip * spec.gamma_prime / spec.delta_a_prime
            + cip * cip / ((1.0 + ci) * (1.0 + ci)))
            * (1.0 + 2.0 * ci))
            .sqrt();
    DesignPoint { kappa_ex, delta_c }
}

/// Exact working point that nulls the transmission of the
/// antisymmetric-impurity configuration, found by a damped Newton solve of
/// Re t = Im t = 0 over (κ_ex, δ_C), seeded from [`detuned_optimum_approx`].
pub fn detuned_optimum_exact(spec: &ImpuritySpec) -> Result<DesignPoint> {
    let seed = detuned_optimum_approx(spec);
    let mut x = [seed.kappa_ex, seed.delta_c];
    let t_at = |x: &[f64; 2]| {
        impurity_t_amplitude(
            DesignPoint {
                kappa_ex: x[0],
                delta_c: x[1],
            },
            spec,
        )
    };
    for _ in 0..60 {
        let f = t_at(&x);
        let f_norm = f.norm();
        if f_norm < 1e-14 {
            break;
        }
        // forward-difference Jacobian of (Re t, Im t), scaled steps
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let h = 1e-7 * x[j].abs().max(1.0);
            let mut xp = x;
            xp[j] += h;
            let fp = t_at(&xp);
            jac[0][j] = (fp.re - f.re) / h;
            jac[1][j] = (fp.im - f.im) / h;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Solve("singular Jacobian in detuned optimum".into()));
        }
        let dx = [
            (-f.re * jac[1][1] + f.im * jac[0][1]) / det,
            (-f.im * jac[0][0] + f.re * jac[1][0]) / det,
        ];
        // backtrack until the residual actually drops
        let mut lam = 1.0;
        while lam > 1e-6 {
            let xn = [x[0] + lam * dx[0], x[1] + lam * dx[1]];
            if t_at(&xn).norm() < f_norm {
                break;
            }
            lam *= 0.5;
        }
        x = [x[0] + lam * dx[0], x[1] + lam * dx[1]];
    }
    let point = DesignPoint {
        kappa_ex: x[0],
        delta_c: x[1],
    };
    let residual = impurity_t_amplitude(point, spec).norm();
    if residual < 1e-10 {
        Ok(point)
    } else {
        Err(Error::Solve(format!(
            "detuned optimum did not converge: |t| = {residual:.3e}"
        )))
    }
}
