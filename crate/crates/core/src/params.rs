//! System parameters and unit conventions.
//!
//! All rates entering the public API are *linear* frequencies in MHz (the
//! convention used when quoting numbers as 2π × f MHz); detunings are signed
//! MHz. Times are nanoseconds. Internally the dynamics run in angular units,
//! rad/ns, via [`ang`]. Every closed-form design expression is a ratio of
//! rates, so those work directly on the linear-MHz values.

use crate::error::{Error, Result};

/// rad/ns per linear MHz: 2π × 10⁶ rad/s = 2π × 10⁻³ rad/ns.
pub const RAD_PER_NS_PER_MHZ: f64 = 2.0e-3 * std::f64::consts::PI;

/// Convert a linear-MHz rate or detuning to angular rad/ns.
#[inline]
pub fn ang(mhz: f64) -> f64 {
    mhz * RAD_PER_NS_PER_MHZ
}

/// Physical parameters of the atom–resonator system.
///
/// `g_mag`/`g_phase` describe the coupling of the transitions driven by the
/// stronger-coupled excited manifold; the second manifold couples with
/// magnitude `g_prime_ratio * g_mag` and the same phase (the phase encodes the
/// atom's azimuthal position, which both manifolds share). `h` is the strength
/// of direct photon backscattering between the two counterpropagating modes
/// (real, elastic, atom-state preserving). `r_sigma` and `r_pi` are the real
/// amplitude ratios of the unwanted σ and π transitions relative to the ideal
/// ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Fiber–resonator (external) coupling rate, MHz.
    pub kappa_ex: f64,
    /// Intrinsic resonator loss rate, MHz.
    pub kappa_i: f64,
    /// Cavity detuning from the drive, MHz.
    pub delta_c: f64,
    /// Atom–photon coupling magnitude, MHz.
    pub g_mag: f64,
    /// Azimuthal coupling phase, radians.
    pub g_phase: f64,
    /// Coupling ratio of the primed excited manifold to the unprimed one.
    pub g_prime_ratio: f64,
    /// Atomic polarization decay rate of the unprimed excited level, MHz.
    pub gamma: f64,
    /// Same for the primed excited manifold, MHz.
    pub gamma_prime: f64,
    /// Detuning of the unprimed excited level, MHz.
    pub delta_a: f64,
    /// Detuning of the primed excited manifold, MHz.
    pub delta_a_prime: f64,
    /// Mode-mode backscattering rate, MHz (real, ≥ 0).
    pub h: f64,
    /// Residual σ-transition amplitude ratio, dimensionless.
    pub r_sigma: f64,
    /// Residual π-transition amplitude ratio, dimensionless.
    pub r_pi: f64,
}

impl Default for SystemParams {
    /// Measured ⁸⁷Rb microsphere working point; rates 2π × MHz.
    fn default() -> Self {
        SystemParams {
            kappa_ex: 30.0,
            kappa_i: 6.0,
            delta_c: -7.0,
            g_mag: 16.0,
            g_phase: 0.0,
            g_prime_ratio: (5.0f64 / 4.0).sqrt(),
            gamma: 3.0,
            gamma_prime: 3.0,
            delta_a: 0.0,
            delta_a_prime: -72.0,
            h: 1.0,
            r_sigma: 0.18,
            r_pi: 0.13,
        }
    }
}

impl SystemParams {
    /// Check physicality: positive decay channels, non-negative couplings,
    /// impurity ratios within [0, 1].
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.kappa_ex > 0.0) {
            return bad(format!("kappa_ex must be > 0, got {}", self.kappa_ex));
        }
        if !(self.kappa_i >= 0.0) {
            return bad(format!("kappa_i must be >= 0, got {}", self.kappa_i));
        }
        if !(self.gamma > 0.0) {
            return bad(format!("gamma must be > 0, got {}", self.gamma));
        }
        if !(self.gamma_prime > 0.0) {
            return bad(format!("gamma_prime must be > 0, got {}", self.gamma_prime));
        }
        if !(self.g_mag >= 0.0) {
            return bad(format!("g_mag must be >= 0, got {}", self.g_mag));
        }
        if !(self.g_prime_ratio > 0.0) {
            return bad(format!("g_prime_ratio must be > 0, got {}", self.g_prime_ratio));
        }
        if !(self.h >= 0.0) {
            return bad(format!("h must be real >= 0, got {}", self.h));
        }
        for (name, r) in [("r_sigma", self.r_sigma), ("r_pi", self.r_pi)] {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} must be in [0, 1], got {r}"));
            }
        }
        for (name, v) in [
            ("delta_c", self.delta_c),
            ("delta_a", self.delta_a),
            ("delta_a_prime", self.delta_a_prime),
            ("g_phase", self.g_phase),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        Ok(())
    }

    /// Total resonator field decay rate κ = κ_ex + κ_i, MHz.
    #[inline]
    pub fn kappa(&self) -> f64 {
        self.kappa_ex + self.kappa_i
    }
}
