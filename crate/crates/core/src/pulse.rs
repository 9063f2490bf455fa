//! Source-cavity decay schedules and pulse shaping.
//!
//! The source cavity emits a single photon whose field envelope is
//! f(t) = √(2κ_s(t)) · exp(−∫₀ᵗ κ_s). A constant κ_s gives the natural
//! falling exponential; conversely, any normalized target envelope f ≥ 0 is
//! produced by the schedule κ_s(t) = |f(t)|² / (2·(1 − ∫₀ᵗ|f|²)), as long as
//! the required rate stays below the hardware cap. Schedules store κ_s in
//! rad/ns on a uniform grid (or as a constant) together with the cumulative
//! decay ∫κ_s needed to evaluate the emitted envelope.

use crate::error::{Error, Result};
use crate::params::ang;

/// Default hardware cap on the source decay rate, MHz.
pub const DEFAULT_CAP_MHZ: f64 = 500.0;
/// Default headroom: the target envelope may carry at most 1 − ε of the norm.
pub const DEFAULT_HEADROOM: f64 = 1e-4;
/// Default tabulation step, ns.
pub const DEFAULT_GRID_STEP_NS: f64 = 0.1;

/// κ_s(t) over [0, t_end].
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// Constant rate (falling-exponential photon).
    Constant { kappa_s: f64 },
    /// Uniform-grid tabulation with linear interpolation; `cum[i]` is the
    /// trapezoid cumulative ∫₀^{tᵢ} κ_s dt.
    Tabulated {
        dt: f64,
        kappa_s: Vec<f64>,
        cum: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    /// End of the emission window, ns. κ_s ≡ 0 afterwards.
    pub t_end: f64,
    /// Rate cap applied during construction, rad/ns.
    pub cap: f64,
}

impl Schedule {
    /// κ_s at time `t` (rad/ns). Zero outside [0, t_end].
    pub fn rate(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.t_end {
            return 0.0;
        }
        match &self.kind {
            ScheduleKind::Constant { kappa_s } => *kappa_s,
            ScheduleKind::Tabulated { dt, kappa_s, .. } => {
                let x = t / dt;
                let i = (x.floor() as usize).min(kappa_s.len() - 1);
                if i + 1 >= kappa_s.len() {
                    return kappa_s[i];
                }
                let w = x - i as f64;
                kappa_s[i] * (1.0 - w) + kappa_s[i + 1] * w
            }
        }
    }

    /// Cumulative decay ∫₀ᵗ κ_s dt′ (dimensionless).
    pub fn cumulative(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.t_end);
        match &self.kind {
            ScheduleKind::Constant { kappa_s } => kappa_s * t,
            ScheduleKind::Tabulated { dt, kappa_s, cum } => {
                let x = t / dt;
                let i = (x.floor() as usize).min(kappa_s.len() - 1);
                if i + 1 >= kappa_s.len() {
                    return cum[i];
                }
                let w = x - i as f64;
                // integral over the partial cell, trapezoid-consistent
                let kl = kappa_s[i];
                let kr = kappa_s[i] * (1.0 - w) + kappa_s[i + 1] * w;
                cum[i] + 0.5 * (kl + kr) * (w * dt)
            }
        }
    }

    /// Source norm remaining at time `t`: exp(−2∫κ_s).
    pub fn source_norm(&self, t: f64) -> f64 {
        (-2.0 * self.cumulative(t)).exp()
    }

    /// The field envelope this schedule emits: √(2κ_s(t))·exp(−∫κ_s), 1/√ns.
    pub fn emitted_envelope(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.t_end {
            return 0.0;
        }
        (2.0 * self.rate(t)).sqrt() * (-self.cumulative(t)).exp()
    }
}

/// Constant-rate schedule: `kappa_s` in MHz, emitting the falling exponential
/// f(t) = √(2κ_s)·e^{−κ_s t} over [0, t_end].
pub fn exponential_schedule(kappa_s: f64, t_end: f64) -> Result<Schedule> {
    if !(kappa_s > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exponential schedule needs kappa_s > 0 and t_end > 0, got ({kappa_s}, {t_end})"
        )));
    }
    Ok(Schedule {
        kind: ScheduleKind::Constant { kappa_s: ang(kappa_s) },
        t_end,
        cap: f64::INFINITY,
    })
}

/// Options for [`shaped_schedule`].
#[derive(Debug, Clone)]
pub struct ShapeOptions {
    /// Rate cap, MHz.
    pub cap: f64,
    /// Required norm headroom ε: the envelope must satisfy ∫|f|² ≤ 1 − ε.
    pub headroom: f64,
    /// Tabulation step, ns.
    pub grid_step: f64,
}

impl Default for ShapeOptions {
    fn default() -> Self {
        ShapeOptions {
            cap: DEFAULT_CAP_MHZ,
            headroom: DEFAULT_HEADROOM,
            grid_step: DEFAULT_GRID_STEP_NS,
        }
    }
}

/// Build the κ_s(t) schedule emitting the target real, non-negative envelope
/// `f` (amplitude, 1/√ns) over [0, t_end]. Errors if the envelope norm leaves
/// less than the configured headroom; rates are clipped at the cap, which
/// distorts the emitted envelope only where the cap engages.
pub fn shaped_schedule(
    f: impl Fn(f64) -> f64,
    t_end: f64,
    opts: &ShapeOptions,
) -> Result<Schedule> {
    if !(t_end > 0.0) || !(opts.grid_step > 0.0) || opts.grid_step > DEFAULT_GRID_STEP_NS + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "shaped schedule needs t_end > 0 and 0 < grid_step <= {DEFAULT_GRID_STEP_NS} ns"
        )));
    }
    let n = (t_end / opts.grid_step).ceil() as usize;
    let dt = t_end / n as f64;
    let f2: Vec<f64> = (0..=n)
        .map(|i| {
            let v = f(i as f64 * dt);
            v * v
        })
        .collect();

    // running norm by trapezoid
    let mut norm = vec![0.0; n + 1];
    for i in 1..=n {
        norm[i] = norm[i - 1] + 0.5 * (f2[i - 1] + f2[i]) * dt;
    }
    if norm[n] > 1.0 - opts.headroom {
        return Err(Error::EnvelopeNorm {
            norm: norm[n],
            headroom: opts.headroom,
        });
    }

    let cap = ang(opts.cap);
    let kappa_s: Vec<f64> = (0..=n)
        .map(|i| (f2[i] / (2.0 * (1.0 - norm[i]))).min(cap))
        .collect();
    let mut cum = vec![0.0; n + 1];
    for i in 1..=n {
        cum[i] = cum[i - 1] + 0.5 * (kappa_s[i - 1] + kappa_s[i]) * dt;
    }
    Ok(Schedule {
        kind: ScheduleKind::Tabulated { dt, kappa_s, cum },
        t_end,
        cap,
    })
}

/// Gaussian photon specification. `fwhm` is the full width at half maximum of
/// the *intensity* profile |f|² in ns; the amplitude envelope is then a
/// Gaussian of standard deviation σ_f = √2·σ_I. The emission window spans
/// ±3σ_f around the center, so the envelope is unit-normalized on the full
/// line and carries erf(3/√2) ≈ 0.9973 of the norm inside the window; the
/// missing tail never leaves the source cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    pub fwhm: f64,
}

impl GaussianPulse {
    /// Amplitude-profile standard deviation σ_f, ns.
    pub fn sigma_amplitude(&self) -> f64 {
        // σ_I = FWHM / (2√(2 ln 2)); σ_f = √2 σ_I
        let sigma_i = self.fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
        std::f64::consts::SQRT_2 * sigma_i
    }

    /// Pulse center, ns (3σ_f into the window).
    pub fn center(&self) -> f64 {
        3.0 * self.sigma_amplitude()
    }

    /// Emission window length, ns.
    pub fn window(&self) -> f64 {
        6.0 * self.sigma_amplitude()
    }

    /// The amplitude envelope, unit-normalized over the full line, 1/√ns.
    pub fn envelope(&self, t: f64) -> f64 {
        let s = self.sigma_amplitude();
        let x = (t - self.center()) / s;
        (-0.25 * x * x).exp() / (2.0 * std::f64::consts::PI * s * s).powf(0.25)
    }

    pub fn schedule(&self, opts: &ShapeOptions) -> Result<Schedule> {
        if !(self.fwhm > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gaussian fwhm must be > 0, got {}",
                self.fwhm
            )));
        }
        shaped_schedule(|t| self.envelope(t), self.window(), opts)
    }
}

/// Pulse specification as exposed to configuration: either the natural
/// exponential at a constant κ_s or a shaped Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseSpec {
    /// Constant κ_s (MHz) over a window of `decay_spans` source lifetimes
    /// 1/(2κ_s) (i.e. residual source norm e^{−decay_spans}).
    Exponential { kappa_s: f64, decay_spans: f64 },
    /// Gaussian with the given intensity FWHM (ns).
    Gaussian { fwhm: f64 },
}

impl PulseSpec {
    pub fn to_schedule(&self, opts: &ShapeOptions) -> Result<Schedule> {
        match *self {
            PulseSpec::Exponential { kappa_s, decay_spans } => {
                if !(decay_spans > 0.0) {
                    return Err(Error::InvalidParameter(
                        "decay_spans must be > 0".into(),
                    ));
                }
                let t_end = decay_spans / (2.0 * ang(kappa_s));
                exponential_schedule(kappa_s, t_end)
            }
            PulseSpec::Gaussian { fwhm } => GaussianPulse { fwhm }.schedule(opts),
        }
    }
}
