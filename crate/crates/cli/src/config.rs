//! Sectioned TOML run configuration. Every key is optional and falls back to
//! the measured working point of the reference system; unknown keys are
//! rejected so typos can't silently revert a parameter to its default.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sprint_core::dynamics::IntegrateOptions;
use sprint_core::ensemble::{CouplingDistribution, EnsembleConfig};
use sprint_core::ode::OdeOptions;
use sprint_core::params::SystemParams;
use sprint_core::pulse::{
    PulseSpec, ShapeOptions, DEFAULT_CAP_MHZ, DEFAULT_GRID_STEP_NS, DEFAULT_HEADROOM,
};
use sprint_core::scheme::{Ground, SchemeKind};
use std::path::Path;

/// Physical rates and detunings (MHz, linear frequency; phases in radians).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub kappa_ex: f64,
    pub kappa_i: f64,
    pub delta_c: f64,
    pub g_mag: f64,
    pub g_phase: f64,
    pub g_prime_ratio: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    pub delta_a: f64,
    pub delta_a_prime: f64,
    pub h: f64,
    pub r_sigma: f64,
    pub r_pi: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        let p = SystemParams::default();
        SystemSection {
            kappa_ex: p.kappa_ex,
            kappa_i: p.kappa_i,
            delta_c: p.delta_c,
            g_mag: p.g_mag,
            g_phase: p.g_phase,
            g_prime_ratio: p.g_prime_ratio,
            gamma: p.gamma,
            gamma_prime: p.gamma_prime,
            delta_a: p.delta_a,
            delta_a_prime: p.delta_a_prime,
            h: p.h,
            r_sigma: p.r_sigma,
            r_pi: p.r_pi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    ThreeLevel,
    FourLevel,
    Rb87,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroundName {
    G1,
    G0,
    G2,
}

impl From<GroundName> for Ground {
    fn from(g: GroundName) -> Ground {
        match g {
            GroundName::G1 => Ground::G1,
            GroundName::G0 => Ground::G0,
            GroundName::G2 => Ground::G2,
        }
    }
}

/// Level-scheme selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    pub kind: SchemeName,
    /// Sign of the second-pathway coupling, four-level scheme only.
    pub s: i8,
    pub initial: GroundName,
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection {
            kind: SchemeName::Rb87,
            s: -1,
            initial: GroundName::G1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    Gaussian,
    Exponential,
}

/// Photon wave packet driving the resonator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub kind: PulseKind,
    /// Intensity FWHM of the Gaussian pulse (ns).
    pub fwhm: f64,
    /// Source decay rate of the exponential pulse (MHz).
    pub kappa_s: f64,
    /// Exponential window length in source lifetimes 1/(2κ_s).
    pub decay_spans: f64,
    /// Source-rate cap for shaped pulses (MHz).
    pub cap: f64,
    /// Required normalization headroom of shaped envelopes.
    pub headroom: f64,
    /// Tabulation step for shaped schedules (ns).
    pub grid_step: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        PulseSection {
            kind: PulseKind::Gaussian,
            fwhm: 53.0,
            kappa_s: 0.2,
            decay_spans: 12.0,
            cap: DEFAULT_CAP_MHZ,
            headroom: DEFAULT_HEADROOM,
            grid_step: DEFAULT_GRID_STEP_NS,
        }
    }
}

/// Monte-Carlo settings: draw count, RNG seed, coupling distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub n: usize,
    pub seed: u64,
    pub g_mean: f64,
    pub g_std: f64,
    pub g_min: f64,
    pub g_max: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            n: 10_000,
            seed: 1,
            g_mean: 16.0,
            g_std: 6.0,
            g_min: 7.0,
            g_max: 28.0,
        }
    }
}

/// Integrator tolerances and trajectory bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Post-pulse ring-down time (ns).
    pub tail: f64,
    /// Trace samples per trajectory (0 = no trace).
    pub n_samples: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let ode = OdeOptions::default();
        IntegratorSection {
            rel_tol: ode.rel_tol,
            abs_tol: ode.abs_tol,
            max_steps: ode.max_steps,
            tail: 400.0,
            n_samples: 0,
        }
    }
}

/// A complete, self-describing run configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemSection,
    pub scheme: SchemeSection,
    pub pulse: PulseSection,
    pub ensemble: EnsembleSection,
    pub integrator: IntegratorSection,
}

impl RunConfig {
    /// Parse from TOML text; missing keys fall back to the defaults, unknown
    /// keys are errors with the offending line in the message.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        RunConfig::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        self.system_params()
            .validate()
            .context("[system] section invalid")?;
        self.distribution()
            .validate()
            .context("[ensemble] section invalid")?;
        if self.scheme.kind == SchemeName::FourLevel && self.scheme.s.abs() != 1 {
            bail!("[scheme] s must be +1 or -1, got {}", self.scheme.s);
        }
        if self.scheme.kind != SchemeName::Rb87 && self.scheme.initial == GroundName::G0 {
            bail!("[scheme] initial G0 exists only in the full rb87 scheme");
        }
        if self.ensemble.n == 0 {
            bail!("[ensemble] n must be >= 1");
        }
        for (key, v) in [
            ("rel_tol", self.integrator.rel_tol),
            ("abs_tol", self.integrator.abs_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("[integrator] {key} must be > 0, got {v}");
            }
        }
        if !(self.integrator.tail >= 0.0) {
            bail!("[integrator] tail must be >= 0, got {}", self.integrator.tail);
        }
        match self.pulse.kind {
            PulseKind::Gaussian if !(self.pulse.fwhm > 0.0) => {
                bail!("[pulse] fwhm must be > 0, got {}", self.pulse.fwhm)
            }
            PulseKind::Exponential if !(self.pulse.kappa_s > 0.0) => {
                bail!("[pulse] kappa_s must be > 0, got {}", self.pulse.kappa_s)
            }
            _ => Ok(()),
        }
    }

    pub fn system_params(&self) -> SystemParams {
        let s = &self.system;
        SystemParams {
            kappa_ex: s.kappa_ex,
            kappa_i: s.kappa_i,
            delta_c: s.delta_c,
            g_mag: s.g_mag,
            g_phase: s.g_phase,
            g_prime_ratio: s.g_prime_ratio,
            gamma: s.gamma,
            gamma_prime: s.gamma_prime,
            delta_a: s.delta_a,
            delta_a_prime: s.delta_a_prime,
            h: s.h,
            r_sigma: s.r_sigma,
            r_pi: s.r_pi,
        }
    }

    pub fn scheme_kind(&self) -> SchemeKind {
        match self.scheme.kind {
            SchemeName::ThreeLevel => SchemeKind::ThreeLevel,
            SchemeName::FourLevel => SchemeKind::FourLevel { s: self.scheme.s },
            SchemeName::Rb87 => SchemeKind::Rb87,
        }
    }

    pub fn initial(&self) -> Ground {
        self.scheme.initial.into()
    }

    pub fn pulse_spec(&self) -> PulseSpec {
        match self.pulse.kind {
            PulseKind::Gaussian => PulseSpec::Gaussian {
                fwhm: self.pulse.fwhm,
            },
            PulseKind::Exponential => PulseSpec::Exponential {
                kappa_s: self.pulse.kappa_s,
                decay_spans: self.pulse.decay_spans,
            },
        }
    }

    pub fn shape_options(&self) -> ShapeOptions {
        ShapeOptions {
            cap: self.pulse.cap,
            headroom: self.pulse.headroom,
            grid_step: self.pulse.grid_step,
        }
    }

    pub fn integrate_options(&self) -> IntegrateOptions {
        IntegrateOptions {
            ode: OdeOptions {
                rel_tol: self.integrator.rel_tol,
                abs_tol: self.integrator.abs_tol,
                max_steps: self.integrator.max_steps,
            },
            n_samples: self.integrator.n_samples,
            tail: self.integrator.tail,
        }
    }

    pub fn distribution(&self) -> CouplingDistribution {
        CouplingDistribution {
            mean: self.ensemble.g_mean,
            std: self.ensemble.g_std,
            g_min: self.ensemble.g_min,
            g_max: self.ensemble.g_max,
        }
    }

    pub fn ensemble_config(&self) -> EnsembleConfig {
        EnsembleConfig {
            params: self.system_params(),
            scheme: self.scheme_kind(),
            initial: self.initial(),
            pulse: self.pulse_spec(),
            distribution: self.distribution(),
            n_draws: self.ensemble.n,
            seed: self.ensemble.seed,
            shape: self.shape_options(),
            integrate: self.integrate_options(),
        }
    }

    /// The effective (post-default) configuration as TOML — printed with
    /// every run so any result can be reproduced exactly.
    pub fn effective_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// FNV-1a hash of the effective configuration, used as a compact run tag.
    pub fn params_hash(&self) -> String {
        format!("fnv1a:{:016x}", fnv1a(self.effective_toml().as_bytes()))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
