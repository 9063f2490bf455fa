//! Monte-Carlo ensembles over the experimental randomness: per-run coupling
//! strength (truncated normal) and atomic azimuthal position (uniform
//! coupling phase). Draws run in parallel; every draw gets its own
//! counter-keyed RNG stream, and the reduction walks the draws in index
//! order, so results are bit-identical for a fixed seed no matter how many
//! threads are used.

use crate::analytic::{detuned_optimum_approx, DesignPoint, ImpuritySpec};
use crate::classify::{classify, OutcomeTable};
use crate::dynamics::{integrate, IntegrateOptions};
use crate::error::{Error, Result};
use crate::generator::build_generator;
use crate::nelder::{minimize, MinimumFound, NelderMeadOptions};
use crate::params::SystemParams;
use crate::pulse::{PulseSpec, Schedule, ShapeOptions};
use crate::scheme::{Ground, LevelScheme, SchemeKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

/// Truncated-normal distribution of the coupling magnitude (MHz), plus a
/// uniform phase on [0, 2π) sampled alongside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingDistribution {
    pub mean: f64,
    pub std: f64,
    pub g_min: f64,
    pub g_max: f64,
}

impl CouplingDistribution {
    /// Truncation at 1.5σ below and 2σ above the mean — the detectable and
    /// available extremes of the coupling. For (ḡ, σ) = (16, 6) MHz this
    /// gives [7, 28] MHz.
    pub fn with_default_truncation(mean: f64, std: f64) -> CouplingDistribution {
        CouplingDistribution {
            mean,
            std,
            g_min: mean - 1.5 * std,
            g_max: mean + 2.0 * std,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.mean > 0.0) {
            return bad(format!("coupling mean must be > 0, got {}", self.mean));
        }
        if !(self.std >= 0.0) {
            return bad(format!("coupling std must be >= 0, got {}", self.std));
        }
        if !(self.g_min >= 0.0 && self.g_min < self.g_max) {
            return bad(format!(
                "need 0 <= g_min < g_max, got [{}, {}]",
                self.g_min, self.g_max
            ));
        }
        if self.std == 0.0 && !(self.g_min <= self.mean && self.mean <= self.g_max) {
            return bad(format!(
                "zero-width distribution needs mean inside [{}, {}], got {}",
                self.g_min, self.g_max, self.mean
            ));
        }
        Ok(())
    }
}

/// The RNG stream of one draw: a ChaCha8 generator keyed by the master seed
/// with the draw index as the stream counter, so draws are independent and
/// reproducible regardless of evaluation order.
pub fn draw_rng(master_seed: u64, draw_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(draw_index);
    rng
}

/// Draw one (magnitude, phase) coupling sample: rejection sampling of the
/// normal magnitude until it lands inside [g_min, g_max] — consuming the
/// magnitude samples first — then one uniform phase in [0, 2π).
pub fn sample_coupling(dist: &CouplingDistribution, rng: &mut impl Rng) -> (f64, f64) {
    let mag = if dist.std == 0.0 {
        dist.mean
    } else {
        let normal = Normal::new(dist.mean, dist.std).expect("validated distribution");
        loop {
            let g = normal.sample(rng);
            if (dist.g_min..=dist.g_max).contains(&g) {
                break g;
            }
        }
    };
    let phase = rng.gen::<f64>() * std::f64::consts::TAU;
    (mag, phase)
}

/// Everything needed to run one ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    /// Parameter template; `g_mag` and `g_phase` are overwritten per draw.
    pub params: SystemParams,
    pub scheme: SchemeKind,
    pub initial: Ground,
    pub pulse: PulseSpec,
    pub distribution: CouplingDistribution,
    pub n_draws: usize,
    pub seed: u64,
    pub shape: ShapeOptions,
    pub integrate: IntegrateOptions,
}

impl EnsembleConfig {
    /// The measured working point: full level scheme, 53 ns Gaussian photon,
    /// coupling spread (16 ± 6) MHz truncated to [7, 28] MHz, and enough
    /// post-pulse time for the resonator and atom to ring down.
    pub fn defaults(initial: Ground) -> EnsembleConfig {
        EnsembleConfig {
            params: SystemParams::default(),
            scheme: SchemeKind::Rb87,
            initial,
            pulse: PulseSpec::Gaussian { fwhm: 53.0 },
            distribution: CouplingDistribution::with_default_truncation(16.0, 6.0),
            n_draws: 10_000,
            seed: 1,
            shape: ShapeOptions::default(),
            integrate: IntegrateOptions {
                tail: 400.0,
                ..IntegrateOptions::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.distribution.validate()?;
        if self.n_draws == 0 {
            return Err(Error::InvalidParameter("n_draws must be >= 1".into()));
        }
        Ok(())
    }

    fn scheme_for(&self, p: &SystemParams) -> LevelScheme {
        match self.scheme {
            SchemeKind::ThreeLevel => LevelScheme::three_level(self.initial),
            SchemeKind::FourLevel { s } => LevelScheme::four_level(p, s, self.initial),
            SchemeKind::Rb87 => LevelScheme::rb87(p, self.initial),
        }
    }
}

/// Two-sided 95% normal quantile used for the confidence intervals.
pub const Z_95: f64 = 1.96;

/// Wilson score interval for a proportion estimated as `p_hat` from `n`
/// samples. Conservative for means of per-draw probabilities in [0, 1],
/// whose variance is bounded by the Bernoulli variance.
pub fn wilson_interval(p_hat: f64, n: usize, z: f64) -> (f64, f64) {
    let n = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Per-cell 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
}

/// Ensemble-averaged outcome statistics.
#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    /// Mean outcome table over all draws (residual included).
    pub table: OutcomeTable,
    /// Wilson intervals for the nine cells, same layout as the table.
    pub intervals: [[ConfidenceInterval; 3]; 3],
    pub n_draws: usize,
    pub seed: u64,
    /// Empirical mean of the sampled coupling magnitudes (MHz).
    pub mean_g: f64,
    /// Worst per-draw conservation defect — integrator error diagnostic.
    pub max_defect: f64,
}

struct DrawOutput {
    table: OutcomeTable,
    g_mag: f64,
    defect: f64,
}

fn run_draw(cfg: &EnsembleConfig, schedule: &Schedule, index: u64) -> Result<DrawOutput> {
    let mut rng = draw_rng(cfg.seed, index);
    let (g_mag, g_phase) = sample_coupling(&cfg.distribution, &mut rng);
    let mut p = cfg.params.clone();
    p.g_mag = g_mag;
    p.g_phase = g_phase;
    let scheme = cfg.scheme_for(&p);
    // the generator's reference source rate only matters for constant-rate
    // propagation; integration reads κ_s(t) from the schedule
    let gen = build_generator(&p, &scheme, 1.0)?;
    let traj = integrate(&gen, schedule, &cfg.integrate)?;
    let defect = traj.conservation_defect();
    if defect > 1e-6 {
        return Err(Error::Integration(format!(
            "draw {index} (seed {}, stream {index}): conservation defect {defect:.3e}",
            cfg.seed
        )));
    }
    Ok(DrawOutput {
        table: classify(&traj, &scheme),
        g_mag,
        defect,
    })
}

/// Run `cfg.n_draws` independent draws and average their outcome tables.
///
/// Draws are integrated in parallel, but each uses its own RNG stream and the
/// averages are accumulated strictly in draw order, so the result is
/// bit-identical for a fixed seed whatever the thread count.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleSummary> {
    cfg.validate()?;
    let schedule = cfg.pulse.to_schedule(&cfg.shape)?;
    let results: Vec<Result<DrawOutput>> = (0..cfg.n_draws as u64)
        .into_par_iter()
        .map(|i| run_draw(cfg, &schedule, i))
        .collect();

    let w = 1.0 / cfg.n_draws as f64;
    let mut table = OutcomeTable::zero();
    let mut mean_g = 0.0;
    let mut max_defect: f64 = 0.0;
    for r in results {
        let d = r?;
        table.accumulate(&d.table, w);
        mean_g += w * d.g_mag;
        max_defect = max_defect.max(d.defect);
    }

    let mut intervals =
        [[ConfidenceInterval { lo: 0.0, hi: 0.0 }; 3]; 3];
    for (r, row) in table.p.iter().enumerate() {
        for (c, &p_hat) in row.iter().enumerate() {
            let (lo, hi) = wilson_interval(p_hat, cfg.n_draws, Z_95);
            intervals[r][c] = ConfidenceInterval { lo, hi };
        }
    }

    Ok(EnsembleSummary {
        table,
        intervals,
        n_draws: cfg.n_draws,
        seed: cfg.seed,
        mean_g,
        max_defect,
    })
}

/// Sweepable scalar parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    KappaEx,
    DeltaC,
    GMean,
    PulseFwhm,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::KappaEx => "kappa_ex",
            SweepAxis::DeltaC => "delta_c",
            SweepAxis::GMean => "g_mean",
            SweepAxis::PulseFwhm => "pulse_fwhm",
        }
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub summary: EnsembleSummary,
}

/// Run one ensemble per grid value of `axis`, holding the seed (and with it
/// every draw's coupling sample) fixed across points so curves are smooth in
/// the swept parameter. Sweeping the mean coupling shifts the truncation
/// bounds along with it; sweeping the pulse width requires a Gaussian pulse.
pub fn sweep(cfg: &EnsembleConfig, axis: SweepAxis, grid: &[f64]) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for &value in grid {
        let mut c = cfg.clone();
        match axis {
            SweepAxis::KappaEx => c.params.kappa_ex = value,
            SweepAxis::DeltaC => c.params.delta_c = value,
            SweepAxis::GMean => {
                let shift = value - c.distribution.mean;
                c.distribution.mean = value;
                c.distribution.g_min += shift;
                c.distribution.g_max += shift;
            }
            SweepAxis::PulseFwhm => match c.pulse {
                PulseSpec::Gaussian { .. } => c.pulse = PulseSpec::Gaussian { fwhm: value },
                _ => {
                    return Err(Error::InvalidParameter(
                        "pulse_fwhm sweep needs a Gaussian pulse".into(),
                    ))
                }
            },
        }
        points.push(SweepPoint {
            value,
            summary: run_ensemble(&c)?,
        });
    }
    Ok(points)
}

/// Result of a working-point optimization.
#[derive(Debug, Clone)]
pub struct OptimizedPoint {
    pub point: DesignPoint,
    pub objective: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimize an objective over the (κ_ex, δ_C) plane with the simplex method.
/// Non-physical κ_ex ≤ 0 is rejected with an infinite objective.
pub fn optimize_working_point(
    mut objective: impl FnMut(DesignPoint) -> f64,
    seed_point: DesignPoint,
    opts: &NelderMeadOptions,
) -> OptimizedPoint {
    let wrapped = |x: &[f64]| {
        if x[0] <= 0.0 {
            return f64::INFINITY;
        }
        objective(DesignPoint {
            kappa_ex: x[0],
            delta_c: x[1],
        })
    };
    let MinimumFound {
        x,
        f,
        evals,
        converged,
    } = minimize(wrapped, &[seed_point.kappa_ex, seed_point.delta_c], opts);
    OptimizedPoint {
        point: DesignPoint {
            kappa_ex: x[0],
            delta_c: x[1],
        },
        objective: f,
        evals,
        converged,
    }
}

/// Tune (κ_ex, δ_C) to maximize the ensemble routing fidelity R/(R+T),
/// seeded from the light-shift-compensating working point of the parameter
/// template. Deterministic: every objective evaluation reruns the ensemble
/// with the same seed.
pub fn optimize_ensemble(
    cfg: &EnsembleConfig,
    opts: &NelderMeadOptions,
) -> Result<OptimizedPoint> {
    cfg.validate()?;
    let seed_point = detuned_optimum_approx(&ImpuritySpec::from(&cfg.params));
    let objective = |p: DesignPoint| {
        let mut c = cfg.clone();
        c.params.kappa_ex = p.kappa_ex;
        c.params.delta_c = p.delta_c;
        match run_ensemble(&c) {
            Ok(s) => 1.0 - s.table.routing_fidelity(),
            Err(_) => f64::INFINITY,
        }
    };
    Ok(optimize_working_point(objective, seed_point, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{
        detuned_optimum_exact, impurity_t_amplitude, lambda_scatter, LambdaInput,
    };
    use crate::classify::classify;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn distribution_validation() {
        let d = CouplingDistribution::with_default_truncation(16.0, 6.0);
        assert_relative_eq!(d.g_min, 7.0);
        assert_relative_eq!(d.g_max, 28.0);
        d.validate().unwrap();

        let mut bad = d;
        bad.g_min = 30.0;
        assert!(bad.validate().is_err());
        let mut bad = d;
        bad.std = -1.0;
        assert!(bad.validate().is_err());
        // zero-width distribution must sit inside its own bounds
        let bad = CouplingDistribution {
            mean: 40.0,
            std: 0.0,
            g_min: 7.0,
            g_max: 28.0,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sampling_respects_bounds_and_mean() {
        let d = CouplingDistribution::with_default_truncation(16.0, 6.0);
        let mut rng = draw_rng(42, 0);
        let n = 10_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let (g, phase) = sample_coupling(&d, &mut rng);
            assert!((d.g_min..=d.g_max).contains(&g));
            assert!((0.0..std::f64::consts::TAU).contains(&phase));
            sum += g;
        }
        // truncated-normal mean 16.497736, std 4.878586: 3σ/√n ≈ 0.146
        assert!((sum / n as f64 - 16.497735652611116).abs() < 0.15);
    }

    #[test]
    fn zero_width_distribution_is_deterministic() {
        let d = CouplingDistribution {
            mean: 16.0,
            std: 0.0,
            g_min: 7.0,
            g_max: 28.0,
        };
        let mut rng = draw_rng(1, 3);
        for _ in 0..100 {
            assert_eq!(sample_coupling(&d, &mut rng).0, 16.0);
        }
    }

    #[test]
    fn draw_streams_are_reproducible_and_distinct() {
        let d = CouplingDistribution::with_default_truncation(16.0, 6.0);
        let a = sample_coupling(&d, &mut draw_rng(9, 5));
        let b = sample_coupling(&d, &mut draw_rng(9, 5));
        let c = sample_coupling(&d, &mut draw_rng(9, 6));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn wilson_interval_values_and_scaling() {
        let (lo, hi) = wilson_interval(0.3, 100, Z_95);
        // hand-computed Wilson score bounds for p̂ = 0.3, n = 100, z = 1.96
        assert_relative_eq!(lo, 0.21894753866228117, epsilon = 1e-12);
        assert_relative_eq!(hi, 0.39585038432811953, epsilon = 1e-12);
        // zero successes still give a nonzero upper bound, floor at 0
        let (lo0, hi0) = wilson_interval(0.0, 50, Z_95);
        assert_eq!(lo0, 0.0);
        assert!(hi0 > 0.0 && hi0 < 0.1);
        // width shrinks like 1/√n
        let w = |n| {
            let (l, h) = wilson_interval(0.3, n, Z_95);
            h - l
        };
        assert_relative_eq!(w(100) / w(10_000), 10.0, max_relative = 0.02);
    }

    fn small_cfg() -> EnsembleConfig {
        let mut cfg = EnsembleConfig::defaults(Ground::G1);
        cfg.n_draws = 6;
        cfg.seed = 123;
        cfg.integrate.tail = 300.0;
        cfg
    }

    #[test]
    fn ensemble_deterministic_across_thread_counts() {
        let cfg = small_cfg();
        let run_with = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_ensemble(&cfg).unwrap())
        };
        let one = run_with(1);
        let three = run_with(3);
        assert_eq!(one.table.p, three.table.p);
        assert_eq!(one.table.residual, three.table.residual);
        assert_eq!(one.mean_g, three.mean_g);
    }

    #[test]
    fn zero_impurity_single_draw_matches_four_level() {
        let mut cfg = EnsembleConfig::defaults(Ground::G1);
        cfg.n_draws = 1;
        cfg.seed = 77;
        cfg.params.r_sigma = 0.0;
        cfg.params.r_pi = 0.0;
        cfg.params.h = 0.0;
        cfg.distribution = CouplingDistribution {
            mean: 16.0,
            std: 0.0,
            g_min: 7.0,
            g_max: 28.0,
        };
        let summary = run_ensemble(&cfg).unwrap();

        // replay the single draw's coupling sample on the reduced scheme
        let (g_mag, g_phase) = sample_coupling(&cfg.distribution, &mut draw_rng(cfg.seed, 0));
        let mut p = cfg.params.clone();
        p.g_mag = g_mag;
        p.g_phase = g_phase;
        let scheme = LevelScheme::four_level(&p, -1, Ground::G1);
        let gen = build_generator(&p, &scheme, 1.0).unwrap();
        let schedule = cfg.pulse.to_schedule(&cfg.shape).unwrap();
        let traj = integrate(&gen, &schedule, &cfg.integrate).unwrap();
        let table = classify(&traj, &scheme);

        for r in 0..3 {
            for c in 0..3 {
                assert!(
                    (summary.table.p[r][c] - table.p[r][c]).abs() < 1e-9,
                    "cell ({r},{c}): {} vs {}",
                    summary.table.p[r][c],
                    table.p[r][c]
                );
            }
        }
    }

    #[test]
    fn single_point_sweep_matches_run_ensemble() {
        let cfg = small_cfg();
        let direct = run_ensemble(&cfg).unwrap();
        let pts = sweep(&cfg, SweepAxis::DeltaC, &[cfg.params.delta_c]).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].summary.table.p, direct.table.p);
        assert!(sweep(&cfg, SweepAxis::DeltaC, &[]).is_err());
    }

    #[test]
    fn fwhm_sweep_requires_gaussian() {
        let mut cfg = small_cfg();
        cfg.pulse = PulseSpec::Exponential {
            kappa_s: 0.2,
            decay_spans: 8.0,
        };
        assert!(sweep(&cfg, SweepAxis::PulseFwhm, &[50.0]).is_err());
    }

    #[test]
    fn optimizer_finds_critical_coupling_of_lambda_objective() {
        // symmetric resonant Λ system: |t|² is nulled at the critical point
        let objective = |p: DesignPoint| {
            let inp = LambdaInput {
                kappa_ex: p.kappa_ex,
                kappa_i: 6.0,
                delta_c: p.delta_c,
                g1: Complex64::new(16.0, 0.0),
                g2: Complex64::new(16.0, 0.0),
                gamma: 3.0,
                delta_a: 0.0,
            };
            lambda_scatter(&inp).transmission()
        };
        let seed = DesignPoint {
            kappa_ex: 20.0,
            delta_c: 3.0,
        };
        let r = optimize_working_point(objective, seed, &NelderMeadOptions::default());
        assert!(r.converged);
        assert!((r.point.kappa_ex - 32.557641192199413).abs() < 1e-3);
        assert!(r.point.delta_c.abs() < 1e-3);
        assert!(r.objective < 1e-12);
    }

    #[test]
    fn optimizer_matches_exact_detuned_point() {
        let spec = ImpuritySpec {
            g: 16.0,
            g_prime: (5.0f64 / 4.0).sqrt() * 16.0,
            kappa_i: 6.0,
            gamma: 3.0,
            gamma_prime: 3.0,
            delta_a_prime: -72.0,
        };
        let objective = |p: DesignPoint| impurity_t_amplitude(p, &spec).norm_sqr();
        let r = optimize_working_point(
            objective,
            detuned_optimum_approx(&spec),
            &NelderMeadOptions::default(),
        );
        let exact = detuned_optimum_exact(&spec).unwrap();
        assert!((r.point.kappa_ex - exact.kappa_ex).abs() < 1e-4);
        assert!((r.point.delta_c - exact.delta_c).abs() < 1e-4);
    }
}
