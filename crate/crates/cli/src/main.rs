//! `sprint` — design calculations and single-excitation simulations of
//! single-photon Raman interaction in a fiber-coupled microresonator.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use sprint_cli::config::{GroundName, RunConfig};
use sprint_cli::report::{
    outcome_csv, sweep_csv, to_toml, trace_tsv, write_file, EnsembleBlock, EnsembleDocument,
    Meta, OptimizeDocument, SimulateBlock, SimulateDocument, SweepDocument,
};
use sprint_core::analytic::{
    critical_coupling, detuned_optimum_approx, detuned_optimum_exact, intrinsic_cooperativity,
    lambda_scatter, two_pathway_scatter, DesignPoint, ImpuritySpec, LambdaInput, SecondPathway,
};
use sprint_core::classify::classify;
use sprint_core::dynamics::integrate;
use sprint_core::ensemble::{
    optimize_ensemble, run_ensemble, sweep as run_sweep, SweepAxis,
};
use sprint_core::generator::build_generator;
use sprint_core::nelder::NelderMeadOptions;
use sprint_core::pulse::PulseSpec;
use sprint_core::scheme::{Ground, LevelScheme, SchemeKind};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sprint",
    version,
    about = "Single-photon Raman interaction: design equations and Monte-Carlo simulation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form steady-state design calculations
    Analytic {
        #[command(subcommand)]
        which: AnalyticCmd,
    },
    /// Integrate one trajectory at the configured coupling
    Simulate(SimulateArgs),
    /// Monte-Carlo ensemble over coupling randomness; joint outcome statistics
    Ensemble(EnsembleArgs),
    /// One ensemble per grid point of a swept parameter
    Sweep(SweepArgs),
    /// Tune (kappa_ex, delta_c) for maximal ensemble routing fidelity
    Optimize(OptimizeArgs),
}

#[derive(Subcommand)]
enum AnalyticCmd {
    /// Λ-system transmission and reflection
    ThreeLevel(ThreeLevelArgs),
    /// External coupling that nulls the Λ-system transmission
    Critical(CriticalArgs),
    /// Two-pathway (second excited level) transmission and reflection
    FourLevel(FourLevelArgs),
    /// Working point compensating a detuned second pathway
    Optimal(OptimalArgs),
}

#[derive(Args)]
struct ThreeLevelArgs {
    /// Coupling of the driven transition (MHz)
    #[arg(long, default_value_t = 16.0)]
    g: f64,
    /// Coupling of the toggling transition (MHz); defaults to --g
    #[arg(long)]
    g2: Option<f64>,
    #[arg(long, default_value_t = 30.0)]
    kex: f64,
    #[arg(long, default_value_t = 6.0)]
    ki: f64,
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    delta_c: f64,
    #[arg(long, default_value_t = 0.0)]
    delta_a: f64,
}

#[derive(Args)]
struct CriticalArgs {
    #[arg(long, default_value_t = 16.0)]
    g: f64,
    #[arg(long, default_value_t = 6.0)]
    ki: f64,
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
}

#[derive(Args)]
struct FourLevelArgs {
    /// Sign of the second-pathway coupling (+1 or -1)
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    s: i8,
    #[arg(long, default_value_t = 16.0)]
    g: f64,
    /// Second-pathway coupling (MHz); defaults to √(5/4)·g
    #[arg(long)]
    g_prime: Option<f64>,
    #[arg(long, default_value_t = 30.0)]
    kex: f64,
    #[arg(long, default_value_t = 6.0)]
    ki: f64,
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
    #[arg(long, default_value_t = 3.0)]
    gamma_prime: f64,
    #[arg(long, default_value_t = 0.0)]
    delta_c: f64,
    #[arg(long, default_value_t = 0.0)]
    delta_a: f64,
    #[arg(long, default_value_t = -72.0, allow_hyphen_values = true)]
    delta_a_prime: f64,
}

#[derive(Args)]
struct OptimalArgs {
    #[arg(long, default_value_t = 16.0)]
    g: f64,
    /// Second-pathway coupling (MHz); defaults to √(5/4)·g
    #[arg(long)]
    g_prime: Option<f64>,
    #[arg(long, default_value_t = 6.0)]
    ki: f64,
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
    #[arg(long, default_value_t = 3.0)]
    gamma_prime: f64,
    #[arg(long, default_value_t = -72.0, allow_hyphen_values = true)]
    delta_a_prime: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GroundArg {
    #[value(name = "G1", alias = "g1")]
    G1,
    #[value(name = "G0", alias = "g0")]
    G0,
    #[value(name = "G2", alias = "g2")]
    G2,
}

impl From<GroundArg> for GroundName {
    fn from(g: GroundArg) -> GroundName {
        match g {
            GroundArg::G1 => GroundName::G1,
            GroundArg::G0 => GroundName::G0,
            GroundArg::G2 => GroundName::G2,
        }
    }
}

#[derive(Args)]
struct CommonRunArgs {
    /// TOML configuration file; missing keys use the built-in defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override [ensemble] seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override [scheme] initial ground state
    #[arg(long, value_enum)]
    initial: Option<GroundArg>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    /// Write a tab-separated trajectory trace here
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Result document path (TOML)
    #[arg(long, default_value = "sprint-simulate.toml")]
    out: PathBuf,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    /// Override [ensemble] n
    #[arg(long)]
    n: Option<usize>,
    /// Output prefix: writes <prefix>.toml and <prefix>.csv
    #[arg(long, default_value = "sprint-ensemble")]
    out: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AxisArg {
    #[value(name = "kappa_ex")]
    KappaEx,
    #[value(name = "delta_c")]
    DeltaC,
    #[value(name = "g")]
    G,
    #[value(name = "pulse_fwhm")]
    PulseFwhm,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> SweepAxis {
        match a {
            AxisArg::KappaEx => SweepAxis::KappaEx,
            AxisArg::DeltaC => SweepAxis::DeltaC,
            AxisArg::G => SweepAxis::GMean,
            AxisArg::PulseFwhm => SweepAxis::PulseFwhm,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Explicit comma-separated grid values (overrides --from/--to/--points)
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long, default_value_t = 11)]
    points: usize,
    #[arg(long)]
    n: Option<usize>,
    /// Output prefix: writes <prefix>.toml and <prefix>.csv
    #[arg(long, default_value = "sprint-sweep")]
    out: String,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    #[arg(long)]
    n: Option<usize>,
    /// Simplex evaluation budget
    #[arg(long, default_value_t = 60)]
    max_evals: usize,
    /// Result document path (TOML)
    #[arg(long, default_value = "sprint-optimize.toml")]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error = {:?}", format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Analytic { which } => analytic(which),
        Command::Simulate(args) => simulate(args),
        Command::Ensemble(args) => ensemble(args),
        Command::Sweep(args) => sweep_cmd(args),
        Command::Optimize(args) => optimize_cmd(args),
    }
}

fn print_scatter(t: Complex64, r: Complex64) {
    let (tp, rp) = (t.norm_sqr(), r.norm_sqr());
    println!("  t = {:+.6} {:+.6}i   T = {:.6e}", t.re, t.im, tp);
    println!("  r = {:+.6} {:+.6}i   R = {:.6}", r.re, r.im, rp);
    println!("  routing fidelity R/(R+T) = {:.6}", rp / (rp + tp));
}

fn analytic(cmd: AnalyticCmd) -> Result<()> {
    match cmd {
        AnalyticCmd::ThreeLevel(a) => {
            let inp = LambdaInput {
                kappa_ex: a.kex,
                kappa_i: a.ki,
                delta_c: a.delta_c,
                g1: Complex64::new(a.g, 0.0),
                g2: Complex64::new(a.g2.unwrap_or(a.g), 0.0),
                gamma: a.gamma,
                delta_a: a.delta_a,
            };
            let s = lambda_scatter(&inp);
            println!("steady-state Λ-system scattering:");
            print_scatter(s.t, s.r);
        }
        AnalyticCmd::Critical(a) => {
            let ci = intrinsic_cooperativity(a.g, a.ki, a.gamma);
            let kex = critical_coupling(a.g, a.ki, a.gamma);
            let inp = LambdaInput {
                kappa_ex: kex,
                kappa_i: a.ki,
                delta_c: 0.0,
                g1: Complex64::new(a.g, 0.0),
                g2: Complex64::new(a.g, 0.0),
                gamma: a.gamma,
                delta_a: 0.0,
            };
            let s = lambda_scatter(&inp);
            println!(
                "critical coupling for g = {} MHz, kappa_i = {} MHz, gamma = {} MHz:",
                a.g, a.ki, a.gamma
            );
            println!("  C_i = {ci:.6}");
            println!("  kappa_ex = {kex:.6} MHz  ({:.2} MHz)", kex);
            println!(
                "  at this point: T = {:.3e}, R = {:.6} ({:.3})",
                s.transmission(),
                s.reflection(),
                s.reflection()
            );
        }
        AnalyticCmd::FourLevel(a) => {
            if a.s.abs() != 1 {
                bail!("--s must be +1 or -1, got {}", a.s);
            }
            let gp = a.g_prime.unwrap_or((5.0f64 / 4.0).sqrt() * a.g);
            let inp = LambdaInput {
                kappa_ex: a.kex,
                kappa_i: a.ki,
                delta_c: a.delta_c,
                g1: Complex64::new(a.g, 0.0),
                g2: Complex64::new(a.g, 0.0),
                gamma: a.gamma,
                delta_a: a.delta_a,
            };
            let second = SecondPathway {
                g1: Complex64::new(gp, 0.0),
                g2: Complex64::new(a.s as f64 * gp, 0.0),
                gamma: a.gamma_prime,
                delta_a: a.delta_a_prime,
            };
            let s = two_pathway_scatter(&inp, &second);
            println!(
                "two-pathway steady-state scattering (s = {:+}, g' = {gp:.4} MHz):",
                a.s
            );
            print_scatter(s.t, s.r);
        }
        AnalyticCmd::Optimal(a) => {
            let spec = ImpuritySpec {
                g: a.g,
                g_prime: a.g_prime.unwrap_or((5.0f64 / 4.0).sqrt() * a.g),
                kappa_i: a.ki,
                gamma: a.gamma,
                gamma_prime: a.gamma_prime,
                delta_a_prime: a.delta_a_prime,
            };
            let approx = detuned_optimum_approx(&spec);
            let exact = detuned_optimum_exact(&spec)?;
            let at = |p: DesignPoint| {
                let inp = LambdaInput {
                    kappa_ex: p.kappa_ex,
                    kappa_i: spec.kappa_i,
                    delta_c: p.delta_c,
                    g1: Complex64::new(spec.g, 0.0),
                    g2: Complex64::new(spec.g, 0.0),
                    gamma: spec.gamma,
                    delta_a: 0.0,
                };
                let second = SecondPathway {
                    g1: Complex64::new(spec.g_prime, 0.0),
                    g2: Complex64::new(-spec.g_prime, 0.0),
                    gamma: spec.gamma_prime,
                    delta_a: spec.delta_a_prime,
                };
                two_pathway_scatter(&inp, &second)
            };
            let sa = at(approx);
            let se = at(exact);
            println!("working point against a detuned second pathway:");
            println!(
                "  first-order: kappa_ex = {:.6} MHz, delta_c = {:.6} MHz  (T = {:.3e}, R = {:.6})",
                approx.kappa_ex,
                approx.delta_c,
                sa.transmission(),
                sa.reflection()
            );
            println!(
                "  exact:       kappa_ex = {:.6} MHz, delta_c = {:.6} MHz  (T = {:.3e}, R = {:.6})",
                exact.kappa_ex,
                exact.delta_c,
                se.transmission(),
                se.reflection()
            );
        }
    }
    Ok(())
}

fn load_config(common: &CommonRunArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.ensemble.seed = seed;
    }
    if let Some(initial) = common.initial {
        cfg.scheme.initial = initial.into();
        cfg.validate()?; // G0 is only valid for the full scheme
    }
    Ok(cfg)
}

fn build_scheme(kind: SchemeKind, p: &sprint_core::params::SystemParams, initial: Ground) -> LevelScheme {
    match kind {
        SchemeKind::ThreeLevel => LevelScheme::three_level(initial),
        SchemeKind::FourLevel { s } => LevelScheme::four_level(p, s, initial),
        SchemeKind::Rb87 => LevelScheme::rb87(p, initial),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let p = cfg.system_params();
    let scheme = build_scheme(cfg.scheme_kind(), &p, cfg.initial());
    let schedule = cfg.pulse_spec().to_schedule(&cfg.shape_options())?;
    let ks_ref = match cfg.pulse_spec() {
        PulseSpec::Exponential { kappa_s, .. } => kappa_s,
        PulseSpec::Gaussian { .. } => 1.0,
    };
    let gen = build_generator(&p, &scheme, ks_ref)?;
    let mut iopts = cfg.integrate_options();
    if args.trace.is_some() && iopts.n_samples == 0 {
        iopts.n_samples = 501;
    }
    let traj = integrate(&gen, &schedule, &iopts)?;
    let table = classify(&traj, &scheme);

    println!("single trajectory, g = {} MHz, phase = {} rad:", p.g_mag, p.g_phase);
    println!("{table}");
    println!(
        "conservation defect {:.2e} after {} steps",
        traj.conservation_defect(),
        traj.stats.steps
    );

    let doc = SimulateDocument {
        meta: Meta::new("simulate", &cfg, None),
        config: cfg.clone(),
        result: SimulateBlock::from_trajectory(&traj, &scheme, &table),
    };
    write_file(&args.out, &to_toml(&doc)?)?;
    println!("result document: {}", args.out.display());
    if let Some(tp) = &args.trace {
        write_file(tp, &trace_tsv(&traj, &scheme))?;
        println!("trace: {}", tp.display());
    }
    Ok(())
}

fn ensemble(args: EnsembleArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(n) = args.n {
        cfg.ensemble.n = n;
    }
    cfg.validate()?;
    let summary = run_ensemble(&cfg.ensemble_config())?;
    let block = EnsembleBlock::from_summary(&summary);

    println!(
        "ensemble: N = {}, seed = {}, initial {:?}, config {}",
        summary.n_draws,
        summary.seed,
        cfg.scheme.initial,
        cfg.params_hash()
    );
    println!("{}", summary.table);
    println!(
        "routing fidelity R/(R+T) = {:.4}   toggle|R = {:.4}   mean g = {:.3} MHz",
        summary.table.routing_fidelity(),
        summary.table.toggle_given_reflection(),
        summary.mean_g
    );

    let doc = EnsembleDocument {
        meta: Meta::new("ensemble", &cfg, Some(summary.seed)),
        config: cfg.clone(),
        result: block,
    };
    let toml_path = PathBuf::from(format!("{}.toml", args.out));
    let csv_path = PathBuf::from(format!("{}.csv", args.out));
    write_file(&toml_path, &to_toml(&doc)?)?;
    write_file(&csv_path, &outcome_csv(&summary.table))?;
    println!(
        "result document: {}   table csv: {}",
        toml_path.display(),
        csv_path.display()
    );
    Ok(())
}

fn parse_grid(args: &SweepArgs) -> Result<Vec<f64>> {
    if let Some(spec) = &args.grid {
        let vals: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse()).collect();
        return vals.context("cannot parse --grid values");
    }
    let (from, to) = match (args.from, args.to) {
        (Some(a), Some(b)) => (a, b),
        _ => bail!("either --grid or both --from and --to are required"),
    };
    if args.points < 2 {
        bail!("--points must be >= 2");
    }
    let n = args.points;
    Ok((0..n)
        .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
        .collect())
}

fn sweep_cmd(args: SweepArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(n) = args.n {
        cfg.ensemble.n = n;
    }
    cfg.validate()?;
    let grid = parse_grid(&args)?;
    let axis: SweepAxis = args.axis.into();
    let points = run_sweep(&cfg.ensemble_config(), axis, &grid)?;

    println!(
        "{:>12}  {:>9} {:>9} {:>9} {:>10} {:>10}",
        axis.label(),
        "R",
        "T",
        "L",
        "fidelity",
        "toggle|R"
    );
    for p in &points {
        let t = &p.summary.table;
        println!(
            "{:>12.4}  {:>9.4} {:>9.4} {:>9.4} {:>10.4} {:>10.4}",
            p.value,
            t.photon_total(sprint_core::classify::PhotonFate::Reflected),
            t.photon_total(sprint_core::classify::PhotonFate::Transmitted),
            t.photon_total(sprint_core::classify::PhotonFate::Lost),
            t.routing_fidelity(),
            t.toggle_given_reflection()
        );
    }

    let doc = SweepDocument::from_points(
        Meta::new("sweep", &cfg, Some(cfg.ensemble.seed)),
        cfg.clone(),
        axis.label(),
        &points,
    );
    let toml_path = PathBuf::from(format!("{}.toml", args.out));
    let csv_path = PathBuf::from(format!("{}.csv", args.out));
    write_file(&toml_path, &to_toml(&doc)?)?;
    write_file(&csv_path, &sweep_csv(axis.label(), &points))?;
    println!(
        "result document: {}   csv: {}",
        toml_path.display(),
        csv_path.display()
    );
    Ok(())
}

fn optimize_cmd(args: OptimizeArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(n) = args.n {
        cfg.ensemble.n = n;
    }
    cfg.validate()?;
    let ecfg = cfg.ensemble_config();
    let seed_point = detuned_optimum_approx(&ImpuritySpec::from(&ecfg.params));
    let opts = NelderMeadOptions {
        x_tol: 1e-2,
        f_tol: 1e-4,
        max_evals: args.max_evals,
        init_scale: 0.1,
        init_step: 1.0,
    };
    let opt = optimize_ensemble(&ecfg, &opts)?;

    let mut at_best = ecfg.clone();
    at_best.params.kappa_ex = opt.point.kappa_ex;
    at_best.params.delta_c = opt.point.delta_c;
    let summary = run_ensemble(&at_best)?;

    println!(
        "optimized working point after {} evaluations (converged: {}):",
        opt.evals, opt.converged
    );
    println!(
        "  kappa_ex = {:.4} MHz, delta_c = {:.4} MHz  (seeded from {:.4}, {:.4})",
        opt.point.kappa_ex, opt.point.delta_c, seed_point.kappa_ex, seed_point.delta_c
    );
    println!("{}", summary.table);
    println!(
        "routing fidelity R/(R+T) = {:.4}   toggle|R = {:.4}",
        summary.table.routing_fidelity(),
        summary.table.toggle_given_reflection()
    );

    let doc = OptimizeDocument::new(
        Meta::new("optimize", &cfg, Some(cfg.ensemble.seed)),
        cfg.clone(),
        (seed_point.kappa_ex, seed_point.delta_c),
        &opt,
        &summary,
    );
    write_file(&args.out, &to_toml(&doc)?)?;
    println!("result document: {}", args.out.display());
    Ok(())
}
