//! Result documents and tabular outputs. Every run emits one self-describing
//! TOML document (metadata + effective config + results) that parses back to
//! identical values, plus flat CSV/TSV files for plotting.

use crate::config::RunConfig;
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sprint_core::classify::{AtomFate, OutcomeTable, PhotonFate};
use sprint_core::dynamics::Trajectory;
use sprint_core::ensemble::{EnsembleSummary, OptimizedPoint, SweepPoint};
use sprint_core::scheme::LevelScheme;
use std::fmt::Write as _;
use std::path::Path;

/// Provenance block shared by all documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub params_hash: String,
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(command: &str, cfg: &RunConfig, seed: Option<u64>) -> Meta {
        Meta {
            tool: "sprint".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            params_hash: cfg.params_hash(),
            seed,
        }
    }
}

/// Joint outcome grid plus derived figures, layout matching the outcome
/// table: rows toggle / no-toggle / atom-lost, columns R / T / L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableBlock {
    pub p: Vec<Vec<f64>>,
    pub residual: f64,
    /// Marginals: [reflected, transmitted, lost].
    pub photon_totals: Vec<f64>,
    /// Marginals: [toggled, untoggled, lost].
    pub atom_totals: Vec<f64>,
    pub routing_fidelity: f64,
    pub toggle_given_reflection: f64,
}

impl TableBlock {
    pub fn from_table(t: &OutcomeTable) -> TableBlock {
        TableBlock {
            p: t.p.iter().map(|r| r.to_vec()).collect(),
            residual: t.residual,
            photon_totals: vec![
                t.photon_total(PhotonFate::Reflected),
                t.photon_total(PhotonFate::Transmitted),
                t.photon_total(PhotonFate::Lost),
            ],
            atom_totals: vec![
                t.atom_total(AtomFate::Toggled),
                t.atom_total(AtomFate::Untoggled),
                t.atom_total(AtomFate::Lost),
            ],
            routing_fidelity: t.routing_fidelity(),
            toggle_given_reflection: t.toggle_given_reflection(),
        }
    }
}

/// Ensemble result: mean table, per-cell 95% intervals, diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleBlock {
    pub n_draws: usize,
    pub mean_g: f64,
    pub max_defect: f64,
    #[serde(flatten)]
    pub table: TableBlock,
    pub interval_lo: Vec<Vec<f64>>,
    pub interval_hi: Vec<Vec<f64>>,
}

impl EnsembleBlock {
    pub fn from_summary(s: &EnsembleSummary) -> EnsembleBlock {
        EnsembleBlock {
            n_draws: s.n_draws,
            mean_g: s.mean_g,
            max_defect: s.max_defect,
            table: TableBlock::from_table(&s.table),
            interval_lo: s
                .intervals
                .iter()
                .map(|row| row.iter().map(|c| c.lo).collect())
                .collect(),
            interval_hi: s
                .intervals
                .iter()
                .map(|row| row.iter().map(|c| c.hi).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDocument {
    pub meta: Meta,
    pub config: RunConfig,
    pub result: EnsembleBlock,
}

/// Single-trajectory result: per-channel fluxes and the classified table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateBlock {
    pub t_end: f64,
    /// Flux per ground-state channel, scheme order, labeled below.
    pub ground_labels: Vec<String>,
    pub transmitted: Vec<f64>,
    pub reflected: Vec<f64>,
    pub intrinsic_loss: Vec<f64>,
    pub excited_labels: Vec<String>,
    pub spontaneous: Vec<f64>,
    pub residual: f64,
    pub conservation_defect: f64,
    pub steps: usize,
    pub rhs_evals: usize,
    #[serde(flatten)]
    pub table: TableBlock,
}

impl SimulateBlock {
    pub fn from_trajectory(traj: &Trajectory, scheme: &LevelScheme, table: &OutcomeTable) -> Self {
        SimulateBlock {
            t_end: traj.t_end,
            ground_labels: scheme.grounds.iter().map(|g| g.label().into()).collect(),
            transmitted: traj.flux_t.clone(),
            reflected: traj.flux_r.clone(),
            intrinsic_loss: traj.flux_li.clone(),
            excited_labels: scheme.excited.iter().map(|e| e.label().into()).collect(),
            spontaneous: traj.flux_sp.clone(),
            residual: traj.residual_norm,
            conservation_defect: traj.conservation_defect(),
            steps: traj.stats.steps,
            rhs_evals: traj.stats.rhs_evals,
            table: TableBlock::from_table(table),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateDocument {
    pub meta: Meta,
    pub config: RunConfig,
    pub result: SimulateBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    #[serde(flatten)]
    pub result: EnsembleBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub meta: Meta,
    pub config: RunConfig,
    pub axis: String,
    pub points: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeDocument {
    pub meta: Meta,
    pub config: RunConfig,
    pub seed_kappa_ex: f64,
    pub seed_delta_c: f64,
    pub kappa_ex: f64,
    pub delta_c: f64,
    pub objective: f64,
    pub evals: usize,
    pub converged: bool,
    pub result: EnsembleBlock,
}

impl SweepDocument {
    pub fn from_points(
        meta: Meta,
        config: RunConfig,
        axis: &str,
        points: &[SweepPoint],
    ) -> SweepDocument {
        SweepDocument {
            meta,
            config,
            axis: axis.into(),
            points: points
                .iter()
                .map(|p| SweepRow {
                    value: p.value,
                    result: EnsembleBlock::from_summary(&p.summary),
                })
                .collect(),
        }
    }
}

impl OptimizeDocument {
    pub fn new(
        meta: Meta,
        config: RunConfig,
        seed: (f64, f64),
        opt: &OptimizedPoint,
        at_optimum: &EnsembleSummary,
    ) -> OptimizeDocument {
        OptimizeDocument {
            meta,
            config,
            seed_kappa_ex: seed.0,
            seed_delta_c: seed.1,
            kappa_ex: opt.point.kappa_ex,
            delta_c: opt.point.delta_c,
            objective: opt.objective,
            evals: opt.evals,
            converged: opt.converged,
            result: EnsembleBlock::from_summary(at_optimum),
        }
    }
}

/// Serialize any document to TOML text.
pub fn to_toml<T: Serialize>(doc: &T) -> Result<String> {
    toml::to_string_pretty(doc).context("cannot serialize result document")
}

/// Parse a document back (round-trip check and downstream tooling).
pub fn from_toml<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).context("cannot parse result document")
}

/// 4×4 outcome grid in the joint-probability table layout: atomic fate rows
/// (toggle / no toggle / atom lost / total) × photonic fate columns
/// (reflected / transmitted / lost / total), probabilities.
pub fn outcome_csv(t: &OutcomeTable) -> String {
    let mut s = String::from("outcome,reflected,transmitted,lost,total\n");
    let rows = ["toggle", "no toggle", "atom lost"];
    for (name, row) in rows.iter().zip(&t.p) {
        let total: f64 = row.iter().sum();
        let _ = writeln!(s, "{name},{},{},{},{total}", row[0], row[1], row[2]);
    }
    let _ = writeln!(
        s,
        "total,{},{},{},{}",
        t.photon_total(PhotonFate::Reflected),
        t.photon_total(PhotonFate::Transmitted),
        t.photon_total(PhotonFate::Lost),
        t.total()
    );
    s
}

/// One sweep row per line: swept value, headline figures, marginals.
pub fn sweep_csv(axis: &str, points: &[SweepPoint]) -> String {
    let mut s = format!(
        "{axis},routing_fidelity,toggle_given_reflection,total_reflected,total_transmitted,total_lost,residual\n"
    );
    for p in points {
        let t = &p.summary.table;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            p.value,
            t.routing_fidelity(),
            t.toggle_given_reflection(),
            t.photon_total(PhotonFate::Reflected),
            t.photon_total(PhotonFate::Transmitted),
            t.photon_total(PhotonFate::Lost),
            t.residual
        );
    }
    s
}

/// Tab-separated trajectory trace: time, source rate, norm, instantaneous
/// channel rates, cumulative fluxes, then per-slot populations.
pub fn trace_tsv(traj: &Trajectory, scheme: &LevelScheme) -> String {
    let mut header = vec![
        "t".to_string(),
        "kappa_s".into(),
        "norm".into(),
        "rate_t".into(),
        "rate_r".into(),
        "rate_li".into(),
        "rate_sp".into(),
        "cum_t".into(),
        "cum_r".into(),
        "cum_li".into(),
        "cum_sp".into(),
    ];
    header.push("pop_src".into());
    for mode in ["a", "b"] {
        for g in &scheme.grounds {
            header.push(format!("pop_{mode}_{}", g.label()));
        }
    }
    for e in &scheme.excited {
        header.push(format!("pop_{}", e.label()));
    }
    let mut s = header.join("\t");
    s.push('\n');
    for p in &traj.trace {
        let mut cols = vec![
            p.t.to_string(),
            p.kappa_s.to_string(),
            p.norm.to_string(),
            p.rate_t.to_string(),
            p.rate_r.to_string(),
            p.rate_li.to_string(),
            p.rate_sp.to_string(),
            p.cum_t.to_string(),
            p.cum_r.to_string(),
            p.cum_li.to_string(),
            p.cum_sp.to_string(),
        ];
        cols.extend(p.populations.iter().map(|v| v.to_string()));
        s.push_str(&cols.join("\t"));
        s.push('\n');
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("cannot create directory {}", dir.display()))?;
        }
    }
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> OutcomeTable {
        let mut t = OutcomeTable::zero();
        t.p = [
            [0.3997, 0.0139, 0.1703],
            [0.0217, 0.0418, 0.3015],
            [0.0050, 0.0043, 0.0416],
        ];
        t.residual = 0.0002;
        t
    }

    #[test]
    fn csv_grid_shape_and_totals() {
        let csv = outcome_csv(&sample_table());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("outcome,"));
        let last: Vec<&str> = lines[4].split(',').collect();
        assert_eq!(last[0], "total");
        let r: f64 = last[1].parse().unwrap();
        assert!((r - 0.4264).abs() < 1e-12);
    }

    #[test]
    fn document_round_trip() {
        let cfg = RunConfig::default();
        let doc = EnsembleDocument {
            meta: Meta::new("ensemble", &cfg, Some(42)),
            config: cfg.clone(),
            result: EnsembleBlock {
                n_draws: 10,
                mean_g: 16.5,
                max_defect: 1.2e-12,
                table: TableBlock::from_table(&sample_table()),
                interval_lo: vec![vec![0.0; 3]; 3],
                interval_hi: vec![vec![1.0; 3]; 3],
            },
        };
        let text = to_toml(&doc).unwrap();
        let back: EnsembleDocument = from_toml(&text).unwrap();
        assert_eq!(doc, back);
    }
}
