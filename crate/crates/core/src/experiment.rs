//! Experiment harness: runs every (mode, seed) pair, writes per-round CSV
//! curves, an end-of-training summary, and cross-mode comparisons.
//!
//! All outputs are deterministic functions of the configuration, so a rerun
//! reproduces every artifact byte for byte.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;
use crate::federate::{run_training, FederateError, RoundReport, RunMode};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Federate(#[from] FederateError),
    #[error("experiment i/o on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("summary syntax: {0}")]
    SummarySyntax(#[from] toml::de::Error),
    #[error("summaries disagree on {what}; runs are not comparable")]
    MismatchedGrids { what: &'static str },
    #[error("comparison needs a federated run and at least one baseline")]
    MissingMode,
    #[error("mode {0} appears more than once")]
    DuplicateMode(RunMode),
}

fn io_err(path: &Path, source: std::io::Error) -> ExperimentError {
    ExperimentError::Io { path: path.display().to_string(), source }
}

/// Header of every per-run curve file.
pub const CSV_HEADER: &str =
    "round,step_span,system_throughput_bps,cum_reward,avg_energy_mj,avg_eff_bits_per_mj,c1,c3";

/// Canonical curve file name for one training run.
pub fn csv_file_name(mode: RunMode, transmitters: usize, seed: u64) -> String {
    format!("{mode}_n{transmitters}_seed{seed}.csv")
}

/// Renders round reports as a CSV document.
pub fn render_csv(reports: &[RoundReport]) -> String {
    let mut out = String::with_capacity(64 * (reports.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.round,
            r.step_span,
            r.system_throughput_bps,
            r.cum_reward,
            r.avg_energy_mj,
            r.avg_eff_bits_per_mj,
            r.c1,
            r.c3
        ));
    }
    out
}

/// End-of-training averages for one mode, across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: RunMode,
    pub throughput_bps_mean: f64,
    pub throughput_bps_std: f64,
    pub cum_reward_mean: f64,
    pub cum_reward_std: f64,
    pub energy_mj_mean: f64,
    pub energy_mj_std: f64,
    pub efficiency_mean: f64,
    pub efficiency_std: f64,
    /// Means scaled by the best mode's value, so the best mode reads 1.
    pub throughput_norm: f64,
    pub energy_norm: f64,
    pub efficiency_norm: f64,
}

/// Summary of a full experiment: the run grid plus per-mode averages over
/// the final rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub transmitters: usize,
    pub seeds: Vec<u64>,
    pub rounds: u32,
    pub final_k: usize,
    pub modes: Vec<ModeSummary>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Average of each metric over the final `k` rounds of one run.
struct FinalWindow {
    throughput: f64,
    cum_reward: f64,
    energy: f64,
    efficiency: f64,
}

fn final_window(reports: &[RoundReport], k: usize) -> FinalWindow {
    let k = k.min(reports.len()).max(1);
    let tail = &reports[reports.len() - k..];
    FinalWindow {
        throughput: mean(&tail.iter().map(|r| r.system_throughput_bps).collect::<Vec<_>>()),
        cum_reward: mean(&tail.iter().map(|r| r.cum_reward).collect::<Vec<_>>()),
        energy: mean(&tail.iter().map(|r| r.avg_energy_mj).collect::<Vec<_>>()),
        efficiency: mean(&tail.iter().map(|r| r.avg_eff_bits_per_mj).collect::<Vec<_>>()),
    }
}

/// Runs the whole configured grid and writes all artifacts under
/// `cfg.out_dir`. Returns the summary it wrote.
pub fn run_experiment(cfg: &RunConfig) -> Result<Summary, ExperimentError> {
    let out_dir = &cfg.out_dir;
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let ckpt_dir = out_dir.join("checkpoints");
    if cfg.federate.save_checkpoints {
        fs::create_dir_all(&ckpt_dir).map_err(|e| io_err(&ckpt_dir, e))?;
    }

    let mut mode_summaries = Vec::with_capacity(cfg.modes.len());
    for &mode in &cfg.modes {
        let mut windows = Vec::with_capacity(cfg.seeds.len());
        for &seed in &cfg.seeds {
            log::info!("training {mode} seed {seed}");
            let run = run_training(cfg, mode, seed, cfg.export_trace)?;

            let csv_path = out_dir.join(csv_file_name(mode, cfg.topology.transmitters, seed));
            fs::write(&csv_path, render_csv(&run.reports)).map_err(|e| io_err(&csv_path, e))?;

            if cfg.export_trace {
                let trace_path = out_dir.join(format!(
                    "trace_{mode}_n{}_seed{seed}.ndjson",
                    cfg.topology.transmitters
                ));
                let file = fs::File::create(&trace_path).map_err(|e| io_err(&trace_path, e))?;
                run.trace
                    .write_ndjson(std::io::BufWriter::new(file))
                    .map_err(|e| io_err(&trace_path, e))?;
            }
            if cfg.federate.save_checkpoints && mode == RunMode::FedDrl {
                let path = ckpt_dir.join(format!("{mode}_seed{seed}_final.ckpt"));
                run.final_model
                    .to_checkpoint()
                    .save(&path)
                    .map_err(|e| ExperimentError::Io {
                        path: path.display().to_string(),
                        source: std::io::Error::other(e.to_string()),
                    })?;
            }
            windows.push(final_window(&run.reports, cfg.final_k));
        }

        let tp: Vec<f64> = windows.iter().map(|w| w.throughput).collect();
        let cr: Vec<f64> = windows.iter().map(|w| w.cum_reward).collect();
        let en: Vec<f64> = windows.iter().map(|w| w.energy).collect();
        let ef: Vec<f64> = windows.iter().map(|w| w.efficiency).collect();
        mode_summaries.push(ModeSummary {
            mode,
            throughput_bps_mean: mean(&tp),
            throughput_bps_std: sample_std(&tp),
            cum_reward_mean: mean(&cr),
            cum_reward_std: sample_std(&cr),
            energy_mj_mean: mean(&en),
            energy_mj_std: sample_std(&en),
            efficiency_mean: mean(&ef),
            efficiency_std: sample_std(&ef),
            throughput_norm: 0.0,
            energy_norm: 0.0,
            efficiency_norm: 0.0,
        });
    }

    let norm = |best: f64, v: f64| if best > 0.0 { v / best } else { 0.0 };
    let best_tp = mode_summaries.iter().map(|m| m.throughput_bps_mean).fold(0.0, f64::max);
    let best_en = mode_summaries.iter().map(|m| m.energy_mj_mean).fold(0.0, f64::max);
    let best_ef = mode_summaries.iter().map(|m| m.efficiency_mean).fold(0.0, f64::max);
    for m in &mut mode_summaries {
        m.throughput_norm = norm(best_tp, m.throughput_bps_mean);
        m.energy_norm = norm(best_en, m.energy_mj_mean);
        m.efficiency_norm = norm(best_ef, m.efficiency_mean);
    }

    let summary = Summary {
        transmitters: cfg.topology.transmitters,
        seeds: cfg.seeds.clone(),
        rounds: cfg.federate.rounds,
        final_k: cfg.final_k,
        modes: mode_summaries,
    };
    let summary_path = out_dir.join("summary.toml");
    let text = toml::to_string_pretty(&summary).expect("summary serializes to TOML");
    fs::write(&summary_path, text).map_err(|e| io_err(&summary_path, e))?;
    Ok(summary)
}

/// Reads a summary written by [`run_experiment`].
pub fn load_summary(dir: &Path) -> Result<Summary, ExperimentError> {
    let path = dir.join("summary.toml");
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    Ok(toml::from_str(&text)?)
}

/// Relative change of the federated run against one baseline, per metric,
/// in percent. Positive means the federated value is larger.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricDeltas {
    pub baseline: RunMode,
    pub throughput_pct: f64,
    pub cum_reward_pct: f64,
    pub energy_pct: f64,
    pub efficiency_pct: f64,
}

/// Federated-versus-baseline comparison across one or more summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub transmitters: usize,
    pub vs_idrl: Option<MetricDeltas>,
    pub vs_ra: Option<MetricDeltas>,
}

fn pct(fed: f64, base: f64) -> f64 {
    (fed - base) / base.abs() * 100.0
}

fn deltas(fed: &ModeSummary, base: &ModeSummary) -> MetricDeltas {
    MetricDeltas {
        baseline: base.mode,
        throughput_pct: pct(fed.throughput_bps_mean, base.throughput_bps_mean),
        cum_reward_pct: pct(fed.cum_reward_mean, base.cum_reward_mean),
        energy_pct: pct(fed.energy_mj_mean, base.energy_mj_mean),
        efficiency_pct: pct(fed.efficiency_mean, base.efficiency_mean),
    }
}

/// Builds the comparison table from summaries that share one run grid.
/// Accepts either one summary holding all modes or several single-mode
/// summaries produced by separate invocations.
pub fn compare(summaries: &[Summary]) -> Result<ComparisonTable, ExperimentError> {
    let first = summaries.first().ok_or(ExperimentError::MissingMode)?;
    for s in &summaries[1..] {
        if s.transmitters != first.transmitters {
            return Err(ExperimentError::MismatchedGrids { what: "transmitters" });
        }
        if s.seeds != first.seeds {
            return Err(ExperimentError::MismatchedGrids { what: "seeds" });
        }
        if s.rounds != first.rounds {
            return Err(ExperimentError::MismatchedGrids { what: "rounds" });
        }
        if s.final_k != first.final_k {
            return Err(ExperimentError::MismatchedGrids { what: "final_k" });
        }
    }

    let mut fed = None;
    let mut idrl = None;
    let mut ra = None;
    for s in summaries {
        for m in &s.modes {
            let slot = match m.mode {
                RunMode::FedDrl => &mut fed,
                RunMode::Idrl => &mut idrl,
                RunMode::Ra => &mut ra,
            };
            if slot.is_some() {
                return Err(ExperimentError::DuplicateMode(m.mode));
            }
            *slot = Some(m.clone());
        }
    }
    let fed = fed.ok_or(ExperimentError::MissingMode)?;
    if idrl.is_none() && ra.is_none() {
        return Err(ExperimentError::MissingMode);
    }
    Ok(ComparisonTable {
        transmitters: first.transmitters,
        vs_idrl: idrl.map(|b| deltas(&fed, &b)),
        vs_ra: ra.map(|b| deltas(&fed, &b)),
    })
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "federated gains, {} transmitters:", self.transmitters)?;
        writeln!(
            f,
            "{:<10} {:>12} {:>12} {:>12} {:>12}",
            "baseline", "throughput", "cum_reward", "energy", "efficiency"
        )?;
        for d in [&self.vs_idrl, &self.vs_ra].into_iter().flatten() {
            writeln!(
                f,
                "{:<10} {:>11.2}% {:>11.2}% {:>11.2}% {:>11.2}%",
                d.baseline.to_string(),
                d.throughput_pct,
                d.cum_reward_pct,
                d.energy_pct,
                d.efficiency_pct
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(round: u32, tp: f64) -> RoundReport {
        RoundReport {
            round,
            step_span: 10,
            system_throughput_bps: tp,
            cum_reward: tp / 100.0,
            avg_energy_mj: 2.0,
            avg_eff_bits_per_mj: tp / 2.0,
            c1: round as u64,
            c3: 0,
        }
    }

    #[test]
    fn csv_header_and_rows_are_stable() {
        let reports = vec![report(1, 1000.0), report(2, 1500.0)];
        let csv = render_csv(&reports);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "round,step_span,system_throughput_bps,cum_reward,avg_energy_mj,avg_eff_bits_per_mj,c1,c3"
        );
        assert_eq!(lines.next().unwrap(), "1,10,1000,10,2,500,1,0");
        assert_eq!(lines.next().unwrap(), "2,10,1500,15,2,750,2,0");
        assert!(lines.next().is_none());
    }

    #[test]
    fn curve_file_names_encode_the_run() {
        assert_eq!(csv_file_name(RunMode::FedDrl, 12, 3), "feddrl_n12_seed3.csv");
        assert_eq!(csv_file_name(RunMode::Ra, 40, 1), "ra_n40_seed1.csv");
    }

    #[test]
    fn final_window_averages_last_rounds_only() {
        let reports: Vec<RoundReport> =
            (1..=10).map(|r| report(r, 100.0 * f64::from(r))).collect();
        let w = final_window(&reports, 3);
        assert_eq!(w.throughput, (800.0 + 900.0 + 1000.0) / 3.0);
        // Window longer than the run clamps to the run.
        let w = final_window(&reports[..2], 5);
        assert_eq!(w.throughput, 150.0);
    }

    fn mode_summary(mode: RunMode, tp: f64, en: f64, ef: f64) -> ModeSummary {
        ModeSummary {
            mode,
            throughput_bps_mean: tp,
            throughput_bps_std: 0.0,
            cum_reward_mean: tp / 10.0,
            cum_reward_std: 0.0,
            energy_mj_mean: en,
            energy_mj_std: 0.0,
            efficiency_mean: ef,
            efficiency_std: 0.0,
            throughput_norm: 0.0,
            energy_norm: 0.0,
            efficiency_norm: 0.0,
        }
    }

    fn grid(modes: Vec<ModeSummary>) -> Summary {
        Summary { transmitters: 12, seeds: vec![1, 2, 3], rounds: 20, final_k: 10, modes }
    }

    #[test]
    fn comparison_reports_percent_deltas() {
        let s = grid(vec![
            mode_summary(RunMode::FedDrl, 1120.0, 0.72, 2.6),
            mode_summary(RunMode::Idrl, 1000.0, 1.0, 2.0),
            mode_summary(RunMode::Ra, 800.0, 1.44, 1.3),
        ]);
        let table = compare(std::slice::from_ref(&s)).unwrap();
        let idrl = table.vs_idrl.as_ref().unwrap();
        assert!((idrl.throughput_pct - 12.0).abs() < 1e-9);
        assert!((idrl.energy_pct + 28.0).abs() < 1e-9);
        assert!((idrl.efficiency_pct - 30.0).abs() < 1e-9);
        let ra = table.vs_ra.as_ref().unwrap();
        assert!((ra.throughput_pct - 40.0).abs() < 1e-9);
        assert!((ra.energy_pct + 50.0).abs() < 1e-9);
        let text = table.to_string();
        assert!(text.contains("idrl"));
        assert!(text.contains('%'));
    }

    #[test]
    fn comparison_accepts_split_single_mode_summaries() {
        let a = grid(vec![mode_summary(RunMode::FedDrl, 1100.0, 0.8, 2.0)]);
        let b = grid(vec![mode_summary(RunMode::Idrl, 1000.0, 1.0, 1.8)]);
        let table = compare(&[a, b]).unwrap();
        assert!(table.vs_idrl.is_some());
        assert!(table.vs_ra.is_none());
    }

    #[test]
    fn comparison_rejects_mismatched_grids_and_missing_modes() {
        let a = grid(vec![mode_summary(RunMode::FedDrl, 1.0, 1.0, 1.0)]);
        let mut b = grid(vec![mode_summary(RunMode::Idrl, 1.0, 1.0, 1.0)]);
        b.seeds = vec![9];
        assert!(matches!(
            compare(&[a.clone(), b]),
            Err(ExperimentError::MismatchedGrids { what: "seeds" })
        ));
        assert!(matches!(compare(&[a.clone()]), Err(ExperimentError::MissingMode)));
        let only_base = grid(vec![mode_summary(RunMode::Ra, 1.0, 1.0, 1.0)]);
        assert!(matches!(compare(&[only_base]), Err(ExperimentError::MissingMode)));
        let dup = grid(vec![
            mode_summary(RunMode::FedDrl, 1.0, 1.0, 1.0),
            mode_summary(RunMode::FedDrl, 2.0, 1.0, 1.0),
        ]);
        assert!(matches!(compare(&[dup]), Err(ExperimentError::DuplicateMode(_))));
    }

    #[test]
    fn summary_round_trips_through_toml() {
        let mut s = grid(vec![
            mode_summary(RunMode::FedDrl, 1100.0, 0.8, 2.0),
            mode_summary(RunMode::Ra, 900.0, 1.2, 1.1),
        ]);
        s.modes[0].throughput_norm = 1.0;
        let text = toml::to_string_pretty(&s).unwrap();
        let back: Summary = toml::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
