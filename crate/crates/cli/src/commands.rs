//! The `forward` and `invert` subcommands.

use std::path::Path;

use anyhow::Context;
use layerscat::global_min::irrs_with_workers;
use layerscat::rng::noise_stream;
use layerscat::{add_noise, irrs, phase_shifts, PhaseShiftSet, StabilityReport, Verdict};
use log::info;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::output::{fixed, join, tsv, write_atomic};

pub const FORWARD_TABLE: &str = "phase_shifts.tsv";
pub const FORWARD_JSON: &str = "phase_shifts.json";
pub const INDEX_TABLE: &str = "stability_indices.tsv";
pub const RECOVERED_TABLE: &str = "recovered.tsv";
pub const REPORT_JSON: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardOutput {
    pub schema_version: u32,
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub l_max: usize,
    pub sets: Vec<PhaseShiftSet>,
}

/// Phase shifts of the configured potential at every configured `k`.
pub fn cmd_forward(cfg: &RunConfig, out_dir: &Path) -> anyhow::Result<ForwardOutput> {
    let potential = cfg.true_potential().context("invalid potential")?;
    let sets = cfg
        .k
        .iter()
        .map(|&k| phase_shifts(&potential, k, cfg.l_max))
        .collect::<layerscat::Result<Vec<_>>>()?;

    let header: Vec<String> = std::iter::once("l".to_string())
        .chain(cfg.k.iter().map(|k| format!("k={k}")))
        .collect();
    let rows: Vec<Vec<String>> = (0..=cfg.l_max)
        .map(|l| {
            std::iter::once(l.to_string())
                .chain(sets.iter().map(|s| fixed(s.shifts[l], 5)))
                .collect()
        })
        .collect();
    let result = ForwardOutput {
        schema_version: SCHEMA_VERSION,
        breakpoints: potential.breakpoints().to_vec(),
        values: potential.values().to_vec(),
        l_max: cfg.l_max,
        sets,
    };
    write_atomic(&out_dir.join(FORWARD_TABLE), &tsv(&header, &rows))?;
    write_atomic(&out_dir.join(FORWARD_JSON), &to_json(&result)?)?;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionRun {
    pub k: f64,
    pub h: f64,
    pub report: StabilityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionOutput {
    pub schema_version: u32,
    pub seed: u64,
    pub merge_rule: String,
    pub config: RunConfig,
    pub runs: Vec<InversionRun>,
}

impl InversionOutput {
    /// Exhausted dominates unstable, which dominates stable.
    pub fn overall_verdict(&self) -> Verdict {
        let vs: Vec<Verdict> = self.runs.iter().map(|r| r.report.verdict).collect();
        if vs.contains(&Verdict::Exhausted) {
            Verdict::Exhausted
        } else if vs.contains(&Verdict::Unstable) {
            Verdict::Unstable
        } else {
            Verdict::Stable
        }
    }
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Stable => 0,
        Verdict::Unstable => 2,
        Verdict::Exhausted => 3,
    }
}

/// Synthetic data for `(k, h)`: exact shifts of the configured potential with
/// noise drawn from the stream labelled by `(seed, k, h)`.
pub fn synthesize(cfg: &RunConfig, k: f64, h: f64) -> anyhow::Result<PhaseShiftSet> {
    let potential = cfg.true_potential().context("invalid potential")?;
    let exact = phase_shifts(&potential, k, cfg.l_max)?;
    Ok(add_noise(&exact, h, &mut noise_stream(cfg.seed, k, h))?)
}

/// Runs IRRS for every `(k, h)` pair and writes the index table, the
/// recovered potentials and the full report.
pub fn cmd_invert(
    cfg: &RunConfig,
    out_dir: &Path,
    workers: Option<usize>,
) -> anyhow::Result<InversionOutput> {
    let params = cfg.irrs_params();
    let bx = cfg.admissible_box();
    let mut runs = Vec::new();
    for &k in &cfg.k {
        for &h in &cfg.noise_levels {
            let data = synthesize(cfg, k, h)?;
            info!("inverting k = {k}, h = {h}");
            let report = match workers {
                Some(w) => irrs_with_workers(&data, &bx, &params, w)?,
                None => irrs(&data, &bx, &params)?,
            };
            info!(
                "k = {k}, h = {h}: {} after {} iterations, D = {:.6}",
                report.verdict,
                report.iterations(),
                report.final_index()
            );
            runs.push(InversionRun { k, h, report });
        }
    }
    let result = InversionOutput {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        merge_rule: layerscat::global_min::MERGE_RULE.to_string(),
        config: cfg.clone(),
        runs,
    };
    write_atomic(&out_dir.join(INDEX_TABLE), &index_table(cfg, &result.runs))?;
    write_atomic(
        &out_dir.join(RECOVERED_TABLE),
        &recovered_table(&result.runs),
    )?;
    write_atomic(&out_dir.join(REPORT_JSON), &to_json(&result)?)?;
    Ok(result)
}

/// One row per `(k, iteration)`, one column of indices per noise level; runs
/// that stopped earlier leave `-`.
fn index_table(cfg: &RunConfig, runs: &[InversionRun]) -> String {
    let header: Vec<String> = ["k".to_string(), "iteration".to_string()]
        .into_iter()
        .chain(cfg.noise_levels.iter().map(|h| format!("h={h}")))
        .collect();
    let mut rows = Vec::new();
    for &k in &cfg.k {
        let of_k: Vec<&InversionRun> = runs.iter().filter(|r| r.k == k).collect();
        let depth = of_k
            .iter()
            .map(|r| r.report.iterations())
            .max()
            .unwrap_or(0);
        for it in 0..depth {
            let mut row = vec![format!("{k:.2}"), (it + 1).to_string()];
            for r in &of_k {
                row.push(
                    r.report
                        .indices
                        .get(it)
                        .map_or_else(|| "-".to_string(), |d| fixed(*d, 6)),
                );
            }
            rows.push(row);
        }
    }
    tsv(&header, &rows)
}

fn recovered_table(runs: &[InversionRun]) -> String {
    let header: Vec<String> = ["k", "h", "verdict", "rank", "phi", "radii", "values"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for r in runs {
        for (rank, m) in r.report.minimizing_set.iter().enumerate() {
            let p = layerscat::config_to_potential(&m.config);
            rows.push(vec![
                format!("{}", r.k),
                format!("{}", r.h),
                r.report.verdict.to_string(),
                (rank + 1).to_string(),
                format!("{:e}", m.phi),
                join(p.breakpoints()),
                join(p.values()),
            ]);
        }
    }
    tsv(&header, &rows)
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}
