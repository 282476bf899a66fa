//! Iterative Reduced Random Search (IRRS) with the stability-index stop.
//!
//! Every iteration draws a uniform batch from the admissible box, keeps the
//! best `gamma L` points, polishes each with [`lmm`], and selects the
//! `nu gamma L` best minimizers found so far as the minimizing set. The
//! diameter of that set in potential space, normalized by the mean norm of
//! the first iteration's minimizers, is the stability index.

use log::warn;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::PhaseShiftSet;
use crate::local_min::{lmm, PowellSpec};
use crate::objective::{
    config_to_potential, potential_distance, potential_norm, AdmissibleBox, Configuration,
    ScatteringObjective,
};
use crate::rng::substream;

pub use crate::local_min::MinimizerRecord;

/// How the previous iteration's minimizers enter the next selection.
pub const MERGE_RULE: &str = "previous-minimizing-set";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrrsParams {
    /// Batch size `L`.
    pub batch_size: usize,
    /// Fraction `gamma` of each batch handed to local minimization.
    pub gamma: f64,
    /// Fraction `nu` of the minimizers forming the minimizing set.
    pub nu: f64,
    /// Stability threshold `epsilon`.
    pub epsilon: f64,
    /// Flatness factor `beta`.
    pub beta: f64,
    pub j_max: usize,
    /// Relative threshold of the layer reduction.
    pub eps_r: f64,
    pub seed: u64,
}

impl IrrsParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// `floor(gamma L)`.
    pub fn reduced_count(&self) -> usize {
        (self.gamma * self.batch_size as f64 + 1e-9).floor() as usize
    }

    /// `floor(nu gamma L)`.
    pub fn minimizing_set_size(&self) -> usize {
        (self.nu * self.gamma * self.batch_size as f64 + 1e-9).floor() as usize
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            v.push(format!(
                "gamma must satisfy 0 < gamma < 1 (got {})",
                self.gamma
            ));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            v.push(format!("nu must satisfy 0 < nu < 1 (got {})", self.nu));
        }
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            v.push(format!("beta must be > 1 (got {})", self.beta));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            v.push(format!("epsilon must be > 0 (got {})", self.epsilon));
        }
        if !(self.eps_r > 0.0) || !self.eps_r.is_finite() {
            v.push(format!("eps_r must be > 0 (got {})", self.eps_r));
        }
        if self.j_max < 1 {
            v.push("j_max must be >= 1".to_string());
        }
        if self.reduced_count() < 1 {
            v.push(format!(
                "gamma * L must be >= 1 (got {} * {})",
                self.gamma, self.batch_size
            ));
        }
        if self.minimizing_set_size() < 1 {
            v.push(format!(
                "nu * gamma * L must be >= 1 (got {} * {} * {})",
                self.nu, self.gamma, self.batch_size
            ));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }
}

impl Default for IrrsParams {
    fn default() -> Self {
        Self {
            batch_size: 5000,
            gamma: 0.01,
            nu: 0.16,
            epsilon: 0.02,
            beta: 1.1,
            j_max: 30,
            eps_r: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Exhausted,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Exhausted => "exhausted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Stability index after each iteration.
    pub indices: Vec<f64>,
    /// Smallest objective value in the minimizing set after each iteration.
    pub best_phi: Vec<f64>,
    pub verdict: Verdict,
    pub best: MinimizerRecord,
    pub minimizing_set: Vec<MinimizerRecord>,
    pub d_av: f64,
    /// Local minimizations discarded because the objective was not finite.
    pub failed_starts: usize,
    pub merge_rule: String,
}

impl StabilityReport {
    pub fn iterations(&self) -> usize {
        self.indices.len()
    }

    pub fn final_index(&self) -> f64 {
        *self.indices.last().expect("at least one iteration")
    }
}

/// `count` uniform points of the box with `max_layers` layers each; radii
/// are drawn first, then values, and the radii sorted.
pub fn generate_batch<R: Rng + ?Sized>(
    bx: &AdmissibleBox,
    count: usize,
    rng: &mut R,
) -> Vec<Configuration> {
    let m = bx.max_layers;
    (0..count)
        .map(|_| {
            let mut radii: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() * bx.radius).collect();
            let values = (0..m)
                .map(|_| bx.q_low + rng.gen::<f64>() * (bx.q_high - bx.q_low))
                .collect();
            radii.sort_by(f64::total_cmp);
            Configuration { radii, values }
        })
        .collect()
}

/// Batch positions of the `floor(gamma L)` smallest objective values, ties
/// resolved by position.
fn reduced_indices<F>(batch: &[Configuration], f: &F, keep: usize) -> Vec<usize>
where
    F: Fn(&Configuration) -> f64 + Sync,
{
    let values: Vec<f64> = batch
        .par_iter()
        .map(|c| {
            let v = f(c);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..batch.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order.truncate(keep);
    order
}

/// The `floor(gamma L)` configurations of `batch` with the smallest `f`.
pub fn reduce_batch<F>(batch: &[Configuration], f: &F, gamma: f64) -> Vec<Configuration>
where
    F: Fn(&Configuration) -> f64 + Sync,
{
    let keep = (gamma * batch.len() as f64 + 1e-9).floor() as usize;
    reduced_indices(batch, f, keep)
        .into_iter()
        .map(|i| batch[i].clone())
        .collect()
}

/// Largest pairwise potential distance in `s_min`, divided by `d_av`.
pub fn stability_index(s_min: &[MinimizerRecord], d_av: f64) -> Result<f64> {
    if !(d_av > 0.0) || !d_av.is_finite() {
        return Err(Error::Domain(format!("d_av must be positive, got {d_av}")));
    }
    let potentials: Vec<_> = s_min
        .iter()
        .map(|r| config_to_potential(&r.config))
        .collect();
    let mut diam = 0.0_f64;
    for i in 0..potentials.len() {
        for j in i + 1..potentials.len() {
            diam = diam.max(potential_distance(&potentials[i], &potentials[j]));
        }
    }
    Ok(diam / d_av)
}

fn record_order(a: &MinimizerRecord, b: &MinimizerRecord) -> std::cmp::Ordering {
    a.phi
        .total_cmp(&b.phi)
        .then(a.iteration.cmp(&b.iteration))
        .then(a.index.cmp(&b.index))
}

/// Runs IRRS on the current rayon pool.
pub fn irrs(
    data: &PhaseShiftSet,
    bx: &AdmissibleBox,
    params: &IrrsParams,
) -> Result<StabilityReport> {
    irrs_with(data, bx, params, &PowellSpec::default())
}

/// Runs IRRS on a dedicated pool of `workers` threads. The report does not
/// depend on `workers`.
pub fn irrs_with_workers(
    data: &PhaseShiftSet,
    bx: &AdmissibleBox,
    params: &IrrsParams,
    workers: usize,
) -> Result<StabilityReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    pool.install(|| irrs(data, bx, params))
}

/// [`irrs`] with explicit local-search settings.
pub fn irrs_with(
    data: &PhaseShiftSet,
    bx: &AdmissibleBox,
    params: &IrrsParams,
    powell: &PowellSpec,
) -> Result<StabilityReport> {
    let mut problems = params.violations();
    problems.extend(bx.violations());
    if !problems.is_empty() {
        return Err(Error::InvalidParams(problems));
    }
    let objective = ScatteringObjective::new(data.clone())?;
    let f = |c: &Configuration| objective.config(c);
    let keep = params.reduced_count();
    let set_size = params.minimizing_set_size();

    let mut carried: Vec<MinimizerRecord> = Vec::new();
    let mut indices = Vec::new();
    let mut best_phi = Vec::new();
    let mut d_av = None;
    let mut failed = 0;

    for j in 1..=params.j_max {
        let mut rng = substream(params.seed, j as u64);
        let batch = generate_batch(bx, params.batch_size, &mut rng);
        let starts = reduced_indices(&batch, &f, keep);

        let minimized: Vec<MinimizerRecord> = starts
            .par_iter()
            .enumerate()
            .map(|(index, &b)| {
                let mut rec = lmm(&batch[b], bx, params.eps_r, &f, powell);
                rec.iteration = j;
                rec.index = index;
                rec
            })
            .collect();
        let before = minimized.len();
        let minimized: Vec<MinimizerRecord> = minimized
            .into_iter()
            .filter(|r| r.phi.is_finite())
            .collect();
        if before > minimized.len() {
            warn!(
                "iteration {j}: {} local minimizations failed",
                before - minimized.len()
            );
            failed += before - minimized.len();
        }
        if minimized.is_empty() && carried.is_empty() {
            return Err(Error::AllStartsFailed(j));
        }

        let d_av = *d_av.get_or_insert_with(|| {
            let mean = minimized
                .iter()
                .map(|r| potential_norm(&config_to_potential(&r.config)))
                .sum::<f64>()
                / minimized.len() as f64;
            if mean > 0.0 {
                mean
            } else {
                warn!("all first-iteration minimizers are the zero potential; using d_av = 1");
                1.0
            }
        });

        let mut pool = minimized;
        pool.append(&mut carried);
        pool.sort_by(record_order);
        pool.truncate(set_size);
        let s_min = pool;

        let index = stability_index(&s_min, d_av)?;
        let best = s_min[0].clone();
        indices.push(index);
        best_phi.push(best.phi);

        let verdict = if index <= params.epsilon {
            Some(Verdict::Stable)
        } else if s_min.iter().all(|r| r.phi <= params.beta * best.phi) {
            Some(Verdict::Unstable)
        } else if j == params.j_max {
            Some(Verdict::Exhausted)
        } else {
            None
        };
        if let Some(verdict) = verdict {
            return Ok(StabilityReport {
                indices,
                best_phi,
                verdict,
                best,
                minimizing_set: s_min,
                d_av,
                failed_starts: failed,
                merge_rule: MERGE_RULE.to_string(),
            });
        }
        carried = s_min;
    }
    unreachable!("loop returns by j_max")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::LayeredPotential;

    fn rec(r: f64, q: f64, phi: f64) -> MinimizerRecord {
        MinimizerRecord {
            config: Configuration {
                radii: vec![r],
                values: vec![q],
            },
            phi,
            iteration: 1,
            index: 0,
        }
    }

    #[test]
    fn degenerate_box_batch() {
        let bx = AdmissibleBox::new(1, 3.0, -2.0, -2.0).unwrap();
        let mut rng = substream(1, 1);
        let b = generate_batch(&bx, 1, &mut rng);
        assert_eq!(b[0].values, vec![-2.0]);
        assert!((0.0..=3.0).contains(&b[0].radii[0]));
    }

    #[test]
    fn batch_is_admissible_and_seeded() {
        let bx = AdmissibleBox::new(2, 10.0, -20.0, 0.0).unwrap();
        let a = generate_batch(&bx, 5000, &mut substream(9, 1));
        assert!(a.iter().all(|c| bx.contains(c)));
        let b = generate_batch(&bx, 5000, &mut substream(9, 1));
        assert_eq!(a, b);
    }

    #[test]
    fn reduction_keeps_smallest_with_stable_ties() {
        let batch: Vec<Configuration> = [3.0, 1.0, 2.0]
            .iter()
            .map(|&q| Configuration {
                radii: vec![1.0],
                values: vec![q],
            })
            .collect();
        let f = |c: &Configuration| c.values[0];
        let out = reduce_batch(&batch, &f, 0.34);
        assert_eq!(out, vec![batch[1].clone()]);

        let flat = |_: &Configuration| 1.0;
        let out = reduce_batch(&batch, &flat, 0.67);
        assert_eq!(out, batch[..2].to_vec());
    }

    #[test]
    fn default_reduced_counts() {
        let p = IrrsParams::default();
        assert_eq!(p.reduced_count(), 50);
        assert_eq!(p.minimizing_set_size(), 8);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn param_violations_are_listed() {
        let p = IrrsParams {
            gamma: 1.5,
            beta: 0.9,
            ..IrrsParams::default()
        };
        let v = p.violations();
        assert!(v.iter().any(|m| m.contains("0 < gamma < 1")));
        assert!(v.iter().any(|m| m.contains("beta")));
    }

    #[test]
    fn index_of_identical_and_pair() {
        let same = vec![rec(2.0, -1.0, 0.1), rec(2.0, -1.0, 0.2)];
        assert_eq!(stability_index(&same, 1.0).unwrap(), 0.0);
        assert_eq!(stability_index(&same[..1], 1.0).unwrap(), 0.0);

        let pair = vec![rec(1.0, -1.0, 0.1), rec(1.0, 0.0, 0.2)];
        let d = potential_distance(
            &LayeredPotential::step(1.0, -1.0).unwrap(),
            &LayeredPotential::zero(),
        );
        assert!((stability_index(&pair, d).unwrap() - 1.0).abs() < 1e-15);
        assert!(stability_index(&pair, 0.0).is_err());
    }
}
