//! Search space, best-fit functional and potential-space distance.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::forward::{phase_shifts, LayeredPotential, PhaseShiftSet};

/// Box of admissible configurations: at most `max_layers` layers with radii in
/// `[0, radius]` and values in `[q_low, q_high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleBox {
    pub max_layers: usize,
    pub radius: f64,
    pub q_low: f64,
    pub q_high: f64,
}

impl AdmissibleBox {
    pub fn new(max_layers: usize, radius: f64, q_low: f64, q_high: f64) -> Result<Self> {
        let b = Self {
            max_layers,
            radius,
            q_low,
            q_high,
        };
        let problems = b.violations();
        if problems.is_empty() {
            Ok(b)
        } else {
            Err(Error::InvalidParams(problems))
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.max_layers < 1 {
            v.push(format!("max_layers must be >= 1 (got {})", self.max_layers));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            v.push(format!("radius must be > 0 (got {})", self.radius));
        }
        if !self.q_low.is_finite() || !self.q_high.is_finite() || !(self.q_low <= self.q_high) {
            v.push(format!(
                "q_low <= q_high required (got q_low = {}, q_high = {})",
                self.q_low, self.q_high
            ));
        }
        v
    }

    /// Lower and upper bound of coordinate `i` in the flat layout of a
    /// configuration with `layers` layers (radii first, then values).
    pub fn coordinate_bounds(&self, layers: usize, i: usize) -> (f64, f64) {
        if i < layers {
            (0.0, self.radius)
        } else {
            (self.q_low, self.q_high)
        }
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        c.num_layers() <= self.max_layers
            && c.radii.iter().all(|&r| (0.0..=self.radius).contains(&r))
            && c.values
                .iter()
                .all(|&q| (self.q_low..=self.q_high).contains(&q))
            && c.radii.windows(2).all(|w| w[0] <= w[1])
    }
}

/// A point of the search space: layer `m` holds `values[m]` on
/// `[radii[m-1], radii[m])`, with `radii[-1] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl Configuration {
    /// Builds a configuration; radii are sorted, values keep their positions.
    pub fn new(mut radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(Error::InvalidParams(vec![format!(
                "{} radii but {} values",
                radii.len(),
                values.len()
            )]));
        }
        if radii.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(vec![
                "configuration has non-finite entries".into(),
            ]));
        }
        radii.sort_by(f64::total_cmp);
        Ok(Self { radii, values })
    }

    pub fn num_layers(&self) -> usize {
        self.values.len()
    }

    /// Flat coordinates `(r_1..r_M, q_1..q_M)`.
    pub fn coords(&self) -> Vec<f64> {
        self.radii.iter().chain(&self.values).copied().collect()
    }

    /// Inverse of [`Configuration::coords`]; radii are re-sorted.
    pub fn from_coords(coords: &[f64]) -> Self {
        let m = coords.len() / 2;
        let mut radii = coords[..m].to_vec();
        radii.sort_by(f64::total_cmp);
        Self {
            radii,
            values: coords[m..].to_vec(),
        }
    }
}

/// The layered potential represented by `c`: radii sorted, zero-width layers
/// dropped, equal neighbours fused and trailing zero layers removed.
pub fn config_to_potential(c: &Configuration) -> LayeredPotential {
    let mut radii = c.radii.clone();
    radii.sort_by(f64::total_cmp);
    let mut breakpoints = Vec::with_capacity(radii.len());
    let mut values = Vec::with_capacity(radii.len());
    let mut prev = 0.0;
    for (&r, &v) in radii.iter().zip(&c.values) {
        if r > prev {
            breakpoints.push(r);
            values.push(v);
            prev = r;
        }
    }
    LayeredPotential::new(breakpoints, values)
        .expect("sorted positive radii form a valid potential")
        .simplified()
}

/// `sum_l (delta_l - data_l)^2 / sum_l data_l^2` over every order in `data`.
pub fn phi(candidate: &PhaseShiftSet, data: &PhaseShiftSet) -> Result<f64> {
    if candidate.shifts.len() != data.shifts.len() {
        return Err(Error::Mismatch(format!(
            "{} candidate shifts vs {} data shifts",
            candidate.shifts.len(),
            data.shifts.len()
        )));
    }
    if candidate.k != data.k {
        return Err(Error::Mismatch(format!(
            "k = {} vs k = {}",
            candidate.k, data.k
        )));
    }
    let denom: f64 = data.shifts.iter().map(|d| d * d).sum();
    if denom == 0.0 {
        return Err(Error::ZeroData);
    }
    let num: f64 = candidate
        .shifts
        .iter()
        .zip(&data.shifts)
        .map(|(c, d)| (c - d) * (c - d))
        .sum();
    Ok(num / denom)
}

/// `( 4 pi \int_0^inf |p(r) - q(r)|^2 r^2 dr )^{1/2}`, exact for layered potentials.
pub fn potential_distance(p: &LayeredPotential, q: &LayeredPotential) -> f64 {
    let mut edges: Vec<f64> = p
        .breakpoints()
        .iter()
        .chain(q.breakpoints())
        .copied()
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut sum = 0.0;
    let mut lo = 0.0_f64;
    for &hi in &edges {
        let diff = p.value_at(lo) - q.value_at(lo);
        sum += diff * diff * (hi.powi(3) - lo.powi(3));
        lo = hi;
    }
    (4.0 * PI / 3.0 * sum).sqrt()
}

/// Distance to the zero potential.
pub fn potential_norm(p: &LayeredPotential) -> f64 {
    potential_distance(p, &LayeredPotential::zero())
}

/// `Phi` of configurations against fixed data; solver failures score `+inf`.
#[derive(Debug, Clone)]
pub struct ScatteringObjective {
    data: PhaseShiftSet,
    norm: f64,
}

impl ScatteringObjective {
    pub fn new(data: PhaseShiftSet) -> Result<Self> {
        let norm: f64 = data.shifts.iter().map(|d| d * d).sum();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroData);
        }
        Ok(Self { data, norm })
    }

    pub fn data(&self) -> &PhaseShiftSet {
        &self.data
    }

    pub fn try_potential(&self, p: &LayeredPotential) -> Result<f64> {
        let shifts = phase_shifts(p, self.data.k, self.data.l_max())?;
        let num: f64 = shifts
            .shifts
            .iter()
            .zip(&self.data.shifts)
            .map(|(c, d)| (c - d) * (c - d))
            .sum();
        Ok(num / self.norm)
    }

    pub fn potential(&self, p: &LayeredPotential) -> f64 {
        self.try_potential(p).unwrap_or(f64::INFINITY)
    }

    pub fn config(&self, c: &Configuration) -> f64 {
        self.potential(&config_to_potential(c))
    }
}
