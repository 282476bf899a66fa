//! Fixed-energy phase shifts of piecewise-constant radial potentials.
//!
//! Inside layer `i` the radial equation reduces to the free equation with the
//! local wave number `kappa_i^2 = k^2 - q_i`. The solution is carried across
//! each interface as a coefficient pair `(A, B)` on a local basis, matched by
//! continuity of the value and the radial derivative. The pair is kept
//! projective and renormalized after every step, so no step ever divides by
//! a coefficient. The phase shift is read from the free-region pair as
//! `delta = -atan(B / A)`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::special_functions::{modified_riccati_table, power_solutions, riccati_table};

/// `|kappa^2|` below this is treated as zero energy inside the layer.
pub const ZERO_KAPPA_SQ: f64 = 1e-12;

/// Piecewise-constant potential: `values[i]` on `[breakpoints[i-1], breakpoints[i])`
/// with an implicit inner radius of zero, and zero beyond the last breakpoint.
///
/// An empty potential is the zero potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredPotential {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl LayeredPotential {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidPotential(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        let mut prev = 0.0;
        for (i, &r) in breakpoints.iter().enumerate() {
            if !r.is_finite() || r <= prev {
                return Err(Error::InvalidPotential(format!(
                    "breakpoint {i} = {r} must be finite and exceed {prev}"
                )));
            }
            prev = r;
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential(format!("value {i} is not finite")));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    /// Single well `value` on `[0, radius)`.
    pub fn step(radius: f64, value: f64) -> Result<Self> {
        Self::new(vec![radius], vec![value])
    }

    pub fn zero() -> Self {
        Self {
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_layers(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Outer edge of the support (0 for the zero potential).
    pub fn support_radius(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    pub fn value_at(&self, r: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= r);
        self.values.get(idx).copied().unwrap_or(0.0)
    }

    /// Same function with equal adjacent layers fused and trailing zero layers removed.
    pub fn simplified(&self) -> Self {
        let mut breakpoints: Vec<f64> = Vec::with_capacity(self.breakpoints.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.values.len());
        for (&r, &v) in self.breakpoints.iter().zip(&self.values) {
            if values.last() == Some(&v) {
                *breakpoints.last_mut().unwrap() = r;
            } else {
                breakpoints.push(r);
                values.push(v);
            }
        }
        while values.last() == Some(&0.0) {
            values.pop();
            breakpoints.pop();
        }
        Self {
            breakpoints,
            values,
        }
    }
}

/// Solution pair used inside one layer, chosen from the sign of `kappa^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerBasis {
    /// `kappa^2 > 0`: Riccati-Bessel `j_l(kappa r)`, `n_l(kappa r)`.
    Oscillatory { kappa: f64 },
    /// `kappa^2 = 0`: `r^{l+1}`, `r^{-l}`.
    Power,
    /// `kappa^2 < 0`: growing and decaying modified pair in `|kappa| r`,
    /// coefficients refer to the pair scaled at the radius where the state sits.
    Modified { kappa: f64 },
}

impl LayerBasis {
    pub fn from_kappa_sq(kappa_sq: f64) -> Self {
        if kappa_sq.abs() <= ZERO_KAPPA_SQ {
            LayerBasis::Power
        } else if kappa_sq > 0.0 {
            LayerBasis::Oscillatory {
                kappa: kappa_sq.sqrt(),
            }
        } else {
            LayerBasis::Modified {
                kappa: (-kappa_sq).sqrt(),
            }
        }
    }

    /// Basis for a layer of value `q` at wave number `k`.
    pub fn for_layer(k: f64, q: f64) -> Self {
        Self::from_kappa_sq(k * k - q)
    }

    /// Values, radial derivatives and Wronskian for orders `0..=l_max` at `r`.
    fn evaluate(&self, l_max: usize, r: f64) -> Result<BasisValues> {
        match *self {
            LayerBasis::Oscillatory { kappa } => {
                let t = riccati_table(l_max, kappa * r)?;
                Ok(BasisValues {
                    f: t.j,
                    g: t.n,
                    fp: t.jp.iter().map(|v| v * kappa).collect(),
                    gp: t.np.iter().map(|v| v * kappa).collect(),
                    wronskian: vec![kappa; l_max + 1],
                })
            }
            LayerBasis::Modified { kappa } => {
                let t = modified_riccati_table(l_max, kappa * r)?;
                Ok(BasisValues {
                    f: t.j,
                    g: t.n,
                    fp: t.jp.iter().map(|v| v * kappa).collect(),
                    gp: t.np.iter().map(|v| v * kappa).collect(),
                    wronskian: vec![-kappa; l_max + 1],
                })
            }
            LayerBasis::Power => {
                let mut v = BasisValues::with_capacity(l_max + 1);
                for l in 0..=l_max {
                    let ((f, g), (fp, gp)) = power_solutions(l, r)?;
                    v.f.push(f);
                    v.g.push(g);
                    v.fp.push(fp);
                    v.gp.push(gp);
                    v.wronskian.push(-((2 * l + 1) as f64));
                }
                Ok(v)
            }
        }
    }
}

struct BasisValues {
    f: Vec<f64>,
    g: Vec<f64>,
    fp: Vec<f64>,
    gp: Vec<f64>,
    wronskian: Vec<f64>,
}

impl BasisValues {
    fn with_capacity(n: usize) -> Self {
        Self {
            f: Vec::with_capacity(n),
            g: Vec::with_capacity(n),
            fp: Vec::with_capacity(n),
            gp: Vec::with_capacity(n),
            wronskian: Vec::with_capacity(n),
        }
    }
}

/// Projective coefficient pair `(A, B)` of the solution in one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientState {
    pub a: f64,
    pub b: f64,
    pub layer_index: usize,
}

impl CoefficientState {
    /// Regular solution at the origin (`B = 0`).
    pub fn regular() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            layer_index: 0,
        }
    }

    /// `x = B / A`.
    pub fn ratio(&self) -> f64 {
        self.b / self.a
    }

    fn normalized(a: f64, b: f64, layer_index: usize, l: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Propagation {
                l,
                layer: layer_index,
            });
        }
        let m = a.abs().max(b.abs());
        if m == 0.0 {
            return Err(Error::DegenerateState);
        }
        Ok(Self {
            a: a / m,
            b: b / m,
            layer_index,
        })
    }
}

/// Coefficients on the outer basis reproducing value `phi` and slope `dphi`.
fn match_values(phi: f64, dphi: f64, out: &BasisValues, l: usize) -> (f64, f64) {
    let w = out.wronskian[l];
    let a = (phi * out.gp[l] - dphi * out.g[l]) / w;
    let b = (out.f[l] * dphi - out.fp[l] * phi) / w;
    (a, b)
}

/// Carries the state of order `l` across an interface at radius `r`.
///
/// The incoming state must be expressed at `r` (relevant only for a modified
/// inner basis, see [`advance_within_layer`]). The result is renormalized so
/// that `max(|A|, |B|) = 1`.
pub fn propagate_interface(
    state: CoefficientState,
    l: usize,
    inner: LayerBasis,
    outer: LayerBasis,
    r: f64,
) -> Result<CoefficientState> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::Domain(format!(
            "interface radius must be positive, got {r}"
        )));
    }
    if !state.a.is_finite() || !state.b.is_finite() {
        return Err(Error::Propagation {
            l,
            layer: state.layer_index,
        });
    }
    let next = state.layer_index + 1;
    if inner == outer {
        return CoefficientState::normalized(state.a, state.b, next, l);
    }
    let vin = inner.evaluate(l, r).map_err(|_| Error::Propagation {
        l,
        layer: state.layer_index,
    })?;
    let vout = outer
        .evaluate(l, r)
        .map_err(|_| Error::Propagation { l, layer: next })?;
    let phi = state.a * vin.f[l] + state.b * vin.g[l];
    let dphi = state.a * vin.fp[l] + state.b * vin.gp[l];
    let (a, b) = match_values(phi, dphi, &vout, l);
    CoefficientState::normalized(a, b, next, l)
}

/// Moves a state across the interior of a layer from radius `from` to `to`.
///
/// Only the modified basis carries a radius-dependent scaling; other bases
/// return the state unchanged.
pub fn advance_within_layer(
    state: CoefficientState,
    basis: LayerBasis,
    from: f64,
    to: f64,
) -> CoefficientState {
    match basis {
        LayerBasis::Modified { kappa } => {
            let b = state.b * (-2.0 * kappa * (to - from)).exp();
            let m = state.a.abs().max(b.abs());
            CoefficientState {
                a: state.a / m,
                b: b / m,
                layer_index: state.layer_index,
            }
        }
        _ => state,
    }
}

/// Phase shifts `delta(k, l)` for `l = 0..=l_max` at fixed wave number `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftSet {
    pub k: f64,
    pub shifts: Vec<f64>,
}

impl PhaseShiftSet {
    pub fn l_max(&self) -> usize {
        self.shifts.len().saturating_sub(1)
    }
}

/// `delta = -atan(B / A)` on `(-pi/2, pi/2]`; `A = 0` maps to `pi/2`.
fn phase_from_state(s: &CoefficientState) -> f64 {
    if s.a == 0.0 {
        return FRAC_PI_2;
    }
    let d = -(s.b / s.a).atan();
    if d <= -FRAC_PI_2 {
        FRAC_PI_2
    } else {
        // Normalizes -0.0.
        d + 0.0
    }
}

/// Phase shifts of `potential` for orders `0..=l_max` at wave number `k`.
pub fn phase_shifts(potential: &LayeredPotential, k: f64, l_max: usize) -> Result<PhaseShiftSet> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!(
            "wave number must be positive, got {k}"
        )));
    }
    let n = potential.num_layers();
    let mut states = vec![CoefficientState::regular(); l_max + 1];
    if n == 0 {
        return Ok(PhaseShiftSet {
            k,
            shifts: vec![0.0; l_max + 1],
        });
    }

    let free = LayerBasis::Oscillatory { kappa: k };
    let bases: Vec<LayerBasis> = potential
        .values()
        .iter()
        .map(|&q| LayerBasis::for_layer(k, q))
        .collect();

    let mut prev_r = 0.0;
    for (i, &r) in potential.breakpoints().iter().enumerate() {
        let inner = bases[i];
        let outer = bases.get(i + 1).copied().unwrap_or(free);
        for s in states.iter_mut() {
            *s = advance_within_layer(*s, inner, prev_r, r);
        }
        prev_r = r;
        if inner == outer {
            for s in states.iter_mut() {
                s.layer_index = i + 1;
            }
            continue;
        }
        let vin = inner
            .evaluate(l_max, r)
            .map_err(|e| overflow_to_propagation(e, i))?;
        let vout = outer
            .evaluate(l_max, r)
            .map_err(|e| overflow_to_propagation(e, i + 1))?;
        for (l, s) in states.iter_mut().enumerate() {
            let phi = s.a * vin.f[l] + s.b * vin.g[l];
            let dphi = s.a * vin.fp[l] + s.b * vin.gp[l];
            let (a, b) = match_values(phi, dphi, &vout, l);
            *s = CoefficientState::normalized(a, b, i + 1, l).map_err(|e| match e {
                Error::DegenerateState => Error::Propagation { l, layer: i + 1 },
                other => other,
            })?;
        }
    }

    Ok(PhaseShiftSet {
        k,
        shifts: states.iter().map(phase_from_state).collect(),
    })
}

fn overflow_to_propagation(e: Error, layer: usize) -> Error {
    match e {
        Error::Overflow { order, .. } => Error::Propagation { l: order, layer },
        other => other,
    }
}

/// Multiplicative noise `delta * (1 + (0.5 - z) h)` with `z ~ U[0, 1)` drawn
/// independently for every shift, in order of increasing `l`.
pub fn add_noise<R: Rng + ?Sized>(
    shifts: &PhaseShiftSet,
    h: f64,
    rng: &mut R,
) -> Result<PhaseShiftSet> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!(
            "noise level must be nonnegative, got {h}"
        )));
    }
    let noisy = shifts
        .shifts
        .iter()
        .map(|&d| {
            let z: f64 = rng.gen();
            d * (1.0 + (0.5 - z) * h)
        })
        .collect();
    Ok(PhaseShiftSet {
        k: shifts.k,
        shifts: noisy,
    })
}
