//! Derivative-free local minimization over configurations.
//!
//! * [`line_minimize`]: bracketing plus golden-section search along a line,
//!   clipped to the admissible box.
//! * [`powell_minimize`]: Powell-type descent on the coordinate directions.
//!   Each cycle first minimizes independently along every direction from the
//!   cycle origin only to rank the directions, then sweeps them in that order,
//!   then minimizes along the net displacement.
//! * [`reduction_procedure`]: greedy merging of adjacent layers (including a
//!   zero layer beyond the last radius) while the change in the objective
//!   stays below a relative threshold.
//! * [`lmm`]: reduce, minimize in the reduced space, reduce again.

use serde::{Deserialize, Serialize};

use crate::objective::{AdmissibleBox, Configuration};

const GOLDEN: f64 = 1.618_033_988_749_895;
const GOLDEN_R: f64 = 0.618_033_988_749_895;
const GOLDEN_C: f64 = 1.0 - GOLDEN_R;

/// Line search settings. Lengths are in configuration units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchSpec {
    /// First trial step from the origin.
    pub initial_step: f64,
    /// Bracket growth factor.
    pub expansion: f64,
    /// Final bracket width.
    pub tolerance: f64,
    pub max_evals: usize,
}

impl Default for LineSearchSpec {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            expansion: GOLDEN,
            tolerance: 1e-6,
            max_evals: 200,
        }
    }
}

/// Stopping rule of [`powell_minimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowellSpec {
    pub line: LineSearchSpec,
    /// Fractional decrease per cycle below which the descent stops.
    pub ftol: f64,
    pub max_cycles: usize,
}

impl Default for PowellSpec {
    fn default() -> Self {
        Self {
            line: LineSearchSpec::default(),
            ftol: 1e-8,
            max_cycles: 200,
        }
    }
}

/// A locally minimized configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerRecord {
    pub config: Configuration,
    pub phi: f64,
    /// IRRS iteration (1-based) that produced the record; 0 outside IRRS.
    pub iteration: usize,
    /// Position of the start point in its reduced batch.
    pub index: usize,
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Objective over flat coordinates, radii re-sorted on every evaluation.
struct CoordObjective<'a, F> {
    f: &'a F,
    evals: usize,
}

impl<'a, F: Fn(&Configuration) -> f64> CoordObjective<'a, F> {
    fn new(f: &'a F) -> Self {
        Self { f, evals: 0 }
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        finite_or_inf((self.f)(&Configuration::from_coords(x)))
    }
}

/// Bounds of every coordinate of an `m`-layer configuration.
fn bounds(bx: &AdmissibleBox, m: usize) -> (Vec<f64>, Vec<f64>) {
    (0..2 * m).map(|i| bx.coordinate_bounds(m, i)).unzip()
}

fn point_at(x: &[f64], d: &[f64], t: f64, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(d)
        .enumerate()
        .map(|(i, (xi, di))| (xi + t * di).clamp(lo[i], hi[i]))
        .collect()
}

/// Minimizes along `x + t d`. Returns the best point seen and its value; the
/// origin is returned when nothing better is found.
fn minimize_along<F: Fn(&Configuration) -> f64>(
    obj: &mut CoordObjective<'_, F>,
    x: &[f64],
    fx: f64,
    d: &[f64],
    lo: &[f64],
    hi: &[f64],
    spec: &LineSearchSpec,
) -> (Vec<f64>, f64) {
    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return (x.to_vec(), fx);
    }
    let (mut t_lo, mut t_hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..x.len() {
        if d[i] != 0.0 {
            let a = (lo[i] - x[i]) / d[i];
            let b = (hi[i] - x[i]) / d[i];
            t_lo = t_lo.max(a.min(b));
            t_hi = t_hi.min(a.max(b));
        }
    }
    let t_lo = t_lo.min(0.0);
    let t_hi = t_hi.max(0.0);
    let tol = spec.tolerance / norm;
    let step = spec.initial_step / norm;
    let budget = obj.evals + spec.max_evals;

    let mut best = (0.0, fx);
    let mut eval = |obj: &mut CoordObjective<'_, F>, t: f64, best: &mut (f64, f64)| -> f64 {
        let v = obj.eval(&point_at(x, d, t, lo, hi));
        if v < best.1 {
            *best = (t, v);
        }
        v
    };

    // Probe both sides of the origin.
    let (t_fwd, f_fwd) = if t_hi > 0.0 {
        let t = step.min(t_hi);
        (t, eval(obj, t, &mut best))
    } else {
        (0.0, f64::INFINITY)
    };
    let bracket = if f_fwd < fx {
        expand(
            obj,
            &mut eval,
            &mut best,
            (0.0, fx),
            (t_fwd, f_fwd),
            t_hi,
            spec,
            budget,
        )
    } else {
        let (t_bwd, f_bwd) = if t_lo < 0.0 {
            let t = (-step).max(t_lo);
            (t, eval(obj, t, &mut best))
        } else {
            (0.0, f64::INFINITY)
        };
        if f_bwd < fx {
            expand(
                obj,
                &mut eval,
                &mut best,
                (0.0, fx),
                (t_bwd, f_bwd),
                t_lo,
                spec,
                budget,
            )
        } else {
            let a = if t_lo < 0.0 { t_bwd } else { 0.0 };
            let c = if t_hi > 0.0 { t_fwd } else { 0.0 };
            Some(Bracket::Interior(a, 0.0, c, fx))
        }
    };

    match bracket {
        Some(Bracket::Interior(a, b, c, fb)) => {
            golden(obj, &mut eval, &mut best, a, c, Some((b, fb)), tol, budget)
        }
        Some(Bracket::Interval(a, c)) => golden(obj, &mut eval, &mut best, a, c, None, tol, budget),
        None => {}
    }
    let (t, v) = best;
    if t == 0.0 {
        (x.to_vec(), fx)
    } else {
        (point_at(x, d, t, lo, hi), v)
    }
}

enum Bracket {
    /// `a`, `b`, `c`, `f(b)` with `f(b)` below both ends.
    Interior(f64, f64, f64, f64),
    /// Descent reached the box bound; the minimum lies in `[a, c]`.
    Interval(f64, f64),
}

/// Grows a descending pair `(a, b)` toward `limit` until the value rises.
/// Returns `None` only when the evaluation budget runs out.
#[allow(clippy::too_many_arguments)]
fn expand<F, E>(
    obj: &mut CoordObjective<'_, F>,
    eval: &mut E,
    best: &mut (f64, f64),
    mut a: (f64, f64),
    mut b: (f64, f64),
    limit: f64,
    spec: &LineSearchSpec,
    budget: usize,
) -> Option<Bracket>
where
    F: Fn(&Configuration) -> f64,
    E: FnMut(&mut CoordObjective<'_, F>, f64, &mut (f64, f64)) -> f64,
{
    loop {
        if b.0 == limit {
            return Some(Bracket::Interval(a.0, limit));
        }
        if obj.evals >= budget {
            return None;
        }
        let mut c = b.0 + spec.expansion * (b.0 - a.0);
        if (limit - c) * (c - b.0) <= 0.0 {
            c = limit;
        }
        let fc = eval(obj, c, best);
        if fc >= b.1 {
            return Some(Bracket::Interior(a.0, b.0, c, b.1));
        }
        a = b;
        b = (c, fc);
    }
}

#[allow(clippy::too_many_arguments)]
fn golden<F, E>(
    obj: &mut CoordObjective<'_, F>,
    eval: &mut E,
    best: &mut (f64, f64),
    a: f64,
    c: f64,
    interior: Option<(f64, f64)>,
    tol: f64,
    budget: usize,
) where
    F: Fn(&Configuration) -> f64,
    E: FnMut(&mut CoordObjective<'_, F>, f64, &mut (f64, f64)) -> f64,
{
    let (x0, x3) = (a, c);
    let (x1, x2, f1, f2);
    let Some((b, fb)) = interior else {
        x1 = a + GOLDEN_C * (c - a);
        x2 = a + GOLDEN_R * (c - a);
        f1 = eval(obj, x1, best);
        f2 = eval(obj, x2, best);
        golden_loop(obj, eval, best, [x0, x1, x2, x3], [f1, f2], tol, budget);
        return;
    };
    if (c - b).abs() > (b - a).abs() {
        x1 = b;
        f1 = fb;
        x2 = b + GOLDEN_C * (c - b);
        f2 = eval(obj, x2, best);
    } else {
        x2 = b;
        f2 = fb;
        x1 = b - GOLDEN_C * (b - a);
        f1 = eval(obj, x1, best);
    }
    golden_loop(obj, eval, best, [x0, x1, x2, x3], [f1, f2], tol, budget);
}

fn golden_loop<F, E>(
    obj: &mut CoordObjective<'_, F>,
    eval: &mut E,
    best: &mut (f64, f64),
    [mut x0, mut x1, mut x2, mut x3]: [f64; 4],
    [mut f1, mut f2]: [f64; 2],
    tol: f64,
    budget: usize,
) where
    F: Fn(&Configuration) -> f64,
    E: FnMut(&mut CoordObjective<'_, F>, f64, &mut (f64, f64)) -> f64,
{
    while (x3 - x0).abs() > tol && obj.evals < budget {
        if f2 < f1 {
            x0 = x1;
            x1 = x2;
            x2 = GOLDEN_R * x2 + GOLDEN_C * x3;
            f1 = f2;
            f2 = eval(obj, x2, best);
        } else {
            x3 = x2;
            x2 = x1;
            x1 = GOLDEN_R * x1 + GOLDEN_C * x0;
            f2 = f1;
            f1 = eval(obj, x1, best);
        }
    }
}

/// Best admissible point on `origin + t direction`, never worse than `origin`.
///
/// `direction` is in flat coordinates (radii first, then values).
pub fn line_minimize<F: Fn(&Configuration) -> f64>(
    f: &F,
    origin: &Configuration,
    direction: &[f64],
    bx: &AdmissibleBox,
    spec: &LineSearchSpec,
) -> Configuration {
    let m = origin.num_layers();
    assert_eq!(direction.len(), 2 * m, "direction has wrong dimension");
    let (lo, hi) = bounds(bx, m);
    let mut obj = CoordObjective::new(f);
    let x = origin.coords();
    let fx = obj.eval(&x);
    let (best, _) = minimize_along(&mut obj, &x, fx, direction, &lo, &hi, spec);
    Configuration::from_coords(&best)
}

/// Result of a local descent.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMinimum {
    pub config: Configuration,
    pub value: f64,
    pub cycles: usize,
    pub evaluations: usize,
}

/// Powell-type descent restricted to the coordinates flagged in `active`
/// (flat layout, radii first).
pub fn powell_minimize<F: Fn(&Configuration) -> f64>(
    f: &F,
    start: &Configuration,
    bx: &AdmissibleBox,
    active: &[bool],
    spec: &PowellSpec,
) -> LocalMinimum {
    let m = start.num_layers();
    assert_eq!(active.len(), 2 * m, "mask has wrong dimension");
    let (lo, hi) = bounds(bx, m);
    let dims: Vec<usize> = (0..2 * m).filter(|&i| active[i]).collect();
    let full = dims.len() == 2 * m;
    let mut obj = CoordObjective::new(f);

    let mut x0: Vec<f64> = start
        .radii
        .iter()
        .chain(&start.values)
        .enumerate()
        .map(|(i, v)| v.clamp(lo[i], hi[i]))
        .collect();
    let mut f0 = obj.eval(&x0);
    let unit = |i: usize| -> Vec<f64> {
        let mut u = vec![0.0; 2 * m];
        u[i] = 1.0;
        u
    };

    let mut cycles = 0;
    while cycles < spec.max_cycles && !dims.is_empty() {
        cycles += 1;
        // Temporary minima from the cycle origin, used only for ordering.
        let mut ranked: Vec<(usize, f64)> = dims
            .iter()
            .map(|&i| {
                let (_, v) = minimize_along(&mut obj, &x0, f0, &unit(i), &lo, &hi, &spec.line);
                (i, v)
            })
            .collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1));

        let (mut x, mut fx) = (x0.clone(), f0);
        for &(i, _) in &ranked {
            (x, fx) = minimize_along(&mut obj, &x, fx, &unit(i), &lo, &hi, &spec.line);
        }
        let v: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
        if v.iter().any(|&c| c != 0.0) {
            let (xe, fe) = minimize_along(&mut obj, &x0, f0, &v, &lo, &hi, &spec.line);
            if fe <= fx {
                x = xe;
                fx = fe;
            }
        }
        if full {
            x[..m].sort_by(f64::total_cmp);
        }
        let converged = 2.0 * (f0 - fx) <= spec.ftol * (f0.abs() + fx.abs()) + 1e-25;
        x0 = x;
        f0 = fx;
        if converged || !f0.is_finite() {
            break;
        }
    }

    LocalMinimum {
        config: Configuration {
            radii: {
                let mut r = x0[..m].to_vec();
                if full {
                    r.sort_by(f64::total_cmp);
                }
                r
            },
            values: x0[m..].to_vec(),
        },
        value: f0,
        cycles,
        evaluations: obj.evals,
    }
}

/// Configurations obtained by merging one pair of adjacent layers, in the
/// order downward merges first, then upward merges.
///
/// Layer `M + 1` is the zero region between the last radius and `radius`.
/// A downward merge at interface `i` gives layer `i - 1` the value of layer
/// `i`; an upward merge gives layer `i + 1` the value of layer `i`.
fn merge_candidates(c: &Configuration, radius: f64) -> Vec<Configuration> {
    let m = c.num_layers();
    let mut out = Vec::with_capacity(2 * m);
    for i in 2..=m + 1 {
        let mut r = c.radii.clone();
        let mut v = c.values.clone();
        r.remove(i - 2);
        v.remove(i - 2);
        out.push(Configuration {
            radii: r,
            values: v,
        });
    }
    for i in 1..=m {
        let mut r = c.radii.clone();
        let mut v = c.values.clone();
        if i < m {
            r.remove(i - 1);
            v.remove(i);
        } else if r[m - 1] < radius {
            r[m - 1] = radius;
        } else {
            continue;
        }
        out.push(Configuration {
            radii: r,
            values: v,
        });
    }
    out
}

/// Greedy layer merging: while the cheapest single merge changes `f` by less
/// than `eps_r * f(current)`, commit it and start a fresh sweep.
pub fn reduction_procedure<F: Fn(&Configuration) -> f64>(
    c: &Configuration,
    radius: f64,
    eps_r: f64,
    f: &F,
) -> Configuration {
    let mut current = c.clone();
    loop {
        let f0 = finite_or_inf(f(&current));
        let threshold = eps_r * f0.max(1e-15);
        let mut chosen: Option<(f64, Configuration)> = None;
        for cand in merge_candidates(&current, radius) {
            let cost = (f0 - finite_or_inf(f(&cand))).abs();
            if !cost.is_finite() {
                continue;
            }
            if chosen.as_ref().is_none_or(|(best, _)| cost < *best) {
                chosen = Some((cost, cand));
            }
        }
        match chosen {
            Some((cost, cand)) if cost < threshold => current = cand,
            _ => return current,
        }
    }
}

/// Local Minimization Method: reduce, Powell descent in the reduced space,
/// reduce again.
pub fn lmm<F: Fn(&Configuration) -> f64>(
    start: &Configuration,
    bx: &AdmissibleBox,
    eps_r: f64,
    f: &F,
    spec: &PowellSpec,
) -> MinimizerRecord {
    let reduced = reduction_procedure(start, bx.radius, eps_r, f);
    let mask = vec![true; 2 * reduced.num_layers()];
    let polished = powell_minimize(f, &reduced, bx, &mask, spec);
    let fin = reduction_procedure(&polished.config, bx.radius, eps_r, f);
    let phi = finite_or_inf(f(&fin));
    MinimizerRecord {
        config: fin,
        phi,
        iteration: 0,
        index: 0,
    }
}
