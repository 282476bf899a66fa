//! Riccati-Bessel functions of real argument.
//!
//! The oscillatory pair is `j_l(x) = x j_l^{sph}(x)` and `n_l(x) = x y_l^{sph}(x)`,
//! normalized so that `j_0 = sin x`, `n_0 = -cos x` and the Wronskian
//! `j_l n_l' - j_l' n_l` equals one for every order.
//!
//! The modified pair solves `f'' = (1 + l(l+1)/x^2) f`. The growing member
//! starts at `sinh x`, the decaying member at `exp(-x)`. Both are stored
//! rescaled by `exp(-x)` and `exp(+x)` respectively, so the table stays finite
//! for large arguments; products of one growing and one decaying entry are
//! unaffected by the scaling.

use crate::error::{Error, Result};

/// Threshold above which the downward recurrence is renormalized.
const RESCALE_ABOVE: f64 = 1.0e250;

/// Values and argument-derivatives of a pair of Riccati-Bessel families for
/// orders `0..=l_max` at a single argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselTable {
    pub l_max: usize,
    pub x: f64,
    /// Regular (oscillatory) or growing (modified) member.
    pub j: Vec<f64>,
    /// Irregular (oscillatory) or decaying (modified) member.
    pub n: Vec<f64>,
    pub jp: Vec<f64>,
    pub np: Vec<f64>,
    /// True values are `j * exp(scale_exponent)` and `n * exp(-scale_exponent)`.
    /// Zero for the oscillatory table.
    pub scale_exponent: f64,
}

impl BesselTable {
    /// `j_l n_l' - j_l' n_l`; scale-independent.
    pub fn wronskian(&self, l: usize) -> f64 {
        self.j[l] * self.np[l] - self.jp[l] * self.n[l]
    }
}

fn check_argument(l_max: usize, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "Riccati-Bessel argument must be positive and finite, got {x} (l_max = {l_max})"
        )));
    }
    Ok(())
}

/// Starting order for Miller's downward recurrence.
fn miller_start(l_max: usize, x: f64) -> usize {
    let base = l_max.max(x.ceil() as usize);
    base + 20 + (40.0 * (base as f64 + 1.0)).sqrt() as usize
}

/// Runs `f_{l-1} = c_l(x) f_l - sign * f_{l+1}` downward from a large order and
/// returns the unnormalized values for `0..=l_max`.
///
/// `sign = 1` is the oscillatory recurrence, `sign = -1` the modified one.
fn downward(l_max: usize, x: f64, sign: f64) -> Vec<f64> {
    let start = miller_start(l_max, x);
    let mut out = vec![0.0; l_max + 1];
    let mut upper = 0.0_f64;
    let mut current = 1.0e-30_f64;
    for l in (1..=start).rev() {
        if l <= l_max {
            out[l] = current;
        }
        let lower = (2 * l + 1) as f64 / x * current - sign * upper;
        upper = current;
        current = lower;
        if current.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            upper *= s;
            for v in out.iter_mut().skip(l.saturating_sub(1)) {
                *v *= s;
            }
        }
    }
    out[0] = current;
    out
}

/// Oscillatory Riccati-Bessel functions and their derivatives for `0..=l_max`.
pub fn riccati_table(l_max: usize, x: f64) -> Result<BesselTable> {
    check_argument(l_max, x)?;
    let (s, c) = x.sin_cos();

    let mut n = Vec::with_capacity(l_max + 1);
    n.push(-c);
    if l_max >= 1 {
        n.push(-c / x - s);
    }
    for l in 1..l_max {
        let next = (2 * l + 1) as f64 / x * n[l] - n[l - 1];
        if !next.is_finite() {
            return Err(Error::Overflow { order: l + 1, x });
        }
        n.push(next);
    }

    let j = if (l_max as f64) <= x {
        let mut j = Vec::with_capacity(l_max + 1);
        j.push(s);
        if l_max >= 1 {
            j.push(s / x - c);
        }
        for l in 1..l_max {
            j.push((2 * l + 1) as f64 / x * j[l] - j[l - 1]);
        }
        j
    } else {
        let mut j = downward(l_max.max(1), x, 1.0);
        // Least-squares match of the first two orders against their closed forms.
        // Pre-scaled so the squares cannot overflow.
        let (t0, t1) = (s, s / x - c);
        let m = j[0].abs().max(j[1].abs());
        let (a, b) = (j[0] / m, j[1] / m);
        let scale = (t0 * a + t1 * b) / (a * a + b * b) / m;
        for v in &mut j {
            *v *= scale;
        }
        j.truncate(l_max + 1);
        j[0] = s;
        j
    };

    let mut jp = Vec::with_capacity(l_max + 1);
    let mut np = Vec::with_capacity(l_max + 1);
    jp.push(c);
    np.push(s);
    for l in 1..=l_max {
        let w = l as f64 / x;
        jp.push(j[l - 1] - w * j[l]);
        np.push(n[l - 1] - w * n[l]);
    }
    if let Some(l) = np.iter().position(|v| !v.is_finite()) {
        return Err(Error::Overflow { order: l, x });
    }

    Ok(BesselTable {
        l_max,
        x,
        j,
        n,
        jp,
        np,
        scale_exponent: 0.0,
    })
}

/// Modified Riccati-Bessel functions (growing `~ sinh x`, decaying `~ exp(-x)`)
/// for `0..=l_max`, stored with the shared exponent `x` (see [`BesselTable`]).
///
/// The Wronskian `g e' - g' e` of this pair is `-1` for every order.
pub fn modified_riccati_table(l_max: usize, x: f64) -> Result<BesselTable> {
    check_argument(l_max, x)?;
    let em2x = (-2.0 * x).exp();
    let sinh_scaled = -(-2.0 * x).exp_m1() / 2.0;
    let cosh_scaled = (1.0 + em2x) / 2.0;

    let mut decay = Vec::with_capacity(l_max + 1);
    decay.push(1.0);
    if l_max >= 1 {
        decay.push(1.0 + 1.0 / x);
    }
    for l in 1..l_max {
        let next = decay[l - 1] + (2 * l + 1) as f64 / x * decay[l];
        if !next.is_finite() {
            return Err(Error::Overflow { order: l + 1, x });
        }
        decay.push(next);
    }

    let mut grow = downward(l_max, x, -1.0);
    let scale = sinh_scaled / grow[0];
    for v in &mut grow {
        *v *= scale;
    }

    let mut gp = Vec::with_capacity(l_max + 1);
    let mut dp = Vec::with_capacity(l_max + 1);
    gp.push(cosh_scaled);
    dp.push(-1.0);
    for l in 1..=l_max {
        let w = l as f64 / x;
        gp.push(grow[l - 1] - w * grow[l]);
        dp.push(-decay[l - 1] - w * decay[l]);
    }
    if let Some(l) = dp.iter().position(|v| !v.is_finite()) {
        return Err(Error::Overflow { order: l, x });
    }

    Ok(BesselTable {
        l_max,
        x,
        j: grow,
        n: decay,
        jp: gp,
        np: dp,
        scale_exponent: x,
    })
}

/// Zero-energy solutions `r^{l+1}` (regular) and `r^{-l}` (singular).
///
/// Returns `((regular, singular), (regular', singular'))`.
pub fn power_solutions(l: usize, r: f64) -> Result<((f64, f64), (f64, f64))> {
    check_argument(l, r)?;
    let lf = l as f64;
    let rl = r.powi(l as i32);
    let regular = rl * r;
    let singular = 1.0 / rl;
    let values = (regular, singular);
    let derivs = ((lf + 1.0) * rl, -lf * singular / r);
    if !regular.is_finite() || !singular.is_finite() || !derivs.1.is_finite() {
        return Err(Error::Overflow { order: l, x: r });
    }
    Ok((values, derivs))
}
