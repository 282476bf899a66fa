//! Reference computations that share no code with the library.
#![allow(dead_code)]

/// Riccati-Bessel `(j_l(x), n_l(x))` for `0..=l_max`, with `j` always from a
/// long downward recurrence and `n` from the upward one.
pub fn riccati_pair(l_max: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let (s, c) = x.sin_cos();
    let mut n = vec![-c, -c / x - s];
    for l in 1..l_max {
        n.push((2 * l + 1) as f64 / x * n[l] - n[l - 1]);
    }
    n.truncate(l_max + 1);

    let top = l_max + 60 + x as usize;
    let mut j = vec![0.0; top + 2];
    j[top] = 1e-20;
    for l in (1..=top).rev() {
        j[l - 1] = (2 * l + 1) as f64 / x * j[l] - j[l + 1];
        if j[l - 1].abs() > 1e200 {
            for v in j.iter_mut().skip(l - 1) {
                *v *= 1e-200;
            }
        }
    }
    let scale = if s.abs() > 0.1 {
        s / j[0]
    } else {
        (s / x - c) / j[1]
    };
    let j = j.iter().take(l_max + 1).map(|v| v * scale).collect();
    (j, n)
}

/// Phase shifts from direct integration of the radial equation
/// `u'' = (l(l+1)/r^2 + q(r) - k^2) u` with adaptive Dormand-Prince 5(4),
/// matched to the free solutions at the outermost breakpoint.
///
/// `layers` are `(outer radius, value)` pairs in increasing radius.
pub fn reference_phase_shifts(layers: &[(f64, f64)], k: f64, l_max: usize) -> Vec<f64> {
    (0..=l_max).map(|l| radial_phase(layers, k, l)).collect()
}

fn radial_phase(layers: &[(f64, f64)], k: f64, l: usize) -> f64 {
    let lf = l as f64;
    let r0: f64 = 1e-3;
    // u ~ r^(l+1) (1 + c r^2) near the origin.
    let c = (layers[0].1 - k * k) / (2.0 * (2.0 * lf + 3.0));
    let mut u = [
        r0.powi(l as i32 + 1) * (1.0 + c * r0 * r0),
        r0.powi(l as i32) * ((lf + 1.0) + (lf + 3.0) * c * r0 * r0),
    ];
    let mut r = r0;
    for &(edge, q) in layers {
        if edge > r {
            integrate_radial(&mut u, &mut r, edge, lf, q - k * k);
        }
    }
    let x = k * r;
    let (j, n) = riccati_pair(l + 1, x);
    let (jp, np) = if l == 0 {
        (x.cos(), x.sin())
    } else {
        (j[l - 1] - lf / x * j[l], n[l - 1] - lf / x * n[l])
    };
    let (val, der) = (u[0], u[1] / k);
    ((val * jp - der * j[l]) / (val * np - der * n[l])).atan()
}

fn integrate_radial(y: &mut [f64; 2], r: &mut f64, end: f64, lf: f64, shift: f64) {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let tol = 1e-13;
    let rhs = |r: f64, y: [f64; 2]| [y[1], (lf * (lf + 1.0) / (r * r) + shift) * y[0]];
    let mut step = 1e-4_f64.min(*r);
    loop {
        let last = step >= end - *r;
        let h = if last { end - *r } else { step };
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut t = *y;
            for m in 0..s {
                t[0] += h * A[s][m] * k[m][0];
                t[1] += h * A[s][m] * k[m][1];
            }
            k[s] = rhs(*r + C[s] * h, t);
        }
        let mut next = *y;
        let mut e = [0.0; 2];
        for i in 0..2 {
            let hi5: f64 = (0..7).map(|s| B5[s] * k[s][i]).sum();
            let hi4: f64 = (0..7).map(|s| B4[s] * k[s][i]).sum();
            next[i] += h * hi5;
            e[i] = h * (hi5 - hi4);
        }
        // Both components measured in an energy-like norm that never vanishes.
        let scale = (lf * (lf + 1.0) / (*r * *r) + shift.abs()).sqrt() + 1e-3;
        let size = next[0].hypot(next[1] / scale);
        let err = e[0].hypot(e[1] / scale) / (tol * size);
        assert!(
            err.is_finite(),
            "radial integration produced non-finite values at r = {r}"
        );
        if err <= 1.0 {
            *r = if last { end } else { *r + h };
            *y = next;
            if size > 1e100 {
                y[0] *= 1e-100;
                y[1] *= 1e-100;
            }
            if last {
                return;
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        step = h * factor;
        assert!(step > 1e-14 * end, "radial integration stalled at r = {r}");
    }
}

/// Difference of two phases modulo pi, in `(-pi/2, pi/2]`.
pub fn phase_difference(a: f64, b: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut d = (a - b) % pi;
    if d > pi / 2.0 {
        d -= pi;
    } else if d <= -pi / 2.0 {
        d += pi;
    }
    d
}

/// `(4 pi int_0^R (p - q)^2 r^2 dr)^(1/2)` for piecewise-constant `p`, `q`
/// given only as functions. Cells where either function changes value are
/// bisected down to a negligible width; elsewhere `r^2` is integrated exactly.
pub fn distance_quadrature(p: &dyn Fn(f64) -> f64, q: &dyn Fn(f64) -> f64, radius: f64) -> f64 {
    fn cell(p: &dyn Fn(f64) -> f64, q: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let m = 0.5 * (a + b);
        let w = b - a;
        let probes = [a, a + 0.25 * w, m, b - 0.25 * w, b - 1e-12 * w];
        let constant = probes.iter().all(|&r| p(r) == p(a) && q(r) == q(a));
        if constant || b - a < 1e-13 {
            let d = p(m) - q(m);
            d * d * (b * b * b - a * a * a) / 3.0
        } else {
            cell(p, q, a, m) + cell(p, q, m, b)
        }
    }
    let n = 1000;
    let sum: f64 = (0..n)
        .map(|i| {
            cell(
                p,
                q,
                radius * i as f64 / n as f64,
                radius * (i + 1) as f64 / n as f64,
            )
        })
        .sum();
    (4.0 * std::f64::consts::PI * sum).sqrt()
}
