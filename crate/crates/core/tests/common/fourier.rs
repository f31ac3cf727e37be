//! Fourier coefficients of the exact relay outputs by piecewise
//! Gauss-Legendre quadrature, split at the switching instants.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;

const GRID: usize = 4096;

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let neg_lo = f(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mean, sine and cosine coefficients over `[a, a + 2 pi)` of a
/// piecewise-constant signal with breakpoints `cuts` (sorted, inside the
/// window) and values `level(midpoint)`.
fn coefficients(a: f64, cuts: &[f64], level: &dyn Fn(f64) -> f64) -> (f64, f64, f64) {
    let gl = GaussLegendre::new(16).unwrap();
    let mut edges = vec![a];
    edges.extend_from_slice(cuts);
    edges.push(a + 2.0 * PI);
    let (mut m, mut s, mut c) = (0.0, 0.0, 0.0);
    for w in edges.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 <= x0 {
            continue;
        }
        let y = level(0.5 * (x0 + x1));
        m += gl.integrate(x0, x1, |_| y);
        s += gl.integrate(x0, x1, |t| y * t.sin());
        c += gl.integrate(x0, x1, |t| y * t.cos());
    }
    (m / (2.0 * PI), s / PI, c / PI)
}

/// Hysteretic relay output for `s = amp sin(theta)`, starting at `+m` and
/// run through one warm-up period; returns `(mean, sin, cos)`.
pub fn voltage_relay(amp: f64, beta: f64, m: f64) -> (f64, f64, f64) {
    let s = |t: f64| amp * t.sin();
    let step = 4.0 * PI / GRID as f64;
    let mut high = true;
    // Switching instants and the level after each.
    let mut switches: Vec<(f64, bool)> = Vec::new();
    for i in 0..GRID {
        let (t0, t1) = (i as f64 * step, (i + 1) as f64 * step);
        if high && s(t1) >= beta {
            switches.push((bisect(&|t| s(t) - beta, t0, t1), false));
            high = false;
        } else if !high && s(t1) <= -beta {
            switches.push((bisect(&|t| s(t) + beta, t0, t1), true));
            high = true;
        }
    }
    let window: Vec<(f64, bool)> = switches.into_iter().filter(|(t, _)| *t >= 2.0 * PI).collect();
    let cuts: Vec<f64> = window.iter().map(|(t, _)| *t).collect();
    let level = |t: f64| {
        let state = window.iter().rev().find(|(ts, _)| *ts <= t).map_or(!window[0].1, |(_, h)| *h);
        if state {
            m
        } else {
            -m
        }
    };
    coefficients(2.0 * PI, &cuts, &level)
}

/// Friction relay `Delta` for `u >= 0`, `-1` otherwise, with
/// `u = a + cos(theta + phi)`; returns `(mean, sin, cos)`.
pub fn friction_relay(a: f64, delta: f64, phi: f64) -> (f64, f64, f64) {
    let u = |t: f64| a + (t + phi).cos();
    let step = 2.0 * PI / GRID as f64;
    let mut cuts = Vec::new();
    for i in 0..GRID {
        let (t0, t1) = (i as f64 * step, (i + 1) as f64 * step);
        if (u(t0) >= 0.0) != (u(t1) >= 0.0) {
            cuts.push(bisect(&u, t0, t1));
        }
    }
    let level = |t: f64| if u(t) >= 0.0 { delta } else { -1.0 };
    coefficients(0.0, &cuts, &level)
}
