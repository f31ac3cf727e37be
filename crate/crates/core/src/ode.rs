//! Adaptive integrators: explicit Dormand-Prince 5(4) and an implicit
//! trapezoidal rule with damped Newton iterations for stiff stretches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// Row-major Jacobian; defaults to central differences.
    fn jacobian(&self, t: f64, y: &[f64], jac: &mut [f64]) {
        let n = self.dim();
        let mut yp = y.to_vec();
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        for c in 0..n {
            let h = 1e-7 * (1.0 + y[c].abs());
            yp[c] = y[c] + h;
            self.rhs(t, &yp, &mut fp);
            yp[c] = y[c] - h;
            self.rhs(t, &yp, &mut fm);
            yp[c] = y[c];
            for r in 0..n {
                jac[r * n + c] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    DormandPrince,
    Trapezoidal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
    /// Smallest step before the run is declared stiff.
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { abs: 1e-9, rel: 1e-7, min_step: 1e-14, max_step: f64::INFINITY, max_steps: 50_000_000 }
    }
}

/// One accepted step, with end-point derivatives for Hermite interpolation.
pub struct Step<'a> {
    pub t0: f64,
    pub y0: &'a [f64],
    pub f0: &'a [f64],
    pub t1: f64,
    pub y1: &'a [f64],
    pub f1: &'a [f64],
}

impl Step<'_> {
    /// Cubic Hermite interpolant of component `i` at time `t`.
    pub fn hermite(&self, i: usize, t: f64) -> f64 {
        hermite(self.t0, self.y0[i], self.f0[i], self.t1, self.y1[i], self.f1[i], t)
    }
}

/// Cubic Hermite interpolation between `(t0, y0, f0)` and `(t1, y1, f1)`.
pub fn hermite(t0: f64, y0: f64, f0: f64, t1: f64, y1: f64, f1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * f0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * f1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub t_final: f64,
    pub method: Method,
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], tol: &Tolerances) -> f64 {
    let n = err.len() as f64;
    (err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = tol.abs + tol.rel * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum::<f64>()
        / n)
        .sqrt()
}

fn initial_step<S: OdeSystem>(sys: &S, t0: f64, y0: &[f64], f0: &[f64], tol: &Tolerances, span: f64) -> f64 {
    let n = y0.len();
    let sc: Vec<f64> = y0.iter().map(|y| tol.abs + tol.rel * y.abs()).collect();
    let d0 = (y0.iter().zip(&sc).map(|(y, s)| (y / s).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(f, s)| (f / s).powi(2)).sum::<f64>() / n as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; n];
    sys.rhs(t0 + h0, &y1, &mut f1);
    let d2 = (f1.iter().zip(f0).zip(&sc).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>() / n as f64)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span).min(tol.max_step)
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates from `(t0, y0)` to `t_end`, handing every accepted step to
/// `observer`. Returns the final state and statistics.
pub fn integrate<S, O>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    method: Method,
    tol: &Tolerances,
    observer: O,
) -> Result<(Vec<f64>, Stats)>
where
    S: OdeSystem,
    O: FnMut(&Step) -> Flow,
{
    match method {
        Method::DormandPrince => dormand_prince(sys, t0, y0, t_end, tol, observer),
        Method::Trapezoidal => trapezoidal(sys, t0, y0, t_end, tol, observer),
    }
}

fn dormand_prince<S, O>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    tol: &Tolerances,
    mut observer: O,
) -> Result<(Vec<f64>, Stats)>
where
    S: OdeSystem,
    O: FnMut(&Step) -> Flow,
{
    let n = sys.dim();
    let mut stats = Stats { method: Method::DormandPrince, t_final: t0, ..Default::default() };
    let mut t = t0;
    let mut y = y0.to_vec();
    if t_end <= t0 {
        return Ok((y, stats));
    }
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    sys.rhs(t, &y, &mut k[0]);
    stats.rhs_evals += 1;
    let mut h = initial_step(sys, t, &y, &k[0], tol, t_end - t0);
    stats.rhs_evals += 1;
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut last_rejected = false;
    while t < t_end {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::StepBudget(tol.max_steps));
        }
        if h < tol.min_step {
            return Err(Error::StiffnessFailure { t, h });
        }
        let last = t + h >= t_end;
        let h_step = if last { t_end - t } else { h };
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h_step * A[s][j] * kj[i];
                }
                ytmp[i] = acc;
            }
            let (_, tail) = k.split_at_mut(s);
            sys.rhs(t + C[s] * h_step, &ytmp, &mut tail[0]);
            if s == 6 {
                ynew.copy_from_slice(&ytmp);
            }
        }
        stats.rhs_evals += 6;
        for i in 0..n {
            err[i] = h_step * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
        }
        let en = error_norm(&err, &y, &ynew, tol);
        if en <= 1.0 && en.is_finite() {
            let t_new = if last { t_end } else { t + h_step };
            let flow = observer(&Step { t0: t, y0: &y, f0: &k[0], t1: t_new, y1: &ynew, f1: &k[6] });
            stats.accepted += 1;
            t = t_new;
            y.copy_from_slice(&ynew);
            k.swap(0, 6);
            let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            h = if last_rejected { h_step * factor.min(1.0) } else { h_step * factor };
            h = h.min(tol.max_step);
            last_rejected = false;
            if flow == Flow::Stop {
                break;
            }
        } else {
            stats.rejected += 1;
            let factor = if en.is_finite() { (0.9 * en.powf(-0.2)).max(0.2) } else { 0.1 };
            h = h_step * factor.min(1.0);
            last_rejected = true;
        }
    }
    stats.t_final = t;
    Ok((y, stats))
}

/// Solves `m x = b` in place for a dense row-major `n x n` system.
fn solve_dense(m: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs())).unwrap();
        if m[p * n + k] == 0.0 {
            return false;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        for i in k + 1..n {
            let f = m[i * n + k] / m[k * n + k];
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= m[i * n + j] * b[j];
        }
        b[i] = acc / m[i * n + i];
    }
    true
}

/// One trapezoidal step; `None` when Newton fails.
fn trapezoid_step<S: OdeSystem>(
    sys: &S,
    t: f64,
    y: &[f64],
    f: &[f64],
    h: f64,
    tol: &Tolerances,
    evals: &mut usize,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = y.len();
    let mut z: Vec<f64> = y.iter().zip(f).map(|(a, b)| a + h * b).collect();
    let mut fz = vec![0.0; n];
    let mut jac = vec![0.0; n * n];
    let residual = |z: &[f64], fz: &[f64]| -> Vec<f64> {
        (0..n).map(|i| z[i] - y[i] - 0.5 * h * (f[i] + fz[i])).collect()
    };
    let scaled = |r: &[f64], z: &[f64]| -> f64 {
        (r.iter().zip(z).map(|(r, z)| (r / (tol.abs + tol.rel * z.abs())).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    sys.rhs(t + h, &z, &mut fz);
    *evals += 1;
    let mut res = residual(&z, &fz);
    let mut norm = scaled(&res, &z);
    for _ in 0..12 {
        if norm < 1e-3 {
            return Some((z, fz));
        }
        sys.jacobian(t + h, &z, &mut jac);
        let mut m: Vec<f64> = (0..n * n)
            .map(|idx| (if idx / n == idx % n { 1.0 } else { 0.0 }) - 0.5 * h * jac[idx])
            .collect();
        let mut delta: Vec<f64> = res.iter().map(|r| -r).collect();
        if !solve_dense(&mut m, &mut delta, n) {
            return None;
        }
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = z.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            let mut ft = vec![0.0; n];
            sys.rhs(t + h, &trial, &mut ft);
            *evals += 1;
            let rt = residual(&trial, &ft);
            let nt = scaled(&rt, &trial);
            if nt < norm || lambda < 1e-3 {
                z = trial;
                fz = ft;
                res = rt;
                norm = nt;
                break;
            }
            lambda *= 0.5;
        }
    }
    (norm < 1e-3).then_some((z, fz))
}

fn trapezoidal<S, O>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    tol: &Tolerances,
    mut observer: O,
) -> Result<(Vec<f64>, Stats)>
where
    S: OdeSystem,
    O: FnMut(&Step) -> Flow,
{
    let n = sys.dim();
    let mut stats = Stats { method: Method::Trapezoidal, t_final: t0, ..Default::default() };
    let mut t = t0;
    let mut y = y0.to_vec();
    if t_end <= t0 {
        return Ok((y, stats));
    }
    let mut f = vec![0.0; n];
    sys.rhs(t, &y, &mut f);
    let mut h = initial_step(sys, t, &y, &f, tol, t_end - t0);
    stats.rhs_evals += 2;
    while t < t_end {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::StepBudget(tol.max_steps));
        }
        if h < tol.min_step {
            return Err(Error::NewtonFailure { t, detail: format!("step {h:e} below minimum") });
        }
        let last = t + h >= t_end;
        let h_step = if last { t_end - t } else { h };
        // Step doubling: one full step against two half steps.
        let full = trapezoid_step(sys, t, &y, &f, h_step, tol, &mut stats.rhs_evals);
        let half = trapezoid_step(sys, t, &y, &f, 0.5 * h_step, tol, &mut stats.rhs_evals).and_then(|(ym, fm)| {
            trapezoid_step(sys, t + 0.5 * h_step, &ym, &fm, 0.5 * h_step, tol, &mut stats.rhs_evals)
        });
        let (Some((yf, _)), Some((yh, _))) = (full, half) else {
            stats.rejected += 1;
            h = 0.25 * h_step;
            continue;
        };
        let mut err: Vec<f64> = yh.iter().zip(&yf).map(|(a, b)| (a - b) / 3.0).collect();
        // Filter the estimate through (I - h J / 2)^-1 so that decayed stiff
        // components do not force tiny steps.
        let mut jac = vec![0.0; n * n];
        sys.jacobian(t + h_step, &yh, &mut jac);
        let mut m: Vec<f64> = (0..n * n)
            .map(|idx| (if idx / n == idx % n { 1.0 } else { 0.0 }) - 0.25 * h_step * jac[idx])
            .collect();
        let raw = err.clone();
        if !solve_dense(&mut m, &mut err, n) {
            err = raw;
        }
        let en = error_norm(&err, &y, &yh, tol);
        if en <= 1.0 {
            let ynew = yh;
            let mut fnew = vec![0.0; n];
            sys.rhs(t + h_step, &ynew, &mut fnew);
            stats.rhs_evals += 1;
            let t_new = if last { t_end } else { t + h_step };
            let flow = observer(&Step { t0: t, y0: &y, f0: &f, t1: t_new, y1: &ynew, f1: &fnew });
            stats.accepted += 1;
            t = t_new;
            y = ynew;
            f = fnew;
            let factor = if en == 0.0 { 4.0 } else { (0.9 * en.powf(-1.0 / 3.0)).clamp(0.2, 4.0) };
            h = (h_step * factor).min(tol.max_step);
            if flow == Flow::Stop {
                break;
            }
        } else {
            stats.rejected += 1;
            h = h_step * (0.9 * en.powf(-1.0 / 3.0)).clamp(0.1, 0.9);
        }
    }
    stats.t_final = t;
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    struct Stiff(f64);
    impl OdeSystem for Stiff {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -self.0 * (y[0] - t.cos());
        }
    }

    #[test]
    fn explicit_pair_is_accurate() {
        let tol = Tolerances::default();
        let (y, st) = integrate(&Oscillator, 0.0, &[1.0, 0.0], 10.0, Method::DormandPrince, &tol, |_| Flow::Continue).unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-6);
        assert!((y[1] + 10f64.sin()).abs() < 1e-6);
        assert_eq!(st.t_final, 10.0);
    }

    #[test]
    fn trapezoidal_is_accurate() {
        let tol = Tolerances::default();
        let (y, _) = integrate(&Oscillator, 0.0, &[1.0, 0.0], 3.0, Method::Trapezoidal, &tol, |_| Flow::Continue).unwrap();
        assert!((y[0] - 3f64.cos()).abs() < 1e-5);
    }

    #[test]
    fn stiffness_is_reported() {
        let tol = Tolerances { min_step: 1e-3, ..Default::default() };
        let err = integrate(&Stiff(1e6), 0.0, &[0.0], 1.0, Method::DormandPrince, &tol, |_| Flow::Continue);
        assert!(matches!(err, Err(Error::StiffnessFailure { .. })));
        let tol = Tolerances::default();
        let (y, st) = integrate(&Stiff(1e6), 0.0, &[0.0], 1.0, Method::Trapezoidal, &tol, |_| Flow::Continue).unwrap();
        assert!((y[0] - 1f64.cos()).abs() < 1e-5);
        assert!(st.accepted < 10_000);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let p = |t: f64| t * t * t - 2.0 * t + 1.0;
        let dp = |t: f64| 3.0 * t * t - 2.0;
        let v = hermite(0.5, p(0.5), dp(0.5), 1.5, p(1.5), dp(1.5), 0.8);
        assert!((v - p(0.8)).abs() < 1e-14);
    }

    #[test]
    fn observer_can_stop() {
        let tol = Tolerances::default();
        let (_, st) = integrate(&Oscillator, 0.0, &[1.0, 0.0], 10.0, Method::DormandPrince, &tol, |s| {
            if s.y1[0] < 0.0 { Flow::Stop } else { Flow::Continue }
        })
        .unwrap();
        assert!(st.t_final < 2.0);
    }
}
