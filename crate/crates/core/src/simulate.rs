//! Time integration of the crawler, limit-cycle metrics and trajectory export.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{augmented_field, voltage_rate_scaled, Friction, State, S, UCOM, V, VCOM, VS};
use crate::equilibria::jacobian;
use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::gsp::{fold_points, manifold_branches, BranchStability};
use crate::ode::{self, hermite, Flow, Method, OdeSystem, Stats, Tolerances};
use crate::params::Groups;

/// Minimum number of upward strain crossings needed for cycle metrics.
pub const MIN_EVENTS: usize = 5;

/// Relative spread of the crossing intervals below which a cycle is converged.
pub const PERIOD_CONVERGENCE: f64 = 1e-3;

/// Default transient discarded before cycle metrics.
pub const DEFAULT_SKIP: f64 = 20.0;

struct Crawler<'a> {
    g: &'a Groups,
    fr: Friction,
}

impl OdeSystem for Crawler<'_> {
    fn dim(&self) -> usize {
        5
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        augmented_field(y, self.g, &self.fr, dy);
    }

    fn jacobian(&self, _t: f64, y: &[f64], jac: &mut [f64]) {
        let j = jacobian(&State::new(y[0], y[1], y[2], y[3]), self.g);
        jac.fill(0.0);
        for r in 0..4 {
            jac[r * 5..r * 5 + 4].copy_from_slice(&j[r]);
        }
        jac[UCOM * 5 + VCOM] = 1.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub t_end: f64,
    pub tol: Tolerances,
    pub method: Method,
    /// Retry with the implicit rule if the explicit pair reports stiffness.
    pub fallback: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { t_end: 200.0, tol: Tolerances::default(), method: Method::DormandPrince, fallback: true }
    }
}

/// Accepted integration steps of the augmented state
/// `(V, v_com, s, v_s, u_com)` with their time derivatives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 5]>,
    pub derivs: Vec<[f64; 5]>,
    pub stats: Stats,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<[f64; 5]>, derivs: Vec<[f64; 5]>) -> Self {
        assert!(times.len() == states.len() && times.len() == derivs.len());
        Trajectory { times, states, derivs, stats: Stats::default() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> State {
        let y = self.states.last().expect("empty trajectory");
        State::new(y[0], y[1], y[2], y[3])
    }

    /// Hermite interpolation of component `i` on the step containing `t`.
    pub fn interpolate(&self, i: usize, t: f64) -> f64 {
        let k = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(k) => return self.states[k][i],
            Err(0) => 0,
            Err(k) if k >= self.times.len() => self.times.len() - 2,
            Err(k) => k - 1,
        };
        hermite(
            self.times[k],
            self.states[k][i],
            self.derivs[k][i],
            self.times[k + 1],
            self.states[k + 1][i],
            self.derivs[k + 1][i],
            t,
        )
    }

    /// Uniformly resampled rows `(t, state)` with spacing `dt`.
    pub fn resample(&self, dt: f64) -> Vec<(f64, [f64; 5])> {
        if self.is_empty() {
            return Vec::new();
        }
        let (t0, t1) = (self.times[0], *self.times.last().unwrap());
        let n = ((t1 - t0) / dt).floor() as usize;
        (0..=n)
            .map(|k| {
                let t = (t0 + k as f64 * dt).min(t1);
                (t, std::array::from_fn(|i| self.interpolate(i, t)))
            })
            .collect()
    }

    /// CSV with header `t,V,v_com,s,v_s,u_com,u1,u2`; all rows unless `dt` is given.
    pub fn write_csv<W: Write>(&self, mut w: W, dt: Option<f64>) -> Result<()> {
        writeln!(w, "t,V,v_com,s,v_s,u_com,u1,u2")?;
        let rows: Vec<(f64, [f64; 5])> = match dt {
            Some(dt) => self.resample(dt),
            None => self.times.iter().copied().zip(self.states.iter().copied()).collect(),
        };
        for (t, y) in rows {
            let half = 0.5 * y[S];
            let cols = [t, y[0], y[1], y[2], y[3], y[4], y[4] - half, y[4] + half];
            let line: Vec<String> = cols.iter().map(|&x| fmt_f64(x)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn run(x0: &State, u_com0: f64, g: &Groups, cfg: &SimConfig, method: Method) -> Result<Trajectory> {
    let sys = Crawler { g, fr: Friction::from_groups(g) };
    let [a, b, c, d] = x0.to_array();
    let y0 = [a, b, c, d, u_com0];
    let mut f0 = [0.0; 5];
    sys.rhs(0.0, &y0, &mut f0);
    let mut traj = Trajectory { times: vec![0.0], states: vec![y0], derivs: vec![f0], stats: Stats::default() };
    let (_, stats) = ode::integrate(&sys, 0.0, &y0, cfg.t_end, method, &cfg.tol, |step| {
        traj.times.push(step.t1);
        traj.states.push(std::array::from_fn(|i| step.y1[i]));
        traj.derivs.push(std::array::from_fn(|i| step.f1[i]));
        Flow::Continue
    })?;
    traj.stats = stats;
    Ok(traj)
}

/// Integrates from `x0` with `u_com(0) = 0`.
pub fn integrate(x0: &State, g: &Groups, cfg: &SimConfig) -> Result<Trajectory> {
    g.validate()?;
    match run(x0, 0.0, g, cfg, cfg.method) {
        Err(Error::StiffnessFailure { .. }) if cfg.fallback && cfg.method == Method::DormandPrince => {
            run(x0, 0.0, g, cfg, Method::Trapezoidal)
        }
        other => other,
    }
}

/// Steady-state gait measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleMetrics {
    pub period: f64,
    pub omega: f64,
    /// Half the peak-to-peak strain.
    #[serde(rename = "S_amp")]
    pub s_amp: f64,
    /// Mean centre-of-mass speed over whole cycles.
    pub v_com_bar: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub period_std: f64,
    pub events: usize,
    pub converged: bool,
}

/// Times of upward strain zero crossings with positive strain rate, after `skip`.
pub fn strain_crossings(traj: &Trajectory, skip: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..traj.len().saturating_sub(1) {
        let (t0, t1) = (traj.times[k], traj.times[k + 1]);
        if t1 <= skip {
            continue;
        }
        let (s0, s1) = (traj.states[k][S], traj.states[k + 1][S]);
        if !(s0 < 0.0 && s1 >= 0.0) {
            continue;
        }
        let (d0, d1) = (traj.states[k][VS], traj.states[k + 1][VS]);
        let h = |t: f64| hermite(t0, s0, d0, t1, s1, d1, t);
        let (mut a, mut b) = (t0, t1);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if h(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let tc = 0.5 * (a + b);
        if tc > skip && traj.interpolate(VS, tc) > 0.0 {
            out.push(tc);
        }
    }
    out
}

pub fn cycle_metrics(traj: &Trajectory, skip: f64) -> Result<CycleMetrics> {
    let ev = strain_crossings(traj, skip);
    if ev.len() < MIN_EVENTS {
        return Err(Error::NoCycle { events: ev.len(), needed: MIN_EVENTS });
    }
    let gaps: Vec<f64> = ev.windows(2).map(|w| w[1] - w[0]).collect();
    let period = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let var = gaps.iter().map(|g| (g - period).powi(2)).sum::<f64>() / gaps.len() as f64;
    let (first, last) = (ev[0], *ev.last().unwrap());
    let mut s_min = f64::INFINITY;
    let mut s_max = f64::NEG_INFINITY;
    let mut v_min = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    for (t, y) in traj.times.iter().zip(&traj.states) {
        if *t >= first && *t <= last {
            s_min = s_min.min(y[S]);
            s_max = s_max.max(y[S]);
            v_min = v_min.min(y[V]);
            v_max = v_max.max(y[V]);
        }
    }
    let dist = traj.interpolate(UCOM, last) - traj.interpolate(UCOM, first);
    Ok(CycleMetrics {
        period,
        omega: 2.0 * std::f64::consts::PI / period,
        s_amp: 0.5 * (s_max - s_min),
        v_com_bar: dist / (last - first),
        v_min,
        v_max,
        period_std: var.sqrt(),
        events: ev.len(),
        converged: var.sqrt() / period < PERIOD_CONVERGENCE,
    })
}

/// Half-width of the band around the repelling branch, in units of the fold voltage.
pub const DWELL_BAND: f64 = 0.1;

/// Fraction of the time after `skip` spent within `band` fold voltages of the
/// repelling branch of the critical manifold and outside that band around
/// every attracting branch, so passages through a fold do not count. A
/// qualitative canard indicator.
pub fn repelling_dwell(traj: &Trajectory, g: &Groups, skip: f64, band: f64) -> f64 {
    let width = band * fold_points(g).voltage.abs();
    let (mut near, mut total) = (0.0, 0.0);
    for k in 0..traj.len().saturating_sub(1) {
        let (t0, t1) = (traj.times[k].max(skip), traj.times[k + 1]);
        if t1 <= t0 {
            continue;
        }
        let y = &traj.states[k];
        let branches = manifold_branches(y[S], g);
        let near_kind = |k: BranchStability| branches.iter().any(|b| b.stability == k && (b.voltage - y[V]).abs() < width);
        let close = near_kind(BranchStability::Repelling) && !near_kind(BranchStability::Attracting);
        total += t1 - t0;
        if close {
            near += t1 - t0;
        }
    }
    if total > 0.0 {
        near / total
    } else {
        0.0
    }
}

struct Layer<'a> {
    g: &'a Groups,
    strain: f64,
}

impl OdeSystem for Layer<'_> {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = voltage_rate_scaled(y[0], self.strain, self.g);
    }
}

/// Relaxes the voltage along the fast fibre through `x0` (mechanics frozen)
/// onto an attracting branch of the critical manifold.
pub fn fast_layer_settle(x0: &State, g: &Groups) -> Result<State> {
    let layer = Layer { g, strain: x0.strain };
    let slope = |v: f64| g.pi_l_eps() - 3.0 * g.pi_c_eps() * v * v;
    let rate = voltage_rate_scaled(x0.voltage, x0.strain, g);
    if rate.abs() < 1e-10 && slope(x0.voltage) >= 0.0 {
        return Err(Error::LayerFailure(format!(
            "V = {} sits on the repelling branch",
            x0.voltage
        )));
    }
    // Loose tolerances leave |V'| hovering near the stopping threshold.
    let tol = Tolerances { abs: 1e-14, rel: 1e-12, ..Tolerances::default() };
    let mut settled = None;
    ode::integrate(&layer, 0.0, &[x0.voltage], 1e6, Method::DormandPrince, &tol, |step| {
        if step.f1[0].abs() < 1e-10 {
            settled = Some(step.y1[0]);
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;
    let mut v = settled.ok_or_else(|| Error::LayerFailure("voltage did not settle".into()))?;
    for _ in 0..5 {
        let (r, d) = (voltage_rate_scaled(v, x0.strain, g), slope(v));
        if r == 0.0 || d == 0.0 {
            break;
        }
        v -= r / d;
    }
    if slope(v) >= 0.0 {
        return Err(Error::LayerFailure(format!("settled at non-attracting V = {v}")));
    }
    Ok(State { voltage: v, ..*x0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_sine_metrics() {
        let n = 4000;
        let times: Vec<f64> = (0..=n).map(|k| 40.0 * k as f64 / n as f64).collect();
        let states: Vec<[f64; 5]> =
            times.iter().map(|&t| [0.0, 0.1, (2.0 * t).sin(), 2.0 * (2.0 * t).cos(), 0.1 * t]).collect();
        let derivs: Vec<[f64; 5]> = times
            .iter()
            .map(|&t| [0.0, 0.0, 2.0 * (2.0 * t).cos(), -4.0 * (2.0 * t).sin(), 0.1])
            .collect();
        let m = cycle_metrics(&Trajectory::new(times, states, derivs), 1.0).unwrap();
        assert!((m.period - std::f64::consts::PI).abs() < 1e-9);
        assert!((m.omega - 2.0).abs() < 1e-8);
        assert!((m.s_amp - 1.0).abs() < 1e-4);
        assert!((m.v_com_bar - 0.1).abs() < 1e-12);
        assert!(m.converged);
    }

    #[test]
    fn too_few_events() {
        let times = vec![0.0, 1.0, 2.0];
        let states = vec![[0.0; 5]; 3];
        let e = cycle_metrics(&Trajectory::new(times, states.clone(), states), 0.0);
        assert!(matches!(e, Err(Error::NoCycle { events: 0, .. })));
    }
}
