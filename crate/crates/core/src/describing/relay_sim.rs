//! Event-driven simulation of the body under the idealized voltage relay and
//! the piecewise-constant friction law, with stick phases for each segment.

use std::f64::consts::PI;

use serde::Serialize;

use super::{delta, solve_balance, HbSolution, RelaySpec};
use crate::error::{Error, Result};
use crate::ode::{integrate, Flow, Method, OdeSystem, Tolerances};
use crate::params::Groups;

const STRAIN: usize = 0;
const REAR: usize = 1;
const FRONT: usize = 2;
const POSITION: usize = 3;
const MAX_EVENTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Contact {
    Forward,
    Backward,
    Stuck,
}

struct RelayLoop {
    pi_f: f64,
    zeta: f64,
    pi_v: f64,
    delta: f64,
    voltage: f64,
    contact: [Contact; 2],
}

impl RelayLoop {
    /// Actuation minus passive restoring force, shared with opposite sign by
    /// the two segments.
    fn drive(&self, y: &[f64]) -> f64 {
        let vs = y[FRONT] - y[REAR];
        0.5 * (y[STRAIN] + 2.0 * self.zeta * vs - 2.0 * self.pi_v * self.voltage)
    }

    fn segment_drive(&self, y: &[f64], i: usize) -> f64 {
        if i == 0 {
            self.drive(y)
        } else {
            -self.drive(y)
        }
    }

    fn level(&self, c: Contact) -> f64 {
        match c {
            Contact::Forward => self.delta,
            Contact::Backward => -1.0,
            Contact::Stuck => 0.0,
        }
    }

    fn contact_at_rest(&self, drive: f64) -> Contact {
        if drive > self.pi_f * self.delta {
            Contact::Forward
        } else if drive < -self.pi_f {
            Contact::Backward
        } else {
            Contact::Stuck
        }
    }

    /// Event functions; an event fires when one goes from negative to
    /// non-negative.
    fn events(&self, y: &[f64], beta: f64) -> [f64; 5] {
        let mut e = [f64::NEG_INFINITY; 5];
        e[0] = if self.voltage > 0.0 { y[STRAIN] - beta } else { -y[STRAIN] - beta };
        for i in 0..2 {
            let w = y[REAR + i];
            let f = self.segment_drive(y, i);
            match self.contact[i] {
                Contact::Forward => e[1 + 2 * i] = -w,
                Contact::Backward => e[1 + 2 * i] = w,
                Contact::Stuck => {
                    e[1 + 2 * i] = f - self.pi_f * self.delta;
                    e[2 + 2 * i] = -self.pi_f - f;
                }
            }
        }
        e
    }
}

impl OdeSystem for RelayLoop {
    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let f = self.drive(y);
        dy[STRAIN] = y[FRONT] - y[REAR];
        for (i, sign) in [(0, 1.0), (1, -1.0)] {
            dy[REAR + i] = match self.contact[i] {
                Contact::Stuck => 0.0,
                c => -self.pi_f * self.level(c) + sign * f,
            };
        }
        dy[POSITION] = 0.5 * (y[REAR] + y[FRONT]);
    }
}

/// Limit-cycle measurements of a relay run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelayRun {
    pub omega: f64,
    #[serde(rename = "S")]
    pub s_amp: f64,
    pub v_com_bar: f64,
    pub periods: usize,
    pub switches: usize,
    pub events: usize,
}

struct Pending {
    t0: f64,
    y0: Vec<f64>,
    f0: Vec<f64>,
    t1: f64,
    y1: Vec<f64>,
    f1: Vec<f64>,
}

fn first_crossing(sys: &RelayLoop, p: &Pending, beta: f64) -> (f64, usize) {
    let interp = |t: f64| -> Vec<f64> {
        (0..4).map(|i| crate::ode::hermite(p.t0, p.y0[i], p.f0[i], p.t1, p.y1[i], p.f1[i], t)).collect()
    };
    let e0 = sys.events(&p.y0, beta);
    let e1 = sys.events(&p.y1, beta);
    let mut best = (p.t1, usize::MAX);
    for k in 0..5 {
        if !(e0[k] < 0.0 && e1[k] >= 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (p.t0, p.t1);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sys.events(&interp(mid), beta)[k] < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if hi < best.0 || best.1 == usize::MAX {
            best = (hi, k);
        }
    }
    best
}

/// Integrates the relay loop from rest up to `t_end` and measures the cycle
/// over the second half of the completed periods.
pub fn simulate_relay(g: &Groups, r: &RelaySpec, t_end: f64) -> Result<RelayRun> {
    let mut sys = RelayLoop {
        pi_f: g.pi_f,
        zeta: g.zeta,
        pi_v: g.pi_v,
        delta: delta(g.n_f),
        voltage: r.m,
        contact: [Contact::Stuck; 2],
    };
    let mut y = vec![0.0; 4];
    for i in 0..2 {
        sys.contact[i] = sys.contact_at_rest(sys.segment_drive(&y, i));
    }
    let tol = Tolerances { abs: 1e-12, rel: 1e-11, max_step: 0.01, ..Tolerances::default() };
    let mut t = 0.0;
    let mut events = 0;
    // (t, position) at each upward threshold crossing.
    let mut marks: Vec<(f64, f64)> = Vec::new();
    let mut strain: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let mut max_strain: f64 = 0.0;
    while t < t_end {
        let mut pending: Option<Pending> = None;
        let beta = r.beta;
        integrate(&sys, t, &y, t_end, Method::DormandPrince, &tol, |st| {
            let e0 = sys.events(st.y0, beta);
            let e1 = sys.events(st.y1, beta);
            if e0.iter().zip(&e1).any(|(a, b)| *a < 0.0 && *b >= 0.0) {
                pending = Some(Pending {
                    t0: st.t0,
                    y0: st.y0.to_vec(),
                    f0: st.f0.to_vec(),
                    t1: st.t1,
                    y1: st.y1.to_vec(),
                    f1: st.f1.to_vec(),
                });
                return Flow::Stop;
            }
            strain.push((st.t1, st.y1[STRAIN]));
            max_strain = max_strain.max(st.y1[STRAIN].abs());
            Flow::Continue
        })?;
        let Some(p) = pending else {
            break;
        };
        let (t_event, kind) = first_crossing(&sys, &p, beta);
        let (mut y_event, _) =
            integrate(&sys, p.t0, &p.y0, t_event, Method::DormandPrince, &tol, |_| Flow::Continue)?;
        t = t_event;
        strain.push((t, y_event[STRAIN]));
        max_strain = max_strain.max(y_event[STRAIN].abs());
        match kind {
            0 => {
                if sys.voltage > 0.0 {
                    marks.push((t, y_event[POSITION]));
                }
                sys.voltage = -sys.voltage;
                for i in 0..2 {
                    if sys.contact[i] == Contact::Stuck {
                        sys.contact[i] = sys.contact_at_rest(sys.segment_drive(&y_event, i));
                    }
                }
            }
            k => {
                let i = (k - 1) / 2;
                match sys.contact[i] {
                    Contact::Stuck => {
                        sys.contact[i] = if k % 2 == 1 { Contact::Forward } else { Contact::Backward };
                    }
                    _ => {
                        y_event[REAR + i] = 0.0;
                        sys.contact[i] = sys.contact_at_rest(sys.segment_drive(&y_event, i));
                    }
                }
            }
        }
        y = y_event;
        events += 1;
        if events > MAX_EVENTS {
            return Err(Error::StepBudget(MAX_EVENTS));
        }
    }
    if marks.len() < 4 {
        return Err(Error::NoSwitching { amplitude: max_strain, beta: r.beta });
    }
    let first = marks.len() / 2;
    let (t_a, x_a) = marks[first];
    let (t_b, x_b) = *marks.last().unwrap();
    let periods = marks.len() - 1 - first;
    let window = strain.iter().filter(|(ts, _)| *ts >= t_a && *ts <= t_b).map(|(_, s)| *s);
    let (lo, hi) = window.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
    Ok(RelayRun {
        omega: 2.0 * PI * periods as f64 / (t_b - t_a),
        s_amp: 0.5 * (hi - lo),
        v_com_bar: (x_b - x_a) / (t_b - t_a),
        periods,
        switches: 2 * marks.len(),
        events,
    })
}

/// Relative deviations of the simulated relay cycle from harmonic balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HbComparison {
    pub hb: HbSolution,
    pub simulated: RelayRun,
    pub rel_omega: f64,
    #[serde(rename = "rel_S")]
    pub rel_s: f64,
    pub rel_v_com_bar: f64,
}

pub fn hb_vs_simulation(g: &Groups, r: &RelaySpec, t_end: f64) -> Result<HbComparison> {
    let hb = solve_balance(r, g)?;
    let sim = simulate_relay(g, r, t_end)?;
    let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
    Ok(HbComparison {
        hb,
        simulated: sim,
        rel_omega: rel(sim.omega, hb.omega),
        rel_s: rel(sim.s_amp, hb.s_amp),
        rel_v_com_bar: rel(sim.v_com_bar, hb.v_com_bar),
    })
}
