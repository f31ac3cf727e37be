use std::io::Write;

use crawlerlab_core::equilibria::fixed_points;
use crawlerlab_core::simulate::{cycle_metrics, integrate, repelling_dwell, CycleMetrics, Trajectory, DWELL_BAND};
use crawlerlab_core::{Error, Groups, State};
use serde::Serialize;

use super::{create, seeded_start, write_json, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Resting,
    Crawling,
    /// Oscillating, but the period has not settled within the run.
    Unsettled,
}

#[derive(Debug, Serialize)]
pub struct Metrics {
    pub regime: Regime,
    pub period: Option<f64>,
    pub omega: Option<f64>,
    #[serde(rename = "S_amp")]
    pub s_amp: Option<f64>,
    pub v_com_bar: Option<f64>,
    pub period_std: Option<f64>,
    pub events: Option<usize>,
    /// Post-transient time fraction near the repelling branch.
    pub repelling_dwell: f64,
    /// Resting runs: the fixed point nearest the final state.
    pub fixed_point: Option<[f64; 4]>,
    pub terminal_state: [f64; 4],
    pub terminal_distance: Option<f64>,
}

fn nearest_fixed_point(x: &State, g: &Groups) -> (State, f64) {
    let set = fixed_points(g);
    let mut candidates = vec![set.origin];
    if let Some((p, m)) = set.pair {
        candidates.extend([p, m]);
    }
    let dist = |y: &State| x.to_array().iter().zip(y.to_array()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    candidates.into_iter().map(|c| (c, dist(&c))).min_by(|a, b| a.1.total_cmp(&b.1)).expect("origin is always present")
}

/// Regime and cycle metrics of a finished run.
pub fn classify(traj: &Trajectory, g: &Groups, skip: f64) -> crawlerlab_core::Result<Metrics> {
    let end = traj.last_state();
    let dwell = repelling_dwell(traj, g, skip, DWELL_BAND);
    let cycle = |m: CycleMetrics| Metrics {
        regime: if m.converged { Regime::Crawling } else { Regime::Unsettled },
        period: Some(m.period),
        omega: Some(m.omega),
        s_amp: Some(m.s_amp),
        v_com_bar: Some(m.v_com_bar),
        period_std: Some(m.period_std),
        events: Some(m.events),
        repelling_dwell: dwell,
        fixed_point: None,
        terminal_state: end.to_array(),
        terminal_distance: None,
    };
    match cycle_metrics(traj, skip) {
        Ok(m) => Ok(cycle(m)),
        Err(Error::NoCycle { .. }) => {
            let (fp, d) = nearest_fixed_point(&end, g);
            Ok(Metrics {
                regime: Regime::Resting,
                period: None,
                omega: None,
                s_amp: None,
                v_com_bar: None,
                period_std: None,
                events: None,
                repelling_dwell: dwell,
                fixed_point: Some(fp.to_array()),
                terminal_state: end.to_array(),
                terminal_distance: Some(d),
            })
        }
        Err(e) => Err(e),
    }
}

pub fn run(ctx: &Context) -> anyhow::Result<()> {
    let g = &ctx.cfg.groups;
    let opts = &ctx.cfg.simulate;
    ctx.flags(g)?;
    let x0 = opts.x0.map_or_else(|| seeded_start(g, ctx.cfg.seed), State::from_array);
    let traj = integrate(&x0, g, &ctx.sim_config(opts.t_end))?;
    let mut w = create(&ctx.path("trajectory.csv"))?;
    traj.write_csv(&mut w, opts.sample_dt)?;
    w.flush()?;
    let metrics = classify(&traj, g, opts.skip())?;
    write_json(&ctx.path("metrics.json"), &metrics)
}
