use std::io::Write;

use crawlerlab_core::bifurcation::resting_regime_check;
use crawlerlab_core::format::fmt_f64;
use crawlerlab_core::simulate::integrate;
use crawlerlab_core::Groups;
use rayon::prelude::*;

use super::simulate::{classify, Metrics, Regime};
use super::{create, csv_cell, seeded_start, Context};
use crate::config::{RunConfig, SweepOptions};

const COLUMNS: &str = "regime,pi_s_H,max_real_part,sim_regime,period,omega,S_amp,v_com_bar,repelling_dwell,error";

/// Grid points in row order: the first axis varies slowest.
pub fn grid(opts: &SweepOptions) -> Vec<Vec<f64>> {
    opts.axes.iter().fold(vec![Vec::new()], |acc, axis| {
        let values = axis.values();
        acc.into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect()
    })
}

struct Row {
    regime: &'static str,
    pi_s_h: f64,
    max_real_part: f64,
    sim: Option<Metrics>,
}

fn evaluate(cfg: &RunConfig, opts: &SweepOptions, tol_cfg: &crawlerlab_core::simulate::SimConfig, point: &[f64]) -> anyhow::Result<Row> {
    let mut g: Groups = cfg.groups;
    for (axis, &v) in opts.axes.iter().zip(point) {
        g.set(&axis.name, v)?;
    }
    g.validate()?;
    let check = resting_regime_check(&g)?;
    let regime = if check.crawling { "crawling" } else { "resting" };
    let sim = if check.crawling {
        let traj = integrate(&seeded_start(&g, cfg.seed), &g, tol_cfg)?;
        Some(classify(&traj, &g, opts.skip())?)
    } else {
        None
    };
    Ok(Row { regime, pi_s_h: check.hopf_gain, max_real_part: check.max_real_part, sim })
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn format_row(point: &[f64], row: anyhow::Result<Row>) -> String {
    let mut cells: Vec<String> = point.iter().map(|&v| fmt_f64(v)).collect();
    match row {
        Ok(r) => {
            cells.extend([r.regime.to_string(), fmt_f64(r.pi_s_h), fmt_f64(r.max_real_part)]);
            match r.sim {
                Some(m) => {
                    let label = match m.regime {
                        Regime::Resting => "resting",
                        Regime::Crawling => "crawling",
                        Regime::Unsettled => "unsettled",
                    };
                    cells.push(label.into());
                    cells.extend([m.period, m.omega, m.s_amp, m.v_com_bar, Some(m.repelling_dwell)].map(opt));
                }
                None => cells.extend(std::iter::repeat(String::new()).take(6)),
            }
            cells.push(String::new());
        }
        Err(e) => {
            cells.extend(std::iter::repeat(String::new()).take(9));
            cells.push(csv_cell(&format!("{e:#}")));
        }
    }
    cells.join(",")
}

pub fn run(ctx: &Context) -> anyhow::Result<()> {
    let opts = ctx
        .cfg
        .sweep
        .as_ref()
        .ok_or_else(|| crate::config::ConfigError("the sweep command needs a `sweep` block".into()))?;
    ctx.flags(&ctx.cfg.groups)?;
    let sim_cfg = ctx.sim_config(opts.t_end);
    let points = grid(opts);
    let lines: Vec<String> =
        points.par_iter().map(|p| format_row(p, evaluate(&ctx.cfg, opts, &sim_cfg, p))).collect();
    let mut w = create(&ctx.path("sweep.csv"))?;
    let header: Vec<&str> = opts.axes.iter().map(|a| a.name.as_str()).chain([COLUMNS]).collect();
    writeln!(w, "{}", header.join(","))?;
    for line in lines {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}
