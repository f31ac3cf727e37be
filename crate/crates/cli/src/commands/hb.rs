use std::io::Write;

use crawlerlab_core::describing::{
    balance_at_ratio, hb_vs_simulation, optimize, relay_from_groups, AlphaEta, HbSolution, RelaySpec,
};
use crawlerlab_core::format::fmt_f64;
use crawlerlab_core::Groups;
use rayon::prelude::*;
use serde::Serialize;

use super::{create, write_json, Context};
use crate::config::linspace;

#[derive(Debug, Serialize)]
pub struct RelayCheck {
    pub t_end: f64,
    pub omega: f64,
    #[serde(rename = "S_amp")]
    pub s_amp: f64,
    pub v_com_bar: f64,
    pub rel_omega: f64,
    #[serde(rename = "rel_S")]
    pub rel_s: f64,
}

#[derive(Debug, Serialize)]
pub struct OptimumReport {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "Z_star")]
    pub z_star: f64,
    #[serde(rename = "S_star")]
    pub s_star: f64,
    pub beta_star: f64,
    pub omega_star: f64,
    pub v_com_bar_star: f64,
    #[serde(rename = "P_bar_star")]
    pub p_bar_star: f64,
    pub alpha: f64,
    pub eta: f64,
    /// Event-driven relay simulation at the optimal threshold.
    pub relay_simulation: Option<RelayCheck>,
}

/// Balance solutions on the Z grid in grid order; points without a positive
/// frequency are dropped.
pub fn z_sweep(g: &Groups, m: f64, zs: &[f64]) -> Vec<HbSolution> {
    zs.par_iter().filter_map(|&z| balance_at_ratio(z, g, m).ok()).collect()
}

pub fn run(ctx: &Context) -> anyhow::Result<()> {
    let g = &ctx.cfg.groups;
    let opts = &ctx.cfg.hb;
    ctx.flags(g)?;
    let m = match opts.m {
        Some(m) => m,
        None => relay_from_groups(g)?.m,
    };
    let ae = AlphaEta::new(g, m);
    ae.require_feasible()?;
    let opt = optimize(g, m)?;

    let rows = z_sweep(g, m, &linspace(opts.z_min, opts.z_max, opts.z_steps));
    let mut w = create(&ctx.path("hb_sweep.csv"))?;
    writeln!(w, "Z,omega,S,v_com_bar,P_bar,phi_rel")?;
    for s in &rows {
        let cols = [s.z, s.omega, s.s_amp, s.v_com_bar, s.p_bar, s.phi_rel].map(fmt_f64);
        writeln!(w, "{}", cols.join(","))?;
    }
    w.flush()?;

    let relay_simulation = match opts.t_end {
        Some(t_end) => {
            let cmp = hb_vs_simulation(g, &RelaySpec::new(m, opt.beta)?, t_end)?;
            Some(RelayCheck {
                t_end,
                omega: cmp.simulated.omega,
                s_amp: cmp.simulated.s_amp,
                v_com_bar: cmp.simulated.v_com_bar,
                rel_omega: cmp.rel_omega,
                rel_s: cmp.rel_s,
            })
        }
        None => None,
    };
    let report = OptimumReport {
        m,
        z_star: opt.z,
        s_star: opt.s_amp,
        beta_star: opt.beta,
        omega_star: opt.omega,
        v_com_bar_star: opt.v_com_bar,
        p_bar_star: opt.p_bar,
        alpha: ae.alpha,
        eta: ae.eta,
        relay_simulation,
    };
    write_json(&ctx.path("hb_optimum.json"), &report)
}
