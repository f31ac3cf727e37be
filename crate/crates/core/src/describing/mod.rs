//! Fundamental-harmonic approximations of the hysteretic voltage relay and
//! the asymmetric friction relay, harmonic balance of the closed loop and
//! the speed-optimal relay threshold.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gsp::fold_points;
use crate::params::Groups;

mod relay_sim;

pub use relay_sim::{hb_vs_simulation, simulate_relay, HbComparison, RelayRun};

/// Bi-level hysteretic relay: output `+-m`, switching threshold `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaySpec {
    #[serde(rename = "M")]
    pub m: f64,
    pub beta: f64,
}

impl RelaySpec {
    pub fn new(m: f64, beta: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(invalid("M", format!("must be positive and finite, got {m}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("must be positive and finite, got {beta}")));
        }
        Ok(RelaySpec { m, beta })
    }
}

/// Relay parameters read off the critical manifold: the outer branch voltage
/// at zero strain and the fold strain. A heuristic identification only.
pub fn relay_from_groups(g: &Groups) -> Result<RelaySpec> {
    RelaySpec::new((g.pi_l / g.pi_c).sqrt(), fold_points(g).strain)
}

/// Forward level of the piecewise-constant friction law, `lim sigma(u)` as
/// `u -> inf`.
pub fn delta(n_f: f64) -> f64 {
    let t = n_f.tanh();
    (1.0 - t) / (1.0 + t)
}

/// Mean-to-amplitude speed ratio that zeroes the mean friction force.
pub fn balanced_ratio(delta: f64) -> f64 {
    (PI * delta / (1.0 + delta)).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrictionRelay {
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub a: f64,
}

impl FrictionRelay {
    pub fn from_n_f(n_f: f64) -> Self {
        let delta = delta(n_f);
        FrictionRelay { delta, a: balanced_ratio(delta) }
    }
}

/// Actuation and friction-loss constants of the balance equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaEta {
    pub alpha: f64,
    pub eta: f64,
}

impl AlphaEta {
    pub fn new(g: &Groups, m: f64) -> Self {
        let d = delta(g.n_f);
        AlphaEta {
            alpha: 8.0 * g.pi_v * m / PI,
            eta: 4.0 * g.pi_f / PI * (1.0 + d) * (PI * d / (1.0 + d)).sin(),
        }
    }

    pub fn feasible(&self) -> bool {
        self.alpha > self.eta
    }

    pub fn require_feasible(&self) -> Result<()> {
        if self.feasible() {
            Ok(())
        } else {
            Err(Error::Infeasible { alpha: self.alpha, eta: self.eta })
        }
    }

    /// Strain amplitude at the matched threshold, `(alpha - eta) / (2 zeta)`.
    pub fn matched_amplitude(&self, zeta: f64) -> f64 {
        (self.alpha - self.eta) / (2.0 * zeta)
    }
}

/// `(V0, V_sin, V_cos)` of the relay output for strain `s = S sin(wt)`.
pub fn relay_voltage_fundamental(s_amp: f64, r: &RelaySpec) -> Result<(f64, f64, f64)> {
    if s_amp < r.beta {
        return Err(Error::NoSwitching { amplitude: s_amp, beta: r.beta });
    }
    let z = r.beta / s_amp;
    let k = 4.0 / PI * r.m;
    Ok((0.0, -k * (1.0 - z * z).sqrt(), k * z))
}

/// `(sigma0, sigma_sin, sigma_cos)` of the friction relay driven by
/// `v_bar + v_tilde cos(wt + phi)` with `a = v_bar / v_tilde`. The mean
/// force is `sigma0 / 2`.
pub fn friction_relay_fundamental(a: f64, delta: f64, phi: f64) -> Result<(f64, f64, f64)> {
    if !(a.abs() < 1.0) {
        return Err(Error::SaturatedInput(a));
    }
    let amp = 2.0 / PI * (1.0 + delta) * (1.0 - a * a).sqrt();
    Ok((
        2.0 / PI * (PI * delta - a.acos() * (delta + 1.0)),
        -amp * phi.sin(),
        amp * phi.cos(),
    ))
}

/// Amplitude residual at fixed ratio `Z = beta / S`.
pub fn g_residual(s_amp: f64, z: f64, ae: &AlphaEta, zeta: f64) -> f64 {
    let u = ae.alpha * z - ae.eta;
    ae.alpha * (1.0 - z * z).sqrt() + s_amp * (1.0 - u * u / (4.0 * zeta * zeta * s_amp * s_amp))
}

/// Unique positive root of [`g_residual`] in `S` for fixed `Z`.
pub fn g_root(z: f64, ae: &AlphaEta, zeta: f64) -> f64 {
    // S^2 + b S - c = 0 with c >= 0.
    let b = ae.alpha * (1.0 - z * z).max(0.0).sqrt();
    let u = ae.alpha * z - ae.eta;
    let c = u * u / (4.0 * zeta * zeta);
    if c == 0.0 {
        return 0.0;
    }
    2.0 * c / (b + (b * b + 4.0 * c).sqrt())
}

/// Harmonic-balance frequency for amplitude `S` and threshold `beta`.
pub fn balance_frequency(s_amp: f64, beta: f64, ae: &AlphaEta, zeta: f64) -> f64 {
    (ae.alpha * beta / s_amp - ae.eta) / (2.0 * zeta * s_amp)
}

/// Fundamental-harmonic periodic solution of the relay closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HbSolution {
    #[serde(rename = "Z")]
    pub z: f64,
    pub beta: f64,
    pub omega: f64,
    #[serde(rename = "S")]
    pub s_amp: f64,
    pub v_tilde: f64,
    pub v_bar: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub v_com_bar: f64,
    #[serde(rename = "P_bar")]
    pub p_bar: f64,
    /// Phase lead of the voltage fundamental over the strain rate.
    pub phi_rel: f64,
    pub feasible: bool,
}

impl HbSolution {
    fn assemble(s_amp: f64, beta: f64, m: f64, ae: &AlphaEta, zeta: f64, fr: &FrictionRelay) -> Result<Self> {
        let omega = balance_frequency(s_amp, beta, ae, zeta);
        if !(omega > 0.0) {
            return Err(Error::InvalidBranch(omega));
        }
        let z = (beta / s_amp).min(1.0);
        let v_tilde = omega * s_amp / 2.0;
        let v_bar = fr.a * v_tilde;
        Ok(HbSolution {
            z,
            beta,
            omega,
            s_amp,
            v_tilde,
            v_bar,
            phi1: PI,
            phi2: 0.0,
            v_com_bar: v_bar,
            p_bar: average_power(z, m, ae, zeta),
            phi_rel: z.acos(),
            feasible: ae.feasible(),
        })
    }
}

fn bracket_top(beta: f64, ae: &AlphaEta) -> f64 {
    let top = beta * 1e6;
    if ae.eta > 0.0 {
        top.min(ae.alpha * beta / ae.eta)
    } else {
        top
    }
}

/// Residual of the amplitude equation along the balance curve `Z = beta / S`.
fn amplitude_residual(s_amp: f64, beta: f64, ae: &AlphaEta, zeta: f64) -> f64 {
    let z = (beta / s_amp).min(1.0);
    let w = balance_frequency(s_amp, beta, ae, zeta);
    ae.alpha * (1.0 - z * z).sqrt() + s_amp * (1.0 - w * w)
}

fn amplitude_slope(s_amp: f64, beta: f64, ae: &AlphaEta, zeta: f64) -> f64 {
    let z = beta / s_amp;
    let u = ae.alpha * z - ae.eta;
    ae.alpha * z * z / (s_amp * (1.0 - z * z).sqrt())
        + 1.0
        + (2.0 * u * ae.alpha * z + u * u) / (4.0 * zeta * zeta * s_amp * s_amp)
}

/// Solves the balance equations for the strain amplitude at threshold `r.beta`.
pub fn solve_balance(r: &RelaySpec, g: &Groups) -> Result<HbSolution> {
    let ae = AlphaEta::new(g, r.m);
    ae.require_feasible()?;
    let zeta = g.zeta;
    if !(zeta > 0.0) {
        return Err(invalid("zeta", "harmonic balance needs positive damping"));
    }
    let fr = FrictionRelay::from_n_f(g.n_f);
    let beta = r.beta;
    let lo0 = beta;
    let hi0 = bracket_top(beta, &ae);
    let f_lo = amplitude_residual(lo0, beta, &ae, zeta);
    let scale = ae.alpha + beta;
    let s_amp = if f_lo.abs() <= 1e-13 * scale {
        lo0
    } else if f_lo > 0.0 {
        return Err(Error::NoBalance { beta, limit: ae.matched_amplitude(zeta) });
    } else {
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if amplitude_residual(mid, beta, &ae, zeta) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut s = 0.5 * (lo + hi);
        for _ in 0..3 {
            let f = amplitude_residual(s, beta, &ae, zeta);
            let d = amplitude_slope(s, beta, &ae, zeta);
            let next = s - f / d;
            if !(next > lo0 && next < hi0) || amplitude_residual(next, beta, &ae, zeta).abs() > f.abs() {
                break;
            }
            s = next;
        }
        s
    };
    HbSolution::assemble(s_amp, beta, r.m, &ae, zeta, &fr)
}

/// Balance solution parametrized by the ratio `Z = beta / S`.
pub fn balance_at_ratio(z: f64, g: &Groups, m: f64) -> Result<HbSolution> {
    if !(z > 0.0 && z <= 1.0) {
        return Err(invalid("Z", format!("must lie in (0, 1], got {z}")));
    }
    let ae = AlphaEta::new(g, m);
    ae.require_feasible()?;
    let s_amp = g_root(z, &ae, g.zeta);
    HbSolution::assemble(s_amp, z * s_amp, m, &ae, g.zeta, &FrictionRelay::from_n_f(g.n_f))
}

/// Residuals of the speed, phase-balance and amplitude identities.
pub fn balance_residuals(sol: &HbSolution, r: &RelaySpec, g: &Groups) -> [f64; 3] {
    let ae = AlphaEta::new(g, r.m);
    let fr = FrictionRelay::from_n_f(g.n_f);
    let z = r.beta / sol.s_amp;
    [
        sol.v_tilde - sol.omega * sol.s_amp / 2.0,
        -2.0 * g.zeta * sol.s_amp * sol.omega + ae.alpha * z
            - 4.0 * g.pi_f / PI * (1.0 + fr.delta) * (1.0 - fr.a * fr.a).sqrt(),
        ae.alpha * (1.0 - z * z).max(0.0).sqrt() + sol.s_amp * (1.0 - sol.omega * sol.omega),
    ]
}

/// Speed-optimal relay design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    #[serde(rename = "Z_star")]
    pub z: f64,
    #[serde(rename = "S_star")]
    pub s_amp: f64,
    #[serde(rename = "beta_star")]
    pub beta: f64,
    #[serde(rename = "omega_star")]
    pub omega: f64,
    #[serde(rename = "v_com_bar_star")]
    pub v_com_bar: f64,
    #[serde(rename = "P_bar_star")]
    pub p_bar: f64,
}

pub fn optimize(g: &Groups, m: f64) -> Result<Optimum> {
    if !(m > 0.0) {
        return Err(invalid("M", format!("must be positive, got {m}")));
    }
    let ae = AlphaEta::new(g, m);
    ae.require_feasible()?;
    let d = delta(g.n_f);
    let angle = PI * d / (1.0 + d);
    let s_amp = ae.matched_amplitude(g.zeta);
    Ok(Optimum {
        z: 1.0,
        s_amp,
        beta: s_amp,
        omega: 1.0,
        v_com_bar: angle.cos() * (2.0 * g.pi_v * m - g.pi_f * (1.0 + d) * angle.sin()) / (PI * g.zeta),
        p_bar: m / (g.zeta * PI) * (ae.alpha - ae.eta),
    })
}

/// Mean actuation power `(M / (zeta pi)) Z (alpha Z - eta)`.
pub fn average_power(z: f64, m: f64, ae: &AlphaEta, zeta: f64) -> f64 {
    m / (zeta * PI) * z * (ae.alpha * z - ae.eta)
}

/// Instantaneous actuation power `s'(t) V(t)` of the fundamental harmonics.
pub fn instantaneous_power(t: f64, sol: &HbSolution, r: &RelaySpec) -> Result<f64> {
    let (_, v_sin, v_cos) = relay_voltage_fundamental(sol.s_amp, &RelaySpec { beta: sol.beta, ..*r })?;
    let wt = sol.omega * t;
    Ok(sol.omega * sol.s_amp * wt.cos() * (v_sin * wt.sin() + v_cos * wt.cos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn relay_point() -> Groups {
        Groups { zeta: 2.0, pi_f: 2.5, pi_v: 0.5, pi_eps: 1.0, n_f: 1.5, pi_c: 1.0, pi_l: 1.0, pi_s: 1.0, eps: 1e-4 }
    }

    #[test]
    fn relay_point_constants() {
        let ae = AlphaEta::new(&relay_point(), 2.0);
        assert!((delta(1.5) - (-3.0f64).exp()).abs() < 1e-15);
        assert!((ae.alpha - 8.0 / PI).abs() < 1e-15);
        assert!((ae.eta - 0.496_030_7).abs() < 1e-7);
        let opt = optimize(&relay_point(), 2.0).unwrap();
        assert!((opt.s_amp - 0.512_612_1).abs() < 1e-7);
        assert!((opt.v_com_bar - 0.253_466_5).abs() < 1e-7);
    }

    #[test]
    fn matched_threshold_is_resonant() {
        let g = relay_point();
        let opt = optimize(&g, 2.0).unwrap();
        let r = RelaySpec::new(2.0, opt.beta).unwrap();
        let sol = solve_balance(&r, &g).unwrap();
        assert!((sol.omega - 1.0).abs() < 1e-12);
        assert!((sol.s_amp - opt.s_amp).abs() < 1e-12);
        assert!((sol.v_com_bar - opt.v_com_bar).abs() < 1e-12);
    }

    #[test]
    fn threshold_above_matched_is_rejected() {
        let g = relay_point();
        let r = RelaySpec::new(2.0, 0.6).unwrap();
        assert!(matches!(solve_balance(&r, &g), Err(Error::NoBalance { .. })));
    }

    #[test]
    fn ratio_and_threshold_parametrizations_agree() {
        let g = relay_point();
        for z in [0.3, 0.5, 0.8, 0.95] {
            let a = balance_at_ratio(z, &g, 2.0).unwrap();
            let b = solve_balance(&RelaySpec::new(2.0, a.beta).unwrap(), &g).unwrap();
            assert!((a.s_amp - b.s_amp).abs() < 1e-12 * a.s_amp, "{z}");
            for res in balance_residuals(&b, &RelaySpec::new(2.0, a.beta).unwrap(), &g) {
                assert!(res.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn relay_limits() {
        let r = RelaySpec::new(2.0, 0.5).unwrap();
        let (v0, vs, vc) = relay_voltage_fundamental(0.5, &r).unwrap();
        assert_eq!((v0, vs), (0.0, 0.0));
        assert!((vc - 8.0 / PI).abs() < 1e-15);
        assert!(relay_voltage_fundamental(0.4, &r).is_err());
        let (s0, ss, sc) = friction_relay_fundamental(1.0 - 1e-15, 0.1, 0.3).unwrap();
        assert!((s0 - 0.2).abs() < 1e-6 && ss.abs() < 1e-6 && sc.abs() < 1e-6);
        let d = 0.1;
        assert!(friction_relay_fundamental(balanced_ratio(d), d, 0.0).unwrap().0.abs() < 1e-15);
        assert!(matches!(friction_relay_fundamental(1.0, d, 0.0), Err(Error::SaturatedInput(_))));
    }

    #[test]
    fn infeasible_when_friction_dominates() {
        let g = Groups { pi_f: 20.0, ..relay_point() };
        assert!(matches!(optimize(&g, 2.0), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn power_vanishes_at_break_even_ratio() {
        let ae = AlphaEta::new(&relay_point(), 2.0);
        assert!(average_power(ae.eta / ae.alpha, 2.0, &ae, 2.0).abs() < 1e-15);
    }
}
