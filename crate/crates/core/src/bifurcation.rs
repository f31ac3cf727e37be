//! Hopf and pitchfork bifurcations of the resting states as the strain
//! feedback gain `pi_s` varies.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{Friction, State};
use crate::equilibria::{
    critical_eigenvectors, d2f, d3f, fixed_points, jacobian, max_real_part_at_pair, pair_cubic,
    to_complex, CVec4,
};
use crate::error::{Assumption, Error, Result};
use crate::linalg::{inner, real_to_complex, solve_checked};
use crate::params::Groups;

/// Effective damping of the strain oscillator at rest:
/// `pi_f sigma'(0) + 2 zeta`.
pub fn effective_damping(g: &Groups) -> f64 {
    g.pi_f * Friction::from_groups(g).d1(0.0) + 2.0 * g.zeta
}

/// Returns the violated assumptions, or an error in strict mode.
pub fn check_assumptions(g: &Groups, strict: bool) -> Result<Vec<Assumption>> {
    let violated = g.violated_assumptions(effective_damping(g));
    match violated.first() {
        Some(&a) if strict => Err(Error::AssumptionViolated {
            assumption: a,
            detail: format!("strict mode rejects {}", violated.iter().map(|a| a.flag()).collect::<Vec<_>>().join(", ")),
        }),
        _ => Ok(violated),
    }
}

fn gamma_range(gamma: f64, pi_l: f64) -> Result<()> {
    let lower = (5.0f64 / 3.0).sqrt();
    let detail = if !(gamma > lower) {
        format!("gamma = {gamma} is not above sqrt(5/3) = {lower}")
    } else if !(gamma < pi_l) {
        format!("gamma = {gamma} is not below pi_l = {pi_l}")
    } else {
        return Ok(());
    };
    Err(Error::AssumptionViolated { assumption: Assumption::GammaRange, detail })
}

/// Both roots of the Hopf condition in the loop gain `pi_s pi_V`, returned
/// as `(admissible, discarded)`.
pub fn hopf_loop_gain_roots(gamma: f64, pi_l: f64) -> Result<(f64, f64)> {
    gamma_range(gamma, pi_l)?;
    let radicand = 1.0 / (18.0f64.powi(2) * gamma * gamma) + gamma * gamma / 36.0
        + 2.0 * pi_l / (27.0 * gamma)
        - 5.0 / 54.0;
    if !(radicand >= 0.0) {
        return Err(Error::Degenerate(format!("Hopf radicand {radicand} is negative")));
    }
    let centre = gamma / 12.0 + 1.0 / (36.0 * gamma) + pi_l / 3.0;
    let half = 0.5 * radicand.sqrt();
    Ok((centre - half, centre + half))
}

/// Strain feedback gain at which the symmetric pair loses stability.
pub fn hopf_gain(g: &Groups) -> Result<f64> {
    let gamma = effective_damping(g);
    let (loop_gain, _) = hopf_loop_gain_roots(gamma, g.pi_l)?;
    let pi_s = loop_gain / g.pi_v;
    let bound = (0.5 / gamma + g.pi_l) / (3.0 * g.pi_v);
    if !(pi_s > 0.0 && pi_s < bound) {
        return Err(Error::Degenerate(format!(
            "Hopf gain {pi_s} outside (0, {bound}); the crossing frequency would be imaginary"
        )));
    }
    Ok(pi_s)
}

/// Crossing frequency for a Hopf loop gain.
pub fn crossing_frequency(gamma: f64, pi_l: f64, loop_gain: f64) -> f64 {
    pair_cubic(gamma, pi_l, loop_gain)[1].sqrt()
}

/// Rate at which the real part of the critical pair crosses zero, taken with
/// respect to the loop gain `pi_s pi_V`.
pub fn transversality(gamma: f64, omega: f64) -> f64 {
    let w2 = omega * omega;
    let c2 = gamma - (1.0 - w2) / gamma;
    (6.0 * w2 + 3.0 * gamma * gamma - 5.0) / (w2 + c2 * c2)
}

/// Summary of the Hopf point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfPoint {
    pub gamma: f64,
    pub pi_s: f64,
    pub omega: f64,
    pub transversality: f64,
}

pub fn hopf_point(g: &Groups) -> Result<HopfPoint> {
    let gamma = effective_damping(g);
    let pi_s = hopf_gain(g)?;
    let omega = crossing_frequency(gamma, g.pi_l, pi_s * g.pi_v);
    Ok(HopfPoint { gamma, pi_s, omega, transversality: transversality(gamma, omega) })
}

/// First Lyapunov coefficient at `x_+` with `pi_s` set to the Hopf gain.
///
/// `strain_component` fixes the strain entry of the right eigenvector; the
/// sign of the result does not depend on it.
pub fn first_lyapunov(g: &Groups, strain_component: f64) -> Result<f64> {
    let hp = hopf_point(g)?;
    let gh = g.with_pi_s(hp.pi_s);
    let (plus, _) = fixed_points(&gh)
        .pair
        .ok_or_else(|| Error::Degenerate("no symmetric pair at the Hopf gain".into()))?;
    lyapunov_at(&plus, &gh, hp.omega, strain_component)
}

/// First Lyapunov coefficient at an equilibrium `x` with eigenvalues `+-i omega`.
pub fn lyapunov_at(x: &State, g: &Groups, omega: f64, strain_component: f64) -> Result<f64> {
    let j = jacobian(x, g);
    let (q, p) = critical_eigenvectors(&j, omega, strain_component)?;
    Ok(lyapunov_terms(&j, omega, &q, &p, |u, w| d2f(x, g, u, w), |u, w, z| d3f(x, g, u, w, z))?.l1())
}

/// The three inner products making up the first Lyapunov coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovTerms {
    pub omega: f64,
    /// `<p, D3[q, q, conj q]>`
    pub cubic: Complex64,
    /// `-2 <p, D2[q, J^-1 D2[q, conj q]]>`
    pub mean_shift: Complex64,
    /// `<p, D2[conj q, (2 i omega - J)^-1 D2[q, q]]>`
    pub second_harmonic: Complex64,
}

impl LyapunovTerms {
    pub fn l1(&self) -> f64 {
        (self.cubic + self.mean_shift + self.second_harmonic).re / (2.0 * self.omega)
    }
}

/// Evaluates the Lyapunov inner products for a Jacobian `j` with critical
/// eigenvectors `q`, `p` and multilinear forms `d2`, `d3`.
pub fn lyapunov_terms<D2, D3>(
    j: &[[f64; 4]; 4],
    omega: f64,
    q: &CVec4,
    p: &CVec4,
    d2: D2,
    d3: D3,
) -> Result<LyapunovTerms>
where
    D2: Fn(&CVec4, &CVec4) -> CVec4,
    D3: Fn(&CVec4, &CVec4, &CVec4) -> CVec4,
{
    let qc: CVec4 = q.map(|z| z.conj());
    let jc = real_to_complex(j);
    let shifted: [[Complex64; 4]; 4] = std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            -jc[r][c] + if r == c { Complex64::new(0.0, 2.0 * omega) } else { Complex64::default() }
        })
    });
    let mixed = solve_checked(&jc, &d2(q, &qc))?;
    let double = solve_checked(&shifted, &d2(q, q))?;
    Ok(LyapunovTerms {
        omega,
        cubic: inner(p, &d3(q, q, &qc)),
        mean_shift: -2.0 * inner(p, &d2(q, &mixed)),
        second_harmonic: inner(p, &d2(&qc, &double)),
    })
}

/// Data of the pitchfork at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pitchfork {
    pub pi_s: f64,
    /// Eigenvalues at the origin at the pitchfork gain.
    pub eigenvalues: [(f64, f64); 4],
    pub null_right: [f64; 4],
    pub null_left: [f64; 4],
    /// Projected parameter derivative of the field along the null vector.
    pub c_transversal: f64,
    pub c_quadratic: f64,
    pub c_cubic: f64,
    /// Both normal-form coefficients positive.
    pub subcritical: bool,
}

pub fn pitchfork(g: &Groups) -> Result<Pitchfork> {
    let gamma = effective_damping(g);
    if g.pi_l == gamma {
        return Err(Error::Degenerate("pi_l equals the effective damping".into()));
    }
    let pi_s = g.pi_l / (2.0 * g.pi_v);
    let gp = g.with_pi_s(pi_s);
    let rest = g.pi_f * Friction::from_groups(g).d1(0.0);
    let disc = (gamma + g.pi_l).powi(2) - 4.0;
    let pair = if disc >= 0.0 {
        let r = disc.sqrt();
        [(0.5 * (g.pi_l - gamma - r), 0.0), (0.5 * (g.pi_l - gamma + r), 0.0)]
    } else {
        let i = 0.5 * (-disc).sqrt();
        [(0.5 * (g.pi_l - gamma), -i), (0.5 * (g.pi_l - gamma), i)]
    };
    let null_right = [1.0, 0.0, 2.0 * g.pi_v, 0.0];
    let null_left = [-2.0 * g.pi_v, 0.0, gamma * g.pi_l, g.pi_l];
    let origin = State::default();
    let v = to_complex(null_right);
    let w = to_complex(null_left);
    // The field depends on pi_s only through -pi_s s in the voltage row.
    let param = to_complex([-null_right[2], 0.0, 0.0, 0.0]);
    let c_transversal = inner(&w, &param).re;
    let c_quadratic = inner(&w, &d2f(&origin, &gp, &v, &v)).re;
    let c_cubic = inner(&w, &d3f(&origin, &gp, &v, &v, &v)).re;
    Ok(Pitchfork {
        pi_s,
        eigenvalues: [(-rest, 0.0), (0.0, 0.0), pair[0], pair[1]],
        null_right,
        null_left,
        c_transversal,
        c_quadratic,
        c_cubic,
        subcritical: c_transversal > 0.0 && c_cubic > 0.0,
    })
}

/// Outcome of the two independent resting/crawling tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeCheck {
    /// Largest real part of the eigenvalues at the symmetric pair.
    pub max_real_part: f64,
    pub hopf_gain: f64,
    /// Below the Hopf gain with all eigenvalues in the left half plane.
    pub resting: bool,
    /// Above the Hopf gain.
    pub crawling: bool,
}

impl RegimeCheck {
    /// The eigenvalue test and the gain comparison give the same answer.
    pub fn consistent(&self) -> bool {
        self.resting != self.crawling
    }
}

pub fn resting_regime_check(g: &Groups) -> Result<RegimeCheck> {
    let hopf = hopf_gain(g)?;
    let max_real_part = max_real_part_at_pair(g);
    Ok(RegimeCheck {
        max_real_part,
        hopf_gain: hopf,
        resting: g.pi_s > 0.0 && g.pi_s < hopf && max_real_part < 0.0,
        crawling: g.pi_s > hopf,
    })
}
