use crawlerlab_core::bifurcation::{effective_damping, first_lyapunov, hopf_point, pitchfork, HopfPoint};
use crawlerlab_core::equilibria::{jacobian, max_real_part_at_pair, pair_eigenvalues};
use crawlerlab_core::{Groups, State};
use serde::Serialize;

use super::{write_json, Context};

/// Relative differences between closed forms and numerical recomputations.
#[derive(Debug, Default, Serialize)]
pub struct OracleDeltas {
    /// Hopf gain against bisection on the largest real part at the pair.
    pub pi_s_h: Option<f64>,
    /// Crossing frequency against the imaginary part of the computed spectrum.
    pub omega_h: Option<f64>,
    /// Crossing rate against a central difference of the largest real part.
    pub transversality: Option<f64>,
    /// Pitchfork gain against bisection on the determinant at the origin.
    pub pi_s_p: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub gamma: f64,
    #[serde(rename = "pi_s_H")]
    pub pi_s_h: Option<f64>,
    #[serde(rename = "omega_H")]
    pub omega_h: Option<f64>,
    pub transversality: Option<f64>,
    pub l1: Option<f64>,
    #[serde(rename = "pi_s_P")]
    pub pi_s_p: Option<f64>,
    /// Both normal-form coefficients of the pitchfork positive.
    pub pitchfork_subcritical: Option<bool>,
    pub assumption_flags: Vec<&'static str>,
    pub oracle_deltas: OracleDeltas,
    /// Reasons for any missing entries.
    pub errors: Vec<String>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Bisection to the last representable step on a sign change of `f`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let negative_lo = f(lo) < 0.0;
    if (f(hi) < 0.0) == negative_lo {
        return None;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Some(mid);
        }
        if (f(mid) < 0.0) == negative_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn det4(mut a: [[f64; 4]; 4]) -> f64 {
    let mut det = 1.0;
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

fn hopf_deltas(g: &Groups, hp: &HopfPoint, d: &mut OracleDeltas) {
    let growth = |pi_s: f64| max_real_part_at_pair(&g.with_pi_s(pi_s));
    let upper = g.pi_l / (2.0 * g.pi_v);
    d.pi_s_h = bisect(growth, 0.5 * hp.pi_s, hp.pi_s + 0.5 * (upper - hp.pi_s)).map(|x| rel(hp.pi_s, x));
    let imag = pair_eigenvalues(&g.with_pi_s(hp.pi_s)).iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    d.omega_h = Some(rel(hp.omega, imag));
    let h = 1e-5 * hp.pi_s;
    let slope = (growth(hp.pi_s + h) - growth(hp.pi_s - h)) / (2.0 * h * g.pi_v);
    d.transversality = Some(rel(hp.transversality, slope));
}

pub fn report(g: &Groups, flags: Vec<&'static str>) -> Report {
    let mut r = Report {
        gamma: effective_damping(g),
        pi_s_h: None,
        omega_h: None,
        transversality: None,
        l1: None,
        pi_s_p: None,
        pitchfork_subcritical: None,
        assumption_flags: flags,
        oracle_deltas: OracleDeltas::default(),
        errors: Vec::new(),
    };
    match hopf_point(g) {
        Ok(hp) => {
            r.pi_s_h = Some(hp.pi_s);
            r.omega_h = Some(hp.omega);
            r.transversality = Some(hp.transversality);
            hopf_deltas(g, &hp, &mut r.oracle_deltas);
            match first_lyapunov(g, 1.0) {
                Ok(l1) => r.l1 = Some(l1),
                Err(e) => r.errors.push(format!("l1: {e}")),
            }
        }
        Err(e) => r.errors.push(format!("hopf: {e}")),
    }
    match pitchfork(g) {
        Ok(pf) => {
            r.pi_s_p = Some(pf.pi_s);
            r.pitchfork_subcritical = Some(pf.subcritical);
            let det = |pi_s: f64| det4(jacobian(&State::default(), &g.with_pi_s(pi_s)));
            r.oracle_deltas.pi_s_p = bisect(det, 0.5 * pf.pi_s, 1.5 * pf.pi_s).map(|x| rel(pf.pi_s, x));
        }
        Err(e) => r.errors.push(format!("pitchfork: {e}")),
    }
    r
}

pub fn run(ctx: &Context) -> anyhow::Result<()> {
    let g = &ctx.cfg.groups;
    let flags = ctx.flags(g)?;
    write_json(&ctx.path("bifurcation.json"), &report(g, flags))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_known_matrices() {
        let mut a = [[0.0; 4]; 4];
        for (i, row) in a.iter_mut().enumerate() {
            row[3 - i] = (i + 1) as f64;
        }
        assert_eq!(det4(a), 24.0);
        a[0] = a[1];
        assert_eq!(det4(a), 0.0);
    }

    #[test]
    fn bisection_needs_a_sign_change() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0).is_none());
        let r = bisect(|x| x - 0.3, 0.0, 1.0).unwrap();
        assert!((r - 0.3).abs() < 1e-15);
    }
}
