//! Physical parameters, characteristic scales and the dimensionless groups
//! that drive every other module.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Assumption, Result};

/// Default singular-perturbation parameter separating voltage from mechanics.
pub const DEFAULT_EPS: f64 = 1e-4;

/// Largest friction offset for which the third friction derivative at rest is
/// negative: `ln(2 + sqrt 3) / 2`.
pub fn friction_offset_limit() -> f64 {
    0.5 * (2.0 + 3f64.sqrt()).ln()
}

/// Physical parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionalParams {
    /// Segment mass [kg].
    pub m: f64,
    /// Rest length between segments [m].
    pub ell: f64,
    /// Body spring stiffness [N/m].
    pub k: f64,
    /// Body damping [N s/m].
    pub b: f64,
    /// Friction force amplitude [N].
    #[serde(rename = "A_sigma")]
    pub a_sigma: f64,
    /// Piezo force per volt [N/V].
    pub k_v: f64,
    /// Membrane capacitance.
    pub c: f64,
    /// Cubic conductance.
    pub kappa: f64,
    /// Linear (negative-resistance) conductance.
    pub rho: f64,
    /// Strain feedback gain [A/m].
    pub gamma_p: f64,
    /// Friction velocity scale [m/s].
    pub eps_f: f64,
    /// Friction offset (dimensionless).
    pub n_f: f64,
}

/// Characteristic scales used for nondimensionalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scales {
    pub omega_n: f64,
    pub t_star: f64,
    pub l_star: f64,
    pub m_star: f64,
    pub v_star: f64,
}

/// Dimensionless groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Groups {
    pub zeta: f64,
    pub pi_f: f64,
    #[serde(rename = "pi_V")]
    pub pi_v: f64,
    pub pi_eps: f64,
    pub n_f: f64,
    pub pi_c: f64,
    pub pi_l: f64,
    pub pi_s: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

/// Contents of a parameter file: either physical values or groups directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ParamsFile {
    Dimensional(DimensionalParams),
    Groups(Groups),
}

impl ParamsFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Resolves to validated groups, using `eps` for dimensional input.
    pub fn groups(&self, eps: f64) -> Result<Groups> {
        match self {
            ParamsFile::Dimensional(p) => nondimensionalize(p, eps),
            ParamsFile::Groups(g) => {
                g.validate()?;
                Ok(*g)
            }
        }
    }
}

fn require_positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and positive, got {x}")))
    }
}

fn require_non_negative(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and non-negative, got {x}")))
    }
}

impl DimensionalParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("m", self.m)?;
        require_positive("ell", self.ell)?;
        require_positive("k", self.k)?;
        require_non_negative("b", self.b)?;
        require_positive("A_sigma", self.a_sigma)?;
        require_positive("k_v", self.k_v)?;
        require_positive("c", self.c)?;
        require_positive("kappa", self.kappa)?;
        require_positive("rho", self.rho)?;
        require_positive("gamma_p", self.gamma_p)?;
        require_positive("eps_f", self.eps_f)?;
        require_non_negative("n_f", self.n_f)
    }

    pub fn scales(&self) -> Result<Scales> {
        require_positive("m", self.m)?;
        require_positive("k", self.k)?;
        require_positive("c", self.c)?;
        require_positive("kappa", self.kappa)?;
        require_positive("ell", self.ell)?;
        let omega_n = (2.0 * self.k / self.m).sqrt();
        let t_star = 1.0 / omega_n;
        Ok(Scales {
            omega_n,
            t_star,
            l_star: self.ell,
            m_star: 2.0 * self.m,
            v_star: 100.0 * (self.c / (t_star * self.kappa)).sqrt(),
        })
    }
}

/// Maps physical parameters to the dimensionless groups.
pub fn nondimensionalize(p: &DimensionalParams, eps: f64) -> Result<Groups> {
    p.validate()?;
    let sc = p.scales()?;
    let (t, l, v) = (sc.t_star, sc.l_star, sc.v_star);
    let g = Groups {
        zeta: p.b / (2.0 * p.m * p.k).sqrt(),
        pi_f: p.a_sigma / (2.0 * p.k * l),
        pi_v: 0.5 * p.k_v * v / (p.k * l),
        pi_eps: l / (t * p.eps_f),
        n_f: p.n_f,
        pi_c: p.kappa * v * v * t / p.c,
        pi_l: p.rho * t / p.c,
        pi_s: p.gamma_p * l * t / (p.c * v),
        eps,
    };
    g.validate()?;
    Ok(g)
}

impl Groups {
    pub fn validate(&self) -> Result<()> {
        require_non_negative("zeta", self.zeta)?;
        require_positive("pi_f", self.pi_f)?;
        require_positive("pi_V", self.pi_v)?;
        require_positive("pi_eps", self.pi_eps)?;
        require_non_negative("n_f", self.n_f)?;
        require_positive("pi_c", self.pi_c)?;
        require_positive("pi_l", self.pi_l)?;
        require_positive("pi_s", self.pi_s)?;
        require_positive("eps", self.eps)
    }

    pub fn pi_c_eps(&self) -> f64 {
        self.eps * self.pi_c
    }

    pub fn pi_l_eps(&self) -> f64 {
        self.eps * self.pi_l
    }

    pub fn pi_s_eps(&self) -> f64 {
        self.eps * self.pi_s
    }

    /// Copy with a different strain feedback gain.
    pub fn with_pi_s(&self, pi_s: f64) -> Groups {
        Groups { pi_s, ..*self }
    }

    /// Returns the named group, using the JSON key spelling.
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "zeta" => self.zeta,
            "pi_f" => self.pi_f,
            "pi_V" => self.pi_v,
            "pi_eps" => self.pi_eps,
            "n_f" => self.n_f,
            "pi_c" => self.pi_c,
            "pi_l" => self.pi_l,
            "pi_s" => self.pi_s,
            "eps" => self.eps,
            _ => return None,
        })
    }

    /// Sets the named group, using the JSON key spelling.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "zeta" => &mut self.zeta,
            "pi_f" => &mut self.pi_f,
            "pi_V" => &mut self.pi_v,
            "pi_eps" => &mut self.pi_eps,
            "n_f" => &mut self.n_f,
            "pi_c" => &mut self.pi_c,
            "pi_l" => &mut self.pi_l,
            "pi_s" => &mut self.pi_s,
            "eps" => &mut self.eps,
            _ => return Err(invalid("group", format!("unknown group `{name}`"))),
        };
        *slot = value;
        Ok(())
    }

    /// Assumptions that do not hold for these groups.
    ///
    /// `gamma` is the effective damping at rest (see
    /// [`crate::bifurcation::effective_damping`]).
    pub fn violated_assumptions(&self, gamma: f64) -> Vec<Assumption> {
        let mut out = Vec::new();
        if self.validate().is_err() || self.n_f <= 0.0 {
            out.push(Assumption::Positivity);
        }
        if !(gamma > (5.0f64 / 3.0).sqrt() && gamma < self.pi_l) {
            out.push(Assumption::GammaRange);
        }
        if !(gamma > 100.0 && gamma < self.pi_l / 6.0 && self.pi_l > 600.0 && self.pi_l < 1e4) {
            out.push(Assumption::StrongExcitability);
        }
        if !(self.n_f > 0.0 && self.n_f < friction_offset_limit()) {
            out.push(Assumption::FrictionOffset);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn sample() -> DimensionalParams {
        DimensionalParams {
            m: 0.01,
            ell: 0.05,
            k: 40.0,
            b: 0.2,
            a_sigma: 0.3,
            k_v: 1e-3,
            c: 1e-6,
            kappa: 1e-7,
            rho: 1e-3,
            gamma_p: 2e-2,
            eps_f: 1e-3,
            n_f: 0.5,
        }
    }

    #[test]
    fn scales_follow_definitions() {
        let p = sample();
        let s = p.scales().unwrap();
        assert!((s.omega_n - (2.0 * 40.0 / 0.01f64).sqrt()).abs() < 1e-12);
        assert!((s.t_star * s.omega_n - 1.0).abs() < 1e-15);
        assert_eq!(s.l_star, 0.05);
        assert_eq!(s.m_star, 0.02);
        let v = 100.0 * (1e-6 / (s.t_star * 1e-7f64)).sqrt();
        assert!((s.v_star - v).abs() < 1e-12 * v);
    }

    #[test]
    fn groups_match_hand_computation() {
        let p = sample();
        let g = nondimensionalize(&p, 1e-4).unwrap();
        let s = p.scales().unwrap();
        assert!((g.zeta - 0.2 / (2.0 * 0.01 * 40.0f64).sqrt()).abs() < 1e-14);
        assert!((g.pi_f - 0.3 / (80.0 * 0.05)).abs() < 1e-14);
        assert!((g.pi_l - 1e-3 * s.t_star / 1e-6).abs() < 1e-12 * g.pi_l);
        assert_eq!(g.n_f, 0.5);
        assert_eq!(g.eps, 1e-4);
    }

    #[test]
    fn rejects_non_positive_core_parameters() {
        for name in ["m", "k", "c", "kappa"] {
            let mut p = sample();
            match name {
                "m" => p.m = 0.0,
                "k" => p.k = -1.0,
                "c" => p.c = 0.0,
                _ => p.kappa = -2.0,
            }
            match nondimensionalize(&p, 1e-4) {
                Err(Error::InvalidParameter { name: n, .. }) => assert_eq!(n, name),
                other => panic!("expected error for {name}, got {other:?}"),
            }
        }
    }

    #[test]
    fn parameter_file_variants() {
        let f = ParamsFile::from_json(
            r#"{"groups":{"zeta":1,"pi_f":2,"pi_V":0.5,"pi_eps":10,"n_f":0.5,"pi_c":1,"pi_l":3,"pi_s":2}}"#,
        )
        .unwrap();
        let g = f.groups(1e-4).unwrap();
        assert_eq!(g.pi_v, 0.5);
        assert_eq!(g.eps, DEFAULT_EPS);
        assert!(ParamsFile::from_json(r#"{"groups":{"zeta":1,"bogus":2}}"#).is_err());
        assert!(ParamsFile::from_json(r#"{"other":{}}"#).is_err());
    }

    #[test]
    fn named_access_round_trips() {
        let mut g = nondimensionalize(&sample(), 1e-4).unwrap();
        g.set("pi_V", 0.25).unwrap();
        assert_eq!(g.get("pi_V"), Some(0.25));
        assert!(g.set("nope", 1.0).is_err());
    }

    #[test]
    fn offset_limit_value() {
        assert!((friction_offset_limit() - 0.658_478_948_462_408_4).abs() < 1e-15);
    }
}
