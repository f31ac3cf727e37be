use std::fmt;

use thiserror::Error;

/// Modelling assumptions checked before analytic results are trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// All groups strictly positive and `n_f > 0`.
    Positivity,
    /// `sqrt(5/3) < gamma < pi_l`; required for the Hopf gain to exist.
    GammaRange,
    /// `100 < gamma < pi_l / 6` and `600 < pi_l < 1e4`.
    StrongExcitability,
    /// `0 < n_f < ln(2 + sqrt 3) / 2`.
    FrictionOffset,
}

impl Assumption {
    /// Stable machine-readable tag.
    pub fn flag(self) -> &'static str {
        match self {
            Assumption::Positivity => "groups_not_positive",
            Assumption::GammaRange => "gamma_out_of_range",
            Assumption::StrongExcitability => "excitability_out_of_range",
            Assumption::FrictionOffset => "n_f_out_of_range",
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("assumption {assumption} violated: {detail}")]
    AssumptionViolated { assumption: Assumption, detail: String },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("degenerate eigenstructure: {0}")]
    DegenerateEigenstructure(String),

    #[error("step size underflow at t = {t} (h = {h:e}); the problem is stiff, use the implicit integrator")]
    StiffnessFailure { t: f64, h: f64 },

    #[error("step budget of {0} exhausted")]
    StepBudget(usize),

    #[error("implicit solve failed at t = {t}: {detail}")]
    NewtonFailure { t: f64, detail: String },

    #[error("no limit cycle detected: {events} strain crossings after the transient, need at least {needed}")]
    NoCycle { events: usize, needed: usize },

    #[error("fast layer did not settle: {0}")]
    LayerFailure(String),

    #[error("relay never switches: amplitude {amplitude} below hysteresis {beta}")]
    NoSwitching { amplitude: f64, beta: f64 },

    #[error("friction input saturated: offset ratio {0} outside (0, 1)")]
    SaturatedInput(f64),

    #[error("no oscillation is possible: actuation {alpha} does not exceed friction loss {eta}")]
    Infeasible { alpha: f64, eta: f64 },

    #[error("relay threshold {beta} exceeds the largest self-sustained strain amplitude {limit}")]
    NoBalance { beta: f64, limit: f64 },

    #[error("balance solution has non-positive frequency {0}")]
    InvalidBranch(f64),

    #[error("singular linear system (condition estimate {0:e})")]
    Singular(f64),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
