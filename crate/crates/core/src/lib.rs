//! Analysis toolkit for a two-segment crawler driven by an excitable
//! voltage oscillator with strain feedback and anisotropic friction.

pub mod bifurcation;
pub mod cubic;
pub mod describing;
pub mod dynamics;
pub mod equilibria;
pub mod format;
pub mod error;
pub mod gsp;
pub mod linalg;
pub mod ode;
pub mod params;
pub mod simulate;

pub use dynamics::{AugmentedState, ChartPoint, Friction, State};
pub use error::{Assumption, Error, Result};
pub use params::{DimensionalParams, Groups, ParamsFile, Scales};
