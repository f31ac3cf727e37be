pub mod bifurcate;
pub mod gsp;
pub mod hb;
pub mod simulate;
pub mod sweep;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use crawlerlab_core::bifurcation::check_assumptions;
use crawlerlab_core::equilibria::fixed_points;
use crawlerlab_core::format::to_json;
use crawlerlab_core::ode::Tolerances;
use crawlerlab_core::simulate::SimConfig;
use crawlerlab_core::{Groups, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;

/// Size of the seeded kick applied to the default initial state.
const KICK: f64 = 1e-3;

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub strict: bool,
}

impl Context {
    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.cfg.tolerances
    }

    pub fn sim_config(&self, t_end: f64) -> SimConfig {
        SimConfig { t_end, tol: self.tolerances(), ..SimConfig::default() }
    }

    /// Assumption flags; an error in strict mode if any is violated.
    pub fn flags(&self, g: &Groups) -> anyhow::Result<Vec<&'static str>> {
        Ok(check_assumptions(g, self.strict)?.into_iter().map(|a| a.flag()).collect())
    }
}

/// `x_+` (the origin if the pair does not exist) plus a kick drawn from `seed`.
pub fn seeded_start(g: &Groups, seed: u64) -> State {
    let base = fixed_points(g).pair.map_or(State::default(), |(plus, _)| plus);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kick: [f64; 4] = std::array::from_fn(|_| KICK * rng.gen_range(-1.0..1.0));
    let a = base.to_array();
    State::from_array(std::array::from_fn(|i| a[i] + kick[i]))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = to_json(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn create(path: &Path) -> anyhow::Result<std::io::BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(std::io::BufWriter::new(f))
}

/// Error message safe to place in a CSV cell.
pub fn csv_cell(msg: &str) -> String {
    msg.replace([',', '\n', '\r'], ";")
}
