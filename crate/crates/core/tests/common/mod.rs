#![allow(dead_code)]

pub mod fourier;

use std::path::PathBuf;

use crawlerlab_core::{Groups, ParamsFile};
use rand::Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// Groups section of a fixture config.
pub fn fixture_groups(name: &str) -> Groups {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    let value: serde_json::Value = serde_json::from_str(&text).expect("fixture is JSON");
    let wrapped = serde_json::json!({ "groups": value["groups"] }).to_string();
    ParamsFile::from_json(&wrapped).unwrap().groups(1e-4).unwrap()
}

pub fn fixture_value(name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

/// `sigma'(0) / pi_eps` for offset `n_f`.
pub fn unit_slope(n_f: f64) -> f64 {
    1.0 / ((1.0 + n_f.tanh()) * n_f.cosh().powi(2))
}

/// Groups with the effective damping tuned to `gamma` through `pi_eps`.
pub fn with_gamma(pi_l: f64, gamma: f64, n_f: f64, zeta: f64, pi_c: f64) -> Groups {
    let pi_f = 2.5;
    Groups {
        zeta,
        pi_f,
        pi_v: 0.5,
        pi_eps: (gamma - 2.0 * zeta) / (pi_f * unit_slope(n_f)),
        n_f,
        pi_c,
        pi_l,
        pi_s: 1.0,
        eps: 1e-4,
    }
}

/// Parameter points inside the strong-excitability and friction-offset ranges.
pub fn strongly_excitable_points() -> Vec<Groups> {
    vec![
        with_gamma(3600.0, 150.0, 0.5, 0.0, 1e4),
        with_gamma(1000.0, 120.0, 0.3, 0.0, 1e4),
        with_gamma(9000.0, 1000.0, 0.6, 0.0, 1e4),
        with_gamma(2000.0, 300.0, 0.4, 1.0, 5e3),
    ]
}

/// Random groups with `sqrt(5/3) < gamma < pi_l`.
pub fn random_hopf_groups<R: Rng>(rng: &mut R) -> Groups {
    let pi_l = 10f64.powf(rng.gen_range(0.5..4.0));
    let lo = (5.0f64 / 3.0).sqrt();
    let gamma = lo + (pi_l - lo) * rng.gen_range(0.02..0.98);
    let n_f = rng.gen_range(0.05..1.5);
    let zeta = rng.gen_range(0.0..0.5) * gamma / 2.0;
    let mut g = with_gamma(pi_l, gamma, n_f, zeta, 10f64.powf(rng.gen_range(-1.0..4.0)));
    g.pi_v = rng.gen_range(0.1..2.0);
    g.pi_f = rng.gen_range(0.5..5.0);
    g.pi_eps = (gamma - 2.0 * zeta) / (g.pi_f * unit_slope(n_f));
    g
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Strongly excitable point whose crawling cycle is short enough to settle
/// within a couple hundred time units.
pub fn crawling_point() -> Groups {
    fixture_groups("crawling_point.json")
}
