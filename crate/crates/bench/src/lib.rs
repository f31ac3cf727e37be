//! Parameter points shared by the benchmarks, read from the fixture files.

use crawlerlab_core::{Groups, State};
use serde_json::Value;

fn groups(text: &str) -> Groups {
    let v: Value = serde_json::from_str(text).expect("fixture is valid JSON");
    serde_json::from_value(v["groups"].clone()).expect("fixture has a groups block")
}

/// Desk-scale crawling point.
pub fn desk_scale() -> Groups {
    groups(include_str!("../../../fixtures/desk_scale.json"))
}

/// Relay harmonic-balance point.
pub fn relay_point() -> Groups {
    groups(include_str!("../../../fixtures/relay_optimum.json"))
}

/// Point with an exactly known Hopf gain.
pub fn analytic_hopf() -> Groups {
    groups(include_str!("../../../fixtures/hopf_analytic.json"))
}

/// Strongly excitable point with a short crawling cycle.
pub fn crawling() -> Groups {
    groups(include_str!("../../../fixtures/crawling_point.json"))
}

/// Reproducible pseudo-random states in a box around the origin.
pub fn states(n: usize) -> Vec<State> {
    let mut x: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    (0..n).map(|_| State::new(2.0 * next(), next(), next(), next())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        for g in [desk_scale(), relay_point(), analytic_hopf(), crawling()] {
            g.validate().unwrap();
        }
        assert_eq!(states(3).len(), 3);
    }
}
