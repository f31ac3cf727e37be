//! Slow-fast structure: critical manifold, its folds and the folded
//! singularities of the desingularized reduced flow.

use serde::Serialize;

use crate::cubic::cubic_roots;
use crate::dynamics::voltage_rate_scaled;
use crate::error::{Error, Result};
use crate::params::Groups;

/// Voltage-row residual; zero on the critical manifold.
pub fn critical_manifold_residual(v: f64, s: f64, g: &Groups) -> f64 {
    -voltage_rate_scaled(v, s, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStability {
    Attracting,
    Repelling,
    /// Double root at a fold.
    Fold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch {
    pub voltage: f64,
    pub stability: BranchStability,
}

fn classify(v: f64, g: &Groups) -> BranchStability {
    let slope = g.pi_l_eps() - 3.0 * g.pi_c_eps() * v * v;
    if slope < 0.0 {
        BranchStability::Attracting
    } else {
        BranchStability::Repelling
    }
}

/// Voltages on the critical manifold above strain `s`, in ascending order.
pub fn manifold_branches(s: f64, g: &Groups) -> Vec<Branch> {
    let (pc, pl, ps) = (g.pi_c_eps(), g.pi_l_eps(), g.pi_s_eps());
    let folds = fold_points(g);
    let s_fold = folds.strain.abs();
    let tol = 1e-12 * s_fold.max(f64::MIN_POSITIVE);
    if (s.abs() - s_fold).abs() <= tol {
        // Roots sum to zero, so the simple root is minus twice the double one.
        let double = s.signum() * folds.voltage.abs();
        let mut out = vec![
            Branch { voltage: -2.0 * double, stability: classify(-2.0 * double, g) },
            Branch { voltage: double, stability: BranchStability::Fold },
        ];
        out.sort_by(|a, b| a.voltage.total_cmp(&b.voltage));
        return out;
    }
    let roots = cubic_roots(0.0, -pl / pc, ps * s / pc);
    let mut out: Vec<Branch> = roots
        .iter()
        .filter(|z| z.im == 0.0)
        .map(|z| Branch { voltage: z.re, stability: classify(z.re, g) })
        .collect();
    out.sort_by(|a, b| a.voltage.total_cmp(&b.voltage));
    out
}

/// Upper fold `(V_F, s_F)`; the lower one is its negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldPoint {
    pub voltage: f64,
    pub strain: f64,
}

pub fn fold_points(g: &Groups) -> FoldPoint {
    let (pc, pl, ps) = (g.pi_c_eps(), g.pi_l_eps(), g.pi_s_eps());
    FoldPoint {
        voltage: (pl / (3.0 * pc)).sqrt(),
        strain: 2.0 * pl.powf(1.5) / (3.0 * 3f64.sqrt() * pc.sqrt() * ps),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldedKind {
    Saddle,
    Centre,
}

/// Folds and the classification of the folded singularities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldData {
    pub upper: FoldPoint,
    pub lower: FoldPoint,
    /// `pi_s` at which the folded singularity changes type: `pi_l / (3 pi_V)`.
    pub pi_s_switch: f64,
    /// Nonzero eigenvalues `+-lambda` (real for a saddle) of the
    /// desingularized flow linearized at a folded singularity.
    pub eigenvalue: (f64, f64),
    pub kind: FoldedKind,
}

/// Product whose sign decides the folded singularity type.
fn folded_product(g: &Groups) -> f64 {
    g.pi_l_eps() * (g.pi_l_eps() / 3.0 - g.pi_v * g.pi_s_eps())
}

pub fn fold_data(g: &Groups) -> Result<FoldData> {
    let switch = g.pi_l / (3.0 * g.pi_v);
    let product = folded_product(g);
    if product == 0.0 || g.pi_s == switch {
        return Err(Error::Degenerate(format!(
            "pi_s = {} is on the folded saddle/centre boundary",
            g.pi_s
        )));
    }
    let upper = fold_points(g);
    let root = 2.0 * product.abs().sqrt();
    let (eigenvalue, kind) = if product > 0.0 {
        ((root, 0.0), FoldedKind::Saddle)
    } else {
        ((0.0, root), FoldedKind::Centre)
    };
    Ok(FoldData {
        upper,
        lower: FoldPoint { voltage: -upper.voltage, strain: -upper.strain },
        pi_s_switch: switch,
        eigenvalue,
        kind,
    })
}
