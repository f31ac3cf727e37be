//! Fixed points, Jacobian, higher derivatives of the vector field and the
//! eigenvector pair used by the normal-form computations.

use num_complex::Complex64;
use serde::Serialize;

use crate::cubic::cubic_roots;
use crate::dynamics::{Friction, State, S, V, VCOM, VS};
use crate::error::{Error, Result};
use crate::linalg::{inner, Lu, Mat, SINGULAR_CONDITION};
use crate::params::Groups;

pub type Matrix4 = [[f64; 4]; 4];
pub type CVec4 = [Complex64; 4];

/// Equilibria of the vector field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointSet {
    pub origin: State,
    /// Symmetric pair `x_+` and `x_- = g x_+`, present when the radicand is positive.
    pub pair: Option<(State, State)>,
    /// Radicand exactly zero: the pair has merged with the origin.
    pub degenerate: bool,
}

/// `(pi_l - 2 pi_V pi_s) / pi_c`; the nontrivial pair exists when positive.
pub fn pair_radicand(g: &Groups) -> f64 {
    (g.pi_l - 2.0 * g.pi_v * g.pi_s) / g.pi_c
}

pub fn fixed_points(g: &Groups) -> FixedPointSet {
    let r = pair_radicand(g);
    let pair = (r > 0.0).then(|| {
        let v = r.sqrt();
        let plus = State::new(v, 0.0, 2.0 * g.pi_v * v, 0.0);
        (plus, plus.reflect())
    });
    FixedPointSet { origin: State::default(), pair, degenerate: r == 0.0 }
}

/// Analytic Jacobian.
pub fn jacobian(x: &State, g: &Groups) -> Matrix4 {
    let fr = Friction::from_groups(g);
    let half = 0.5 * x.strain_rate;
    let rear = fr.d1(x.v_com - half);
    let front = fr.d1(x.v_com + half);
    let sum = front + rear;
    let diff = front - rear;
    let v = x.voltage;
    [
        [-3.0 * g.pi_c * v * v + g.pi_l, 0.0, -g.pi_s, 0.0],
        [0.0, -0.5 * g.pi_f * sum, 0.0, -0.25 * g.pi_f * diff],
        [0.0, 0.0, 0.0, 1.0],
        [2.0 * g.pi_v, -g.pi_f * diff, -1.0, -0.5 * g.pi_f * sum - 2.0 * g.zeta],
    ]
}

/// Multilinear form of order `k` (2 or 3) of the vector field at `x`, applied
/// to complex directions without conjugation.
///
/// The friction rows depend on the state only through the segment speeds
/// `v_com -+ v_s / 2`, so each derivative is the friction derivative at that
/// speed times the product of the directions' segment-speed components.
fn multilinear(x: &State, g: &Groups, dirs: &[&CVec4]) -> CVec4 {
    let k = dirs.len();
    let fr = Friction::from_groups(g);
    let half = 0.5 * x.strain_rate;
    let d_rear = fr.derivative(k, x.v_com - half);
    let d_front = fr.derivative(k, x.v_com + half);
    let one = Complex64::new(1.0, 0.0);
    let mut rear = one;
    let mut front = one;
    let mut volt = one;
    for d in dirs {
        rear *= d[VCOM] - 0.5 * d[VS];
        front *= d[VCOM] + 0.5 * d[VS];
        volt *= d[V];
    }
    let cubic = match k {
        2 => -6.0 * g.pi_c * x.voltage,
        3 => -6.0 * g.pi_c,
        _ => 0.0,
    };
    let mut out = [Complex64::default(); 4];
    out[V] = volt * cubic;
    out[VCOM] = -(0.5 * g.pi_f) * (rear * d_rear + front * d_front);
    out[S] = Complex64::default();
    out[VS] = g.pi_f * (rear * d_rear - front * d_front);
    out
}

/// Second derivative `D^2 f(x)[u, w]`.
pub fn d2f(x: &State, g: &Groups, u: &CVec4, w: &CVec4) -> CVec4 {
    multilinear(x, g, &[u, w])
}

/// Third derivative `D^3 f(x)[u, w, z]`.
pub fn d3f(x: &State, g: &Groups, u: &CVec4, w: &CVec4, z: &CVec4) -> CVec4 {
    multilinear(x, g, &[u, w, z])
}

pub fn to_complex(a: [f64; 4]) -> CVec4 {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Largest real part of the eigenvalues, via the characteristic factorization
/// at a fixed point of the symmetric pair.
pub fn max_real_part_at_pair(g: &Groups) -> f64 {
    let fr = Friction::from_groups(g);
    let gamma = g.pi_f * fr.d1(0.0) + 2.0 * g.zeta;
    let [c2, c1, c0] = pair_cubic(gamma, g.pi_l, g.pi_s * g.pi_v);
    let cubic_max = cubic_roots(c2, c1, c0).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    cubic_max.max(-g.pi_f * fr.d1(0.0))
}

/// Coefficients `(c2, c1, c0)` of the cubic factor of the characteristic
/// polynomial at the symmetric pair, in terms of the effective damping
/// `gamma`, `pi_l` and the loop gain `omega_gain = pi_s pi_V`.
pub fn pair_cubic(gamma: f64, pi_l: f64, loop_gain: f64) -> [f64; 3] {
    let d = 3.0 * loop_gain - pi_l;
    [gamma - 2.0 * d, 1.0 - 2.0 * gamma * d, 2.0 * (pi_l - 2.0 * loop_gain)]
}

/// All four eigenvalues at a member of the symmetric pair.
pub fn pair_eigenvalues(g: &Groups) -> [Complex64; 4] {
    let fr = Friction::from_groups(g);
    let rest = g.pi_f * fr.d1(0.0);
    let [c2, c1, c0] = pair_cubic(rest + 2.0 * g.zeta, g.pi_l, g.pi_s * g.pi_v);
    let [a, b, c] = cubic_roots(c2, c1, c0);
    [Complex64::new(-rest, 0.0), a, b, c]
}

/// Solves `(a) v = 0` with `v[index] = value` through a bordered system,
/// choosing the border column that gives the best-conditioned matrix.
fn null_vector(a: &Mat<4>, index: usize, value: Complex64) -> Result<CVec4> {
    let mut best: Option<(f64, Lu<5>)> = None;
    for col in 0..4 {
        let mut m = [[Complex64::default(); 5]; 5];
        for i in 0..4 {
            m[i][..4].copy_from_slice(&a[i]);
        }
        m[col][4] = Complex64::new(1.0, 0.0);
        m[4][index] = Complex64::new(1.0, 0.0);
        if let Ok(lu) = Lu::new(&m) {
            let cond = lu.condition();
            if best.as_ref().map_or(true, |(c, _)| cond < *c) {
                best = Some((cond, lu));
            }
        }
    }
    let (cond, lu) = best.ok_or(Error::Singular(f64::INFINITY))?;
    if cond > SINGULAR_CONDITION {
        return Err(Error::DegenerateEigenstructure(format!(
            "bordered system condition {cond:e}"
        )));
    }
    let mut rhs = [Complex64::default(); 5];
    rhs[4] = value;
    let sol = lu.solve(&rhs);
    Ok([sol[0], sol[1], sol[2], sol[3]])
}

/// Right eigenvector `q` of `J` for `i omega` and left vector `p` with
/// `J^T p = -i omega p`, scaled so that `<p, q> = 1`.
///
/// `q` is fixed by `q[S] = strain_component`.
pub fn critical_eigenvectors(
    j: &Matrix4,
    omega: f64,
    strain_component: f64,
) -> Result<(CVec4, CVec4)> {
    let iw = Complex64::new(0.0, omega);
    let a: Mat<4> = std::array::from_fn(|r| {
        std::array::from_fn(|c| Complex64::new(j[r][c], 0.0) - if r == c { iw } else { 0.0.into() })
    });
    let at: Mat<4> = std::array::from_fn(|r| {
        std::array::from_fn(|c| Complex64::new(j[c][r], 0.0) + if r == c { iw } else { 0.0.into() })
    });
    let q = null_vector(&a, S, Complex64::new(strain_component, 0.0))?;
    let p = null_vector(&at, S, Complex64::new(1.0, 0.0))?;
    for (m, v) in [(&a, &q), (&at, &p)] {
        let res: f64 = (0..4)
            .map(|r| (0..4).map(|c| m[r][c] * v[c]).sum::<Complex64>().norm())
            .fold(0.0, f64::max);
        let scale: f64 = v.iter().map(|z| z.norm()).fold(0.0, f64::max) * (1.0 + omega.abs());
        if res > 1e-8 * scale {
            return Err(Error::DegenerateEigenstructure(format!(
                "i*{omega} is not an eigenvalue (residual {res:e})"
            )));
        }
    }
    let pq = inner(&p, &q);
    let pn = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let qn = q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if pq.norm() < 1e-10 * pn * qn {
        return Err(Error::DegenerateEigenstructure("left and right vectors orthogonal".into()));
    }
    let scale = (1.0 / pq).conj();
    Ok((q, p.map(|z| z * scale)))
}
