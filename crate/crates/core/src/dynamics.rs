//! Friction law and the crawler vector field in its regular, slow-time,
//! fast-time, desingularized and dimensional forms.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::params::{DimensionalParams, Groups};

/// Index of the voltage component.
pub const V: usize = 0;
/// Index of the centre-of-mass velocity.
pub const VCOM: usize = 1;
/// Index of the strain.
pub const S: usize = 2;
/// Index of the strain rate.
pub const VS: usize = 3;
/// Index of the centre-of-mass position in the augmented state.
pub const UCOM: usize = 4;

/// Dimensionless state `(V, v_com, s, v_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub voltage: f64,
    pub v_com: f64,
    pub strain: f64,
    pub strain_rate: f64,
}

impl State {
    pub const fn new(voltage: f64, v_com: f64, strain: f64, strain_rate: f64) -> Self {
        State { voltage, v_com, strain, strain_rate }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.voltage, self.v_com, self.strain, self.strain_rate]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        State::new(a[0], a[1], a[2], a[3])
    }

    pub fn norm(self) -> f64 {
        self.to_array().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Reflection `diag(-1, 1, -1, -1)` under which the field is equivariant.
    pub fn reflect(self) -> Self {
        State::new(-self.voltage, self.v_com, -self.strain, -self.strain_rate)
    }
}

impl Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        let (a, b) = (self.to_array(), o.to_array());
        State::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

impl Sub for State {
    type Output = State;
    fn sub(self, o: State) -> State {
        let (a, b) = (self.to_array(), o.to_array());
        State::from_array(std::array::from_fn(|i| a[i] - b[i]))
    }
}

impl Mul<State> for f64 {
    type Output = State;
    fn mul(self, o: State) -> State {
        State::from_array(o.to_array().map(|x| self * x))
    }
}

/// State extended with the centre-of-mass position.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentedState {
    pub state: State,
    pub u_com: f64,
}

impl AugmentedState {
    pub fn to_array(self) -> [f64; 5] {
        let [a, b, c, d] = self.state.to_array();
        [a, b, c, d, self.u_com]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        AugmentedState { state: State::new(y[0], y[1], y[2], y[3]), u_com: y[4] }
    }

    /// Rear and front segment positions.
    pub fn segment_positions(&self) -> (f64, f64) {
        let half = 0.5 * self.state.strain;
        (self.u_com - half, self.u_com + half)
    }
}

/// Smoothed anisotropic friction, normalized so that it vanishes at rest and
/// tends to `-1` for backward sliding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Friction {
    pub pi_eps: f64,
    pub n_f: f64,
    scale: f64,
    offset: f64,
}

/// `sech^2 z`, without overflow for large `|z|`.
pub fn sech2(z: f64) -> f64 {
    let e = (-2.0 * z.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

impl Friction {
    pub fn new(pi_eps: f64, n_f: f64) -> Self {
        let offset = n_f.tanh();
        Friction { pi_eps, n_f, scale: 1.0 / (1.0 + offset), offset }
    }

    pub fn from_groups(g: &Groups) -> Self {
        Friction::new(g.pi_eps, g.n_f)
    }

    /// Forward saturation level `(1 - tanh n_f) / (1 + tanh n_f)`.
    pub fn forward_limit(&self) -> f64 {
        (1.0 - self.offset) * self.scale
    }

    pub fn value(&self, u: f64) -> f64 {
        ((self.pi_eps * u + self.n_f).tanh() - self.offset) * self.scale
    }

    pub fn d1(&self, u: f64) -> f64 {
        self.scale * self.pi_eps * sech2(self.pi_eps * u + self.n_f)
    }

    pub fn d2(&self, u: f64) -> f64 {
        let z = self.pi_eps * u + self.n_f;
        -2.0 * self.scale * self.pi_eps.powi(2) * sech2(z) * z.tanh()
    }

    pub fn d3(&self, u: f64) -> f64 {
        let z = self.pi_eps * u + self.n_f;
        let t = z.tanh();
        -2.0 * self.scale * self.pi_eps.powi(3) * sech2(z) * (1.0 - 3.0 * t * t)
    }

    /// `k`-th derivative for `k <= 3`.
    pub fn derivative(&self, k: usize, u: f64) -> f64 {
        match k {
            0 => self.value(u),
            1 => self.d1(u),
            2 => self.d2(u),
            3 => self.d3(u),
            _ => panic!("friction derivative of order {k} not provided"),
        }
    }
}

/// Mechanical rows shared by all time scalings: `(v_com', v_s')` without the
/// voltage drive.
#[inline]
fn mechanics(g: &Groups, fr: &Friction, x: &State) -> (f64, f64) {
    let half = 0.5 * x.strain_rate;
    let rear = fr.value(x.v_com - half);
    let front = fr.value(x.v_com + half);
    let dv_com = -0.5 * g.pi_f * (rear + front);
    let dv_s = g.pi_f * (rear - front) - x.strain - 2.0 * g.zeta * x.strain_rate
        + 2.0 * g.pi_v * x.voltage;
    (dv_com, dv_s)
}

/// Regular-time vector field.
pub fn vector_field(x: &State, g: &Groups) -> State {
    vector_field_with(x, g, &Friction::from_groups(g))
}

/// [`vector_field`] with a precomputed friction law.
#[inline]
pub fn vector_field_with(x: &State, g: &Groups, fr: &Friction) -> State {
    let v = x.voltage;
    let dv = -g.pi_c * v * v * v + g.pi_l * v - g.pi_s * x.strain;
    let (dv_com, dv_s) = mechanics(g, fr, x);
    State::new(dv, dv_com, x.strain_rate, dv_s)
}

/// Voltage row written with the scaled groups, before division by `eps`.
pub fn voltage_rate_scaled(v: f64, s: f64, g: &Groups) -> f64 {
    -g.pi_c_eps() * v * v * v + g.pi_l_eps() * v - g.pi_s_eps() * s
}

/// Slow-time field: the voltage row is `(...)/eps`.
pub fn slow_field(x: &State, g: &Groups) -> State {
    let fr = Friction::from_groups(g);
    let (dv_com, dv_s) = mechanics(g, &fr, x);
    State::new(voltage_rate_scaled(x.voltage, x.strain, g) / g.eps, dv_com, x.strain_rate, dv_s)
}

/// Fast-time field: mechanics rows are multiplied by `eps`.
pub fn fast_field(x: &State, g: &Groups) -> State {
    let fr = Friction::from_groups(g);
    let (dv_com, dv_s) = mechanics(g, &fr, x);
    State::new(
        voltage_rate_scaled(x.voltage, x.strain, g),
        g.eps * dv_com,
        g.eps * x.strain_rate,
        g.eps * dv_s,
    )
}

/// Point of the critical-manifold chart `(V, v_com, v_s)`; the strain is
/// recovered from the manifold equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub voltage: f64,
    pub v_com: f64,
    pub strain_rate: f64,
}

impl ChartPoint {
    /// Strain on the critical manifold above this chart point.
    pub fn strain(&self, g: &Groups) -> f64 {
        let v = self.voltage;
        (g.pi_l_eps() * v - g.pi_c_eps() * v * v * v) / g.pi_s_eps()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.voltage, self.v_com, self.strain_rate]
    }
}

/// Reduced flow on the critical manifold; singular at the folds.
pub fn reduced_vector_field(y: &ChartPoint, g: &Groups) -> [f64; 3] {
    let x = State::new(y.voltage, y.v_com, y.strain(g), y.strain_rate);
    let (dv_com, dv_s) = mechanics(g, &Friction::from_groups(g), &x);
    let slope = g.pi_l_eps() - 3.0 * g.pi_c_eps() * y.voltage * y.voltage;
    [g.pi_s_eps() * y.strain_rate / slope, dv_com, dv_s]
}

/// Reduced flow after the time rescaling that removes the fold singularity.
pub fn desingularized_vector_field(y: &ChartPoint, g: &Groups) -> [f64; 3] {
    let x = State::new(y.voltage, y.v_com, y.strain(g), y.strain_rate);
    let (dv_com, dv_s) = mechanics(g, &Friction::from_groups(g), &x);
    let factor = 3.0 * g.pi_c_eps() * y.voltage * y.voltage - g.pi_l_eps();
    [-g.pi_s_eps() * y.strain_rate, factor * dv_com, factor * dv_s]
}

/// Augmented right-hand side `(V, v_com, s, v_s, u_com)`.
#[inline]
pub fn augmented_field(y: &[f64], g: &Groups, fr: &Friction, dy: &mut [f64]) {
    let x = State::new(y[0], y[1], y[2], y[3]);
    let f = vector_field_with(&x, g, fr);
    dy[0] = f.voltage;
    dy[1] = f.v_com;
    dy[2] = f.strain;
    dy[3] = f.strain_rate;
    dy[4] = y[1];
}

/// Physical state: voltage [V], velocities [m/s], strain [m].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalState {
    pub voltage: f64,
    pub v_com: f64,
    pub strain: f64,
    pub strain_rate: f64,
}

/// Physical time derivative of [`DimensionalState`].
pub fn dimensional_vector_field(x: &DimensionalState, p: &DimensionalParams) -> DimensionalState {
    let sigma = |u: f64| ((u / p.eps_f + p.n_f).tanh() - p.n_f.tanh()) / (1.0 + p.n_f.tanh());
    let half = 0.5 * x.strain_rate;
    let (rear, front) = (sigma(x.v_com - half), sigma(x.v_com + half));
    let v = x.voltage;
    DimensionalState {
        voltage: (-p.kappa * v * v * v + p.rho * v - p.gamma_p * x.strain) / p.c,
        v_com: -0.5 * p.a_sigma * (rear + front) / p.m,
        strain: x.strain_rate,
        strain_rate: (p.a_sigma * (rear - front)
            - 2.0 * (p.k * x.strain + p.b * x.strain_rate - p.k_v * v))
            / p.m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn groups() -> Groups {
        Groups {
            zeta: 0.3,
            pi_f: 2.5,
            pi_v: 0.5,
            pi_eps: 40.0,
            n_f: 0.5,
            pi_c: 1.0,
            pi_l: 3.0,
            pi_s: 2.0,
            eps: 1e-4,
        }
    }

    fn central(f: impl Fn(f64) -> f64, u: f64, h: f64) -> f64 {
        (f(u + h) - f(u - h)) / (2.0 * h)
    }

    #[test]
    fn friction_limits_and_rest() {
        let fr = Friction::new(4.7e3, 1.5);
        assert_eq!(fr.value(0.0), 0.0);
        assert!((fr.value(-1.0) + 1.0).abs() < 1e-12);
        assert!((fr.value(1.0) - fr.forward_limit()).abs() < 1e-12);
        assert!((fr.forward_limit() - (-3.0f64).exp()).abs() < 1e-15);
        assert!((fr.d1(0.0) - 445.8).abs() < 0.1);
    }

    #[test]
    fn friction_derivatives_match_differences() {
        let fr = Friction::new(3.0, 0.4);
        for &u in &[-0.7, -0.1, 0.0, 0.2, 0.9] {
            let h = 1e-5;
            assert!((fr.d1(u) - central(|x| fr.value(x), u, h)).abs() < 1e-8);
            assert!((fr.d2(u) - central(|x| fr.d1(x), u, h)).abs() < 1e-7);
            assert!((fr.d3(u) - central(|x| fr.d2(x), u, h)).abs() < 1e-6);
        }
    }

    #[test]
    fn third_derivative_sign_switches_at_offset_limit() {
        let lim = crate::params::friction_offset_limit();
        assert!(Friction::new(5.0, lim - 1e-3).d3(0.0) < 0.0);
        assert!(Friction::new(5.0, lim + 1e-3).d3(0.0) > 0.0);
    }

    #[test]
    fn sech2_is_finite_far_out() {
        assert_eq!(sech2(800.0), 0.0);
        assert!((sech2(0.0) - 1.0).abs() < 1e-16);
        assert!((sech2(0.3) - 1.0 / 0.3f64.cosh().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn time_scalings_are_consistent() {
        let g = groups();
        let x = State::new(0.3, 0.01, -0.2, 0.05);
        let f = vector_field(&x, &g);
        let slow = slow_field(&x, &g);
        let fast = fast_field(&x, &g);
        for i in 0..4 {
            assert!((slow.to_array()[i] - f.to_array()[i]).abs() < 1e-12);
            assert!((fast.to_array()[i] - g.eps * f.to_array()[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn desingularized_is_rescaled_reduced() {
        let g = groups();
        let y = ChartPoint { voltage: 1.1, v_com: 0.02, strain_rate: -0.3 };
        let r = reduced_vector_field(&y, &g);
        let d = desingularized_vector_field(&y, &g);
        let factor = -(g.pi_l_eps() - 3.0 * g.pi_c_eps() * 1.21);
        for i in 0..3 {
            assert!((d[i] - factor * r[i]).abs() < 1e-12 * (1.0 + d[i].abs()));
        }
    }
}
