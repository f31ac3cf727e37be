mod common;

use crawlerlab_core::bifurcation::{
    check_assumptions, effective_damping, first_lyapunov, hopf_gain, hopf_loop_gain_roots, hopf_point,
    lyapunov_at, lyapunov_terms, pitchfork, resting_regime_check, transversality,
};
use crawlerlab_core::dynamics::vector_field;
use crawlerlab_core::equilibria::{
    critical_eigenvectors, fixed_points, jacobian, pair_cubic, pair_eigenvalues, CVec4,
};
use crawlerlab_core::{Groups, State};
use nalgebra::{Matrix3, Matrix4};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest real part of the cubic roots, from the companion matrix.
fn companion_max_real(gamma: f64, pi_l: f64, loop_gain: f64) -> f64 {
    let [c2, c1, c0] = pair_cubic(gamma, pi_l, loop_gain);
    let m = Matrix3::new(0.0, 0.0, -c0, 1.0, 0.0, -c1, 0.0, 1.0, -c2);
    m.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// First loss of stability of the cubic on a uniform scan of `(0, pi_l / 2)`
/// in the loop gain, refined by bisection.
fn bisected_hopf_gain(g: &Groups) -> f64 {
    let gamma = effective_damping(g);
    let f = |k: f64| companion_max_real(gamma, g.pi_l, k);
    let top = 0.5 * g.pi_l;
    let n = 2000;
    let mut lo = top * 1e-9;
    assert!(f(lo) < 0.0);
    let mut hi = f64::NAN;
    for i in 1..=n {
        let k = top * i as f64 / n as f64;
        if f(k) >= 0.0 {
            hi = k;
            break;
        }
        lo = k;
    }
    assert!(hi.is_finite(), "no crossing below the pitchfork");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / g.pi_v
}

#[test]
fn hopf_gain_matches_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let g = common::random_hopf_groups(&mut rng);
        let closed = hopf_gain(&g).unwrap();
        let oracle = bisected_hopf_gain(&g);
        assert!(common::rel_err(closed, oracle) < 1e-9, "{closed} vs {oracle} for {g:?}");
    }
}

#[test]
fn analytic_fixture() {
    let g = common::fixture_groups("hopf_analytic.json");
    let hp = hopf_point(&g).unwrap();
    assert!((hp.gamma - 2.0).abs() < 1e-14);
    assert!((hp.pi_s - 2.0).abs() < 1e-13);
    assert!((hp.omega - 1.0).abs() < 1e-13);
    let [c2, c1, c0] = pair_cubic(hp.gamma, g.pi_l, hp.pi_s * g.pi_v);
    assert!((c1 * c2 - c0).abs() < 1e-12);
    assert!((hp.transversality - 2.6).abs() < 1e-12);
}

#[test]
fn discarded_root_gives_imaginary_frequency() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let g = common::random_hopf_groups(&mut rng);
        let gamma = effective_damping(&g);
        let (kept, dropped) = hopf_loop_gain_roots(gamma, g.pi_l).unwrap();
        assert!(kept <= dropped);
        for k in [kept, dropped] {
            let [c2, c1, c0] = pair_cubic(gamma, g.pi_l, k);
            assert!((c1 * c2 - c0).abs() < 1e-8 * (c1 * c2).abs().max(c0.abs()).max(1.0));
        }
        assert!(pair_cubic(gamma, g.pi_l, dropped)[1] < 0.0);
    }
}

/// Real part of the eigenvalue closest to the imaginary axis with positive
/// imaginary part.
fn critical_real_part(g: &Groups) -> f64 {
    pair_eigenvalues(g)
        .iter()
        .filter(|z| z.im > 0.0)
        .map(|z| z.re)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap()
}

#[test]
fn transversality_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut checked = 0;
    for _ in 0..40 {
        let g = common::random_hopf_groups(&mut rng);
        let hp = hopf_point(&g).unwrap();
        let h = 1e-6 * hp.pi_s;
        let up = critical_real_part(&g.with_pi_s(hp.pi_s + h));
        let down = critical_real_part(&g.with_pi_s(hp.pi_s - h));
        let fd = (up - down) / (2.0 * h * g.pi_v);
        assert!(common::rel_err(hp.transversality, fd) < 1e-5, "{} vs {fd}", hp.transversality);
        assert!(hp.transversality > 0.0);
        checked += 1;
    }
    assert_eq!(checked, 40);
    assert!((transversality(2.0, 1.0) - 2.6).abs() < 1e-15);
}

#[test]
fn pitchfork_at_origin() {
    for g in common::strongly_excitable_points().into_iter().chain([common::fixture_groups("desk_scale.json")]) {
        let pf = pitchfork(&g).unwrap();
        assert_eq!(pf.pi_s, g.pi_l / (2.0 * g.pi_v));
        let j = jacobian(&State::default(), &g.with_pi_s(pf.pi_s));
        let m = Matrix4::from_fn(|r, c| j[r][c]);
        let scale: f64 = m.abs().row_iter().map(|r| r.sum()).product();
        assert!(m.determinant().abs() < 1e-8 * scale, "det {}", m.determinant());
        let v = nalgebra::Vector4::from(pf.null_right);
        let w = nalgebra::Vector4::from(pf.null_left);
        assert!((m * v).norm() < 1e-10 * m.norm() * v.norm());
        assert!((m.transpose() * w).norm() < 1e-10 * m.norm() * w.norm());
        assert_eq!(pf.c_transversal, 4.0 * g.pi_v * g.pi_v);
        assert_eq!(pf.c_cubic, 12.0 * g.pi_c * g.pi_v);
        assert_eq!(pf.c_quadratic, 0.0);
        assert!(pf.subcritical);
        let dense = m.complex_eigenvalues();
        for (re, im) in pf.eigenvalues {
            let z = Complex64::new(re, im);
            let d = dense.iter().map(|e| (e - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8 * m.norm(), "{z} not in {dense:?}");
        }
    }
    assert_eq!(pitchfork(&common::fixture_groups("desk_scale.json")).unwrap().pi_s, 2e4);
}

#[test]
fn regime_check_brackets_the_hopf_gain() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..30 {
        let g = common::random_hopf_groups(&mut rng);
        let h = hopf_gain(&g).unwrap();
        let below = resting_regime_check(&g.with_pi_s(0.5 * h)).unwrap();
        assert!(below.resting && !below.crawling && below.consistent());
        // Above the pitchfork gain the pair no longer exists.
        let up = (1.5 * h).min(0.5 * (h + g.pi_l / (2.0 * g.pi_v)));
        let above = resting_regime_check(&g.with_pi_s(up)).unwrap();
        assert!(above.crawling && above.max_real_part > 0.0 && above.consistent());
        let at = resting_regime_check(&g.with_pi_s(h)).unwrap();
        assert!(at.max_real_part.abs() < 1e-6 * (1.0 + g.pi_l), "{}", at.max_real_part);
    }
}

#[test]
fn lyapunov_sign_ignores_eigenvector_scale() {
    let mut points = common::strongly_excitable_points();
    points.push(common::fixture_groups("hopf_analytic.json"));
    for g in points {
        let base = first_lyapunov(&g, 1.0).unwrap();
        for scale in [2.0, -1.0, 1e-3, 50.0] {
            let l = first_lyapunov(&g, scale).unwrap();
            assert_eq!(l.signum(), base.signum(), "scale {scale}");
        }
    }
}

/// Complex multilinear extension of a real finite-difference form.
fn complexify2(f: &dyn Fn(&[f64; 4], &[f64; 4]) -> [f64; 4], u: &CVec4, w: &CVec4) -> CVec4 {
    let (ur, ui) = (u.map(|z| z.re), u.map(|z| z.im));
    let (wr, wi) = (w.map(|z| z.re), w.map(|z| z.im));
    let (rr, ii, ri, ir) = (f(&ur, &wr), f(&ui, &wi), f(&ur, &wi), f(&ui, &wr));
    std::array::from_fn(|k| Complex64::new(rr[k] - ii[k], ri[k] + ir[k]))
}

fn complexify3(
    f: &dyn Fn(&[f64; 4], &[f64; 4], &[f64; 4]) -> [f64; 4],
    u: &CVec4,
    w: &CVec4,
    z: &CVec4,
) -> CVec4 {
    let parts = |v: &CVec4| [v.map(|c| c.re), v.map(|c| c.im)];
    let (pu, pw, pz) = (parts(u), parts(w), parts(z));
    let mut out = [Complex64::default(); 4];
    for (a, ua) in pu.iter().enumerate() {
        for (b, wb) in pw.iter().enumerate() {
            for (c, zc) in pz.iter().enumerate() {
                let unit = Complex64::new(0.0, 1.0).powu((a + b + c) as u32);
                let val = f(ua, wb, zc);
                for k in 0..4 {
                    out[k] += unit * val[k];
                }
            }
        }
    }
    out
}

fn shifted(x: &State, dirs: &[(&[f64; 4], f64)]) -> State {
    let mut a = x.to_array();
    for (d, t) in dirs {
        for i in 0..4 {
            a[i] += t * d[i];
        }
    }
    State::from_array(a)
}

#[test]
fn lyapunov_coefficient_with_difference_derivatives() {
    let mut points = common::strongly_excitable_points();
    points.push(common::fixture_groups("hopf_analytic.json"));
    for g in points {
        let hp = hopf_point(&g).unwrap();
        let gh = g.with_pi_s(hp.pi_s);
        let (x, _) = fixed_points(&gh).pair.unwrap();
        let j = jacobian(&x, &gh);
        let (q, p) = critical_eigenvectors(&j, hp.omega, 1.0).unwrap();
        let f = |y: State| vector_field(&y, &gh).to_array();
        // Step sizes in units of the smallest friction scale.
        let h2 = 1e-4 / gh.pi_eps;
        let h3 = 3e-3 / gh.pi_eps;
        let fd2 = |u: &[f64; 4], w: &[f64; 4]| -> [f64; 4] {
            let e = |a: f64, b: f64| f(shifted(&x, &[(u, a), (w, b)]));
            let (pp, pm, mp, mm) = (e(h2, h2), e(h2, -h2), e(-h2, h2), e(-h2, -h2));
            std::array::from_fn(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h2 * h2))
        };
        let fd3 = |u: &[f64; 4], v: &[f64; 4], w: &[f64; 4]| -> [f64; 4] {
            let mut acc = [0.0; 4];
            for (a, b, c) in [(1.0, 1.0, 1.0), (1.0, 1.0, -1.0), (1.0, -1.0, 1.0), (1.0, -1.0, -1.0)] {
                for s in [1.0, -1.0] {
                    let y = f(shifted(&x, &[(u, s * a * h3), (v, s * b * h3), (w, s * c * h3)]));
                    for k in 0..4 {
                        acc[k] += s * a * b * c * y[k];
                    }
                }
            }
            acc.map(|t| t / (8.0 * h3 * h3 * h3))
        };
        let numeric = lyapunov_terms(&j, hp.omega, &q, &p, |u, w| complexify2(&fd2, u, w), |u, w, z| {
            complexify3(&fd3, u, w, z)
        })
        .unwrap()
        .l1();
        let exact = lyapunov_at(&x, &gh, hp.omega, 1.0).unwrap();
        assert!(common::rel_err(numeric, exact) < 1e-3, "{numeric} vs {exact}");
    }
}

#[test]
fn assumption_flags() {
    let g = common::fixture_groups("desk_scale.json");
    let flags = check_assumptions(&g, false).unwrap();
    assert!(check_assumptions(&g, true).is_err() == !flags.is_empty());
    let mut bad = common::fixture_groups("hopf_analytic.json");
    bad.pi_l = 1.5;
    assert!(hopf_gain(&bad).is_err());
    let flags = check_assumptions(&bad, false).unwrap();
    assert!(flags.iter().any(|a| a.flag() == "gamma_out_of_range"), "{flags:?}");
}
