//! Roots of monic cubics `x^3 + c2 x^2 + c1 x + c0`.

use num_complex::Complex64;

fn eval(c2: f64, c1: f64, c0: f64, x: f64) -> (f64, f64) {
    let p = ((x + c2) * x + c1) * x + c0;
    let dp = (3.0 * x + 2.0 * c2) * x + c1;
    (p, dp)
}

fn polish(c2: f64, c1: f64, c0: f64, mut x: f64) -> f64 {
    for _ in 0..8 {
        let (p, dp) = eval(c2, c1, c0, x);
        if dp == 0.0 || p == 0.0 {
            break;
        }
        let step = p / dp;
        let next = x - step;
        if !next.is_finite() || eval(c2, c1, c0, next).0.abs() >= p.abs() {
            break;
        }
        x = next;
    }
    x
}

fn polish_complex(c2: f64, c1: f64, c0: f64, mut z: Complex64) -> Complex64 {
    let p = |z: Complex64| ((z + c2) * z + c1) * z + c0;
    for _ in 0..4 {
        let dp = (3.0 * z + 2.0 * c2) * z + c1;
        if dp.norm() == 0.0 {
            break;
        }
        let next = z - p(z) / dp;
        if !(next.re.is_finite() && next.im.is_finite()) || p(next).norm() >= p(z).norm() {
            break;
        }
        z = next;
    }
    z
}

/// Roots of `x^2 + p x + q` without cancellation.
pub fn quadratic_roots(p: f64, q: f64) -> [Complex64; 2] {
    let disc = p * p - 4.0 * q;
    if disc >= 0.0 {
        let t = -0.5 * (p + p.signum() * disc.sqrt());
        if t == 0.0 {
            return [Complex64::default(); 2];
        }
        let (a, b) = (t, q / t);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(-0.5 * p, -im), Complex64::new(-0.5 * p, im)]
    }
}

/// All three roots, real ones first in ascending order, then any conjugate
/// pair with negative imaginary part first.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    // Depressed form t^3 + p t + q with x = t - c2/3.
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let real_root = if disc < 0.0 {
        // Three real roots: trigonometric form, pick the largest magnitude one.
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let candidates = [0, 1, 2].map(|k| {
            r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift
        });
        candidates.into_iter().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap()
    } else {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        u + v - shift
    };
    let r = polish(c2, c1, c0, real_root);
    // Deflate: x^3 + c2 x^2 + c1 x + c0 = (x - r)(x^2 + b x + d).
    let b = c2 + r;
    let d = if r.abs() > 1.0 && r != 0.0 { -c0 / r } else { c1 + r * b };
    let [z1, z2] = quadratic_roots(b, d);
    let mut roots = if z1.im == 0.0 {
        let mut v = [
            Complex64::new(r, 0.0),
            Complex64::new(polish(c2, c1, c0, z1.re), 0.0),
            Complex64::new(polish(c2, c1, c0, z2.re), 0.0),
        ];
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
        v
    } else {
        let z = polish_complex(c2, c1, c0, z2);
        [Complex64::new(r, 0.0), z.conj(), z]
    };
    for z in roots.iter_mut() {
        if z.im == -0.0 {
            z.im = 0.0;
        }
    }
    roots
}
