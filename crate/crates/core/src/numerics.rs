//! Small numerical kernels shared across modules.

use std::f64::consts::PI;

use crate::{Mat2, Vec2};

/// Sixth-order central-difference weights for offsets -3..=3.
pub const CENTRAL6: [f64; 7] = [
    -1.0 / 60.0,
    3.0 / 20.0,
    -3.0 / 4.0,
    0.0,
    3.0 / 4.0,
    -3.0 / 20.0,
    1.0 / 60.0,
];

/// Wraps an angle into (-π, π].
pub fn principal_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Principal argument of `b · conj(a)`: the signed rotation carrying `a` to `b`.
pub fn angle_increment(a: Vec2, b: Vec2) -> f64 {
    let cross = a.x * b.y - a.y * b.x;
    let dot = a.dot(&b);
    cross.atan2(dot)
}

/// Argument in [0, 2π).
pub fn arg_0_2pi(v: Vec2) -> f64 {
    let a = v.y.atan2(v.x);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

pub fn unit(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

/// Counter-clockwise rotation by a quarter turn.
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Complex product of two planar vectors.
pub fn cmul(a: Vec2, b: Vec2) -> Vec2 {
    Vec2::new(a.x * b.x - a.y * b.y, a.x * b.y + a.y * b.x)
}

pub fn det(m: &Mat2) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

pub fn frobenius(m: &Mat2) -> f64 {
    m.norm()
}

/// Adjugate: `adj(m) · m = det(m) · I`.
pub fn adjugate(m: &Mat2) -> Mat2 {
    Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (mid + half * xi, half * wi))
        .collect()
}

/// Periodic sixth-order derivative of equispaced samples with spacing `h`.
pub fn periodic_derivative_vec(samples: &[Vec2], h: f64) -> Vec<Vec2> {
    let n = samples.len();
    (0..n)
        .map(|j| {
            let mut acc = Vec2::zeros();
            for (o, w) in CENTRAL6.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                let idx = (j as isize + o as isize - 3).rem_euclid(n as isize) as usize;
                acc += samples[idx] * *w;
            }
            acc / h
        })
        .collect()
}

/// Periodic sinc kernel of the band-limited interpolant through `n` equispaced samples.
pub fn periodic_sinc(n: usize, x: f64) -> f64 {
    let x = principal_angle(x);
    if x.abs() < 1e-14 {
        return 1.0;
    }
    let nf = n as f64;
    let half = 0.5 * x;
    if n % 2 == 0 {
        (nf * half).sin() / (nf * half.tan())
    } else {
        (nf * half).sin() / (nf * half.sin())
    }
}

/// Smooth step: 0 for t <= 0, 1 for t >= 1, C^∞ in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    let da = a / (t * t);
    let db = -b / ((1.0 - t) * (1.0 - t));
    (da * b - a * db) / ((a + b) * (a + b))
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 64] {
            let rule = gauss_legendre_on(0.0, 2.0, n);
            let deg = 2 * n - 1;
            let approx: f64 = rule.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert_relative_eq!(approx, exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn principal_angle_range() {
        assert_relative_eq!(principal_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_relative_eq!(principal_angle(-0.5), -0.5);
        assert_relative_eq!(principal_angle(7.0), 7.0 - 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn angle_increment_sign() {
        let a = unit(0.1);
        let b = unit(0.4);
        assert_relative_eq!(angle_increment(a, b), 0.3, epsilon = 1e-14);
        assert_relative_eq!(angle_increment(b, a), -0.3, epsilon = 1e-14);
    }

    #[test]
    fn periodic_sinc_reproduces_trig_polynomial() {
        let n = 16;
        let h = 2.0 * PI / n as f64;
        let f = |t: f64| 0.3 + (2.0 * t).sin() - 0.5 * (5.0 * t).cos();
        let x = 0.377;
        let interp: f64 = (0..n)
            .map(|j| f(j as f64 * h) * periodic_sinc(n, x - j as f64 * h))
            .sum();
        assert_relative_eq!(interp, f(x), epsilon = 1e-12);
    }

    #[test]
    fn smooth_step_derivative_matches_difference() {
        for &t in &[0.2, 0.5, 0.77] {
            let h = 1e-6;
            let fd = (smooth_step(t + h) - smooth_step(t - h)) / (2.0 * h);
            assert_relative_eq!(smooth_step_derivative(t), fd, max_relative = 1e-6);
        }
    }
}
