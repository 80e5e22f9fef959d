//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nhq::C64;

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn gl_panel(f: &dyn Fn(f64) -> C64, a: f64, b: f64, rule: &[(f64, f64)]) -> C64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    rule.iter().map(|&(x, w)| f(m + r * x) * w).sum::<C64>() * r
}

fn adapt(f: &dyn Fn(f64) -> C64, a: f64, b: f64, whole: C64, tol: f64, depth: u32, rule: &[(f64, f64)]) -> C64 {
    let m = 0.5 * (a + b);
    let (l, r) = (gl_panel(f, a, m, rule), gl_panel(f, m, b, rule));
    let mass = gl_panel(&|x| C64::new(f(x).norm(), 0.0), a, b, rule).norm();
    let floor = 64.0 * f64::EPSILON * mass;
    if (l + r - whole).norm() <= tol.max(floor) || depth == 0 {
        l + r
    } else {
        adapt(f, a, m, l, 0.5 * tol, depth - 1, rule) + adapt(f, m, b, r, 0.5 * tol, depth - 1, rule)
    }
}

/// Adaptive 15-point Gauss-Legendre quadrature of a complex integrand on
/// `[a, b]`, to relative tolerance `rtol` of the integral of `|f|`.
pub fn quad(f: impl Fn(f64) -> C64, a: f64, b: f64, rtol: f64) -> C64 {
    let rule = gauss_legendre(15);
    let scale = gl_panel(&|x| C64::new(f(x).norm(), 0.0), a, b, &rule).norm();
    let whole = gl_panel(&f, a, b, &rule);
    adapt(&f, a, b, whole, rtol * scale.max(1e-300), 30, &rule)
}

/// `int_0^z g(t) dt` along the straight segment from 0 to `z`.
pub fn path_integral(g: impl Fn(C64) -> C64, z: C64, tol: f64) -> C64 {
    quad(|s| g(z * s) * z, 0.0, 1.0, tol)
}

pub fn fresnel_s_quad(x: f64) -> f64 {
    quad(|t| C64::new((0.5 * PI * t * t).sin(), 0.0), 0.0, x, 1e-14).re
}

pub fn fresnel_c_quad(x: f64) -> f64 {
    quad(|t| C64::new((0.5 * PI * t * t).cos(), 0.0), 0.0, x, 1e-14).re
}

pub fn erf_quad(z: C64) -> C64 {
    path_integral(|t| (-t * t).exp(), z, 1e-14) * (2.0 / PI.sqrt())
}

pub fn erfi_quad(z: C64) -> C64 {
    path_integral(|t| (t * t).exp(), z, 1e-14) * (2.0 / PI.sqrt())
}

/// Classical RK4 for `y' = f(x, y)` on a complex two-vector along the real
/// parameter `x`, with `n` equal steps from `x0` to `x1`.
pub fn rk4_vec2(f: impl Fn(f64, [C64; 2]) -> [C64; 2], x0: f64, x1: f64, y0: [C64; 2], n: usize) -> [C64; 2] {
    let h = (x1 - x0) / n as f64;
    let add = |y: [C64; 2], k: [C64; 2], s: f64| [y[0] + k[0] * s, y[1] + k[1] * s];
    let mut y = y0;
    for i in 0..n {
        let x = x0 + h * i as f64;
        let k1 = f(x, y);
        let k2 = f(x + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = f(x + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = f(x + h, add(y, k3, h));
        for j in 0..2 {
            y[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
        }
    }
    y
}

/// Leading asymptotic terms of `D_nu(z)` and its derivative for large real `z`.
pub fn weber_asymptotic(nu: C64, z: f64) -> (C64, C64) {
    let mut term = C64::new(1.0, 0.0);
    let (mut sum, mut dsum) = (term, C64::new(0.0, 0.0));
    for k in 1..12 {
        let kk = k as f64;
        term = -term * (nu - (2.0 * kk - 2.0)) * (nu - (2.0 * kk - 1.0)) / (kk * 2.0 * z * z);
        sum += term;
        dsum += term * (-2.0 * kk / z);
    }
    let pre = C64::new(z, 0.0).powc(nu) * (-z * z / 4.0).exp();
    let dpre = pre * (nu / z - z / 2.0);
    (pre * sum, dpre * sum + pre * dsum)
}

/// `D_nu(z0)` by integrating Weber's equation `w'' = (z^2/4 - nu - 1/2) w`
/// inward from the asymptotic region at `z_start` to real `z0`.
pub fn weber_ode_inward(nu: C64, z0: f64, z_start: f64, steps: usize) -> C64 {
    let (w, dw) = weber_asymptotic(nu, z_start);
    let y = rk4_vec2(
        |x, y| [y[1], y[0] * (x * x / 4.0 - nu - 0.5)],
        z_start,
        z0,
        [w, dw],
        steps,
    );
    y[0]
}

/// Root of `f` in `[a, b]` by bisection; `f(a)` and `f(b)` must differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) <= 0.0, "root not bracketed");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if (b - a).abs() <= 1e-16 * m.abs() {
            break;
        }
    }
    0.5 * (a + b)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Log-spaced points from `a` to `b` inclusive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}
