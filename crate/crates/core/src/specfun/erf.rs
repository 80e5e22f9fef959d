use std::f64::consts::PI;

use crate::C64;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Maclaurin series; cancellation grows like `exp(|z|^2 - max(0, Re(-z^2)))`.
fn erf_taylor(z: C64) -> C64 {
    let z2 = -z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..5000 {
        term *= z2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

/// `erfc` by the classical continued fraction, valid for `Re z > 0`.
fn erfc_cf(z: C64) -> C64 {
    let tiny = 1e-300;
    let mut f = z;
    let mut c = f;
    let mut d = C64::new(0.0, 0.0);
    for n in 1..20000 {
        let a = n as f64 / 2.0;
        d = z + a * d;
        if d.norm() < tiny {
            d = C64::new(tiny, 0.0);
        }
        c = z + a / c;
        if c.norm() < tiny {
            c = C64::new(tiny, 0.0);
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z * z).exp() / (PI.sqrt() * f)
}

fn use_taylor(z: C64) -> bool {
    let r2 = z.norm_sqr();
    r2.min(2.0 * z.re * z.re) <= 6.0
}

pub fn erf_c(z: C64) -> C64 {
    if z.re < 0.0 {
        return -erf_c(-z);
    }
    if use_taylor(z) {
        erf_taylor(z)
    } else {
        1.0 - erfc_cf(z)
    }
}

pub fn erfc_c(z: C64) -> C64 {
    if z.re < 0.0 {
        return 2.0 - erfc_c(-z);
    }
    if use_taylor(z) {
        1.0 - erf_taylor(z)
    } else {
        erfc_cf(z)
    }
}

pub fn erfi_c(z: C64) -> C64 {
    let i = C64::new(0.0, 1.0);
    -i * erf_c(i * z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_values() {
        // reference values from a 30-digit evaluation
        let cases = [
            (0.5, 0.520_499_877_813_046_5),
            (1.0, 0.842_700_792_949_714_9),
            (2.0, 0.995_322_265_018_952_7),
            (3.5, 0.999_999_256_901_627_7),
        ];
        for (x, want) in cases {
            let got = erf_c(C64::new(x, 0.0));
            assert!((got.re - want).abs() < 1e-15, "x={x} got {got}");
            assert!(got.im.abs() < 1e-16);
        }
        let tail = erfc_c(C64::new(6.0, 0.0)).re;
        assert!((tail - 2.151_973_671_249_891_3e-17).abs() < 1e-29);
    }

    #[test]
    fn methods_agree_on_the_switch_boundary() {
        let r = 6.0f64.sqrt();
        let x = 3.0f64.sqrt();
        let mut pts: Vec<C64> = (0..20)
            .map(|k| C64::from_polar(r, (k as f64 / 19.0 - 0.5) * PI / 2.0))
            .collect();
        pts.extend((0..20).map(|k| C64::new(x, 1.8 + 0.2 * k as f64)));
        for z in pts {
            let a = erf_taylor(z);
            let b = 1.0 - erfc_cf(z);
            assert!((a - b).norm() <= 2e-13 * a.norm().max(1.0), "z={z} {a} {b}");
        }
    }

    #[test]
    fn symmetries() {
        let z = C64::new(1.3, -0.7);
        assert!((erf_c(z.conj()) - erf_c(z).conj()).norm() < 1e-15);
        assert!((erf_c(-z) + erf_c(z)).norm() < 1e-15);
        assert!((erfc_c(z) + erf_c(z) - 1.0).norm() < 1e-15);
    }
}
