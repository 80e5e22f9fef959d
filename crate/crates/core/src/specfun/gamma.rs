use std::f64::consts::PI;

use crate::C64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn sin_cos_pi_real(x: f64) -> (f64, f64) {
    // reduce to r in [-1, 1] so integers and half-integers come out exact
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 {
        return (0.0, 1.0);
    }
    if r.abs() == 1.0 {
        return (0.0, -1.0);
    }
    if r == 0.5 {
        return (1.0, 0.0);
    }
    if r == -0.5 {
        return (-1.0, 0.0);
    }
    ((PI * r).sin(), (PI * r).cos())
}

/// `sin(pi z)` with exact zeros at the integers.
pub fn sin_pi(z: C64) -> C64 {
    let (s, c) = sin_cos_pi_real(z.re);
    let y = PI * z.im;
    C64::new(s * y.cosh(), c * y.sinh())
}

/// Principal-branch log Gamma for `Re z >= 0.5`.
fn ln_gamma_right(z: C64) -> C64 {
    let z = z - 1.0;
    let mut a = C64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// Log Gamma; the imaginary part is a valid (not necessarily principal) branch.
pub fn ln_gamma(z: C64) -> C64 {
    if z.re >= 0.5 {
        ln_gamma_right(z)
    } else {
        C64::new(PI, 0.0).ln() - sin_pi(z).ln() - ln_gamma_right(1.0 - z)
    }
}

pub fn gamma(z: C64) -> C64 {
    if z.re >= 0.5 {
        ln_gamma_right(z).exp()
    } else {
        PI / (sin_pi(z) * ln_gamma_right(1.0 - z).exp())
    }
}

/// `1/Gamma(z)`, entire, exactly zero at the non-positive integers.
pub fn rgamma(z: C64) -> C64 {
    if z.re >= 0.5 {
        (-ln_gamma_right(z)).exp()
    } else {
        sin_pi(z) * ln_gamma_right(1.0 - z).exp() / PI
    }
}
