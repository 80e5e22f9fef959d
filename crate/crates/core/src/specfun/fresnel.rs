use std::f64::consts::PI;

use super::erf::erf_c;
use crate::C64;

/// `C(x) + i S(x) = (1+i)/2 * erf(sqrt(pi)/2 (1-i) x)`.
fn fresnel_pair(x: f64) -> C64 {
    if x.abs() < 0.5 {
        return fresnel_series(x);
    }
    let w = C64::new(1.0, -1.0) * (PI.sqrt() / 2.0 * x);
    C64::new(0.5, 0.5) * erf_c(w)
}

/// Direct power series of `int_0^x exp(i pi t^2 / 2) dt`.
fn fresnel_series(x: f64) -> C64 {
    let u = C64::new(0.0, PI / 2.0 * x * x);
    let mut term = C64::new(x, 0.0);
    let mut sum = term;
    for n in 1..200 {
        term *= u / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

pub fn fresnel_c(x: f64) -> f64 {
    fresnel_pair(x).re
}

pub fn fresnel_s(x: f64) -> f64 {
    fresnel_pair(x).im
}
