//! Parabolic cylinder function `D_nu(z)` (Whittaker's notation), solution of
//! `w'' + (nu + 1/2 - z^2/4) w = 0` with `D_nu(z) ~ z^nu exp(-z^2/4)` for
//! large `|z|`, `|arg z| < 3pi/4`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use super::gamma::rgamma;
use super::{Method, SpecFunResult};
use crate::{Error, Result, C64};

pub const PCF_SERIES_RADIUS: f64 = 8.0;
pub const PCF_ASYMPTOTIC_RADIUS: f64 = 30.0;
pub const PCF_Z_MAX: f64 = 1e3;

const EPS: f64 = f64::EPSILON;
/// Relative error accepted before moving on to the next method.
const ACCEPT_REL: f64 = 1e-12;
/// Relative error above which the result is reported as lost.
const LOSS_REL: f64 = 1e-6;

/// Value and first derivative with a shared error estimate.
#[derive(Debug, Clone, Copy)]
struct Eval {
    w: C64,
    dw: C64,
    err_w: f64,
    err_dw: f64,
}

impl Eval {
    fn rel_err(&self) -> f64 {
        self.err_w / self.w.norm().max(f64::MIN_POSITIVE)
    }
}

fn values_at_zero(nu: C64) -> (C64, C64) {
    let sqrt_pi = PI.sqrt();
    let ln2 = std::f64::consts::LN_2;
    let d0 = (nu * ln2 / 2.0).exp() * sqrt_pi * rgamma((1.0 - nu) / 2.0);
    let d1 = -((nu + 1.0) * ln2 / 2.0).exp() * sqrt_pi * rgamma(-nu / 2.0);
    (d0, d1)
}

/// Maclaurin series from the ODE recurrence
/// `(n+2)(n+1) c_{n+2} = -(nu + 1/2) c_n + c_{n-2} / 4`.
fn series(nu: C64, z: C64) -> Eval {
    let (d0, d1) = values_at_zero(nu);
    let q = -(nu + 0.5);
    // b_n = c_n z^n, kept scaled to avoid forming z^n separately
    let z2 = z * z;
    let z4 = z2 * z2;
    let mut b = vec![d0, d1 * z];
    let mut w = b[0] + b[1];
    let mut dwz = b[1]; // sum n b_n = z w'
    let mut abs_w = b[0].norm() + b[1].norm();
    let mut abs_dw = b[1].norm();
    let mut small = 0;
    let mut last = 0.0;
    for n in 0..2000usize {
        let mut next = q * b[n] * z2;
        if n >= 2 {
            next += 0.25 * b[n - 2] * z4;
        }
        next /= ((n + 2) * (n + 1)) as f64;
        b.push(next);
        let m = (n + 2) as f64;
        w += next;
        dwz += m * next;
        abs_w += next.norm();
        abs_dw += m * next.norm();
        last = next.norm();
        if n > 8 && last <= 1e-18 * abs_w.max(f64::MIN_POSITIVE) {
            small += 1;
            if small >= 4 {
                break;
            }
        } else {
            small = 0;
        }
    }
    let zn = z.norm();
    let dw = if zn > 0.0 { dwz / z } else { d1 };
    let roundoff = 4.0 * EPS;
    Eval {
        w,
        dw,
        err_w: roundoff * abs_w + last,
        err_dw: if zn > 0.0 { (roundoff * abs_dw + last) / zn } else { EPS * d1.norm() },
    }
}

/// `exp(-z^2/4) [D(0) M(-nu/2, 1/2, z^2/2) + D'(0) z M((1-nu)/2, 3/2, z^2/2)]`.
/// Free of the cancellation the plain series suffers wherever `D_nu`
/// decays like `exp(-z^2/4)` with a vanishing Kummer coefficient (integer
/// orders), so the two series are complementary.
fn series_kummer(nu: C64, z: C64) -> Eval {
    let (d0, d1) = values_at_zero(nu);
    let x = z * z / 2.0;
    let (a1, a2) = (-nu / 2.0, (1.0 - nu) / 2.0);
    // f = sum_k A_k z^{2k} + B_k z^{2k+1}, f' accumulated alongside
    let mut ta = d0;
    let mut tb = d1 * z;
    let mut f = ta + tb;
    let mut fpz = tb; // z f'
    let (mut abs_f, mut abs_fp) = (ta.norm() + tb.norm(), tb.norm());
    let mut small = 0;
    let mut last = 0.0;
    for k in 0..2000usize {
        let kf = k as f64;
        ta *= (a1 + kf) * x / ((0.5 + kf) * (kf + 1.0));
        tb *= (a2 + kf) * x / ((1.5 + kf) * (kf + 1.0));
        let (ma, mb) = (2.0 * (kf + 1.0), 2.0 * (kf + 1.0) + 1.0);
        f += ta + tb;
        fpz += ta * ma + tb * mb;
        abs_f += ta.norm() + tb.norm();
        abs_fp += ma * ta.norm() + mb * tb.norm();
        last = ta.norm() + tb.norm();
        if k > 4 && last <= 1e-18 * abs_f.max(f64::MIN_POSITIVE) {
            small += 1;
            if small >= 4 {
                break;
            }
        } else {
            small = 0;
        }
    }
    let g = (-z * z / 4.0).exp();
    let zn = z.norm();
    let fp = if zn > 0.0 { fpz / z } else { d1 };
    let roundoff = 4.0 * EPS;
    let err_f = roundoff * abs_f + last;
    let err_fp = if zn > 0.0 { (roundoff * abs_fp + last) / zn } else { EPS * d1.norm() };
    Eval {
        w: g * f,
        dw: g * (fp - 0.5 * z * f),
        err_w: g.norm() * err_f,
        err_dw: g.norm() * (err_fp + 0.5 * zn * err_f),
    }
}

/// The better of the two power series.
fn best_series(nu: C64, z: C64) -> Eval {
    let (a, b) = (series(nu, z), series_kummer(nu, z));
    if b.rel_err() < a.rel_err() {
        b
    } else {
        a
    }
}

/// Large-`|z|` expansion; the second (recessive-swap) series is added for
/// `|arg z| > pi/2`.
fn asymptotic(nu: C64, z: C64) -> Eval {
    let (w, err) = asymptotic_value(nu, z);
    let (w1, err1) = asymptotic_value(nu + 1.0, z);
    let dw = 0.5 * z * w - w1;
    Eval {
        w,
        dw,
        err_w: err,
        err_dw: 0.5 * z.norm() * err + err1,
    }
}

fn asymptotic_sum(z2: C64, ratio: impl Fn(f64) -> C64) -> (C64, f64) {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut best = f64::INFINITY;
    for s in 1..400 {
        let next = term * ratio(s as f64) / (2.0 * s as f64 * z2);
        let m = next.norm();
        if m > term.norm() && s > 2 {
            break;
        }
        term = next;
        sum += term;
        best = m;
        if m < 1e-17 * sum.norm() {
            break;
        }
    }
    (sum, best)
}

fn asymptotic_value(nu: C64, z: C64) -> (C64, f64) {
    let z2 = z * z;
    let (s1, t1) = asymptotic_sum(z2, |s| -(nu - 2.0 * s + 2.0) * (nu - 2.0 * s + 1.0));
    let pre1 = (nu * z.ln() - z2 / 4.0).exp();
    let mut value = pre1 * s1;
    let mut err = pre1.norm() * (t1 + 8.0 * EPS * s1.norm());
    let phi = z.arg();
    if phi.abs() > FRAC_PI_2 {
        let i = C64::new(0.0, 1.0);
        let sign = if phi > 0.0 { 1.0 } else { -1.0 };
        let (s2, t2) = asymptotic_sum(z2, |s| (nu + 2.0 * s - 1.0) * (nu + 2.0 * s));
        let pre2 = -(2.0 * PI).sqrt()
            * rgamma(-nu)
            * (sign * i * PI * nu + z2 / 4.0 - (nu + 1.0) * z.ln()).exp();
        value += pre2 * s2;
        err += pre2.norm() * (t2 + 8.0 * EPS * s2.norm());
    }
    (value, err)
}

/// One Taylor step of the Weber equation from `z0` to `z0 + h`.
fn taylor_step(nu: C64, z0: C64, h: C64, w: C64, dw: C64) -> (C64, C64) {
    let q0 = z0 * z0 / 4.0 - nu - 0.5;
    let q1 = z0 / 2.0;
    let h2 = h * h;
    // b_n = a_n h^n
    let mut b: [C64; 4] = [w, dw * h, C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    let mut val = b[0] + b[1];
    let mut der = b[1];
    let mut small = 0;
    for n in 0..400usize {
        let bn = b[n % 4];
        let bn1 = if n >= 1 { b[(n + 3) % 4] } else { C64::new(0.0, 0.0) };
        let bn2 = if n >= 2 { b[(n + 2) % 4] } else { C64::new(0.0, 0.0) };
        let next = h2 * (q0 * bn + q1 * h * bn1 + 0.25 * h2 * bn2) / ((n + 2) * (n + 1)) as f64;
        b[(n + 2) % 4] = next;
        val += next;
        der += (n + 2) as f64 * next;
        if next.norm() <= 1e-18 * val.norm().max(der.norm()).max(f64::MIN_POSITIVE) {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    (val, der / h)
}

/// Marches from `from` to `to`; the third value bounds the rounding error
/// at `to`, taking each step's error `eps |w|` as carried by the fastest
/// growing solution, whose growth is at most `exp(|Re(z^2 - z_k^2)| / 4)`.
fn march(nu: C64, from: C64, w0: C64, dw0: C64, to: C64, steps: usize) -> (C64, C64, f64) {
    let h = (to - from) / steps as f64;
    let (mut w, mut dw) = (w0, dw0);
    let zt2 = to * to;
    let amp = |zk: C64, w: C64| w.norm() * ((zt2 - zk * zk).re.abs() / 4.0).exp();
    let mut round = amp(from, w0);
    for k in 0..steps {
        let z0 = from + h * k as f64;
        (w, dw) = taylor_step(nu, z0, h, w, dw);
        round = round.max(amp(z0 + h, w));
    }
    (w, dw, 16.0 * EPS * round)
}

fn ode(nu: C64, z: C64) -> Eval {
    let r = z.norm();
    let inward = z.arg().abs() < FRAC_PI_4 && r > 0.0;
    let (from, w0, dw0) = if inward {
        let start = z * (PCF_ASYMPTOTIC_RADIUS.max(r) / r);
        let a = asymptotic(nu, start);
        (start, a.w, a.dw)
    } else {
        let (d0, d1) = values_at_zero(nu);
        (C64::new(0.0, 0.0), d0, d1)
    };
    let len = (z - from).norm();
    if len == 0.0 {
        return asymptotic(nu, z);
    }
    let qmax = (from.norm().max(r).powi(2) / 4.0 + nu.norm() + 0.5).sqrt();
    let n = ((len * (qmax + 1.0) / 0.5).ceil() as usize).max(1);
    let (w1, d1, _) = march(nu, from, w0, dw0, z, n);
    let (w2, d2, round) = march(nu, from, w0, dw0, z, 2 * n);
    let q = (r * r / 4.0 + nu.norm() + 0.5).sqrt();
    Eval {
        w: w2,
        dw: d2,
        err_w: (w2 - w1).norm() + round,
        err_dw: (d2 - d1).norm() + round * q,
    }
}

fn check_input(nu: C64, z: C64) -> Result<()> {
    if !(nu.re.is_finite() && nu.im.is_finite() && z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParams(format!("non-finite pcf input nu={nu}, z={z}")));
    }
    if z.norm() > PCF_Z_MAX {
        return Err(Error::InvalidParams(format!("|z| = {} exceeds {PCF_Z_MAX}", z.norm())));
    }
    Ok(())
}

/// `D_nu(z) = e^{-+i pi nu} D_nu(-z) + sqrt(2 pi)/Gamma(-nu) e^{-+i pi (nu+1)/2} D_{-nu-1}(+-i z)`,
/// with the sign that puts `+-i z` in the right half-plane. Used for
/// `Re z < 0`, where the direct methods cancel for near-integer orders.
fn reflected(nu: C64, z: C64) -> Result<(Eval, Method)> {
    let i = C64::new(0.0, 1.0);
    let sg = if z.im < 0.0 { 1.0 } else { -1.0 };
    let (a, ma) = evaluate_direct(nu, -z)?;
    let (b, mb) = evaluate_direct(-nu - 1.0, sg * i * z)?;
    let ca = (-sg * i * PI * nu).exp();
    let cb = (2.0 * PI).sqrt() * rgamma(-nu) * (-sg * i * FRAC_PI_2 * (nu + 1.0)).exp();
    let (ea, eb) = (ca.norm() * a.err_w, cb.norm() * b.err_w);
    let e = Eval {
        w: ca * a.w + cb * b.w,
        dw: -ca * a.dw + cb * sg * i * b.dw,
        err_w: ea + eb + 4.0 * EPS * ((ca * a.w).norm() + (cb * b.w).norm()),
        err_dw: ca.norm() * a.err_dw + cb.norm() * b.err_dw,
    };
    Ok((e, if ea >= eb { ma } else { mb }))
}

fn evaluate(nu: C64, z: C64) -> Result<(Eval, Method)> {
    let (e, m) = evaluate_direct(nu, z)?;
    if z.re < 0.0 && e.rel_err() > ACCEPT_REL {
        let (r, rm) = reflected(nu, z)?;
        if r.rel_err() < e.rel_err() {
            return Ok((r, rm));
        }
    }
    Ok((e, m))
}

fn evaluate_direct(nu: C64, z: C64) -> Result<(Eval, Method)> {
    check_input(nu, z)?;
    let r = z.norm();
    if r >= PCF_ASYMPTOTIC_RADIUS {
        let a = asymptotic(nu, z);
        if a.rel_err() <= ACCEPT_REL {
            return Ok((a, Method::Asymptotic));
        }
    }
    if r <= PCF_SERIES_RADIUS {
        let s = best_series(nu, z);
        if s.rel_err() <= ACCEPT_REL {
            return Ok((s, Method::Series));
        }
    }
    Ok((ode(nu, z), Method::OdeFallback))
}

fn finish(e: Eval, method: Method) -> Result<(SpecFunResult, SpecFunResult)> {
    if e.rel_err() > LOSS_REL {
        return Err(Error::AccuracyLoss {
            what: format!("D_nu ({method})"),
            est: e.err_w,
            magnitude: e.w.norm(),
        });
    }
    Ok((
        SpecFunResult { value: e.w, est_abs_error: e.err_w, method },
        SpecFunResult { value: e.dw, est_abs_error: e.err_dw, method },
    ))
}

/// `D_nu(z)` with the evaluation method chosen automatically.
pub fn pcf_d(nu: C64, z: C64) -> Result<SpecFunResult> {
    pcf_d_with_derivative(nu, z).map(|(d, _)| d)
}

/// `D_nu(z)` together with `D_nu'(z)`.
pub fn pcf_d_with_derivative(nu: C64, z: C64) -> Result<(SpecFunResult, SpecFunResult)> {
    let (e, m) = evaluate(nu, z)?;
    finish(e, m)
}

/// Forces one evaluation method; used to cross-check the methods against each
/// other.
pub fn pcf_d_using(nu: C64, z: C64, method: Method) -> Result<SpecFunResult> {
    check_input(nu, z)?;
    let e = match method {
        Method::Series => best_series(nu, z),
        Method::Asymptotic => asymptotic(nu, z),
        Method::OdeFallback => ode(nu, z),
    };
    finish(e, method).map(|(d, _)| d)
}
