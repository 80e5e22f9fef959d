//! Exact linear-sweep solution in parabolic cylinder functions.
//!
//! With `g = t / tau`, eliminating `c1` gives
//! `c2'' + (p^2 t^2 / tau^2 + K - 2 i p / tau) c2 / 4 = 0`, `K = nu^2 (1 - delta)`.
//! For `z = s t` with `s^4 = -p^2 / tau^2` this is Weber's equation of order
//! `(K - 2 i p / tau) / (4 s^2) - 1/2`, so `c2 = a D(s t) + b D(-s t)` and
//! `c1 = 2 (i c2' + p g c2 / 2) / (nu (1 - delta))`.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::Serialize;

use crate::dynamics::{plan_scenario, relative_occupation, IntegratorConfig, Scenario, State};
use crate::model::{gamma_of_t, ModelParams, Parity};
use crate::specfun::{pcf_d, rgamma};
use crate::spectral::eigensystem;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactSolverParams {
    pub model: ModelParams,
    /// `nu^2 (1 - delta)`.
    pub k: C64,
    pub weber_order: C64,
    /// `s` in `z = s t`.
    pub weber_arg_scale: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbCoefficients {
    pub a: C64,
    pub b: C64,
}

/// How the coefficients are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffSource {
    /// Match the given state at the given time.
    Initial,
    /// Lower diabatic level at `t -> -inf`, unit norm there (`a = 0`).
    MinusInfinity,
}

impl ExactSolverParams {
    pub fn new(model: ModelParams) -> Result<Self> {
        model.validate()?;
        if (model.eta - 0.5).abs() > 1e-15 {
            return Err(Error::InvalidParams("the Weber reduction needs a linear sweep (eta = 1/2)".into()));
        }
        let tau = model.tau_q;
        let p = model.parity_n.factor();
        let s = if model.parity_n.factor_sq() > 0.0 {
            C64::from_polar(1.0 / tau.sqrt(), FRAC_PI_4)
        } else {
            C64::new(1.0 / tau.sqrt(), 0.0)
        };
        let k = C64::new(model.coupling_sq(), 0.0);
        let i = C64::new(0.0, 1.0);
        let weber_order = (k - 2.0 * i * p / tau) / (4.0 * s * s) - 0.5;
        Ok(ExactSolverParams { model, k, weber_order, weber_arg_scale: s })
    }

    /// Replaces the broken-family order `K tau / 4` by `i K tau / 4`. That
    /// variant does not solve the Schrodinger equation; it exists so the
    /// residual check can tell the two apart.
    pub fn with_imaginary_broken_order(mut self) -> Self {
        if self.model.parity_n == Parity::Half {
            self.weber_order = C64::new(0.0, 1.0) * self.k * self.model.tau_q / 4.0;
        }
        self
    }

    /// Lower off-diagonal element times two, `nu (1 - delta)`.
    fn k_prime(&self) -> f64 {
        self.model.nu * (1.0 - self.model.delta)
    }

    /// `D(w)` and `D'(w)`, the latter from `D' = (w/2) D - D_{nu+1}`.
    fn d_and_derivative(&self, w: C64) -> Result<(C64, C64)> {
        let d = pcf_d(self.weber_order, w)?.value;
        let d1 = pcf_d(self.weber_order + 1.0, w)?.value;
        Ok((d, 0.5 * w * d - d1))
    }

    /// `c2'` from the second Schrodinger row.
    fn c2_dot(&self, t: f64, c1: C64, c2: C64) -> C64 {
        let pg = self.model.parity_n.factor() * gamma_of_t(&self.model, t);
        C64::new(0.0, -1.0) * (0.5 * self.k_prime() * c1 - 0.5 * pg * c2)
    }
}

pub fn exact_coeffs(params: &ExactSolverParams, initial: &State, t_i: f64, source: CoeffSource) -> Result<AbCoefficients> {
    let nu = params.weber_order;
    if rgamma(-nu).norm() < 1e-14 {
        return Err(Error::GammaPole(format!("{nu}")));
    }
    match source {
        CoeffSource::MinusInfinity => {
            if params.model.parity_n != Parity::Zero {
                return Err(Error::ScenarioPhaseMismatch(
                    "the t -> -inf boundary condition is implemented for parity 0".into(),
                ));
            }
            let tau = params.model.tau_q;
            let k = params.k.re;
            let b = params.k_prime().abs() * tau.sqrt() * (-k * PI * tau / 16.0).exp() / 2.0;
            Ok(AbCoefficients { a: C64::new(0.0, 0.0), b: C64::new(b, 0.0) })
        }
        CoeffSource::Initial => {
            let s = params.weber_arg_scale;
            let z = s * t_i;
            let (dp, ddp) = params.d_and_derivative(z)?;
            let (dm, ddm) = params.d_and_derivative(-z)?;
            let c2 = initial.c2;
            let c2d = params.c2_dot(t_i, initial.c1, initial.c2);
            // [dp, dm; s ddp, -s ddm] [a; b] = [c2; c2d]
            let m = [[dp, dm], [s * ddp, -s * ddm]];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let a = (c2 * m[1][1] - m[0][1] * c2d) / det;
            let b = (m[0][0] * c2d - m[1][0] * c2) / det;
            if !(a.norm().is_finite() && b.norm().is_finite()) || (a.norm() == 0.0 && b.norm() == 0.0) {
                return Err(Error::AccuracyLoss {
                    what: "Weber coefficients".into(),
                    est: f64::INFINITY,
                    magnitude: 0.0,
                });
            }
            Ok(AbCoefficients { a, b })
        }
    }
}

/// Raw (unnormalized) amplitudes `(c1, c2)` of the exact solution.
pub fn exact_amplitudes(params: &ExactSolverParams, coeffs: &AbCoefficients, t: f64) -> Result<[C64; 2]> {
    let s = params.weber_arg_scale;
    let z = s * t;
    let zero = C64::new(0.0, 0.0);
    let (mut c2, mut c2d) = (zero, zero);
    if coeffs.a != zero {
        let (d, dd) = params.d_and_derivative(z)?;
        c2 += coeffs.a * d;
        c2d += coeffs.a * s * dd;
    }
    if coeffs.b != zero {
        let (d, dd) = params.d_and_derivative(-z)?;
        c2 += coeffs.b * d;
        c2d -= coeffs.b * s * dd;
    }
    let pg = params.model.parity_n.factor() * gamma_of_t(&params.model, t);
    let c1 = 2.0 / params.k_prime() * (C64::new(0.0, 1.0) * c2d + 0.5 * pg * c2);
    Ok([c1, c2])
}

/// Unit-normalized exact state; `log_norm` holds the stripped norm.
pub fn exact_state(params: &ExactSolverParams, coeffs: &AbCoefficients, t: f64) -> Result<State> {
    exact_amplitudes(params, coeffs, t).map(State::from_vector)
}

/// Exact counterpart of `dynamics::run_scenario`: same start, same stop,
/// same reported level. The sweep from the deep symmetric phase uses the
/// true `t -> -inf` boundary condition.
pub fn exact_density(model: &ModelParams, scenario: Scenario, tau_q: f64, angle: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let model = model.with_tau_q(tau_q);
    let plan = plan_scenario(&model, scenario, angle, cfg)?;
    let ep = ExactSolverParams::new(model)?;
    let from_infinity = matches!(scenario, Scenario::SymToMinusEp | Scenario::FullSweep) && model.parity_n == Parity::Zero;
    let source = if from_infinity { CoeffSource::MinusInfinity } else { CoeffSource::Initial };
    let coeffs = exact_coeffs(&ep, &plan.initial, plan.t_i, source)?;
    let state = exact_state(&ep, &coeffs, plan.t_f)?;
    let spec = eigensystem(&model, plan.t_f)?;
    relative_occupation(&spec, &state, plan.target)
}

/// Closed-form coefficient sets quoted for the four standard cases. They
/// refer to the `D_{-nu-1}(+-i z)` representation, not to the basis used by
/// [`exact_amplitudes`], so they serve as reference numbers only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotedCase {
    /// Symmetric phase from `-inf`.
    FromMinusInfinity,
    /// Symmetric phase from the positive EP to `+inf`.
    FromNearEpToInfinity,
    /// Broken phase from `-inf`, `alpha_0 = 5 pi / 4`.
    BrokenFromMinusInfinity,
    /// Broken phase from the positive EP, `alpha_0 = pi / 5`.
    BrokenFromNearEp,
}

pub fn quoted_coefficients(case: QuotedCase, tau_q: f64, delta: f64) -> AbCoefficients {
    let i = C64::new(0.0, 1.0);
    let r11 = 11f64.sqrt();
    let sq = tau_q.sqrt();
    match case {
        QuotedCase::FromMinusInfinity => AbCoefficients {
            a: C64::new(0.0, 0.0),
            b: C64::new(((1.0 - delta) * PI * tau_q / 16.0).exp(), 0.0),
        },
        QuotedCase::FromNearEpToInfinity => {
            let base = 1.0 / (2.0 * PI).sqrt();
            let t = (6.0 + r11) * C64::from_polar(1.0, FRAC_PI_4) / 20.0 * sq;
            AbCoefficients { a: base + t, b: base - t }
        }
        QuotedCase::BrokenFromMinusInfinity => {
            let q = 5.0 * PI / 4.0;
            let norm = 1.0 / (8.0 * (1.0 + (2.0 * q).exp()).sqrt() * PI);
            let common = 2.0 * (2.0 * PI).sqrt() * (2.0 * q.exp() + 1.0 / q.sinh())
                + (-3.0 + (2.0 * q).exp()) * (PI / 2.0).sqrt() * q.cosh() * tau_q;
            let odd = 2.0 * i * PI * sq;
            AbCoefficients { a: norm * (common + odd), b: norm * (common - odd) }
        }
        QuotedCase::BrokenFromNearEp => {
            let odd = -i * (r11 + 6.0) / 20.0 * sq;
            let even = (25.0 - 3.0 * (r11 + 3.0)) / (25.0 * (2.0 * PI).sqrt()) * tau_q;
            let pre = (PI / 2.0).sqrt();
            AbCoefficients { a: pre * (odd + even), b: pre * (odd - even) }
        }
    }
}
