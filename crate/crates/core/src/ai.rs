//! Adiabatic-impulse predictions: freeze-out point, closed-form densities,
//! their small-`x` expansions and the `alpha` constants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::Scenario;
use crate::specfun::{erf_c, erfi_c, fresnel_c, fresnel_s};
use crate::{Error, Result, C64};

/// `alpha` used for the symmetric-phase comparison curves.
pub const ALPHA_FIG_SYMMETRIC: f64 = 0.06;
/// `alpha` used for the broken-phase comparison curves.
pub const ALPHA_FIG_BROKEN: f64 = 0.12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Symmetric,
    Broken,
}

/// Which closed form a density refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    /// Sweep ending next to the negative exceptional point.
    Down,
    /// Sweep starting next to the positive exceptional point.
    Up,
    /// Relative population in the broken phase.
    Broken,
}

impl DensityKind {
    pub fn for_scenario(s: Scenario) -> Option<DensityKind> {
        match s {
            Scenario::SymToMinusEp => Some(DensityKind::Down),
            Scenario::SymFromNearEp => Some(DensityKind::Up),
            Scenario::BrokenFromMinusInf | Scenario::BrokenFromNearEp => Some(DensityKind::Broken),
            Scenario::FullSweep => None,
        }
    }

    pub fn regime(self) -> Regime {
        match self {
            DensityKind::Broken => Regime::Broken,
            _ => Regime::Symmetric,
        }
    }

    /// Highest series order available.
    pub fn max_series_order(self) -> u32 {
        match self {
            DensityKind::Down => 2,
            DensityKind::Up | DensityKind::Broken => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiPrediction {
    pub alpha: f64,
    pub x_alpha: f64,
    pub t_hat: f64,
    pub eps_hat: f64,
    pub density: Option<f64>,
}

pub fn p_of_x(x: f64) -> f64 {
    2.0 + x * x + x * (4.0 + x * x).sqrt()
}

/// `sqrt(P/2 - 1)` without the cancellation at small `x`.
fn p_half_minus_one_sqrt(x: f64) -> f64 {
    (0.5 * (x * x + x * (4.0 + x * x).sqrt())).sqrt()
}

/// `eps_hat = sqrt((1 + sqrt(1 + 4/x^2)) / 2)`, the same in both regimes.
pub fn eps_hat(x: f64) -> f64 {
    if x == 0.0 {
        return f64::INFINITY;
    }
    (0.5 * (1.0 + (1.0 + 4.0 / (x * x)).sqrt())).sqrt()
}

/// Freeze-out `tau(t_hat) = alpha t_hat` with `t_hat = eps_hat tau_q`.
pub fn freeze_out(alpha: f64, tau_q: f64, tau_0: f64, _regime: Regime) -> Result<AiPrediction> {
    if !(alpha > 0.0 && tau_q > 0.0 && tau_0 > 0.0) {
        return Err(Error::InvalidParams("alpha, tau_q and tau_0 must be positive".into()));
    }
    let x = alpha * tau_q / tau_0;
    let e = eps_hat(x);
    Ok(AiPrediction { alpha, x_alpha: x, t_hat: e * tau_q, eps_hat: e, density: None })
}

/// Frozen-state density for a sweep ending at the negative exceptional point.
pub fn predict_d_down(theta_0: f64, x: f64) -> f64 {
    let p = p_of_x(x);
    1.0 / (-theta_0.cosh() * (2.0 * p).sqrt() - 2.0 * theta_0.sinh() * p_half_minus_one_sqrt(x)) + 0.5
}

/// Frozen-state density for a sweep leaving the positive exceptional point.
/// Equals `1/2 - sech(theta_0 - theta_hat) / 2`, whose expansion starts at
/// `sinh^2(theta_0/2) sech(theta_0)`.
pub fn predict_d_up(theta_0: f64, x: f64) -> f64 {
    let p = p_of_x(x);
    0.5 - 1.0 / (theta_0.cosh() * (2.0 * p).sqrt() - 2.0 * theta_0.sinh() * p_half_minus_one_sqrt(x))
}

/// The opposite overall sign of [`predict_d_up`]'s fraction. It tends to
/// `1/2 + sech(theta_0)/2` as `x -> 0`, which contradicts the expansion
/// of the same density; kept only for comparison.
pub fn predict_d_up_opposite_sign(theta_0: f64, x: f64) -> f64 {
    1.0 - predict_d_up(theta_0, x)
}

/// Broken-phase relative population of the frozen state.
pub fn predict_d_broken(alpha_0: f64, x: f64) -> f64 {
    let p = p_of_x(x);
    0.5 * alpha_0.sinh() / (p_half_minus_one_sqrt(x) - (0.5 * p).sqrt() * alpha_0.cosh()) + 0.5
}

pub fn predict(kind: DensityKind, angle: f64, x: f64) -> f64 {
    match kind {
        DensityKind::Down => predict_d_down(angle, x),
        DensityKind::Up => predict_d_up(angle, x),
        DensityKind::Broken => predict_d_broken(angle, x),
    }
}

/// Freeze-out point together with the closed-form density.
pub fn ai_prediction(kind: DensityKind, angle: f64, alpha: f64, tau_q: f64, tau_0: f64) -> Result<AiPrediction> {
    let mut fo = freeze_out(alpha, tau_q, tau_0, kind.regime())?;
    fo.density = Some(predict(kind, angle, fo.x_alpha));
    Ok(fo)
}

/// Small-`x` expansion truncated after `order` powers of `sqrt(x)`.
pub fn series_d(kind: DensityKind, angle: f64, x: f64, order: u32) -> Result<f64> {
    if order > kind.max_series_order() {
        return Err(Error::SeriesOrder(order));
    }
    let (ch, th) = (angle.cosh(), angle.tanh());
    let sech = 1.0 / ch;
    let coeffs = match kind {
        DensityKind::Down => vec![
            (0.5 * angle).sinh().powi(2) * sech,
            0.5 * th * sech,
            -0.125 * ((2.0 * angle).cosh() - 3.0) * sech.powi(3),
        ],
        DensityKind::Up => vec![(0.5 * angle).sinh().powi(2) * sech, -0.5 * th * sech],
        DensityKind::Broken => vec![1.0 / ((2.0 * angle).exp() + 1.0), -0.5 * th * sech],
    };
    let r = x.sqrt();
    Ok(coeffs.iter().take(order as usize + 1).rev().fold(0.0, |acc, c| acc * r + c))
}

/// Symmetric-phase constant from the Fresnel sine integral at
/// `coth(pi/2)/sqrt(pi)`.
pub fn alpha_symmetric() -> f64 {
    let e = std::f64::consts::E;
    let s = fresnel_s(1.0 / (PI / 2.0).tanh() / PI.sqrt());
    (1.0 + e.powf(PI)) * PI / (8.0 * (e.powf(PI / 2.0) - 1.0).powi(4)) * (1.0 - 2.0 * s).powi(2)
}

/// Broken-phase constant built from erf and erfi at `sqrt(3/2)` and
/// `3 sqrt(2)/5`. The factors multiply left to right as printed:
/// `15 pi / 7442 * (11 + r) * sqrt(6 + r) * sqrt(22 (47 - 12 r)) * (erf diff) * (erfi diff)`
/// with `r = sqrt(11)`.
pub fn alpha_broken() -> f64 {
    let r = 11f64.sqrt();
    let a = C64::new(1.5f64.sqrt(), 0.0);
    let b = C64::new(3.0 * 2f64.sqrt() / 5.0, 0.0);
    let d_erf = (erf_c(a) - erf_c(b)).re;
    let d_erfi = (erfi_c(a) - erfi_c(b)).re;
    15.0 * PI / 7442.0 * (11.0 + r) * (6.0 + r).sqrt() * (22.0 * (47.0 - 12.0 * r)).sqrt() * d_erf * d_erfi
}

/// Fresnel-integral constant of the fast-transition population of the upper
/// diabatic level (arguments `6/(5 sqrt(pi))`). Evaluates to a negative
/// number.
pub fn alpha_d2() -> f64 {
    let z = 6.0 / (5.0 * PI.sqrt());
    let (c, s) = (fresnel_c(z), fresnel_s(z));
    let r = 11f64.sqrt();
    r * PI / 1728.0 * (72.0 * (c - 1.0) * c) - 28.0 / 1728.0 * ((s - 1.0) * s + 11.0)
}

/// Fast-transition (perturbative) densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbativeKind {
    /// Upper diabatic level after a sweep from `-inf` to the EP:
    /// `(alpha tau)^(2 eta) / 4`.
    DiabaticUpper,
    /// Lower level after leaving the positive EP: `3/10 - c1 (alpha tau)^eta`.
    FromNearEp,
    /// Broken phase, sweep from `-inf`: `(6 - sqrt 11)/12 - (alpha tau)^eta`.
    BrokenFromMinusInf,
    /// Broken phase, sweep leaving the EP: `(6 - sqrt 11)/12 + (alpha tau)^eta`.
    BrokenFromNearEp,
}

impl PerturbativeKind {
    pub fn default_alpha(self) -> f64 {
        match self {
            PerturbativeKind::DiabaticUpper => alpha_d2(),
            PerturbativeKind::FromNearEp => alpha_symmetric(),
            PerturbativeKind::BrokenFromMinusInf | PerturbativeKind::BrokenFromNearEp => alpha_broken(),
        }
    }
}

/// `sinh^2(pi/4) sech(pi/2)`.
pub fn c1_from_near_ep() -> f64 {
    (PI / 4.0).sinh().powi(2) / (PI / 2.0).cosh()
}

pub fn perturbative_density_with_alpha(kind: PerturbativeKind, tau_q: f64, eta: f64, alpha: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) || tau_q < 0.0 {
        return Err(Error::InvalidParams("need 0 < eta < 1 and tau_q >= 0".into()));
    }
    let base = alpha * tau_q;
    if base < 0.0 {
        return Err(Error::InvalidParams(format!(
            "alpha = {alpha} is negative, (alpha tau_q)^eta is undefined"
        )));
    }
    let floor = (6.0 - 11f64.sqrt()) / 12.0;
    Ok(match kind {
        PerturbativeKind::DiabaticUpper => 0.25 * base.powf(2.0 * eta),
        PerturbativeKind::FromNearEp => 0.3 - c1_from_near_ep() * base.powf(eta),
        PerturbativeKind::BrokenFromMinusInf => floor - base.powf(eta),
        PerturbativeKind::BrokenFromNearEp => floor + base.powf(eta),
    })
}

/// Leading-order density with the constant belonging to `kind`.
pub fn perturbative_density(kind: PerturbativeKind, tau_q: f64, eta: f64) -> Result<f64> {
    perturbative_density_with_alpha(kind, tau_q, eta, kind.default_alpha())
}
