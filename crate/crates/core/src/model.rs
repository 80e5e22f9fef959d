//! Hamiltonian family `H = 1/2 [[p g, nu], [nu (1 - delta), -p g]]` with
//! `p = (-1)^n` and the sweep `g(t) = sgn(t) |t / tau_q|^(eta / (1 - eta))`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "1")]
    One,
}

impl Parity {
    /// `(-1)^n`.
    pub fn factor(self) -> C64 {
        match self {
            Parity::Zero => C64::new(1.0, 0.0),
            Parity::Half => C64::new(0.0, 1.0),
            Parity::One => C64::new(-1.0, 0.0),
        }
    }

    /// `p^2`, which is real for every admissible parity.
    pub fn factor_sq(self) -> f64 {
        match self {
            Parity::Zero | Parity::One => 1.0,
            Parity::Half => -1.0,
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(Parity::Zero),
            "1/2" | "0.5" => Ok(Parity::Half),
            "1" => Ok(Parity::One),
            other => Err(Error::InvalidParams(format!("parity_n must be 0, 1/2 or 1, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Zero => "0",
            Parity::Half => "1/2",
            Parity::One => "1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub parity_n: Parity,
    pub nu: f64,
    pub delta: f64,
    pub eta: f64,
    pub tau_q: f64,
    pub tau_0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    parity_n: Option<Parity>,
    nu: Option<f64>,
    delta: Option<f64>,
    eta: Option<f64>,
    tau_q: Option<f64>,
    tau_0: Option<f64>,
}

impl<'de> Deserialize<'de> for ModelParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawParams::deserialize(d)?;
        let parity = raw.parity_n.unwrap_or(Parity::Zero);
        let delta = raw.delta.unwrap_or(match parity {
            Parity::Half => 0.0,
            _ => 2.0,
        });
        let mut p = ModelParams::new(parity, raw.nu.unwrap_or(1.0), delta, raw.tau_q.unwrap_or(1.0));
        if let Some(eta) = raw.eta {
            p.eta = eta;
        }
        if let Some(t0) = raw.tau_0 {
            p.tau_0 = t0;
        }
        p.validate().map_err(serde::de::Error::custom)?;
        Ok(p)
    }
}

impl ModelParams {
    /// Linear sweep (`eta = 1/2`) with `tau_0 = 1 / (nu sqrt|1 - delta|)`.
    pub fn new(parity_n: Parity, nu: f64, delta: f64, tau_q: f64) -> Self {
        let scale = nu * (1.0 - delta).abs().sqrt();
        ModelParams {
            parity_n,
            nu,
            delta,
            eta: 0.5,
            tau_q,
            tau_0: if scale > 0.0 { 1.0 / scale } else { 1.0 },
        }
    }

    /// `n = 0, nu = 1, delta = 2`: real spectrum outside `|g| < 1`.
    pub fn symmetric_family(tau_q: f64) -> Self {
        Self::new(Parity::Zero, 1.0, 2.0, tau_q)
    }

    /// `n = 1/2, nu = 1, delta = 0`: complex spectrum outside `|g| < 1`.
    pub fn broken_family(tau_q: f64) -> Self {
        Self::new(Parity::Half, 1.0, 0.0, tau_q)
    }

    pub fn with_tau_q(mut self, tau_q: f64) -> Self {
        self.tau_q = tau_q;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(self.tau_q > 0.0 && self.tau_q.is_finite()) {
            return bad("tau_q must be positive");
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad("nu must be positive");
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad("eta must lie in (0, 1)");
        }
        if !(self.tau_0 > 0.0 && self.tau_0.is_finite()) {
            return bad("tau_0 must be positive");
        }
        if !self.delta.is_finite() {
            return bad("delta must be finite");
        }
        if (1.0 - self.delta).abs() < 1e-12 {
            return bad("delta = 1 decouples the lower off-diagonal element");
        }
        Ok(())
    }

    /// `nu^2 (1 - delta)`, the constant part of the squared gap.
    pub fn coupling_sq(&self) -> f64 {
        self.nu * self.nu * (1.0 - self.delta)
    }

    /// `|g|` at which the gap closes, if it closes on the real `g` axis.
    pub fn gamma_ep(&self) -> Option<f64> {
        let k = self.coupling_sq();
        // gap^2 = p^2 g^2 + k vanishes for g^2 = -k / p^2
        let g2 = -k / self.parity_n.factor_sq();
        (g2 > 0.0).then(|| g2.sqrt())
    }

    /// Time scale of the gap: `gamma_ep` if it exists, else `nu sqrt|1 - delta|`.
    pub fn gap_scale(&self) -> f64 {
        self.gamma_ep().unwrap_or_else(|| self.coupling_sq().abs().sqrt())
    }

    /// Inverse of `gamma_of_t`: the (signed) time at which the drive equals `g`.
    pub fn time_of_gamma(&self, g: f64) -> f64 {
        let e = (1.0 - self.eta) / self.eta;
        g.signum() * self.tau_q * g.abs().powf(e)
    }

    /// `d g / d t`.
    pub fn gamma_dot(&self, t: f64) -> f64 {
        let e = self.eta / (1.0 - self.eta);
        if t == 0.0 {
            return if e < 1.0 { f64::INFINITY } else if e == 1.0 { 1.0 / self.tau_q } else { 0.0 };
        }
        e / self.tau_q * (t.abs() / self.tau_q).powf(e - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix2(pub [[C64; 2]; 2]);

impl ComplexMatrix2 {
    pub fn zero() -> Self {
        ComplexMatrix2([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Row vector times matrix.
    pub fn apply_left(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [v[0] * m[0][0] + v[1] * m[1][0], v[0] * m[0][1] + v[1] * m[1][1]]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        ComplexMatrix2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for ComplexMatrix2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }
}

impl Sub for ComplexMatrix2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] -= o.0[i][j];
            }
        }
        r
    }
}

impl Mul<C64> for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, s: C64) -> Self {
        let mut r = self;
        r.0.iter_mut().flatten().for_each(|z| *z *= s);
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl QuenchWindow {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        let w = QuenchWindow { t_start, t_end, dt };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start < self.t_end) {
            return Err(Error::EmptyWindow(format!("t_start = {} >= t_end = {}", self.t_start, self.t_end)));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_end - self.t_start) {
            return Err(Error::InvalidParams(format!("dt = {} not in (0, t_end - t_start]", self.dt)));
        }
        Ok(())
    }
}

pub fn gamma_of_t(params: &ModelParams, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let e = params.eta / (1.0 - params.eta);
    let x = t.abs() / params.tau_q;
    let mag = if e == 1.0 { x } else { x.powf(e) };
    t.signum() * mag
}

pub fn hamiltonian_at(params: &ModelParams, t: f64) -> ComplexMatrix2 {
    let g = gamma_of_t(params, t);
    let d = 0.5 * params.parity_n.factor() * g;
    let half = |x: f64| C64::new(0.5 * x, 0.0);
    ComplexMatrix2([[d, half(params.nu)], [half(params.nu * (1.0 - params.delta)), -d]])
}

/// Drive values `g` at which the gap closes, ascending.
pub fn exceptional_points(params: &ModelParams) -> Vec<f64> {
    match params.gamma_ep() {
        Some(g) => vec![-g, g],
        None => Vec::new(),
    }
}
