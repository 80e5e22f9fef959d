//! Complex special functions: Gamma, erf/erfi, Fresnel integrals and the
//! parabolic cylinder function `D_nu(z)` of complex order.

mod erf;
mod fresnel;
mod gamma;
mod pcf;

use serde::Serialize;

pub use erf::{erf_c, erfc_c, erfi_c};
pub use fresnel::{fresnel_c, fresnel_s};
pub use gamma::{gamma, ln_gamma, rgamma, sin_pi};
pub use pcf::{pcf_d, pcf_d_using, pcf_d_with_derivative, PCF_ASYMPTOTIC_RADIUS, PCF_SERIES_RADIUS, PCF_Z_MAX};

use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    Asymptotic,
    OdeFallback,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Series => "series",
            Method::Asymptotic => "asymptotic",
            Method::OdeFallback => "ode_fallback",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecFunResult {
    pub value: C64,
    pub est_abs_error: f64,
    pub method: Method,
}
