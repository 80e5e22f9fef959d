//! Non-unitary Schrodinger integration `i dPsi/dt = H(t) Psi` and the
//! observables built on it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::model::{gamma_of_t, hamiltonian_at, ComplexMatrix2, ModelParams, QuenchWindow};
use crate::spectral::{classify_phase, eigensystem, gap_squared, Level, PtPhase, SpectralData};
use crate::{Error, Result, C64};

/// Amplitude magnitude treated as overflow when renormalization is off.
pub const OVERFLOW_LIMIT: f64 = 1e150;
/// Relative distance from an exceptional point kept by scenario endpoints.
pub const NEAR_EP_MARGIN: f64 = 1e-3;
/// Target size of the excitation amplitude left over from starting (or
/// stopping) a symmetric run at a finite drive instead of infinity.
const ADIABATIC_RESIDUAL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State {
    pub c1: C64,
    pub c2: C64,
    pub log_norm: f64,
}

impl State {
    pub fn new(c1: C64, c2: C64) -> Self {
        State { c1, c2, log_norm: 0.0 }
    }

    /// Unit-normalized copy of `v` with the stripped norm in `log_norm`.
    pub fn from_vector(v: [C64; 2]) -> Self {
        let mut s = State::new(v[0], v[1]);
        s.renormalize();
        s
    }

    pub fn vector(&self) -> [C64; 2] {
        [self.c1, self.c2]
    }

    pub fn norm(&self) -> f64 {
        (self.c1.norm_sqr() + self.c2.norm_sqr()).sqrt()
    }

    pub fn renormalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.c1 /= n;
            self.c2 /= n;
            self.log_norm += n.ln();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AngleConvention {
    /// `t = tau_q / tanh(theta_0)`
    #[default]
    Tanh,
    /// `theta_0 = arctan(tau_q / t)`
    Arctan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub renormalize_each_step: bool,
    pub truncation_factor: f64,
    #[serde(default)]
    pub angle_convention: AngleConvention,
}

impl IntegratorConfig {
    pub fn default_dt(tau_q: f64) -> f64 {
        (1e-3 * tau_q).min(1e-3)
    }

    pub fn for_tau_q(tau_q: f64) -> Self {
        IntegratorConfig {
            dt: Self::default_dt(tau_q),
            renormalize_each_step: true,
            truncation_factor: 1.0,
            angle_convention: AngleConvention::Tanh,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams("dt must be positive".into()));
        }
        if !(self.truncation_factor >= 1.0 && self.truncation_factor.is_finite()) {
            return Err(Error::InvalidParams("truncation_factor must be >= 1".into()));
        }
        Ok(())
    }
}

/// Time series of states; `d_rel` is the relative occupation of the upper
/// (least-dissipative) level. Entries inside the exceptional-point collar
/// carry `NaN` diagnostics.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub d_rel: Vec<f64>,
    pub proj_up: Vec<C64>,
    pub proj_down: Vec<C64>,
}

/// Shortest round-trip text for a CSV cell; scientific outside `[1e-4, 1e15)`, empty when not finite.
pub fn fmt_cell(x: f64) -> String {
    if !x.is_finite() {
        String::new()
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    /// CSV with columns `t, re_c1, im_c1, re_c2, im_c2, log_norm, d_rel_up, d_rel_down`.
    pub fn write_csv<W: Write>(&self, out: W, stride: usize) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidParams(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re_c1", "im_c1", "re_c2", "im_c2", "log_norm", "d_rel_up", "d_rel_down"])
            .map_err(io)?;
        let n = self.len();
        let stride = stride.max(1);
        for k in (0..n).filter(|k| k % stride == 0 || *k + 1 == n) {
            let s = &self.states[k];
            let d = self.d_rel[k];
            w.write_record([
                fmt_cell(self.times[k]),
                fmt_cell(s.c1.re),
                fmt_cell(s.c1.im),
                fmt_cell(s.c2.re),
                fmt_cell(s.c2.im),
                fmt_cell(s.log_norm),
                fmt_cell(d),
                fmt_cell(1.0 - d),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidParams(e.to_string()))
    }
}

fn rhs(h: &ComplexMatrix2, v: [C64; 2]) -> [C64; 2] {
    let hv = h.apply(v);
    let mi = C64::new(0.0, -1.0);
    [mi * hv[0], mi * hv[1]]
}

fn axpy(v: [C64; 2], a: f64, k: [C64; 2]) -> [C64; 2] {
    [v[0] + a * k[0], v[1] + a * k[1]]
}

/// Drives RK4 over `window`, calling `visit` on the initial state and after
/// every step. The step is `dt` shrunk so that the last step lands on `t_end`.
pub fn propagate<H, V>(h: H, window: &QuenchWindow, initial: State, cfg: &IntegratorConfig, mut visit: V) -> Result<State>
where
    H: Fn(f64) -> ComplexMatrix2,
    V: FnMut(f64, &State),
{
    window.validate()?;
    cfg.validate()?;
    let span = window.t_end - window.t_start;
    let steps = (span / cfg.dt).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let mut s = initial;
    visit(window.t_start, &s);
    let mut h0 = h(window.t_start);
    for k in 0..steps {
        let t = window.t_start + dt * k as f64;
        let t1 = if k + 1 == steps { window.t_end } else { window.t_start + dt * (k + 1) as f64 };
        let hm = h(t + 0.5 * dt);
        let h1 = h(t1);
        let v = s.vector();
        let k1 = rhs(&h0, v);
        let k2 = rhs(&hm, axpy(v, 0.5 * dt, k1));
        let k3 = rhs(&hm, axpy(v, 0.5 * dt, k2));
        let k4 = rhs(&h1, axpy(v, dt, k3));
        for i in 0..2 {
            let inc = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
            if i == 0 {
                s.c1 += inc;
            } else {
                s.c2 += inc;
            }
        }
        if cfg.renormalize_each_step {
            s.renormalize();
        } else if s.c1.norm().max(s.c2.norm()) > OVERFLOW_LIMIT || !s.norm().is_finite() {
            return Err(Error::Overflow(t1));
        }
        h0 = h1;
        visit(t1, &s);
    }
    Ok(s)
}

/// Integration with an arbitrary Hamiltonian; returns every sampled state.
pub fn integrate_with<H>(h: H, window: &QuenchWindow, initial: State, cfg: &IntegratorConfig) -> Result<Vec<(f64, State)>>
where
    H: Fn(f64) -> ComplexMatrix2,
{
    let mut out = Vec::new();
    propagate(h, window, initial, cfg, |t, s| out.push((t, *s)))?;
    Ok(out)
}

pub fn integrate(params: &ModelParams, window: &QuenchWindow, initial: State, cfg: &IntegratorConfig) -> Result<Trajectory> {
    params.validate()?;
    let mut traj = Trajectory::default();
    propagate(|t| hamiltonian_at(params, t), window, initial, cfg, |t, s| {
        let (pu, pd, d) = match eigensystem(params, t) {
            Ok(spec) => {
                let (pu, pd) = left_projections(&spec, s);
                let d = relative_occupation(&spec, s, Level::Up).unwrap_or(f64::NAN);
                (pu, pd, d)
            }
            Err(_) => (C64::new(f64::NAN, f64::NAN), C64::new(f64::NAN, f64::NAN), f64::NAN),
        };
        traj.times.push(t);
        traj.states.push(*s);
        traj.proj_up.push(pu);
        traj.proj_down.push(pd);
        traj.d_rel.push(d);
    })?;
    Ok(traj)
}

/// `(<up^L|Psi>, <down^L|Psi>)`.
pub fn left_projections(spec: &SpectralData, s: &State) -> (C64, C64) {
    let dot = |l: [C64; 2]| l[0] * s.c1 + l[1] * s.c2;
    (dot(spec.left_up), dot(spec.left_down))
}

pub fn relative_occupation(spec: &SpectralData, s: &State, target: Level) -> Result<f64> {
    let (pu, pd) = left_projections(spec, s);
    let (au, ad) = (pu.norm(), pd.norm());
    if au < 1e-300 && ad < 1e-300 {
        return Err(Error::Degenerate);
    }
    // scale before squaring so tiny projections do not underflow
    let m = au.max(ad);
    let (u, d) = ((au / m).powi(2), (ad / m).powi(2));
    let w = match target {
        Level::Up => u,
        Level::Down => d,
    };
    Ok(w / (u + d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Scenario {
    /// Ground state deep in the symmetric phase, swept up to the
    /// exceptional point on the negative side.
    SymToMinusEp,
    /// Ground state just past the positive exceptional point, swept to large drive.
    SymFromNearEp,
    /// Least-dissipative state on the negative broken side, swept towards the EP.
    BrokenFromMinusInf,
    /// Least-dissipative state just past the positive EP, swept outward.
    BrokenFromNearEp,
    /// Full sweep across a model without exceptional points.
    FullSweep,
}

impl Scenario {
    pub fn is_broken(self) -> bool {
        matches!(self, Scenario::BrokenFromMinusInf | Scenario::BrokenFromNearEp)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SymToMinusEp => "sym_to_minus_ep",
            Scenario::SymFromNearEp => "sym_from_near_ep",
            Scenario::BrokenFromMinusInf => "broken_from_minus_inf",
            Scenario::BrokenFromNearEp => "broken_from_near_ep",
            Scenario::FullSweep => "full_sweep",
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial-value problem behind a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunPlan {
    pub t_i: f64,
    pub t_f: f64,
    pub initial: State,
    pub initial_level: Level,
    /// Level whose relative occupation is the reported density.
    pub target: Level,
}

/// `|eps|` at which a finite symmetric window starts (or stops) so the
/// residual excitation amplitude from the truncated tail stays below
/// `ADIABATIC_RESIDUAL`.
pub fn adiabatic_extent(params: &ModelParams) -> f64 {
    let g = params.gap_scale();
    let rate = params.tau_q * g * g;
    (1.0 / (ADIABATIC_RESIDUAL * rate)).cbrt().max(20.0)
}

/// `|eps|` encoded by a symmetric-phase angle.
pub fn epsilon_from_angle(theta_0: f64, convention: AngleConvention) -> f64 {
    match convention {
        AngleConvention::Tanh => 1.0 / theta_0.tanh(),
        AngleConvention::Arctan => 1.0 / theta_0.tan(),
    }
}

fn time_at_eps(params: &ModelParams, eps: f64) -> f64 {
    params.time_of_gamma(eps * params.gap_scale())
}

fn expect_family(params: &ModelParams, scenario: Scenario) -> Result<()> {
    let outside = params.parity_n.factor_sq();
    let ok = match scenario {
        Scenario::SymToMinusEp | Scenario::SymFromNearEp => params.gamma_ep().is_some() && outside > 0.0,
        Scenario::BrokenFromMinusInf | Scenario::BrokenFromNearEp => params.gamma_ep().is_some() && outside < 0.0,
        Scenario::FullSweep => params.gamma_ep().is_none() && outside > 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::ScenarioPhaseMismatch(format!(
            "{scenario} is not defined for parity {} with delta = {}",
            params.parity_n, params.delta
        )))
    }
}

/// Time on the given side (`sign = +-1`) of the EP where
/// `|g'/g| = factor * |gap|`, the broken-phase stop rule.
pub fn truncation_time(params: &ModelParams, sign: f64, factor: f64) -> Result<f64> {
    let g_ep = params
        .gamma_ep()
        .ok_or_else(|| Error::ScenarioPhaseMismatch("no exceptional point".into()))?;
    let t_ep = params.time_of_gamma(g_ep);
    let f = |u: f64| {
        let t = sign * u;
        let g = gamma_of_t(params, t);
        factor * gap_squared(params, t).abs().sqrt() - (params.gamma_dot(t) / g).abs()
    };
    let mut lo = t_ep * (1.0 + 1e-12);
    let mut hi = 2.0 * t_ep;
    let mut tries = 0;
    while f(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::NoRoot("truncation time".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(sign * 0.5 * (lo + hi))
}

/// Builds the initial state and window of `scenario`. For symmetric
/// scenarios `angle` is `theta_0` and fixes the endpoint next to the EP; for
/// broken scenarios it is `alpha_0` with `|eps(t_i)| = cosh(alpha_0)`.
pub fn plan_scenario(params: &ModelParams, scenario: Scenario, angle: f64, cfg: &IntegratorConfig) -> Result<RunPlan> {
    params.validate()?;
    expect_family(params, scenario)?;
    if !angle.is_finite() {
        return Err(Error::InvalidParams("angle must be finite".into()));
    }
    let far = adiabatic_extent(params);
    let min_eps = 1.0 + NEAR_EP_MARGIN;
    let (t_i, t_f, initial_level, target) = match scenario {
        Scenario::SymToMinusEp | Scenario::SymFromNearEp => {
            let eps = epsilon_from_angle(angle, cfg.angle_convention);
            if !(eps.is_finite() && eps >= min_eps) {
                return Err(Error::ScenarioPhaseMismatch(format!(
                    "theta_0 = {angle} puts the endpoint at eps = {eps}, inside the EP collar or the broken phase"
                )));
            }
            if scenario == Scenario::SymToMinusEp {
                (time_at_eps(params, -far.max(2.0 * eps)), time_at_eps(params, -eps), Level::Down, Level::Up)
            } else {
                (time_at_eps(params, eps), time_at_eps(params, far.max(2.0 * eps)), Level::Down, Level::Up)
            }
        }
        Scenario::BrokenFromMinusInf | Scenario::BrokenFromNearEp => {
            let eps = angle.abs().cosh();
            if eps < min_eps {
                return Err(Error::ScenarioPhaseMismatch(format!(
                    "alpha_0 = {angle} starts inside the EP collar"
                )));
            }
            let sign = if scenario == Scenario::BrokenFromMinusInf { -1.0 } else { 1.0 };
            let t_i = time_at_eps(params, sign * eps);
            let t_f = truncation_time(params, sign, cfg.truncation_factor)?;
            if t_f <= t_i {
                return Err(Error::EmptyWindow(format!(
                    "truncation at t = {t_f} precedes the start t_i = {t_i}"
                )));
            }
            (t_i, t_f, Level::Up, Level::Down)
        }
        Scenario::FullSweep => (time_at_eps(params, -far), time_at_eps(params, far), Level::Down, Level::Up),
    };
    let spec = eigensystem(params, t_i)?;
    let expected = if scenario.is_broken() { PtPhase::Broken } else { PtPhase::Symmetric };
    for t in [t_i, t_f] {
        if classify_phase(params, t) != expected {
            return Err(Error::ScenarioPhaseMismatch(format!("endpoint t = {t} is not in the {expected:?} phase")));
        }
    }
    Ok(RunPlan {
        t_i,
        t_f,
        initial: State::from_vector(spec.right(initial_level)),
        initial_level,
        target,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub plan: RunPlan,
    pub final_state: State,
    pub density: f64,
}

pub fn run_scenario(params: &ModelParams, scenario: Scenario, tau_q: f64, angle: f64, cfg: &IntegratorConfig) -> Result<RunOutcome> {
    let params = params.with_tau_q(tau_q);
    let plan = plan_scenario(&params, scenario, angle, cfg)?;
    let dt = cfg.dt.min(plan.t_f - plan.t_i);
    let window = QuenchWindow::new(plan.t_i, plan.t_f, dt)?;
    let final_state = propagate(|t| hamiltonian_at(&params, t), &window, plan.initial, cfg, |_, _| {})?;
    let spec = eigensystem(&params, plan.t_f)?;
    let density = relative_occupation(&spec, &final_state, plan.target)?;
    Ok(RunOutcome { plan, final_state, density })
}

/// End-of-run density of `scenario`: the relative occupation of the level
/// not occupied initially.
pub fn defect_density_run(params: &ModelParams, scenario: Scenario, tau_q: f64, angle: f64, cfg: &IntegratorConfig) -> Result<f64> {
    run_scenario(params, scenario, tau_q, angle, cfg).map(|o| o.density)
}
