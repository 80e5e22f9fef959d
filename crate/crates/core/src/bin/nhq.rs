use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use nhq::ai::{self, DensityKind};
use nhq::dynamics::{integrate, plan_scenario, AngleConvention, Scenario, State};
use nhq::exact::{exact_coeffs, exact_state, CoeffSource, ExactSolverParams};
use nhq::model::{ModelParams, Parity, QuenchWindow};
use nhq::specfun::{self, Method};
use nhq::spectral::{eigensystem, Level};
use nhq::sweep::{self, AlphaSource, IntegratorOverrides, Spacing, SweepConfig, TauGrid};
use nhq::{Error, C64};

#[derive(Parser)]
#[command(name = "nhq", version, about = "Quenches through exceptional points of non-Hermitian Landau-Zener models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one trajectory and write it as CSV.
    Evolve(EvolveArgs),
    /// Densities over a grid of quench times.
    Sweep(SweepArgs),
    /// Freeze-out point and closed-form density.
    Predict(PredictArgs),
    /// Exact Weber-function solution of a scenario.
    Exact(ExactArgs),
    /// Special-function passthrough.
    Specfun {
        #[command(subcommand)]
        cmd: SpecfunCmd,
    },
    /// One-point comparison of numerics, closed forms and the exact solution.
    Compare(CompareArgs),
}

#[derive(Args, Clone, Default)]
struct ModelArgs {
    /// JSON file with model and run settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parity tag n: 0, 1/2 or 1.
    #[arg(long)]
    parity: Option<String>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "tau-0")]
    tau_0: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    /// theta_0 for symmetric scenarios, alpha_0 for broken ones.
    #[arg(long, allow_hyphen_values = true)]
    angle: Option<f64>,
    #[arg(long = "tau-q")]
    tau_q: Option<f64>,
    /// Integrator step (default min(1e-3 tau_q, 1e-3), or NHQ_DT).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "truncation-factor")]
    truncation_factor: Option<f64>,
    #[arg(long = "angle-convention", value_enum)]
    angle_convention: Option<AngleConventionArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AngleConventionArg {
    Tanh,
    Arctan,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long = "t-start", allow_hyphen_values = true)]
    t_start: Option<f64>,
    #[arg(long = "t-end", allow_hyphen_values = true)]
    t_end: Option<f64>,
    /// Eigenstate at t_start used as the initial state.
    #[arg(long, value_enum)]
    initial: Option<LevelArg>,
    #[arg(long = "no-renormalize")]
    no_renormalize: bool,
    /// Write every n-th step.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Up,
    Down,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration JSON; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    #[arg(long, allow_hyphen_values = true)]
    angle: Option<f64>,
    #[arg(long = "tau-min")]
    tau_min: Option<f64>,
    #[arg(long = "tau-max")]
    tau_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum)]
    spacing: Option<SpacingArg>,
    #[arg(long = "alpha-source", value_enum)]
    alpha_source: Option<AlphaSourceArg>,
    /// Explicit alpha (implies an explicit alpha source).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Linear,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphaSourceArg {
    Fig2,
    Fig3,
    ClosedForm,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, allow_hyphen_values = true)]
    angle: f64,
    /// Use this x_alpha directly instead of alpha tau_q / tau_0.
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "tau-q", default_value_t = 1.0)]
    tau_q: f64,
    #[arg(long = "tau-0", default_value_t = 1.0)]
    tau_0: f64,
    /// Series truncation order (default: highest available).
    #[arg(long)]
    order: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Down,
    Up,
    Broken,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Also write the exact state on this many evenly spaced times as CSV.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SpecfunCmd {
    Eval {
        #[arg(long = "fn", value_enum)]
        func: FnArg,
        /// Order of D, e.g. -1+0.25i.
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        nu: String,
        /// Argument, e.g. 1.5-2i (real part only for S and C).
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FnArg {
    D,
    #[value(name = "S")]
    S,
    #[value(name = "C")]
    C,
    Erf,
    Erfi,
}

/// Settings file shared by the single-run subcommands.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PointFile {
    model: Option<ModelParams>,
    scenario: Option<Scenario>,
    angle: Option<f64>,
    tau_q: Option<f64>,
    alpha: Option<f64>,
    #[serde(default)]
    integrator: IntegratorOverrides,
}

enum Failure {
    Usage(anyhow::Error),
    Numeric(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::ScenarioPhaseMismatch(_) | Error::EmptyWindow(_) | Error::SeriesOrder(_) => {
                Failure::Usage(e.into())
            }
            _ => Failure::Numeric(e.into()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow::anyhow!(msg.into()))
}

fn io_fail(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow::anyhow!("{e}"))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Usage)
}

fn load_point_file(path: &Option<PathBuf>) -> Result<PointFile, Failure> {
    let Some(path) = path else { return Ok(PointFile::default()) };
    let text = read_text(path)?;
    if let Ok(p) = serde_json::from_str::<PointFile>(&text) {
        return Ok(p);
    }
    let model = ModelParams::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(PointFile { model: Some(model), ..Default::default() })
}

fn env_dt() -> Result<Option<f64>, Failure> {
    match std::env::var("NHQ_DT") {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|d| *d > 0.0)
            .map(Some)
            .ok_or_else(|| usage(format!("NHQ_DT must be a positive number, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn default_model(scenario: Option<Scenario>) -> ModelParams {
    match scenario {
        Some(s) if s.is_broken() => ModelParams::broken_family(1.0),
        Some(Scenario::FullSweep) => ModelParams::new(Parity::Zero, 1.0, 0.0, 1.0),
        _ => ModelParams::symmetric_family(1.0),
    }
}

fn apply_model_flags(base: ModelParams, m: &ModelArgs) -> Result<ModelParams, Failure> {
    let mut p = base;
    if let Some(s) = &m.parity {
        p.parity_n = Parity::from_str(s)?;
    }
    if let Some(d) = m.delta {
        let defaulted = ModelParams::new(p.parity_n, p.nu, d, p.tau_q);
        p.delta = d;
        if m.tau_0.is_none() {
            p.tau_0 = defaulted.tau_0;
        }
    }
    if let Some(nu) = m.nu {
        p.nu = nu;
        if m.tau_0.is_none() {
            p.tau_0 = ModelParams::new(p.parity_n, nu, p.delta, p.tau_q).tau_0;
        }
    }
    if let Some(e) = m.eta {
        p.eta = e;
    }
    if let Some(t) = m.tau_0 {
        p.tau_0 = t;
    }
    p.validate()?;
    Ok(p)
}

/// Resolved single-run settings.
struct Point {
    model: ModelParams,
    scenario: Option<Scenario>,
    angle: Option<f64>,
    tau_q: f64,
    alpha: Option<f64>,
    integrator: IntegratorOverrides,
}

fn resolve_point(m: &ModelArgs, r: &RunArgs) -> Result<Point, Failure> {
    let file = load_point_file(&m.config)?;
    let scenario = r.scenario.or(file.scenario);
    let base = file.model.unwrap_or_else(|| default_model(scenario));
    let model = apply_model_flags(base, m)?;
    let tau_q = r.tau_q.or(file.tau_q).unwrap_or(model.tau_q);
    let mut integrator = file.integrator;
    if integrator.dt.is_none() {
        integrator.dt = env_dt()?;
    }
    if let Some(dt) = r.dt {
        integrator.dt = Some(dt);
    }
    if let Some(f) = r.truncation_factor {
        integrator.truncation_factor = Some(f);
    }
    if let Some(a) = r.angle_convention {
        integrator.angle_convention = Some(match a {
            AngleConventionArg::Tanh => AngleConvention::Tanh,
            AngleConventionArg::Arctan => AngleConvention::Arctan,
        });
    }
    let model = model.with_tau_q(tau_q);
    model.validate()?;
    Ok(Point { model, scenario, angle: r.angle.or(file.angle), tau_q, alpha: file.alpha, integrator })
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display())).map_err(Failure::Usage)?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: &Option<PathBuf>, v: &serde_json::Value) -> Result<(), Failure> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(io_fail)?;
    writeln!(w).map_err(io_fail)?;
    w.flush().map_err(io_fail)
}

fn opt_num(x: Option<f64>) -> serde_json::Value {
    x.filter(|v| v.is_finite()).map(serde_json::Value::from).unwrap_or(serde_json::Value::Null)
}

fn cmd_evolve(a: EvolveArgs) -> Result<(), Failure> {
    let pt = resolve_point(&a.model, &a.run)?;
    let mut cfg = pt.integrator.resolve(pt.tau_q);
    cfg.renormalize_each_step = !a.no_renormalize;
    let (t_start, t_end, initial) = match (pt.scenario, a.t_start, a.t_end) {
        (Some(s), ts, te) => {
            let angle = pt.angle.ok_or_else(|| usage("--angle is required with --scenario"))?;
            let plan = plan_scenario(&pt.model, s, angle, &cfg)?;
            let t0 = ts.unwrap_or(plan.t_i);
            let init = if ts.is_some() {
                let level = a.initial.map(to_level).unwrap_or(plan.initial_level);
                State::from_vector(eigensystem(&pt.model, t0)?.right(level))
            } else {
                plan.initial
            };
            (t0, te.unwrap_or(plan.t_f), init)
        }
        (None, Some(t0), Some(t1)) => {
            let level = a.initial.map(to_level).unwrap_or(Level::Down);
            (t0, t1, State::from_vector(eigensystem(&pt.model, t0)?.right(level)))
        }
        _ => return Err(usage("give --scenario and --angle, or --t-start and --t-end")),
    };
    let window = QuenchWindow::new(t_start, t_end, cfg.dt.min(t_end - t_start))?;
    let traj = integrate(&pt.model, &window, initial, &cfg)?;
    traj.write_csv(output(&a.out)?, a.stride)?;
    Ok(())
}

fn to_level(l: LevelArg) -> Level {
    match l {
        LevelArg::Up => Level::Up,
        LevelArg::Down => Level::Down,
    }
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let mut cfg = match &a.config {
        Some(p) => SweepConfig::from_json(&read_text(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => {
            let scenario = a.scenario.ok_or_else(|| usage("--scenario is required without --config"))?;
            let angle = a.angle.ok_or_else(|| usage("--angle is required without --config"))?;
            let (min, max, source) = match scenario {
                s if s.is_broken() => (0.01, 1.2, AlphaSource::Fig3),
                _ => (0.01, 1.75, AlphaSource::Fig2),
            };
            SweepConfig {
                model: default_model(Some(scenario)),
                scenario,
                angle,
                tauq_grid: TauGrid { min, max, steps: 35, spacing: Spacing::Linear },
                alpha_source: source,
                outputs: None,
                integrator: IntegratorOverrides::default(),
            }
        }
    };
    if let Some(s) = a.scenario {
        cfg.scenario = s;
    }
    if let Some(v) = a.angle {
        cfg.angle = v;
    }
    if let Some(v) = a.tau_min {
        cfg.tauq_grid.min = v;
    }
    if let Some(v) = a.tau_max {
        cfg.tauq_grid.max = v;
    }
    if let Some(v) = a.steps {
        cfg.tauq_grid.steps = v;
    }
    if let Some(v) = a.spacing {
        cfg.tauq_grid.spacing = match v {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Log => Spacing::Log,
        };
    }
    if let Some(s) = a.alpha_source {
        cfg.alpha_source = match s {
            AlphaSourceArg::Fig2 => AlphaSource::Fig2,
            AlphaSourceArg::Fig3 => AlphaSource::Fig3,
            AlphaSourceArg::ClosedForm => AlphaSource::ClosedForm,
        };
    }
    if let Some(v) = a.alpha {
        cfg.alpha_source = AlphaSource::Explicit(v);
    }
    if cfg.integrator.dt.is_none() {
        cfg.integrator.dt = env_dt()?;
    }
    if let Some(v) = a.dt {
        cfg.integrator.dt = Some(v);
    }
    let rows = sweep::run_sweep(&cfg)?;
    sweep::write_sweep_csv(&rows, &cfg.columns(), output(&a.out)?)?;
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<(), Failure> {
    let kind = match a.kind {
        KindArg::Down => DensityKind::Down,
        KindArg::Up => DensityKind::Up,
        KindArg::Broken => DensityKind::Broken,
    };
    let alpha = a.alpha.unwrap_or(match kind {
        DensityKind::Broken => ai::ALPHA_FIG_BROKEN,
        _ => ai::ALPHA_FIG_SYMMETRIC,
    });
    let order = a.order.unwrap_or(kind.max_series_order());
    let v = match a.x {
        Some(x) => {
            if !(x >= 0.0) {
                return Err(usage("--x must be non-negative"));
            }
            json!({
                "x_alpha": x,
                "eps_hat": ai::eps_hat(x),
                "density": ai::predict(kind, a.angle, x),
                "series": ai::series_d(kind, a.angle, x, order)?,
                "series_order": order,
            })
        }
        None => {
            let p = ai::ai_prediction(kind, a.angle, alpha, a.tau_q, a.tau_0)?;
            json!({
                "alpha": p.alpha,
                "x_alpha": p.x_alpha,
                "t_hat": p.t_hat,
                "eps_hat": p.eps_hat,
                "density": p.density,
                "series": ai::series_d(kind, a.angle, p.x_alpha, order)?,
                "series_order": order,
            })
        }
    };
    write_json(&None, &v)
}

fn cmd_exact(a: ExactArgs) -> Result<(), Failure> {
    let pt = resolve_point(&a.model, &a.run)?;
    let scenario = pt.scenario.ok_or_else(|| usage("--scenario is required"))?;
    let angle = pt.angle.ok_or_else(|| usage("--angle is required"))?;
    let cfg = pt.integrator.resolve(pt.tau_q);
    let plan = plan_scenario(&pt.model, scenario, angle, &cfg)?;
    let ep = ExactSolverParams::new(pt.model)?;
    let from_inf = matches!(scenario, Scenario::SymToMinusEp | Scenario::FullSweep) && pt.model.parity_n == Parity::Zero;
    let source = if from_inf { CoeffSource::MinusInfinity } else { CoeffSource::Initial };
    let coeffs = exact_coeffs(&ep, &plan.initial, plan.t_i, source)?;
    if let Some(n) = a.grid {
        if n < 2 {
            return Err(usage("--grid needs at least 2 points"));
        }
        let mut traj = nhq::dynamics::Trajectory::default();
        for k in 0..n {
            let t = if k + 1 == n { plan.t_f } else { plan.t_i + (plan.t_f - plan.t_i) * k as f64 / (n - 1) as f64 };
            let s = exact_state(&ep, &coeffs, t)?;
            let (d, pu, pd) = match eigensystem(&pt.model, t) {
                Ok(spec) => {
                    let (pu, pd) = nhq::dynamics::left_projections(&spec, &s);
                    (nhq::dynamics::relative_occupation(&spec, &s, Level::Up).unwrap_or(f64::NAN), pu, pd)
                }
                Err(_) => (f64::NAN, C64::new(f64::NAN, 0.0), C64::new(f64::NAN, 0.0)),
            };
            traj.times.push(t);
            traj.states.push(s);
            traj.d_rel.push(d);
            traj.proj_up.push(pu);
            traj.proj_down.push(pd);
        }
        traj.write_csv(output(&a.out)?, 1)?;
        return Ok(());
    }
    let state = exact_state(&ep, &coeffs, plan.t_f)?;
    let spec = eigensystem(&pt.model, plan.t_f)?;
    let density = nhq::dynamics::relative_occupation(&spec, &state, plan.target)?;
    let c = |z: C64| json!([z.re, z.im]);
    write_json(
        &a.out,
        &json!({
            "scenario": scenario.name(),
            "tau_q": pt.tau_q,
            "angle": angle,
            "t_i": plan.t_i,
            "t_f": plan.t_f,
            "weber_order": c(ep.weber_order),
            "a": c(coeffs.a),
            "b": c(coeffs.b),
            "density": density,
        }),
    )
}

fn parse_complex(s: &str) -> Result<C64, Failure> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let t = t.replace('j', "i");
    C64::from_str(&t).map_err(|_| usage(format!("cannot parse complex number {s:?}")))
}

fn cmd_specfun(cmd: SpecfunCmd) -> Result<(), Failure> {
    let SpecfunCmd::Eval { func, nu, z } = cmd;
    let z = parse_complex(&z)?;
    let mut out = io::stdout().lock();
    let (value, err, method) = match func {
        FnArg::D => {
            let r = specfun::pcf_d(parse_complex(&nu)?, z)?;
            (r.value, r.est_abs_error, Some(r.method))
        }
        FnArg::S | FnArg::C => {
            if z.im != 0.0 {
                return Err(usage("Fresnel integrals take a real argument"));
            }
            let v = if matches!(func, FnArg::S) { specfun::fresnel_s(z.re) } else { specfun::fresnel_c(z.re) };
            (C64::new(v, 0.0), 1e-14 * v.abs().max(1.0), None)
        }
        FnArg::Erf | FnArg::Erfi => {
            let v = if matches!(func, FnArg::Erf) { specfun::erf_c(z) } else { specfun::erfi_c(z) };
            (v, 1e-13 * v.norm().max(1.0), None)
        }
    };
    let method = method.map(|m: Method| m.to_string()).unwrap_or_else(|| "series".into());
    writeln!(out, "value = {} {:+}i", value.re, value.im).map_err(io_fail)?;
    writeln!(out, "est_abs_error = {err:e}").map_err(io_fail)?;
    writeln!(out, "method = {method}").map_err(io_fail)
}

fn cmd_compare(a: CompareArgs) -> Result<(), Failure> {
    let pt = resolve_point(&a.model, &a.run)?;
    let scenario = pt.scenario.ok_or_else(|| usage("--scenario is required"))?;
    let angle = pt.angle.or(matches!(scenario, Scenario::FullSweep).then_some(0.0));
    let angle = angle.ok_or_else(|| usage("--angle is required"))?;
    let fig_alpha = if scenario.is_broken() { ai::ALPHA_FIG_BROKEN } else { ai::ALPHA_FIG_SYMMETRIC };
    let alpha = Some(a.alpha.or(pt.alpha).unwrap_or(fig_alpha));
    let report = sweep::run_compare(&pt.model, scenario, pt.tau_q, angle, alpha, pt.integrator)?;
    let mut v = serde_json::to_value(&report).map_err(io_fail)?;
    for key in ["x_alpha", "d_numeric", "d_ai", "d_series", "d_exact", "err_numeric"] {
        if let Some(x) = v.get_mut(key) {
            *x = opt_num(x.as_f64());
        }
    }
    write_json(&a.out, &v)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Evolve(a) => cmd_evolve(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Predict(a) => cmd_predict(a),
        Cmd::Exact(a) => cmd_exact(a),
        Cmd::Specfun { cmd } => cmd_specfun(cmd),
        Cmd::Compare(a) => cmd_compare(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("numeric failure: {e:#}");
            ExitCode::from(1)
        }
    }
}
