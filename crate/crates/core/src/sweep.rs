//! Parameter sweeps and single-point comparisons of numerics, the
//! adiabatic-impulse closed forms and the exact solution.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ai::{self, DensityKind};
use crate::dynamics::{defect_density_run, fmt_cell, AngleConvention, IntegratorConfig, Scenario};
use crate::exact::exact_density;
use crate::model::{ModelParams, Parity};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl TauGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.min < self.max) || self.steps < 2 {
            return Err(Error::InvalidParams("tauq_grid needs min < max and steps >= 2".into()));
        }
        if !(self.min > 0.0) {
            return Err(Error::InvalidParams("tauq_grid.min must be positive".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..self.steps)
            .map(|k| {
                let f = k as f64 / n as f64;
                if k == n {
                    return self.max;
                }
                match self.spacing {
                    Spacing::Linear => (self.min * (n - k) as f64 + self.max * k as f64) / n as f64,
                    Spacing::Log => self.min * (self.max / self.min).powf(f),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSource {
    /// 0.06
    Fig2,
    /// 0.12
    Fig3,
    /// `alpha_symmetric()` or `alpha_broken()` depending on the scenario.
    ClosedForm,
    Explicit(f64),
}

impl AlphaSource {
    pub fn resolve(self, scenario: Scenario) -> Option<f64> {
        let kind = DensityKind::for_scenario(scenario)?;
        Some(match self {
            AlphaSource::Fig2 => ai::ALPHA_FIG_SYMMETRIC,
            AlphaSource::Fig3 => ai::ALPHA_FIG_BROKEN,
            AlphaSource::Explicit(a) => a,
            AlphaSource::ClosedForm => match kind {
                DensityKind::Broken => ai::alpha_broken(),
                _ => ai::alpha_symmetric(),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    TauQ,
    XAlpha,
    DNumeric,
    DAi,
    DSeries,
    DExact,
    ErrNumeric,
    Note,
}

impl Column {
    pub const ALL: [Column; 8] = [
        Column::TauQ,
        Column::XAlpha,
        Column::DNumeric,
        Column::DAi,
        Column::DSeries,
        Column::DExact,
        Column::ErrNumeric,
        Column::Note,
    ];

    pub fn header(self) -> &'static str {
        match self {
            Column::TauQ => "tau_q",
            Column::XAlpha => "x_alpha",
            Column::DNumeric => "d_numeric",
            Column::DAi => "d_ai",
            Column::DSeries => "d_series",
            Column::DExact => "d_exact",
            Column::ErrNumeric => "err_numeric",
            Column::Note => "note",
        }
    }
}

/// Integrator settings left open in a config; unset fields use the
/// per-`tau_q` defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct IntegratorOverrides {
    pub dt: Option<f64>,
    pub renormalize_each_step: Option<bool>,
    pub truncation_factor: Option<f64>,
    pub angle_convention: Option<AngleConvention>,
}

impl IntegratorOverrides {
    pub fn resolve(&self, tau_q: f64) -> IntegratorConfig {
        let mut c = IntegratorConfig::for_tau_q(tau_q);
        if let Some(dt) = self.dt {
            c.dt = dt;
        }
        if let Some(r) = self.renormalize_each_step {
            c.renormalize_each_step = r;
        }
        if let Some(f) = self.truncation_factor {
            c.truncation_factor = f;
        }
        if let Some(a) = self.angle_convention {
            c.angle_convention = a;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelParams,
    pub scenario: Scenario,
    pub angle: f64,
    pub tauq_grid: TauGrid,
    pub alpha_source: AlphaSource,
    #[serde(default)]
    pub outputs: Option<Vec<Column>>,
    #[serde(default)]
    pub integrator: IntegratorOverrides,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: SweepConfig = serde_json::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.tauq_grid.validate()?;
        if !self.angle.is_finite() {
            return Err(Error::InvalidParams("angle must be finite".into()));
        }
        if let AlphaSource::Explicit(a) = self.alpha_source {
            if !(a > 0.0) {
                return Err(Error::InvalidParams("explicit alpha must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn columns(&self) -> Vec<Column> {
        match &self.outputs {
            Some(cols) => Column::ALL.iter().copied().filter(|c| cols.contains(c)).collect(),
            None => Column::ALL.to_vec(),
        }
    }
}

/// `tau_q / tau_0` beyond which the adiabatic-impulse picture is not
/// expected to hold for a scenario.
pub fn ai_validity_limit(scenario: Scenario) -> Option<f64> {
    match scenario {
        Scenario::SymToMinusEp | Scenario::SymFromNearEp => Some(1.75),
        Scenario::BrokenFromMinusInf => Some(1.2),
        Scenario::BrokenFromNearEp => Some(0.6),
        Scenario::FullSweep => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau_q: f64,
    pub x_alpha: Option<f64>,
    pub d_numeric: Option<f64>,
    pub d_ai: Option<f64>,
    pub d_series: Option<f64>,
    pub d_exact: Option<f64>,
    pub err_numeric: Option<f64>,
    pub note: String,
}

impl SweepRow {
    fn cell(&self, c: Column) -> String {
        let f = |x: Option<f64>| x.map(fmt_cell).unwrap_or_default();
        match c {
            Column::TauQ => fmt_cell(self.tau_q),
            Column::XAlpha => f(self.x_alpha),
            Column::DNumeric => f(self.d_numeric),
            Column::DAi => f(self.d_ai),
            Column::DSeries => f(self.d_series),
            Column::DExact => f(self.d_exact),
            Column::ErrNumeric => f(self.err_numeric),
            Column::Note => self.note.clone(),
        }
    }

    /// `|d_numeric - d_ai| / d_numeric`.
    pub fn ai_rel_gap(&self) -> Option<f64> {
        Some((self.d_numeric? - self.d_ai?).abs() / self.d_numeric?)
    }
}

/// Everything needed to evaluate one grid point.
#[derive(Debug, Clone, Copy)]
pub struct PointSpec {
    pub model: ModelParams,
    pub scenario: Scenario,
    pub angle: f64,
    pub alpha: Option<f64>,
    pub integrator: IntegratorOverrides,
}

pub fn evaluate_point(spec: &PointSpec, tau_q: f64) -> SweepRow {
    let mut notes = Vec::new();
    let cfg = spec.integrator.resolve(tau_q);
    let d_numeric = match defect_density_run(&spec.model, spec.scenario, tau_q, spec.angle, &cfg) {
        Ok(d) => Some(d),
        Err(e) => {
            notes.push(format!("numeric: {e}"));
            None
        }
    };
    let d_exact = if (spec.model.eta - 0.5).abs() < 1e-15 {
        match exact_density(&spec.model, spec.scenario, tau_q, spec.angle, &cfg) {
            Ok(d) => Some(d),
            Err(e) => {
                if d_numeric.is_some() {
                    notes.push(format!("exact: {e}"));
                }
                None
            }
        }
    } else {
        None
    };
    let kind = DensityKind::for_scenario(spec.scenario);
    let (mut x_alpha, mut d_ai, mut d_series) = (None, None, None);
    if let (Some(kind), Some(alpha)) = (kind, spec.alpha) {
        match ai::ai_prediction(kind, spec.angle, alpha, tau_q, spec.model.tau_0) {
            Ok(p) => {
                x_alpha = Some(p.x_alpha);
                d_ai = p.density;
                d_series = ai::series_d(kind, spec.angle, p.x_alpha, kind.max_series_order()).ok();
            }
            Err(e) => notes.push(format!("ai: {e}")),
        }
    }
    let err_numeric = match (d_numeric, d_exact) {
        (Some(n), Some(e)) => Some((n - e).abs()),
        _ => None,
    };
    let row = SweepRow {
        tau_q,
        x_alpha,
        d_numeric,
        d_ai,
        d_series,
        d_exact,
        err_numeric,
        note: String::new(),
    };
    if let Some(g) = row.ai_rel_gap() {
        notes.push(format!("ai_rel_gap={g:.4}"));
    }
    if let Some(limit) = ai_validity_limit(spec.scenario) {
        if tau_q / spec.model.tau_0 > limit {
            notes.push(format!("beyond_ai_window(>{limit})"));
        }
    }
    SweepRow { note: notes.join("; "), ..row }
}

/// Rows in grid order; points run in parallel.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let spec = PointSpec {
        model: cfg.model,
        scenario: cfg.scenario,
        angle: cfg.angle,
        alpha: cfg.alpha_source.resolve(cfg.scenario),
        integrator: cfg.integrator,
    };
    Ok(cfg.tauq_grid.points().par_iter().map(|&t| evaluate_point(&spec, t)).collect())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], columns: &[Column], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidParams(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns.iter().map(|c| c.header())).map_err(io)?;
    for r in rows {
        w.write_record(columns.iter().map(|&c| r.cell(c))).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidParams(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub scenario: Scenario,
    pub tau_q: f64,
    pub angle: f64,
    pub alpha: Option<f64>,
    #[serde(flatten)]
    pub row: SweepRow,
    pub ai_abs_gap: Option<f64>,
    pub ai_rel_gap: Option<f64>,
    pub series_abs_gap: Option<f64>,
    pub exact_abs_gap: Option<f64>,
    pub exact_rel_gap: Option<f64>,
    /// `exp(-pi nu^2 tau_q / 2)` for the Hermitian member (`n = 0`, `delta = 0`).
    pub landau_zener: Option<f64>,
}

pub fn run_compare(model: &ModelParams, scenario: Scenario, tau_q: f64, angle: f64, alpha: Option<f64>, integrator: IntegratorOverrides) -> Result<CompareReport> {
    model.validate()?;
    let spec = PointSpec { model: *model, scenario, angle, alpha, integrator };
    let row = evaluate_point(&spec, tau_q);
    let gap = |a: Option<f64>, b: Option<f64>| Some((a? - b?).abs());
    let rel = |a: Option<f64>, b: Option<f64>| Some((a? - b?).abs() / a?.abs());
    let hermitian = model.parity_n == Parity::Zero && model.delta == 0.0;
    Ok(CompareReport {
        scenario,
        tau_q,
        angle,
        alpha,
        ai_abs_gap: gap(row.d_numeric, row.d_ai),
        ai_rel_gap: rel(row.d_numeric, row.d_ai),
        series_abs_gap: gap(row.d_numeric, row.d_series),
        exact_abs_gap: gap(row.d_numeric, row.d_exact),
        exact_rel_gap: rel(row.d_numeric, row.d_exact),
        landau_zener: hermitian.then(|| (-std::f64::consts::PI * model.nu * model.nu * tau_q / 2.0).exp()),
        row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = TauGrid { min: 0.1, max: 1.0, steps: 2, spacing: Spacing::Linear };
        assert_eq!(g.points(), vec![0.1, 1.0]);
        let g = TauGrid { min: 0.01, max: 1.0, steps: 3, spacing: Spacing::Log };
        let p = g.points();
        assert!((p[1] - 0.1).abs() < 1e-15);
        assert!(TauGrid { min: 1.0, max: 1.0, steps: 3, spacing: Spacing::Linear }.validate().is_err());
        assert!(TauGrid { min: 0.1, max: 1.0, steps: 1, spacing: Spacing::Linear }.validate().is_err());
    }

    #[test]
    fn config_parsing() {
        let text = r#"{
            "model": {"parity_n": "0", "delta": 2.0},
            "scenario": "sym_to_minus_ep",
            "angle": 1.5707963267948966,
            "tauq_grid": {"min": 0.1, "max": 0.2, "steps": 2},
            "alpha_source": {"explicit": 0.07},
            "outputs": ["d_ai", "tau_q"]
        }"#;
        let c = SweepConfig::from_json(text).unwrap();
        assert_eq!(c.alpha_source, AlphaSource::Explicit(0.07));
        assert_eq!(c.columns(), vec![Column::TauQ, Column::DAi]);
        let bad = text.replace("sym_to_minus_ep", "nonsense");
        assert!(SweepConfig::from_json(&bad).is_err());
        let c2: SweepConfig = serde_json::from_str(&text.replace(r#"{"explicit": 0.07}"#, r#""fig3""#)).unwrap();
        assert_eq!(c2.alpha_source.resolve(Scenario::BrokenFromNearEp), Some(0.12));
        assert_eq!(c2.alpha_source.resolve(Scenario::FullSweep), None);
    }

    #[test]
    fn failed_point_becomes_a_note() {
        let spec = PointSpec {
            model: ModelParams::broken_family(1.0),
            scenario: Scenario::BrokenFromNearEp,
            angle: 0.2 * std::f64::consts::PI,
            alpha: Some(0.12),
            integrator: IntegratorOverrides::default(),
        };
        let row = evaluate_point(&spec, 1.5);
        assert!(row.d_numeric.is_none() && row.d_exact.is_none());
        assert!(row.note.contains("empty integration window"), "{}", row.note);
        assert!(row.d_ai.is_some());
    }
}
