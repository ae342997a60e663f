//! Parameter sweeps over the rotating-wave benchmark.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::{relative_l2_error, relative_mass_error, InterpolantErrors};
use super::problems::{rotating_wave_exact, rotating_wave_problem};
use crate::error::{invalid, Error, Result};
use crate::fem::build_space;
use crate::geometry::{build_uniform_square_mesh, simplex_quadrature, DiagonalSplit, DomainBox};
use crate::scheme::{run, SchemeConfig, StartupMode, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSettings {
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(rename = "T", default = "default_t_final")]
    pub t_final: f64,
}

fn default_mu() -> f64 {
    0.01
}

fn default_t_final() -> f64 {
    0.5
}

impl Default for ProblemSettings {
    fn default() -> Self {
        Self {
            mu: default_mu(),
            t_final: default_t_final(),
        }
    }
}

/// One grid point of a sweep: `N x N` squares, degree `k`, BDF order `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCase {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(default)]
    pub problem: ProblemSettings,
    pub grid: Vec<SweepCase>,
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub startup: StartupMode,
    #[serde(default)]
    pub split: DiagonalSplit,
    #[serde(default)]
    pub quad_degree: Option<usize>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return invalid("sweep needs at least one variant");
        }
        if self.grid.is_empty() {
            return invalid("sweep grid is empty");
        }
        if !(self.problem.mu > 0.0) || !(self.problem.t_final > 0.0) {
            return invalid("mu and T must be positive");
        }
        Ok(())
    }
}

/// Outcome of one run. Failed runs keep their parameters and the error text.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub case: SweepCase,
    pub variant: Variant,
    pub e_l2: f64,
    pub e_m: f64,
    pub eh_l2: f64,
    pub eh_m: f64,
    pub order_l2: Option<f64>,
    pub runtime_s: f64,
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs one case and measures every error functional.
pub fn run_case(
    settings: &ProblemSettings,
    case: SweepCase,
    variant: Variant,
    startup: StartupMode,
    split: DiagonalSplit,
    quad_degree: Option<usize>,
) -> Result<RunRecord> {
    let start = Instant::now();
    let problem = rotating_wave_problem(settings.mu, settings.t_final);
    let exact = rotating_wave_exact(settings.mu);
    let mesh = build_uniform_square_mesh(DomainBox::symmetric_unit(), case.n, split)?;
    let space = build_space(Arc::new(mesh), case.k)?;
    let mut cfg = SchemeConfig::new(case.q, case.dt).with_variant(variant);
    cfg.startup = startup;
    cfg.quad_degree = quad_degree;
    let quad = simplex_quadrature(cfg.quad_degree_for(case.k))?;

    let mut hat = InterpolantErrors::default();
    let mut failure = None;
    let out = run(&problem, &space, &cfg, |report| {
        if failure.is_none() {
            if let Err(e) = hat.record(&space, report.field, &exact, report.diagnostics.t, &quad) {
                failure = Some(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(RunRecord {
        case,
        variant,
        e_l2: relative_l2_error(&space, &out.field, &exact, out.time, &quad),
        e_m: relative_mass_error(&space, &out.field, &exact, out.time, &quad),
        eh_l2: hat.l2(),
        eh_m: hat.mass(),
        order_l2: None,
        runtime_s: start.elapsed().as_secs_f64(),
        failure: None,
    })
}

/// Rows of a sweep in execution order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub settings: ProblemSettings,
    pub rows: Vec<RunRecord>,
}

/// Runs every grid case for every variant. A failing case is recorded and
/// the sweep continues.
pub fn convergence_sweep(config: &SweepConfig) -> Result<ConvergenceTable> {
    config.validate()?;
    let mut rows = Vec::new();
    for &variant in &config.variants {
        for &case in &config.grid {
            let record = run_case(
                &config.problem,
                case,
                variant,
                config.startup,
                config.split,
                config.quad_degree,
            )
            .unwrap_or_else(|e| RunRecord {
                case,
                variant,
                e_l2: f64::NAN,
                e_m: f64::NAN,
                eh_l2: f64::NAN,
                eh_m: f64::NAN,
                order_l2: None,
                runtime_s: 0.0,
                failure: Some(e.to_string()),
            });
            rows.push(record);
        }
    }
    let mut table = ConvergenceTable {
        settings: config.problem,
        rows,
    };
    table.fill_orders();
    Ok(table)
}

/// Observed order between two runs, measured against `N` when the meshes
/// differ and against `dt` otherwise.
pub fn observed_order(
    prev: &RunRecord,
    next: &RunRecord,
    e: impl Fn(&RunRecord) -> f64,
) -> Option<f64> {
    let ratio = if prev.case.n != next.case.n {
        next.case.n as f64 / prev.case.n as f64
    } else if prev.case.dt != next.case.dt {
        prev.case.dt / next.case.dt
    } else {
        return None;
    };
    let (a, b) = (e(prev), e(next));
    (a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()).then(|| (a / b).ln() / ratio.ln())
}

impl ConvergenceTable {
    /// Fills `order_l2` against the previous successful row with the same
    /// `k`, `q` and variant.
    pub fn fill_orders(&mut self) {
        for i in 0..self.rows.len() {
            let cur = &self.rows[i];
            let prev = self.rows[..i].iter().rev().find(|r| {
                r.succeeded()
                    && r.variant == cur.variant
                    && r.case.k == cur.case.k
                    && r.case.q == cur.case.q
            });
            let order = match prev {
                Some(p) if cur.succeeded() => observed_order(p, cur, |r| r.e_l2),
                _ => None,
            };
            self.rows[i].order_l2 = order;
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# mu={} T={}", self.settings.mu, self.settings.t_final)?;
        writeln!(
            w,
            "N,k,q,dt,variant,e_L2,e_m,eh_L2,eh_m,order_L2,runtime_s,status"
        )?;
        for r in &self.rows {
            let order = r.order_l2.map(|o| format!("{o:.4}")).unwrap_or_default();
            let status = match &r.failure {
                None => "ok".to_string(),
                Some(msg) => format!("failed: {}", msg.replace([',', '\n'], ";")),
            };
            writeln!(
                w,
                "{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{:.3},{}",
                r.case.n,
                r.case.k,
                r.case.q,
                r.case.dt,
                r.variant.name(),
                r.e_l2,
                r.e_m,
                r.eh_l2,
                r.eh_m,
                order,
                r.runtime_s,
                status
            )?;
        }
        Ok(())
    }

    /// Conservative versus non-conservative mass errors for every case run
    /// with both variants.
    pub fn mass_comparison(&self) -> Vec<MassComparison> {
        self.rows
            .iter()
            .filter(|r| r.variant == Variant::Conservative && r.succeeded())
            .filter_map(|c| {
                let other = self.rows.iter().find(|r| {
                    r.variant == Variant::NonConservative && r.case == c.case && r.succeeded()
                })?;
                Some(MassComparison {
                    case: c.case,
                    conservative: c.e_m,
                    nonconservative: other.e_m,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassComparison {
    pub case: SweepCase,
    pub conservative: f64,
    pub nonconservative: f64,
}

impl MassComparison {
    pub fn ratio(&self) -> f64 {
        self.nonconservative / self.conservative
    }
}
