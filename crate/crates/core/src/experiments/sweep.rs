//! Families of runs over a viscosity grid.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    energy_balance_residual, higher_bound_check, HigherBound, Recorder, ScaleAccumulator, ScalePair,
    DiagnosticsRecord,
};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{velocity_sup, Solver, SolverConfig};

use super::datum::{make_datum, InitialDatumSpec};
use super::fit::{ols, LinearFit};

pub const DEFAULT_MAX_GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatumCoupling {
    /// One datum, built at the largest viscosity, for every run.
    Fixed,
    /// Mollification length proportional to ν.
    MollifiedByNu,
    /// Bump rescaled to width ∝ ν.
    RescaledByNu,
}

fn default_c_list() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn default_max_grid() -> usize {
    DEFAULT_MAX_GRID
}

fn default_records() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Strictly decreasing viscosities.
    pub nus: Vec<f64>,
    pub datum: InitialDatumSpec,
    pub coupling: DatumCoupling,
    /// Template: `nu` is replaced per run, `grid_n` is a floor, `dt` an upper
    /// bound and `t_end`/`record_every` are overridden.
    pub solver: SolverConfig,
    pub t_end: f64,
    #[serde(default = "default_c_list")]
    pub c_list: Vec<f64>,
    #[serde(default = "default_max_grid")]
    pub max_grid: usize,
    /// Recording intervals per run.
    #[serde(default = "default_records")]
    pub records: usize,
}

impl SweepSpec {
    /// Power of two `≥ 6·max(1, max c)/ν`, at least the template size.
    pub fn grid_for(&self, nu: f64) -> Result<usize> {
        let cmax = self.c_list.iter().copied().fold(1.0, f64::max);
        let need = 6.0 * cmax / nu;
        let n = (need.log2().ceil().exp2() as usize).max(self.solver.grid_n);
        if n > self.max_grid {
            return Err(Error::Unresolved(format!(
                "nu = {nu} needs a {n}-grid, above the cap {}",
                self.max_grid
            )));
        }
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nus.is_empty() {
            return Err(Error::InvalidParameter("empty viscosity list".into()));
        }
        if self.nus.iter().any(|&nu| !(nu > 0.0 && nu.is_finite())) {
            return Err(Error::InvalidParameter("viscosities must be positive".into()));
        }
        if self.nus.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter("viscosities must be strictly decreasing".into()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.records == 0 {
            return Err(Error::InvalidParameter("records must be positive".into()));
        }
        if self.c_list.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::InvalidParameter("tail constants must be positive".into()));
        }
        let ok = match self.coupling {
            DatumCoupling::Fixed => true,
            DatumCoupling::MollifiedByNu => matches!(self.datum, InitialDatumSpec::MollifiedRough { .. }),
            DatumCoupling::RescaledByNu => self.datum.is_bump(),
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "coupling {:?} does not apply to datum {:?}",
                self.coupling, self.datum
            )));
        }
        let mut probe = self.solver.clone();
        probe.t_end = probe.dt;
        probe.validate()?;
        for &nu in &self.nus {
            self.grid_for(nu)?;
        }
        Ok(())
    }

    fn datum_nu(&self, nu: f64) -> f64 {
        match self.coupling {
            DatumCoupling::Fixed => self.nus[0],
            _ => nu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuResult {
    pub nu: f64,
    pub grid_n: usize,
    pub dt: f64,
    pub steps: usize,
    pub h0: f64,
    pub h_final: f64,
    /// `D(ν,T) = 2ν∫₀^T ‖θ‖²_{L²}`
    pub dissipation: f64,
    pub pairs: Vec<ScalePair>,
    pub reverse_inequality: bool,
    pub energy_balance_residual: f64,
    pub higher_bound: HigherBound,
    /// Largest relative increase of any recorded L^p norm between records.
    pub max_lp_increase: f64,
    pub records: Vec<DiagnosticsRecord>,
}

impl NuResult {
    pub fn final_record(&self) -> &DiagnosticsRecord {
        self.records.last().expect("at least the initial record")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub datum: InitialDatumSpec,
    pub coupling: DatumCoupling,
    pub t_end: f64,
    pub c_list: Vec<f64>,
    pub linear: bool,
    /// Length scale of the mollifier relative to ν, when one is used.
    pub mollification: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Ordered as the input viscosities (decreasing).
    pub per_nu: Vec<NuResult>,
    pub rate_fit: Option<LinearFit>,
    /// `D(ν,T)` strictly decreasing (relative margin `1e−10`) along the grid.
    pub no_ad_verdict: bool,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn nus(&self) -> Vec<f64> {
        self.per_nu.iter().map(|r| r.nu).collect()
    }

    pub fn dissipations(&self) -> Vec<f64> {
        self.per_nu.iter().map(|r| r.dissipation).collect()
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Columns `nu, grid_n, D, tail_c<c>..., H0, HT`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut header = vec!["nu".to_string(), "grid_n".into(), "D".into()];
        header.extend(self.metadata.c_list.iter().map(|&c| tail_column(c)));
        header.extend(["H0".to_string(), "HT".into()]);
        out.write_record(&header).map_err(io)?;
        for r in &self.per_nu {
            let mut row = vec![r.nu.to_string(), r.grid_n.to_string(), r.dissipation.to_string()];
            row.extend(r.pairs.iter().map(|p| p.tail_time_integral.to_string()));
            row.extend([r.h0.to_string(), r.h_final.to_string()]);
            out.write_record(&row).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `tail_c0_5` for `c = 0.5`, `tail_c1` for `c = 1`.
pub fn tail_column(c: f64) -> String {
    format!("tail_c{}", c.to_string().replace('.', "_"))
}

/// A failed sweep: the error, the viscosity it came from, and the runs that
/// did complete.
#[derive(Debug, Clone)]
pub struct SweepAbort {
    pub nu: f64,
    pub error: Error,
    pub partial: Box<SweepResult>,
}

fn pick_dt(spec: &SweepSpec, cfg: &SolverConfig, umax: f64) -> (f64, usize) {
    let mut target = spec.solver.dt;
    if !cfg.is_linear() {
        target = target.min(0.5 * cfg.cfl_limit(umax));
    }
    let per_record = (spec.t_end / (target * spec.records as f64)).ceil().max(1.0) as usize;
    let steps = per_record * spec.records;
    (spec.t_end / steps as f64, per_record)
}

fn run_one(spec: &SweepSpec, nu: f64) -> Result<NuResult> {
    let grid_n = spec.grid_for(nu)?;
    let grid = Grid::new(grid_n)?;
    let theta0 = make_datum(&spec.datum, spec.datum_nu(nu), grid)?;
    let mut cfg = spec.solver.clone();
    cfg.nu = nu;
    cfg.grid_n = grid_n;
    let (dt, record_every) = pick_dt(spec, &cfg, velocity_sup(&theta0));
    cfg.dt = dt;
    cfg.t_end = spec.t_end;
    cfg.record_every = record_every;
    let solver = Solver::new(cfg)?;

    let mut recorder = Recorder::new(nu);
    let mut scales = ScaleAccumulator::new(nu, &spec.c_list, grid_n)?;
    solver.run_with(&theta0, |_, t, state| {
        recorder.push(state, t)?;
        scales.push(t, state)
    })?;
    let records = recorder.into_records();
    let pairs = scales.pairs();
    let first = &records[0];
    let last = records.last().expect("initial record");
    let max_lp_increase = records
        .windows(2)
        .flat_map(|w| {
            let (a, b) = (w[0].lp(), w[1].lp());
            (0..3).map(move |i| if a[i] > 0.0 { (b[i] - a[i]) / a[i] } else { 0.0 })
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(NuResult {
        nu,
        grid_n,
        dt,
        steps: solver.steps(),
        h0: first.hamiltonian,
        h_final: last.hamiltonian,
        dissipation: last.dissipation_to_t,
        reverse_inequality: pairs.iter().all(ScalePair::reverse_inequality_holds),
        pairs,
        energy_balance_residual: energy_balance_residual(&records).unwrap_or(f64::NAN),
        higher_bound: higher_bound_check(&records),
        max_lp_increase,
        records,
    })
}

fn verdict(per_nu: &[NuResult]) -> bool {
    per_nu.len() >= 2
        && per_nu
            .windows(2)
            .all(|w| w[1].dissipation < w[0].dissipation * (1.0 - 1e-10))
}

fn assemble(spec: &SweepSpec, per_nu: Vec<NuResult>, complete: bool) -> SweepResult {
    let rate_fit = (complete && per_nu.len() >= 4).then(|| {
        let x: Vec<f64> = per_nu.iter().map(|r| r.nu.ln()).collect();
        let y: Vec<f64> = per_nu.iter().map(|r| r.dissipation.ln()).collect();
        ols(&x, &y)
    });
    let mollification = match spec.datum {
        InitialDatumSpec::MollifiedRough { eps0, .. } => Some(format!(
            "eps = {eps0} * nu; mollification length shrinks with the viscosity"
        )),
        _ => None,
    };
    SweepResult {
        no_ad_verdict: complete && verdict(&per_nu),
        rate_fit,
        per_nu,
        metadata: SweepMetadata {
            datum: spec.datum.clone(),
            coupling: spec.coupling,
            t_end: spec.t_end,
            c_list: spec.c_list.clone(),
            linear: spec.solver.is_linear(),
            mollification,
        },
    }
}

/// Runs every viscosity (in parallel) and aggregates in input order.
/// Configuration problems are reported before any run starts.
pub fn run_sweep(spec: &SweepSpec) -> std::result::Result<SweepResult, SweepAbort> {
    let abort = |nu: f64, error: Error, done: Vec<NuResult>| SweepAbort {
        nu,
        error,
        partial: Box::new(assemble(spec, done, false)),
    };
    if let Err(e) = spec.validate() {
        let nu = spec
            .nus
            .iter()
            .copied()
            .find(|&nu| spec.grid_for(nu).is_err())
            .unwrap_or(f64::NAN);
        return Err(abort(nu, e, Vec::new()));
    }
    let outcomes: Vec<Result<NuResult>> = spec.nus.par_iter().map(|&nu| run_one(spec, nu)).collect();
    let mut done = Vec::new();
    let mut failure = None;
    for (nu, outcome) in spec.nus.iter().zip(outcomes) {
        match outcome {
            Ok(r) => done.push(r),
            Err(e) => {
                if failure.is_none() {
                    failure = Some((*nu, e));
                }
            }
        }
    }
    match failure {
        Some((nu, e)) => Err(abort(nu, e, done)),
        None => Ok(assemble(spec, done, true)),
    }
}
