//! Vanishing-viscosity rates for the scaling family and the decay law behind them.

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::solver::SolverConfig;

use super::datum::InitialDatumSpec;
use super::sweep::{run_sweep, DatumCoupling, SweepResult, SweepSpec};

/// Exponent of `D(ν,T) ∼ ν^s`: `(3p−4)/p` for `p ∈ [4/3, 2)`, `1` for `p ≥ 2`.
pub fn predicted_slope(p: f64) -> Result<f64> {
    if !(p >= 4.0 / 3.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!("rates are defined for p >= 4/3, got {p}")));
    }
    Ok(if p < 2.0 { ((3.0 * p - 4.0) / p).max(0.0) } else { 1.0 })
}

/// Interpolation exponent `α = p/(4−p)`.
pub fn interpolation_exponent(p: f64) -> Result<f64> {
    if !(1.0..4.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [1, 4), got {p}")));
    }
    Ok(p / (4.0 - p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub p: f64,
    pub fitted_slope: f64,
    pub predicted_slope: f64,
    pub residual: f64,
    pub sweep: SweepResult,
}

/// Template used by [`rate_experiment`]: 64-grid floor, `dt ≤ 0.01`, 100 records.
pub fn rate_sweep_spec(p: f64, nus: &[f64], linear_mode: bool, t_end: f64) -> SweepSpec {
    let mut solver = SolverConfig::new(0.0, 64, 0.01, t_end);
    if linear_mode {
        solver = solver.linear();
    }
    SweepSpec {
        nus: nus.to_vec(),
        datum: InitialDatumSpec::ScalingBump { p, width: 3.0 },
        coupling: DatumCoupling::RescaledByNu,
        solver,
        t_end,
        c_list: vec![0.5, 1.0, 2.0],
        max_grid: super::sweep::DEFAULT_MAX_GRID,
        records: 100,
    }
}

pub fn rate_from_spec(p: f64, spec: &SweepSpec) -> Result<RateReport> {
    let predicted = predicted_slope(p)?;
    if spec.nus.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "a rate fit needs at least 4 viscosities, got {}",
            spec.nus.len()
        )));
    }
    let sweep = run_sweep(spec).map_err(|a| a.error)?;
    let fit = sweep.rate_fit.expect("complete sweep with >= 4 viscosities");
    Ok(RateReport {
        p,
        fitted_slope: fit.slope,
        predicted_slope: predicted,
        residual: fit.residual,
        sweep,
    })
}

/// Fits `log D(ν,T)` against `log ν` for the scaling bump at exponent `p`.
pub fn rate_experiment(p: f64, nus: &[f64], linear_mode: bool, t_end: f64) -> Result<RateReport> {
    rate_from_spec(p, &rate_sweep_spec(p, nus, linear_mode, t_end))
}

/// `max_{t ≥ t₀} ‖θ(t)‖²_{L²}·(νt)^{(1−α)/α}`, `α = p/(4−p)`.
pub fn gronwall_decay_check(records: &[DiagnosticsRecord], nu: f64, p: f64, t0: f64) -> Result<f64> {
    let alpha = interpolation_exponent(p)?;
    let e = (1.0 - alpha) / alpha;
    let sup = records
        .iter()
        .filter(|r| r.t >= t0 && r.t > 0.0)
        .map(|r| r.l2_sq * (nu * r.t).powf(e))
        .fold(f64::NEG_INFINITY, f64::max);
    if sup == f64::NEG_INFINITY {
        return Err(Error::InvalidParameter(format!("no record at or after t0 = {t0}")));
    }
    Ok(sup)
}

/// `D(ν,δ) = 2ν∫₀^δ ‖θ‖²_{L²}` by the trapezoid rule, interpolating linearly
/// inside the last recording interval.
pub fn partial_dissipation(records: &[DiagnosticsRecord], nu: f64, delta: f64) -> Result<f64> {
    let t_end = records.last().map_or(0.0, |r| r.t);
    if delta < 0.0 || delta > t_end * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside [0, {t_end}]")));
    }
    let mut acc = 0.0;
    for w in records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.t >= delta {
            break;
        }
        let end = b.t.min(delta);
        let frac = (end - a.t) / (b.t - a.t);
        let l2_end = a.l2_sq + frac * (b.l2_sq - a.l2_sq);
        acc += 0.5 * (end - a.t) * (a.l2_sq + l2_end);
    }
    Ok(2.0 * nu * acc)
}

/// `δ ↦ sup_ν D(ν,δ)` over the sweep's viscosity grid.
pub fn small_time_dissipation_profile(sweep: &SweepResult, deltas: &[f64]) -> Result<Vec<(f64, f64)>> {
    deltas
        .iter()
        .map(|&d| {
            let mut sup: f64 = 0.0;
            for r in &sweep.per_nu {
                sup = sup.max(partial_dissipation(&r.records, r.nu, d)?);
            }
            Ok((d, sup))
        })
        .collect()
}
