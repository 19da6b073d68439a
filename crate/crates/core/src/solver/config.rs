use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Exponential time differencing RK4 (Cox–Matthews).
    #[default]
    Etdrk4,
    /// Integrating-factor RK4.
    Ifrk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    #[default]
    On,
    /// Fractional heat equation `∂tθ + ν(−Δ)^{1/2}θ = 0`.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    #[default]
    TwoThirds,
}

fn default_record_every() -> usize {
    1
}

fn default_cfl() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub nu: f64,
    pub grid_n: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
}

impl SolverConfig {
    pub fn new(nu: f64, grid_n: usize, dt: f64, t_end: f64) -> Self {
        Self {
            nu,
            grid_n,
            dt,
            t_end,
            integrator: Integrator::default(),
            nonlinearity: Nonlinearity::default(),
            dealias: Dealias::default(),
            record_every: default_record_every(),
            cfl_safety: default_cfl(),
        }
    }

    pub fn linear(mut self) -> Self {
        self.nonlinearity = Nonlinearity::Off;
        self
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_cfl_safety(mut self, cfl: f64) -> Self {
        self.cfl_safety = cfl;
        self
    }

    pub fn is_linear(&self) -> bool {
        self.nonlinearity == Nonlinearity::Off
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_n)
    }

    /// Number of steps `t_end / dt`, which must be an integer.
    pub fn steps(&self) -> Result<usize> {
        let ratio = self.t_end / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "t_end = {} is not an integer multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.nu.is_finite() || self.nu < 0.0 {
            return Err(Error::InvalidParameter(format!("nu must be finite and >= 0, got {}", self.nu)));
        }
        self.grid()?;
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !self.t_end.is_finite() || self.t_end < 0.0 {
            return Err(Error::InvalidParameter(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be positive".into()));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        self.steps()?;
        Ok(())
    }

    /// Largest admissible step for a velocity sup `umax`.
    pub fn cfl_limit(&self, umax: f64) -> f64 {
        self.cfl_safety * (2.0 * std::f64::consts::PI / self.grid_n as f64) / umax.max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_defaults_and_rejects_unknown_keys() {
        let c: SolverConfig = serde_json::from_str(r#"{"nu":0.1,"grid_n":64,"dt":0.001,"t_end":1.0}"#).unwrap();
        assert_eq!(c.integrator, Integrator::Etdrk4);
        assert_eq!(c.nonlinearity, Nonlinearity::On);
        assert_eq!(c.record_every, 1);
        c.validate().unwrap();
        assert_eq!(c.steps().unwrap(), 1000);
        let bad = serde_json::from_str::<SolverConfig>(r#"{"nu":0.1,"grid_n":64,"dt":0.001,"t_end":1.0,"foo":1}"#);
        assert!(bad.is_err());
        let c: SolverConfig = serde_json::from_str(
            r#"{"nu":0,"grid_n":32,"dt":0.1,"t_end":1,"integrator":"ifrk4","nonlinearity":"off","dealias":"two_thirds"}"#,
        )
        .unwrap();
        assert!(c.is_linear());
        assert_eq!(c.integrator, Integrator::Ifrk4);
    }

    #[test]
    fn validation_errors() {
        let ok = SolverConfig::new(0.1, 64, 0.01, 1.0);
        ok.validate().unwrap();
        assert!(SolverConfig { nu: -1.0, ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { grid_n: 63, ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { dt: 0.0, ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { t_end: 1.005, dt: 0.01, ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { record_every: 0, ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { cfl_safety: 1.5, ..ok.clone() }.validate().is_err());
        assert_eq!(SolverConfig { t_end: 0.0, ..ok }.steps().unwrap(), 0);
    }
}
