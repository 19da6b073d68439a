//! Time integration of `∂tθ + u·∇θ + ν(−Δ)^{1/2}θ = 0`, `u = R^⊥θ`.
//!
//! The dissipative part is diagonal in Fourier space and integrated exactly;
//! the transport term is evaluated pseudo-spectrally with 2/3 dealiasing.

pub mod checkpoint;
mod config;
mod etd;

pub use config::{Dealias, Integrator, Nonlinearity, SolverConfig};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::SpectralField;
use crate::grid::{modulus, Grid};
use crate::ops::{packed_physical, riesz_perp};
use etd::{etd_weights, EtdWeights};

/// Recorded states of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub config: SolverConfig,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &SpectralField)> {
        self.times.iter().copied().zip(&self.states)
    }
}

/// `max_x |R^⊥θ(x)|` over the lattice.
pub fn velocity_sup(theta: &SpectralField) -> f64 {
    let (u1, u2) = riesz_perp(theta);
    packed_physical(&u1, &u2, theta.grid())
        .iter()
        .fold(0.0, |m, c| m.max(c.norm()))
}

pub struct Solver {
    config: SolverConfig,
    grid: Grid,
    steps: usize,
    /// Per-mode symbols of `û₁ + i∂₁θ̂` and `û₂ + i∂₂θ̂`, zero outside the
    /// dealiased band.
    sym1: Vec<Complex64>,
    sym2: Vec<Complex64>,
    keep: Vec<bool>,
    weights: Vec<EtdWeights>,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        let steps = config.steps()?;
        let kmax = grid.dealias_cutoff();
        let mut sym1 = Vec::with_capacity(grid.len());
        let mut sym2 = Vec::with_capacity(grid.len());
        let mut keep = Vec::with_capacity(grid.len());
        let mut weights = Vec::with_capacity(grid.len());
        let mut cache: Vec<Option<EtdWeights>> = vec![None; (2 * (grid.n() / 2).pow(2)) + 1];
        for idx in 0..grid.len() {
            let (k1, k2) = grid.modes(idx);
            let inside = (k1, k2) != (0, 0) && k1.abs() <= kmax && k2.abs() <= kmax;
            keep.push(inside);
            if inside {
                let r = modulus(k1, k2);
                sym1.push(Complex64::new(-(k1 as f64), -(k2 as f64) / r));
                sym2.push(Complex64::new(-(k2 as f64), k1 as f64 / r));
            } else {
                sym1.push(Complex64::default());
                sym2.push(Complex64::default());
            }
            let k2sum = (k1 * k1 + k2 * k2) as usize;
            let w = *cache[k2sum].get_or_insert_with(|| etd_weights(-config.nu * modulus(k1, k2), config.dt));
            weights.push(w);
        }
        Ok(Self {
            config,
            grid,
            steps,
            sym1,
            sym2,
            keep,
            weights,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Restriction to the modes kept by the dealiasing rule.
    pub fn project(&self, theta: &SpectralField) -> SpectralField {
        let coeffs = theta
            .coeffs()
            .iter()
            .zip(&self.keep)
            .map(|(&c, &k)| if k { c } else { Complex64::default() })
            .collect();
        SpectralField::from_coeffs_unchecked(self.grid, coeffs)
    }

    fn check_grid(&self, theta: &SpectralField) -> Result<()> {
        if theta.grid() != self.grid {
            return Err(Error::GridMismatch {
                left: theta.grid().n(),
                right: self.grid.n(),
            });
        }
        Ok(())
    }

    /// `−P(u·∇θ)` on raw coefficients, `None` on a non-finite product.
    fn transport(&self, v: &[Complex64]) -> Option<Vec<Complex64>> {
        let n = self.grid.n();
        let mut p1: Vec<Complex64> = v.iter().zip(&self.sym1).map(|(a, s)| a * s).collect();
        let mut p2: Vec<Complex64> = v.iter().zip(&self.sym2).map(|(a, s)| a * s).collect();
        fft::inverse(&mut p1, n);
        fft::inverse(&mut p2, n);
        let mut finite = true;
        for (a, b) in p1.iter_mut().zip(&p2) {
            let w = a.re * a.im + b.re * b.im;
            finite &= w.is_finite();
            *a = Complex64::new(w, 0.0);
        }
        if !finite {
            return None;
        }
        fft::forward(&mut p1, n);
        let scale = -1.0 / self.grid.len() as f64;
        for (c, &k) in p1.iter_mut().zip(&self.keep) {
            *c = if k { *c * scale } else { Complex64::default() };
        }
        Some(SpectralField::from_coeffs_unchecked(self.grid, p1).into_coeffs())
    }

    /// `−(u·∇θ)` with `u = R^⊥θ`, dealiased. The input is first restricted
    /// to the dealiased band.
    pub fn nonlinear_term(&self, theta: &SpectralField) -> Result<SpectralField> {
        self.check_grid(theta)?;
        let out = self
            .transport(theta.coeffs())
            .ok_or_else(|| Error::NonFinite("nonlinear term".into()))?;
        Ok(SpectralField::from_coeffs_unchecked(self.grid, out))
    }

    fn advance(&self, v: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        let w = &self.weights;
        if self.config.is_linear() {
            return Ok(v.iter().zip(w).map(|(a, w)| a * w.e).collect());
        }
        let nl = |x: &[Complex64]| self.transport(x).ok_or(Error::BlowUp { t });
        let len = v.len();
        let out: Vec<Complex64> = match self.config.integrator {
            Integrator::Etdrk4 => {
                let nv = nl(v)?;
                let a: Vec<Complex64> = (0..len).map(|j| v[j] * w[j].e2 + nv[j] * w[j].q).collect();
                let na = nl(&a)?;
                let b: Vec<Complex64> = (0..len).map(|j| v[j] * w[j].e2 + na[j] * w[j].q).collect();
                let nb = nl(&b)?;
                let c: Vec<Complex64> = (0..len)
                    .map(|j| a[j] * w[j].e2 + (nb[j] * 2.0 - nv[j]) * w[j].q)
                    .collect();
                let nc = nl(&c)?;
                (0..len)
                    .map(|j| {
                        v[j] * w[j].e + nv[j] * w[j].f1 + (na[j] + nb[j]) * (2.0 * w[j].f2) + nc[j] * w[j].f3
                    })
                    .collect()
            }
            Integrator::Ifrk4 => {
                let dt = self.config.dt;
                let ka: Vec<Complex64> = nl(v)?.into_iter().map(|x| x * dt).collect();
                let s: Vec<Complex64> = (0..len).map(|j| (v[j] + ka[j] * 0.5) * w[j].e2).collect();
                let kb: Vec<Complex64> = nl(&s)?.into_iter().map(|x| x * dt).collect();
                let s: Vec<Complex64> = (0..len).map(|j| v[j] * w[j].e2 + kb[j] * 0.5).collect();
                let kc: Vec<Complex64> = nl(&s)?.into_iter().map(|x| x * dt).collect();
                let s: Vec<Complex64> = (0..len).map(|j| v[j] * w[j].e + kc[j] * w[j].e2).collect();
                let kd: Vec<Complex64> = nl(&s)?.into_iter().map(|x| x * dt).collect();
                (0..len)
                    .map(|j| v[j] * w[j].e + (ka[j] * w[j].e + (kb[j] + kc[j]) * (2.0 * w[j].e2) + kd[j]) / 6.0)
                    .collect()
            }
        };
        if out.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::BlowUp { t });
        }
        Ok(SpectralField::from_coeffs_unchecked(self.grid, out).into_coeffs())
    }

    /// One step of size `dt` from time 0.
    pub fn step(&self, theta: &SpectralField) -> Result<SpectralField> {
        self.check_grid(theta)?;
        self.check_cfl(theta, 0.0)?;
        let v = self.advance(theta.coeffs(), self.config.dt)?;
        Ok(SpectralField::from_coeffs_unchecked(self.grid, v))
    }

    /// Errors if `dt` exceeds the CFL limit for `theta`; no-op in linear mode.
    pub fn check_cfl(&self, theta: &SpectralField, t: f64) -> Result<()> {
        if self.config.is_linear() {
            return Ok(());
        }
        let limit = self.config.cfl_limit(velocity_sup(theta));
        if self.config.dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation {
                t,
                dt: self.config.dt,
                limit,
            });
        }
        Ok(())
    }

    /// Integrates to `t_end`, calling `observer(step, t, θ)` at `t = 0`, every
    /// `record_every` steps, and at `t_end`. Returns the final state.
    ///
    /// In nonlinear mode the datum is first restricted to the dealiased band.
    pub fn run_with<F>(&self, theta0: &SpectralField, mut observer: F) -> Result<SpectralField>
    where
        F: FnMut(usize, f64, &SpectralField) -> Result<()>,
    {
        self.check_grid(theta0)?;
        let start = if self.config.is_linear() {
            theta0.clone()
        } else {
            self.project(theta0)
        };
        self.check_cfl(&start, 0.0)?;
        observer(0, 0.0, &start)?;
        let mut v = start.into_coeffs();
        let dt = self.config.dt;
        for k in 1..=self.steps {
            let t = k as f64 * dt;
            v = self.advance(&v, t)?;
            if k % self.config.record_every == 0 || k == self.steps {
                let state = SpectralField::from_coeffs_unchecked(self.grid, v);
                self.check_cfl(&state, t)?;
                observer(k, t, &state)?;
                v = state.into_coeffs();
            }
        }
        Ok(SpectralField::from_coeffs_unchecked(self.grid, v))
    }

    pub fn run(&self, theta0: &SpectralField) -> Result<Trajectory> {
        let mut times = Vec::new();
        let mut states = Vec::new();
        self.run_with(theta0, |_, t, state| {
            times.push(t);
            states.push(state.clone());
            Ok(())
        })?;
        Ok(Trajectory {
            times,
            states,
            config: self.config.clone(),
        })
    }
}

/// One step with a freshly built solver.
pub fn step(theta: &SpectralField, config: &SolverConfig) -> Result<SpectralField> {
    Solver::new(config.clone())?.step(theta)
}

pub fn run(theta0: &SpectralField, config: &SolverConfig) -> Result<Trajectory> {
    Solver::new(config.clone())?.run(theta0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{sobolev_norm_sq, multiply, gradient};
    use crate::random::random_band;

    fn sin1(n: usize) -> SpectralField {
        SpectralField::sine(Grid::new(n).unwrap(), 1, 0, 1.0).unwrap()
    }

    #[test]
    fn shear_and_cellular_states_have_no_transport() {
        let s = Solver::new(SolverConfig::new(0.0, 32, 0.01, 0.01)).unwrap();
        let g = s.grid();
        assert!(s.nonlinear_term(&sin1(32)).unwrap().max_coeff() < 1e-17);
        let cell = &sin1(32) + &SpectralField::sine(g, 0, 1, 1.0).unwrap();
        assert!(s.nonlinear_term(&cell).unwrap().max_coeff() < 1e-16);
    }

    #[test]
    fn nonlinear_term_matches_symbolic_expansion() {
        // θ = sin x₁ + cos(x₁+x₂): u = (sin(x₁+x₂)/√2, cos x₁ − sin(x₁+x₂)/√2),
        // ∇θ = (cos x₁ − sin(x₁+x₂), −sin(x₁+x₂)), so
        // u·∇θ = sin(x₁+x₂)cos x₁ (1/√2 − 1) and the term is its negative.
        let g = Grid::new(32).unwrap();
        let theta = &sin1(32) + &SpectralField::cosine(g, 1, 1, 1.0).unwrap();
        let s = Solver::new(SolverConfig::new(0.0, 32, 0.01, 0.01)).unwrap();
        let got = s.nonlinear_term(&theta).unwrap();
        let k = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
        // sin(x₁+x₂)cos x₁ = (sin(2x₁+x₂) + sin x₂)/2
        let expect = &SpectralField::sine(g, 2, 1, 0.5 * k).unwrap() + &SpectralField::sine(g, 0, 1, 0.5 * k).unwrap();
        assert!(got.relative_error(&expect) < 1e-11, "{}", got.relative_error(&expect));
    }

    #[test]
    fn nonlinear_term_matches_padded_product() {
        let g = Grid::new(64).unwrap();
        let theta = random_band(g, 5, 10, -1.0);
        let s = Solver::new(SolverConfig::new(0.0, 64, 0.01, 0.01)).unwrap();
        let (u1, u2) = riesz_perp(&theta);
        let (d1, d2) = gradient(&theta);
        let direct = &(&multiply(&u1, &d1).unwrap() + &multiply(&u2, &d2).unwrap()) * -1.0;
        let direct = s.project(&direct);
        assert!(s.nonlinear_term(&theta).unwrap().relative_error(&direct) < 1e-12);
    }

    #[test]
    fn linear_step_is_exact() {
        let cfg = SolverConfig::new(0.1, 16, 0.5, 0.5).linear();
        let out = step(&sin1(16), &cfg).unwrap();
        let expect = sin1(16).scaled((-0.05f64).exp());
        assert!(out.relative_error(&expect) < 1e-15);
    }

    #[test]
    fn inviscid_shear_is_steady() {
        let cfg = SolverConfig::new(0.0, 32, 0.01, 0.01);
        let out = step(&sin1(32), &cfg).unwrap();
        assert!(out.relative_error(&sin1(32)) < 1e-13);
    }

    #[test]
    fn both_integrators_decay_the_shear() {
        for integrator in [Integrator::Etdrk4, Integrator::Ifrk4] {
            let cfg = SolverConfig::new(0.1, 32, 0.01, 0.5).with_integrator(integrator).with_record_every(10);
            let traj = run(&sin1(32), &cfg).unwrap();
            assert_eq!(traj.len(), 6);
            let expect = sin1(32).scaled((-0.05f64).exp());
            assert!(traj.final_state().relative_error(&expect) < 1e-12);
        }
    }

    #[test]
    fn integrators_agree_on_a_random_flow() {
        let g = Grid::new(32).unwrap();
        let theta = random_band(g, 11, 5, 0.0);
        let base = SolverConfig::new(0.05, 32, 0.005, 0.2);
        let a = run(&theta, &base).unwrap();
        let b = run(&theta, &base.clone().with_integrator(Integrator::Ifrk4)).unwrap();
        assert!(a.final_state().relative_error(b.final_state()) < 1e-8);
    }

    #[test]
    fn zero_horizon_keeps_only_the_datum() {
        let traj = run(&sin1(16), &SolverConfig::new(0.1, 16, 0.1, 0.0)).unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.states[0], sin1(16));
    }

    #[test]
    fn cfl_violation_is_reported_before_stepping() {
        let g = Grid::new(32).unwrap();
        let theta = random_band(g, 1, 4, 0.0).scaled(50.0);
        let cfg = SolverConfig::new(0.0, 32, 0.05, 1.0);
        match run(&theta, &cfg) {
            Err(Error::CflViolation { t, .. }) => assert_eq!(t, 0.0),
            other => panic!("expected CFL violation, got {other:?}"),
        }
        assert!(run(&theta, &cfg.linear()).is_ok());
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        assert!(run(&sin1(16), &SolverConfig::new(0.1, 32, 0.1, 0.1)).is_err());
    }

    #[test]
    fn hamiltonian_is_conserved_without_viscosity() {
        let g = Grid::new(32).unwrap();
        let theta = random_band(g, 3, 4, 0.0);
        let traj = run(&theta, &SolverConfig::new(0.0, 32, 0.01, 0.5)).unwrap();
        let h0 = sobolev_norm_sq(&traj.states[0], -0.5);
        let h1 = sobolev_norm_sq(traj.final_state(), -0.5);
        assert!(((h1 - h0) / h0).abs() < 1e-6);
    }
}
