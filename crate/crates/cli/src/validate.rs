//! Fast invariant suites behind `sqg validate`.

use sqg_core::diagnostics::{cordoba_check, energy_balance_residual, tail_bound_report, Recorder};
use sqg_core::ops::{lp_norm, sobolev_norm_sq};
use sqg_core::random::random_band;
use sqg_core::{weak_nonlinearity_both_sides, ConvexWeight, Grid, Solver, SolverConfig, SpectralField};

use crate::Failure;

pub struct Suite {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed error measure, compared against `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
}

impl Suite {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            cases: 0,
            failures: 0,
            worst: 0.0,
            tolerance,
        }
    }

    fn case(&mut self, err: f64) {
        self.cases += 1;
        self.worst = self.worst.max(err);
        if err.is_nan() || err > self.tolerance {
            self.failures += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failures == 0
    }
}

fn parseval() -> Suite {
    let mut s = Suite::new("parseval", 1e-12);
    let grid = Grid::new(32).unwrap();
    for i in 0..50 {
        let f = random_band(grid, i, 1 + (i as i64 % 15), -1.0);
        let l2 = lp_norm(&f, 2.0).unwrap();
        let h0 = sobolev_norm_sq(&f, 0.0);
        s.case((l2 * l2 - h0).abs() / h0);
    }
    s
}

fn commutator() -> Suite {
    let mut s = Suite::new("commutator", 1e-10);
    let grid = Grid::new(64).unwrap();
    for i in 0..20 {
        let theta = random_band(grid, 100 + i, 2 + (i as i64 * 5) % 20, -1.0);
        let phi = random_band(grid, 200 + i, 2 + (i as i64 * 3) % 20, -0.5);
        match weak_nonlinearity_both_sides(&theta, &phi) {
            Ok((lhs, rhs)) => s.case((lhs - rhs).abs() / (1.0 + lhs.abs())),
            Err(_) => s.case(f64::INFINITY),
        }
    }
    s
}

/// Negative part of `∫β'(f)(−Δ)^α f` relative to `‖f‖²_{Ḣ^α}`.
fn positivity() -> Suite {
    let mut s = Suite::new("positivity", 1e-10);
    let grid = Grid::new(64).unwrap();
    let weights = [ConvexWeight::quadratic(), ConvexWeight::smoothed_four_thirds()];
    for i in 0..20 {
        let f = random_band(grid, 300 + i, 2 + (i as i64 * 7) % 14, -1.5);
        for beta in &weights {
            for alpha in [0.25, 0.5, 1.0] {
                let v = cordoba_check(&f, beta, alpha).unwrap_or(f64::NEG_INFINITY);
                s.case((-v / sobolev_norm_sq(&f, alpha)).max(0.0));
            }
        }
    }
    s
}

fn balance() -> Suite {
    let mut s = Suite::new("balance", 1e-6);
    let grid = Grid::new(32).unwrap();
    for nu in [0.05, 0.1, 0.2] {
        let theta0 = SpectralField::sine(grid, 1, 0, 1.0).unwrap();
        let solver = Solver::new(SolverConfig::new(nu, 32, 1e-3, 1.0).with_record_every(10)).unwrap();
        let mut rec = Recorder::new(nu);
        let residual = solver
            .run_with(&theta0, |_, t, st| rec.push(st, t).map(|_| ()))
            .ok()
            .and_then(|_| energy_balance_residual(rec.records()).ok())
            .unwrap_or(f64::INFINITY);
        s.case(residual);
    }
    s
}

/// `max(lhs/rhs − 1, 0)` of the tail bound.
fn tail_bound() -> Suite {
    let mut s = Suite::new("tail_bound", 0.0);
    let grid = Grid::new(64).unwrap();
    let weights = [ConvexWeight::quadratic(), ConvexWeight::power(1.5)];
    for i in 0..50u64 {
        let f = random_band(grid, 400 + i, 1 + (i as i64 * 3) % 31, -0.5 - (i % 5) as f64 * 0.5);
        let beta = &weights[i as usize % 2];
        let cutoff = [1.0, 4.0, 16.0][i as usize % 3];
        match tail_bound_report(&f, beta, cutoff, 0.1) {
            Ok(r) if r.rhs > 0.0 => s.case((r.lhs / r.rhs - 1.0).max(0.0)),
            Ok(r) => s.case(if r.lhs == 0.0 { 0.0 } else { f64::INFINITY }),
            Err(_) => s.case(f64::INFINITY),
        }
    }
    s
}

pub fn suites() -> Vec<Suite> {
    vec![parseval(), commutator(), positivity(), balance(), tail_bound()]
}

pub fn validate() -> Result<(), Failure> {
    let all = suites();
    println!("{:<12} {:>6} {:>9} {:>11} {:>11}  status", "suite", "cases", "failures", "worst", "tolerance");
    for s in &all {
        println!(
            "{:<12} {:>6} {:>9} {:>11.3e} {:>11.1e}  {}",
            s.name,
            s.cases,
            s.failures,
            s.worst,
            s.tolerance,
            if s.passed() { "PASS" } else { "FAIL" }
        );
    }
    let failed: Vec<&str> = all.iter().filter(|s| !s.passed()).map(|s| s.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("failing suites: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_counts_failures() {
        let mut s = Suite::new("x", 1.0);
        assert!(!s.passed());
        s.case(0.5);
        s.case(f64::NAN);
        s.case(2.0);
        assert_eq!((s.cases, s.failures), (3, 2));
        assert!(!s.passed());
    }
}
