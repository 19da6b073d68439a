//! Conserved and dissipated functionals along trajectories.

mod tail;

pub use tail::{
    r_epsilon, sobolev_calibration_corpus, sobolev_constant_from_corpus, sobolev_ratio, tail_bound_report,
    TailBoundReport, CALIBRATION_SAFETY, SOBOLEV_CONSTANT,
};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::ops::{fractional_laplacian, high_mode_sum, lp_norm_values, sobolev_norm_sq};
use crate::solver::Trajectory;
use crate::weight::ConvexWeight;

/// Exponents of the recorded L^p norms.
pub const LP_EXPONENTS: [f64; 3] = [4.0 / 3.0, 2.0, 3.0];
/// Constants `c` of the recorded tails `Σ_{|n|>c/ν} |n|^{−1}|θ̂(n)|²`.
pub const TAIL_CONSTANTS: [f64; 3] = [0.5, 1.0, 2.0];

pub const CSV_HEADER: [&str; 11] = [
    "t",
    "hamiltonian",
    "l2_sq",
    "lp_4_3",
    "lp_2",
    "lp_3",
    "dissipation_to_t",
    "weighted_h_half_to_t",
    "tail_c0_5",
    "tail_c1",
    "tail_c2",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `‖θ‖²_{Ḣ^{−1/2}}`
    pub hamiltonian: f64,
    pub l2_sq: f64,
    pub lp_4_3: f64,
    pub lp_2: f64,
    pub lp_3: f64,
    /// `2ν∫₀^t ‖θ‖²_{L²}`
    pub dissipation_to_t: f64,
    /// `4ν²∫₀^t τ‖θ‖²_{Ḣ^{1/2}}`
    pub weighted_h_half_to_t: f64,
    pub tail_c0_5: f64,
    pub tail_c1: f64,
    pub tail_c2: f64,
    /// `‖θ‖²_{Ḣ^{1/2}}`, kept for the running integral.
    #[serde(skip)]
    pub h_half_sq: f64,
}

impl DiagnosticsRecord {
    pub fn lp(&self) -> [f64; 3] {
        [self.lp_4_3, self.lp_2, self.lp_3]
    }

    pub fn tails(&self) -> [f64; 3] {
        [self.tail_c0_5, self.tail_c1, self.tail_c2]
    }
}

/// `Σ_{|n|>c/ν} |n|^{−1}|θ̂(n)|²`; zero when `ν = 0`.
pub fn tail(theta: &SpectralField, nu: f64, c: f64) -> f64 {
    if nu <= 0.0 {
        return 0.0;
    }
    high_mode_sum(theta, c / nu, -0.5)
}

/// Snapshot at time `t` extending the running integrals of `history`.
pub fn record(theta: &SpectralField, t: f64, nu: f64, history: &[DiagnosticsRecord]) -> Result<DiagnosticsRecord> {
    if !t.is_finite() {
        return Err(Error::NonFinite("record time".into()));
    }
    let values = theta.to_physical();
    let l2_sq = sobolev_norm_sq(theta, 0.0);
    let h_half_sq = sobolev_norm_sq(theta, 0.5);
    let (dissipation_to_t, weighted_h_half_to_t) = match history.last() {
        None => (0.0, 0.0),
        Some(prev) => {
            if t <= prev.t {
                return Err(Error::InvalidParameter(format!(
                    "record at t = {t} does not follow t = {}",
                    prev.t
                )));
            }
            let h = t - prev.t;
            (
                prev.dissipation_to_t + nu * h * (prev.l2_sq + l2_sq),
                prev.weighted_h_half_to_t + 2.0 * nu * nu * h * (prev.t * prev.h_half_sq + t * h_half_sq),
            )
        }
    };
    let lp = LP_EXPONENTS.map(|p| lp_norm_values(&values, p).expect("exponents >= 1"));
    let tails = TAIL_CONSTANTS.map(|c| tail(theta, nu, c));
    Ok(DiagnosticsRecord {
        t,
        hamiltonian: sobolev_norm_sq(theta, -0.5),
        l2_sq,
        lp_4_3: lp[0],
        lp_2: lp[1],
        lp_3: lp[2],
        dissipation_to_t,
        weighted_h_half_to_t,
        tail_c0_5: tails[0],
        tail_c1: tails[1],
        tail_c2: tails[2],
        h_half_sq,
    })
}

/// Accumulates records in time order.
#[derive(Debug, Clone)]
pub struct Recorder {
    nu: f64,
    records: Vec<DiagnosticsRecord>,
}

impl Recorder {
    pub fn new(nu: f64) -> Self {
        Self { nu, records: Vec::new() }
    }

    pub fn push(&mut self, theta: &SpectralField, t: f64) -> Result<&DiagnosticsRecord> {
        let r = record(theta, t, self.nu, &self.records)?;
        self.records.push(r);
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<DiagnosticsRecord> {
        self.records
    }
}

pub fn trajectory_records(traj: &Trajectory) -> Result<Vec<DiagnosticsRecord>> {
    let mut rec = Recorder::new(traj.config.nu);
    for (t, state) in traj.iter() {
        rec.push(state, t)?;
    }
    Ok(rec.into_records())
}

pub fn write_csv<W: Write>(w: W, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(CSV_HEADER).map_err(|e| Error::Io(e.to_string()))?;
    for r in records {
        out.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// `max_t |H(t) + D(t) − H(0)| / H(0)`.
pub fn energy_balance_residual(records: &[DiagnosticsRecord]) -> Result<f64> {
    let h0 = records
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty record list".into()))?
        .hamiltonian;
    if h0 == 0.0 {
        return Err(Error::InvalidParameter("energy balance of a zero datum".into()));
    }
    Ok(records
        .iter()
        .map(|r| (r.hamiltonian + r.dissipation_to_t - h0).abs() / h0)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HigherBound {
    /// `4ν²∫₀^T t‖θ‖²_{Ḣ^{1/2}}`
    pub lhs: f64,
    /// `‖θ₀‖²_{Ḣ^{−1/2}}`
    pub rhs: f64,
    pub satisfied: bool,
}

pub fn higher_bound_check(records: &[DiagnosticsRecord]) -> HigherBound {
    let rhs = records.first().map_or(0.0, |r| r.hamiltonian);
    let lhs = records.last().map_or(0.0, |r| r.weighted_h_half_to_t);
    HigherBound {
        lhs,
        rhs,
        satisfied: lhs <= rhs * (1.0 + 1e-6),
    }
}

/// Lattice mean of `β'(f)·(−Δ)^α f`.
pub fn cordoba_check(f: &SpectralField, beta: &ConvexWeight, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let v = f.to_physical();
    let lv = fractional_laplacian(f, alpha)?.to_physical();
    Ok(v.iter().zip(&lv).map(|(&a, &b)| beta.deriv(a) * b).sum::<f64>() / v.len() as f64)
}

/// `∫ β(|θ|^{4/3})` under the normalized measure.
pub fn equiintegrability_functional(theta: &SpectralField, beta: &ConvexWeight) -> f64 {
    let v = theta.to_physical();
    v.iter().map(|x| beta.eval(x.abs().powf(4.0 / 3.0))).sum::<f64>() / v.len() as f64
}

/// Time integrals behind the dissipation-scale equivalence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalePair {
    pub c: f64,
    /// `Σ_{|n|>c/ν} |n|^{−1} ∫₀^T |θ̂(τ,n)|²`
    pub tail_time_integral: f64,
    /// `ν∫₀^T ‖θ‖²_{L²}`
    pub dissipation: f64,
}

impl ScalePair {
    /// The reverse inequality `tail ≤ dissipation / c` with round-off slack.
    pub fn reverse_inequality_holds(&self) -> bool {
        self.tail_time_integral <= self.dissipation / self.c + 1e-12
    }
}

/// Streaming trapezoid accumulator of [`ScalePair`]s for several `c`.
#[derive(Debug, Clone)]
pub struct ScaleAccumulator {
    nu: f64,
    cs: Vec<f64>,
    last: Option<(f64, Vec<f64>, f64)>,
    tail_int: Vec<f64>,
    l2_int: f64,
}

impl ScaleAccumulator {
    pub fn new(nu: f64, cs: &[f64], grid_n: usize) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter("dissipation scale needs nu > 0".into()));
        }
        for &c in cs {
            if !(c > 0.0) {
                return Err(Error::InvalidParameter(format!("tail constant must be positive, got {c}")));
            }
            if c / nu > grid_n as f64 / 3.0 {
                return Err(Error::Unresolved(format!(
                    "c/nu = {} exceeds grid_n/3 = {}",
                    c / nu,
                    grid_n as f64 / 3.0
                )));
            }
        }
        Ok(Self {
            nu,
            cs: cs.to_vec(),
            last: None,
            tail_int: vec![0.0; cs.len()],
            l2_int: 0.0,
        })
    }

    pub fn push(&mut self, t: f64, theta: &SpectralField) -> Result<()> {
        let tails: Vec<f64> = self.cs.iter().map(|&c| tail(theta, self.nu, c)).collect();
        let l2 = sobolev_norm_sq(theta, 0.0);
        if let Some((t0, tails0, l20)) = &self.last {
            if t <= *t0 {
                return Err(Error::InvalidParameter(format!("time {t} does not follow {t0}")));
            }
            let h = 0.5 * (t - t0);
            for (acc, (a, b)) in self.tail_int.iter_mut().zip(tails0.iter().zip(&tails)) {
                *acc += h * (a + b);
            }
            self.l2_int += h * (l20 + l2);
        }
        self.last = Some((t, tails, l2));
        Ok(())
    }

    pub fn pairs(&self) -> Vec<ScalePair> {
        self.cs
            .iter()
            .zip(&self.tail_int)
            .map(|(&c, &tail_time_integral)| ScalePair {
                c,
                tail_time_integral,
                dissipation: self.nu * self.l2_int,
            })
            .collect()
    }
}

/// Both sides of the dissipation-scale equivalence on `[0, T]`; `T` must be
/// a recorded time.
pub fn dissipation_scale_pair(traj: &Trajectory, nu: f64, c: f64, t_end: f64) -> Result<ScalePair> {
    let last = traj
        .times
        .iter()
        .position(|&t| (t - t_end).abs() <= 1e-9 * t_end.abs().max(1.0))
        .ok_or_else(|| Error::InvalidParameter(format!("T = {t_end} is not a recorded time")))?;
    let mut acc = ScaleAccumulator::new(nu, &[c], traj.final_state().grid().n())?;
    for (t, state) in traj.iter().take(last + 1) {
        acc.push(t, state)?;
    }
    Ok(acc.pairs().remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::ops::lp_norm;
    use crate::random::random_band;
    use crate::solver::{run, SolverConfig};

    fn sin1(n: usize) -> SpectralField {
        SpectralField::sine(Grid::new(n).unwrap(), 1, 0, 1.0).unwrap()
    }

    #[test]
    fn sine_snapshot() {
        let r = record(&sin1(16), 0.0, 0.1, &[]).unwrap();
        assert!((r.hamiltonian - 0.5).abs() < 1e-15);
        assert!((r.l2_sq - 0.5).abs() < 1e-15);
        assert_eq!(r.dissipation_to_t, 0.0);
        assert_eq!(r.tails(), [0.0; 3]);
        assert!(record(&sin1(16), 0.0, 0.1, &[r]).is_err());
    }

    #[test]
    fn decaying_shear_integrals() {
        let nu = 0.1;
        let mut rec = Recorder::new(nu);
        for k in 0..=100 {
            let t = k as f64 * 0.01;
            rec.push(&sin1(16).scaled((-nu * t).exp()), t).unwrap();
        }
        let last = rec.records().last().unwrap();
        assert!((last.hamiltonian - (-0.2f64).exp() / 2.0).abs() < 1e-15);
        assert!((last.dissipation_to_t - (1.0 - (-0.2f64).exp()) / 2.0).abs() < 1e-6);
        let closed = (1.0 - (-0.2f64).exp() * 1.2) / 2.0;
        assert!((last.weighted_h_half_to_t - closed).abs() < 1e-6);
        let hb = higher_bound_check(rec.records());
        assert!(hb.satisfied && (hb.rhs - 0.5).abs() < 1e-15);
        assert!(energy_balance_residual(rec.records()).unwrap() < 1e-6);
    }

    #[test]
    fn csv_columns_in_order() {
        let recs = vec![record(&sin1(16), 0.0, 0.1, &[]).unwrap()];
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,hamiltonian,l2_sq,lp_4_3,lp_2,lp_3,dissipation_to_t,weighted_h_half_to_t,tail_c0_5,tail_c1,tail_c2"
        );
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(row.len(), 11);
        assert_eq!(row[1], 0.5);
        assert!(lines.next().is_none());
    }

    #[test]
    fn tails_vanish_beyond_the_grid_and_decrease_in_c() {
        let f = random_band(Grid::new(32).unwrap(), 4, 15, 0.0);
        assert_eq!(tail(&f, 0.01, 1.0), 0.0);
        let r = record(&f, 0.0, 0.2, &[]).unwrap();
        assert!(r.tail_c0_5 >= r.tail_c1 && r.tail_c1 >= r.tail_c2);
        assert!(r.tail_c0_5 <= r.hamiltonian);
    }

    #[test]
    fn zero_datum_cases() {
        let z = SpectralField::zeros(Grid::new(16).unwrap());
        let recs = vec![record(&z, 0.0, 0.1, &[]).unwrap()];
        assert!(energy_balance_residual(&recs).is_err());
        let hb = higher_bound_check(&recs);
        assert_eq!((hb.lhs, hb.rhs, hb.satisfied), (0.0, 0.0, true));
        assert_eq!(cordoba_check(&z, &ConvexWeight::quadratic(), 0.5).unwrap(), 0.0);
        assert_eq!(equiintegrability_functional(&z, &ConvexWeight::power(1.5)), 0.0);
    }

    #[test]
    fn quadratic_cordoba_is_plancherel() {
        let f = random_band(Grid::new(32).unwrap(), 8, 6, -1.0);
        for alpha in [0.25, 0.5, 1.0] {
            let got = cordoba_check(&f, &ConvexWeight::quadratic(), alpha).unwrap();
            let expect = 2.0 * sobolev_norm_sq(&f, alpha);
            assert!((got - expect).abs() < 1e-12 * expect);
        }
        assert!(cordoba_check(&f, &ConvexWeight::quadratic(), 0.0).is_err());
        let s = cordoba_check(&sin1(64), &ConvexWeight::smoothed_four_thirds(), 0.5).unwrap();
        assert!(s > 0.0);
    }

    #[test]
    fn equiintegrability_of_decaying_shear() {
        let beta = ConvexWeight::power(1.5);
        let f0 = equiintegrability_functional(&sin1(32), &beta);
        let f1 = equiintegrability_functional(&sin1(32).scaled((-0.1f64).exp()), &beta);
        assert!((f1 / f0 - (-0.2f64).exp()).abs() < 1e-12);
        assert!((f0 - lp_norm(&sin1(32), 2.0).unwrap().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn scale_pair_for_single_mode_and_random_runs() {
        let cfg = SolverConfig::new(0.1, 64, 0.01, 1.0).with_record_every(10);
        let traj = run(&sin1(64), &cfg).unwrap();
        let p = dissipation_scale_pair(&traj, 0.1, 0.5, 1.0).unwrap();
        assert!(p.tail_time_integral < 1e-30);
        assert!((p.dissipation - (1.0 - (-0.2f64).exp()) / 4.0).abs() < 1e-5);
        let theta = random_band(Grid::new(64).unwrap(), 2, 10, 0.0);
        let traj = run(&theta, &cfg).unwrap();
        for c in [1.0, 2.0] {
            let p = dissipation_scale_pair(&traj, 0.1, c, 1.0).unwrap();
            assert!(p.tail_time_integral > 0.0 && p.reverse_inequality_holds());
        }
        assert!(matches!(dissipation_scale_pair(&traj, 0.1, 3.0, 1.0), Err(Error::Unresolved(_))));
        assert!(dissipation_scale_pair(&traj, 0.1, 1.0, 0.55).is_err());
    }
}
