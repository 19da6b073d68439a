use std::path::Path;

use serde::Serialize;

use sqg_core::diagnostics::{self, Recorder};
use sqg_core::experiments::{make_datum, rate_from_spec, run_sweep, small_time_dissipation_profile, SweepResult};
use sqg_core::solver::checkpoint;
use sqg_core::{Grid, Solver};

use crate::config::{self, Loaded};
use crate::output::Session;
use crate::Failure;

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const CHECKPOINT_FILE: &str = "final.sqgf";
pub const SWEEP_JSON: &str = "sweep.json";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SMALLTIME_CSV: &str = "smalltime.csv";
pub const RATES_CSV: &str = "rates.csv";
pub const RATES_JSON: &str = "rates.json";

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

/// Writes the manifest for `result`, then passes `result` through.
fn close<T>(
    session: Session,
    command: &'static str,
    loaded: &Loaded<T>,
    result: Result<(), Failure>,
) -> Result<(), Failure> {
    let info = result.as_ref().err().map(Failure::info);
    session.finish(command, (&loaded.effective, &loaded.hash), info)?;
    result
}

pub fn run(config_path: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let loaded = config::load_run(config_path, seed, config::grid_cap()?)?;
    let cfg = &loaded.config;
    let grid = Grid::new(cfg.solver.grid_n).map_err(|e| Failure::from_core(e, "solver"))?;
    let theta0 = make_datum(&cfg.datum, cfg.solver.nu, grid).map_err(|e| Failure::from_core(e, "datum"))?;
    let solver = Solver::new(cfg.solver.clone()).map_err(|e| Failure::from_core(e, "solver"))?;

    let mut session = Session::start(out)?;
    let mut recorder = Recorder::new(cfg.solver.nu);
    let mut t_final = 0.0;
    let outcome = solver.run_with(&theta0, |_, t, state| {
        t_final = t;
        recorder.push(state, t).map(|_| ())
    });
    let result = (|| {
        let records = recorder.records();
        if !records.is_empty() {
            let mut buf = Vec::new();
            diagnostics::write_csv(&mut buf, records).map_err(|e| Failure::from_core(e, ""))?;
            session.write(DIAGNOSTICS_FILE, &buf)?;
        }
        let state = outcome.map_err(|e| Failure::from_core(e, "run"))?;
        let mut buf = Vec::new();
        checkpoint::write(&mut buf, &state, t_final).map_err(|e| Failure::from_core(e, ""))?;
        session.write(CHECKPOINT_FILE, &buf)?;
        Ok(())
    })();
    close(session, "run", &loaded, result)
}

fn write_sweep(session: &mut Session, result: &SweepResult, deltas: Option<&[f64]>) -> Result<(), Failure> {
    let core = |e| Failure::from_core(e, "");
    let mut json = Vec::new();
    result.write_json(&mut json).map_err(core)?;
    json.push(b'\n');
    session.write(SWEEP_JSON, &json)?;
    let mut csv = Vec::new();
    result.write_csv(&mut csv).map_err(core)?;
    session.write(SWEEP_CSV, &csv)?;
    if let Some(deltas) = deltas {
        let profile = small_time_dissipation_profile(result, deltas).map_err(core)?;
        let rows: Vec<Vec<String>> = profile.iter().map(|(d, v)| vec![d.to_string(), v.to_string()]).collect();
        session.write(SMALLTIME_CSV, &csv_bytes(&["delta", "profile"], &rows)?)?;
    }
    Ok(())
}

pub fn sweep(config_path: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let loaded = config::load_sweep(config_path, seed, config::grid_cap()?)?;
    let cfg = &loaded.config;
    let mut session = Session::start(out)?;
    let result = match run_sweep(&cfg.spec) {
        Ok(r) => write_sweep(&mut session, &r, Some(&cfg.deltas)),
        Err(abort) => {
            let failure = Failure::from_core(abort.error, &format!("nu = {}", abort.nu));
            write_sweep(&mut session, &abort.partial, None).and(Err(failure))
        }
    };
    close(session, "sweep", &loaded, result)
}

#[derive(Serialize)]
struct RateRow {
    p: f64,
    predicted_slope: f64,
    fitted_slope: f64,
    intercept: f64,
    residual: f64,
    nus: Vec<f64>,
    grid_n: Vec<usize>,
    dissipation: Vec<f64>,
}

pub const RATES_HEADER: [&str; 8] = [
    "p",
    "nu",
    "grid_n",
    "D",
    "predicted_slope",
    "fitted_slope",
    "intercept",
    "residual",
];

pub fn rates(config_path: &Path, out: &Path) -> Result<(), Failure> {
    let loaded = config::load_rates(config_path, config::grid_cap()?)?;
    let cfg = &loaded.config;
    let mut session = Session::start(out)?;
    let mut table = Vec::new();
    let mut result = Ok(());
    for &p in &cfg.ps {
        match rate_from_spec(p, &config::rate_spec(cfg, p)) {
            Ok(rep) => {
                let fit = rep.sweep.rate_fit.expect("complete sweep");
                table.push(RateRow {
                    p,
                    predicted_slope: rep.predicted_slope,
                    fitted_slope: rep.fitted_slope,
                    intercept: fit.intercept,
                    residual: rep.residual,
                    nus: rep.sweep.nus(),
                    grid_n: rep.sweep.per_nu.iter().map(|r| r.grid_n).collect(),
                    dissipation: rep.sweep.dissipations(),
                });
            }
            Err(e) => {
                result = Err(Failure::from_core(e, &format!("p = {p}")));
                break;
            }
        }
    }
    let written = (|| {
        let rows: Vec<Vec<String>> = table
            .iter()
            .flat_map(|r| {
                (0..r.nus.len()).map(move |i| {
                    vec![
                        r.p.to_string(),
                        r.nus[i].to_string(),
                        r.grid_n[i].to_string(),
                        r.dissipation[i].to_string(),
                        r.predicted_slope.to_string(),
                        r.fitted_slope.to_string(),
                        r.intercept.to_string(),
                        r.residual.to_string(),
                    ]
                })
            })
            .collect();
        session.write(RATES_CSV, &csv_bytes(&RATES_HEADER, &rows)?)?;
        let mut json = serde_json::to_vec_pretty(&table).map_err(|e| Failure::Io(e.to_string()))?;
        json.push(b'\n');
        session.write(RATES_JSON, &json)?;
        Ok(())
    })();
    let result = result.and(written);
    if result.is_ok() {
        println!("{:>8} {:>10} {:>10} {:>10}", "p", "predicted", "fitted", "residual");
        for r in &table {
            println!(
                "{:>8.4} {:>10.4} {:>10.4} {:>10.2e}",
                r.p, r.predicted_slope, r.fitted_slope, r.residual
            );
        }
    }
    close(session, "rates", &loaded, result)
}
