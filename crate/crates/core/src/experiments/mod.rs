//! Viscosity sweeps, rate fits and the initial data they run on.

mod datum;
mod fit;
mod rates;
mod sweep;

pub use datum::{bump_profile, make_datum, InitialDatumSpec, BUMP_ZERO_MEAN, MOLLIFIER_RESOLUTION};
pub use fit::{ols, LinearFit};
pub use rates::{
    gronwall_decay_check, interpolation_exponent, partial_dissipation, predicted_slope, rate_experiment,
    rate_from_spec, rate_sweep_spec, small_time_dissipation_profile, RateReport,
};
pub use sweep::{
    run_sweep, tail_column, DatumCoupling, NuResult, SweepAbort, SweepMetadata, SweepResult, SweepSpec,
    DEFAULT_MAX_GRID,
};
