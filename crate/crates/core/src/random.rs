//! Grid-independent random fields: each Fourier mode draws from its own
//! ChaCha stream keyed by the wavenumber, so a seed describes the same
//! datum on every grid that resolves it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::field::SpectralField;
use crate::grid::{modulus, Grid};
use crate::ops::sobolev_norm;

/// How each mode's random coefficient is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Draw {
    /// Complex Gaussian: independent standard normal real and imaginary parts.
    Gaussian,
    /// Unit modulus with a uniform phase.
    Phase,
}

fn stream_key(k1: i64, k2: i64) -> u64 {
    ((k1 as i32 as u32 as u64) << 32) | (k2 as i32 as u32 as u64)
}

/// True for the representative of each `{n, −n}` pair.
fn canonical(k1: i64, k2: i64) -> bool {
    k1 > 0 || (k1 == 0 && k2 > 0)
}

/// Mode-wise random draw `c(n)` times `envelope(n)`; modes where the envelope
/// returns `None` or zero are left empty.
pub fn random_modes<F>(grid: Grid, seed: u64, draw: Draw, envelope: F) -> SpectralField
where
    F: Fn(i64, i64) -> Option<f64>,
{
    let half = grid.n() as i64 / 2;
    let mut modes = Vec::new();
    for k1 in 0..half {
        for k2 in (1 - half)..half {
            if !canonical(k1, k2) {
                continue;
            }
            let Some(amp) = envelope(k1, k2).filter(|a| *a != 0.0) else {
                continue;
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_key(k1, k2));
            let c = match draw {
                Draw::Gaussian => {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im)
                }
                Draw::Phase => {
                    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    Complex64::from_polar(1.0, phase)
                }
            };
            modes.push(((k1, k2), c * amp));
        }
    }
    SpectralField::from_modes(grid, modes).expect("modes lie inside the grid")
}

/// Gaussian field on `max(|k₁|,|k₂|) ≤ band` with envelope `|n|^slope`,
/// scaled to unit L² norm.
pub fn random_band(grid: Grid, seed: u64, band: i64, slope: f64) -> SpectralField {
    let band = band.min(grid.n() as i64 / 2 - 1);
    let f = random_modes(grid, seed, Draw::Gaussian, |k1, k2| {
        (k1.abs() <= band && k2.abs() <= band).then(|| modulus(k1, k2).powf(slope))
    });
    let norm = sobolev_norm(&f, 0.0);
    if norm == 0.0 {
        f
    } else {
        f.scaled(1.0 / norm)
    }
}
