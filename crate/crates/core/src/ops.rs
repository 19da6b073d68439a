//! Fourier multipliers, norms, frequency cutoffs and alias-free products.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::SpectralField;
use crate::grid::{modulus, Grid};

/// Which side of a frequency cutoff to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `|n| ≤ N`
    Low,
    /// `|n| > N`
    High,
}

#[inline]
fn radial_power(k1: i64, k2: i64, exponent: f64) -> f64 {
    if k1 == 0 && k2 == 0 {
        0.0
    } else {
        modulus(k1, k2).powf(exponent)
    }
}

fn check_exponent(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite(name.into()));
    }
    if !(-2.0..=2.0).contains(&value) {
        return Err(Error::InvalidParameter(format!("{name} = {value} outside [-2, 2]")));
    }
    Ok(())
}

/// `(−Δ)^α f`, the multiplier `|n|^{2α}`.
pub fn fractional_laplacian(f: &SpectralField, alpha: f64) -> Result<SpectralField> {
    check_exponent("alpha", alpha)?;
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.apply_real_symbol(|k1, k2| radial_power(k1, k2, 2.0 * alpha)))
}

/// `∂_{x₁}` for `axis = 0`, `∂_{x₂}` for `axis = 1`.
pub fn derivative(f: &SpectralField, axis: usize) -> SpectralField {
    assert!(axis < 2, "axis must be 0 or 1");
    f.apply_symbol(|k1, k2| Complex64::new(0.0, if axis == 0 { k1 } else { k2 } as f64))
}

pub fn gradient(f: &SpectralField) -> (SpectralField, SpectralField) {
    (derivative(f, 0), derivative(f, 1))
}

/// Velocity `u = ∇^⊥(−Δ)^{−1/2}θ`, i.e. `û(n) = i(−n₂, n₁)/|n| · θ̂(n)`.
pub fn riesz_perp(theta: &SpectralField) -> (SpectralField, SpectralField) {
    let u1 = theta.apply_symbol(|k1, k2| Complex64::new(0.0, -(k2 as f64) * radial_power(k1, k2, -1.0)));
    let u2 = theta.apply_symbol(|k1, k2| Complex64::new(0.0, k1 as f64 * radial_power(k1, k2, -1.0)));
    (u1, u2)
}

/// `Σ |n|^{2s} |f̂(n)|²`.
pub fn sobolev_norm_sq(f: &SpectralField, s: f64) -> f64 {
    let grid = f.grid();
    f.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .map(|(idx, c)| {
            let (k1, k2) = grid.modes(idx);
            radial_power(k1, k2, 2.0 * s) * c.norm_sqr()
        })
        .sum()
}

pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    sobolev_norm_sq(f, s).sqrt()
}

/// `Re Σ |n|^{2s} f̂(n) conj ĝ(n)`, the real inner product inducing [`sobolev_norm`].
pub fn inner_hs(f: &SpectralField, g: &SpectralField, s: f64) -> Result<f64> {
    f.check_same_grid(g)?;
    let grid = f.grid();
    Ok(f
        .coeffs()
        .iter()
        .zip(g.coeffs())
        .enumerate()
        .map(|(idx, (a, b))| {
            let prod = a * b.conj();
            if prod.re == 0.0 {
                return 0.0;
            }
            let (k1, k2) = grid.modes(idx);
            radial_power(k1, k2, 2.0 * s) * prod.re
        })
        .sum())
}

/// `(mean_j |v_j|^p)^{1/p}` over lattice values; `p = ∞` gives the max.
pub fn lp_norm_values(values: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("L^p exponent must be >= 1, got {p}")));
    }
    if values.is_empty() {
        return Ok(0.0);
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let mean = values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / values.len() as f64;
    Ok(mean.powf(1.0 / p))
}

/// L^p norm under the normalized measure `dx/(2π)²`, by lattice mean.
pub fn lp_norm(f: &SpectralField, p: f64) -> Result<f64> {
    lp_norm_values(&f.to_physical(), p)
}

/// `f_{≤N}` or `f_{>N}` with Euclidean `|n|`.
pub fn cutoff(f: &SpectralField, level: f64, side: Side) -> Result<SpectralField> {
    if !level.is_finite() || level < 0.0 {
        return Err(Error::InvalidParameter(format!("cutoff level must be finite and >= 0, got {level}")));
    }
    Ok(f.apply_real_symbol(|k1, k2| {
        let low = modulus(k1, k2) <= level;
        if low == (side == Side::Low) {
            1.0
        } else {
            0.0
        }
    }))
}

/// `Σ_{|n|>level} |n|^{2s} |f̂(n)|²` without building the truncated field.
pub fn high_mode_sum(f: &SpectralField, level: f64, s: f64) -> f64 {
    let grid = f.grid();
    f.coeffs()
        .iter()
        .enumerate()
        .filter_map(|(idx, c)| {
            let (k1, k2) = grid.modes(idx);
            let r = modulus(k1, k2);
            (r > level).then(|| r.powf(2.0 * s) * c.norm_sqr())
        })
        .sum()
}

/// Zeroes every mode with a per-axis wavenumber above `band`.
pub fn band_limit(f: &SpectralField, band: i64) -> SpectralField {
    f.apply_real_symbol(|k1, k2| if k1.abs() <= band && k2.abs() <= band { 1.0 } else { 0.0 })
}

/// Lattice sup of all spectral derivatives of order 0 through 3.
pub fn c3_norm(f: &SpectralField) -> f64 {
    let mut sup: f64 = 0.0;
    for order in 0..=3u32 {
        for j in 0..=order {
            let (a, b) = (order - j, j);
            let d = f.apply_symbol(|k1, k2| {
                let i_pow = Complex64::new(0.0, 1.0).powu(order);
                i_pow * (k1 as f64).powi(a as i32) * (k2 as f64).powi(b as i32)
            });
            sup = sup.max(d.to_physical().iter().fold(0.0, |m, v| m.max(v.abs())));
        }
    }
    sup
}

/// Smallest even grid size `≥ 3n/2`.
pub fn padded_size(n: usize) -> usize {
    let m = (3 * n).div_ceil(2);
    m + m % 2
}

/// Lattice values of `f + i g` on an `m`-grid (both fields real).
pub(crate) fn packed_physical(f: &SpectralField, g: &SpectralField, m: Grid) -> Vec<Complex64> {
    let fm = f.resample(m);
    let gm = g.resample(m);
    let i = Complex64::new(0.0, 1.0);
    let mut buf: Vec<Complex64> = fm.coeffs().iter().zip(gm.coeffs()).map(|(a, b)| a + i * b).collect();
    fft::inverse(&mut buf, m.n());
    buf
}

/// Lattice values of `f` resampled to the `m`-grid.
pub fn physical_on(f: &SpectralField, m: Grid) -> Vec<f64> {
    f.resample(m).to_physical()
}

/// Pointwise product `f·g` with its mean removed, computed on a 3/2-padded
/// lattice and truncated back to the grid of `f`. Exact on the retained modes.
pub fn multiply(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let grid = f.grid();
    if f.is_zero() || g.is_zero() {
        return Ok(SpectralField::zeros(grid));
    }
    let m = Grid::new(padded_size(grid.n()))?;
    let packed = packed_physical(f, g, m);
    let values: Vec<f64> = packed.iter().map(|c| c.re * c.im).collect();
    Ok(SpectralField::from_physical(m, &values)?.resample(grid))
}
