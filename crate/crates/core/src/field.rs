//! Real zero-mean scalar fields on the torus held as Fourier coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid;

/// Coefficients `f̂(n)` of `f(x) = Σ f̂(n) e^{in·x}` on a [`Grid`].
///
/// Every constructor and operation leaves the field with `f̂(0) = 0`,
/// `f̂(-n) = conj f̂(n)` and empty Nyquist lines, so the physical field is real.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    /// Builds a field from raw FFT-ordered coefficients, projecting onto the
    /// real zero-mean subspace.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("spectral coefficients".into()));
        }
        let mut f = Self { grid, coeffs };
        f.enforce();
        Ok(f)
    }

    /// Internal constructor for coefficient arrays that are finite by construction.
    pub(crate) fn from_coeffs_unchecked(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        let mut f = Self { grid, coeffs };
        f.enforce();
        f
    }

    /// Sets the listed modes (and their conjugate partners).
    pub fn from_modes<I>(grid: Grid, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((i64, i64), Complex64)>,
    {
        let half = grid.n() as i64 / 2;
        let mut coeffs = vec![Complex64::default(); grid.len()];
        for ((k1, k2), c) in modes {
            if k1.abs() >= half || k2.abs() >= half {
                return Err(Error::InvalidParameter(format!(
                    "mode ({k1}, {k2}) outside the resolved range of a {}-grid",
                    grid.n()
                )));
            }
            coeffs[grid.index(k1, k2)] = c;
            coeffs[grid.index(-k1, -k2)] = c.conj();
        }
        Self::from_coeffs(grid, coeffs)
    }

    /// `amplitude · sin(k₁x₁ + k₂x₂)`.
    pub fn sine(grid: Grid, k1: i64, k2: i64, amplitude: f64) -> Result<Self> {
        Self::from_modes(grid, [((k1, k2), Complex64::new(0.0, -0.5 * amplitude))])
    }

    /// `amplitude · cos(k₁x₁ + k₂x₂)`.
    pub fn cosine(grid: Grid, k1: i64, k2: i64, amplitude: f64) -> Result<Self> {
        Self::from_modes(grid, [((k1, k2), Complex64::new(0.5 * amplitude, 0.0))])
    }

    /// Forward transform of lattice values (row `a` is `x₁ = 2πa/n`); the
    /// mean is removed.
    pub fn from_physical(grid: Grid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("physical values".into()));
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward(&mut buf, grid.n());
        let scale = 1.0 / grid.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        Ok(Self::from_coeffs_unchecked(grid, buf))
    }

    /// Lattice values `f(x_j)`.
    pub fn to_physical(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        fft::inverse(&mut buf, self.grid.n());
        buf.into_iter().map(|c| c.re).collect()
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    #[inline]
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        let half = self.grid.n() as i64 / 2;
        if k1.abs() >= half || k2.abs() >= half {
            return Complex64::default();
        }
        self.coeffs[self.grid.index(k1, k2)]
    }

    /// Iterates `(k₁, k₂, f̂(k))` over all stored slots.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(idx, &c)| {
            let (k1, k2) = self.grid.modes(idx);
            (k1, k2, c)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Multiplies every coefficient by `symbol(k₁, k₂)`. The symbol must map
    /// real fields to real fields (`symbol(-k) = conj symbol(k)`).
    pub fn apply_symbol<F>(&self, symbol: F) -> Self
    where
        F: Fn(i64, i64) -> Complex64,
    {
        let grid = self.grid;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                if c.re == 0.0 && c.im == 0.0 {
                    return c;
                }
                let (k1, k2) = grid.modes(idx);
                c * symbol(k1, k2)
            })
            .collect();
        Self::from_coeffs_unchecked(grid, coeffs)
    }

    /// Real-valued radial or even multiplier, e.g. `|n|^{2α}`.
    pub fn apply_real_symbol<F>(&self, symbol: F) -> Self
    where
        F: Fn(i64, i64) -> f64,
    {
        self.apply_symbol(|k1, k2| Complex64::new(symbol(k1, k2), 0.0))
    }

    /// Copies the coefficients onto another grid, zero-padding or truncating.
    pub fn resample(&self, target: Grid) -> Self {
        if target == self.grid {
            return self.clone();
        }
        let half = (self.grid.n().min(target.n()) / 2) as i64;
        let mut coeffs = vec![Complex64::default(); target.len()];
        for (idx, &c) in self.coeffs.iter().enumerate() {
            let (k1, k2) = self.grid.modes(idx);
            if k1.abs() < half && k2.abs() < half {
                coeffs[target.index(k1, k2)] = c;
            }
        }
        Self::from_coeffs_unchecked(target, coeffs)
    }

    /// Largest per-axis wavenumber carrying a coefficient above
    /// `1e-12 · max|f̂|`; zero for the zero field.
    pub fn band_limit(&self) -> i64 {
        let peak = self.max_coeff();
        if peak == 0.0 {
            return 0;
        }
        let floor = 1e-12 * peak;
        self.modes()
            .filter(|(_, _, c)| c.norm() > floor)
            .map(|(k1, k2, _)| k1.abs().max(k2.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Coefficient-space ℓ² norm `(Σ|f̂|²)^{1/2}`.
    pub fn l2_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖self − other‖ / ‖other‖` in coefficient ℓ² (absolute if `other = 0`).
    pub fn relative_error(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let diff: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let base = other.l2_coeff_norm();
        if base == 0.0 {
            diff
        } else {
            diff / base
        }
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: other.grid.n(),
            });
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    fn zip_with(&self, other: &SpectralField, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    /// Zero mean, empty Nyquist lines, exact Hermitian symmetry.
    fn enforce(&mut self) {
        let grid = self.grid;
        self.coeffs[0] = Complex64::default();
        for idx in 0..grid.len() {
            if grid.is_nyquist(idx) {
                self.coeffs[idx] = Complex64::default();
                continue;
            }
            let m = grid.mirror(idx);
            if idx < m {
                let avg = (self.coeffs[idx] + self.coeffs[m].conj()) * 0.5;
                self.coeffs[idx] = avg;
                self.coeffs[m] = avg.conj();
            }
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scaled(a)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}
