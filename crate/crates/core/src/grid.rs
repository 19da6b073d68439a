//! Uniform square lattice on `[0, 2π)²` and its Fourier index set.
//!
//! Spectral arrays are stored in FFT order: the flat index `a * n + b` holds
//! the wavenumber `(k(a), k(b))` where `k(j) = j` for `j < n/2` and `j - n`
//! otherwise. The first axis is `x₁`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub const MIN_MODES: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_MODES || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "modes per axis must be even and >= {}, got {n}",
                Self::MIN_MODES
            )));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points (and of spectral slots).
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice spacing `2π / n`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Signed wavenumber stored at array position `j`.
    #[inline]
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Array position of a signed wavenumber (taken modulo `n`).
    #[inline]
    pub fn position(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    #[inline]
    pub fn index(&self, k1: i64, k2: i64) -> usize {
        self.position(k1) * self.n + self.position(k2)
    }

    /// Wavenumber pair of a flat spectral index.
    #[inline]
    pub fn modes(&self, idx: usize) -> (i64, i64) {
        (self.wavenumber(idx / self.n), self.wavenumber(idx % self.n))
    }

    /// Flat index of `-k` for the mode stored at `idx`.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        let a = idx / self.n;
        let b = idx % self.n;
        ((self.n - a) % self.n) * self.n + (self.n - b) % self.n
    }

    /// True for modes on the Nyquist lines `k₁ = -n/2` or `k₂ = -n/2`.
    /// These are never populated in a [`crate::SpectralField`].
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let h = self.n / 2;
        idx / self.n == h || idx % self.n == h
    }

    /// Largest per-axis wavenumber kept by the 2/3 dealiasing rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    /// Physical coordinate of lattice index `j` along one axis.
    #[inline]
    pub fn coordinate(&self, j: usize) -> f64 {
        self.spacing() * j as f64
    }
}

impl TryFrom<usize> for Grid {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        Grid::new(n)
    }
}

impl From<Grid> for usize {
    fn from(g: Grid) -> usize {
        g.n
    }
}

/// Euclidean modulus `|k|` of a wavenumber pair.
#[inline]
pub fn modulus(k1: i64, k2: i64) -> f64 {
    ((k1 * k1 + k2 * k2) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small_grids() {
        assert!(Grid::new(6).is_err());
        assert!(Grid::new(9).is_err());
        assert!(Grid::new(0).is_err());
        assert!(Grid::new(8).is_ok());
    }

    #[test]
    fn wavenumber_range() {
        let g = Grid::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|j| g.wavenumber(j)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for k in -4..4 {
            assert_eq!(g.wavenumber(g.position(k)), k);
        }
    }

    #[test]
    fn mirror_is_involution() {
        let g = Grid::new(16).unwrap();
        for idx in 0..g.len() {
            let m = g.mirror(idx);
            assert_eq!(g.mirror(m), idx);
            let (a, b) = g.modes(idx);
            if !g.is_nyquist(idx) {
                assert_eq!(g.modes(m), (-a, -b));
            }
        }
        assert_eq!(g.mirror(0), 0);
    }

    #[test]
    fn dealias_cutoff_is_alias_free() {
        for n in [8usize, 64, 128, 256, 512] {
            let k = Grid::new(n).unwrap().dealias_cutoff();
            assert!(3 * k < n as i64);
            assert!(3 * (k + 1) >= n as i64);
        }
    }
}
