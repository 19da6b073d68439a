//! Initial data families.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{modulus, Grid};
use crate::random::{random_band, random_modes, Draw};

/// `a` in `b(r) = exp(1 − 1/(1 − (r/w)²))·(1 − a(r/w)²)`, chosen so that
/// `∫₀^w b(r) r dr = 0`; independent of `w`.
pub const BUMP_ZERO_MEAN: f64 = 3.826854673316793;

/// Product `ε·k_max` below which a mollified datum counts as under-resolved.
pub const MOLLIFIER_RESOLUTION: f64 = 3.0;

fn one() -> f64 {
    1.0
}

fn default_delta() -> f64 {
    0.05
}

fn default_slope() -> f64 {
    -1.0
}

fn default_width() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDatumSpec {
    /// `amplitude · sin x₁`
    SingleMode {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Gaussian coefficients on `max|k_i| ≤ band` with envelope `|n|^slope`,
    /// scaled to L² norm `amplitude`.
    RandomBand {
        seed: u64,
        band: i64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "default_slope")]
        slope: f64,
    },
    /// Random-phase prototype `|θ̂(n)| = amplitude·|n|^{−3/2−δ}` mollified by
    /// `e^{−ε²|n|²}`, `ε = eps0·ν`.
    MollifiedRough {
        seed: u64,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "one")]
        eps0: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `ν^{−2/p} b(|x − x₀|/ν)` with a zero-mean radial bump of radius `width`.
    ScalingBump {
        p: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
    /// The scaling bump at `p = 4/3`.
    ConcentratingBump {
        #[serde(default = "default_width")]
        width: f64,
    },
}

impl InitialDatumSpec {
    /// The integrability class the family is built for, if any.
    pub fn p_target(&self) -> Option<f64> {
        match self {
            Self::ScalingBump { p, .. } => Some(*p),
            Self::ConcentratingBump { .. } | Self::MollifiedRough { .. } => Some(4.0 / 3.0),
            Self::SingleMode { .. } | Self::RandomBand { .. } => None,
        }
    }

    pub fn is_bump(&self) -> bool {
        matches!(self, Self::ScalingBump { .. } | Self::ConcentratingBump { .. })
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Self::RandomBand { .. } | Self::MollifiedRough { .. })
    }

    /// Replaces the seed of random kinds.
    pub fn with_seed(self, new_seed: u64) -> Self {
        match self {
            Self::RandomBand { band, amplitude, slope, .. } => Self::RandomBand {
                seed: new_seed,
                band,
                amplitude,
                slope,
            },
            Self::MollifiedRough { delta, eps0, amplitude, .. } => Self::MollifiedRough {
                seed: new_seed,
                delta,
                eps0,
                amplitude,
            },
            other => other,
        }
    }
}

/// Zero-mean bump profile on `[0, 1)` in the scaled radius `x = r/w`.
pub fn bump_profile(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let x2 = x * x;
    (1.0 - 1.0 / (1.0 - x2)).exp() * (1.0 - BUMP_ZERO_MEAN * x2)
}

fn bump(grid: Grid, nu: f64, p: f64, width: f64) -> Result<SpectralField> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter("bump data need nu > 0".into()));
    }
    if !(width > 0.0) || !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("bump needs width > 0 and p >= 1, got {width}, {p}")));
    }
    let radius = width * nu;
    if radius >= PI {
        return Err(Error::Support(format!("bump radius {radius} does not fit in a half-period")));
    }
    let n = grid.n();
    let scale = nu.powf(-2.0 / p);
    let values: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let d1 = grid.coordinate(idx / n) - PI;
            let d2 = grid.coordinate(idx % n) - PI;
            scale * bump_profile((d1 * d1 + d2 * d2).sqrt() / radius)
        })
        .collect();
    SpectralField::from_physical(grid, &values)
}

/// The datum of `spec` at viscosity `nu` on `grid`.
pub fn make_datum(spec: &InitialDatumSpec, nu: f64, grid: Grid) -> Result<SpectralField> {
    match *spec {
        InitialDatumSpec::SingleMode { amplitude } => SpectralField::sine(grid, 1, 0, amplitude),
        InitialDatumSpec::RandomBand {
            seed,
            band,
            amplitude,
            slope,
        } => {
            if band < 1 || band >= grid.n() as i64 / 2 {
                return Err(Error::InvalidParameter(format!(
                    "band {band} outside [1, {}) for a {}-grid",
                    grid.n() / 2,
                    grid.n()
                )));
            }
            Ok(random_band(grid, seed, band, slope).scaled(amplitude))
        }
        InitialDatumSpec::MollifiedRough {
            seed,
            delta,
            eps0,
            amplitude,
        } => {
            let eps = eps0 * nu;
            let kmax = grid.dealias_cutoff() as f64;
            if !(eps * kmax >= MOLLIFIER_RESOLUTION) {
                return Err(Error::Unresolved(format!(
                    "mollification scale {eps} is not resolved by a {}-grid (eps * k_max = {} < {MOLLIFIER_RESOLUTION})",
                    grid.n(),
                    eps * kmax
                )));
            }
            Ok(random_modes(grid, seed, Draw::Phase, |k1, k2| {
                let r = modulus(k1, k2);
                Some(amplitude * r.powf(-1.5 - delta) * (-(eps * r).powi(2)).exp())
            }))
        }
        InitialDatumSpec::ScalingBump { p, width } => bump(grid, nu, p, width),
        InitialDatumSpec::ConcentratingBump { width } => bump(grid, nu, 4.0 / 3.0, width),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::equiintegrability_functional;
    use crate::ops::{lp_norm, sobolev_norm_sq};
    use crate::weight::ConvexWeight;

    #[test]
    fn bump_profile_has_zero_integral() {
        // midpoint rule in x on [0, 1] for ∫ b(x) x dx
        let m = 200_000;
        let s: f64 = (0..m)
            .map(|i| {
                let x = (i as f64 + 0.5) / m as f64;
                bump_profile(x) * x
            })
            .sum::<f64>()
            / m as f64;
        assert!(s.abs() < 1e-10, "{s}");
        assert_eq!(bump_profile(1.0), 0.0);
        assert!((bump_profile(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_mode_is_sine() {
        let g = Grid::new(16).unwrap();
        let f = make_datum(&InitialDatumSpec::SingleMode { amplitude: 1.0 }, 0.1, g).unwrap();
        assert_eq!(f, SpectralField::sine(g, 1, 0, 1.0).unwrap());
    }

    fn grid_for(nu: f64) -> Grid {
        Grid::new(((12.0 / nu).log2().ceil().exp2() as usize).max(64)).unwrap()
    }

    #[test]
    fn scaling_bump_preserves_lp() {
        for p in [1.6, 2.0] {
            let spec = InitialDatumSpec::ScalingBump { p, width: 3.0 };
            let norms: Vec<f64> = [0.2, 0.1, 0.05]
                .iter()
                .map(|&nu| lp_norm(&make_datum(&spec, nu, grid_for(nu)).unwrap(), p).unwrap())
                .collect();
            for n in &norms {
                assert!((n / norms[0] - 1.0).abs() < 0.01, "{norms:?}");
            }
        }
    }

    #[test]
    fn concentrating_bump_keeps_hamiltonian_and_concentrates() {
        let spec = InitialDatumSpec::ConcentratingBump { width: 3.0 };
        let beta = ConvexWeight::power(1.5);
        let nus = [0.2, 0.1, 0.05];
        let data: Vec<SpectralField> = nus.iter().map(|&nu| make_datum(&spec, nu, grid_for(nu)).unwrap()).collect();
        let h0 = sobolev_norm_sq(&data[0], -0.5);
        for (nu, d) in nus.iter().zip(&data) {
            assert!((sobolev_norm_sq(d, -0.5) / h0 - 1.0).abs() < 0.02);
            let growth = equiintegrability_functional(d, &beta) * nu / (equiintegrability_functional(&data[0], &beta) * 0.2);
            assert!((growth - 1.0).abs() < 0.02, "{growth}");
        }
    }

    #[test]
    fn construction_errors() {
        let g = Grid::new(64).unwrap();
        let wide = InitialDatumSpec::ScalingBump { p: 2.0, width: 3.0 };
        assert!(matches!(make_datum(&wide, 1.1, g), Err(Error::Support(_))));
        let rough = InitialDatumSpec::MollifiedRough {
            seed: 1,
            delta: 0.05,
            eps0: 1.0,
            amplitude: 1.0,
        };
        assert!(matches!(make_datum(&rough, 0.05, g), Err(Error::Unresolved(_))));
        assert!(make_datum(&rough, 0.2, g).is_ok());
        let band = InitialDatumSpec::RandomBand {
            seed: 1,
            band: 40,
            amplitude: 1.0,
            slope: -1.0,
        };
        assert!(make_datum(&band, 0.1, g).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s: InitialDatumSpec = serde_json::from_str(r#"{"kind":"mollified_rough","seed":7}"#).unwrap();
        assert_eq!(
            s,
            InitialDatumSpec::MollifiedRough {
                seed: 7,
                delta: 0.05,
                eps0: 1.0,
                amplitude: 1.0
            }
        );
        assert!(serde_json::from_str::<InitialDatumSpec>(r#"{"kind":"single_mode","foo":1}"#).is_err());
        assert_eq!(s.with_seed(9).p_target(), Some(4.0 / 3.0));
    }
}
