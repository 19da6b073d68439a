//! ETDRK4 weights evaluated by contour averaging, which stays accurate as
//! `L·dt → 0` where the closed forms cancel catastrophically.

use num_complex::Complex64;

const CONTOUR_POINTS: usize = 32;

/// Per-mode multipliers for one linear rate `L` and step `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct EtdWeights {
    pub e: f64,
    pub e2: f64,
    pub q: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

pub(crate) fn etd_weights(l: f64, dt: f64) -> EtdWeights {
    let h = l * dt;
    let (mut q, mut f1, mut f2, mut f3) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..CONTOUR_POINTS {
        let r = Complex64::from_polar(1.0, std::f64::consts::PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64);
        let z = Complex64::new(h, 0.0) + r;
        let ez = z.exp();
        let z3 = z * z * z;
        q += (((z * 0.5).exp() - 1.0) / z).re;
        f1 += ((-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3).re;
        f2 += ((2.0 + z + ez * (z - 2.0)) / z3).re;
        f3 += ((-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3).re;
    }
    let m = CONTOUR_POINTS as f64;
    EtdWeights {
        e: h.exp(),
        e2: (0.5 * h).exp(),
        q: dt * q / m,
        f1: dt * f1 / m,
        f2: dt * f2 / m,
        f3: dt * f3 / m,
    }
}
