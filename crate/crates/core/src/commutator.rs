//! The commutator `[(−Δ)^{1/2}, ∂_iφ]` and the two forms of the weak
//! nonlinearity it relates.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::ops::{c3_norm, derivative, fractional_laplacian, inner_hs, multiply, riesz_perp, sobolev_norm_sq};

/// `g ↦ (−Δ)^{1/2}(∂_iφ · g) − ∂_iφ · (−Δ)^{1/2}g`, projected to zero mean.
///
/// Needs `band(φ) + band(f) < N/2` so that both products are represented on
/// the grid without truncation.
pub fn commutator_apply(phi: &SpectralField, axis: usize, f: &SpectralField) -> Result<SpectralField> {
    phi.check_same_grid(f)?;
    if axis > 1 {
        return Err(Error::InvalidParameter(format!("axis must be 0 or 1, got {axis}")));
    }
    let n = phi.grid().n() as i64;
    let (bp, bf) = (phi.band_limit(), f.band_limit());
    if bp + bf >= n / 2 {
        return Err(Error::Padding(format!(
            "band limits {bp} + {bf} must stay below {} on a {n}-grid",
            n / 2
        )));
    }
    let d = derivative(phi, axis);
    let first = fractional_laplacian(&multiply(&d, f)?, 0.5)?;
    let second = multiply(&d, &fractional_laplacian(f, 0.5)?)?;
    Ok(&first - &second)
}

/// Both sides of the commutator form of the SQG nonlinearity:
/// `LHS = ∫ θ u·∇φ` by lattice quadrature and
/// `RHS = −½ Σ_i ⟨u_i, [(−Δ)^{1/2}, ∂_iφ](−Δ)^{−1/2}θ⟩`, with `u = R^⊥θ`.
///
/// Both are evaluated on a lattice twice as fine, where they are exact for
/// `band(θ) + band(φ) < N`.
pub fn weak_nonlinearity_both_sides(theta: &SpectralField, phi: &SpectralField) -> Result<(f64, f64)> {
    theta.check_same_grid(phi)?;
    let n = theta.grid().n() as i64;
    let (bt, bp) = (theta.band_limit(), phi.band_limit());
    if bt + bp >= n {
        return Err(Error::Padding(format!("band limits {bt} + {bp} must stay below {n}")));
    }
    let fine = Grid::new(2 * theta.grid().n())?;
    let theta = theta.resample(fine);
    let phi = phi.resample(fine);
    let (u1, u2) = riesz_perp(&theta);

    let t = theta.to_physical();
    let (u1p, u2p) = (u1.to_physical(), u2.to_physical());
    let (g1, g2) = (derivative(&phi, 0).to_physical(), derivative(&phi, 1).to_physical());
    let lhs = (0..t.len())
        .map(|j| t[j] * (u1p[j] * g1[j] + u2p[j] * g2[j]))
        .sum::<f64>()
        / t.len() as f64;

    let inv = fractional_laplacian(&theta, -0.5)?;
    let c1 = commutator_apply(&phi, 0, &inv)?;
    let c2 = commutator_apply(&phi, 1, &inv)?;
    let rhs = -0.5 * (inner_hs(&u1, &c1, 0.0)? + inner_hs(&u2, &c2, 0.0)?);
    Ok((lhs, rhs))
}

/// `|RHS| / (‖φ‖_{C³} ‖θ‖²_{Ḣ^{−1/2}})` for the pairing above.
pub fn continuity_ratio(theta: &SpectralField, phi: &SpectralField) -> Result<f64> {
    let (_, rhs) = weak_nonlinearity_both_sides(theta, phi)?;
    let denom = c3_norm(phi) * sobolev_norm_sq(theta, -0.5);
    if denom == 0.0 {
        return Err(Error::InvalidParameter("continuity ratio of a zero field".into()));
    }
    Ok(rhs.abs() / denom)
}
