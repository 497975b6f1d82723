//! Fiber weights of the rotational mode decomposition.

use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::profile::Profile;

/// Largest fiber radius over `Re z₁ = x`: `min(R₂, √φ⁻¹(−x))`.
pub fn fiber_radius(profile: &Profile, r2: f64, x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(LabError::Domain(format!("fiber radius needs Re z₁ < 0, got {x}")));
    }
    let ln_top = profile.ln_eval(r2 * r2);
    let ln_mx = (-x).ln();
    if ln_mx >= ln_top {
        return Ok(r2);
    }
    Ok(profile.inverse_ln(ln_mx)?.sqrt().min(r2))
}

/// `w_k(x) = π r_max(x)^{2(k+1)}/(k+1)`: the area integral of `|z₂|^{2k}` over the fiber.
pub fn mode_weight(profile: &Profile, r2: f64, k: usize, x: f64) -> Result<f64> {
    let r = fiber_radius(profile, r2, x)?;
    Ok(PI * r.powi(2 * k as i32 + 2) / (k as f64 + 1.0))
}
