//! Kobayashi metric on the model product and the squeeze bracket at a flat point.
//!
//! The metric on the Hartogs model is never optimized over discs. The
//! bracket combines the certified inclusions of the scaled region with the
//! product formula on `𝔻 × Bₙ` and a localization factor from the
//! Carathéodory distance bound.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::frames::{c0, InclusionReport, NormalizationFrame};
use crate::linalg::CVec;
use crate::numeric::logspace::ln_one_minus_exp_neg;
use crate::C64;

/// `M^K` at the center of `ρ₁𝔻 × Bₙ(0, ρ₂)`: `max{|ξ₁|/ρ₁, |ξ'|/ρ₂}`.
pub fn kobayashi_product_scaled(rho1: f64, rho2: f64, xi: &[C64]) -> f64 {
    let rest: f64 = xi[1..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    (xi[0].norm() / rho1).max(rest / rho2)
}

/// `M^K_{𝔻×Bₙ}(0; ξ) = max{|ξ₁|, |ξ'|}`.
pub fn kobayashi_product(xi: &[C64]) -> f64 {
    kobayashi_product_scaled(1.0, 1.0, xi)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LocalizationFactor {
    /// `coth` of the distance bound; at least 1.
    pub factor: f64,
    /// Lower bound `½ ln{(1 − e^{−c₀ d^{a²}}) / d^a}` on the Carathéodory distance, `a = 1/(1+ε)`.
    pub distance_lower: f64,
}

/// Upper bound for the ratio of the Kobayashi metrics of `D_tᵋ` and `D_t ∩ W` at `(−d, 0)`.
pub fn localization_factor(ln_d: f64, epsilon: f64) -> Result<LocalizationFactor> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(ln_d < 0.0) {
        return Err(LabError::Domain(format!("need 0 < ε < 1 and d < 1, got ε = {epsilon}, ln d = {ln_d}")));
    }
    let a = 1.0 / (1.0 + epsilon);
    let ln_num = ln_one_minus_exp_neg(c0(epsilon).ln() + a * a * ln_d);
    let two_dist = ln_num - a * ln_d;
    if !(two_dist > 0.0) {
        return Err(LabError::Regime(format!(
            "1 − exp(−c₀ d^(1/(1+ε)²)) ≤ d^(1/(1+ε)) at ln d = {ln_d}, ε = {epsilon}"
        )));
    }
    let dist = 0.5 * two_dist;
    Ok(LocalizationFactor { factor: 1.0 / dist.tanh(), distance_lower: dist })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KobayashiBracket {
    pub lower: f64,
    pub upper: f64,
    /// `max{|ξ_N|/2d, |ξ_T|/d*}`.
    pub center: f64,
    pub lower_ratio: f64,
    pub upper_ratio: f64,
    /// `(1−δ)⁻¹`.
    pub delta_margin: f64,
    /// `d*/d₂ᵋ`.
    pub radius_ratio: f64,
    pub loc: f64,
}

impl KobayashiBracket {
    pub fn contains_one(&self) -> bool {
        self.lower_ratio <= 1.0 && 1.0 <= self.upper_ratio
    }

    pub fn width(&self) -> f64 {
        self.upper_ratio - self.lower_ratio
    }
}

/// Normal and tangential parts of `R² R¹ ξ` scaled by `(2d)⁻¹` and `d*⁻¹`.
pub fn center_formula(frame: &NormalizationFrame, xi: &[C64]) -> Result<f64> {
    if xi.len() != frame.nu() {
        return Err(LabError::Dimension { expected: frame.nu(), actual: xi.len() });
    }
    let eta = &frame.forward.m * CVec::from_column_slice(xi);
    let rest: f64 = eta.iter().skip(1).map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    Ok((eta[0].norm() / (2.0 * frame.d)).max(rest / frame.dstar))
}

/// Bracket for `M^K_{D_t ∩ W}(−d, 0; R²R¹ξ)`.
///
/// The upper end comes from `(1−δ)(𝔻 × Bₙ) ⊂ f∘Σ(D_t ∩ W)`, the lower end from
/// `f∘Σ(D_tᵋ) ⊂ 𝔻 × Bₙ(0, d₂ᵋ/d*)` divided by the localization factor.
pub fn squeeze_bracket(
    frame: &NormalizationFrame,
    epsilon: f64,
    delta: f64,
    xi: &[C64],
    certification: &InclusionReport,
) -> Result<KobayashiBracket> {
    if !certification.certified() {
        return Err(LabError::Certification(format!(
            "inclusions not certified at ln d = {}, ε = {epsilon}, δ = {delta}",
            frame.ln_d
        )));
    }
    if certification.epsilon != epsilon || certification.delta != delta {
        return Err(LabError::Certification("certificate was issued for other (ε, δ)".into()));
    }
    let center = center_formula(frame, xi)?;
    if !(center > 0.0) {
        return Err(LabError::Domain("bracket needs a nonzero vector".into()));
    }
    let region = frame.scaled_region(epsilon)?;
    let loc = localization_factor(frame.ln_d, epsilon)?.factor;
    let radius_ratio = frame.dstar / region.d2eps;
    let delta_margin = 1.0 / (1.0 - delta);
    let lower_ratio = radius_ratio / loc;
    let upper_ratio = delta_margin;
    Ok(KobayashiBracket {
        lower: lower_ratio * center,
        upper: upper_ratio * center,
        center,
        lower_ratio,
        upper_ratio,
        delta_margin,
        radius_ratio,
        loc,
    })
}
