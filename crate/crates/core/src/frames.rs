//! Per-`t` normalization at the flat boundary point.
//!
//! For a curve point `q(t)` the frame removes `Im q₁` (`T¹`), rotates `q'`
//! onto the positive `z₂` axis (`R¹`), then moves the nearest boundary point
//! `p(t)` to the origin and its normal to `e₁` (`γ = R²(· − p)`). The point
//! lands at `(−d, 0, …)`. The anisotropic dilation `Σ` and the Cayley map `f`
//! then send the localized domain close to `𝔻 × Bₙ(0,1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{decompose_vector, BoundaryFoot, ConeCurve, ModelDomain, TangentDecomposition};
use crate::linalg::{CMat, CVec};
use crate::numeric::halton::Halton;
use crate::numeric::logspace::log_sum_exp;
use crate::C64;

/// Default `δ₀`; the neighbourhood `W` has half-width `δ₀/10`.
pub const DEFAULT_DELTA0: f64 = 10.0;

/// `z ↦ M z + b`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    pub m: CMat,
    pub b: CVec,
}

impl AffineMap {
    pub fn apply(&self, z: &[C64]) -> Vec<C64> {
        let v = &self.m * CVec::from_column_slice(z) + &self.b;
        v.iter().copied().collect()
    }

    /// Inverse of an affine map with unitary linear part.
    pub fn unitary_inverse(&self) -> AffineMap {
        let mi = self.m.adjoint();
        let b = -(&mi * &self.b);
        AffineMap { m: mi, b }
    }
}

/// Unitary `U` on `ℂⁿ` with `U u = e₁` for a unit vector `u`.
pub fn householder_to_e1(u: &[C64]) -> CMat {
    let n = u.len();
    let uv = CVec::from_column_slice(u);
    let phase = if u[0].norm() > 0.0 { u[0] / u[0].norm() } else { C64::new(1.0, 0.0) };
    let mut v = uv.clone();
    v[0] -= phase;
    let vv = v.norm_squared();
    let h = if vv < 1e-30 {
        CMat::identity(n, n)
    } else {
        CMat::identity(n, n) - (&v * v.adjoint()) * C64::new(2.0 / vv, 0.0)
    };
    let mut d = CMat::identity(n, n);
    d[(0, 0)] = phase.conj();
    d * h
}

#[derive(Debug, Clone)]
pub struct NormalizationFrame {
    pub t: f64,
    pub q: Vec<C64>,
    /// `(Re q₁, |q'|)`.
    pub qtilde: (f64, f64),
    pub foot: BoundaryFoot,
    /// `‖∇ρ(p)‖`.
    pub a: f64,
    /// `2 p₂ φ'(p₂²)`.
    pub c: f64,
    pub d: f64,
    pub ln_d: f64,
    pub dstar: f64,
    /// Half-width of `W`.
    pub w_radius: f64,
    /// `R¹` on `ℂ^ν`.
    pub r1: CMat,
    /// `R²` on `ℂ^ν`.
    pub r2: CMat,
    /// `γ ∘ R¹ ∘ T¹`.
    pub forward: AffineMap,
    pub inverse: AffineMap,
    domain: ModelDomain,
}

/// Builds the frame at parameter `t` with `W = (−δ₀/10, δ₀/10)² × Bₙ(0, δ₀/10)`.
pub fn build_frame(domain: &ModelDomain, curve: &ConeCurve, t: f64, delta0: f64) -> Result<NormalizationFrame> {
    let nu = domain.ambient_dim();
    let profile = domain.profile()?;
    if curve.direction.len() + 1 != nu {
        return Err(LabError::Dimension { expected: nu - 1, actual: curve.direction.len() });
    }
    if !(delta0 > 0.0) {
        return Err(LabError::Config(format!("delta0 = {delta0} must be positive")));
    }
    let q = curve.point(t);
    if !domain.contains(&q)? {
        return Err(LabError::Domain(format!("q({t:e}) lies outside the domain")));
    }
    let r: f64 = q[1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut r1 = CMat::identity(nu, nu);
    if r > 0.0 {
        let u: Vec<C64> = q[1..].iter().map(|z| z / r).collect();
        let h = householder_to_e1(&u);
        r1.view_mut((1, 1), (nu - 1, nu - 1)).copy_from(&h);
    }
    let x = q[0].re;
    let foot = domain.nearest_boundary_point(x, r)?;
    let s = foot.s;
    let c = 2.0 * s * profile.derivative(s * s, 1)?;
    let a = (1.0 + c * c).sqrt();
    let mut r2 = CMat::identity(nu, nu);
    r2[(0, 0)] = C64::new(1.0 / a, 0.0);
    r2[(0, 1)] = C64::new(c / a, 0.0);
    r2[(1, 0)] = C64::new(-c / a, 0.0);
    r2[(1, 1)] = C64::new(1.0 / a, 0.0);

    let mut shift = CVec::zeros(nu);
    shift[0] = C64::new(0.0, -q[0].im);
    let mut p = CVec::zeros(nu);
    p[0] = C64::new(foot.p1, 0.0);
    p[1] = C64::new(s, 0.0);
    let m = &r2 * &r1;
    let b = &m * &shift - &r2 * &p;
    let forward = AffineMap { m, b };
    let inverse = forward.unitary_inverse();

    let d = foot.dist;
    let ln_d = d.ln();
    let dstar = domain.tangential_radius(s, a, ln_d)?;
    Ok(NormalizationFrame {
        t,
        q,
        qtilde: (x, r),
        foot,
        a,
        c,
        d,
        ln_d,
        dstar,
        w_radius: delta0 / 10.0,
        r1,
        r2,
        forward,
        inverse,
        domain: domain.clone(),
    })
}

impl NormalizationFrame {
    pub fn nu(&self) -> usize {
        self.q.len()
    }

    pub fn domain(&self) -> &ModelDomain {
        &self.domain
    }

    /// `γ(z) = R²(z − p)` on the `R¹T¹` coordinates.
    pub fn gamma(&self, z: &[C64]) -> Vec<C64> {
        let mut v = CVec::from_column_slice(z);
        v[0] -= C64::new(self.foot.p1, 0.0);
        v[1] -= C64::new(self.foot.s, 0.0);
        (&self.r2 * v).iter().copied().collect()
    }

    /// `γ⁻¹(z) = R²ᵀ z + p`.
    pub fn gamma_inv(&self, z: &[C64]) -> Vec<C64> {
        let mut v = self.r2.transpose() * CVec::from_column_slice(z);
        v[0] += C64::new(self.foot.p1, 0.0);
        v[1] += C64::new(self.foot.s, 0.0);
        v.iter().copied().collect()
    }

    /// Model defining function pulled back to normalized coordinates.
    pub fn rho_normalized(&self, z: &[C64]) -> f64 {
        // R² is a real rotation of the first two coordinates
        let (a, c) = (self.r2[(0, 0)].re, self.r2[(0, 1)].re);
        let w0 = z[0] * a - z[1] * c + self.foot.p1;
        let w1 = z[0] * c + z[1] * a + self.foot.s;
        let profile = self.domain.profile().expect("frame domain is Hartogs");
        let r2 = w1.norm_sqr() + z[2..].iter().map(|c| c.norm_sqr()).sum::<f64>();
        w0.re + profile.eval(r2)
    }

    pub fn in_w(&self, z: &[C64]) -> bool {
        let w = self.w_radius;
        let r: f64 = z[1..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        z[0].re.abs() < w && z[0].im.abs() < w && r < w
    }

    /// `f ∘ Σ`.
    pub fn cayley_sigma(&self, z: &[C64]) -> Result<Vec<C64>> {
        let u = z[0] / self.d;
        let den = C64::new(1.0, 0.0) - u;
        if den.norm() < 1e-300 {
            return Err(LabError::Pole);
        }
        let mut out = vec![(C64::new(1.0, 0.0) + u) / den];
        out.extend(z[1..].iter().map(|c| c / self.dstar));
        Ok(out)
    }

    /// `Σ⁻¹ ∘ f⁻¹`.
    pub fn cayley_sigma_inv(&self, w: &[C64]) -> Result<Vec<C64>> {
        let den = w[0] + 1.0;
        if den.norm() < 1e-300 {
            return Err(LabError::Pole);
        }
        let mut out = vec![(w[0] - 1.0) / den * self.d];
        out.extend(w[1..].iter().map(|c| c * self.dstar));
        Ok(out)
    }

    /// Splits `ξ` along the unit normal at `p(t)` pulled back to the
    /// original coordinates.
    pub fn decompose(&self, xi: &[C64]) -> Result<TangentDecomposition> {
        let normal: Vec<C64> = (0..self.nu()).map(|j| self.forward.m[(0, j)].conj()).collect();
        decompose_vector(xi, &normal)
    }

    pub fn scaled_region(&self, epsilon: f64) -> Result<ScaledRegion> {
        ScaledRegion::new(self, epsilon)
    }
}

/// `D_tᵋ` and its radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaledRegion {
    pub epsilon: f64,
    pub c0: f64,
    /// `ln d^{1/(1+ε)²}`.
    pub ln_depth: f64,
    pub d1eps: f64,
    pub d2eps: f64,
    pub cap1: bool,
    pub cap2: bool,
}

impl ScaledRegion {
    fn new(frame: &NormalizationFrame, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(LabError::Domain(format!("epsilon = {epsilon} must be positive")));
        }
        let a_exp = 1.0 / (1.0 + epsilon);
        let (d1eps, cap1) = sup_radius(frame, a_exp * frame.ln_d)?;
        let (d2eps, cap2) = sup_radius(frame, a_exp * a_exp * frame.ln_d)?;
        Ok(ScaledRegion { epsilon, c0: c0(epsilon), ln_depth: a_exp * a_exp * frame.ln_d, d1eps, d2eps, cap1, cap2 })
    }

    pub fn contains(&self, frame: &NormalizationFrame, z: &[C64]) -> bool {
        frame.in_w(z) && z[0].re > -self.ln_depth.exp() && frame.rho_normalized(z) < 0.0
    }
}

/// `cos(π / (2(1+ε)))`.
pub fn c0(epsilon: f64) -> f64 {
    (std::f64::consts::PI / (2.0 * (1.0 + epsilon))).cos()
}

/// Upper bound for `sup{|z'| : z ∈ W, φ(|z₂/A + p₂ + c z₁/A|² + …) ≤ e^{ln_level}/A + φ(p₂²) + c Re z₂/A}`.
///
/// The right-hand side is maximized at `Re z₂ = W`, giving a level `X²` for
/// the argument of `φ`; then `|z'| ≤ A(X + p₂) + c |z₁|`. Exact when `c = 0`.
fn sup_radius(frame: &NormalizationFrame, ln_level: f64) -> Result<(f64, bool)> {
    let profile = frame.domain.profile()?;
    let w = frame.w_radius;
    let p2 = frame.foot.s;
    let ln_a = frame.a.ln();
    let ln_c = if frame.c > 0.0 { frame.c.ln() } else { f64::NEG_INFINITY };
    let ln_rhs = log_sum_exp(&[ln_level - ln_a, profile.ln_eval(p2 * p2), ln_c + w.ln() - ln_a]);
    if ln_rhs >= 0.0 {
        return Ok((w, true));
    }
    let x = profile.inverse_ln(ln_rhs)?.sqrt();
    let r = frame.a * (x + p2) + frame.c * w * std::f64::consts::SQRT_2;
    if r >= w {
        Ok((w, true))
    } else {
        Ok((r, false))
    }
}

/// `h_ε(z₁) = exp(−(−z₁)^{1/(1+ε)})` on the left half-plane.
pub fn peak_function(epsilon: f64, z1: C64) -> Result<C64> {
    if !(z1.re < 0.0) {
        return Err(LabError::Branch(z1.re));
    }
    Ok((-(-z1).powf(1.0 / (1.0 + epsilon))).exp())
}

/// `1 − h_ε(z₁)` without cancellation for small `|z₁|`.
pub fn peak_defect(epsilon: f64, z1: C64) -> Result<C64> {
    if !(z1.re < 0.0) {
        return Err(LabError::Branch(z1.re));
    }
    let w = -(-z1).powf(1.0 / (1.0 + epsilon));
    // 1 − e^w = −(w + w²/2 + w³/6 + …)
    if w.norm() < 1e-4 {
        Ok(-(w + w * w / 2.0 + w * w * w / 6.0))
    } else {
        Ok(C64::new(1.0, 0.0) - w.exp())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionReport {
    pub t: f64,
    pub ln_d: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub frac_inner: f64,
    pub frac_outer: f64,
    pub inner_samples: usize,
    pub outer_samples: usize,
    pub counterexamples: Vec<Vec<[f64; 2]>>,
    pub cap_flags: Vec<String>,
    pub notes: Vec<String>,
}

impl InclusionReport {
    pub fn certified(&self) -> bool {
        self.frac_inner == 1.0 && self.frac_outer == 1.0 && self.inner_samples > 0 && self.outer_samples > 0
    }
}

const MAX_COUNTEREXAMPLES: usize = 10;

fn to_pairs(z: &[C64]) -> Vec<[f64; 2]> {
    z.iter().map(|c| [c.re, c.im]).collect()
}

/// Maps a cube point in `[0,1)^{2k}` to `k` complex numbers in `[−1,1)²`.
fn cube_to_complex(u: &[f64]) -> Vec<C64> {
    u.chunks(2).map(|p| C64::new(2.0 * p[0] - 1.0, 2.0 * p[1] - 1.0)).collect()
}

/// Falsification test of `(1−δ)(𝔻 × Bₙ) ⊂ f∘Σ(D_tᵋ) ⊂ 𝔻 × Bₙ(0, d₂ᵋ/d*)`
/// on Halton samples.
pub fn certify_inclusions(
    frame: &NormalizationFrame,
    epsilon: f64,
    delta: f64,
    samples: usize,
) -> Result<InclusionReport> {
    let mut v = certify_inclusions_multi(frame, epsilon, &[delta], samples)?;
    Ok(v.remove(0))
}

/// [`certify_inclusions`] for several `δ`; the outer test does not depend on
/// `δ` and is run once.
pub fn certify_inclusions_multi(
    frame: &NormalizationFrame,
    epsilon: f64,
    deltas: &[f64],
    samples: usize,
) -> Result<Vec<InclusionReport>> {
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        return Err(LabError::Domain(format!("delta = {d} must lie in (0, 1)")));
    }
    let region = frame.scaled_region(epsilon)?;
    let nu = frame.nu();

    // outer inclusion: sample D_tᵋ itself inside a box that contains it
    let wr = frame.w_radius;
    let depth = region.ln_depth.exp();
    let profile = frame.domain.profile()?;
    let top = (frame.c * wr + frame.a * profile.eval(frame.foot.s.powi(2))).min(wr);
    let lo = -depth;
    let hi = top.max(0.0) + depth * 1e-12;
    let mut halton = Halton::new(2 * nu, 7);
    let mut members: Vec<Vec<C64>> = Vec::with_capacity(samples);
    let max_draws = 400 * samples.max(1);
    let mut draws = 0usize;
    let batch = 1 << 14;
    while members.len() < samples && draws < max_draws {
        let pts: Vec<Vec<f64>> = (0..batch).map(|_| halton.next_point()).collect();
        draws += batch;
        let accepted: Vec<Vec<C64>> = pts
            .par_iter()
            .filter_map(|u| {
                let mut z = vec![C64::new(lo + (hi - lo) * u[0], wr * (2.0 * u[1] - 1.0))];
                z.extend(cube_to_complex(&u[2..]).into_iter().map(|c| c * wr));
                region.contains(frame, &z).then_some(z)
            })
            .collect();
        members.extend(accepted);
    }
    members.truncate(samples);
    let bound = region.d2eps / frame.dstar;
    // |f(z₁/d)| < 1 exactly when Re z₁ < 0; the image itself rounds to the
    // unit circle once |z₁| ≫ d.
    let outer_fail: Vec<Vec<C64>> = members
        .par_iter()
        .filter_map(|z| {
            let rest: f64 = z[1..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() / frame.dstar;
            let ok = z[0].re < 0.0 && rest < bound;
            (!ok).then(|| z.clone())
        })
        .collect();

    let frac = |fail: usize, total: usize| if total == 0 { 0.0 } else { 1.0 - fail as f64 / total as f64 };
    let mut cap_flags = Vec::new();
    if region.cap1 {
        cap_flags.push("d1eps capped by W".to_string());
    }
    if region.cap2 {
        cap_flags.push("d2eps capped by W".to_string());
    }

    let mut reports = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        // inner inclusion: sample the target set and pull back
        let mut halton = Halton::new(2 * nu, 0);
        let mut inner_pts = Vec::with_capacity(samples);
        while inner_pts.len() < samples {
            let w = cube_to_complex(&halton.next_point());
            let rest: f64 = w[1..].iter().map(|c| c.norm_sqr()).sum();
            if w[0].norm_sqr() < 1.0 && rest < 1.0 {
                inner_pts.push(w.iter().map(|c| c * (1.0 - delta)).collect::<Vec<C64>>());
            }
        }
        let inner_fail: Vec<Vec<C64>> = inner_pts
            .par_iter()
            .filter_map(|w| match frame.cayley_sigma_inv(w) {
                Ok(z) if region.contains(frame, &z) => None,
                _ => Some(w.clone()),
            })
            .collect();
        let mut counterexamples: Vec<Vec<[f64; 2]>> =
            inner_fail.iter().take(MAX_COUNTEREXAMPLES).map(|w| to_pairs(w)).collect();
        counterexamples.extend(outer_fail.iter().take(MAX_COUNTEREXAMPLES).map(|z| to_pairs(z)));
        let mut notes = Vec::new();
        if members.len() < samples {
            notes.push(format!("only {} of {} outer samples found", members.len(), samples));
        }
        let mut report = InclusionReport {
            t: frame.t,
            ln_d: frame.ln_d,
            epsilon,
            delta,
            frac_inner: frac(inner_fail.len(), inner_pts.len()),
            frac_outer: frac(outer_fail.len(), members.len()),
            inner_samples: inner_pts.len(),
            outer_samples: members.len(),
            counterexamples,
            cap_flags: cap_flags.clone(),
            notes,
        };
        if !report.certified() {
            report.notes.push("outside asymptotic regime".to_string());
        }
        reports.push(report);
    }
    Ok(reports)
}
