//! Model domains, the defining function `ρ = Re z₁ + φ(|z'|²)`, cone curves
//! and the normal/tangential geometry near the flat boundary point `0`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::CVec;
use crate::numeric::logspace::log_sum_exp;
use crate::numeric::roots::{bisect, golden_section};
use crate::profile::Profile;
use crate::C64;

#[derive(Debug, Clone)]
pub enum DomainKind {
    UnitDisc,
    UnitBall { n: usize },
    ProductDiscBall { n: usize },
    HartogsFlat { profile: Profile, n: usize, r1: f64, r2: f64 },
}

#[derive(Debug, Clone)]
pub struct ModelDomain {
    pub kind: DomainKind,
}

impl ModelDomain {
    pub fn unit_disc() -> Self {
        ModelDomain { kind: DomainKind::UnitDisc }
    }

    pub fn unit_ball(n: usize) -> Self {
        ModelDomain { kind: DomainKind::UnitBall { n } }
    }

    pub fn product_disc_ball(n: usize) -> Self {
        ModelDomain { kind: DomainKind::ProductDiscBall { n } }
    }

    pub fn hartogs_flat(profile: Profile, n: usize, r1: f64, r2: f64) -> Result<Self> {
        if n == 0 || !(r1 > 0.0 && r2 > 0.0) {
            return Err(LabError::Config(format!(
                "Hartogs model needs n ≥ 1 and positive radii (n={n}, r1={r1}, r2={r2})"
            )));
        }
        Ok(ModelDomain { kind: DomainKind::HartogsFlat { profile, n, r1, r2 } })
    }

    /// Ambient complex dimension `ν`.
    pub fn ambient_dim(&self) -> usize {
        match &self.kind {
            DomainKind::UnitDisc => 1,
            DomainKind::UnitBall { n } => *n,
            DomainKind::ProductDiscBall { n } | DomainKind::HartogsFlat { n, .. } => n + 1,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            DomainKind::UnitDisc => "unit-disc",
            DomainKind::UnitBall { .. } => "unit-ball",
            DomainKind::ProductDiscBall { .. } => "product-disc-ball",
            DomainKind::HartogsFlat { .. } => "hartogs-flat",
        }
    }

    fn flat(&self) -> Result<(&Profile, usize, f64, f64)> {
        match &self.kind {
            DomainKind::HartogsFlat { profile, n, r1, r2 } => Ok((profile, *n, *r1, *r2)),
            _ => Err(LabError::Kind(self.kind_name().into())),
        }
    }

    pub fn profile(&self) -> Result<&Profile> {
        Ok(self.flat()?.0)
    }

    /// Truncation radii `(R₁, R₂)`.
    pub fn radii(&self) -> Result<(f64, f64)> {
        let (_, _, r1, r2) = self.flat()?;
        Ok((r1, r2))
    }

    fn check_dim(&self, z: &[C64]) -> Result<()> {
        let nu = self.ambient_dim();
        if z.len() != nu {
            return Err(LabError::Dimension { expected: nu, actual: z.len() });
        }
        Ok(())
    }

    pub fn contains(&self, z: &[C64]) -> Result<bool> {
        self.check_dim(z)?;
        let sq = |s: &[C64]| s.iter().map(|c| c.norm_sqr()).sum::<f64>();
        Ok(match &self.kind {
            DomainKind::UnitDisc | DomainKind::UnitBall { .. } => sq(z) < 1.0,
            DomainKind::ProductDiscBall { .. } => z[0].norm_sqr() < 1.0 && sq(&z[1..]) < 1.0,
            DomainKind::HartogsFlat { r1, r2, .. } => {
                self.rho(z)? < 0.0 && z[0].norm() < *r1 && sq(&z[1..]).sqrt() < *r2
            }
        })
    }

    /// `ρ(z) = Re z₁ + φ(|z'|²)`.
    pub fn rho(&self, z: &[C64]) -> Result<f64> {
        let (profile, ..) = self.flat()?;
        self.check_dim(z)?;
        let r2: f64 = z[1..].iter().map(|c| c.norm_sqr()).sum();
        Ok(z[0].re + profile.eval(r2))
    }

    /// Gradient `(1, 2sφ'(s²), 0, …)` at a boundary point `(-φ(s²), s, 0, …)`
    /// together with its Euclidean norm `A`.
    pub fn grad_rho(&self, z: &[C64]) -> Result<(Vec<f64>, f64)> {
        let (profile, ..) = self.flat()?;
        self.check_dim(z)?;
        let s = z[1].re;
        let tol = 1e-14 * (1.0 + s.abs());
        if z[1].im.abs() > tol || s < 0.0 || z[2..].iter().any(|c| c.norm() > tol) {
            return Err(LabError::Symmetry(format!("z' = {:?}", &z[1..])));
        }
        let mut g = vec![0.0; z.len()];
        g[0] = 1.0;
        g[1] = 2.0 * s * profile.derivative(s * s, 1)?;
        let a = (1.0 + g[1] * g[1]).sqrt();
        Ok((g, a))
    }

    /// Nearest boundary point to `(x, r, 0, …)` within the symmetric slice.
    pub fn nearest_boundary_point(&self, x: f64, r: f64) -> Result<BoundaryFoot> {
        let (profile, ..) = self.flat()?;
        if !(x < 0.0 && r >= 0.0) {
            return Err(LabError::Domain(format!("need x < 0 and r ≥ 0 (x={x}, r={r})")));
        }
        if x + profile.eval(r * r) >= 0.0 {
            return Err(LabError::Domain(format!("({x:e}, {r:e}) is not inside the model")));
        }
        // half-gradient of F(s) = (x + φ(s²))² + (r - s)²; F' ≤ 0 at s = r
        let stationarity = |s: f64| {
            let phi = profile.eval(s * s);
            let dphi = profile.derivative(s * s, 1).unwrap_or(0.0);
            (x + phi) * 2.0 * s * dphi - (r - s)
        };
        let objective = |s: f64| (x + profile.eval(s * s)).powi(2) + (r - s).powi(2);
        let s_hi = profile.inverse_ln((-x).ln()).map(f64::sqrt).unwrap_or(r + x.abs()).min(r + x.abs()).max(r);
        let s = match bisect(stationarity, r, s_hi) {
            Ok(s) => s,
            Err(_) => {
                let s = golden_section(objective, r, s_hi, 1e-15);
                if stationarity(s).abs() > 1e-10 * (1.0 + x.abs()) && s_hi > r {
                    return Err(LabError::Convergence(format!(
                        "no stationary point of the distance on [{r:e}, {s_hi:e}]"
                    )));
                }
                s
            }
        };
        let phi = profile.eval(s * s);
        let d1 = profile.derivative(s * s, 1)?;
        let d2 = profile.derivative(s * s, 2)?;
        let curvature = (2.0 * s * d1).powi(2) + (x + phi) * (2.0 * d1 + 4.0 * s * s * d2) + 1.0;
        if !(curvature > 0.0) {
            return Err(LabError::Convergence(format!(
                "distance objective not convex at s = {s:e} (F''/2 = {curvature:e})"
            )));
        }
        let dist = ((x + phi).powi(2) + (r - s).powi(2)).sqrt();
        Ok(BoundaryFoot { s, p1: -phi, dist })
    }

    /// `d*`: smallest `s > 0` with `(-d, s, 0, …)` on the boundary of the
    /// normalized domain, from `ln φ(w(s)²) = ln(d/A + c s/A + φ(p₂²))` with
    /// `w(s) = s/A + p₂ - c d/A`.
    pub fn tangential_radius(&self, p2: f64, a: f64, ln_d: f64) -> Result<f64> {
        let (profile, _, _, r2) = self.flat()?;
        let ln_c = if p2 > 0.0 { 2f64.ln() + p2.ln() + profile.ln_derivative1(p2 * p2) } else { f64::NEG_INFINITY };
        let ln_a = a.ln();
        let ln_phi_p2 = profile.ln_eval(p2 * p2);
        let c = ln_c.exp();
        let d = ln_d.exp();
        let f = |s: f64| {
            let w = s / a + p2 - c * d / a;
            let rhs = log_sum_exp(&[ln_d - ln_a, ln_c + s.ln() - ln_a, ln_phi_p2]);
            profile.ln_eval(w * w) - rhs
        };
        if f(r2) <= 0.0 {
            return Err(LabError::RootBracket(format!("d = exp({ln_d}) reaches past the truncation radius {r2}")));
        }
        bisect(f, 0.0, r2)
    }
}

/// Foot point `p = (p1, s, 0, …)` on the model boundary and distance to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFoot {
    pub s: f64,
    pub p1: f64,
    pub dist: f64,
}

/// How the point moves as `t → 0⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// `q(t) = (-t + iβt, (t/(2α))^{1/N} u')`, inside the cone with margin.
    Default,
    /// `q(t) = (-t, 0)`.
    Normal,
}

/// Curve approaching `0` inside the cone `Re z₁ < -α|z'|^N`.
#[derive(Debug, Clone)]
pub struct ConeCurve {
    pub alpha: f64,
    pub big_n: f64,
    pub direction: Vec<C64>,
    pub schedule: Schedule,
    /// Slope of `Im q₁` in `t`.
    pub beta: f64,
}

impl ConeCurve {
    pub fn new(alpha: f64, big_n: f64, direction: Vec<C64>, schedule: Schedule) -> Result<Self> {
        if !(alpha > 0.0 && big_n > 0.0) {
            return Err(LabError::Config(format!("cone needs alpha, N > 0 (got {alpha}, {big_n})")));
        }
        let norm: f64 = direction.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if direction.is_empty() || (norm - 1.0).abs() > 1e-12 {
            return Err(LabError::Normalization(norm));
        }
        Ok(ConeCurve { alpha, big_n, direction, schedule, beta: 0.0 })
    }

    pub fn normal(n: usize) -> Self {
        let mut direction = vec![C64::new(0.0, 0.0); n];
        direction[0] = C64::new(1.0, 0.0);
        ConeCurve { alpha: 1.0, big_n: 1.0, direction, schedule: Schedule::Normal, beta: 0.0 }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn point(&self, t: f64) -> Vec<C64> {
        let mut q = vec![C64::new(-t, self.beta * t)];
        let r = match self.schedule {
            Schedule::Normal => 0.0,
            Schedule::Default => (t / (2.0 * self.alpha)).powf(1.0 / self.big_n),
        };
        q.extend(self.direction.iter().map(|u| u * r));
        q
    }

    pub fn in_cone(&self, q: &[C64]) -> bool {
        let r: f64 = q[1..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        q[0].re < -self.alpha * r.powf(self.big_n)
    }
}

#[derive(Debug, Clone)]
pub struct TangentDecomposition {
    pub xi: CVec,
    pub xi_normal: CVec,
    pub xi_tangent: CVec,
    pub norm_normal: f64,
    pub norm_tangent: f64,
}

/// Splits `xi` along a unit normal under the Hermitian inner product.
pub fn decompose_vector(xi: &[C64], unit_normal: &[C64]) -> Result<TangentDecomposition> {
    if xi.len() != unit_normal.len() {
        return Err(LabError::Dimension { expected: unit_normal.len(), actual: xi.len() });
    }
    let n = CVec::from_column_slice(unit_normal);
    let nn = n.norm();
    if (nn - 1.0).abs() > 1e-12 {
        return Err(LabError::Normalization(nn));
    }
    let x = CVec::from_column_slice(xi);
    let proj = n.dotc(&x);
    let xi_normal = &n * proj;
    let xi_tangent = &x - &xi_normal;
    Ok(TangentDecomposition {
        norm_normal: xi_normal.norm(),
        norm_tangent: xi_tangent.norm(),
        xi: x,
        xi_normal,
        xi_tangent,
    })
}
