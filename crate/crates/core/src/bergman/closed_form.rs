//! Bergman kernels known in closed form, with hand-derived log-kernel jets.

use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::geometry::{DomainKind, ModelDomain};
use crate::linalg::CMat;
use crate::C64;

use super::{KernelModel, LogJets};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    /// `B_dim(0, radius)`; `dim = 1` is a disc.
    Ball { dim: usize, radius: f64 },
    /// `{Re z < 0}` in `ℂ`.
    LeftHalfPlane,
    /// Cartesian product, variables concatenated in order.
    Product(Vec<ClosedForm>),
}

impl ClosedForm {
    pub fn disc() -> Self {
        ClosedForm::Ball { dim: 1, radius: 1.0 }
    }

    pub fn ball(dim: usize) -> Self {
        ClosedForm::Ball { dim, radius: 1.0 }
    }

    pub fn product_disc_ball(n: usize) -> Self {
        ClosedForm::Product(vec![Self::disc(), Self::ball(n)])
    }

    pub fn from_domain(d: &ModelDomain) -> Result<Self> {
        match &d.kind {
            DomainKind::UnitDisc => Ok(Self::disc()),
            DomainKind::UnitBall { n } => Ok(Self::ball(*n)),
            DomainKind::ProductDiscBall { n } => Ok(Self::product_disc_ball(*n)),
            DomainKind::HartogsFlat { .. } => Err(LabError::Kind(d.kind_name().into())),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ClosedForm::Ball { dim, .. } => *dim,
            ClosedForm::LeftHalfPlane => 1,
            ClosedForm::Product(fs) => fs.iter().map(|f| f.dim()).sum(),
        }
    }

    pub fn contains(&self, z: &[C64]) -> bool {
        match self {
            ClosedForm::Ball { radius, .. } => z.iter().map(|c| c.norm_sqr()).sum::<f64>() < radius * radius,
            ClosedForm::LeftHalfPlane => z[0].re < 0.0,
            ClosedForm::Product(fs) => {
                let mut off = 0;
                fs.iter().all(|f| {
                    let n = f.dim();
                    let ok = f.contains(&z[off..off + n]);
                    off += n;
                    ok
                })
            }
        }
    }

    /// `K(z, w)`.
    pub fn kernel(&self, z: &[C64], w: &[C64]) -> Result<C64> {
        if z.len() != self.dim() || w.len() != self.dim() {
            return Err(LabError::Dimension { expected: self.dim(), actual: z.len() });
        }
        if !self.contains(z) || !self.contains(w) {
            return Err(LabError::Domain("kernel arguments must be interior".into()));
        }
        Ok(self.kernel_unchecked(z, w))
    }

    fn kernel_unchecked(&self, z: &[C64], w: &[C64]) -> C64 {
        match self {
            ClosedForm::Ball { dim, radius } => {
                let r2 = radius * radius;
                let inner: C64 = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
                let base = C64::new(1.0, 0.0) - inner / r2;
                let c = factorial(*dim) / (PI.powi(*dim as i32) * r2.powi(*dim as i32));
                base.powi(-(*dim as i32 + 1)) * c
            }
            ClosedForm::LeftHalfPlane => {
                let s = z[0] + w[0].conj();
                (s * s * PI).inv()
            }
            ClosedForm::Product(fs) => {
                let mut off = 0;
                let mut acc = C64::new(1.0, 0.0);
                for f in fs {
                    let n = f.dim();
                    acc *= f.kernel_unchecked(&z[off..off + n], &w[off..off + n]);
                    off += n;
                }
                acc
            }
        }
    }
}

/// Jets of `ψ = −a ln(1 − |w|²)` (plus a constant) at `w = z/ρ`, rescaled to `z`.
fn ball_jets(dim: usize, radius: f64, z: &[C64]) -> LogJets {
    let a = (dim + 1) as f64;
    let w: Vec<C64> = z.iter().map(|c| c / radius).collect();
    let wb: Vec<C64> = w.iter().map(|c| c.conj()).collect();
    let s = 1.0 - w.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let (s1, s2, s3, s4) = (1.0 / s, 1.0 / (s * s), 1.0 / (s * s * s), 1.0 / (s * s * s * s));
    let dl = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let r1 = 1.0 / radius;
    let r2 = r1 * r1;
    let r3 = r2 * r1;
    let r4 = r2 * r2;
    let grad = (0..dim).map(|i| wb[i] * (a * s1 * r1)).collect();
    let g = CMat::from_fn(dim, dim, |i, j| (wb[i] * w[j] * s2 + dl(i, j) * s1) * (a * r2));
    let dg = (0..dim)
        .map(|k| {
            CMat::from_fn(dim, dim, |i, j| {
                (wb[k] * (dl(i, j) * s2) + wb[i] * (dl(j, k) * s2) + wb[i] * w[j] * wb[k] * (2.0 * s3)) * (a * r3)
            })
        })
        .collect();
    let ddg = (0..dim)
        .map(|k| {
            (0..dim)
                .map(|l| {
                    CMat::from_fn(dim, dim, |i, j| {
                        let t1 = (wb[k] * w[l] * (2.0 * s3) + dl(k, l) * s2) * dl(i, j);
                        let t2 = (wb[i] * w[l] * (2.0 * s3) + dl(i, l) * s2) * dl(j, k);
                        let t3 = (w[j] * wb[k] * dl(i, l) + wb[i] * w[j] * dl(k, l)) * (2.0 * s3)
                            + wb[i] * w[j] * wb[k] * w[l] * (6.0 * s4);
                        (t1 + t2 + t3) * (a * r4)
                    })
                })
                .collect()
        })
        .collect();
    let kappa = factorial(dim) / (PI.powi(dim as i32) * radius.powi(2 * dim as i32)) * s.powi(-(dim as i32 + 1));
    LogJets { kappa, grad, g, dg, ddg }
}

/// `ψ = −ln π − 2 ln σ`, `σ = −(z + z̄)`.
fn half_plane_jets(z: C64) -> LogJets {
    let sigma = -2.0 * z.re;
    let c = |v: f64| CMat::from_element(1, 1, C64::new(v, 0.0));
    LogJets {
        kappa: 1.0 / (PI * sigma * sigma),
        grad: vec![C64::new(2.0 / sigma, 0.0)],
        g: c(2.0 / sigma.powi(2)),
        dg: vec![c(4.0 / sigma.powi(3))],
        ddg: vec![vec![c(12.0 / sigma.powi(4))]],
    }
}

/// Block-diagonal assembly of product jets.
fn product_jets(parts: Vec<LogJets>) -> LogJets {
    let nu: usize = parts.iter().map(|p| p.grad.len()).sum();
    let zero = CMat::zeros(nu, nu);
    let mut out = LogJets {
        kappa: parts.iter().map(|p| p.kappa).product(),
        grad: Vec::with_capacity(nu),
        g: zero.clone(),
        dg: vec![zero.clone(); nu],
        ddg: vec![vec![zero; nu]; nu],
    };
    let mut off = 0;
    for p in parts {
        let n = p.grad.len();
        out.grad.extend(p.grad.iter().copied());
        out.g.view_mut((off, off), (n, n)).copy_from(&p.g);
        for k in 0..n {
            out.dg[off + k].view_mut((off, off), (n, n)).copy_from(&p.dg[k]);
            for l in 0..n {
                out.ddg[off + k][off + l].view_mut((off, off), (n, n)).copy_from(&p.ddg[k][l]);
            }
        }
        off += n;
    }
    out
}

impl KernelModel for ClosedForm {
    fn nu(&self) -> usize {
        self.dim()
    }

    fn log_jets(&self, z: &[C64]) -> Result<LogJets> {
        if z.len() != self.dim() {
            return Err(LabError::Dimension { expected: self.dim(), actual: z.len() });
        }
        if !self.contains(z) {
            return Err(LabError::Domain("point is not interior".into()));
        }
        Ok(match self {
            ClosedForm::Ball { dim, radius } => ball_jets(*dim, *radius, z),
            ClosedForm::LeftHalfPlane => half_plane_jets(z[0]),
            ClosedForm::Product(fs) => {
                let mut off = 0;
                let mut parts = Vec::new();
                for f in fs {
                    let n = f.dim();
                    parts.push(f.log_jets(&z[off..off + n])?);
                    off += n;
                }
                product_jets(parts)
            }
        })
    }
}

/// Closed-form `K(z, w)` for the disc, ball and disc×ball models.
pub fn kernel_closed_form(domain: &ModelDomain, z: &[C64], w: &[C64]) -> Result<C64> {
    ClosedForm::from_domain(domain)?.kernel(z, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn values_at_origin() {
        let o = [c(0.0, 0.0)];
        assert_relative_eq!(
            kernel_closed_form(&ModelDomain::unit_disc(), &o, &o).unwrap().re,
            1.0 / PI,
            max_relative = 1e-15
        );
        let o2 = [c(0.0, 0.0); 2];
        assert_relative_eq!(
            kernel_closed_form(&ModelDomain::unit_ball(2), &o2, &o2).unwrap().re,
            2.0 / PI.powi(2),
            max_relative = 1e-15
        );
        for n in 1..=4 {
            let o = vec![c(0.0, 0.0); n + 1];
            let k = kernel_closed_form(&ModelDomain::product_disc_ball(n), &o, &o).unwrap();
            assert_relative_eq!(k.re, factorial(n) / PI.powi(n as i32 + 1), max_relative = 1e-15);
        }
    }

    #[test]
    fn disc_matches_monomial_series() {
        let z = c(0.3, -0.2);
        let w = c(-0.1, 0.4);
        let series: C64 = (0..400).map(|k| (z * w.conj()).powi(k) * ((k + 1) as f64 / PI)).sum();
        let k = ClosedForm::disc().kernel(&[z], &[w]).unwrap();
        assert!((k - series).norm() < 1e-14);
    }

    #[test]
    fn hartogs_is_rejected() {
        let d = ModelDomain::hartogs_flat(crate::profile::Profile::exp_inverse(1).unwrap(), 1, 1.0, 1.0).unwrap();
        let o = [c(-0.5, 0.0), c(0.0, 0.0)];
        assert!(matches!(kernel_closed_form(&d, &o, &o), Err(LabError::Kind(_))));
    }

    /// `ln κ` along `z + h e_a + k e_b` sampled for finite differences.
    fn ln_kappa(f: &ClosedForm, z: &[C64]) -> f64 {
        f.kernel(z, z).unwrap().re.ln()
    }

    fn shifted(z: &[C64], moves: &[(usize, C64)]) -> Vec<C64> {
        let mut v = z.to_vec();
        for &(i, d) in moves {
            v[i] += d;
        }
        v
    }

    /// `∂_i ∂̄_j ln κ` by central differences of the real function.
    fn fd_metric(f: &ClosedForm, z: &[C64], i: usize, j: usize, h: f64) -> C64 {
        // ∂_i∂̄_j = ¼(∂x_i − i∂y_i)(∂x_j + i∂y_j)
        let d2 = |a: (usize, C64), b: (usize, C64)| {
            let pp = ln_kappa(f, &shifted(z, &[(a.0, a.1), (b.0, b.1)]));
            let pm = ln_kappa(f, &shifted(z, &[(a.0, a.1), (b.0, -b.1)]));
            let mp = ln_kappa(f, &shifted(z, &[(a.0, -a.1), (b.0, b.1)]));
            let mm = ln_kappa(f, &shifted(z, &[(a.0, -a.1), (b.0, -b.1)]));
            (pp - pm - mp + mm) / (4.0 * h * h)
        };
        let (re, im) = (c(h, 0.0), c(0.0, h));
        let xx = d2((i, re), (j, re));
        let yy = d2((i, im), (j, im));
        let xy = d2((i, re), (j, im));
        let yx = d2((i, im), (j, re));
        c(xx + yy, xy - yx) * 0.25
    }

    #[test]
    fn finite_difference_audit_of_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let models = [
            ClosedForm::disc(),
            ClosedForm::ball(2),
            ClosedForm::product_disc_ball(2),
            ClosedForm::Ball { dim: 2, radius: 1.7 },
        ];
        for f in &models {
            let nu = f.dim();
            for _ in 0..10 {
                let z: Vec<C64> = loop {
                    let z: Vec<C64> =
                        (0..nu).map(|_| c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))).collect();
                    if f.contains(&z) {
                        break z;
                    }
                };
                let jets = f.log_jets(&z).unwrap();
                for i in 0..nu {
                    for j in 0..nu {
                        let fd = fd_metric(f, &z, i, j, 1e-4);
                        let an = jets.g[(i, j)];
                        assert!((fd - an).norm() <= 1e-7f64.max(1e-5 * an.norm()), "{f:?} g[{i}{j}] fd={fd} an={an}");
                    }
                }
            }
        }
    }

    /// Jets of `ln κ` through the Taylor algebra from the explicit kernel.
    #[test]
    fn third_and_fourth_order_jets_match_taylor_algebra() {
        use crate::bergman::jets::{log_jets_from_kappa, BiJet, JetSpace};
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for dim in 1..=3 {
            let sp = JetSpace::new(dim);
            for _ in 0..5 {
                let z: Vec<C64> =
                    (0..dim).map(|_| c(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4))).collect();
                // s = 1 − Σ (z+h)(z̄+h̄)
                let mut s = BiJet::constant(&sp, c(1.0 - z.iter().map(|x| x.norm_sqr()).sum::<f64>(), 0.0));
                for (i, zi) in z.iter().enumerate() {
                    let u = sp.unit(i);
                    s.set_coeff(u, 0, -zi.conj());
                    s.set_coeff(0, u, -zi);
                    s.set_coeff(u, u, c(-1.0, 0.0));
                }
                let kappa = s.powf(-(dim as f64 + 1.0)).unwrap().scale(c(factorial(dim) / PI.powi(dim as i32), 0.0));
                let alg = log_jets_from_kappa(&kappa).unwrap();
                let an = ClosedForm::ball(dim).log_jets(&z).unwrap();
                assert_relative_eq!(alg.kappa, an.kappa, max_relative = 1e-13);
                let tol = 1e-11;
                for i in 0..dim {
                    assert!((alg.grad[i] - an.grad[i]).norm() < tol);
                }
                assert!((&alg.g - &an.g).norm() < tol);
                for k in 0..dim {
                    assert!((&alg.dg[k] - &an.dg[k]).norm() < tol, "dg dim={dim}");
                    for l in 0..dim {
                        assert!((&alg.ddg[k][l] - &an.ddg[k][l]).norm() < tol, "ddg dim={dim}");
                    }
                }
            }
        }
    }

    #[test]
    fn half_plane_jets_by_differences() {
        let f = ClosedForm::LeftHalfPlane;
        let z = [c(-0.7, 0.3)];
        let j = f.log_jets(&z).unwrap();
        let fd = fd_metric(&f, &z, 0, 0, 1e-4);
        assert!((fd - j.g[(0, 0)]).norm() < 1e-7);
        // ∂g = ∂_z (2/σ²), σ = −2x: ∂_z = ½∂_x
        let h = 1e-5;
        let gx = |x: f64| 2.0 / (4.0 * x * x);
        let dgx = (gx(-0.7 + h) - gx(-0.7 - h)) / (2.0 * h) * 0.5;
        assert!((j.dg[0][(0, 0)].re - dgx).abs() < 1e-6);
        let ddgx = (gx(-0.7 + h) - 2.0 * gx(-0.7) + gx(-0.7 - h)) / (h * h) * 0.25;
        assert!((j.ddg[0][0][(0, 0)].re - ddgx).abs() < 1e-4);
    }
}
