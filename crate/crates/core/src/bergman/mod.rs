//! Bergman kernels, metric and curvature invariants.
//!
//! Index conventions: `g[(i, j)] = g_{i j̄} = ∂_i ∂̄_j ψ` with `ψ = ln κ`,
//! `dg[k][(i, j)] = ∂_k g_{i j̄}`, `ddg[k][l][(i, j)] = ∂_k ∂̄_l g_{i j̄}`.
//! The inverse metric is `g^{i j̄} = (G⁻¹)[(j, i)]`, so that
//! `Σ_j g^{i j̄} g_{k j̄} = δ_{ik}`. Throughout `ν` is the ambient complex
//! dimension.

pub mod closed_form;
pub mod jets;
pub mod monge_ampere;
pub mod transform;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::linalg::{hermitian_inverse, CMat};
use crate::C64;

pub use closed_form::{kernel_closed_form, ClosedForm};
pub use monge_ampere::{monge_ampere, ramadanov_jet, ScalarJet};
pub use transform::{transform_under_biholomorphism, Biholomorphism, Quantity};

/// Diagonal kernel value and the jets of `ψ = ln κ` up to order four.
#[derive(Debug, Clone)]
pub struct LogJets {
    pub kappa: f64,
    /// `∂_i ψ`.
    pub grad: Vec<C64>,
    pub g: CMat,
    pub dg: Vec<CMat>,
    pub ddg: Vec<Vec<CMat>>,
}

impl LogJets {
    pub fn nu(&self) -> usize {
        self.grad.len()
    }
}

/// A diagonal Bergman-kernel evaluator.
pub trait KernelModel: Sync {
    fn nu(&self) -> usize;

    fn log_jets(&self, z: &[C64]) -> Result<LogJets>;

    fn kappa(&self, z: &[C64]) -> Result<f64> {
        Ok(self.log_jets(z)?.kappa)
    }
}

/// Curvature tensor `R_{h̄ j k l̄}` stored at `[h][j][k][l]`.
#[derive(Debug, Clone)]
pub struct Curvature {
    nu: usize,
    data: Vec<C64>,
}

impl Curvature {
    pub fn get(&self, h: usize, j: usize, k: usize, l: usize) -> C64 {
        let n = self.nu;
        self.data[((h * n + j) * n + k) * n + l]
    }

    /// Largest `|R_{h̄jkl̄} − conj(R_{j̄hlk̄})|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.nu;
        let mut worst: f64 = 0.0;
        for h in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max((self.get(h, j, k, l) - self.get(j, h, l, k).conj()).norm());
                    }
                }
            }
        }
        worst
    }
}

fn curvature(j: &LogJets, ginv: &CMat) -> Curvature {
    let n = j.nu();
    let mut data = vec![C64::new(0.0, 0.0); n * n * n * n];
    for h in 0..n {
        for jj in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut r = -j.ddg[k][l][(jj, h)];
                    for mu in 0..n {
                        for nv in 0..n {
                            r += ginv[(mu, nv)] * j.dg[k][(jj, mu)] * j.dg[l][(h, nv)].conj();
                        }
                    }
                    data[((h * n + jj) * n + k) * n + l] = r;
                }
            }
        }
    }
    Curvature { nu: n, data }
}

/// Invariants of the Bergman metric at one point.
#[derive(Debug, Clone)]
pub struct MetricReport {
    pub nu: usize,
    pub kappa: f64,
    pub g: CMat,
    pub ginv: CMat,
    pub det_g: f64,
    pub curvature: Curvature,
    pub scalar: f64,
    pub j_invariant: f64,
    /// Values for the vector passed to [`metric_report`].
    pub b: f64,
    pub ricci: f64,
    pub kf: f64,
}

/// Scalar columns of a [`MetricReport`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricSummary {
    pub kappa: f64,
    pub det_g: f64,
    pub j: f64,
    pub ricci: f64,
    pub scalar: f64,
    pub kf: f64,
    pub b: f64,
}

impl MetricReport {
    /// `B(ξ) = (ξ G ξ*)^{1/2}`.
    pub fn bergman_length(&self, xi: &[C64]) -> f64 {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..self.nu {
            for j in 0..self.nu {
                s += xi[i] * self.g[(i, j)] * xi[j].conj();
            }
        }
        s.re.max(0.0).sqrt()
    }

    /// `R(ξ) = g^{k l̄} R_{h̄ j k l̄} ξ̄_h ξ_j / B(ξ)²`.
    pub fn ricci_at(&self, xi: &[C64]) -> Result<f64> {
        let b2 = self.bergman_length(xi).powi(2);
        if !(b2 > 0.0) {
            return Err(LabError::Domain("Ricci curvature needs a nonzero vector".into()));
        }
        let n = self.nu;
        let mut s = C64::new(0.0, 0.0);
        for h in 0..n {
            for j in 0..n {
                let w = xi[h].conj() * xi[j];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        s += self.ginv[(l, k)] * self.curvature.get(h, j, k, l) * w;
                    }
                }
            }
        }
        Ok(s.re / b2)
    }

    /// Kobayashi–Fuks length `B(ξ) √(ν + 1 − R(ξ))`.
    pub fn kf_at(&self, xi: &[C64]) -> Result<f64> {
        let r = self.ricci_at(xi)?;
        let gap = self.nu as f64 + 1.0 - r;
        if !(gap > 0.0) {
            return Err(LabError::Domain(format!("Ricci curvature {r} violates the upper bound")));
        }
        Ok(self.bergman_length(xi) * gap.sqrt())
    }

    pub fn summary(&self) -> MetricSummary {
        MetricSummary {
            kappa: self.kappa,
            det_g: self.det_g,
            j: self.j_invariant,
            ricci: self.ricci,
            scalar: self.scalar,
            kf: self.kf,
            b: self.b,
        }
    }
}

/// Builds a [`MetricReport`] from log-kernel jets.
pub fn report_from_jets(jets: &LogJets, xi: &[C64]) -> Result<MetricReport> {
    let n = jets.nu();
    if xi.len() != n {
        return Err(LabError::Dimension { expected: n, actual: xi.len() });
    }
    if !(jets.kappa > 0.0) {
        return Err(LabError::Domain(format!("kernel diagonal {} is not positive", jets.kappa)));
    }
    let (ginv, det_g) = hermitian_inverse(&jets.g)?;
    let curv = curvature(jets, &ginv);
    let mut scalar = C64::new(0.0, 0.0);
    for h in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    scalar += ginv[(h, j)] * ginv[(l, k)] * curv.get(h, j, k, l);
                }
            }
        }
    }
    let mut rep = MetricReport {
        nu: n,
        kappa: jets.kappa,
        g: jets.g.clone(),
        ginv,
        det_g,
        curvature: curv,
        scalar: scalar.re,
        j_invariant: det_g / jets.kappa,
        b: 0.0,
        ricci: f64::NAN,
        kf: f64::NAN,
    };
    rep.b = rep.bergman_length(xi);
    if rep.b > 0.0 {
        rep.ricci = rep.ricci_at(xi)?;
        rep.kf = rep.kf_at(xi)?;
    }
    Ok(rep)
}

/// All invariants of `km` at `z` for the vector `ξ`; a zero `ξ` leaves
/// `ricci` and `kf` as NaN.
pub fn metric_report(km: &dyn KernelModel, z: &[C64], xi: &[C64]) -> Result<MetricReport> {
    report_from_jets(&km.log_jets(z)?, xi)
}

/// `2π^{n+1}(n+1)ⁿ/n!`, the invariant `J` of `𝔻 × Bₙ(0,1)`.
pub fn product_j_target(n: usize) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    2.0 * std::f64::consts::PI.powi(n as i32 + 1) * ((n + 1) as f64).powi(n as i32) / fact
}
