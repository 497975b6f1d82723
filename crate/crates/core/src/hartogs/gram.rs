//! Mode kernels on the truncated base `D₁ = {|z₁| < R₁, Re z₁ < 0}` by a
//! weighted polynomial Gram matrix.
//!
//! For each mode the polynomials in `ζ = (z₁ + R₁/2)/R₁` are orthonormalized
//! by Arnoldi on a base quadrature; the Gram matrix of that basis is then
//! re-assembled on a rule with doubled resolution and factorized by pivoted
//! Cholesky, which absorbs the base rule's quadrature error.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{LabError, Result};
use crate::linalg::CMat;
use crate::numeric::quadrature::{composite, gauss_legendre, graded_toward_left};
use crate::profile::Profile;
use crate::C64;

use super::weight::mode_weight;
use super::{ModeEngine, ModeJet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GramConfig {
    pub dmax: usize,
    pub kmax: usize,
    pub quad_levels: usize,
    /// Compensated summation of Gram entries.
    pub extended_precision: bool,
    #[serde(skip)]
    pub force_flat_profile: bool,
}

impl Default for GramConfig {
    fn default() -> Self {
        GramConfig { dmax: 24, kmax: 4, quad_levels: 2, extended_precision: false, force_flat_profile: false }
    }
}

const PIVOT_TOL: f64 = 1e-13;

/// Area rule on the half-disc: points and weights (without the mode weight).
#[derive(Debug, Clone)]
struct AreaRule {
    z: Vec<C64>,
    w: Vec<f64>,
}

/// `x = −R₁ cos β`, `y = R₁ sin β · η`, Jacobian `R₁² sin² β`.
fn area_rule(r1: f64, beta_kink: Option<f64>, level: usize) -> AreaRule {
    let scale = 1usize << level;
    let mut breaks: Vec<f64> = (0..=8).map(|i| FRAC_PI_2 * i as f64 / 8.0).collect();
    if let Some(bk) = beta_kink {
        breaks.retain(|&b| b < bk);
        // grade toward π/2, where the weight degenerates
        let tail = graded_toward_left(0.0, FRAC_PI_2 - bk, 0.5, 1e-14);
        breaks.extend(tail.iter().rev().map(|t| FRAC_PI_2 - t));
    }
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let beta = composite(&breaks, 6 * scale);
    let (eta, eta_w) = gauss_legendre(16 * scale);
    let mut out = AreaRule { z: Vec::new(), w: Vec::new() };
    for (&b, &wb) in beta.nodes.iter().zip(&beta.weights) {
        let (sb, cb) = b.sin_cos();
        for (&e, &we) in eta.iter().zip(&eta_w) {
            out.z.push(C64::new(-r1 * cb, r1 * sb * e));
            out.w.push(wb * we * r1 * r1 * sb * sb);
        }
    }
    out
}

fn sum(xs: impl Iterator<Item = C64>, compensated: bool) -> C64 {
    if !compensated {
        return xs.sum();
    }
    // Neumaier summation, componentwise
    let (mut s, mut c) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for x in xs {
        let t = s + x;
        let fix = |s: f64, x: f64, t: f64| if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        c += C64::new(fix(s.re, x.re, t.re), fix(s.im, x.im, t.im));
        s = t;
    }
    s + c
}

/// One mode: Arnoldi recurrence coefficients and the re-orthonormalizing map.
#[derive(Debug, Clone)]
pub struct ModeSpace {
    pub k: usize,
    q0: f64,
    /// `h[j]` holds the coefficients `h_{0j}, …, h_{j+1,j}`.
    h: Vec<Vec<C64>>,
    /// `e = T q` (rows: kept functions).
    t: CMat,
    pub kept: usize,
    pub condition: f64,
}

#[derive(Debug, Clone)]
pub struct GramEngine {
    profile: Profile,
    r1: f64,
    r2: f64,
    cfg: GramConfig,
    spaces: Vec<ModeSpace>,
}

/// Pivoted Cholesky `G[p, p] ≈ L L*`, stopping at relative pivot `tol`.
fn pivoted_cholesky(g: &CMat, tol: f64) -> (CMat, Vec<usize>, f64) {
    let n = g.nrows();
    let mut a = g.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = CMat::zeros(n, n);
    let max0 = (0..n).map(|i| a[(i, i)].re).fold(0.0, f64::max);
    let mut rank = 0;
    let mut min_piv = f64::INFINITY;
    for j in 0..n {
        let (p, piv) =
            (j..n).map(|i| (i, a[(i, i)].re)).fold((j, f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b });
        if !(piv > tol * max0) {
            break;
        }
        a.swap_rows(j, p);
        a.swap_columns(j, p);
        l.swap_rows(j, p);
        perm.swap(j, p);
        let d = piv.sqrt();
        min_piv = min_piv.min(piv);
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            l[(i, j)] = a[(i, j)] / d;
        }
        for i in j + 1..n {
            for c in j + 1..n {
                let v = l[(i, j)] * l[(c, j)].conj();
                a[(i, c)] -= v;
            }
        }
        rank += 1;
    }
    let l = l.view((0, 0), (n, rank)).into_owned();
    (l, perm, max0 / min_piv)
}

impl GramEngine {
    pub fn new(profile: Profile, r1: f64, r2: f64, cfg: GramConfig) -> Result<Self> {
        if !(r1 > 0.0 && r2 > 0.0) {
            return Err(LabError::Config(format!("box radii must be positive, got R₁ = {r1}, R₂ = {r2}")));
        }
        if cfg.dmax == 0 || cfg.quad_levels == 0 || cfg.quad_levels > 5 {
            return Err(LabError::Config("need dmax ≥ 1 and 1 ≤ quad_levels ≤ 5".into()));
        }
        let kink = if cfg.force_flat_profile {
            None
        } else {
            let y = profile.eval(r2 * r2);
            (y < r1).then(|| (y / r1).acos())
        };
        let base = area_rule(r1, kink, cfg.quad_levels);
        let fine = area_rule(r1, kink, cfg.quad_levels + 1);
        let mut eng = GramEngine { profile, r1, r2, cfg, spaces: Vec::new() };
        let spaces: Result<Vec<ModeSpace>> =
            (0..=cfg.kmax).into_par_iter().map(|k| eng.build_mode(k, &base, &fine)).collect();
        eng.spaces = spaces?;
        Ok(eng)
    }

    pub fn config(&self) -> &GramConfig {
        &self.cfg
    }

    pub fn spaces(&self) -> &[ModeSpace] {
        &self.spaces
    }

    fn weight(&self, k: usize, x: f64) -> Result<f64> {
        if self.cfg.force_flat_profile {
            Ok(std::f64::consts::PI * self.r2.powi(2 * k as i32 + 2) / (k as f64 + 1.0))
        } else {
            mode_weight(&self.profile, self.r2, k, x)
        }
    }

    fn zeta(&self, z: C64) -> C64 {
        (z + 0.5 * self.r1) / self.r1
    }

    fn build_mode(&self, k: usize, base: &AreaRule, fine: &AreaRule) -> Result<ModeSpace> {
        let comp = self.cfg.extended_precision;
        let om: Vec<f64> =
            base.z.iter().zip(&base.w).map(|(z, w)| Ok(w * self.weight(k, z.re)?)).collect::<Result<_>>()?;
        let zeta: Vec<C64> = base.z.iter().map(|&z| self.zeta(z)).collect();
        let n = om.len();
        let mass: f64 = om.iter().sum();
        let q0 = 1.0 / mass.sqrt();
        let mut qs: Vec<Vec<C64>> = vec![vec![C64::new(q0, 0.0); n]];
        let mut h = Vec::with_capacity(self.cfg.dmax);
        for j in 0..self.cfg.dmax {
            let mut v: Vec<C64> = qs[j].iter().zip(&zeta).map(|(q, z)| q * z).collect();
            let mut hj = vec![C64::new(0.0, 0.0); j + 2];
            for _ in 0..2 {
                for (i, qi) in qs.iter().enumerate() {
                    let c = sum(v.iter().zip(qi).zip(&om).map(|((a, b), w)| a * b.conj() * *w), comp);
                    hj[i] += c;
                    for (vv, qq) in v.iter_mut().zip(qi) {
                        *vv -= qq * c;
                    }
                }
            }
            let nrm = v.iter().zip(&om).map(|(a, w)| a.norm_sqr() * w).sum::<f64>().sqrt();
            if !(nrm > 0.0) {
                return Err(LabError::IllConditioned { kept: j + 1, total: self.cfg.dmax + 1 });
            }
            hj[j + 1] = C64::new(nrm, 0.0);
            qs.push(v.into_iter().map(|a| a / nrm).collect());
            h.push(hj);
        }
        let mut space = ModeSpace {
            k,
            q0,
            h,
            t: CMat::identity(self.cfg.dmax + 1, self.cfg.dmax + 1),
            kept: self.cfg.dmax + 1,
            condition: 1.0,
        };
        // Gram matrix of the Arnoldi basis on the finer rule
        let dim = self.cfg.dmax + 1;
        let evals: Vec<(Vec<C64>, f64)> = fine
            .z
            .par_iter()
            .zip(fine.w.par_iter())
            .map(|(&z, &w)| Ok((space.eval_basis(self, z)[0].clone(), w * self.weight(k, z.re)?)))
            .collect::<Result<_>>()?;
        let mut g = CMat::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..=a {
                let v = sum(evals.iter().map(|(q, w)| q[a] * q[b].conj() * *w), comp);
                g[(a, b)] = v;
                g[(b, a)] = v.conj();
            }
        }
        let (l, perm, cond) = pivoted_cholesky(&g, PIVOT_TOL);
        let r = l.ncols();
        if r == 0 {
            return Err(LabError::IllConditioned { kept: 0, total: dim });
        }
        // e = L₁₁⁻¹ (q_perm[0..r])
        let l11 = l.view((0, 0), (r, r)).into_owned();
        let inv = l11.try_inverse().ok_or(LabError::IllConditioned { kept: r, total: dim })?;
        let mut t = CMat::zeros(r, dim);
        for i in 0..r {
            for j in 0..r {
                t[(i, perm[j])] = inv[(i, j)];
            }
        }
        space.t = t;
        space.kept = r;
        space.condition = cond;
        Ok(space)
    }
}

impl ModeSpace {
    /// Arnoldi polynomials and their first two `z₁`-derivatives at `z`.
    fn eval_basis(&self, eng: &GramEngine, z: C64) -> [Vec<C64>; 3] {
        let zeta = eng.zeta(z);
        let dz = 1.0 / eng.r1;
        let n = self.h.len() + 1;
        let mut p = vec![C64::new(0.0, 0.0); n];
        let mut p1 = p.clone();
        let mut p2 = p.clone();
        p[0] = C64::new(self.q0, 0.0);
        for j in 0..n - 1 {
            let hj = &self.h[j];
            let (mut a, mut b, mut c) = (zeta * p[j], p[j] + zeta * p1[j], 2.0 * p1[j] + zeta * p2[j]);
            for i in 0..=j {
                a -= hj[i] * p[i];
                b -= hj[i] * p1[i];
                c -= hj[i] * p2[i];
            }
            let d = hj[j + 1];
            p[j + 1] = a / d;
            p1[j + 1] = b / d;
            p2[j + 1] = c / d;
        }
        // derivatives are in ζ; convert to z₁
        for v in p1.iter_mut() {
            *v *= dz;
        }
        for v in p2.iter_mut() {
            *v *= dz * dz;
        }
        [p, p1, p2]
    }

    /// Reproducing kernel `K_k(z, w̄)` of the finite basis.
    pub fn kernel(&self, eng: &GramEngine, z: C64, w: C64) -> C64 {
        let ez = &self.t * crate::linalg::CVec::from_vec(self.eval_basis(eng, z)[0].clone());
        let ew = &self.t * crate::linalg::CVec::from_vec(self.eval_basis(eng, w)[0].clone());
        ez.iter().zip(ew.iter()).map(|(a, b)| a * b.conj()).sum()
    }
}

impl ModeEngine for GramEngine {
    fn kmax(&self) -> usize {
        self.cfg.kmax
    }

    fn r2(&self) -> f64 {
        self.r2
    }

    fn base_contains(&self, z1: C64) -> bool {
        z1.re < 0.0 && z1.norm() < self.r1
    }

    fn mode_jet(&self, k: usize, z1: C64) -> Result<ModeJet> {
        let space = self.spaces.get(k).ok_or(LabError::Dimension { expected: self.cfg.kmax, actual: k })?;
        let basis = space.eval_basis(self, z1);
        let e: Vec<crate::linalg::CVec> =
            basis.iter().map(|b| &space.t * crate::linalg::CVec::from_column_slice(b)).collect();
        let mut out = [[C64::new(0.0, 0.0); 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                out[a][b] = e[a].iter().zip(e[b].iter()).map(|(x, y)| x * y.conj()).sum();
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hartogs::{kernel_jets, HalfDiscOracle};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn flat(dmax: usize) -> GramEngine {
        let cfg = GramConfig { dmax, kmax: 8, force_flat_profile: true, ..GramConfig::default() };
        GramEngine::new(Profile::exp_inverse(1).unwrap(), 1.0, 1.0, cfg).unwrap()
    }

    #[test]
    fn pivoted_cholesky_reconstructs() {
        let a = CMat::from_fn(4, 3, |i, j| c(((i * 7 + j * j * 3) % 5) as f64 - 2.0, (i * j * j) as f64 * 0.1));
        let g = &a * a.adjoint();
        let (l, perm, _) = pivoted_cholesky(&g, 1e-12);
        assert_eq!(l.ncols(), 3);
        let gp = CMat::from_fn(4, 4, |i, j| g[(perm[i], perm[j])]);
        assert!((gp - &l * l.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn flat_mode_zero_matches_half_disc() {
        let eng = flat(24);
        let o = HalfDiscOracle { r1: 1.0, r2: 1.0 };
        for z in [c(-0.5, 0.0), c(-0.4, 0.3), c(-0.6, -0.2)] {
            let k = eng.spaces[0].kernel(&eng, z, z).re;
            let exact = o.half_disc_kernel(z, z).re / std::f64::consts::PI;
            assert!((k / exact - 1.0).abs() < 1e-6, "z = {z}: {k} vs {exact}");
        }
        let z = [c(-0.45, 0.1), c(0.2, -0.1)];
        let (j, _) = kernel_jets(&eng, &z).unwrap();
        assert!((j.kappa / o.kappa(&z).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reproducing_property() {
        let eng = flat(10);
        let rule = area_rule(1.0, None, 2);
        let z = c(-0.4, 0.2);
        let sp = &eng.spaces[1];
        let w1 = eng.weight(1, -0.5).unwrap();
        for j in [0usize, 3, 7] {
            let mut acc = C64::new(0.0, 0.0);
            for (&p, &w) in rule.z.iter().zip(&rule.w) {
                acc += sp.kernel(&eng, z, p) * sp.eval_basis(&eng, p)[0][j] * w * w1;
            }
            let direct = sp.eval_basis(&eng, z)[0][j];
            assert!((acc - direct).norm() < 1e-6 * direct.norm().max(1.0));
        }
    }
}
