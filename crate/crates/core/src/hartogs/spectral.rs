//! Mode kernels of `{Re z₁ + φ(|z₂|²) < 0, |z₂| < R₂}` by a Fourier transform in `Im z₁`.
//!
//! The domain is a tube in `Im z₁`, so
//! `K_k(z, w̄) = (1/2π) ∫₀^∞ e^{ξ(z + w̄)} / W_k(ξ) dξ` with
//! `W_k(ξ) = ∫_{|z₂|<R₂} |z₂|^{2k} ∫_{−∞}^{−φ(|z₂|²)} e^{2ξx} dx dA = (π/2ξ) ∫₀^{R₂²} s^k e^{−2ξφ(s)} ds`.
//! No truncation in `z₁` and no polynomial basis are involved, which keeps
//! the kernel accurate at the depths where the base weight degenerates.

use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::numeric::quadrature::{composite, Rule1d};
use crate::profile::Profile;
use crate::C64;

use super::{ModeEngine, ModeJet};

/// Below this value of `2ξφ(s)` the factor `e^{−2ξφ}` is 1 in double precision.
const U_FLOOR: f64 = 1e-17;
const U_CEIL: f64 = 60.0;

#[derive(Debug, Clone)]
pub struct SpectralEngine {
    profile: Profile,
    r2: f64,
    kmax: usize,
    flat: bool,
    v_rule: Rule1d,
    t_rule_nodes: usize,
}

impl SpectralEngine {
    pub fn new(profile: Profile, r2: f64, kmax: usize) -> Result<Self> {
        if !(r2 > 0.0) {
            return Err(LabError::Config(format!("R₂ = {r2} must be positive")));
        }
        let mut breaks = vec![0.0];
        breaks.extend((-34..=6).map(|j| 2f64.powi(j)));
        Ok(SpectralEngine { profile, r2, kmax, flat: false, v_rule: composite(&breaks, 14), t_rule_nodes: 12 })
    }

    /// Replaces `φ` by 0: the domain becomes `{Re z₁ < 0} × {|z₂| < R₂}`.
    pub fn force_flat_profile(mut self) -> Self {
        self.flat = true;
        self
    }

    /// `∫₀^{R₂²} s^k e^{−2ξφ(s)} ds`.
    pub fn fiber_integral(&self, k: usize, xi: f64) -> Result<f64> {
        let big_s = self.r2 * self.r2;
        let kp1 = k as f64 + 1.0;
        let full = big_s.powf(kp1) / kp1;
        if self.flat {
            return Ok(full);
        }
        let ln_2xi = (2.0 * xi).ln();
        let ln_u_top = ln_2xi + self.profile.ln_eval(big_s);
        let ln_floor = U_FLOOR.ln();
        if ln_u_top <= ln_floor {
            return Ok(full);
        }
        let s_lo = self.profile.inverse_ln(ln_floor - ln_2xi)?;
        let t_hi = ln_u_top.min(U_CEIL.ln());
        // panels of unit length in t = ln u
        let n_pan = ((t_hi - ln_floor).ceil() as usize).max(1);
        let breaks: Vec<f64> = (0..=n_pan).map(|i| ln_floor + (t_hi - ln_floor) * i as f64 / n_pan as f64).collect();
        let rule = composite(&breaks, self.t_rule_nodes);
        let mut acc = s_lo.powf(kp1) / kp1;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let u = t.exp();
            let s = self.profile.inverse_ln(t - ln_2xi)?;
            // ds/dt = φ(s)/φ′(s)
            let ds_dt = (self.profile.ln_eval(s) - self.profile.ln_derivative1(s)).exp();
            acc += w * s.powi(k as i32) * (-u).exp() * ds_dt;
        }
        Ok(acc)
    }

    /// `W_k(ξ)`.
    pub fn mode_norm(&self, k: usize, xi: f64) -> Result<f64> {
        Ok(PI / (2.0 * xi) * self.fiber_integral(k, xi)?)
    }
}

impl ModeEngine for SpectralEngine {
    fn kmax(&self) -> usize {
        self.kmax
    }

    fn r2(&self) -> f64 {
        self.r2
    }

    fn base_contains(&self, z1: C64) -> bool {
        z1.re < 0.0
    }

    fn mode_jet(&self, k: usize, z1: C64) -> Result<ModeJet> {
        let x = z1.re;
        if !(x < 0.0) {
            return Err(LabError::Domain(format!("Re z₁ = {x} must be negative")));
        }
        let two_x = -2.0 * x;
        // moments ∫ v^p e^{−v} / W_k(v/2|x|) dv for p = 0..4
        let mut mom = [0.0f64; 5];
        for (&v, &w) in self.v_rule.nodes.iter().zip(&self.v_rule.weights) {
            let wk = self.mode_norm(k, v / two_x)?;
            let base = w * (-v).exp() / wk;
            let mut vp = 1.0;
            for m in mom.iter_mut() {
                *m += base * vp;
                vp *= v;
            }
        }
        let mut out = [[C64::new(0.0, 0.0); 3]; 3];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, e) in row.iter_mut().enumerate() {
                let p = a + b;
                *e = C64::new(mom[p] / (2.0 * PI) / two_x.powi(p as i32 + 1), 0.0);
            }
        }
        Ok(out)
    }
}
