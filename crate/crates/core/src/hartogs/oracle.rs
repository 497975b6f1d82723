//! Closed-form kernel of the flat product `{|z₁| < R₁, Re z₁ < 0} × {|z₂| < R₂}`.
//!
//! The left half-disc is mapped onto the unit disc by
//! `ζ = −i z/R₁`, `q = (1+ζ)/(1−ζ)`, `Q = q²`, `g = (Q − i)/(Q + i)`;
//! the kernel follows from the transformation law.

use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::C64;

#[derive(Debug, Clone, Copy)]
pub struct HalfDiscOracle {
    pub r1: f64,
    pub r2: f64,
}

impl HalfDiscOracle {
    /// `g(z)` and `g′(z)`.
    pub fn map(&self, z: C64) -> (C64, C64) {
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let zeta = -i * z / self.r1;
        let q = (one + zeta) / (one - zeta);
        let qq = q * q;
        let g = (qq - i) / (qq + i);
        // dg/dQ = 2i/(Q+i)², dQ/dq = 2q, dq/dζ = 2/(1−ζ)², dζ/dz = −i/R₁
        let dg = (2.0 * i) / ((qq + i) * (qq + i)) * (2.0 * q) * (2.0 / ((one - zeta) * (one - zeta))) * (-i / self.r1);
        (g, dg)
    }

    pub fn contains(&self, z: &[C64]) -> bool {
        z[0].re < 0.0 && z[0].norm() < self.r1 && z[1].norm() < self.r2
    }

    /// Half-disc kernel `K(z, w)`.
    pub fn half_disc_kernel(&self, z: C64, w: C64) -> C64 {
        let (gz, dz) = self.map(z);
        let (gw, dw) = self.map(w);
        let den = C64::new(1.0, 0.0) - gz * gw.conj();
        dz * dw.conj() / (den * den * PI)
    }

    /// `κ(z)` of the product.
    pub fn kappa(&self, z: &[C64]) -> Result<f64> {
        if !self.contains(z) {
            return Err(LabError::Domain("oracle point outside the flat product".into()));
        }
        let s = 1.0 - z[1].norm_sqr() / (self.r2 * self.r2);
        Ok(self.half_disc_kernel(z[0], z[0]).re / (PI * self.r2 * self.r2 * s * s))
    }

    /// Diagonal metric entries `(G₁₁, G₂₂)`; `G₁₂ = 0`.
    pub fn metric(&self, z: &[C64]) -> Result<(f64, f64)> {
        if !self.contains(z) {
            return Err(LabError::Domain("oracle point outside the flat product".into()));
        }
        let (g, dg) = self.map(z[0]);
        let s1 = 1.0 - g.norm_sqr();
        let r2 = self.r2 * self.r2;
        let s2 = 1.0 - z[1].norm_sqr() / r2;
        Ok((2.0 * dg.norm_sqr() / (s1 * s1), 2.0 / (r2 * s2 * s2)))
    }
}
