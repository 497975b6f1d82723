//! Bergman kernel of the Hartogs flat model in `ℂ²` by rotational modes.
//!
//! `A²(D) = ⊕_k z₂^k ⊗ A²(D₁, w_k)`, so `κ(z) = Σ_k K_k(z₁, z̄₁)|z₂|^{2k}` with
//! `K_k` the reproducing kernel of the base with weight `w_k`. Engines
//! supply the jets `∂_z^a ∂_w̄^b K_k(z, w̄)` on the diagonal for `a, b ≤ 2`;
//! the mode sum is assembled into a Taylor jet of `κ` and converted to
//! log-kernel jets.

pub mod gram;
pub mod oracle;
pub mod spectral;
pub mod weight;

use serde::Serialize;

use crate::bergman::jets::{log_jets_from_kappa, BiJet, JetSpace};
use crate::bergman::{KernelModel, LogJets};
use crate::error::{LabError, Result};
use crate::C64;

pub use gram::{GramConfig, GramEngine};
pub use oracle::HalfDiscOracle;
pub use spectral::SpectralEngine;
pub use weight::{fiber_radius, mode_weight};

/// `[a][b] = ∂_z^a ∂_w̄^b K_k(z, w̄)` at `w = z`.
pub type ModeJet = [[C64; 3]; 3];

pub trait ModeEngine: Sync {
    fn kmax(&self) -> usize;

    /// Fiber radius bound `R₂`.
    fn r2(&self) -> f64;

    fn base_contains(&self, z1: C64) -> bool;

    fn mode_jet(&self, k: usize, z1: C64) -> Result<ModeJet>;
}

/// Tail diagnostics of the mode sum.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JetDiagnostics {
    pub modes_used: usize,
    /// Relative size of the last mode's contribution to `κ`.
    pub tail: f64,
    pub truncation_warning: bool,
}

const TAIL_TOLERANCE: f64 = 1e-9;

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Log-kernel jets at `z = (z₁, z₂)` from the mode sum.
pub fn kernel_jets(engine: &dyn ModeEngine, z: &[C64]) -> Result<(LogJets, JetDiagnostics)> {
    if z.len() != 2 {
        return Err(LabError::Dimension { expected: 2, actual: z.len() });
    }
    if !engine.base_contains(z[0]) || !(z[1].norm() < engine.r2()) {
        return Err(LabError::Domain("point outside the engine's domain".into()));
    }
    let sp = JetSpace::new(2);
    let monos: [[u8; 2]; 6] = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]];
    let idx: Vec<usize> = monos.iter().map(|m| sp.index(m).expect("degree ≤ 2")).collect();
    let fact = [1.0, 1.0, 2.0];
    let mut kappa = BiJet::zero(&sp);
    let z2 = z[1];
    let at_axis = z2.norm() == 0.0;
    let kmax = if at_axis { engine.kmax().min(2) } else { engine.kmax() };
    let mut last = 0.0;
    let mut k0 = 0.0;
    for k in 0..=kmax {
        let mj = engine.mode_jet(k, z[0])?;
        let size = mj[0][0].re * z2.norm_sqr().powi(k as i32);
        if k == 0 {
            k0 = mj[0][0].re;
        }
        last = size;
        for (ia, a) in monos.iter().enumerate() {
            let (a1, a2) = (a[0] as usize, a[1] as usize);
            let za = binom(k, a2);
            if za == 0.0 {
                continue;
            }
            let pa = z2.powi((k - a2) as i32) * za;
            for (ib, b) in monos.iter().enumerate() {
                let (b1, b2) = (b[0] as usize, b[1] as usize);
                let zb = binom(k, b2);
                if zb == 0.0 {
                    continue;
                }
                let pb = z2.conj().powi((k - b2) as i32) * zb;
                let term = mj[a1][b1] / (fact[a1] * fact[b1]) * pa * pb;
                let cur = kappa.coeff(idx[ia], idx[ib]);
                kappa.set_coeff(idx[ia], idx[ib], cur + term);
            }
        }
    }
    let total = kappa.value().re;
    let tail = if at_axis { 0.0 } else { (last / total).abs() };
    if !(k0 > 0.0) {
        return Err(LabError::Domain("mode-0 kernel is not positive".into()));
    }
    let jets = log_jets_from_kappa(&kappa)?;
    Ok((jets, JetDiagnostics { modes_used: kmax + 1, tail, truncation_warning: tail > TAIL_TOLERANCE }))
}

/// [`KernelModel`] adapter over a mode engine.
pub struct HartogsKernel<E: ModeEngine> {
    pub engine: E,
}

impl<E: ModeEngine> KernelModel for HartogsKernel<E> {
    fn nu(&self) -> usize {
        2
    }

    fn log_jets(&self, z: &[C64]) -> Result<LogJets> {
        Ok(kernel_jets(&self.engine, z)?.0)
    }
}
