//! Truncated Taylor algebra in `(h, h̄)` up to bidegree `(2, 2)`.
//!
//! A [`BiJet`] stores `c_{αβ}` with `f(z+h) = Σ c_{αβ} h^α h̄^β` for
//! `|α| ≤ 2`, `|β| ≤ 2`, so `∂^α ∂̄^β f(z) = α! β! c_{αβ}`. Products and
//! the logarithm are exact within the truncation, which is what converting
//! kernel jets into log-kernel jets needs.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::linalg::CMat;
use crate::C64;

use super::LogJets;

/// Index tables for multi-indices of total degree at most 2.
#[derive(Debug)]
pub struct JetSpace {
    nu: usize,
    monos: Vec<Vec<u8>>,
    add: Vec<Vec<Option<usize>>>,
    fact: Vec<f64>,
}

impl JetSpace {
    pub fn new(nu: usize) -> Arc<Self> {
        let mut monos = vec![vec![0u8; nu]];
        for i in 0..nu {
            let mut e = vec![0u8; nu];
            e[i] = 1;
            monos.push(e);
        }
        for i in 0..nu {
            for j in i..nu {
                let mut e = vec![0u8; nu];
                e[i] += 1;
                e[j] += 1;
                monos.push(e);
            }
        }
        let n = monos.len();
        let deg: Vec<usize> = monos.iter().map(|m| m.iter().map(|&x| x as usize).sum()).collect();
        let fact: Vec<f64> =
            monos.iter().map(|m| m.iter().map(|&x| if x == 2 { 2.0 } else { 1.0 }).product()).collect();
        let mut add = vec![vec![None; n]; n];
        for a in 0..n {
            for b in 0..n {
                if deg[a] + deg[b] <= 2 {
                    let s: Vec<u8> = monos[a].iter().zip(&monos[b]).map(|(x, y)| x + y).collect();
                    add[a][b] = monos.iter().position(|m| *m == s);
                }
            }
        }
        Arc::new(JetSpace { nu, monos, add, fact })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    fn len(&self) -> usize {
        self.monos.len()
    }

    /// Index of a multi-index, if its degree is at most 2.
    pub fn index(&self, alpha: &[u8]) -> Option<usize> {
        self.monos.iter().position(|m| m.as_slice() == alpha)
    }

    /// Index of `e_i + e_j`.
    pub fn pair(&self, i: usize, j: usize) -> usize {
        let mut e = vec![0u8; self.nu];
        e[i] += 1;
        e[j] += 1;
        self.index(&e).expect("degree-two index")
    }

    pub fn unit(&self, i: usize) -> usize {
        1 + i
    }
}

#[derive(Debug, Clone)]
pub struct BiJet {
    space: Arc<JetSpace>,
    c: Vec<C64>,
}

impl BiJet {
    pub fn zero(space: &Arc<JetSpace>) -> Self {
        let n = space.len();
        BiJet { space: space.clone(), c: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn constant(space: &Arc<JetSpace>, v: C64) -> Self {
        let mut j = Self::zero(space);
        j.c[0] = v;
        j
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    fn at(&self, a: usize, b: usize) -> C64 {
        self.c[a * self.space.len() + b]
    }

    /// Coefficient of `h^α h̄^β`, addressed by table indices.
    pub fn coeff(&self, a: usize, b: usize) -> C64 {
        self.at(a, b)
    }

    pub fn set_coeff(&mut self, a: usize, b: usize, v: C64) {
        let n = self.space.len();
        self.c[a * n + b] = v;
    }

    /// `∂^α ∂̄^β f` at the expansion point.
    pub fn derivative(&self, a: usize, b: usize) -> C64 {
        self.at(a, b) * self.space.fact[a] * self.space.fact[b]
    }

    pub fn value(&self) -> C64 {
        self.c[0]
    }

    pub fn add(&self, o: &BiJet) -> BiJet {
        let c = self.c.iter().zip(&o.c).map(|(x, y)| x + y).collect();
        BiJet { space: self.space.clone(), c }
    }

    pub fn scale(&self, s: C64) -> BiJet {
        BiJet { space: self.space.clone(), c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn mul(&self, o: &BiJet) -> BiJet {
        let sp = &self.space;
        let n = sp.len();
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for a1 in 0..n {
            for b1 in 0..n {
                let x = self.c[a1 * n + b1];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for a2 in 0..n {
                    let Some(a) = sp.add[a1][a2] else { continue };
                    for b2 in 0..n {
                        let Some(b) = sp.add[b1][b2] else { continue };
                        out[a * n + b] += x * o.c[a2 * n + b2];
                    }
                }
            }
        }
        BiJet { space: sp.clone(), c: out }
    }

    /// Nilpotent part `f − f(0)`.
    fn tail(&self) -> BiJet {
        let mut t = self.clone();
        t.c[0] = C64::new(0.0, 0.0);
        t
    }

    /// `Σ_{k=1}^{4} coef[k] u^k` for the nilpotent `u`; `u⁵ = 0` in this truncation.
    fn series(u: &BiJet, coef: [f64; 5]) -> BiJet {
        let mut acc = BiJet::constant(&u.space, C64::new(coef[0], 0.0));
        let mut pow = u.clone();
        for &ck in &coef[1..] {
            acc = acc.add(&pow.scale(C64::new(ck, 0.0)));
            pow = pow.mul(u);
        }
        acc
    }

    /// Principal logarithm; requires a nonzero constant term.
    pub fn ln(&self) -> Result<BiJet> {
        let f0 = self.c[0];
        if f0.norm() == 0.0 {
            return Err(LabError::Domain("logarithm of a jet with zero value".into()));
        }
        let u = self.tail().scale(f0.inv());
        let mut out = Self::series(&u, [0.0, 1.0, -0.5, 1.0 / 3.0, -0.25]);
        out.c[0] = f0.ln();
        Ok(out)
    }

    pub fn exp(&self) -> BiJet {
        let u = self.tail();
        Self::series(&u, [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0]).scale(self.c[0].exp())
    }

    /// `f^p` for a real exponent, through `exp(p ln f)`.
    pub fn powf(&self, p: f64) -> Result<BiJet> {
        Ok(self.ln()?.scale(C64::new(p, 0.0)).exp())
    }

    /// Largest `|∂^α∂̄^β f − conj(∂^β∂̄^α f)|` relative to the largest entry;
    /// zero for jets of real-valued functions.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.space.len();
        let scale = self.c.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                worst = worst.max((self.at(a, b) - self.at(b, a).conj()).norm());
            }
        }
        worst / scale
    }
}

/// Reads the log-kernel jets off `ψ = ln κ`.
pub fn log_jets_from_log(psi: &BiJet, kappa: f64) -> LogJets {
    let sp = psi.space().clone();
    let nu = sp.nu();
    let grad = (0..nu).map(|i| psi.derivative(sp.unit(i), 0)).collect();
    let g = CMat::from_fn(nu, nu, |i, j| psi.derivative(sp.unit(i), sp.unit(j)));
    let dg = (0..nu).map(|k| CMat::from_fn(nu, nu, |i, j| psi.derivative(sp.pair(i, k), sp.unit(j)))).collect();
    let ddg = (0..nu)
        .map(|k| (0..nu).map(|l| CMat::from_fn(nu, nu, |i, j| psi.derivative(sp.pair(i, k), sp.pair(j, l)))).collect())
        .collect();
    LogJets { kappa, grad, g, dg, ddg }
}

/// Converts a jet of `κ` into log-kernel jets.
pub fn log_jets_from_kappa(kappa: &BiJet) -> Result<LogJets> {
    let k0 = kappa.value();
    if !(k0.re > 0.0) || k0.im.abs() > 1e-10 * k0.re {
        return Err(LabError::Domain(format!("kernel diagonal value {k0} is not positive")));
    }
    let psi = kappa.ln()?;
    Ok(log_jets_from_log(&psi, k0.re))
}
