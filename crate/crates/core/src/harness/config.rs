//! Sweep configuration read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::frames::DEFAULT_DELTA0;
use crate::geometry::{ConeCurve, ModelDomain, Schedule};
use crate::hartogs::GramConfig;
use crate::profile::Profile;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Frames, certificates and Kobayashi brackets only; `d` down to `e⁻²⁰⁰` and beyond.
    Bracket,
    /// Numerical Hartogs kernel at moderate depth.
    Kernel,
    /// `𝔻 × Bₙ` at the origin, where the scaled domain already is the model.
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantityKind {
    J,
    R,
    S,
    MF,
    MK,
    #[serde(rename = "kernel")]
    Kernel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub m: u32,
    pub epsilon0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKindSpec {
    HartogsFlat,
    ProductDiscBall,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKindSpec,
    /// Fiber dimension; the ambient dimension is `n + 1`.
    pub n: usize,
    #[serde(default = "one")]
    pub r1: f64,
    #[serde(default = "one")]
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub schedule: Schedule,
    pub alpha: f64,
    pub big_n: f64,
    /// Unit direction in `ℂⁿ` as `[re, im]` pairs; defaults to `e₁`.
    pub direction: Option<Vec<[f64; 2]>>,
    pub beta: f64,
}

impl Default for CurveSpec {
    fn default() -> Self {
        CurveSpec { schedule: Schedule::Normal, alpha: 1.0, big_n: 1.0, direction: None, beta: 0.0 }
    }
}

fn default_samples() -> usize {
    10_000
}

fn default_delta0() -> f64 {
    DEFAULT_DELTA0
}

fn default_quantities() -> Vec<QuantityKind> {
    vec![QuantityKind::J, QuantityKind::R, QuantityKind::S, QuantityKind::MF, QuantityKind::MK]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub regime: Regime,
    /// `ln t`, strictly decreasing.
    pub ln_t: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
    /// Tangent vectors as lists of `[re, im]` pairs.
    pub xi: Vec<Vec<[f64; 2]>>,
    #[serde(default = "default_quantities")]
    pub quantities: Vec<QuantityKind>,
    /// Halton samples per inclusion test.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Spectral,
    Gram,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSpec {
    pub kind: EngineKind,
    /// Modes used by the spectral engine.
    pub kmax: usize,
    pub gram: GramConfig,
}

impl Default for EngineSpec {
    fn default() -> Self {
        EngineSpec { kind: EngineKind::Spectral, kmax: 4, gram: GramConfig::default() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub profile: ProfileSpec,
    pub domain: DomainSpec,
    #[serde(default)]
    pub curve: CurveSpec,
    pub sweep: GridSpec,
    #[serde(default)]
    pub engine: EngineSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn to_complex(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|p| C64::new(p[0], p[1])).collect()
}

impl SweepConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(s).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config; relative output paths are resolved against the config's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.output.csv, &mut cfg.output.json].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn nu(&self) -> usize {
        self.domain.n + 1
    }

    pub fn wants(&self, q: QuantityKind) -> bool {
        self.sweep.quantities.contains(&q)
    }

    pub fn wants_kernel(&self) -> bool {
        use QuantityKind::*;
        [J, R, S, MF, Kernel].iter().any(|&q| self.wants(q))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        let g = &self.sweep;
        if self.domain.n == 0 {
            return bad("domain.n must be at least 1".into());
        }
        if g.ln_t.is_empty() {
            return bad("sweep.ln_t is empty".into());
        }
        if g.ln_t.iter().any(|x| !x.is_finite() || *x >= 0.0) {
            return bad("every ln t must be finite and negative".into());
        }
        if g.ln_t.windows(2).any(|w| w[1] >= w[0]) {
            return bad("sweep.ln_t must be strictly decreasing".into());
        }
        for (name, list) in [("epsilon", &g.epsilon), ("delta", &g.delta)] {
            if list.is_empty() {
                return bad(format!("sweep.{name} is empty"));
            }
            if list.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                return bad(format!("every sweep.{name} value must lie in (0, 1)"));
            }
        }
        if g.xi.is_empty() {
            return bad("sweep.xi is empty".into());
        }
        for (i, xi) in g.xi.iter().enumerate() {
            if xi.len() != self.nu() {
                return bad(format!("xi[{i}] has {} entries, expected {}", xi.len(), self.nu()));
            }
            if xi.iter().all(|p| p[0] == 0.0 && p[1] == 0.0) {
                return bad(format!("xi[{i}] is zero"));
            }
        }
        if !(g.delta0 > 0.0) {
            return bad("sweep.delta0 must be positive".into());
        }
        match (g.regime, self.domain.kind) {
            (Regime::Product, DomainKindSpec::ProductDiscBall) => {}
            (Regime::Product, _) => return bad("the product regime needs domain.kind = \"product-disc-ball\"".into()),
            (_, DomainKindSpec::HartogsFlat) => {}
            _ => return bad("bracket and kernel regimes need domain.kind = \"hartogs-flat\"".into()),
        }
        if g.regime == Regime::Kernel && self.domain.n != 1 {
            return bad("the kernel engines are implemented for n = 1 only".into());
        }
        if g.regime != Regime::Product && g.samples == 0 && self.wants(QuantityKind::MK) {
            return bad("sweep.samples must be positive when MK is requested".into());
        }
        self.curve()?;
        self.profile_obj()?;
        Ok(())
    }

    pub fn profile_obj(&self) -> Result<Profile> {
        let p = Profile::exp_inverse(self.profile.m)?;
        match self.profile.epsilon0 {
            Some(e) => p.with_epsilon0(e),
            None => Ok(p),
        }
    }

    pub fn model_domain(&self) -> Result<ModelDomain> {
        match self.domain.kind {
            DomainKindSpec::ProductDiscBall => Ok(ModelDomain::product_disc_ball(self.domain.n)),
            DomainKindSpec::HartogsFlat => {
                ModelDomain::hartogs_flat(self.profile_obj()?, self.domain.n, self.domain.r1, self.domain.r2)
            }
        }
    }

    pub fn curve(&self) -> Result<ConeCurve> {
        let n = self.domain.n;
        let c = &self.curve;
        let dir = match &c.direction {
            Some(d) => to_complex(d),
            None => {
                let mut e = vec![C64::new(0.0, 0.0); n];
                e[0] = C64::new(1.0, 0.0);
                e
            }
        };
        if dir.len() != n {
            return Err(LabError::Config(format!("curve.direction has {} entries, expected {n}", dir.len())));
        }
        Ok(ConeCurve::new(c.alpha, c.big_n, dir, c.schedule)?.with_beta(c.beta))
    }

    pub fn xi_vectors(&self) -> Vec<Vec<C64>> {
        self.sweep.xi.iter().map(|v| to_complex(v)).collect()
    }
}
