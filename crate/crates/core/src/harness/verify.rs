//! Self-check suites behind `lab verify`.

use serde::Serialize;

use crate::bergman::monge_ampere::{monge_ampere, ramadanov_jet, ScalarJet};
use crate::bergman::{metric_report, product_j_target, ClosedForm, KernelModel};
use crate::error::Result;
use crate::extremal::{identity_check, MonomialBasis};
use crate::frames::{build_frame, certify_inclusions, DEFAULT_DELTA0};
use crate::geometry::{ConeCurve, ModelDomain};
use crate::hartogs::{kernel_jets, GramConfig, GramEngine, HalfDiscOracle, HartogsKernel, SpectralEngine};
use crate::kobayashi::{kobayashi_product, squeeze_bracket};
use crate::linalg::CMat;
use crate::numeric::halton::Halton;
use crate::profile::Profile;
use crate::C64;

use super::config::SweepConfig;
use super::sweep::{drifts_toward, run_sweep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    Fast,
    Full,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub level: VerifyLevel,
    /// Engine used by the Gram oracle suite.
    pub gram: GramConfig,
    /// Halton samples per inclusion test.
    pub samples: usize,
}

impl VerifyOptions {
    pub fn new(level: VerifyLevel) -> Self {
        VerifyOptions { level, gram: GramConfig { kmax: 12, ..GramConfig::default() }, samples: 4000 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl SuiteResult {
    fn from_error(name: &str, tol: f64, err: f64, detail: String) -> Self {
        SuiteResult { name: name.into(), passed: err <= tol, max_error: err, tolerance: tol, detail }
    }

    fn failed(name: &str, tol: f64, detail: String) -> Self {
        SuiteResult { name: name.into(), passed: false, max_error: f64::NAN, tolerance: tol, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub level: VerifyLevel,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// `k` complex vectors in `ℂ^dim` with entries in the unit square.
pub fn halton_vectors(dim: usize, k: usize, skip: u64) -> Vec<Vec<C64>> {
    let mut h = Halton::new(2 * dim, skip);
    (0..k).map(|_| h.next_point().chunks(2).map(|p| C64::new(2.0 * p[0] - 1.0, 2.0 * p[1] - 1.0)).collect()).collect()
}

/// `k` points of the ball of radius `r` in `ℂ^dim`.
pub fn halton_ball_points(dim: usize, k: usize, r: f64, skip: u64) -> Vec<Vec<C64>> {
    let mut h = Halton::new(2 * dim, skip);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let z: Vec<C64> = h.next_point().chunks(2).map(|p| C64::new(2.0 * p[0] - 1.0, 2.0 * p[1] - 1.0) * r).collect();
        if z.iter().map(|c| c.norm_sqr()).sum::<f64>() < r * r {
            out.push(z);
        }
    }
    out
}

/// Interior points of the product `𝔻 × Bₙ` with both factors inside radius `r`.
pub fn halton_product_points(n: usize, k: usize, r: f64, skip: u64) -> Vec<Vec<C64>> {
    halton_ball_points(1, 4 * k + 8, r, skip)
        .into_iter()
        .zip(halton_ball_points(n, 4 * k + 8, r, skip + 1000))
        .map(|(a, b)| a.into_iter().chain(b).collect())
        .take(k)
        .collect()
}

/// `J`, `R`, `S`, `M^F` and `M^K` of `𝔻 × Bₙ` at the origin against their closed values.
pub fn suite_closed_form() -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let model = ClosedForm::product_disc_ball(n);
        let z = vec![C64::new(0.0, 0.0); n + 1];
        for xi in halton_vectors(n + 1, 10, 17) {
            let rep = metric_report(&model, &z, &xi)?;
            let x1 = xi[0].norm_sqr();
            let xr: f64 = xi[1..].iter().map(|c| c.norm_sqr()).sum();
            let mf = ((n + 3) as f64).sqrt() * (2.0 * x1 + (n + 1) as f64 * xr).sqrt();
            let mk = xi[0].norm().max(xr.sqrt());
            worst = worst
                .max(rel(rep.j_invariant, product_j_target(n)))
                .max(rel(rep.ricci, -1.0))
                .max(rel(rep.scalar, -((n + 1) as f64)))
                .max(rel(rep.kf, mf))
                .max(rel(kobayashi_product(&xi), mk));
        }
    }
    Ok(SuiteResult::from_error("closed-form", 1e-12, worst, "product 𝔻 × Bₙ at 0, n = 1..4".into()))
}

fn ball_defining(z: &[C64]) -> ScalarJet {
    let n = z.len();
    ScalarJet {
        value: 1.0 - z.iter().map(|c| c.norm_sqr()).sum::<f64>(),
        grad: z.iter().map(|c| -c.conj()).collect(),
        hess: -CMat::identity(n, n),
    }
}

/// Bordered Monge–Ampère of the ball defining function and of `κ^{−1/(ν+1)}`.
pub fn suite_monge_ampere() -> Result<SuiteResult> {
    let mut unit: f64 = 0.0;
    for z in halton_ball_points(3, 20, 0.95, 3) {
        unit = unit.max((monge_ampere(&ball_defining(&z)) - 1.0).abs());
    }
    let mut ram: f64 = 0.0;
    let models = [
        (ClosedForm::disc(), halton_ball_points(1, 10, 0.9, 5)),
        (ClosedForm::ball(3), halton_ball_points(3, 10, 0.9, 7)),
        (ClosedForm::product_disc_ball(2), halton_product_points(2, 10, 0.9, 11)),
    ];
    for (model, pts) in &models {
        let nu = model.dim() as f64;
        for z in pts {
            let jets = model.log_jets(z)?;
            let rep = crate::bergman::report_from_jets(&jets, &vec![C64::new(0.0, 0.0); z.len()])?;
            let target = (nu + 1.0).powf(-nu) * rep.j_invariant;
            ram = ram.max(rel(monge_ampere(&ramadanov_jet(&jets)), target));
        }
    }
    let detail = format!("defining function max |𝒥 − 1| = {unit:.2e}; Ramadanov max rel = {ram:.2e}");
    Ok(SuiteResult {
        name: "monge-ampere".into(),
        passed: unit <= 1e-10 && ram <= 1e-8,
        max_error: ram.max(unit),
        tolerance: 1e-8,
        detail,
    })
}

/// Extremal identities on the disc and the ball `B₂`.
pub fn suite_extremal() -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    let disc = ClosedForm::disc();
    let ball = ClosedForm::ball(2);
    let cases: [(&ClosedForm, usize, Vec<C64>, Vec<C64>); 3] = [
        (&disc, 8, vec![C64::new(0.0, 0.0)], vec![C64::new(0.6, -0.8)]),
        (&ball, 8, vec![C64::new(0.0, 0.0); 2], vec![C64::new(1.0, 0.0), C64::new(0.3, 0.2)]),
        (&ball, 16, vec![C64::new(0.2, -0.1), C64::new(0.05, 0.15)], vec![C64::new(0.3, 0.4), C64::new(-0.7, 0.2)]),
    ];
    for (model, deg, z, xi) in &cases {
        let basis = MonomialBasis::new(model, *deg)?;
        worst = worst.max(identity_check(&basis, *model, z, xi)?.max_residual());
    }
    Ok(SuiteResult::from_error(
        "extremal-identities",
        1e-6,
        worst,
        "disc and B₂, degree 8 at 0 and 16 off-center".into(),
    ))
}

/// Bracket at `(ε, δ) = (0.1, 0.05)`, `m = 1`, `d = e⁻¹⁰⁰` inside `[0.90, 1.06]` and containing 1.
pub fn suite_bracket(samples: usize) -> Result<SuiteResult> {
    let dom = ModelDomain::hartogs_flat(Profile::exp_inverse(1)?, 1, 1.0, 1.0)?;
    let frame = build_frame(&dom, &ConeCurve::normal(1), (-100.0f64).exp(), DEFAULT_DELTA0)?;
    let cert = certify_inclusions(&frame, 0.1, 0.05, samples)?;
    if !cert.certified() {
        return Ok(SuiteResult::failed("kobayashi-bracket", 0.0, format!("not certified: {:?}", cert.counterexamples)));
    }
    let b = squeeze_bracket(&frame, 0.1, 0.05, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &cert)?;
    let ok = b.contains_one() && b.lower_ratio >= 0.90 && b.upper_ratio <= 1.06;
    Ok(SuiteResult {
        name: "kobayashi-bracket".into(),
        passed: ok,
        max_error: (0.90 - b.lower_ratio).max(b.upper_ratio - 1.06).max(0.0),
        tolerance: 0.0,
        detail: format!("[{:.6}, {:.6}]", b.lower_ratio, b.upper_ratio),
    })
}

/// Normal-curve `d*` against `√φ⁻¹(t)`.
pub fn suite_tangential_normalizer() -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    for m in [1, 2] {
        let p = Profile::exp_inverse(m)?;
        let dom = ModelDomain::hartogs_flat(p.clone(), 1, 1.0, 1.0)?;
        for k in 1..=10 {
            let ln_t = -20.0 * k as f64;
            let frame = build_frame(&dom, &ConeCurve::normal(1), ln_t.exp(), DEFAULT_DELTA0)?;
            worst = worst.max(rel(frame.dstar, p.inverse_ln(ln_t)?.sqrt()));
        }
    }
    Ok(SuiteResult::from_error("tangential-normalizer", 1e-10, worst, "m = 1, 2; ln t = −20 … −200".into()))
}

pub const PRODUCT_SWEEP: &str = r#"
[profile]
m = 1

[domain]
kind = "product-disc-ball"
n = 2

[sweep]
regime = "product"
ln_t = [-20.0, -40.0, -60.0]
epsilon = [0.1]
delta = [0.05]
xi = [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]], [[0.3, -0.2], [0.5, 0.1], [-0.4, 0.6]]]
"#;

/// Degenerate sweep on `𝔻 × B₂` where every normalized target is exact.
pub fn suite_product_sweep() -> Result<SuiteResult> {
    let cfg = SweepConfig::from_toml_str(PRODUCT_SWEEP)?;
    let out = run_sweep(&cfg)?;
    let mut worst: f64 = 0.0;
    for r in &out.rows {
        if !r.error.is_empty() {
            return Ok(SuiteResult::failed("product-sweep", 1e-12, r.error.clone()));
        }
        worst = worst
            .max(rel(r.j_ratio, 1.0))
            .max(rel(r.ricci, -1.0))
            .max(rel(r.scalar, -3.0))
            .max(rel(r.mf_ratio, 1.0))
            .max(rel(r.mk_lower_ratio, 1.0))
            .max(rel(r.mk_upper_ratio, 1.0));
    }
    Ok(SuiteResult::from_error("product-sweep", 1e-12, worst, format!("{} rows", out.rows.len())))
}

pub const TREND_LN_D: [f64; 4] = [-6.0, -10.0, -14.0, -20.0];

/// `J/J(𝔻 × B₁)` of the Hartogs model along `(−d, 0)` from the spectral engine.
pub fn spectral_j_ratios(m: u32) -> Result<Vec<f64>> {
    let km = HartogsKernel { engine: SpectralEngine::new(Profile::exp_inverse(m)?, 1.0, 4)? };
    let xi = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    TREND_LN_D
        .iter()
        .map(|&ln_d| {
            let z = [C64::new(-ln_d.exp(), 0.0), C64::new(0.0, 0.0)];
            Ok(metric_report(&km, &z, &xi)?.j_invariant / product_j_target(1))
        })
        .collect()
}

pub fn suite_spectral_trend() -> Result<SuiteResult> {
    let r = spectral_j_ratios(1)?;
    let ok = drifts_toward(&r, 1.0) == Some(true);
    Ok(SuiteResult {
        name: "spectral-j-trend".into(),
        passed: ok,
        max_error: (r[r.len() - 1] - 1.0).abs(),
        tolerance: f64::NAN,
        detail: format!("J ratios {r:?} at ln d = {TREND_LN_D:?}"),
    })
}

/// Base points of the oracle suite, near the center of the Arnoldi expansion.
pub const ORACLE_POINTS: [[f64; 4]; 3] = [[-0.5, 0.3, 0.1, 0.0], [-0.5, 0.0, 0.3, 0.0], [-0.55, -0.15, 0.1, 0.1]];

/// Relative errors `(κ, G)` of a flat Gram engine against the half-disc oracle at `z`.
pub fn oracle_errors(eng: &GramEngine, oracle: &HalfDiscOracle, z: &[C64]) -> Result<(f64, f64)> {
    let (jets, _) = kernel_jets(eng, z)?;
    let kappa = oracle.kappa(z)?;
    let (g11, g22) = oracle.metric(z)?;
    let ek = rel(jets.kappa, kappa);
    let eg =
        rel(jets.g[(0, 0)].re, g11).max(rel(jets.g[(1, 1)].re, g22)).max(jets.g[(0, 1)].norm() / (g11 * g22).sqrt());
    Ok((ek, eg))
}

/// Flat Gram engine against the closed-form half-disc product.
pub fn suite_gram_oracle(cfg: GramConfig) -> Result<SuiteResult> {
    let flat = GramConfig { force_flat_profile: true, ..cfg };
    let oracle = HalfDiscOracle { r1: 1.0, r2: 1.0 };
    let eng = GramEngine::new(Profile::exp_inverse(1)?, 1.0, 1.0, flat)?;
    let (mut ek, mut eg) = (0.0f64, 0.0f64);
    for p in ORACLE_POINTS {
        let z = [C64::new(p[0], p[1]), C64::new(p[2], p[3])];
        let (a, b) = oracle_errors(&eng, &oracle, &z)?;
        ek = ek.max(a);
        eg = eg.max(b);
    }
    let passed = ek <= 1e-6 && eg <= 1e-5;
    let mut detail = format!("Dmax = {}, kmax = {}: κ rel {ek:.2e}, G rel {eg:.2e}", cfg.dmax, cfg.kmax);
    if !passed {
        detail =
            format!("TruncationWarning: polynomial degree Dmax = {} does not resolve the kernel; {detail}", cfg.dmax);
    }
    Ok(SuiteResult { name: "gram-oracle".into(), passed, max_error: ek.max(eg / 10.0), tolerance: 1e-6, detail })
}

fn guarded(name: &str, r: Result<SuiteResult>) -> SuiteResult {
    r.unwrap_or_else(|e| SuiteResult::failed(name, f64::NAN, e.to_string()))
}

/// Runs the suites of `opts.level`; `fast` leaves out the numerical-kernel suites.
pub fn verify_all(opts: &VerifyOptions) -> VerifyReport {
    let mut suites = vec![
        guarded("closed-form", suite_closed_form()),
        guarded("monge-ampere", suite_monge_ampere()),
        guarded("extremal-identities", suite_extremal()),
        guarded("kobayashi-bracket", suite_bracket(opts.samples)),
        guarded("tangential-normalizer", suite_tangential_normalizer()),
        guarded("product-sweep", suite_product_sweep()),
    ];
    if opts.level == VerifyLevel::Full {
        suites.push(guarded("spectral-j-trend", suite_spectral_trend()));
        suites.push(guarded("gram-oracle", suite_gram_oracle(opts.gram)));
    }
    VerifyReport { level: opts.level, passed: suites.iter().all(|s| s.passed), suites }
}
