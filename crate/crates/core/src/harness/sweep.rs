//! Row-parallel sweeps along a cone curve.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::bergman::{metric_report, product_j_target, ClosedForm, KernelModel, MetricReport};
use crate::error::{LabError, Result};
use crate::frames::{build_frame, certify_inclusions_multi, InclusionReport, NormalizationFrame};
use crate::hartogs::{kernel_jets, GramEngine, JetDiagnostics, ModeEngine, SpectralEngine};
use crate::kobayashi::{kobayashi_product, squeeze_bracket};
use crate::C64;

use super::config::{EngineKind, QuantityKind, Regime, SweepConfig};

/// Frozen CSV column order.
pub const COLUMNS: [&str; 29] = [
    "regime",
    "t",
    "ln_d",
    "epsilon",
    "delta",
    "xi_index",
    "xi_normal",
    "xi_tangent",
    "d",
    "dstar",
    "tangential_normalizer",
    "kappa",
    "det_g",
    "j",
    "j_ratio",
    "ricci",
    "scalar",
    "mf",
    "mf_ratio",
    "mk_center",
    "mk_lower_ratio",
    "mk_upper_ratio",
    "loc_factor",
    "certified",
    "frac_inner",
    "frac_outer",
    "modes_used",
    "mode_tail",
    "error",
];

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub regime: Regime,
    pub t: f64,
    pub ln_d: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub xi_index: usize,
    pub xi_normal: f64,
    pub xi_tangent: f64,
    pub d: f64,
    pub dstar: f64,
    /// `√φ⁻¹(t)`.
    pub tangential_normalizer: f64,
    pub kappa: f64,
    pub det_g: f64,
    pub j: f64,
    pub j_ratio: f64,
    pub ricci: f64,
    pub scalar: f64,
    pub mf: f64,
    pub mf_ratio: f64,
    pub mk_center: f64,
    pub mk_lower_ratio: f64,
    pub mk_upper_ratio: f64,
    pub loc_factor: f64,
    pub certified: bool,
    pub frac_inner: f64,
    pub frac_outer: f64,
    pub modes_used: usize,
    pub mode_tail: f64,
    /// Empty when the row is complete; otherwise the first error met.
    pub error: String,
}

impl SweepRow {
    fn blank(regime: Regime, t: f64, epsilon: f64, delta: f64, xi_index: usize) -> Self {
        let nan = f64::NAN;
        SweepRow {
            regime,
            t,
            ln_d: nan,
            epsilon,
            delta,
            xi_index,
            xi_normal: nan,
            xi_tangent: nan,
            d: nan,
            dstar: nan,
            tangential_normalizer: nan,
            kappa: nan,
            det_g: nan,
            j: nan,
            j_ratio: nan,
            ricci: nan,
            scalar: nan,
            mf: nan,
            mf_ratio: nan,
            mk_center: nan,
            mk_lower_ratio: nan,
            mk_upper_ratio: nan,
            loc_factor: nan,
            certified: false,
            frac_inner: nan,
            frac_outer: nan,
            modes_used: 0,
            mode_tail: nan,
            error: String::new(),
        }
    }

    fn note(&mut self, e: &LabError) {
        if self.error.is_empty() {
            self.error = e.to_string();
        }
    }

    fn fields(&self) -> Vec<String> {
        let f = |x: f64| format!("{x:.16e}");
        let regime = match self.regime {
            Regime::Bracket => "bracket",
            Regime::Kernel => "kernel",
            Regime::Product => "product",
        };
        vec![
            regime.to_string(),
            f(self.t),
            f(self.ln_d),
            f(self.epsilon),
            f(self.delta),
            self.xi_index.to_string(),
            f(self.xi_normal),
            f(self.xi_tangent),
            f(self.d),
            f(self.dstar),
            f(self.tangential_normalizer),
            f(self.kappa),
            f(self.det_g),
            f(self.j),
            f(self.j_ratio),
            f(self.ricci),
            f(self.scalar),
            f(self.mf),
            f(self.mf_ratio),
            f(self.mk_center),
            f(self.mk_lower_ratio),
            f(self.mk_upper_ratio),
            f(self.loc_factor),
            self.certified.to_string(),
            f(self.frac_inner),
            f(self.frac_outer),
            self.modes_used.to_string(),
            f(self.mode_tail),
            self.error.clone(),
        ]
    }
}

/// Last-three-point behaviour of one quantity along the `t` grid.
#[derive(Debug, Clone, Serialize)]
pub struct TrendStat {
    pub quantity: String,
    pub epsilon: f64,
    pub delta: f64,
    pub xi_index: usize,
    pub target: f64,
    pub last_three: Vec<f64>,
    /// Last value minus the value two grid points earlier.
    pub drift: f64,
    /// Distance to the target never grows by more than 2% of the target scale.
    pub toward_target: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub error_rows: usize,
    pub certified_rows: usize,
    pub bracket_contains_one: usize,
    pub all_brackets_contain_one: bool,
    pub trends: Vec<TrendStat>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

/// Noise band of the trend check, relative to `max(1, |target|)`.
pub const TREND_BAND: f64 = 0.02;

/// Whether the distances of the last three values to `target` shrink up to the band.
pub fn drifts_toward(values: &[f64], target: f64) -> Option<bool> {
    if values.len() < 3 {
        return None;
    }
    let band = TREND_BAND * target.abs().max(1.0);
    let e: Vec<f64> = values[values.len() - 3..].iter().map(|v| (v - target).abs()).collect();
    Some(e[1] <= e[0] + band && e[2] <= e[1] + band)
}

type KernelRow = (MetricReport, Option<JetDiagnostics>);

enum Kernel {
    None,
    Closed(ClosedForm),
    Spectral(SpectralEngine),
    Gram(Box<GramEngine>),
}

impl Kernel {
    fn build(cfg: &SweepConfig) -> Result<Kernel> {
        if !cfg.wants_kernel() {
            return Ok(Kernel::None);
        }
        match cfg.sweep.regime {
            Regime::Bracket => Ok(Kernel::None),
            Regime::Product => Ok(Kernel::Closed(ClosedForm::product_disc_ball(cfg.domain.n))),
            Regime::Kernel => {
                let p = cfg.profile_obj()?;
                match cfg.engine.kind {
                    EngineKind::Spectral => {
                        Ok(Kernel::Spectral(SpectralEngine::new(p, cfg.domain.r2, cfg.engine.kmax)?))
                    }
                    EngineKind::Gram => {
                        Ok(Kernel::Gram(Box::new(GramEngine::new(p, cfg.domain.r1, cfg.domain.r2, cfg.engine.gram)?)))
                    }
                }
            }
        }
    }

    fn report(&self, z: &[C64], xi: &[C64]) -> Option<Result<KernelRow>> {
        let from_modes = |e: &dyn ModeEngine| -> Result<KernelRow> {
            let (jets, diag) = kernel_jets(e, z)?;
            Ok((crate::bergman::report_from_jets(&jets, xi)?, Some(diag)))
        };
        match self {
            Kernel::None => None,
            Kernel::Closed(c) => Some(metric_report(c as &dyn KernelModel, z, xi).map(|r| (r, None))),
            Kernel::Spectral(e) => Some(from_modes(e)),
            Kernel::Gram(e) => Some(from_modes(e.as_ref())),
        }
    }
}

fn fill_kernel(row: &mut SweepRow, rep: &MetricReport, diag: Option<JetDiagnostics>, n: usize) {
    row.kappa = rep.kappa;
    row.det_g = rep.det_g;
    row.j = rep.j_invariant;
    row.j_ratio = rep.j_invariant / product_j_target(n);
    row.ricci = rep.ricci;
    row.scalar = rep.scalar;
    row.mf = rep.kf;
    // √(|ξ_N|²/2d² + (n+1)|ξ_T|²/d*²), formed from ratios to avoid overflow
    let a = row.xi_normal / (std::f64::consts::SQRT_2 * row.d);
    let b = ((n + 1) as f64).sqrt() * row.xi_tangent / row.dstar;
    let norm = a.hypot(b);
    row.mf_ratio = rep.kf / norm / ((n + 3) as f64).sqrt();
    if let Some(d) = diag {
        row.modes_used = d.modes_used;
        row.mode_tail = d.tail;
        if d.truncation_warning && row.error.is_empty() {
            row.error = format!("mode truncation warning: tail {:.3e}", d.tail);
        }
    }
}

fn product_rows(cfg: &SweepConfig, kernel: &Kernel, ln_t: f64) -> Vec<SweepRow> {
    let n = cfg.domain.n;
    let z = vec![C64::new(0.0, 0.0); n + 1];
    let mut rows = Vec::new();
    for &eps in &cfg.sweep.epsilon {
        for &delta in &cfg.sweep.delta {
            for (ix, xi) in cfg.xi_vectors().iter().enumerate() {
                let mut row = SweepRow::blank(Regime::Product, ln_t.exp(), eps, delta, ix);
                // the origin of 𝔻 × Bₙ is the Cayley image of (−1/2, 0) in the half-plane model
                row.d = 0.5;
                row.ln_d = 0.5f64.ln();
                row.dstar = 1.0;
                row.xi_normal = xi[0].norm();
                row.xi_tangent = xi[1..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if let Some(res) = kernel.report(&z, xi) {
                    match res {
                        Ok((rep, diag)) => fill_kernel(&mut row, &rep, diag, n),
                        Err(e) => row.note(&e),
                    }
                }
                if cfg.wants(QuantityKind::MK) {
                    let center = (row.xi_normal / (2.0 * row.d)).max(row.xi_tangent / row.dstar);
                    row.mk_center = center;
                    row.mk_lower_ratio = kobayashi_product(xi) / center;
                    row.mk_upper_ratio = row.mk_lower_ratio;
                    row.loc_factor = 1.0;
                    row.certified = true;
                    row.frac_inner = 1.0;
                    row.frac_outer = 1.0;
                }
                rows.push(row);
            }
        }
    }
    rows
}

fn frame_rows(cfg: &SweepConfig, kernel: &Kernel, ln_t: f64) -> Vec<SweepRow> {
    let n = cfg.domain.n;
    let t = ln_t.exp();
    let xis = cfg.xi_vectors();
    let combos: Vec<(f64, f64)> =
        cfg.sweep.epsilon.iter().flat_map(|&e| cfg.sweep.delta.iter().map(move |&d| (e, d))).collect();
    let blank_all = |err: &LabError| -> Vec<SweepRow> {
        combos
            .iter()
            .flat_map(|&(e, d)| {
                (0..xis.len()).map(move |ix| {
                    let mut r = SweepRow::blank(cfg.sweep.regime, t, e, d, ix);
                    r.note(err);
                    r
                })
            })
            .collect()
    };
    let frame = match cfg.model_domain().and_then(|dom| build_frame(&dom, &cfg.curve()?, t, cfg.sweep.delta0)) {
        Ok(f) => f,
        Err(e) => return blank_all(&e),
    };
    let tangential = cfg.profile_obj().and_then(|p| p.inverse_ln(ln_t)).map(f64::sqrt).unwrap_or(f64::NAN);
    let reports: Vec<Option<Result<KernelRow>>> = xis.iter().map(|xi| kernel.report(&frame.q, xi)).collect();
    // ε-major, matching `combos`
    let certs: Vec<Option<Result<InclusionReport>>> = if cfg.wants(QuantityKind::MK) {
        cfg.sweep
            .epsilon
            .iter()
            .flat_map(|&e| match certify_inclusions_multi(&frame, e, &cfg.sweep.delta, cfg.sweep.samples) {
                Ok(v) => v.into_iter().map(|r| Some(Ok(r))).collect::<Vec<_>>(),
                Err(err) => cfg.sweep.delta.iter().map(|_| Some(Err(err.clone()))).collect(),
            })
            .collect()
    } else {
        combos.iter().map(|_| None).collect()
    };
    let mut rows = Vec::new();
    for (ci, &(eps, delta)) in combos.iter().enumerate() {
        for (ix, xi) in xis.iter().enumerate() {
            let mut row = SweepRow::blank(cfg.sweep.regime, t, eps, delta, ix);
            fill_frame(&mut row, &frame, xi, tangential);
            if let Some(res) = &reports[ix] {
                match res {
                    Ok((rep, diag)) => fill_kernel(&mut row, rep, *diag, n),
                    Err(e) => row.note(e),
                }
            }
            if let Some(cert) = &certs[ci] {
                match cert {
                    Ok(c) => {
                        row.certified = c.certified();
                        row.frac_inner = c.frac_inner;
                        row.frac_outer = c.frac_outer;
                        match squeeze_bracket(&frame, eps, delta, xi, c) {
                            Ok(b) => {
                                row.mk_center = b.center;
                                row.mk_lower_ratio = b.lower_ratio;
                                row.mk_upper_ratio = b.upper_ratio;
                                row.loc_factor = b.loc;
                            }
                            Err(e) => row.note(&e),
                        }
                    }
                    Err(e) => row.note(e),
                }
            }
            rows.push(row);
        }
    }
    rows
}

fn fill_frame(row: &mut SweepRow, frame: &NormalizationFrame, xi: &[C64], tangential: f64) {
    row.ln_d = frame.ln_d;
    row.d = frame.d;
    row.dstar = frame.dstar;
    row.tangential_normalizer = tangential;
    match frame.decompose(xi) {
        Ok(dec) => {
            row.xi_normal = dec.norm_normal;
            row.xi_tangent = dec.norm_tangent;
        }
        Err(e) => row.note(&e),
    }
}

fn summarize(cfg: &SweepConfig, rows: &[SweepRow]) -> SweepSummary {
    let n = cfg.domain.n as f64;
    let certified: Vec<&SweepRow> = rows.iter().filter(|r| r.certified && r.mk_lower_ratio.is_finite()).collect();
    let contain = certified.iter().filter(|r| r.mk_lower_ratio <= 1.0 && 1.0 <= r.mk_upper_ratio).count();
    let mut trends = Vec::new();
    type Column = fn(&SweepRow) -> f64;
    let quantities: [(&str, f64, Column); 4] = [
        ("j_ratio", 1.0, |r| r.j_ratio),
        ("ricci", -1.0, |r| r.ricci),
        ("scalar", -(n + 1.0), |r| r.scalar),
        ("mf_ratio", 1.0, |r| r.mf_ratio),
    ];
    for &eps in &cfg.sweep.epsilon {
        for &delta in &cfg.sweep.delta {
            for ix in 0..cfg.sweep.xi.len() {
                let series: Vec<&SweepRow> =
                    rows.iter().filter(|r| r.epsilon == eps && r.delta == delta && r.xi_index == ix).collect();
                for (name, target, get) in quantities {
                    let vals: Vec<f64> = series.iter().map(|r| get(r)).filter(|v| v.is_finite()).collect();
                    if vals.is_empty() {
                        continue;
                    }
                    let tail: Vec<f64> = vals[vals.len().saturating_sub(3)..].to_vec();
                    trends.push(TrendStat {
                        quantity: name.to_string(),
                        epsilon: eps,
                        delta,
                        xi_index: ix,
                        target,
                        drift: tail[tail.len() - 1] - tail[0],
                        toward_target: drifts_toward(&vals, target),
                        last_three: tail,
                    });
                }
            }
        }
    }
    SweepSummary {
        rows: rows.len(),
        error_rows: rows.iter().filter(|r| !r.error.is_empty()).count(),
        certified_rows: certified.len(),
        bracket_contains_one: contain,
        all_brackets_contain_one: contain == certified.len(),
        trends,
    }
}

/// One row per `(t, ε, δ, ξ)`, in grid order. Row failures are recorded in
/// the `error` column; only an invalid config or engine aborts.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let kernel = Kernel::build(cfg)?;
    let rows: Vec<SweepRow> = cfg
        .sweep
        .ln_t
        .par_iter()
        .map(|&ln_t| match cfg.sweep.regime {
            Regime::Product => product_rows(cfg, &kernel, ln_t),
            _ => frame_rows(cfg, &kernel, ln_t),
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let summary = summarize(cfg, &rows);
    Ok(SweepOutput { rows, summary })
}

/// CSV with a header line, `.16e` floats and `\n` line ends.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| LabError::Io(e.to_string());
    w.write_record(COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record(r.fields()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| LabError::Io(e.to_string()))
}

/// Writes the files named in `[output]`.
pub fn write_outputs(cfg: &SweepConfig, out: &SweepOutput) -> Result<()> {
    if let Some(p) = &cfg.output.csv {
        write_csv(&out.rows, create(p)?)?;
    }
    if let Some(p) = &cfg.output.json {
        let text = serde_json::to_string_pretty(&out.summary).map_err(|e| LabError::Io(e.to_string()))?;
        std::fs::write(p, text + "\n")?;
    }
    Ok(())
}

fn create(p: &Path) -> Result<std::fs::File> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::fs::File::create(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_band() {
        assert_eq!(drifts_toward(&[1.5, 1.3], 1.0), None);
        assert_eq!(drifts_toward(&[0.0, 1.5, 1.3, 1.1], 1.0), Some(true));
        assert_eq!(drifts_toward(&[1.1, 1.11, 1.12], 1.0), Some(true));
        assert_eq!(drifts_toward(&[1.1, 1.2, 1.3], 1.0), Some(false));
        assert_eq!(drifts_toward(&[-3.0, -3.1, -3.2], -3.0), Some(false));
    }

    #[test]
    fn header_matches_row_width() {
        let r = SweepRow::blank(Regime::Bracket, 0.5, 0.1, 0.05, 0);
        assert_eq!(r.fields().len(), COLUMNS.len());
        let s = csv_string(&[r]).unwrap();
        assert!(s.starts_with("regime,t,ln_d,"));
        assert!(s.ends_with('\n') && !s.contains('\r'));
        assert!(s.contains("5.0000000000000000e-1"));
    }
}
