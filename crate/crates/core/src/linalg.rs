//! Small dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, Result};
use crate::C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Inverse and determinant of a Hermitian positive definite matrix.
pub fn hermitian_inverse(g: &CMat) -> Result<(CMat, f64)> {
    let chol = g.clone().cholesky().ok_or(LabError::SingularMetric)?;
    let l = chol.l();
    if (0..l.nrows()).any(|i| !(l[(i, i)].re > 0.0) || l[(i, i)].im.abs() > 1e-12 * l[(i, i)].re) {
        return Err(LabError::SingularMetric);
    }
    let det: f64 = (0..l.nrows()).map(|i| l[(i, i)].re.powi(2)).product();
    if !(det.is_finite() && det > 0.0) {
        return Err(LabError::SingularMetric);
    }
    Ok((chol.inverse(), det))
}

/// Lower Cholesky factor `L` with `m = L L*`.
pub fn cholesky_lower(m: &CMat) -> Result<CMat> {
    let l = m.clone().cholesky().ok_or(LabError::SingularMetric)?.l();
    if (0..l.nrows()).any(|i| !(l[(i, i)].re > 0.0) || l[(i, i)].im.abs() > 1e-12 * l[(i, i)].re) {
        return Err(LabError::SingularMetric);
    }
    Ok(l)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(m: &CMat) -> f64 {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    herm.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Orthonormal basis of the span of `vs` by twice-iterated Gram–Schmidt.
///
/// Vectors whose residual norm falls below `tol` times their original norm
/// are treated as dependent and dropped.
pub fn orthonormal_span(vs: &[CVec], tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::with_capacity(vs.len());
    for v in vs {
        let norm0 = v.norm();
        if norm0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w -= q * c;
            }
        }
        let nw = w.norm();
        if nw > tol * norm0 {
            basis.push(w / C64::new(nw, 0.0));
        }
    }
    basis
}

/// Applies `I - U U*` to `v` for orthonormal columns `us`.
pub fn project_out(us: &[CVec], v: &CVec) -> CVec {
    let mut w = v.clone();
    for q in us {
        let c = q.dotc(&w);
        w -= q * c;
    }
    w
}

/// Unitary factor of a QR decomposition with real positive diagonal in `R`.
pub fn unitary_from(a: &CMat) -> CMat {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols().min(r.nrows()) {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / C64::new(d.norm(), 0.0);
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// `‖M M* − I‖_max`.
pub fn unitarity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let p = m * m.adjoint() - CMat::identity(n, n);
    p.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
