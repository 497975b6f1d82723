//! Finite-basis estimators for the extremal quantities `λᵏ, λ, I, M, N, L`.
//!
//! On a product of balls the monomials are orthogonal, so a unit-norm
//! function is a unit coefficient vector `c` over the normalized monomials
//! `e_α`. Each jet of `f = Σ c_α e_α` at `z` is linear in `c`; the
//! constraints `f(z) = 0`, `∂_j f(z) = 0` cut out a subspace. `λᵏ` is the
//! squared norm of a projected vector. The second-order quantities are
//! traces of a small Hermitian matrix over that subspace, i.e. sums over an
//! orthonormal basis of the constrained space; the single-function supremum
//! (its top eigenvalue) is kept alongside as `sup_value`.

use serde::Serialize;

use crate::bergman::{ClosedForm, KernelModel};
use crate::error::{LabError, Result};
use crate::linalg::{cholesky_lower, hermitian_inverse, max_eigenvalue, orthonormal_span, project_out, CMat, CVec};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalQuantity {
    LambdaK(usize),
    Lambda,
    I,
    M,
    N,
    L,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalEstimate {
    pub quantity: ExtremalQuantity,
    pub value: f64,
    pub basis_degree: usize,
    pub constraint_rank: usize,
    /// Largest value over a single unit-norm function; equals `value` for `λᵏ`.
    pub sup_value: f64,
    /// Coefficients of a maximizer in the normalized monomial basis.
    pub maximizer: Vec<C64>,
}

/// Normalized monomials of total degree at most `degree` on a product of balls.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    degree: usize,
    nu: usize,
    exps: Vec<Vec<u32>>,
    inv_norms: Vec<f64>,
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn multi_indices(nu: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; nu]];
    for total in 1..=degree as u32 {
        let mut cur = vec![0u32; nu];
        fill(&mut out, &mut cur, 0, total);
    }
    out
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for a in (0..=left).rev() {
        cur[pos] = a;
        fill(out, cur, pos + 1, left - a);
    }
}

impl MonomialBasis {
    /// Requires a ball or a product of balls.
    pub fn new(model: &ClosedForm, degree: usize) -> Result<Self> {
        let blocks = ball_blocks(model)?;
        let nu: usize = blocks.iter().map(|b| b.0).sum();
        let exps = multi_indices(nu, degree);
        let inv_norms = exps
            .iter()
            .map(|a| {
                let mut off = 0;
                let mut norm2 = 1.0;
                for &(d, rho) in &blocks {
                    let ab = &a[off..off + d];
                    let s: u32 = ab.iter().sum();
                    let afact: f64 = ab.iter().map(|&x| factorial(x)).product();
                    norm2 *= rho.powi(2 * s as i32 + 2 * d as i32) * std::f64::consts::PI.powi(d as i32) * afact
                        / factorial(d as u32 + s);
                    off += d;
                }
                1.0 / norm2.sqrt()
            })
            .collect();
        Ok(MonomialBasis { degree, nu, exps, inv_norms })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// `∂^β e_α(z)` for every `α`, with `β` given as a list of variable indices.
    fn jet(&self, z: &[C64], beta: &[usize]) -> CVec {
        CVec::from_iterator(
            self.len(),
            self.exps.iter().zip(&self.inv_norms).map(|(a, &s)| {
                let mut e = a.clone();
                let mut coef = 1.0;
                for &k in beta {
                    if e[k] == 0 {
                        return C64::new(0.0, 0.0);
                    }
                    coef *= f64::from(e[k]);
                    e[k] -= 1;
                }
                let mut v = C64::new(coef * s, 0.0);
                for (zi, &p) in z.iter().zip(&e) {
                    if p > 0 {
                        v *= zi.powu(p);
                    }
                }
                v
            }),
        )
    }
}

fn ball_blocks(model: &ClosedForm) -> Result<Vec<(usize, f64)>> {
    match model {
        ClosedForm::Ball { dim, radius } => Ok(vec![(*dim, *radius)]),
        ClosedForm::Product(fs) => {
            let mut out = Vec::new();
            for f in fs {
                out.extend(ball_blocks(f)?);
            }
            Ok(out)
        }
        ClosedForm::LeftHalfPlane => Err(LabError::Kind("unbounded factor has no monomial basis".into())),
    }
}

/// Jet vectors of the basis at one point.
struct Jets {
    value: CVec,
    first: Vec<CVec>,
    second: Vec<Vec<CVec>>,
}

impl Jets {
    fn new(basis: &MonomialBasis, z: &[C64]) -> Result<Self> {
        if z.len() != basis.nu {
            return Err(LabError::Dimension { expected: basis.nu, actual: z.len() });
        }
        let nu = basis.nu;
        Ok(Jets {
            value: basis.jet(z, &[]),
            first: (0..nu).map(|k| basis.jet(z, &[k])).collect(),
            second: (0..nu).map(|j| (0..nu).map(|k| basis.jet(z, &[j, k])).collect()).collect(),
        })
    }
}

/// Orthonormal basis of the conjugated constraint vectors, with a rank check.
fn constraint_space(vs: &[&CVec]) -> Result<Vec<CVec>> {
    let conj: Vec<CVec> = vs.iter().map(|v| v.map(|c| c.conj())).collect();
    let u = orthonormal_span(&conj, 1e-10);
    if u.len() < vs.len() {
        return Err(LabError::Rank { rank: u.len(), expected: vs.len() });
    }
    Ok(u)
}

fn second_order_space(j: &Jets) -> Result<Vec<CVec>> {
    let mut vs = vec![&j.value];
    vs.extend(j.first.iter());
    constraint_space(&vs)
}

/// `λᵏ(z)`: `sup |∂_k f(z)|²` subject to `f(z) = 0`, `∂_j f(z) = 0` for `j < k`.
/// The variable index `k` is zero-based.
pub fn estimate_lambda_k(basis: &MonomialBasis, z: &[C64], k: usize) -> Result<ExtremalEstimate> {
    let j = Jets::new(basis, z)?;
    if k >= basis.nu {
        return Err(LabError::Dimension { expected: basis.nu, actual: k + 1 });
    }
    let mut vs = vec![&j.value];
    vs.extend(j.first[..k].iter());
    let u = constraint_space(&vs)?;
    let target = j.first[k].map(|c| c.conj());
    let p = project_out(&u, &target);
    let value = p.norm_squared();
    let maximizer = if value > 0.0 { (&p / C64::new(value.sqrt(), 0.0)).iter().copied().collect() } else { vec![] };
    Ok(ExtremalEstimate {
        quantity: ExtremalQuantity::LambdaK(k),
        value,
        sup_value: value,
        basis_degree: basis.degree,
        constraint_rank: u.len(),
        maximizer,
    })
}

/// `λ = Π_k λᵏ`.
pub fn estimate_lambda(basis: &MonomialBasis, z: &[C64]) -> Result<ExtremalEstimate> {
    let mut value = 1.0;
    for k in 0..basis.nu {
        value *= estimate_lambda_k(basis, z, k)?.value;
    }
    Ok(ExtremalEstimate {
        quantity: ExtremalQuantity::Lambda,
        value,
        sup_value: value,
        basis_degree: basis.degree,
        constraint_rank: basis.nu,
        maximizer: vec![],
    })
}

/// Trace and top eigenpair of `Xᵀ P X̄` where the rows of `X` are the per-basis row vectors.
fn constrained_form(rows: &[CVec], u: &[CVec]) -> (f64, f64, Vec<C64>) {
    let n = rows.len();
    let w = rows[0].len();
    // columns of P X̄
    let cols: Vec<CVec> = (0..w)
        .map(|c| {
            let col = CVec::from_iterator(n, rows.iter().map(|r| r[c].conj()));
            project_out(u, &col)
        })
        .collect();
    // Xᵀ P X̄ = (P X̄)ᵀ conj-free product: entry (a, b) = Σ_α X[α,a] (P X̄)[α,b]
    let m = CMat::from_fn(w, w, |a, b| (0..n).map(|al| rows[al][a] * cols[b][al]).sum());
    let top = max_eigenvalue(&m);
    let trace: f64 = (0..w).map(|a| m[(a, a)].re).sum();
    let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let idx = (0..w).max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap_or(0);
    let y = eig.eigenvectors.column(idx);
    let mut c = CVec::zeros(n);
    for (b, col) in cols.iter().enumerate() {
        c += col * y[b];
    }
    let nc = c.norm();
    let maximizer = if nc > 0.0 { (c / C64::new(nc, 0.0)).iter().copied().collect() } else { vec![] };
    (trace.max(0.0), top.max(0.0), maximizer)
}

/// `I(z; ξ)`: the form `ξ f″(z) Ḡ⁻¹ conj(f″(z)) ξ*` summed over an orthonormal
/// basis of `{f(z) = 0, f′(z) = 0}`.
pub fn estimate_i(basis: &MonomialBasis, km: &dyn KernelModel, z: &[C64], xi: &[C64]) -> Result<ExtremalEstimate> {
    let jets = Jets::new(basis, z)?;
    let g = km.log_jets(z)?.g;
    let (ginv, _) = hermitian_inverse(&g)?;
    let l = cholesky_lower(&ginv.map(|c| c.conj()))?;
    let u = second_order_space(&jets)?;
    let nu = basis.nu;
    let rows: Vec<CVec> = (0..basis.len())
        .map(|al| {
            let h = CMat::from_fn(nu, nu, |a, b| jets.second[a][b][al]);
            let r = CMat::from_row_slice(1, nu, xi) * h * &l;
            CVec::from_iterator(nu, r.iter().copied())
        })
        .collect();
    let (value, sup_value, maximizer) = constrained_form(&rows, &u);
    Ok(ExtremalEstimate {
        quantity: ExtremalQuantity::I,
        value,
        sup_value,
        basis_degree: basis.degree,
        constraint_rank: u.len(),
        maximizer,
    })
}

/// `L(z)`: the form `tr(f″ Ḡ⁻¹ conj(f″) G⁻¹)` summed the same way.
pub fn estimate_l(basis: &MonomialBasis, km: &dyn KernelModel, z: &[C64]) -> Result<ExtremalEstimate> {
    let jets = Jets::new(basis, z)?;
    let g = km.log_jets(z)?.g;
    let (ginv, _) = hermitian_inverse(&g)?;
    let l2 = cholesky_lower(&ginv)?;
    let l2_adj = l2.adjoint();
    let l2_bar = l2.map(|c| c.conj());
    let u = second_order_space(&jets)?;
    let nu = basis.nu;
    let rows: Vec<CVec> = (0..basis.len())
        .map(|al| {
            let h = CMat::from_fn(nu, nu, |a, b| jets.second[a][b][al]);
            let m = &l2_adj * h * &l2_bar;
            CVec::from_iterator(nu * nu, m.iter().copied())
        })
        .collect();
    let (value, sup_value, maximizer) = constrained_form(&rows, &u);
    Ok(ExtremalEstimate {
        quantity: ExtremalQuantity::L,
        value,
        sup_value,
        basis_degree: basis.degree,
        constraint_rank: u.len(),
        maximizer,
    })
}

/// `M = κ^{ν−1} det G · I`, i.e. `I` with `Ḡ⁻¹` replaced by `κ^{ν−1} adj Ḡ`.
pub fn estimate_m(basis: &MonomialBasis, km: &dyn KernelModel, z: &[C64], xi: &[C64]) -> Result<ExtremalEstimate> {
    let i = estimate_i(basis, km, z, xi)?;
    let jets = km.log_jets(z)?;
    let (_, det) = hermitian_inverse(&jets.g)?;
    let scale = jets.kappa.powi(basis.nu as i32 - 1) * det;
    Ok(ExtremalEstimate { quantity: ExtremalQuantity::M, value: scale * i.value, sup_value: scale * i.sup_value, ..i })
}

/// `N = κ^{2ν−1} det G · L`.
pub fn estimate_n(basis: &MonomialBasis, km: &dyn KernelModel, z: &[C64]) -> Result<ExtremalEstimate> {
    let l = estimate_l(basis, km, z)?;
    let jets = km.log_jets(z)?;
    let (_, det) = hermitian_inverse(&jets.g)?;
    let scale = jets.kappa.powi(2 * basis.nu as i32 - 1) * det;
    Ok(ExtremalEstimate { quantity: ExtremalQuantity::N, value: scale * l.value, sup_value: scale * l.sup_value, ..l })
}

/// `(M, N, L)` at one point.
pub fn estimate_m_n_l(
    basis: &MonomialBasis,
    km: &dyn KernelModel,
    z: &[C64],
    xi: &[C64],
) -> Result<(ExtremalEstimate, ExtremalEstimate, ExtremalEstimate)> {
    Ok((estimate_m(basis, km, z, xi)?, estimate_n(basis, km, z)?, estimate_l(basis, km, z)?))
}

/// The invariants recovered from the extremal quantities next to their direct values.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityCheck {
    pub j_direct: f64,
    pub j_from_lambda: f64,
    pub r_direct: f64,
    pub r_from_i: f64,
    pub s_direct: f64,
    pub s_from_l: f64,
    pub i_from_m: f64,
    pub i: f64,
}

impl IdentityCheck {
    /// Largest relative residual over the four identities.
    pub fn max_residual(&self) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        rel(self.j_from_lambda, self.j_direct)
            .max(rel(self.r_from_i, self.r_direct))
            .max(rel(self.s_from_l, self.s_direct))
            .max(rel(self.i_from_m, self.i))
    }
}

/// `J = λ/κ^{ν+1}`, `R = (ν+1) − I/(B²κ)`, `S = ν(ν+1) − L/κ`, `I = M/(κ^ν J)`.
pub fn identity_check(basis: &MonomialBasis, km: &dyn KernelModel, z: &[C64], xi: &[C64]) -> Result<IdentityCheck> {
    let rep = crate::bergman::metric_report(km, z, xi)?;
    let nu = basis.nu as f64;
    let lambda = estimate_lambda(basis, z)?.value;
    let i = estimate_i(basis, km, z, xi)?.value;
    let (m, _, l) = estimate_m_n_l(basis, km, z, xi)?;
    Ok(IdentityCheck {
        j_direct: rep.j_invariant,
        j_from_lambda: lambda / rep.kappa.powf(nu + 1.0),
        r_direct: rep.ricci,
        r_from_i: nu + 1.0 - i / (rep.b * rep.b * rep.kappa),
        s_direct: rep.scalar,
        s_from_l: nu * (nu + 1.0) - l.value / rep.kappa,
        i_from_m: m.value / (rep.kappa.powf(nu) * rep.j_invariant),
        i,
    })
}
