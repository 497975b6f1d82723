//! The bordered Monge–Ampère operator.

use crate::linalg::CMat;
use crate::C64;

use super::LogJets;

/// Value, gradient `u_j = ∂_j u` and complex Hessian `u_{jk̄}` of a real function.
#[derive(Debug, Clone)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: Vec<C64>,
    pub hess: CMat,
}

impl ScalarJet {
    pub fn scale(&self, c: f64) -> ScalarJet {
        ScalarJet {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
            hess: &self.hess * C64::new(c, 0.0),
        }
    }
}

/// `(−1)^ν det [[u, u_k̄], [u_j, u_{jk̄}]]`.
pub fn monge_ampere(u: &ScalarJet) -> f64 {
    let nu = u.grad.len();
    let mut m = CMat::zeros(nu + 1, nu + 1);
    m[(0, 0)] = C64::new(u.value, 0.0);
    for k in 0..nu {
        m[(0, k + 1)] = u.grad[k].conj();
        m[(k + 1, 0)] = u.grad[k];
        for j in 0..nu {
            m[(j + 1, k + 1)] = u.hess[(j, k)];
        }
    }
    let sign = if nu.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * m.determinant().re
}

/// Jets of `u = κ^{−1/(ν+1)}` from the log-kernel jets.
pub fn ramadanov_jet(j: &LogJets) -> ScalarJet {
    let nu = j.nu();
    let p = 1.0 / (nu as f64 + 1.0);
    let u = j.kappa.powf(-p);
    let grad: Vec<C64> = j.grad.iter().map(|g| g * (-u * p)).collect();
    let hess = CMat::from_fn(nu, nu, |a, b| (j.grad[a] * j.grad[b].conj() * (p * p) - j.g[(a, b)] * p) * u);
    ScalarJet { value: u, grad, hess }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::{metric_report, ClosedForm, KernelModel};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ball_defining(z: &[C64]) -> ScalarJet {
        let n = z.len();
        ScalarJet {
            value: 1.0 - z.iter().map(|c| c.norm_sqr()).sum::<f64>(),
            grad: z.iter().map(|c| -c.conj()).collect(),
            hess: -CMat::identity(n, n),
        }
    }

    #[test]
    fn ball_defining_function_solves_the_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            for _ in 0..5 {
                let z: Vec<C64> =
                    (0..n).map(|_| C64::new(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4))).collect();
                assert_relative_eq!(monge_ampere(&ball_defining(&z)), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn homogeneity() {
        let z = [C64::new(0.2, 0.1), C64::new(-0.3, 0.05)];
        let u = ball_defining(&z);
        assert_relative_eq!(monge_ampere(&u.scale(1.7)), 1.7f64.powi(3) * monge_ampere(&u), max_relative = 1e-13);
    }

    #[test]
    fn ramadanov_at_ball_center() {
        for nu in 1..=4 {
            let f = ClosedForm::ball(nu);
            let z = vec![C64::new(0.0, 0.0); nu];
            let fact: f64 = (1..=nu).map(|k| k as f64).product();
            let v = monge_ampere(&ramadanov_jet(&f.log_jets(&z).unwrap()));
            assert_relative_eq!(v, PI.powi(nu as i32) / fact, max_relative = 1e-13);
            let mut xi = vec![C64::new(0.0, 0.0); nu];
            xi[0] = C64::new(1.0, 0.0);
            let j = metric_report(&f, &z, &xi).unwrap().j_invariant;
            assert_relative_eq!(v, j / ((nu + 1) as f64).powi(nu as i32), max_relative = 1e-13);
        }
    }
}
