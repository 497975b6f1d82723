//! Behaviour of the invariants under biholomorphisms `f : D₁ → D₂`.
//!
//! A quantity of weight `w` satisfies `Q_{D₁}(z) = |det J_ℂ f(z)|^w Q_{D₂}(f(z))`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{CMat, CVec};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Kappa,
    Lambda,
    I,
    L,
    M,
    N,
    J,
    Ricci,
    Scalar,
    KfOverB,
}

impl Quantity {
    /// Exponent of `|det J_ℂ f|` for ambient dimension `ν`.
    pub fn weight(self, nu: usize) -> u32 {
        let nu = nu as u32;
        match self {
            Quantity::Kappa | Quantity::I | Quantity::L => 2,
            Quantity::Lambda | Quantity::M => 2 * (nu + 1),
            Quantity::N => 2 * (2 * nu + 1),
            Quantity::J | Quantity::Ricci | Quantity::Scalar | Quantity::KfOverB => 0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Biholomorphism {
    /// `z ↦ M z + b`.
    Affine { m: CMat, b: CVec },
    /// `z₁ ↦ (1 + z₁)/(1 − z₁)` on the first coordinate; `{Re z₁ < 0} → 𝔻`.
    Cayley { nu: usize },
}

impl Biholomorphism {
    pub fn dilation(nu: usize, c: f64) -> Self {
        Biholomorphism::Affine { m: CMat::identity(nu, nu) * C64::new(c, 0.0), b: CVec::zeros(nu) }
    }

    pub fn nu(&self) -> usize {
        match self {
            Biholomorphism::Affine { m, .. } => m.nrows(),
            Biholomorphism::Cayley { nu } => *nu,
        }
    }

    pub fn apply(&self, z: &[C64]) -> Result<Vec<C64>> {
        if z.len() != self.nu() {
            return Err(LabError::Dimension { expected: self.nu(), actual: z.len() });
        }
        match self {
            Biholomorphism::Affine { m, b } => Ok((m * CVec::from_column_slice(z) + b).iter().copied().collect()),
            Biholomorphism::Cayley { .. } => {
                let den = C64::new(1.0, 0.0) - z[0];
                if den.norm() == 0.0 {
                    return Err(LabError::Pole);
                }
                let mut w = z.to_vec();
                w[0] = (C64::new(1.0, 0.0) + z[0]) / den;
                Ok(w)
            }
        }
    }

    /// Complex Jacobian matrix at `z`.
    pub fn jacobian(&self, z: &[C64]) -> Result<CMat> {
        match self {
            Biholomorphism::Affine { m, .. } => Ok(m.clone()),
            Biholomorphism::Cayley { nu } => {
                let den = C64::new(1.0, 0.0) - z[0];
                if den.norm() == 0.0 {
                    return Err(LabError::Pole);
                }
                let mut j = CMat::identity(*nu, *nu);
                j[(0, 0)] = C64::new(2.0, 0.0) / (den * den);
                Ok(j)
            }
        }
    }

    pub fn jacobian_det_abs(&self, z: &[C64]) -> Result<f64> {
        Ok(self.jacobian(z)?.determinant().norm())
    }
}

/// Pulls `value_at_image = Q_{D₂}(f(z))` back to `Q_{D₁}(z)`.
pub fn transform_under_biholomorphism(
    q: Quantity,
    map: &Biholomorphism,
    z: &[C64],
    value_at_image: f64,
) -> Result<f64> {
    let jd = map.jacobian_det_abs(z)?;
    Ok(jd.powi(q.weight(map.nu()) as i32) * value_at_image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::{metric_report, ClosedForm, KernelModel};
    use crate::linalg::unitary_from;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unitary_maps_preserve_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = ClosedForm::ball(3);
        for _ in 0..20 {
            let a = CMat::from_fn(3, 3, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let u = unitary_from(&a);
            let map = Biholomorphism::Affine { m: u, b: CVec::zeros(3) };
            let z: Vec<C64> = (0..3).map(|_| c(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))).collect();
            let xi: Vec<C64> = (0..3).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let fz = map.apply(&z).unwrap();
            let fxi: Vec<C64> = (map.jacobian(&z).unwrap() * CVec::from_column_slice(&xi)).iter().copied().collect();
            let r1 = metric_report(&f, &z, &xi).unwrap();
            let r2 = metric_report(&f, &fz, &fxi).unwrap();
            for q in [Quantity::Kappa, Quantity::J, Quantity::Ricci] {
                let v2 = match q {
                    Quantity::Kappa => r2.kappa,
                    Quantity::J => r2.j_invariant,
                    _ => r2.ricci,
                };
                let v1 = match q {
                    Quantity::Kappa => r1.kappa,
                    Quantity::J => r1.j_invariant,
                    _ => r1.ricci,
                };
                let back = transform_under_biholomorphism(q, &map, &z, v2).unwrap();
                assert!((back - v1).abs() <= 1e-10 * v1.abs().max(1.0));
            }
        }
    }

    #[test]
    fn dilation_of_the_disc() {
        // z ↦ z/c sends c𝔻 onto 𝔻
        let cc = 2.5;
        let big = ClosedForm::Ball { dim: 1, radius: cc };
        let map = Biholomorphism::dilation(1, 1.0 / cc);
        let z = [c(0.7, -1.1)];
        let fz = map.apply(&z).unwrap();
        let k_disc = ClosedForm::disc().kappa(&fz).unwrap();
        let k_big = big.kappa(&z).unwrap();
        assert_relative_eq!(
            transform_under_biholomorphism(Quantity::Kappa, &map, &z, k_disc).unwrap(),
            k_big,
            max_relative = 1e-14
        );
        assert_relative_eq!(k_big, k_disc / (cc * cc), max_relative = 1e-14);
        let j1 = metric_report(&big, &z, &[c(1.0, 0.0)]).unwrap().j_invariant;
        let j2 = metric_report(&ClosedForm::disc(), &fz, &[c(1.0, 0.0)]).unwrap().j_invariant;
        assert_relative_eq!(j1, j2, max_relative = 1e-12);
    }

    #[test]
    fn cayley_half_plane_to_disc() {
        let map = Biholomorphism::Cayley { nu: 1 };
        for z in [c(-0.3, 0.2), c(-2.0, -1.0), c(-0.05, 3.0)] {
            let fz = map.apply(&[z]).unwrap();
            assert!(fz[0].norm() < 1.0);
            let hp = metric_report(&ClosedForm::LeftHalfPlane, &[z], &[c(1.0, 0.0)]).unwrap();
            let dc = metric_report(&ClosedForm::disc(), &fz, &[c(1.0, 0.0)]).unwrap();
            assert!((hp.j_invariant - dc.j_invariant).abs() < 1e-10 * dc.j_invariant);
            let k = transform_under_biholomorphism(Quantity::Kappa, &map, &[z], dc.kappa).unwrap();
            assert_relative_eq!(k, hp.kappa, max_relative = 1e-12);
        }
    }

    #[test]
    fn weights() {
        assert_eq!(Quantity::Lambda.weight(2), 6);
        assert_eq!(Quantity::N.weight(2), 10);
        assert_eq!(Quantity::I.weight(5), 2);
        assert_eq!(Quantity::J.weight(3), 0);
    }
}
