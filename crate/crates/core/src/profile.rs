//! Exponentially flat profile functions `φ`.
//!
//! The model profile is `φ(x) = exp(-x^{-m})` for `x > 0` and `0` otherwise.
//! Its derivatives have the form `φ^{(k)} = P_k(x) φ(x)` with `P_k` a Laurent
//! polynomial satisfying `P_{k+1} = P_k' + m x^{-m-1} P_k`, `P_0 = 1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::numeric::logspace::LogScalar;
use crate::numeric::roots::bisect;

/// A user-supplied flat profile. Derivatives up to order 4 are mandatory.
pub trait CustomProfile: Send + Sync {
    fn eval(&self, x: f64) -> f64;
    fn derivative(&self, x: f64, order: usize) -> f64;
    /// `ln φ(x)`; override when `φ` underflows.
    fn ln_eval(&self, x: f64) -> f64 {
        self.eval(x).ln()
    }
}

#[derive(Clone)]
pub enum ProfileForm {
    ExpInverse,
    Custom(Arc<dyn CustomProfile>),
}

impl fmt::Debug for ProfileForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileForm::ExpInverse => write!(f, "ExpInverse"),
            ProfileForm::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Sparse Laurent polynomial `Σ c_e x^e`.
#[derive(Debug, Clone, PartialEq)]
struct Laurent(Vec<(i32, f64)>);

impl Laurent {
    fn eval(&self, x: f64) -> f64 {
        self.0.iter().map(|&(e, c)| c * x.powi(e)).sum()
    }

    fn next(&self, m: i32) -> Laurent {
        let mut terms: Vec<(i32, f64)> = Vec::new();
        for &(e, c) in &self.0 {
            if e != 0 {
                terms.push((e - 1, c * e as f64));
            }
            terms.push((e - m - 1, c * m as f64));
        }
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(i32, f64)> = Vec::new();
        for (e, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        Laurent(merged)
    }
}

/// Above this value of `x^{-m}` every derivative is below `exp(-700)`.
const FLAT_CUTOFF: f64 = 800.0;

#[derive(Debug, Clone)]
pub struct Profile {
    m: u32,
    form: ProfileForm,
    epsilon0: f64,
    laurent: Vec<Laurent>,
}

impl Profile {
    /// `exp(-x^{-m})` with `epsilon0` at its inflection point
    /// `(m/(m+1))^{1/m}`, the largest radius on which `φ'' > 0`.
    pub fn exp_inverse(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(LabError::Config("flatness order m must be positive".into()));
        }
        let mf = m as f64;
        let eps0 = (mf / (mf + 1.0)).powf(1.0 / mf);
        Self::build(m, ProfileForm::ExpInverse, eps0)
    }

    pub fn custom(m: u32, f: Arc<dyn CustomProfile>, epsilon0: f64) -> Result<Self> {
        Self::build(m, ProfileForm::Custom(f), epsilon0)
    }

    /// Same profile with a different convexity radius; re-validated.
    pub fn with_epsilon0(self, epsilon0: f64) -> Result<Self> {
        Self::build(self.m, self.form, epsilon0)
    }

    fn build(m: u32, form: ProfileForm, epsilon0: f64) -> Result<Self> {
        if !(epsilon0 > 0.0 && epsilon0.is_finite()) {
            return Err(LabError::Config(format!("epsilon0 = {epsilon0} must be positive")));
        }
        let mut laurent = vec![Laurent(vec![(0, 1.0)])];
        for _ in 0..4 {
            let next = laurent.last().unwrap().next(m as i32);
            laurent.push(next);
        }
        let p = Profile { m, form, epsilon0, laurent };
        p.validate_convexity()?;
        Ok(p)
    }

    /// Samples `(0, epsilon0)` for `φ' > 0` and `φ'' > 0`.
    fn validate_convexity(&self) -> Result<()> {
        let n = 400;
        for i in 1..n {
            let x = self.epsilon0 * i as f64 / n as f64;
            if self.eval(x) == 0.0 {
                continue;
            }
            let d1 = self.derivative(x, 1)?;
            let d2 = self.derivative(x, 2)?;
            if !(d1 > 0.0 && d2 > 0.0) {
                return Err(LabError::Config(format!(
                    "profile is not increasing and convex on (0, {}): φ'({x}) = {d1:e}, φ''({x}) = {d2:e}",
                    self.epsilon0
                )));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    pub fn form(&self) -> &ProfileForm {
        &self.form
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.form {
            ProfileForm::ExpInverse => (-x.powi(-(self.m as i32))).exp(),
            ProfileForm::Custom(c) => c.eval(x),
        }
    }

    /// `ln φ(x)`, `-∞` for `x ≤ 0`.
    pub fn ln_eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match &self.form {
            ProfileForm::ExpInverse => -x.powi(-(self.m as i32)),
            ProfileForm::Custom(c) => c.ln_eval(x),
        }
    }

    /// `φ^{(order)}(x)` for `order` in `1..=4`.
    pub fn derivative(&self, x: f64, order: usize) -> Result<f64> {
        if !(1..=4).contains(&order) {
            return Err(LabError::Domain(format!("derivative order {order} not in 1..=4")));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        match &self.form {
            ProfileForm::ExpInverse => {
                if x.powi(-(self.m as i32)) > FLAT_CUTOFF {
                    return Ok(0.0);
                }
                Ok(self.laurent[order].eval(x) * self.eval(x))
            }
            ProfileForm::Custom(c) => Ok(c.derivative(x, order)),
        }
    }

    /// `ln φ'(x)`; finite far below the `f64` range of `φ'` itself.
    pub fn ln_derivative1(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match &self.form {
            ProfileForm::ExpInverse => {
                let m = self.m as f64;
                m.ln() - (m + 1.0) * x.ln() - x.powf(-m)
            }
            ProfileForm::Custom(c) => c.derivative(x, 1).ln(),
        }
    }

    /// Unique `x > 0` with `φ(x) = y`.
    ///
    /// The exp-inverse form is strictly increasing onto `(0, 1)`, so the
    /// closed form is used on that whole range; custom profiles are inverted
    /// by bisection on `(0, epsilon0)`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        match &self.form {
            ProfileForm::ExpInverse => {
                if !(y > 0.0 && y < 1.0) {
                    return Err(LabError::Domain(format!("φ⁻¹({y:e}) requires 0 < y < 1")));
                }
                self.inverse_ln(y.ln())
            }
            ProfileForm::Custom(c) => {
                let top = c.eval(self.epsilon0);
                if !(y > 0.0 && y < top) {
                    return Err(LabError::Domain(format!("φ⁻¹({y:e}) requires 0 < y < φ(epsilon0) = {top:e}")));
                }
                bisect(|x| c.eval(x) - y, 0.0, self.epsilon0)
            }
        }
    }

    /// `φ⁻¹(exp(ln_y))` for `ln_y < 0`, usable when `y` underflows.
    pub fn inverse_ln(&self, ln_y: f64) -> Result<f64> {
        match &self.form {
            ProfileForm::ExpInverse => {
                if !(ln_y < 0.0) {
                    return Err(LabError::Domain(format!("φ⁻¹ needs ln y < 0, got {ln_y}")));
                }
                Ok((-1.0 / ln_y).powf(1.0 / self.m as f64))
            }
            ProfileForm::Custom(c) => {
                let top = c.ln_eval(self.epsilon0);
                if !(ln_y < top) {
                    return Err(LabError::Domain(format!("ln y = {ln_y} ≥ ln φ(epsilon0)")));
                }
                bisect(|x| c.ln_eval(x) - ln_y, 0.0, self.epsilon0)
            }
        }
    }

    /// `φ(r x) / φ(r)` as a log-space scalar.
    pub fn scaling_ratio(&self, r: f64, x: f64) -> Result<LogScalar> {
        if !(r > 0.0 && x > 0.0) {
            return Err(LabError::Domain(format!("scaling ratio needs r, x > 0 (r={r}, x={x})")));
        }
        let den = self.ln_eval(r);
        if den == f64::NEG_INFINITY {
            return Err(LabError::Domain(format!("φ({r:e}) underflows to zero")));
        }
        Ok(LogScalar::from_ln(self.ln_eval(r * x) - den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn point_values() {
        let p1 = Profile::exp_inverse(1).unwrap();
        let p2 = Profile::exp_inverse(2).unwrap();
        assert_eq!(p1.eval(0.0), 0.0);
        assert_eq!(p1.eval(-3.0), 0.0);
        assert_relative_eq!(p1.eval(1.0), 0.367879441171442, max_relative = 1e-14);
        assert_relative_eq!(p2.eval(0.5), (-4.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn derivative_closed_forms() {
        let p = Profile::exp_inverse(1).unwrap();
        assert_eq!(p.derivative(0.0, 1).unwrap(), 0.0);
        assert_relative_eq!(p.derivative(1.0, 1).unwrap(), (-1.0f64).exp(), max_relative = 1e-14);
        // φ'' = (x^-4 - 2x^-3) e^{-1/x} vanishes at the inflection point
        assert!(p.derivative(0.5, 2).unwrap().abs() < 1e-15);
        assert!(p.derivative(0.5, 5).is_err());
    }

    #[test]
    fn laurent_coefficients_m1() {
        let p = Profile::exp_inverse(1).unwrap();
        // φ''' / φ = x^-6 - 6x^-5 + 6x^-4
        let x: f64 = 0.37;
        let want = x.powi(-6) - 6.0 * x.powi(-5) + 6.0 * x.powi(-4);
        assert_relative_eq!(p.laurent[3].eval(x), want, max_relative = 1e-13);
    }

    #[test]
    fn inverse_values() {
        let p1 = Profile::exp_inverse(1).unwrap();
        let p2 = Profile::exp_inverse(2).unwrap();
        assert_relative_eq!(p1.inverse((-1.0f64).exp()).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(p1.inverse((-10.0f64).exp()).unwrap(), 0.1, max_relative = 1e-14);
        assert_relative_eq!(p2.inverse((-100.0f64).exp()).unwrap(), 0.1, max_relative = 1e-14);
        assert!(p1.inverse(0.0).is_err());
        assert!(p1.inverse(1.0).is_err());
    }

    #[test]
    fn inverse_matches_bisection_oracle() {
        let p = Profile::exp_inverse(2).unwrap();
        for &y in &[1e-40, 1e-5, 0.2] {
            let b = bisect(|x| p.eval(x) - y, 1e-3, 5.0).unwrap();
            assert_relative_eq!(p.inverse(y).unwrap(), b, max_relative = 1e-12);
        }
    }

    #[test]
    fn default_epsilon0_is_inflection_point() {
        let p = Profile::exp_inverse(1).unwrap();
        assert_relative_eq!(p.epsilon0(), 0.5);
        assert!(p.clone().with_epsilon0(1.0).is_err());
        assert!(p.with_epsilon0(0.4).is_ok());
    }

    #[test]
    fn scaling_ratio_examples() {
        let p = Profile::exp_inverse(1).unwrap();
        let r = p.scaling_ratio(0.01, 0.5).unwrap();
        assert_relative_eq!(r.ln, -100.0, max_relative = 1e-12);
        assert_eq!(p.scaling_ratio(0.3, 1.0).unwrap().ln, 0.0);
        let up = p.scaling_ratio(0.01, 2.0).unwrap();
        assert_relative_eq!(up.ln, 50.0, max_relative = 1e-12);
    }

    #[test]
    fn scaling_ratio_dichotomy() {
        let p = Profile::exp_inverse(1).unwrap();
        let grid = [0.2, 0.1, 0.05, 0.02, 0.01];
        let below: Vec<f64> = grid.iter().map(|&r| p.scaling_ratio(r, 0.7).unwrap().ln).collect();
        let above: Vec<f64> = grid.iter().map(|&r| p.scaling_ratio(r, 1.5).unwrap().ln).collect();
        assert!(below.windows(2).all(|w| w[1] < w[0]));
        assert!(above.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn vanishing_order_identity() {
        for m in 1..=3 {
            let p = Profile::exp_inverse(m).unwrap();
            for &x in &[0.05, 0.3, 0.9] {
                let v = -1.0 / p.ln_eval(x);
                assert_relative_eq!(v, x.powi(m as i32), max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn faster_than_any_power() {
        let p = Profile::exp_inverse(1).unwrap();
        for k in 1..=8 {
            let r: Vec<f64> = [0.05f64, 0.02, 0.01, 0.005].iter().map(|&x| p.eval(x) / x.powi(k)).collect();
            assert!(r.windows(2).all(|w| w[1] < w[0]), "k={k}");
            assert!(r[3] < 1e-60);
        }
    }

    #[test]
    fn tiny_arguments_do_not_produce_nan() {
        let p = Profile::exp_inverse(2).unwrap();
        for &x in &[1e-20, 1e-200, 5e-324] {
            for k in 1..=4 {
                assert_eq!(p.derivative(x, k).unwrap(), 0.0);
            }
            assert!(!p.ln_derivative1(x).is_nan());
        }
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(x in 1e-3f64..0.45) {
            for m in 1..=2 {
                let p = Profile::exp_inverse(m).unwrap();
                let back = p.inverse_ln(p.ln_eval(x)).unwrap();
                prop_assert!(((back - x) / x).abs() < 1e-12);
                // subnormal φ has lost relative precision before inversion
                let y = p.eval(x);
                if y >= f64::MIN_POSITIVE {
                    let back = p.inverse(y).unwrap();
                    prop_assert!(((back - x) / x).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn first_derivative_matches_central_difference(x in 0.05f64..1.0, m in 1u32..=3) {
            let p = Profile::exp_inverse(m).unwrap();
            let h = 1e-6 * x;
            let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            let an = p.derivative(x, 1).unwrap();
            prop_assert!((fd - an).abs() <= 1e-8f64.max(1e-6 * an.abs()));
        }

        #[test]
        fn higher_derivatives_chain(x in 0.08f64..1.0, k in 1usize..4) {
            let p = Profile::exp_inverse(1).unwrap();
            let h = 1e-5 * x;
            let fd = (p.derivative(x + h, k).unwrap() - p.derivative(x - h, k).unwrap()) / (2.0 * h);
            let an = p.derivative(x, k + 1).unwrap();
            prop_assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0));
        }

        #[test]
        fn ln_derivative_agrees(x in 0.05f64..1.0) {
            let p = Profile::exp_inverse(2).unwrap();
            let d = p.derivative(x, 1).unwrap();
            prop_assert!((p.ln_derivative1(x) - d.ln()).abs() < 1e-12 * d.ln().abs().max(1.0));
        }
    }
}
