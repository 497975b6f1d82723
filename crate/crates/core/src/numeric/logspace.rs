//! Log-space scalars for quantities that leave the `f64` exponent range.
//!
//! Profiles of the form `exp(-1/x^m)` underflow for `x < 1/700`; every ratio
//! built from them is carried as a natural logarithm and only exponentiated
//! on demand.

use serde::{Deserialize, Serialize};

/// Below this log-value a quantity is flagged as underflowing `f64`.
pub const LN_UNDERFLOW: f64 = -700.0;
/// Above this log-value a quantity is flagged as overflowing `f64`.
pub const LN_OVERFLOW: f64 = 700.0;

/// A positive real stored by its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScalar {
    pub ln: f64,
}

impl LogScalar {
    pub fn from_ln(ln: f64) -> Self {
        LogScalar { ln }
    }

    pub fn from_value(x: f64) -> Self {
        LogScalar { ln: x.ln() }
    }

    /// `exp(ln)`; may be 0 or infinite when flagged.
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }

    pub fn is_underflow(&self) -> bool {
        self.ln < LN_UNDERFLOW
    }

    pub fn is_overflow(&self) -> bool {
        self.ln > LN_OVERFLOW
    }

    /// True when the value is representable without loss of range.
    pub fn is_representable(&self) -> bool {
        !self.is_underflow() && !self.is_overflow()
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(sum_i exp(x_i))`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, log_add_exp)
}

/// `ln(1 - exp(-y))` for `y = exp(ln_y) > 0`, accurate for tiny and huge `y`.
pub fn ln_one_minus_exp_neg(ln_y: f64) -> f64 {
    if ln_y < -30.0 {
        // 1 - e^{-y} = y (1 - y/2 + ...)
        let y = ln_y.exp();
        ln_y - 0.5 * y
    } else {
        let y = ln_y.exp();
        if y > 40.0 {
            -(-y).exp()
        } else {
            (-(-y).exp_m1()).ln()
        }
    }
}
