//! Log-domain float helpers.
//!
//! The witness constructions produce angles like `e^{-s/eps}` with `s/eps`
//! in the millions; only logarithms of such quantities fit in an `f64`.
//! Sums of signed terms at that dynamic range are carried as
//! [`SignedLog`] values: a sign and the log of the magnitude, combined by
//! log-sum-exp so the dominant term always survives.

/// `ln(e^a + e^b)` without overflow; `-inf` acts as the additive identity.
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(2 cosh x) = |x| + ln(1 + e^{-2|x|})`, stable for all magnitudes.
pub fn ln_two_cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + (-2.0 * ax).exp().ln_1p()
}

/// A real number held as `sign * e^{ln_abs}`.
///
/// Zero is canonical: `sign = 0`, `ln_abs = -inf`. Addition is signed
/// log-sum-exp; exactly opposite terms cancel to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    sign: i8,
    ln_abs: f64,
}

impl SignedLog {
    pub fn zero() -> Self {
        SignedLog {
            sign: 0,
            ln_abs: f64::NEG_INFINITY,
        }
    }

    pub fn from_value(x: f64) -> Self {
        assert!(!x.is_nan(), "signed log of NaN");
        if x == 0.0 {
            return Self::zero();
        }
        SignedLog {
            sign: if x > 0.0 { 1 } else { -1 },
            ln_abs: x.abs().ln(),
        }
    }

    /// `sign * e^{ln_abs}` with no finiteness requirement on the magnitude
    /// (an angle of `e^{-10^6}` is a legitimate value here).
    pub fn from_parts(sign: i8, ln_abs: f64) -> Self {
        assert!(!ln_abs.is_nan(), "signed log with NaN magnitude");
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            return Self::zero();
        }
        SignedLog {
            sign: sign.signum(),
            ln_abs,
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    /// Collapses to a plain float; underflows to (signed) zero when the
    /// magnitude is below the float range.
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.ln_abs.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn neg(&self) -> Self {
        SignedLog {
            sign: -self.sign,
            ln_abs: self.ln_abs,
        }
    }

    pub fn abs(&self) -> Self {
        SignedLog {
            sign: self.sign.abs(),
            ln_abs: self.ln_abs,
        }
    }

    /// Multiplies by `e^{shift}`.
    pub fn scale_ln(&self, shift: f64) -> Self {
        if self.sign == 0 {
            return *self;
        }
        SignedLog {
            sign: self.sign,
            ln_abs: self.ln_abs + shift,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.sign == 0 {
            return *other;
        }
        if other.sign == 0 {
            return *self;
        }
        if self.sign == other.sign {
            return SignedLog {
                sign: self.sign,
                ln_abs: logaddexp(self.ln_abs, other.ln_abs),
            };
        }
        // Opposite signs: the larger magnitude wins, the log shrinks by
        // ln(1 - e^{small - big}).
        if self.ln_abs == other.ln_abs {
            return Self::zero();
        }
        let (win, lose) = if self.ln_abs > other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        SignedLog {
            sign: win.sign,
            ln_abs: win.ln_abs + (-((lose.ln_abs - win.ln_abs).exp())).ln_1p(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logaddexp_matches_naive_at_moderate_scale() {
        let pairs: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 2.0), (-3.5, 0.25), (10.0, -10.0)];
        for (a, b) in pairs {
            let naive = (a.exp() + b.exp()).ln();
            assert!((logaddexp(a, b) - naive).abs() < 1e-12);
        }
        assert_eq!(logaddexp(f64::NEG_INFINITY, 3.0), 3.0);
        assert_eq!(logaddexp(3.0, f64::NEG_INFINITY), 3.0);
        assert_eq!(
            logaddexp(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn logaddexp_survives_extreme_inputs() {
        // Dominant term passes through untouched.
        assert_eq!(logaddexp(-1.0e6, -3.0e6), -1.0e6);
        assert_eq!(logaddexp(700.0, -700.0), 700.0);
    }

    #[test]
    fn ln_two_cosh_values() {
        assert_eq!(ln_two_cosh(0.0), std::f64::consts::LN_2);
        let x: f64 = 2.0;
        let naive = (2.0 * x.cosh()).ln();
        assert!((ln_two_cosh(x) - naive).abs() < 1e-14);
        assert!((ln_two_cosh(-x) - naive).abs() < 1e-14);
        // Far past cosh overflow the linear asymptote takes over exactly.
        assert_eq!(ln_two_cosh(1.0e8), 1.0e8);
    }

    #[test]
    fn signed_log_round_trip() {
        // exp(ln x) wobbles by about |ln x| ulps, never more
        for x in [0.0f64, 1.5, -2.25, 1.0e-200, -3.0e150] {
            let s = SignedLog::from_value(x);
            if x == 0.0 {
                assert_eq!(s.value(), 0.0);
            } else {
                assert!(((s.value() - x) / x).abs() < 1e-13);
                assert_eq!(s.value().signum(), x.signum());
            }
        }
        assert!(SignedLog::from_value(0.0).is_zero());
        assert_eq!(SignedLog::from_parts(0, 5.0), SignedLog::zero());
        assert_eq!(SignedLog::from_parts(7, 0.0).sign(), 1);
    }

    #[test]
    fn addition_matches_plain_arithmetic() {
        let values = [3.0, -1.25, 0.5, -0.5, 2.0e-7, 0.0];
        for a in values {
            for b in values {
                let got = SignedLog::from_value(a).add(&SignedLog::from_value(b));
                let want = a + b;
                if want == 0.0 {
                    assert!(got.is_zero(), "{a} + {b}");
                } else {
                    assert!(
                        (got.value() - want).abs() <= 1e-15 * want.abs(),
                        "{a} + {b}: got {}",
                        got.value()
                    );
                }
            }
        }
    }

    #[test]
    fn cancellation_below_float_range() {
        // (e^{-5000} + e^{-5002}) - e^{-5000} leaves e^{-5002} worth of
        // magnitude behind, invisible to plain floats.
        let a = SignedLog::from_parts(1, -5000.0);
        let b = SignedLog::from_parts(1, -5002.0);
        let diff = a.add(&b).sub(&a);
        assert_eq!(diff.sign(), 1);
        assert!((diff.ln_abs() - (-5002.0)).abs() < 1e-9);
        // Exact cancellation collapses to the canonical zero.
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn scale_shifts_the_exponent() {
        let a = SignedLog::from_parts(-1, -10.0);
        let scaled = a.scale_ln(-990.0);
        assert_eq!(scaled.sign(), -1);
        assert_eq!(scaled.ln_abs(), -1000.0);
        assert!(SignedLog::zero().scale_ln(50.0).is_zero());
    }
}
