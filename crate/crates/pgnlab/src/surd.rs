//! Exact arithmetic on quadratic surds `a + b*sqrt(d)`.
//!
//! Periodic continued fractions evaluate to quadratic irrationals; keeping
//! them in this form lets us decide comparisons against rationals exactly,
//! which drives both the stopping rule of `approximate` and the rational
//! independence classification of theta vectors.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rat::{ln_bigint, to_f64_approx, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadSurd {
    pub a: Rational,
    pub b: Rational,
    /// Non-negative; zero or one means the value is rational.
    pub d: BigInt,
}

impl QuadSurd {
    pub fn new(a: Rational, b: Rational, d: BigInt) -> Self {
        let mut s = QuadSurd { a, b, d };
        s.normalize();
        s
    }

    pub fn from_rational(a: Rational) -> Self {
        QuadSurd {
            a,
            b: Rational::zero(),
            d: BigInt::zero(),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero() || self.d.is_zero() || self.d.is_one()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.is_rational() {
            let root = if self.d.is_one() {
                Rational::one()
            } else {
                Rational::zero()
            };
            Some(&self.a + &self.b * root)
        } else {
            None
        }
    }

    /// Extract square factors of d into b and fold degenerate cases.
    fn normalize(&mut self) {
        assert!(!self.d.is_negative(), "negative discriminant");
        if self.b.is_zero() {
            self.d = BigInt::zero();
            return;
        }
        if self.d.is_zero() {
            self.b = Rational::zero();
            return;
        }
        // Pull out small square divisors, then check for a perfect square.
        let mut p = BigInt::from(2u32);
        let cap = BigInt::from(1_000u32);
        while &p <= &cap && (&p * &p) <= self.d {
            let sq = &p * &p;
            while (&self.d % &sq).is_zero() {
                self.d /= &sq;
                self.b *= Rational::from_integer(p.clone());
            }
            p += 1u32;
        }
        let root = self.d.sqrt();
        if (&root * &root) == self.d {
            self.a = &self.a + &self.b * Rational::from_integer(root);
            self.b = Rational::zero();
            self.d = BigInt::zero();
        }
        if self.d.is_one() {
            self.a = &self.a + &self.b;
            self.b = Rational::zero();
            self.d = BigInt::zero();
        }
    }

    pub fn add_rational(&self, r: &Rational) -> QuadSurd {
        QuadSurd::new(&self.a + r, self.b.clone(), self.d.clone())
    }

    pub fn sub_rational(&self, r: &Rational) -> QuadSurd {
        QuadSurd::new(&self.a - r, self.b.clone(), self.d.clone())
    }

    pub fn scale(&self, r: &Rational) -> QuadSurd {
        QuadSurd::new(&self.a * r, &self.b * r, self.d.clone())
    }

    pub fn mul(&self, other: &QuadSurd) -> QuadSurd {
        assert!(
            self.is_rational() || other.is_rational() || self.d == other.d,
            "mixed radicals"
        );
        let d = if self.is_rational() {
            other.d.clone()
        } else {
            self.d.clone()
        };
        let dq = Rational::from_integer(d.clone());
        let a = &self.a * &other.a + &self.b * &other.b * &dq;
        let b = &self.a * &other.b + &self.b * &other.a;
        QuadSurd::new(a, b, d)
    }

    pub fn conj(&self) -> QuadSurd {
        QuadSurd {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d.clone(),
        }
    }

    /// a^2 - b^2 d, the product with the conjugate.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(self.d.clone())
    }

    pub fn div(&self, other: &QuadSurd) -> QuadSurd {
        let n = other.norm();
        assert!(!n.is_zero(), "division by zero surd");
        self.mul(&other.conj()).scale(&n.recip())
    }

    /// Exact sign of a + b sqrt(d).
    pub fn sign(&self) -> i32 {
        let sa = rational_sign(&self.a);
        if self.is_rational() {
            return sa;
        }
        let sb = rational_sign(&self.b);
        if sa == sb {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        if sb == 0 {
            return sa;
        }
        // opposite signs: compare a^2 with b^2 d
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * Rational::from_integer(self.d.clone());
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        match self.sub_rational(r).sign() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }

    /// Exact test |value - r| <= eps.
    pub fn within(&self, r: &Rational, eps: &Rational) -> bool {
        let hi = r + eps;
        let lo = r - eps;
        self.cmp_rational(&hi) != Ordering::Greater && self.cmp_rational(&lo) != Ordering::Less
    }

    pub fn to_f64(&self) -> f64 {
        to_f64_approx(&self.a) + to_f64_approx(&self.b) * bigint_to_f64(&self.d).sqrt()
    }

    /// ln| a + b sqrt(d) |, computed through the conjugate so the huge
    /// cancellation in convergent errors does not destroy precision.
    pub fn ln_abs(&self) -> f64 {
        if let Some(r) = self.as_rational() {
            assert!(!r.is_zero());
            return crate::rat::ln_f64(&r.abs());
        }
        let n = self.norm();
        let conj = self.conj();
        let conj_val = conj.to_f64().abs();
        if n.is_zero() {
            return f64::NEG_INFINITY;
        }
        crate::rat::ln_f64(&n.abs()) - conj_val.ln()
    }
}

fn rational_sign(r: &Rational) -> i32 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    if x.is_zero() {
        return 0.0;
    }
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    ln_bigint(x).exp()
}
