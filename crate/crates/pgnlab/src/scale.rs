//! Exact scalars of the form `q * rho^(1/n)` with positive rational `q`, `rho`.
//!
//! This family is closed under products, quotients and rational powers, and
//! admits exact comparison by raising both sides to a common integer power.
//! It is exactly what event scales and companion scales produce: shrinking a
//! box introduces a factor `mu^(1/d)`, a companion scale another d-th root.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rat::{ln_f64, Rational};

#[derive(Clone, Debug)]
pub struct ScaleValue {
    coeff: Rational,
    radicand: Rational,
    degree: u32,
}

impl ScaleValue {
    /// Build `coeff * radicand^(1/degree)`. Both factors must be positive.
    pub fn new(coeff: Rational, radicand: Rational, degree: u32) -> Self {
        assert!(coeff.is_positive(), "ScaleValue coefficient must be > 0");
        assert!(radicand.is_positive(), "ScaleValue radicand must be > 0");
        assert!(degree >= 1);
        let mut v = ScaleValue {
            coeff,
            radicand,
            degree,
        };
        v.normalize();
        v
    }

    pub fn from_rational(q: Rational) -> Self {
        Self::new(q, Rational::one(), 1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn radicand(&self) -> &Rational {
        &self.radicand
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_rational(&self) -> bool {
        self.degree == 1
    }

    /// The exact rational value, when the radical collapses.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.degree == 1 {
            Some(&self.coeff * &self.radicand)
        } else {
            None
        }
    }

    fn normalize(&mut self) {
        if self.radicand.is_one() {
            self.degree = 1;
        }
        // Fold perfect k-th power radicands: rho = sigma^k with k | degree
        // turns rho^(1/n) into sigma^(1/(n/k)).
        let mut k = self.degree;
        while k > 1 {
            if self.degree % k == 0 {
                if let Some(root) = exact_root(&self.radicand, k) {
                    self.radicand = root;
                    self.degree /= k;
                    k = self.degree;
                    continue;
                }
            }
            k -= 1;
        }
        if self.degree == 1 {
            self.coeff *= std::mem::replace(&mut self.radicand, Rational::one());
        }
    }

    pub fn mul(&self, other: &ScaleValue) -> ScaleValue {
        let l = lcm_u32(self.degree, other.degree);
        let r1 = pow_rational(&self.radicand, (l / self.degree) as i64);
        let r2 = pow_rational(&other.radicand, (l / other.degree) as i64);
        ScaleValue::new(&self.coeff * &other.coeff, r1 * r2, l)
    }

    pub fn recip(&self) -> ScaleValue {
        ScaleValue::new(self.coeff.recip(), self.radicand.recip(), self.degree)
    }

    pub fn div(&self, other: &ScaleValue) -> ScaleValue {
        self.mul(&other.recip())
    }

    pub fn mul_rational(&self, q: &Rational) -> ScaleValue {
        assert!(q.is_positive());
        ScaleValue::new(&self.coeff * q, self.radicand.clone(), self.degree)
    }

    pub fn pow_int(&self, e: i64) -> ScaleValue {
        if e < 0 {
            return self.recip().pow_int(-e);
        }
        if e == 0 {
            return ScaleValue::one();
        }
        ScaleValue::new(
            pow_rational(&self.coeff, e),
            pow_rational(&self.radicand, e),
            self.degree,
        )
    }

    /// Exact rational power `self^(num/den)`.
    pub fn pow_rat(&self, num: i64, den: u32) -> ScaleValue {
        assert!(den >= 1);
        if num < 0 {
            return self.recip().pow_rat(-num, den);
        }
        if num == 0 {
            return ScaleValue::one();
        }
        // (q rho^(1/n))^(a/b) = (q^(a n) rho^a)^(1/(n b))
        let a = num;
        let radicand = pow_rational(&self.coeff, a * self.degree as i64)
            * pow_rational(&self.radicand, a);
        ScaleValue::new(Rational::one(), radicand, self.degree * den)
    }

    /// Exact comparison: raise both values to lcm(degrees) and compare the
    /// resulting rationals.
    pub fn cmp_exact(&self, other: &ScaleValue) -> Ordering {
        if self.degree == 1 && other.degree == 1 {
            return self.coeff.cmp(&other.coeff);
        }
        let l = lcm_u32(self.degree, other.degree) as i64;
        let lhs = pow_rational(&self.coeff, l)
            * pow_rational(&self.radicand, l / self.degree as i64);
        let rhs = pow_rational(&other.coeff, l)
            * pow_rational(&other.radicand, l / other.degree as i64);
        lhs.cmp(&rhs)
    }

    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        if !q.is_positive() {
            return Ordering::Greater;
        }
        if self.degree == 1 {
            return self.coeff.cmp(q);
        }
        let l = self.degree as i64;
        let lhs = pow_rational(&self.coeff, l) * &self.radicand;
        let rhs = pow_rational(q, l);
        lhs.cmp(&rhs)
    }

    /// Largest integer `x >= 0` with `x <= value`.
    pub fn floor_int(&self) -> BigInt {
        if self.degree == 1 {
            return (&self.coeff * &self.radicand).floor().to_integer();
        }
        // x <= q rho^(1/n)  <=>  x^n <= q^n rho
        let n = self.degree;
        let t = pow_rational(&self.coeff, n as i64) * &self.radicand;
        let mut x = t.numer().div_floor(t.denom()).nth_root(n);
        loop {
            let up = (&x + 1u32).pow(n);
            if Rational::from_integer(up) <= t {
                x += 1u32;
            } else {
                break;
            }
        }
        while Rational::from_integer((&x).pow(n)) > t {
            x -= 1u32;
        }
        x
    }

    /// A rational upper bound `r >= value` with relative error at most 2^-24.
    /// Exact (r == value) whenever the value is rational.
    pub fn outer_rational(&self) -> Rational {
        if self.degree == 1 {
            return &self.coeff * &self.radicand;
        }
        // Scale so that floor(value * 2^k) has at least ~24 bits.
        let lg = self.ln_f64() * std::f64::consts::LOG2_E;
        let k = (26.0 - lg).ceil().max(1.0) as i64;
        let k = k.clamp(1, 1 << 20) as u32;
        let two_k = BigInt::one() << k;
        let scaled = self.mul_rational(&Rational::from_integer(two_k.clone()));
        let m = scaled.floor_int();
        Rational::new(m + 1u32, two_k)
    }

    pub fn ln_f64(&self) -> f64 {
        ln_f64(&self.coeff) + ln_f64(&self.radicand) / self.degree as f64
    }

    pub fn to_f64(&self) -> f64 {
        self.ln_f64().exp()
    }
}

impl PartialEq for ScaleValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_exact(other) == Ordering::Equal
    }
}

impl Eq for ScaleValue {}

impl PartialOrd for ScaleValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_exact(other))
    }
}

impl Ord for ScaleValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_exact(other)
    }
}

impl fmt::Display for ScaleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 1 {
            write!(f, "{}", &self.coeff * &self.radicand)
        } else {
            write!(f, "{}*({})^(1/{})", self.coeff, self.radicand, self.degree)
        }
    }
}

fn lcm_u32(a: u32, b: u32) -> u32 {
    a / a.gcd(&b) * b
}

fn pow_rational(r: &Rational, e: i64) -> Rational {
    if e == 0 {
        return Rational::one();
    }
    let abs = e.unsigned_abs();
    assert!(abs <= u32::MAX as u64, "exponent too large");
    let p = Rational::new(r.numer().pow(abs as u32), r.denom().pow(abs as u32));
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// Exact k-th root of a rational, when both numerator and denominator are
/// perfect k-th powers.
fn exact_root(r: &Rational, k: u32) -> Option<Rational> {
    let num = exact_root_int(r.numer(), k)?;
    let den = exact_root_int(r.denom(), k)?;
    Some(Rational::new(num, den))
}

fn exact_root_int(x: &BigInt, k: u32) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    if x.is_zero() || x.is_one() {
        return Some(x.clone());
    }
    let root = x.nth_root(k);
    if (&root).pow(k) == *x {
        Some(root)
    } else {
        None
    }
}
