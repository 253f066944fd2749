//! Helpers around arbitrary-precision rationals.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn floor_int(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

pub fn ceil_int(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

/// Nearest integer, halves rounded away from zero (matches `Ratio::round`).
pub fn round_int(r: &Rational) -> BigInt {
    r.round().to_integer()
}

/// Natural log of a positive big integer, accurate to f64 precision even
/// when the integer itself overflows f64.
pub fn ln_bigint(x: &BigInt) -> f64 {
    debug_assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 52 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 52;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_f64(r: &Rational) -> f64 {
    assert!(r.is_positive(), "ln of non-positive rational");
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// f64 approximation that survives numerators/denominators far outside the
/// f64 range (the plain `to_f64` turns those into inf/inf = NaN).
pub fn to_f64_approx(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let a = r.numer().abs();
    let b = r.denom().clone();
    if let (Some(x), Some(y)) = (a.to_f64(), b.to_f64()) {
        if x.is_finite() && y.is_finite() && y != 0.0 {
            return sign * x / y;
        }
    }
    sign * (ln_bigint(&a) - ln_bigint(&b)).exp()
}

/// Format with a fixed number of significant digits (scientific notation),
/// so that equal values always print identically.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    format!("{:.*e}", sig.saturating_sub(1), x)
}

/// Parse "p/q", an integer, or a decimal literal with optional exponent
/// ("1.25e-3") into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        return Ok(Rational::new(n, d));
    }
    parse_decimal(s)
}

/// Parse a decimal literal (no slash) exactly.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (mantissa, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(Error::Parse(format!("bad number {s:?}")));
    }
    let n: BigInt = digits
        .parse()
        .map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
    let shift = frac_part.len() as i64 - exp10;
    let value = if shift >= 0 {
        Rational::new(n, BigInt::from(10u32).pow(shift as u32))
    } else {
        Rational::from_integer(n * BigInt::from(10u32).pow((-shift) as u32))
    };
    Ok(value)
}

/// Whether the string looks like a decimal literal rather than "p/q".
pub fn is_decimal_literal(s: &str) -> bool {
    !s.contains('/') && (s.contains('.') || s.contains(['e', 'E']))
}

/// Best rational approximation of an f64 with denominator at most `max_den`,
/// via the continued fraction of the float. Used only to place sample grids;
/// all downstream arithmetic on the result is exact.
pub fn rational_from_f64(x: f64, max_den: u64) -> Rational {
    assert!(x.is_finite());
    let negative = x < 0.0;
    let mut x = x.abs();
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::from(x.floor() as i64), BigInt::one());
    x -= x.floor();
    let cap = BigInt::from(max_den);
    for _ in 0..64 {
        if x < 1e-15 {
            break;
        }
        x = 1.0 / x;
        let a = x.floor();
        if a >= 9e18 {
            break;
        }
        x -= a;
        let a = BigInt::from(a as i64);
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > cap {
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    let sign = if negative { -BigInt::one() } else { BigInt::one() };
    Rational::new(sign * p1, q1)
}

/// Exact integer power of a rational.
pub fn pow_i64(r: &Rational, e: i64) -> Rational {
    if e == 0 {
        return Rational::one();
    }
    let abs = e.unsigned_abs();
    assert!(abs <= u32::MAX as u64);
    let p = Rational::new(r.numer().pow(abs as u32), r.denom().pow(abs as u32));
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// Strictly increasing rational grid, geometrically spaced between the
/// endpoints (inclusive). Spacing is computed in floats, the grid points
/// themselves are exact rationals.
pub fn geometric_grid(lo: &Rational, hi: &Rational, count: usize) -> Vec<Rational> {
    assert!(hi > lo, "empty grid range");
    let count = count.max(2);
    let ln_lo = ln_f64(lo);
    let ln_hi = ln_f64(hi);
    let mut out: Vec<Rational> = Vec::with_capacity(count);
    for k in 0..count {
        let r = if k == 0 {
            lo.clone()
        } else if k == count - 1 {
            hi.clone()
        } else {
            let t = ln_lo + (ln_hi - ln_lo) * k as f64 / (count - 1) as f64;
            rational_from_f64(t.exp(), 1_000_000_000_000)
        };
        if out.last().map_or(true, |prev| &r > prev) {
            out.push(r);
        }
    }
    out
}

pub fn bigint_sign(x: &BigInt) -> i32 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}
