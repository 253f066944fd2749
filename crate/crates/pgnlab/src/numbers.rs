//! Exact descriptions of real numbers and rational approximants with
//! certified error bounds.
//!
//! Three variants cover the instances the rest of the crate works with:
//! exact rationals, periodic continued fractions (quadratic irrationals)
//! and factorial-exponent Liouville series. Nothing downstream ever sees a
//! float: consumers request a rational within a chosen faithfulness and get
//! the certified bound along with the value.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{self, Rational};
use crate::surd::QuadSurd;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealSpec {
    Rational(Rational),
    PeriodicCf {
        preperiod: Vec<BigInt>,
        period: Vec<BigInt>,
    },
    /// sum_{k>=1} base^(-k!)
    Liouville { base: u32 },
}

/// A rational approximant together with the bound it is certified for.
#[derive(Clone, Debug)]
pub struct Approximation {
    pub value: Rational,
    pub error_bound: Rational,
}

impl RealSpec {
    pub fn rational(r: Rational) -> Self {
        RealSpec::Rational(r)
    }

    pub fn periodic_cf(preperiod: Vec<i64>, period: Vec<i64>) -> Result<Self> {
        let spec = RealSpec::PeriodicCf {
            preperiod: preperiod.into_iter().map(BigInt::from).collect(),
            period: period.into_iter().map(BigInt::from).collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn liouville(base: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidSpec("liouville base must be >= 2".into()));
        }
        Ok(RealSpec::Liouville { base })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RealSpec::Rational(_) => Ok(()),
            RealSpec::PeriodicCf { preperiod, period } => {
                if period.is_empty() {
                    return Err(Error::InvalidSpec("empty continued-fraction period".into()));
                }
                for a in preperiod.iter().skip(1).chain(period.iter()) {
                    if *a < BigInt::one() {
                        return Err(Error::InvalidSpec(
                            "continued-fraction partial quotients after the first must be >= 1"
                                .into(),
                        ));
                    }
                }
                Ok(())
            }
            RealSpec::Liouville { base } => {
                if *base < 2 {
                    Err(Error::InvalidSpec("liouville base must be >= 2".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Continued-fraction digits, finite for rationals, `count` digits for
    /// periodic specs.
    fn cf_digits(&self, count: usize) -> Result<Vec<BigInt>> {
        match self {
            RealSpec::Rational(r) => Ok(rational_cf_digits(r)),
            RealSpec::PeriodicCf { preperiod, period } => {
                let mut digits = Vec::with_capacity(count);
                digits.extend_from_slice(preperiod);
                while digits.len() < count {
                    digits.extend_from_slice(period);
                }
                digits.truncate(count.max(preperiod.len()));
                Ok(digits)
            }
            RealSpec::Liouville { .. } => Err(Error::UnsupportedVariant(
                "continued-fraction digits of a Liouville series",
            )),
        }
    }

    /// Exact quadratic-surd value for CF and rational variants.
    pub fn to_surd(&self) -> Option<QuadSurd> {
        match self {
            RealSpec::Rational(r) => Some(QuadSurd::from_rational(r.clone())),
            RealSpec::PeriodicCf { preperiod, period } => {
                Some(periodic_cf_to_surd(preperiod, period))
            }
            RealSpec::Liouville { .. } => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealSpec::Rational(r) => rat::to_f64_approx(r),
            RealSpec::PeriodicCf { .. } => self.to_surd().unwrap().to_f64(),
            RealSpec::Liouville { base } => {
                let b = *base as f64;
                let mut acc = 0.0;
                let mut fact = 1u64;
                for k in 1..=12u64 {
                    fact *= k;
                    let term = b.powf(-(fact as f64));
                    if term == 0.0 {
                        break;
                    }
                    acc += term;
                }
                acc
            }
        }
    }
}

/// k-th convergent p_k/q_k of a continued fraction spec, in lowest terms.
pub fn cf_convergent(spec: &RealSpec, k: usize) -> Result<Rational> {
    let digits = match spec {
        RealSpec::Rational(r) => {
            let d = rational_cf_digits(r);
            if k >= d.len() {
                return Err(Error::IndexOutOfRange { index: k, len: d.len() });
            }
            d
        }
        RealSpec::PeriodicCf { .. } => spec.cf_digits(k + 1)?,
        RealSpec::Liouville { .. } => {
            return Err(Error::UnsupportedVariant(
                "convergents of a Liouville series",
            ))
        }
    };
    let (p, q) = convergent_from_digits(&digits[..=k]);
    Ok(Rational::new(p, q))
}

/// Rational within `eps` of the spec's value, with a certified bound.
///
/// Continued-fraction variants walk convergents and stop at the first one
/// whose true error is provably within eps (decided exactly through the
/// quadratic surd); Liouville series truncate at the first partial sum whose
/// tail bound drops below eps.
pub fn approximate(spec: &RealSpec, eps: &Rational) -> Approximation {
    assert!(eps.is_positive(), "eps must be > 0");
    match spec {
        RealSpec::Rational(r) => Approximation {
            value: r.clone(),
            error_bound: Rational::zero(),
        },
        RealSpec::PeriodicCf { .. } => {
            let theta = spec.to_surd().expect("periodic cf has a surd value");
            let mut k = 0usize;
            loop {
                let conv = cf_convergent(spec, k).expect("periodic cf convergent");
                if theta.within(&conv, eps) {
                    // report the sharper classical bound when it is certified
                    let next = cf_convergent(spec, k + 1).expect("next convergent");
                    let qq = Rational::from_integer(conv.denom() * next.denom());
                    let classical = qq.recip();
                    let error_bound = if &classical <= eps { classical } else { eps.clone() };
                    return Approximation { value: conv, error_bound };
                }
                k += 1;
                assert!(k < 100_000, "convergents did not reach eps");
            }
        }
        RealSpec::Liouville { base } => {
            let b = BigInt::from(*base);
            // smallest K with 2 * base^-(K+1)! <= eps
            let mut k_top = 1u64;
            let mut fact_next = 2u64; // (K+1)! for K = 1
            loop {
                let bound = Rational::new(BigInt::from(2), (&b).pow(fact_next as u32));
                if &bound <= eps {
                    break;
                }
                k_top += 1;
                fact_next = fact_next
                    .checked_mul(k_top + 1)
                    .filter(|f| *f <= 40_000_000)
                    .expect("liouville truncation depth exceeds supported precision");
            }
            let mut sum = Rational::zero();
            let mut fact = 1u64;
            for k in 1..=k_top {
                if k > 1 {
                    fact *= k;
                }
                sum += Rational::new(BigInt::one(), (&b).pow(fact as u32));
            }
            let error_bound = Rational::new(BigInt::from(2), (&b).pow(fact_next as u32));
            Approximation { value: sum, error_bound }
        }
    }
}

/// Denominator sequence of the partial sums base^(-1!) + ... + base^(-k!),
/// the classical best-approximation candidates for a Liouville series.
pub fn liouville_partial_sum(base: u32, k: u64) -> Rational {
    let b = BigInt::from(base);
    let mut sum = Rational::zero();
    let mut fact = 1u64;
    for j in 1..=k {
        if j > 1 {
            fact *= j;
        }
        sum += Rational::new(BigInt::one(), (&b).pow(fact as u32));
    }
    sum
}

fn rational_cf_digits(r: &Rational) -> Vec<BigInt> {
    let mut digits = Vec::new();
    let mut num = r.numer().clone();
    let mut den = r.denom().clone();
    loop {
        let (q, rem) = num.div_mod_floor(&den);
        digits.push(q);
        if rem.is_zero() {
            break;
        }
        num = den;
        den = rem;
    }
    digits
}

fn convergent_from_digits(digits: &[BigInt]) -> (BigInt, BigInt) {
    let mut p_prev = BigInt::one();
    let mut p_prev2 = BigInt::zero();
    let mut q_prev = BigInt::zero();
    let mut q_prev2 = BigInt::one();
    for a in digits {
        let p = a * &p_prev + &p_prev2;
        let q = a * &q_prev + &q_prev2;
        p_prev2 = std::mem::replace(&mut p_prev, p);
        q_prev2 = std::mem::replace(&mut q_prev, q);
    }
    (p_prev, q_prev)
}

fn periodic_cf_to_surd(preperiod: &[BigInt], period: &[BigInt]) -> QuadSurd {
    // Fixed point of the period: x = (p x + p') / (q x + q'),
    // so q x^2 + (q' - p) x - p' = 0 and x is the positive root.
    let (p, p2, q, q2) = convergent_pair(period);
    let a2 = q.clone();
    let a1 = &q2 - &p;
    let a0 = -p2.clone();
    // x = (-a1 + sqrt(a1^2 - 4 a2 a0)) / (2 a2)
    let disc = &a1 * &a1 - BigInt::from(4) * &a2 * &a0;
    assert!(disc.is_positive());
    let two_a2 = Rational::from_integer(BigInt::from(2) * &a2);
    let x = QuadSurd::new(
        Rational::from_integer(-a1) / &two_a2,
        Rational::one() / &two_a2,
        disc,
    );
    if preperiod.is_empty() {
        return x;
    }
    // theta = (P x + P') / (Q x + Q') with (P, P', Q, Q') from the preperiod.
    let (pp, pp2, qq, qq2) = convergent_pair(preperiod);
    let num = x
        .scale(&Rational::from_integer(pp))
        .add_rational(&Rational::from_integer(pp2));
    let den = x
        .scale(&Rational::from_integer(qq))
        .add_rational(&Rational::from_integer(qq2));
    num.div(&den)
}

/// (p_last, p_prev, q_last, q_prev) of the convergent recurrence over digits.
fn convergent_pair(digits: &[BigInt]) -> (BigInt, BigInt, BigInt, BigInt) {
    let mut p_prev = BigInt::one();
    let mut p_prev2 = BigInt::zero();
    let mut q_prev = BigInt::zero();
    let mut q_prev2 = BigInt::one();
    for a in digits {
        let p = a * &p_prev + &p_prev2;
        let q = a * &q_prev + &q_prev2;
        p_prev2 = std::mem::replace(&mut p_prev, p);
        q_prev2 = std::mem::replace(&mut q_prev, q);
    }
    (p_prev, p_prev2, q_prev, q_prev2)
}

/// Grammar: `rat:<p>/<q>`, `cf:[a0;a1,a2,(p1,p2,...)]`, `liouville:<base>`,
/// or a bare rational/decimal literal (flagged so the CLI can warn).
pub fn parse_real_spec(s: &str) -> Result<(RealSpec, bool)> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("rat:") {
        return Ok((RealSpec::Rational(rat::parse_rational(rest)?), false));
    }
    if let Some(rest) = s.strip_prefix("liouville:") {
        let base: u32 = rest
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad liouville base {rest:?}")))?;
        return Ok((RealSpec::liouville(base)?, false));
    }
    if let Some(rest) = s.strip_prefix("cf:") {
        return Ok((parse_cf(rest)?, false));
    }
    let was_decimal = rat::is_decimal_literal(s);
    Ok((RealSpec::Rational(rat::parse_rational(s)?), was_decimal))
}

fn parse_cf(s: &str) -> Result<RealSpec> {
    let body = s
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("continued fraction must be bracketed: {s:?}")))?;
    let (a0_str, tail) = match body.split_once(';') {
        Some((a, t)) => (a, t),
        None => (body, ""),
    };
    let a0: BigInt = a0_str
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad partial quotient {a0_str:?}")))?;
    let mut preperiod = vec![a0];
    let mut period: Vec<BigInt> = Vec::new();
    let tail = tail.trim();
    let (finite_part, period_part) = match tail.find('(') {
        Some(idx) => {
            let inner = tail[idx..]
                .strip_prefix('(')
                .and_then(|t| t.trim_end_matches(',').trim().strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("unbalanced period in {s:?}")))?;
            (tail[..idx].trim_end_matches(',').trim(), inner)
        }
        None => (tail, ""),
    };
    for item in finite_part.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        preperiod.push(
            item.parse()
                .map_err(|_| Error::Parse(format!("bad partial quotient {item:?}")))?,
        );
    }
    for item in period_part.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        period.push(
            item.parse()
                .map_err(|_| Error::Parse(format!("bad partial quotient {item:?}")))?,
        );
    }
    let spec = if period.is_empty() {
        // finite continued fraction: evaluate to the exact rational
        let (p, q) = convergent_from_digits(&preperiod);
        RealSpec::Rational(Rational::new(p, q))
    } else {
        RealSpec::PeriodicCf { preperiod, period }
    };
    spec.validate()?;
    Ok(spec)
}

impl fmt::Display for RealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealSpec::Rational(r) => write!(f, "rat:{r}"),
            RealSpec::PeriodicCf { preperiod, period } => {
                write!(f, "cf:[{}", preperiod[0])?;
                if preperiod.len() > 1 || !period.is_empty() {
                    write!(f, ";")?;
                }
                let pre: Vec<String> = preperiod[1..].iter().map(|a| a.to_string()).collect();
                write!(f, "{}", pre.join(","))?;
                if !period.is_empty() {
                    if preperiod.len() > 1 {
                        write!(f, ",")?;
                    }
                    let per: Vec<String> = period.iter().map(|a| a.to_string()).collect();
                    write!(f, "({})", per.join(","))?;
                }
                write!(f, "]")
            }
            RealSpec::Liouville { base } => write!(f, "liouville:{base}"),
        }
    }
}

pub fn golden_ratio() -> RealSpec {
    RealSpec::periodic_cf(vec![1], vec![1]).unwrap()
}

pub fn sqrt2() -> RealSpec {
    RealSpec::periodic_cf(vec![1], vec![2]).unwrap()
}
