//! psi traces, exponent estimation and the inequality checks built on them.
//!
//! psi_p(s) = ln lambda_p(B(s)) / s is sampled on a geometric grid merged
//! with every detected front-facet event; lambda values stay exact, psi is
//! decimal at reporting time. liminf/limsup are approximated by min/max over
//! a tail window, and every report carries the window so finite-range
//! estimates are never presented as asymptotic truths.

use std::fmt;
use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::events::{front_facet_events, RelationMode};
use crate::lattice::{box_at, dual_lattice, primal_lattice, Lattice, PathSpec, ThetaSpec};
use crate::minima::{successive_minima_with, MinimaOptions};
use crate::numbers::{approximate, cf_convergent, RealSpec};
use crate::rat::{fmt_sig, geometric_grid, ln_f64, Rational};
use crate::scale::ScaleValue;

#[derive(Clone, Debug)]
pub struct TraceSample {
    pub u: ScaleValue,
    pub s: f64,
    pub lambdas: Vec<ScaleValue>,
    pub psis: Vec<f64>,
    pub witnesses: Vec<Vec<BigInt>>,
    pub event: bool,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub path: PathSpec,
    pub p_max: usize,
    pub samples: Vec<TraceSample>,
}

/// Sample psi_1..psi_pmax over a geometric grid in u merged with all events
/// detected in the range.
pub fn psi_trace(
    lattice: &Lattice,
    path: &PathSpec,
    u_min: &Rational,
    u_max: &Rational,
    samples: usize,
    p_max: usize,
    opts: &MinimaOptions,
) -> Result<Trace> {
    if !(u_min > &Rational::one() && u_max > u_min) {
        return Err(Error::ScaleDomain);
    }
    let events = match front_facet_events(lattice, path, u_min, u_max, samples, opts) {
        Ok(ev) => ev,
        Err(Error::NoFrontFacet) => Vec::new(),
        Err(e) => return Err(e),
    };
    let mut points: Vec<(ScaleValue, bool)> = geometric_grid(u_min, u_max, samples)
        .into_iter()
        .map(|u| (ScaleValue::from_rational(u), false))
        .collect();
    points.extend(events.into_iter().map(|e| (e.u, true)));
    points.sort_by(|a, b| a.0.cmp_exact(&b.0));
    let mut merged: Vec<(ScaleValue, bool)> = Vec::with_capacity(points.len());
    for (u, flag) in points {
        match merged.last_mut() {
            Some((prev, pf)) if prev.cmp_exact(&u) == std::cmp::Ordering::Equal => {
                *pf = *pf || flag;
            }
            _ => merged.push((u, flag)),
        }
    }

    let samples: Result<Vec<TraceSample>> = merged
        .par_iter()
        .map(|(u, _)| {
            let box_ = box_at(path, u)?;
            let minima = successive_minima_with(lattice, &box_, p_max, opts)?;
            let s = path.s_of(u);
            let psis: Vec<f64> = minima.lambdas.iter().map(|l| l.ln_f64() / s).collect();
            for w in psis.windows(2) {
                debug_assert!(w[0] <= w[1] + 1e-12);
            }
            // Event flag = actual front-facet contact at this parameter (the
            // restriction the liminf' runs over), not just membership in the
            // deduplicated event list.
            let event = match crate::events::front_facet_mu(
                lattice,
                &box_,
                &minima.lambdas[0],
                opts.budget,
            ) {
                Ok((mu, _)) => mu == ScaleValue::one(),
                Err(Error::NoFrontFacet) => false,
                Err(e) => return Err(e),
            };
            Ok(TraceSample {
                u: u.clone(),
                s,
                lambdas: minima.lambdas,
                psis,
                witnesses: minima.witnesses.iter().map(|w| w.coeffs.clone()).collect(),
                event,
            })
        })
        .collect();
    Ok(Trace {
        path: path.clone(),
        p_max,
        samples: samples?,
    })
}

/// CSV schema: `u,s,p,lambda,psi,event` (15 significant digits); with
/// `exact` two more columns carry the lambda coefficient and radicand as
/// exact rationals in lowest terms.
pub fn write_trace_csv<W: Write>(trace: &Trace, out: &mut W, exact: bool) -> std::io::Result<()> {
    if exact {
        writeln!(out, "u,s,p,lambda,psi,event,lambda_q,lambda_rho")?;
    } else {
        writeln!(out, "u,s,p,lambda,psi,event")?;
    }
    for sample in &trace.samples {
        for (i, (lambda, psi)) in sample.lambdas.iter().zip(&sample.psis).enumerate() {
            let base = format!(
                "{},{},{},{},{},{}",
                fmt_sig(sample.u.to_f64(), 15),
                fmt_sig(sample.s, 15),
                i + 1,
                fmt_sig(lambda.to_f64(), 15),
                fmt_sig(*psi, 15),
                u8::from(sample.event),
            );
            if exact {
                writeln!(out, "{base},{},{}", lambda.coeff(), lambda.radicand())?;
            } else {
                writeln!(out, "{base}")?;
            }
        }
    }
    Ok(())
}

/// Finite-range stand-ins for the lower/upper exponents.
#[derive(Clone, Debug)]
pub struct ExponentEstimates {
    pub p_max: usize,
    pub s_max: f64,
    pub window_lo: f64,
    pub tail_fraction: f64,
    pub tail_samples: usize,
    /// min of psi_p over the tail window (liminf stand-in).
    pub psi_lower: Vec<f64>,
    /// max of psi_p over the tail window (limsup stand-in).
    pub psi_upper: Vec<f64>,
    /// min of psi_1 over event samples only, when any fall in the window.
    pub event_psi1_lower: Option<f64>,
}

pub fn estimate_exponents(trace: &Trace, tail_fraction: f64) -> Result<ExponentEstimates> {
    assert!(tail_fraction > 0.0 && tail_fraction <= 1.0);
    let s_max = trace.samples.last().map(|s| s.s).unwrap_or(0.0);
    let window_lo = tail_fraction * s_max;
    let tail: Vec<&TraceSample> = trace
        .samples
        .iter()
        .filter(|s| s.s >= window_lo - 1e-12)
        .collect();
    if tail.is_empty() {
        return Err(Error::EmptyTail { window_lo });
    }
    let mut psi_lower = vec![f64::INFINITY; trace.p_max];
    let mut psi_upper = vec![f64::NEG_INFINITY; trace.p_max];
    let mut event_psi1_lower: Option<f64> = None;
    for s in &tail {
        for (p, psi) in s.psis.iter().enumerate() {
            psi_lower[p] = psi_lower[p].min(*psi);
            psi_upper[p] = psi_upper[p].max(*psi);
        }
        if s.event {
            let v = s.psis[0];
            event_psi1_lower = Some(event_psi1_lower.map_or(v, |e: f64| e.min(v)));
        }
    }
    Ok(ExponentEstimates {
        p_max: trace.p_max,
        s_max,
        window_lo,
        tail_fraction,
        tail_samples: tail.len(),
        psi_lower,
        psi_upper,
        event_psi1_lower,
    })
}

/// Finite or infinite exponent value; infinities are first-class outcomes
/// (rational theta drives beta to infinity), never sentinels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExponentValue {
    Finite(f64),
    Infinite,
}

impl ExponentValue {
    pub fn as_finite(&self) -> Option<f64> {
        match self {
            ExponentValue::Finite(v) => Some(*v),
            ExponentValue::Infinite => None,
        }
    }

    pub fn at_least(&self, bound: f64) -> bool {
        match self {
            ExponentValue::Finite(v) => *v >= bound,
            ExponentValue::Infinite => true,
        }
    }
}

impl fmt::Display for ExponentValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentValue::Finite(v) => write!(f, "{}", fmt_sig(*v, 12)),
            ExponentValue::Infinite => write!(f, "inf"),
        }
    }
}

/// (1 + beta_p)(1 + psi_lower_p) = (1 + alpha_p)(1 + psi_upper_p) = d/n.
pub fn beta_alpha_from_psi(
    est: &ExponentEstimates,
    m: usize,
    n: usize,
) -> Vec<(ExponentValue, ExponentValue)> {
    let d = (m + n) as f64;
    let nf = n as f64;
    let conv = |psi: f64| {
        let denom = 1.0 + psi;
        if denom <= 0.0 {
            ExponentValue::Infinite
        } else {
            ExponentValue::Finite(d / (nf * denom) - 1.0)
        }
    };
    est.psi_lower
        .iter()
        .zip(&est.psi_upper)
        .map(|(lo, hi)| (conv(*lo), conv(*hi)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct BoundsRow {
    pub p: usize,
    pub psi_lower: f64,
    pub psi_upper: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub rows: Vec<BoundsRow>,
    pub lo_bound: f64,
    pub hi_bound: f64,
    pub tolerance: f64,
}

impl BoundsReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// The trivial chain -1 <= psi_lower_p <= psi_upper_p <= m/n, within tol.
pub fn check_bounds(est: &ExponentEstimates, m: usize, n: usize, tolerance: f64) -> BoundsReport {
    let lo_bound = -1.0;
    let hi_bound = m as f64 / n as f64;
    let rows = (0..est.p_max)
        .map(|i| {
            let lo = est.psi_lower[i];
            let hi = est.psi_upper[i];
            let pass = lo >= lo_bound - tolerance
                && lo <= hi + tolerance
                && hi <= hi_bound + tolerance;
            BoundsRow {
                p: i + 1,
                psi_lower: lo,
                psi_upper: hi,
                pass,
            }
        })
        .collect();
    BoundsReport {
        rows,
        lo_bound,
        hi_bound,
        tolerance,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndependenceStatus {
    Verified,
    Assumed,
    Failed,
}

/// Rational-independence classification of (1, theta_1, ..., theta_n),
/// exact for rational and periodic-continued-fraction entries.
#[derive(Clone, Debug)]
pub struct IndependenceReport {
    pub status: IndependenceStatus,
    /// dim_Q of the span; exact when `exact`, otherwise a presumed value
    /// with `dim_known_lower` certain.
    pub dim: usize,
    pub dim_known_lower: usize,
    pub exact: bool,
}

pub fn independence_of(theta: &ThetaSpec) -> IndependenceReport {
    assert_eq!(theta.m, 1, "independence analysis is for m = 1");
    let mut discs: Vec<BigInt> = Vec::new();
    let mut unknown = 0usize;
    for row in &theta.entries {
        match row[0].to_surd() {
            Some(s) => {
                if !s.is_rational() && !discs.contains(&s.d) {
                    discs.push(s.d.clone());
                }
            }
            None => unknown += 1,
        }
    }
    let exact_dim = 1 + discs.len();
    if unknown == 0 {
        let status = if exact_dim == theta.n + 1 {
            IndependenceStatus::Verified
        } else {
            IndependenceStatus::Failed
        };
        IndependenceReport {
            status,
            dim: exact_dim,
            dim_known_lower: exact_dim,
            exact: true,
        }
    } else {
        IndependenceReport {
            status: IndependenceStatus::Assumed,
            dim: exact_dim + unknown,
            dim_known_lower: exact_dim,
            exact: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InequalityRow {
    pub p: usize,
    pub lhs1: f64,
    pub rhs1: f64,
    pub pass1: bool,
    pub lhs2: f64,
    pub rhs2: f64,
    pub pass2: bool,
    /// dim >= p (the weaker hypothesis of the first inequality), when the
    /// dimension is known exactly.
    pub dim_condition: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub rows: Vec<InequalityRow>,
    pub independence: IndependenceReport,
    pub tolerance: f64,
}

impl InequalityReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass1 && r.pass2)
    }
}

/// The two main inequalities on finite-range estimates:
///   (1 + psi_lo_p)(1/n - psi_hi_p) <= (1 + psi_lo_1)(1/n - psi_lo_p)
///   (1 + psi_hi_d)(1/n - psi_hi_p) <= (1 + psi_hi_p)(1/n - psi_lo_p)
pub fn check_main_inequalities(
    est: &ExponentEstimates,
    n: usize,
    tolerance: f64,
    independence: IndependenceReport,
) -> InequalityReport {
    let inv_n = 1.0 / n as f64;
    let d = est.p_max;
    let rows = (0..d)
        .map(|i| {
            let lo_p = est.psi_lower[i];
            let hi_p = est.psi_upper[i];
            let lo_1 = est.psi_lower[0];
            let hi_d = est.psi_upper[d - 1];
            let lhs1 = (1.0 + lo_p) * (inv_n - hi_p);
            let rhs1 = (1.0 + lo_1) * (inv_n - lo_p);
            let lhs2 = (1.0 + hi_d) * (inv_n - hi_p);
            let rhs2 = (1.0 + hi_p) * (inv_n - lo_p);
            let dim_condition = if independence.exact {
                Some(independence.dim >= i + 1)
            } else {
                None
            };
            InequalityRow {
                p: i + 1,
                lhs1,
                rhs1,
                pass1: lhs1 <= rhs1 + tolerance,
                lhs2,
                rhs2,
                pass2: lhs2 <= rhs2 + tolerance,
                dim_condition,
            }
        })
        .collect();
    InequalityReport {
        rows,
        independence,
        tolerance,
    }
}

#[derive(Clone, Debug)]
pub struct TransferenceRow {
    pub p: usize,
    /// psi_lower_p(dual) + n * psi_upper_{d+1-p}(primal)
    pub lower_defect: f64,
    /// psi_upper_p(dual) + n * psi_lower_{d+1-p}(primal)
    pub upper_defect: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct TransferenceReport {
    pub rows: Vec<TransferenceRow>,
    pub tolerance: f64,
}

impl TransferenceReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// The exchange psi_lower_p(dual) = -n psi_upper_{d+1-p}(primal) and its
/// upper/lower counterpart, checked against the tolerance.
pub fn check_transference(
    primal_est: &ExponentEstimates,
    dual_est: &ExponentEstimates,
    n: usize,
    tolerance: f64,
) -> TransferenceReport {
    assert_eq!(primal_est.p_max, dual_est.p_max);
    let d = primal_est.p_max;
    let nf = n as f64;
    let rows = (1..=d)
        .map(|p| {
            let q = d + 1 - p; // d + 1 - p
            let lower_defect = dual_est.psi_lower[p - 1] + nf * primal_est.psi_upper[q - 1];
            let upper_defect = dual_est.psi_upper[p - 1] + nf * primal_est.psi_lower[q - 1];
            TransferenceRow {
                p,
                lower_defect,
                upper_defect,
                pass: lower_defect.abs() <= tolerance && upper_defect.abs() <= tolerance,
            }
        })
        .collect();
    TransferenceReport { rows, tolerance }
}

/// Grid for the direct estimator: an exhaustive scan range plus structured
/// best-approximation candidates by depth.
#[derive(Clone, Debug)]
pub struct DirectGrid {
    pub scan_max: u64,
    pub scan_points: usize,
    pub structured_depth: usize,
}

impl Default for DirectGrid {
    fn default() -> Self {
        DirectGrid {
            scan_max: 100_000,
            scan_points: 24,
            structured_depth: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DirectSample {
    pub ln_t: f64,
    pub gamma: ExponentValue,
}

#[derive(Clone, Debug)]
pub struct DirectEstimate {
    pub p: usize,
    pub samples: Vec<DirectSample>,
    pub beta: ExponentValue,
    pub alpha: ExponentValue,
}

/// Direct estimate of the intermediate exponents: for each t the largest
/// gamma with p independent solutions of |x| <= t, |Theta x - y| <= t^-gamma;
/// beta is the tail max of gamma(t), alpha the tail min.
pub fn beta_alpha_direct(
    theta: &ThetaSpec,
    p: usize,
    grid: &DirectGrid,
    tail_fraction: f64,
) -> Result<DirectEstimate> {
    if theta.m != 1 {
        return Err(Error::InvalidSpec("direct estimator needs m = 1".into()));
    }
    let n = theta.n;
    let d = n + 1;
    if p < 1 || p > d {
        return Err(Error::InvalidSpec("p out of range".into()));
    }
    let mut samples: Vec<DirectSample> = Vec::new();

    // Exhaustive scan over 1 <= x <= scan_max against rational stand-ins.
    let eps = Rational::new(
        BigInt::one(),
        BigInt::from(grid.scan_max).pow(2) * BigInt::from(100_000_000u64),
    );
    let thetas: Vec<Rational> = theta
        .entries
        .iter()
        .map(|row| approximate(&row[0], &eps).value)
        .collect();
    let t_grid: Vec<u64> = {
        let pts = geometric_grid(
            &Rational::from_integer(2.into()),
            &Rational::from_integer(grid.scan_max.into()),
            grid.scan_points,
        );
        let mut v: Vec<u64> = pts
            .iter()
            .map(|r| {
                use num_traits::ToPrimitive;
                r.floor().to_integer().to_u64().unwrap_or(u64::MAX)
            })
            .collect();
        v.dedup();
        v
    };
    // keep a bounded pool of best candidates (plus the axis points), enough
    // to extract p independent ones at every grid stop
    const POOL: usize = 512;
    let mut pool: Vec<(Rational, Vec<BigInt>)> = Vec::new();
    for j in 0..n {
        let mut coeffs = vec![BigInt::zero(); d];
        coeffs[1 + j] = BigInt::one();
        pool.push((Rational::one(), coeffs));
    }
    let mut next_grid = 0usize;
    let mut x = 1u64;
    while x <= grid.scan_max {
        while next_grid < t_grid.len() && t_grid[next_grid] < x {
            let t = t_grid[next_grid];
            if let Some(s) = greedy_gamma(&pool, d, p, t as f64) {
                samples.push(s);
            }
            next_grid += 1;
        }
        let xq = Rational::from_integer(BigInt::from(x));
        let mut err = Rational::zero();
        let mut coeffs = vec![BigInt::from(x)];
        for th in &thetas {
            let target = th * &xq;
            let y = crate::rat::round_int(&target);
            let e = (Rational::from_integer(y.clone()) - target).abs();
            if e > err {
                err = e;
            }
            coeffs.push(y);
        }
        pool.push((err, coeffs));
        if pool.len() > 4 * POOL {
            pool.sort_by(|a, b| a.0.cmp(&b.0));
            pool.truncate(POOL);
        }
        x += 1;
    }
    while next_grid < t_grid.len() {
        if let Some(s) = greedy_gamma(&pool, d, p, t_grid[next_grid] as f64) {
            samples.push(s);
        }
        next_grid += 1;
    }

    // Structured candidates reach far beyond the scan for p = 1, n = 1.
    if p == 1 && n == 1 {
        structured_gamma_samples(&theta.entries[0][0], grid.structured_depth, &mut samples)?;
    }

    samples.sort_by(|a, b| a.ln_t.partial_cmp(&b.ln_t).unwrap());
    if samples.is_empty() {
        return Err(Error::InvalidSpec("direct grid produced no samples".into()));
    }
    let ln_t_max = samples.last().unwrap().ln_t;
    let window_lo = tail_fraction * ln_t_max;
    let mut beta = ExponentValue::Finite(f64::NEG_INFINITY);
    let mut alpha = ExponentValue::Infinite;
    for s in samples.iter().filter(|s| s.ln_t >= window_lo - 1e-12) {
        beta = match (beta, s.gamma) {
            (ExponentValue::Infinite, _) | (_, ExponentValue::Infinite) => ExponentValue::Infinite,
            (ExponentValue::Finite(a), ExponentValue::Finite(b)) => {
                ExponentValue::Finite(a.max(b))
            }
        };
        alpha = match (alpha, s.gamma) {
            (ExponentValue::Infinite, g) => g,
            (ExponentValue::Finite(a), ExponentValue::Finite(b)) => {
                ExponentValue::Finite(a.min(b))
            }
            (a, ExponentValue::Infinite) => a,
        };
    }
    Ok(DirectEstimate {
        p,
        samples,
        beta,
        alpha,
    })
}

/// gamma(t) from the candidate pool: the p-th error of the greedy
/// independent selection among points with |x| <= t.
fn greedy_gamma(
    pool: &[(Rational, Vec<BigInt>)],
    dim: usize,
    p: usize,
    t: f64,
) -> Option<DirectSample> {
    use crate::minima::RationalSpan;
    let t_int = BigInt::from(t as u64);
    let mut eligible: Vec<&(Rational, Vec<BigInt>)> = pool
        .iter()
        .filter(|(_, c)| c[0].clone().abs() <= t_int.clone().abs())
        .collect();
    if eligible.is_empty() {
        return None;
    }
    eligible.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut span = RationalSpan::new(dim);
    let mut picked = 0usize;
    for (err, coeffs) in eligible {
        if span.insert_bigint(coeffs) {
            picked += 1;
            if picked == p {
                let gamma = if err.is_zero() {
                    ExponentValue::Infinite
                } else {
                    ExponentValue::Finite(-ln_f64(err) / t.ln())
                };
                return Some(DirectSample {
                    ln_t: t.ln(),
                    gamma,
                });
            }
        }
    }
    None
}

/// Best-approximation candidates for a single theta: continued-fraction
/// convergents (exact errors through the surd), or Liouville partial sums
/// evaluated in log space. Adds peak samples at each denominator and trough
/// samples just before the next one.
fn structured_gamma_samples(
    spec: &RealSpec,
    depth: usize,
    samples: &mut Vec<DirectSample>,
) -> Result<()> {
    match spec {
        RealSpec::Rational(r) => {
            // exact hit at the full denominator
            let q = r.denom().clone();
            if q > BigInt::one() {
                let ln_q = crate::rat::ln_bigint(&q);
                samples.push(DirectSample {
                    ln_t: ln_q,
                    gamma: ExponentValue::Infinite,
                });
            }
            Ok(())
        }
        RealSpec::PeriodicCf { .. } => {
            let theta = spec.to_surd().expect("cf surd");
            let mut data: Vec<(f64, f64)> = Vec::new(); // (ln q_k, ln err_k)
            for k in 0..depth {
                let conv = cf_convergent(spec, k)?;
                let q = Rational::from_integer(conv.denom().clone());
                // |q theta - p| through the conjugate: exact rationals drive it
                let diff = theta.scale(&q).sub_rational(&(&q * &conv));
                let ln_err = diff.ln_abs();
                data.push((ln_f64(&q), ln_err));
            }
            for i in 0..data.len() {
                let (ln_q, ln_err) = data[i];
                if ln_q > 0.0 {
                    samples.push(DirectSample {
                        ln_t: ln_q,
                        gamma: ExponentValue::Finite(-ln_err / ln_q),
                    });
                }
                if i + 1 < data.len() {
                    let (ln_q_next, _) = data[i + 1];
                    if ln_q_next > ln_q + 1e-9 {
                        samples.push(DirectSample {
                            ln_t: ln_q_next,
                            gamma: ExponentValue::Finite(-ln_err / ln_q_next),
                        });
                    }
                }
            }
            Ok(())
        }
        RealSpec::Liouville { base } => {
            let ln_b = (*base as f64).ln();
            let mut fact = 1f64; // k!
            let mut data: Vec<(f64, f64)> = Vec::new();
            for k in 1..=depth.min(120) {
                if k > 1 {
                    fact *= k as f64;
                }
                let fact_next = fact * (k as f64 + 1.0);
                let fact_next2 = fact_next * (k as f64 + 2.0);
                // err(b^{k!}) = sum_{j>k} b^{k!-j!}; the second term is
                // relatively below b^{(k+1)!-(k+2)!}
                let ln_err = (fact - fact_next) * ln_b
                    + ((fact_next - fact_next2) * ln_b).exp().ln_1p();
                let ln_t = fact * ln_b;
                data.push((ln_t, ln_err));
            }
            for i in 0..data.len() {
                let (ln_t, ln_err) = data[i];
                if ln_t > 0.0 {
                    samples.push(DirectSample {
                        ln_t,
                        gamma: ExponentValue::Finite(-ln_err / ln_t),
                    });
                }
                if i + 1 < data.len() {
                    let (ln_t_next, _) = data[i + 1];
                    samples.push(DirectSample {
                        ln_t: ln_t_next,
                        gamma: ExponentValue::Finite(-ln_err / ln_t_next),
                    });
                }
            }
            Ok(())
        }
    }
}

/// How a theta-level trace is produced.
#[derive(Clone, Debug)]
pub struct TraceRequest {
    pub mode: RelationMode,
    pub u_min: Rational,
    pub u_max: Rational,
    pub samples: usize,
    pub p_max: usize,
    /// Upper bound on |theta_j - stand-in|; tightened to u_max^(-2d)/4 if
    /// coarser than that.
    pub faithfulness: Rational,
    /// Re-run with squared faithfulness and require identical witnesses.
    pub stability_check: bool,
    pub budget: usize,
}

#[derive(Clone, Debug)]
pub struct ThetaTrace {
    pub trace: Trace,
    pub lattice: Lattice,
    pub path: PathSpec,
    pub faithfulness: Rational,
}

/// u_max^(-2d) / 4: the faithfulness a trace up to u_max is trusted at.
pub fn required_faithfulness(u_max: &Rational, d: usize) -> Rational {
    let pow = crate::rat::pow_i64(u_max, 2 * d as i64);
    (Rational::from_integer(4.into()) * pow).recip()
}

/// Build the lattice for theta at a policy-tightened faithfulness, trace it,
/// and optionally confirm stability under squared precision.
pub fn trace_for_theta(theta: &ThetaSpec, req: &TraceRequest) -> Result<ThetaTrace> {
    let d = theta.d();
    let required = required_faithfulness(&req.u_max, d);
    let mut faithfulness = req.faithfulness.clone();
    if faithfulness > required {
        faithfulness = required;
    }
    let build = |f: &Rational| -> Result<(Lattice, PathSpec)> {
        Ok(match req.mode {
            RelationMode::Primal => (primal_lattice(theta, f), PathSpec::primal(theta.m, theta.n)),
            RelationMode::Dual => {
                if theta.m != 1 {
                    return Err(Error::InvalidSpec("dual flow needs m = 1".into()));
                }
                (dual_lattice(theta, f), PathSpec::dual(theta.n))
            }
        })
    };
    let opts = MinimaOptions {
        strategy: crate::minima::MinimaStrategy::BranchBound,
        budget: req.budget,
    };
    let (lattice, path) = build(&faithfulness)?;
    let trace = psi_trace(
        &lattice,
        &path,
        &req.u_min,
        &req.u_max,
        req.samples,
        req.p_max,
        &opts,
    )?;
    if req.stability_check {
        let refined = &faithfulness * &faithfulness;
        let (lattice2, path2) = build(&refined)?;
        let trace2 = psi_trace(
            &lattice2,
            &path2,
            &req.u_min,
            &req.u_max,
            req.samples,
            req.p_max,
            &opts,
        )?;
        if !same_witnesses(&trace, &trace2) {
            return Err(Error::UnstableApproximation);
        }
    }
    Ok(ThetaTrace {
        trace,
        lattice,
        path,
        faithfulness,
    })
}

pub fn same_witnesses(a: &Trace, b: &Trace) -> bool {
    a.samples.len() == b.samples.len()
        && a.samples
            .iter()
            .zip(&b.samples)
            .all(|(x, y)| x.witnesses == y.witnesses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minima::MinimaStrategy;
    use crate::numbers::golden_ratio;
    use crate::rat::rat;

    fn opts() -> MinimaOptions {
        MinimaOptions {
            strategy: MinimaStrategy::BranchBound,
            budget: 2_000_000,
        }
    }

    fn zero_theta(n: usize) -> ThetaSpec {
        ThetaSpec::column(vec![RealSpec::Rational(rat(0, 1)); n]).unwrap()
    }

    #[test]
    fn zero_theta_trace_is_exact() {
        // psi_1 = -1 and psi_2 = 1 exactly: lambda_1 u = 1, lambda_2 = u
        let theta = zero_theta(1);
        let lat = primal_lattice(&theta, &rat(1, 10));
        let path = PathSpec::primal(1, 1);
        let trace = psi_trace(&lat, &path, &rat(3, 2), &rat(1000, 1), 25, 2, &opts()).unwrap();
        for s in &trace.samples {
            assert!(s.event, "every sample of the zero flow is an event");
            assert_eq!(s.lambdas[0].mul(&s.u), ScaleValue::one());
            assert_eq!(s.lambdas[1], s.u);
            assert!((s.psis[0] + 1.0).abs() < 1e-12);
            assert!((s.psis[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_theta_n2_trace_is_exact() {
        // lambda_1 = u^-2, lambda_2 = lambda_3 = u; with s = 2 ln u this gives
        // psi_1 = -1, psi_2 = psi_3 = 1/2
        let theta = zero_theta(2);
        let lat = primal_lattice(&theta, &rat(1, 10));
        let path = PathSpec::primal(1, 2);
        let trace = psi_trace(&lat, &path, &rat(3, 2), &rat(50, 1), 10, 3, &opts()).unwrap();
        for s in &trace.samples {
            assert_eq!(s.lambdas[0].mul(&s.u.pow_int(2)), ScaleValue::one());
            assert_eq!(s.lambdas[1], s.u);
            assert_eq!(s.lambdas[2], s.u);
            assert!((s.psis[0] + 1.0).abs() < 1e-12);
            assert!((s.psis[1] - 0.5).abs() < 1e-12);
            assert!((s.psis[2] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_theta_estimates_hit_bounds() {
        let theta = zero_theta(1);
        let lat = primal_lattice(&theta, &rat(1, 10));
        let path = PathSpec::primal(1, 1);
        let trace = psi_trace(&lat, &path, &rat(3, 2), &rat(1000, 1), 25, 2, &opts()).unwrap();
        let est = estimate_exponents(&trace, 0.5).unwrap();
        assert!((est.psi_lower[0] + 1.0).abs() < 1e-12);
        assert!((est.psi_upper[0] + 1.0).abs() < 1e-12);
        assert!((est.psi_lower[1] - 1.0).abs() < 1e-12);
        assert!((est.psi_upper[1] - 1.0).abs() < 1e-12);
        assert!(check_bounds(&est, 1, 1, 0.02).pass());
        // boundary psi_lower = -1 turns beta infinite
        let ba = beta_alpha_from_psi(&est, 1, 1);
        assert_eq!(ba[0].0, ExponentValue::Infinite);
    }

    #[test]
    fn beta_alpha_from_psi_examples() {
        let est = ExponentEstimates {
            p_max: 1,
            s_max: 10.0,
            window_lo: 5.0,
            tail_fraction: 0.5,
            tail_samples: 1,
            psi_lower: vec![0.0],
            psi_upper: vec![0.0],
            event_psi1_lower: None,
        };
        let ba = beta_alpha_from_psi(&est, 1, 1);
        assert_eq!(ba[0].0, ExponentValue::Finite(1.0));
        assert_eq!(ba[0].1, ExponentValue::Finite(1.0));
    }

    #[test]
    fn fabricated_bounds_violation_fails() {
        let est = ExponentEstimates {
            p_max: 1,
            s_max: 10.0,
            window_lo: 5.0,
            tail_fraction: 0.5,
            tail_samples: 1,
            psi_lower: vec![-0.2],
            psi_upper: vec![1.2],
            event_psi1_lower: None,
        };
        assert!(!check_bounds(&est, 1, 1, 0.02).pass());
    }

    #[test]
    fn main_inequalities_equality_and_negative_control() {
        let mk = |lo: Vec<f64>, hi: Vec<f64>| ExponentEstimates {
            p_max: lo.len(),
            s_max: 25.0,
            window_lo: 20.0,
            tail_fraction: 0.8,
            tail_samples: 10,
            psi_lower: lo,
            psi_upper: hi,
            event_psi1_lower: None,
        };
        let indep = IndependenceReport {
            status: IndependenceStatus::Verified,
            dim: 2,
            dim_known_lower: 2,
            exact: true,
        };
        // all exponents zero, n = 1: both sides equal 1
        let est = mk(vec![0.0, 0.0], vec![0.0, 0.0]);
        let rep = check_main_inequalities(&est, 1, 0.05, indep.clone());
        assert!(rep.pass());
        assert!((rep.rows[0].lhs1 - 1.0).abs() < 1e-12);
        assert!((rep.rows[0].rhs1 - 1.0).abs() < 1e-12);
        // fabricated violation by 0.5
        let est = mk(vec![0.0, 0.3], vec![0.0, -0.2]);
        // p = 2: lhs1 = (1+0.3)(1+0.2) = 1.56 vs rhs1 = (1+0)(1-0.3) = 0.7
        let rep = check_main_inequalities(&est, 1, 0.05, indep);
        assert!(!rep.pass());
    }

    #[test]
    fn transference_substitution_examples() {
        let mk = |lo: Vec<f64>, hi: Vec<f64>| ExponentEstimates {
            p_max: lo.len(),
            s_max: 25.0,
            window_lo: 20.0,
            tail_fraction: 0.8,
            tail_samples: 10,
            psi_lower: lo,
            psi_upper: hi,
            event_psi1_lower: None,
        };
        // n = 1, all zeros: dual must be all zeros
        let primal = mk(vec![0.0, 0.0], vec![0.0, 0.0]);
        let dual = mk(vec![0.0, 0.0], vec![0.0, 0.0]);
        assert!(check_transference(&primal, &dual, 1, 0.05).pass());
        // n = 2 substitution: primal psi_hi_3 = 0.5 predicts dual psi_lo_1 = -1
        let primal = mk(vec![-1.0, 0.0, 0.2], vec![-0.8, 0.1, 0.5]);
        let dual = mk(vec![-1.0, -0.2, 1.6], vec![-0.4, 0.0, 2.0]);
        let rep = check_transference(&primal, &dual, 2, 0.05);
        assert!((rep.rows[0].lower_defect - (-1.0 + 2.0 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn direct_estimator_zero_theta_p2() {
        // theta = 0, p = 2: the second independent solution is an axis point
        // with error 1, so gamma(t) = 0
        let theta = zero_theta(1);
        let grid = DirectGrid {
            scan_max: 200,
            scan_points: 6,
            structured_depth: 0,
        };
        let est = beta_alpha_direct(&theta, 2, &grid, 0.5).unwrap();
        assert_eq!(est.beta, ExponentValue::Finite(0.0));
        assert_eq!(est.alpha, ExponentValue::Finite(0.0));
        // p = 1 hits the exact solution (1, 0)
        let est = beta_alpha_direct(&theta, 1, &grid, 0.5).unwrap();
        assert_eq!(est.beta, ExponentValue::Infinite);
    }

    #[test]
    fn direct_estimator_golden_ratio() {
        // oracle: |q phi - p| = phi^-k at the k-th convergent, so gamma(t)
        // oscillates around 1; estimates over the deep tail land in [0.9, 1.1]
        let theta = ThetaSpec::column(vec![golden_ratio()]).unwrap();
        let grid = DirectGrid {
            scan_max: 3_000,
            scan_points: 10,
            structured_depth: 28,
        };
        let est = beta_alpha_direct(&theta, 1, &grid, 0.75).unwrap();
        let beta = est.beta.as_finite().unwrap();
        let alpha = est.alpha.as_finite().unwrap();
        assert!((0.9..=1.1).contains(&beta), "beta {beta}");
        assert!((0.9..=1.1).contains(&alpha), "alpha {alpha}");
        assert!(beta >= alpha);
    }

    #[test]
    fn direct_estimator_rational_theta_hits_infinity() {
        let theta = ThetaSpec::column(vec![RealSpec::Rational(rat(22, 7))]).unwrap();
        let grid = DirectGrid {
            scan_max: 100,
            scan_points: 8,
            structured_depth: 0,
        };
        let est = beta_alpha_direct(&theta, 1, &grid, 0.9).unwrap();
        assert_eq!(est.beta, ExponentValue::Infinite);
    }

    #[test]
    fn independence_classification() {
        use crate::numbers::sqrt2;
        // golden ratio: verified independent (dim 2)
        let t = ThetaSpec::column(vec![golden_ratio()]).unwrap();
        let r = independence_of(&t);
        assert_eq!(r.status, IndependenceStatus::Verified);
        assert_eq!(r.dim, 2);
        // rational: failed (dim 1)
        let t = ThetaSpec::column(vec![RealSpec::Rational(rat(22, 7))]).unwrap();
        let r = independence_of(&t);
        assert_eq!(r.status, IndependenceStatus::Failed);
        assert_eq!(r.dim, 1);
        // sqrt2 - 1 and sqrt3 - 1: distinct discriminants, verified (dim 3)
        let t = ThetaSpec::column(vec![
            RealSpec::periodic_cf(vec![0], vec![2]).unwrap(),
            RealSpec::periodic_cf(vec![0], vec![1, 2]).unwrap(),
        ])
        .unwrap();
        let r = independence_of(&t);
        assert_eq!(r.status, IndependenceStatus::Verified);
        assert_eq!(r.dim, 3);
        // sqrt2 and 1 + sqrt8: same squarefree part, dependent
        let t = ThetaSpec::column(vec![
            sqrt2(),
            RealSpec::periodic_cf(vec![3, 1], vec![4, 1]).unwrap(), // 1+sqrt(8) = 3.828...
        ])
        .unwrap();
        let r = independence_of(&t);
        assert_eq!(r.status, IndependenceStatus::Failed);
        // Liouville: assumed
        let t = ThetaSpec::column(vec![RealSpec::liouville(10).unwrap()]).unwrap();
        let r = independence_of(&t);
        assert_eq!(r.status, IndependenceStatus::Assumed);
    }

    #[test]
    fn golden_trace_minkowski_band_and_liminf_consistency() {
        let theta = ThetaSpec::column(vec![golden_ratio()]).unwrap();
        let req = TraceRequest {
            mode: RelationMode::Primal,
            u_min: rat(3, 2),
            u_max: rat(1100, 1),
            samples: 60,
            p_max: 2,
            faithfulness: rat(1, 1_000_000),
            stability_check: true,
            budget: 2_000_000,
        };
        let out = trace_for_theta(&theta, &req).unwrap();
        // |sum_p s psi_p| <= ln d!: exactly, 1/d! <= prod lambda <= 1
        let two = Rational::from_integer(2.into());
        for s in &out.trace.samples {
            let prod = s.lambdas[0].mul(&s.lambdas[1]);
            assert!(prod.cmp_rational(&two.recip()) != std::cmp::Ordering::Less);
            assert!(prod.cmp_rational(&Rational::one()) != std::cmp::Ordering::Greater);
        }
        // event-restricted min of psi_1 matches the unrestricted min
        let est = estimate_exponents(&out.trace, 0.5).unwrap();
        let ev = est.event_psi1_lower.expect("events in window");
        assert!((ev - est.psi_lower[0]).abs() < 0.02, "{ev} vs {}", est.psi_lower[0]);
    }

    #[test]
    fn csv_output_is_stable() {
        let theta = zero_theta(1);
        let lat = primal_lattice(&theta, &rat(1, 10));
        let path = PathSpec::primal(1, 1);
        let trace = psi_trace(&lat, &path, &rat(2, 1), &rat(20, 1), 5, 2, &opts()).unwrap();
        let mut a = Vec::new();
        write_trace_csv(&trace, &mut a, false).unwrap();
        let mut b = Vec::new();
        write_trace_csv(&trace, &mut b, false).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("u,s,p,lambda,psi,event\n"));
        let mut c = Vec::new();
        write_trace_csv(&trace, &mut c, true).unwrap();
        let text = String::from_utf8(c).unwrap();
        assert!(text.starts_with("u,s,p,lambda,psi,event,lambda_q,lambda_rho\n"));
        // exact columns carry "1/2" style rationals
        assert!(text.lines().nth(1).unwrap().split(',').count() == 8);
    }
}
