//! Front-facet events and the scale relations they pin down.
//!
//! A parameter u is an event when the minimal box lambda_1(B(u)) B(u) has a
//! lattice point on the facet orthogonal to the first coordinate axis. Any
//! parameter shrinks to one: mu is the largest |v_1| / (lambda_1 h_1) over
//! the minimal box's points, and moving the scale so that the first
//! half-width contracts by mu lands exactly on an event with
//! lambda_1' = mu^(1/d) lambda_1. Everything here is ScaleValue-exact.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::enumerate::{enumerate_in_box, EnumerationOptions, EnumerationStrategy};
use crate::error::{Error, Result};
use crate::lattice::{box_at, BoxShape, Lattice, PathSpec};
use crate::minima::{
    box_norm, cmp_coeff_lex, successive_minima_with, LatticePoint, MinimaOptions, MinimaResult,
};
use crate::rat::{geometric_grid, Rational};
use crate::scale::ScaleValue;

/// A scale at which the first minimum touches the front facet.
#[derive(Clone, Debug)]
pub struct Event {
    pub u: ScaleValue,
    /// s = c ln u, for reporting only.
    pub s: f64,
    pub lambda1: ScaleValue,
    /// Witness with |z_1| = lambda_1 h_1 exactly.
    pub witness: LatticePoint,
}

/// Paths of the event machinery: m = 1 with equal trailing weights,
/// tau_i = -tau_1 / n for i >= 2. Returns (w_1, n = d - 1).
fn corollary_shape(path: &PathSpec) -> Result<(i64, usize)> {
    let w = path.weights();
    let d = w.len();
    if d < 2 {
        return Err(Error::InvalidSpec("path dimension must be >= 2".into()));
    }
    let tail = w[1];
    if w[1..].iter().any(|&x| x != tail) || tail == 0 || w[0] != -((d as i64 - 1) * tail) {
        return Err(Error::InvalidSpec(
            "event analysis needs equal trailing weights with w_1 = -(d-1) w_tail".into(),
        ));
    }
    Ok((w[0], d - 1))
}

/// Largest |v_1| / (lambda_1 h_1) over nonzero points of the minimal box,
/// with its witness. mu = 1 means the front facet is already touched.
pub(crate) fn front_facet_mu(
    lattice: &Lattice,
    box_: &BoxShape,
    lambda1: &ScaleValue,
    budget: usize,
) -> Result<(ScaleValue, LatticePoint)> {
    let opts = EnumerationOptions {
        strategy: EnumerationStrategy::Auto,
        budget,
    };
    let points = enumerate_in_box(lattice, box_, lambda1, &opts)?;
    let cap = lambda1.mul(box_.half_width(0));
    let mut best: Option<(ScaleValue, LatticePoint)> = None;
    for pt in points {
        if pt.coords[0].is_zero() {
            continue;
        }
        let ratio = ScaleValue::from_rational(pt.coords[0].abs()).div(&cap);
        let better = match &best {
            None => true,
            Some((b, w)) => match ratio.cmp_exact(b) {
                Ordering::Greater => true,
                Ordering::Equal => cmp_coeff_lex(&pt.coeffs, &w.coeffs) == Ordering::Less,
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((ratio, pt));
        }
    }
    best.ok_or(Error::NoFrontFacet)
}

/// Shrink the minimal box at `u` along the first axis until a lattice point
/// meets the front facet; returns that event (possibly at u itself).
pub fn shrink_to_event(
    lattice: &Lattice,
    path: &PathSpec,
    u: &ScaleValue,
    opts: &MinimaOptions,
) -> Result<Event> {
    let (w1, n) = corollary_shape(path)?;
    let d = lattice.dim();
    let box_ = box_at(path, u)?;
    let minima = successive_minima_with(lattice, &box_, 1, opts)?;
    let lambda1 = minima.lambdas[0].clone();
    let (mu, witness) = front_facet_mu(lattice, &box_, &lambda1, opts.budget)?;
    debug_assert!(mu.cmp_rational(&Rational::one()) != Ordering::Greater);

    // e^{tau_1(s')} = mu^{n/d} e^{tau_1(s)}  =>  u' = u * mu^{n / (d w_1)}
    let num = if w1 > 0 { n as i64 } else { -(n as i64) };
    let den = d as u32 * w1.unsigned_abs() as u32;
    let u_event = u.mul(&mu.pow_rat(num, den));
    let lambda1_event = lambda1.mul(&mu.pow_rat(1, d as u32));

    // Exact identity: |z_1| = lambda_1(B(s')) e^{tau_1(s')}.
    let h1_event = u_event.pow_int(w1);
    debug_assert!(
        ScaleValue::from_rational(witness.coords[0].abs())
            == lambda1_event.mul(&h1_event)
    );

    Ok(Event {
        s: path.s_of(&u_event),
        u: u_event,
        lambda1: lambda1_event,
        witness,
    })
}

/// Scan a geometric grid, shrink each point to its event, and deduplicate by
/// witness. Events are sorted by scale; the list is best-effort complete at
/// the given grid resolution.
pub fn front_facet_events(
    lattice: &Lattice,
    path: &PathSpec,
    u_min: &Rational,
    u_max: &Rational,
    grid_count: usize,
    opts: &MinimaOptions,
) -> Result<Vec<Event>> {
    use rayon::prelude::*;
    if !(u_min > &Rational::one() && u_max > u_min) {
        return Err(Error::ScaleDomain);
    }
    let grid = geometric_grid(u_min, u_max, grid_count);
    let results: Vec<Result<Event>> = grid
        .par_iter()
        .map(|u| shrink_to_event(lattice, path, &ScaleValue::from_rational(u.clone()), opts))
        .collect();
    let mut events = Vec::new();
    let mut hard_error = None;
    let mut all_failed = true;
    for r in results {
        match r {
            Ok(e) => {
                all_failed = false;
                events.push(e);
            }
            Err(Error::NoFrontFacet) => {}
            Err(e) => hard_error = Some(e),
        }
    }
    if let Some(e) = hard_error {
        return Err(e);
    }
    if all_failed {
        return Err(Error::NoFrontFacet);
    }
    events.sort_by(|a, b| a.u.cmp_exact(&b.u));
    let mut seen: Vec<Vec<num_bigint::BigInt>> = Vec::new();
    events.retain(|e| {
        if seen.iter().any(|s| cmp_coeff_lex(s, &e.witness.coeffs) == Ordering::Equal) {
            false
        } else {
            seen.push(e.witness.coeffs.clone());
            true
        }
    });
    Ok(events)
}

/// The companion scale u_1 of an event: u_1^{w_1} = u_0^{w_1}
/// (lambda_1/lambda_p)^{n/d}, exactly. Equals u_0 when lambda_p = lambda_1.
pub fn companion_scale(
    event: &Event,
    path: &PathSpec,
    p: usize,
    minima_at_event: &MinimaResult,
) -> Result<ScaleValue> {
    let (w1, n) = corollary_shape(path)?;
    let d = path.dim();
    assert!(p >= 1 && p <= minima_at_event.lambdas.len());
    let lambda1 = &minima_at_event.lambdas[0];
    let lambda_p = &minima_at_event.lambdas[p - 1];
    let ratio = lambda1.div(lambda_p);
    let num = if w1 > 0 { n as i64 } else { -(n as i64) };
    let den = d as u32 * w1.unsigned_abs() as u32;
    Ok(event.u.mul(&ratio.pow_rat(num, den)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationMode {
    Primal,
    Dual,
}

/// One reported inequality chain lo <= mid <= hi (decimal reporting of the
/// exact checks).
#[derive(Clone, Debug)]
pub struct BracketRow {
    pub label: String,
    pub lo: f64,
    pub mid: f64,
    pub hi: f64,
}

/// The exact ratio checks at an event and its companion scale.
#[derive(Clone, Debug)]
pub struct EventRelationReport {
    pub mode: RelationMode,
    pub u0: ScaleValue,
    pub u1: ScaleValue,
    pub s0: f64,
    pub s1: f64,
    pub lambda1_s0: ScaleValue,
    pub lambda_p_s0: ScaleValue,
    pub lambda_p_s1: ScaleValue,
    /// Per-coordinate ratio values; all must lie in [1, 2] exactly.
    pub ratios: Vec<ScaleValue>,
    pub ratio_pass: Vec<bool>,
    /// Per-coordinate log form of the same chains.
    pub brackets: Vec<BracketRow>,
    /// Mode-specialized rewritten chains plus the companion-scale relation.
    pub specialized: Vec<BracketRow>,
}

impl EventRelationReport {
    pub fn pass(&self) -> bool {
        self.ratio_pass.iter().all(|&b| b)
    }
}

/// Verify the core two-sided bounds at an event: with s_1 from the companion
/// relation, every ratio e^{tau_i(s_1)} lambda_p(B(s_1)) over the matching
/// event quantity lies in [1, 2], by exact comparison.
pub fn verify_event_relations(
    lattice: &Lattice,
    path: &PathSpec,
    event: &Event,
    p: usize,
    mode: RelationMode,
    opts: &MinimaOptions,
) -> Result<EventRelationReport> {
    let (w1, n) = corollary_shape(path)?;
    match mode {
        RelationMode::Primal if w1 <= 0 => {
            return Err(Error::InvalidSpec("primal mode needs w_1 > 0".into()))
        }
        RelationMode::Dual if w1 >= 0 => {
            return Err(Error::InvalidSpec("dual mode needs w_1 < 0".into()))
        }
        _ => {}
    }
    let d = lattice.dim();
    let box0 = box_at(path, &event.u)?;
    let minima0 = successive_minima_with(lattice, &box0, p, opts)?;
    let lambda1_s0 = minima0.lambdas[0].clone();

    // the event data must be reproduced exactly, and the witness must sit on
    // the front facet
    if lambda1_s0 != event.lambda1 {
        return Err(Error::NotAnEvent);
    }
    let h1 = box0.half_width(0);
    if ScaleValue::from_rational(event.witness.coords[0].abs()) != lambda1_s0.mul(h1) {
        return Err(Error::NotAnEvent);
    }
    if box_norm(&event.witness, &box0)? != lambda1_s0 {
        return Err(Error::NotAnEvent);
    }

    let lambda_p_s0 = minima0.lambdas[p - 1].clone();
    let u1 = companion_scale(event, path, p, &minima0)?;
    let box1 = box_at(path, &u1)?;
    let minima1 = successive_minima_with(lattice, &box1, p, opts)?;
    let lambda_p_s1 = minima1.lambdas[p - 1].clone();

    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let mut ratios = Vec::with_capacity(d);
    let mut ratio_pass = Vec::with_capacity(d);
    let mut brackets = Vec::with_capacity(d);
    let s0 = path.s_of(&event.u);
    let s1 = path.s_of(&u1);
    let ln2 = std::f64::consts::LN_2;
    for i in 0..d {
        let num = path.tau_factor(&u1, i).mul(&lambda_p_s1);
        let den = if i == 0 {
            path.tau_factor(&event.u, i).mul(&lambda1_s0)
        } else {
            path.tau_factor(&event.u, i).mul(&lambda_p_s0)
        };
        let ratio = num.div(&den);
        let ok = ratio.cmp_rational(&one) != Ordering::Less
            && ratio.cmp_rational(&two) != Ordering::Greater;
        let lo = den.ln_f64();
        brackets.push(BracketRow {
            label: format!("coordinate {}", i + 1),
            lo,
            mid: num.ln_f64(),
            hi: lo + ln2,
        });
        ratios.push(ratio);
        ratio_pass.push(ok);
    }

    // Mode-specialized rewritten forms (decimal reporting of the same facts).
    let nf = n as f64;
    let df = d as f64;
    let psi1_s0 = lambda1_s0.ln_f64() / s0;
    let psip_s0 = lambda_p_s0.ln_f64() / s0;
    let psip_s1 = lambda_p_s1.ln_f64() / s1;
    let specialized = match mode {
        RelationMode::Primal => vec![
            BracketRow {
                label: "s0(1 + psi_1(s0)) <= s1(1 + psi_p(s1)) <= +ln 2".into(),
                lo: s0 * (1.0 + psi1_s0),
                mid: s1 * (1.0 + psip_s1),
                hi: s0 * (1.0 + psi1_s0) + ln2,
            },
            BracketRow {
                label: "s0(1/n - psi_p(s0)) - ln 2 <= s1(1/n - psi_p(s1)) <= s0(1/n - psi_p(s0))"
                    .into(),
                lo: s0 * (1.0 / nf - psip_s0) - ln2,
                mid: s1 * (1.0 / nf - psip_s1),
                hi: s0 * (1.0 / nf - psip_s0),
            },
            BracketRow {
                label: "s1 = s0(1 + (n/d)(psi_1(s0) - psi_p(s0)))".into(),
                lo: s0 * (1.0 + nf / df * (psi1_s0 - psip_s0)),
                mid: s1,
                hi: s0 * (1.0 + nf / df * (psi1_s0 - psip_s0)),
            },
        ],
        RelationMode::Dual => vec![
            BracketRow {
                label: "s0(n - psi_1(s0)) - ln 2 <= s1(n - psi_p(s1)) <= s0(n - psi_1(s0))".into(),
                lo: s0 * (nf - psi1_s0) - ln2,
                mid: s1 * (nf - psip_s1),
                hi: s0 * (nf - psi1_s0),
            },
            BracketRow {
                label: "s0(1 + psi_p(s0)) <= s1(1 + psi_p(s1)) <= +ln 2".into(),
                lo: s0 * (1.0 + psip_s0),
                mid: s1 * (1.0 + psip_s1),
                hi: s0 * (1.0 + psip_s0) + ln2,
            },
            BracketRow {
                label: "s1 = s0(1 + (1/d)(psi_p(s0) - psi_1(s0)))".into(),
                lo: s0 * (1.0 + (psip_s0 - psi1_s0) / df),
                mid: s1,
                hi: s0 * (1.0 + (psip_s0 - psi1_s0) / df),
            },
        ],
    };

    Ok(EventRelationReport {
        mode,
        u0: event.u.clone(),
        u1,
        s0,
        s1,
        lambda1_s0,
        lambda_p_s0,
        lambda_p_s1,
        ratios,
        ratio_pass,
        brackets,
        specialized,
    })
}
