//! Lattice-point enumeration engines.
//!
//! Three candidate generators sit behind one contract (every nonzero lattice
//! point of the scaled box, one per +/- pair, decided by exact comparisons):
//!
//! * `FastScan`: the m = 1 primal structure (x, y_j - theta_j x); scans the
//!   first coefficient, the others live in short intervals around theta_j x.
//! * `RangeScan`: integer coefficient ranges from the inverse basis applied
//!   to the bounding cube; the simple engine, also the test oracle.
//! * `Reduced`: LLL-reduced search tree with exact Gram-Schmidt bounds and
//!   per-coordinate projector pruning; handles scales the scans cannot.
//!
//! Candidate generation may use rational outer bounds; membership of every
//! emitted point is always checked against the exact `ScaleValue` box.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{BoxShape, Lattice};
use crate::lll::{lll_reduce, ReducedBasis};
use crate::minima::{box_norm, cmp_coeff_lex, LatticePoint, RationalSpan};
use crate::rat::{round_int, Rational};
use crate::scale::ScaleValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumerationStrategy {
    Auto,
    FastScan,
    RangeScan,
    Reduced,
}

#[derive(Clone, Debug)]
pub struct EnumerationOptions {
    pub strategy: EnumerationStrategy,
    pub budget: usize,
}

pub const DEFAULT_BUDGET: usize = 5_000_000;

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            strategy: EnumerationStrategy::Auto,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Per-coordinate caps of the target region |z_i| <= scale * h_i.
pub(crate) struct BoxBounds {
    pub exact: Vec<ScaleValue>,
    pub outer: Vec<Rational>,
}

impl BoxBounds {
    pub fn new(box_: &BoxShape, scale: &ScaleValue) -> Self {
        let exact: Vec<ScaleValue> = box_
            .half_widths()
            .iter()
            .map(|h| scale.mul(h))
            .collect();
        let outer = exact.iter().map(|e| e.outer_rational()).collect();
        BoxBounds { exact, outer }
    }

    pub fn contains(&self, coords: &[Rational]) -> bool {
        coords
            .iter()
            .zip(&self.exact)
            .all(|(z, b)| b.cmp_rational(&z.abs()) != Ordering::Less)
    }
}

/// For an m = 1 primal basis [[1, 0], [-theta, E_n]] return the theta column.
pub(crate) fn primal_view(lattice: &Lattice) -> Option<Vec<Rational>> {
    let b = lattice.basis();
    let d = lattice.dim();
    if d < 2 || b[(0, 0)] != Rational::one() {
        return None;
    }
    for j in 1..d {
        if !b[(0, j)].is_zero() {
            return None;
        }
        for i in 1..d {
            let expect = if i == j { Rational::one() } else { Rational::zero() };
            if b[(i, j)] != expect {
                return None;
            }
        }
    }
    Some((1..d).map(|i| -b[(i, 0)].clone()).collect())
}

/// Every nonzero lattice point z with |z_i| <= scale * h_i for all i, one
/// representative per +/- pair, sorted by coefficient vector.
pub fn enumerate_in_box(
    lattice: &Lattice,
    box_: &BoxShape,
    scale: &ScaleValue,
    opts: &EnumerationOptions,
) -> Result<Vec<LatticePoint>> {
    assert_eq!(lattice.dim(), box_.dim());
    let bounds = BoxBounds::new(box_, scale);
    let mut points = match opts.strategy {
        EnumerationStrategy::FastScan => fast_scan(lattice, &bounds, opts.budget)?,
        EnumerationStrategy::RangeScan => range_scan(lattice, &bounds, opts.budget)?,
        EnumerationStrategy::Reduced => reduced_collect(lattice, &bounds, opts.budget)?,
        EnumerationStrategy::Auto => {
            let view = primal_view(lattice);
            if let Some(_) = &view {
                if let Some(x_max) = bounds.exact[0].floor_int().to_usize() {
                    if x_max <= 50_000.min(opts.budget) {
                        return finish(fast_scan(lattice, &bounds, opts.budget)?);
                    }
                }
            }
            if range_product_estimate(lattice, &bounds)
                .map_or(false, |p| p <= 200_000.min(opts.budget))
            {
                range_scan(lattice, &bounds, opts.budget)?
            } else {
                reduced_collect(lattice, &bounds, opts.budget)?
            }
        }
    };
    points.sort_by(|a, b| cmp_coeff_lex(&a.coeffs, &b.coeffs));
    Ok(points)
}

fn finish(mut points: Vec<LatticePoint>) -> Result<Vec<LatticePoint>> {
    points.sort_by(|a, b| cmp_coeff_lex(&a.coeffs, &b.coeffs));
    Ok(points)
}

fn range_product_estimate(lattice: &Lattice, bounds: &BoxBounds) -> Option<usize> {
    let inv = lattice.basis().inverse()?;
    let d = lattice.dim();
    let mut product: usize = 1;
    for i in 0..d {
        let mut r = Rational::zero();
        for j in 0..d {
            r += inv[(i, j)].abs() * &bounds.outer[j];
        }
        let width = r.floor().to_integer().to_usize()?;
        product = product.checked_mul(2 * width + 1)?;
    }
    Some(product)
}

fn fast_scan(lattice: &Lattice, bounds: &BoxBounds, budget: usize) -> Result<Vec<LatticePoint>> {
    let thetas = primal_view(lattice).ok_or(Error::InvalidSpec(
        "fast scan requires an m = 1 primal basis".into(),
    ))?;
    let d = lattice.dim();
    let x_max = bounds.exact[0].floor_int();
    if x_max > BigInt::from(budget) {
        return Err(Error::BudgetExceeded { budget });
    }
    let mut work = 0usize;
    let mut out = Vec::new();

    // x = 0: coordinates are (0, y_1, ..., y_n); canonical reps only.
    let caps: Vec<BigInt> = (1..d).map(|i| bounds.exact[i].floor_int()).collect();
    let mut y = vec![BigInt::zero(); d - 1];
    enumerate_y_cube(&caps, &mut y, 0, true, &mut |ys: &[BigInt]| {
        work += 1;
        if work > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        if ys.iter().all(|v| v.is_zero()) {
            return Ok(());
        }
        let mut coeffs = vec![BigInt::zero()];
        coeffs.extend_from_slice(ys);
        let mut coords = vec![Rational::zero()];
        coords.extend(ys.iter().map(|v| Rational::from_integer(v.clone())));
        out.push(LatticePoint { coeffs, coords }.canonical());
        Ok(())
    })?;

    // x >= 1: per coordinate j the feasible y_j sit in a short interval
    // around theta_j x.
    let mut x = BigInt::one();
    while x <= x_max {
        work += 1;
        if work > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        let xq = Rational::from_integer(x.clone());
        let mut lists: Vec<Vec<BigInt>> = Vec::with_capacity(d - 1);
        let mut feasible = true;
        for (j, theta) in thetas.iter().enumerate() {
            let center = theta * &xq;
            let bound = &bounds.exact[j + 1];
            let mut list = Vec::new();
            let y0 = round_int(&center);
            let fits = |y: &BigInt| {
                let diff = (Rational::from_integer(y.clone()) - &center).abs();
                bound.cmp_rational(&diff) != Ordering::Less
            };
            let mut up = y0.clone();
            while fits(&up) {
                list.push(up.clone());
                up += 1;
            }
            let mut down: BigInt = &y0 - 1;
            while fits(&down) {
                list.push(down.clone());
                down -= 1;
            }
            if list.is_empty() {
                feasible = false;
                break;
            }
            list.sort();
            lists.push(list);
        }
        if feasible {
            let mut combo = vec![BigInt::zero(); d - 1];
            cartesian(&lists, &mut combo, 0, &mut |ys: &[BigInt]| {
                work += 1;
                if work > budget {
                    return Err(Error::BudgetExceeded { budget });
                }
                let mut coeffs = vec![x.clone()];
                coeffs.extend_from_slice(ys);
                let mut coords = vec![xq.clone()];
                for (j, yv) in ys.iter().enumerate() {
                    coords.push(Rational::from_integer(yv.clone()) - &thetas[j] * &xq);
                }
                out.push(LatticePoint { coeffs, coords });
                Ok(())
            })?;
        }
        x += 1;
    }
    Ok(out)
}

fn enumerate_y_cube(
    caps: &[BigInt],
    y: &mut Vec<BigInt>,
    idx: usize,
    leading_zero: bool,
    f: &mut dyn FnMut(&[BigInt]) -> Result<()>,
) -> Result<()> {
    if idx == caps.len() {
        return f(y);
    }
    // canonical representative: first nonzero entry positive
    let lo = if leading_zero {
        BigInt::zero()
    } else {
        -caps[idx].clone()
    };
    let mut v = lo;
    while v <= caps[idx] {
        y[idx] = v.clone();
        enumerate_y_cube(caps, y, idx + 1, leading_zero && v.is_zero(), f)?;
        v += 1;
    }
    Ok(())
}

fn cartesian(
    lists: &[Vec<BigInt>],
    combo: &mut Vec<BigInt>,
    idx: usize,
    f: &mut dyn FnMut(&[BigInt]) -> Result<()>,
) -> Result<()> {
    if idx == lists.len() {
        return f(combo);
    }
    for v in &lists[idx] {
        combo[idx] = v.clone();
        cartesian(lists, combo, idx + 1, f)?;
    }
    Ok(())
}

fn range_scan(lattice: &Lattice, bounds: &BoxBounds, budget: usize) -> Result<Vec<LatticePoint>> {
    let inv = lattice
        .basis()
        .inverse()
        .ok_or(Error::SingularBasis)?;
    let d = lattice.dim();
    let mut caps = Vec::with_capacity(d);
    let mut product: u128 = 1;
    for i in 0..d {
        let mut r = Rational::zero();
        for j in 0..d {
            r += inv[(i, j)].abs() * &bounds.outer[j];
        }
        let width = r.floor().to_integer();
        let w = width.to_u128().ok_or(Error::BudgetExceeded { budget })?;
        product = product
            .checked_mul(2 * w + 1)
            .ok_or(Error::BudgetExceeded { budget })?;
        if product > budget as u128 {
            return Err(Error::BudgetExceeded { budget });
        }
        caps.push(width);
    }
    let mut out = Vec::new();
    let mut a = vec![BigInt::zero(); d];
    let cols: Vec<Vec<Rational>> = (0..d).map(|j| lattice.basis().col(j)).collect();
    let zero = vec![Rational::zero(); d];
    scan_ranges(bounds, &caps, &cols, &mut a, &zero, 0, true, &mut out);
    Ok(out)
}

/// Odometer over coefficient ranges with incrementally maintained
/// coordinates: one vector addition per step instead of a basis multiply
/// per candidate.
#[allow(clippy::too_many_arguments)]
fn scan_ranges(
    bounds: &BoxBounds,
    caps: &[BigInt],
    cols: &[Vec<Rational>],
    a: &mut Vec<BigInt>,
    coords: &[Rational],
    idx: usize,
    leading_zero: bool,
    out: &mut Vec<LatticePoint>,
) {
    if idx == caps.len() {
        if leading_zero {
            return; // zero vector
        }
        if bounds.contains(coords) {
            out.push(
                LatticePoint {
                    coeffs: a.clone(),
                    coords: coords.to_vec(),
                }
                .canonical(),
            );
        }
        return;
    }
    let lo = if leading_zero {
        BigInt::zero()
    } else {
        -caps[idx].clone()
    };
    let lo_q = Rational::from_integer(lo.clone());
    let mut cur: Vec<Rational> = coords
        .iter()
        .zip(&cols[idx])
        .map(|(c, b)| c + &lo_q * b)
        .collect();
    let mut v = lo;
    loop {
        a[idx] = v.clone();
        scan_ranges(
            bounds,
            caps,
            cols,
            a,
            &cur,
            idx + 1,
            leading_zero && v.is_zero(),
            out,
        );
        if v == caps[idx] {
            break;
        }
        v += 1;
        for (c, b) in cur.iter_mut().zip(&cols[idx]) {
            *c += b;
        }
    }
}

pub(crate) fn mul_basis(lattice: &Lattice, coeffs: &[BigInt]) -> Vec<Rational> {
    let v: Vec<Rational> = coeffs
        .iter()
        .map(|c| Rational::from_integer(c.clone()))
        .collect();
    lattice.basis().mul_vec(&v)
}

/// Shared state of the reduced search tree.
struct TreeCtx<'a> {
    lattice: &'a Lattice,
    rb: ReducedBasis,
    budget: usize,
    nodes: usize,
}

impl<'a> TreeCtx<'a> {
    fn new(lattice: &'a Lattice, divisors: &[Rational], budget: usize) -> Self {
        let d = lattice.dim();
        let cols: Vec<Vec<Rational>> = (0..d)
            .map(|j| {
                (0..d)
                    .map(|i| &lattice.basis()[(i, j)] / &divisors[i])
                    .collect()
            })
            .collect();
        TreeCtx {
            lattice,
            rb: lll_reduce(cols),
            budget,
            nodes: 0,
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(Error::BudgetExceeded {
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    fn center(&self, c: &[BigInt], i: usize) -> Rational {
        let d = self.rb.dim;
        let mut acc = Rational::zero();
        for j in i + 1..d {
            if c[j].is_zero() {
                continue;
            }
            acc += &self.rb.mu[j][i] * Rational::from_integer(c[j].clone());
        }
        acc
    }
}

/// Complete enumeration of the (rescaled) unit cube via the reduced tree.
fn reduced_collect(
    lattice: &Lattice,
    bounds: &BoxBounds,
    budget: usize,
) -> Result<Vec<LatticePoint>> {
    let d = lattice.dim();
    let mut ctx = TreeCtx::new(lattice, &bounds.outer, budget);
    let r2 = Rational::from_integer(BigInt::from(d));
    let mut out = Vec::new();
    let mut c = vec![BigInt::zero(); d];
    let perp = vec![Rational::zero(); d];
    let a0 = vec![BigInt::zero(); d];
    collect_rec(
        &mut ctx,
        bounds,
        &r2,
        d as isize - 1,
        &mut c,
        &Rational::zero(),
        &perp,
        &a0,
        true,
        &mut out,
    )?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn collect_rec(
    ctx: &mut TreeCtx,
    bounds: &BoxBounds,
    r2: &Rational,
    level: isize,
    c: &mut Vec<BigInt>,
    partial: &Rational,
    perp: &[Rational],
    a_fixed: &[BigInt],
    outer_zero: bool,
    out: &mut Vec<LatticePoint>,
) -> Result<()> {
    ctx.tick()?;
    let d = ctx.rb.dim;
    let rem = r2 - partial;
    if rem.is_negative() {
        return Ok(());
    }
    // Per-coordinate prune: the free part w satisfies |w_j| <= beta_j * |w|,
    // so |z_j| >= |perp_j| - beta_j sqrt(rem); prune when that exceeds 1.
    let free = (level + 1) as usize;
    let one = Rational::one();
    for j in 0..d {
        let pj = perp[j].abs();
        if pj > one {
            let excess = &pj - &one;
            if &excess * &excess > &ctx.rb.proj_prefix[free][j] * &rem {
                return Ok(());
            }
        }
    }
    if level < 0 {
        if a_fixed.iter().all(|v| v.is_zero()) {
            return Ok(());
        }
        let coords = mul_basis(ctx.lattice, a_fixed);
        if bounds.contains(&coords) {
            out.push(
                LatticePoint {
                    coeffs: a_fixed.to_vec(),
                    coords,
                }
                .canonical(),
            );
        }
        return Ok(());
    }
    let i = level as usize;
    let center = ctx.center(c, i);
    let bnorm = ctx.rb.bnorm[i].clone();
    let try_value = |ctx: &mut TreeCtx,
                         ci: BigInt,
                         c: &mut Vec<BigInt>,
                         out: &mut Vec<LatticePoint>|
     -> Result<bool> {
        let t = Rational::from_integer(ci.clone()) + &center;
        let val = &t * &t * &bnorm;
        if &val > &rem {
            return Ok(false);
        }
        let partial2 = partial + &val;
        let mut perp2 = perp.to_vec();
        for (pj, bj) in perp2.iter_mut().zip(&ctx.rb.bstar[i]) {
            *pj += &t * bj;
        }
        let mut a2 = a_fixed.to_vec();
        for (ak, uk) in a2.iter_mut().zip(&ctx.rb.u_cols[i]) {
            *ak += &ci * uk;
        }
        collect_rec(
            ctx,
            bounds,
            r2,
            level - 1,
            c,
            &partial2,
            &perp2,
            &a2,
            outer_zero && ci.is_zero(),
            out,
        )?;
        Ok(true)
    };
    if outer_zero {
        // sign symmetry: force the outermost nonzero reduced coefficient >= 0
        let mut ci = BigInt::zero();
        loop {
            c[i] = ci.clone();
            if !try_value(ctx, ci.clone(), c, out)? {
                break;
            }
            ci += 1;
        }
    } else {
        let c0 = round_int(&-&center);
        let mut up = c0.clone();
        loop {
            c[i] = up.clone();
            if !try_value(ctx, up.clone(), c, out)? {
                break;
            }
            up += 1;
        }
        let mut down: BigInt = &c0 - 1;
        loop {
            c[i] = down.clone();
            if !try_value(ctx, down.clone(), c, out)? {
                break;
            }
            down -= 1;
        }
    }
    c[i] = BigInt::zero();
    Ok(())
}

struct MinState {
    best_norm: ScaleValue,
    best_outer: Rational,
    r2: Rational,
    witness: LatticePoint,
}

impl MinState {
    fn update(&mut self, d: usize, norm: ScaleValue, witness: LatticePoint) {
        self.best_outer = norm.outer_rational();
        self.r2 = Rational::from_integer(BigInt::from(d)) * &self.best_outer * &self.best_outer;
        self.best_norm = norm;
        self.witness = witness;
    }
}

/// Exact minimum of the box norm over nonzero lattice points outside the
/// rational span of `span`, with the witness attaining it.
pub(crate) fn min_outside_span(
    lattice: &Lattice,
    box_: &BoxShape,
    span_vecs: &[Vec<BigInt>],
    budget: usize,
) -> Result<(ScaleValue, LatticePoint)> {
    let d = lattice.dim();
    assert!(span_vecs.len() < d, "span already has full rank");
    let bounds = BoxBounds::new(box_, &ScaleValue::one());
    let mut ctx = TreeCtx::new(lattice, &bounds.outer, budget);
    let span = RationalSpan::from_bigint_rows(d, span_vecs);

    // free_in_span[t]: the first t reduced directions all lie inside the span.
    let mut free_in_span = vec![true];
    for j in 0..d {
        let prev = *free_in_span.last().unwrap();
        let inside = prev && span.contains_bigint(&ctx.rb.u_cols[j]);
        free_in_span.push(inside);
    }

    // Seed with the best reduced basis vector outside the span.
    let mut seed: Option<(ScaleValue, LatticePoint)> = None;
    for j in 0..d {
        if span.contains_bigint(&ctx.rb.u_cols[j]) {
            continue;
        }
        let pt = LatticePoint::from_coeffs(lattice, ctx.rb.u_cols[j].clone()).canonical();
        let norm = box_norm(&pt, box_)?;
        if seed.as_ref().map_or(true, |(n, _)| norm < *n) {
            seed = Some((norm, pt));
        }
    }
    let (norm0, wit0) = seed.expect("reduced basis spans the space");
    let outer0 = norm0.outer_rational();
    let mut state = MinState {
        r2: Rational::from_integer(BigInt::from(d)) * &outer0 * &outer0,
        best_outer: outer0,
        best_norm: norm0,
        witness: wit0,
    };

    let mut c = vec![BigInt::zero(); d];
    let perp = vec![Rational::zero(); d];
    let a0 = vec![BigInt::zero(); d];
    min_rec(
        &mut ctx,
        box_,
        &span,
        &free_in_span,
        d as isize - 1,
        &mut c,
        &Rational::zero(),
        &perp,
        &a0,
        true,
        &mut state,
    )?;
    Ok((state.best_norm, state.witness))
}

#[allow(clippy::too_many_arguments)]
fn min_rec(
    ctx: &mut TreeCtx,
    box_: &BoxShape,
    span: &RationalSpan,
    free_in_span: &[bool],
    level: isize,
    c: &mut Vec<BigInt>,
    partial: &Rational,
    perp: &[Rational],
    a_fixed: &[BigInt],
    outer_zero: bool,
    state: &mut MinState,
) -> Result<()> {
    ctx.tick()?;
    let d = ctx.rb.dim;
    let rem = &state.r2 - partial;
    if rem.is_negative() {
        return Ok(());
    }
    let free = (level + 1) as usize;
    // Subtrees entirely inside the span can never produce the next witness.
    if free_in_span[free] && span.contains_bigint(a_fixed) {
        return Ok(());
    }
    // Coordinate prune against the current best scale.
    for j in 0..d {
        let pj = perp[j].abs();
        if pj >= state.best_outer {
            let excess = &pj - &state.best_outer;
            if &excess * &excess >= &ctx.rb.proj_prefix[free][j] * &rem {
                return Ok(());
            }
        }
    }
    if level < 0 {
        if a_fixed.iter().all(|v| v.is_zero()) || span.contains_bigint(a_fixed) {
            return Ok(());
        }
        let pt = LatticePoint::from_coeffs(ctx.lattice, a_fixed.to_vec()).canonical();
        let norm = box_norm(&pt, box_)?;
        if norm < state.best_norm {
            state.update(d, norm, pt);
        }
        return Ok(());
    }
    if level == 0 {
        // The innermost level is a 1-D problem: the box norm is convex in
        // the remaining coefficient, so descend to its integer minimizer
        // directly instead of walking the (possibly enormous) flat range.
        return minimize_along_line(ctx, box_, span, c, a_fixed, outer_zero, state);
    }
    let i = level as usize;
    let center = ctx.center(c, i);
    let bnorm = ctx.rb.bnorm[i].clone();
    let try_value =
        |ctx: &mut TreeCtx, ci: BigInt, c: &mut Vec<BigInt>, state: &mut MinState| -> Result<bool> {
            let t = Rational::from_integer(ci.clone()) + &center;
            let val = &t * &t * &bnorm;
            let rem_now = &state.r2 - partial;
            if val > rem_now {
                return Ok(false);
            }
            let partial2 = partial + &val;
            let mut perp2 = perp.to_vec();
            for (pj, bj) in perp2.iter_mut().zip(&ctx.rb.bstar[i]) {
                *pj += &t * bj;
            }
            let mut a2 = a_fixed.to_vec();
            for (ak, uk) in a2.iter_mut().zip(&ctx.rb.u_cols[i]) {
                *ak += &ci * uk;
            }
            min_rec(
                ctx,
                box_,
                span,
                free_in_span,
                level - 1,
                c,
                &partial2,
                &perp2,
                &a2,
                outer_zero && ci.is_zero(),
                state,
            )?;
            Ok(true)
        };
    if outer_zero {
        let mut ci = BigInt::zero();
        loop {
            c[i] = ci.clone();
            if !try_value(ctx, ci.clone(), c, state)? {
                break;
            }
            ci += 1;
        }
    } else {
        let c0 = round_int(&-&center);
        let mut up = c0.clone();
        loop {
            c[i] = up.clone();
            if !try_value(ctx, up.clone(), c, state)? {
                break;
            }
            up += 1;
        }
        let mut down: BigInt = &c0 - 1;
        loop {
            c[i] = down.clone();
            if !try_value(ctx, down.clone(), c, state)? {
                break;
            }
            down -= 1;
        }
    }
    c[i] = BigInt::zero();
    Ok(())
}

/// Exact minimum of the box norm along {a_fixed + c * u_col_0 : c in Z},
/// excluding the zero point and the span. The norm is a maximum of absolute
/// affine functions of c, hence convex: walk downhill from a float estimate
/// of the minimizer, comparing exactly.
fn minimize_along_line(
    ctx: &mut TreeCtx,
    box_: &BoxShape,
    span: &RationalSpan,
    c: &mut Vec<BigInt>,
    a_fixed: &[BigInt],
    outer_zero: bool,
    state: &mut MinState,
) -> Result<()> {
    use crate::rat::to_f64_approx;
    let dir = ctx.rb.u_cols[0].clone();
    let fixed_coords = mul_basis(ctx.lattice, a_fixed);
    let dir_coords = mul_basis(ctx.lattice, &dir);
    let d = fixed_coords.len();

    // float estimate of the minimizer of max_j |F_j + c G_j| / H_j
    let f: Vec<f64> = fixed_coords.iter().map(to_f64_approx).collect();
    let g: Vec<f64> = dir_coords.iter().map(to_f64_approx).collect();
    let h: Vec<f64> = box_.half_widths().iter().map(|x| x.to_f64()).collect();
    let eval = |k: f64| -> f64 {
        (0..d)
            .map(|j| (f[j] + k * g[j]).abs() / h[j])
            .fold(0.0, f64::max)
    };
    let mut candidates = vec![0.0f64];
    for j in 0..d {
        if g[j] != 0.0 {
            candidates.push(-f[j] / g[j]);
        }
        for l in j + 1..d {
            let den1 = g[j] * h[l] - g[l] * h[j];
            if den1 != 0.0 {
                candidates.push((f[l] * h[j] - f[j] * h[l]) / den1);
            }
            let den2 = g[j] * h[l] + g[l] * h[j];
            if den2 != 0.0 {
                candidates.push(-(f[l] * h[j] + f[j] * h[l]) / den2);
            }
        }
    }
    let mut best_float = 0.0f64;
    let mut best_val = f64::INFINITY;
    for k in candidates {
        if k.is_finite() {
            let v = eval(k);
            if v < best_val {
                best_val = v;
                best_float = k;
            }
        }
    }

    let exact_norm = |ctx: &mut TreeCtx, k: &BigInt| -> Result<Option<ScaleValue>> {
        ctx.tick()?;
        let coeffs: Vec<BigInt> = a_fixed
            .iter()
            .zip(&dir)
            .map(|(a, u)| a + k * u)
            .collect();
        if coeffs.iter().all(|v| v.is_zero()) {
            return Ok(None);
        }
        let coords: Vec<Rational> = fixed_coords
            .iter()
            .zip(&dir_coords)
            .map(|(a, b)| a + Rational::from_integer(k.clone()) * b)
            .collect();
        let pt = LatticePoint { coeffs, coords };
        Ok(Some(box_norm(&pt, box_)?))
    };

    // integer walk to the convex minimum (zero point treated as +infinity)
    let mut k = BigInt::from(best_float.round() as i64);
    if outer_zero && k < BigInt::one() {
        k = BigInt::one();
    }
    let mut cur = exact_norm(ctx, &k)?;
    for _ in 0..10_000 {
        let up: BigInt = &k + 1;
        let down: BigInt = &k - 1;
        let up_n = exact_norm(ctx, &up)?;
        let down_n = if outer_zero && down < BigInt::one() {
            None
        } else {
            exact_norm(ctx, &down)?
        };
        let cur_beats = |other: &Option<ScaleValue>| match (&cur, other) {
            (Some(a), Some(b)) => a <= b,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => true,
        };
        if !cur_beats(&up_n) {
            k = up;
            cur = up_n;
        } else if !cur_beats(&down_n) {
            k = down;
            cur = down_n;
        } else {
            break;
        }
    }

    // candidates: the minimizer, stepping over the zero point or the single
    // possible span point on the line
    for cand in [k.clone(), &k - 1, &k + 1] {
        if outer_zero && cand < BigInt::one() {
            continue;
        }
        let coeffs: Vec<BigInt> = a_fixed
            .iter()
            .zip(&dir)
            .map(|(a, u)| a + &cand * u)
            .collect();
        if coeffs.iter().all(|v| v.is_zero()) || span.contains_bigint(&coeffs) {
            continue;
        }
        if let Some(norm) = exact_norm(ctx, &cand)? {
            if norm < state.best_norm {
                let pt =
                    LatticePoint::from_coeffs(ctx.lattice, coeffs).canonical();
                state.update(ctx.rb.dim, norm, pt);
            }
        }
    }
    let _ = c;
    Ok(())
}
