//! Successive minima of a box with respect to a lattice, exactly.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::enumerate::{
    enumerate_in_box, min_outside_span, mul_basis, EnumerationOptions, EnumerationStrategy,
    DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::lattice::{BoxShape, Lattice};
use crate::rat::Rational;
use crate::scale::ScaleValue;

/// A lattice point: integer coefficients in the basis plus the exact real
/// coordinates they generate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePoint {
    pub coeffs: Vec<BigInt>,
    pub coords: Vec<Rational>,
}

impl LatticePoint {
    pub fn from_coeffs(lattice: &Lattice, coeffs: Vec<BigInt>) -> Self {
        let coords = mul_basis(lattice, &coeffs);
        LatticePoint { coeffs, coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Flip the sign so the first nonzero coefficient is positive.
    pub fn canonical(mut self) -> Self {
        for c in &self.coeffs {
            match c.sign() {
                num_bigint::Sign::Plus => return self,
                num_bigint::Sign::Minus => {
                    for v in &mut self.coeffs {
                        *v = -v.clone();
                    }
                    for v in &mut self.coords {
                        *v = -v.clone();
                    }
                    return self;
                }
                num_bigint::Sign::NoSign => continue,
            }
        }
        self
    }
}

pub fn cmp_coeff_lex(a: &[BigInt], b: &[BigInt]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Gauge function of the box: max_i |z_i| / h_i.
pub fn box_norm(point: &LatticePoint, box_: &BoxShape) -> Result<ScaleValue> {
    if point.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let mut best: Option<ScaleValue> = None;
    for (z, h) in point.coords.iter().zip(box_.half_widths()) {
        if z.is_zero() {
            continue;
        }
        let ratio = ScaleValue::from_rational(z.abs()).div(h);
        best = Some(match best {
            None => ratio,
            Some(b) => {
                if ratio > b {
                    ratio
                } else {
                    b
                }
            }
        });
    }
    best.ok_or(Error::ZeroPoint)
}

/// Rational row-echelon span for exact rank and membership tests.
#[derive(Clone, Debug)]
pub(crate) struct RationalSpan {
    dim: usize,
    rows: Vec<(usize, Vec<Rational>)>,
}

impl RationalSpan {
    pub fn new(dim: usize) -> Self {
        RationalSpan { dim, rows: Vec::new() }
    }

    pub fn from_bigint_rows(dim: usize, vecs: &[Vec<BigInt>]) -> Self {
        let mut span = RationalSpan::new(dim);
        for v in vecs {
            span.insert_bigint(v);
        }
        span
    }

    fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        let mut v = v.to_vec();
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let factor = v[*pivot].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    *x -= &factor * y;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    pub fn contains_bigint(&self, v: &[BigInt]) -> bool {
        let v: Vec<Rational> = v.iter().map(|c| Rational::from_integer(c.clone())).collect();
        self.contains(&v)
    }

    /// Insert if independent; returns whether the rank grew.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        let reduced = self.reduce(v);
        let pivot = match reduced.iter().position(|x| !x.is_zero()) {
            Some(p) => p,
            None => return false,
        };
        let lead = reduced[pivot].clone();
        let normalized: Vec<Rational> = reduced.iter().map(|x| x / &lead).collect();
        self.rows.push((pivot, normalized));
        true
    }

    pub fn insert_bigint(&mut self, v: &[BigInt]) -> bool {
        let v: Vec<Rational> = v.iter().map(|c| Rational::from_integer(c.clone())).collect();
        self.insert(&v)
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Exact rank of a set of integer vectors.
pub fn rank_of(dim: usize, vecs: &[Vec<BigInt>]) -> usize {
    RationalSpan::from_bigint_rows(dim, vecs).rank()
}

#[derive(Clone, Debug)]
pub struct MinimaResult {
    /// lambda_1 <= ... <= lambda_p.
    pub lambdas: Vec<ScaleValue>,
    /// Linearly independent witnesses; witness i attains lambda_i.
    pub witnesses: Vec<LatticePoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinimaStrategy {
    /// Branch-and-bound per minimum; scales to large boxes.
    Auto,
    /// Enumerate everything up to a doubling scale, then select greedily
    /// (ties broken by lexicographic coefficient order).
    FullEnumeration(EnumerationStrategy),
    BranchBound,
}

#[derive(Clone, Debug)]
pub struct MinimaOptions {
    pub strategy: MinimaStrategy,
    pub budget: usize,
}

impl Default for MinimaOptions {
    fn default() -> Self {
        MinimaOptions {
            strategy: MinimaStrategy::Auto,
            budget: DEFAULT_BUDGET,
        }
    }
}

pub fn successive_minima(lattice: &Lattice, box_: &BoxShape, p: usize) -> Result<MinimaResult> {
    successive_minima_with(lattice, box_, p, &MinimaOptions::default())
}

pub fn successive_minima_with(
    lattice: &Lattice,
    box_: &BoxShape,
    p: usize,
    opts: &MinimaOptions,
) -> Result<MinimaResult> {
    if p < 1 || p > lattice.dim() {
        return Err(Error::InvalidSpec(format!(
            "p must be between 1 and the dimension {}, got {p}",
            lattice.dim()
        )));
    }
    match opts.strategy {
        MinimaStrategy::Auto | MinimaStrategy::BranchBound => {
            minima_branch_bound(lattice, box_, p, opts.budget)
        }
        MinimaStrategy::FullEnumeration(es) => minima_full(lattice, box_, p, es, opts.budget),
    }
}

fn minima_branch_bound(
    lattice: &Lattice,
    box_: &BoxShape,
    p: usize,
    budget: usize,
) -> Result<MinimaResult> {
    let mut lambdas = Vec::with_capacity(p);
    let mut witnesses: Vec<LatticePoint> = Vec::with_capacity(p);
    for _ in 0..p {
        let span: Vec<Vec<BigInt>> = witnesses.iter().map(|w| w.coeffs.clone()).collect();
        let (norm, witness) = min_outside_span(lattice, box_, &span, budget)?;
        if let Some(prev) = lambdas.last() {
            debug_assert!(*prev <= norm);
        }
        lambdas.push(norm);
        witnesses.push(witness);
    }
    Ok(MinimaResult { lambdas, witnesses })
}

fn minima_full(
    lattice: &Lattice,
    box_: &BoxShape,
    p: usize,
    strategy: EnumerationStrategy,
    budget: usize,
) -> Result<MinimaResult> {
    let opts = EnumerationOptions { strategy, budget };
    // Start at scale 1 (Minkowski gives lambda_1 <= 1 on the unit-volume,
    // unimodular instances) and double until rank p is reached.
    let mut scale = ScaleValue::one();
    for _ in 0..128 {
        let points = enumerate_in_box(lattice, box_, &scale, &opts)?;
        let mut decorated: Vec<(ScaleValue, LatticePoint)> = points
            .into_iter()
            .map(|pt| {
                let n = box_norm(&pt, box_)?;
                Ok((n, pt))
            })
            .collect::<Result<_>>()?;
        decorated.sort_by(|a, b| {
            a.0.cmp_exact(&b.0)
                .then_with(|| cmp_coeff_lex(&a.1.coeffs, &b.1.coeffs))
        });
        let mut span = RationalSpan::new(lattice.dim());
        let mut lambdas = Vec::with_capacity(p);
        let mut witnesses = Vec::with_capacity(p);
        for (norm, pt) in decorated {
            if span.insert_bigint(&pt.coeffs) {
                lambdas.push(norm);
                witnesses.push(pt);
                if lambdas.len() == p {
                    return Ok(MinimaResult { lambdas, witnesses });
                }
            }
        }
        scale = scale.mul(&ScaleValue::from_int(2));
    }
    Err(Error::RankUnreachable { wanted: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{box_at, primal_lattice, Matrix, PathSpec, ThetaSpec};
    use crate::numbers::RealSpec;
    use crate::rat::rat;
    use crate::scale::ScaleValue;

    fn z2() -> Lattice {
        Lattice::standard(2)
    }

    fn lattice_third() -> Lattice {
        let theta = ThetaSpec::column(vec![RealSpec::Rational(rat(1, 3))]).unwrap();
        primal_lattice(&theta, &rat(1, 100))
    }

    fn boxr(hs: &[(i64, i64)]) -> BoxShape {
        BoxShape::from_rationals(hs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn box_norm_examples() {
        let b = boxr(&[(2, 1), (1, 2)]);
        let pt = LatticePoint::from_coeffs(&z2(), vec![1.into(), 0.into()]);
        assert_eq!(box_norm(&pt, &b).unwrap().as_rational().unwrap(), rat(1, 2));

        let b = boxr(&[(3, 1), (1, 3)]);
        let pt = LatticePoint::from_coeffs(&z2(), vec![3.into(), 0.into()]);
        assert_eq!(box_norm(&pt, &b).unwrap().as_rational().unwrap(), rat(1, 1));

        // z = (1, -1/3): max(1/3, 1) = 1
        let pt = LatticePoint::from_coeffs(&lattice_third(), vec![1.into(), 0.into()]);
        assert_eq!(pt.coords, vec![rat(1, 1), rat(-1, 3)]);
        assert_eq!(box_norm(&pt, &b).unwrap().as_rational().unwrap(), rat(1, 1));

        let zero = LatticePoint::from_coeffs(&z2(), vec![0.into(), 0.into()]);
        assert!(box_norm(&zero, &b).is_err());
    }

    fn coeff_set(points: &[LatticePoint]) -> Vec<Vec<i64>> {
        let mut v: Vec<Vec<i64>> = points
            .iter()
            .map(|p| {
                p.coeffs
                    .iter()
                    .map(|c| i64::try_from(c).unwrap())
                    .collect()
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn enumerate_unit_cube() {
        let b = boxr(&[(1, 1), (1, 1)]);
        for strategy in [
            EnumerationStrategy::RangeScan,
            EnumerationStrategy::Reduced,
            EnumerationStrategy::FastScan,
        ] {
            let opts = EnumerationOptions {
                strategy,
                budget: 100_000,
            };
            let pts = enumerate_in_box(&z2(), &b, &ScaleValue::one(), &opts).unwrap();
            assert_eq!(
                coeff_set(&pts),
                vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]],
                "{strategy:?}"
            );
        }
    }

    #[test]
    fn enumerate_empty_box() {
        let b = boxr(&[(1, 2), (1, 2)]);
        let pts = enumerate_in_box(
            &z2(),
            &b,
            &ScaleValue::one(),
            &EnumerationOptions::default(),
        )
        .unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn enumerate_matches_brute_force_oracle() {
        // oracle: all (x, y) in [-4, 4]^2 with |x| <= 3 and |y - x/3| <= 1/3
        let lat = lattice_third();
        let b = boxr(&[(3, 1), (1, 3)]);
        let mut oracle = Vec::new();
        for x in -4i64..=4 {
            for y in -4i64..=4 {
                if (x, y) == (0, 0) {
                    continue;
                }
                let z1 = rat(x, 1);
                let z2 = rat(y, 1) - rat(x, 3);
                if z1.abs() <= rat(3, 1) && z2.abs() <= rat(1, 3) {
                    let canonical = if x < 0 || (x == 0 && y < 0) {
                        vec![-x, -y]
                    } else {
                        vec![x, y]
                    };
                    oracle.push(canonical);
                }
            }
        }
        oracle.sort();
        oracle.dedup();
        assert_eq!(oracle, vec![vec![1, 0], vec![2, 1], vec![3, 1]]);
        for strategy in [
            EnumerationStrategy::FastScan,
            EnumerationStrategy::RangeScan,
            EnumerationStrategy::Reduced,
        ] {
            let opts = EnumerationOptions {
                strategy,
                budget: 100_000,
            };
            let pts = enumerate_in_box(&lat, &b, &ScaleValue::one(), &opts).unwrap();
            assert_eq!(coeff_set(&pts), oracle, "{strategy:?}");
        }
    }

    #[test]
    fn minima_axis_box() {
        let b = boxr(&[(2, 1), (1, 2)]);
        let res = successive_minima(&z2(), &b, 2).unwrap();
        assert_eq!(res.lambdas[0].as_rational().unwrap(), rat(1, 2));
        assert_eq!(res.lambdas[1].as_rational().unwrap(), rat(2, 1));
        assert_eq!(res.witnesses[0].coeffs, vec![BigInt::from(1), BigInt::from(0)]);
        assert_eq!(res.witnesses[1].coeffs, vec![BigInt::from(0), BigInt::from(1)]);
    }

    #[test]
    fn minima_lattice_third() {
        let res = successive_minima_with(
            &lattice_third(),
            &boxr(&[(3, 1), (1, 3)]),
            2,
            &MinimaOptions {
                strategy: MinimaStrategy::FullEnumeration(EnumerationStrategy::RangeScan),
                budget: 100_000,
            },
        )
        .unwrap();
        assert_eq!(res.lambdas[0].as_rational().unwrap(), rat(1, 1));
        assert_eq!(res.lambdas[1].as_rational().unwrap(), rat(1, 1));
        // greedy lexicographic tie-break picks (1,0) then (2,1); the example
        // witnesses (3,0) and (1,-1/3) attain the same minima
        assert_eq!(res.witnesses[0].coeffs, vec![BigInt::from(1), BigInt::from(0)]);
        assert_eq!(res.witnesses[1].coeffs, vec![BigInt::from(2), BigInt::from(1)]);
        let b = boxr(&[(3, 1), (1, 3)]);
        let example = LatticePoint::from_coeffs(&lattice_third(), vec![3.into(), 1.into()]);
        assert_eq!(box_norm(&example, &b).unwrap(), res.lambdas[1]);
    }

    #[test]
    fn minima_three_dimensional_axis() {
        let b = boxr(&[(4, 1), (1, 2), (1, 2)]);
        let res = successive_minima(&Lattice::standard(3), &b, 3).unwrap();
        assert_eq!(res.lambdas[0].as_rational().unwrap(), rat(1, 4));
        assert_eq!(res.lambdas[1].as_rational().unwrap(), rat(2, 1));
        assert_eq!(res.lambdas[2].as_rational().unwrap(), rat(2, 1));
    }

    #[test]
    fn branch_bound_matches_full_enumeration() {
        // random-ish small primal instances
        let thetas = [rat(2, 7), rat(-5, 9), rat(13, 4)];
        for t in &thetas {
            let theta = ThetaSpec::column(vec![RealSpec::Rational(t.clone())]).unwrap();
            let lat = primal_lattice(&theta, &rat(1, 100));
            for u in [rat(3, 2), rat(5, 2), rat(7, 1)] {
                let b = box_at(&PathSpec::primal(1, 1), &ScaleValue::from_rational(u)).unwrap();
                let full = successive_minima_with(
                    &lat,
                    &b,
                    2,
                    &MinimaOptions {
                        strategy: MinimaStrategy::FullEnumeration(EnumerationStrategy::RangeScan),
                        budget: 1_000_000,
                    },
                )
                .unwrap();
                let bb = successive_minima(&lat, &b, 2).unwrap();
                assert_eq!(full.lambdas, bb.lambdas);
                for (lam, wit) in bb.lambdas.iter().zip(&bb.witnesses) {
                    assert_eq!(box_norm(wit, &b).unwrap(), *lam);
                }
                // Minkowski second theorem band: 1/d! <= l1 l2 <= 1
                let prod = full.lambdas[0].mul(&full.lambdas[1]);
                assert!(prod.cmp_rational(&rat(1, 2)) != std::cmp::Ordering::Less);
                assert!(prod.cmp_rational(&rat(1, 1)) != std::cmp::Ordering::Greater);
            }
        }
    }

    #[test]
    fn branch_bound_handles_huge_scale_ties() {
        // Theta = 0: lambda_1 = 1/u, lambda_2 = u, with a u^2-sized tied
        // family that the search must prune wholesale.
        let u = rat(1_000_000_007i64, 1);
        let b = box_at(&PathSpec::primal(1, 1), &ScaleValue::from_rational(u.clone())).unwrap();
        let res = successive_minima(&z2(), &b, 2).unwrap();
        assert_eq!(res.lambdas[0].as_rational().unwrap(), u.recip());
        assert_eq!(res.lambdas[1].as_rational().unwrap(), u);
    }

    #[test]
    fn negating_a_basis_column_preserves_minima() {
        let mut m = Matrix::identity(2);
        m[(0, 0)] = rat(-1, 1);
        let flipped = Lattice::from_basis_unchecked(m).unwrap();
        let b = boxr(&[(2, 1), (1, 2)]);
        let a = successive_minima(&z2(), &b, 2).unwrap();
        let c = successive_minima(&flipped, &b, 2).unwrap();
        assert_eq!(a.lambdas, c.lambdas);
    }

    #[test]
    fn p_out_of_range_rejected() {
        let b = boxr(&[(1, 1), (1, 1)]);
        assert!(successive_minima(&z2(), &b, 0).is_err());
        assert!(successive_minima(&z2(), &b, 3).is_err());
    }
}
