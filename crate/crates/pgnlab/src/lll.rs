//! Exact LLL reduction over the rationals, with transform tracking.
//!
//! Used to precondition enumeration: the search tree bounds come from the
//! Gram-Schmidt data of the reduced, box-rescaled basis. Everything is done
//! in `BigRational`, so the reduction itself is exact and deterministic.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rat::{round_int, Rational};

pub(crate) struct ReducedBasis {
    pub dim: usize,
    /// Reduced basis columns in the rescaled coordinates.
    pub cols: Vec<Vec<Rational>>,
    /// Original-basis coefficients of each reduced column.
    pub u_cols: Vec<Vec<BigInt>>,
    /// Gram-Schmidt vectors of the reduced basis.
    pub bstar: Vec<Vec<Rational>>,
    /// mu[i][j], j < i.
    pub mu: Vec<Vec<Rational>>,
    /// Squared norms of the Gram-Schmidt vectors.
    pub bnorm: Vec<Rational>,
    /// proj_prefix[t][j] = sum_{l<t} bstar[l][j]^2 / bnorm[l]: the j-th
    /// diagonal entry of the projector onto span(b_0..b_{t-1}).
    pub proj_prefix: Vec<Vec<Rational>>,
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .fold(Rational::zero(), |acc, v| acc + v)
}

fn gso(cols: &[Vec<Rational>]) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>, Vec<Rational>) {
    let d = cols.len();
    let mut bstar: Vec<Vec<Rational>> = Vec::with_capacity(d);
    let mut mu: Vec<Vec<Rational>> = Vec::with_capacity(d);
    let mut bnorm: Vec<Rational> = Vec::with_capacity(d);
    for i in 0..d {
        let mut v = cols[i].clone();
        let mut row = Vec::with_capacity(i);
        for j in 0..i {
            let m = dot(&cols[i], &bstar[j]) / &bnorm[j];
            for (vk, bk) in v.iter_mut().zip(&bstar[j]) {
                *vk -= &m * bk;
            }
            row.push(m);
        }
        bnorm.push(dot(&v, &v));
        assert!(bnorm[i].is_positive(), "basis must be full rank");
        bstar.push(v);
        mu.push(row);
    }
    (bstar, mu, bnorm)
}

/// LLL-reduce the given columns (delta = 3/4) and return the reduced basis
/// with its Gram-Schmidt data and the unimodular transform.
pub(crate) fn lll_reduce(mut cols: Vec<Vec<Rational>>) -> ReducedBasis {
    let d = cols.len();
    let mut u_cols: Vec<Vec<BigInt>> = (0..d)
        .map(|j| (0..d).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let (_, mut mu, mut bnorm) = gso(&cols);

    let delta = Rational::new(BigInt::from(3), BigInt::from(4));
    let half = Rational::new(BigInt::one(), BigInt::from(2));

    // b_k -= round(mu[k][j]) * b_j, with incremental mu updates.
    let red = |cols: &mut Vec<Vec<Rational>>,
               u_cols: &mut Vec<Vec<BigInt>>,
               mu: &mut Vec<Vec<Rational>>,
               k: usize,
               j: usize,
               half: &Rational| {
        if mu[k][j].abs() <= *half {
            return;
        }
        let r = round_int(&mu[k][j]);
        let rq = Rational::from_integer(r.clone());
        let bj = cols[j].clone();
        for (x, y) in cols[k].iter_mut().zip(&bj) {
            *x -= &rq * y;
        }
        let uj = u_cols[j].clone();
        for (x, y) in u_cols[k].iter_mut().zip(&uj) {
            *x -= &r * y;
        }
        for l in 0..j {
            let s = &rq * &mu[j][l];
            mu[k][l] -= s;
        }
        mu[k][j] -= rq;
    };

    let mut k = 1usize;
    let mut guard = 0usize;
    while k < d {
        guard += 1;
        assert!(guard < 1_000_000, "LLL failed to terminate");
        red(&mut cols, &mut u_cols, &mut mu, k, k - 1, &half);
        let lhs = bnorm[k].clone();
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &bnorm[k - 1];
        if lhs < rhs {
            // swap columns k-1 and k, update mu/bnorm by the standard rules
            cols.swap(k - 1, k);
            u_cols.swap(k - 1, k);
            for l in 0..k - 1 {
                let a = mu[k - 1][l].clone();
                let b = mu[k][l].clone();
                mu[k - 1][l] = b;
                mu[k][l] = a;
            }
            let mu_old = mu[k][k - 1].clone();
            let b_new = &bnorm[k] + &mu_old * &mu_old * &bnorm[k - 1];
            mu[k][k - 1] = &mu_old * &bnorm[k - 1] / &b_new;
            bnorm[k] = &bnorm[k - 1] * &bnorm[k] / &b_new;
            bnorm[k - 1] = b_new;
            for i in k + 1..d {
                let t = mu[i][k].clone();
                mu[i][k] = &mu[i][k - 1] - &mu_old * &t;
                mu[i][k - 1] = &t + &mu[k][k - 1] * &mu[i][k];
            }
            k = k.max(2) - 1;
        } else {
            for j in (0..k.saturating_sub(1)).rev() {
                red(&mut cols, &mut u_cols, &mut mu, k, j, &half);
            }
            k += 1;
        }
    }

    // Recompute the Gram-Schmidt data from the final basis so the search
    // phase works from one consistent snapshot.
    let (bstar, mu, bnorm) = gso(&cols);
    let n = cols[0].len();
    let mut proj_prefix = vec![vec![Rational::zero(); n]];
    for t in 0..d {
        let mut row = proj_prefix[t].clone();
        for j in 0..n {
            let add = &bstar[t][j] * &bstar[t][j] / &bnorm[t];
            row[j] += add;
        }
        proj_prefix.push(row);
    }

    ReducedBasis {
        dim: d,
        cols,
        u_cols,
        bstar,
        mu,
        bnorm,
        proj_prefix,
    }
}
