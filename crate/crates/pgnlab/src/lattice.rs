//! Approximation lattices, weight-vector paths and flow boxes.
//!
//! The primal lattice has basis [[E_m, 0], [-Theta, E_n]] (the inverse of the
//! block matrix built from Theta), the dual one [[E_m, Theta^T], [0, E_n]].
//! Both are exactly unimodular for every rational stand-in of Theta. Paths
//! are linear in log scale: tau_i(s) = w_i ln u with s = c ln u, so every
//! half-width of a flow box is an exact power of the scale parameter.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numbers::{approximate, RealSpec};
use crate::rat::{rat_int, Rational};
use crate::scale::ScaleValue;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += add;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| &self[(i, j)] * &v[j])
                    .fold(Rational::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// Exact determinant by fraction-preserving Gaussian elimination.
    pub fn det(&self) -> Rational {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => return Rational::zero(),
            };
            if pivot != col {
                for j in 0..n {
                    let a = m[(pivot, j)].clone();
                    let b = m[(col, j)].clone();
                    m[(pivot, j)] = b;
                    m[(col, j)] = a;
                }
                det = -det;
            }
            let p = m[(col, col)].clone();
            det *= p.clone();
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] / &p;
                for j in col..n {
                    let sub = &factor * &m[(col, j)];
                    m[(r, j)] -= sub;
                }
            }
        }
        det
    }

    /// Exact inverse, `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    let (a, b) = (m[(pivot, j)].clone(), m[(col, j)].clone());
                    m[(pivot, j)] = b;
                    m[(col, j)] = a;
                    let (a, b) = (inv[(pivot, j)].clone(), inv[(col, j)].clone());
                    inv[(pivot, j)] = b;
                    inv[(col, j)] = a;
                }
            }
            let p = m[(col, col)].clone();
            for j in 0..n {
                m[(col, j)] /= p.clone();
                inv[(col, j)] /= p.clone();
            }
            for r in 0..n {
                if r == col || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone();
                for j in 0..n {
                    let s = &factor * &m[(col, j)];
                    m[(r, j)] -= s;
                    let s = &factor * &inv[(col, j)];
                    inv[(r, j)] -= s;
                }
            }
        }
        Some(inv)
    }

    /// Line-oriented text form: the dimension, then one row per line of
    /// `p/q` entries separated by spaces.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.rows);
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Matrix> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let d: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix text".into()))?
            .trim()
            .parse()
            .map_err(|_| Error::Parse("bad matrix dimension".into()))?;
        let mut rows = Vec::with_capacity(d);
        for _ in 0..d {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("missing matrix row".into()))?;
            let row: Result<Vec<Rational>> =
                line.split_whitespace().map(crate::rat::parse_rational).collect();
            let row = row?;
            if row.len() != d {
                return Err(Error::Parse("matrix row has wrong length".into()));
            }
            rows.push(row);
        }
        Ok(Matrix::from_rows(rows))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeLabel {
    Primal,
    Dual,
    Custom,
}

/// A full-rank lattice generated by the columns of `basis`.
#[derive(Clone, Debug)]
pub struct Lattice {
    dim: usize,
    basis: Matrix,
    label: LatticeLabel,
}

impl Lattice {
    /// Public constructor: requires |det| = 1 exactly.
    pub fn unimodular(basis: Matrix, label: LatticeLabel) -> Result<Self> {
        assert_eq!(basis.rows(), basis.cols());
        let det = basis.det();
        if det.abs() != Rational::one() {
            return Err(Error::NotUnimodular);
        }
        Ok(Lattice {
            dim: basis.rows(),
            basis,
            label,
        })
    }

    /// Any nonsingular basis; the minima engine tolerates non-unit
    /// determinants even though the flow constructors never produce them.
    pub fn from_basis_unchecked(basis: Matrix) -> Result<Self> {
        assert_eq!(basis.rows(), basis.cols());
        if basis.det().is_zero() {
            return Err(Error::SingularBasis);
        }
        Ok(Lattice {
            dim: basis.rows(),
            basis,
            label: LatticeLabel::Custom,
        })
    }

    pub fn standard(dim: usize) -> Self {
        Lattice {
            dim,
            basis: Matrix::identity(dim),
            label: LatticeLabel::Custom,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn label(&self) -> LatticeLabel {
        self.label
    }
}

/// The matrix Theta of reals being approximated: n rows, m columns, d = m+n.
#[derive(Clone, Debug)]
pub struct ThetaSpec {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<Vec<RealSpec>>,
}

impl ThetaSpec {
    pub fn new(m: usize, n: usize, entries: Vec<Vec<RealSpec>>) -> Result<Self> {
        if m < 1 || n < 1 {
            return Err(Error::InvalidSpec("need m >= 1 and n >= 1".into()));
        }
        if entries.len() != n || entries.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidSpec("Theta entries must form an n x m array".into()));
        }
        for row in &entries {
            for e in row {
                e.validate()?;
            }
        }
        Ok(ThetaSpec { m, n, entries })
    }

    /// The m = 1 column case of the theorems.
    pub fn column(entries: Vec<RealSpec>) -> Result<Self> {
        let n = entries.len();
        ThetaSpec::new(1, n, entries.into_iter().map(|e| vec![e]).collect())
    }

    pub fn d(&self) -> usize {
        self.m + self.n
    }

    /// Rational stand-ins for every entry, each within `faithfulness`.
    pub fn approx_entries(&self, faithfulness: &Rational) -> Vec<Vec<Rational>> {
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| approximate(e, faithfulness).value)
                    .collect()
            })
            .collect()
    }
}

/// Basis T_Theta^{-1} = [[E_m, 0], [-Theta, E_n]] with Theta replaced by
/// rational approximants within `faithfulness`.
pub fn primal_lattice(theta: &ThetaSpec, faithfulness: &Rational) -> Lattice {
    assert!(faithfulness.is_positive());
    let d = theta.d();
    let th = theta.approx_entries(faithfulness);
    let mut basis = Matrix::identity(d);
    for (i, row) in th.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            basis[(theta.m + i, j)] = -v.clone();
        }
    }
    debug_assert!(basis.det() == Rational::one());
    Lattice {
        dim: d,
        basis,
        label: LatticeLabel::Primal,
    }
}

/// Basis T_Theta^T = [[E_m, Theta^T], [0, E_n]].
pub fn dual_lattice(theta: &ThetaSpec, faithfulness: &Rational) -> Lattice {
    assert!(faithfulness.is_positive());
    let d = theta.d();
    let th = theta.approx_entries(faithfulness);
    let mut basis = Matrix::identity(d);
    for (i, row) in th.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            basis[(j, theta.m + i)] = v.clone();
        }
    }
    debug_assert!(basis.det() == Rational::one());
    Lattice {
        dim: d,
        basis,
        label: LatticeLabel::Dual,
    }
}

/// Linear weight-vector path: tau_i(s) = w_i ln u with s = c ln u.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSpec {
    weights: Vec<i64>,
    scale_c: Rational,
}

impl PathSpec {
    pub fn new(weights: Vec<i64>, scale_c: Rational) -> Result<Self> {
        if weights.iter().sum::<i64>() != 0 {
            return Err(Error::InvalidSpec("path weights must sum to zero".into()));
        }
        if !scale_c.is_positive() {
            return Err(Error::InvalidSpec("path scale constant must be > 0".into()));
        }
        Ok(PathSpec { weights, scale_c })
    }

    /// tau_1..m = s, tau_m+1..d = -m s / n: weights (n,..,n,-m,..,-m), c = n.
    pub fn primal(m: usize, n: usize) -> Self {
        let mut weights = vec![n as i64; m];
        weights.extend(std::iter::repeat(-(m as i64)).take(n));
        PathSpec {
            weights,
            scale_c: rat_int(n as i64),
        }
    }

    /// Dual path for m = 1: tau_1 = -n s, tau_i = s; weights (-n,1,..,1), c = 1.
    pub fn dual(n: usize) -> Self {
        let mut weights = vec![-(n as i64)];
        weights.extend(std::iter::repeat(1).take(n));
        PathSpec {
            weights,
            scale_c: rat_int(1),
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn scale_c(&self) -> &Rational {
        &self.scale_c
    }

    /// s = c ln u, for reporting.
    pub fn s_of(&self, u: &ScaleValue) -> f64 {
        crate::rat::to_f64_approx(&self.scale_c) * u.ln_f64()
    }

    /// e^{tau_i(s)} = u^{w_i}, exactly.
    pub fn tau_factor(&self, u: &ScaleValue, i: usize) -> ScaleValue {
        u.pow_int(self.weights[i])
    }
}

/// A symmetric parallelepiped given by exact half-widths.
#[derive(Clone, Debug)]
pub struct BoxShape {
    half_widths: Vec<ScaleValue>,
}

impl BoxShape {
    pub fn new(half_widths: Vec<ScaleValue>) -> Self {
        assert!(!half_widths.is_empty());
        BoxShape { half_widths }
    }

    pub fn from_rationals(hw: Vec<Rational>) -> Self {
        BoxShape::new(hw.into_iter().map(ScaleValue::from_rational).collect())
    }

    pub fn dim(&self) -> usize {
        self.half_widths.len()
    }

    pub fn half_width(&self, i: usize) -> &ScaleValue {
        &self.half_widths[i]
    }

    pub fn half_widths(&self) -> &[ScaleValue] {
        &self.half_widths
    }

    pub fn volume_is_one(&self) -> bool {
        let prod = self
            .half_widths
            .iter()
            .fold(ScaleValue::one(), |acc, h| acc.mul(h));
        prod == ScaleValue::one()
    }
}

impl fmt::Display for BoxShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hw: Vec<String> = self.half_widths.iter().map(|h| h.to_string()).collect();
        write!(f, "({})", hw.join(", "))
    }
}

/// B(s) = D_tau(s) B_inf: half-widths u^{w_i}. Requires u > 1 so that s > 0.
pub fn box_at(path: &PathSpec, u: &ScaleValue) -> Result<BoxShape> {
    if u.cmp_rational(&Rational::one()) != std::cmp::Ordering::Greater {
        return Err(Error::ScaleDomain);
    }
    let hw: Vec<ScaleValue> = (0..path.dim()).map(|i| path.tau_factor(u, i)).collect();
    let b = BoxShape::new(hw);
    debug_assert!(b.volume_is_one());
    Ok(b)
}
