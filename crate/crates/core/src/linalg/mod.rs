//! Exact linear algebra over the integers and rationals.
//!
//! Determinants and ranks use fraction-free (Bareiss) elimination. Solves and
//! kernels go through a reduced row echelon form over `BigRational`.

mod hnf;

pub use hnf::{hnf, is_hermite_normal_form, HnfResult};

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

/// Determinant by Bareiss elimination.
pub fn det(m: &IntMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "determinant of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a = m.to_rows();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    negate = !negate;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if negate { -d } else { d })
}

/// Rank over the rationals, computed fraction-free.
pub fn rank(m: &IntMatrix) -> usize {
    let mut a = m.to_rows();
    let (rows, cols) = (m.rows(), m.cols());
    let mut prev = BigInt::one();
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        for i in r + 1..rows {
            for j in col + 1..cols {
                let v = &a[i][j] * &a[r][col] - &a[i][col] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][col] = BigInt::zero();
        }
        prev = a[r][col].clone();
        r += 1;
    }
    r
}

/// Reduced row echelon form over the rationals.
pub(crate) struct Rref {
    pub rows: Vec<Vec<BigRational>>,
    pub pivots: Vec<usize>,
}

pub(crate) fn rref(mut a: Vec<Vec<BigRational>>, cols: usize) -> Rref {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][col].recip();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i == r || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for j in col..a[i].len() {
                let t = &f * &a[r][j];
                a[i][j] -= t;
            }
        }
        pivots.push(col);
        r += 1;
    }
    Rref { rows: a, pivots }
}

pub(crate) fn to_rational_rows(m: &IntMatrix) -> Vec<Vec<BigRational>> {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|v| BigRational::from_integer(v.clone()))
                .collect()
        })
        .collect()
}

/// Solves `B x = rhs` for `B` with linearly independent columns.
///
/// Returns `None` when the system is inconsistent or its unique solution is
/// not integral.
pub fn solve_unique_integral(b: &IntMatrix, rhs: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    if rhs.len() != b.rows() {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} for {} rows",
            rhs.len(),
            b.rows()
        )));
    }
    let cols = b.cols();
    let mut aug = to_rational_rows(b);
    for (row, v) in aug.iter_mut().zip(rhs) {
        row.push(BigRational::from_integer(v.clone()));
    }
    let red = rref(aug, cols + 1);
    if red.pivots.iter().filter(|&&p| p < cols).count() < cols {
        return Err(Error::DependentColumns);
    }
    if red.pivots.contains(&cols) {
        return Ok(None);
    }
    let mut x = Vec::with_capacity(cols);
    for row in red.rows.iter().take(cols) {
        let v = &row[cols];
        if !v.is_integer() {
            return Ok(None);
        }
        x.push(v.to_integer());
    }
    Ok(Some(x))
}

/// Scales a rational vector to a primitive integer vector with the same direction.
pub(crate) fn primitive_integer(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// One primitive integer vector per free column of the echelon form; together
/// they span the rational kernel.
pub fn integer_kernel_basis(b: &IntMatrix) -> Vec<Vec<BigInt>> {
    let cols = b.cols();
    let red = rref(to_rational_rows(b), cols);
    let free = (0..cols).filter(|c| !red.pivots.contains(c));
    free.map(|f| {
        let mut v = vec![BigRational::zero(); cols];
        v[f] = BigRational::one();
        for (row, &p) in red.rows.iter().zip(&red.pivots) {
            v[p] = -row[f].clone();
        }
        let mut d = primitive_integer(&v);
        if d.iter()
            .find(|x| !x.is_zero())
            .is_some_and(|x| x.is_negative())
        {
            d.iter_mut().for_each(|x| *x = -x.clone());
        }
        d
    })
    .collect()
}

/// A nonzero primitive integer vector in the kernel of `b`, if the kernel is
/// nontrivial. The first nonzero entry is positive.
pub fn integer_kernel_vector(b: &IntMatrix) -> Option<Vec<BigInt>> {
    integer_kernel_basis(b).into_iter().next()
}

/// Indices of a lexicographically first maximal set of independent rows.
pub fn independent_rows(m: &IntMatrix) -> Vec<usize> {
    rref(to_rational_rows(&m.transpose()), m.rows()).pivots
}

/// Adjugate of a square matrix, so that `adj * m = det(m) * I`.
pub fn adjugate(m: &IntMatrix) -> Result<IntMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension("adjugate of a non-square matrix".into()));
    }
    let n = m.rows();
    if n == 1 {
        return Ok(IntMatrix::identity(1));
    }
    let mut adj = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let minor = det(&m.select_rows(&rows).select_columns(&cols))?;
            let cof = if (i + j) % 2 == 0 { minor } else { -minor };
            adj.set(j, i, cof);
        }
    }
    Ok(adj)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdetReport {
    pub delta_max: BigInt,
    pub has_singular_square_submatrix: bool,
    pub rank: usize,
}

/// Scans every `(n x n)` row-subset determinant of an `m x n` matrix, `m >= n`.
pub fn subdet_scan(a: &IntMatrix) -> Result<SubdetReport> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::Dimension(format!(
            "sub-determinant scan needs rows >= cols, got {m}x{n}"
        )));
    }
    let mut delta_max = BigInt::zero();
    let mut singular = false;
    for rows in (0..m).combinations(n) {
        let d = det(&a.select_rows(&rows))?.abs();
        if d.is_zero() {
            singular = true;
        }
        if d > delta_max {
            delta_max = d;
        }
    }
    Ok(SubdetReport {
        delta_max,
        has_singular_square_submatrix: singular,
        rank: rank(a),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Equality,
    Inequality,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalizedRow {
    Row { row: Vec<BigInt>, rhs: BigInt },
    Infeasible,
}

/// Divides a constraint row by the gcd of its entries.
///
/// Equalities become infeasible when the gcd does not divide the right-hand
/// side; inequalities round the right-hand side down.
pub fn gcd_normalize_row(row: &[BigInt], rhs: &BigInt, sense: Sense) -> Result<NormalizedRow> {
    let g = row.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        return Err(Error::Domain("cannot normalize a zero row".into()));
    }
    let row: Vec<BigInt> = row.iter().map(|v| v / &g).collect();
    let rhs = match sense {
        Sense::Equality => {
            if !rhs.is_multiple_of(&g) {
                return Ok(NormalizedRow::Infeasible);
            }
            rhs / &g
        }
        Sense::Inequality => rhs.div_floor(&g),
    };
    Ok(NormalizedRow::Row { row, rhs })
}

/// A minimal linearly dependent column set and its primitive kernel vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub support: Vec<usize>,
    /// Kernel vector restricted to `support`; first entry positive.
    pub coefficients: Vec<BigInt>,
}

impl Circuit {
    pub fn max_abs(&self) -> BigInt {
        self.coefficients
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Dense vector of length `n`.
    pub fn to_dense(&self, n: usize) -> Vec<BigInt> {
        let mut d = vec![BigInt::zero(); n];
        for (&j, v) in self.support.iter().zip(&self.coefficients) {
            d[j] = v.clone();
        }
        d
    }

    /// All coefficients share one sign.
    pub fn is_sign_definite(&self) -> bool {
        self.coefficients.iter().all(|v| v.is_positive())
            || self.coefficients.iter().all(|v| v.is_negative())
    }
}

/// Enumerates all circuits of the column matroid of `a`.
///
/// Supports have size at most `rank(a) + 1`; each circuit's kernel is
/// one-dimensional with full support.
pub fn circuits(a: &IntMatrix) -> Vec<Circuit> {
    let n = a.cols();
    let r = rank(a);
    let mut out = Vec::new();
    for size in 1..=(r + 1).min(n) {
        for support in (0..n).combinations(size) {
            let sub = a.select_columns(&support);
            let basis = integer_kernel_basis(&sub);
            if basis.len() != 1 {
                continue;
            }
            let d = basis.into_iter().next().expect("one kernel vector");
            if d.iter().all(|v| !v.is_zero()) {
                out.push(Circuit {
                    support,
                    coefficients: d,
                });
            }
        }
    }
    out
}
