//! Lower-triangular Hermite Normal Form by unimodular column operations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HnfResult {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// Always the identity here; callers choose the row order before calling.
    pub applied_row_permutation: Vec<usize>,
}

/// Computes `H = M U` for a nonsingular square `M`.
///
/// `H` is lower triangular with a positive diagonal and every entry left of
/// the diagonal reduced into `[0, H[i][i])`. `U` is unimodular.
pub fn hnf(m: &IntMatrix) -> Result<HnfResult> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "HNF of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut h = m.clone();
    let mut u = IntMatrix::identity(n);

    for i in 0..n {
        // Fold columns i+1.. into column i with extended-gcd steps.
        for j in i + 1..n {
            if h.get(i, j).is_zero() {
                continue;
            }
            let a = h.get(i, i).clone();
            let b = h.get(i, j).clone();
            let eg = a.extended_gcd(&b);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            // [col_i col_j] <- [col_i col_j] * [[s, -b/g], [t, a/g]], determinant 1
            let p = -(&b / &g);
            let q = &a / &g;
            combine_columns(&mut h, i, j, &s, &t, &p, &q);
            combine_columns(&mut u, i, j, &s, &t, &p, &q);
            debug_assert_eq!(h.get(i, i), &g);
        }
        if h.get(i, i).is_zero() {
            return Err(Error::Singular);
        }
        if h.get(i, i).is_negative() {
            negate_column(&mut h, i);
            negate_column(&mut u, i);
        }
        let d = h.get(i, i).clone();
        for j in 0..i {
            let q = h.get(i, j).div_floor(&d);
            if !q.is_zero() {
                sub_column_multiple(&mut h, j, i, &q);
                sub_column_multiple(&mut u, j, i, &q);
            }
        }
    }

    Ok(HnfResult {
        h,
        u,
        applied_row_permutation: (0..n).collect(),
    })
}

fn combine_columns(
    m: &mut IntMatrix,
    i: usize,
    j: usize,
    s: &BigInt,
    t: &BigInt,
    p: &BigInt,
    q: &BigInt,
) {
    for r in 0..m.rows() {
        let ci = m.get(r, i).clone();
        let cj = m.get(r, j).clone();
        m.set(r, i, &ci * s + &cj * t);
        m.set(r, j, &ci * p + &cj * q);
    }
}

fn negate_column(m: &mut IntMatrix, j: usize) {
    for r in 0..m.rows() {
        let v = -m.get(r, j).clone();
        m.set(r, j, v);
    }
}

/// col_target -= q * col_source
fn sub_column_multiple(m: &mut IntMatrix, target: usize, source: usize, q: &BigInt) {
    for r in 0..m.rows() {
        let v = m.get(r, target) - q * m.get(r, source);
        m.set(r, target, v);
    }
}

/// Checks the triangular and reduction conditions of an HNF.
pub fn is_hermite_normal_form(h: &IntMatrix) -> bool {
    if !h.is_square() {
        return false;
    }
    let n = h.rows();
    let one = BigInt::one();
    (0..n).all(|i| {
        let d = h.get(i, i);
        d >= &one
            && (0..i).all(|j| !h.get(i, j).is_negative() && h.get(i, j) < d)
            && (i + 1..n).all(|j| h.get(i, j).is_zero())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::det;

    #[test]
    fn identity_is_fixed() {
        let r = hnf(&IntMatrix::identity(2)).unwrap();
        assert_eq!(r.h, IntMatrix::identity(2));
        assert_eq!(r.u, IntMatrix::identity(2));
    }

    #[test]
    fn reduces_left_of_diagonal() {
        let a = IntMatrix::from_rows(&[[1, 0], [3, 2]]);
        let r = hnf(&a).unwrap();
        assert_eq!(r.h, IntMatrix::from_rows(&[[1, 0], [1, 2]]));
        assert_eq!(r.u, IntMatrix::from_rows(&[[1, 0], [-1, 1]]));
        assert_eq!(a.mul(&r.u).unwrap(), r.h);
    }

    #[test]
    fn already_in_form() {
        let a = IntMatrix::from_rows(&[[2, 0], [0, 3]]);
        let r = hnf(&a).unwrap();
        assert_eq!(r.h, a);
        assert_eq!(r.u, IntMatrix::identity(2));
    }

    #[test]
    fn singular_rejected() {
        let a = IntMatrix::from_rows(&[[1, 2], [2, 4]]);
        assert_eq!(hnf(&a), Err(Error::Singular));
    }

    #[test]
    fn negative_and_dense_input() {
        let a = IntMatrix::from_rows(&[[-3, 5, 1], [2, -7, 4], [6, 0, -2]]);
        let r = hnf(&a).unwrap();
        assert!(is_hermite_normal_form(&r.h));
        assert_eq!(a.mul(&r.u).unwrap(), r.h);
        assert_eq!(det(&r.u).unwrap().abs(), BigInt::one());
    }
}
