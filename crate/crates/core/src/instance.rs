//! Problem instances and solver results.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, to_bigints, IntMatrix};

/// `max { c.x : A x = b, x >= 0, x integer }`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardIp {
    pub a: IntMatrix,
    pub b: Vec<BigInt>,
    pub c: Vec<BigInt>,
}

/// `max { c.x : A x <= b, x integer }`, variables free in sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityIp {
    pub a: IntMatrix,
    pub b: Vec<BigInt>,
    pub c: Vec<BigInt>,
}

/// `max { c.x + d.y : A x + B y = b, x, y >= 0, x integer }` with `y` continuous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedIp {
    pub a: IntMatrix,
    pub b_mat: IntMatrix,
    pub b: Vec<BigInt>,
    pub c: Vec<BigInt>,
    pub d: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemInstance {
    Standard(StandardIp),
    Inequality(InequalityIp),
    Mixed(MixedIp),
}

fn check_shape(a: &IntMatrix, b: &[BigInt], c: &[BigInt]) -> Result<()> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::Dimension(
            "A must have at least one row and column".into(),
        ));
    }
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "b has length {} but A has {} rows",
            b.len(),
            a.rows()
        )));
    }
    if c.len() != a.cols() {
        return Err(Error::Dimension(format!(
            "c has length {} but A has {} columns",
            c.len(),
            a.cols()
        )));
    }
    Ok(())
}

macro_rules! pure_instance_impl {
    ($ty:ident) => {
        impl $ty {
            pub fn new(a: IntMatrix, b: Vec<BigInt>, c: Vec<BigInt>) -> Result<Self> {
                check_shape(&a, &b, &c)?;
                Ok($ty { a, b, c })
            }

            /// Literal constructor for code and tests; panics on bad shapes.
            pub fn from_i64<R: AsRef<[i64]>>(a: &[R], b: &[i64], c: &[i64]) -> Self {
                Self::new(IntMatrix::from_rows(a), to_bigints(b), to_bigints(c))
                    .expect("consistent literal instance")
            }

            pub fn m(&self) -> usize {
                self.a.rows()
            }

            pub fn n(&self) -> usize {
                self.a.cols()
            }

            /// Largest absolute entry of `A`.
            pub fn delta(&self) -> BigInt {
                self.a.max_abs()
            }

            /// Largest absolute entry of `A` and `b` together.
            pub fn delta_ab(&self) -> BigInt {
                let mb = self.b.iter().map(|v| v.abs()).max().unwrap_or_default();
                self.delta().max(mb)
            }

            pub fn objective(&self, x: &[BigInt]) -> BigInt {
                dot(&self.c, x)
            }
        }
    };
}

pure_instance_impl!(StandardIp);
pure_instance_impl!(InequalityIp);

impl StandardIp {
    pub fn is_feasible(&self, x: &[BigInt]) -> bool {
        x.len() == self.n()
            && x.iter().all(|v| !v.is_negative())
            && self.a.mul_vec(x).map(|ax| ax == self.b).unwrap_or(false)
    }
}

impl InequalityIp {
    pub fn is_feasible(&self, x: &[BigInt]) -> bool {
        x.len() == self.n()
            && self
                .a
                .mul_vec(x)
                .map(|ax| ax.iter().zip(&self.b).all(|(l, r)| l <= r))
                .unwrap_or(false)
    }
}

impl MixedIp {
    pub fn new(
        a: IntMatrix,
        b_mat: IntMatrix,
        b: Vec<BigInt>,
        c: Vec<BigInt>,
        d: Vec<BigInt>,
    ) -> Result<Self> {
        check_shape(&a, &b, &c)?;
        if b_mat.rows() != a.rows() {
            return Err(Error::Dimension(format!(
                "B has {} rows but A has {}",
                b_mat.rows(),
                a.rows()
            )));
        }
        if d.len() != b_mat.cols() {
            return Err(Error::Dimension(format!(
                "d has length {} but B has {} columns",
                d.len(),
                b_mat.cols()
            )));
        }
        Ok(MixedIp { a, b_mat, b, c, d })
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn l(&self) -> usize {
        self.b_mat.cols()
    }

    pub fn delta(&self) -> BigInt {
        self.a.max_abs()
    }

    pub fn objective(&self, x: &[BigInt], y: &[BigRational]) -> BigRational {
        let ix = BigRational::from_integer(dot(&self.c, x));
        let cy: BigRational = self
            .d
            .iter()
            .zip(y)
            .map(|(d, v)| BigRational::from_integer(d.clone()) * v)
            .sum();
        ix + cy
    }

    pub fn is_feasible(&self, x: &[BigInt], y: &[BigRational]) -> bool {
        if x.len() != self.n() || y.len() != self.l() {
            return false;
        }
        if x.iter().any(|v| v.is_negative()) || y.iter().any(|v| v.is_negative()) {
            return false;
        }
        (0..self.m()).all(|i| {
            let ax = BigRational::from_integer(dot(self.a.row(i), x));
            let by: BigRational = self
                .b_mat
                .row(i)
                .iter()
                .zip(y)
                .map(|(a, v)| BigRational::from_integer(a.clone()) * v)
                .sum();
            ax + by == BigRational::from_integer(self.b[i].clone())
        })
    }

    /// The pure part `(A, b, c)` as a standard-form program.
    pub fn pure_part(&self) -> StandardIp {
        StandardIp {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of any solver in the crate.
///
/// For mixed programs `y` holds the continuous part and the certificate is
/// the integer-scaled ray over `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub status: Status,
    pub x: Option<Vec<BigInt>>,
    pub y: Option<Vec<BigRational>>,
    pub objective: Option<BigRational>,
    pub certificate: Option<Vec<BigInt>>,
    /// Set by the enumeration oracles: the answer is only claimed inside their box.
    pub boxed: bool,
}

impl Solution {
    pub fn optimal(x: Vec<BigInt>, objective: BigInt) -> Self {
        Solution {
            status: Status::Optimal,
            x: Some(x),
            y: None,
            objective: Some(BigRational::from_integer(objective)),
            certificate: None,
            boxed: false,
        }
    }

    pub fn optimal_mixed(x: Vec<BigInt>, y: Vec<BigRational>, objective: BigRational) -> Self {
        Solution {
            status: Status::Optimal,
            x: Some(x),
            y: Some(y),
            objective: Some(objective),
            certificate: None,
            boxed: false,
        }
    }

    pub fn infeasible() -> Self {
        Solution {
            status: Status::Infeasible,
            x: None,
            y: None,
            objective: None,
            certificate: None,
            boxed: false,
        }
    }

    /// `feasible` is any feasible point found on the way, kept for inspection.
    pub fn unbounded(direction: Vec<BigInt>, feasible: Option<Vec<BigInt>>) -> Self {
        Solution {
            status: Status::Unbounded,
            x: feasible,
            y: None,
            objective: None,
            certificate: Some(direction),
            boxed: false,
        }
    }

    pub fn with_boxed(mut self, boxed: bool) -> Self {
        self.boxed = boxed;
        self
    }

    /// The objective as an integer, when it is one.
    pub fn integral_objective(&self) -> Option<BigInt> {
        self.objective
            .as_ref()
            .filter(|v| v.is_integer())
            .map(|v| v.to_integer())
    }
}

/// Checks an unbounded-direction certificate for `max c.x, A x = b, x >= 0`.
pub fn is_valid_ray(a: &IntMatrix, c: &[BigInt], d: &[BigInt]) -> bool {
    d.len() == a.cols()
        && d.iter().all(|v| !v.is_negative())
        && d.iter().any(|v| !v.is_zero())
        && a.mul_vec(d)
            .map(|ad| ad.iter().all(Zero::is_zero))
            .unwrap_or(false)
        && dot(c, d).is_positive()
}
