//! Exact two-phase primal simplex over rationals with Bland's rule.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

/// `max c.x  s.t.  A x = b, x >= 0` over exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLp {
    pub a: Vec<Vec<BigRational>>,
    pub b: Vec<BigRational>,
    pub c: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<BigRational>,
        value: BigRational,
    },
    Infeasible,
    /// `ray >= 0`, `A ray = 0`, `c.ray > 0`.
    Unbounded {
        ray: Vec<BigRational>,
    },
}

pub(crate) fn rat(v: &BigInt) -> BigRational {
    BigRational::from_integer(v.clone())
}

impl RationalLp {
    pub fn new(a: Vec<Vec<BigRational>>, b: Vec<BigRational>, c: Vec<BigRational>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Dimension(format!(
                "{} constraint rows but {} right-hand sides",
                a.len(),
                b.len()
            )));
        }
        if let Some(r) = a.iter().find(|r| r.len() != c.len()) {
            return Err(Error::Dimension(format!(
                "row of length {} for {} variables",
                r.len(),
                c.len()
            )));
        }
        Ok(RationalLp { a, b, c })
    }

    pub fn from_integers(a: &IntMatrix, b: &[BigInt], c: &[BigInt]) -> Result<Self> {
        let rows = (0..a.rows())
            .map(|i| a.row(i).iter().map(rat).collect())
            .collect();
        Self::new(
            rows,
            b.iter().map(rat).collect(),
            c.iter().map(rat).collect(),
        )
    }

    pub fn vars(&self) -> usize {
        self.c.len()
    }

    pub fn is_feasible(&self, x: &[BigRational]) -> bool {
        x.len() == self.vars()
            && x.iter().all(|v| !v.is_negative())
            && self
                .a
                .iter()
                .zip(&self.b)
                .all(|(row, bi)| &rdot(row, x) == bi)
    }
}

pub(crate) fn rdot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Tableau {
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        self.rhs[r] /= &p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        self.basis[r] = col;
    }

    fn reduced_cost(&self, cost: &[BigRational], j: usize) -> BigRational {
        let mut r = cost[j].clone();
        for (i, &bj) in self.basis.iter().enumerate() {
            if !cost[bj].is_zero() && !self.rows[i][j].is_zero() {
                r -= &cost[bj] * &self.rows[i][j];
            }
        }
        r
    }

    /// Maximizes `cost` over the columns allowed by `usable`. Returns the
    /// entering column of an unbounded edge, if any.
    fn optimize(&mut self, cost: &[BigRational], usable: &dyn Fn(usize) -> bool) -> Option<usize> {
        let width = cost.len();
        loop {
            // Bland: smallest improving column, then smallest basic index among ratio ties
            let entering = (0..width)
                .filter(|&j| usable(j) && !self.basis.contains(&j))
                .find(|&j| self.reduced_cost(cost, j).is_positive());
            let col = entering?;
            let mut leave: Option<(usize, BigRational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return Some(col),
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }

    fn point(&self, width: usize) -> Vec<BigRational> {
        let mut x = vec![BigRational::zero(); width];
        for (i, &bj) in self.basis.iter().enumerate() {
            if bj < width {
                x[bj] = self.rhs[i].clone();
            }
        }
        x
    }
}

/// Solves `lp` exactly. Bland's rule guarantees termination.
pub fn rational_simplex(lp: &RationalLp) -> LpOutcome {
    let n = lp.vars();
    let m = lp.a.len();
    // Phase 1: artificials n..n+m on rows with nonnegative right-hand sides.
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let flip = lp.b[i].is_negative();
        let mut row: Vec<BigRational> = lp.a[i]
            .iter()
            .map(|v| if flip { -v.clone() } else { v.clone() })
            .collect();
        row.extend((0..m).map(|k| {
            if k == i {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        }));
        rows.push(row);
        rhs.push(if flip {
            -lp.b[i].clone()
        } else {
            lp.b[i].clone()
        });
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis: (n..n + m).collect(),
    };
    let mut phase1 = vec![BigRational::zero(); n + m];
    for v in phase1.iter_mut().skip(n) {
        *v = -BigRational::one();
    }
    let all = |_: usize| true;
    t.optimize(&phase1, &all);
    if t.rhs
        .iter()
        .zip(&t.basis)
        .any(|(v, &bj)| bj >= n && !v.is_zero())
    {
        return LpOutcome::Infeasible;
    }
    // Drive remaining (zero-valued) artificials out, dropping redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    // Phase 2 on the original columns only.
    let mut cost = lp.c.clone();
    cost.extend((0..m).map(|_| BigRational::zero()));
    let original = |j: usize| j < n;
    if let Some(col) = t.optimize(&cost, &original) {
        let mut ray = vec![BigRational::zero(); n];
        ray[col] = BigRational::one();
        for (i, &bj) in t.basis.iter().enumerate() {
            ray[bj] = -t.rows[i][col].clone();
        }
        return LpOutcome::Unbounded { ray };
    }
    let x = t.point(n);
    let value = rdot(&lp.c, &x);
    LpOutcome::Optimal { x, value }
}

/// Scales a rational vector to the primitive integer vector on the same ray.
pub(crate) fn primitive_integer(v: &[BigRational]) -> Vec<BigInt> {
    use num_integer::Integer;
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * rat(&l)).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}
