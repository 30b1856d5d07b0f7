//! Exhaustive reference solvers.
//!
//! The enumeration oracles search a box and never claim more than the box
//! shows: their results carry `boxed = true`. Partial assignments are cut
//! only when no completion inside the box can satisfy a row, so the search
//! is exhaustive in effect. Unboundedness is checked separately by an LP over
//! the recession cone, which shares no code with the decomposition solver.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::instance::{InequalityIp, MixedIp, Solution, StandardIp};
use crate::matrix::IntMatrix;
use crate::simplex::{primitive_integer, rat, rational_simplex, LpOutcome, RationalLp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowSense {
    Eq,
    Le,
    Ge,
}

struct Enumerator {
    lo: Vec<i128>,
    hi: Vec<i128>,
    rows: Vec<(Vec<i128>, RowSense, i128)>,
    /// per row, per depth k: range of what variables k.. can add
    rem: Vec<Vec<(i128, i128)>>,
}

impl Enumerator {
    fn new(lo: Vec<i128>, hi: Vec<i128>, rows: Vec<(Vec<i128>, RowSense, i128)>) -> Self {
        let n = lo.len();
        let rem = rows
            .iter()
            .map(|(coef, _, _)| {
                let mut acc = vec![(0i128, 0i128); n + 1];
                for k in (0..n).rev() {
                    let a = coef[k] * lo[k];
                    let b = coef[k] * hi[k];
                    acc[k] = (acc[k + 1].0 + a.min(b), acc[k + 1].1 + a.max(b));
                }
                acc
            })
            .collect();
        Enumerator { lo, hi, rows, rem }
    }

    /// Visits every box point satisfying all rows, in lexicographic order.
    fn visit(&self, f: &mut dyn FnMut(&[i128])) {
        let mut x = Vec::with_capacity(self.lo.len());
        let mut partial = vec![0i128; self.rows.len()];
        self.rec(&mut x, &mut partial, f);
    }

    fn rec(&self, x: &mut Vec<i128>, partial: &mut [i128], f: &mut dyn FnMut(&[i128])) {
        let k = x.len();
        for (p, (_, sense, rhs)) in self.rows.iter().enumerate() {
            let (rlo, rhi) = self.rem[p][k];
            let (min, max) = (partial[p] + rlo, partial[p] + rhi);
            let ok = match sense {
                RowSense::Eq => min <= *rhs && *rhs <= max,
                RowSense::Le => min <= *rhs,
                RowSense::Ge => max >= *rhs,
            };
            if !ok {
                return;
            }
        }
        if k == self.lo.len() {
            f(x);
            return;
        }
        for t in self.lo[k]..=self.hi[k] {
            for (p, (coef, _, _)) in self.rows.iter().enumerate() {
                partial[p] += coef[k] * t;
            }
            x.push(t);
            self.rec(x, partial, f);
            x.pop();
            for (p, (coef, _, _)) in self.rows.iter().enumerate() {
                partial[p] -= coef[k] * t;
            }
        }
    }
}

fn small(v: &BigInt, what: &str) -> Result<i128> {
    v.to_i128()
        .filter(|x| x.abs() < 1 << 40)
        .ok_or_else(|| Error::Overflow(format!("{what} = {v} is too large to enumerate")))
}

fn small_vec(v: &[BigInt], what: &str) -> Result<Vec<i128>> {
    v.iter().map(|x| small(x, what)).collect()
}

fn rows_of(
    a: &IntMatrix,
    b: &[BigInt],
    sense: &[RowSense],
) -> Result<Vec<(Vec<i128>, RowSense, i128)>> {
    (0..a.rows())
        .map(|i| {
            Ok((
                small_vec(a.row(i), "matrix entry")?,
                sense[i],
                small(&b[i], "rhs")?,
            ))
        })
        .collect()
}

fn dot_i(a: &[i128], x: &[i128]) -> i128 {
    a.iter().zip(x).map(|(p, q)| p * q).sum()
}

fn to_big(x: &[i128]) -> Vec<BigInt> {
    x.iter().map(|&v| BigInt::from(v)).collect()
}

/// Best point of `max c.x` over the rows, first in lexicographic order among ties.
fn best_point(e: &Enumerator, c: &[i128]) -> Option<(i128, Vec<i128>)> {
    let mut best: Option<(i128, Vec<i128>)> = None;
    e.visit(&mut |x| {
        let v = dot_i(c, x);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, x.to_vec()));
        }
    });
    best
}

fn boxed_result(best: Option<(i128, Vec<i128>)>) -> Solution {
    match best {
        Some((v, x)) => Solution::optimal(to_big(&x), BigInt::from(v)),
        None => Solution::infeasible(),
    }
    .with_boxed(true)
}

fn standard_enumerator(ip: &StandardIp, bx: &BigInt) -> Result<Enumerator> {
    if bx.is_negative() {
        return Err(Error::Domain("box must be nonnegative".into()));
    }
    let n = ip.n();
    let r = small(bx, "box")?;
    let rows = rows_of(&ip.a, &ip.b, &vec![RowSense::Eq; ip.m()])?;
    Ok(Enumerator::new(vec![0; n], vec![r; n], rows))
}

/// Exact optimum of a standard-form program over `0 <= x_j <= bx`.
pub fn brute_standard(ip: &StandardIp, bx: &BigInt) -> Result<Solution> {
    let e = standard_enumerator(ip, bx)?;
    Ok(boxed_result(best_point(
        &e,
        &small_vec(&ip.c, "objective")?,
    )))
}

/// Every optimal point inside the box, in lexicographic order.
pub fn brute_standard_optima(ip: &StandardIp, bx: &BigInt) -> Result<Vec<Vec<BigInt>>> {
    let e = standard_enumerator(ip, bx)?;
    let c = small_vec(&ip.c, "objective")?;
    let mut best: Option<i128> = None;
    let mut all: Vec<Vec<i128>> = Vec::new();
    e.visit(&mut |x| {
        let v = dot_i(&c, x);
        match best {
            Some(b) if v < b => {}
            Some(b) if v == b => all.push(x.to_vec()),
            _ => {
                best = Some(v);
                all = vec![x.to_vec()];
            }
        }
    });
    Ok(all.iter().map(|x| to_big(x)).collect())
}

/// Exact optimum of an inequality-form program over a signed box.
pub fn brute_inequality(ip: &InequalityIp, bx: &[(BigInt, BigInt)]) -> Result<Solution> {
    if bx.len() != ip.n() {
        return Err(Error::Dimension(format!(
            "box has {} ranges for {} variables",
            bx.len(),
            ip.n()
        )));
    }
    let lo = bx
        .iter()
        .map(|(l, _)| small(l, "box"))
        .collect::<Result<Vec<_>>>()?;
    let hi = bx
        .iter()
        .map(|(_, h)| small(h, "box"))
        .collect::<Result<Vec<_>>>()?;
    let rows = rows_of(&ip.a, &ip.b, &vec![RowSense::Le; ip.m()])?;
    let e = Enumerator::new(lo, hi, rows);
    Ok(boxed_result(best_point(
        &e,
        &small_vec(&ip.c, "objective")?,
    )))
}

/// Continuous part for a fixed integer part: `max d.y, B y = r, y >= 0`.
fn continuous_part(b_mat: &IntMatrix, d: &[BigInt], r: &[BigInt]) -> LpOutcome {
    let lp = RationalLp {
        a: (0..b_mat.rows())
            .map(|i| b_mat.row(i).iter().map(rat).collect())
            .collect(),
        b: r.iter().map(rat).collect(),
        c: d.iter().map(rat).collect(),
    };
    rational_simplex(&lp)
}

/// Exact optimum of a mixed program over integer `0 <= x_j <= bx`, solving
/// one exact LP in `y` per integer point.
pub fn brute_mixed(mip: &MixedIp, bx: &BigInt) -> Result<Solution> {
    if bx.is_negative() {
        return Err(Error::Domain("box must be nonnegative".into()));
    }
    let (m, n) = (mip.m(), mip.n());
    let r = small(bx, "box")?;
    // A row restricts A_i x only when the continuous part cannot offset it.
    let mut rows = Vec::new();
    for i in 0..m {
        let brow = mip.b_mat.row(i);
        let sense = if brow.iter().all(Zero::is_zero) {
            RowSense::Eq
        } else if brow.iter().all(|v| !v.is_negative()) {
            RowSense::Le
        } else if brow.iter().all(|v| !v.is_positive()) {
            RowSense::Ge
        } else {
            continue;
        };
        rows.push((
            small_vec(mip.a.row(i), "matrix entry")?,
            sense,
            small(&mip.b[i], "rhs")?,
        ));
    }
    let e = Enumerator::new(vec![0; n], vec![r; n], rows);
    let mut best: Option<(BigRational, Vec<i128>, Vec<BigRational>)> = None;
    let mut ray: Option<(Vec<i128>, Vec<BigRational>)> = None;
    e.visit(&mut |x| {
        if ray.is_some() {
            return;
        }
        let xb = to_big(x);
        let ax = mip.a.mul_vec(&xb).expect("shapes checked");
        let rhs: Vec<BigInt> = mip.b.iter().zip(&ax).map(|(b, v)| b - v).collect();
        match continuous_part(&mip.b_mat, &mip.d, &rhs) {
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded { ray: r } => ray = Some((x.to_vec(), r)),
            LpOutcome::Optimal { x: y, value } => {
                let total = rat(&crate::matrix::dot(&mip.c, &xb)) + value;
                if best.as_ref().is_none_or(|(b, _, _)| &total > b) {
                    best = Some((total, x.to_vec(), y));
                }
            }
        }
    });
    if let Some((x, r)) = ray {
        let mut dir = vec![BigInt::zero(); n];
        dir.extend(primitive_integer(&r));
        let mut s = Solution::unbounded(dir, Some(to_big(&x)));
        s.boxed = true;
        return Ok(s);
    }
    Ok(match best {
        Some((value, x, y)) => Solution::optimal_mixed(to_big(&x), y, value),
        None => Solution::infeasible(),
    }
    .with_boxed(true))
}

/// Improving direction of `{d >= 0 : A d = 0}` found by an LP over the
/// normalized recession cone, as a primitive integer vector.
pub fn lp_improving_ray(a: &IntMatrix, c: &[BigInt]) -> Option<Vec<BigInt>> {
    let n = a.cols();
    // max c.d  s.t.  A d = 0, sum d + s = 1, d, s >= 0
    let mut rows: Vec<Vec<BigRational>> = (0..a.rows())
        .map(|i| {
            let mut r: Vec<BigRational> = a.row(i).iter().map(rat).collect();
            r.push(BigRational::zero());
            r
        })
        .collect();
    rows.push(vec![BigRational::one(); n + 1]);
    let mut rhs = vec![BigRational::zero(); a.rows()];
    rhs.push(BigRational::one());
    let mut obj: Vec<BigRational> = c.iter().map(rat).collect();
    obj.push(BigRational::zero());
    match rational_simplex(&RationalLp {
        a: rows,
        b: rhs,
        c: obj,
    }) {
        LpOutcome::Optimal { x, value } if value.is_positive() => Some(primitive_integer(&x[..n])),
        _ => None,
    }
}

/// Improving direction `A d <= 0`, `c.d > 0` for an inequality-form program.
pub fn lp_improving_inequality_ray(ip: &InequalityIp) -> Option<Vec<BigInt>> {
    let n = ip.n();
    let m = ip.m();
    // d = p - q; A p - A q + s = 0; sum(p + q) + t = 1
    let mut a = IntMatrix::zeros(m + 1, 2 * n + m + 1);
    for i in 0..m {
        for j in 0..n {
            a.set(i, j, ip.a.get(i, j).clone());
            a.set(i, n + j, -ip.a.get(i, j));
        }
        a.set(i, 2 * n + i, BigInt::one());
    }
    for j in 0..=2 * n {
        let col = if j < 2 * n { j } else { 2 * n + m };
        a.set(m, col, BigInt::one());
    }
    let mut b = vec![BigInt::zero(); m];
    b.push(BigInt::one());
    let mut c: Vec<BigInt> = ip.c.clone();
    c.extend(ip.c.iter().map(|v| -v));
    c.extend(std::iter::repeat_n(BigInt::zero(), m + 1));
    let lp = RationalLp::from_integers(&a, &b, &c).expect("consistent shapes");
    match rational_simplex(&lp) {
        LpOutcome::Optimal { x, value } if value.is_positive() => {
            let d: Vec<BigRational> = (0..n).map(|j| &x[j] - &x[n + j]).collect();
            Some(primitive_integer(&d))
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpBox {
    /// The LP relaxation is empty, hence so is the integer program.
    Infeasible,
    Unbounded,
    Bounded(Vec<(BigInt, BigInt)>),
}

/// Integer bounding box of `{x : A x <= b, c.x >= floor}` (the objective
/// cut only when `floor` is given), from one exact LP per variable and side.
pub fn inequality_lp_box(ip: &InequalityIp, floor: Option<&BigInt>) -> LpBox {
    let n = ip.n();
    let m = ip.m();
    let extra = usize::from(floor.is_some());
    let width = 2 * n + m + extra;
    let mut a = IntMatrix::zeros(m + extra, width);
    let mut b = ip.b.clone();
    for i in 0..m {
        for j in 0..n {
            a.set(i, j, ip.a.get(i, j).clone());
            a.set(i, n + j, -ip.a.get(i, j));
        }
        a.set(i, 2 * n + i, BigInt::one());
    }
    if let Some(f) = floor {
        // c.x - s = floor
        for j in 0..n {
            a.set(m, j, ip.c[j].clone());
            a.set(m, n + j, -&ip.c[j]);
        }
        a.set(m, 2 * n + m, -BigInt::one());
        b.push(f.clone());
    }
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut bounds = [BigInt::zero(), BigInt::zero()];
        for (side, sign) in [(0usize, -1i32), (1, 1)] {
            let mut c = vec![BigInt::zero(); width];
            c[j] = BigInt::from(sign);
            c[n + j] = BigInt::from(-sign);
            let lp = RationalLp::from_integers(&a, &b, &c).expect("consistent shapes");
            match rational_simplex(&lp) {
                LpOutcome::Infeasible => return LpBox::Infeasible,
                LpOutcome::Unbounded { .. } => return LpBox::Unbounded,
                LpOutcome::Optimal { value, .. } => {
                    bounds[side] = if side == 0 {
                        (-value).ceil().to_integer()
                    } else {
                        value.floor().to_integer()
                    };
                }
            }
        }
        let [lo, hi] = bounds;
        out.push((lo, hi));
    }
    LpBox::Bounded(out)
}
